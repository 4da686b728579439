use brieskorn::enumerate::{enumerate_candidates, SearchRange};
use brieskorn::io::write_candidates;
use brieskorn::orchestrate::{run_hunt, JobOptions};
use std::time::Instant;

fn main() {
    let range =
        SearchRange::new(vec![2, 3, 4, 5, 6, 7, 8], vec![6, 11, 30, 30, 30, 30, 30]).unwrap();
    let mut tuples = Vec::new();
    enumerate_candidates(&range, |t| {
        tuples.push(t.clone());
        Ok(())
    })
    .unwrap();

    let dir = std::env::temp_dir().join("hunt_probe_full");
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("dim11-all.txt");
    let mut bytes = Vec::new();
    write_candidates(&mut bytes, &tuples).unwrap();
    std::fs::write(&input, bytes).unwrap();

    let t0 = Instant::now();
    let outcome = run_hunt(&input, &dir.join("hunt.tsv"), &JobOptions::default()).unwrap();
    println!(
        "full dim-11 hunt: {} classes of {}, consumed {}, completed {} in {:.2?}",
        outcome.recorded,
        outcome.partition.order(),
        outcome.consumed,
        outcome.completed,
        t0.elapsed()
    );
}
