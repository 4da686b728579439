use brieskorn::enumerate::{enumerate_candidates, SearchRange};
use brieskorn::signature::{
    classify, tau_naive, tau_zagier, CostCaps, Precision, PrecisionLevel, Strategy,
};
use brieskorn::ExponentTuple;
use std::time::Instant;

fn main() {
    let t = ExponentTuple::new(vec![6, 6, 6, 6, 6, 10, 25, 59, 73]).unwrap();
    let t0 = Instant::now();
    let rec = classify(&t, Strategy::Auto, &CostCaps::default(), Precision::Auto).unwrap();
    println!(
        "histogram: tau={} N={} class={:?} ({:.2?})",
        rec.tau, rec.multiple, rec.class, t0.elapsed()
    );
    let t0 = Instant::now();
    let naive = tau_naive(&t, 10_000_000_000).unwrap();
    println!("naive:     tau={} ({:.2?})", naive, t0.elapsed());
    let t0 = Instant::now();
    let z = tau_zagier(&t, Precision::Fixed(PrecisionLevel::Bits128), PrecisionLevel::Bits256)
        .unwrap();
    println!("zagier128: tau={} residual={:.3e} ({:.2?})", z.tau, z.residual, t0.elapsed());

    // Census class distribution, printed 1-based the way the reference list
    // orders it: classes 1..27 then class 0 as the 28th slot.
    let t0 = Instant::now();
    let range = SearchRange::default_for(5).unwrap();
    let mut counts = vec![0u64; 28];
    enumerate_candidates(&range, |t| {
        let rec = classify(t, Strategy::Auto, &CostCaps::default(), Precision::Auto).unwrap();
        counts[rec.class.unwrap() as usize] += 1;
        Ok(())
    })
    .unwrap();
    let reference: [u64; 28] = [
        376, 336, 260, 294, 231, 284, 322, 402, 317, 309, 252, 304, 258, 390, 409, 352, 226,
        260, 243, 309, 292, 452, 307, 298, 230, 307, 264, 353,
    ];
    let mine_1based: Vec<u64> = (1..28).map(|i| counts[i]).chain([counts[0]]).collect();
    println!("census classified in {:.2?}", t0.elapsed());
    println!("mine (Sigma_1..Sigma_28): {:?}", mine_1based);
    println!("reference list          : {:?}", reference);
    let diffs: Vec<(usize, u64, u64)> = mine_1based
        .iter()
        .zip(reference.iter())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (&a, &b))| (i + 1, a, b))
        .collect();
    println!("diffs (index, mine, ref): {:?}", diffs);
    println!("sum mine {} vs ref {}", mine_1based.iter().sum::<u64>(), reference.iter().sum::<u64>());
}
