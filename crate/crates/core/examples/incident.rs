use brieskorn::signature::{tau_zagier, Precision, PrecisionLevel};
use brieskorn::ExponentTuple;
use std::time::Instant;

fn main() {
    let t = ExponentTuple::new(vec![3, 4, 8, 8, 9, 43, 83, 85, 97]).unwrap();
    let t0 = Instant::now();
    match tau_zagier(&t, Precision::Fixed(PrecisionLevel::Hardware), PrecisionLevel::Bits256) {
        Ok(z) => println!(
            "hardware: tau={} class={} residual={:.6} ({:.2?})",
            z.tau,
            brieskorn::signature::km_class(z.tau, 9).map(|c| c.to_string()).unwrap_or("n/a".into()),
            z.residual,
            t0.elapsed()
        ),
        Err(e) => println!("hardware: refused: {e} ({:.2?})", t0.elapsed()),
    }
    let t0 = Instant::now();
    match tau_zagier(&t, Precision::Fixed(PrecisionLevel::Bits128), PrecisionLevel::Bits256) {
        Ok(z) => println!(
            "extended: tau={} class={} residual={:.3e} ({:.2?})",
            z.tau,
            brieskorn::signature::km_class(z.tau, 9).unwrap(),
            z.residual,
            t0.elapsed()
        ),
        Err(e) => println!("extended: refused: {e} ({:.2?})", t0.elapsed()),
    }
}
