use brieskorn::enumerate::{enumerate_candidates, SearchRange};
use brieskorn::topology::{is_homotopy_sphere, klt_certificate, ExponentTuple};
use std::time::Instant;

/// Independent homotopy-sphere oracle: the link is a sphere iff the
/// monodromy characteristic polynomial at 1 has absolute value 1, i.e.
/// prod over lattice points of |1 - exp(2*pi*i*sum x_i/a_i)| == 1.
fn oracle_is_sphere(t: &ExponentTuple) -> bool {
    let a = t.entries();
    let n: u64 = u64::try_from(&t.lcm()).unwrap();
    let steps: Vec<u64> = a.iter().map(|&ai| n / ai).collect();
    fn rec(a: &[u64], steps: &[u64], n: u64, d: usize, rho: u64, log_sum: &mut f64) -> bool {
        if d == a.len() {
            if rho == 0 {
                return false; // eigenvalue 1 appears => Delta(1) = 0
            }
            *log_sum += (2.0 * (std::f64::consts::PI * rho as f64 / n as f64).sin()).ln();
            return true;
        }
        let mut r = rho;
        for _ in 1..a[d] {
            r += steps[d];
            if r >= n {
                r -= n;
            }
            if !rec(a, steps, n, d + 1, r, log_sum) {
                return false;
            }
        }
        true
    }
    let mut log_sum = 0f64;
    if !rec(a, &steps, n, 0, 0, &mut log_sum) {
        return false;
    }
    // |Delta(1)| is a non-negative integer; 1 iff log-magnitude ~ 0.
    log_sum.abs() < 0.3
}

/// cond3 with the pair minimum taken over all ordered pairs including i = j.
fn cond3_with_squares(t: &ExponentTuple) -> bool {
    let v = klt_certificate(t);
    let m = t.m();
    let max_pair = (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .map(|(i, j)| v.b[i] as u128 * v.b[j] as u128)
        .max()
        .unwrap();
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::One;
    let ratio = BigRational::new(BigInt::from(m as u64 - 1), BigInt::from(m as u64 - 2));
    v.reciprocal_sum
        < BigRational::one() + ratio * BigRational::new(BigInt::one(), BigInt::from(max_pair))
}

fn boxes(lo: &[u64], hi: &[u64], d: usize, values: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if d == lo.len() {
        f(values);
        return;
    }
    let start = if d == 0 { lo[d] } else { values[d - 1].max(lo[d]) };
    for v in start..=hi[d] {
        values[d] = v;
        boxes(lo, hi, d + 1, values, f);
    }
}

fn main() {
    // 1. Compare the graph sphere verdict against the spectral oracle on an
    //    exhaustive small box.
    let t0 = Instant::now();
    let mut checked = 0u64;
    let mut mismatches = Vec::new();
    let lo = vec![2u64; 5];
    let hi = vec![10u64; 5];
    let mut values = vec![0u64; 5];
    boxes(&lo, &hi, 0, &mut values, &mut |vals: &[u64]| {
        let t = ExponentTuple::from_sorted(vals.to_vec()).unwrap();
        let graph_says = is_homotopy_sphere(&t).unwrap().is_sphere();
        let oracle_says = oracle_is_sphere(&t);
        checked += 1;
        if graph_says != oracle_says {
            mismatches.push((t.clone(), graph_says, oracle_says));
        }
    });
    println!(
        "sphere oracle: {} tuples checked, {} mismatches in {:.2?}",
        checked,
        mismatches.len(),
        t0.elapsed()
    );
    for (t, g, o) in mismatches.iter().take(20) {
        println!("  mismatch {}: graph={} oracle={}", t, g, o);
    }

    // 2. Recount the census under both cond3 readings.
    let range = SearchRange::default_for(5).unwrap();
    let mut plain = 0u64;
    let mut with_squares = 0u64;
    let mut differing = Vec::new();
    enumerate_candidates(&range, |t| {
        plain += 1;
        if cond3_with_squares(t) {
            with_squares += 1;
        } else {
            differing.push(t.clone());
        }
        Ok(())
    })
    .unwrap();
    println!(
        "m=5: distinct-pair cond3 {} | incl-squares cond3 {}",
        plain, with_squares
    );
    for t in differing.iter().take(12) {
        let v = klt_certificate(t);
        println!("  square-sensitive: {} b={:?}", t, v.b);
    }

    let range =
        SearchRange::new(vec![2, 3, 4, 5, 6, 7, 8], vec![6, 11, 30, 30, 30, 30, 30]).unwrap();
    let mut plain = 0u64;
    let mut with_squares = 0u64;
    enumerate_candidates(&range, |t| {
        plain += 1;
        if cond3_with_squares(t) {
            with_squares += 1;
        }
        Ok(())
    })
    .unwrap();
    println!(
        "m=7: distinct-pair cond3 {} | incl-squares cond3 {}",
        plain, with_squares
    );
}
