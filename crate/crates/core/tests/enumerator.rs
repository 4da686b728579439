//! The pruned search must emit exactly the brute-force filter of the box.

use brieskorn::enumerate::{enumerate_candidates, SearchRange};
use brieskorn::topology::{is_homotopy_sphere, klt_certificate, ExponentTuple};

/// Filter every sorted tuple of the box through the public certificates,
/// with no pruning at all.
fn brute_force(range: &SearchRange) -> Vec<Vec<u64>> {
    let m = range.m();
    let mut out = Vec::new();
    let mut values = vec![0u64; m];
    fn rec(
        range: &SearchRange,
        d: usize,
        values: &mut Vec<u64>,
        out: &mut Vec<Vec<u64>>,
    ) {
        if d == range.m() {
            let tuple = ExponentTuple::from_sorted(values.clone()).unwrap();
            if is_homotopy_sphere(&tuple).unwrap().is_sphere()
                && klt_certificate(&tuple).passes
            {
                out.push(values.clone());
            }
            return;
        }
        let start = if d == 0 {
            range.lo()[d]
        } else {
            values[d - 1].max(range.lo()[d])
        };
        for v in start..=range.hi()[d] {
            values[d] = v;
            rec(range, d + 1, values, out);
        }
    }
    rec(range, 0, &mut values, &mut out);
    out
}

#[test]
fn pruned_search_equals_brute_force_m5() {
    let range = SearchRange::new(vec![2; 5], vec![20; 5]).unwrap();
    let mut emitted = Vec::new();
    enumerate_candidates(&range, |t| {
        emitted.push(t.entries().to_vec());
        Ok(())
    })
    .unwrap();
    assert_eq!(emitted, brute_force(&range));
    assert!(!emitted.is_empty());
}

#[test]
fn pruned_search_equals_brute_force_m4() {
    let range = SearchRange::new(vec![2; 4], vec![16; 4]).unwrap();
    let mut emitted = Vec::new();
    enumerate_candidates(&range, |t| {
        emitted.push(t.entries().to_vec());
        Ok(())
    })
    .unwrap();
    assert_eq!(emitted, brute_force(&range));
}

#[test]
fn pruned_search_equals_brute_force_off_origin_box() {
    let range = SearchRange::new(vec![3, 4, 5, 5, 6], vec![9, 12, 14, 15, 24]).unwrap();
    let mut emitted = Vec::new();
    enumerate_candidates(&range, |t| {
        emitted.push(t.entries().to_vec());
        Ok(())
    })
    .unwrap();
    assert_eq!(emitted, brute_force(&range));
}

#[test]
fn every_emission_passes_condition_one() {
    use num_traits::One;
    let range = SearchRange::new(vec![2; 5], vec![14; 5]).unwrap();
    enumerate_candidates(&range, |t| {
        assert!(t.reciprocal_sum() > num_rational::BigRational::one());
        Ok(())
    })
    .unwrap();
}
