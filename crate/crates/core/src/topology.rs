//! Combinatorial certificates on an exponent tuple: weighted-homogeneity
//! data, the divisor-graph homotopy-sphere criterion, and the three
//! Kähler-Einstein (klt) inequalities.
//!
//! All comparisons are exact-rational; there are no epsilon tests anywhere.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::numeric::{lcm_all, reciprocal_sum, ExactRational};

/// Ordered m-tuple of exponents a = (a₁, …, aₘ), the universal input.
///
/// Entries are at least 2, sorted non-decreasing, with m ≥ 3. Every
/// certificate in this crate is symmetric in the entries, so tuples are
/// canonicalized by sorting on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentTuple {
    a: Vec<u64>,
}

impl ExponentTuple {
    /// Builds a tuple from entries in any order, sorting them.
    pub fn new(mut values: Vec<u64>) -> Result<Self> {
        values.sort_unstable();
        Self::from_sorted(values)
    }

    /// Builds a tuple from entries that must already be non-decreasing.
    pub fn from_sorted(values: Vec<u64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::TupleTooShort { got: values.len() });
        }
        for (i, &v) in values.iter().enumerate() {
            if v < 2 {
                return Err(Error::ExponentTooSmall { index: i, value: v });
            }
            if i > 0 && values[i - 1] > v {
                return Err(Error::NotSorted { index: i });
            }
        }
        Ok(ExponentTuple { a: values })
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn entries(&self) -> &[u64] {
        &self.a
    }

    pub fn max(&self) -> u64 {
        *self.a.last().expect("tuple is non-empty")
    }

    /// Exact Σ 1/aᵢ.
    pub fn reciprocal_sum(&self) -> ExactRational {
        reciprocal_sum(&self.a)
    }

    /// Least common multiple of the entries.
    pub fn lcm(&self) -> BigUint {
        lcm_all(&self.a).expect("tuple is non-empty")
    }

    /// Π (aᵢ − 1), the number of interior lattice points of the box.
    pub fn lattice_points(&self) -> u128 {
        self.a
            .iter()
            .try_fold(1u128, |acc, &v| acc.checked_mul((v - 1) as u128))
            .unwrap_or(u128::MAX)
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.a {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Degree C = lcm(aᵢ) and weights wᵢ = C/aᵢ of the defining polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightData {
    pub degree: BigUint,
    pub weights: Vec<BigUint>,
}

/// Weighted-homogeneity data: wᵢ·aᵢ = C for every i.
pub fn weights_and_degree(tuple: &ExponentTuple) -> WeightData {
    let degree = tuple.lcm();
    let weights = tuple
        .entries()
        .iter()
        .map(|&a| &degree / BigUint::from(a))
        .collect();
    WeightData { degree, weights }
}

/// Graph on the tuple entries: vertices are positions, edges join positions
/// whose labels share a common factor. Duplicate labels are distinct
/// vertices, so two positions both labeled 2 are adjacent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorGraph {
    labels: Vec<u64>,
    /// Component id per vertex, ids dense from 0.
    component: Vec<usize>,
    /// Vertex sets per component id, each sorted.
    components: Vec<Vec<usize>>,
    /// Sorted positions of isolated vertices.
    isolated: Vec<usize>,
    /// Sorted positions in the component holding the even labels; empty when
    /// every label is odd.
    even_component: Vec<usize>,
}

impl DivisorGraph {
    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn isolated(&self) -> &[usize] {
        &self.isolated
    }

    pub fn even_component(&self) -> &[usize] {
        &self.even_component
    }
}

/// Builds the divisor graph with components, isolated set, and the even
/// component populated.
pub fn build_graph(tuple: &ExponentTuple) -> DivisorGraph {
    let labels = tuple.entries().to_vec();
    let m = labels.len();

    // Union-find over at most a dozen vertices.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = x;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }
    let mut degree = vec![0usize; m];
    for i in 0..m {
        for j in i + 1..m {
            if labels[i].gcd(&labels[j]) > 1 {
                degree[i] += 1;
                degree[j] += 1;
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut component = vec![0usize; m];
    let mut ids: Vec<usize> = Vec::new();
    for v in 0..m {
        let root = find(&mut parent, v);
        let id = match ids.iter().position(|&r| r == root) {
            Some(id) => id,
            None => {
                ids.push(root);
                ids.len() - 1
            }
        };
        component[v] = id;
    }
    let mut components = vec![Vec::new(); ids.len()];
    for v in 0..m {
        components[component[v]].push(v);
    }

    let isolated: Vec<usize> = (0..m).filter(|&v| degree[v] == 0).collect();
    let even_component = labels
        .iter()
        .position(|&l| l % 2 == 0)
        .map(|v| components[component[v]].clone())
        .unwrap_or_default();

    DivisorGraph {
        labels,
        component,
        components,
        isolated,
        even_component,
    }
}

/// Outcome of the homotopy-sphere test, carrying the branch that fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SphereVerdict {
    /// The graph has at least two isolated vertices; the two lowest
    /// positions are the witness.
    TwoIsolated { first: usize, second: usize },
    /// Exactly one isolated vertex, its label odd, the even component has an
    /// odd number of vertices and pairwise gcd exactly 2 throughout.
    EvenComponent {
        isolated: usize,
        even_vertices: usize,
    },
    NotSphere,
}

impl SphereVerdict {
    pub fn is_sphere(&self) -> bool {
        !matches!(self, SphereVerdict::NotSphere)
    }
}

/// Homotopy-sphere criterion on the divisor graph; defined for m > 3.
///
/// Branch order: at least two isolated vertices wins first; otherwise the
/// link is a sphere only when the graph has a single isolated vertex with an
/// odd label, the even component has an odd number of vertices, and every
/// distinct pair inside it has gcd exactly 2. An isolated even label never
/// satisfies the second branch.
pub fn is_homotopy_sphere(tuple: &ExponentTuple) -> Result<SphereVerdict> {
    if tuple.m() <= 3 {
        return Err(Error::SphereArity { m: tuple.m() });
    }
    let graph = build_graph(tuple);
    sphere_verdict_from_graph(&graph)
}

pub(crate) fn sphere_verdict_from_graph(graph: &DivisorGraph) -> Result<SphereVerdict> {
    let isolated = graph.isolated();
    if isolated.len() >= 2 {
        return Ok(SphereVerdict::TwoIsolated {
            first: isolated[0],
            second: isolated[1],
        });
    }
    if let [v] = isolated {
        if graph.labels[*v] % 2 == 1 {
            let even = graph.even_component();
            if even.len() % 2 == 1 && even_component_pairwise_gcd_two(graph) {
                return Ok(SphereVerdict::EvenComponent {
                    isolated: *v,
                    even_vertices: even.len(),
                });
            }
        }
    }
    Ok(SphereVerdict::NotSphere)
}

fn even_component_pairwise_gcd_two(graph: &DivisorGraph) -> bool {
    let even = graph.even_component();
    for (idx, &i) in even.iter().enumerate() {
        for &j in &even[idx + 1..] {
            if graph.labels[i].gcd(&graph.labels[j]) != 2 {
                return false;
            }
        }
    }
    true
}

/// Per-inequality result of the Kähler-Einstein certificate, with the
/// intermediate quantities Cʲ = lcm(aᵢ : i ≠ j), bⱼ = gcd(aⱼ, Cʲ) and
/// dⱼ = aⱼ/bⱼ exposed. dⱼ drives no decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeVerdict {
    pub cond1: bool,
    pub cond2: bool,
    pub cond3: bool,
    pub reciprocal_sum: ExactRational,
    pub complement_lcm: Vec<BigUint>,
    pub b: Vec<u64>,
    pub d: Vec<u64>,
    pub passes: bool,
}

/// The three klt inequalities on Σ 1/aᵢ:
/// (1) 1 < Σ 1/aᵢ,
/// (2) Σ 1/aᵢ < 1 + ((m−1)/(m−2))·min 1/aᵢ,
/// (3) Σ 1/aᵢ < 1 + ((m−1)/(m−2))·min over all pairs i, j of 1/(bᵢbⱼ).
///
/// The pair minimum in (3) ranges over ordered pairs including i = j, so it
/// equals 1/(max bⱼ)². Restricting to distinct indices admits tuples such as
/// (2, 3, 7, 29, 30) whose largest bⱼ is a lone composite, and the census
/// counts single that reading out as wrong.
pub fn klt_certificate(tuple: &ExponentTuple) -> KeVerdict {
    let m = tuple.m();
    let a = tuple.entries();
    let sum = tuple.reciprocal_sum();
    let one = BigRational::one();
    let ratio = BigRational::new(BigInt::from(m as u64 - 1), BigInt::from(m as u64 - 2));

    let cond1 = one < sum;
    // min 1/aᵢ = 1/max aᵢ
    let cond2 = sum
        < &one + &ratio * BigRational::new(BigInt::one(), BigInt::from(tuple.max()));

    let complement_lcm: Vec<BigUint> = (0..m)
        .map(|j| {
            let rest: Vec<u64> = a
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, &v)| v)
                .collect();
            lcm_all(&rest).expect("m >= 3 leaves a non-empty complement")
        })
        .collect();
    let b: Vec<u64> = (0..m)
        .map(|j| {
            let g = BigUint::from(a[j]).gcd(&complement_lcm[j]);
            u64::try_from(&g).expect("gcd is bounded by the exponent")
        })
        .collect();
    let d: Vec<u64> = (0..m).map(|j| a[j] / b[j]).collect();

    let b_max = *b.iter().max().expect("tuple is non-empty");
    let max_pair = b_max as u128 * b_max as u128;
    let cond3 = sum
        < &one
            + &ratio
                * BigRational::new(BigInt::one(), BigInt::from(max_pair));

    KeVerdict {
        cond1,
        cond2,
        cond3,
        reciprocal_sum: sum,
        complement_lcm,
        b,
        d,
        passes: cond1 && cond2 && cond3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(values: &[u64]) -> ExponentTuple {
        ExponentTuple::new(values.to_vec()).unwrap()
    }

    #[test]
    fn tuple_validation() {
        assert!(matches!(
            ExponentTuple::new(vec![2, 3]),
            Err(Error::TupleTooShort { got: 2 })
        ));
        assert!(matches!(
            ExponentTuple::new(vec![1, 3, 5]),
            Err(Error::ExponentTooSmall { index: 0, value: 1 })
        ));
        assert!(matches!(
            ExponentTuple::from_sorted(vec![2, 3, 7, 43, 5]),
            Err(Error::NotSorted { index: 4 })
        ));
        assert_eq!(tuple(&[5, 3, 2]).entries(), &[2, 3, 5]);
    }

    #[test]
    fn weights_examples() {
        let w = weights_and_degree(&tuple(&[2, 2, 2, 3, 5]));
        assert_eq!(w.degree, BigUint::from(30u32));
        let expected: Vec<BigUint> =
            [15u32, 15, 15, 10, 6].iter().map(|&v| BigUint::from(v)).collect();
        assert_eq!(w.weights, expected);

        let w = weights_and_degree(&tuple(&[2, 3, 7, 43, 47]));
        assert_eq!(w.degree, BigUint::from(84_882u64));
        let expected: Vec<BigUint> = [42_441u64, 28_294, 12_126, 1_974, 1_806]
            .iter()
            .map(|&v| BigUint::from(v))
            .collect();
        assert_eq!(w.weights, expected);

        let w = weights_and_degree(&tuple(&[9, 9, 9]));
        assert_eq!(w.degree, BigUint::from(9u32));
        assert_eq!(w.weights, vec![BigUint::one(); 3]);
    }

    #[test]
    fn weights_sum_identity() {
        // Σ wᵢ/C = Σ 1/aᵢ exactly.
        for t in [
            tuple(&[2, 2, 2, 3, 5]),
            tuple(&[2, 3, 7, 43, 47]),
            tuple(&[4, 4, 4, 4, 13]),
            tuple(&[6, 6, 6, 6, 6, 10, 25, 59, 73]),
        ] {
            let w = weights_and_degree(&t);
            let sum: BigRational = w
                .weights
                .iter()
                .map(|wi| {
                    BigRational::new(
                        BigInt::from(wi.clone()),
                        BigInt::from(w.degree.clone()),
                    )
                })
                .sum();
            assert_eq!(sum, t.reciprocal_sum());
        }
    }

    #[test]
    fn graph_examples() {
        let g = build_graph(&tuple(&[2, 2, 2, 3, 5]));
        assert_eq!(g.isolated(), &[3, 4]);
        assert_eq!(g.even_component(), &[0, 1, 2]);

        let g = build_graph(&tuple(&[2, 3, 5, 7, 11]));
        assert_eq!(g.isolated(), &[0, 1, 2, 3, 4]);
        assert_eq!(g.even_component(), &[0]);

        let g = build_graph(&tuple(&[2, 4, 6, 8, 10]));
        assert!(g.isolated().is_empty());
        assert_eq!(g.even_component(), &[0, 1, 2, 3, 4]);
        assert_eq!(g.components().len(), 1);
    }

    #[test]
    fn duplicate_labels_are_adjacent() {
        let g = build_graph(&tuple(&[2, 2, 3, 35]));
        assert_eq!(g.even_component(), &[0, 1]);
        assert_eq!(g.isolated(), &[2, 3]);
    }

    #[test]
    fn sphere_two_isolated_branch() {
        match is_homotopy_sphere(&tuple(&[2, 2, 2, 3, 5])).unwrap() {
            SphereVerdict::TwoIsolated { first, second } => {
                assert_eq!((first, second), (3, 4));
            }
            other => panic!("expected two-isolated branch, got {other:?}"),
        }
    }

    #[test]
    fn sphere_even_component_branch() {
        // One isolated odd vertex (11), even component of three 2s with
        // pairwise gcd exactly 2, remaining odd labels connected among
        // themselves.
        let verdict = is_homotopy_sphere(&tuple(&[2, 2, 2, 11, 15, 21, 35])).unwrap();
        match verdict {
            SphereVerdict::EvenComponent {
                isolated,
                even_vertices,
            } => {
                assert_eq!(isolated, 3);
                assert_eq!(even_vertices, 3);
            }
            other => panic!("expected even-component branch, got {other:?}"),
        }

        // The Kervaire-type shape (2,2,2,2,2,3): five 2s, isolated odd 3.
        let verdict = is_homotopy_sphere(&tuple(&[2, 2, 2, 2, 2, 3])).unwrap();
        assert!(matches!(
            verdict,
            SphereVerdict::EvenComponent {
                even_vertices: 5,
                ..
            }
        ));
    }

    #[test]
    fn sphere_negative_cases() {
        // No isolated vertex at all.
        assert_eq!(
            is_homotopy_sphere(&tuple(&[2, 4, 6, 8, 10])).unwrap(),
            SphereVerdict::NotSphere
        );
        // Exactly one isolated vertex whose label is even: the second branch
        // requires an odd label, so this is not a sphere.
        let t = tuple(&[2, 5, 9, 15, 21]);
        let g = build_graph(&t);
        assert_eq!(g.isolated(), &[0]);
        assert_eq!(g.even_component(), &[0]);
        assert_eq!(is_homotopy_sphere(&t).unwrap(), SphereVerdict::NotSphere);
        // Even component of even size blocks the second branch.
        assert_eq!(
            is_homotopy_sphere(&tuple(&[2, 2, 3, 9])).unwrap(),
            SphereVerdict::NotSphere
        );
        // Pairwise gcd above 2 inside the even component blocks it too.
        assert_eq!(
            is_homotopy_sphere(&tuple(&[4, 4, 4, 15, 21, 35, 11])).unwrap(),
            SphereVerdict::NotSphere
        );
    }

    #[test]
    fn sphere_branches_are_exclusive() {
        // A second-branch verdict implies exactly one isolated vertex.
        let t = tuple(&[2, 2, 2, 11, 15, 21, 35]);
        if let SphereVerdict::EvenComponent { .. } = is_homotopy_sphere(&t).unwrap() {
            assert_eq!(build_graph(&t).isolated().len(), 1);
        } else {
            panic!("expected even-component branch");
        }
    }

    #[test]
    fn sphere_arity_guard() {
        assert!(matches!(
            is_homotopy_sphere(&tuple(&[2, 3, 5])),
            Err(Error::SphereArity { m: 3 })
        ));
    }

    #[test]
    fn klt_all_three_pass() {
        let v = klt_certificate(&tuple(&[4, 4, 4, 4, 13]));
        assert!(v.cond1 && v.cond2 && v.cond3 && v.passes);
        assert_eq!(v.b, vec![4, 4, 4, 4, 1]);
    }

    #[test]
    fn klt_cond1_fails_below_one() {
        let v = klt_certificate(&tuple(&[2, 3, 7, 43, 1807]));
        assert!(!v.cond1);
        assert!(v.cond2);
        assert!(!v.passes);
    }

    #[test]
    fn klt_cond3_fails_on_shared_factor() {
        let v = klt_certificate(&tuple(&[2, 3, 7, 43, 43]));
        assert!(v.cond1);
        assert!(v.cond2);
        assert!(!v.cond3);
        assert_eq!(v.b, vec![1, 1, 1, 43, 43]);
        assert_eq!(v.d, vec![2, 3, 7, 1, 1]);
    }

    #[test]
    fn klt_cond3_pair_minimum_includes_squares() {
        // b = (2, 3, 1, 1, 6): the largest product of two b-values is the
        // square 36, not the distinct-pair maximum 18, and that is what
        // rejects this tuple.
        let v = klt_certificate(&tuple(&[2, 3, 7, 29, 30]));
        assert_eq!(v.b, vec![2, 3, 1, 1, 6]);
        assert!(v.cond1 && v.cond2);
        assert!(!v.cond3);
    }

    #[test]
    fn klt_cond1_true_cond2_false() {
        let v = klt_certificate(&tuple(&[2, 2, 2, 3, 5]));
        assert!(v.cond1);
        assert!(!v.cond2);
    }

    #[test]
    fn klt_pairwise_coprime_reduces_cond3_to_cond2_shape() {
        let v = klt_certificate(&tuple(&[2, 3, 5, 7, 11]));
        assert!(v.b.iter().all(|&b| b == 1));
        // With all bⱼ = 1 the pair minimum is 1, so condition 3 is the sum
        // against 1 + (m−1)/(m−2).
        let bound = BigRational::one()
            + BigRational::new(BigInt::from(4), BigInt::from(3));
        assert_eq!(v.cond3, v.reciprocal_sum < bound);
    }

    #[test]
    fn klt_b_definition_holds() {
        let t = tuple(&[2, 3, 7, 43, 43]);
        let v = klt_certificate(&t);
        for j in 0..t.m() {
            let g = BigUint::from(t.entries()[j]).gcd(&v.complement_lcm[j]);
            assert_eq!(BigUint::from(v.b[j]), g);
            assert_eq!(v.b[j] * v.d[j], t.entries()[j]);
        }
    }

    #[test]
    fn klt_accepts_m_equals_3() {
        let v = klt_certificate(&tuple(&[2, 3, 5]));
        assert!(v.cond1);
    }
}
