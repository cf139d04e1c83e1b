//! Structural properties of curvature, trace invariants, Heisenberg-type maps
//! and kernel lattices, on the catalog and on random maps.

mod common;

use nilcurv::catalog::{self, PAIRS};
use nilcurv::heisenberg::{
    clifford, clifford_algebra, curvature_fingerprint, is_heisenberg_type, wedge_operator,
    wedge_power_trace_formula,
};
use nilcurv::invariants::{closed_form_invariants, oracle_invariants, InvariantId, OracleOptions, TensorCache};
use nilcurv::isospec::{kernel_lattice, length_spectrum, LatticeBasis};
use nilcurv::linalg::mat_mul;
use nilcurv::liealg::{connection, covariant_derivative, curvature_tensor, ricci};
use nilcurv::traceinv::{eval_named_basics, trace_invariant, NAMED_BASICS};
use nilcurv::{build_algebra, FrameTensor, JMap, Mat, Rational};
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

fn catalog_maps(max_dim: usize) -> Vec<(String, JMap)> {
    catalog::ids()
        .into_iter()
        .map(|id| {
            let j = catalog::get(&id).unwrap().j;
            (id, j)
        })
        .filter(|(_, j)| j.dim() <= max_dim)
        .collect()
}

/// `T + T∘σ + T∘σ²` for the cyclic shift σ of the first three slots.
fn cyclic_sum(t: &FrameTensor) -> FrameTensor {
    let n = t.arity();
    let shift = |p: [usize; 3]| -> Vec<usize> { p.iter().copied().chain(3..n).collect() };
    t.add(&t.permute(&shift([1, 2, 0])).unwrap())
        .unwrap()
        .add(&t.permute(&shift([2, 0, 1])).unwrap())
        .unwrap()
}

fn check_curvature_structure(j: &JMap, label: &str) {
    let alg = build_algebra(j);
    let conn = connection(&alg);
    let gamma = conn.gamma();
    // metric: Γ(a,b,c) = −Γ(a,c,b); torsion-free: Γ(a,b,·) − Γ(b,a,·) = [e_a, e_b]
    assert!(gamma.has_symmetry(&[0, 2, 1], &q(-1)).unwrap(), "{label}: metric");
    assert_eq!(
        gamma.sub(&gamma.permute(&[1, 0, 2]).unwrap()).unwrap(),
        *alg.bracket(),
        "{label}: torsion"
    );
    let r = curvature_tensor(&alg).unwrap();
    assert!(r.has_symmetry(&[1, 0, 2, 3], &q(-1)).unwrap(), "{label}");
    assert!(r.has_symmetry(&[0, 1, 3, 2], &q(-1)).unwrap(), "{label}");
    assert!(r.has_symmetry(&[2, 3, 0, 1], &q(1)).unwrap(), "{label}");
    assert!(cyclic_sum(&r).is_zero(), "{label}: first Bianchi");
    let nabla_r = covariant_derivative(&r, &conn).unwrap();
    assert!(cyclic_sum(&nabla_r).is_zero(), "{label}: second Bianchi");
    assert!(ricci(&alg).has_symmetry(&[1, 0], &q(1)).unwrap(), "{label}");
}

#[test]
fn curvature_structure_on_catalog() {
    for (id, j) in catalog_maps(usize::MAX) {
        check_curvature_structure(&j, &id);
    }
}

/// Entries with an odd number of `v`-indices vanish, for every covariant
/// derivative order computed.
#[test]
fn parity_vanishing_on_fourthree() {
    for id in ["fourthree", "fourthree-prime"] {
        let j = catalog::get(id).unwrap().j;
        let m = j.m();
        let cache = TensorCache::for_jmap(&j).unwrap();
        let tensors = [
            cache.curvature(),
            cache.nabla_curvature(),
            cache.nabla2_curvature(),
            cache.ricci(),
            cache.nabla_ricci(),
            cache.nabla2_ricci(),
        ];
        for t in tensors {
            assert!(!t.is_zero());
            // stored entries are exactly the nonzero ones
            for (idx, v) in t.sorted_entries() {
                assert!(!v.is_zero());
                let odd = idx.iter().filter(|&&i| i < m).count() % 2 == 1;
                assert!(!odd, "{id}: nonzero entry at {idx:?}");
            }
        }
    }
}

/// Rotating a trace word cyclically, reversing it, reordering the traces or
/// renaming letters leaves the invariant unchanged up to the reversal sign.
#[test]
fn trace_invariant_symmetries() {
    for (id, j) in catalog_maps(usize::MAX).into_iter().filter(|(_, j)| j.r() <= 3) {
        for spec in NAMED_BASICS {
            let base = trace_invariant(spec, &j).unwrap();
            let groups: Vec<&str> = spec.split('|').collect();
            let rotated: Vec<String> = groups.iter().map(|g| format!("{}{}", &g[1..], &g[..1])).collect();
            assert_eq!(trace_invariant(&rotated.join("|"), &j).unwrap(), base, "{id} {spec}");
            let mut reordered: Vec<&str> = groups.clone();
            reordered.reverse();
            assert_eq!(trace_invariant(&reordered.join("|"), &j).unwrap(), base, "{id} {spec}");
            let renamed: String = spec
                .chars()
                .map(|c| match c {
                    'a' => 'x',
                    'b' => 'a',
                    'c' => 'b',
                    other => other,
                })
                .collect();
            assert_eq!(trace_invariant(&renamed, &j).unwrap(), base, "{id} {spec}");
            let reversed: Vec<String> = groups.iter().map(|g| g.chars().rev().collect()).collect();
            let sign = if groups.iter().map(|g| g.len()).sum::<usize>().is_multiple_of(2) { 1 } else { -1 };
            assert_eq!(trace_invariant(&reversed.join("|"), &j).unwrap(), q(sign) * &base, "{id} {spec}");
        }
    }
}

/// For every catalog pair the maps are isospectral, so `Tr(j_Z j_W)` agrees.
#[test]
fn pairwise_gram_agrees() {
    for (name, x, y) in PAIRS {
        let a = catalog::get(x).unwrap().j;
        let b = catalog::get(y).unwrap().j;
        assert_eq!(a.trace_gram(), b.trace_gram(), "{name}");
    }
}

#[test]
fn heisenberg_relation_for_all_constructions() {
    for (id, j) in catalog_maps(usize::MAX).into_iter().filter(|(id, _)| id.starts_with("heis")) {
        assert!(is_heisenberg_type(&j).holds, "{id}");
        let r = j.r();
        for a in 0..r {
            for b in 0..r {
                let anti = mat_mul(j.mat(a), j.mat(b))
                    .unwrap()
                    .add(&mat_mul(j.mat(b), j.mat(a)).unwrap())
                    .unwrap();
                let expected = if a == b { Mat::identity(j.m()).scale(&q(-2)) } else { Mat::zeros(j.m(), j.m()) };
                assert_eq!(anti, expected, "{id} ({a},{b})");
            }
        }
    }
}

fn word_product(j: &JMap, word: &[usize]) -> Mat {
    word.iter()
        .fold(Mat::identity(j.m()), |acc, &a| mat_mul(&acc, j.mat(a)).unwrap())
}

/// Every word reduces to `±` the ordered product of its odd-multiplicity
/// letters, and that product is traceless when it has between 1 and `r − 1`
/// letters or an even number of letters.
fn check_word(j: &JMap, word: &[usize]) {
    let r = j.r();
    let odd: Vec<usize> = (0..r)
        .filter(|a| word.iter().filter(|&&w| w == *a).count() % 2 == 1)
        .collect();
    let full = word_product(j, word);
    let reduced = word_product(j, &odd);
    assert!(
        full == reduced || full == reduced.scale(&q(-1)),
        "word {word:?} does not reduce"
    );
    let l = odd.len();
    if l > 0 && (l < r || l.is_multiple_of(2)) {
        assert!(full.trace().is_zero(), "word {word:?}");
    }
}

#[test]
fn heisenberg_word_traces_r3_exhaustive() {
    for (a, b) in [(1, 0), (2, 0), (1, 1), (0, 3)] {
        let j = clifford(3, a, b).unwrap();
        for len in 1..=6u32 {
            for code in 0..3usize.pow(len) {
                let word: Vec<usize> = (0..len).map(|p| code / 3usize.pow(p) % 3).collect();
                check_word(&j, &word);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heisenberg_word_traces_r7_sampled(word in prop::collection::vec(0usize..7, 1..9), which in 0usize..3) {
        let (a, b) = [(1, 0), (2, 0), (1, 1)][which];
        check_word(&clifford(7, a, b).unwrap(), &word);
    }
}

#[test]
fn heisenberg_ricci_blocks() {
    for (id, j) in catalog_maps(usize::MAX).into_iter().filter(|(id, _)| id.starts_with("heis")) {
        let (m, r) = (j.m(), j.r());
        let ric = ricci(&build_algebra(&j));
        let expected = FrameTensor::from_fn(2, m + r, |i| {
            if i[0] != i[1] {
                q(0)
            } else if i[0] < m {
                Rational::new(-(r as i64), 2)
            } else {
                Rational::new(m as i64, 4)
            }
        })
        .unwrap();
        assert_eq!(ric, expected, "{id}");
    }
}

#[test]
fn wedge_formula_matches_explicit_operator() {
    for (a, b) in [(1, 0), (2, 0), (1, 1), (0, 2), (3, 0)] {
        let j = clifford(3, a, b).unwrap();
        let w = wedge_operator(&build_algebra(&j));
        for qq in 1..=4 {
            assert_eq!(w.power_trace(qq), wedge_power_trace_formula(&j, qq).unwrap(), "({a},{b}) q={qq}");
        }
    }
}

#[test]
fn fingerprints_separate_and_coincide() {
    let fp = |a, b| curvature_fingerprint(&clifford_algebra(3, a, b).unwrap(), 4);
    let (f20, f11, f02) = (fp(2, 0), fp(1, 1), fp(0, 2));
    assert_eq!(f20.ricci_charpoly, f11.ricci_charpoly);
    assert_eq!(f20.first_wedge_difference(&f11), Some(3));
    assert_eq!(f20, f02);
}

#[test]
fn kernel_lattice_symmetric_under_negation() {
    for (id, j) in catalog_maps(12) {
        let r = j.r() as u32;
        for code in 0..5usize.pow(r) {
            let z: Vec<i64> = (0..r).map(|p| (code / 5usize.pow(p) % 5) as i64 - 2).collect();
            let neg: Vec<i64> = z.iter().map(|c| -c).collect();
            assert_eq!(kernel_lattice(&j, &z).unwrap(), kernel_lattice(&j, &neg).unwrap(), "{id} {z:?}");
        }
    }
}

#[test]
fn kernel_lattices_lie_in_the_kernel() {
    let j = catalog::get("fivethree").unwrap().j;
    for z in [[1, 0, 0], [0, 1, 0], [1, 1, 0], [2, -1, 3]] {
        let k = kernel_lattice(&j, &z).unwrap();
        let jz = j.j_z(&z.map(q)).unwrap();
        for v in &k.vectors {
            for row in 0..jz.rows() {
                let s: Rational = v.iter().enumerate().map(|(c, &x)| &jz[(row, c)] * q(x)).sum();
                assert!(s.is_zero());
            }
        }
        assert_eq!(k.rank(), jz.nullspace().len());
    }
}

fn random_jmap(m: usize, r: usize) -> impl Strategy<Value = JMap> {
    let upper = m * (m - 1) / 2;
    prop::collection::vec(prop::collection::vec(-2i64..=2, upper), r).prop_map(move |gens| {
        let mats = gens
            .iter()
            .map(|g| {
                let mut a = Mat::zeros(m, m);
                let mut it = g.iter();
                for i in 0..m {
                    for k in i + 1..m {
                        let v = q(*it.next().unwrap());
                        a[(i, k)] = v.clone();
                        a[(k, i)] = -v;
                    }
                }
                a
            })
            .collect();
        JMap::new(m, mats).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curvature_structure_on_random_maps(j in (2usize..=4, 1usize..=2).prop_flat_map(|(m, r)| random_jmap(m, r))) {
        check_curvature_structure(&j, "random");
    }

    /// Trace invariants and curvature invariants only depend on the
    /// equivalence class of `j` under `O(m) × O(r)`.
    #[test]
    fn equivalence_invariance(
        (j, a, b) in (3usize..=4, 1usize..=2).prop_flat_map(|(m, r)| {
            (random_jmap(m, r), common::orthogonal(m), common::orthogonal(r))
        })
    ) {
        prop_assert!(common::is_orthogonal(&a) && common::is_orthogonal(&b));
        let t = j.transform(&a, &b).unwrap();
        prop_assert_eq!(eval_named_basics(&j), eval_named_basics(&t));
        let options = OracleOptions::skip_laplacian();
        let x = oracle_invariants(&build_algebra(&j), &options).unwrap();
        let y = oracle_invariants(&build_algebra(&t), &options).unwrap();
        for id in x.ids() {
            prop_assert_eq!(x.get(id), y.get(id), "{}", id);
        }
        let (cj, ct) = (closed_form_invariants(&j), closed_form_invariants(&t));
        prop_assert_eq!(cj.get(InvariantId::Star), ct.get(InvariantId::Star));
    }

    #[test]
    fn equivalence_invariance_on_catalog(a in common::orthogonal(5), b in common::orthogonal(3)) {
        let j = catalog::get("fivethree").unwrap().j;
        let t = j.transform(&a, &b).unwrap();
        prop_assert_eq!(eval_named_basics(&j), eval_named_basics(&t));
    }

    /// The length spectrum only depends on the lattice, not on its basis.
    #[test]
    fn length_spectrum_basis_independent(shear in -3i64..=3) {
        // integer basis of a full-rank sublattice of Z^3, changed by a unimodular shear
        let b = vec![vec![1, 0, 1], vec![0, 2, 1], vec![1, 1, 3]];
        let sheared = vec![
            b[0].clone(),
            (0..3).map(|i| b[1][i] + shear * b[0][i]).collect(),
            (0..3).map(|i| b[2][i] - shear * b[1][i]).collect(),
        ];
        let l1 = LatticeBasis::new(3, b).unwrap();
        let l2 = LatticeBasis::new(3, sheared).unwrap();
        let r2 = q(30);
        prop_assert_eq!(length_spectrum(&l1, &r2).unwrap(), length_spectrum(&l2, &r2).unwrap());
    }
}
