//! Heisenberg-type maps from Clifford modules, the wedge curvature operator
//! `R^{v∧v}`, and necessary-condition fingerprints for curvature equivalence.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants::{
    compare_reports, oracle_invariants, IdentityCheck, InvariantDelta, InvariantId, OracleOptions,
};
use crate::liealg::{build_algebra, curvature_closed_form, JMap, MetricLieAlgebra};
use crate::linalg::{mat_mul, trace_product, Mat};
use crate::rational::Rational;
use crate::traceinv::trace_invariant;

/// Quaternion units `i, j, k`: `e_a e_b = e_c` on each cyclic triple.
const QUATERNION_TRIPLES: &[[usize; 3]] = &[[1, 2, 3]];

/// Octonion units `e_1..e_7`, one oriented triple per line of the Fano plane.
const OCTONION_TRIPLES: &[[usize; 3]] = &[
    [1, 2, 3],
    [1, 4, 5],
    [1, 7, 6],
    [2, 4, 6],
    [2, 5, 7],
    [3, 4, 7],
    [3, 6, 5],
];

/// `C_r`-module `(m^r_+)^a ⊕ (m^r_-)^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CliffordModuleSpec {
    pub r: usize,
    pub a: usize,
    pub b: usize,
}

impl CliffordModuleSpec {
    pub fn new(r: usize, a: usize, b: usize) -> Result<Self> {
        if r != 3 && r != 7 {
            return Err(Error::Unsupported(format!(
                "Clifford modules are built for r = 3 and r = 7 only, not r = {r}"
            )));
        }
        if a + b == 0 {
            return Err(Error::Precondition("a + b must be at least 1".into()));
        }
        Ok(CliffordModuleSpec { r, a, b })
    }

    /// Dimension `d_r` of the irreducible module.
    pub fn block_dim(&self) -> usize {
        if self.r == 3 {
            4
        } else {
            8
        }
    }

    pub fn m(&self) -> usize {
        (self.a + self.b) * self.block_dim()
    }
}

/// Left multiplications by the imaginary units of the algebra with the given
/// oriented triples, on the basis `(1, e_1, …, e_{d-1})`.
fn left_multiplications(d: usize, triples: &[[usize; 3]]) -> Vec<Mat> {
    // product[a][b] = (sign, c) with e_a e_b = sign · e_c
    let mut product = vec![vec![(0i64, 0usize); d]; d];
    for a in 0..d {
        product[0][a] = (1, a);
        product[a][0] = (1, a);
        if a > 0 {
            product[a][a] = (-1, 0);
        }
    }
    for t in triples {
        for s in 0..3 {
            let (x, y, z) = (t[s], t[(s + 1) % 3], t[(s + 2) % 3]);
            product[x][y] = (1, z);
            product[y][x] = (-1, z);
        }
    }
    (1..d)
        .map(|a| {
            let mut l = Mat::zeros(d, d);
            for b in 0..d {
                let (sign, c) = product[a][b];
                l[(c, b)] = Rational::from_int(sign);
            }
            l
        })
        .collect()
}

/// Generators of `m^r_+`, normalized so that `j_1 ⋯ j_r = +Id`.
fn plus_generators(r: usize) -> Vec<Mat> {
    let gens = match r {
        3 => left_multiplications(4, QUATERNION_TRIPLES),
        7 => left_multiplications(8, OCTONION_TRIPLES),
        _ => unreachable!("checked by CliffordModuleSpec"),
    };
    let d = gens[0].rows();
    let refs: Vec<&Mat> = gens.iter().collect();
    let omega = refs[1..]
        .iter()
        .try_fold(refs[0].clone(), |acc, g| mat_mul(&acc, g))
        .expect("square");
    if omega == Mat::identity(d) {
        gens
    } else {
        assert_eq!(
            omega,
            Mat::identity(d).scale(&-Rational::one()),
            "volume element must act as ±Id"
        );
        let minus = -Rational::one();
        gens.iter().map(|g| g.scale(&minus)).collect()
    }
}

/// Block-diagonal `j` with `a` plus-blocks followed by `b` minus-blocks; the
/// minus-blocks use the negated generators.
pub fn build_clifford_j(spec: &CliffordModuleSpec) -> Result<JMap> {
    let spec = CliffordModuleSpec::new(spec.r, spec.a, spec.b)?;
    let plus = plus_generators(spec.r);
    let d = spec.block_dim();
    let m = spec.m();
    let minus_one = -Rational::one();
    let mats = (0..spec.r)
        .map(|alpha| {
            let mut out = Mat::zeros(m, m);
            for block in 0..spec.a + spec.b {
                let g = if block < spec.a {
                    plus[alpha].clone()
                } else {
                    plus[alpha].scale(&minus_one)
                };
                for i in 0..d {
                    for k in 0..d {
                        out[(block * d + i, block * d + k)] = g[(i, k)].clone();
                    }
                }
            }
            out
        })
        .collect();
    JMap::new(m, mats)
}

/// Result of the Heisenberg-type test, with a witness on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeisenbergCheck {
    pub holds: bool,
    /// `(α, β, j_α j_β + j_β j_α + 2δ_αβ Id)` for the first failing pair.
    pub witness: Option<(usize, usize, Mat)>,
}

/// Whether `j_α j_β + j_β j_α = −2δ_αβ Id` for all `α ≤ β`.
pub fn is_heisenberg_type(j: &JMap) -> HeisenbergCheck {
    let m = j.m();
    for a in 0..j.r() {
        for b in a..j.r() {
            let ab = mat_mul(j.mat(a), j.mat(b)).expect("square");
            let ba = mat_mul(j.mat(b), j.mat(a)).expect("square");
            let mut dev = ab.add(&ba).expect("same shape");
            if a == b {
                dev = dev.add(&Mat::identity(m).scale(&Rational::from_int(2))).expect("same shape");
            }
            if !dev.is_zero() {
                return HeisenbergCheck {
                    holds: false,
                    witness: Some((a, b, dev)),
                };
            }
        }
    }
    HeisenbergCheck {
        holds: j.r() > 0,
        witness: None,
    }
}

fn require_heisenberg(j: &JMap) -> Result<()> {
    let check = is_heisenberg_type(j);
    if check.holds {
        return Ok(());
    }
    Err(Error::Precondition(match check.witness {
        Some((a, b, _)) => format!(
            "not of Heisenberg type: j_Z{} j_Z{} + j_Z{} j_Z{} ≠ {}",
            a + 1,
            b + 1,
            b + 1,
            a + 1,
            if a == b { "-2 Id" } else { "0" }
        ),
        None => "not of Heisenberg type: r = 0".into(),
    }))
}

/// `(Tr(j_{Z_1} ⋯ j_{Z_r}))²` for a Heisenberg-type map.
pub fn omega_trace_squared(j: &JMap) -> Result<Rational> {
    require_heisenberg(j)?;
    let refs: Vec<&Mat> = j.mats().iter().collect();
    Ok(trace_product(&refs)?.pow(2))
}

/// `R^{v∧v}` on the basis `X_k ∧ X_l`, `k < l`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeOperator {
    m: usize,
    matrix: Mat,
}

impl WedgeOperator {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn basis(&self) -> Vec<(usize, usize)> {
        wedge_basis(self.m)
    }

    /// `Tr((R^{v∧v})^q)`.
    pub fn power_trace(&self, q: u32) -> Rational {
        self.matrix.pow(q).expect("square").trace()
    }
}

pub fn wedge_basis(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|k| (k + 1..m).map(move |l| (k, l))).collect()
}

/// Matrix entries `⟨R(X_k ∧ X_l), X_p ∧ X_q⟩ = ⟨R(X_k, X_l)X_p, X_q⟩`; the
/// basis is orthonormal for `⟨E∧F, C∧D⟩ = ⟨E,C⟩⟨F,D⟩ − ⟨E,D⟩⟨F,C⟩`.
pub fn wedge_operator(alg: &MetricLieAlgebra) -> WedgeOperator {
    let curv = curvature_closed_form(alg);
    let basis = wedge_basis(alg.m());
    let n = basis.len();
    let matrix = Mat::from_fn(n, n, |row, col| {
        let (p, q) = basis[row];
        let (k, l) = basis[col];
        curv.get(&[k, l, p, q])
    });
    WedgeOperator { m: alg.m(), matrix }
}

/// `(−¼)^q (½ I_{w|w} − ½ I_{ww} + r(2−r+m)^q − r(2−r)^q)` with `w` a word
/// of `q` distinct letters: the power traces of `R^{v∧v}` for Heisenberg type.
pub fn wedge_power_trace_formula(j: &JMap, q: u32) -> Result<Rational> {
    require_heisenberg(j)?;
    if q == 0 || q > 52 {
        return Err(Error::Precondition(format!("q = {q} out of range")));
    }
    let letters: String = ('a'..='z').chain('A'..='Z').take(q as usize).collect();
    let split = trace_invariant(&format!("{letters}|{letters}"), j)?;
    let joined = trace_invariant(&format!("{letters}{letters}"), j)?;
    let (m, r) = (Rational::from(j.m()), Rational::from(j.r()));
    let two = Rational::from_int(2);
    let half = Rational::new(1, 2);
    let inner = (&split - &joined) * &half + &r * (&two - &r + &m).pow(q) - &r * (&two - &r).pow(q);
    Ok(Rational::new(-1, 4).pow(q) * inner)
}

/// Coordinates of `E_Z = Σ_k X_k ∧ j_Z X_k` on the wedge basis.
pub fn e_vector(j: &JMap, alpha: usize) -> Vec<Rational> {
    let a = j.mat(alpha);
    wedge_basis(j.m())
        .into_iter()
        .map(|(k, l)| &a[(l, k)] - &a[(k, l)])
        .collect()
}

/// `Φ(X ∧ Y) = Σ_α j_α X ∧ j_α Y` on the wedge basis.
pub fn phi_operator(j: &JMap) -> Mat {
    let basis = wedge_basis(j.m());
    let n = basis.len();
    Mat::from_fn(n, n, |row, col| {
        let (p, q) = basis[row];
        let (k, l) = basis[col];
        j.mats()
            .iter()
            .map(|a| &a[(p, k)] * &a[(q, l)] - &a[(q, k)] * &a[(p, l)])
            .sum()
    })
}

/// Necessary conditions for curvature equivalence: the Ricci operator's
/// characteristic polynomial (an exact encoding of its spectrum) and the
/// power traces of `R^{v∧v}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurvatureFingerprint {
    pub ricci_charpoly: Vec<Rational>,
    pub wedge_traces: Vec<Rational>,
}

impl CurvatureFingerprint {
    /// First `q` (1-based) at which the wedge traces differ.
    pub fn first_wedge_difference(&self, other: &Self) -> Option<usize> {
        self.wedge_traces
            .iter()
            .zip(&other.wedge_traces)
            .position(|(a, b)| a != b)
            .map(|i| i + 1)
    }
}

pub fn curvature_fingerprint(alg: &MetricLieAlgebra, qmax: u32) -> CurvatureFingerprint {
    let ric = crate::liealg::ricci(alg);
    let n = alg.dim();
    let ric_mat = Mat::from_fn(n, n, |a, b| ric.get(&[a, b]));
    let wedge = wedge_operator(alg);
    let mut traces = Vec::with_capacity(qmax as usize);
    let mut power = Mat::identity(wedge.dim());
    for _ in 0..qmax {
        power = mat_mul(&power, wedge.matrix()).expect("square");
        traces.push(power.trace());
    }
    CurvatureFingerprint {
        ricci_charpoly: ric_mat.charpoly().expect("square"),
        wedge_traces: traces,
    }
}

fn require_heisenberg_pair(j1: &JMap, j2: &JMap) -> Result<()> {
    require_heisenberg(j1)?;
    require_heisenberg(j2)?;
    if (j1.m(), j1.r()) != (j2.m(), j2.r()) {
        return Err(Error::Precondition(format!(
            "(m, r) = ({}, {}) and ({}, {}) differ",
            j1.m(),
            j1.r(),
            j2.m(),
            j2.r()
        )));
    }
    Ok(())
}

/// Order-by-order comparison of two Heisenberg-type maps.
#[derive(Clone, Debug, Serialize)]
pub struct OrderEqualityScan {
    pub r: usize,
    pub deltas: Vec<InvariantDelta>,
    /// Invariants allowed to differ for this `r`.
    pub may_differ: Vec<InvariantId>,
    /// Every difference lies in `may_differ`.
    pub consistent: bool,
}

/// Invariants of order at most 6 that can separate Heisenberg-type maps
/// with equal `(m, r)`: none for `r > 3`, and for `r = 3` only those
/// involving `I_abc|abc`.
pub fn heisenberg_may_differ(r: usize) -> Vec<InvariantId> {
    if r == 3 {
        vec![
            InvariantId::RHat,
            InvariantId::RCirc,
            InvariantId::GradR2,
            InvariantId::LapRR,
        ]
    } else {
        Vec::new()
    }
}

pub fn heisenberg_order_equality_scan(
    j1: &JMap,
    j2: &JMap,
    max_order: u32,
    options: &OracleOptions,
) -> Result<OrderEqualityScan> {
    require_heisenberg_pair(j1, j2)?;
    let ids: Vec<InvariantId> = InvariantId::ALL
        .iter()
        .copied()
        .filter(|id| id.order() <= max_order)
        .collect();
    let (a, b) = rayon::join(
        || report_for(j1, &ids, options),
        || report_for(j2, &ids, options),
    );
    let deltas = compare_reports(&a?, &b?);
    let may_differ = heisenberg_may_differ(j1.r());
    let consistent = deltas
        .iter()
        .all(|d| !d.differs || may_differ.contains(&d.id));
    Ok(OrderEqualityScan {
        r: j1.r(),
        deltas,
        may_differ,
        consistent,
    })
}

fn report_for(
    j: &JMap,
    ids: &[InvariantId],
    options: &OracleOptions,
) -> Result<crate::invariants::InvariantReport> {
    let cache = crate::invariants::TensorCache::for_jmap(j)?;
    crate::invariants::oracle_invariants_for(&cache, ids, options)
}

/// Differences of the invariants that depend on `I_abc|abc`, compared with
/// `−3/2`, `−7/16`, `−17/64` times the difference of `I_abc|abc`.
#[derive(Clone, Debug, Serialize)]
pub struct NablaRStructure {
    pub delta_i: Rational,
    pub checks: Vec<IdentityCheck>,
}

impl NablaRStructure {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(IdentityCheck::passed)
    }
}

pub fn nablar_structure_check(j1: &JMap, j2: &JMap) -> Result<NablaRStructure> {
    require_heisenberg_pair(j1, j2)?;
    let ids = [InvariantId::GradR2, InvariantId::RHat, InvariantId::RCirc];
    let options = OracleOptions::skip_laplacian();
    let (a, b) = rayon::join(
        || report_for(j1, &ids, &options),
        || report_for(j2, &ids, &options),
    );
    let (a, b) = (a?, b?);
    let delta_i = trace_invariant("abc|abc", j1)? - trace_invariant("abc|abc", j2)?;
    let coeffs = [
        (InvariantId::GradR2, Rational::new(-3, 2)),
        (InvariantId::RHat, Rational::new(-7, 16)),
        (InvariantId::RCirc, Rational::new(-17, 64)),
    ];
    let checks = coeffs
        .iter()
        .map(|(id, c)| {
            let delta = a.require(*id)? - b.require(*id)?;
            Ok(IdentityCheck::compare(
                format!("delta {id} = {c} * delta I_abc|abc"),
                delta,
                c * &delta_i,
            ))
        })
        .collect::<Result<_>>()?;
    Ok(NablaRStructure { delta_i, checks })
}

/// Heisenberg-type map for `ρ^r_(a,b)`, checked.
pub fn clifford(r: usize, a: usize, b: usize) -> Result<JMap> {
    build_clifford_j(&CliffordModuleSpec::new(r, a, b)?)
}

/// Algebra for `ρ^r_(a,b)`.
pub fn clifford_algebra(r: usize, a: usize, b: usize) -> Result<MetricLieAlgebra> {
    Ok(build_algebra(&clifford(r, a, b)?))
}

/// Every oracle invariant of `ρ^r_(a,b)`; convenience for scans.
pub fn clifford_oracle(r: usize, a: usize, b: usize, options: &OracleOptions) -> Result<crate::invariants::InvariantReport> {
    oracle_invariants(&clifford_algebra(r, a, b)?, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn product(j: &JMap) -> Mat {
        j.mats()[1..]
            .iter()
            .fold(j.mat(0).clone(), |acc, g| mat_mul(&acc, g).unwrap())
    }

    #[test]
    fn quaternion_module() {
        let j = clifford(3, 1, 0).unwrap();
        assert_eq!(j.m(), 4);
        assert!(is_heisenberg_type(&j).holds);
        assert_eq!(product(&j), Mat::identity(4));
        for a in j.mats() {
            assert!(a.entries().iter().all(|x| [q(-1), q(0), q(1)].contains(x)));
        }
    }

    #[test]
    fn octonion_module() {
        let j = clifford(7, 1, 0).unwrap();
        assert_eq!(j.m(), 8);
        assert!(is_heisenberg_type(&j).holds);
        assert_eq!(product(&j), Mat::identity(8));
    }

    #[test]
    fn mixed_modules_have_traceless_volume_element() {
        let j = clifford(3, 1, 1).unwrap();
        let refs: Vec<&Mat> = j.mats().iter().collect();
        assert_eq!(trace_product(&refs).unwrap(), q(0));
        assert_eq!(omega_trace_squared(&clifford(3, 2, 0).unwrap()).unwrap(), q(64));
        assert_eq!(omega_trace_squared(&clifford(3, 1, 1).unwrap()).unwrap(), q(0));
        assert_eq!(omega_trace_squared(&clifford(7, 2, 0).unwrap()).unwrap(), q(256));
    }

    #[test]
    fn unsupported_and_empty_specs() {
        assert!(matches!(clifford(11, 1, 0), Err(Error::Unsupported(_))));
        assert!(matches!(clifford(15, 1, 0), Err(Error::Unsupported(_))));
        assert!(clifford(3, 0, 0).is_err());
    }

    #[test]
    fn non_heisenberg_witness() {
        let j = JMap::zero(4, 2).unwrap();
        let check = is_heisenberg_type(&j);
        assert!(!check.holds);
        assert_eq!(check.witness.unwrap().0, 0);
        assert!(omega_trace_squared(&j).is_err());
    }

    #[test]
    fn wedge_q1_formula() {
        let j = clifford(3, 1, 0).unwrap();
        let w = wedge_operator(&build_algebra(&j));
        assert_eq!(w.dim(), 6);
        assert!(w.matrix().is_symmetric());
        // (−¼)(0 + 6 + 3·3 − 3·(−1)) = −9/2
        assert_eq!(w.power_trace(1), Rational::new(-9, 2));
        assert_eq!(wedge_power_trace_formula(&j, 1).unwrap(), Rational::new(-9, 2));
    }

    #[test]
    fn zero_map_gives_zero_wedge_operator() {
        let w = wedge_operator(&build_algebra(&JMap::zero(4, 3).unwrap()));
        assert!(w.matrix().is_zero());
    }

    #[test]
    fn e_vectors_and_phi() {
        for (a, b) in [(1, 0), (1, 1)] {
            let j = clifford(3, a, b).unwrap();
            let m = j.m();
            let phi = phi_operator(&j);
            assert!(phi.is_symmetric());
            let es: Vec<Vec<Rational>> = (0..3).map(|al| e_vector(&j, al)).collect();
            for x in 0..3 {
                for y in 0..3 {
                    let dot: Rational = es[x].iter().zip(&es[y]).map(|(u, v)| u * v).sum();
                    let want = if x == y { Rational::from(2 * m) } else { q(0) };
                    assert_eq!(dot, want);
                }
                let image: Vec<Rational> = (0..phi.rows())
                    .map(|i| (0..phi.cols()).map(|k| &phi[(i, k)] * &es[x][k]).sum())
                    .collect();
                let want: Vec<Rational> = es[x].iter().map(|v| v * &q(2 - 3)).collect();
                assert_eq!(image, want);
            }
        }
    }
}
