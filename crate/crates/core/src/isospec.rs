//! Hypothesis checks for the Gordon–Wilson isospectrality criterion:
//! pointwise similarity of `j_Z` and `j'_Z`, integrality of brackets, and
//! isospectrality of the kernel lattices `ker(j_Z) ∩ Z^m`.
//!
//! All conclusions are drawn from exact arithmetic. The kernel-lattice
//! condition is verified on a finite box of `Z` and up to a finite length.

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{build_algebra, gamma_lattice_closure_check, JMap};
use crate::linalg::{mat_mul, Mat};
use crate::rational::{common_denominator, Rational};

pub const DEFAULT_RADIUS2: i64 = 25;

/// Largest number of grid points a check will visit.
pub const MAX_GRID_POINTS: u64 = 2_000_000;

/// Relative tolerance of the floating-point eigenvalue pre-check.
const FLOAT_TOLERANCE: f64 = 1e-9;

/// `⌈m/2⌉ + 1`: each characteristic-polynomial coefficient has degree at
/// most `m` in every coordinate of `Z`, so equality on `2·zbox + 1 > m`
/// values per coordinate forces equality everywhere.
pub fn default_zbox(m: usize) -> usize {
    m.div_ceil(2) + 1
}

/// Whether a grid `[−zbox, zbox]^r` determines polynomials of degree `m`.
pub fn grid_is_sufficient(m: usize, zbox: usize) -> bool {
    2 * zbox + 1 > m
}

/// Integer points of `[−zbox, zbox]^r` in lexicographic order.
#[derive(Clone, Copy, Debug)]
struct Grid {
    r: usize,
    zbox: i64,
    count: u64,
}

impl Grid {
    fn new(r: usize, zbox: usize) -> Result<Self> {
        let side = 2 * zbox as u64 + 1;
        let count = side
            .checked_pow(r as u32)
            .filter(|&c| c <= MAX_GRID_POINTS)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "grid [-{zbox}, {zbox}]^{r} has more than {MAX_GRID_POINTS} points; choose a smaller zbox"
                ))
            })?;
        Ok(Grid {
            r,
            zbox: zbox as i64,
            count,
        })
    }

    fn point(&self, mut index: u64) -> Vec<i64> {
        let side = 2 * self.zbox as u64 + 1;
        let mut z = vec![0i64; self.r];
        for c in z.iter_mut().rev() {
            *c = (index % side) as i64 - self.zbox;
            index /= side;
        }
        z
    }
}

fn ints(z: &[i64]) -> Vec<Rational> {
    z.iter().map(|&c| Rational::from_int(c)).collect()
}

fn check_same_shape(j1: &JMap, j2: &JMap) -> Result<()> {
    if (j1.m(), j1.r()) != (j2.m(), j2.r()) {
        return Err(Error::DimensionMismatch(format!(
            "(m, r) = ({}, {}) and ({}, {})",
            j1.m(),
            j1.r(),
            j2.m(),
            j2.r()
        )));
    }
    Ok(())
}

/// Sorted eigenvalues of the positive semidefinite `−j_Z²`; the spectrum of
/// `j_Z` is `±i·√λ`.
fn float_spectrum(a: &Mat) -> Vec<f64> {
    let sq = mat_mul(a, a).expect("square").scale(&-Rational::one());
    let mut ev: Vec<f64> = SymmetricEigen::new(sq.to_f64()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn float_close(a: &[f64], b: &[f64]) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |s, x| s.max(x.abs()));
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= FLOAT_TOLERANCE * scale)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsospectralReport {
    pub isospectral: bool,
    /// A `Z` where the characteristic polynomials differ.
    pub witness: Option<Vec<i64>>,
    pub zbox: usize,
    pub points_checked: u64,
    /// Whether the grid is large enough for equality on it to imply
    /// equality for every `Z`.
    pub sufficient: bool,
    pub rationale: String,
}

/// Compares the characteristic polynomials of `j_Z` and `j'_Z` exactly for
/// every integer `Z` in `[−zbox, zbox]^r`, after a floating-point pre-check.
pub fn jmap_isospectral(j1: &JMap, j2: &JMap, zbox: usize) -> Result<IsospectralReport> {
    check_same_shape(j1, j2)?;
    let grid = Grid::new(j1.r(), zbox)?;
    let m = j1.m();
    let sufficient = grid_is_sufficient(m, zbox);
    let rationale = format!(
        "characteristic polynomial coefficients have degree <= {m} in each coordinate of Z; \
         {} values per coordinate {} determine them",
        2 * zbox + 1,
        if sufficient { "do" } else { "do not" }
    );

    let exact_differs = |index: u64| -> bool {
        let z = ints(&grid.point(index));
        let a = j1.j_z(&z).expect("shape checked");
        let b = j2.j_z(&z).expect("shape checked");
        a.charpoly().expect("square") != b.charpoly().expect("square")
    };

    let float_suspect = (0..grid.count).into_par_iter().find_first(|&i| {
        let z = ints(&grid.point(i));
        let a = j1.j_z(&z).expect("shape checked");
        let b = j2.j_z(&z).expect("shape checked");
        !float_close(&float_spectrum(&a), &float_spectrum(&b))
    });
    let witness = match float_suspect {
        Some(i) if exact_differs(i) => Some(i),
        _ => (0..grid.count).into_par_iter().find_first(|&i| exact_differs(i)),
    };
    Ok(IsospectralReport {
        isospectral: witness.is_none(),
        witness: witness.map(|i| grid.point(i)),
        zbox,
        points_checked: grid.count,
        sufficient,
        rationale,
    })
}

/// Linearly independent integer vectors spanning a lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticeBasis {
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<i64>>,
}

impl LatticeBasis {
    pub fn new(ambient_dim: usize, vectors: Vec<Vec<i64>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch("lattice vector length".into()));
        }
        let b = LatticeBasis {
            ambient_dim,
            vectors,
        };
        if b.gram().rank() != b.rank() {
            return Err(Error::DegenerateGram);
        }
        Ok(b)
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn gram(&self) -> Mat {
        let k = self.rank();
        Mat::from_fn(k, k, |a, b| {
            Rational::from_int(
                self.vectors[a]
                    .iter()
                    .zip(&self.vectors[b])
                    .map(|(x, y)| x * y)
                    .sum(),
            )
        })
    }

    /// Canonical basis of the same lattice (row Hermite normal form).
    pub fn canonical(&self) -> Result<Self> {
        let rows: Vec<Vec<BigInt>> = self
            .vectors
            .iter()
            .map(|v| v.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Ok(LatticeBasis {
            ambient_dim: self.ambient_dim,
            vectors: to_i64_rows(hermite_rows(rows, self.ambient_dim))?,
        })
    }
}

fn to_i64_rows(rows: Vec<Vec<BigInt>>) -> Result<Vec<Vec<i64>>> {
    rows.into_iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    x.to_i64()
                        .ok_or_else(|| Error::ResourceLimit("lattice entry exceeds 64 bits".into()))
                })
                .collect()
        })
        .collect()
}

/// Row Hermite normal form; zero rows are dropped.
fn hermite_rows(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row == rows.len() {
            break;
        }
        // gcd-combine every lower row into the pivot row
        for i in pivot_row + 1..rows.len() {
            if rows[i][col].is_zero() {
                continue;
            }
            let a = rows[pivot_row][col].clone();
            let b = rows[i][col].clone();
            let e = a.extended_gcd(&b);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let (ua, ub) = (&a / &g, &b / &g);
            let (p, r) = (rows[pivot_row].clone(), rows[i].clone());
            for c in 0..cols {
                rows[pivot_row][c] = &x * &p[c] + &y * &r[c];
                rows[i][c] = &ua * &r[c] - &ub * &p[c];
            }
        }
        if rows[pivot_row][col].is_zero() {
            continue;
        }
        if rows[pivot_row][col].is_negative() {
            for x in rows[pivot_row].iter_mut() {
                *x = -&*x;
            }
        }
        let pivot = rows[pivot_row].clone();
        for row in rows.iter_mut().take(pivot_row) {
            let f = row[col].div_floor(&pivot[col]);
            if !f.is_zero() {
                for (x, p) in row.iter_mut().zip(&pivot) {
                    *x -= &f * p;
                }
            }
        }
        pivot_row += 1;
    }
    rows.truncate(pivot_row);
    rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    rows
}

/// Basis of `{x ∈ Z^n : A x = 0}` for an integer matrix `A`, by unimodular
/// column reduction `A U = [H | 0]`: the trailing columns of `U` span the
/// kernel lattice.
fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = a.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|k| if i == k { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut k = 0;
    for row in 0..a.len() {
        if k == n {
            break;
        }
        for c in k + 1..n {
            if a[row][c].is_zero() {
                continue;
            }
            let x0 = a[row][k].clone();
            let y0 = a[row][c].clone();
            let e = x0.extended_gcd(&y0);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (ux, uy) = (&x0 / &g, &y0 / &g);
            // col_k ← s·col_k + t·col_c, col_c ← ux·col_c − uy·col_k (det 1)
            let combine = |m: &mut Vec<Vec<BigInt>>| {
                for r in m.iter_mut() {
                    let (p, q) = (r[k].clone(), r[c].clone());
                    r[k] = &s * &p + &t * &q;
                    r[c] = &ux * &q - &uy * &p;
                }
            };
            combine(&mut a);
            combine(&mut u);
        }
        if !a[row][k].is_zero() {
            k += 1;
        }
    }
    (k..n).map(|c| (0..n).map(|i| u[i][c].clone()).collect()).collect()
}

/// Integral basis of `ker(j_Z) ∩ Z^m`, in canonical (Hermite) form.
pub fn kernel_lattice(j: &JMap, z: &[i64]) -> Result<LatticeBasis> {
    let m = j.m();
    let a = j.j_z(&ints(z))?;
    let den = common_denominator(a.entries().iter());
    let rows: Vec<Vec<BigInt>> = (0..m)
        .map(|i| {
            a.row(i)
                .iter()
                .map(|x| {
                    (Rational::from_bigint(den.clone()) * x).numer()
                })
                .collect()
        })
        .collect();
    let kernel = integer_kernel(&rows, m);
    Ok(LatticeBasis {
        ambient_dim: m,
        vectors: to_i64_rows(hermite_rows(kernel, m))?,
    })
}

/// Lengths of lattice vectors up to a bound, with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LengthSpectrum {
    pub radius2: Rational,
    /// `(squared length, multiplicity)`, ascending.
    pub entries: Vec<(Rational, u64)>,
}

impl LengthSpectrum {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }
}

/// All lattice vectors of squared length at most `radius2`, by Fincke–Pohst
/// enumeration over the exact `L D Lᵀ` factorization of the Gram matrix.
pub fn length_spectrum(basis: &LatticeBasis, radius2: &Rational) -> Result<LengthSpectrum> {
    if radius2.is_negative() || radius2.is_zero() {
        return Err(Error::Precondition("radius² must be positive".into()));
    }
    let gram = basis.gram();
    let k = basis.rank();
    // Gram = L D Lᵀ with unit lower-triangular L
    let mut l = Mat::identity(k);
    let mut d = vec![Rational::zero(); k];
    for i in 0..k {
        for jx in 0..i {
            let mut s = gram[(i, jx)].clone();
            for p in 0..jx {
                s -= &l[(i, p)] * &l[(jx, p)] * &d[p];
            }
            l[(i, jx)] = s / &d[jx];
        }
        let mut s = gram[(i, i)].clone();
        for p in 0..i {
            s -= l[(i, p)].pow(2) * &d[p];
        }
        if s.is_negative() || s.is_zero() {
            return Err(Error::DegenerateGram);
        }
        d[i] = s;
    }
    // |x|² = Σ_i d_i (x_i + Σ_{j>i} L_ji x_j)²
    let mut counts: BTreeMap<Rational, u64> = BTreeMap::new();
    let mut x = vec![0i64; k];
    enumerate(k, &l, &d, radius2, &mut x, &Rational::zero(), &mut counts);
    Ok(LengthSpectrum {
        radius2: radius2.clone(),
        entries: counts.into_iter().collect(),
    })
}

fn enumerate(
    level: usize,
    l: &Mat,
    d: &[Rational],
    bound: &Rational,
    x: &mut [i64],
    partial: &Rational,
    counts: &mut BTreeMap<Rational, u64>,
) {
    if level == 0 {
        *counts.entry(partial.clone()).or_insert(0) += 1;
        return;
    }
    let i = level - 1;
    let k = x.len();
    let center: Rational = (i + 1..k).map(|jx| &l[(jx, i)] * Rational::from_int(x[jx])).sum();
    let remaining = bound - partial;
    // (x_i + c)² ≤ remaining / d_i, widened by one and then filtered exactly
    let reach = (remaining.to_f64() / d[i].to_f64()).max(0.0).sqrt();
    let c = center.to_f64();
    let lo = (-c - reach).floor() as i64 - 1;
    let hi = (-c + reach).ceil() as i64 + 1;
    for xi in lo..=hi {
        let t = Rational::from_int(xi) + &center;
        let term = t.pow(2) * &d[i];
        if term > remaining {
            continue;
        }
        x[i] = xi;
        enumerate(i, l, d, bound, x, &(partial + &term), counts);
    }
    x[i] = 0;
}

/// Kernel-lattice comparison at one `Z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelComparison {
    pub z: Vec<i64>,
    pub rank: (usize, usize),
    /// Both kernels are the same sublattice of `Z^m`.
    pub identical: bool,
    pub spectra_equal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KernelSummary {
    pub points: u64,
    /// Points where both kernels are the same lattice.
    pub identical_lattices: u64,
    /// Points where both spectra were enumerated.
    pub enumerated: u64,
    pub radius2: Rational,
    /// First `Z` (lexicographic) where the truncated spectra differ.
    pub mismatch: Option<KernelComparison>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GordonWilsonReport {
    pub isospectral: IsospectralReport,
    pub bracket_integral: (bool, bool),
    pub kernels: KernelSummary,
    pub verdict: bool,
    pub caveat: String,
}

pub fn compare_kernels(j1: &JMap, j2: &JMap, z: &[i64], radius2: &Rational) -> Result<KernelComparison> {
    let k1 = kernel_lattice(j1, z)?;
    let k2 = kernel_lattice(j2, z)?;
    let identical = k1 == k2;
    let spectra_equal = identical || length_spectrum(&k1, radius2)? == length_spectrum(&k2, radius2)?;
    Ok(KernelComparison {
        z: z.to_vec(),
        rank: (k1.rank(), k2.rank()),
        identical,
        spectra_equal,
    })
}

/// Checks all three hypotheses: pointwise isospectrality, integrality of
/// `[Z^m, Z^m]` for both maps, and equal kernel-lattice length spectra for
/// every `Z` in the box up to `radius2`.
pub fn gordon_wilson_check(j1: &JMap, j2: &JMap, zbox: usize, radius2: &Rational) -> Result<GordonWilsonReport> {
    check_same_shape(j1, j2)?;
    let isospectral = jmap_isospectral(j1, j2, zbox)?;
    let bracket_integral = (
        gamma_lattice_closure_check(&build_algebra(j1)),
        gamma_lattice_closure_check(&build_algebra(j2)),
    );
    let grid = Grid::new(j1.r(), zbox)?;
    let results: Vec<KernelComparison> = (0..grid.count)
        .into_par_iter()
        .map(|i| compare_kernels(j1, j2, &grid.point(i), radius2))
        .collect::<Result<_>>()?;
    let identical = results.iter().filter(|c| c.identical).count() as u64;
    let kernels = KernelSummary {
        points: grid.count,
        identical_lattices: identical,
        enumerated: grid.count - identical,
        radius2: radius2.clone(),
        mismatch: results.into_iter().find(|c| !c.spectra_equal),
    };
    let verdict = isospectral.isospectral
        && bracket_integral.0
        && bracket_integral.1
        && kernels.mismatch.is_none();
    Ok(GordonWilsonReport {
        caveat: format!(
            "kernel lattices compared for Z in [-{zbox}, {zbox}]^{} and lengths squared up to {radius2}; \
             this is a bounded check, not a proof for all Z",
            j1.r()
        ),
        isospectral,
        bracket_integral,
        kernels,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn std_basis(n: usize, idx: &[usize]) -> LatticeBasis {
        LatticeBasis::new(
            n,
            idx.iter()
                .map(|&i| (0..n).map(|k| (k == i) as i64).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn z2_spectrum() {
        let s = length_spectrum(&std_basis(2, &[0, 1]), &q(2)).unwrap();
        assert_eq!(s.entries, vec![(q(0), 1), (q(1), 4), (q(2), 4)]);
    }

    #[test]
    fn empty_basis_spectrum() {
        let b = LatticeBasis::new(3, vec![]).unwrap();
        let s = length_spectrum(&b, &q(25)).unwrap();
        assert_eq!(s.entries, vec![(q(0), 1)]);
    }

    #[test]
    fn spectrum_rejects_bad_input() {
        assert!(length_spectrum(&std_basis(2, &[0]), &q(0)).is_err());
        assert!(LatticeBasis::new(2, vec![vec![1, 1], vec![2, 2]]).is_err());
    }

    #[test]
    fn sublattice_matches_z2() {
        let s = length_spectrum(&std_basis(6, &[1, 4]), &q(25)).unwrap();
        let t = length_spectrum(&std_basis(2, &[0, 1]), &q(25)).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn brute_force_agreement_on_skewed_lattice() {
        let b = LatticeBasis::new(3, vec![vec![1, 1, 0], vec![0, 2, 1], vec![1, 0, 3]]).unwrap();
        let r2 = q(20);
        let s = length_spectrum(&b, &r2).unwrap();
        let mut brute: BTreeMap<Rational, u64> = BTreeMap::new();
        for a in -12i64..=12 {
            for c in -12i64..=12 {
                for e in -12i64..=12 {
                    let v: Vec<i64> = (0..3)
                        .map(|k| a * b.vectors[0][k] + c * b.vectors[1][k] + e * b.vectors[2][k])
                        .collect();
                    let n2 = q(v.iter().map(|x| x * x).sum());
                    if n2 <= r2 {
                        *brute.entry(n2).or_insert(0) += 1;
                    }
                }
            }
        }
        assert_eq!(s.entries, brute.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        let j = JMap::zero(3, 2).unwrap();
        let k = kernel_lattice(&j, &[0, 0]).unwrap();
        assert_eq!(k, std_basis(3, &[0, 1, 2]));
    }

    #[test]
    fn kernel_saturates() {
        // j_Z with kernel spanned by (1, 1, 0) over Q; lattice is Z·(1,1,0)
        let a = Mat::from_i64_rows(&[&[0, 0, 2], &[0, 0, -2], &[-2, 2, 0]]);
        let j = JMap::new(3, vec![a]).unwrap();
        let k = kernel_lattice(&j, &[1]).unwrap();
        assert_eq!(k.vectors, vec![vec![1, 1, 0]]);
        let k3 = kernel_lattice(&j, &[3]).unwrap();
        assert_eq!(k3, k);
    }

    #[test]
    fn hermite_form_is_canonical() {
        let a = LatticeBasis::new(3, vec![vec![1, 2, 3], vec![0, 1, 4]]).unwrap();
        let b = LatticeBasis::new(3, vec![vec![1, 3, 7], vec![2, 5, 10]]).unwrap();
        assert_eq!(a.canonical().unwrap(), b.canonical().unwrap());
    }

    #[test]
    fn scaled_map_is_not_isospectral() {
        let a = Mat::from_i64_rows(&[&[0, -1], &[1, 0]]);
        let j = JMap::new(2, vec![a]).unwrap();
        let rep = jmap_isospectral(&j, &j.scale(&q(2)), 2).unwrap();
        assert!(!rep.isospectral);
        assert_ne!(rep.witness.unwrap(), vec![0]);
        assert!(jmap_isospectral(&j, &j, 2).unwrap().isospectral);
        assert!(jmap_isospectral(&j, &JMap::zero(3, 1).unwrap(), 2).is_err());
    }

    #[test]
    fn grid_limit() {
        let j = JMap::zero(2, 7).unwrap();
        assert!(matches!(jmap_isospectral(&j, &j, 9), Err(Error::ResourceLimit(_))));
        assert_eq!(default_zbox(4), 3);
        assert_eq!(default_zbox(5), 4);
        assert!(grid_is_sufficient(6, 3));
        assert!(!grid_is_sufficient(16, 2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn spectrum_independent_of_basis(
            v in prop::collection::vec(-3i64..=3, 6),
            u in prop::collection::vec(-2i64..=2, 1),
        ) {
            let b1 = vec![v[0], v[1], v[2]];
            let b2 = vec![v[3], v[4], v[5]];
            let basis = match LatticeBasis::new(3, vec![b1.clone(), b2.clone()]) {
                Ok(b) => b,
                Err(_) => return Ok(()),
            };
            // unimodular change: (b1, b2) -> (b1 + t b2, b2 - b1 - t b2)... det 1
            let t = u[0];
            let c1: Vec<i64> = (0..3).map(|i| b1[i] + t * b2[i]).collect();
            let c2: Vec<i64> = (0..3).map(|i| b2[i] - c1[i]).collect();
            let other = LatticeBasis::new(3, vec![c1, c2]).unwrap();
            prop_assert_eq!(
                length_spectrum(&basis, &q(12)).unwrap(),
                length_spectrum(&other, &q(12)).unwrap()
            );
            prop_assert_eq!(basis.canonical().unwrap(), other.canonical().unwrap());
        }
    }
}
