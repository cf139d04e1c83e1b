//! Two-step nilpotent metric Lie algebras `g(j) = v ⊕ z` and their
//! Levi-Civita geometry in the orthonormal frame `X_1..X_m, Z_1..Z_r`.
//!
//! Frame indices `0..m` are the `X_k`, indices `m..m+r` are the `Z_α`.
//! Curvature follows the convention `R(X,Y) = ∇_[X,Y] − [∇_X, ∇_Y]` and is
//! stored as `R[a,b,c,d] = ⟨R(e_a,e_b)e_c, e_d⟩`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mat_mul, trace_product, Mat};
use crate::rational::Rational;
use crate::tensor::FrameTensor;

/// The map `j: z → so(v)`, given by the skew matrices `j_{Z_1}, …, j_{Z_r}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "JMapFile", into = "JMapFile")]
pub struct JMap {
    m: usize,
    mats: Vec<Mat>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JMapFile {
    m: usize,
    r: usize,
    mats: Vec<Vec<Vec<Rational>>>,
}

impl TryFrom<JMapFile> for JMap {
    type Error = Error;

    fn try_from(f: JMapFile) -> Result<Self> {
        if f.mats.len() != f.r {
            return Err(Error::JMapFormat(format!(
                "r = {} but {} matrices given",
                f.r,
                f.mats.len()
            )));
        }
        let mut mats = Vec::with_capacity(f.r);
        for (alpha, rows) in f.mats.into_iter().enumerate() {
            if rows.len() != f.m || rows.iter().any(|row| row.len() != f.m) {
                return Err(Error::JMapFormat(format!(
                    "matrix {} is not {}x{}",
                    alpha + 1,
                    f.m,
                    f.m
                )));
            }
            mats.push(Mat::from_rows(rows)?);
        }
        JMap::new(f.m, mats)
    }
}

impl From<JMap> for JMapFile {
    fn from(j: JMap) -> Self {
        JMapFile {
            m: j.m,
            r: j.r(),
            mats: j
                .mats
                .iter()
                .map(|a| (0..a.rows()).map(|i| a.row(i).to_vec()).collect())
                .collect(),
        }
    }
}

impl JMap {
    pub fn new(m: usize, mats: Vec<Mat>) -> Result<Self> {
        if m + mats.len() == 0 {
            return Err(Error::DimensionMismatch("empty Lie algebra".into()));
        }
        if m + mats.len() > u8::MAX as usize {
            return Err(Error::ResourceLimit(format!(
                "total dimension {} too large",
                m + mats.len()
            )));
        }
        for (alpha, a) in mats.iter().enumerate() {
            if a.rows() != m || a.cols() != m {
                return Err(Error::DimensionMismatch(format!(
                    "j_Z{} is {}x{}, expected {m}x{m}",
                    alpha + 1,
                    a.rows(),
                    a.cols()
                )));
            }
            if let Some((row, col)) = a.first_skew_violation() {
                return Err(Error::NotSkew { alpha, row, col });
            }
        }
        Ok(JMap { m, mats })
    }

    pub fn zero(m: usize, r: usize) -> Result<Self> {
        Self::new(m, vec![Mat::zeros(m, m); r])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::JMapFormat(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("j-map serialization cannot fail")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn r(&self) -> usize {
        self.mats.len()
    }

    /// Total dimension `m + r`.
    pub fn dim(&self) -> usize {
        self.m + self.mats.len()
    }

    pub fn mats(&self) -> &[Mat] {
        &self.mats
    }

    pub fn mat(&self, alpha: usize) -> &Mat {
        &self.mats[alpha]
    }

    pub fn is_zero(&self) -> bool {
        self.mats.iter().all(Mat::is_zero)
    }

    /// `j_Z` for `Z = Σ z_α Z_α`.
    pub fn j_z(&self, z: &[Rational]) -> Result<Mat> {
        if z.len() != self.r() {
            return Err(Error::DimensionMismatch(format!(
                "Z has {} coordinates, r = {}",
                z.len(),
                self.r()
            )));
        }
        let mut acc = Mat::zeros(self.m, self.m);
        for (c, a) in z.iter().zip(&self.mats) {
            if !c.is_zero() {
                acc = acc.add(&a.scale(c))?;
            }
        }
        Ok(acc)
    }

    /// `J = Σ_α j_{Z_α}²`.
    pub fn big_j(&self) -> Mat {
        let mut acc = Mat::zeros(self.m, self.m);
        for a in &self.mats {
            acc = acc.add(&mat_mul(a, a).expect("square")).expect("same shape");
        }
        acc
    }

    pub fn scale(&self, s: &Rational) -> Self {
        JMap {
            m: self.m,
            mats: self.mats.iter().map(|a| a.scale(s)).collect(),
        }
    }

    /// The equivalent map `(A,B)·j`, with `Z_α ↦ Σ_β B_{αβ} A j_{Z_β} Aᵀ`,
    /// for orthogonal `A ∈ O(m)` and `B ∈ O(r)`.
    pub fn transform(&self, a: &Mat, b: &Mat) -> Result<Self> {
        let (m, r) = (self.m, self.r());
        if a.rows() != m || a.cols() != m || b.rows() != r || b.cols() != r {
            return Err(Error::DimensionMismatch("transform shape".into()));
        }
        let at = a.transpose();
        let conj: Vec<Mat> = self
            .mats
            .iter()
            .map(|j| mat_mul(&mat_mul(a, j)?, &at))
            .collect::<Result<_>>()?;
        let mats = (0..r)
            .map(|alpha| {
                let mut acc = Mat::zeros(m, m);
                for (beta, c) in conj.iter().enumerate() {
                    if !b[(alpha, beta)].is_zero() {
                        acc = acc.add(&c.scale(&b[(alpha, beta)]))?;
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        JMap::new(m, mats)
    }

    /// Gram matrix of the generators, `Tr(j_{Z_α} j_{Z_β})`.
    pub fn trace_gram(&self) -> Mat {
        Mat::from_fn(self.r(), self.r(), |a, b| {
            trace_product(&[&self.mats[a], &self.mats[b]]).expect("square")
        })
    }
}

/// `g(j)` with its structure constants in the orthonormal frame.
#[derive(Clone, Debug)]
pub struct MetricLieAlgebra {
    j: JMap,
    bracket: FrameTensor,
    big_j: Mat,
}

/// Builds `g(j)`: `[X_k, X_l] = Σ_α ⟨j_{Z_α} X_k, X_l⟩ Z_α`, `z` central.
pub fn build_algebra(j: &JMap) -> MetricLieAlgebra {
    let (m, n) = (j.m(), j.dim());
    let mut bracket = FrameTensor::zeros(3, n).expect("dimension checked by JMap");
    for (alpha, a) in j.mats().iter().enumerate() {
        for k in 0..m {
            for l in 0..m {
                // ⟨j X_k, X_l⟩ is the (l, k) entry
                bracket.set(&[k, l, m + alpha], a[(l, k)].clone());
            }
        }
    }
    MetricLieAlgebra {
        big_j: j.big_j(),
        j: j.clone(),
        bracket,
    }
}

impl MetricLieAlgebra {
    pub fn j(&self) -> &JMap {
        &self.j
    }

    pub fn m(&self) -> usize {
        self.j.m()
    }

    pub fn r(&self) -> usize {
        self.j.r()
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    /// Structure constants `c[a,b,c]` with `[e_a, e_b] = Σ_c c[a,b,c] e_c`.
    pub fn bracket(&self) -> &FrameTensor {
        &self.bracket
    }

    pub fn big_j(&self) -> &Mat {
        &self.big_j
    }

    pub fn is_central(&self, a: usize) -> bool {
        a >= self.m()
    }
}

/// `Γ[a,b,c] = ⟨∇_{e_a} e_b, e_c⟩`.
#[derive(Clone, Debug)]
pub struct ConnectionCoefficients {
    gamma: FrameTensor,
}

impl ConnectionCoefficients {
    pub fn gamma(&self) -> &FrameTensor {
        &self.gamma
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }

    /// The matrix of `∇_{e_a}`, entry `(c, b) = Γ[a,b,c]`.
    pub fn direction_matrix(&self, a: usize) -> Mat {
        let n = self.dim();
        Mat::from_fn(n, n, |c, b| self.gamma.get(&[a, b, c]))
    }
}

/// Levi-Civita connection from the Koszul formula for left-invariant fields:
/// `2⟨∇_A B, C⟩ = ⟨[A,B],C⟩ − ⟨[B,C],A⟩ + ⟨[C,A],B⟩`.
pub fn connection(alg: &MetricLieAlgebra) -> ConnectionCoefficients {
    let n = alg.dim();
    let c = alg.bracket();
    let half = Rational::new(1, 2);
    let gamma = FrameTensor::from_fn(3, n, |idx| {
        let (a, b, d) = (idx[0], idx[1], idx[2]);
        let s = c.get(&[a, b, d]) - c.get(&[b, d, a]) + c.get(&[d, a, b]);
        s * &half
    })
    .expect("dimension checked by JMap");
    ConnectionCoefficients { gamma }
}

/// `⟨j_{Z_α} X_k, X_l⟩`.
fn jpair(j: &JMap, alpha: usize, k: usize, l: usize) -> &Rational {
    &j.mat(alpha)[(l, k)]
}

/// Curvature tensor from the block formulas for `g(j)`.
pub fn curvature_closed_form(alg: &MetricLieAlgebra) -> FrameTensor {
    let j = alg.j();
    let (m, r, n) = (alg.m(), alg.r(), alg.dim());
    let quarter = Rational::new(1, 4);
    let half = Rational::new(1, 2);
    let mut t = FrameTensor::zeros(4, n).expect("dimension checked by JMap");

    // ⟨R(X,U)Y,V⟩
    let vvvv: Vec<(u64, Rational)> = (0..m)
        .into_par_iter()
        .flat_map_iter(|x| {
            let mut out = Vec::new();
            for u in 0..m {
                for y in 0..m {
                    for v in 0..m {
                        let mut s = Rational::zero();
                        for alpha in 0..r {
                            let t1 = jpair(j, alpha, u, y) * jpair(j, alpha, x, v);
                            let t2 = jpair(j, alpha, x, y) * jpair(j, alpha, u, v);
                            let t3 = jpair(j, alpha, x, u) * jpair(j, alpha, y, v);
                            s += (t1 - t2) * &quarter - t3 * &half;
                        }
                        if !s.is_zero() {
                            out.push(((((x * n + u) * n + y) * n + v) as u64, s));
                        }
                    }
                }
            }
            out
        })
        .collect();
    for (k, s) in vvvv {
        t.add_at_key(k, s);
    }

    // products j_Z j_W
    let prods: Vec<Vec<Mat>> = (0..r)
        .map(|a| {
            (0..r)
                .map(|b| mat_mul(j.mat(a), j.mat(b)).expect("square"))
                .collect()
        })
        .collect();
    for a in 0..r {
        for b in 0..r {
            let (za, zb) = (m + a, m + b);
            let p = &prods[a][b];
            let comm = p.sub(&prods[b][a]).expect("same shape");
            for x in 0..m {
                for y in 0..m {
                    // ⟨[j_Z,j_W]X,Y⟩ is the (y, x) entry
                    let c = -(&comm[(y, x)] * &quarter);
                    if !c.is_zero() {
                        t.set(&[x, y, za, zb], c.clone());
                        t.set(&[za, zb, x, y], c);
                    }
                    // ⟨R(X,Z)Y,W⟩ = −¼⟨j_Z j_W X, Y⟩
                    let d = -(&p[(y, x)] * &quarter);
                    if !d.is_zero() {
                        t.set(&[x, za, y, zb], d.clone());
                        t.set(&[za, x, zb, y], d.clone());
                        t.set(&[za, x, y, zb], -&d);
                        t.set(&[x, za, zb, y], -d);
                    }
                }
            }
        }
    }
    t
}

/// Curvature tensor from the connection alone:
/// `R[a,b,c,d] = Σ_F c_ab^F Γ[F,c,d] − Σ_E Γ[b,c,E] Γ[a,E,d] + Σ_E Γ[a,c,E] Γ[b,E,d]`.
pub fn curvature_from_connection(alg: &MetricLieAlgebra, conn: &ConnectionCoefficients) -> FrameTensor {
    let n = alg.dim();
    let dense = |t: &FrameTensor| -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n * n * n];
        for (idx, x) in t.iter() {
            v[(idx[0] as usize * n + idx[1] as usize) * n + idx[2] as usize] = x.clone();
        }
        v
    };
    let g = dense(conn.gamma());
    let c = dense(alg.bracket());
    fn at(v: &[Rational], n: usize, a: usize, b: usize, d: usize) -> &Rational {
        &v[(a * n + b) * n + d]
    }

    let entries: Vec<(u64, Rational)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut out = Vec::new();
            for b in 0..n {
                for cc in 0..n {
                    for d in 0..n {
                        let mut s = Rational::zero();
                        for e in 0..n {
                            let x = at(&c, n, a, b, e);
                            if !x.is_zero() {
                                let y = at(&g, n, e, cc, d);
                                if !y.is_zero() {
                                    s += x * y;
                                }
                            }
                            let x = at(&g, n, b, cc, e);
                            if !x.is_zero() {
                                let y = at(&g, n, a, e, d);
                                if !y.is_zero() {
                                    s -= x * y;
                                }
                            }
                            let x = at(&g, n, a, cc, e);
                            if !x.is_zero() {
                                let y = at(&g, n, b, e, d);
                                if !y.is_zero() {
                                    s += x * y;
                                }
                            }
                        }
                        if !s.is_zero() {
                            out.push(((((a * n + b) * n + cc) * n + d) as u64, s));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut t = FrameTensor::zeros(4, n).expect("dimension checked by JMap");
    for (k, s) in entries {
        t.add_at_key(k, s);
    }
    t
}

/// Curvature tensor, computed both from the block formulas and from the
/// connection; disagreement is reported as an error.
pub fn curvature_tensor(alg: &MetricLieAlgebra) -> Result<FrameTensor> {
    let closed = curvature_closed_form(alg);
    let oracle = curvature_from_connection(alg, &connection(alg));
    if closed != oracle {
        let diff = closed.sub(&oracle)?;
        let (idx, v) = diff
            .sorted_entries()
            .into_iter()
            .next()
            .expect("tensors differ");
        return Err(Error::Consistency(format!(
            "curvature block formulas and connection disagree at {idx:?} by {v}"
        )));
    }
    Ok(closed)
}

/// Ricci tensor from its closed form: `½J` on `v`, `−¼Tr(j_Z j_W)` on `z`.
pub fn ricci(alg: &MetricLieAlgebra) -> FrameTensor {
    let (m, r, n) = (alg.m(), alg.r(), alg.dim());
    let mut t = FrameTensor::zeros(2, n).expect("dimension checked by JMap");
    let half = Rational::new(1, 2);
    for x in 0..m {
        for y in 0..m {
            t.set(&[x, y], &alg.big_j()[(x, y)] * &half);
        }
    }
    let gram = alg.j().trace_gram();
    let quarter = Rational::new(-1, 4);
    for a in 0..r {
        for b in 0..r {
            t.set(&[m + a, m + b], &gram[(a, b)] * &quarter);
        }
    }
    t
}

/// Ricci tensor as the trace `ric_ab = Σ_i R[a,i,b,i]`.
pub fn ricci_from_curvature(curv: &FrameTensor) -> Result<FrameTensor> {
    curv.trace_slots(1, 3)
}

/// `∇T` for a tensor with constant frame components:
/// `(∇_A T)(B_1..B_k) = −Σ_i T(B_1, .., ∇_A B_i, .., B_k)`. The derivative
/// direction becomes the first slot.
pub fn covariant_derivative(t: &FrameTensor, conn: &ConnectionCoefficients) -> Result<FrameTensor> {
    let n = conn.dim();
    if t.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "tensor over dimension {} and connection over {n}",
            t.dim()
        )));
    }
    let k = t.arity();
    let mut out = FrameTensor::zeros(k + 1, n)?;
    if t.is_zero() {
        return Ok(out);
    }
    // by_ac[a][c] = [(b, Γ[a,b,c])]
    let mut by_ac: Vec<Vec<Vec<(usize, Rational)>>> = vec![vec![Vec::new(); n]; n];
    for (idx, g) in conn.gamma().iter() {
        by_ac[idx[0] as usize][idx[2] as usize].push((idx[1] as usize, g.clone()));
    }
    let entries: Vec<(Vec<usize>, Rational)> = t.sorted_entries();
    let stride = (n as u64).pow(k as u32);
    let parts: Vec<FrameTensor> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut part = FrameTensor::zeros(k + 1, n).expect("shape checked");
            let mut idx = vec![0usize; k];
            for (src, v) in &entries {
                for slot in 0..k {
                    for (b, g) in &by_ac[a][src[slot]] {
                        idx.copy_from_slice(src);
                        idx[slot] = *b;
                        let key = a as u64 * stride + idx.iter().fold(0u64, |acc, &i| acc * n as u64 + i as u64);
                        part.add_at_key(key, -(g * v));
                    }
                }
            }
            part
        })
        .collect();
    for p in parts {
        out.absorb(p);
    }
    Ok(out)
}

/// Whether every bracket of standard basis vectors has integer coefficients,
/// i.e. `[Z^m, Z^m] ⊂ Z^r`.
pub fn gamma_lattice_closure_check(alg: &MetricLieAlgebra) -> bool {
    alg.bracket().iter().all(|(_, v)| v.is_integer())
}
