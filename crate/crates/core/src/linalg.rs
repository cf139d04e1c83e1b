//! Dense rational matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A dense row-major matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Mat {
            rows: n,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Panics on ragged input; intended for literals.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let c = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == c), "ragged rows");
        Mat {
            rows: rows.len(),
            cols: c,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|&x| Rational::from_int(x)))
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Mat) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_shape(&self, other: &Mat) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| &self[(i, i)]).sum()
    }

    pub fn is_skew(&self) -> bool {
        self.first_skew_violation().is_none()
    }

    /// First `(i, j)` with `A[i][j] + A[j][i] != 0`, scanning row-major.
    pub fn first_skew_violation(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if !(&self[(i, j)] + &self[(j, i)]).is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (i..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// `Σ_ij A_ij B_ij`, the Frobenius pairing.
    pub fn frobenius(&self, other: &Mat) -> Result<Rational> {
        self.same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn pow(&self, exp: u32) -> Result<Self> {
        let mut acc = Mat::identity(self.rows);
        for _ in 0..exp {
            acc = mat_mul(&acc, self)?;
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }

    /// Coefficients `[1, c1, …, cn]` of `det(λI − A) = λⁿ + c1 λⁿ⁻¹ + … + cn`,
    /// by the Faddeev–LeVerrier recursion.
    pub fn charpoly(&self) -> Result<Vec<Rational>> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("charpoly of non-square matrix".into()));
        }
        let n = self.rows;
        let mut coeffs = vec![Rational::one()];
        // M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k
        let mut m = Mat::zeros(n, n);
        for k in 1..=n {
            let mut next = mat_mul(self, &m)?;
            let c_prev = coeffs[k - 1].clone();
            for i in 0..n {
                next[(i, i)] += &c_prev;
            }
            m = next;
            let am = trace_of_product(self, &m);
            coeffs.push(-am / Rational::from(k));
        }
        Ok(coeffs)
    }

    /// A basis of the right null space, one vector per free column of the
    /// reduced row echelon form.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (rref, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -&rref[(row, f)];
                }
                v
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    fn rref(&self) -> (Mat, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row == a.rows {
                break;
            }
            let Some(p) = (row..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
                continue;
            };
            a.swap_rows(p, row);
            let inv = a[(row, col)].recip();
            for j in 0..a.cols {
                a[(row, j)] = &a[(row, j)] * &inv;
            }
            for r in 0..a.rows {
                if r != row && !a[(r, col)].is_zero() {
                    let f = a[(r, col)].clone();
                    for j in 0..a.cols {
                        let delta = &f * &a[(row, j)];
                        a[(r, j)] -= delta;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Mat::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = &a[(i, k)];
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                let bkj = &b[(k, j)];
                if !bkj.is_zero() {
                    out.data[i * b.cols + j] += aik * bkj;
                }
            }
        }
    }
    Ok(out)
}

/// `Tr(A·B)` without forming the product. Shapes are assumed compatible.
fn trace_of_product(a: &Mat, b: &Mat) -> Rational {
    let mut acc = Rational::zero();
    for i in 0..a.rows {
        for k in 0..a.cols {
            let x = &a[(i, k)];
            let y = &b[(k, i)];
            if !x.is_zero() && !y.is_zero() {
                acc += x * y;
            }
        }
    }
    acc
}

/// `Tr(m₁ · m₂ · … · m_ℓ)` for square matrices of a common size.
pub fn trace_product(ms: &[&Mat]) -> Result<Rational> {
    let Some((first, rest)) = ms.split_first() else {
        return Err(Error::EmptyProduct);
    };
    let n = first.rows;
    if ms.iter().any(|m| m.rows != n || m.cols != n) {
        return Err(Error::DimensionMismatch(
            "trace_product needs square matrices of equal size".into(),
        ));
    }
    let Some((last, middle)) = rest.split_last() else {
        return Ok(first.trace());
    };
    let mut acc = (*first).clone();
    for m in middle {
        acc = mat_mul(&acc, m)?;
    }
    Ok(trace_of_product(&acc, last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from_int(n)
    }

    fn fourthree_z1() -> Mat {
        Mat::from_i64_rows(&[&[0, -2, 0, 0], &[2, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]])
    }

    fn fourthree_z2() -> Mat {
        Mat::from_i64_rows(&[&[0, 0, -2, 0], &[0, 0, 0, 1], &[2, 0, 0, 0], &[0, -1, 0, 0]])
    }

    fn skew_strategy(n: usize) -> impl Strategy<Value = Mat> {
        prop::collection::vec(-5i64..=5, n * (n - 1) / 2).prop_map(move |v| {
            let mut m = Mat::zeros(n, n);
            let mut it = v.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    let x = it.next().unwrap();
                    m[(i, j)] = q(x);
                    m[(j, i)] = q(-x);
                }
            }
            m
        })
    }

    #[test]
    fn identity_times_matrix() {
        let m = fourthree_z1();
        assert_eq!(mat_mul(&Mat::identity(4), &m).unwrap(), m);
        assert!(mat_mul(&Mat::zeros(4, 4), &m).unwrap().is_zero());
    }

    #[test]
    fn fourthree_generator_squared() {
        let m = fourthree_z1();
        let sq = mat_mul(&m, &m).unwrap();
        assert_eq!(sq, Mat::diagonal(&[q(-4), q(-4), q(-1), q(-1)]));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        assert!(mat_mul(&Mat::zeros(2, 3), &Mat::zeros(2, 3)).is_err());
        assert!(trace_product(&[]).is_err());
        assert!(trace_product(&[&Mat::zeros(2, 2), &Mat::zeros(3, 3)]).is_err());
    }

    #[test]
    fn trace_products() {
        let j = Mat::diagonal(&[q(-12), q(-6), q(-6), q(-6)]);
        assert_eq!(trace_product(&[&j, &j, &j]).unwrap(), q(-2376));
        assert_eq!(trace_product(&[&fourthree_z1()]).unwrap(), q(0));
        assert_eq!(trace_product(&[&fourthree_z1(), &fourthree_z2()]).unwrap(), q(0));
    }

    #[test]
    fn charpoly_of_small_matrix() {
        // [[0,-2],[2,0]] has λ² + 4
        let m = Mat::from_i64_rows(&[&[0, -2], &[2, 0]]);
        assert_eq!(m.charpoly().unwrap(), vec![q(1), q(0), q(4)]);
        let d = Mat::diagonal(&[q(1), q(2), q(3)]);
        assert_eq!(d.charpoly().unwrap(), vec![q(1), q(-6), q(11), q(-6)]);
    }

    #[test]
    fn nullspace_of_rank_deficient() {
        let m = Mat::from_i64_rows(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            for i in 0..2 {
                let dot: Rational = (0..3).map(|j| &m[(i, j)] * &v[j]).sum();
                assert!(dot.is_zero());
            }
        }
        assert_eq!(m.rank(), 1);
    }

    proptest! {
        #[test]
        fn trace_is_cyclic(a in skew_strategy(4), b in skew_strategy(4)) {
            prop_assert_eq!(trace_product(&[&a, &b]).unwrap(), trace_product(&[&b, &a]).unwrap());
        }

        #[test]
        fn swapping_adjacent_skew_factors_negates_triple_trace(
            a in skew_strategy(5), b in skew_strategy(5), c in skew_strategy(5)
        ) {
            let abc = trace_product(&[&a, &b, &c]).unwrap();
            let bac = trace_product(&[&b, &a, &c]).unwrap();
            prop_assert_eq!(bac, -abc);
        }

        #[test]
        fn charpoly_constant_term_is_signed_determinant(a in skew_strategy(4)) {
            // for even n, c_n = det(-A) = det(A); compare against cofactor expansion
            fn det(m: &Mat) -> Rational {
                let n = m.rows();
                if n == 1 { return m[(0, 0)].clone(); }
                (0..n).map(|j| {
                    let minor = Mat::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })].clone());
                    let s = if j % 2 == 0 { Rational::one() } else { -Rational::one() };
                    s * &m[(0, j)] * det(&minor)
                }).sum()
            }
            let cp = a.charpoly().unwrap();
            prop_assert_eq!(cp[4].clone(), det(&a));
        }
    }
}
