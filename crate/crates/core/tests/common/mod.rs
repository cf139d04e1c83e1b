//! Helpers shared by the integration suites.
#![allow(dead_code)]

use nilcurv::linalg::mat_mul;
use nilcurv::{Mat, Rational};
use proptest::prelude::*;

/// Primitive Pythagorean triples `(a, b, c)` with `a² + b² = c²`.
pub const TRIPLES: [(i64, i64, i64); 3] = [(3, 4, 5), (5, 12, 13), (8, 15, 17)];

/// Exact rotation by `(a/c, b/c)` in the `(i, k)` plane.
pub fn givens(n: usize, i: usize, k: usize, triple: usize, flip: bool) -> Mat {
    let (a, b, c) = TRIPLES[triple % TRIPLES.len()];
    let (cos, sin) = (Rational::new(a, c), Rational::new(if flip { -b } else { b }, c));
    let mut g = Mat::identity(n);
    g[(i, i)] = cos.clone();
    g[(k, k)] = cos;
    g[(i, k)] = -sin.clone();
    g[(k, i)] = sin;
    g
}

/// Signed permutation matrix sending `e_s` to `sign_s · e_{perm[s]}`.
pub fn signed_permutation(perm: &[usize], signs: &[bool]) -> Mat {
    let n = perm.len();
    let mut p = Mat::zeros(n, n);
    for (s, &t) in perm.iter().enumerate() {
        p[(t, s)] = Rational::from_int(if signs[s] { -1 } else { 1 });
    }
    p
}

/// Rational orthogonal `n × n` matrices: a signed permutation followed by
/// two exact Givens rotations.
pub fn orthogonal(n: usize) -> impl Strategy<Value = Mat> {
    let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
    let signs = prop::collection::vec(any::<bool>(), n);
    let rotations = prop::collection::vec((0..n, 1..n.max(2), 0..TRIPLES.len(), any::<bool>()), 2);
    (perm, signs, rotations).prop_map(move |(perm, signs, rotations)| {
        let mut o = signed_permutation(&perm, &signs);
        if n >= 2 {
            for (i, offset, t, flip) in rotations {
                let k = (i + offset) % n;
                o = mat_mul(&o, &givens(n, i, k, t, flip)).unwrap();
            }
        }
        o
    })
}

pub fn is_orthogonal(o: &Mat) -> bool {
    mat_mul(o, &o.transpose()).unwrap() == Mat::identity(o.rows())
}
