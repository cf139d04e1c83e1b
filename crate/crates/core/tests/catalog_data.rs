//! Stored example data: checksums, printed entries and fact regressions.

use nilcurv::catalog::{self, check_facts, get, pairwise_traces, raw_data, PAIRS};
use nilcurv::isospec::jmap_isospectral;
use nilcurv::{JMap, Rational};
use sha2::{Digest, Sha256};

const CHECKSUMS: &[(&str, &str)] = &[
    ("fourthree", "648c96dd5c0aac3119b53e0297b77c9773033cf6d2db5f7a2c827661662a0b14"),
    ("fourthree-prime", "270e3fb9a96e43f5f335ddc608fc8037921988be8cff54f74e3261c03c531d3f"),
    ("fivethree", "8e239db42451cbd7ae188c30b01f26d4da4b4ce83f0e70e2a2a0567aa6b10b5a"),
    ("fivethree-prime", "e0dd1e4b99d281058a912651e52bb71c1da48c932737eef5fa3c302dc6b36a7c"),
    ("sixtwo", "27d007125a6a413fbe44032831abbfff3e0fe423f3304c3399cf4935f365255d"),
    ("sixtwo-prime", "50ecaaae9b6423476a39ce4b2449fa18cb1756409d97fbccf062f2a12d58a4ec"),
];

fn q(n: i64) -> Rational {
    Rational::from_int(n)
}

#[test]
fn data_files_match_checksums() {
    for (id, expected) in CHECKSUMS {
        let text = raw_data(id).unwrap();
        assert_eq!(hex::encode(Sha256::digest(text.as_bytes())), *expected, "{id}");
    }
}

#[test]
fn data_files_round_trip() {
    for (id, _) in CHECKSUMS {
        let j = get(id).unwrap().j;
        assert_eq!(JMap::from_json(&j.to_json()).unwrap(), j, "{id}");
    }
}

#[test]
fn printed_first_column() {
    let j = get("fourthree").unwrap().j;
    let col: Vec<Rational> = (0..4).map(|i| j.mat(0)[(i, 0)].clone()).collect();
    assert_eq!(col, vec![q(0), q(2), q(0), q(0)]);
}

/// The printed matrices as functions of `(c1, c2)`.
fn sixtwo_printed(c1: i64, c2: i64) -> [[[i64; 6]; 6]; 2] {
    [
        [
            [0, 0, 3 * c2, c1 + c2, 0, 0],
            [0, 0, 0, 0, c2, 0],
            [-3 * c2, 0, 0, 0, 0, -c1 + c2],
            [-c1 - c2, 0, 0, 0, 0, 3 * c2],
            [0, -c2, 0, 0, 0, 0],
            [0, 0, c1 - c2, -3 * c2, 0, 0],
        ],
        [
            [0, 2 * c2, c2, c1 + c2, 0, 0],
            [-2 * c2, 0, 2 * c2, 0, c2, 0],
            [-c2, -2 * c2, 0, 0, 0, -c1 + c2],
            [-c1 - c2, 0, 0, 0, 2 * c2, c2],
            [0, -c2, 0, -2 * c2, 0, 2 * c2],
            [0, 0, c1 - c2, -c2, -2 * c2, 0],
        ],
    ]
}

#[test]
fn sixtwo_matches_printed_matrices_and_charpoly() {
    let (a, b) = catalog::pair("sixtwo").unwrap();
    // degree 6 in each variable: 7 values per coordinate determine the identity
    for c1 in -3..=3i64 {
        for c2 in -3..=3i64 {
            let z = [q(c1), q(c2)];
            let printed = sixtwo_printed(c1, c2);
            for (k, j) in [&a.j, &b.j].into_iter().enumerate() {
                let m = j.j_z(&z).unwrap();
                for r in 0..6 {
                    for c in 0..6 {
                        assert_eq!(m[(r, c)], q(printed[k][r][c]), "entry ({r},{c}) of map {k}");
                    }
                }
                // λ⁶ + (2c1² + 21c2²)λ⁴ + (c1⁴ + 18c1²c2² + 84c2⁴)λ² + c2²(c1² + 8c2²)²;
                // the λ² coefficient is not (c1² + 9c2²)², which drops 3c2⁴
                let (s1, s2) = (c1 * c1, c2 * c2);
                let expected = [
                    1,
                    0,
                    2 * s1 + 21 * s2,
                    0,
                    s1 * s1 + 18 * s1 * s2 + 84 * s2 * s2,
                    0,
                    s2 * (s1 + 8 * s2).pow(2),
                ]
                .map(q);
                let poly = m.charpoly().unwrap();
                assert_eq!(poly, expected.to_vec());
                assert_eq!(poly[4] == q((s1 + 9 * s2).pow(2)), c2 == 0);
            }
        }
    }
}

#[test]
fn every_fact_recomputes() {
    for id in catalog::ids() {
        let entry = get(&id).unwrap();
        for c in check_facts(&entry).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}

#[test]
fn pairwise_traces_agree_on_isospectral_pairs() {
    for (name, x, y) in PAIRS {
        let (a, b) = (get(x).unwrap().j, get(y).unwrap().j);
        let zbox = if a.r() > 3 { 1 } else { nilcurv::isospec::default_zbox(a.m()) };
        assert!(jmap_isospectral(&a, &b, zbox).unwrap().isospectral, "{name}");
        assert_eq!(pairwise_traces(&a), pairwise_traces(&b), "{name}");
    }
}
