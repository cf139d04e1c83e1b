//! Built-in j maps: the three printed isospectral pairs (stored as JSON data
//! files) and the Heisenberg-type Clifford module algebras `heis{r}-{a}-{b}`.
//!
//! Each entry carries a table of exact facts that the regression suite
//! recomputes with [`fact_value`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::heisenberg::{build_clifford_j, omega_trace_squared, CliffordModuleSpec};
use crate::liealg::JMap;
use crate::linalg::mat_mul;
use crate::rational::Rational;
use crate::traceinv::trace_invariant;

const DATA: &[(&str, &str)] = &[
    ("fourthree", include_str!("../data/fourthree.json")),
    ("fourthree-prime", include_str!("../data/fourthree-prime.json")),
    ("fivethree", include_str!("../data/fivethree.json")),
    ("fivethree-prime", include_str!("../data/fivethree-prime.json")),
    ("sixtwo", include_str!("../data/sixtwo.json")),
    ("sixtwo-prime", include_str!("../data/sixtwo-prime.json")),
];

/// Raw JSON of a stored entry, for checksumming.
pub fn raw_data(id: &str) -> Option<&'static str> {
    DATA.iter().find(|(k, _)| *k == id).map(|(_, v)| *v)
}

/// Named isospectral pairs.
pub const PAIRS: &[(&str, &str, &str)] = &[
    ("fourthree", "fourthree", "fourthree-prime"),
    ("fivethree", "fivethree", "fivethree-prime"),
    ("sixtwo", "sixtwo", "sixtwo-prime"),
    ("heis3", "heis3-2-0", "heis3-1-1"),
    ("heis7", "heis7-2-0", "heis7-1-1"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fact {
    pub name: String,
    pub value: Rational,
    pub note: String,
}

fn fact(name: &str, value: i64, note: &str) -> Fact {
    Fact {
        name: name.to_string(),
        value: Rational::from_int(value),
        note: note.to_string(),
    }
}

fn diag_facts(entries: &[i64]) -> Vec<Fact> {
    entries
        .iter()
        .enumerate()
        .map(|(k, &v)| fact(&format!("J_diag_{}", k + 1), v, "diagonal entry of J"))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub j: JMap,
    pub partner: Option<String>,
    pub facts: Vec<Fact>,
}

/// Parses `heis{r}-{a}-{b}`.
fn parse_heis(id: &str) -> Option<(usize, usize, usize)> {
    let rest = id.strip_prefix("heis")?;
    let mut parts = rest.split('-');
    let r: usize = parts.next()?.parse().ok()?;
    let a: usize = parts.next()?.parse().ok()?;
    let b: usize = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    let limit = match r {
        3 => 3,
        7 => 2,
        _ => return None,
    };
    (1..=limit).contains(&(a + b)).then_some((r, a, b))
}

fn partner_of(id: &str) -> Option<String> {
    PAIRS.iter().find_map(|&(_, x, y)| {
        if x == id {
            Some(y.to_string())
        } else if y == id {
            Some(x.to_string())
        } else {
            None
        }
    })
}

fn description(id: &str) -> String {
    let base = id.trim_end_matches("-prime");
    let which = if id.ends_with("-prime") { "second" } else { "first" };
    match base {
        "fourthree" => format!("m = 4, r = 3; {which} map of an isospectral pair differing in Tr(Ric^3)"),
        "fivethree" => format!("m = 5, r = 3; {which} map of an isospectral pair differing in |nabla ric|^2"),
        "sixtwo" => format!("m = 6, r = 2; {which} map of an isospectral pair differing in |ric|^2"),
        _ => match parse_heis(id) {
            Some((r, a, b)) => format!(
                "Heisenberg type, r = {r}: {a} plus and {b} minus irreducible Clifford modules"
            ),
            None => String::new(),
        },
    }
}

/// Expected exact values for an entry.
pub fn expected_facts(id: &str) -> Result<Vec<Fact>> {
    let facts = match id {
        "fourthree" => {
            let mut f = vec![fact("TrJ", -30, "trace of J"), fact("TrJ3", -2376, "trace of J^3")];
            f.extend(diag_facts(&[-12, -6, -6, -6]));
            f
        }
        "fourthree-prime" => {
            let mut f = vec![fact("TrJ", -30, "trace of J"), fact("TrJ3", -2214, "trace of J^3")];
            f.extend(diag_facts(&[-3, -9, -9, -9]));
            f
        }
        "fivethree" | "fivethree-prime" => {
            let prime = id.ends_with("-prime");
            let mut f = vec![
                fact("TrJ", -8, "trace of J"),
                fact("TrJ2", 14, "trace of J^2"),
                fact("I_aabccb", if prime { -26 } else { -24 }, "governs |nabla ric|^2"),
            ];
            f.extend(diag_facts(if prime {
                &[-1, -1, -2, -2, -2]
            } else {
                &[-2, -2, -1, -1, -2]
            }));
            f
        }
        "sixtwo" => vec![fact("TrJ2", 630, "trace of J^2")],
        "sixtwo-prime" => vec![fact("TrJ2", 598, "trace of J^2")],
        _ => {
            let (r, a, b) = parse_heis(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
            let m = CliffordModuleSpec::new(r, a, b)?.m() as i64;
            let block = m / (a + b) as i64;
            let omega = (a as i64 - b as i64) * block;
            vec![
                fact("TrJ", -(r as i64) * m, "J = -r Id for Heisenberg type"),
                fact("TrJ2", (r * r) as i64 * m, "J = -r Id for Heisenberg type"),
                fact("omega_trace_sq", omega * omega, "(Tr j_1 ... j_r)^2"),
            ]
        }
    };
    Ok(facts)
}

pub fn get(id: &str) -> Result<CatalogEntry> {
    let j = match raw_data(id) {
        Some(text) => JMap::from_json(text)?,
        None => {
            let (r, a, b) = parse_heis(id).ok_or_else(|| Error::UnknownId(id.to_string()))?;
            build_clifford_j(&CliffordModuleSpec::new(r, a, b)?)?
        }
    };
    Ok(CatalogEntry {
        id: id.to_string(),
        description: description(id),
        j,
        partner: partner_of(id),
        facts: expected_facts(id)?,
    })
}

/// Every catalog id.
pub fn ids() -> Vec<String> {
    let mut out: Vec<String> = DATA.iter().map(|(k, _)| k.to_string()).collect();
    for (r, limit) in [(3, 3), (7, 2)] {
        for total in 1..=limit {
            for a in (0..=total).rev() {
                out.push(format!("heis{r}-{a}-{}", total - a));
            }
        }
    }
    out
}

/// The two entries of a named pair.
pub fn pair(name: &str) -> Result<(CatalogEntry, CatalogEntry)> {
    let &(_, x, y) = PAIRS
        .iter()
        .find(|p| p.0 == name)
        .ok_or_else(|| Error::UnknownId(name.to_string()))?;
    Ok((get(x)?, get(y)?))
}

/// Recomputes a named fact from `j`.
pub fn fact_value(name: &str, j: &JMap) -> Result<Rational> {
    let big = j.big_j();
    let power_trace = |k: u32| -> Result<Rational> { Ok(big.pow(k)?.trace()) };
    match name {
        "TrJ" => Ok(big.trace()),
        "TrJ2" => power_trace(2),
        "TrJ3" => power_trace(3),
        "omega_trace_sq" => omega_trace_squared(j),
        _ => {
            if let Some(spec) = name.strip_prefix("I_") {
                return trace_invariant(spec, j);
            }
            if let Some(k) = name.strip_prefix("J_diag_").and_then(|k| k.parse::<usize>().ok()) {
                if (1..=j.m()).contains(&k) {
                    return Ok(big[(k - 1, k - 1)].clone());
                }
            }
            Err(Error::UnknownId(name.to_string()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactCheck {
    pub entry: String,
    pub fact: String,
    pub expected: Rational,
    pub actual: Rational,
    pub passed: bool,
}

/// Recomputes every fact of an entry.
pub fn check_facts(entry: &CatalogEntry) -> Result<Vec<FactCheck>> {
    entry
        .facts
        .iter()
        .map(|f| {
            let actual = fact_value(&f.name, &entry.j)?;
            Ok(FactCheck {
                entry: entry.id.clone(),
                fact: f.name.clone(),
                passed: actual == f.value,
                expected: f.value.clone(),
                actual,
            })
        })
        .collect()
}

/// `Tr(j_α j_β)` for all pairs; equal for isospectral maps.
pub fn pairwise_traces(j: &JMap) -> Vec<Vec<Rational>> {
    (0..j.r())
        .map(|a| {
            (0..j.r())
                .map(|b| mat_mul(j.mat(a), j.mat(b)).expect("square").trace())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::is_heisenberg_type;

    #[test]
    fn fourthree_first_column() {
        let e = get("fourthree").unwrap();
        let col: Vec<Rational> = (0..4).map(|i| e.j.mat(0)[(i, 0)].clone()).collect();
        assert_eq!(col, [0, 2, 0, 0].map(Rational::from_int));
    }

    #[test]
    fn heisenberg_entries() {
        let e = get("heis3-2-0").unwrap();
        assert!(is_heisenberg_type(&e.j).holds);
        assert_eq!(e.partner.as_deref(), Some("heis3-1-1"));
        assert_eq!((e.j.m(), e.j.r()), (8, 3));
        assert_eq!(get("heis7-0-2").unwrap().j.m(), 16);
    }

    #[test]
    fn unknown_ids() {
        for id in ["nope", "heis3-0-0", "heis3-2-2", "heis7-3-0", "heis5-1-0", "heis3-1-0-0"] {
            assert!(matches!(get(id), Err(Error::UnknownId(_))), "{id}");
        }
        assert!(expected_facts("nope").is_err());
        assert!(pair("nope").is_err());
    }

    #[test]
    fn ids_resolve() {
        let all = ids();
        assert_eq!(all.len(), 6 + 9 + 5);
        for id in &all {
            assert_eq!(&get(id).unwrap().id, id);
        }
    }

    #[test]
    fn facts_hold() {
        for id in ids() {
            let e = get(&id).unwrap();
            for c in check_facts(&e).unwrap() {
                assert!(c.passed, "{c:?}");
            }
        }
    }
}
