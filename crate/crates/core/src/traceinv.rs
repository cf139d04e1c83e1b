//! Trace invariants `I_{k₁…k_λ|…|k_μ…k_{2q}}(j)`: sums over center indices
//! of products of traces of words in the matrices `j_{Z_α}`.
//!
//! A spec such as `"aabc|bc"` lists one word per trace, separated by `|`;
//! each letter names a summation index and must occur exactly twice.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::liealg::JMap;
use crate::linalg::mat_mul;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TraceSpec {
    /// Letter ids per group; ids index into `letters`.
    groups: Vec<Vec<usize>>,
    letters: Vec<char>,
}

pub fn parse_spec(s: &str) -> Result<TraceSpec> {
    let err = |position: usize, message: String| Error::TraceSpecParse { position, message };
    let mut groups = vec![Vec::new()];
    let mut letters: Vec<char> = Vec::new();
    let mut first_pos: Vec<usize> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for (pos, c) in s.chars().enumerate() {
        match c {
            '|' => {
                if groups.last().is_some_and(Vec::is_empty) {
                    return Err(err(pos, "empty group".into()));
                }
                groups.push(Vec::new());
            }
            c if c.is_ascii_alphabetic() => {
                let id = match letters.iter().position(|&l| l == c) {
                    Some(id) => id,
                    None => {
                        letters.push(c);
                        first_pos.push(pos);
                        counts.push(0);
                        letters.len() - 1
                    }
                };
                counts[id] += 1;
                if counts[id] > 2 {
                    return Err(err(pos, format!("letter '{c}' occurs more than twice")));
                }
                groups.last_mut().expect("nonempty").push(id);
            }
            c => return Err(err(pos, format!("illegal character {c:?}"))),
        }
    }
    if groups.last().is_some_and(Vec::is_empty) {
        return Err(err(s.chars().count(), "empty group".into()));
    }
    if let Some(id) = counts.iter().position(|&n| n != 2) {
        return Err(err(
            first_pos[id],
            format!("letter '{}' occurs once", letters[id]),
        ));
    }
    Ok(TraceSpec { groups, letters })
}

impl FromStr for TraceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_spec(s)
    }
}

impl fmt::Display for TraceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words: Vec<String> = self
            .groups
            .iter()
            .map(|g| g.iter().map(|&id| self.letters[id]).collect())
            .collect();
        write!(f, "{}", words.join("|"))
    }
}

impl TraceSpec {
    pub fn groups(&self) -> Vec<String> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&id| self.letters[id]).collect())
            .collect()
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    /// Half the number of letter occurrences; the invariant has order `2q`.
    pub fn q(&self) -> usize {
        self.letters.len()
    }
}

/// Table of one group's trace over all assignments of its distinct letters.
struct GroupTable {
    /// Distinct letter ids of the group, in first-occurrence order.
    vars: Vec<usize>,
    values: Vec<Rational>,
}

impl GroupTable {
    fn build(word: &[usize], j: &JMap) -> Self {
        let r = j.r();
        let mut vars: Vec<usize> = Vec::new();
        for &id in word {
            if !vars.contains(&id) {
                vars.push(id);
            }
        }
        let slot_of: Vec<usize> = word
            .iter()
            .map(|id| vars.iter().position(|v| v == id).expect("present"))
            .collect();
        let count = r.pow(vars.len() as u32);
        let mut values = Vec::with_capacity(count);
        let mut assign = vec![0usize; vars.len()];
        for code in 0..count {
            let mut c = code;
            for a in assign.iter_mut().rev() {
                *a = c % r;
                c /= r;
            }
            let mut prod = j.mat(assign[slot_of[0]]).clone();
            for &s in &slot_of[1..] {
                prod = mat_mul(&prod, j.mat(assign[s])).expect("square");
            }
            values.push(prod.trace());
        }
        GroupTable { vars, values }
    }
}

/// `Σ_{α: letters → 1..r} Π_groups Tr(j_{Z_{α(first)}} ⋯ j_{Z_{α(last)}})`.
pub fn eval_trace_invariant(spec: &TraceSpec, j: &JMap) -> Rational {
    let r = j.r();
    if r == 0 {
        return Rational::zero();
    }
    let tables: Vec<GroupTable> = spec.groups.iter().map(|g| GroupTable::build(g, j)).collect();
    let q = spec.letters.len();
    let mut assign = vec![0usize; q];
    let mut total = Rational::zero();
    for code in 0..r.pow(q as u32) {
        let mut c = code;
        for a in assign.iter_mut().rev() {
            *a = c % r;
            c /= r;
        }
        let mut prod = Rational::one();
        for t in &tables {
            let key = t.vars.iter().fold(0, |acc, &v| acc * r + assign[v]);
            let v = &t.values[key];
            if v.is_zero() {
                prod = Rational::zero();
                break;
            }
            prod *= v;
        }
        if !prod.is_zero() {
            total += prod;
        }
    }
    total
}

/// Parses and evaluates in one step.
pub fn trace_invariant(spec: &str, j: &JMap) -> Result<Rational> {
    Ok(eval_trace_invariant(&parse_spec(spec)?, j))
}

/// Specs of the named basic trace invariants, keyed by report name.
pub const NAMED_BASICS: &[&str] = &[
    "aa", "aa|bb", "aabb", "ab|ab", "abab", "aabbcc", "aabccb", "aabcbc", "aabc|bc", "ac|bc|ab",
    "abc|abc", "acbc|ab",
];

/// Report name `I_<spec>` for a trace spec.
pub fn basic_name(spec: &str) -> String {
    format!("I_{spec}")
}

/// All named basic trace invariants of `j`.
pub fn eval_named_basics(j: &JMap) -> BTreeMap<String, Rational> {
    NAMED_BASICS
        .iter()
        .map(|s| {
            let spec = parse_spec(s).expect("built-in spec");
            (basic_name(s), eval_trace_invariant(&spec, j))
        })
        .collect()
}
