//! Sparse multi-index tensors in a fixed frame, and complete traces of their
//! tensor products.
//!
//! Components are stored in a hash map keyed by the mixed-radix encoding of
//! the index tuple; zero components are never stored, so lookups outside the
//! support return zero.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::rational::Rational;

pub const MAX_ARITY: usize = 12;

/// Index tuple of a tensor component; only the first `arity` entries are used.
pub type Idx = [u8; MAX_ARITY];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameTensor {
    arity: usize,
    dim: usize,
    entries: FxHashMap<u64, Rational>,
}

impl FrameTensor {
    pub fn zeros(arity: usize, dim: usize) -> Result<Self> {
        if arity > MAX_ARITY || dim > u8::MAX as usize {
            return Err(Error::ResourceLimit(format!(
                "tensor of arity {arity} over dimension {dim} exceeds supported shape"
            )));
        }
        if (dim as u64).checked_pow(arity as u32).is_none() {
            return Err(Error::ResourceLimit(format!(
                "index space {dim}^{arity} does not fit 64-bit keys"
            )));
        }
        Ok(FrameTensor {
            arity,
            dim,
            entries: FxHashMap::default(),
        })
    }

    /// The frame metric `δ_ij`.
    pub fn metric(dim: usize) -> Result<Self> {
        let mut t = Self::zeros(2, dim)?;
        for i in 0..dim {
            t.set(&[i, i], Rational::one());
        }
        Ok(t)
    }

    /// Dense construction by evaluating `f` on every index tuple.
    pub fn from_fn(arity: usize, dim: usize, mut f: impl FnMut(&[usize]) -> Rational) -> Result<Self> {
        let mut t = Self::zeros(arity, dim)?;
        let mut idx = vec![0usize; arity];
        let total = (dim as u64).pow(arity as u32);
        for key in 0..total {
            t.decode_into(key, &mut idx);
            let v = f(&idx);
            if !v.is_zero() {
                t.entries.insert(key, v);
            }
        }
        Ok(t)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) components.
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn encode(&self, idx: &[usize]) -> u64 {
        debug_assert_eq!(idx.len(), self.arity);
        idx.iter().fold(0u64, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim as u64 + i as u64
        })
    }

    fn decode_into(&self, mut key: u64, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = (key % self.dim as u64) as usize;
            key /= self.dim as u64;
        }
    }

    pub fn decode(&self, mut key: u64) -> Idx {
        let mut out = [0u8; MAX_ARITY];
        for slot in out[..self.arity].iter_mut().rev() {
            *slot = (key % self.dim as u64) as u8;
            key /= self.dim as u64;
        }
        out
    }

    pub fn get(&self, idx: &[usize]) -> Rational {
        self.entries
            .get(&self.encode(idx))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn get_ref(&self, idx: &[usize]) -> Option<&Rational> {
        self.entries.get(&self.encode(idx))
    }

    pub fn set(&mut self, idx: &[usize], value: Rational) {
        let key = self.encode(idx);
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
    }

    /// Adds `value` to a component, dropping it if the sum cancels.
    pub fn add_at(&mut self, idx: &[usize], value: Rational) {
        let key = self.encode(idx);
        self.add_at_key(key, value);
    }

    pub(crate) fn add_at_key(&mut self, key: u64, value: Rational) {
        if value.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.entries.entry(key) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += value;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(value);
            }
        }
    }

    /// Adds every component of `other` into `self`.
    pub(crate) fn absorb(&mut self, other: FrameTensor) {
        debug_assert!(self.arity == other.arity && self.dim == other.dim);
        if self.entries.is_empty() {
            self.entries = other.entries;
            return;
        }
        for (k, v) in other.entries {
            self.add_at_key(k, v);
        }
    }

    /// Stored components as `(index tuple, value)`, in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (Idx, &Rational)> + '_ {
        self.entries.iter().map(|(&k, v)| (self.decode(k), v))
    }

    /// Stored components sorted by index tuple.
    pub fn sorted_entries(&self) -> Vec<(Vec<usize>, Rational)> {
        let mut keys: Vec<u64> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| {
                let idx = self.decode(k);
                (
                    idx[..self.arity].iter().map(|&i| i as usize).collect(),
                    self.entries[&k].clone(),
                )
            })
            .collect()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return FrameTensor {
                arity: self.arity,
                dim: self.dim,
                entries: FxHashMap::default(),
            };
        }
        FrameTensor {
            arity: self.arity,
            dim: self.dim,
            entries: self.entries.iter().map(|(&k, v)| (k, v * s)).collect(),
        }
    }

    pub fn add(&self, other: &FrameTensor) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (&k, v) in &other.entries {
            out.add_at_key(k, v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FrameTensor) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    fn check_same_shape(&self, other: &FrameTensor) -> Result<()> {
        if self.arity != other.arity || self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "tensor shapes ({}, dim {}) and ({}, dim {})",
                self.arity, self.dim, other.arity, other.dim
            )));
        }
        Ok(())
    }

    /// Tensor with slots reordered: slot `s` of the result is slot `perm[s]`
    /// of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.arity];
        if perm.len() != self.arity || perm.iter().any(|&p| p >= self.arity || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidPairing(format!("{perm:?} is not a slot permutation")));
        }
        let mut out = Self::zeros(self.arity, self.dim)?;
        let mut idx = vec![0usize; self.arity];
        for (src, v) in self.iter() {
            for (s, &p) in perm.iter().enumerate() {
                idx[s] = src[p] as usize;
            }
            out.entries.insert(out.encode(&idx), v.clone());
        }
        Ok(out)
    }

    /// Contraction of slots `a` and `b`: the remaining slots keep their order.
    pub fn trace_slots(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.arity || b >= self.arity {
            return Err(Error::InvalidPairing(format!(
                "cannot contract slots {a} and {b} of an arity-{} tensor",
                self.arity
            )));
        }
        let mut out = Self::zeros(self.arity - 2, self.dim)?;
        let mut rest = Vec::with_capacity(self.arity - 2);
        for (idx, v) in self.iter() {
            if idx[a] != idx[b] {
                continue;
            }
            rest.clear();
            rest.extend((0..self.arity).filter(|&s| s != a && s != b).map(|s| idx[s] as usize));
            let key = out.encode(&rest);
            out.add_at_key(key, v.clone());
        }
        Ok(out)
    }

    /// Whether permuting the slots by `perm` multiplies the tensor by `sign`.
    pub fn has_symmetry(&self, perm: &[usize], sign: &Rational) -> Result<bool> {
        let p = self.permute(perm)?;
        Ok(p == self.scale(sign))
    }
}

/// A perfect matching of `2N` tensor slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    slots: usize,
    pairs: Vec<(usize, usize)>,
}

impl Pairing {
    pub fn new(slots: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if !slots.is_multiple_of(2) {
            return Err(Error::InvalidPairing(format!("odd slot count {slots}")));
        }
        if pairs.len() * 2 != slots {
            return Err(Error::InvalidPairing(format!(
                "{} pairs cannot cover {slots} slots",
                pairs.len()
            )));
        }
        let mut seen = vec![false; slots];
        for &(a, b) in &pairs {
            for s in [a, b] {
                if s >= slots {
                    return Err(Error::InvalidPairing(format!("slot {s} out of range")));
                }
                if std::mem::replace(&mut seen[s], true) {
                    return Err(Error::InvalidPairing(format!("slot {s} paired twice")));
                }
            }
        }
        Ok(Pairing { slots, pairs })
    }

    /// Pairing from index labels such as `"ijkl,klpq,pqij"`: one comma
    /// separated word per tensor, every letter used exactly twice.
    /// Returns the pairing and the per-tensor arities.
    pub fn from_labels(spec: &str) -> Result<(Self, Vec<usize>)> {
        let mut arities = Vec::new();
        let mut occurrences: Vec<(char, Vec<usize>)> = Vec::new();
        let mut slot = 0;
        for word in spec.split(',') {
            for c in word.chars() {
                if !c.is_ascii_alphabetic() {
                    return Err(Error::InvalidPairing(format!("bad label {c:?} in {spec:?}")));
                }
                match occurrences.iter_mut().find(|(l, _)| *l == c) {
                    Some((_, slots)) => slots.push(slot),
                    None => occurrences.push((c, vec![slot])),
                }
                slot += 1;
            }
            arities.push(word.len());
        }
        let mut pairs = Vec::with_capacity(occurrences.len());
        for (c, slots) in occurrences {
            match slots[..] {
                [a, b] => pairs.push((a, b)),
                _ => {
                    return Err(Error::InvalidPairing(format!(
                        "label {c:?} used {} times",
                        slots.len()
                    )))
                }
            }
        }
        Ok((Pairing::new(slot, pairs)?, arities))
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Entries of one tensor grouped by the values of its already-bound labels.
struct Projection {
    /// Label ids bound before this tensor, in slot order of first occurrence.
    bound: Vec<usize>,
    /// Label ids first bound by this tensor.
    fresh: Vec<usize>,
    buckets: FxHashMap<u64, Bucket>,
}

#[derive(Default)]
struct Bucket {
    labels: Vec<u8>,
    coeffs: Vec<Rational>,
}

impl Projection {
    fn build(t: &FrameTensor, slot_labels: &[usize], is_bound: &[bool]) -> Self {
        let mut bound = Vec::new();
        let mut fresh = Vec::new();
        // label id -> position of its first slot in this tensor
        let mut first_slot: FxHashMap<usize, usize> = FxHashMap::default();
        let mut equal_slots = Vec::new();
        for (s, &l) in slot_labels.iter().enumerate() {
            if let Some(&f) = first_slot.get(&l) {
                equal_slots.push((f, s));
                continue;
            }
            first_slot.insert(l, s);
            if is_bound[l] {
                bound.push(l);
            } else {
                fresh.push(l);
            }
        }
        let bound_slots: Vec<usize> = bound.iter().map(|l| first_slot[l]).collect();
        let fresh_slots: Vec<usize> = fresh.iter().map(|l| first_slot[l]).collect();
        let mut buckets: FxHashMap<u64, Bucket> = FxHashMap::default();
        for (idx, v) in t.iter() {
            if equal_slots.iter().any(|&(a, b)| idx[a] != idx[b]) {
                continue;
            }
            let key = bound_slots
                .iter()
                .fold(0u64, |acc, &s| acc * t.dim as u64 + idx[s] as u64);
            let bucket = buckets.entry(key).or_default();
            bucket.labels.extend(fresh_slots.iter().map(|&s| idx[s]));
            bucket.coeffs.push(v.clone());
        }
        Projection { bound, fresh, buckets }
    }
}

fn contract_from(
    projections: &[Projection],
    depth: usize,
    dim: u64,
    values: &mut [u8],
) -> Rational {
    let Some(p) = projections.get(depth) else {
        return Rational::one();
    };
    let key = p.bound.iter().fold(0u64, |acc, &l| acc * dim + values[l] as u64);
    let Some(bucket) = p.buckets.get(&key) else {
        return Rational::zero();
    };
    let w = p.fresh.len();
    let mut acc = Rational::zero();
    for (i, c) in bucket.coeffs.iter().enumerate() {
        for (k, &l) in p.fresh.iter().enumerate() {
            values[l] = bucket.labels[i * w + k];
        }
        let rest = contract_from(projections, depth + 1, dim, values);
        if !rest.is_zero() {
            acc += c * &rest;
        }
    }
    acc
}

/// Sum over all index assignments in which paired slots carry equal indices,
/// of the product of the tensors' components. Slots are numbered
/// consecutively across the tensor list.
pub fn complete_trace(tensors: &[&FrameTensor], pairing: &Pairing) -> Result<Rational> {
    let total: usize = tensors.iter().map(|t| t.arity()).sum();
    if total != pairing.slots() {
        return Err(Error::InvalidPairing(format!(
            "pairing covers {} slots but tensors have {total}",
            pairing.slots()
        )));
    }
    let Some(dim) = tensors.first().map(|t| t.dim()) else {
        return Ok(Rational::one());
    };
    if tensors.iter().any(|t| t.dim() != dim) {
        return Err(Error::DimensionMismatch("tensors over different frames".into()));
    }
    if tensors.iter().any(|t| t.is_zero()) {
        return Ok(Rational::zero());
    }

    let mut label_of = vec![0usize; total];
    for (l, &(a, b)) in pairing.pairs().iter().enumerate() {
        label_of[a] = l;
        label_of[b] = l;
    }
    let mut is_bound = vec![false; pairing.pairs().len()];
    let mut projections = Vec::with_capacity(tensors.len());
    let mut offset = 0;
    for t in tensors {
        let labels = &label_of[offset..offset + t.arity()];
        projections.push(Projection::build(t, labels, &is_bound));
        for &l in labels {
            is_bound[l] = true;
        }
        offset += t.arity();
    }

    let nlabels = pairing.pairs().len();
    let top = &projections[0];
    let Some(bucket) = top.buckets.get(&0) else {
        return Ok(Rational::zero());
    };
    let w = top.fresh.len();
    let dim = dim as u64;
    let sum = (0..bucket.coeffs.len())
        .into_par_iter()
        .fold(
            || (vec![0u8; nlabels], Rational::zero()),
            |(mut values, mut acc), i| {
                for (k, &l) in top.fresh.iter().enumerate() {
                    values[l] = bucket.labels[i * w + k];
                }
                let rest = contract_from(&projections, 1, dim, &mut values);
                if !rest.is_zero() {
                    acc += &bucket.coeffs[i] * &rest;
                }
                (values, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(Rational::zero, |a, b| a + b);
    Ok(sum)
}

/// Complete trace with the pairing written as index labels, e.g.
/// `einsum("ijkl,klpq,pqij", &[&r, &r, &r])`.
pub fn einsum(labels: &str, tensors: &[&FrameTensor]) -> Result<Rational> {
    let (pairing, arities) = Pairing::from_labels(labels)?;
    if arities.len() != tensors.len() || arities.iter().zip(tensors).any(|(&a, t)| a != t.arity()) {
        return Err(Error::InvalidPairing(format!(
            "labels {labels:?} do not match tensor arities"
        )));
    }
    complete_trace(tensors, &pairing)
}
