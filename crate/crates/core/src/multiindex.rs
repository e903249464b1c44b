//! Multi-index algebra: neighborhoods, admissible (downward-closed) sets,
//! canonical set constructors, and integer Smolyak combination coefficients.
//!
//! Two index spaces share the [`MultiIndex`] type but must not be mixed:
//! quadrature *levels* start at 1 (there is no level-0 rule), while basis
//! *degrees* start at 0. Admissibility is defined for level sets, so the
//! level floor of 1 is baked into the admissibility checks: a backward
//! neighbor that would drop a component below 1 is clipped.

use crate::error::CoreError;
use crate::Result;
use indexmap::IndexSet;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A vector of small nonnegative integers with a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// The all-`value` index of dimension `d`.
    pub fn constant(d: usize, value: u32) -> Self {
        MultiIndex(vec![value; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// Total order `|k| = sum of entries`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// The `d` forward neighbors `k + e_i`.
    pub fn forward_neighbors(&self) -> Vec<MultiIndex> {
        (0..self.dim())
            .map(|i| {
                let mut v = self.0.clone();
                v[i] += 1;
                MultiIndex(v)
            })
            .collect()
    }

    /// Backward neighbors `k - e_i`, keeping only those with all entries
    /// nonnegative.
    pub fn backward_neighbors(&self) -> Vec<MultiIndex> {
        (0..self.dim())
            .filter(|&i| self.0[i] > 0)
            .map(|i| {
                let mut v = self.0.clone();
                v[i] -= 1;
                MultiIndex(v)
            })
            .collect()
    }

    /// Componentwise `<=`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// A finite set of multi-indices with O(1) membership and insertion-ordered
/// iteration. Constructors insert in lexicographic order so downstream
/// floating-point assembly is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexSet {
    dim: usize,
    members: IndexSet<MultiIndex>,
}

impl MultiIndexSet {
    pub fn new(dim: usize) -> Self {
        MultiIndexSet {
            dim,
            members: IndexSet::new(),
        }
    }

    pub fn from_indices(dim: usize, indices: impl IntoIterator<Item = MultiIndex>) -> Result<Self> {
        let mut set = MultiIndexSet::new(dim);
        for k in indices {
            set.insert(k)?;
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Insert, rejecting dimension mismatches. Returns whether `k` was new.
    pub fn insert(&mut self, k: MultiIndex) -> Result<bool> {
        if k.dim() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: k.dim(),
            });
        }
        Ok(self.members.insert(k))
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        self.members.contains(k)
    }

    /// Iterate in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.members.iter()
    }

    /// Members sorted lexicographically (fresh vector).
    pub fn sorted(&self) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> = self.members.iter().cloned().collect();
        v.sort();
        v
    }

    /// JSON serialization as an array of integer arrays, in iteration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.members.iter().collect::<Vec<_>>())
            .expect("multi-index serialization cannot fail")
    }

    pub fn from_json(dim: usize, s: &str) -> Result<Self> {
        let raw: Vec<Vec<u32>> = serde_json::from_str(s)
            .map_err(|e| CoreError::InvalidParameter(format!("index set JSON: {e}")))?;
        MultiIndexSet::from_indices(dim, raw.into_iter().map(MultiIndex::new))
    }
}

/// Is `k` admissible with respect to `set` under the level convention
/// (entries >= 1, backward neighbors clipped at the level floor)?
pub fn is_admissible_with(k: &MultiIndex, set: &MultiIndexSet) -> bool {
    k.entries().iter().all(|&e| e >= 1)
        && (0..k.dim()).all(|i| {
            if k.get(i) <= 1 {
                return true;
            }
            let mut v = k.entries().to_vec();
            v[i] -= 1;
            set.contains(&MultiIndex::new(v))
        })
}

/// Is the whole level set admissible (downward closed above the level floor)?
pub fn is_admissible(set: &MultiIndexSet) -> bool {
    set.iter().all(|k| is_admissible_with(k, set))
}

fn first_violation(set: &MultiIndexSet) -> Option<(MultiIndex, MultiIndex)> {
    for k in set.iter() {
        for i in 0..k.dim() {
            if k.get(i) > 1 {
                let mut v = k.entries().to_vec();
                v[i] -= 1;
                let nb = MultiIndex::new(v);
                if !set.contains(&nb) {
                    return Some((k.clone(), nb));
                }
            }
        }
    }
    None
}

pub(crate) fn require_admissible(set: &MultiIndexSet) -> Result<()> {
    match first_violation(set) {
        None => Ok(()),
        Some((index, missing)) => Err(CoreError::NotAdmissible { index, missing }),
    }
}

/// Total-order level set `{k in N_1^d : |k - 1|_1 <= n}`, in lexicographic
/// order.
pub fn total_order_set(d: usize, n: u32) -> MultiIndexSet {
    let mut set = MultiIndexSet::new(d);
    let mut current = vec![1u32; d];
    loop {
        set.insert(MultiIndex::new(current.clone()))
            .expect("dimension is consistent by construction");
        // lexicographic odometer over the simplex
        let mut i = d;
        loop {
            if i == 0 {
                return set;
            }
            i -= 1;
            current[i] += 1;
            let excess: u32 = current.iter().map(|&e| e - 1).sum();
            if excess <= n {
                break;
            }
            current[i] = 1;
        }
    }
}

/// Full-tensor level set `{k : 1 <= k_i <= bounds_i}`, in lexicographic order.
pub fn full_tensor_set(bounds: &MultiIndex) -> Result<MultiIndexSet> {
    if bounds.entries().iter().any(|&b| b < 1) {
        return Err(CoreError::InvalidParameter(
            "full_tensor_set bounds must be >= 1 componentwise".into(),
        ));
    }
    let d = bounds.dim();
    let mut set = MultiIndexSet::new(d);
    let mut current = vec![1u32; d];
    loop {
        set.insert(MultiIndex::new(current.clone()))?;
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(set);
            }
            i -= 1;
            current[i] += 1;
            if current[i] <= bounds.get(i) {
                break;
            }
            current[i] = 1;
        }
    }
}

/// Seeded random admissible level set: grow from the root by adding an
/// admissible forward neighbor of a random member until `target_size`
/// members, with components capped at `max_level`. For randomized checks and
/// benchmarks; deterministic per seed.
pub fn random_admissible_set(
    d: usize,
    target_size: usize,
    max_level: u32,
    seed: u64,
) -> MultiIndexSet {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut set = MultiIndexSet::new(d);
    set.insert(MultiIndex::constant(d, 1))
        .expect("dimension consistent");
    let mut stall = 0;
    while set.len() < target_size && stall < 64 {
        let pick = rng.gen_range(0..set.len());
        let k = set.iter().nth(pick).expect("index in range").clone();
        let candidates: Vec<MultiIndex> = k
            .forward_neighbors()
            .into_iter()
            .filter(|f| {
                f.entries().iter().all(|&e| e <= max_level)
                    && !set.contains(f)
                    && is_admissible_with(f, &set)
            })
            .collect();
        if candidates.is_empty() {
            stall += 1;
            continue;
        }
        stall = 0;
        let chosen = candidates[rng.gen_range(0..candidates.len())].clone();
        set.insert(chosen).expect("dimension consistent");
    }
    set
}

/// Integer Smolyak combination coefficients for an admissible level set:
/// `c_k = sum over b in {0,1}^d with k + b in set of (-1)^{|b|}`.
///
/// Zero coefficients are omitted from the map.
pub fn smolyak_coefficients(set: &MultiIndexSet) -> Result<BTreeMap<MultiIndex, i64>> {
    require_admissible(set)?;
    if set.is_empty() {
        return Err(CoreError::InvalidParameter(
            "Smolyak coefficients of an empty set".into(),
        ));
    }
    let d = set.dim();
    if d > 32 {
        return Err(CoreError::InvalidParameter(format!(
            "dimension {d} exceeds the supported 32 for coefficient enumeration"
        )));
    }
    let mut coeffs = BTreeMap::new();
    for k in set.iter() {
        let mut c: i64 = 0;
        for mask in 0u64..(1u64 << d) {
            let mut probe = k.entries().to_vec();
            for (i, e) in probe.iter_mut().enumerate() {
                *e += ((mask >> i) & 1) as u32;
            }
            if set.contains(&MultiIndex::new(probe)) {
                c += if mask.count_ones() % 2 == 0 { 1 } else { -1 };
            }
        }
        if c != 0 {
            coeffs.insert(k.clone(), c);
        }
    }
    Ok(coeffs)
}
