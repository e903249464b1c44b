//! Deduplicating store of model evaluations.
//!
//! Every operator routes function evaluations through an [`EvalCache`], so
//! the miss counter is the authoritative "number of model evaluations spent"
//! for cost accounting. Keys are the exact binary coordinates produced by the
//! rule constructors (with -0.0 folded onto +0.0); nested rule families
//! generate coarse-level points bitwise-identically at finer levels, so their
//! reuse is exact rather than tolerance-based.
//!
//! Concurrent batches are safe: a point claimed by one batch is never
//! re-evaluated by another (waiters block until the claimant stores the
//! value or fails).

use crate::error::{CoreError, PointFailure};
use crate::fmt::sig17;
use crate::model::ModelFunction;
use crate::Result;
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::{Condvar, Mutex};

type Key = Vec<u64>;

fn canonical_key(point: &[f64]) -> Result<Key> {
    point
        .iter()
        .map(|&x| {
            if x.is_nan() {
                Err(CoreError::InvalidParameter(
                    "NaN coordinate in evaluation point".into(),
                ))
            } else if x == 0.0 {
                Ok(0.0f64.to_bits()) // fold -0.0
            } else {
                Ok(x.to_bits())
            }
        })
        .collect()
}

#[derive(Default)]
struct Inner {
    dim: Option<usize>,
    done: HashMap<Key, f64>,
    pending: HashSet<Key>,
    misses: u64,
    hits: u64,
}

/// Shared, thread-safe evaluation store. See the module docs.
#[derive(Default)]
pub struct EvalCache {
    inner: Mutex<Inner>,
    ready: Condvar,
}

impl EvalCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct points ever evaluated through this cache.
    pub fn evals_total(&self) -> u64 {
        self.inner.lock().unwrap().misses
    }

    /// Number of lookups served without a model call.
    pub fn hits(&self) -> u64 {
        self.inner.lock().unwrap().hits
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> Option<usize> {
        self.inner.lock().unwrap().dim
    }

    /// How many of `points` are not yet stored (deduplicated). Pure query;
    /// the work measure behind the cost-aware refinement indicators.
    pub fn count_new(&self, points: &[Vec<f64>]) -> usize {
        let inner = self.inner.lock().unwrap();
        let mut seen = HashSet::new();
        let mut n = 0;
        for p in points {
            if let Ok(key) = canonical_key(p) {
                if !inner.done.contains_key(&key)
                    && !inner.pending.contains(&key)
                    && seen.insert(key)
                {
                    n += 1;
                }
            }
        }
        n
    }

    /// Evaluate `points`, returning values in input order. Points already
    /// stored (or repeated within the batch) cost no model calls.
    pub fn evaluate_batch(
        &self,
        model: &dyn ModelFunction,
        points: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        if points.is_empty() {
            return Ok(Vec::new());
        }
        let dim = points[0].len();
        if model.dimension() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: model.dimension(),
                got: dim,
            });
        }
        let mut keys = Vec::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            keys.push(canonical_key(p)?);
        }

        // Partition into already-done, in-flight elsewhere, and claimed-by-us.
        let mut to_eval: Vec<(Key, Vec<f64>, usize)> = Vec::new();
        let mut wait_for: Vec<Key> = Vec::new();
        {
            let mut inner = self.inner.lock().unwrap();
            match inner.dim {
                None => inner.dim = Some(dim),
                Some(d) if d != dim => {
                    return Err(CoreError::DimensionMismatch {
                        expected: d,
                        got: dim,
                    })
                }
                _ => {}
            }
            let mut claimed: HashSet<Key> = HashSet::new();
            for (i, key) in keys.iter().enumerate() {
                if inner.done.contains_key(key) {
                    inner.hits += 1;
                } else if claimed.contains(key) {
                    inner.hits += 1;
                } else if inner.pending.contains(key) {
                    wait_for.push(key.clone());
                } else {
                    inner.pending.insert(key.clone());
                    claimed.insert(key.clone());
                    to_eval.push((key.clone(), points[i].clone(), i));
                }
            }
        }

        if !to_eval.is_empty() {
            let batch: Vec<Vec<f64>> = to_eval.iter().map(|(_, p, _)| p.clone()).collect();
            match model.eval_batch(&batch) {
                Ok(values) => {
                    let mut bad = Vec::new();
                    for ((_, p, orig), &v) in to_eval.iter().zip(&values) {
                        if !v.is_finite() {
                            bad.push(PointFailure {
                                index: *orig,
                                point: p.clone(),
                                reason: format!("non-finite value {v}"),
                            });
                        }
                    }
                    let mut inner = self.inner.lock().unwrap();
                    if bad.is_empty() {
                        for ((key, _, _), &v) in to_eval.iter().zip(&values) {
                            inner.pending.remove(key);
                            inner.done.insert(key.clone(), v);
                            inner.misses += 1;
                        }
                        self.ready.notify_all();
                    } else {
                        for (key, _, _) in &to_eval {
                            inner.pending.remove(key);
                        }
                        self.ready.notify_all();
                        return Err(CoreError::ModelEvaluation { failures: bad });
                    }
                }
                Err(e) => {
                    let mut inner = self.inner.lock().unwrap();
                    for (key, _, _) in &to_eval {
                        inner.pending.remove(key);
                    }
                    self.ready.notify_all();
                    // Remap sub-batch failure indices to the caller's indices.
                    return Err(match e {
                        CoreError::ModelEvaluation { failures } => CoreError::ModelEvaluation {
                            failures: failures
                                .into_iter()
                                .map(|mut f| {
                                    if let Some((_, _, orig)) = to_eval.get(f.index) {
                                        f.index = *orig;
                                    }
                                    f
                                })
                                .collect(),
                        },
                        other => other,
                    });
                }
            }
        }

        // Wait for points claimed by concurrent batches.
        if !wait_for.is_empty() {
            let mut inner = self.inner.lock().unwrap();
            for key in &wait_for {
                while inner.pending.contains(key) {
                    inner = self.ready.wait(inner).unwrap();
                }
                if !inner.done.contains_key(key) {
                    return Err(CoreError::InvalidParameter(
                        "a concurrent batch failed to evaluate a shared point".into(),
                    ));
                }
            }
        }

        let inner = self.inner.lock().unwrap();
        Ok(keys
            .iter()
            .map(|k| *inner.done.get(k).expect("all keys resolved above"))
            .collect())
    }

    /// Write the cache to `path`: a `dim=<d>` header, then one line per point
    /// with d+1 numbers (coordinates then value) at 17 significant digits.
    /// Rows are sorted by coordinate bits, so the file is deterministic.
    pub fn snapshot(&self, path: &Path) -> Result<()> {
        let inner = self.inner.lock().unwrap();
        let dim = inner.dim.unwrap_or(0);
        let mut rows: Vec<(&Key, &f64)> = inner.done.iter().collect();
        rows.sort_by(|a, b| a.0.cmp(b.0));
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "dim={dim}")?;
        for (key, &v) in rows {
            let mut line = String::new();
            for &bits in key.iter() {
                line.push_str(&sig17(f64::from_bits(bits)));
                line.push(' ');
            }
            line.push_str(&sig17(v));
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rebuild a cache from a snapshot file, rejecting dimension mismatches
    /// and malformed content with line positions. The restored miss counter
    /// equals the number of stored points.
    pub fn restore(path: &Path, dim: usize) -> Result<EvalCache> {
        let file = std::fs::File::open(path)?;
        let reader = BufReader::new(file);
        let pstr = path.display().to_string();
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| CoreError::CacheFormat {
                path: pstr.clone(),
                line: 1,
                reason: "empty file".into(),
            })?
            .map_err(CoreError::Io)?;
        let file_dim: usize = header
            .strip_prefix("dim=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CoreError::CacheFormat {
                path: pstr.clone(),
                line: 1,
                reason: format!("expected 'dim=<d>' header, found {header:?}"),
            })?;
        if file_dim != dim {
            return Err(CoreError::CacheFormat {
                path: pstr,
                line: 1,
                reason: format!("file dimension {file_dim} does not match requested {dim}"),
            });
        }
        let mut inner = Inner {
            dim: Some(dim),
            ..Default::default()
        };
        for (lineno, line) in lines.enumerate() {
            let lineno = lineno + 2;
            let line = line.map_err(CoreError::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(CoreError::CacheFormat {
                    path: pstr,
                    line: lineno,
                    reason: format!("expected {} fields, found {}", dim + 1, fields.len()),
                });
            }
            let mut nums = Vec::with_capacity(dim + 1);
            for f in &fields {
                let v: f64 = f.parse().map_err(|_| CoreError::CacheFormat {
                    path: pstr.clone(),
                    line: lineno,
                    reason: format!("unparseable number {f:?}"),
                })?;
                nums.push(v);
            }
            let value = nums.pop().expect("dim+1 fields");
            let key = canonical_key(&nums).map_err(|e| CoreError::CacheFormat {
                path: pstr.clone(),
                line: lineno,
                reason: e.to_string(),
            })?;
            if inner.done.insert(key, value).is_none() {
                inner.misses += 1;
            }
        }
        Ok(EvalCache {
            inner: Mutex::new(inner),
            ready: Condvar::new(),
        })
    }
}
