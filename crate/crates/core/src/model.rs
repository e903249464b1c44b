//! The black-box model abstraction consumed by every operator.

use crate::basis::{eval_basis, PolynomialFamily};
use crate::error::{CoreError, PointFailure};
use crate::multiindex::MultiIndex;
use crate::Result;

/// A black-box evaluator from points in the product domain to reals.
///
/// Implementations must be deterministic: the cache assumes a point has one
/// value. Batch evaluation exists so adapters (e.g. an external process) can
/// amortize round trips; the default forwards to `eval` point by point.
pub trait ModelFunction: Sync {
    fn dimension(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<f64>;

    fn eval_batch(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(points.len());
        let mut failures = Vec::new();
        for (i, p) in points.iter().enumerate() {
            match self.eval(p) {
                Ok(v) if v.is_finite() => out.push(v),
                Ok(v) => failures.push(PointFailure {
                    index: i,
                    point: p.clone(),
                    reason: format!("non-finite value {v}"),
                }),
                Err(CoreError::ModelEvaluation { failures: mut f }) => failures.append(&mut f),
                Err(e) => failures.push(PointFailure {
                    index: i,
                    point: p.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        if failures.is_empty() {
            Ok(out)
        } else {
            Err(CoreError::ModelEvaluation { failures })
        }
    }
}

/// Wrap a plain closure as a model.
pub struct FnModel<F> {
    dim: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnModel { dim, f }
    }
}

impl<F> ModelFunction for FnModel<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((self.f)(x))
    }
}

/// The product basis polynomial `Psi_j` as a model; the workhorse of the
/// aliasing tests and the built-in example inputs.
#[derive(Debug, Clone)]
pub struct BasisProduct {
    families: Vec<PolynomialFamily>,
    degrees: MultiIndex,
}

impl BasisProduct {
    pub fn new(families: Vec<PolynomialFamily>, degrees: MultiIndex) -> Result<Self> {
        if families.len() != degrees.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: families.len(),
                got: degrees.dim(),
            });
        }
        Ok(BasisProduct { families, degrees })
    }

    pub fn degrees(&self) -> &MultiIndex {
        &self.degrees
    }
}

impl ModelFunction for BasisProduct {
    fn dimension(&self) -> usize {
        self.families.len()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.families.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.families.len(),
                got: x.len(),
            });
        }
        let mut acc = 1.0;
        for (i, (&fam, &xi)) in self.families.iter().zip(x).enumerate() {
            acc *= eval_basis(fam, self.degrees.get(i), xi)?;
        }
        Ok(acc)
    }
}
