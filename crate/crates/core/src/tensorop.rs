//! Full-tensor pseudospectral approximation.
//!
//! A spec pairs per-dimension quadrature levels with the *derived* truncation
//! q_i = floor(a_i(m_i)/2). The truncation is never user-set: taking half the
//! quadrature exactness is what makes the discrete inner products of any two
//! retained basis terms exact, so the operator has zero internal aliasing and
//! reproduces its whole range. Coefficients are accumulated in one pass over
//! the grid, with the basis values at each point batched per dimension.

use crate::basis::eval_basis_all;
use crate::error::CoreError;
use crate::evalcache::EvalCache;
use crate::expansion::PolynomialExpansion;
use crate::model::ModelFunction;
use crate::multiindex::MultiIndex;
use crate::quadrature::{make_rule, tensor_rule, QuadratureFamily, TensorQuadratureRule};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorPseudospectralSpec {
    families: Vec<QuadratureFamily>,
    levels: MultiIndex,
    truncation: MultiIndex,
}

impl TensorPseudospectralSpec {
    /// Build a spec; the truncation is computed from the quadrature
    /// exactness and levels are validated against each family.
    pub fn new(families: Vec<QuadratureFamily>, levels: MultiIndex) -> Result<Self> {
        if families.is_empty() || families.len() != levels.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: families.len(),
                got: levels.dim(),
            });
        }
        let mut trunc = Vec::with_capacity(families.len());
        for (fam, &m) in families.iter().zip(levels.entries()) {
            trunc.push(fam.exactness(m)? / 2);
        }
        Ok(TensorPseudospectralSpec {
            families,
            levels,
            truncation: MultiIndex::new(trunc),
        })
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[QuadratureFamily] {
        &self.families
    }

    pub fn levels(&self) -> &MultiIndex {
        &self.levels
    }

    /// The derived truncation degrees q.
    pub fn truncation(&self) -> &MultiIndex {
        &self.truncation
    }

    pub fn quadrature(&self) -> Result<TensorQuadratureRule> {
        let rules = self
            .families
            .iter()
            .zip(self.levels.entries())
            .map(|(fam, &m)| make_rule(fam, m))
            .collect::<Result<Vec<_>>>()?;
        tensor_rule(rules)
    }

    /// Degrees the underlying quadrature integrates exactly:
    /// `{j : j_i <= a_i(m_i)}`.
    pub fn exact_degrees(&self) -> DegreeBox {
        DegreeBox {
            bounds: self
                .families
                .iter()
                .zip(self.levels.entries())
                .map(|(fam, &m)| fam.exactness(m).expect("levels validated at construction"))
                .collect(),
        }
    }

    /// Degrees retained by the pseudospectral operator:
    /// `{j : j_i <= floor(a_i(m_i)/2)}`.
    pub fn half_exact_degrees(&self) -> DegreeBox {
        DegreeBox {
            bounds: self.truncation.entries().to_vec(),
        }
    }
}

/// A rectangular set of degree multi-indices `{j : j_i <= bounds_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeBox {
    bounds: Vec<u32>,
}

impl DegreeBox {
    pub fn new(bounds: Vec<u32>) -> Self {
        DegreeBox { bounds }
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn contains(&self, j: &MultiIndex) -> bool {
        j.dim() == self.bounds.len()
            && j.entries().iter().zip(&self.bounds).all(|(a, b)| a <= b)
    }

    /// All members in lexicographic order.
    pub fn enumerate(&self) -> Vec<MultiIndex> {
        let d = self.bounds.len();
        let count: usize = self.bounds.iter().map(|&b| b as usize + 1).product();
        let mut out = Vec::with_capacity(count);
        let mut cur = vec![0u32; d];
        loop {
            out.push(MultiIndex::new(cur.clone()));
            let mut i = d;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                cur[i] += 1;
                if cur[i] <= self.bounds[i] {
                    break;
                }
                cur[i] = 0;
            }
        }
    }
}

/// Project a model onto the spec's full-tensor degree box, estimating each
/// coefficient with the spec's quadrature. All model evaluations go through
/// the cache; accumulation runs in grid enumeration order after every value
/// is available.
pub fn tensor_pseudospectral(
    model: &dyn ModelFunction,
    spec: &TensorPseudospectralSpec,
    cache: &EvalCache,
) -> Result<PolynomialExpansion> {
    let rule = spec.quadrature()?;
    let points = rule.points();
    let values = cache.evaluate_batch(model, &points)?;

    let degrees = spec.half_exact_degrees().enumerate();
    let mut acc = vec![0.0f64; degrees.len()];

    // per-dimension basis tables for the current point, reused across terms
    let d = spec.dim();
    let mut tables: Vec<Vec<f64>> = Vec::with_capacity(d);
    for (i, (x, &v)) in points.iter().zip(values.iter()).enumerate() {
        tables.clear();
        for (dim, fam) in spec.families.iter().enumerate() {
            tables.push(eval_basis_all(
                fam.base(),
                spec.truncation.get(dim),
                x[dim],
            )?);
        }
        let wv = rule.weight(i) * v;
        for (t, j) in degrees.iter().enumerate() {
            let mut term = wv;
            for (dim, &deg) in j.entries().iter().enumerate() {
                term *= tables[dim][deg as usize];
            }
            acc[t] += term;
        }
    }

    let families = spec.families.iter().map(|f| f.base()).collect();
    PolynomialExpansion::with_terms(families, degrees.into_iter().zip(acc))
}
