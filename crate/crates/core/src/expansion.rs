//! Sparse orthonormal polynomial expansions.
//!
//! An expansion maps degree multi-indices to coefficients in the orthonormal
//! product basis of its per-dimension families. Coefficients are stored in a
//! degree-lexicographic map so every accumulation and serialization order is
//! deterministic. Exactly-cancelled coefficients are kept as explicit zeros:
//! an index that some constituent operator touched is distinct from one never
//! touched, and the Smolyak assembly tests rely on that distinction. Pruning
//! exists only as the explicit [`PolynomialExpansion::prune`] step.

use crate::basis::{eval_basis_all, PolynomialFamily};
use crate::error::CoreError;
use crate::fmt::sig17;
use crate::model::ModelFunction;
use crate::multiindex::MultiIndex;
use crate::Result;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialExpansion {
    families: Vec<PolynomialFamily>,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl PolynomialExpansion {
    pub fn new(families: Vec<PolynomialFamily>) -> Self {
        PolynomialExpansion {
            families,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn with_terms(
        families: Vec<PolynomialFamily>,
        terms: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut e = PolynomialExpansion::new(families);
        for (j, c) in terms {
            e.accumulate(j, c)?;
        }
        Ok(e)
    }

    pub fn dimension(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[PolynomialFamily] {
        &self.families
    }

    /// Stored coefficient, or None if the index was never touched.
    pub fn get(&self, j: &MultiIndex) -> Option<f64> {
        self.coeffs.get(j).copied()
    }

    /// Coefficient value treating untouched indices as zero.
    pub fn coeff(&self, j: &MultiIndex) -> f64 {
        self.get(j).unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Terms in degree-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.coeffs.iter()
    }

    /// Add `value` onto the coefficient at `j` (creating it if untouched).
    pub fn accumulate(&mut self, j: MultiIndex, value: f64) -> Result<()> {
        if j.dim() != self.dimension() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dimension(),
                got: j.dim(),
            });
        }
        *self.coeffs.entry(j).or_insert(0.0) += value;
        Ok(())
    }

    /// Drop coefficients with magnitude at or below `threshold`.
    /// Post-processing only; nothing in the pipeline prunes implicitly.
    pub fn prune(&mut self, threshold: f64) {
        self.coeffs.retain(|_, c| c.abs() > threshold);
    }

    /// Largest degree per dimension over stored terms (zeros if empty).
    pub fn max_degrees(&self) -> MultiIndex {
        let mut m = vec![0u32; self.dimension()];
        for j in self.coeffs.keys() {
            for (i, &e) in j.entries().iter().enumerate() {
                m[i] = m[i].max(e);
            }
        }
        MultiIndex::new(m)
    }

    /// Evaluate the expansion at a point. Per-dimension basis values are
    /// computed once up to the maximum stored degree and reused.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(CoreError::DimensionMismatch {
                expected: self.dimension(),
                got: x.len(),
            });
        }
        if self.coeffs.is_empty() {
            return Ok(0.0);
        }
        let maxdeg = self.max_degrees();
        let mut tables = Vec::with_capacity(self.dimension());
        for (i, &fam) in self.families.iter().enumerate() {
            tables.push(eval_basis_all(fam, maxdeg.get(i), x[i])?);
        }
        let mut acc = 0.0;
        for (j, &c) in &self.coeffs {
            let mut term = c;
            for (i, &deg) in j.entries().iter().enumerate() {
                term *= tables[i][deg as usize];
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Parseval norm: sqrt of the sum of squared coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Serialize as a JSON object with coefficients at 17 significant digits,
    /// terms in degree-lexicographic order. Byte-deterministic.
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"dimension\":");
        s.push_str(&self.dimension().to_string());
        s.push_str(",\"families\":[");
        for (i, fam) in self.families.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push('"');
            s.push_str(&fam.to_string());
            s.push('"');
        }
        s.push_str("],\"terms\":[");
        for (i, (j, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str("{\"index\":[");
            for (t, e) in j.entries().iter().enumerate() {
                if t > 0 {
                    s.push(',');
                }
                s.push_str(&e.to_string());
            }
            s.push_str("],\"coeff\":");
            s.push_str(&sig17(*c));
            s.push('}');
        }
        s.push_str("]}");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Term {
            index: Vec<u32>,
            coeff: f64,
        }
        #[derive(serde::Deserialize)]
        struct Doc {
            dimension: usize,
            families: Vec<PolynomialFamily>,
            terms: Vec<Term>,
        }
        let doc: Doc =
            serde_json::from_str(text).map_err(|e| CoreError::ExpansionFormat(e.to_string()))?;
        if doc.families.len() != doc.dimension {
            return Err(CoreError::ExpansionFormat(format!(
                "dimension {} does not match {} families",
                doc.dimension,
                doc.families.len()
            )));
        }
        let mut e = PolynomialExpansion::new(doc.families);
        for t in doc.terms {
            e.accumulate(MultiIndex::new(t.index), t.coeff)?;
        }
        Ok(e)
    }
}

/// Coefficient-wise `alpha * a + b`. Indices touched by either operand stay
/// present even when the sum cancels to zero exactly.
pub fn axpy(
    alpha: f64,
    a: &PolynomialExpansion,
    b: &PolynomialExpansion,
) -> Result<PolynomialExpansion> {
    if a.families != b.families {
        let dim = a
            .families
            .iter()
            .zip(&b.families)
            .position(|(x, y)| x != y)
            .unwrap_or(0);
        return Err(CoreError::FamilyMismatch { dim });
    }
    let mut out = b.clone();
    for (j, &c) in a.terms() {
        out.accumulate(j.clone(), alpha * c)?;
    }
    Ok(out)
}

/// Monte Carlo estimate of the weighted L2 distance between a model and an
/// expansion: points drawn i.i.d. from the product weight with a seeded
/// generator, reduced in sample order. Bitwise deterministic per seed.
pub fn mc_l2_error(
    model: &dyn ModelFunction,
    exp: &PolynomialExpansion,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(CoreError::InvalidParameter(
            "mc_l2_error requires at least one sample".into(),
        ));
    }
    if model.dimension() != exp.dimension() {
        return Err(CoreError::DimensionMismatch {
            expected: exp.dimension(),
            got: model.dimension(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = Uniform::new_inclusive(-1.0f64, 1.0f64);
    let mut x = vec![0.0f64; exp.dimension()];
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        for (i, &fam) in exp.families.iter().enumerate() {
            x[i] = match fam {
                PolynomialFamily::LegendreUniform => uniform.sample(&mut rng),
                PolynomialFamily::HermiteGaussian => StandardNormal.sample(&mut rng),
            };
        }
        let fv = model.eval(&x)?;
        let ev = exp.evaluate(&x)?;
        let d = fv - ev;
        sum_sq += d * d;
    }
    Ok((sum_sq / samples as f64).sqrt())
}
