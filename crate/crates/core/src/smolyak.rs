//! Smolyak (sparse) quadrature and pseudospectral approximation over
//! admissible level sets, plus the direct-quadrature baseline.
//!
//! The sparse operator is the combination `sum_k c_k T_k` of full-tensor
//! operators T_k with integer coefficients from
//! [`crate::multiindex::smolyak_coefficients`]. Assembly merges coefficient
//! maps (weighted by c_k, in lexicographic k order) rather than summing
//! evaluated functions, so the sparse structure survives and tests can
//! distinguish an index some constituent touched (present, possibly zero)
//! from one never touched (absent).
//!
//! Direct quadrature estimates every coefficient of an arbitrary degree set
//! with one fixed rule. It is kept as a baseline: with sparse rules it
//! suffers internal aliasing that the Smolyak construction provably avoids,
//! and the [`direct_aliasing_pairs`] / [`smolyak_aliasing_pairs`] reports
//! make the difference inspectable.

use crate::basis::{eval_basis_all, PolynomialFamily};
use crate::error::CoreError;
use crate::evalcache::EvalCache;
use crate::expansion::{axpy, PolynomialExpansion};
use crate::model::ModelFunction;
use crate::multiindex::{require_admissible, smolyak_coefficients, MultiIndex, MultiIndexSet};
use crate::quadrature::{integrate, QuadratureFamily, TensorQuadratureRule};
use crate::tensorop::{tensor_pseudospectral, TensorPseudospectralSpec};
use crate::Result;
use std::collections::BTreeMap;

/// An admissible level set together with per-dimension quadrature families
/// and the combination coefficients derived from the set.
#[derive(Debug, Clone)]
pub struct SmolyakSpec {
    families: Vec<QuadratureFamily>,
    level_set: MultiIndexSet,
    coefficients: BTreeMap<MultiIndex, i64>,
}

impl SmolyakSpec {
    pub fn new(families: Vec<QuadratureFamily>, level_set: MultiIndexSet) -> Result<Self> {
        if families.len() != level_set.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: families.len(),
                got: level_set.dim(),
            });
        }
        require_admissible(&level_set)?;
        if level_set.is_empty() {
            return Err(CoreError::InvalidParameter(
                "Smolyak level set must be nonempty".into(),
            ));
        }
        // reject unsupported levels up front
        for k in level_set.iter() {
            for (fam, &m) in families.iter().zip(k.entries()) {
                fam.exactness(m)?;
            }
        }
        let coefficients = smolyak_coefficients(&level_set)?;
        Ok(SmolyakSpec {
            families,
            level_set,
            coefficients,
        })
    }

    pub fn dim(&self) -> usize {
        self.families.len()
    }

    pub fn families(&self) -> &[QuadratureFamily] {
        &self.families
    }

    pub fn level_set(&self) -> &MultiIndexSet {
        &self.level_set
    }

    /// Nonzero combination coefficients, keyed lexicographically.
    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, i64> {
        &self.coefficients
    }

    pub fn base_families(&self) -> Vec<PolynomialFamily> {
        self.families.iter().map(|f| f.base()).collect()
    }

    fn tensor_spec(&self, k: &MultiIndex) -> Result<TensorPseudospectralSpec> {
        TensorPseudospectralSpec::new(self.families.clone(), k.clone())
    }

    /// Degree indices of the basis terms the sparse pseudospectral operator
    /// includes: the union over the level set of the half-exact boxes.
    pub fn range(&self) -> MultiIndexSet {
        let mut out = MultiIndexSet::new(self.dim());
        for k in self.level_set.sorted() {
            let spec = self
                .tensor_spec(&k)
                .expect("levels validated at construction");
            for j in spec.half_exact_degrees().enumerate() {
                out.insert(j).expect("dimension consistent");
            }
        }
        out
    }

    /// Whether the sparse quadrature integrates the monomial/basis degree
    /// exactly: true iff some constituent tensor rule covers it.
    pub fn exact_on(&self, degree: &MultiIndex) -> bool {
        self.level_set.iter().any(|k| {
            degree
                .entries()
                .iter()
                .zip(self.families.iter().zip(k.entries()))
                .all(|(&dj, (fam, &m))| {
                    dj <= fam.exactness(m).expect("levels validated at construction")
                })
        })
    }

    /// All distinct grid points of the constituent tensor rules with nonzero
    /// coefficient (the points a sparse run pays for).
    pub fn grid_points(&self) -> Result<Vec<Vec<f64>>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for k in self.coefficients.keys() {
            let rule = self.tensor_spec(k)?.quadrature()?;
            for p in rule.points() {
                let key: Vec<u64> = p.iter().map(|x| x.to_bits()).collect();
                if seen.insert(key) {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

/// Sparse pseudospectral approximation: the c_k-weighted merge of the
/// full-tensor expansions, in lexicographic k order, skipping zero
/// coefficients.
pub fn smolyak_pseudospectral(
    model: &dyn ModelFunction,
    spec: &SmolyakSpec,
    cache: &EvalCache,
) -> Result<PolynomialExpansion> {
    let mut out = PolynomialExpansion::new(spec.base_families());
    for (k, &c) in &spec.coefficients {
        let tspec = spec.tensor_spec(k)?;
        let constituent = tensor_pseudospectral(model, &tspec, cache)?;
        out = axpy(c as f64, &constituent, &out)?;
    }
    Ok(out)
}

/// Sparse quadrature: the c_k-weighted sum of tensor quadrature values.
pub fn smolyak_quadrature(
    model: &dyn ModelFunction,
    spec: &SmolyakSpec,
    cache: &EvalCache,
) -> Result<f64> {
    let mut total = 0.0;
    for (k, &c) in &spec.coefficients {
        let rule = spec.tensor_spec(k)?.quadrature()?;
        total += c as f64 * integrate(&rule, model, cache)?;
    }
    Ok(total)
}

/// The fixed rule a direct-quadrature construction projects with.
pub enum DirectRule<'a> {
    Smolyak(&'a SmolyakSpec),
    Tensor(&'a TensorQuadratureRule),
}

impl DirectRule<'_> {
    fn base_families(&self) -> Vec<PolynomialFamily> {
        match self {
            DirectRule::Smolyak(s) => s.base_families(),
            DirectRule::Tensor(t) => t.rules().iter().map(|r| r.family.base()).collect(),
        }
    }

    /// Exactness of the fixed rule on a product degree.
    pub fn exact_on(&self, degree: &MultiIndex) -> bool {
        match self {
            DirectRule::Smolyak(s) => s.exact_on(degree),
            DirectRule::Tensor(t) => degree
                .entries()
                .iter()
                .zip(t.rules())
                .all(|(&dj, r)| dj <= r.family.exactness(r.level).expect("rule was constructed")),
        }
    }

    fn dim(&self) -> usize {
        match self {
            DirectRule::Smolyak(s) => s.dim(),
            DirectRule::Tensor(t) => t.dim(),
        }
    }
}

/// Estimate every coefficient in `basis` with the single fixed `rule`:
/// `f~_j = Q(f Psi_j)`. The basis set need not be admissible. Every
/// requested index ends up present in the output, zero or not.
pub fn direct_quadrature(
    model: &dyn ModelFunction,
    basis: &MultiIndexSet,
    rule: &DirectRule,
    cache: &EvalCache,
) -> Result<PolynomialExpansion> {
    if basis.dim() != rule.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: rule.dim(),
            got: basis.dim(),
        });
    }
    let families = rule.base_families();
    let degrees = basis.sorted();
    let mut maxdeg = vec![0u32; basis.dim()];
    for j in &degrees {
        for (i, &e) in j.entries().iter().enumerate() {
            maxdeg[i] = maxdeg[i].max(e);
        }
    }
    let mut acc = vec![0.0f64; degrees.len()];
    let mut accumulate_rule = |tensor: &TensorQuadratureRule, c: f64| -> Result<()> {
        let points = tensor.points();
        let values = cache.evaluate_batch(model, &points)?;
        for (i, (x, &v)) in points.iter().zip(values.iter()).enumerate() {
            let mut tables = Vec::with_capacity(families.len());
            for (dim, &fam) in families.iter().enumerate() {
                tables.push(eval_basis_all(fam, maxdeg[dim], x[dim])?);
            }
            let wv = c * tensor.weight(i) * v;
            for (t, j) in degrees.iter().enumerate() {
                let mut term = wv;
                for (dim, &deg) in j.entries().iter().enumerate() {
                    term *= tables[dim][deg as usize];
                }
                acc[t] += term;
            }
        }
        Ok(())
    };
    match rule {
        DirectRule::Smolyak(spec) => {
            for (k, &c) in &spec.coefficients {
                let tensor = spec.tensor_spec(k)?.quadrature()?;
                accumulate_rule(&tensor, c as f64)?;
            }
        }
        DirectRule::Tensor(tensor) => accumulate_rule(tensor, 1.0)?,
    }
    PolynomialExpansion::with_terms(families, degrees.into_iter().zip(acc))
}

fn index_sum(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    MultiIndex::new(
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| x + y)
            .collect(),
    )
}

/// Ordered pairs (j, j') from `basis` whose product the fixed rule cannot
/// integrate exactly, i.e. the aliasing risks of a direct-quadrature
/// construction on that basis.
pub fn direct_aliasing_pairs(
    basis: &MultiIndexSet,
    rule: &DirectRule,
) -> Vec<(MultiIndex, MultiIndex)> {
    let degrees = basis.sorted();
    let mut out = Vec::new();
    for j in &degrees {
        for jp in &degrees {
            if j == jp {
                continue;
            }
            if !rule.exact_on(&index_sum(j, jp)) {
                out.push((j.clone(), jp.clone()));
            }
        }
    }
    out
}

/// Aliasing risks of the Smolyak pseudospectral construction on `basis`:
/// pairs are screened out when some dimension has j'_i < j_i (orthogonality
/// is resolved by every rule that touches j), or when a single constituent
/// tensor rule both ranges over j and integrates j + j' exactly.
pub fn smolyak_aliasing_pairs(
    basis: &MultiIndexSet,
    spec: &SmolyakSpec,
) -> Vec<(MultiIndex, MultiIndex)> {
    let degrees = basis.sorted();
    let mut boxes = Vec::new();
    for k in spec.level_set.iter() {
        let tspec = spec
            .tensor_spec(k)
            .expect("levels validated at construction");
        boxes.push((tspec.half_exact_degrees(), tspec.exact_degrees()));
    }
    let mut out = Vec::new();
    for j in &degrees {
        for jp in &degrees {
            if j == jp {
                continue;
            }
            let lower_somewhere = jp
                .entries()
                .iter()
                .zip(j.entries())
                .any(|(&jpi, &ji)| jpi < ji);
            if lower_somewhere {
                continue;
            }
            let sum = index_sum(j, jp);
            let protected = boxes
                .iter()
                .any(|(half, exact)| half.contains(j) && exact.contains(&sum));
            if !protected {
                out.push((j.clone(), jp.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BasisProduct, FnModel};
    use crate::multiindex::{full_tensor_set, total_order_set};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn exp_families(d: usize) -> Vec<QuadratureFamily> {
        vec![QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform); d]
    }

    /// The worked two-dimensional example: exponential-growth Gauss with the
    /// total-order set reaching level 5.
    fn example_spec() -> SmolyakSpec {
        SmolyakSpec::new(exp_families(2), total_order_set(2, 4)).unwrap()
    }

    #[test]
    fn constant_integrates_to_one() {
        let spec = example_spec();
        let cache = EvalCache::new();
        let one = FnModel::new(2, |_: &[f64]| 1.0);
        let q = smolyak_quadrature(&one, &spec, &cache).unwrap();
        assert!((q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn range_of_minimal_set_is_constant_only() {
        let spec = SmolyakSpec::new(
            vec![QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform); 2],
            total_order_set(2, 0),
        )
        .unwrap();
        let r = spec.range();
        assert_eq!(r.len(), 1);
        assert!(r.contains(&mi(&[0, 0])));
    }

    #[test]
    fn range_of_full_tensor_chain_is_a_box() {
        let families = exp_families(2);
        let set = full_tensor_set(&mi(&[3, 2])).unwrap();
        let spec = SmolyakSpec::new(families.clone(), set).unwrap();
        let r = spec.range();
        // corner (3,2): a = (7,3), q = (3,1)
        for j0 in 0..=3 {
            for j1 in 0..=1 {
                assert!(r.contains(&mi(&[j0, j1])));
            }
        }
        assert_eq!(r.len(), 8);
    }

    #[test]
    fn example_range_has_the_staircase_corners() {
        let r = example_spec().range();
        assert!(r.contains(&mi(&[8, 0])));
        assert!(r.contains(&mi(&[0, 8])));
        assert!(r.contains(&mi(&[15, 0])));
        assert!(!r.contains(&mi(&[8, 4])));
    }

    #[test]
    fn full_tensor_chain_collapses_to_tensor_operator() {
        let families = exp_families(2);
        let set = full_tensor_set(&mi(&[2, 3])).unwrap();
        let spec = SmolyakSpec::new(families.clone(), set).unwrap();
        let model = FnModel::new(2, |x: &[f64]| (1.3 * x[0] - 0.4 * x[1] + 0.9).powi(3));

        let sparse_cache = EvalCache::new();
        let sparse = smolyak_pseudospectral(&model, &spec, &sparse_cache).unwrap();

        let tspec = TensorPseudospectralSpec::new(families, mi(&[2, 3])).unwrap();
        let tensor_cache = EvalCache::new();
        let tensor = tensor_pseudospectral(&model, &tspec, &tensor_cache).unwrap();

        for (j, &c) in tensor.terms() {
            assert!((sparse.coeff(j) - c).abs() < 1e-13, "{j}");
        }
    }

    #[test]
    fn no_internal_aliasing_on_the_example() {
        // f = psi_0(x) psi_4(y): the sparse result has the unit coefficient
        // and nothing else
        let spec = example_spec();
        let model = BasisProduct::new(spec.base_families(), mi(&[0, 4])).unwrap();
        let cache = EvalCache::new();
        let e = smolyak_pseudospectral(&model, &spec, &cache).unwrap();
        assert!((e.coeff(&mi(&[0, 4])) - 1.0).abs() < 1e-10);
        for (j, &c) in e.terms() {
            if j != &mi(&[0, 4]) {
                assert!(c.abs() <= 1e-10, "{j} -> {c}");
            }
        }
        for probe in [mi(&[8, 0]), mi(&[10, 0]), mi(&[12, 0]), mi(&[14, 0])] {
            assert!(e.coeff(&probe).abs() <= 1e-10, "{probe}");
        }
    }

    #[test]
    fn direct_quadrature_aliases_on_the_example() {
        let spec = example_spec();
        let model = BasisProduct::new(spec.base_families(), mi(&[0, 4])).unwrap();
        let cache = EvalCache::new();
        let basis = spec.range();
        let e = direct_quadrature(&model, &basis, &DirectRule::Smolyak(&spec), &cache).unwrap();
        assert!((e.coeff(&mi(&[0, 4])) - 1.0).abs() < 1e-10);
        assert!(e.coeff(&mi(&[8, 0])).abs() > 0.1);
        for probe in [mi(&[10, 0]), mi(&[12, 0]), mi(&[14, 0])] {
            assert!(e.coeff(&probe).abs() > 1e-3, "{probe}");
        }
    }

    #[test]
    fn quadrature_exactness_probe_inside_and_outside_union() {
        let spec = example_spec();
        // (8,4) is outside the union of constituent exact sets
        assert!(!spec.exact_on(&mi(&[8, 4])));
        assert!(spec.exact_on(&mi(&[15, 1])));

        let inside = BasisProduct::new(spec.base_families(), mi(&[8, 0])).unwrap();
        let sq = FnModel::new(2, {
            let inside = inside.clone();
            move |x: &[f64]| inside.eval(x).unwrap() * inside.eval(x).unwrap()
        });
        // psi_8(x)^2 has degree (16,0), inside the union (a = (31,1))
        let cache = EvalCache::new();
        let q = smolyak_quadrature(&sq, &spec, &cache).unwrap();
        assert!((q - 1.0).abs() < 1e-11);

        // x^8 y^4 is not integrated exactly: moment 1/(9*5)
        let monomial = FnModel::new(2, |x: &[f64]| x[0].powi(8) * x[1].powi(4));
        let cache2 = EvalCache::new();
        let q2 = smolyak_quadrature(&monomial, &spec, &cache2).unwrap();
        let moment = 1.0 / 45.0;
        assert!(((q2 - moment) / moment).abs() > 1e-3, "got {q2}");
    }

    #[test]
    fn aliasing_report_flags_the_example_pair() {
        let spec = example_spec();
        let basis = spec.range();
        let direct = direct_aliasing_pairs(&basis, &DirectRule::Smolyak(&spec));
        assert!(direct.contains(&(mi(&[8, 0]), mi(&[0, 4]))));

        let sparse = smolyak_aliasing_pairs(&basis, &spec);
        assert!(!sparse.contains(&(mi(&[8, 0]), mi(&[0, 4]))));

        // screening: pairs with j'_i < j_i are never reported on the sparse side
        for (j, jp) in &sparse {
            assert!(
                !jp.entries()
                    .iter()
                    .zip(j.entries())
                    .any(|(&jpi, &ji)| jpi < ji),
                "({j},{jp}) should have been screened"
            );
        }
    }

    #[test]
    fn safe_full_tensor_report_is_empty() {
        let families =
            vec![QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform); 2];
        let tspec = TensorPseudospectralSpec::new(families, mi(&[3, 3])).unwrap();
        let rule = tspec.quadrature().unwrap();
        // basis = the operator's own half-exact box: products stay exact
        let mut basis = MultiIndexSet::new(2);
        for j in tspec.half_exact_degrees().enumerate() {
            basis.insert(j).unwrap();
        }
        let pairs = direct_aliasing_pairs(&basis, &DirectRule::Tensor(&rule));
        assert!(pairs.is_empty());
    }

    #[test]
    fn sparse_aliasing_pairs_subset_of_direct() {
        let spec = example_spec();
        let basis = spec.range();
        let direct = direct_aliasing_pairs(&basis, &DirectRule::Smolyak(&spec));
        let sparse = smolyak_aliasing_pairs(&basis, &spec);
        let direct_set: std::collections::HashSet<_> = direct.into_iter().collect();
        for pair in &sparse {
            assert!(direct_set.contains(pair), "{:?} not in direct", pair);
        }
    }
}
