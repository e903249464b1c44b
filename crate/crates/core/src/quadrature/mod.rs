//! One-dimensional quadrature families and tensor-product rules.
//!
//! Each family pairs a growth map `p(m)` (level to point count) with a
//! polynomial exactness map `a(m)` (level to the highest degree integrated
//! exactly against the base weight):
//!
//! | family              | p(m)                  | a(m)                  | nested |
//! |---------------------|-----------------------|-----------------------|--------|
//! | Gauss, linear       | m                     | 2m - 1                | no     |
//! | Gauss, linear (odd) | 2m - 1                | 4m - 3                | no     |
//! | Gauss, exponential  | 2^(m-1)               | 2^m - 1               | no     |
//! | Clenshaw-Curtis     | 1; 2^(m-1)+1 (m >= 2) | p(m)                  | yes    |
//! | Gauss-Patterson     | 2^m - 1               | 1, 5, 10, 22, 46, ... | yes    |
//!
//! The "odd" linear variant steps by two points per level so that each new
//! level adds at least one even and one odd basis function on a symmetric
//! domain. Levels start at 1; there is no level-0 rule. All weights are
//! normalized against the probability weight of the base family, so they sum
//! to one.
//!
//! Gauss rules are built from the Jacobi matrix of the base family's
//! recurrence; Clenshaw-Curtis nodes and weights come from closed forms; the
//! Gauss-Patterson nodes and weights are embedded as a high-precision data
//! table (finite-precision construction limits these rules to 255 points, so
//! runtime generation is avoided). The two nested families generate
//! coarse-level points bitwise-identically at finer levels, which the
//! evaluation cache relies on.

mod clenshaw_curtis;
mod gauss;
mod patterson;

use crate::basis::PolynomialFamily;
use crate::error::CoreError;
use crate::evalcache::EvalCache;
use crate::model::ModelFunction;
use crate::multiindex::MultiIndex;
use crate::Result;
use serde::{Deserialize, Serialize};

pub use patterson::MAX_PATTERSON_LEVEL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureKind {
    GaussLinear,
    GaussExponential,
    ClenshawCurtis,
    GaussPatterson,
}

impl std::fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            QuadratureKind::GaussLinear => "gauss_linear",
            QuadratureKind::GaussExponential => "gauss_exponential",
            QuadratureKind::ClenshawCurtis => "clenshaw_curtis",
            QuadratureKind::GaussPatterson => "gauss_patterson",
        };
        write!(f, "{s}")
    }
}

/// A quadrature family: the rule kind, its base polynomial family, and for
/// the linear-growth Gauss family an optional odd-growth (step-by-two) flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadratureFamily {
    kind: QuadratureKind,
    base: PolynomialFamily,
    #[serde(default)]
    odd_growth: bool,
}

impl QuadratureFamily {
    pub fn gauss_linear(base: PolynomialFamily) -> Self {
        QuadratureFamily {
            kind: QuadratureKind::GaussLinear,
            base,
            odd_growth: false,
        }
    }

    /// Linear Gauss with p(m) = 2m - 1: the parity-safe variant for
    /// symmetric domains.
    pub fn gauss_linear_odd(base: PolynomialFamily) -> Self {
        QuadratureFamily {
            kind: QuadratureKind::GaussLinear,
            base,
            odd_growth: true,
        }
    }

    pub fn gauss_exponential(base: PolynomialFamily) -> Self {
        QuadratureFamily {
            kind: QuadratureKind::GaussExponential,
            base,
            odd_growth: false,
        }
    }

    pub fn clenshaw_curtis() -> Self {
        QuadratureFamily {
            kind: QuadratureKind::ClenshawCurtis,
            base: PolynomialFamily::LegendreUniform,
            odd_growth: false,
        }
    }

    pub fn gauss_patterson() -> Self {
        QuadratureFamily {
            kind: QuadratureKind::GaussPatterson,
            base: PolynomialFamily::LegendreUniform,
            odd_growth: false,
        }
    }

    /// Validate the kind/base combination (the uniform-weight rules only
    /// exist over the Legendre family).
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            QuadratureKind::ClenshawCurtis | QuadratureKind::GaussPatterson => {
                if self.base != PolynomialFamily::LegendreUniform {
                    return Err(CoreError::IncompatibleBase {
                        quadrature: self.kind.to_string(),
                        required: "legendre_uniform".into(),
                    });
                }
                if self.odd_growth {
                    return Err(CoreError::InvalidParameter(format!(
                        "odd_growth applies only to gauss_linear, not {}",
                        self.kind
                    )));
                }
            }
            QuadratureKind::GaussExponential if self.odd_growth => {
                return Err(CoreError::InvalidParameter(
                    "odd_growth applies only to gauss_linear".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn base(&self) -> PolynomialFamily {
        self.base
    }

    pub fn odd_growth(&self) -> bool {
        self.odd_growth
    }

    /// Whether coarser point sets are subsets of finer ones.
    pub fn nested(&self) -> bool {
        matches!(
            self.kind,
            QuadratureKind::ClenshawCurtis | QuadratureKind::GaussPatterson
        )
    }

    /// Highest supported level. Gauss-Patterson is limited by its table; the
    /// linear-Gauss caps keep the nodes' eigensolver rounding (about 2e-15)
    /// from dragging monomial exactness past 1e-12 at the top degree a(m);
    /// the exponential caps additionally keep induced basis degrees within
    /// [`crate::basis::MAX_DEGREE`] and Hermite verification moments
    /// representable in f64.
    pub fn max_level(&self) -> u32 {
        match (self.kind, self.base) {
            (QuadratureKind::GaussPatterson, _) => MAX_PATTERSON_LEVEL,
            (QuadratureKind::ClenshawCurtis, _) => 9,
            (QuadratureKind::GaussExponential, PolynomialFamily::LegendreUniform) => 9,
            (QuadratureKind::GaussExponential, PolynomialFamily::HermiteGaussian) => 7,
            (QuadratureKind::GaussLinear, _) => {
                if self.odd_growth {
                    32
                } else {
                    64
                }
            }
        }
    }

    fn check_level(&self, m: u32) -> Result<()> {
        self.validate()?;
        if m < 1 || m > self.max_level() {
            return Err(CoreError::UnsupportedLevel {
                family: self.kind.to_string(),
                level: m,
                max: self.max_level(),
            });
        }
        Ok(())
    }

    /// Point count p(m).
    pub fn growth(&self, m: u32) -> Result<usize> {
        self.check_level(m)?;
        Ok(match self.kind {
            QuadratureKind::GaussLinear => {
                if self.odd_growth {
                    2 * m as usize - 1
                } else {
                    m as usize
                }
            }
            QuadratureKind::GaussExponential => 1usize << (m - 1),
            QuadratureKind::ClenshawCurtis => {
                if m == 1 {
                    1
                } else {
                    (1usize << (m - 1)) + 1
                }
            }
            QuadratureKind::GaussPatterson => (1usize << m) - 1,
        })
    }

    /// Polynomial exactness a(m): the highest degree integrated exactly.
    pub fn exactness(&self, m: u32) -> Result<u32> {
        self.check_level(m)?;
        Ok(match self.kind {
            QuadratureKind::GaussLinear => {
                if self.odd_growth {
                    4 * m - 3
                } else {
                    2 * m - 1
                }
            }
            QuadratureKind::GaussExponential => (1u32 << m) - 1,
            QuadratureKind::ClenshawCurtis => self.growth(m)? as u32,
            // Recorded values; see the table in the module docs.
            QuadratureKind::GaussPatterson => match m {
                1 => 1,
                2 => 5,
                _ => 3 * (1u32 << (m - 1)) - 2,
            },
        })
    }
}

impl std::fmt::Display for QuadratureFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.odd_growth {
            write!(f, "{}(odd)/{}", self.kind, self.base)
        } else {
            write!(f, "{}/{}", self.kind, self.base)
        }
    }
}

/// A concrete level-m rule: p(m) ascending points with positive weights
/// summing to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule1D {
    pub family: QuadratureFamily,
    pub level: u32,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Apply the rule to a plain function (no caching).
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Construct the level-m rule of a family.
pub fn make_rule(family: &QuadratureFamily, m: u32) -> Result<QuadratureRule1D> {
    family.check_level(m)?;
    let p = family.growth(m)?;
    let (points, weights) = match family.kind {
        QuadratureKind::GaussLinear | QuadratureKind::GaussExponential => {
            gauss::golub_welsch(family.base, p)
        }
        QuadratureKind::ClenshawCurtis => clenshaw_curtis::rule(m),
        QuadratureKind::GaussPatterson => patterson::rule(m)?,
    };
    debug_assert_eq!(points.len(), p);
    Ok(QuadratureRule1D {
        family: *family,
        level: m,
        points,
        weights,
    })
}

/// A full tensor-product rule over per-dimension 1D rules. Points are
/// enumerated lexicographically by per-dimension index (first dimension
/// slowest), which fixes the assembly order everywhere downstream.
#[derive(Debug, Clone)]
pub struct TensorQuadratureRule {
    rules: Vec<QuadratureRule1D>,
}

/// Combine per-dimension rules into a product rule.
pub fn tensor_rule(rules: Vec<QuadratureRule1D>) -> Result<TensorQuadratureRule> {
    if rules.is_empty() {
        return Err(CoreError::InvalidParameter(
            "tensor rule needs at least one dimension".into(),
        ));
    }
    Ok(TensorQuadratureRule { rules })
}

impl TensorQuadratureRule {
    pub fn dim(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[QuadratureRule1D] {
        &self.rules
    }

    pub fn levels(&self) -> MultiIndex {
        MultiIndex::new(self.rules.iter().map(|r| r.level).collect())
    }

    pub fn point_count(&self) -> usize {
        self.rules.iter().map(|r| r.len()).product()
    }

    /// Per-dimension point indices of the flat position `i`.
    fn unflatten(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim()];
        for d in (0..self.dim()).rev() {
            let p = self.rules[d].len();
            idx[d] = i % p;
            i /= p;
        }
        idx
    }

    /// Materialize the full grid in enumeration order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.point_count();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let idx = self.unflatten(i);
            out.push(
                idx.iter()
                    .enumerate()
                    .map(|(d, &j)| self.rules[d].points[j])
                    .collect(),
            );
        }
        out
    }

    /// Product weight of the flat position `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.unflatten(i)
            .iter()
            .enumerate()
            .map(|(d, &j)| self.rules[d].weights[j])
            .product()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.point_count()).map(|i| self.weight(i)).collect()
    }
}

/// Apply a tensor rule to a model through the cache, reducing in enumeration
/// order.
pub fn integrate(
    rule: &TensorQuadratureRule,
    model: &dyn ModelFunction,
    cache: &EvalCache,
) -> Result<f64> {
    let points = rule.points();
    let values = cache.evaluate_batch(model, &points)?;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| rule.weight(i) * v)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FnModel;

    #[test]
    fn table_growth_and_exactness() {
        let lin = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let exp = QuadratureFamily::gauss_exponential(PolynomialFamily::LegendreUniform);
        let cc = QuadratureFamily::clenshaw_curtis();
        let gp = QuadratureFamily::gauss_patterson();

        assert_eq!(lin.growth(6).unwrap(), 6);
        assert_eq!(lin.exactness(1).unwrap(), 1);
        assert_eq!(lin.exactness(6).unwrap(), 11);

        assert_eq!(exp.growth(4).unwrap(), 8);
        assert_eq!(exp.exactness(4).unwrap(), 15);

        assert_eq!(
            (1..=6)
                .map(|m| cc.growth(m).unwrap())
                .collect::<Vec<_>>(),
            vec![1, 3, 5, 9, 17, 33]
        );
        assert_eq!(cc.exactness(5).unwrap(), 17);

        assert_eq!(
            (1..=8)
                .map(|m| gp.growth(m).unwrap())
                .collect::<Vec<_>>(),
            vec![1, 3, 7, 15, 31, 63, 127, 255]
        );
        assert_eq!(
            (1..=8)
                .map(|m| gp.exactness(m).unwrap())
                .collect::<Vec<_>>(),
            vec![1, 5, 10, 22, 46, 94, 190, 382]
        );
    }

    #[test]
    fn growth_strictly_increasing() {
        for family in [
            QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform),
            QuadratureFamily::gauss_linear_odd(PolynomialFamily::LegendreUniform),
            QuadratureFamily::gauss_exponential(PolynomialFamily::HermiteGaussian),
            QuadratureFamily::clenshaw_curtis(),
            QuadratureFamily::gauss_patterson(),
        ] {
            let top = family.max_level().min(9);
            for m in 1..top {
                assert!(family.growth(m + 1).unwrap() > family.growth(m).unwrap());
                assert!(family.exactness(m + 1).unwrap() > family.exactness(m).unwrap());
            }
        }
    }

    #[test]
    fn two_point_gauss_legendre() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let rule = make_rule(&family, 2).unwrap();
        let s3 = 1.0 / 3.0_f64.sqrt();
        assert!((rule.points[0] + s3).abs() < 1e-15);
        assert!((rule.points[1] - s3).abs() < 1e-15);
        assert!((rule.weights[0] - 0.5).abs() < 1e-15);
        assert!((rule.weights[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn clenshaw_curtis_level_one_is_midpoint() {
        let rule = make_rule(&QuadratureFamily::clenshaw_curtis(), 1).unwrap();
        assert_eq!(rule.points, vec![0.0]);
        assert_eq!(rule.weights, vec![1.0]);
    }

    #[test]
    fn patterson_level_cap() {
        let family = QuadratureFamily::gauss_patterson();
        assert!(matches!(
            make_rule(&family, 9),
            Err(CoreError::UnsupportedLevel { level: 9, max: 8, .. })
        ));
    }

    #[test]
    fn incompatible_base_rejected() {
        let bad = QuadratureFamily {
            kind: QuadratureKind::ClenshawCurtis,
            base: PolynomialFamily::HermiteGaussian,
            odd_growth: false,
        };
        assert!(matches!(
            make_rule(&bad, 2),
            Err(CoreError::IncompatibleBase { .. })
        ));
    }

    #[test]
    fn tensor_of_two_point_rules() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let r = make_rule(&family, 2).unwrap();
        let t = tensor_rule(vec![r.clone(), r]).unwrap();
        assert_eq!(t.point_count(), 4);
        for i in 0..4 {
            assert!((t.weight(i) - 0.25).abs() < 1e-15);
        }
        // lexicographic order: first dimension slowest
        let pts = t.points();
        assert!(pts[0][0] < 0.0 && pts[0][1] < 0.0);
        assert!(pts[1][0] < 0.0 && pts[1][1] > 0.0);
        assert!(pts[2][0] > 0.0 && pts[2][1] < 0.0);
    }

    #[test]
    fn tensor_with_singleton_dimension() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let r2 = make_rule(&family, 2).unwrap();
        let r1 = make_rule(&family, 1).unwrap();
        let t = tensor_rule(vec![r2.clone(), r1]).unwrap();
        assert_eq!(t.point_count(), 2);
        let pts = t.points();
        assert_eq!(pts[0][1], 0.0);
        assert_eq!(pts[1][1], 0.0);
        assert_eq!(pts[0][0], r2.points[0]);
        assert!((t.weight(0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tensor_point_count_3d() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let t = tensor_rule(vec![
            make_rule(&family, 2).unwrap(),
            make_rule(&family, 1).unwrap(),
            make_rule(&family, 2).unwrap(),
        ])
        .unwrap();
        assert_eq!(t.point_count(), 4);
    }

    #[test]
    fn integrate_examples() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let cache = EvalCache::new();

        let t = tensor_rule(vec![make_rule(&family, 2).unwrap()]).unwrap();
        let one = FnModel::new(1, |_: &[f64]| 1.0);
        assert!((integrate(&t, &one, &cache).unwrap() - 1.0).abs() < 1e-15);

        let sq = FnModel::new(1, |x: &[f64]| x[0] * x[0]);
        let cache2 = EvalCache::new();
        assert!((integrate(&t, &sq, &cache2).unwrap() - 1.0 / 3.0).abs() < 1e-14);

        // psi_1(x) psi_1(y) integrates to zero under a rule exact to (3,3)
        let t2 = tensor_rule(vec![
            make_rule(&family, 2).unwrap(),
            make_rule(&family, 2).unwrap(),
        ])
        .unwrap();
        let psi11 = FnModel::new(2, |x: &[f64]| 3.0 * x[0] * x[1]);
        let cache3 = EvalCache::new();
        assert!(integrate(&t2, &psi11, &cache3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn integrate_propagates_failure_with_point() {
        let family = QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform);
        let t = tensor_rule(vec![make_rule(&family, 2).unwrap()]).unwrap();
        let bad = FnModel::new(1, |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 1.0 });
        let cache = EvalCache::new();
        match integrate(&t, &bad, &cache) {
            Err(CoreError::ModelEvaluation { failures }) => {
                assert!(failures[0].point[0] > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
