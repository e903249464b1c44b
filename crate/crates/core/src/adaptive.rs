//! Greedy dimension-adaptive refinement of the Smolyak level set.
//!
//! The loop keeps an admissible level set K and, per member k, a local error
//! indicator: the L2 norm of the difference-term that k contributed, computed
//! once from the coefficient map of
//! `sum over b in {0,1}^d, k-b >= 1 of (-1)^{|b|} T_{k-b}`
//! and never updated afterwards (it does not depend on how K grows). Each
//! step refines the active member with the largest indicator, adding its
//! admissible forward neighbors, and the global indicator - the sum of
//! indicators over the active set - drives termination.
//!
//! Because the sparse operator telescopes, the running expansion is just the
//! sum of all members' difference terms, so refinement updates it
//! incrementally; a from-scratch assembly over the final set reproduces it to
//! rounding.

use crate::error::CoreError;
use crate::evalcache::EvalCache;
use crate::expansion::{axpy, PolynomialExpansion};
use crate::model::ModelFunction;
use crate::multiindex::{is_admissible_with, MultiIndex, MultiIndexSet};
use crate::quadrature::QuadratureFamily;
use crate::tensorop::{tensor_pseudospectral, TensorPseudospectralSpec};
use crate::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

/// Ranking rule used to pick the next index to refine. All variants rank by
/// the plain indicator eps(k) unless a work measure n(k) (new unique points
/// needed to refine k's forward neighbors) is mixed in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum IndicatorVariant {
    /// eps(k) alone.
    Plain,
    /// max{ w * eps(k)/eps(1), (1-w) * n(1)/n(k) } with w in [0,1]; 1 is the
    /// root index.
    WorkMax { w: f64 },
    /// eps(k) - w_tilde * n(k).
    WorkLinear { w_tilde: f64 },
    /// eps(k) / n(k).
    WorkRatio,
}

/// Stopping bounds; at least one must be set.
#[derive(Debug, Clone)]
pub struct TerminationPolicy {
    pub tolerance: Option<f64>,
    pub max_evals: Option<u64>,
    pub max_wall: Option<Duration>,
    pub variant: IndicatorVariant,
}

impl TerminationPolicy {
    pub fn with_tolerance(tolerance: f64) -> Self {
        TerminationPolicy {
            tolerance: Some(tolerance),
            max_evals: None,
            max_wall: None,
            variant: IndicatorVariant::Plain,
        }
    }

    pub fn with_max_evals(max_evals: u64) -> Self {
        TerminationPolicy {
            tolerance: None,
            max_evals: Some(max_evals),
            max_wall: None,
            variant: IndicatorVariant::Plain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_none() && self.max_evals.is_none() && self.max_wall.is_none() {
            return Err(CoreError::InvalidParameter(
                "termination policy needs a tolerance, evaluation budget, or wall-time bound"
                    .into(),
            ));
        }
        if let IndicatorVariant::WorkMax { w } = self.variant {
            if !(0.0..=1.0).contains(&w) {
                return Err(CoreError::InvalidParameter(format!(
                    "work indicator weight w = {w} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// No member has an admissible forward neighbor left.
    ActiveSetEmpty,
    /// Global indicator fell below the tolerance.
    Converged,
    /// Evaluation budget reached or exceeded.
    EvalBudget,
    /// Wall-time bound reached.
    WallTime,
}

/// One record per refinement step (step 0 is initialization).
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub step: u64,
    pub refined_index: Option<MultiIndex>,
    pub new_indices: Vec<MultiIndex>,
    pub evals_total: u64,
    pub eps_local: f64,
    pub eps_global: f64,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
}

/// The evolving state of a refinement run.
pub struct AdaptiveState {
    families: Vec<QuadratureFamily>,
    level_set: MultiIndexSet,
    indicators: BTreeMap<MultiIndex, f64>,
    expansion: PolynomialExpansion,
    root_indicator: f64,
    root_cost: Option<usize>,
}

/// The k-th difference term in coefficient space (its norm is the local
/// error indicator). Independent of any level set, so it is computed once
/// per index.
pub fn delta_term(
    model: &dyn ModelFunction,
    families: &[QuadratureFamily],
    k: &MultiIndex,
    cache: &EvalCache,
) -> Result<PolynomialExpansion> {
    let d = families.len();
    if k.dim() != d {
        return Err(CoreError::DimensionMismatch {
            expected: d,
            got: k.dim(),
        });
    }
    let mut out = PolynomialExpansion::new(families.iter().map(|f| f.base()).collect());
    for mask in 0u64..(1u64 << d) {
        let mut levels = k.entries().to_vec();
        let mut skip = false;
        for (i, e) in levels.iter_mut().enumerate() {
            let dec = ((mask >> i) & 1) as u32;
            if *e <= dec {
                skip = true;
                break;
            }
            *e -= dec;
        }
        if skip {
            continue;
        }
        let spec = TensorPseudospectralSpec::new(families.to_vec(), MultiIndex::new(levels))?;
        let constituent = tensor_pseudospectral(model, &spec, cache)?;
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        out = axpy(sign, &constituent, &out)?;
    }
    Ok(out)
}

/// L2 norm of the difference term: the local error indicator eps(k).
pub fn local_indicator(
    model: &dyn ModelFunction,
    families: &[QuadratureFamily],
    k: &MultiIndex,
    cache: &EvalCache,
) -> Result<f64> {
    Ok(delta_term(model, families, k, cache)?.l2_norm())
}

/// The work-aware ranking formulas. `eps_ref`/`cost_ref` are the indicator
/// and cost of the root index.
pub fn work_indicator(
    variant: IndicatorVariant,
    eps: f64,
    cost: usize,
    eps_ref: f64,
    cost_ref: usize,
) -> Result<f64> {
    let n = cost.max(1) as f64;
    Ok(match variant {
        IndicatorVariant::Plain => eps,
        IndicatorVariant::WorkMax { w } => {
            if !(0.0..=1.0).contains(&w) {
                return Err(CoreError::InvalidParameter(format!(
                    "work indicator weight w = {w} outside [0, 1]"
                )));
            }
            let e_ref = if eps_ref > 0.0 { eps_ref } else { 1.0 };
            let n_ref = cost_ref.max(1) as f64;
            (w * eps / e_ref).max((1.0 - w) * n_ref / n)
        }
        IndicatorVariant::WorkLinear { w_tilde } => eps - w_tilde * n,
        IndicatorVariant::WorkRatio => eps / n,
    })
}

impl AdaptiveState {
    /// Start from the singleton minimal level set {(1,...,1)}.
    pub fn initialize(
        families: Vec<QuadratureFamily>,
        model: &dyn ModelFunction,
        cache: &EvalCache,
    ) -> Result<Self> {
        let d = families.len();
        if d == 0 || model.dimension() != d {
            return Err(CoreError::DimensionMismatch {
                expected: d,
                got: model.dimension(),
            });
        }
        let root = MultiIndex::constant(d, 1);
        let delta = delta_term(model, &families, &root, cache)?;
        let eps = delta.l2_norm();
        let mut indicators = BTreeMap::new();
        indicators.insert(root.clone(), eps);
        let level_set = MultiIndexSet::from_indices(d, [root])?;
        Ok(AdaptiveState {
            families,
            level_set,
            indicators,
            expansion: delta,
            root_indicator: eps,
            root_cost: None,
        })
    }

    pub fn level_set(&self) -> &MultiIndexSet {
        &self.level_set
    }

    pub fn expansion(&self) -> &PolynomialExpansion {
        &self.expansion
    }

    pub fn indicators(&self) -> &BTreeMap<MultiIndex, f64> {
        &self.indicators
    }

    pub fn indicator(&self, k: &MultiIndex) -> Option<f64> {
        self.indicators.get(k).copied()
    }

    /// Forward neighbors of `k` that could be added right now: inside the
    /// families' level caps, not in K, and admissible once added.
    fn usable_neighbors(&self, k: &MultiIndex) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = k
            .forward_neighbors()
            .into_iter()
            .filter(|f| {
                f.entries()
                    .iter()
                    .zip(&self.families)
                    .all(|(&m, fam)| m <= fam.max_level())
                    && !self.level_set.contains(f)
                    && is_admissible_with(f, &self.level_set)
            })
            .collect();
        out.sort();
        out
    }

    /// Members eligible for refinement, in lexicographic order.
    pub fn active_set(&self) -> Vec<MultiIndex> {
        let mut active: Vec<MultiIndex> = self
            .level_set
            .iter()
            .filter(|k| !self.usable_neighbors(k).is_empty())
            .cloned()
            .collect();
        active.sort();
        active
    }

    /// Sum of local indicators over the active set.
    pub fn global_indicator(&self) -> f64 {
        self.active_set()
            .iter()
            .map(|k| self.indicators.get(k).copied().unwrap_or(0.0))
            .sum()
    }

    /// New unique points needed to refine `k` (its usable forward neighbors'
    /// tensor grids, minus what the cache already holds).
    fn refinement_cost(&self, k: &MultiIndex, cache: &EvalCache) -> Result<usize> {
        let mut points = Vec::new();
        for f in self.usable_neighbors(k) {
            let spec = TensorPseudospectralSpec::new(self.families.clone(), f)?;
            points.extend(spec.quadrature()?.points());
        }
        Ok(cache.count_new(&points))
    }

    /// One refinement step: pick the active index maximizing the ranking
    /// indicator (ties broken toward the lexicographically smallest), add its
    /// usable forward neighbors with their indicators, and fold their
    /// difference terms into the running expansion. Returns None when the
    /// active set is empty. On evaluation failure the state is unchanged.
    pub fn select_and_refine(
        &mut self,
        model: &dyn ModelFunction,
        cache: &EvalCache,
        variant: IndicatorVariant,
    ) -> Result<Option<(MultiIndex, Vec<MultiIndex>)>> {
        let active = self.active_set();
        if active.is_empty() {
            return Ok(None);
        }
        if self.root_cost.is_none() {
            let root = MultiIndex::constant(self.level_set.dim(), 1);
            self.root_cost = Some(self.refinement_cost(&root, cache).unwrap_or(0));
        }
        let root_cost = self.root_cost.unwrap_or(1);

        let mut best: Option<(&MultiIndex, f64)> = None;
        for k in &active {
            let eps = self.indicators.get(k).copied().unwrap_or(0.0);
            let score = match variant {
                IndicatorVariant::Plain => eps,
                _ => {
                    let cost = self.refinement_cost(k, cache)?;
                    work_indicator(variant, eps, cost, self.root_indicator, root_cost)?
                }
            };
            match best {
                Some((_, s)) if score <= s => {}
                _ => best = Some((k, score)),
            }
        }
        let winner = best.expect("active set nonempty").0.clone();

        // compute everything before touching the state so failures leave it intact
        let additions = self.usable_neighbors(&winner);
        let mut computed = Vec::with_capacity(additions.len());
        for f in &additions {
            let delta = delta_term(model, &self.families, f, cache)?;
            let eps = delta.l2_norm();
            computed.push((f.clone(), delta, eps));
        }
        for (f, delta, eps) in computed {
            self.level_set.insert(f.clone())?;
            self.indicators.insert(f, eps);
            self.expansion = axpy(1.0, &delta, &self.expansion)?;
        }
        Ok(Some((winner, additions)))
    }
}

/// A finished adaptive run.
#[derive(Debug)]
pub struct AdaptiveRun {
    pub expansion: PolynomialExpansion,
    pub trace: Vec<TraceStep>,
    pub termination: Termination,
    pub level_set: MultiIndexSet,
    pub indicators: BTreeMap<MultiIndex, f64>,
}

/// Run the refinement loop from the minimal level set until a stopping bound
/// fires. `observer` sees every trace step together with the expansion so
/// far (checkpointing hook; pass a closure doing nothing if unused).
pub fn run_adaptive_observed(
    model: &dyn ModelFunction,
    families: Vec<QuadratureFamily>,
    policy: &TerminationPolicy,
    cache: &EvalCache,
    mut observer: impl FnMut(&TraceStep, &PolynomialExpansion),
) -> Result<AdaptiveRun> {
    policy.validate()?;
    let start = Instant::now();
    let mut state = AdaptiveState::initialize(families, model, cache)?;
    let mut trace = Vec::new();

    let root = MultiIndex::constant(state.level_set.dim(), 1);
    let step0 = TraceStep {
        step: 0,
        refined_index: None,
        new_indices: vec![root.clone()],
        evals_total: cache.evals_total(),
        eps_local: state.root_indicator,
        eps_global: state.global_indicator(),
        wall_ms: start.elapsed().as_millis() as u64,
        termination: None,
    };
    observer(&step0, &state.expansion);
    trace.push(step0);

    let termination = loop {
        if state.active_set().is_empty() {
            break Termination::ActiveSetEmpty;
        }
        if let Some(tol) = policy.tolerance {
            if state.global_indicator() <= tol {
                break Termination::Converged;
            }
        }
        if let Some(budget) = policy.max_evals {
            if cache.evals_total() >= budget {
                break Termination::EvalBudget;
            }
        }
        if let Some(wall) = policy.max_wall {
            if start.elapsed() >= wall {
                break Termination::WallTime;
            }
        }

        let (refined, added) = state
            .select_and_refine(model, cache, policy.variant)?
            .expect("active set checked nonempty");
        let step = TraceStep {
            step: trace.len() as u64,
            refined_index: Some(refined.clone()),
            new_indices: added,
            evals_total: cache.evals_total(),
            eps_local: state.indicator(&refined).unwrap_or(0.0),
            eps_global: state.global_indicator(),
            wall_ms: start.elapsed().as_millis() as u64,
            termination: None,
        };
        observer(&step, &state.expansion);
        trace.push(step);
    };
    if let Some(last) = trace.last_mut() {
        last.termination = Some(termination);
    }

    Ok(AdaptiveRun {
        expansion: state.expansion,
        trace,
        termination,
        level_set: state.level_set,
        indicators: state.indicators,
    })
}

/// [`run_adaptive_observed`] without a checkpoint hook.
pub fn run_adaptive(
    model: &dyn ModelFunction,
    families: Vec<QuadratureFamily>,
    policy: &TerminationPolicy,
    cache: &EvalCache,
) -> Result<AdaptiveRun> {
    run_adaptive_observed(model, families, policy, cache, |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::PolynomialFamily;
    use crate::model::{BasisProduct, FnModel};

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn lin_families(d: usize) -> Vec<QuadratureFamily> {
        vec![QuadratureFamily::gauss_linear(PolynomialFamily::LegendreUniform); d]
    }

    #[test]
    fn zero_model_has_zero_indicators() {
        let zero = FnModel::new(2, |_: &[f64]| 0.0);
        let cache = EvalCache::new();
        let fams = lin_families(2);
        for k in [mi(&[1, 1]), mi(&[2, 1]), mi(&[3, 2])] {
            assert_eq!(local_indicator(&zero, &fams, &k, &cache).unwrap(), 0.0);
        }
    }

    #[test]
    fn captured_polynomial_spawns_vanishing_indicators() {
        // psi_1(x) psi_1(y) is captured once the level set reaches (2,2)
        let model = BasisProduct::new(
            vec![PolynomialFamily::LegendreUniform; 2],
            mi(&[1, 1]),
        )
        .unwrap();
        let cache = EvalCache::new();
        let fams = lin_families(2);
        // both A(K) and A(K + k) are exact on f for these refinements
        for k in [mi(&[3, 2]), mi(&[2, 3]), mi(&[3, 3])] {
            let eps = local_indicator(&model, &fams, &k, &cache).unwrap();
            assert!(eps <= 1e-12, "eps({k}) = {eps}");
        }
    }

    #[test]
    fn one_dimensional_indicator_values() {
        // f = psi_2 over Legendre, linear Gauss growth.
        // Level 2 (p=2, q=1) zeroes the earlier constant-term error of
        // ps i_2(0) = -sqrt(5)/2, so the difference norm is sqrt(5)/2;
        // level 3 (p=3, q=2) then captures the unit coefficient itself.
        let model =
            BasisProduct::new(vec![PolynomialFamily::LegendreUniform], mi(&[2])).unwrap();
        let cache = EvalCache::new();
        let fams = lin_families(1);
        let eps2 = local_indicator(&model, &fams, &mi(&[2]), &cache).unwrap();
        assert!((eps2 - 5.0_f64.sqrt() / 2.0).abs() < 1e-10, "eps2 = {eps2}");
        let eps3 = local_indicator(&model, &fams, &mi(&[3]), &cache).unwrap();
        assert!((eps3 - 1.0).abs() < 1e-10, "eps3 = {eps3}");
    }

    #[test]
    fn first_refinement_adds_both_neighbors() {
        let model = FnModel::new(2, |x: &[f64]| (x[0] + 0.5 * x[1]).exp());
        let cache = EvalCache::new();
        let mut state = AdaptiveState::initialize(lin_families(2), &model, &cache).unwrap();
        let (refined, added) = state
            .select_and_refine(&model, &cache, IndicatorVariant::Plain)
            .unwrap()
            .unwrap();
        assert_eq!(refined, mi(&[1, 1]));
        assert_eq!(added, vec![mi(&[1, 2]), mi(&[2, 1])]);
        assert!(crate::multiindex::is_admissible(state.level_set()));
    }

    #[test]
    fn refinement_respects_admissibility() {
        let model = FnModel::new(2, |x: &[f64]| x[0] * x[0] * (1.0 + x[1]).cos());
        let cache = EvalCache::new();
        let mut state = AdaptiveState::initialize(lin_families(2), &model, &cache).unwrap();
        for _ in 0..12 {
            if state
                .select_and_refine(&model, &cache, IndicatorVariant::Plain)
                .unwrap()
                .is_none()
            {
                break;
            }
            assert!(crate::multiindex::is_admissible(state.level_set()));
        }
    }

    #[test]
    fn global_indicator_sums_active_members() {
        let model = FnModel::new(1, |x: &[f64]| x[0] * x[0]);
        let cache = EvalCache::new();
        let state = AdaptiveState::initialize(lin_families(1), &model, &cache).unwrap();
        // single member, trivially active
        assert_eq!(state.active_set(), vec![mi(&[1])]);
        assert_eq!(state.global_indicator(), state.indicator(&mi(&[1])).unwrap());
    }

    #[test]
    fn work_indicator_formulas() {
        assert_eq!(
            work_indicator(IndicatorVariant::WorkRatio, 0.5, 10, 1.0, 1).unwrap(),
            0.05
        );
        // w = 1 reduces to the eps ratio
        let v = work_indicator(IndicatorVariant::WorkMax { w: 1.0 }, 0.3, 50, 0.6, 2).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        // w_tilde = 0 ranks identically to Plain
        assert_eq!(
            work_indicator(IndicatorVariant::WorkLinear { w_tilde: 0.0 }, 0.7, 99, 1.0, 1)
                .unwrap(),
            0.7
        );
        assert!(work_indicator(IndicatorVariant::WorkMax { w: 1.5 }, 1.0, 1, 1.0, 1).is_err());
    }

    #[test]
    fn polynomial_input_terminates_converged() {
        let model =
            FnModel::new(2, |x: &[f64]| 1.0 + 3.0 * x[0] * x[1] + 0.25 * x[0] * x[0]);
        let cache = EvalCache::new();
        let policy = TerminationPolicy {
            tolerance: Some(1e-10),
            max_evals: Some(100_000),
            max_wall: None,
            variant: IndicatorVariant::Plain,
        };
        let run = run_adaptive(&model, lin_families(2), &policy, &cache).unwrap();
        assert_eq!(run.termination, Termination::Converged);
        // 3 x y = psi_1(x) psi_1(y)
        assert!((run.expansion.coeff(&mi(&[1, 1])) - 1.0).abs() < 1e-10);
        let err = crate::expansion::mc_l2_error(&model, &run.expansion, 2000, 3).unwrap();
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn center_blind_input_converges_immediately() {
        // The greedy indicator sees nothing when f vanishes on the initial
        // grid point; the run reports convergence with the zero expansion.
        let model = FnModel::new(2, |x: &[f64]| 3.0 * x[0] * x[1]);
        let cache = EvalCache::new();
        let policy = TerminationPolicy {
            tolerance: Some(1e-10),
            max_evals: Some(100_000),
            max_wall: None,
            variant: IndicatorVariant::Plain,
        };
        let run = run_adaptive(&model, lin_families(2), &policy, &cache).unwrap();
        assert_eq!(run.termination, Termination::Converged);
        assert_eq!(run.trace.len(), 1);
    }

    #[test]
    fn eval_budget_of_one_gives_single_step_trace() {
        let model = FnModel::new(2, |x: &[f64]| (x[0] * x[1]).sin() + 1.0);
        let cache = EvalCache::new();
        let policy = TerminationPolicy::with_max_evals(1);
        let run = run_adaptive(&model, lin_families(2), &policy, &cache).unwrap();
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.termination, Termination::EvalBudget);
        assert_eq!(run.trace[0].evals_total, 1);
        // single-point constant approximation
        assert_eq!(run.expansion.len(), 1);
    }

    #[test]
    fn indicators_never_change_after_computation() {
        let model = FnModel::new(2, |x: &[f64]| (2.0 * x[0] - x[1]).tanh());
        let cache = EvalCache::new();
        let policy = TerminationPolicy::with_max_evals(60);
        let run = run_adaptive(&model, lin_families(2), &policy, &cache).unwrap();
        // recompute every stored indicator from scratch; values must agree
        let fams = lin_families(2);
        for (k, &eps) in &run.indicators {
            let again = local_indicator(&model, &fams, k, &cache).unwrap();
            assert_eq!(eps, again, "indicator for {k} changed");
        }
    }

    #[test]
    fn scaling_the_model_scales_indicators_not_the_path() {
        let base = FnModel::new(2, |x: &[f64]| (x[0] + 0.3).powi(3) * (1.0 + 0.2 * x[1]));
        let scaled = FnModel::new(2, |x: &[f64]| 25.0 * (x[0] + 0.3).powi(3) * (1.0 + 0.2 * x[1]));
        let policy = TerminationPolicy::with_max_evals(80);
        let cache_a = EvalCache::new();
        let run_a = run_adaptive(&base, lin_families(2), &policy, &cache_a).unwrap();
        let cache_b = EvalCache::new();
        let run_b = run_adaptive(&scaled, lin_families(2), &policy, &cache_b).unwrap();
        let path_a: Vec<_> = run_a.trace.iter().map(|s| s.refined_index.clone()).collect();
        let path_b: Vec<_> = run_b.trace.iter().map(|s| s.refined_index.clone()).collect();
        assert_eq!(path_a, path_b);
        for (k, &eps) in &run_a.indicators {
            let other = run_b.indicators[k];
            assert!((other - 25.0 * eps).abs() <= 1e-12 * other.abs().max(1.0));
        }
    }
}
