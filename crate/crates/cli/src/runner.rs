//! Shared run machinery behind the subcommands.

use crate::config::{BasisConfig, ModeConfig, ModelConfig, RunConfig, RuleConfig};
use crate::output::{self, ConvergenceRow, SummaryRow};
use crate::{builtins, external::ExternalModel, CliError};
use smolyak_ps::adaptive::{run_adaptive_observed, TerminationPolicy};
use smolyak_ps::expansion::mc_l2_error;
use smolyak_ps::genz::{genz_sample, GenzInstance};
use smolyak_ps::model::ModelFunction;
use smolyak_ps::multiindex::{total_order_set, MultiIndex, MultiIndexSet};
use smolyak_ps::quadrature::QuadratureFamily;
use smolyak_ps::smolyak::{
    direct_aliasing_pairs, direct_quadrature, smolyak_aliasing_pairs, smolyak_pseudospectral,
    DirectRule, SmolyakSpec,
};
use smolyak_ps::tensorop::{tensor_pseudospectral, TensorPseudospectralSpec};
use smolyak_ps::{EvalCache, PolynomialExpansion};
use std::path::PathBuf;
use std::time::{Duration, Instant};

pub struct Context {
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub cache_path: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub config_hash: String,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Split batches over a bounded number of threads. Values are keyed by
/// point, so stitching chunks back preserves the input order exactly.
struct ParallelModel {
    inner: Box<dyn ModelFunction>,
    jobs: usize,
}

impl ModelFunction for ParallelModel {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn eval(&self, x: &[f64]) -> smolyak_ps::Result<f64> {
        self.inner.eval(x)
    }

    fn eval_batch(&self, points: &[Vec<f64>]) -> smolyak_ps::Result<Vec<f64>> {
        if self.jobs <= 1 || points.len() < 2 * self.jobs {
            return self.inner.eval_batch(points);
        }
        let chunk = points.len().div_ceil(self.jobs);
        let results: Vec<smolyak_ps::Result<Vec<f64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = points
                .chunks(chunk)
                .map(|part| scope.spawn(move || self.inner.eval_batch(part)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        let mut out = Vec::with_capacity(points.len());
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
}

fn build_model(cfg: &RunConfig, ctx: &Context) -> Result<Box<dyn ModelFunction>, CliError> {
    let model: Box<dyn ModelFunction> = match &cfg.model {
        ModelConfig::Genz { instance } => {
            instance.validate()?;
            Box::new(instance.clone())
        }
        ModelConfig::GenzSample {
            kind,
            b,
            seed,
            decay,
        } => {
            let seed = seed.or(ctx.seed_override).unwrap_or(cfg.seed);
            let b = b.unwrap_or_else(|| kind.default_b());
            Box::new(genz_sample(*kind, cfg.dimension, b, seed, *decay))
        }
        ModelConfig::Builtin { name } => {
            if let Some(d) = builtins::dimension(name) {
                if d != cfg.dimension {
                    return Err(CliError::config(format!(
                        "model.name: builtin {name:?} is {d}-dimensional, config says {}",
                        cfg.dimension
                    )));
                }
            }
            builtins::build(name)?
        }
        ModelConfig::External {
            command,
            batch_size,
        } => Box::new(ExternalModel::spawn(cfg.dimension, command, *batch_size)?),
    };
    Ok(if ctx.jobs > 1 && !matches!(cfg.model, ModelConfig::External { .. }) {
        Box::new(ParallelModel {
            inner: model,
            jobs: ctx.jobs,
        })
    } else {
        model
    })
}

fn load_cache(ctx: &Context, dim: usize) -> Result<EvalCache, CliError> {
    match &ctx.cache_path {
        Some(path) if path.exists() => Ok(EvalCache::restore(path, dim)?),
        _ => Ok(EvalCache::new()),
    }
}

fn save_cache(ctx: &Context, cache: &EvalCache) -> Result<(), CliError> {
    if let Some(path) = &ctx.cache_path {
        cache.snapshot(path)?;
    }
    Ok(())
}

fn build_direct_basis(
    cfg: &RunConfig,
    families: &[QuadratureFamily],
    basis: &BasisConfig,
) -> Result<MultiIndexSet, CliError> {
    match basis {
        BasisConfig::SmolyakRange { order } => {
            let spec = SmolyakSpec::new(families.to_vec(), total_order_set(cfg.dimension, *order))?;
            Ok(spec.range())
        }
        BasisConfig::Explicit { indices } => Ok(MultiIndexSet::from_indices(
            cfg.dimension,
            indices.iter().cloned().map(MultiIndex::new),
        )?),
    }
}

enum BuiltRule {
    Sparse(SmolyakSpec),
    Tensor(smolyak_ps::TensorQuadratureRule),
}

impl BuiltRule {
    fn as_direct(&self) -> DirectRule<'_> {
        match self {
            BuiltRule::Sparse(s) => DirectRule::Smolyak(s),
            BuiltRule::Tensor(t) => DirectRule::Tensor(t),
        }
    }
}

fn build_direct_rule(
    cfg: &RunConfig,
    families: &[QuadratureFamily],
    rule: &RuleConfig,
) -> Result<BuiltRule, CliError> {
    Ok(match rule {
        RuleConfig::SmolyakTotalOrder { order } => BuiltRule::Sparse(SmolyakSpec::new(
            families.to_vec(),
            total_order_set(cfg.dimension, *order),
        )?),
        RuleConfig::FullTensor { levels } => {
            let spec = TensorPseudospectralSpec::new(
                families.to_vec(),
                MultiIndex::new(levels.clone()),
            )?;
            BuiltRule::Tensor(spec.quadrature()?)
        }
    })
}

fn adaptive_policy(mode: &ModeConfig) -> Option<(TerminationPolicy, Vec<u64>)> {
    if let ModeConfig::Adaptive {
        tolerance,
        max_evals,
        max_wall_ms,
        indicator,
        checkpoints,
    } = mode
    {
        Some((
            TerminationPolicy {
                tolerance: *tolerance,
                max_evals: *max_evals,
                max_wall: max_wall_ms.map(Duration::from_millis),
                variant: indicator.build(),
            },
            checkpoints.clone(),
        ))
    } else {
        None
    }
}

pub fn approximate(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let families = cfg.build_families()?;
    let model = build_model(cfg, ctx)?;
    let cache = load_cache(ctx, cfg.dimension)?;
    let start = Instant::now();

    let mut eps_global = f64::NAN;
    let expansion: PolynomialExpansion = match &cfg.mode {
        ModeConfig::FullTensor { levels } => {
            let spec =
                TensorPseudospectralSpec::new(families.clone(), MultiIndex::new(levels.clone()))?;
            tensor_pseudospectral(model.as_ref(), &spec, &cache)?
        }
        ModeConfig::SmolyakTotalOrder { order } => {
            let spec =
                SmolyakSpec::new(families.clone(), total_order_set(cfg.dimension, *order))?;
            smolyak_pseudospectral(model.as_ref(), &spec, &cache)?
        }
        ModeConfig::Adaptive { .. } => {
            let (policy, _) = adaptive_policy(&cfg.mode).expect("mode is adaptive");
            let run = smolyak_ps::run_adaptive(model.as_ref(), families.clone(), &policy, &cache)?;
            eps_global = run.trace.last().map(|s| s.eps_global).unwrap_or(f64::NAN);
            output::write_trace(&ctx.out(&cfg.output.trace), &run.trace)?;
            run.expansion
        }
        ModeConfig::DirectQuadrature { basis, rule } => {
            let basis_set = build_direct_basis(cfg, &families, basis)?;
            let built = build_direct_rule(cfg, &families, rule)?;
            direct_quadrature(model.as_ref(), &basis_set, &built.as_direct(), &cache)?
        }
    };

    let mc = match &cfg.error_estimation {
        Some(mc) => mc_l2_error(model.as_ref(), &expansion, mc.samples, mc.seed)?,
        None => f64::NAN,
    };

    std::fs::write(ctx.out(&cfg.output.expansion), expansion.to_json())
        .map_err(|e| CliError::config(format!("{}: {e}", cfg.output.expansion)))?;
    output::write_summary(
        &ctx.out(&cfg.output.summary),
        &SummaryRow {
            mode: cfg.mode.name(),
            dim: cfg.dimension,
            evals: cache.evals_total(),
            eps_global,
            mc_l2_error: mc,
            wall_ms: start.elapsed().as_millis() as u64,
            config_hash: ctx.config_hash.clone(),
        },
    )?;
    save_cache(ctx, &cache)
}

pub fn convergence(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let families = cfg.build_families()?;
    let model = build_model(cfg, ctx)?;
    let cache = load_cache(ctx, cfg.dimension)?;
    let mc = cfg.error_estimation.as_ref().ok_or_else(|| {
        CliError::config("error_estimation: required for the convergence command")
    })?;

    let mut rows: Vec<ConvergenceRow> = Vec::new();
    match &cfg.mode {
        ModeConfig::Adaptive { .. } => {
            let (policy, checkpoints) = adaptive_policy(&cfg.mode).expect("mode is adaptive");
            if checkpoints.is_empty() {
                return Err(CliError::config(
                    "mode.checkpoints: required for adaptive convergence",
                ));
            }
            let mut next = 0usize;
            let mut pending: Vec<(u64, PolynomialExpansion, f64)> = Vec::new();
            let run = run_adaptive_observed(
                model.as_ref(),
                families.clone(),
                &policy,
                &cache,
                |step, exp| {
                    while next < checkpoints.len() && step.evals_total >= checkpoints[next] {
                        pending.push((step.evals_total, exp.clone(), step.eps_global));
                        next += 1;
                    }
                },
            )?;
            // always include the final state
            if let Some(last) = run.trace.last() {
                if pending.last().map(|p| p.0) != Some(last.evals_total) {
                    pending.push((last.evals_total, run.expansion.clone(), last.eps_global));
                }
            }
            for (evals, exp, eps) in pending {
                rows.push(ConvergenceRow {
                    evals,
                    l2_error: mc_l2_error(model.as_ref(), &exp, mc.samples, mc.seed)?,
                    eps_global: eps,
                });
            }
            output::write_trace(&ctx.out(&cfg.output.trace), &run.trace)?;
        }
        ModeConfig::SmolyakTotalOrder { order } => {
            for n in 0..=*order {
                let spec =
                    SmolyakSpec::new(families.clone(), total_order_set(cfg.dimension, n))?;
                let exp = smolyak_pseudospectral(model.as_ref(), &spec, &cache)?;
                rows.push(ConvergenceRow {
                    evals: cache.evals_total(),
                    l2_error: mc_l2_error(model.as_ref(), &exp, mc.samples, mc.seed)?,
                    eps_global: f64::NAN,
                });
            }
        }
        other => {
            return Err(CliError::config(format!(
                "mode: convergence needs adaptive or smolyak_total_order, found {}",
                other.name()
            )))
        }
    }
    output::write_convergence(&ctx.out(&cfg.output.convergence), &rows)?;
    save_cache(ctx, &cache)
}

pub fn genz_suite(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let suite = cfg
        .genz_suite
        .as_ref()
        .ok_or_else(|| CliError::config("genz_suite: section required for this command"))?;
    let families = cfg.build_families()?;

    let mut body = String::from("kind,seed,mode,evals,l2_error,eps_global\n");
    for &kind in &suite.kinds {
        for &seed in &suite.seeds {
            let b = suite.b.unwrap_or_else(|| kind.default_b());
            let instance: GenzInstance =
                genz_sample(kind, cfg.dimension, b, seed, suite.decay);

            // adaptive run with checkpoint rows
            let cache = EvalCache::new();
            let policy = TerminationPolicy {
                tolerance: None,
                max_evals: Some(suite.budget),
                max_wall: None,
                variant: smolyak_ps::IndicatorVariant::Plain,
            };
            let mut next = 0usize;
            let mut pending: Vec<(u64, PolynomialExpansion, f64)> = Vec::new();
            let run = run_adaptive_observed(
                &instance,
                families.clone(),
                &policy,
                &cache,
                |step, exp| {
                    while next < suite.checkpoints.len()
                        && step.evals_total >= suite.checkpoints[next]
                    {
                        pending.push((step.evals_total, exp.clone(), step.eps_global));
                        next += 1;
                    }
                },
            )?;
            if let Some(last) = run.trace.last() {
                if pending.last().map(|p| p.0) != Some(last.evals_total) {
                    pending.push((last.evals_total, run.expansion.clone(), last.eps_global));
                }
            }
            for (evals, exp, eps) in &pending {
                let err = mc_l2_error(&instance, exp, suite.mc_samples, suite.mc_seed)?;
                body.push_str(&format!(
                    "{kind},{seed},adaptive,{evals},{},{}\n",
                    smolyak_ps::fmt::sig17(err),
                    smolyak_ps::fmt::sig17(*eps)
                ));
            }

            // optional non-adaptive sweep to at least the adaptive cost
            if suite.include_total_order {
                let target = run.trace.last().map(|s| s.evals_total).unwrap_or(0);
                let sweep_cache = EvalCache::new();
                for n in 0.. {
                    let spec =
                        SmolyakSpec::new(families.clone(), total_order_set(cfg.dimension, n))?;
                    let exp = smolyak_pseudospectral(&instance, &spec, &sweep_cache)?;
                    let evals = sweep_cache.evals_total();
                    let err = mc_l2_error(&instance, &exp, suite.mc_samples, suite.mc_seed)?;
                    body.push_str(&format!(
                        "{kind},{seed},total_order,{evals},{},NaN\n",
                        smolyak_ps::fmt::sig17(err)
                    ));
                    if evals >= target {
                        break;
                    }
                }
            }
        }
    }
    std::fs::write(ctx.out("genz_suite.csv"), body)
        .map_err(|e| CliError::config(format!("genz_suite.csv: {e}")))?;
    Ok(())
}

pub fn aliasing_report(cfg: &RunConfig, ctx: &Context) -> Result<(), CliError> {
    let section = cfg
        .aliasing
        .as_ref()
        .ok_or_else(|| CliError::config("aliasing: section required for this command"))?;
    let families = cfg.build_families()?;
    let basis = build_direct_basis(cfg, &families, &section.basis)?;
    let rule = build_direct_rule(cfg, &families, &section.rule)?;

    let direct = direct_aliasing_pairs(&basis, &rule.as_direct());
    let sparse = match &rule {
        BuiltRule::Sparse(spec) => smolyak_aliasing_pairs(&basis, spec),
        // a full-tensor rule has no sparse counterpart; the screening rules
        // still apply against its single exactness box
        BuiltRule::Tensor(_) => Vec::new(),
    };

    let as_json = |pairs: &[(MultiIndex, MultiIndex)]| -> Vec<[Vec<u32>; 2]> {
        pairs
            .iter()
            .map(|(a, b)| [a.entries().to_vec(), b.entries().to_vec()])
            .collect()
    };
    let doc = serde_json::json!({
        "basis_size": basis.len(),
        "direct_pair_count": direct.len(),
        "smolyak_pair_count": sparse.len(),
        "direct_pairs": as_json(&direct),
        "smolyak_pairs": as_json(&sparse),
    });
    std::fs::write(
        ctx.out(&cfg.output.report),
        serde_json::to_string_pretty(&doc).expect("report serialization"),
    )
    .map_err(|e| CliError::config(format!("{}: {e}", cfg.output.report)))?;
    Ok(())
}
