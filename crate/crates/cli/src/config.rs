//! Run configuration: a single JSON document. Validation errors carry the
//! offending field path.

use serde::Deserialize;
use smolyak_ps::genz::{GenzInstance, GenzKind};
use smolyak_ps::{PolynomialFamily, QuadratureFamily, QuadratureKind};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    /// One entry (broadcast to every dimension) or exactly `dimension`.
    pub families: Vec<FamilyConfig>,
    pub mode: ModeConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub error_estimation: Option<McConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    /// Default seed for seeded model sampling (overridable with --seed).
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub genz_suite: Option<GenzSuiteConfig>,
    #[serde(default)]
    pub aliasing: Option<AliasingConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub polynomial: PolynomialFamily,
    pub quadrature: QuadratureKind,
    #[serde(default)]
    pub odd_growth: bool,
}

impl FamilyConfig {
    pub fn build(&self, path: &str) -> Result<QuadratureFamily, CliError> {
        let fam = match (self.quadrature, self.odd_growth) {
            (QuadratureKind::GaussLinear, false) => QuadratureFamily::gauss_linear(self.polynomial),
            (QuadratureKind::GaussLinear, true) => {
                QuadratureFamily::gauss_linear_odd(self.polynomial)
            }
            (QuadratureKind::GaussExponential, false) => {
                QuadratureFamily::gauss_exponential(self.polynomial)
            }
            (QuadratureKind::ClenshawCurtis, false) => QuadratureFamily::clenshaw_curtis(),
            (QuadratureKind::GaussPatterson, false) => QuadratureFamily::gauss_patterson(),
            (kind, true) => {
                return Err(CliError::config(format!(
                    "{path}.odd_growth: not supported for {kind}"
                )))
            }
        };
        if fam.base() != self.polynomial {
            return Err(CliError::config(format!(
                "{path}: {} requires the {} polynomial family",
                self.quadrature,
                fam.base()
            )));
        }
        fam.validate()
            .map_err(|e| CliError::config(format!("{path}: {e}")))?;
        Ok(fam)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModeConfig {
    FullTensor {
        levels: Vec<u32>,
    },
    SmolyakTotalOrder {
        order: u32,
    },
    Adaptive {
        #[serde(default)]
        tolerance: Option<f64>,
        #[serde(default)]
        max_evals: Option<u64>,
        #[serde(default)]
        max_wall_ms: Option<u64>,
        #[serde(default)]
        indicator: IndicatorConfig,
        #[serde(default)]
        checkpoints: Vec<u64>,
    },
    DirectQuadrature {
        basis: BasisConfig,
        rule: RuleConfig,
    },
}

impl ModeConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModeConfig::FullTensor { .. } => "full_tensor",
            ModeConfig::SmolyakTotalOrder { .. } => "smolyak_total_order",
            ModeConfig::Adaptive { .. } => "adaptive",
            ModeConfig::DirectQuadrature { .. } => "direct_quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndicatorConfig {
    #[default]
    Plain,
    WorkMax {
        w: f64,
    },
    WorkLinear {
        w_tilde: f64,
    },
    WorkRatio,
}

impl IndicatorConfig {
    pub fn build(self) -> smolyak_ps::IndicatorVariant {
        match self {
            IndicatorConfig::Plain => smolyak_ps::IndicatorVariant::Plain,
            IndicatorConfig::WorkMax { w } => smolyak_ps::IndicatorVariant::WorkMax { w },
            IndicatorConfig::WorkLinear { w_tilde } => {
                smolyak_ps::IndicatorVariant::WorkLinear { w_tilde }
            }
            IndicatorConfig::WorkRatio => smolyak_ps::IndicatorVariant::WorkRatio,
        }
    }
}

/// Degree set for direct quadrature.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisConfig {
    /// The range of the total-order sparse operator of this order.
    SmolyakRange { order: u32 },
    Explicit { indices: Vec<Vec<u32>> },
}

/// Fixed quadrature rule for direct quadrature.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleConfig {
    SmolyakTotalOrder { order: u32 },
    FullTensor { levels: Vec<u32> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// A fully specified Genz instance.
    Genz { instance: GenzInstance },
    /// A seeded Genz instance drawn at run time; `b` defaults per kind and
    /// `seed` defaults to the top-level seed.
    GenzSample {
        kind: GenzKind,
        #[serde(default)]
        b: Option<f64>,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        decay: bool,
    },
    Builtin { name: String },
    External {
        command: Vec<String>,
        #[serde(default = "default_batch_size")]
        batch_size: usize,
    },
}

fn default_batch_size() -> usize {
    1024
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub expansion: String,
    pub trace: String,
    pub summary: String,
    pub convergence: String,
    pub report: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            expansion: "expansion.json".into(),
            trace: "trace.jsonl".into(),
            summary: "summary.csv".into(),
            convergence: "convergence.csv".into(),
            report: "aliasing.json".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenzSuiteConfig {
    pub kinds: Vec<GenzKind>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default = "default_true")]
    pub decay: bool,
    pub budget: u64,
    pub checkpoints: Vec<u64>,
    pub mc_samples: u64,
    pub mc_seed: u64,
    #[serde(default)]
    pub include_total_order: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasingConfig {
    pub basis: BasisConfig,
    pub rule: RuleConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.dimension == 0 {
            return Err(CliError::config("dimension: must be at least 1"));
        }
        if self.families.is_empty() {
            return Err(CliError::config("families: must not be empty"));
        }
        if self.families.len() != 1 && self.families.len() != self.dimension {
            return Err(CliError::config(format!(
                "families: expected 1 or {} entries, found {}",
                self.dimension,
                self.families.len()
            )));
        }
        match &self.mode {
            ModeConfig::FullTensor { levels } => {
                if levels.len() != self.dimension {
                    return Err(CliError::config(format!(
                        "mode.levels: expected {} entries, found {}",
                        self.dimension,
                        levels.len()
                    )));
                }
            }
            ModeConfig::Adaptive {
                tolerance,
                max_evals,
                max_wall_ms,
                ..
            } => {
                if tolerance.is_none() && max_evals.is_none() && max_wall_ms.is_none() {
                    return Err(CliError::config(
                        "mode: adaptive needs tolerance, max_evals, or max_wall_ms",
                    ));
                }
            }
            ModeConfig::DirectQuadrature { basis, rule } => {
                if let BasisConfig::Explicit { indices } = basis {
                    for (i, idx) in indices.iter().enumerate() {
                        if idx.len() != self.dimension {
                            return Err(CliError::config(format!(
                                "mode.basis.indices[{i}]: expected {} entries",
                                self.dimension
                            )));
                        }
                    }
                }
                if let RuleConfig::FullTensor { levels } = rule {
                    if levels.len() != self.dimension {
                        return Err(CliError::config(format!(
                            "mode.rule.levels: expected {} entries",
                            self.dimension
                        )));
                    }
                }
            }
            ModeConfig::SmolyakTotalOrder { .. } => {}
        }
        if let ModelConfig::Genz { instance } = &self.model {
            if instance.d != self.dimension {
                return Err(CliError::config(format!(
                    "model.instance.d: {} does not match dimension {}",
                    instance.d, self.dimension
                )));
            }
        }
        if let ModelConfig::External { command, .. } = &self.model {
            if command.is_empty() {
                return Err(CliError::config("model.command: must not be empty"));
            }
        }
        if let Some(mc) = &self.error_estimation {
            if mc.samples == 0 {
                return Err(CliError::config("error_estimation.samples: must be >= 1"));
            }
        }
        Ok(())
    }

    /// Per-dimension quadrature families (broadcasting a single entry).
    pub fn build_families(&self) -> Result<Vec<QuadratureFamily>, CliError> {
        if self.families.len() == 1 {
            let fam = self.families[0].build("families[0]")?;
            Ok(vec![fam; self.dimension])
        } else {
            self.families
                .iter()
                .enumerate()
                .map(|(i, f)| f.build(&format!("families[{i}]")))
                .collect()
        }
    }
}
