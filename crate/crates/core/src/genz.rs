//! The six Genz test functions on [-1, 1]^d with randomized, normalized
//! parameters.
//!
//! Parameters are drawn uniformly from [0, 1] and normalized so that
//! `||w||_1 = 1` and `||c||_1 = b`, where b is a per-kind difficulty
//! constant. The anisotropic variant additionally replaces each c_i with
//! `c_i * exp(i/5)` (1-based i) after normalization.
//!
//! Two conventions to note. The continuous function uses the classical
//! non-differentiable form `exp(-sum c_i^2 |x_i - w_i|)`, which keeps it
//! distinct from the Gaussian kind. The corner-peak default difficulty is
//! chosen small enough that the base `1 + sum c_i x_i` stays positive on the
//! symmetric domain for moderate dimensions; larger b values put the
//! singular surface inside the domain.

use crate::error::CoreError;
use crate::model::ModelFunction;
use crate::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenzKind {
    Oscillatory,
    ProductPeak,
    CornerPeak,
    Gaussian,
    Continuous,
    Discontinuous,
}

impl GenzKind {
    pub const ALL: [GenzKind; 6] = [
        GenzKind::Oscillatory,
        GenzKind::ProductPeak,
        GenzKind::CornerPeak,
        GenzKind::Gaussian,
        GenzKind::Continuous,
        GenzKind::Discontinuous,
    ];

    /// Smooth on the whole domain (suitable for convergence studies).
    pub fn smooth(self) -> bool {
        matches!(
            self,
            GenzKind::Oscillatory
                | GenzKind::ProductPeak
                | GenzKind::CornerPeak
                | GenzKind::Gaussian
        )
    }

    /// Default difficulty constant `b` (the target of `||c||_1`).
    pub fn default_b(self) -> f64 {
        match self {
            GenzKind::Oscillatory => 1.5,
            GenzKind::ProductPeak => 7.25,
            GenzKind::CornerPeak => 0.6,
            GenzKind::Gaussian => 7.03,
            GenzKind::Continuous => 20.4,
            GenzKind::Discontinuous => 4.3,
        }
    }
}

impl std::fmt::Display for GenzKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GenzKind::Oscillatory => "oscillatory",
            GenzKind::ProductPeak => "product_peak",
            GenzKind::CornerPeak => "corner_peak",
            GenzKind::Gaussian => "gaussian",
            GenzKind::Continuous => "continuous",
            GenzKind::Discontinuous => "discontinuous",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenzInstance {
    pub kind: GenzKind,
    pub d: usize,
    /// Shape parameters (post-decay when `decay` is set).
    pub c: Vec<f64>,
    /// Offset parameters, normalized to unit l1 norm.
    pub w: Vec<f64>,
    pub decay: bool,
}

impl GenzInstance {
    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.d || self.w.len() != self.d || self.d == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "Genz instance dimension {} does not match c ({}) / w ({})",
                self.d,
                self.c.len(),
                self.w.len()
            )));
        }
        Ok(())
    }
}

/// Draw a seeded instance: uniform c, w on [0,1], normalized, then optional
/// anisotropic decay on c. Bit-deterministic per seed.
pub fn genz_sample(kind: GenzKind, d: usize, b: f64, seed: u64, decay: bool) -> GenzInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let mut w: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let wsum: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= wsum;
    }
    let csum: f64 = c.iter().sum();
    for ci in &mut c {
        *ci *= b / csum;
    }
    if decay {
        for (i, ci) in c.iter_mut().enumerate() {
            *ci *= ((i as f64 + 1.0) / 5.0).exp();
        }
    }
    GenzInstance {
        kind,
        d,
        c,
        w,
        decay,
    }
}

/// Evaluate an instance at a point of [-1, 1]^d.
pub fn genz_eval(inst: &GenzInstance, x: &[f64]) -> Result<f64> {
    inst.validate()?;
    if x.len() != inst.d {
        return Err(CoreError::DimensionMismatch {
            expected: inst.d,
            got: x.len(),
        });
    }
    for &xi in x {
        if !(-1.0..=1.0).contains(&xi) {
            return Err(CoreError::OutsideDomain { x: xi });
        }
    }
    let c = &inst.c;
    let w = &inst.w;
    Ok(match inst.kind {
        GenzKind::Oscillatory => {
            let s: f64 = c.iter().zip(x).map(|(ci, xi)| ci * xi).sum();
            (2.0 * std::f64::consts::PI * w[0] + s).cos()
        }
        GenzKind::ProductPeak => c
            .iter()
            .zip(w)
            .zip(x)
            .map(|((ci, wi), xi)| 1.0 / (ci.powi(-2) + (xi - wi) * (xi - wi)))
            .product(),
        GenzKind::CornerPeak => {
            let s: f64 = c.iter().zip(x).map(|(ci, xi)| ci * xi).sum();
            (1.0 + s).powi(-(inst.d as i32 + 1))
        }
        GenzKind::Gaussian => {
            let s: f64 = c
                .iter()
                .zip(w)
                .zip(x)
                .map(|((ci, wi), xi)| ci * ci * (xi - wi) * (xi - wi))
                .sum();
            (-s).exp()
        }
        GenzKind::Continuous => {
            let s: f64 = c
                .iter()
                .zip(w)
                .zip(x)
                .map(|((ci, wi), xi)| ci * ci * (xi - wi).abs())
                .sum();
            (-s).exp()
        }
        GenzKind::Discontinuous => {
            if x[0] > w[0] || (inst.d >= 2 && x[1] > w[1]) {
                0.0
            } else {
                let s: f64 = c.iter().zip(x).map(|(ci, xi)| ci * xi).sum();
                s.exp()
            }
        }
    })
}

impl ModelFunction for GenzInstance {
    fn dimension(&self) -> usize {
        self.d
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        genz_eval(self, x)
    }
}
