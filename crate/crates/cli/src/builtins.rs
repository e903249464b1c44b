//! Named built-in models.

use smolyak_ps::model::{BasisProduct, FnModel, ModelFunction};
use smolyak_ps::multiindex::MultiIndex;
use smolyak_ps::PolynomialFamily;

use crate::CliError;

/// `example_4_2`: the product basis term psi_0(x) psi_4(y) over the uniform
/// weight; `example_4_3`: psi_6(x) psi_6(y). Both are the canonical inputs
/// for demonstrating internal and external aliasing of direct quadrature.
///
/// `aniso14`: a 14-dimensional smooth anisotropic benchmark,
/// `log(1 + sum_i e^{-(i-1)/2} u_i + 0.5 g_1 u_1 u_2 + 0.25 g_2 u_2 u_3)`
/// with u = (x+1)/2, standing in for expensive simulation models whose input
/// couplings are unknown a priori.
pub fn build(name: &str) -> Result<Box<dyn ModelFunction>, CliError> {
    match name {
        "example_4_2" => Ok(Box::new(
            BasisProduct::new(
                vec![PolynomialFamily::LegendreUniform; 2],
                MultiIndex::new(vec![0, 4]),
            )
            .expect("static construction"),
        )),
        "example_4_3" => Ok(Box::new(
            BasisProduct::new(
                vec![PolynomialFamily::LegendreUniform; 2],
                MultiIndex::new(vec![6, 6]),
            )
            .expect("static construction"),
        )),
        "aniso14" => Ok(Box::new(FnModel::new(14, |x: &[f64]| {
            let u: Vec<f64> = x.iter().map(|xi| (xi + 1.0) / 2.0).collect();
            let g = |i: usize| (-(i as f64) / 2.0).exp();
            let mut s = 0.0;
            for (i, ui) in u.iter().enumerate() {
                s += g(i) * ui;
            }
            s += 0.5 * g(0) * u[0] * u[1] + 0.25 * g(1) * u[1] * u[2];
            (1.0 + s).ln()
        }))),
        other => Err(CliError::config(format!(
            "model.name: unknown builtin {other:?} (available: example_4_2, example_4_3, aniso14)"
        ))),
    }
}

/// Dimension a builtin expects, for config validation.
pub fn dimension(name: &str) -> Option<usize> {
    match name {
        "example_4_2" | "example_4_3" => Some(2),
        "aniso14" => Some(14),
        _ => None,
    }
}
