//! Gauss rules from the symmetric tridiagonal Jacobi matrix.

use crate::basis::{eval_basis_all, PolynomialFamily};
use nalgebra::DMatrix;

/// Nodes and weights of the p-point Gauss rule for the family's probability
/// weight. Nodes are the Jacobi-matrix eigenvalues; weights come from the
/// Christoffel identity w_j = 1 / sum_{n<p} psi_n(x_j)^2, which is better
/// conditioned than the squared eigenvector components (those lose several
/// digits in the tiny tail weights of Hermite rules). Weights are rescaled
/// to sum to one.
pub(super) fn golub_welsch(base: PolynomialFamily, p: usize) -> (Vec<f64>, Vec<f64>) {
    if p == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(p, p);
    for n in 1..p {
        let b = base.recurrence_b(n as u32);
        jacobi[(n - 1, n)] = b;
        jacobi[(n, n - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut points: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));

    let mut weights = Vec::with_capacity(p);
    for &x in &points {
        let values = eval_basis_all(base, p as u32 - 1, x)
            .expect("Gauss nodes lie in the family domain");
        let denom: f64 = values.iter().map(|v| v * v).sum();
        weights.push(1.0 / denom);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (points, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_two_point() {
        let (x, w) = golub_welsch(PolynomialFamily::HermiteGaussian, 2);
        assert!((x[0] + 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
        assert!((w[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn weights_sum_to_one_at_large_p() {
        for p in [64usize, 128, 256] {
            for base in [
                PolynomialFamily::LegendreUniform,
                PolynomialFamily::HermiteGaussian,
            ] {
                let (_, w) = golub_welsch(base, p);
                let s: f64 = w.iter().sum();
                assert!((s - 1.0).abs() < 1e-14, "p={p} sum={s}");
                assert!(w.iter().all(|&wi| wi > 0.0));
            }
        }
    }
}
