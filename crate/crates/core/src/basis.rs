//! Orthonormal univariate polynomial families.
//!
//! Both families are normalized against a probability density: Legendre
//! against the uniform density 1/2 on [-1, 1], Hermite (probabilists')
//! against the standard normal density on the real line. With that
//! normalization the degree-0 polynomial is the constant 1 and the numerical
//! inner product of two basis polynomials under a sufficiently exact
//! quadrature rule is the Kronecker delta.
//!
//! Values are produced by the upward three-term recurrence for the
//! *orthonormal* sequence,
//!
//! ```text
//! b(n+1) psi_{n+1}(x) = x psi_n(x) - b(n) psi_{n-1}(x)
//! ```
//!
//! with closed-form recurrence coefficients `b(n)` per family (these are the
//! off-diagonal entries of the Jacobi matrix, which the Gauss rule
//! construction reuses).

use crate::error::CoreError;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Hard cap on polynomial degree per dimension. Beyond this the Hermite
/// recurrence risks overflow at large arguments, so we refuse instead.
pub const MAX_DEGREE: u32 = 256;

/// An orthonormal polynomial family tied to a probability weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolynomialFamily {
    /// Legendre polynomials, orthonormal for the uniform density 1/2 on [-1, 1].
    LegendreUniform,
    /// Probabilists' Hermite polynomials, orthonormal for the standard normal density.
    HermiteGaussian,
}

impl PolynomialFamily {
    /// Jacobi-matrix off-diagonal entry `b(n)` for the orthonormal recurrence.
    pub(crate) fn recurrence_b(self, n: u32) -> f64 {
        let nf = n as f64;
        match self {
            PolynomialFamily::LegendreUniform => nf / (4.0 * nf * nf - 1.0).sqrt(),
            PolynomialFamily::HermiteGaussian => nf.sqrt(),
        }
    }

    /// Whether `x` lies in the family's domain.
    pub fn contains(self, x: f64) -> bool {
        match self {
            PolynomialFamily::LegendreUniform => (-1.0..=1.0).contains(&x),
            PolynomialFamily::HermiteGaussian => x.is_finite(),
        }
    }

    fn check_input(self, degree: u32, x: f64) -> Result<()> {
        if degree > MAX_DEGREE {
            return Err(CoreError::DegreeTooLarge {
                degree,
                max: MAX_DEGREE,
            });
        }
        if !self.contains(x) {
            return Err(CoreError::OutsideDomain { x });
        }
        Ok(())
    }

    /// Analytic moment of `x^k` under the family's probability weight.
    ///
    /// Serves as the reference value for quadrature exactness checks. Returns
    /// `None` when the moment overflows f64 (high even Hermite moments).
    pub fn monomial_moment(self, k: u32) -> Option<f64> {
        if k % 2 == 1 {
            return Some(0.0);
        }
        match self {
            PolynomialFamily::LegendreUniform => Some(1.0 / (k as f64 + 1.0)),
            PolynomialFamily::HermiteGaussian => {
                // (k-1)!! = product of odd numbers below k
                let mut m = 1.0_f64;
                let mut t = 1u64;
                while t < k as u64 {
                    m *= t as f64;
                    if !m.is_finite() {
                        return None;
                    }
                    t += 2;
                }
                Some(m)
            }
        }
    }
}

impl std::fmt::Display for PolynomialFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolynomialFamily::LegendreUniform => write!(f, "legendre_uniform"),
            PolynomialFamily::HermiteGaussian => write!(f, "hermite_gaussian"),
        }
    }
}

/// Evaluate `psi_0 .. psi_max_degree` at `x` in one recurrence pass.
pub fn eval_basis_all(family: PolynomialFamily, max_degree: u32, x: f64) -> Result<Vec<f64>> {
    family.check_input(max_degree, x)?;
    let mut out = Vec::with_capacity(max_degree as usize + 1);
    out.push(1.0);
    if max_degree == 0 {
        return Ok(out);
    }
    out.push(x / family.recurrence_b(1));
    for n in 1..max_degree {
        let prev = out[n as usize];
        let prev2 = out[n as usize - 1];
        let next = (x * prev - family.recurrence_b(n) * prev2) / family.recurrence_b(n + 1);
        out.push(next);
    }
    Ok(out)
}

/// Evaluate the single orthonormal polynomial `psi_degree` at `x`.
///
/// Shares the recurrence path with [`eval_basis_all`], so the two agree
/// bitwise.
pub fn eval_basis(family: PolynomialFamily, degree: u32, x: f64) -> Result<f64> {
    Ok(*eval_basis_all(family, degree, x)?
        .last()
        .expect("recurrence output is nonempty"))
}
