//! Scalar special functions: Jacobi theta functions, q-Pochhammer symbols,
//! the regularised theta function φ, and the scattering kernels of the
//! open XXZ chain.
//!
//! Theta functions follow the Gradshteyn–Ryzhik series normalisation with
//! nome `q`:
//!
//! ```text
//! ϑ₁(z,q) = 2 Σ_{k≥0} (−1)^k q^{(k+½)²} sin((2k+1)z)
//! ϑ₂(z,q) = 2 Σ_{k≥0}        q^{(k+½)²} cos((2k+1)z)
//! ϑ₃(z,q) = 1 + 2 Σ_{k≥1}        q^{k²} cos(2kz)
//! ϑ₄(z,q) = 1 + 2 Σ_{k≥1} (−1)^k q^{k²} cos(2kz)
//! ```
//!
//! so that ϑ₁(z+π) = −ϑ₁(z) and ϑ₁(z)/sin z → ϑ₁′(0) = 2q^{1/4}∏(1−q^{2n})³.

mod kernels;
mod phases;
mod qseries;
mod theta;

pub use kernels::{kernel_k, kernel_t, POLE_GUARD};
pub use phases::{carg_sin, fn_g, fn_p, fn_theta, LogSinSum};
pub use qseries::{qpoch, qpoch2, qpoch2_with, qpoch_with};
pub use theta::{theta, theta1_prime0, theta_with, varphi};

use thiserror::Error;

pub type C64 = num_complex::Complex64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFnError {
    #[error("nome must lie in (0,1), got {0}")]
    NomeOutOfRange(f64),
    #[error("theta index must be 1..=4, got {0}")]
    BadThetaIndex(u8),
    #[error("q-series outside its convergence domain: {0}")]
    Domain(String),
    #[error("argument within {threshold:e} of a pole of {function}")]
    Pole { function: &'static str, threshold: f64 },
}

/// The elliptic nome `q = e^{−ζ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome {
    pub q: f64,
    pub zeta: f64,
}

impl Nome {
    pub fn from_zeta(zeta: f64) -> Result<Self, SpecialFnError> {
        Self::from_q((-zeta).exp())
    }

    pub fn from_q(q: f64) -> Result<Self, SpecialFnError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(SpecialFnError::NomeOutOfRange(q));
        }
        Ok(Nome { q, zeta: -q.ln() })
    }

    /// The nome `q²`, used by the Cauchy-determinant product.
    pub fn squared(&self) -> Nome {
        Nome { q: self.q * self.q, zeta: 2.0 * self.zeta }
    }
}

/// Stopping rule shared by every series and infinite product in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Stop once the next factor differs from 1 (or the next term from 0,
    /// relative to the partial sum) by less than this.
    pub tail_tol: f64,
    pub max_terms: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { tail_tol: 1e-16, max_terms: 400 }
    }
}
