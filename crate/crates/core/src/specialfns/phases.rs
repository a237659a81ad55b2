//! Real-axis phase functions with branches fixed by continuity.
//!
//! Every log-type function used here is a signed sum of `log sin(a·μ + c)`
//! with `a ∈ {±1, ±2}` and `Im c ≠ 0`. For real μ each `sin(aμ + c)` never
//! vanishes, so its argument has a continuous determination which we
//! write in closed form instead of unwrapping numerically.

use super::{SpecialFnError, C64};
use std::f64::consts::{FRAC_PI_2, PI};

/// Continuous argument of `sin(x + i b)` along real `x`, with value
/// `sign(b)·π/2` at `x = 0`. Requires `b ≠ 0`.
pub fn carg_sin(x: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    // arg(t cos x + i sin x) written as x plus a correction whose argument has
    // positive real part, so there is no branch to track
    let t = b.abs().tanh();
    let (s, c) = x.sin_cos();
    let unwound = x + ((1.0 - t) * s * c).atan2(t * c * c + s * s);
    b.signum() * (FRAC_PI_2 - unwound)
}

/// A signed sum `Σ s_f log sin(a_f μ + c_f)` evaluated along the real axis.
#[derive(Debug, Clone, Default)]
pub struct LogSinSum {
    terms: Vec<(f64, f64, C64)>,
}

/// `Im c` below this is treated as a branch point on the real axis.
const BRANCH_GUARD: f64 = 1e-14;

impl LogSinSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add `weight · log sin(a μ + c)`.
    pub fn push(&mut self, weight: f64, a: f64, c: C64) -> &mut Self {
        self.terms.push((weight, a, c));
        self
    }

    pub fn check_branches(&self) -> Result<(), SpecialFnError> {
        if self.terms.iter().any(|&(_, _, c)| c.im.abs() < BRANCH_GUARD) {
            return Err(SpecialFnError::Pole { function: "log-branch", threshold: BRANCH_GUARD });
        }
        Ok(())
    }

    /// Continuous imaginary part of the sum at real μ (an arbitrary but
    /// fixed constant is included).
    pub fn phase(&self, mu: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(w, a, c)| {
                let arg = if a > 0.0 {
                    carg_sin(a * mu + c.re, c.im)
                } else {
                    // sin(aμ + c) = −sin(|a|μ − c)
                    carg_sin(-a * mu - c.re, -c.im) + PI
                };
                w * arg
            })
            .sum()
    }

    /// `phase(μ) − phase(0)`.
    pub fn phase_from_origin(&self, mu: f64) -> f64 {
        self.phase(mu) - self.phase(0.0)
    }

    /// Complex derivative `Σ s_f a_f cot(a_f μ + c_f)` at complex ν.
    pub fn derivative(&self, nu: C64) -> C64 {
        self.terms
            .iter()
            .map(|&(w, a, c)| {
                let z = nu * a + c;
                z.cos() / z.sin() * (w * a)
            })
            .sum()
    }
}

fn i(y: f64) -> C64 {
    C64::new(0.0, y)
}

/// Bare phase p(λ) = i log[sin(iζ/2+λ)/sin(iζ/2−λ)], p(0) = 0.
pub fn fn_p(lambda: f64, zeta: f64) -> f64 {
    let mut s = LogSinSum::new();
    s.push(1.0, 1.0, i(zeta / 2.0)).push(-1.0, -1.0, i(zeta / 2.0));
    -s.phase_from_origin(lambda)
}

/// Scattering phase θ(λ) = i log[sin(iζ−λ)/sin(iζ+λ)], θ(0) = 0.
pub fn fn_theta(lambda: f64, zeta: f64) -> f64 {
    let mut s = LogSinSum::new();
    s.push(1.0, -1.0, i(zeta)).push(-1.0, 1.0, i(zeta));
    -s.phase_from_origin(lambda)
}

/// Boundary phase g(λ) = i log ∏_σ sin(λ − iξ^σ − iζ/2)/sin(λ + iξ^σ + iζ/2),
/// with g(0) = 0. `xis` holds the complex boundary parameters ξ^σ.
pub fn fn_g(lambda: f64, zeta: f64, xis: &[C64]) -> Result<f64, SpecialFnError> {
    let mut s = LogSinSum::new();
    for &xi in xis {
        let shift = C64::i() * xi + i(zeta / 2.0);
        s.push(1.0, 1.0, -shift).push(-1.0, 1.0, shift);
    }
    s.check_branches()?;
    Ok(-s.phase_from_origin(lambda))
}
