//! Finite-size overlaps from Bethe roots.
//!
//! Every determinant goes through [`crate::linalg::log_det`] and every
//! prefactor is summed as a logarithm, so nothing overflows before the final
//! exponentiation. Differences between rapidities are always formed with
//! [`Rapidity::minus`] so that two boundary roots sharing an anchor keep their
//! exponentially small separation.

mod cauchy;
mod product;
mod scalar;

pub use cauchy::{cauchy_det_product_identity, cauchy_kernel_rho_bar, cauchy_matrix};
pub use product::{chi_at_root, chi_general, overlap_product_form, pole_identity_sides, varphi_products};
pub use scalar::{norm_determinant, slavnov_scalar_product};

use crate::bethe::{BetheError, BetheRoots};
use crate::linalg::{CMat, LogDet};
use crate::model::{ln_sin, ChainParams, CountingFunction, ModelError, Rapidity, Side};
use crate::specialfns::{SpecialFnError, C64};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OverlapError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bethe(#[from] BetheError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("vanishing prefactor: {0}")]
    SingularPrefactor(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(&'static str),
    #[error("norm is not positive: {0}")]
    NegativeNorm(f64),
    #[error("overlap is not real: {0}")]
    NonReal(C64),
    #[error("root sets differ in size: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("boundary root was clamped onto its anchor; the Gaudin determinant is not representable")]
    ClampedBoundaryRoot,
    #[error("root sets describe chains with different length, anisotropy or h⁺")]
    IncompatibleChains,
}

/// Relative size of Im S tolerated before the overlap is declared non-real.
pub const REALITY_TOL: f64 = 1e-9;

/// Overlap estimators for one pair of chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    pub l: usize,
    pub s_finite: f64,
    pub s_product: f64,
    pub s_thermo: f64,
    pub s_ed: Option<f64>,
}

impl OverlapReport {
    pub fn finite_vs_ed(&self) -> Option<f64> {
        self.s_ed.map(|e| (self.s_finite - e).abs())
    }

    pub fn product_vs_finite(&self) -> f64 {
        (self.s_product - self.s_finite).abs()
    }

    pub fn finite_vs_thermo(&self) -> f64 {
        (self.s_finite - self.s_thermo).abs()
    }
}

/// t(ν) = sinh ζ / (sin ν sin(ν − iζ)), without a pole guard: boundary roots
/// on a shared anchor legitimately produce very large entries.
pub(crate) fn t_raw(nu: C64, zeta: f64) -> C64 {
    zeta.sinh() / (nu.sin() * (nu - C64::new(0.0, zeta)).sin())
}

pub(crate) fn k_raw(lambda: C64, zeta: f64) -> C64 {
    let iz = C64::new(0.0, zeta);
    (2.0 * zeta).sinh() / (2.0 * PI * (lambda + iz).sin() * (lambda - iz).sin())
}

/// log 𝔰(a + b, a − b) style factor: log[sin(x) sin(y)] for the two
/// combinations of rapidities `u ± v` shifted by `shift`.
pub(crate) fn ln_frak_s(u: &Rapidity, v: &Rapidity, shift: C64) -> C64 {
    ln_sin(u.plus(v) + shift) + ln_sin(u.minus(v) + shift)
}

pub(crate) fn real_part_checked(z: C64) -> Result<f64, OverlapError> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(OverlapError::NonReal(z));
    }
    if z.im.abs() > REALITY_TOL * z.re.abs().max(1.0) {
        return Err(OverlapError::NonReal(z));
    }
    Ok(z.re)
}

/// Check that two root sets live on chains differing only in h⁻.
fn check_pair(lambda: &BetheRoots, mu: &BetheRoots, p1: &ChainParams, p2: &ChainParams) -> Result<(), OverlapError> {
    if p1.l != p2.l || p1.zeta != p2.zeta || p1.h_plus != p2.h_plus {
        return Err(OverlapError::IncompatibleChains);
    }
    for r in [lambda, mu] {
        if r.boundary_root.is_some_and(|b| b.clamped) {
            return Err(OverlapError::ClampedBoundaryRoot);
        }
    }
    Ok(())
}

/// Root sets in different magnetisation sectors are orthogonal.
pub fn same_sector(lambda: &BetheRoots, mu: &BetheRoots) -> bool {
    lambda.count() == mu.count() && lambda.spin_reversed == mu.spin_reversed
}

/// Modified Slavnov matrix Ĥ(ν, ω) built from the counting function of the
/// on-shell set ν. Columns whose 𝔞(ω_k) is large are rescaled and the scale
/// is returned as a log factor.
pub fn modified_slavnov(nu: &[Rapidity], omega: &[Rapidity], frame: &ChainParams) -> Result<(CMat, C64), OverlapError> {
    let n = nu.len();
    if omega.len() != n {
        return Err(OverlapError::SizeMismatch(n, omega.len()));
    }
    let cf = CountingFunction::new(frame, nu.to_vec())?;
    let z = frame.zeta;
    let mut m = CMat::zeros(n);
    let mut log_scale = C64::new(0.0, 0.0);
    for (k, w) in omega.iter().enumerate() {
        let la = cf.log_a(w);
        // Large 𝔞: divide the column by it; small 𝔞: keep it inside.
        let (coef, rest) = if la.re > 0.0 { (C64::new(1.0, 0.0), (-la).exp()) } else { (la.exp(), C64::new(1.0, 0.0)) };
        if la.re > 0.0 {
            log_scale += la;
        }
        for (j, v) in nu.iter().enumerate() {
            let direct = t_raw(v.minus(w), z) - t_raw(-v.plus(w), z);
            let crossed = t_raw(w.minus(v), z) - t_raw(w.plus(v), z);
            m.set(j, k, coef * direct + rest * crossed);
        }
    }
    Ok((m, log_scale))
}

/// Gaudin matrix 𝓜(ν, ν): i 𝔞′(ν_j) on the diagonal minus the kernel part.
pub fn gaudin_matrix(nu: &[Rapidity], frame: &ChainParams) -> Result<CMat, OverlapError> {
    let cf = CountingFunction::new(frame, nu.to_vec())?;
    let z = frame.zeta;
    let n = nu.len();
    let mut m = CMat::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let mut v = -2.0 * PI * (k_raw(nu[j].minus(&nu[k]), z) - k_raw(nu[j].plus(&nu[k]), z));
            if j == k {
                v += C64::i() * cf.a_prime(&nu[j]);
            }
            m.set(j, k, v);
        }
    }
    Ok(m)
}

fn checked_log_det(m: &CMat, what: &'static str) -> Result<LogDet, OverlapError> {
    let d = m.log_det();
    if d.is_zero() || !d.log_abs.is_finite() {
        return Err(OverlapError::SingularMatrix(what));
    }
    Ok(d)
}

/// log of the scalar prefactor of the determinant-ratio form of S.
fn log_prefactor(lam: &[Rapidity], mu: &[Rapidity], f1: &CountingFunction, f2: &CountingFunction, zeta: f64) -> C64 {
    let a1 = f1.anchor(Side::Minus);
    let a2 = f2.anchor(Side::Minus);
    let miz = C64::new(0.0, -zeta);
    let mut acc = C64::new(0.0, 0.0);
    // 𝐚₁(−μ)/𝐚₂(−μ) · 𝐚₂(−λ)/𝐚₁(−λ): only the h⁻ factors survive.
    for m in mu {
        acc += ln_sin(m.neg().minus(&a1)) - ln_sin(m.neg().minus(&a2));
    }
    for l in lam {
        acc += ln_sin(l.neg().minus(&a2)) - ln_sin(l.neg().minus(&a1));
    }
    for k in 0..lam.len() {
        for l in 0..lam.len() {
            acc += ln_frak_s(&mu[k], &lam[l], miz) + ln_frak_s(&lam[k], &mu[l], miz);
            acc -= ln_frak_s(&lam[k], &lam[l], miz) + ln_frak_s(&mu[k], &mu[l], miz);
        }
    }
    acc
}

/// S as a complex number, from the ratio of modified Slavnov and Gaudin
/// determinants. Both root sets must be expressed in the same frame.
pub fn overlap_ratio_complex(lam: &[Rapidity], mu: &[Rapidity], f1: &ChainParams, f2: &ChainParams) -> Result<C64, OverlapError> {
    if lam.len() != mu.len() {
        return Err(OverlapError::SizeMismatch(lam.len(), mu.len()));
    }
    if lam.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    let cf1 = CountingFunction::new(f1, lam.to_vec())?;
    let cf2 = CountingFunction::new(f2, mu.to_vec())?;
    let (h1, s1) = modified_slavnov(lam, mu, f1)?;
    let (h2, s2) = modified_slavnov(mu, lam, f2)?;
    let dh1 = checked_log_det(&h1, "modified Slavnov (λ, μ)")?;
    let dh2 = checked_log_det(&h2, "modified Slavnov (μ, λ)")?;
    let dm1 = checked_log_det(&gaudin_matrix(lam, f1)?, "Gaudin (λ)")?;
    let dm2 = checked_log_det(&gaudin_matrix(mu, f2)?, "Gaudin (μ)")?;
    let ratio = dh1.div(dm1).mul(dh2.div(dm2));
    let log_s = log_prefactor(lam, mu, &cf1, &cf2, f1.zeta) + s1 + s2 + ratio.ln();
    Ok(log_s.exp())
}

/// Normalised overlap S between the ground states described by `lambda`
/// (chain `p1`) and `mu` (chain `p2`). Different sectors give exactly 0.
pub fn overlap_normalized(lambda: &BetheRoots, mu: &BetheRoots, p1: &ChainParams, p2: &ChainParams) -> Result<f64, OverlapError> {
    check_pair(lambda, mu, p1, p2)?;
    if !same_sector(lambda, mu) {
        return Ok(0.0);
    }
    if p1 == p2 && lambda.rapidities() == mu.rapidities() {
        return Ok(1.0);
    }
    let z = overlap_ratio_complex(&lambda.rapidities(), &mu.rapidities(), &lambda.frame(p1), &mu.frame(p2))?;
    real_part_checked(z)
}
