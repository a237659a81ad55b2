use super::OverlapError;
use crate::linalg::CMat;
use crate::specialfns::{theta, theta1_prime0, Nome, SpecialFnError, C64};

/// |ϑ₁| below which ρ̄ is treated as sitting on a pole.
const POLE_TOL: f64 = 1e-14;

fn theta1_guarded(z: C64, nome: Nome) -> Result<C64, SpecialFnError> {
    let v = theta(1, z, nome)?;
    if v.norm() < POLE_TOL {
        return Err(SpecialFnError::Pole { function: "ρ̄", threshold: POLE_TOL });
    }
    Ok(v)
}

/// ρ̄(u, w) = ϑ₁′(0)/ϑ₂(0) · [ϑ₂(u−w)/ϑ₁(u−w) + ϑ₂(u+w)/ϑ₁(u+w)].
pub fn cauchy_kernel_rho_bar(u: C64, w: C64, nome: Nome) -> Result<C64, SpecialFnError> {
    let pref = theta1_prime0(nome) / theta(2, C64::new(0.0, 0.0), nome)?.re;
    let d = u - w;
    let s = u + w;
    Ok(pref * (theta(2, d, nome)? / theta1_guarded(d, nome)? + theta(2, s, nome)? / theta1_guarded(s, nome)?))
}

pub fn cauchy_matrix(nu: &[C64], omega: &[C64], nome: Nome) -> Result<CMat, OverlapError> {
    if nu.len() != omega.len() {
        return Err(OverlapError::SizeMismatch(nu.len(), omega.len()));
    }
    let n = nu.len();
    let mut m = CMat::zeros(n);
    for j in 0..n {
        for k in 0..n {
            m.set(j, k, cauchy_kernel_rho_bar(nu[j], omega[k], nome)?);
        }
    }
    Ok(m)
}

/// The elliptic Cauchy determinant det ρ̄(νⱼ, ωₖ), evaluated both directly
/// (LU) and through its closed-form theta-function product.
///
/// The product carries an explicit factor 2^N: with ϑ₁(2ν, q²)ϑ₄(2ω, q²)
/// alone the N = 1 case already misses ϑ₁(ν−ω)ϑ₂(ν+ω) + ϑ₂(ν−ω)ϑ₁(ν+ω)
/// = 2 ϑ₁(2ν, q²)ϑ₄(2ω, q²) by a factor of two.
pub fn cauchy_det_product_identity(nu: &[C64], omega: &[C64], nome: Nome) -> Result<(C64, C64), OverlapError> {
    let direct = cauchy_matrix(nu, omega, nome)?.log_det();
    if direct.is_zero() {
        return Err(OverlapError::SingularMatrix("Cauchy"));
    }
    let n = nu.len();
    let q2 = nome.squared();
    let pref = theta1_prime0(nome) / theta(2, C64::new(0.0, 0.0), nome)?.re;
    let mut log_p = C64::new((2.0 * pref).ln() * n as f64, 0.0);
    for i in 0..n {
        log_p += theta(1, nu[i] * 2.0, q2)?.ln() + theta(4, omega[i] * 2.0, q2)?.ln();
    }
    for j in 0..n {
        for k in 0..j {
            log_p += theta(1, nu[j] + nu[k], nome)?.ln() + theta(1, nu[j] - nu[k], nome)?.ln();
            log_p += theta(1, omega[k] + omega[j], nome)?.ln() + theta(1, omega[k] - omega[j], nome)?.ln();
        }
    }
    for j in 0..n {
        for k in 0..n {
            log_p -= theta1_guarded(nu[j] + omega[k], nome)?.ln() + theta1_guarded(nu[j] - omega[k], nome)?.ln();
        }
    }
    Ok((direct.value(), log_p.exp()))
}
