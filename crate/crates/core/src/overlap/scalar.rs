//! Scalar products ⟨{λ}|{μ}⟩ and norms ⟨{λ}|{λ}⟩ of Bethe states.

use super::{checked_log_det, gaudin_matrix, ln_frak_s, OverlapError};
use crate::linalg::CMat;
use crate::model::{ln_sin, ChainParams, CountingFunction, Rapidity};
use crate::specialfns::C64;

fn iz(y: f64) -> C64 {
    C64::new(0.0, y)
}

/// log 𝐚(ν) = 2L log sin(ν − iζ/2) + Σ_σ log sin(ν − A_σ).
fn ln_bold_a(nu: &Rapidity, cf: &CountingFunction) -> C64 {
    let mut v = ln_sin(nu.value() - iz(cf.zeta / 2.0)) * (2.0 * cf.l as f64);
    for a in &cf.anchors {
        v += ln_sin(nu.minus(a));
    }
    v
}

/// Diagonal factors shared by the scalar product and the norm:
/// Σⱼ [2L log sin(λⱼ − iζ/2) + log sin(2λⱼ − iζ) + log sin(λⱼ − A₊) − log sin(λⱼ + A₋)]
/// + Σ_{j<k} log[sin(λⱼ+λₖ−iζ)/sin(λⱼ+λₖ+iζ)].
fn ln_common(lam: &[Rapidity], cf: &CountingFunction) -> C64 {
    let z = cf.zeta;
    let [ap, am] = cf.anchors;
    let mut v = C64::new(0.0, 0.0);
    for (j, l) in lam.iter().enumerate() {
        v += ln_sin(l.value() - iz(z / 2.0)) * (2.0 * cf.l as f64);
        v += ln_sin(l.plus(l) - iz(z)) + ln_sin(l.minus(&ap)) - ln_sin(l.plus(&am));
        for k in &lam[j + 1..] {
            v += ln_sin(l.plus(k) - iz(z)) - ln_sin(l.plus(k) + iz(z));
        }
    }
    v
}

/// ⟨{λ}|{μ}⟩ for on-shell λ (chain `params`) and an arbitrary set μ of the
/// same size, from the Slavnov-type determinant.
pub fn slavnov_scalar_product(lam: &[Rapidity], mu: &[Rapidity], params: &ChainParams) -> Result<C64, OverlapError> {
    let n = lam.len();
    if mu.len() != n {
        return Err(OverlapError::SizeMismatch(n, mu.len()));
    }
    let cf = CountingFunction::new(params, lam.to_vec())?;
    let z = params.zeta;
    let mut log_v = ln_common(lam, &cf);
    for j in 0..n {
        log_v += ln_sin(mu[j].plus(&mu[j]) - iz(z)) - ln_sin(mu[j].plus(&mu[j]));
        for k in j + 1..n {
            log_v -= ln_frak_s(&lam[j], &lam[k], C64::new(0.0, 0.0)) + ln_frak_s(&mu[k], &mu[j], C64::new(0.0, 0.0));
        }
    }
    let sin_miz = iz(-z).sin();
    let mut h = CMat::zeros(n);
    for (k, m) in mu.iter().enumerate() {
        let frak_up: Vec<C64> = lam.iter().map(|l| ln_frak_s(m, l, iz(z))).collect();
        let frak_dn: Vec<C64> = lam.iter().map(|l| ln_frak_s(m, l, iz(-z))).collect();
        let ln_c = ln_bold_a(&m.neg(), &cf) + frak_dn.iter().sum::<C64>();
        let ln_r = ln_bold_a(m, &cf) - ln_bold_a(&m.neg(), &cf) + frak_up.iter().sum::<C64>() - frak_dn.iter().sum::<C64>();
        let (ln_scale, up, dn) = if ln_r.re > 0.0 {
            (ln_c + ln_r, C64::new(1.0, 0.0), (-ln_r).exp())
        } else {
            (ln_c, ln_r.exp(), C64::new(1.0, 0.0))
        };
        log_v += ln_scale;
        for (j, l) in lam.iter().enumerate() {
            let s_ml = ln_frak_s(m, l, C64::new(0.0, 0.0)).exp();
            if s_ml.norm() == 0.0 {
                return Err(OverlapError::SingularPrefactor(format!("𝔰(μ_{k}, λ_{j}) = 0")));
            }
            let entry = sin_miz / s_ml * (up / frak_up[j].exp() - dn / frak_dn[j].exp());
            h.set(j, k, entry);
        }
    }
    let d = h.log_det();
    if d.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok((log_v + d.ln()).exp())
}

/// ⟨{λ}|{λ}⟩ for an on-shell set, via the Gaudin determinant.
pub fn norm_determinant(lam: &[Rapidity], params: &ChainParams) -> Result<C64, OverlapError> {
    let cf = CountingFunction::new(params, lam.to_vec())?;
    let z = params.zeta;
    let mut log_v = ln_common(lam, &cf);
    for (k, l) in lam.iter().enumerate() {
        log_v += ln_bold_a(&l.neg(), &cf) - C64::i().ln() - ln_sin(l.plus(l)) * 2.0;
        for (m, other) in lam.iter().enumerate() {
            log_v += ln_frak_s(l, other, iz(-z));
            if m != k {
                log_v -= ln_frak_s(l, other, C64::new(0.0, 0.0));
            }
        }
    }
    let d = checked_log_det(&gaudin_matrix(lam, params)?, "Gaudin")?;
    Ok((log_v + d.ln()).exp())
}
