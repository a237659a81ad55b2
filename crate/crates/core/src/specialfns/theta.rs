use super::{Nome, SpecialFnError, TruncationPolicy, C64};

/// ϑᵢ(z, q) with the default truncation policy.
pub fn theta(i: u8, z: C64, nome: Nome) -> Result<C64, SpecialFnError> {
    theta_with(i, z, nome, TruncationPolicy::default())
}

pub fn theta_with(
    i: u8,
    z: C64,
    nome: Nome,
    policy: TruncationPolicy,
) -> Result<C64, SpecialFnError> {
    if !(nome.q > 0.0 && nome.q < 1.0) {
        return Err(SpecialFnError::NomeOutOfRange(nome.q));
    }
    let y = z.im.abs();
    let zeta = nome.zeta;
    let (mut sum, odd_harmonics) = match i {
        1 | 2 => (C64::new(0.0, 0.0), true),
        3 | 4 => (C64::new(1.0, 0.0), false),
        _ => return Err(SpecialFnError::BadThetaIndex(i)),
    };
    let start = if odd_harmonics { 0 } else { 1 };
    for k in start..start + policy.max_terms {
        let kf = k as f64;
        let (expo, freq) = if odd_harmonics {
            ((kf + 0.5) * (kf + 0.5), 2.0 * kf + 1.0)
        } else {
            (kf * kf, 2.0 * kf)
        };
        // |2 q^expo trig(freq z)| ≤ 2 exp(−ζ·expo + freq·|Im z|)
        let log_bound = -zeta * expo + freq * y + std::f64::consts::LN_2;
        let weight = 2.0 * (-zeta * expo).exp();
        let sign = if k % 2 == 1 && (i == 1 || i == 4) { -1.0 } else { 1.0 };
        let arg = z * freq;
        let trig = if i == 1 { arg.sin() } else { arg.cos() };
        sum += trig * (sign * weight);
        let bound = log_bound.exp();
        if bound == 0.0 || (bound <= policy.tail_tol * sum.norm() && k > start) {
            break;
        }
    }
    Ok(sum)
}

/// ϑ₁′(0) = 2 Σ (−1)^k (2k+1) q^{(k+½)²}.
pub fn theta1_prime0(nome: Nome) -> f64 {
    let mut s = 0.0;
    for k in 0..400 {
        let kf = k as f64;
        let term = 2.0 * (2.0 * kf + 1.0) * (-nome.zeta * (kf + 0.5) * (kf + 0.5)).exp();
        s += if k % 2 == 0 { term } else { -term };
        if term <= 1e-17 * s.abs() {
            break;
        }
    }
    s
}

/// Regularised theta function φ(z) = ϑ₁(z)/sin z, evaluated from its
/// product form, which has no pole at z = 0:
/// `2 q^{1/4} ∏_{n≥1} (1 − q^{2n} e^{2iz})(1 − q^{2n} e^{−2iz})(1 − q^{2n})`.
pub fn varphi(z: C64, nome: Nome) -> C64 {
    let policy = TruncationPolicy::default();
    let e_plus = (C64::i() * z * 2.0).exp();
    let e_minus = e_plus.inv();
    let grow = e_plus.norm().max(e_minus.norm()).max(1.0);
    let q2 = nome.q * nome.q;
    let mut prod = C64::new(2.0 * nome.q.powf(0.25), 0.0);
    let mut qn = q2;
    for _ in 0..policy.max_terms {
        prod *= (1.0 - e_plus * qn) * (1.0 - e_minus * qn) * (1.0 - qn);
        if qn * grow < policy.tail_tol {
            break;
        }
        qn *= q2;
    }
    prod
}
