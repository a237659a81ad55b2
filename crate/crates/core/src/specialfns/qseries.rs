use super::{SpecialFnError, TruncationPolicy, C64};

/// (x; α)_∞ = ∏_{n≥0} (1 − x αⁿ).
pub fn qpoch(x: C64, alpha: f64) -> Result<C64, SpecialFnError> {
    qpoch_with(x, alpha, TruncationPolicy::default())
}

pub fn qpoch_with(x: C64, alpha: f64, policy: TruncationPolicy) -> Result<C64, SpecialFnError> {
    if !(alpha.abs() < 1.0) {
        return Err(SpecialFnError::Domain(format!("|alpha| = {} ≥ 1", alpha.abs())));
    }
    let mut prod = C64::new(1.0, 0.0);
    let mut term = x;
    for _ in 0..policy.max_terms {
        if term.norm() < policy.tail_tol {
            break;
        }
        prod *= 1.0 - term;
        term *= alpha;
    }
    Ok(prod)
}

/// Double q-Pochhammer symbol (x; q₁, q₂)_∞ = ∏_{n₁,n₂≥0} (1 − x q₁^{n₁} q₂^{n₂}),
/// accumulated as ∏_{n₂} (x q₂^{n₂}; q₁)_∞.
pub fn qpoch2(x: C64, q1: f64, q2: f64) -> Result<C64, SpecialFnError> {
    qpoch2_with(x, q1, q2, TruncationPolicy::default())
}

pub fn qpoch2_with(
    x: C64,
    q1: f64,
    q2: f64,
    policy: TruncationPolicy,
) -> Result<C64, SpecialFnError> {
    if !(q1.abs() < 1.0 && q2.abs() < 1.0) {
        return Err(SpecialFnError::Domain(format!("double product with q1 = {q1}, q2 = {q2}")));
    }
    if !(x.norm() < 1.0) {
        return Err(SpecialFnError::Domain(format!("double product with |x| = {} ≥ 1", x.norm())));
    }
    let mut prod = C64::new(1.0, 0.0);
    let mut lead = x;
    for _ in 0..policy.max_terms {
        if lead.norm() < policy.tail_tol {
            break;
        }
        prod *= qpoch_with(lead, q1, policy)?;
        lead *= q2;
    }
    Ok(prod)
}
