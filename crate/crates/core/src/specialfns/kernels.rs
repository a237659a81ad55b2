use super::{SpecialFnError, C64};
use std::f64::consts::PI;

/// Minimum admissible |sin(·)| of a pole factor.
pub const POLE_GUARD: f64 = 1e-12;

fn guarded_sin(z: C64, function: &'static str) -> Result<C64, SpecialFnError> {
    let s = z.sin();
    if s.norm() < POLE_GUARD {
        Err(SpecialFnError::Pole { function, threshold: POLE_GUARD })
    } else {
        Ok(s)
    }
}

/// t(ν) = sinh ζ / (sin ν · sin(ν − iζ)).
pub fn kernel_t(nu: C64, zeta: f64) -> Result<C64, SpecialFnError> {
    let a = guarded_sin(nu, "t")?;
    let b = guarded_sin(nu - C64::new(0.0, zeta), "t")?;
    Ok(zeta.sinh() / (a * b))
}

/// K(λ) = sinh 2ζ / (2π sin(λ+iζ) sin(λ−iζ)).
pub fn kernel_k(lambda: C64, zeta: f64) -> Result<C64, SpecialFnError> {
    let a = guarded_sin(lambda + C64::new(0.0, zeta), "K")?;
    let b = guarded_sin(lambda - C64::new(0.0, zeta), "K")?;
    Ok((2.0 * zeta).sinh() / (2.0 * PI * a * b))
}
