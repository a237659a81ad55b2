//! Thermodynamic-limit overlaps in closed form.
//!
//! Every configuration reduces to one expression in the boundary parameters
//! p₁, p₂ of the two h⁻ fields and a sign ε:
//!
//! ```text
//!          (p₁^{2ε}q²; q⁴,q⁴) (p₂^{2ε}q²; q⁴,q⁴) ((p₁p₂)^ε q⁴; q⁴,q⁴)²
//!   S  =  ─────────────────────────────────────────────────────────────
//!          (p₁^{2ε}q⁴; q⁴,q⁴) (p₂^{2ε}q⁴; q⁴,q⁴) ((p₁p₂)^ε q²; q⁴,q⁴)²
//! ```
//!
//! The auxiliary function 𝔞₊ — the exponential of the odd part of the
//! difference of the two counting functions — has a different closed form
//! depending on which boundary roots are present; each form is exposed
//! together with the functional equation it solves so the two can be
//! checked against each other.

use crate::model::{classify, critical_fields, gapless_condition, CaseLabel, ChainParams, ModelError, Regime, Side};
use crate::specialfns::{qpoch, qpoch2, SpecialFnError, C64};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermoError {
    #[error("gapless regime ({0}): the spectrum becomes gapless in the thermodynamic limit")]
    GaplessRegime(&'static str),
    #[error("field configuration matches no thermodynamic case: {0}")]
    UnclassifiedConfiguration(String),
    #[error("chains differ in ζ, h⁺ or the parity of L")]
    IncompatibleChains,
    #[error("outside the convergence domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

/// Which boundary roots the two ground states carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Only real roots in both sets.
    RealRoots,
    /// Both sets carry a boundary root attached to the h⁺ end.
    BrPlusPlus,
    /// Both sets carry a boundary root attached to their h⁻ end.
    BrMinusMinus,
    /// Only the first set carries a boundary root, attached to its h⁻ end;
    /// the second set is real.
    BrMinusSingle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSeriesParams {
    pub q: f64,
    pub p1: f64,
    pub p2: f64,
    pub epsilon_sign: i8,
    pub variant: Variant,
}

impl QSeriesParams {
    /// Checks the modulus conditions under which the chosen closed form is
    /// the solution of its functional equation.
    pub fn new(q: f64, p1: f64, p2: f64, epsilon_sign: i8, variant: Variant) -> Result<Self, ThermoError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(SpecialFnError::NomeOutOfRange(q).into());
        }
        if epsilon_sign != 1 && epsilon_sign != -1 {
            return Err(ThermoError::Domain(format!("ε must be ±1, got {epsilon_sign}")));
        }
        let qp = QSeriesParams { q, p1, p2, epsilon_sign, variant };
        let e = qp.eps();
        let small = |x: f64| x.is_finite() && x.abs() < 1.0;
        let ok = match variant {
            Variant::RealRoots | Variant::BrPlusPlus => small(p1.powf(e) * q) && small(p2.powf(e) * q),
            Variant::BrMinusMinus => [p1, p2].iter().all(|&p| small(p * q) && small(q / p)),
            Variant::BrMinusSingle => small(p1 * q) && small(q / p1) && small(1.0 / (p2 * q)),
        };
        if !ok {
            return Err(ThermoError::Domain(format!("{variant:?} requires smaller |p·q| (p₁ = {p1}, p₂ = {p2}, q = {q})")));
        }
        if variant == Variant::BrPlusPlus && epsilon_sign != 1 {
            return Err(ThermoError::Domain("boundary roots at h⁺ come with ε = +1".into()));
        }
        if matches!(variant, Variant::BrMinusMinus | Variant::BrMinusSingle) && epsilon_sign != -1 {
            return Err(ThermoError::Domain("boundary roots at h⁻ come with ε = −1".into()));
        }
        Ok(qp)
    }

    /// Parameters for the thermodynamic overlap of two chains.
    pub fn for_pair(params1: &ChainParams, params2: &ChainParams) -> Result<Self, ThermoError> {
        let r1 = classify_gapped(params1)?;
        let r2 = classify_gapped(params2)?;
        let q = (-params1.zeta).exp();
        let p1 = params1.boundary(Side::Minus)?.p;
        let p2 = params2.boundary(Side::Minus)?.p;
        let eps = r1.epsilon_sign;
        if r2.epsilon_sign != eps {
            return Err(ThermoError::UnclassifiedConfiguration("the two chains have opposite ε".into()));
        }
        let minus_br = |r: &Regime| r.boundary_root_side == Some(Side::Minus);
        let plus_br = |r: &Regime| r.boundary_root_side == Some(Side::Plus);
        let (variant, a, b) = match (minus_br(&r1), minus_br(&r2)) {
            (true, true) => (Variant::BrMinusMinus, p1, p2),
            (true, false) if r2.case_label == CaseLabel::B => (Variant::BrMinusSingle, p1, p2),
            (false, true) if r1.case_label == CaseLabel::B => (Variant::BrMinusSingle, p2, p1),
            (false, false) if plus_br(&r1) && plus_br(&r2) => (Variant::BrPlusPlus, p1, p2),
            (false, false) if !plus_br(&r1) && !plus_br(&r2) => (Variant::RealRoots, p1, p2),
            _ => {
                return Err(ThermoError::UnclassifiedConfiguration(format!(
                    "no single 𝔞₊ covers cases {} and {}",
                    r1.case_label.name(),
                    r2.case_label.name()
                )))
            }
        };
        QSeriesParams::new(q, a, b, eps, variant)
    }

    fn eps(&self) -> f64 {
        self.epsilon_sign as f64
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn check_u(u: C64) -> Result<(), ThermoError> {
    if !(u.re.is_finite() && u.im.is_finite()) || u.norm() > 1.0 + 1e-12 {
        return Err(ThermoError::Domain(format!("|u| = {} outside the closed unit disk", u.norm())));
    }
    Ok(())
}

fn nonzero(den: C64, what: &'static str) -> Result<C64, ThermoError> {
    if den.norm() < 1e-300 {
        return Err(SpecialFnError::Pole { function: what, threshold: 1e-300 }.into());
    }
    Ok(den)
}

/// The ε-shifted solution
/// `[(u(p₂q)^ε;q⁴)(uq²(p₁q)^ε;q⁴) / ((uq²(p₂q)^ε;q⁴)(u(p₁q)^ε;q⁴))]^ε`.
fn a_shift(u: C64, q: f64, p1: f64, p2: f64, eps: f64) -> Result<C64, ThermoError> {
    let q4 = q.powi(4);
    let (b1, b2) = ((p1 * q).powf(eps), (p2 * q).powf(eps));
    let num = qpoch(u * b2, q4)? * qpoch(u * (q * q * b1), q4)?;
    let den = nonzero(qpoch(u * (q * q * b2), q4)? * qpoch(u * b1, q4)?, "𝔞₊")?;
    Ok((num / den).powf(eps))
}

/// 𝔞₊(u) for the variant of `qp`.
pub fn a_plus(u: C64, qp: &QSeriesParams) -> Result<C64, ThermoError> {
    check_u(u)?;
    let QSeriesParams { q, p1, p2, .. } = *qp;
    let q4 = q.powi(4);
    match qp.variant {
        Variant::RealRoots | Variant::BrPlusPlus => a_shift(u, q, p1, p2, qp.eps()),
        Variant::BrMinusMinus => {
            let num = qpoch(u * (q / p2), q4)? * qpoch(u * (q.powi(3) / p1), q4)? * (1.0 - u * (p2 * q));
            let den = qpoch(u * (q / p1), q4)? * qpoch(u * (q.powi(3) / p2), q4)? * (1.0 - u * (p1 * q));
            Ok(num / nonzero(den, "𝔞₊")?)
        }
        Variant::BrMinusSingle => {
            let num = qpoch(u * (q / p2), q4)? * qpoch(u * (q.powi(3) / p1), q4)?;
            let den = qpoch(u / (p2 * q), q4)? * qpoch(u * (q / p1), q4)? * (1.0 - u * (p1 * q));
            Ok(num / nonzero(den, "𝔞₊")?)
        }
    }
}

/// The function that actually enters χ and the varphi products: 𝔞₊ itself
/// for real roots and h⁺ boundary roots; for h⁻ boundary roots the extra
/// boundary-root factors turn it into 𝔞̃₊, which is the ε = −1 shifted form.
pub fn a_plus_effective(u: C64, qp: &QSeriesParams) -> Result<C64, ThermoError> {
    match qp.variant {
        Variant::RealRoots | Variant::BrPlusPlus => a_plus(u, qp),
        Variant::BrMinusMinus | Variant::BrMinusSingle => a_plus_tilde(u, qp),
    }
}

/// 𝔞̃₊(u) = (u p₂⁻¹q;q⁴)(u(p₁q)⁻¹;q⁴) / ((u p₁⁻¹q;q⁴)(u(p₂q)⁻¹;q⁴)).
pub fn a_plus_tilde(u: C64, qp: &QSeriesParams) -> Result<C64, ThermoError> {
    check_u(u)?;
    let QSeriesParams { q, p1, p2, .. } = *qp;
    let q4 = q.powi(4);
    let num = qpoch(u * (q / p2), q4)? * qpoch(u / (p1 * q), q4)?;
    let den = qpoch(u * (q / p1), q4)? * qpoch(u / (p2 * q), q4)?;
    Ok(num / nonzero(den, "𝔞̃₊")?)
}

/// Right-hand side of the functional equation 𝔞₊(u)𝔞₊(uq²) = R(u) solved
/// by [`a_plus`].
pub fn functional_equation_rhs(u: C64, qp: &QSeriesParams) -> C64 {
    let QSeriesParams { q, p1, p2, .. } = *qp;
    let one = c(1.0);
    match qp.variant {
        Variant::RealRoots | Variant::BrPlusPlus => {
            let e = qp.eps();
            ((one - u * (p2 * q).powf(e)) / (one - u * (p1 * q).powf(e))).powf(e)
        }
        Variant::BrMinusMinus => {
            let f = |p: f64| (one - u * (p * q)) * (one - u * (q / p)) * (one - u * (p * q.powi(3)));
            f(p2) / f(p1)
        }
        Variant::BrMinusSingle => {
            let d = (one - u * (p1 * q)) * (one - u / (p2 * q)) * (one - u * (q / p1)) * (one - u * (p1 * q.powi(3)));
            one / d
        }
    }
}

/// |𝔞₊(u)𝔞₊(uq²) − R(u)|.
pub fn functional_equation_residual(u: C64, qp: &QSeriesParams) -> Result<f64, ThermoError> {
    let lhs = a_plus(u, qp)? * a_plus(u * qp.q * qp.q, qp)?;
    Ok((lhs - functional_equation_rhs(u, qp)).norm())
}

/// Thermodynamic limit of the ratio of transfer-matrix eigenvalues at a
/// real root λⱼ, with uⱼ = e^{2iλⱼ}.
pub fn chi_thermo(u_j: C64, qp: &QSeriesParams) -> Result<C64, ThermoError> {
    let e = qp.eps();
    let s = qp.q.powf(1.0 - e);
    let pair = a_plus_effective(u_j * s, qp)? * a_plus_effective(u_j.inv() * s, qp)?;
    let ratio = (c(qp.p1) / c(qp.p2)).powf(e / 2.0);
    Ok(ratio * pair.powf(e))
}

/// S as the infinite product of ratios of 𝔞₊ evaluated at
/// p_i^ε q^{2−ε+4n}, before the q-Pochhammer resummation.
pub fn overlap_from_a_plus(qp: &QSeriesParams) -> Result<f64, ThermoError> {
    let e = qp.eps();
    let q4 = qp.q.powi(4);
    let mut log = C64::new(0.0, 0.0);
    let mut scale = qp.q.powf(2.0 - e);
    for _ in 0..400 {
        let num = a_plus_effective(c(qp.p2.powf(e) * scale), qp)?;
        let den = a_plus_effective(c(qp.p1.powf(e) * scale), qp)?;
        let step = (num / den).ln();
        log += step;
        if step.norm() < 1e-17 {
            break;
        }
        scale *= q4;
    }
    Ok((log * e).exp().re)
}

/// The double q-Pochhammer closed form at sign ε.
pub fn overlap_closed_form(q: f64, p1: f64, p2: f64, epsilon_sign: i8) -> Result<f64, ThermoError> {
    let e = epsilon_sign as f64;
    let (q2, q4) = (q * q, q.powi(4));
    let (a, b, m) = (p1.powf(2.0 * e), p2.powf(2.0 * e), (p1 * p2).powf(e));
    let d = |x: f64| qpoch2(c(x), q4, q4);
    let num = d(a * q2)? * d(b * q2)? * d(m * q4)?.powi(2);
    let den = d(a * q4)? * d(b * q4)? * d(m * q2)?.powi(2);
    if den.norm() == 0.0 {
        return Err(SpecialFnError::Pole { function: "overlap denominator", threshold: 0.0 }.into());
    }
    Ok((num / den).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CasePath {
    /// Odd L, all roots real, ε = +1.
    Odd1,
    /// Odd L, ground states in different magnetisation sectors.
    Odd2,
    /// Odd L, spin-reversed image of `Odd1`.
    Odd3,
    /// Even L, h₁⁻, h₂⁻ < h⁺.
    Even1,
    /// Even L, h⁺ between the two h⁻ fields.
    Even2,
    /// Even L, h⁺ < h₁⁻, h₂⁻.
    Even3,
}

impl CasePath {
    pub fn name(self) -> &'static str {
        match self {
            CasePath::Odd1 => "odd-1",
            CasePath::Odd2 => "odd-2",
            CasePath::Odd3 => "odd-3",
            CasePath::Even1 => "even-1",
            CasePath::Even2 => "even-2",
            CasePath::Even3 => "even-3",
        }
    }

    /// ε of the closed form, or `None` for the vanishing cases.
    pub fn epsilon_sign(self) -> Option<i8> {
        match self {
            CasePath::Odd1 | CasePath::Even1 => Some(1),
            CasePath::Odd3 | CasePath::Even3 => Some(-1),
            CasePath::Odd2 | CasePath::Even2 => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoOverlap {
    pub value: f64,
    pub case_path: CasePath,
    pub vanishing: bool,
}

pub fn spin_reversal_image(params: &ChainParams) -> ChainParams {
    ChainParams { h_minus: -params.h_minus, h_plus: -params.h_plus, ..*params }
}

fn classify_gapped(params: &ChainParams) -> Result<Regime, ThermoError> {
    if let Some(cond) = gapless_condition(params) {
        return Err(ThermoError::GaplessRegime(cond));
    }
    Ok(classify(params)?)
}

/// Selects the case from field comparisons alone.
pub fn case_path(params1: &ChainParams, params2: &ChainParams) -> Result<CasePath, ThermoError> {
    if params1.zeta != params2.zeta || params1.h_plus != params2.h_plus || params1.l % 2 != params2.l % 2 {
        return Err(ThermoError::IncompatibleChains);
    }
    classify_gapped(params1)?;
    classify_gapped(params2)?;
    let (c1, _) = critical_fields(params1.zeta);
    let (hp, h1, h2) = (params1.h_plus, params1.h_minus, params2.h_minus);
    let unclassified = || {
        Err(ThermoError::UnclassifiedConfiguration(format!(
            "L parity {}, h⁺ = {hp}, h₁⁻ = {h1}, h₂⁻ = {h2}",
            if params1.l % 2 == 0 { "even" } else { "odd" }
        )))
    };
    if params1.l % 2 == 1 {
        if hp < c1 && h1 < c1 && h2 < c1 && h1 < -hp && h2 < -hp {
            return Ok(CasePath::Odd1);
        }
        if hp > -c1 && h1 > -c1 && h2 > -c1 && h1 > -hp && h2 > -hp {
            return Ok(CasePath::Odd3);
        }
        let straddle = |lo: f64, hi: f64| hp.abs() < c1 && lo < c1 && -hi < c1 && lo < -hp && -hp < hi;
        if straddle(h1, h2) || straddle(h2, h1) {
            return Ok(CasePath::Odd2);
        }
        return unclassified();
    }
    if h1 < hp && h2 < hp && (hp.abs() < c1 || (h1 < c1 && h2 < c1 && hp > c1)) {
        return Ok(CasePath::Even1);
    }
    if h1 > hp && h2 > hp && (hp.abs() < c1 || (h1 > -c1 && h2 > -c1 && hp < -c1)) {
        return Ok(CasePath::Even3);
    }
    if hp.abs() < c1 && ((h1 < hp && hp < h2) || (h2 < hp && hp < h1)) {
        return Ok(CasePath::Even2);
    }
    unclassified()
}

/// Thermodynamic-limit overlap of the ground states of two chains that
/// differ only in h⁻.
pub fn overlap_thermo(params1: &ChainParams, params2: &ChainParams) -> Result<ThermoOverlap, ThermoError> {
    let path = case_path(params1, params2)?;
    let Some(eps) = path.epsilon_sign() else {
        return Ok(ThermoOverlap { value: 0.0, case_path: path, vanishing: true });
    };
    let p1 = params1.boundary(Side::Minus)?.p;
    let p2 = params2.boundary(Side::Minus)?.p;
    let value = if (p1 - p2).abs() <= 1e-15 * p1.abs() { 1.0 } else { overlap_closed_form((-params1.zeta).exp(), p1, p2, eps)? };
    Ok(ThermoOverlap { value, case_path: path, vanishing: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// max_j |χ_thermo(e^{2iλⱼ}) − τ₂(λⱼ)/τ₁(λⱼ)| over the real roots of chain 1.
    fn chi_gap(l: usize) -> f64 {
        use crate::bethe::solve_params;
        use crate::overlap::chi_at_root;
        let p1 = chain(l, 1.5, -1.0, 2.0);
        let p2 = p1.with_h_minus(0.0);
        let (_, a) = solve_params(&p1, 1e-12).unwrap();
        let (_, b) = solve_params(&p2, 1e-12).unwrap();
        assert!(a.boundary_root.is_none() && b.boundary_root.is_none());
        let qp = QSeriesParams::for_pair(&p1, &p2).unwrap();
        let (lam, mu) = (a.rapidities(), b.rapidities());
        (0..lam.len())
            .map(|j| {
                let finite = chi_at_root(j, &lam, &mu, &p1, &p2).unwrap();
                let u = C64::from_polar(1.0, 2.0 * a.real_roots[j]);
                (chi_thermo(u, &qp).unwrap() - finite).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn chi_converges_to_its_closed_form() {
        let gaps: Vec<f64> = [10, 12, 14].into_iter().map(chi_gap).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(gaps[2] < 1e-4, "{gaps:?}");
    }

    fn chain(l: usize, zeta: f64, hm: f64, hp: f64) -> ChainParams {
        ChainParams::new(l, zeta, hm, hp).unwrap()
    }

    fn u_grid() -> Vec<C64> {
        let mut g = vec![c(0.1), C64::from_polar(0.5, 0.3), c(0.9)];
        for k in 0..9 {
            g.push(C64::from_polar(0.15 + 0.09 * k as f64, 0.7 * k as f64 - 2.0));
        }
        g
    }

    #[test]
    fn frozen_values() {
        let s = overlap_thermo(&chain(8, 1.5, -1.0, 2.0), &chain(8, 1.5, 0.0, 2.0)).unwrap();
        assert_eq!(s.case_path, CasePath::Even1);
        assert!((s.value - 0.9798117096020927).abs() < 1e-13, "{}", s.value);
        let s = overlap_thermo(&chain(9, 1.8, 0.0, -1.0), &chain(9, 1.8, 0.5, -1.0)).unwrap();
        assert_eq!(s.case_path, CasePath::Odd1);
        assert!((s.value - 0.995162576663454).abs() < 1e-13);
        let q = (-1.8f64).exp();
        let p = |h| crate::model::BoundaryParam::from_field(h, 1.8).unwrap().p;
        let v = overlap_closed_form(q, p(0.0), p(0.5), -1).unwrap();
        assert!((v - 0.9976614268475215).abs() < 1e-13);
    }

    #[test]
    fn real_roots_functional_equation() {
        let qp = QSeriesParams::for_pair(&chain(8, 1.5, -1.0, 2.0), &chain(8, 1.5, 0.0, 2.0)).unwrap();
        assert_eq!(qp.variant, Variant::RealRoots);
        for u in u_grid() {
            assert!(functional_equation_residual(u, &qp).unwrap() < 1e-12);
        }
    }

    #[test]
    fn br_minus_minus_functional_equation() {
        let qp = QSeriesParams::for_pair(&chain(8, 1.5, 0.3, -2.0), &chain(8, 1.5, 0.8, -2.0)).unwrap();
        assert_eq!(qp.variant, Variant::BrMinusMinus);
        for u in u_grid() {
            assert!(functional_equation_residual(u, &qp).unwrap() < 1e-12);
        }
    }

    #[test]
    fn every_variant_solves_its_equation() {
        let q = (-1.5f64).exp();
        let cases = [
            QSeriesParams::new(q, -0.9, 1.7, -1, Variant::RealRoots).unwrap(),
            QSeriesParams::new(q, -1.3, -0.4, 1, Variant::BrPlusPlus).unwrap(),
            QSeriesParams::new(q, -1.6, 6.0, -1, Variant::BrMinusSingle).unwrap(),
        ];
        for qp in cases {
            for u in u_grid() {
                let r = functional_equation_residual(u, &qp).unwrap();
                assert!(r < 1e-12, "{:?} at {u}: {r:e}", qp.variant);
            }
        }
    }

    #[test]
    fn tilde_is_shifted_form_at_minus_one() {
        let q = (-1.5f64).exp();
        let qp = QSeriesParams::new(q, -1.6, -0.7, -1, Variant::BrMinusMinus).unwrap();
        let plain = QSeriesParams { variant: Variant::RealRoots, ..qp };
        for u in u_grid() {
            let d = a_plus_tilde(u, &qp).unwrap() - a_plus(u, &plain).unwrap();
            assert!(d.norm() < 1e-13);
            // and so it satisfies the ε = −1 real-root equation
            assert!(functional_equation_residual(u, &plain).unwrap() < 1e-12);
        }
    }

    #[test]
    fn equal_fields_give_unity() {
        let q = (-1.2f64).exp();
        let qp = QSeriesParams::new(q, -0.8, -0.8, 1, Variant::RealRoots).unwrap();
        for u in u_grid() {
            assert!((a_plus(u, &qp).unwrap() - 1.0).norm() < 1e-15);
            assert!((chi_thermo(C64::from_polar(1.0, u.arg()), &qp).unwrap() - 1.0).norm() < 1e-14);
        }
        let p = chain(10, 1.2, -0.7, 1.0);
        assert_eq!(overlap_thermo(&p, &p).unwrap().value, 1.0);
        assert!((overlap_closed_form(q, -0.8, -0.8, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_route_matches_closed_form() {
        let pairs = [
            (chain(8, 1.5, -1.0, 2.0), chain(8, 1.5, 0.0, 2.0)),
            (chain(8, 1.5, 0.3, -2.0), chain(8, 1.5, 0.8, -2.0)),
            (chain(8, 1.5, -1.0, 0.5), chain(8, 1.5, -0.5, 0.5)),
            (chain(10, 1.5, 1.6, 0.2), chain(10, 1.5, 3.5, 0.2)),
            (chain(10, 1.5, 0.6, 0.2), chain(10, 1.5, 3.5, 0.2)),
        ];
        for (a, b) in pairs {
            let qp = QSeriesParams::for_pair(&a, &b).unwrap();
            let route = overlap_from_a_plus(&qp).unwrap();
            let s = overlap_thermo(&a, &b).unwrap();
            assert!((route - s.value).abs() < 1e-12, "{:?}: {route} vs {}", qp.variant, s.value);
        }
    }

    #[test]
    fn dispatch_table() {
        let even = |h1, hp, h2| case_path(&chain(10, 1.8, h1, hp), &chain(10, 1.8, h2, hp));
        let odd = |h1, hp, h2| case_path(&chain(11, 1.8, h1, hp), &chain(11, 1.8, h2, hp));
        assert_eq!(even(-1.0, 0.0, -0.5), Ok(CasePath::Even1));
        assert_eq!(even(-1.0, 3.0, 0.5), Ok(CasePath::Even1));
        assert_eq!(even(-1.0, 0.0, 1.0), Ok(CasePath::Even2));
        assert_eq!(even(1.0, 0.0, -1.0), Ok(CasePath::Even2));
        assert_eq!(even(0.5, 0.0, 4.0), Ok(CasePath::Even3));
        assert_eq!(odd(0.0, -1.0, 0.5), Ok(CasePath::Odd1));
        assert_eq!(odd(0.0, -1.0, 1.5), Ok(CasePath::Odd2));
        assert_eq!(odd(1.0, -0.5, 1.5), Ok(CasePath::Odd3));
        assert_eq!(even(2.0, 5.0, 0.0), Ok(CasePath::Even1));
        // h₁⁻ between the critical fields while h⁺ is above both: gapless
        assert!(matches!(even(3.0, 5.0, 0.0), Err(ThermoError::GaplessRegime(_))));
        assert!(matches!(odd(1.0, -1.0, 0.0), Err(ThermoError::Model(ModelError::AmbiguousSector))));
        assert!(matches!(even(3.0, 3.5, 0.0), Err(ThermoError::GaplessRegime(_))));
        let s = overlap_thermo(&chain(11, 1.8, 0.0, -1.0), &chain(11, 1.8, 1.5, -1.0)).unwrap();
        assert!(s.vanishing && s.value == 0.0);
    }

    #[test]
    fn spin_reversal() {
        let (a, b) = (chain(8, 1.5, -1.0, 2.0), chain(8, 1.5, 0.0, 2.0));
        let s = overlap_thermo(&a, &b).unwrap().value;
        let r = overlap_thermo(&spin_reversal_image(&a), &spin_reversal_image(&b)).unwrap();
        assert_eq!(r.case_path, CasePath::Even3);
        assert!((s - r.value).abs() < 1e-12);
        assert_eq!(spin_reversal_image(&spin_reversal_image(&a)), a);
        // odd-1 at inverted p is odd-3 at p
        let q = (-1.8f64).exp();
        let (p1, p2) = (-1.4, 0.3);
        let lhs = overlap_closed_form(q, 1.0 / p1, 1.0 / p2, 1).unwrap();
        let rhs = overlap_closed_form(q, p1, p2, -1).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn parity_bridge() {
        for (h1, hp, h2) in [(0.0, 1.0, 0.5), (-2.0, -0.3, 0.1), (0.9, -2.5, 1.5)] {
            let odd = overlap_thermo(&chain(11, 1.8, h1, hp), &chain(11, 1.8, h2, hp)).unwrap();
            let even = overlap_thermo(&chain(12, 1.8, h1, -hp), &chain(12, 1.8, h2, -hp)).unwrap();
            assert_eq!(odd.case_path.epsilon_sign(), even.case_path.epsilon_sign());
            assert!((odd.value - even.value).abs() < 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        let q = (-1.5f64).exp();
        assert!(matches!(QSeriesParams::new(q, 1.0 / q, 0.5, 1, Variant::RealRoots), Err(ThermoError::Domain(_))));
        let qp = QSeriesParams::new(q, 0.5, -0.5, 1, Variant::RealRoots).unwrap();
        assert!(matches!(a_plus(c(1.5), &qp), Err(ThermoError::Domain(_))));
        assert!(overlap_closed_form(q, 1.0 / q, 0.5, 1).is_err());
    }

    fn even_case_one() -> impl Strategy<Value = (f64, f64, f64, f64)> {
        (1.0f64..2.5).prop_flat_map(|z| {
            let c1 = z.cosh() - 1.0;
            (Just(z), -3.0 * c1..0.95 * c1, -3.0 * c1..0.95 * c1, 1.05 * c1..4.0 * c1)
        })
    }

    proptest! {
        #[test]
        fn value_in_unit_interval_and_symmetric((z, h1, h2, hp) in even_case_one()) {
            prop_assume!((h1 - h2).abs() > 1e-6);
            prop_assume!((hp - z.cosh() - 1.0).abs() > 1e-6);
            let a = chain(10, z, h1, hp);
            let b = chain(10, z, h2, hp);
            let s = overlap_thermo(&a, &b).unwrap().value;
            let t = overlap_thermo(&b, &a).unwrap().value;
            prop_assert!(s > 0.0 && s < 1.0);
            prop_assert!((s - t).abs() < 1e-13);
            let r = overlap_thermo(&spin_reversal_image(&a), &spin_reversal_image(&b)).unwrap().value;
            prop_assert!((s - r).abs() < 1e-12);
        }

        #[test]
        fn functional_equation_on_random_points(
            p1 in -2.5f64..2.5, p2 in -2.5f64..2.5, r in 0.0f64..0.99, th in -3.1f64..3.1
        ) {
            let q = (-1.5f64).exp();
            prop_assume!(p1.abs() > 0.05 && p2.abs() > 0.05);
            let u = C64::from_polar(r, th);
            for (v, e) in [(Variant::RealRoots, 1), (Variant::RealRoots, -1), (Variant::BrMinusMinus, -1)] {
                if let Ok(qp) = QSeriesParams::new(q, p1, p2, e, v) {
                    prop_assert!(functional_equation_residual(u, &qp).unwrap() < 1e-11);
                }
            }
        }
    }
}
