//! Chain parameters, boundary parametrisation, ground-state regime
//! classification and the exponential counting function 𝔞.

use crate::specialfns::{LogSinSum, SpecialFnError, C64};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),
    #[error("gapless regime ({0}): the spectrum becomes gapless in the thermodynamic limit")]
    Gapless(&'static str),
    #[error("boundary field |h| = sinh ζ leaves δ undetermined")]
    DegenerateBoundary,
    #[error("field sits on a regime boundary: {0}")]
    RegimeBoundary(String),
    #[error("odd L with h⁺ + h⁻ = 0: the two magnetisation sectors are degenerate")]
    AmbiguousSector,
    #[error(transparent)]
    Special(#[from] SpecialFnError),
}

/// Relative width of the band treated as "exactly on" a threshold field.
const EDGE_TOL: f64 = 1e-12;

/// Physical inputs: chain length, anisotropy Δ = cosh ζ and the two boundary fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub l: usize,
    pub zeta: f64,
    pub h_minus: f64,
    pub h_plus: f64,
}

impl ChainParams {
    pub fn new(l: usize, zeta: f64, h_minus: f64, h_plus: f64) -> Result<Self, ModelError> {
        let p = ChainParams { l, zeta, h_minus, h_plus };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.l < 2 {
            return Err(ModelError::InvalidParams(format!("L = {} < 2", self.l)));
        }
        if !(self.zeta.is_finite() && self.zeta > 0.0) {
            return Err(ModelError::InvalidParams(format!("ζ = {} must be positive", self.zeta)));
        }
        if !(self.h_minus.is_finite() && self.h_plus.is_finite()) {
            return Err(ModelError::InvalidParams("boundary fields must be finite".into()));
        }
        Ok(())
    }

    pub fn delta(&self) -> f64 {
        self.zeta.cosh()
    }

    pub fn field(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.h_plus,
            Side::Minus => self.h_minus,
        }
    }

    pub fn with_h_minus(&self, h_minus: f64) -> Self {
        ChainParams { h_minus, ..*self }
    }

    pub fn boundary(&self, side: Side) -> Result<BoundaryParam, ModelError> {
        BoundaryParam::from_field(self.field(side), self.zeta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn symbol(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

/// h = −sinh ζ · coth ξ with ξ = −ξ̃ + iδπ/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParam {
    pub xi_tilde: f64,
    pub delta: u8,
    /// p = e^{−2ξ} = (−1)^δ e^{2ξ̃}, a signed real.
    pub p: f64,
}

impl BoundaryParam {
    pub fn from_field(h: f64, zeta: f64) -> Result<Self, ModelError> {
        let sh = zeta.sinh();
        if (h.abs() - sh).abs() <= EDGE_TOL * sh.max(1.0) {
            return Err(ModelError::DegenerateBoundary);
        }
        let (xi_tilde, delta) = if h.abs() < sh { ((h / sh).atanh(), 1) } else { ((sh / h).atanh(), 0) };
        let sign = if delta == 1 { -1.0 } else { 1.0 };
        Ok(BoundaryParam { xi_tilde, delta, p: sign * (2.0 * xi_tilde).exp() })
    }

    pub fn xi(&self) -> C64 {
        C64::new(-self.xi_tilde, self.delta as f64 * FRAC_PI_2)
    }

    /// The field reproduced from ξ: h = −sinh ζ coth ξ.
    pub fn field(&self, zeta: f64) -> f64 {
        let xi = self.xi();
        (-zeta.sinh() * xi.cosh() / xi.sinh()).re
    }

    /// Zero of the boundary factor sin(ν + iξ + iζ/2):
    /// A = −i(ζ/2 + ξ) = δπ/2 + i(ξ̃ − ζ/2).
    pub fn anchor(&self, zeta: f64) -> C64 {
        C64::new(self.delta as f64 * FRAC_PI_2, self.xi_tilde - zeta / 2.0)
    }
}

/// (h_cr1, h_cr2) = (Δ − 1, Δ + 1).
pub fn critical_fields(zeta: f64) -> (f64, f64) {
    let d = zeta.cosh();
    (d - 1.0, d + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    A,
    B,
    C,
    APrime,
    BPrime,
}

impl CaseLabel {
    pub fn name(self) -> &'static str {
        match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C => "C",
            CaseLabel::APrime => "A'",
            CaseLabel::BPrime => "B'",
        }
    }
}

/// Ground-state classification of a (gapped) parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    /// Number of down spins in the ground state.
    pub n: usize,
    pub case_label: CaseLabel,
    pub boundary_root_side: Option<Side>,
    /// +1 when the dominant boundary is σ₁ = + (even L) or in case A′;
    /// −1 when it is σ₁ = − or in case B′.
    pub epsilon_sign: i8,
}

impl Regime {
    /// Case B′ states are described through their spin-reversed image.
    pub fn spin_reversed(&self) -> bool {
        self.case_label == CaseLabel::BPrime
    }
}

fn on_edge(h: f64, edge: f64) -> bool {
    (h.abs() - edge).abs() <= EDGE_TOL * edge.max(1.0)
}

/// Returns the gapless condition matched by the parameters, if any.
pub fn gapless_condition(params: &ChainParams) -> Option<&'static str> {
    let (c1, _) = critical_fields(params.zeta);
    let (hm, hp) = (params.h_minus, params.h_plus);
    if params.l % 2 == 0 {
        if hm > c1 && hp > c1 {
            return Some("even L with h⁻, h⁺ > h_cr1");
        }
        if -hm > c1 && -hp > c1 {
            return Some("even L with −h⁻, −h⁺ > h_cr1");
        }
    } else {
        if hm > c1 && -hp > c1 {
            return Some("odd L with h⁻, −h⁺ > h_cr1");
        }
        if -hm > c1 && hp > c1 {
            return Some("odd L with −h⁻, h⁺ > h_cr1");
        }
    }
    None
}

/// Classify the ground state of the chain into the cases (A)–(C), (A′)–(B′).
pub fn classify(params: &ChainParams) -> Result<Regime, ModelError> {
    params.validate()?;
    let (c1, c2) = critical_fields(params.zeta);
    for side in [Side::Minus, Side::Plus] {
        let h = params.field(side);
        params.boundary(side)?;
        if on_edge(h, c1) || on_edge(h, c2) {
            return Err(ModelError::RegimeBoundary(format!("|h{}| equals a critical field", side.symbol())));
        }
    }
    if let Some(cond) = gapless_condition(params) {
        return Err(ModelError::Gapless(cond));
    }
    let (hm, hp) = (params.h_minus, params.h_plus);
    let l = params.l;
    if l % 2 == 1 {
        let sum = hp + hm;
        if sum.abs() <= EDGE_TOL * hp.abs().max(hm.abs()).max(1.0) {
            return Err(ModelError::AmbiguousSector);
        }
        if hp < c1 && hm < c1 && sum < 0.0 {
            return Ok(Regime { n: (l - 1) / 2, case_label: CaseLabel::APrime, boundary_root_side: None, epsilon_sign: 1 });
        }
        if hp > -c1 && hm > -c1 && sum > 0.0 {
            return Ok(Regime { n: (l + 1) / 2, case_label: CaseLabel::BPrime, boundary_root_side: None, epsilon_sign: -1 });
        }
        return Err(ModelError::RegimeBoundary("odd-L field pattern matches neither A′ nor B′".into()));
    }
    if (hp - hm).abs() <= EDGE_TOL * hp.abs().max(1.0) {
        // Both boundary roots would sit on the same anchor.
        return Err(ModelError::RegimeBoundary("h⁺ = h⁻ leaves σ₁ undetermined".into()));
    }
    let (side, hmax) = if hp > hm { (Side::Plus, hp) } else { (Side::Minus, hm) };
    let epsilon_sign = if side == Side::Plus { 1 } else { -1 };
    let n = l / 2;
    let (case_label, br) = if hmax.abs() < c1 {
        (CaseLabel::A, Some(side))
    } else if hmax > c1 && hmax < c2 {
        (CaseLabel::B, None)
    } else if hmax > c2 {
        (CaseLabel::C, Some(side))
    } else {
        return Err(ModelError::RegimeBoundary("unclassified even-L field pattern".into()));
    };
    Ok(Regime { n, case_label, boundary_root_side: br, epsilon_sign })
}

/// A spectral parameter stored as `anchor + offset`.
///
/// Boundary roots sit exponentially close to a fixed anchor; keeping the
/// small offset separate lets differences between a root and its anchor,
/// or between two roots on the same anchor, be formed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rapidity {
    pub anchor: C64,
    pub offset: C64,
}

impl Rapidity {
    pub fn real(x: f64) -> Self {
        Rapidity { anchor: C64::new(0.0, 0.0), offset: C64::new(x, 0.0) }
    }

    pub fn complex(z: C64) -> Self {
        Rapidity { anchor: C64::new(0.0, 0.0), offset: z }
    }

    pub fn anchored(anchor: C64, offset: C64) -> Self {
        Rapidity { anchor, offset }
    }

    pub fn value(&self) -> C64 {
        self.anchor + self.offset
    }

    /// `self − other`, with anchors cancelled exactly.
    pub fn minus(&self, other: &Rapidity) -> C64 {
        (self.anchor - other.anchor) + (self.offset - other.offset)
    }

    pub fn plus(&self, other: &Rapidity) -> C64 {
        (self.anchor + other.anchor) + (self.offset + other.offset)
    }

    pub fn neg(&self) -> Rapidity {
        Rapidity { anchor: -self.anchor, offset: -self.offset }
    }

    pub fn shifted(&self, by: C64) -> Rapidity {
        Rapidity { anchor: self.anchor, offset: self.offset + by }
    }
}

impl From<f64> for Rapidity {
    fn from(x: f64) -> Self {
        Rapidity::real(x)
    }
}

impl From<C64> for Rapidity {
    fn from(z: C64) -> Self {
        Rapidity::complex(z)
    }
}

pub(crate) fn ln_sin(z: C64) -> C64 {
    z.sin().ln()
}

pub(crate) fn cot(z: C64) -> C64 {
    z.cos() / z.sin()
}

fn iz(y: f64) -> C64 {
    C64::new(0.0, y)
}

/// The exponential counting function 𝔞(ν | {λ}) of a chain with given
/// boundary fields, in the homogeneous limit.
#[derive(Debug, Clone)]
pub struct CountingFunction {
    pub l: usize,
    pub zeta: f64,
    /// Anchors A_σ = −i(ζ/2 + ξ^σ), ordered (+, −).
    pub anchors: [Rapidity; 2],
    pub roots: Vec<Rapidity>,
}

impl CountingFunction {
    pub fn new(params: &ChainParams, roots: Vec<Rapidity>) -> Result<Self, ModelError> {
        let plus = params.boundary(Side::Plus)?.anchor(params.zeta);
        let minus = params.boundary(Side::Minus)?.anchor(params.zeta);
        Ok(CountingFunction {
            l: params.l,
            zeta: params.zeta,
            anchors: [Rapidity::anchored(plus, C64::new(0.0, 0.0)), Rapidity::anchored(minus, C64::new(0.0, 0.0))],
            roots,
        })
    }

    pub fn anchor(&self, side: Side) -> Rapidity {
        match side {
            Side::Plus => self.anchors[0],
            Side::Minus => self.anchors[1],
        }
    }

    /// log 𝔞(ν) with an arbitrary branch; optionally omitting the boundary
    /// factor sin(ν − A_σ) that vanishes at a boundary root.
    pub fn log_a_omitting(&self, nu: &Rapidity, omit: Option<Side>) -> C64 {
        let z = nu.value();
        let h = iz(self.zeta / 2.0);
        let mut v = (ln_sin(z - h) - ln_sin(z + h)) * (2.0 * self.l as f64);
        for (k, a) in self.anchors.iter().enumerate() {
            let side = if k == 0 { Side::Plus } else { Side::Minus };
            if omit != Some(side) {
                v += ln_sin(nu.minus(a));
            }
            v -= ln_sin(-nu.plus(a));
        }
        let iz_ = iz(self.zeta);
        v += ln_sin(iz_ - z * 2.0) - ln_sin(iz_ + z * 2.0);
        for r in &self.roots {
            let d = nu.minus(r);
            let s = nu.plus(r);
            v += ln_sin(s + iz_) + ln_sin(d + iz_) - ln_sin(s - iz_) - ln_sin(d - iz_);
        }
        v
    }

    pub fn log_a(&self, nu: &Rapidity) -> C64 {
        self.log_a_omitting(nu, None)
    }

    pub fn a(&self, nu: &Rapidity) -> C64 {
        self.log_a(nu).exp()
    }

    /// d log 𝔞 / dν.
    pub fn dlog_a(&self, nu: &Rapidity) -> C64 {
        let z = nu.value();
        let h = iz(self.zeta / 2.0);
        let iz_ = iz(self.zeta);
        let mut v = (cot(z - h) - cot(z + h)) * (2.0 * self.l as f64);
        for a in &self.anchors {
            v += cot(nu.minus(a)) - cot(nu.plus(a));
        }
        v += -cot(iz_ - z * 2.0) * 2.0 - cot(iz_ + z * 2.0) * 2.0;
        for r in &self.roots {
            let d = nu.minus(r);
            let s = nu.plus(r);
            v += cot(s + iz_) + cot(d + iz_) - cot(s - iz_) - cot(d - iz_);
        }
        v
    }

    /// 𝔞′(ν) = 𝔞(ν) · d log 𝔞(ν).
    pub fn a_prime(&self, nu: &Rapidity) -> C64 {
        self.a(nu) * self.dlog_a(nu)
    }

    fn phase_sum(&self) -> LogSinSum {
        let mut s = LogSinSum::new();
        let two_l = 2.0 * self.l as f64;
        s.push(two_l, 1.0, iz(-self.zeta / 2.0)).push(-two_l, 1.0, iz(self.zeta / 2.0));
        for a in &self.anchors {
            let av = a.value();
            s.push(1.0, 1.0, -av).push(-1.0, -1.0, -av);
        }
        s.push(1.0, -2.0, iz(self.zeta)).push(-1.0, 2.0, iz(self.zeta));
        for r in &self.roots {
            let lv = r.value();
            let izt = iz(self.zeta);
            s.push(1.0, 1.0, izt + lv).push(1.0, 1.0, izt - lv);
            s.push(-1.0, 1.0, -izt + lv).push(-1.0, 1.0, -izt - lv);
        }
        s
    }

    /// Counting function ξ̂(μ) = −(i/2L) log 𝔞(μ) on the real axis, with the
    /// branch fixed by continuity from ξ̂(0) = 0.
    pub fn xi_hat(&self, mu: f64) -> Result<f64, ModelError> {
        let s = self.phase_sum();
        s.check_branches()?;
        Ok(s.phase_from_origin(mu) / (2.0 * self.l as f64))
    }

    /// ξ̂ at several points, sharing the factor decomposition.
    pub fn xi_hat_many(&self, mus: &[f64]) -> Result<Vec<f64>, ModelError> {
        let s = self.phase_sum();
        s.check_branches()?;
        let origin = s.phase(0.0);
        Ok(mus.iter().map(|&m| (s.phase(m) - origin) / (2.0 * self.l as f64)).collect())
    }
}

/// 𝔞(ν | {λ}) for the given roots.
pub fn exp_counting(nu: C64, roots: &[C64], params: &ChainParams) -> Result<C64, ModelError> {
    let cf = CountingFunction::new(params, roots.iter().map(|&r| Rapidity::complex(r)).collect())?;
    Ok(cf.a(&Rapidity::complex(nu)))
}

/// ξ̂(μ | {λ}) for the given roots.
pub fn counting_xi(mu: f64, roots: &[C64], params: &ChainParams) -> Result<f64, ModelError> {
    let cf = CountingFunction::new(params, roots.iter().map(|&r| Rapidity::complex(r)).collect())?;
    cf.xi_hat(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::ground_state;
    use proptest::prelude::*;

    #[test]
    fn regime_matrix_against_ed_sector() {
        // (L, ζ, h⁻, h⁺, expected label, boundary-root side)
        let cases = [
            (8, 1.5, -1.0, 2.0, CaseLabel::B, None),
            (8, 1.5, -1.0, 0.5, CaseLabel::A, Some(Side::Plus)),
            (8, 1.5, 0.5, -1.0, CaseLabel::A, Some(Side::Minus)),
            (8, 1.5, -0.5, 6.5, CaseLabel::C, Some(Side::Plus)),
            (8, 1.2, 3.8, 0.2, CaseLabel::C, Some(Side::Minus)),
            (8, 1.8, 2.5, -1.0, CaseLabel::B, None),
            (9, 1.8, 0.0, -1.0, CaseLabel::APrime, None),
            (9, 1.8, 1.0, -0.5, CaseLabel::BPrime, None),
            (7, 1.5, 6.0, 0.5, CaseLabel::BPrime, None),
        ];
        for (l, zeta, hm, hp, label, br) in cases {
            let p = ChainParams::new(l, zeta, hm, hp).unwrap();
            let r = classify(&p).unwrap();
            assert_eq!((r.case_label, r.boundary_root_side), (label, br), "{p:?}");
            assert_eq!(r.n, ground_state(&p).unwrap().sector, "{p:?}");
            assert_eq!(r.spin_reversed(), label == CaseLabel::BPrime);
        }
    }

    #[test]
    fn epsilon_follows_the_dominant_boundary() {
        let eps = |l, hm, hp| classify(&ChainParams::new(l, 1.5, hm, hp).unwrap()).unwrap().epsilon_sign;
        assert_eq!(eps(8, -1.0, 2.0), 1);
        assert_eq!(eps(8, 2.0, -1.0), -1);
        assert_eq!(eps(9, 0.0, -1.0), 1);
        assert_eq!(eps(9, 1.0, 0.0), -1);
    }

    #[test]
    fn classification_errors() {
        let err = |l, z: f64, hm, hp| classify(&ChainParams { l, zeta: z, h_minus: hm, h_plus: hp }).unwrap_err();
        let (c1, c2) = critical_fields(1.5);
        assert!(matches!(err(8, 1.5, 1.5, 1.6), ModelError::Gapless(_)));
        assert!(matches!(err(8, 1.5, -1.5, -1.6), ModelError::Gapless(_)));
        assert!(matches!(err(9, 1.5, 1.5, -1.6), ModelError::Gapless(_)));
        assert_eq!(err(9, 1.5, 0.3, -0.3), ModelError::AmbiguousSector);
        assert!(matches!(err(8, 1.5, 0.2, 0.2), ModelError::RegimeBoundary(_)));
        assert!(matches!(err(8, 1.5, -1.0, c1), ModelError::RegimeBoundary(_)));
        assert!(matches!(err(8, 1.5, -1.0, c2), ModelError::RegimeBoundary(_)));
        assert_eq!(err(8, 1.5, -1.0, 1.5f64.sinh()), ModelError::DegenerateBoundary);
        assert!(matches!(err(1, 1.5, 0.0, 1.0), ModelError::InvalidParams(_)));
        assert!(matches!(err(8, 0.0, 0.0, 1.0), ModelError::InvalidParams(_)));
        assert!(matches!(err(8, 1.0, f64::NAN, 1.0), ModelError::InvalidParams(_)));
    }

    #[test]
    fn anchor_is_the_boundary_zero() {
        for h in [-7.0, -1.2, 0.0, 0.4, 1.9, 5.0] {
            let zeta = 1.3;
            let b = BoundaryParam::from_field(h, zeta).unwrap();
            let z = b.anchor(zeta) + C64::i() * b.xi() + C64::new(0.0, zeta / 2.0);
            assert!(z.sin().norm() < 1e-14, "h = {h}");
            assert_eq!(b.delta, u8::from(h.abs() < zeta.sinh()));
        }
    }

    #[test]
    fn anchored_differences_do_not_cancel() {
        let a = C64::new(FRAC_PI_2, 0.9);
        let (x, y) = (Rapidity::anchored(a, C64::new(3e-17, 0.0)), Rapidity::anchored(a, C64::new(-1e-17, 0.0)));
        assert_eq!(x.minus(&y), C64::new(4e-17, 0.0));
        assert_eq!(x.value() - y.value(), C64::new(0.0, 0.0));
        assert_eq!(x.neg().plus(&x), C64::new(0.0, 0.0));
    }

    fn real_root_chain() -> (ChainParams, CountingFunction) {
        let p = ChainParams::new(6, 1.2, -0.8, 0.3).unwrap();
        let cf = CountingFunction::new(&p, [0.21, 0.63, 1.07].map(Rapidity::real).to_vec()).unwrap();
        (p, cf)
    }

    #[test]
    fn dlog_a_is_the_derivative() {
        let (_, cf) = real_root_chain();
        let h = 1e-6;
        for nu in [C64::new(0.3, 0.1), C64::new(1.2, -0.4), C64::new(0.9, 0.0)] {
            let fd = (cf.log_a(&Rapidity::complex(nu + h)) - cf.log_a(&Rapidity::complex(nu - h))) / (2.0 * h);
            let d = cf.dlog_a(&Rapidity::complex(nu));
            assert!((fd - d).norm() < 1e-7 * d.norm().max(1.0), "{nu}: {fd} vs {d}");
        }
    }

    #[test]
    fn xi_hat_is_the_phase_of_a() {
        let (p, cf) = real_root_chain();
        let two_l = 2.0 * p.l as f64;
        let a0 = cf.a(&Rapidity::real(0.0));
        let many = cf.xi_hat_many(&[0.4, 1.1, 1.5]).unwrap();
        for (k, mu) in [0.4, 1.1, 1.5].into_iter().enumerate() {
            let a = cf.a(&Rapidity::real(mu));
            assert!((a.norm() - 1.0).abs() < 1e-12);
            let xi = cf.xi_hat(mu).unwrap();
            assert_eq!(xi, many[k]);
            let expect = a0 * C64::from_polar(1.0, two_l * xi);
            assert!((a - expect).norm() < 1e-12);
            // ξ̂′ = −(i/2L) 𝔞′/𝔞
            let d = (-C64::i() * cf.dlog_a(&Rapidity::real(mu)) / two_l).re;
            let h = 1e-6;
            let fd = (cf.xi_hat(mu + h).unwrap() - cf.xi_hat(mu - h).unwrap()) / (2.0 * h);
            assert!((fd - d).abs() < 1e-7);
        }
        assert!(exp_counting(C64::new(0.4, 0.0), &[0.21, 0.63, 1.07].map(|x| C64::new(x, 0.0)), &p).unwrap().norm() > 0.0);
    }

    proptest! {
        #[test]
        fn boundary_field_round_trip(h in -12.0f64..12.0, zeta in 0.3f64..2.5) {
            prop_assume!((h.abs() - zeta.sinh()).abs() > 1e-6);
            let b = BoundaryParam::from_field(h, zeta).unwrap();
            prop_assert!((b.field(zeta) - h).abs() < 1e-9 * h.abs().max(1.0));
        }

        #[test]
        fn modulus_conditions_match_critical_fields(h in -12.0f64..12.0, zeta in 0.3f64..2.5) {
            let (c1, c2) = critical_fields(zeta);
            prop_assume!((h.abs() - zeta.sinh()).abs() > 1e-6);
            prop_assume!((h.abs() - c1).abs() > 1e-6 && (h.abs() - c2).abs() > 1e-6);
            let p = BoundaryParam::from_field(h, zeta).unwrap().p;
            let q = (-zeta).exp();
            prop_assert_eq!((p * q).abs() < 1.0, h < c1 || h > c2);
            prop_assert_eq!((q / p).abs() < 1.0, h > -c1 || h < -c2);
        }
    }
}
