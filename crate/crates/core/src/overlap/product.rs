use super::{check_pair, real_part_checked, same_sector, OverlapError};
use crate::bethe::{transfer_eigenvalue, BetheRoots};
use crate::model::{ln_sin, ChainParams, CountingFunction, Rapidity, Side};
use crate::specialfns::{varphi, Nome, C64};

/// log(e^x − 1), accurate whether e^x is tiny, moderate or huge.
fn ln_exp_minus_one(x: C64) -> C64 {
    if x.re > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        (x.exp() - 1.0).ln()
    }
}

trait Ln1p {
    fn ln_1p(self) -> C64;
}

impl Ln1p for C64 {
    fn ln_1p(self) -> C64 {
        if self.norm() < 1e-8 {
            self - self * self / 2.0
        } else {
            (self + 1.0).ln()
        }
    }
}

/// log φ(ν) with φ(ν) = ∏ sin(ν−λₖ)sin(ν+λₖ) / sin(ν−μₖ)sin(ν+μₖ).
fn ln_phi(nu: &Rapidity, lam: &[Rapidity], mu: &[Rapidity], skip_lam: Option<usize>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (k, l) in lam.iter().enumerate() {
        if Some(k) != skip_lam {
            acc += ln_sin(nu.minus(l)) + ln_sin(nu.plus(l));
        }
    }
    for m in mu {
        acc -= ln_sin(nu.minus(m)) + ln_sin(nu.plus(m));
    }
    acc
}

/// χ(λⱼ) = τ₂(λⱼ|{μ}) / τ₁(λⱼ|{λ}) at a root of the first set, in the form
/// obtained after using 𝔞₁(λⱼ) = 1:
/// φ′(λⱼ)/𝔞₁′(λⱼ) · [𝔞₂(λⱼ|{μ}) − 1] · sin(λⱼ + A₂⁻)/sin(λⱼ + A₁⁻) / φ(λⱼ − iζ).
///
/// Swapping the roles of the two sets (and frames) gives 1/χ(μⱼ).
pub fn chi_at_root(j: usize, lam: &[Rapidity], mu: &[Rapidity], f1: &ChainParams, f2: &ChainParams) -> Result<C64, OverlapError> {
    let u = lam[j];
    let cf1 = CountingFunction::new(f1, lam.to_vec())?;
    let cf2 = CountingFunction::new(f2, mu.to_vec())?;
    // φ′(λⱼ): the vanishing factor sin(u − λⱼ) is replaced by its derivative, and
    // sin(u + λⱼ) = sin 2λⱼ is kept.
    let ln_phi_prime = ln_phi(&u, lam, mu, Some(j)) + ln_sin(u.plus(&u));
    let ln_a1_prime = cf1.log_a(&u) + cf1.dlog_a(&u).ln();
    let ln_a2_m1 = ln_exp_minus_one(cf2.log_a(&u));
    let ln_bdry = ln_sin(u.plus(&cf2.anchor(Side::Minus))) - ln_sin(u.plus(&cf1.anchor(Side::Minus)));
    let shifted = u.shifted(C64::new(0.0, -f1.zeta));
    let ln_phi_shift = ln_phi(&shifted, lam, mu, None);
    Ok((ln_phi_prime - ln_a1_prime + ln_a2_m1 + ln_bdry - ln_phi_shift).exp())
}

/// χ(u) straight from its definition as a ratio of transfer-matrix eigenvalues.
pub fn chi_general(u: C64, lam: &[Rapidity], mu: &[Rapidity], f1: &ChainParams, f2: &ChainParams) -> Result<C64, OverlapError> {
    Ok(transfer_eigenvalue(u, mu, f2)? / transfer_eigenvalue(u, lam, f1)?)
}

/// log of ∏ᵢⱼ φ(λᵢ+λⱼ)φ(λᵢ−λⱼ)/(φ(λᵢ+μⱼ)φ(λᵢ−μⱼ)) · (λ ↔ μ) with φ = ϑ₁/sin.
pub fn varphi_products(lam: &[Rapidity], mu: &[Rapidity], nome: Nome) -> C64 {
    let lv = |a: &Rapidity, b: &Rapidity| varphi(a.plus(b), nome).ln() + varphi(a.minus(b), nome).ln();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..lam.len() {
        for j in 0..lam.len() {
            acc += lv(&lam[i], &lam[j]) - lv(&lam[i], &mu[j]);
            acc += lv(&mu[i], &mu[j]) - lv(&mu[i], &lam[j]);
        }
    }
    acc
}

/// Product approximation of S, exact up to corrections exponentially small in L.
pub fn overlap_product_form(lambda: &BetheRoots, mu: &BetheRoots, p1: &ChainParams, p2: &ChainParams) -> Result<f64, OverlapError> {
    check_pair(lambda, mu, p1, p2)?;
    if !same_sector(lambda, mu) {
        return Ok(0.0);
    }
    let (f1, f2) = (lambda.frame(p1), mu.frame(p2));
    let (lam, mus) = (lambda.rapidities(), mu.rapidities());
    if f1 == f2 && lam == mus {
        return Ok(1.0);
    }
    let nome = Nome::from_zeta(p1.zeta)?;
    let mut log_s = varphi_products(&lam, &mus, nome);
    for i in 0..lam.len() {
        log_s += chi_at_root(i, &lam, &mus, &f1, &f2)?.ln();
        log_s += chi_at_root(i, &mus, &lam, &f2, &f1)?.ln();
    }
    real_part_checked(log_s.exp())
}

/// Both sides of the pole identity
/// Σₐ 2π[K(x−λₐ) − K(x+λₐ)]/φ′(λₐ) = i[1/φ(x+iζ) − 1/φ(x−iζ)],
/// valid for any two sets of N distinct points.
pub fn pole_identity_sides(x: C64, lam: &[Rapidity], mu: &[Rapidity], zeta: f64) -> (C64, C64) {
    let xr = Rapidity::complex(x);
    let mut lhs = C64::new(0.0, 0.0);
    for (a, l) in lam.iter().enumerate() {
        let phi_prime = (ln_phi(l, lam, mu, Some(a)) + ln_sin(l.plus(l))).exp();
        let kern = super::k_raw(xr.minus(l), zeta) - super::k_raw(xr.plus(l), zeta);
        lhs += kern * (2.0 * std::f64::consts::PI) / phi_prime;
    }
    let up = ln_phi(&xr.shifted(C64::new(0.0, zeta)), lam, mu, None).exp();
    let dn = ln_phi(&xr.shifted(C64::new(0.0, -zeta)), lam, mu, None).exp();
    (lhs, C64::i() * (1.0 / up - 1.0 / dn))
}
