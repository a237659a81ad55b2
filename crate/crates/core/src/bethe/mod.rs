//! Ground-state Bethe roots, energies, the ground-state root density and
//! transfer-matrix eigenvalues.

mod solver;

pub use solver::{solve_ground_state, solve_params, solve_with, SolverOptions};

use crate::model::{ChainParams, CountingFunction, ModelError, Rapidity, Side};
use crate::specialfns::{theta, theta1_prime0, Nome, SpecialFnError, C64};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error("Bethe solver did not converge: {reason} (residual trace {trace:?})")]
    NoConvergence { reason: String, trace: Vec<f64> },
    #[error("wrong root configuration: {0}")]
    WrongRootCount(String),
    #[error("energy has imaginary part {0:e}")]
    RealityViolation(f64),
}

/// The boundary root λ_BR = A − iε next to the anchor A = −i(ζ/2 + ξ^σ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRootInfo {
    pub side: Side,
    pub anchor: C64,
    pub epsilon_corr: C64,
    /// Set when ε underflowed and the root was placed on its anchor.
    pub clamped: bool,
}

impl BoundaryRootInfo {
    pub fn rapidity(&self) -> Rapidity {
        Rapidity::anchored(self.anchor, C64::new(0.0, -1.0) * self.epsilon_corr)
    }

    pub fn value(&self) -> C64 {
        self.rapidity().value()
    }
}

/// A solved ground-state root set.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRoots {
    pub real_roots: Vec<f64>,
    pub boundary_root: Option<BoundaryRootInfo>,
    /// max_j |𝔞(λ_j) − 1| over all roots, from an independent evaluation of 𝔞.
    pub residual_max: f64,
    pub quantum_numbers: Vec<i64>,
    /// Roots describe the spin-reversed chain (fields negated); used for case B′.
    pub spin_reversed: bool,
    /// Indices of real roots within 1e−6 of 0 or π/2.
    pub near_edge: Vec<usize>,
}

impl BetheRoots {
    pub fn count(&self) -> usize {
        self.real_roots.len() + self.boundary_root.is_some() as usize
    }

    pub fn rapidities(&self) -> Vec<Rapidity> {
        let mut r: Vec<Rapidity> = self.real_roots.iter().map(|&x| Rapidity::real(x)).collect();
        if let Some(br) = &self.boundary_root {
            r.push(br.rapidity());
        }
        r
    }

    pub fn values(&self) -> Vec<C64> {
        self.rapidities().iter().map(|r| r.value()).collect()
    }

    /// The parameters of the chain the roots actually solve.
    pub fn frame(&self, params: &ChainParams) -> ChainParams {
        if self.spin_reversed {
            ChainParams { h_minus: -params.h_minus, h_plus: -params.h_plus, ..*params }
        } else {
            *params
        }
    }

    pub fn counting_function(&self, params: &ChainParams) -> Result<CountingFunction, ModelError> {
        CountingFunction::new(&self.frame(params), self.rapidities())
    }
}

/// E = h⁺ + h⁻ − Σ_j 4 sinh²ζ / (cosh ζ − cos 2λ_j).
///
/// Spin-reversed root sets are evaluated in their own frame; the spectrum is
/// invariant under the reversal.
pub fn energy(roots: &BetheRoots, params: &ChainParams) -> Result<f64, BetheError> {
    let e = energy_of(&roots.values(), &roots.frame(params));
    if e.im.abs() > 1e-8 {
        return Err(BetheError::RealityViolation(e.im));
    }
    Ok(e.re)
}

/// Energy of an arbitrary root set (spin reversal leaves it unchanged).
pub fn energy_of(roots: &[C64], params: &ChainParams) -> C64 {
    let z = params.zeta;
    let w = 4.0 * z.sinh().powi(2);
    let sum: C64 = roots.iter().map(|&l| w / (z.cosh() - (l * 2.0).cos())).sum();
    C64::new(params.h_plus + params.h_minus, 0.0) - sum
}

/// Ground-state root density ρ(λ) = (1/π) ϑ₁′(0)/ϑ₂(0) · ϑ₃(λ)/ϑ₄(λ).
pub fn density_rho(lambda: f64, nome: Nome) -> Result<f64, SpecialFnError> {
    let z = C64::new(lambda, 0.0);
    let zero = C64::new(0.0, 0.0);
    let pref = theta1_prime0(nome) / theta(2, zero, nome)?.re;
    Ok(pref * (theta(3, z, nome)? / theta(4, z, nome)?).re / PI)
}

/// ρ(λ) + ∫ K(λ−β)ρ(β)dβ − p′(λ)/π, with the integral over one period
/// done by the `points`-point trapezoid rule (spectrally accurate here).
pub fn lieb_equation_residual(lambda: f64, nome: Nome, points: usize) -> Result<f64, SpecialFnError> {
    let z = nome.zeta;
    let h = PI / points as f64;
    let mut conv = 0.0;
    for k in 0..points {
        let beta = -PI / 2.0 + k as f64 * h;
        let kern = (2.0 * z).sinh() / (PI * ((2.0 * z).cosh() - (2.0 * (lambda - beta)).cos()));
        conv += kern * density_rho(beta, nome)? * h;
    }
    let p_prime = 2.0 * z.sinh() / (z.cosh() - (2.0 * lambda).cos());
    Ok(density_rho(lambda, nome)? + conv - p_prime / PI)
}

/// Transfer-matrix eigenvalue τ(ν | {λ}) in the homogeneous limit.
pub fn transfer_eigenvalue(nu: C64, roots: &[Rapidity], params: &ChainParams) -> Result<C64, BetheError> {
    let cf = CountingFunction::new(params, roots.to_vec())?;
    let z = params.zeta;
    let l = params.l as i32;
    let i = C64::i();
    let s2 = (nu * 2.0).sin();
    if s2.norm() < 1e-12 {
        return Err(SpecialFnError::Pole { function: "τ", threshold: 1e-12 }.into());
    }
    let n = Rapidity::complex(nu);
    let [ap, am] = cf.anchors;
    let bold_plus = (nu - i * (z / 2.0)).sin().powi(2 * l) * n.minus(&ap).sin() * n.minus(&am).sin();
    let bold_minus = (nu + i * (z / 2.0)).sin().powi(2 * l) * n.neg().minus(&ap).sin() * n.neg().minus(&am).sin();
    let mut prod_up = C64::new(1.0, 0.0);
    let mut prod_dn = C64::new(1.0, 0.0);
    for r in roots {
        let denom = n.plus(r).sin() * n.minus(r).sin();
        prod_up *= (n.plus(r) + i * z).sin() * (n.minus(r) + i * z).sin() / denom;
        prod_dn *= (n.plus(r) - i * z).sin() * (n.minus(r) - i * z).sin() / denom;
    }
    Ok(bold_plus * ((nu * 2.0 - i * z).sin() / s2) * prod_up + bold_minus * ((nu * 2.0 + i * z).sin() / s2) * prod_dn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ed::ground_state;
    use crate::model::{classify, ModelError};
    use std::f64::consts::FRAC_PI_2;

    fn p(l: usize, zeta: f64, hm: f64, hp: f64) -> ChainParams {
        ChainParams::new(l, zeta, hm, hp).unwrap()
    }

    const CHAINS: [(usize, f64, f64, f64); 8] = [
        (8, 1.5, -1.0, 2.0),
        (8, 1.5, -1.0, 0.5),
        (8, 1.5, 0.5, -1.0),
        (10, 1.5, -0.5, 6.5),
        (10, 1.2, 3.8, 0.2),
        (9, 1.8, 0.0, -1.0),
        (9, 1.8, 1.0, -0.5),
        (7, 1.2, 0.1, -0.1 - 0.3),
    ];

    #[test]
    fn bethe_energy_is_the_ed_ground_energy() {
        for (l, z, hm, hp) in CHAINS {
            let params = p(l, z, hm, hp);
            let (regime, roots) = solve_params(&params, 1e-11).unwrap();
            let e = energy(&roots, &params).unwrap();
            let gs = ground_state(&params).unwrap();
            assert!((e - gs.energy).abs() < 1e-8, "{params:?}: {e} vs {}", gs.energy);
            let n = if roots.spin_reversed { l - regime.n } else { regime.n };
            assert_eq!(roots.count(), n);
            assert!(roots.residual_max < 1e-11);
            assert!(roots.real_roots.windows(2).all(|w| w[0] < w[1]));
            assert!(roots.real_roots.iter().all(|&x| x > 0.0 && x < FRAC_PI_2));
            assert_eq!(roots.boundary_root.map(|b| b.side), regime.boundary_root_side);
        }
    }

    #[test]
    fn boundary_root_correction_decays_with_length() {
        let eps: Vec<f64> = [6, 8, 10, 12, 14]
            .into_iter()
            .map(|l| {
                let (_, r) = solve_params(&p(l, 1.5, -1.0, 0.5), 1e-11).unwrap();
                r.boundary_root.unwrap().epsilon_corr.norm()
            })
            .collect();
        // geometric decay: ratios settle to a constant rate below 0.6
        let ratios: Vec<f64> = eps.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|&r| r < 0.6), "{eps:?}");
        assert!(ratios.windows(2).all(|w| (w[1] - w[0]).abs() < 0.05), "{ratios:?}");
    }

    #[test]
    fn gapless_and_ambiguous_points_are_refused() {
        let err = solve_params(&ChainParams { l: 8, zeta: 1.5, h_minus: 1.5, h_plus: 1.6 }, 1e-11).unwrap_err();
        assert!(matches!(err, BetheError::Model(ModelError::Gapless(_))));
        let err = solve_params(&ChainParams { l: 9, zeta: 1.5, h_minus: 0.4, h_plus: -0.4 }, 1e-11).unwrap_err();
        assert_eq!(err, BetheError::Model(ModelError::AmbiguousSector));
    }

    #[test]
    fn density_matches_its_fourier_series() {
        for zeta in [0.8, 1.2, 1.5, 1.8] {
            let nome = Nome::from_zeta(zeta).unwrap();
            for lam in [0.0, 0.3, 0.9, 1.4, FRAC_PI_2] {
                let series: f64 = 1.0 + 2.0 * (1..400).map(|k| (2.0 * k as f64 * lam).cos() / (k as f64 * zeta).cosh()).sum::<f64>();
                let rho = density_rho(lam, nome).unwrap();
                assert!((rho - series / PI).abs() < 1e-13, "ζ={zeta} λ={lam}");
            }
        }
    }

    #[test]
    fn density_normalisation() {
        // ∫ over the full period is 1, over the half period 1/2
        for zeta in [1.2, 1.5, 1.8] {
            let nome = Nome::from_zeta(zeta).unwrap();
            let m = 512;
            let h = PI / m as f64;
            let full: f64 = (0..m).map(|k| density_rho(-FRAC_PI_2 + k as f64 * h, nome).unwrap() * h).sum();
            assert!((full - 1.0).abs() < 1e-12, "{full}");
            let half = (0..=m / 2)
                .map(|k| {
                    let w = if k == 0 || k == m / 2 { 0.5 } else { 1.0 };
                    w * density_rho(k as f64 * h, nome).unwrap() * h
                })
                .sum::<f64>();
            assert!((half - 0.5).abs() < 1e-12, "{half}");
        }
    }

    #[test]
    fn density_solves_the_lieb_equation() {
        for zeta in [1.2, 1.5, 1.8] {
            let nome = Nome::from_zeta(zeta).unwrap();
            for lam in [-1.2, 0.0, 0.5, 1.1, 1.5] {
                assert!(lieb_equation_residual(lam, nome, 256).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn transfer_eigenvalue_is_even_and_regular_at_roots() {
        let params = p(8, 1.5, -1.0, 2.0);
        let (_, roots) = solve_params(&params, 1e-11).unwrap();
        let rs = roots.rapidities();
        for nu in [C64::new(0.37, 0.2), C64::new(1.1, -0.3)] {
            let a = transfer_eigenvalue(nu, &rs, &params).unwrap();
            let b = transfer_eigenvalue(-nu, &rs, &params).unwrap();
            assert!((a - b).norm() < 1e-10 * a.norm(), "{a} vs {b}");
        }
        // the apparent poles at the roots cancel: τ stays bounded next to each
        let x = roots.real_roots[1];
        let near = transfer_eigenvalue(C64::new(x + 1e-7, 0.0), &rs, &params).unwrap();
        let far = transfer_eigenvalue(C64::new(x + 1e-3, 0.0), &rs, &params).unwrap();
        assert!((near - far).norm() < 1e-2 * far.norm());
        assert!(transfer_eigenvalue(C64::new(0.0, 0.0), &rs, &params).is_err());
    }

    #[test]
    fn spin_reversed_roots_use_their_own_frame() {
        let params = p(9, 1.8, 1.0, -0.5);
        let (regime, roots) = solve_params(&params, 1e-11).unwrap();
        assert!(regime.spin_reversed() && roots.spin_reversed);
        let frame = roots.frame(&params);
        assert_eq!((frame.h_minus, frame.h_plus), (-1.0, 0.5));
        assert_eq!(classify(&frame).unwrap().n, roots.count());
    }
}
