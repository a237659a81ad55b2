//! A quick consistency suite run by `xxz-overlap selftest`. Each check is
//! cheap (well under a second) and independent of the others.

use crate::bethe::{energy, lieb_equation_residual, solve_params};
use crate::ed;
use crate::model::ChainParams;
use crate::overlap::{cauchy_det_product_identity, overlap_normalized};
use crate::specialfns::{Nome, C64};
use crate::thermo::{functional_equation_residual, overlap_thermo, spin_reversal_image, QSeriesParams, Variant};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String), String>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Points of the additive golden-ratio sequence, mapped into (lo, hi).
fn spread(n: usize, seed: f64, lo: f64, hi: f64) -> Vec<f64> {
    const PHI: f64 = 0.618_033_988_749_894_9;
    (1..=n).map(|k| lo + (hi - lo) * (seed + k as f64 * PHI).fract()).collect()
}

pub fn run_all() -> Vec<CheckResult> {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    vec![
        check("Bethe energy equals ED ground energy", || {
            let p = ChainParams::new(8, 1.5, -1.0, 2.0).map_err(|e| s(&e))?;
            let (_, roots) = solve_params(&p, 1e-11).map_err(|e| s(&e))?;
            let e = energy(&roots, &p).map_err(|e| s(&e))?;
            let gs = ed::ground_state(&p).map_err(|e| s(&e))?;
            let d = (e - gs.energy).abs();
            Ok((d < 1e-8, format!("|ΔE| = {d:.2e}")))
        }),
        check("determinant overlap equals ED overlap", || {
            let p1 = ChainParams::new(8, 1.5, -1.0, 0.5).map_err(|e| s(&e))?;
            let p2 = p1.with_h_minus(-0.5);
            let (_, a) = solve_params(&p1, 1e-11).map_err(|e| s(&e))?;
            let (_, b) = solve_params(&p2, 1e-11).map_err(|e| s(&e))?;
            let fin = overlap_normalized(&a, &b, &p1, &p2).map_err(|e| s(&e))?;
            let exact = ed::ed_overlap(&p1, &p2).map_err(|e| s(&e))?;
            let d = (fin - exact).abs();
            Ok((d < 1e-7, format!("|Δs| = {d:.2e}")))
        }),
        check("elliptic Cauchy determinant identity", || {
            let nome = Nome::from_zeta(1.2).map_err(|e| s(&e))?;
            let mut worst: f64 = 0.0;
            for n in 1..=6 {
                let nu: Vec<C64> = spread(n, 0.1, 0.05, 1.5).into_iter().map(|x| C64::new(x, 0.0)).collect();
                let om: Vec<C64> = spread(n, 0.37, 0.05, 1.5).into_iter().map(|x| C64::new(x, 0.0)).collect();
                let (d, p) = cauchy_det_product_identity(&nu, &om, nome).map_err(|e| s(&e))?;
                worst = worst.max(((d - p) / p).norm());
            }
            Ok((worst < 1e-10, format!("max relative deviation {worst:.2e}")))
        }),
        check("𝔞₊ functional equations", || {
            let q = (-1.5f64).exp();
            let params = [
                (-0.9, 0.4, 1, Variant::RealRoots),
                (1.7, 6.0, -1, Variant::RealRoots),
                (-1.3, -0.4, 1, Variant::BrPlusPlus),
                (-1.6, -0.7, -1, Variant::BrMinusMinus),
                (-1.6, 6.0, -1, Variant::BrMinusSingle),
            ];
            let mut worst: f64 = 0.0;
            for (p1, p2, e, v) in params {
                let qp = QSeriesParams::new(q, p1, p2, e, v).map_err(|e| s(&e))?;
                for (r, t) in spread(12, 0.2, 0.0, 0.95).into_iter().zip(spread(12, 0.8, -3.1, 3.1)) {
                    worst = worst.max(functional_equation_residual(C64::from_polar(r, t), &qp).map_err(|e| s(&e))?);
                }
            }
            Ok((worst < 1e-12, format!("max residual {worst:.2e}")))
        }),
        check("thermodynamic overlap symmetries", || {
            let a = ChainParams::new(10, 1.5, -1.0, 2.0).map_err(|e| s(&e))?;
            let b = a.with_h_minus(0.0);
            let v = |x: &ChainParams, y: &ChainParams| overlap_thermo(x, y).map(|t| t.value).map_err(|e| s(&e));
            let s0 = v(&a, &b)?;
            let d_rev = (s0 - v(&spin_reversal_image(&a), &spin_reversal_image(&b))?).abs();
            let d_swap = (s0 - v(&b, &a)?).abs();
            Ok((d_rev < 1e-12 && d_swap < 1e-13, format!("reversal {d_rev:.1e}, swap {d_swap:.1e}")))
        }),
        check("density solves the Lieb equation", || {
            let mut worst: f64 = 0.0;
            for zeta in [1.2, 1.5, 1.8] {
                let nome = Nome::from_zeta(zeta).map_err(|e| s(&e))?;
                for lam in spread(10, 0.5, -1.5, 1.5) {
                    worst = worst.max(lieb_equation_residual(lam, nome, 256).map_err(|e| s(&e))?.abs());
                }
            }
            Ok((worst < 1e-9, format!("max residual {worst:.2e}")))
        }),
    ]
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for r in super::run_all() {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
