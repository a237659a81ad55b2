use super::{density_rho, BetheError, BetheRoots, BoundaryRootInfo};
use crate::linalg::solve_real;
use crate::model::{classify, ChainParams, CountingFunction, Rapidity, Regime, Side};
use crate::specialfns::{kernel_k, Nome, C64};
use std::f64::consts::{FRAC_PI_2, PI};

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Required bound on max |𝔞(λ_j) − 1|.
    pub tol: f64,
    pub max_newton: usize,
    pub max_boundary_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-11, max_newton: 200, max_boundary_sweeps: 400 }
    }
}

/// Minimum separation between consecutive real roots.
const COLLISION_GUARD: f64 = 1e-10;
/// Below this |ε| the boundary root is placed on its anchor.
const CLAMP_FLOOR: f64 = 1e-290;
/// A boundary root closer than this to the real axis has not formed: it
/// would merge with the real roots.
const AXIS_GUARD: f64 = 1e-3;

/// Solve the ground-state Bethe equations for the given regime.
///
/// Real roots carry the adjacent quantum numbers 1, 2, …; a boundary root,
/// when the regime has one, is obtained by alternating a Newton solve of
/// the real roots with the fixed-point update of its correction ε.
pub fn solve_ground_state(params: &ChainParams, regime: &Regime, tol: f64) -> Result<BetheRoots, BetheError> {
    let opts = SolverOptions { tol: tol.max(1e-13), ..SolverOptions::default() };
    solve_with(params, regime, &opts)
}

pub fn solve_with(params: &ChainParams, regime: &Regime, opts: &SolverOptions) -> Result<BetheRoots, BetheError> {
    let (frame, spin_reversed) = if regime.spin_reversed() {
        let rev = ChainParams { h_minus: -params.h_minus, h_plus: -params.h_plus, ..*params };
        (rev, true)
    } else {
        (*params, false)
    };
    let n_total = if spin_reversed { params.l - regime.n } else { regime.n };
    let nome = Nome::from_zeta(params.zeta)?;

    let (real_roots, boundary_root) = match regime.boundary_root_side {
        None => (newton_real(&frame, n_total, None, None, &nome, opts)?, None),
        Some(side) => {
            let (reals, br) = solve_with_boundary_root(&frame, n_total - 1, side, &nome, opts)?;
            (reals, Some(br))
        }
    };
    let quantum_numbers = (1..=real_roots.len() as i64).collect();
    let mut out = BetheRoots {
        real_roots,
        boundary_root,
        residual_max: f64::NAN,
        quantum_numbers,
        spin_reversed,
        near_edge: Vec::new(),
    };
    out.near_edge = out
        .real_roots
        .iter()
        .enumerate()
        .filter(|(_, &x)| x < 1e-6 || x > FRAC_PI_2 - 1e-6)
        .map(|(k, _)| k)
        .collect();
    out.residual_max = residual(&out, &frame)?;
    if !(out.residual_max < opts.tol) {
        return Err(BetheError::NoConvergence {
            reason: format!("final residual {:e} above tolerance {:e}", out.residual_max, opts.tol),
            trace: vec![out.residual_max],
        });
    }
    Ok(out)
}

/// Classify and solve in one call.
pub fn solve_params(params: &ChainParams, tol: f64) -> Result<(Regime, BetheRoots), BetheError> {
    let regime = classify(params)?;
    let roots = solve_ground_state(params, &regime, tol)?;
    Ok((regime, roots))
}

/// max |𝔞(λ_j) − 1| evaluated directly from the product form of 𝔞.
fn residual(roots: &BetheRoots, frame: &ChainParams) -> Result<f64, BetheError> {
    let cf = CountingFunction::new(frame, roots.rapidities())?;
    let mut worst = 0.0f64;
    for r in cf.roots.iter() {
        let d = (cf.a(r) - 1.0).norm();
        worst = if d.is_nan() { f64::NAN } else { worst.max(d) };
    }
    Ok(worst)
}

/// Quantile initialisation: λ_j solves ∫₀^λ ρ = j / (2(n+1)).
fn initial_guess(n: usize, nome: &Nome) -> Result<Vec<f64>, BetheError> {
    const GRID: usize = 1024;
    let h = FRAC_PI_2 / GRID as f64;
    let mut rho = Vec::with_capacity(GRID + 1);
    for k in 0..=GRID {
        rho.push(density_rho(k as f64 * h, *nome)?);
    }
    let mut cum = vec![0.0; GRID + 1];
    for k in 1..=GRID {
        cum[k] = cum[k - 1] + 0.5 * h * (rho[k - 1] + rho[k]);
    }
    let total = cum[GRID];
    Ok((1..=n)
        .map(|j| {
            let target = total * j as f64 / (n as f64 + 1.0);
            let k = cum.partition_point(|&c| c < target).clamp(1, GRID);
            let frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
            (k as f64 - 1.0 + frac) * h
        })
        .collect())
}

fn counting(frame: &ChainParams, reals: &[f64], extra: Option<Rapidity>) -> Result<CountingFunction, BetheError> {
    let mut roots: Vec<Rapidity> = reals.iter().map(|&x| Rapidity::real(x)).collect();
    roots.extend(extra);
    Ok(CountingFunction::new(frame, roots)?)
}

fn log_residuals(frame: &ChainParams, reals: &[f64], extra: Option<Rapidity>) -> Result<Vec<f64>, BetheError> {
    let cf = counting(frame, reals, extra)?;
    let xi = cf.xi_hat_many(reals)?;
    let l = frame.l as f64;
    Ok(xi.iter().enumerate().map(|(j, x)| l * x - PI * (j as f64 + 1.0)).collect())
}

fn check_configuration(reals: &[f64]) -> Result<(), BetheError> {
    for (k, &x) in reals.iter().enumerate() {
        if !(x > 0.0 && x < FRAC_PI_2) {
            return Err(BetheError::WrongRootCount(format!("root {k} = {x} left (0, π/2)")));
        }
        if k > 0 && x - reals[k - 1] < COLLISION_GUARD {
            return Err(BetheError::WrongRootCount(format!("roots {} and {k} collided", k - 1)));
        }
    }
    Ok(())
}

/// Damped Newton on L·ξ̂(λ_j) − π j = 0 for the real roots, with an optional
/// fixed extra (boundary) root.
fn newton_real(
    frame: &ChainParams,
    n: usize,
    extra: Option<Rapidity>,
    warm: Option<&[f64]>,
    nome: &Nome,
    opts: &SolverOptions,
) -> Result<Vec<f64>, BetheError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let zeta = frame.zeta;
    let mut lam = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => initial_guess(n, nome)?,
    };
    let mut f = log_residuals(frame, &lam, extra)?;
    let mut norm = max_abs(&f);
    let mut trace = vec![norm];
    let k0 = kernel_k(C64::new(0.0, 0.0), zeta)?.re;
    for _ in 0..opts.max_newton {
        let cf = counting(frame, &lam, extra)?;
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let dl = cf.dlog_a(&Rapidity::real(lam[j]));
            jac[j][j] = (dl / C64::new(0.0, 2.0)).re + PI * (k0 - kernel_k(C64::new(2.0 * lam[j], 0.0), zeta)?.re);
            for k in 0..n {
                if k != j {
                    let km = kernel_k(C64::new(lam[j] - lam[k], 0.0), zeta)?.re;
                    let kp = kernel_k(C64::new(lam[j] + lam[k], 0.0), zeta)?.re;
                    jac[j][k] = PI * (km - kp);
                }
            }
        }
        let step = solve_real(jac, f.clone()).ok_or_else(|| BetheError::NoConvergence {
            reason: "singular Bethe Jacobian".into(),
            trace: trace.clone(),
        })?;
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = lam.iter().zip(&step).map(|(x, s)| x - damping * s).collect();
            if check_configuration(&trial).is_ok() {
                if let Ok(ft) = log_residuals(frame, &trial, extra) {
                    let nt = max_abs(&ft);
                    if nt <= norm || nt < 1e-13 {
                        accepted = Some((trial, ft, nt));
                        break;
                    }
                }
            }
            damping *= 0.5;
        }
        let Some((trial, ft, nt)) = accepted else {
            // No decrease possible: accept if already at round-off level.
            if norm < 1e-11 {
                break;
            }
            return Err(BetheError::NoConvergence { reason: "line search failed".into(), trace });
        };
        let moved = lam.iter().zip(&trial).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        lam = trial;
        f = ft;
        norm = nt;
        trace.push(norm);
        if moved < 1e-15 || norm < 1e-14 {
            break;
        }
    }
    check_configuration(&lam)?;
    if norm > 1e-9 {
        return Err(BetheError::NoConvergence { reason: "Newton iteration stalled".into(), trace });
    }
    Ok(lam)
}

/// asinh for complex argument, accurate for tiny |w|.
fn asinh_small(w: C64) -> C64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        w * (1.0 - w2 / 6.0 + w2 * w2 * (3.0 / 40.0))
    } else {
        w.asinh()
    }
}

fn solve_with_boundary_root(
    frame: &ChainParams,
    n_real: usize,
    side: Side,
    nome: &Nome,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, BoundaryRootInfo), BetheError> {
    let anchor = frame.boundary(side)?.anchor(frame.zeta);
    let mut eps = C64::new(0.0, 0.0);
    let mut reals: Option<Vec<f64>> = None;
    let mut trace = Vec::new();
    for _ in 0..opts.max_boundary_sweeps {
        let br = Rapidity::anchored(anchor, C64::new(0.0, -1.0) * eps);
        let lam = newton_real(frame, n_real, Some(br), reals.as_deref(), nome, opts)?;
        let cf = counting(frame, &lam, Some(br))?;
        // 𝔞(λ_BR) = sin(λ_BR − A)·R = −i sinh(ε)·R = 1
        let log_r = cf.log_a_omitting(&br, Some(side));
        let next = asinh_small(C64::i() * (-log_r).exp());
        let change = (next - eps).norm();
        // Converged once the update is at round-off level, or has stopped
        // shrinking while already tiny.
        let stagnant = trace.last().is_some_and(|&prev| change >= prev) && change <= 1e-13 * next.norm();
        trace.push(change);
        reals = Some(lam);
        let done = change <= 1e-15 * next.norm() || stagnant || next.norm() < CLAMP_FLOOR;
        eps = next;
        let im = (anchor - C64::i() * eps).im;
        if !eps.norm().is_finite() || im * anchor.im <= 0.0 || im.abs() < AXIS_GUARD {
            return Err(BetheError::NoConvergence {
                reason: format!("boundary root left its half-plane (|ε| = {:.3e}, Im λ_BR = {im:.3e})", eps.norm()),
                trace,
            });
        }
        if done {
            let clamped = eps.norm() < CLAMP_FLOOR;
            if clamped {
                eps = C64::new(0.0, 0.0);
            }
            let br = Rapidity::anchored(anchor, C64::new(0.0, -1.0) * eps);
            let lam = newton_real(frame, n_real, Some(br), reals.as_deref(), nome, opts)?;
            return Ok((lam, BoundaryRootInfo { side, anchor, epsilon_corr: eps, clamped }));
        }
    }
    let tail = trace.split_off(trace.len().saturating_sub(8));
    Err(BetheError::NoConvergence { reason: "boundary-root fixed point did not settle".into(), trace: tail })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
