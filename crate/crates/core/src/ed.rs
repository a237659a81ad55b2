//! Exact diagonalisation of the open chain, sector by sector.
//!
//! Basis states are bit patterns over sites 0..L, bit `i` set meaning the
//! spin on site `i + 1` points down. Site 0 carries h⁻, site L − 1 carries h⁺.

use crate::model::ChainParams;
use faer::{Mat, Side as FaerSide};
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_SIZE_CAP: usize = 16;
/// C(12, 6) = 924: every sector up to L = 12 is diagonalised densely.
pub const DEFAULT_DENSE_LIMIT: usize = 1000;
/// Gap between the two lowest global levels below which the ground state is
/// considered degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdError {
    #[error("L = {l} exceeds the exact-diagonalisation cap {cap}")]
    SizeCap { l: usize, cap: usize },
    #[error("n_down = {n_down} is not a valid sector for L = {l}")]
    BadSector { l: usize, n_down: usize },
    #[error("ground state is degenerate: lowest levels {e0} and {e1} (sectors {s0}, {s1})")]
    DegenerateGroundState { e0: f64, e1: f64, s0: usize, s1: usize },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("chains of different length: {0} vs {1}")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    pub l: usize,
    pub n_down: usize,
    pub states: Vec<u32>,
}

impl SectorBasis {
    pub fn new(l: usize, n_down: usize) -> Result<Self, EdError> {
        if n_down > l || l > 31 {
            return Err(EdError::BadSector { l, n_down });
        }
        let states = (0u32..1u32 << l).filter(|s| s.count_ones() as usize == n_down).collect();
        Ok(SectorBasis { l, n_down, states })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, state: u32) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStateVector {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub sector: usize,
    /// Smallest level in any other sector, or the second level in the same sector.
    pub next_level: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdConfig {
    pub size_cap: usize,
    /// Blocks up to this dimension use a dense eigensolver; larger ones use
    /// Lanczos with full reorthogonalisation.
    pub dense_limit: usize,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig { size_cap: DEFAULT_SIZE_CAP, dense_limit: DEFAULT_DENSE_LIMIT }
    }
}

fn sz(state: u32, site: usize) -> f64 {
    if state >> site & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Diagonal matrix element of H on a basis state.
pub fn diagonal_energy(params: &ChainParams, state: u32) -> f64 {
    let l = params.l;
    let delta = params.delta();
    let bulk: f64 = (0..l - 1).map(|i| delta * (sz(state, i) * sz(state, i + 1) - 1.0)).sum();
    bulk + params.h_minus * sz(state, 0) + params.h_plus * sz(state, l - 1)
}

fn check_cap(params: &ChainParams, cfg: &EdConfig) -> Result<(), EdError> {
    if params.l > cfg.size_cap {
        return Err(EdError::SizeCap { l: params.l, cap: cfg.size_cap });
    }
    Ok(())
}

/// Sparse form of one sector block: the diagonal plus the hopping pairs
/// (each pair carries the matrix element 2).
#[derive(Debug, Clone)]
pub struct SectorOperator {
    pub basis: SectorBasis,
    pub diag: Vec<f64>,
    pub hops: Vec<(usize, usize)>,
}

impl SectorOperator {
    pub fn new(params: &ChainParams, n_down: usize) -> Result<Self, EdError> {
        let basis = SectorBasis::new(params.l, n_down)?;
        let diag = basis.states.iter().map(|&s| diagonal_energy(params, s)).collect();
        let mut hops = Vec::new();
        for (a, &s) in basis.states.iter().enumerate() {
            for i in 0..params.l - 1 {
                let pair = (s >> i) & 0b11;
                if pair == 0b01 {
                    let b = basis.index_of(s ^ (0b11 << i)).expect("hopping conserves the sector");
                    hops.push((a, b));
                }
            }
        }
        Ok(SectorOperator { basis, diag, hops })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for ((o, d), x) in out.iter_mut().zip(&self.diag).zip(v) {
            *o = d * x;
        }
        for &(a, b) in &self.hops {
            out[a] += 2.0 * v[b];
            out[b] += 2.0 * v[a];
        }
    }

    pub fn dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut h = Mat::<f64>::zeros(n, n);
        for (a, &d) in self.diag.iter().enumerate() {
            h[(a, a)] = d;
        }
        for &(a, b) in &self.hops {
            h[(a, b)] = 2.0;
            h[(b, a)] = 2.0;
        }
        h
    }
}

pub fn build_hamiltonian_block(params: &ChainParams, n_down: usize) -> Result<Mat<f64>, EdError> {
    build_block_with(params, n_down, &EdConfig::default()).map(|(m, _)| m)
}

fn build_block_with(params: &ChainParams, n_down: usize, cfg: &EdConfig) -> Result<(Mat<f64>, SectorBasis), EdError> {
    check_cap(params, cfg)?;
    let op = SectorOperator::new(params, n_down)?;
    Ok((op.dense(), op.basis))
}

/// Lowest two levels of a sector and, if requested, the ground vector.
struct SectorLevels {
    e0: f64,
    e1: f64,
    vector: Option<Vec<f64>>,
}

fn eig_err(e: impl std::fmt::Debug) -> EdError {
    EdError::Eigensolver(format!("{e:?}"))
}

fn dense_levels(op: &SectorOperator, want_vector: bool) -> Result<SectorLevels, EdError> {
    let h = op.dense();
    if want_vector {
        let evd = h.self_adjoint_eigen(FaerSide::Lower).map_err(eig_err)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let e1 = if s.nrows() > 1 { s[1] } else { f64::INFINITY };
        Ok(SectorLevels { e0: s[0], e1, vector: Some((0..u.nrows()).map(|i| u[(i, 0)]).collect()) })
    } else {
        let ev = h.self_adjoint_eigenvalues(FaerSide::Lower).map_err(eig_err)?;
        Ok(SectorLevels { e0: ev[0], e1: ev.get(1).copied().unwrap_or(f64::INFINITY), vector: None })
    }
}

/// Lanczos with full reorthogonalisation, run until the two lowest Ritz
/// values have residuals below `tol`. The start vector is fixed, so the
/// result is deterministic.
fn lanczos_levels(op: &SectorOperator, tol: f64) -> Result<SectorLevels, EdError> {
    let n = op.dim();
    let max_k = n.min(600);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(max_k);
    let mut alpha = Vec::with_capacity(max_k);
    let mut beta: Vec<f64> = Vec::with_capacity(max_k);
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7548776662).sin()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    loop {
        op.apply(&v, &mut w);
        let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        q.push(v.clone());
        alpha.push(a);
        // Two passes of Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for qi in &q {
                let c: f64 = w.iter().zip(qi).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = q.len();
        let exhausted = b < 1e-13 || k == max_k;
        if k % 8 == 0 || exhausted {
            let t = Mat::<f64>::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let evd = t.self_adjoint_eigen(FaerSide::Lower).map_err(eig_err)?;
            let s = evd.S().column_vector();
            let u = evd.U();
            let scale = s[0].abs().max(1.0);
            let converged = (0..k.min(2)).all(|r| (b * u[(k - 1, r)]).abs() < tol * scale);
            if converged || exhausted {
                if !converged && k < n {
                    return Err(EdError::Eigensolver(format!("Lanczos not converged after {k} steps")));
                }
                let mut vec0 = vec![0.0; n];
                for (i, qi) in q.iter().enumerate() {
                    let c = u[(i, 0)];
                    vec0.iter_mut().zip(qi).for_each(|(x, y)| *x += c * y);
                }
                let nv = vec0.iter().map(|x| x * x).sum::<f64>().sqrt();
                vec0.iter_mut().for_each(|x| *x /= nv);
                let e1 = if k > 1 { s[1] } else { f64::INFINITY };
                return Ok(SectorLevels { e0: s[0], e1, vector: Some(vec0) });
            }
        }
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
}

fn sector_levels(params: &ChainParams, n_down: usize, cfg: &EdConfig, want_vector: bool) -> Result<SectorLevels, EdError> {
    check_cap(params, cfg)?;
    let op = SectorOperator::new(params, n_down)?;
    if op.dim() <= cfg.dense_limit {
        dense_levels(&op, want_vector)
    } else {
        lanczos_levels(&op, 1e-13)
    }
}

/// Ground state of one sector with its energy and unit eigenvector.
pub fn sector_ground_state(params: &ChainParams, n_down: usize) -> Result<GroundStateVector, EdError> {
    sector_ground_state_with(params, n_down, &EdConfig::default())
}

pub fn sector_ground_state_with(params: &ChainParams, n_down: usize, cfg: &EdConfig) -> Result<GroundStateVector, EdError> {
    let lv = sector_levels(params, n_down, cfg, true)?;
    Ok(GroundStateVector { energy: lv.e0, vector: lv.vector.expect("vector requested"), sector: n_down, next_level: lv.e1 })
}

pub fn ground_state(params: &ChainParams) -> Result<GroundStateVector, EdError> {
    ground_state_with(params, &EdConfig::default())
}

/// Global ground state over all magnetisation sectors.
pub fn ground_state_with(params: &ChainParams, cfg: &EdConfig) -> Result<GroundStateVector, EdError> {
    check_cap(params, cfg)?;
    let levels: Vec<(usize, SectorLevels)> = (0..=params.l)
        .into_par_iter()
        .map(|n| sector_levels(params, n, cfg, false).map(|lv| (n, lv)))
        .collect::<Result<_, _>>()?;
    let (best_n, best) = levels.iter().min_by(|a, b| a.1.e0.total_cmp(&b.1.e0)).expect("at least one sector");
    let (mut runner_up, mut runner_sector) = (best.e1, *best_n);
    for (n, lv) in &levels {
        if n != best_n && lv.e0 < runner_up {
            runner_up = lv.e0;
            runner_sector = *n;
        }
    }
    if runner_up - best.e0 < DEGENERACY_TOL {
        return Err(EdError::DegenerateGroundState { e0: best.e0, e1: runner_up, s0: *best_n, s1: runner_sector });
    }
    let vector = match &best.vector {
        Some(v) => v.clone(),
        None => sector_levels(params, *best_n, cfg, true)?.vector.expect("vector requested"),
    };
    Ok(GroundStateVector { energy: best.e0, vector, sector: *best_n, next_level: runner_up })
}

/// (v₁·v₂)² for two unit ground-state vectors; 0 across sectors.
pub fn overlap_of(a: &GroundStateVector, b: &GroundStateVector) -> f64 {
    if a.sector != b.sector || a.vector.len() != b.vector.len() {
        return 0.0;
    }
    let dot: f64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x * y).sum();
    let n1: f64 = a.vector.iter().map(|x| x * x).sum();
    let n2: f64 = b.vector.iter().map(|x| x * x).sum();
    dot * dot / (n1 * n2)
}

pub fn ed_overlap(params1: &ChainParams, params2: &ChainParams) -> Result<f64, EdError> {
    if params1.l != params2.l {
        return Err(EdError::LengthMismatch(params1.l, params2.l));
    }
    let a = ground_state(params1)?;
    let b = ground_state(params2)?;
    Ok(overlap_of(&a, &b))
}

/// ‖Hv − Ev‖ for a sector ground state, recomputed from a fresh block.
pub fn residual_norm(params: &ChainParams, gs: &GroundStateVector) -> Result<f64, EdError> {
    let h = build_hamiltonian_block(params, gs.sector)?;
    let n = gs.vector.len();
    let mut acc = 0.0;
    for i in 0..n {
        let hv: f64 = (0..n).map(|j| h[(i, j)] * gs.vector[j]).sum();
        acc += (hv - gs.energy * gs.vector[i]).powi(2);
    }
    Ok(acc.sqrt())
}
