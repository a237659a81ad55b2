//! Evaluation of all overlap estimators at one parameter point, plus the
//! CSV/JSON row format shared by the command-line tools.

use crate::bethe::{solve_params, BetheError, BetheRoots};
use crate::ed::{self, EdConfig, EdError};
use crate::model::{ChainParams, ModelError, Regime};
use crate::overlap::{overlap_normalized, overlap_product_form, OverlapError};
use crate::thermo::{overlap_thermo, ThermoError};
use serde::Serialize;
use std::io::Write;
use std::time::Instant;

pub const SCHEMA_LINE: &str = "# xxz-overlap v1";
pub const COLUMNS: [&str; 13] = [
    "L",
    "zeta",
    "h_plus",
    "h1_minus",
    "h2_minus",
    "s_ed",
    "s_finite",
    "s_product",
    "s_thermo",
    "case_path",
    "residual_max",
    "wall_time_ms",
    "error",
];

/// One point of a sweep: a chain length and the three boundary fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub l: usize,
    pub zeta: f64,
    pub h_plus: f64,
    pub h1_minus: f64,
    pub h2_minus: f64,
}

impl Point {
    pub fn chains(&self) -> Result<(ChainParams, ChainParams), ModelError> {
        let p1 = ChainParams::new(self.l, self.zeta, self.h1_minus, self.h_plus)?;
        Ok((p1, p1.with_h_minus(self.h2_minus)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Estimators {
    pub ed: bool,
    pub finite: bool,
    pub product: bool,
    pub thermo: bool,
}

impl Default for Estimators {
    fn default() -> Self {
        Estimators { ed: true, finite: true, product: true, thermo: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub estimators: Estimators,
    pub tol: f64,
    pub ed: EdConfig,
    /// Record wall-clock time per row; off gives byte-reproducible output.
    pub timing: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { estimators: Estimators::default(), tol: 1e-11, ed: EdConfig::default(), timing: true }
    }
}

/// Failure classes, ordered by how they map onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    /// Any estimator failed numerically.
    Solver,
    /// The configuration is gapless or sits on a regime boundary.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    #[serde(rename = "L")]
    pub l: usize,
    pub zeta: f64,
    pub h_plus: f64,
    pub h1_minus: f64,
    pub h2_minus: f64,
    pub s_ed: Option<f64>,
    pub s_finite: Option<f64>,
    pub s_product: Option<f64>,
    pub s_thermo: Option<f64>,
    pub case_path: String,
    pub residual_max: Option<f64>,
    pub wall_time_ms: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub failure: Option<FailureKind>,
}

impl ResultRow {
    fn empty(p: &Point) -> Self {
        ResultRow {
            l: p.l,
            zeta: p.zeta,
            h_plus: p.h_plus,
            h1_minus: p.h1_minus,
            h2_minus: p.h2_minus,
            s_ed: None,
            s_finite: None,
            s_product: None,
            s_thermo: None,
            case_path: String::new(),
            residual_max: None,
            wall_time_ms: None,
            error: None,
            failure: None,
        }
    }

    fn fail(&mut self, what: &str, msg: impl std::fmt::Display, kind: FailureKind) {
        let line = format!("{what}: {msg}");
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {line}"),
            None => line,
        });
        self.failure = self.failure.max(Some(kind));
    }

    /// Cells in [`COLUMNS`] order.
    pub fn cells(&self) -> Vec<String> {
        vec![
            self.l.to_string(),
            fmt_f64(self.zeta),
            fmt_f64(self.h_plus),
            fmt_f64(self.h1_minus),
            fmt_f64(self.h2_minus),
            fmt_opt(self.s_ed),
            fmt_opt(self.s_finite),
            fmt_opt(self.s_product),
            fmt_opt(self.s_thermo),
            self.case_path.clone(),
            fmt_opt(self.residual_max),
            fmt_opt(self.wall_time_ms),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// 17 significant digits, so every f64 round-trips.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn model_kind(e: &ModelError) -> FailureKind {
    match e {
        ModelError::InvalidParams(_) | ModelError::Special(_) => FailureKind::Solver,
        _ => FailureKind::Unsupported,
    }
}

fn bethe_kind(e: &BetheError) -> FailureKind {
    match e {
        BetheError::Model(m) => model_kind(m),
        _ => FailureKind::Solver,
    }
}

fn overlap_kind(e: &OverlapError) -> FailureKind {
    match e {
        OverlapError::Model(m) => model_kind(m),
        OverlapError::Bethe(b) => bethe_kind(b),
        _ => FailureKind::Solver,
    }
}

fn thermo_kind(e: &ThermoError) -> FailureKind {
    match e {
        ThermoError::Model(m) => model_kind(m),
        ThermoError::Special(_) => FailureKind::Solver,
        _ => FailureKind::Unsupported,
    }
}

/// Short tag such as `A+`, `B`, `C-` or `A'`.
pub fn regime_tag(r: &Regime) -> String {
    let side = r.boundary_root_side.map(|s| s.symbol()).unwrap_or("");
    format!("{}{side}", r.case_label.name())
}

type Solved = (Regime, BetheRoots);

fn solve_pair(p1: &ChainParams, p2: &ChainParams, tol: f64) -> Result<(Solved, Solved), BetheError> {
    Ok((solve_params(p1, tol)?, solve_params(p2, tol)?))
}

/// Runs the requested estimators at one point. Failures of individual
/// estimators are recorded in the row instead of aborting it.
pub fn evaluate(point: &Point, opts: &EvalOptions) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow::empty(point);
    let est = opts.estimators;
    let (p1, p2) = match point.chains() {
        Ok(c) => c,
        Err(e) => {
            row.fail("params", &e, FailureKind::Solver);
            return row;
        }
    };
    let mut tags = Vec::new();

    if est.finite || est.product {
        match solve_pair(&p1, &p2, opts.tol) {
            Ok(((r1, a), (r2, b))) => {
                tags.push(format!("{}/{}", regime_tag(&r1), regime_tag(&r2)));
                row.residual_max = Some(a.residual_max.max(b.residual_max));
                if est.finite {
                    match overlap_normalized(&a, &b, &p1, &p2) {
                        Ok(s) => row.s_finite = Some(s),
                        Err(e) => row.fail("finite", &e, overlap_kind(&e)),
                    }
                }
                if est.product {
                    match overlap_product_form(&a, &b, &p1, &p2) {
                        Ok(s) => row.s_product = Some(s),
                        Err(e) => row.fail("product", &e, overlap_kind(&e)),
                    }
                }
            }
            Err(e) => row.fail("bethe", &e, bethe_kind(&e)),
        }
    }

    if est.thermo {
        match overlap_thermo(&p1, &p2) {
            Ok(t) => {
                tags.push(t.case_path.name().to_string());
                row.s_thermo = Some(t.value);
            }
            Err(e) => row.fail("thermo", &e, thermo_kind(&e)),
        }
    }

    if est.ed && point.l <= opts.ed.size_cap {
        let ed_pair = ed::ground_state_with(&p1, &opts.ed).and_then(|a| Ok((a, ed::ground_state_with(&p2, &opts.ed)?)));
        match ed_pair {
            Ok((a, b)) => row.s_ed = Some(ed::overlap_of(&a, &b)),
            Err(e @ EdError::DegenerateGroundState { .. }) => row.fail("ed", &e, FailureKind::Unsupported),
            Err(e) => row.fail("ed", &e, FailureKind::Solver),
        }
    }

    row.case_path = tags.join(";");
    if opts.timing {
        row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// Evaluates every point in parallel; rows come back in input order.
pub fn evaluate_all(points: &[Point], opts: &EvalOptions) -> Vec<ResultRow> {
    use rayon::prelude::*;
    points.par_iter().map(|p| evaluate(p, opts)).collect()
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow], extra: &[(&str, Vec<String>)]) -> std::io::Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    header.extend(extra.iter().map(|(name, _)| *name));
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let mut cells = row.cells();
        cells.extend(extra.iter().map(|(_, col)| col.get(i).cloned().unwrap_or_default()));
        w.write_record(&cells)?;
    }
    w.flush()?;
    Ok(())
}

/// Gap |s − s_thermo| per row and whether it shrinks strictly with L.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Convergence {
    pub gaps_finite: Vec<Option<f64>>,
    pub gaps_ed: Vec<Option<f64>>,
    /// gap(Lₖ₊₁)/gap(Lₖ) for the finite-size estimator.
    pub ratios: Vec<Option<f64>>,
    /// `None` when fewer than two gaps are available.
    pub monotone: Option<bool>,
    /// Geometric mean of the ratios.
    pub decay_ratio: Option<f64>,
}

pub fn convergence(rows: &[ResultRow]) -> Convergence {
    let gap = |s: Option<f64>, t: Option<f64>| Some((s? - t?).abs());
    let gaps_finite: Vec<Option<f64>> = rows.iter().map(|r| gap(r.s_finite, r.s_thermo)).collect();
    let gaps_ed = rows.iter().map(|r| gap(r.s_ed, r.s_thermo)).collect();
    let mut ratios = vec![None];
    for w in gaps_finite.windows(2) {
        ratios.push(match (w[0], w[1]) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        });
    }
    let known: Vec<f64> = ratios.iter().flatten().copied().collect();
    let monotone = if gaps_finite.iter().flatten().count() < 2 { None } else { Some(known.len() + 1 == rows.len() && known.iter().all(|&r| r < 1.0)) };
    let decay_ratio = if known.is_empty() { None } else { Some((known.iter().map(|r| r.ln()).sum::<f64>() / known.len() as f64).exp()) };
    Convergence { gaps_finite, gaps_ed, ratios, monotone, decay_ratio }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub tol: f64,
    pub ed_size_cap: usize,
    pub extended_precision: bool,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    meta: &'a Meta,
    rows: &'a [ResultRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    convergence: Option<&'a Convergence>,
}

pub fn write_json<W: Write>(out: W, meta: &Meta, rows: &[ResultRow], conv: Option<&Convergence>) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, &JsonDoc { meta, rows, convergence: conv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for x in [0.9798117096020927, 1e-300, -2.5, 1.0 / 3.0] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn identical_chains() {
        let p = Point { l: 8, zeta: 1.5, h_plus: 2.0, h1_minus: -1.0, h2_minus: -1.0 };
        let row = evaluate(&p, &EvalOptions::default());
        assert_eq!(row.error, None);
        for s in [row.s_ed, row.s_finite, row.s_product, row.s_thermo] {
            assert!((s.unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(row.case_path, "B/B;even-1");
    }

    #[test]
    fn gapless_point_is_flagged() {
        let p = Point { l: 8, zeta: 1.5, h_plus: 2.0, h1_minus: 2.0, h2_minus: 1.9 };
        let opts = EvalOptions { estimators: Estimators { ed: false, ..Default::default() }, ..Default::default() };
        let row = evaluate(&p, &opts);
        assert_eq!(row.failure, Some(FailureKind::Unsupported));
        assert!(row.error.unwrap().contains("gapless"));
        assert!(row.s_finite.is_none() && row.s_thermo.is_none());
    }

    #[test]
    fn csv_layout() {
        let p = Point { l: 8, zeta: 1.5, h_plus: 2.0, h1_minus: -1.0, h2_minus: 0.0 };
        let opts = EvalOptions { timing: false, ..Default::default() };
        let rows = evaluate_all(&[p, p], &opts);
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(SCHEMA_LINE));
        assert_eq!(lines.next().unwrap(), COLUMNS.join(","));
        let first = lines.next().unwrap();
        assert_eq!(first.split(',').count(), 13);
        assert_eq!(lines.next().unwrap(), first);
    }

    #[test]
    fn convergence_summary() {
        let mut rows: Vec<ResultRow> = [8, 10, 12]
            .iter()
            .map(|&l| ResultRow::empty(&Point { l, zeta: 1.5, h_plus: 2.0, h1_minus: -1.0, h2_minus: 0.0 }))
            .collect();
        for (r, s) in rows.iter_mut().zip([0.9, 0.95, 0.975]) {
            r.s_finite = Some(s);
            r.s_thermo = Some(1.0);
        }
        let c = convergence(&rows);
        assert_eq!(c.monotone, Some(true));
        assert!((c.decay_ratio.unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(convergence(&rows[..1]).monotone, None);
    }
}
