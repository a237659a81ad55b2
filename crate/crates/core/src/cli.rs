//! Command-line front end. [`run`] takes the argument list and output
//! streams explicitly so the whole surface can be exercised in-process.

use crate::bethe::{energy, solve_params, BetheError};
use crate::ed::{self, EdConfig, DEFAULT_SIZE_CAP};
use crate::model::ChainParams;
use crate::pipeline::{self, convergence, evaluate, evaluate_all, fmt_f64, EvalOptions, Estimators, FailureKind, Meta, Point, ResultRow};
use crate::selftest;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "xxz-overlap", version, about = "Ground-state overlaps of the open XXZ chain after a boundary-field change")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the Bethe equations for one chain and print the roots.
    #[command(allow_negative_numbers = true)]
    Roots(RootsArgs),
    /// All overlap estimators for one pair of chains.
    #[command(allow_negative_numbers = true)]
    Overlap(OverlapArgs),
    /// Overlaps along a grid of one h⁻ field, for one or more lengths.
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Finite-size overlaps at increasing L and their distance to the limit.
    #[command(allow_negative_numbers = true)]
    Converge(ConvergeArgs),
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum SweptField {
    H1,
    H2,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Run exact diagonalisation where L is within the cap (default).
    #[arg(long, overrides_with = "no_ed")]
    ed: bool,
    #[arg(long = "no-ed")]
    no_ed: bool,
    /// Largest L handed to exact diagonalisation.
    #[arg(long, default_value_t = DEFAULT_SIZE_CAP)]
    ed_cap: usize,
    /// Leave wall_time_ms empty so repeated runs give identical files.
    #[arg(long)]
    no_timing: bool,
    /// Accepted for compatibility; boundary roots are always stored as
    /// anchor plus offset, which already keeps the offset to full relative
    /// precision.
    #[arg(long)]
    extended_precision: bool,
}

impl Common {
    fn options(&self, estimators: Estimators) -> EvalOptions {
        EvalOptions {
            estimators: Estimators { ed: estimators.ed && !self.no_ed, ..estimators },
            tol: self.tol,
            ed: EdConfig { size_cap: self.ed_cap, ..EdConfig::default() },
            timing: !self.no_timing,
        }
    }

    fn meta(&self, command: &str) -> Meta {
        Meta {
            schema: pipeline::SCHEMA_LINE.trim_start_matches("# "),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            tol: self.tol,
            ed_size_cap: self.ed_cap,
            extended_precision: self.extended_precision,
        }
    }
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    zeta: f64,
    #[arg(long)]
    h_minus: f64,
    #[arg(long)]
    h_plus: f64,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Compare with the exact-diagonalisation ground state.
    #[arg(long)]
    ed: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct OverlapArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long)]
    zeta: f64,
    #[arg(long)]
    h_plus: f64,
    #[arg(long)]
    h1_minus: f64,
    #[arg(long)]
    h2_minus: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Single chain length (alternative to --lengths).
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    lengths: Vec<usize>,
    #[arg(long)]
    zeta: f64,
    #[arg(long)]
    h_plus: f64,
    /// Fixed value of h₁⁻ (ignored when it is the swept field).
    #[arg(long)]
    h1_minus: Option<f64>,
    #[arg(long)]
    h2_minus: Option<f64>,
    #[arg(long, value_enum, default_value_t = SweptField::H2)]
    sweep: SweptField,
    /// start:stop:step, stop included.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Estimators to run.
    #[arg(long, value_delimiter = ',', default_value = "ed,finite,product,thermo")]
    outputs: Vec<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    lengths: Vec<usize>,
    #[arg(long)]
    zeta: f64,
    #[arg(long)]
    h_plus: f64,
    #[arg(long)]
    h1_minus: f64,
    #[arg(long)]
    h2_minus: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug)]
struct UsageError(String);

/// Parses `start:stop:step` into the list of grid points, stop included
/// when it is reached up to rounding.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, s] = parts[..] else {
        return Err(format!("grid must be start:stop:step, got {spec:?}"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad grid number {t:?}: {e}"));
    let (start, stop, step) = (num(a)?, num(b)?, num(s)?);
    if !(start.is_finite() && stop.is_finite() && step.is_finite()) || step <= 0.0 {
        return Err(format!("grid step must be positive and bounds finite: {spec:?}"));
    }
    if stop < start {
        return Err(format!("empty grid: stop {stop} < start {start}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

fn parse_outputs(list: &[String]) -> Result<Estimators, String> {
    let mut e = Estimators { ed: false, finite: false, product: false, thermo: false };
    for name in list {
        match name.trim() {
            "ed" => e.ed = true,
            "finite" => e.finite = true,
            "product" => e.product = true,
            "thermo" => e.thermo = true,
            other => return Err(format!("unknown output {other:?} (expected ed, finite, product, thermo)")),
        }
    }
    Ok(e)
}

fn check_lengths(lengths: &[usize], ascending: bool) -> Result<(), String> {
    if lengths.is_empty() {
        return Err("no chain lengths given".into());
    }
    if lengths.iter().any(|&l| l % 2 != lengths[0] % 2) {
        return Err("all lengths must have the same parity".into());
    }
    if ascending && lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err("lengths must be strictly ascending".into());
    }
    Ok(())
}

fn exit_code_for(kind: Option<FailureKind>) -> i32 {
    match kind {
        None => EXIT_OK,
        Some(FailureKind::Solver) => EXIT_SOLVER,
        Some(FailureKind::Unsupported) => EXIT_UNSUPPORTED,
    }
}

/// Sends output to `--out` if given, otherwise to `stdout`.
fn emit(out: &Option<std::path::PathBuf>, stdout: &mut dyn Write, body: &[u8]) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => stdout.write_all(body),
    }
}

fn render(common: &Common, command: &str, rows: &[ResultRow], conv: Option<&pipeline::Convergence>) -> Vec<u8> {
    let mut buf = Vec::new();
    match common.format {
        Format::Json => {
            pipeline::write_json(&mut buf, &common.meta(command), rows, conv).expect("in-memory JSON");
            buf.push(b'\n');
        }
        Format::Csv => {
            let extra = conv.map(converge_columns).unwrap_or_default();
            pipeline::write_csv(&mut buf, rows, &extra).expect("in-memory CSV");
        }
    }
    buf
}

fn opt_cells(v: &[Option<f64>]) -> Vec<String> {
    v.iter().map(|x| x.map(fmt_f64).unwrap_or_default()).collect()
}

fn converge_columns(c: &pipeline::Convergence) -> Vec<(&'static str, Vec<String>)> {
    vec![("gap_finite", opt_cells(&c.gaps_finite)), ("gap_ed", opt_cells(&c.gaps_ed)), ("ratio", opt_cells(&c.ratios))]
}

fn cmd_roots(a: &RootsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::io::Result<i32> {
    let params = match ChainParams::new(a.l, a.zeta, a.h_minus, a.h_plus) {
        Ok(p) => p,
        Err(e) => {
            writeln!(stderr, "error: {e}")?;
            return Ok(EXIT_USAGE);
        }
    };
    let (regime, roots) = match solve_params(&params, a.tol) {
        Ok(x) => x,
        Err(BetheError::Model(e)) => {
            writeln!(stderr, "error: {e}")?;
            return Ok(EXIT_UNSUPPORTED);
        }
        Err(e) => {
            writeln!(stderr, "error: {e}")?;
            return Ok(EXIT_SOLVER);
        }
    };
    let e_bethe = match energy(&roots, &params) {
        Ok(e) => e,
        Err(e) => {
            writeln!(stderr, "error: {e}")?;
            return Ok(EXIT_SOLVER);
        }
    };
    let br = roots.boundary_root.map(|b| {
        let v = b.value();
        json!({
            "side": b.side.symbol(),
            "re": v.re,
            "im": v.im,
            "epsilon_re": b.epsilon_corr.re,
            "epsilon_im": b.epsilon_corr.im,
            "clamped": b.clamped,
        })
    });
    let mut doc = json!({
        "params": { "L": a.l, "zeta": a.zeta, "h_minus": a.h_minus, "h_plus": a.h_plus },
        "regime": {
            "case": pipeline::regime_tag(&regime),
            "n": regime.n,
            "epsilon_sign": regime.epsilon_sign,
            "spin_reversed": roots.spin_reversed,
        },
        "real_roots": roots.real_roots,
        "quantum_numbers": roots.quantum_numbers,
        "boundary_root": br,
        "near_edge": roots.near_edge,
        "residual_max": roots.residual_max,
        "energy": e_bethe,
    });
    if a.ed {
        match ed::ground_state(&params) {
            Ok(gs) => {
                doc["ed"] = json!({
                    "energy": gs.energy,
                    "sector": gs.sector,
                    "energy_diff": (e_bethe - gs.energy).abs(),
                });
                let expected = if roots.spin_reversed { a.l - roots.count() } else { roots.count() };
                if gs.sector != expected {
                    writeln!(stderr, "warning: ED ground state in sector {} but Bethe roots describe sector {expected}", gs.sector)?;
                }
            }
            Err(e) => doc["ed"] = json!({ "error": e.to_string() }),
        }
    }
    let mut body = serde_json::to_vec_pretty(&doc).expect("in-memory JSON");
    body.push(b'\n');
    emit(&a.out, stdout, &body)?;
    Ok(EXIT_OK)
}

fn cmd_overlap(a: &OverlapArgs, stdout: &mut dyn Write) -> std::io::Result<i32> {
    let point = Point { l: a.l, zeta: a.zeta, h_plus: a.h_plus, h1_minus: a.h1_minus, h2_minus: a.h2_minus };
    let row = evaluate(&point, &a.common.options(Estimators::default()));
    emit(&a.common.out, stdout, &render(&a.common, "overlap", std::slice::from_ref(&row), None))?;
    Ok(exit_code_for(row.failure))
}

fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write) -> Result<i32, UsageError> {
    let grid = parse_grid(&a.grid).map_err(UsageError)?;
    let mut lengths = a.lengths.clone();
    lengths.extend(a.l);
    check_lengths(&lengths, false).map_err(UsageError)?;
    let est = parse_outputs(&a.outputs).map_err(UsageError)?;
    let fixed = match a.sweep {
        SweptField::H1 => a.h2_minus.ok_or_else(|| UsageError("--h2-minus is required when sweeping h1".into()))?,
        SweptField::H2 => a.h1_minus.ok_or_else(|| UsageError("--h1-minus is required when sweeping h2".into()))?,
    };
    let mut points = Vec::with_capacity(grid.len() * lengths.len());
    for &l in &lengths {
        for &h in &grid {
            let (h1, h2) = if a.sweep == SweptField::H1 { (h, fixed) } else { (fixed, h) };
            points.push(Point { l, zeta: a.zeta, h_plus: a.h_plus, h1_minus: h1, h2_minus: h2 });
        }
    }
    let rows = evaluate_all(&points, &a.common.options(est));
    emit(&a.common.out, stdout, &render(&a.common, "sweep", &rows, None)).map_err(|e| UsageError(e.to_string()))?;
    // Per-point failures are in the error column; only a sweep in which
    // nothing succeeded is reported through the exit code.
    if rows.iter().all(|r| r.failure.is_some()) {
        return Ok(exit_code_for(rows.iter().filter_map(|r| r.failure).max()));
    }
    Ok(EXIT_OK)
}

fn cmd_converge(a: &ConvergeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, UsageError> {
    check_lengths(&a.lengths, true).map_err(UsageError)?;
    let points: Vec<Point> =
        a.lengths.iter().map(|&l| Point { l, zeta: a.zeta, h_plus: a.h_plus, h1_minus: a.h1_minus, h2_minus: a.h2_minus }).collect();
    let rows = evaluate_all(&points, &a.common.options(Estimators { product: false, ..Estimators::default() }));
    let conv = convergence(&rows);
    let io = |e: std::io::Error| UsageError(e.to_string());
    emit(&a.common.out, stdout, &render(&a.common, "converge", &rows, Some(&conv))).map_err(io)?;
    match (conv.monotone, conv.decay_ratio) {
        (Some(true), Some(r)) => writeln!(stderr, "gap decreases monotonically; mean decay ratio per step {r:.4}").map_err(io)?,
        (Some(false), _) => writeln!(stderr, "NonMonotone: the gap to the thermodynamic value does not decrease at every step").map_err(io)?,
        _ => {}
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(stdout: &mut dyn Write) -> std::io::Result<i32> {
    let results = selftest::run_all();
    let mut failed = 0;
    for r in &results {
        writeln!(stdout, "[{}] {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail)?;
        failed += !r.passed as usize;
    }
    writeln!(stdout, "{} checks, {failed} failed", results.len())?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Runs the tool and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Roots(a) => cmd_roots(a, stdout, stderr).map_err(|e| UsageError(e.to_string())),
        Command::Overlap(a) => cmd_overlap(a, stdout).map_err(|e| UsageError(e.to_string())),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Converge(a) => cmd_converge(a, stdout, stderr),
        Command::Selftest => cmd_selftest(stdout).map_err(|e| UsageError(e.to_string())),
    };
    match outcome {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["xxz-overlap"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("-3:-2.9:0.1").unwrap().len(), 2);
        assert_eq!(parse_grid("1:1:0.5").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn roots_with_ed() {
        let (code, out, _) = run_capture(&["roots", "--L", "8", "--zeta", "1.5", "--h-minus", "-1", "--h-plus", "2", "--ed"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["real_roots"].as_array().unwrap().len(), 4);
        assert!(v["ed"]["energy_diff"].as_f64().unwrap() < 1e-9);
    }

    #[test]
    fn roots_boundary_root_entry() {
        let (code, out, _) = run_capture(&["roots", "--L", "8", "--zeta", "1.5", "--h-minus", "-1", "--h-plus", "0.5"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["boundary_root"]["side"], "+");
        assert_eq!(v["regime"]["case"], "A+");
    }

    #[test]
    fn roots_gapless_exit_code() {
        let (code, _, err) = run_capture(&["roots", "--L", "18", "--zeta", "1.5", "--h-minus", "2", "--h-plus", "2"]);
        assert_eq!(code, EXIT_UNSUPPORTED);
        assert!(err.contains("gapless") && err.contains("h⁻, h⁺ > h_cr1"), "{err}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["roots", "--L", "8"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        let empty = ["sweep", "--L", "8", "--zeta", "1.5", "--h-plus", "2", "--h1-minus", "-1", "--grid", "1:0:0.1"];
        assert_eq!(run_capture(&empty).0, EXIT_USAGE);
        let mixed = ["converge", "--lengths", "8,9", "--zeta", "1.5", "--h-plus", "2", "--h1-minus", "-1", "--h2-minus", "0"];
        assert_eq!(run_capture(&mixed).0, EXIT_USAGE);
        assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn overlap_identical_params() {
        let (code, out, _) =
            run_capture(&["overlap", "--L", "8", "--zeta", "1.5", "--h-plus", "2", "--h1-minus", "-1", "--h2-minus", "-1", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let row = &v["rows"][0];
        for key in ["s_ed", "s_finite", "s_product", "s_thermo"] {
            assert!((row[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
        }
        assert_eq!(v["meta"]["schema"], "xxz-overlap v1");
    }

    #[test]
    fn overlap_vanishing_even_case() {
        let args = ["overlap", "--L", "18", "--zeta", "1.8", "--h-plus", "0", "--h1-minus", "-1", "--h2-minus", "1", "--no-timing"];
        let (code, out, _) = run_capture(&args);
        assert_eq!(code, EXIT_OK);
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(out.as_bytes());
        let rec = rdr.records().next().unwrap().unwrap();
        assert_eq!(&rec[8], "0");
        assert_eq!(&rec[5], "", "no ED above the cap");
        assert!(rec[9].ends_with("even-2"));
        assert!(rec[6].parse::<f64>().unwrap() < 1e-3);
    }

    #[test]
    fn sweep_is_deterministic_and_ordered() {
        let args = [
            "sweep", "--lengths", "8,10", "--zeta", "1.8", "--h-plus", "-1", "--h1-minus", "0", "--grid", "-0.5:0.5:0.25", "--no-timing",
            "--outputs", "finite,thermo",
        ];
        let (c1, a, _) = run_capture(&args);
        let (c2, b, _) = run_capture(&args);
        assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
        assert_eq!(a, b);
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(a.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 10);
        assert_eq!(&rows[0][0], "8");
        assert_eq!(&rows[5][0], "10");
        let h2: Vec<f64> = rows[..5].iter().map(|r| r[4].parse().unwrap()).collect();
        assert!(h2.windows(2).all(|w| w[0] < w[1]));
        // the point h₂⁻ = h₁⁻ has overlap one
        assert!((rows[2][6].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(&rows[0][5], "", "ED not requested");
    }
}
