//! Command line front end: one verb per library operation, matrices and
//! subspaces exchanged as JSON files, all reports printed as canonically
//! ordered JSON to stdout or `--out`.
//!
//! Exit codes: 0 when every requested check passed, 1 when a verified
//! inequality failed beyond the configured slack, 2 on malformed input or
//! flags (with a one-line diagnostic on stderr).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polarcert::ensemble::{generate, named_instance, run_corpus, CorpusConfig, InstanceSpec};
use polarcert::perturb::{certify, proof_trace_cr, proof_trace_main, scan_resolvent_angular};
use polarcert::polar::polar_decompose;
use polarcert::subspace::{classify_cross_projections, gap_report, Subspace};
use polarcert::sylvester::solve_sylvester;
use polarcert::{Complex64, Error, Matrix, TolerancePolicy};
use serde_json::json;

#[derive(Parser)]
#[command(name = "polarcert", version, about = "Perturbation checks for polar decompositions")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Output format; `json` is the only value in this version.
    #[arg(long, global = true, default_value = "json")]
    format: String,
}

#[derive(Subcommand)]
enum Verb {
    /// Polar decomposition of one matrix.
    Polar {
        /// Input matrix file.
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Directed gaps and gap metric between two subspaces.
    Gap {
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Surjectivity classification of the two cross projections.
    Classify {
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        w: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve `x s - t x = y` for Hermitian coefficients and check the
    /// separation bound.
    Sylvester {
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        t: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every perturbation bound on a pair of matrices.
    Certify {
        #[arg(long)]
        a1: PathBuf,
        #[arg(long)]
        a2: PathBuf,
        /// Multiplicative slack for the holds checks (replaces the default
        /// 1e-8).
        #[arg(long)]
        tol: Option<f64>,
        /// Treat a non-applicable or failed main bound as exit 1.
        #[arg(long)]
        require_main: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Replay the summand-level inequalities behind the bounds.
    Trace {
        #[arg(long)]
        a1: PathBuf,
        #[arg(long)]
        a2: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded random corpus and report worst slacks.
    Corpus {
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pin every trial to one shape, e.g. `8x6`; omit to draw shapes.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        sigma_min: Option<f64>,
        #[arg(long)]
        sigma_max: Option<f64>,
        /// Report file (alias `--report`).
        #[arg(long, alias = "report")]
        out: Option<PathBuf>,
    },
    /// Sample the angular factor of `a - lambda` on a circle and measure
    /// consecutive distances.
    Scan {
        #[arg(long)]
        a: PathBuf,
        /// Circle center as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a seeded matrix with prescribed shape, rank and spectrum.
    Gen {
        /// Shape as `RxC`, e.g. `5x7`.
        #[arg(long)]
        shape: String,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma_min: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit one of the built-in instance pairs.
    Named {
        #[arg(long)]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    if cli.format != "json" {
        return Err(format!("unsupported format {:?}, expected json", cli.format));
    }
    match cli.verb {
        Verb::Polar { a, out } => {
            let a = read_matrix(&a)?;
            let p = polar_decompose(&a, &TolerancePolicy::default()).map_err(stringify)?;
            emit(to_value(&p)?, &out)?;
            Ok(0)
        }
        Verb::Gap { v, w, out } => {
            let v = read_subspace(&v)?;
            let w = read_subspace(&w)?;
            let report = gap_report(&v, &w).map_err(stringify)?;
            emit(to_value(&report)?, &out)?;
            Ok(0)
        }
        Verb::Classify { v, w, out } => {
            let v = read_subspace(&v)?;
            let w = read_subspace(&w)?;
            let class = classify_cross_projections(&v, &w).map_err(stringify)?;
            emit(json!({ "class": class }), &out)?;
            Ok(0)
        }
        Verb::Sylvester { s, t, y, out } => {
            let s = read_matrix(&s)?;
            let t = read_matrix(&t)?;
            let y = read_matrix(&y)?;
            let tol = TolerancePolicy::default();
            let sol = solve_sylvester(&s, &t, &y).map_err(stringify)?;
            let x_norm = sol.x.spectral_norm();
            let residual_ok = sol.residual <= tol.residual_tol * y.spectral_norm().max(1.0);
            let bound_ok = sol
                .bound_value
                .map_or(true, |b| x_norm <= b * (1.0 + tol.bound_slack));
            emit(
                json!({
                    "x": sol.x,
                    "x_norm": x_norm,
                    "residual": sol.residual,
                    "residual_ok": residual_ok,
                    "separation": sol.separation,
                    "bound_value": sol.bound_value,
                    "bound_ok": bound_ok,
                }),
                &out,
            )?;
            Ok(if residual_ok && bound_ok { 0 } else { 1 })
        }
        Verb::Certify { a1, a2, tol, require_main, out } => {
            let policy = policy_with(tol)?;
            let a1 = read_matrix(&a1)?;
            let a2 = read_matrix(&a2)?;
            let cert = certify(&a1, &a2, &policy).map_err(stringify)?;
            emit(to_value(&cert)?, &out)?;
            let mut failed = !(cert.main_holds
                && cert.improved_holds
                && cert.cr_plain_holds
                && cert.cr_gap_holds);
            if require_main && !(cert.main_applicable && cert.main_holds) {
                failed = true;
            }
            Ok(if failed { 1 } else { 0 })
        }
        Verb::Trace { a1, a2, tol, out } => {
            let policy = policy_with(tol)?;
            let a1 = read_matrix(&a1)?;
            let a2 = read_matrix(&a2)?;
            let main_trace = match proof_trace_main(&a1, &a2, &policy) {
                Ok(trace) => Some(trace),
                Err(Error::NotApplicable(_)) => None,
                Err(e) => return Err(e.to_string()),
            };
            let cr = proof_trace_cr(&a1, &a2, &policy).map_err(stringify)?;
            let mut ok = cr.first_holds
                && cr.second_holds
                && cr.kernel_holds
                && cr.vanishing_ok
                && cr.range_holds
                && cr.x_bound_holds;
            if let Some(trace) = &main_trace {
                ok = ok && trace.summands_hold && trace.sylvester_holds;
            }
            emit(json!({ "main": main_trace, "cr": cr }), &out)?;
            Ok(if ok { 0 } else { 1 })
        }
        Verb::Corpus { trials, seed, shape, sigma_min, sigma_max, out } => {
            let mut config = CorpusConfig::new(trials, seed);
            if let Some(text) = shape {
                config.shape = Some(parse_shape(&text)?);
            }
            if let Some(x) = sigma_min {
                config.sigma_min = x;
            }
            if let Some(x) = sigma_max {
                config.sigma_max = x;
            }
            let report = run_corpus(&config).map_err(stringify)?;
            let clean = report.failures.is_empty();
            emit(to_value(&report)?, &out)?;
            Ok(if clean { 0 } else { 1 })
        }
        Verb::Scan { a, center, radius, samples, out } => {
            let a = read_matrix(&a)?;
            let center = parse_center(&center)?;
            let points =
                scan_resolvent_angular(&a, center, radius, samples, &TolerancePolicy::default())
                    .map_err(stringify)?;
            let max_step = points.iter().map(|p| p.qdist).fold(0.0, f64::max);
            emit(json!({ "points": points, "max_step": max_step }), &out)?;
            Ok(0)
        }
        Verb::Gen { shape, rank, sigma_min, sigma_max, seed, out } => {
            let (rows, cols) = parse_shape(&shape)?;
            let spec = InstanceSpec { rows, cols, rank, sigma_min, sigma_max, seed };
            let matrix = generate(&spec).map_err(stringify)?;
            emit(to_value(&matrix)?, &out)?;
            Ok(0)
        }
        Verb::Named { name, out } => {
            let pair = named_instance(&name).map_err(stringify)?;
            emit(to_value(&pair)?, &out)?;
            Ok(0)
        }
    }
}

fn stringify(e: Error) -> String {
    e.to_string()
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<serde_json::Value, String> {
    serde_json::to_value(value).map_err(|e| e.to_string())
}

/// Writes sorted-key pretty JSON to the file or stdout.
fn emit(value: serde_json::Value, out: &Option<PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(&value).map_err(|e| e.to_string())? + "\n";
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_matrix(path: &Path) -> Result<Matrix, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Matrix::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn read_subspace(path: &Path) -> Result<Subspace, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let (subspace, _was_orthonormal) =
        Subspace::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(subspace)
}

/// Parses `RxC` into positive dimensions.
fn parse_shape(text: &str) -> Result<(usize, usize), String> {
    let (rows, cols) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("shape {text:?} is not of the form RxC"))?;
    let rows: usize = rows.parse().map_err(|_| format!("bad row count in shape {text:?}"))?;
    let cols: usize = cols.parse().map_err(|_| format!("bad column count in shape {text:?}"))?;
    if rows == 0 || cols == 0 {
        return Err(format!("shape {text:?} must have positive dimensions"));
    }
    Ok((rows, cols))
}

/// Parses `re,im` into a complex number.
fn parse_center(text: &str) -> Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("center {text:?} is not of the form re,im"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part in center {text:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part in center {text:?}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(format!("center {text:?} must be finite"));
    }
    Ok(Complex64::new(re, im))
}

fn policy_with(tol: Option<f64>) -> Result<TolerancePolicy, String> {
    let mut policy = TolerancePolicy::default();
    if let Some(slack) = tol {
        if !(slack >= 0.0 && slack.is_finite()) {
            return Err(format!("tol {slack} must be a finite non-negative slack"));
        }
        policy.bound_slack = slack;
    }
    Ok(policy)
}
