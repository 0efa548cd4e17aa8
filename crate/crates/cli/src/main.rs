mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bubblelab::corrector::{corrector_diagnostics, solve_corrector, CorrectorSolution, HEADER_FILE, PROFILE_COLUMNS};
use bubblelab::model::{validate_point, CurvatureFrame};
use bubblelab::reduced::{
    constant_sample, nonconstant_sample, optimize_constants, optimize_nonconstant, SAMPLE_COLUMNS,
};
use bubblelab::verify::{run_suite, Suite};
use bubblelab::Error;
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{checked_point, hessians, Case, RunConfig};

#[derive(Parser)]
#[command(name = "bubblelab", version, about = "Bubbles, correctors and blow-up location for the boundary prescribed-curvature problem")]
struct Cli {
    /// Print the configuration keys and CSV columns, then exit.
    #[arg(long, global = true)]
    schema: bool,
    /// JSON configuration; paths inside it are relative to the file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Accept 5 <= n < 8; reports then set `outside_paper_regime`.
    #[arg(long, global = true)]
    override_dimension_gate: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Quadrature, Beta moments, separable reductions and cancellations.
    VerifyIntegrals,
    /// Bubble and Jacobi residuals, energy, forcing orthogonality.
    VerifyBubble,
    /// Ball-picture invariants and Steklov residuals.
    VerifyHyperbolic,
    /// Solve for the corrector of one curvature frame.
    Corrector,
    /// Reduced coefficients over boundary samples and the blow-up point.
    Locate,
}

/// Exit 2 for anything wrong with the input, 1 for numeric or hypothesis
/// failures.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

const SCHEMA: &str = r#"Configuration (flat JSON, every key optional unless noted)
  n                 dimension, default 8
  K                 K(p) < 0, default -n(n-1)
  H | D             mean curvature or D = sqrt(n(n-1)) H / sqrt|K|; default D = 2
  gamma             gamma(p) > 0, default 1
  seed              seed for random points and frames, default 1
  points            random points per pointwise check, default 100
  frames            random frames for the orthogonality check, default 20
  rel_tol           sets every verification bound (alias relTol)
  tolerances        object overriding single bounds: quad, separable,
                    closed_form, residual, energy, steklov, orthogonality,
                    cancellation
  frame             curvature frame JSON (corrector; default frame for locate)
  grid              {"nr", "nz", "r_max", "stretch"}, default 400 x 400 on [0, 40]^2
  case              "constants" or "non-constants" (locate)
  samples           list of {"id", "coords", "K", "H" | "D", "gamma", "frame",
                    "hessH", "hessK"}; missing scalars fall back to the top level

Frame JSON
  riem_boundary     {"dims": [m, m, m, m], "data": [...]} row-major, m = n-1
  normal_block      {"rows": m, "cols": m, "data": [...]} R_{ninj}
  normal_block_div  optional scalar
  weyl_norm_sq      optional |W|^2; defaults to |R|^2 of riem_boundary

samples.csv (locate)
"#;

fn schema_text() -> String {
    let mut s = SCHEMA.to_string();
    let notes = [
        ("sample", "sample id"),
        ("E", "bubble energy at the sample"),
        ("A", "coefficient of the linear term"),
        ("B", "coefficient of the leading negative term"),
        ("gamma", "gamma at the sample"),
        ("d0", "stationary concentration; empty where B <= 0"),
        ("G", "reduced functional at d0; empty where B <= 0"),
    ];
    for (col, (name, note)) in SAMPLE_COLUMNS.iter().zip(notes) {
        debug_assert_eq!(*col, name);
        s.push_str(&format!("  {col:<17} {note}\n"));
    }
    s.push_str("\nprofile_<k>_d<degree>.csv (corrector)\n");
    let notes = ["|x~| at the node", "x_n at the node", "radial profile of V_p", "radial profile of E_p"];
    for (col, note) in PROFILE_COLUMNS.iter().zip(notes) {
        s.push_str(&format!("  {col:<17} {note}\n"));
    }
    s.push_str(&format!(
        "\nOutputs\n  verify_report.json  verify-* subcommands\n  {HEADER_FILE}, diagnostics.json, profiles  corrector\n  blowup.json, samples.csv  locate\n"
    ));
    s.push_str("\nExit codes: 0 success, 1 numeric or hypothesis failure, 2 configuration failure\n");
    s
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    let probe = dir.join(".bubblelab-write-test");
    fs::write(&probe, b"").map_err(|e| Failure::Config(format!("{} is not writable: {e}", dir.display())))?;
    let _ = fs::remove_file(probe);
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn write(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| Failure::Numeric(format!("{}: {e}", p.display())))
}

fn verify(cli: &Cli, cfg: &RunConfig, suite: Suite) -> Result<bool, Failure> {
    let s = cfg.settings(cli.override_dimension_gate)?;
    prepare_out(&cli.out)?;
    let rep = run_suite(suite, &s)?;
    for c in &rep.checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {}: {:.3e} (bound {:.1e})", c.name, c.value, c.bound);
    }
    if rep.outside_paper_regime {
        println!("note: n = {} lies outside the paper regime", s.point.n);
    }
    write(&cli.out, "verify_report.json", &rep.to_json())?;
    println!("{} of {} checks pass", rep.checks.iter().filter(|c| c.pass).count(), rep.checks.len());
    Ok(rep.pass)
}

#[derive(Serialize)]
struct FailureDump<'a> {
    error: String,
    point: bubblelab::model::ProblemPoint,
    grid: bubblelab::corrector::GridSpec,
    frame: Option<&'a Path>,
}

fn corrector(cli: &Cli, cfg: &RunConfig) -> Result<bool, Failure> {
    let pt = checked_point(cfg.point()?, cli.override_dimension_gate)?;
    let grid = cfg.grid()?;
    let frame_path = cfg.frame.as_deref().ok_or_else(|| Failure::Config("corrector needs a frame".into()))?;
    let frame = cfg.load_frame(frame_path, pt.n)?;
    prepare_out(&cli.out)?;
    let sol = match solve_corrector(&frame, &pt, grid) {
        Ok(s) => s,
        Err(e) => {
            let dump = FailureDump {
                error: e.to_string(),
                point: pt,
                grid,
                frame: Some(frame_path),
            };
            write(&cli.out, "failure.json", &json(&dump))?;
            return Err(e.into());
        }
    };
    let diag = corrector_diagnostics(&sol);
    sol.write_to(&cli.out)?;
    write(&cli.out, "diagnostics.json", &json(&diag))?;
    println!(
        "{} modes; residual L2 {:.3e}, max {:.3e}; boundary identity {:.3e}; pairing {:.6e}",
        sol.modes.len(),
        diag.residual_l2,
        diag.residual_max,
        diag.boundary_identity.relative,
        diag.pairing
    );
    Ok(true)
}

fn locate(cli: &Cli, cfg: &RunConfig) -> Result<bool, Failure> {
    if cfg.samples.is_empty() {
        return Err(Failure::Config("locate needs at least one sample".into()));
    }
    let grid = cfg.grid()?;
    let mut excluded = Vec::new();
    let mut accepted = Vec::new();
    let mut frames: BTreeMap<PathBuf, CurvatureFrame> = BTreeMap::new();
    // Validate everything before any solve.
    for s in &cfg.samples {
        let pt = cfg.point_with(s.k, s.h, s.d, s.gamma)?;
        let rep = validate_point(&pt, cli.override_dimension_gate);
        let failures = rep.failures();
        if failures == ["D > 1"] {
            eprintln!("warning: sample {} has D = {} <= 1 and is excluded", s.id, rep.d);
            excluded.push(format!("{}: D = {} <= 1", s.id, rep.d));
            continue;
        }
        let pt = checked_point(pt, cli.override_dimension_gate)?;
        match cfg.case {
            Case::Constants => {
                let path = s
                    .frame
                    .clone()
                    .or_else(|| cfg.frame.clone())
                    .ok_or_else(|| Failure::Config(format!("sample {} has no frame", s.id)))?;
                if !frames.contains_key(&path) {
                    let fr = cfg.load_frame(&path, pt.n)?;
                    frames.insert(path.clone(), fr);
                }
                accepted.push((s, pt, Some(path)));
            }
            Case::NonConstants => {
                hessians(s)?;
                accepted.push((s, pt, None));
            }
        }
    }
    if accepted.is_empty() {
        return Err(Failure::Numeric("every sample has D <= 1".into()));
    }
    prepare_out(&cli.out)?;
    let report = match cfg.case {
        Case::Constants => {
            // One solve per distinct (frame, point); the corrector only sees
            // n, K and H.
            let mut solved: Vec<(PathBuf, bubblelab::model::ProblemPoint, CorrectorSolution)> = Vec::new();
            let mut samples = Vec::new();
            for (s, pt, path) in &accepted {
                let path = path.as_ref().expect("constants samples carry a frame");
                let fr = &frames[path];
                let key = pt.with_gamma(1.0);
                let idx = match solved.iter().position(|(p, q, _)| p == path && *q == key) {
                    Some(i) => i,
                    None => {
                        solved.push((path.clone(), key, solve_corrector(fr, &key, grid)?));
                        solved.len() - 1
                    }
                };
                let sol = &solved[idx].2;
                let mut c = constant_sample(&s.id, s.coords.clone(), &key, fr, sol)?;
                c.gamma = pt.gamma;
                samples.push(c);
            }
            optimize_constants(&samples, excluded)?
        }
        Case::NonConstants => {
            let mut samples = Vec::new();
            for (s, pt, _) in &accepted {
                samples.push(nonconstant_sample(&s.id, s.coords.clone(), pt, &hessians(s)?)?);
            }
            optimize_nonconstant(&samples, excluded)?
        }
    };
    write(&cli.out, "blowup.json", &json(&report))?;
    write(&cli.out, "samples.csv", &report.samples_csv())?;
    println!(
        "p* = {}, d* = {:.6e}, rate {}, G = {:.6e}",
        report.p_star, report.d_star, report.rate, report.j_values.g
    );
    Ok(true)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let Some(cmd) = cli.command else {
        return Err(Failure::Config("no subcommand given; see --help".into()));
    };
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cmd {
        Command::VerifyIntegrals => verify(cli, &cfg, Suite::Integrals),
        Command::VerifyBubble => verify(cli, &cfg, Suite::Bubble),
        Command::VerifyHyperbolic => verify(cli, &cfg, Suite::Hyperbolic),
        Command::Corrector => corrector(cli, &cfg),
        Command::Locate => locate(cli, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.schema {
        print!("{}", schema_text());
        return ExitCode::SUCCESS;
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
