use clap::{Args, Parser, Subcommand};
use rootreg::covers::{extract_subcover, GrowthBudget, Radical};
use rootreg::curve::{CurveSpec, FamilySpec, PolyPath};
use rootreg::experiments::{parse_config, run_experiment, write_outputs};
use rootreg::glaeser::interpolation_bound;
use rootreg::spaces::{norm_report, SampledFunction};
use rootreg::trace::{calibrate, run_induction_trace, PipelineConstants, CALIBRATION_FACTOR};
use rootreg::tracking::{coefficient_scale, regularity_report, track_curve, GridSpec, TrackOptions};
use rootreg::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rootreg", version, about = "Continuous roots of polynomial curves: tracking, norms, covers and traces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON input for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Uniform grid steps for tracking.
    #[arg(long, global = true, default_value_t = 256)]
    grid: usize,
    /// Lebesgue exponent.
    #[arg(long, global = true, default_value_t = 1.0)]
    p: f64,
    /// Root solver tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Track the roots of a curve of polynomials.
    Track,
    /// Lebesgue and weak Lebesgue norms of sampled data.
    Norms,
    /// Grow intervals from a budget and extract a subcover.
    Cover,
    /// Coefficient bounds for polynomials controlled on an interval.
    Glaeser,
    /// Run the inductive trace on a curve.
    Trace,
    /// Run a named experiment.
    Experiment,
    /// Refit the calibrated check constants.
    Calibrate,
}

enum Failure {
    Config(String),
    Numeric(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(m) => Failure::Config(m),
            other => {
                let mut v = serde_json::to_value(&other).unwrap_or_else(|_| json!({}));
                v["message"] = json!(other.to_string());
                Failure::Numeric(v)
            }
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Numeric(json!({"error": "io", "path": path.display().to_string(), "message": e.to_string()}))
}

type Res<T> = std::result::Result<T, Failure>;

fn read_json<T: DeserializeOwned>(g: &Global) -> Res<T> {
    let path = g.config.as_ref().ok_or_else(|| Failure::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Config(format!("{}: {path}: {}", g.config.as_ref().unwrap().display(), e.into_inner()))
    })
}

fn write_file(dir: &Path, name: &str, body: &str) -> Res<()> {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let p = dir.join(name);
    std::fs::write(&p, body).map_err(|e| io_failure(&p, e))
}

fn emit(g: &Global, value: &Value, text: &str) {
    if g.json {
        println!("{}", serde_json::to_string_pretty(value).unwrap());
    } else {
        println!("{text}");
    }
}

fn check_p(g: &Global) -> Res<()> {
    if !(g.p >= 1.0) {
        return Err(Failure::Config(format!("--p {} must be at least 1", g.p)));
    }
    Ok(())
}

fn track(g: &Global) -> Res<()> {
    check_p(g)?;
    let spec: FamilySpec = read_json(g)?;
    let fam = spec.build()?;
    if g.grid < 1 {
        return Err(Failure::Config("--grid must be positive".into()));
    }
    let opts = TrackOptions {
        grid: GridSpec::Uniform { points: g.grid },
        root_tol: g.tol,
        ..Default::default()
    };
    let tr = track_curve(&fam, &opts)?;
    let scale = coefficient_scale(&fam)?;
    let reports = (0..fam.degree())
        .map(|b| regularity_report(&tr, b, g.p, fam.degree(), scale))
        .collect::<rootreg::Result<Vec<_>>>()?;
    let summary = json!({
        "degree": fam.degree(),
        "domain": fam.domain(),
        "points": tr.grid.len(),
        "max_step_jump": tr.max_step_jump,
        "refinements": tr.refinements,
        "max_depth_reached": tr.max_depth_reached,
        "regularity": reports,
    });
    if let Some(dir) = &g.out {
        let mut csv = String::from("t");
        for b in 0..fam.degree() {
            let _ = write!(csv, ",re{b},im{b}");
        }
        csv.push('\n');
        for (i, t) in tr.grid.iter().enumerate() {
            let _ = write!(csv, "{t}");
            for b in &tr.branches {
                let _ = write!(csv, ",{},{}", b[i].re, b[i].im);
            }
            csv.push('\n');
        }
        write_file(dir, "trajectories.csv", &csv)?;
        write_file(dir, "track.json", &serde_json::to_string_pretty(&summary).unwrap())?;
    }
    let mut text = format!(
        "tracked {} roots on {} points, max step jump {:.3e}, {} refinements\n",
        fam.degree(),
        tr.grid.len(),
        tr.max_step_jump,
        tr.refinements
    );
    for r in &reports {
        let _ = writeln!(
            text,
            "branch {}: ||lambda'||_L^{} = {:.6e}, bound ratio {:.4}, Hoelder consistent {}",
            r.branch, g.p, r.lp_of_derivative, r.bound_ratio, r.holder_consistent
        );
    }
    emit(g, &summary, text.trim_end());
    Ok(())
}

fn norms(g: &Global) -> Res<()> {
    check_p(g)?;
    let raw: SampledFunction = read_json(g)?;
    let f = SampledFunction::new(raw.grid, raw.values)?;
    let rep = norm_report(&f, g.p);
    let v = serde_json::to_value(&rep).unwrap();
    if let Some(dir) = &g.out {
        write_file(dir, "norms.json", &serde_json::to_string_pretty(&v).unwrap())?;
    }
    emit(
        g,
        &v,
        &format!("L^{p}: {:.10e}\nweak L^{p}: {:.10e}", rep.lp, rep.weak_lp, p = g.p),
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadicalInput {
    index: usize,
    curve: CurveSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BudgetInput {
    rate: f64,
    d: f64,
    domain: (f64, f64),
    radicals: Vec<RadicalInput>,
}

fn cover(g: &Global) -> Res<()> {
    let input: BudgetInput = read_json(g)?;
    let radicals = input.radicals.iter().map(|r| Radical::new(r.curve.build(), r.index)).collect();
    let budget = GrowthBudget::constant(input.rate, input.d, radicals, input.domain)?;
    let rep = extract_subcover(&budget)?;
    let v = serde_json::to_value(&rep).unwrap();
    if let Some(dir) = &g.out {
        write_file(dir, "cover.json", &serde_json::to_string_pretty(&v).unwrap())?;
        write_file(dir, "cover.csv", &rep.to_csv())?;
    }
    emit(
        g,
        &v,
        &format!(
            "{} intervals, max overlap {}, total length {:.6} on a domain of length {:.6}",
            rep.records.len(),
            rep.max_overlap,
            rep.total_length,
            rep.domain_length
        ),
    );
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterpolationInput {
    m: usize,
    alpha: f64,
    a: f64,
    b: f64,
    #[serde(default)]
    big_m: f64,
}

fn glaeser(g: &Global) -> Res<()> {
    let i: InterpolationInput = read_json(g)?;
    let rep = interpolation_bound(i.m, i.alpha, i.a, i.b, i.big_m)?;
    let v = serde_json::to_value(&rep).unwrap();
    if let Some(dir) = &g.out {
        write_file(dir, "glaeser.json", &serde_json::to_string_pretty(&v).unwrap())?;
    }
    let bounds: Vec<String> = rep.per_coefficient_bounds.iter().map(|b| format!("{b:.6e}")).collect();
    emit(
        g,
        &v,
        &format!("{:?} branch, C = {:.6e}, |a_j| <= [{}]", rep.branch, rep.constant_c, bounds.join(", ")),
    );
    Ok(())
}

#[derive(Deserialize)]
struct TraceInput {
    #[serde(flatten)]
    family: FamilySpec,
    #[serde(default)]
    constants: PipelineConstants,
    max_depth: Option<usize>,
}

fn trace(g: &Global) -> Res<()> {
    let input: TraceInput = read_json(g)?;
    let fam = input.family.build()?;
    let rep = run_induction_trace(&fam, &input.constants, input.max_depth.unwrap_or(fam.degree))?;
    let summary = json!({
        "degree": rep.degree,
        "top_cover": rep.top_cover,
        "summary": rep.summary,
        "complete": rep.summary.complete(),
    });
    if let Some(dir) = &g.out {
        write_file(dir, "trace.json", &serde_json::to_string(&rep).unwrap())?;
        write_file(dir, "summary.json", &serde_json::to_string_pretty(&summary).unwrap())?;
    }
    let s = &rep.summary;
    emit(
        g,
        &summary,
        &format!(
            "{} nodes (depth {}), {} checks, {} failed, {} aborted, {} uncalibrated",
            s.nodes, s.max_depth, s.checks, s.failed, s.aborted, s.uncalibrated
        ),
    );
    if !s.complete() {
        return Err(Failure::Numeric(json!({"error": "incomplete_trace", "summary": s})));
    }
    Ok(())
}

fn experiment(g: &Global) -> Res<()> {
    let mut raw: Value = read_json(g)?;
    if let (Some(seed), Some(obj)) = (g.seed, raw.as_object_mut()) {
        obj.insert("seed".into(), json!(seed));
    }
    let req = parse_config(&raw)?;
    let out = run_experiment(&req)?;
    if let Some(dir) = &g.out {
        write_outputs(dir, &req, &out).map_err(|e| io_failure(dir, e))?;
    }
    let text = match &g.out {
        Some(dir) => format!("{} (seed {}) written to {}", out.name, out.seed, dir.display()),
        None => out.report_json(),
    };
    emit(g, &out.report, &text);
    Ok(())
}

#[derive(Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct CalibrateInput {
    constants: PipelineConstants,
    version: Option<u32>,
}

fn calibrate_cmd(g: &Global) -> Res<()> {
    let input: CalibrateInput = if g.config.is_some() { read_json(g)? } else { CalibrateInput::default() };
    let version = input.version.unwrap_or(rootreg::trace::Calibration::builtin().version + 1);
    let cal = calibrate(&input.constants, version)?;
    let v = serde_json::to_value(&cal).unwrap();
    if let Some(dir) = &g.out {
        write_file(dir, "calibration.json", &serde_json::to_string_pretty(&v).unwrap())?;
    }
    emit(
        g,
        &v,
        &format!("calibration version {version} ({} x max observed ratio)\n{}", CALIBRATION_FACTOR, serde_json::to_string_pretty(&cal.constants).unwrap()),
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let r = match cli.command {
        Command::Track => track(g),
        Command::Norms => norms(g),
        Command::Cover => cover(g),
        Command::Glaeser => glaeser(g),
        Command::Trace => trace(g),
        Command::Experiment => experiment(g),
        Command::Calibrate => calibrate_cmd(g),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(v)) => {
            eprintln!("{}", serde_json::to_string(&v).unwrap());
            ExitCode::from(3)
        }
    }
}
