//! Seeded experiment runners. Each run returns a JSON report plus CSV
//! series; identical config and seed give byte-identical output.

use crate::covers::{
    covers, extract_subcover, max_overlap, select_finite_subcover, GrowthBudget, IntervalKind, Radical, RECORD_TOL,
};
use crate::curve::{
    worked_cubic_family, worked_quartic_family, power_family, radical_family, random_trig_curve, random_trig_family,
    unit_loop_family, Curve, CurveFamily, CurveRef, PolyCurve, PolyPath,
};
use crate::error::{Error, Result};
use crate::glaeser::{
    branch_derivative_weak_norm, envelope_profile, glaeser_constant_transform, interpolation_bound, GlaeserForm,
};
use crate::jet::{Jet, C64};
use crate::poly::{refine_split_newton, split_clusters, MonicPolynomial};
use crate::trace::{run_induction_trace, Calibration, PipelineConstants, TraceReport};
use crate::tracking::{
    coefficient_scale, monodromy_loop, regularity_report, track_box, track_curve, BoxOptions, FnField, GridSpec,
    TrackOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub const EXPERIMENTS: [&str; 6] = [
    "sharpness",
    "bound-survey",
    "cover-demo",
    "monodromy",
    "glaeser-suite",
    "appendix-trace",
];

/// Experiment descriptor, tagged by `name`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Sharpness(SharpnessConfig),
    BoundSurvey(BoundSurveyConfig),
    CoverDemo(CoverDemoConfig),
    Monodromy(MonodromyConfig),
    GlaeserSuite(GlaeserSuiteConfig),
    #[serde(rename = "appendix-trace")]
    WorkedTraces(WorkedTracesConfig),
}

impl ExperimentConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Sharpness(_) => "sharpness",
            ExperimentConfig::BoundSurvey(_) => "bound-survey",
            ExperimentConfig::CoverDemo(_) => "cover-demo",
            ExperimentConfig::Monodromy(_) => "monodromy",
            ExperimentConfig::GlaeserSuite(_) => "glaeser-suite",
            ExperimentConfig::WorkedTraces(_) => "appendix-trace",
        }
    }

    /// Default config for a known experiment name.
    pub fn default_for(name: &str) -> Result<Self> {
        parse_config(&json!({ "name": name })).map(|r| r.config)
    }
}

/// A parsed config plus the seed that drives it.
#[derive(Debug, Clone)]
pub struct ExperimentRequest {
    pub seed: u64,
    pub config: ExperimentConfig,
    /// The config as given, echoed into the manifest.
    pub raw: Value,
}

/// Parse `{"name": ..., "seed": ..., <fields>}`. Errors name the offending
/// field path.
pub fn parse_config(raw: &Value) -> Result<ExperimentRequest> {
    let mut body = raw.clone();
    let obj = body
        .as_object_mut()
        .ok_or_else(|| Error::Config("experiment config must be a JSON object".into()))?;
    let seed = match obj.remove("seed") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| Error::Config(format!("seed: expected an unsigned integer, got {v}")))?,
    };
    let name = match obj.remove("name") {
        Some(Value::String(n)) => n,
        _ => return Err(Error::Config("name: missing experiment name".into())),
    };
    let config = match name.as_str() {
        "sharpness" => ExperimentConfig::Sharpness(fields(body)?),
        "bound-survey" => ExperimentConfig::BoundSurvey(fields(body)?),
        "cover-demo" => ExperimentConfig::CoverDemo(fields(body)?),
        "monodromy" => ExperimentConfig::Monodromy(fields(body)?),
        "glaeser-suite" => ExperimentConfig::GlaeserSuite(fields(body)?),
        "appendix-trace" => ExperimentConfig::WorkedTraces(fields(body)?),
        other => {
            return Err(Error::Config(format!(
                "name: unknown experiment `{other}`, expected one of {}",
                EXPERIMENTS.join(", ")
            )))
        }
    };
    Ok(ExperimentRequest { seed, config, raw: raw.clone() })
}

fn fields<T: serde::de::DeserializeOwned>(body: Value) -> Result<T> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("{path}: {}", e.into_inner()))
    })
}

/// A table for plotting.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    fn new(name: &str, columns: &[&str]) -> Self {
        Series {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutput {
    pub name: String,
    pub seed: u64,
    pub report: Value,
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl ExperimentOutput {
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }
}

pub fn run_experiment(req: &ExperimentRequest) -> Result<ExperimentOutput> {
    let seed = req.seed;
    let (report, series) = match &req.config {
        ExperimentConfig::Sharpness(c) => sharpness(c)?,
        ExperimentConfig::BoundSurvey(c) => bound_survey(c, seed)?,
        ExperimentConfig::CoverDemo(c) => cover_demo(c, seed)?,
        ExperimentConfig::Monodromy(c) => monodromy(c)?,
        ExperimentConfig::GlaeserSuite(c) => glaeser_suite(c, seed)?,
        ExperimentConfig::WorkedTraces(c) => worked_traces(c)?,
    };
    Ok(ExperimentOutput {
        name: req.config.name().into(),
        seed,
        report,
        series,
    })
}

/// Write `manifest.json`, `<name>.json` and one CSV per series into `dir`.
pub fn write_outputs(dir: &Path, req: &ExperimentRequest, out: &ExperimentOutput) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let manifest = json!({
        "experiment": out.name,
        "seed": out.seed,
        "config": req.raw,
        "versions": {
            "rootreg": env!("CARGO_PKG_VERSION"),
            "calibration": Calibration::builtin().version,
        },
        "files": std::iter::once(format!("{}.json", out.name))
            .chain(out.series.iter().map(|s| format!("{}.csv", s.name)))
            .collect::<Vec<_>>(),
    });
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).unwrap())?;
    std::fs::write(dir.join(format!("{}.json", out.name)), out.report_json())?;
    for s in &out.series {
        std::fs::write(dir.join(format!("{}.csv", s.name)), s.to_csv())?;
    }
    Ok(())
}

fn seeds(seed: u64, stream: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| rng.gen()).collect()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Least squares `y = c x + d`; returns `(c, d, r^2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let c = sxy / sxx;
    let d = my - c * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - c * a - d).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    (c, d, 1.0 - ss_res / ss_tot)
}

// ---- sharpness --------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpnessConfig {
    pub degrees: Vec<usize>,
    /// `eps = 10^{-k}` for each `k`.
    pub eps_exponents: Vec<u32>,
    /// Geometric grid points per decade of `(eps, 1)`.
    pub points_per_decade: usize,
    /// Exponents `p = n/(n-1) - offset`; offset 0 is the critical one.
    pub p_offsets: Vec<f64>,
    /// Pair of `eps` exponents between which the relative change is reported.
    pub change_between: (u32, u32),
}

impl Default for SharpnessConfig {
    fn default() -> Self {
        SharpnessConfig {
            degrees: vec![2, 3, 4],
            eps_exponents: (2..=8).collect(),
            points_per_decade: 400,
            p_offsets: vec![0.0, 0.1],
            change_between: (6, 8),
        }
    }
}

/// `int_eps^1 (t^{1/n - 1}/n)^p dt`.
pub fn power_root_lp_power(n: usize, p: f64, eps: f64) -> f64 {
    let nf = n as f64;
    let g = p * (1.0 - 1.0 / nf);
    let k = nf.powf(-p);
    if (g - 1.0).abs() < 1e-14 {
        k * (1.0 / eps).ln()
    } else {
        k * (1.0 - eps.powf(1.0 - g)) / (1.0 - g)
    }
}

fn sharpness(c: &SharpnessConfig) -> Result<(Value, Vec<Series>)> {
    if c.degrees.iter().any(|&n| n < 2) || c.eps_exponents.len() < 2 {
        return Err(Error::Config("degrees must be >= 2 and at least two eps values are needed".into()));
    }
    let mut series = Series::new("sharpness", &["n", "p", "eps", "lp_power", "closed_form"]);
    let mut per_degree = Vec::new();
    for &n in &c.degrees {
        let nf = n as f64;
        let crit = nf / (nf - 1.0);
        let ps: Vec<f64> = c.p_offsets.iter().map(|o| crit - o).collect();
        // one tracked branch per eps, all exponents read off the same profile
        let mut values = vec![Vec::new(); ps.len()];
        for &k in &c.eps_exponents {
            let eps = 10f64.powi(-(k as i32));
            let fam = power_family(n, 1.0, (eps, 1.0));
            let opts = TrackOptions {
                grid: GridSpec::Geometric {
                    points: c.points_per_decade * k as usize,
                },
                ..Default::default()
            };
            let prof = track_curve(&fam, &opts)?.branch(0).slope_profile();
            for (pi, &p) in ps.iter().enumerate() {
                let v = prof.lp_power(p);
                values[pi].push(v);
                series.rows.push(vec![nf, p, eps, v, power_root_lp_power(n, p, eps)]);
            }
        }
        let logs: Vec<f64> = c.eps_exponents.iter().map(|&k| k as f64 * 10f64.ln()).collect();
        let idx = |k: u32| c.eps_exponents.iter().position(|&e| e == k);
        let mut by_p = Vec::new();
        for (pi, &p) in ps.iter().enumerate() {
            let (slope, intercept, r2) = linear_fit(&logs, &values[pi]);
            let closed = nf.powf(-p);
            let change = match (idx(c.change_between.0), idx(c.change_between.1)) {
                (Some(a), Some(b)) => Some((values[pi][b] - values[pi][a]).abs() / values[pi][a]),
                _ => None,
            };
            let (ea, eb) = (
                10f64.powi(-(c.change_between.0 as i32)),
                10f64.powi(-(c.change_between.1 as i32)),
            );
            let change_closed = (power_root_lp_power(n, p, eb) - power_root_lp_power(n, p, ea)).abs()
                / power_root_lp_power(n, p, ea);
            by_p.push(json!({
                "p": p,
                "offset": c.p_offsets[pi],
                "slope": slope,
                "intercept": intercept,
                "r_squared": r2,
                "critical_slope_closed_form": closed,
                "slope_rel_error": (slope - closed).abs() / closed,
                "change": change,
                "change_closed_form": change_closed,
                "values": values[pi],
            }));
        }
        per_degree.push(json!({ "n": n, "p_critical": crit, "exponents": by_p }));
    }
    Ok((
        json!({ "eps_exponents": c.eps_exponents, "degrees": per_degree }),
        vec![series],
    ))
}

// ---- bound survey -----------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSurveyConfig {
    pub degrees: Vec<usize>,
    pub families: usize,
    pub max_trig_degree: usize,
    /// Uniform steps of the coarse grid; the fine grid has twice as many.
    pub grid: usize,
    /// `p = n/(n-1) - p_offset`.
    pub p_offset: f64,
    /// The same coefficients reparametrized onto this domain.
    pub rescaled_domain: (f64, f64),
}

impl Default for BoundSurveyConfig {
    fn default() -> Self {
        BoundSurveyConfig {
            degrees: vec![2, 3, 4, 5],
            families: 100,
            max_trig_degree: 6,
            grid: 256,
            p_offset: 0.1,
            rescaled_domain: (0.0, 2.0),
        }
    }
}

/// `c(a + (t - lo) s)` for a linear change of parameter.
#[derive(Debug)]
struct Reparametrized {
    inner: CurveRef,
    lo: f64,
    a: f64,
    s: f64,
}

impl Curve for Reparametrized {
    fn jet(&self, t: f64, order: usize) -> Jet {
        let mut j = self.inner.jet(self.a + (t - self.lo) * self.s, order);
        let mut f = 1.0;
        for c in j.c.iter_mut() {
            *c *= f;
            f *= self.s;
        }
        j
    }
}

fn reparametrize(fam: &CurveFamily, to: (f64, f64)) -> CurveFamily {
    let (a, b) = fam.domain;
    let s = (b - a) / (to.1 - to.0);
    let coeffs = fam
        .curves()
        .unwrap()
        .iter()
        .map(|c| {
            Arc::new(Reparametrized {
                inner: c.clone(),
                lo: to.0,
                a,
                s,
            }) as CurveRef
        })
        .collect();
    CurveFamily::analytic(to, coeffs)
}

#[derive(Debug, Clone, Serialize)]
struct FamilyRatio {
    n: usize,
    index: usize,
    seed: u64,
    coefficient_scale: f64,
    ratio: f64,
    ratio_fine: f64,
    rescaled_ratio: f64,
    holder_consistent: bool,
    /// `max (holder quotient / lp_of_derivative - 1)` over branches and grids.
    holder_slack: f64,
    refinements: usize,
}

fn max_ratio(fam: &CurveFamily, points: usize, p: f64, scale: f64) -> Result<(f64, bool, f64, usize)> {
    let tr = track_curve(fam, &TrackOptions::uniform(points))?;
    let mut best: f64 = 0.0;
    let mut ok = true;
    let mut slack = f64::NEG_INFINITY;
    for b in 0..fam.degree {
        let r = regularity_report(&tr, b, p, fam.degree, scale)?;
        best = best.max(r.bound_ratio);
        ok &= r.holder_consistent;
        if r.lp_of_derivative > 0.0 {
            slack = slack.max(r.holder_quotient_sup / r.lp_of_derivative - 1.0);
        }
    }
    Ok((best, ok, slack, tr.refinements))
}

fn survey_family(n: usize, index: usize, seed: u64, c: &BoundSurveyConfig) -> Result<FamilyRatio> {
    let nf = n as f64;
    let p = nf / (nf - 1.0) - c.p_offset;
    let fam = random_trig_family(n, seed, c.max_trig_degree, (0.0, 1.0));
    let scale = coefficient_scale(&fam)?;
    let (ratio, ok1, s1, r1) = max_ratio(&fam, c.grid, p, scale)?;
    let (ratio_fine, ok2, s2, r2) = max_ratio(&fam, 2 * c.grid, p, scale)?;
    let resc = reparametrize(&fam, c.rescaled_domain);
    let rscale = coefficient_scale(&resc)?;
    let (rescaled_ratio, ..) = max_ratio(&resc, c.grid, p, rscale)?;
    Ok(FamilyRatio {
        n,
        index,
        seed,
        coefficient_scale: scale,
        ratio,
        ratio_fine,
        rescaled_ratio,
        holder_consistent: ok1 && ok2,
        holder_slack: s1.max(s2),
        refinements: r1 + r2,
    })
}

fn bound_survey(c: &BoundSurveyConfig, seed: u64) -> Result<(Value, Vec<Series>)> {
    if c.degrees.iter().any(|&n| n < 2) || c.families == 0 || c.grid < 2 {
        return Err(Error::Config("need degrees >= 2, families > 0 and grid >= 2".into()));
    }
    let jobs: Vec<(usize, usize, u64)> = c
        .degrees
        .iter()
        .flat_map(|&n| {
            seeds(seed, n as u64, c.families)
                .into_iter()
                .enumerate()
                .map(move |(i, s)| (n, i, s))
        })
        .collect();
    let results: Vec<Result<FamilyRatio>> = jobs.par_iter().map(|&(n, i, s)| survey_family(n, i, s, c)).collect();
    let mut series = Series::new(
        "bound_survey",
        &["n", "index", "coefficient_scale", "ratio", "ratio_fine", "rescaled_ratio"],
    );
    let mut per_degree = Vec::new();
    for &n in &c.degrees {
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        for (job, r) in jobs.iter().zip(&results) {
            if job.0 != n {
                continue;
            }
            match r {
                Ok(f) => rows.push(f.clone()),
                Err(e) => errors.push(json!({ "index": job.1, "seed": job.2, "error": e.to_string() })),
            }
        }
        for f in &rows {
            series.rows.push(vec![
                n as f64,
                f.index as f64,
                f.coefficient_scale,
                f.ratio,
                f.ratio_fine,
                f.rescaled_ratio,
            ]);
        }
        let max = |g: fn(&FamilyRatio) -> f64| rows.iter().map(g).fold(0.0, f64::max);
        let (m, mf) = (max(|f| f.ratio), max(|f| f.ratio_fine));
        let nf = n as f64;
        per_degree.push(json!({
            "n": n,
            "p": nf / (nf - 1.0) - c.p_offset,
            "families": rows.len(),
            "errors": errors,
            "max_ratio": m,
            "max_ratio_fine": mf,
            "refinement_change": (mf - m).abs() / m,
            "max_rescaled_ratio": max(|f| f.rescaled_ratio),
            "holder_consistent": rows.iter().all(|f| f.holder_consistent),
            "max_holder_slack": rows.iter().map(|f| f.holder_slack).fold(f64::NEG_INFINITY, f64::max),
            "finite": m.is_finite() && mf.is_finite(),
        }));
    }
    Ok((json!({ "degrees": per_degree }), vec![series]))
}

// ---- cover demo -------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverDemoConfig {
    pub instances: usize,
    /// Uniform points on which the overlap is counted.
    pub check_points: usize,
    pub d_range: (f64, f64),
    pub rate_range: (f64, f64),
}

impl Default for CoverDemoConfig {
    fn default() -> Self {
        CoverDemoConfig {
            instances: 50,
            check_points: 10_000,
            d_range: (0.05, 0.3),
            rate_range: (0.5, 2.0),
        }
    }
}

const VANISHING: [&str; 3] = ["neither", "left", "both"];

/// Random radicals on (0, 1) whose common zeros are the requested endpoints.
fn cover_instance(seed: u64, kind: usize, c: &CoverDemoConfig) -> Result<GrowthBudget> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(1..=3);
    let mut radicals = Vec::new();
    for _ in 0..count {
        let index = rng.gen_range(1..=4);
        let base = [
            C64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..2.0 * PI)),
            C64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
            C64::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)),
        ];
        // multiply by t or t (1 - t)
        let factor: &[f64] = match kind {
            0 => &[1.0],
            1 => &[0.0, 1.0],
            _ => &[0.0, 1.0, -1.0],
        };
        let mut coeffs = vec![C64::default(); base.len() + factor.len() - 1];
        for (i, b) in base.iter().enumerate() {
            for (j, f) in factor.iter().enumerate() {
                coeffs[i + j] += b * f;
            }
        }
        radicals.push(Radical::new(Arc::new(PolyCurve(coeffs)), index));
    }
    let l = rng.gen_range(c.rate_range.0..c.rate_range.1);
    let d = rng.gen_range(c.d_range.0..c.d_range.1);
    GrowthBudget::constant(l, d, radicals, (0.0, 1.0))
}

/// Intervals of the fixed seven-interval instance with a finite selection.
pub const SEVEN_INTERVALS: [(f64, f64); 7] = [
    (0.0, 0.3),
    (-0.1, 0.25),
    (0.2, 0.6),
    (0.25, 0.5),
    (0.45, 0.8),
    (0.55, 0.9),
    (0.7, 1.05),
];

/// Exhaustive search over all subcollections covering `target` with overlap
/// at most two; returns the number of such subcollections and the smallest size.
pub fn brute_force_subcovers(iv: &[(f64, f64)], target: (f64, f64)) -> (usize, Option<usize>) {
    let mut count = 0;
    let mut smallest = None;
    for mask in 1u32..1 << iv.len() {
        let sub: Vec<(f64, f64)> = (0..iv.len()).filter(|i| mask >> i & 1 == 1).map(|i| iv[i]).collect();
        if covers(&sub, target) && max_overlap(&sub) <= 2 {
            count += 1;
            smallest = Some(smallest.map_or(sub.len(), |s: usize| s.min(sub.len())));
        }
    }
    (count, smallest)
}

fn cover_demo(c: &CoverDemoConfig, seed: u64) -> Result<(Value, Vec<Series>)> {
    if c.check_points < 2 || !(c.d_range.0 > 0.0 && c.d_range.0 < c.d_range.1) || !(c.rate_range.0 > 0.0 && c.rate_range.0 < c.rate_range.1) {
        return Err(Error::Config("need check_points >= 2 and increasing positive ranges".into()));
    }
    let mut series = Series::new("cover_records", &["instance", "s_minus", "s_plus", "t1", "ell", "second_kind"]);
    let mut instances = Vec::new();
    for (i, s) in seeds(seed, 0, c.instances).into_iter().enumerate() {
        let kind = i % 3;
        let budget = cover_instance(s, kind, c)?;
        let rep = extract_subcover(&budget)?;
        let iv = rep.intervals();
        let mut grid_overlap = 0;
        let mut uncovered_points = 0;
        for k in 0..c.check_points {
            let t = (k as f64 + 0.5) / c.check_points as f64;
            let m = iv.iter().filter(|j| j.0 < t && t < j.1).count();
            grid_overlap = grid_overlap.max(m);
            if m == 0 {
                uncovered_points += 1;
            }
        }
        let bound = 2.0 * rep.domain_length + rep.eps_len * rep.records.len() as f64;
        let max_residual = rep.records.iter().map(|r| r.residual).fold(0.0, f64::max);
        for r in &rep.records {
            series.rows.push(vec![
                i as f64,
                r.s_minus,
                r.s_plus,
                r.t1,
                r.ell as f64,
                (r.kind == IntervalKind::Second) as u8 as f64,
            ]);
        }
        let uncovered_len: f64 = rep.components.iter().map(|c| c.uncovered).sum();
        instances.push(json!({
            "index": i,
            "seed": s,
            "vanishing": VANISHING[kind],
            "radicals": budget.radicals.len(),
            "d": budget.d,
            "records": rep.records.len(),
            "max_overlap": rep.max_overlap,
            "grid_max_overlap": grid_overlap,
            "uncovered_points": uncovered_points,
            "uncovered_length": uncovered_len,
            "total_length": rep.total_length,
            "length_bound": bound,
            "length_ok": rep.total_length <= bound,
            "max_residual": max_residual,
            "residual_ok": max_residual <= 1e-8,
        }));
    }
    let all = |key: &str| instances.iter().all(|v| v[key].as_bool().unwrap_or(false));
    let overlap_ok = instances.iter().all(|v| v["grid_max_overlap"].as_u64().unwrap() <= 2);
    let target = (0.0, 1.0);
    let sel = select_finite_subcover(&SEVEN_INTERVALS, target);
    let (count, smallest) = brute_force_subcovers(&SEVEN_INTERVALS, target);
    let sel_valid = sel.as_ref().map_or(false, |s| {
        let sub: Vec<(f64, f64)> = s.iter().map(|&i| SEVEN_INTERVALS[i]).collect();
        covers(&sub, target) && max_overlap(&sub) <= 2
    });
    let seven = json!({
        "intervals": SEVEN_INTERVALS,
        "selection": sel,
        "selection_valid": sel_valid,
        "brute_force_subcovers": count,
        "brute_force_smallest": smallest,
        "agrees": sel.is_some() == (count > 0) && (sel.is_none() || sel_valid),
    });
    Ok((
        json!({
            "record_tolerance": RECORD_TOL,
            "instances": instances,
            "all_overlap_ok": overlap_ok,
            "all_length_ok": all("length_ok"),
            "all_residual_ok": all("residual_ok"),
            "seven_interval": seven,
        }),
        vec![series],
    ))
}

// ---- monodromy --------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromyConfig {
    pub degrees: Vec<usize>,
    /// Uniform grids for the loop; the permutation must agree across them.
    pub refinements: Vec<usize>,
    pub boxes: Vec<BoxSpec>,
    pub edge_points: usize,
}

impl Default for MonodromyConfig {
    fn default() -> Self {
        let b = |x, y, n| BoxSpec { x, y, nx: n, ny: n };
        MonodromyConfig {
            degrees: vec![2, 3],
            refinements: vec![64, 128],
            boxes: vec![
                b((-1.0, 1.0), (-1.0, 1.0), 3),
                b((-1.0, 1.0), (-1.0, 1.0), 5),
                b((-0.35, 1.65), (-0.6, 1.4), 4),
                b((-1.3, 0.7), (-0.25, 1.75), 6),
                b((0.5, 1.5), (0.5, 1.5), 4),
                b((-1.5, -0.5), (-1.0, 1.0), 3),
            ],
            edge_points: 16,
        }
    }
}

/// `Z^2 - (x + i y)`.
fn sqrt_field(x: f64, y: f64) -> MonicPolynomial {
    MonicPolynomial::new(vec![C64::default(), -C64::new(x, y)])
}

/// Counterclockwise boundary of a rectangle, parametrized by `s` in `[0, 4]`.
struct RectLoop {
    x: (f64, f64),
    y: (f64, f64),
}

impl PolyPath for RectLoop {
    fn degree(&self) -> usize {
        2
    }

    fn domain(&self) -> (f64, f64) {
        (0.0, 4.0)
    }

    fn poly_at(&self, s: f64) -> MonicPolynomial {
        let (x0, x1, y0, y1) = (self.x.0, self.x.1, self.y.0, self.y.1);
        let (x, y) = match s {
            s if s <= 1.0 => (x0 + (x1 - x0) * s, y0),
            s if s <= 2.0 => (x1, y0 + (y1 - y0) * (s - 1.0)),
            s if s <= 3.0 => (x1 - (x1 - x0) * (s - 2.0), y1),
            s => (x0, y1 - (y1 - y0) * (s - 3.0)),
        };
        sqrt_field(x, y)
    }
}

fn monodromy(c: &MonodromyConfig) -> Result<(Value, Vec<Series>)> {
    if c.refinements.is_empty() || c.degrees.iter().any(|&n| n == 0) {
        return Err(Error::Config("need at least one refinement and positive degrees".into()));
    }
    let mut loops = Vec::new();
    for &n in &c.degrees {
        let fam = unit_loop_family(n);
        let mut runs = Vec::new();
        for &g in &c.refinements {
            let r = monodromy_loop(&fam, &TrackOptions::uniform(g))?;
            runs.push(json!({ "grid": g, "permutation": r.permutation, "cycle_type": r.cycle_type }));
        }
        let stable = runs.windows(2).all(|w| w[0]["permutation"] == w[1]["permutation"]);
        let single_cycle = runs[0]["cycle_type"] == json!([n]);
        loops.push(json!({ "n": n, "runs": runs, "stable": stable, "single_cycle": single_cycle }));
    }
    let field = FnField { degree: 2, f: sqrt_field };
    let mut boxes = Vec::new();
    let mut series = Series::new("cell_monodromy", &["box", "i", "j", "encloses_origin", "nontrivial"]);
    for (bi, b) in c.boxes.iter().enumerate() {
        if b.nx == 0 || b.ny == 0 || !(b.x.0 < b.x.1 && b.y.0 < b.y.1) {
            return Err(Error::Config(format!("boxes[{bi}]: need nx, ny > 0 and increasing ranges")));
        }
        let opts = BoxOptions {
            nx: b.nx,
            ny: b.ny,
            p: 1.5,
            edge_points: c.edge_points,
            branch: 0,
        };
        let xs: Vec<f64> = (0..=b.nx).map(|i| b.x.0 + (b.x.1 - b.x.0) * i as f64 / b.nx as f64).collect();
        let ys: Vec<f64> = (0..=b.ny).map(|j| b.y.0 + (b.y.1 - b.y.0) * j as f64 / b.ny as f64).collect();
        let encloses = |i: usize, j: usize| xs[i] < 0.0 && 0.0 < xs[i + 1] && ys[j] < 0.0 && 0.0 < ys[j + 1];
        let contains_origin = b.x.0 < 0.0 && 0.0 < b.x.1 && b.y.0 < 0.0 && 0.0 < b.y.1;
        // every cell loop tracked on its own
        let mut cells_ok = true;
        for j in 0..b.ny {
            for i in 0..b.nx {
                let rl = RectLoop {
                    x: (xs[i], xs[i + 1]),
                    y: (ys[j], ys[j + 1]),
                };
                let r = monodromy_loop(&rl, &TrackOptions::uniform(4 * c.edge_points))?;
                let nontrivial = r.permutation != [0, 1];
                cells_ok &= nontrivial == encloses(i, j);
                series.rows.push(vec![
                    bi as f64,
                    i as f64,
                    j as f64,
                    encloses(i, j) as u8 as f64,
                    nontrivial as u8 as f64,
                ]);
            }
        }
        let entry = match track_box(&field, b.x, b.y, &opts) {
            Err(Error::MonodromyObstruction { i, j, permutation }) => json!({
                "obstruction": { "i": i, "j": j, "permutation": permutation },
                "witness_encloses_origin": encloses(i, j),
            }),
            Ok(rep) => json!({ "obstruction": null, "lp_gradient": rep.lp_gradient }),
            Err(e) => return Err(e),
        };
        let expected = entry["obstruction"].is_null() != contains_origin
            && (!contains_origin || entry["witness_encloses_origin"] == json!(true));
        boxes.push(json!({
            "box": b,
            "contains_origin": contains_origin,
            "result": entry,
            "cell_loops_agree": cells_ok,
            "as_expected": expected && cells_ok,
        }));
    }
    Ok((json!({ "loops": loops, "boxes": boxes }), vec![series]))
}

// ---- glaeser suite ----------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlaeserSuiteConfig {
    pub interpolation_cases: usize,
    pub interpolation_max_degree: usize,
    pub check_points: usize,
    pub split_cases: usize,
    pub split_max_degree: usize,
    /// Relative perturbation of the factor coefficients before Newton.
    pub perturbation: f64,
    pub newton_max_iter: usize,
    pub radical_cases: usize,
    /// Grids on which the radical identity is compared; the last is the finest.
    pub radical_grids: Vec<usize>,
}

impl Default for GlaeserSuiteConfig {
    fn default() -> Self {
        GlaeserSuiteConfig {
            interpolation_cases: 500,
            interpolation_max_degree: 4,
            check_points: 10_000,
            split_cases: 200,
            split_max_degree: 6,
            perturbation: 0.01,
            newton_max_iter: 8,
            radical_cases: 20,
            radical_grids: vec![4096, 16384],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct InterpolationCase {
    m: usize,
    alpha: f64,
    a: f64,
    b: f64,
    big_m: f64,
    hypothesis_holds: bool,
    branch: String,
    /// `max_j |a_j| / bound_j`.
    worst_ratio: f64,
    violated: bool,
}

fn interpolation_case(seed: u64, c: &GlaeserSuiteConfig) -> Result<InterpolationCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.gen_range(1..=c.interpolation_max_degree);
    let alpha: f64 = rng.gen_range(0.05..=1.0);
    let b = 10f64.powf(rng.gen_range(-1.0..1.0));
    let big_m = if rng.gen_bool(0.2) { 0.0 } else { 10f64.powf(rng.gen_range(-2.0..3.0)) };
    let coeffs: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0) * b.powi(-(m as i32))).collect();
    let d = m as f64 + alpha;
    let eval = |x: f64| coeffs.iter().rev().fold(0.0, |acc, a| (acc + a) * x);
    let xs = crate::spaces::uniform_grid(0.0, b, c.check_points - 1);
    let envelope = xs
        .iter()
        .map(|&x| eval(x).abs() / (1.0 + big_m * x.powf(d)))
        .fold(0.0, f64::max);
    // A around the tight value; below it the hypothesis fails on the grid
    let a = envelope * rng.gen_range(0.9..1.5);
    let hypothesis_holds = xs.iter().all(|&x| eval(x).abs() <= a * (1.0 + big_m * x.powf(d)));
    let bound = interpolation_bound(m, alpha, a, b, big_m)?;
    let worst = coeffs
        .iter()
        .zip(&bound.per_coefficient_bounds)
        .map(|(x, y)| x.abs() / y)
        .fold(0.0, f64::max);
    Ok(InterpolationCase {
        m,
        alpha,
        a,
        b,
        big_m,
        hypothesis_holds,
        branch: format!("{:?}", bound.branch),
        worst_ratio: worst,
        violated: hypothesis_holds && worst > 1.0,
    })
}

#[derive(Debug, Clone, Serialize)]
struct SplitCase {
    degree: usize,
    left_degree: usize,
    product_error: f64,
    resultant_abs: f64,
    newton_iterations: Option<usize>,
    newton_error: Option<String>,
}

fn split_case(seed: u64, c: &GlaeserSuiteConfig) -> Result<SplitCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=c.split_max_degree);
    let mut coeffs = vec![C64::default()];
    for _ in 1..n {
        coeffs.push(C64::from_polar(rng.gen_range(0.1..2.0), rng.gen_range(0.0..2.0 * PI)));
    }
    let p = MonicPolynomial::new(coeffs);
    let s = split_clusters(&p, 1e-6, 1e-13)?;
    let prod = s.left.mul(&s.right);
    let err = prod
        .coeffs
        .iter()
        .zip(&p.coeffs)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / (1.0 + p.max_abs_coeff());
    let mut perturb = |q: &MonicPolynomial| {
        MonicPolynomial::new(
            q.coeffs
                .iter()
                .map(|x| x + x * c.perturbation * C64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)))
                .collect(),
        )
    };
    let (b0, c0) = (perturb(&s.left), perturb(&s.right));
    let (iterations, error) = match refine_split_newton(&p, &b0, &c0, 1e-12, c.newton_max_iter) {
        Ok(r) => (Some(r.iterations), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SplitCase {
        degree: n,
        left_degree: s.left.degree(),
        product_error: err,
        resultant_abs: s.resultant.norm(),
        newton_iterations: iterations,
        newton_error: error,
    })
}

/// Smooth nonvanishing `g = e^{i phi} (1 + h)` with `sup |h| <= 0.7`.
fn radical_g(seed: u64) -> CurveRef {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = random_trig_curve(&mut rng, 4, (0.0, 1.0));
    let sup = (0..=512)
        .map(|i| h.value(i as f64 / 512.0).norm())
        .fold(0.0, f64::max);
    let k = C64::from_polar(0.7 / sup.max(1e-12), rng.gen_range(0.0..2.0 * PI));
    h.cos.iter_mut().chain(h.sin.iter_mut()).for_each(|x| *x *= k);
    h.cos[0] += k / k.norm();
    Arc::new(h)
}

#[derive(Debug, Clone, Serialize)]
struct RadicalCase {
    n: usize,
    p: f64,
    /// `(grid, weak norm of f', weak norm of Lambda / n, relative difference)`.
    grids: Vec<(usize, f64, f64, f64)>,
}

fn radical_case(index: usize, seed: u64, c: &GlaeserSuiteConfig) -> Result<RadicalCase> {
    let n = 2 + index % 3;
    let nf = n as f64;
    let p = nf / (nf - 1.0);
    let g = radical_g(seed);
    let fam = radical_family(n, (0.0, 1.0), g.clone());
    let mut grids = Vec::new();
    for &pts in &c.radical_grids {
        let tr = track_curve(&fam, &TrackOptions::uniform(pts))?;
        let lhs = branch_derivative_weak_norm(&tr.grid, &tr.branches[0], p);
        let rhs = envelope_profile(&*g, &tr.grid, 1.0 / nf).weak_lp(p) / nf;
        grids.push((pts, lhs, rhs, (lhs - rhs).abs() / rhs));
    }
    Ok(RadicalCase { n, p, grids })
}

fn glaeser_suite(c: &GlaeserSuiteConfig, seed: u64) -> Result<(Value, Vec<Series>)> {
    if c.interpolation_max_degree == 0 || c.split_max_degree < 2 || c.check_points < 2 || c.radical_grids.is_empty() {
        return Err(Error::Config("invalid glaeser-suite sizes".into()));
    }
    let interp: Vec<InterpolationCase> = seeds(seed, 1, c.interpolation_cases)
        .par_iter()
        .map(|&s| interpolation_case(s, c))
        .collect::<Result<_>>()?;
    let splits: Vec<SplitCase> = seeds(seed, 2, c.split_cases)
        .par_iter()
        .map(|&s| split_case(s, c))
        .collect::<Result<_>>()?;
    let radicals: Vec<RadicalCase> = seeds(seed, 3, c.radical_cases)
        .into_par_iter()
        .enumerate()
        .map(|(i, s)| radical_case(i, s, c))
        .collect::<Result<_>>()?;

    let mut transforms = Vec::new();
    for m in 1..=4 {
        for &alpha in &[0.25, 0.5, 1.0] {
            let c0 = 3.0;
            let mixed = glaeser_constant_transform(c0, m, alpha, GlaeserForm::Mixed);
            let back = glaeser_constant_transform(mixed, m, alpha, GlaeserForm::TwoTerm);
            transforms.push(json!({ "m": m, "alpha": alpha, "c": c0, "mixed": mixed, "round_trip": back, "dominates": back >= c0 }));
        }
    }

    let mut s_int = Series::new("interpolation", &["m", "alpha", "a", "b", "big_m", "hypothesis", "worst_ratio"]);
    for r in &interp {
        s_int.rows.push(vec![r.m as f64, r.alpha, r.a, r.b, r.big_m, r.hypothesis_holds as u8 as f64, r.worst_ratio]);
    }
    let mut s_rad = Series::new("radical_identity", &["case", "n", "grid", "weak_branch", "weak_envelope", "rel_diff"]);
    for (i, r) in radicals.iter().enumerate() {
        for g in &r.grids {
            s_rad.rows.push(vec![i as f64, r.n as f64, g.0 as f64, g.1, g.2, g.3]);
        }
    }
    let held = interp.iter().filter(|r| r.hypothesis_holds).count();
    let report = json!({
        "interpolation": {
            "cases": interp.len(),
            "hypothesis_held": held,
            "violations": interp.iter().filter(|r| r.violated).count(),
            "max_ratio_when_held": interp.iter().filter(|r| r.hypothesis_holds).map(|r| r.worst_ratio).fold(0.0, f64::max),
        },
        "splitting": {
            "cases": splits.len(),
            "max_product_error": splits.iter().map(|s| s.product_error).fold(0.0, f64::max),
            "min_resultant_abs": splits.iter().map(|s| s.resultant_abs).fold(f64::INFINITY, f64::min),
            "max_newton_iterations": splits.iter().filter_map(|s| s.newton_iterations).max(),
            "newton_failures": splits.iter().filter(|s| s.newton_iterations.is_none()).count(),
            "cases_detail": to_value(&splits),
        },
        "radical_identity": {
            "cases": to_value(&radicals),
            "max_rel_diff_finest": radicals.iter().map(|r| r.grids.last().unwrap().3).fold(0.0, f64::max),
        },
        "constant_transforms": transforms,
    });
    Ok((report, vec![s_int, s_rad]))
}

// ---- worked traces ----------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkedTracesConfig {
    pub families: Vec<String>,
    pub constants: PipelineConstants,
    /// Defaults to the degree of each family.
    pub max_depth: Option<usize>,
}

impl Default for WorkedTracesConfig {
    fn default() -> Self {
        WorkedTracesConfig {
            families: vec!["worked-cubic".into(), "worked-quartic".into()],
            constants: PipelineConstants::default(),
            max_depth: None,
        }
    }
}

fn trace_summary(name: &str, rep: &TraceReport) -> Value {
    json!({
        "family": name,
        "degree": rep.degree,
        "extended_domain": rep.extended_domain,
        "top_cover": rep.top_cover,
        "summary": rep.summary,
        "complete": rep.summary.complete(),
    })
}

fn worked_traces(c: &WorkedTracesConfig) -> Result<(Value, Vec<Series>)> {
    let mut out = Vec::new();
    let mut series = Series::new("trace_nodes", &["family", "depth", "degree", "lo", "hi", "base", "checks", "failed"]);
    for (fi, name) in c.families.iter().enumerate() {
        let fam = match name.as_str() {
            "worked-cubic" => worked_cubic_family(),
            "worked-quartic" => worked_quartic_family(),
            other => {
                return Err(Error::Config(format!(
                    "families[{fi}]: unknown family `{other}`, expected worked-cubic or worked-quartic"
                )))
            }
        };
        let rep = run_induction_trace(&fam, &c.constants, c.max_depth.unwrap_or(fam.degree))?;
        rep.walk(|node| {
            series.rows.push(vec![
                fi as f64,
                node.depth as f64,
                node.degree as f64,
                node.interval.0,
                node.interval.1,
                node.base,
                node.checks.len() as f64,
                node.checks.iter().filter(|c| c.failed()).count() as f64,
            ]);
        });
        out.push(trace_summary(name, &rep));
    }
    Ok((json!({ "constants": c.constants, "families": out }), vec![series]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_is_config_error() {
        let e = parse_config(&json!({"name": "nope"})).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("nope"));
    }

    #[test]
    fn unknown_field_names_its_path() {
        let e = parse_config(&json!({"name": "sharpness", "degress": [2]})).unwrap_err();
        assert!(e.is_config());
        assert!(e.to_string().contains("degress"), "{e}");
        let e = parse_config(&json!({"name": "cover-demo", "instances": "many"})).unwrap_err();
        assert!(e.to_string().contains("instances"), "{e}");
    }

    #[test]
    fn seed_is_separate_from_fields() {
        let r = parse_config(&json!({"name": "cover-demo", "seed": 7, "instances": 3})).unwrap();
        assert_eq!(r.seed, 7);
        match r.config {
            ExperimentConfig::CoverDemo(c) => assert_eq!(c.instances, 3),
            _ => panic!(),
        }
        assert!(parse_config(&json!({"name": "cover-demo", "seed": -1})).unwrap_err().is_config());
    }

    #[test]
    fn critical_integral_is_logarithmic() {
        // (1/3)^{3/2} log(1/eps)
        let v = power_root_lp_power(3, 1.5, 1e-4);
        assert!((v - 3f64.powf(-1.5) * 1e4f64.ln()).abs() < 1e-14);
        // n = 2, p = 1: int t^{-1/2}/2 = 1 - sqrt(eps)
        assert!((power_root_lp_power(2, 1.0, 1e-4) - 0.99).abs() < 1e-14);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (c, d, r2) = linear_fit(&x, &y);
        assert!((c - 2.5).abs() < 1e-12 && (d + 1.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reparametrized_jet_uses_chain_rule() {
        let f: CurveRef = crate::curve::poly_curve(&[0.0, 0.0, 1.0]);
        let r = Reparametrized { inner: f, lo: 0.0, a: 0.0, s: 0.5 };
        // (t/2)^2 at t = 1: value 1/4, derivative 1/2, second derivative 1/2
        let j = r.jet(1.0, 2);
        assert!((j.derivative(0).re - 0.25).abs() < 1e-15);
        assert!((j.derivative(1).re - 0.5).abs() < 1e-15);
        assert!((j.derivative(2).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rectangle_loop_around_branch_point() {
        let around = RectLoop { x: (-1.0, 1.0), y: (-1.0, 1.0) };
        assert_eq!(monodromy_loop(&around, &TrackOptions::uniform(64)).unwrap().permutation, vec![1, 0]);
        let away = RectLoop { x: (0.5, 1.0), y: (-1.0, 1.0) };
        assert_eq!(monodromy_loop(&away, &TrackOptions::uniform(64)).unwrap().permutation, vec![0, 1]);
    }

    #[test]
    fn small_cover_demo_is_deterministic() {
        let req = parse_config(&json!({"name": "cover-demo", "seed": 3, "instances": 4, "check_points": 500})).unwrap();
        let a = run_experiment(&req).unwrap();
        let b = run_experiment(&req).unwrap();
        assert_eq!(a.report_json(), b.report_json());
        assert_eq!(a.series[0].to_csv(), b.series[0].to_csv());
        assert_eq!(a.report["all_overlap_ok"], json!(true));
    }
}
