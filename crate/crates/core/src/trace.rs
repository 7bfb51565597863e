//! Inductive trace: Whitney-extend a family, cover its parameter interval,
//! split the polynomial on every interval, and recurse into the factors,
//! checking the intermediate estimates at every node.

use crate::covers::{extract_subcover, extract_subcover_on, grow_interval, CoverReport, GrowthBudget, IntervalKind, IntervalRecord, Radical, Rate};
use crate::curve::{Curve, CurveFamily, CurveRef};
use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::poly::{lift_split_jets, refine_split_newton, split_clusters, tschirnhausen_jets, MonicPolynomial};
use crate::quad::integrate;
use crate::spaces::{whitney_extend, WhitneyReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use smallvec::SmallVec;
use std::sync::Arc;

const CALIBRATION_JSON: &str = include_str!("../data/calibration.json");

/// Checks whose right-hand side carries an unspecified constant.
pub const CALIBRATED_CHECKS: [&str; 6] = ["coeff_derivatives", "factor_coeff_derivatives", "transformed_derivatives", "split_slope", "root_derivative_l1", "root_derivative_lp_mid"];
/// Safety factor applied to the largest observed ratio.
pub const CALIBRATION_FACTOR: f64 = 1.5;

const IDENTITY_TOL: f64 = 1e-8;
const PRODUCT_TOL: f64 = 1e-8;
const CIRCLE_POINTS: usize = 256;
const LIP_CELLS: usize = 1024;
const TOP_SEEDS: usize = 64;
/// Sampled suprema underestimate; the global Lipschitz bound is padded.
const LIP_MARGIN: f64 = 1.01;

/// Constants keyed by check name and top degree.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Calibration {
    pub version: u32,
    pub factor: f64,
    pub constants: BTreeMap<String, BTreeMap<usize, f64>>,
}

impl Calibration {
    /// The frozen constants shipped with the crate.
    pub fn builtin() -> Self {
        serde_json::from_str(CALIBRATION_JSON).expect("bundled calibration file parses")
    }

    pub fn empty() -> Self {
        Calibration {
            version: 0,
            factor: CALIBRATION_FACTOR,
            constants: BTreeMap::new(),
        }
    }

    pub fn get(&self, name: &str, degree: usize) -> Option<f64> {
        self.constants.get(name)?.get(&degree).copied()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConstants {
    /// Budget constant of the top level.
    pub b: f64,
    /// Budget constant of every splitting level.
    pub d: f64,
    /// Sample points per node for the sup-norm checks.
    pub samples: usize,
    /// Nodes of the split continuation table per interval.
    pub table_points: usize,
    pub newton_tol: f64,
}

impl Default for PipelineConstants {
    fn default() -> Self {
        PipelineConstants {
            b: 0.05,
            d: 0.02,
            samples: 65,
            table_points: 17,
            newton_tol: 1e-14,
        }
    }
}

impl PipelineConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0 / 3.0) {
            return Err(Error::Config(format!("constants.b = {} must lie in (0, 1/3)", self.b)));
        }
        if !(self.d > 0.0 && self.d < 1.0 / 3.0) {
            return Err(Error::Config(format!("constants.d = {} must lie in (0, 1/3)", self.d)));
        }
        if self.samples < 3 {
            return Err(Error::Config("constants.samples must be at least 3".into()));
        }
        if self.table_points < 2 {
            return Err(Error::Config("constants.table_points must be at least 2".into()));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::Config("constants.newton_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// An inequality with explicit constants.
    Estimate,
    /// An inequality with a frozen calibrated constant.
    Calibrated,
    /// A calibrated inequality without a stored constant; never fails.
    Uncalibrated,
    /// Recorded for inspection only.
    Diagnostic,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
    pub kind: CheckKind,
}

impl CheckResult {
    fn new(name: &str, lhs: f64, rhs: f64, kind: CheckKind) -> Self {
        let passed = match kind {
            CheckKind::Uncalibrated => true,
            _ => lhs.is_finite() && lhs <= rhs * (1.0 + 1e-9),
        };
        CheckResult {
            name: name.into(),
            lhs,
            rhs,
            slack: rhs - lhs,
            passed,
            kind,
        }
    }

    fn calibrated(name: &str, ratio: f64, top_degree: usize, cal: &Calibration) -> Self {
        match cal.get(name, top_degree) {
            Some(c) => Self::new(name, ratio, c, CheckKind::Calibrated),
            None => Self::new(name, ratio, f64::NAN, CheckKind::Uncalibrated),
        }
    }

    /// Whether this result counts as a failed estimate.
    pub fn failed(&self) -> bool {
        !self.passed && matches!(self.kind, CheckKind::Estimate | CheckKind::Calibrated)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitSummary {
    pub left_degree: usize,
    pub right_degree: usize,
    pub gap: f64,
    pub ratio: f64,
    pub resultant_abs: f64,
    /// Radius in normalized coefficient space below which the split persists.
    pub rho_proxy: f64,
    /// Length of the normalized coefficient curve over the interval.
    pub model_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverStats {
    pub records: usize,
    pub max_overlap: usize,
    pub total_length: f64,
    pub domain_length: f64,
    pub eps_len: f64,
    pub uncovered: f64,
    pub max_residual: f64,
}

impl CoverStats {
    fn from_report(c: &CoverReport) -> Self {
        CoverStats {
            records: c.records.len(),
            max_overlap: c.max_overlap,
            total_length: c.total_length,
            domain_length: c.domain_length,
            eps_len: c.eps_len,
            uncovered: c.components.iter().map(|s| s.uncovered).sum(),
            max_residual: c.records.iter().map(|r| r.residual).fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorTrace {
    pub degree: usize,
    pub cover: Option<CoverStats>,
    pub error: Option<String>,
    pub children: Vec<TraceNode>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceNode {
    pub depth: usize,
    pub degree: usize,
    pub interval: (f64, f64),
    pub base: f64,
    pub dominant: usize,
    /// `|a_k(t0)|^{1/k}`
    pub scale: f64,
    pub kind: IntervalKind,
    pub rate: f64,
    pub budget_residual: f64,
    pub split: Option<SplitSummary>,
    pub checks: Vec<CheckResult>,
    pub aborted: Option<String>,
    pub factors: Vec<FactorTrace>,
}

impl TraceNode {
    /// Depth-first visit of this node and its descendants.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TraceNode)) {
        f(self);
        for fac in &self.factors {
            for c in &fac.children {
                c.walk(f);
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TraceSummary {
    pub nodes: usize,
    pub max_depth: usize,
    pub checks: usize,
    pub failed: usize,
    pub aborted: usize,
    pub uncalibrated: usize,
    pub factor_errors: usize,
    pub failures: BTreeMap<String, usize>,
}

impl TraceSummary {
    /// No failed estimate, no aborted node, no failed child cover.
    pub fn complete(&self) -> bool {
        self.failed == 0 && self.aborted == 0 && self.factor_errors == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub degree: usize,
    pub domain: (f64, f64),
    pub extended_domain: (f64, f64),
    pub whitney: Option<WhitneyReport>,
    pub constants: PipelineConstants,
    pub max_depth: usize,
    pub top_cover: Option<CoverStats>,
    pub nodes: Vec<TraceNode>,
    pub summary: TraceSummary,
}

impl TraceReport {
    pub fn walk<'a>(&'a self, mut f: impl FnMut(&'a TraceNode)) {
        for n in &self.nodes {
            n.walk(&mut f);
        }
    }

    fn summarize(&mut self) {
        let mut s = TraceSummary::default();
        self.walk(|n| {
            s.nodes += 1;
            s.max_depth = s.max_depth.max(n.depth);
            if n.aborted.is_some() {
                s.aborted += 1;
            }
            s.factor_errors += n.factors.iter().filter(|f| f.error.is_some()).count();
            for c in &n.checks {
                s.checks += 1;
                if c.kind == CheckKind::Uncalibrated {
                    s.uncalibrated += 1;
                }
                if c.failed() {
                    s.failed += 1;
                    *s.failures.entry(c.name.clone()).or_default() += 1;
                }
            }
        });
        self.summary = s;
    }
}

// ---- curves -------------------------------------------------------------

/// Coefficient `index` (1-based) of the Tschirnhausen form of a family.
#[derive(Debug)]
struct TschirnhausenCurve {
    coeffs: Arc<Vec<CurveRef>>,
    index: usize,
}

impl Curve for TschirnhausenCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        let jets: Vec<Jet> = self.coeffs.iter().map(|c| c.jet(t, order)).collect();
        tschirnhausen_jets(&jets).swap_remove(self.index - 1)
    }
}

/// `sum_s c_s delta^s`
fn taylor_value(j: &Jet, delta: f64) -> C64 {
    j.c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * delta + c)
}

/// Re-expand a jet at `t + delta`, keeping orders up to `order`
/// (repeated synthetic division).
fn shift_jet(j: &Jet, delta: f64, order: usize) -> Jet {
    let r = j.order();
    let keep = order.min(r);
    let mut out = Jet::zero(order);
    if keep <= 1 {
        // value and slope by Horner
        let (mut v, mut d) = (j.c[r], C64::new(0.0, 0.0));
        for m in (0..r).rev() {
            d = d * delta + v;
            v = v * delta + j.c[m];
        }
        out.c[0] = v;
        if keep == 1 {
            out.c[1] = d;
        }
        return out;
    }
    let mut a: SmallVec<[C64; 16]> = SmallVec::from_slice(&j.c);
    for i in 0..=keep {
        for m in (i..r).rev() {
            let next = a[m + 1];
            a[m] += next * delta;
        }
    }
    out.c[..=keep].copy_from_slice(&a[..=keep]);
    out
}

/// Coefficients of `s^{deg} P(Z / s)`: roots multiplied by `s`.
fn scale_poly(p: &MonicPolynomial, s: f64) -> MonicPolynomial {
    MonicPolynomial::new(p.coeffs.iter().enumerate().map(|(j, c)| c * s.powi(j as i32 + 1)).collect())
}

fn scale_jets(a: &[Jet], s: f64) -> Vec<Jet> {
    a.iter()
        .enumerate()
        .map(|(j, c)| c.scale(C64::new(s.powi(j as i32 + 1), 0.0)))
        .collect()
}

/// Factor coefficient jets on a grid, continued from a base split. The grid
/// is uniform on each segment between break points, where the coefficients
/// may be only finitely smooth; no expansion crosses a break.
#[derive(Debug)]
struct SplitTable {
    /// interior break points, increasing
    cuts: Vec<f64>,
    /// `[segment][node]`
    grid: Vec<Vec<f64>>,
    /// `[side][segment][node][i - 1]` for the raw and the Tschirnhausen factor.
    raw: [Vec<Vec<Vec<Jet>>>; 2],
    tsch: [Vec<Vec<Vec<Jet>>>; 2],
}

impl SplitTable {
    #[allow(clippy::too_many_arguments)]
    fn build(
        parent: &[CurveRef],
        interval: (f64, f64),
        breaks: &[f64],
        t0: f64,
        left: &MonicPolynomial,
        right: &MonicPolynomial,
        points: usize,
        order: usize,
        scale: f64,
        tol: f64,
    ) -> Result<SplitTable> {
        let (lo, hi) = interval;
        let len = hi - lo;
        // nodes at a break sit just inside their segment, so their jets are
        // one-sided
        let nudge = 1e-9 * len;
        let cuts: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&c| c > lo + 4.0 * nudge && c < hi - 4.0 * nudge)
            .collect();
        let ends: Vec<f64> = std::iter::once(lo).chain(cuts.iter().copied()).chain([hi]).collect();
        let grid: Vec<Vec<f64>> = ends
            .windows(2)
            .enumerate()
            .map(|(s, w)| {
                let (a, b) = (w[0], w[1]);
                let h = (b - a) / (points - 1) as f64;
                (0..points)
                    .map(|i| match i {
                        0 if s > 0 => a + nudge,
                        _ if i + 1 == points && s + 1 < ends.len() - 1 => b - nudge,
                        _ if i + 1 == points => b,
                        _ => a + h * i as f64,
                    })
                    .collect()
            })
            .collect();
        let jets_at = |t: f64| -> Vec<Jet> { parent.iter().map(|c| c.jet(t, order)).collect() };
        let poly_of = |jets: &[Jet]| MonicPolynomial::new(jets.iter().map(|j| j.c[0]).collect());
        // Newton and lifting run on roots divided by `scale`, so the
        // tolerance is relative to the size of the roots
        let solve = |t: f64, b0: &MonicPolynomial, c0: &MonicPolynomial| -> Result<(Vec<Jet>, Vec<Jet>)> {
            let a = scale_jets(&jets_at(t), 1.0 / scale);
            let ns = refine_split_newton(&poly_of(&a), &scale_poly(b0, 1.0 / scale), &scale_poly(c0, 1.0 / scale), tol, 20)?;
            let (b, c) = lift_split_jets(&a, &ns.left, &ns.right)?;
            Ok((scale_jets(&b, scale), scale_jets(&c, scale)))
        };
        let predict = |jets: &[Jet], delta: f64| MonicPolynomial::new(jets.iter().map(|j| taylor_value(j, delta)).collect());
        let step = |from: &(Vec<Jet>, Vec<Jet>), d: f64, t: f64| solve(t, &predict(&from.0, d), &predict(&from.1, d));

        let base = solve(t0, left, right)?;
        let s0 = cuts.partition_point(|&c| c <= t0);
        let mut slots: Vec<Vec<Option<(Vec<Jet>, Vec<Jet>)>>> = grid.iter().map(|g| vec![None; g.len()]).collect();
        let g0 = nearest(&grid[s0], t0);
        slots[s0][g0] = Some(step(&base, grid[s0][g0] - t0, grid[s0][g0])?);
        // walk out from the base node, then across the breaks
        let mut walk: Vec<((usize, usize), (usize, usize))> = (g0 + 1..points)
            .map(|g| ((s0, g - 1), (s0, g)))
            .chain((0..g0).rev().map(|g| ((s0, g + 1), (s0, g))))
            .collect();
        for s in s0 + 1..grid.len() {
            walk.push(((s - 1, points - 1), (s, 0)));
            walk.extend((1..points).map(|g| ((s, g - 1), (s, g))));
        }
        for s in (0..s0).rev() {
            walk.push(((s + 1, 0), (s, points - 1)));
            walk.extend((0..points - 1).rev().map(|g| ((s, g + 1), (s, g))));
        }
        for ((fs, fg), (ts_, tg)) in walk {
            let d = grid[ts_][tg] - grid[fs][fg];
            let next = step(slots[fs][fg].as_ref().unwrap(), d, grid[ts_][tg])?;
            slots[ts_][tg] = Some(next);
        }
        let mut raw = [Vec::new(), Vec::new()];
        let mut tsch = [Vec::new(), Vec::new()];
        for seg in slots {
            let mut r = [Vec::with_capacity(points), Vec::with_capacity(points)];
            let mut ts = [Vec::with_capacity(points), Vec::with_capacity(points)];
            for slot in seg {
                let (b, c) = slot.unwrap();
                ts[0].push(tschirnhausen_jets(&b));
                ts[1].push(tschirnhausen_jets(&c));
                r[0].push(b);
                r[1].push(c);
            }
            let [r0, r1] = r;
            let [t0_, t1_] = ts;
            raw[0].push(r0);
            raw[1].push(r1);
            tsch[0].push(t0_);
            tsch[1].push(t1_);
        }
        Ok(SplitTable { cuts, grid, raw, tsch })
    }

    /// Segment and node whose expansion serves `t`.
    fn node(&self, t: f64) -> (usize, usize) {
        let s = self.cuts.partition_point(|&c| c <= t);
        (s, nearest(&self.grid[s], t))
    }
}

/// Index of the grid point closest to `t` in an increasing grid.
fn nearest(grid: &[f64], t: f64) -> usize {
    let i = grid.partition_point(|&g| g < t);
    if i == 0 {
        0
    } else if i == grid.len() || t - grid[i - 1] <= grid[i] - t {
        i - 1
    } else {
        i
    }
}

/// One coefficient of a factor, read from a split table.
#[derive(Debug)]
struct SplitCurve {
    table: Arc<SplitTable>,
    side: usize,
    index: usize,
    tschirnhausen: bool,
}

impl Curve for SplitCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        let (seg, g) = self.table.node(t);
        let src = if self.tschirnhausen { &self.table.tsch } else { &self.table.raw };
        shift_jet(&src[self.side][seg][g][self.index - 1], t - self.table.grid[seg][g], order)
    }
}

fn factor_curves(table: &Arc<SplitTable>, side: usize, degree: usize, tschirnhausen: bool) -> Vec<CurveRef> {
    (1..=degree)
        .map(|i| {
            Arc::new(SplitCurve {
                table: table.clone(),
                side,
                index: i,
                tschirnhausen,
            }) as CurveRef
        })
        .collect()
}

// ---- per-node estimates -----------------------------------------------------

/// Which family of names a node's checks use.
fn names(depth: usize) -> [&'static str; 7] {
    if depth == 0 {
        ["budget_identity", "radical_drift", "dominant_ratio", "radical_upper", "dominant_lower", "curve_length", "coeff_derivatives"]
    } else {
        ["factor_budget_identity", "factor_radical_drift", "factor_dominant_ratio", "factor_radical_upper", "factor_dominant_lower", "factor_curve_length", "factor_coeff_derivatives"]
    }
}

fn sample_points(interval: (f64, f64), base: f64, count: usize) -> (Vec<f64>, usize) {
    let (lo, hi) = interval;
    let mut ts: Vec<f64> = (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect();
    let at = ts.partition_point(|&t| t < base);
    if ts.get(at) != Some(&base) {
        ts.insert(at, base);
    }
    (ts, at)
}

/// Continuous branch of `v^{1/j}` through the samples, principal at `base`.
fn radical_branch(values: &[C64], j: usize, base: usize) -> Vec<C64> {
    let unity: Vec<C64> = (0..j).map(|m| C64::from_polar(1.0, 2.0 * PI * m as f64 / j as f64)).collect();
    let closest = |v: C64, prev: C64| {
        let p = v.powf(1.0 / j as f64);
        unity
            .iter()
            .map(|u| p * u)
            .min_by(|x, y| (x - prev).norm_sqr().total_cmp(&(y - prev).norm_sqr()))
            .unwrap()
    };
    let mut out = vec![C64::new(0.0, 0.0); values.len()];
    out[base] = values[base].powf(1.0 / j as f64);
    for i in base + 1..values.len() {
        out[i] = closest(values[i], out[i - 1]);
    }
    for i in (0..base).rev() {
        out[i] = closest(values[i], out[i + 1]);
    }
    out
}

/// `int_I |abar'|` for `abar_j = a_k^{-j/k} a_j`.
fn model_length(coeffs: &[CurveRef], k: usize, interval: (f64, f64)) -> f64 {
    let kf = k as f64;
    let speed = |t: f64| {
        let ak = coeffs[k - 1].jet(t, 1);
        let (v, d) = (ak.c[0], ak.c[1]);
        let mut s2 = 0.0;
        for (j0, c) in coeffs.iter().enumerate() {
            let j = j0 + 1;
            if j == k || j < 2 {
                continue;
            }
            let aj = c.jet(t, 1);
            let num = (aj.c[1] * v - aj.c[0] * d * (j as f64 / kf)).norm();
            s2 += (num / v.norm().powf(j as f64 / kf + 1.0)).powi(2);
        }
        s2.sqrt()
    };
    integrate(speed, interval.0, interval.1, 1e-15, 1e-10)
}

/// The direct estimates for one node: the budget identity, the
/// comparability of the coefficients with the base scale, the length of the
/// normalized coefficient curve, and the derivative bounds.
pub fn verify_node_estimates(
    coeffs: &[CurveRef],
    record: &IntervalRecord,
    depth: usize,
    top_degree: usize,
    budget_constant: f64,
    samples: usize,
    cal: &Calibration,
) -> Vec<CheckResult> {
    let nm = names(depth);
    let m = coeffs.len();
    let k = record.ell;
    let interval = (record.s_minus, record.s_plus);
    let len = interval.1 - interval.0;
    let t0 = record.t1;
    let (ts, base) = sample_points(interval, t0, samples);
    let r = coeffs[k - 1].value(t0).norm().powf(1.0 / k as f64);
    let mut out = vec![CheckResult::new(nm[0], record.residual, IDENTITY_TOL, CheckKind::Estimate)];

    let jets: Vec<Vec<Jet>> = coeffs.iter().map(|c| ts.iter().map(|&t| c.jet(t, top_degree)).collect()).collect();
    let values: Vec<Vec<C64>> = jets.iter().map(|js| js.iter().map(|j| j.c[0]).collect()).collect();
    let mut dev: f64 = 0.0;
    let mut upper: f64 = 0.0;
    for j in 2..=m {
        let br = radical_branch(&values[j - 1], j, base);
        for (i, w) in br.iter().enumerate() {
            dev = dev.max((w - br[base]).norm());
            upper = upper.max(values[j - 1][i].norm().powf(1.0 / j as f64));
        }
    }
    out.push(CheckResult::new(nm[1], dev, budget_constant * r, CheckKind::Estimate));
    let ak0 = values[k - 1][base].norm();
    let mut ratio_dev: f64 = 0.0;
    let mut min_k = f64::INFINITY;
    for v in &values[k - 1] {
        ratio_dev = ratio_dev.max(((v.norm() / ak0).powf(1.0 / k as f64) - 1.0).abs());
        min_k = min_k.min(v.norm().powf(1.0 / k as f64));
    }
    out.push(CheckResult::new(nm[2], ratio_dev, budget_constant, CheckKind::Estimate));
    out.push(CheckResult::new(nm[3], upper, 4.0 / 3.0 * r, CheckKind::Estimate));
    out.push(CheckResult::new(nm[4], 4.0 / 3.0 * r, 2.0 * min_k, CheckKind::Estimate));
    let length = model_length(coeffs, k, interval);
    let bound = 3.0 * (m * m) as f64 * 2f64.powi(m as i32) * budget_constant;
    out.push(CheckResult::new(nm[5], length, bound, CheckKind::Estimate));

    let mut ratio: f64 = 0.0;
    for i in 0..ts.len() {
        for j in 2..=m {
            let jt = &jets[j - 1][i];
            for s in 1..=top_degree {
                let core = len.powi(-(s as i32)) * r.powi(j as i32);
                ratio = ratio.max(jt.derivative(s).norm() / core);
            }
        }
    }
    out.push(CheckResult::calibrated(nm[6], ratio, top_degree, cal));
    out
}

/// Roots of `p` rescaled by `a_k^{1/k}`: the radius of a circle around the
/// first cluster on which `|P(z)|` dominates every coefficient perturbation
/// of normalized size below the radius.
fn rouche_radius(p: &MonicPolynomial, k: usize, left: &[C64], right: &[C64]) -> f64 {
    let m = p.degree();
    let root = p.coeff(k).powf(1.0 / k as f64);
    let l: Vec<C64> = left.iter().map(|z| z / root).collect();
    let rr: Vec<C64> = right.iter().map(|z| z / root).collect();
    let center = l.iter().sum::<C64>() / l.len() as f64;
    let rin = l.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let rout = rr.iter().map(|z| (z - center).norm()).fold(f64::INFINITY, f64::min);
    if !(rout > rin) {
        return 0.0;
    }
    let rad = 0.5 * (rin + rout);
    let mut rho = f64::INFINITY;
    let turn = C64::from_polar(1.0, 2.0 * PI / CIRCLE_POINTS as f64);
    let mut w = C64::new(rad, 0.0);
    for _ in 0..CIRCLE_POINTS {
        let z = center + w;
        w *= turn;
        let val: C64 = l.iter().chain(&rr).map(|w| z - w).product();
        let weight: f64 = (2..=m).map(|j| z.norm().powi(2 * (m - j) as i32)).sum::<f64>().sqrt();
        rho = rho.min(val.norm() / weight);
    }
    rho
}

struct Ctx<'a> {
    consts: &'a PipelineConstants,
    cal: &'a Calibration,
    top_degree: usize,
    max_depth: usize,
    /// the family's own domain; its ends are break points of the extension
    domain: (f64, f64),
}

fn sup_over(ts: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
    ts.iter().map(|&t| f(t)).fold(0.0, f64::max)
}

/// Normalized `L^p` norm `(|I|^{-1} int_I |f|^p)^{1/p}`.
fn normalized_lp(f: impl Fn(f64) -> f64, interval: (f64, f64), p: f64) -> f64 {
    let len = interval.1 - interval.0;
    (integrate(|t| f(t).powf(p), interval.0, interval.1, 1e-300, 1e-9) / len).powf(1.0 / p)
}

fn trace_node(ctx: &Ctx, coeffs: &[CurveRef], record: &IntervalRecord, depth: usize) -> Result<TraceNode> {
    let m = coeffs.len();
    let n = ctx.top_degree;
    let interval = (record.s_minus, record.s_plus);
    let len = interval.1 - interval.0;
    let t0 = record.t1;
    let k = record.ell;
    let bc = if depth == 0 { ctx.consts.b } else { ctx.consts.d };
    let mut checks = verify_node_estimates(coeffs, record, depth, n, bc, ctx.consts.samples, ctx.cal);
    let r = coeffs[k - 1].value(t0).norm().powf(1.0 / k as f64);
    let (ts, _) = sample_points(interval, t0, ctx.consts.samples);

    if depth == 0 {
        // the rate used must dominate the local Lipschitz data
        let mut local: f64 = 0.0;
        for j in 2..=m {
            let lip = sup_over(&ts, |t| coeffs[j - 1].jet(t, n).derivative(n).norm());
            local = local.max(lip.powf(1.0 / n as f64) * r.powf((n - j) as f64 / n as f64));
        }
        checks.push(CheckResult::new("local_rate", local, record.rate, CheckKind::Estimate));
    }

    let mut node = TraceNode {
        depth,
        degree: m,
        interval,
        base: t0,
        dominant: k,
        scale: r,
        kind: record.kind,
        rate: record.rate,
        budget_residual: record.residual,
        split: None,
        checks,
        aborted: None,
        factors: Vec::new(),
    };

    let p0 = MonicPolynomial::new(coeffs.iter().map(|c| c.value(t0)).collect());
    let split = match split_clusters(&p0, 1e-12, 1e-13) {
        Ok(s) => s,
        Err(e) => {
            node.aborted = Some(format!("split at base point: {e}"));
            return Ok(node);
        }
    };
    let rho = rouche_radius(&p0, k, &split.left_roots, &split.right_roots);
    let length = node
        .checks
        .iter()
        .find(|c| c.name.ends_with("curve_length"))
        .map(|c| c.lhs)
        .unwrap_or(f64::NAN);
    let (nb, nc) = (split.left.degree(), split.right.degree());
    node.split = Some(SplitSummary {
        left_degree: nb,
        right_degree: nc,
        gap: split.gap,
        ratio: split.ratio,
        resultant_abs: split.resultant.norm(),
        rho_proxy: rho,
        model_length: length,
    });
    let nominal = 3.0 * (m * m) as f64 * 2f64.powi(m as i32) * bc;
    node.checks.push(CheckResult::new(
        if depth == 0 { "split_constant_top" } else { "split_constant" },
        nominal,
        rho,
        CheckKind::Diagnostic,
    ));
    let radius = CheckResult::new("split_radius", length, rho, CheckKind::Estimate);
    let radius_ok = radius.passed;
    node.checks.push(radius);
    if !radius_ok {
        node.aborted = Some("normalized coefficient curve leaves the splitting radius".into());
        return Ok(node);
    }

    let table = match SplitTable::build(
        coeffs,
        interval,
        &[ctx.domain.0, ctx.domain.1],
        t0,
        &split.left,
        &split.right,
        ctx.consts.table_points,
        n + 3,
        r,
        ctx.consts.newton_tol,
    ) {
        Ok(t) => Arc::new(t),
        Err(e) => {
            node.checks.push(CheckResult::new("split_continuation", 1.0, 0.0, CheckKind::Estimate));
            node.aborted = Some(format!("split continuation: {e}"));
            return Ok(node);
        }
    };

    let raw = [factor_curves(&table, 0, nb, false), factor_curves(&table, 1, nc, false)];
    let tsch = [factor_curves(&table, 0, nb, true), factor_curves(&table, 1, nc, true)];
    let mut prod_err: f64 = 0.0;
    for &t in &ts {
        let p = MonicPolynomial::new(coeffs.iter().map(|c| c.value(t)).collect());
        let b = MonicPolynomial::new(raw[0].iter().map(|c| c.value(t)).collect());
        let c = MonicPolynomial::new(raw[1].iter().map(|c| c.value(t)).collect());
        let e = b
            .mul(&c)
            .coeffs
            .iter()
            .zip(&p.coeffs)
            .enumerate()
            .map(|(j, (x, y))| (x - y).norm() / r.powi(j as i32 + 1))
            .fold(0.0, f64::max);
        prod_err = prod_err.max(e);
    }
    node.checks.push(CheckResult::new("split_product", prod_err, PRODUCT_TOL, CheckKind::Estimate));

    let b1 = (0..2)
        .map(|side| sup_over(&ts, |t| raw[side][0].jet(t, 1).c[1].norm()))
        .fold(0.0, f64::max);
    node.checks.push(CheckResult::calibrated("split_slope", b1 / (r / len), n, ctx.cal));
    let mut ider: f64 = 0.0;
    let mut lp1: f64 = 0.0;
    let mut lpmid: f64 = 0.0;
    let mut any_nonlinear = false;
    for side in 0..2 {
        let nf = tsch[side].len();
        if nf < 2 {
            continue;
        }
        any_nonlinear = true;
        for &t in &ts {
            for i in 2..=nf {
                let jt = tsch[side][i - 1].jet(t, n);
                for s in 1..=n {
                    let core = len.powi(-(s as i32)) * r.powi(i as i32);
                    ider = ider.max(jt.derivative(s).norm() / core);
                }
            }
        }
        let conj = nf as f64 / (nf - 1) as f64;
        let pmid = 0.5 * (1.0 + conj);
        for i in 2..=nf {
            let rad = Radical::new(tsch[side][i - 1].clone(), i);
            let f = |t: f64| rad.root_derivative_abs(t);
            lp1 = lp1.max(normalized_lp(f, interval, 1.0) / (r / len));
            lpmid = lpmid.max(normalized_lp(f, interval, pmid) / (r / len));
        }
    }
    if any_nonlinear {
        node.checks.push(CheckResult::calibrated("transformed_derivatives", ider, n, ctx.cal));
        node.checks.push(CheckResult::calibrated("root_derivative_l1", lp1, n, ctx.cal));
        node.checks.push(CheckResult::calibrated("root_derivative_lp_mid", lpmid, n, ctx.cal));
    }

    for side in 0..2 {
        let nf = tsch[side].len();
        let mut fac = FactorTrace {
            degree: nf,
            cover: None,
            error: None,
            children: Vec::new(),
        };
        if nf >= 2 {
            if depth + 1 > ctx.max_depth {
                return Err(Error::DepthExceeded { depth: depth + 1 });
            }
            let radicals: Vec<Radical> = (2..=nf).map(|i| Radical::new(tsch[side][i - 1].clone(), i)).collect();
            let cover = GrowthBudget::constant(r / len, ctx.consts.d, radicals, interval).and_then(|b| extract_subcover(&b));
            match cover {
                Ok(c) => {
                    let stats = CoverStats::from_report(&c);
                    node.checks.push(CheckResult::new(
                        "child_overlap",
                        stats.max_overlap as f64,
                        2.0,
                        CheckKind::Estimate,
                    ));
                    fac.cover = Some(stats);
                    for rec in &c.records {
                        fac.children.push(trace_node(ctx, &tsch[side], rec, depth + 1)?);
                    }
                }
                Err(e) => fac.error = Some(e.to_string()),
            }
        }
        node.factors.push(fac);
    }
    Ok(node)
}

/// Per-cell sampled suprema of `|a_j^{(n)}|`, padded, over a uniform partition.
struct LipTable {
    lo: f64,
    width: f64,
    sup: Vec<Vec<f64>>,
}

impl LipTable {
    fn new(curves: &[CurveRef], domain: (f64, f64), cells: usize, per_cell: usize) -> Self {
        let n = curves.len();
        let width = (domain.1 - domain.0) / cells as f64;
        let sup = (2..=n)
            .map(|j| {
                (0..cells)
                    .map(|c| {
                        (0..=per_cell)
                            .map(|q| {
                                let t = domain.0 + width * (c as f64 + q as f64 / per_cell as f64);
                                curves[j - 1].jet(t.min(domain.1), n).derivative(n).norm()
                            })
                            .fold(0.0, f64::max)
                            * LIP_MARGIN
                    })
                    .collect()
            })
            .collect();
        LipTable { lo: domain.0, width, sup }
    }

    /// Padded `Lip(a_j^{(n-1)})` over `[a, b]`, for `j = 2..=n`.
    fn over(&self, a: f64, b: f64) -> Vec<f64> {
        let cells = self.sup[0].len();
        let ca = (((a - self.lo) / self.width).floor().max(0.0) as usize).min(cells - 1);
        let cb = (((b - self.lo) / self.width).floor().max(0.0) as usize).min(cells - 1);
        self.sup.iter().map(|row| row[ca..=cb].iter().copied().fold(0.0, f64::max)).collect()
    }
}

/// The rate `M` at a base point: Lipschitz data of the top derivatives on
/// the interval grown by the variation alone, which contains the interval
/// finally grown with this rate.
fn local_rate(curves: &[CurveRef], domain: (f64, f64), b: f64, radicals: &[Radical]) -> Result<Rate> {
    let n = curves.len();
    let table = LipTable::new(curves, domain, LIP_CELLS, 8);
    let reach = GrowthBudget::new(Rate::Constant(f64::MIN_POSITIVE), b, radicals.to_vec(), domain)?;
    let curves = curves.to_vec();
    Ok(Rate::PerBase(Arc::new(move |t1: f64| {
        let (a, z) = match grow_interval(&reach, t1) {
            Ok(rec) => (rec.s_minus, rec.s_plus),
            Err(_) => domain,
        };
        let lip = table.over(a, z);
        let r = (2..=n)
            .map(|j| curves[j - 1].value(t1).norm().powf(1.0 / j as f64))
            .fold(0.0, f64::max);
        let m = (2..=n)
            .map(|j| lip[j - 2].powf(1.0 / n as f64) * r.powf((n - j) as f64 / n as f64))
            .fold(0.0, f64::max);
        m.max(f64::MIN_POSITIVE)
    })))
}

/// Whether `a_1` and its derivatives vanish on a probe grid, in which case
/// the family is already in Tschirnhausen form.
fn first_coefficient_vanishes(family: &CurveFamily) -> bool {
    let (a, b) = family.domain;
    let c = &family.curves().unwrap()[0];
    (0..=64).all(|i| {
        let t = a + (b - a) * i as f64 / 64.0;
        c.jet(t, family.degree).c.iter().all(|v| *v == C64::new(0.0, 0.0))
    })
}

/// Run the full induction on an analytic family: Tschirnhausen transform,
/// Whitney extension, top-level cover with the Lipschitz-driven rate, then
/// split and recurse into every factor of degree at least two.
pub fn run_induction_trace(family: &CurveFamily, constants: &PipelineConstants, max_depth: usize) -> Result<TraceReport> {
    run_induction_trace_with(family, constants, max_depth, &Calibration::builtin())
}

pub fn run_induction_trace_with(
    family: &CurveFamily,
    constants: &PipelineConstants,
    max_depth: usize,
    cal: &Calibration,
) -> Result<TraceReport> {
    constants.validate()?;
    let curves = family
        .curves()
        .ok_or_else(|| Error::Config("the trace needs an analytic family with derivative oracles".into()))?;
    let n = family.degree;
    let mut report = TraceReport {
        degree: n,
        domain: family.domain,
        extended_domain: family.domain,
        whitney: None,
        constants: constants.clone(),
        max_depth,
        top_cover: None,
        nodes: Vec::new(),
        summary: TraceSummary::default(),
    };
    if n < 2 {
        return Ok(report);
    }
    let shared = Arc::new(curves.to_vec());
    let tsch: Vec<CurveRef> = if first_coefficient_vanishes(family) {
        curves.to_vec()
    } else {
        (1..=n)
        .map(|j| {
            Arc::new(TschirnhausenCurve {
                coeffs: shared.clone(),
                index: j,
            }) as CurveRef
        })
        .collect()
    };
    let (ext, wrep) = whitney_extend(&CurveFamily::analytic(family.domain, tsch))?;
    let ext_curves: Vec<CurveRef> = ext.curves().unwrap().to_vec();
    report.extended_domain = ext.domain;
    report.whitney = Some(wrep);

    let radicals: Vec<Radical> = (2..=n).map(|j| Radical::new(ext_curves[j - 1].clone(), j)).collect();
    let rate = local_rate(&ext_curves, ext.domain, constants.b, &radicals)?;
    let mut budget = GrowthBudget::new(rate, constants.b, radicals, ext.domain)?;
    // one cover per family, and every top interval spawns a full child cover
    budget.seeds = TOP_SEEDS;
    let cover = extract_subcover_on(&budget, family.domain)?;
    report.top_cover = Some(CoverStats::from_report(&cover));
    let ctx = Ctx {
        consts: constants,
        cal,
        top_degree: n,
        max_depth,
        domain: family.domain,
    };
    for rec in &cover.records {
        report.nodes.push(trace_node(&ctx, &ext_curves, rec, 0)?);
    }
    report.summarize();
    Ok(report)
}

/// Largest observed ratio of every calibrated check, keyed by top degree.
pub fn observed_ratios(reports: &[TraceReport]) -> BTreeMap<String, BTreeMap<usize, f64>> {
    let mut out: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for rep in reports {
        rep.walk(|node| {
            for c in &node.checks {
                if CALIBRATED_CHECKS.contains(&c.name.as_str()) && c.lhs.is_finite() {
                    let e = out.entry(c.name.clone()).or_default().entry(rep.degree).or_insert(0.0);
                    *e = e.max(c.lhs);
                }
            }
        });
    }
    out
}

/// Families the calibrated constants are fitted on.
pub fn calibration_suite() -> Vec<(String, CurveFamily)> {
    let mut v = vec![
        ("worked-cubic".to_string(), crate::curve::worked_cubic_family()),
        ("worked-quartic".to_string(), crate::curve::worked_quartic_family()),
    ];
    for n in 2..=4 {
        for seed in 0..2 {
            v.push((
                format!("trig-n{n}-s{seed}"),
                crate::curve::random_trig_family(n, seed, 3, (0.0, 1.0)),
            ));
        }
    }
    v
}

/// Trace the suite without constants and freeze `factor * max ratio`.
pub fn calibrate(constants: &PipelineConstants, version: u32) -> Result<Calibration> {
    let empty = Calibration::empty();
    let mut reports = Vec::new();
    for (_, fam) in calibration_suite() {
        reports.push(run_induction_trace_with(&fam, constants, fam.degree, &empty)?);
    }
    let mut constants_out = observed_ratios(&reports);
    for per in constants_out.values_mut() {
        for v in per.values_mut() {
            *v *= CALIBRATION_FACTOR;
        }
    }
    Ok(Calibration {
        version,
        factor: CALIBRATION_FACTOR,
        constants: constants_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{worked_cubic_family, poly_curve};

    #[test]
    fn shift_matches_polynomial() {
        // 1 + 2t + 3t^2 re-expanded at t = 0.5
        let j = Jet::from_coeffs(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        let s = shift_jet(&j, 0.5, 2);
        assert!((s.c[0].re - 2.75).abs() < 1e-15);
        assert!((s.c[1].re - 5.0).abs() < 1e-15);
        assert!((s.c[2].re - 3.0).abs() < 1e-15);
    }

    #[test]
    fn branch_is_continuous() {
        let vals: Vec<C64> = (0..=64).map(|i| C64::from_polar(1.0, 2.0 * PI * i as f64 / 64.0)).collect();
        let br = radical_branch(&vals, 2, 0);
        // half a turn after one loop of the radicand
        assert!((br[64] + C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rouche_radius_of_separated_roots() {
        let p = MonicPolynomial::new(vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]);
        let rho = rouche_radius(&p, 2, &[C64::new(1.0, 0.0)], &[C64::new(-1.0, 0.0)]);
        // circle of radius 1 around 1: min |z^2 - 1| over the circle is 1 at z = 0
        assert!(rho > 0.3 && rho <= 1.0, "{rho}");
    }

    #[test]
    fn constant_dominant_coefficient_ratio_is_one() {
        // Z^2 + 1 with a_2 constant: ratios are exactly one
        let coeffs = vec![poly_curve(&[0.0]), poly_curve(&[1.0])];
        let rec = IntervalRecord {
            s_minus: 0.2,
            s_plus: 0.4,
            t1: 0.3,
            ell: 2,
            kind: IntervalKind::First,
            rate: 1.0,
            phi_minus: 0.0,
            phi_plus: 0.0,
            rhs: 0.0,
            residual: 0.0,
        };
        let checks = verify_node_estimates(&coeffs, &rec, 0, 2, 0.05, 65, &Calibration::empty());
        let c = checks.iter().find(|c| c.name == "dominant_ratio").unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(c.passed);
    }

    #[test]
    fn cube_root_family_upper_bound_on_dense_grid() {
        // Z^3 - t near t = 0.5: |a_3|^{1/3} <= (4/3) r on 1001 samples
        let coeffs = vec![poly_curve(&[0.0]), poly_curve(&[0.0]), poly_curve(&[0.0, -1.0])];
        let r = 0.5f64.powf(1.0 / 3.0);
        let rec = IntervalRecord {
            s_minus: 0.45,
            s_plus: 0.55,
            t1: 0.5,
            ell: 3,
            kind: IntervalKind::First,
            rate: 1.0,
            phi_minus: 0.0,
            phi_plus: 0.0,
            rhs: 0.0,
            residual: 0.0,
        };
        let checks = verify_node_estimates(&coeffs, &rec, 0, 3, 0.05, 1001, &Calibration::empty());
        let c = checks.iter().find(|c| c.name == "radical_upper").unwrap();
        // oracle: the closed form max is at the right end
        assert!((c.lhs - 0.55f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((c.rhs - 4.0 / 3.0 * r).abs() < 1e-14);
        assert!(c.passed);
    }

    #[test]
    fn zero_family_gives_empty_trace() {
        let fam = CurveFamily::analytic((0.0, 1.0), vec![poly_curve(&[0.0]); 3]);
        let rep = run_induction_trace(&fam, &PipelineConstants::default(), 3).unwrap();
        assert!(rep.nodes.is_empty());
        assert_eq!(rep.summary.nodes, 0);
    }

    #[test]
    fn sampled_family_is_config_error() {
        let fam = CurveFamily {
            degree: 2,
            domain: (0.0, 1.0),
            coeffs: crate::curve::Coefficients::Sampled {
                grid: vec![0.0, 1.0],
                values: vec![vec![C64::new(0.0, 0.0); 2]; 2],
            },
        };
        assert!(run_induction_trace(&fam, &PipelineConstants::default(), 2).unwrap_err().is_config());
    }

    #[test]
    fn bad_constants_rejected() {
        let c = PipelineConstants { b: 0.5, ..Default::default() };
        assert!(run_induction_trace(&worked_cubic_family(), &c, 3).unwrap_err().is_config());
    }
}
