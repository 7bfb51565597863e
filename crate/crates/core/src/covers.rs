//! Growing intervals from a budget identity and extracting subcovers in
//! which every point lies in at most two intervals.

use crate::curve::CurveRef;
use crate::error::{Error, Result};
use crate::quad::integrate_with_limit;
use serde::Serialize;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};

/// Below this (relative to `scale^i`) every `|b_i|` counts as zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Intervals shorter than this fraction of the domain end a chain.
pub const CHAIN_FLOOR: f64 = 1e-9;
pub const MAX_CHAIN: usize = 1_000_000;
/// Chains also stop once the float resolution of the endpoints no longer
/// supports this relative residual.
pub const RECORD_TOL: f64 = 1e-10;

/// Solve tolerance, relative to the right-hand side.
const SOLVE_REL: f64 = 1e-12;
const SCAN_POINTS: usize = 2048;
const PARTIAL_PANELS: usize = 100;

/// A curve `b_i` whose continuous `i`-th root enters the budget.
#[derive(Clone, Debug)]
pub struct Radical {
    pub curve: CurveRef,
    pub index: usize,
}

impl Radical {
    pub fn new(curve: CurveRef, index: usize) -> Self {
        Radical { curve, index }
    }

    /// `|b|^{1/i}`
    pub fn root_abs(&self, t: f64) -> f64 {
        self.curve.value(t).norm().powf(1.0 / self.index as f64)
    }

    /// `|(b^{1/i})'| = |b'| |b|^{1/i - 1} / i`, the same for every branch.
    pub fn root_derivative_abs(&self, t: f64) -> f64 {
        let j = self.curve.jet(t, 1);
        let v2 = j.c[0].norm_sqr();
        let d2 = j.c[1].norm_sqr();
        if d2 == 0.0 {
            return 0.0;
        }
        let i = self.index as f64;
        // |b'| |b|^{1/i - 1} / i from squared moduli
        (d2 * v2.powf(1.0 / i - 1.0)).sqrt() / i
    }
}

/// Linear rate of a budget, either fixed or depending on the base point.
#[derive(Clone)]
pub enum Rate {
    Constant(f64),
    PerBase(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Rate {
    pub fn at(&self, t1: f64) -> f64 {
        match self {
            Rate::Constant(l) => *l,
            Rate::PerBase(f) => f(t1),
        }
    }
}

impl std::fmt::Debug for Rate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rate::Constant(l) => write!(f, "Constant({l})"),
            Rate::PerBase(_) => write!(f, "PerBase"),
        }
    }
}

/// `rate |J| + sum_i ||(b_i^{1/i})'||_{L^1(J)} = D max_i |b_i(t1)|^{1/i}`.
pub struct GrowthBudget {
    pub rate: Rate,
    pub d: f64,
    pub radicals: Vec<Radical>,
    pub domain: (f64, f64),
    /// Evenly spaced base points tried before chaining in the finite case.
    pub seeds: usize,
    cells: usize,
    cell_cache: Mutex<Vec<Option<f64>>>,
}

impl std::fmt::Debug for GrowthBudget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrowthBudget")
            .field("rate", &self.rate)
            .field("d", &self.d)
            .field("radicals", &self.radicals)
            .field("domain", &self.domain)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    First,
    Second,
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalRecord {
    pub s_minus: f64,
    pub s_plus: f64,
    pub t1: f64,
    pub ell: usize,
    pub kind: IntervalKind,
    pub rate: f64,
    pub phi_minus: f64,
    pub phi_plus: f64,
    pub rhs: f64,
    /// `|phi_- + phi_+ - rhs| / rhs`
    pub residual: f64,
}

impl IntervalRecord {
    pub fn len(&self) -> f64 {
        self.s_plus - self.s_minus
    }

    pub fn contains(&self, t: f64) -> bool {
        self.s_minus < t && t < self.s_plus
    }
}

impl GrowthBudget {
    pub fn new(rate: Rate, d: f64, radicals: Vec<Radical>, domain: (f64, f64)) -> Result<Self> {
        if !(d > 0.0 && d < 1.0 / 3.0) {
            return Err(Error::Config(format!("budget constant D = {d} must lie in (0, 1/3)")));
        }
        if !(domain.0 < domain.1) {
            return Err(Error::Config("empty budget domain".into()));
        }
        if let Rate::Constant(l) = rate {
            if !(l > 0.0) {
                return Err(Error::Config("budget rate must be positive".into()));
            }
        }
        if radicals.is_empty() || radicals.iter().any(|r| r.index == 0) {
            return Err(Error::Config("budget needs radicals with positive index".into()));
        }
        let cells = 256;
        Ok(GrowthBudget {
            rate,
            d,
            radicals,
            domain,
            seeds: 8,
            cells,
            cell_cache: Mutex::new(vec![None; cells]),
        })
    }

    pub fn constant(l: f64, d: f64, radicals: Vec<Radical>, domain: (f64, f64)) -> Result<Self> {
        Self::new(Rate::Constant(l), d, radicals, domain)
    }

    fn density(&self, t: f64) -> f64 {
        self.radicals.iter().map(|r| r.root_derivative_abs(t)).sum()
    }

    /// `max_i |b_i(t)|^{1/i}` and the smallest index attaining it.
    pub fn dominant(&self, t: f64) -> (usize, f64) {
        let mut best = -1.0;
        let mut ell = 0;
        let mut order: Vec<&Radical> = self.radicals.iter().collect();
        order.sort_by_key(|r| r.index);
        for r in order {
            let v = r.root_abs(t);
            if v > best {
                best = v;
                ell = r.index;
            }
        }
        (ell, best.max(0.0))
    }

    // near a zero the density is only known to the relative accuracy of the
    // radicands, so the panel limit bounds the work spent on noise
    fn raw_integral(&self, a: f64, b: f64, abs_tol: f64, panels: usize) -> f64 {
        let mut f = |t: f64| self.density(t);
        integrate_with_limit(&mut f, a, b, abs_tol, 1e-13, panels)
    }

    fn cell_width(&self) -> f64 {
        (self.domain.1 - self.domain.0) / self.cells as f64
    }

    fn cell_integral(&self, c: usize) -> f64 {
        if let Some(v) = self.cell_cache.lock().unwrap()[c] {
            return v;
        }
        let w = self.cell_width();
        let a = self.domain.0 + w * c as f64;
        let b = if c + 1 == self.cells { self.domain.1 } else { a + w };
        let v = self.raw_integral(a, b, 1e-300, 2000);
        self.cell_cache.lock().unwrap()[c] = Some(v);
        v
    }

    /// `sum_i ||(b_i^{1/i})'||_{L^1([a, b])}`
    pub fn variation(&self, a: f64, b: f64) -> f64 {
        self.variation_tol(a, b, 1e-300)
    }

    /// `variation` with an absolute tolerance for the partial cells.
    pub fn variation_tol(&self, a: f64, b: f64, abs_tol: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let w = self.cell_width();
        let cell_of = |t: f64| (((t - self.domain.0) / w).floor().max(0.0) as usize).min(self.cells - 1);
        let (ca, cb) = (cell_of(a), cell_of(b));
        if cb <= ca + 1 {
            return self.raw_integral(a, b, abs_tol, PARTIAL_PANELS);
        }
        let mut s = self.raw_integral(a, self.domain.0 + w * (ca + 1) as f64, abs_tol, PARTIAL_PANELS);
        for c in ca + 1..cb {
            s += self.cell_integral(c);
        }
        s + self.raw_integral(self.domain.0 + w * cb as f64, b, abs_tol, PARTIAL_PANELS)
    }

    pub fn phi_plus(&self, t1: f64, s: f64, rate: f64, abs_tol: f64) -> f64 {
        rate * (s - t1) + self.variation_tol(t1, s, abs_tol)
    }

    pub fn phi_minus(&self, t1: f64, s: f64, rate: f64, abs_tol: f64) -> f64 {
        rate * (t1 - s) + self.variation_tol(s, t1, abs_tol)
    }

    /// Whether every radical vanishes at `t` (relative to `scale`).
    pub fn vanishes(&self, t: f64, scale: f64) -> bool {
        self.radicals
            .iter()
            .all(|r| r.curve.value(t).norm() <= ZERO_THRESHOLD * scale.powi(r.index as i32))
    }

    fn weighted_size(&self, t: f64, scale: f64) -> f64 {
        self.radicals
            .iter()
            .map(|r| r.curve.value(t).norm() / scale.powi(r.index as i32))
            .fold(0.0, f64::max)
    }
}

/// Point `s` between `t1` and `end` where the one-sided budget
/// `rate |s - t1| + variation(t1, s)` equals `v`, given its value `cap` at
/// `end`. Safeguarded Newton on the exact derivative `rate + density`; each
/// step integrates only the increment from the previous iterate.
fn solve_side(budget: &GrowthBudget, t1: f64, end: f64, rate: f64, v: f64, cap: f64, tol: f64, qtol: f64) -> f64 {
    let dir = if end > t1 { 1.0 } else { -1.0 };
    let between = |x: f64, y: f64| {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        rate * (b - a) + budget.variation_tol(a, b, qtol)
    };
    // bracket in distance from t1: g(lo) < 0 <= g(hi)
    let (mut lo, mut hi) = (0.0, (end - t1).abs());
    if (cap - v).abs() <= tol {
        return end;
    }
    let mut x = 0.0;
    let mut phi = 0.0;
    for _ in 0..200 {
        let slope = rate + budget.density(t1 + dir * x);
        let mut next = x - (phi - v) / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if next <= lo || next >= hi {
            break;
        }
        phi += if next > x { between(t1 + dir * x, t1 + dir * next) } else { -between(t1 + dir * next, t1 + dir * x) };
        x = next;
        let g = phi - v;
        if g.abs() <= tol {
            return t1 + dir * x;
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    t1 + dir * x
}

/// Grow `J(t1)` inside the budget domain, symmetrically when possible.
pub fn grow_interval(budget: &GrowthBudget, t1: f64) -> Result<IntervalRecord> {
    let (lo, hi) = budget.domain;
    if !(t1 > lo && t1 < hi) {
        return Err(Error::OutsideDomain { t: t1 });
    }
    let (ell, r) = budget.dominant(t1);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::OutsideDomain { t: t1 });
    }
    let rate = budget.rate.at(t1);
    if !(rate > 0.0) {
        return Err(Error::Config(format!("non-positive rate {rate} at {t1}")));
    }
    let rhs = budget.d * r;
    let half = 0.5 * rhs;
    let tol = SOLVE_REL * rhs;
    let qtol = 1e-14 * rhs;
    let plus = |s: f64| budget.phi_plus(t1, s, rate, qtol);
    let minus = |s: f64| budget.phi_minus(t1, s, rate, qtol);
    let solve_plus = |v: f64, cap: f64| solve_side(budget, t1, hi, rate, v, cap, tol, qtol);
    let solve_minus = |v: f64, cap: f64| solve_side(budget, t1, lo, rate, v, cap, tol, qtol);
    // the linear term alone often settles the comparison with the target
    let cap = |far: f64, side: &dyn Fn(f64) -> f64| {
        if rate * (far - t1).abs() > rhs {
            f64::INFINITY
        } else {
            side(far)
        }
    };
    let cap_plus = cap(hi, &plus);
    let cap_minus = cap(lo, &minus);
    let (s_minus, s_plus, kind) = if cap_plus >= half && cap_minus >= half {
        (solve_minus(half, cap_minus), solve_plus(half, cap_plus), IntervalKind::First)
    } else if cap_plus < half {
        let rest = rhs - cap_plus;
        if cap_minus < rest {
            return Err(Error::BudgetExhausted { t: t1 });
        }
        (solve_minus(rest, cap_minus), hi, IntervalKind::Second)
    } else {
        let rest = rhs - cap_minus;
        if cap_plus < rest {
            return Err(Error::BudgetExhausted { t: t1 });
        }
        (lo, solve_plus(rest, cap_plus), IntervalKind::Second)
    };
    let phi_minus = minus(s_minus);
    let phi_plus = plus(s_plus);
    Ok(IntervalRecord {
        s_minus,
        s_plus,
        t1,
        ell,
        kind,
        rate,
        phi_minus,
        phi_plus,
        rhs,
        residual: (phi_minus + phi_plus - rhs).abs() / rhs,
    })
}

// ---- subcovers ----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentCase {
    /// radicals vanish at both ends
    BothVanish,
    /// radicals vanish at exactly one end
    OneVanishes,
    /// radicals vanish at neither end
    NeitherVanishes,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentSummary {
    pub lo: f64,
    pub hi: f64,
    pub case: ComponentCase,
    /// intervals grown before selection
    pub grown: usize,
    pub selected: usize,
    /// length left uncovered next to vanishing endpoints by the chain floor
    pub uncovered: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub records: Vec<IntervalRecord>,
    pub components: Vec<ComponentSummary>,
    pub max_overlap: usize,
    pub total_length: f64,
    pub domain_length: f64,
    pub eps_len: f64,
}

impl CoverReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("s_minus,s_plus,t1,ell,kind\n");
        for r in &self.records {
            let kind = match r.kind {
                IntervalKind::First => "first",
                IntervalKind::Second => "second",
            };
            let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{},{}", r.s_minus, r.s_plus, r.t1, r.ell, kind);
        }
        s
    }

    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.s_minus, r.s_plus)).collect()
    }
}

/// Largest number of open intervals sharing a point.
pub fn max_overlap(intervals: &[(f64, f64)]) -> usize {
    let mut ev: Vec<(f64, i32)> = Vec::with_capacity(2 * intervals.len());
    for &(a, b) in intervals {
        if a < b {
            ev.push((a, 1));
            ev.push((b, -1));
        }
    }
    // ends before starts at equal coordinates, since intervals are open
    ev.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let mut cur = 0i32;
    let mut best = 0i32;
    for (_, d) in ev {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

/// Whether the open intervals cover `(a, b)`.
pub fn covers(intervals: &[(f64, f64)], target: (f64, f64)) -> bool {
    let mut v: Vec<(f64, f64)> = intervals.iter().copied().filter(|i| i.0 < i.1).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut reach = target.0;
    let mut started = false;
    for (lo, hi) in v {
        if !started {
            if lo > target.0 {
                return false;
            }
        } else if lo >= reach {
            return false;
        }
        if lo <= reach || !started {
            started = true;
            reach = reach.max(hi);
        }
        if reach >= target.1 {
            return true;
        }
    }
    started && reach >= target.1
}

/// Subcollection of a finite cover of `(a, b)` in which every point lies in
/// at most two intervals. Returns indices in left-to-right order, or `None`
/// when the intervals do not cover `(a, b)`.
pub fn select_finite_subcover(intervals: &[(f64, f64)], target: (f64, f64)) -> Option<Vec<usize>> {
    let (a, b) = target;
    // chain of intervals with maximal right endpoints
    let first = (0..intervals.len())
        .filter(|&i| intervals[i].0 <= a && intervals[i].1 > a)
        .max_by(|&i, &j| intervals[i].1.total_cmp(&intervals[j].1).then(j.cmp(&i)))?;
    let mut chain = vec![first];
    let mut reach = intervals[first].1;
    while reach < b {
        let next = (0..intervals.len())
            .filter(|&i| intervals[i].0 < reach && intervals[i].1 > reach)
            .max_by(|&i, &j| intervals[i].1.total_cmp(&intervals[j].1).then(j.cmp(&i)))?;
        chain.push(next);
        reach = intervals[next].1;
    }
    Some(prune_chain(intervals, &chain))
}

/// Given a chain with increasing endpoints covering a segment, keep `J_0`, then
/// repeatedly the last interval starting before the previous one ends.
fn prune_chain(intervals: &[(f64, f64)], chain: &[usize]) -> Vec<usize> {
    let n = chain.len();
    let mut out = vec![chain[0]];
    let mut cur = 0;
    while cur + 1 < n {
        let end = intervals[chain[cur]].1;
        let mut next = cur + 1;
        while next + 1 < n && intervals[chain[next + 1]].0 < end {
            next += 1;
        }
        out.push(chain[next]);
        cur = next;
    }
    out
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Points of `target` where every radical vanishes, and the scale used for
/// the test.
pub fn common_zeros(budget: &GrowthBudget, target: (f64, f64)) -> (Vec<f64>, f64) {
    let (lo, hi) = target;
    let n = SCAN_POINTS;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let scale = grid.iter().map(|&t| budget.dominant(t).1).fold(0.0, f64::max);
    if scale == 0.0 {
        return (grid, 0.0);
    }
    let w: Vec<f64> = grid.iter().map(|&t| budget.weighted_size(t, scale)).collect();
    let mut zeros = Vec::new();
    for i in 0..=n {
        let left = if i > 0 { w[i - 1] } else { f64::INFINITY };
        let right = if i < n { w[i + 1] } else { f64::INFINITY };
        if w[i] > left || w[i] > right {
            continue;
        }
        let t = if w[i] == 0.0 {
            grid[i]
        } else {
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(n)];
            golden_min(|t| budget.weighted_size(t, scale), a, b, 1e-15 * (hi - lo))
        };
        if budget.vanishes(t, scale) {
            zeros.push(t);
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));
    (zeros, scale)
}

/// Connected components of the nonvanishing set inside `target`, with
/// flags telling whether the radicals vanish at each end.
pub fn components(budget: &GrowthBudget, target: (f64, f64)) -> Vec<(f64, f64, bool, bool)> {
    let (zeros, scale) = common_zeros(budget, target);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut cuts = vec![(target.0, false)];
    for z in zeros {
        if z <= target.0 {
            cuts[0].1 = true;
        } else if z >= target.1 {
            continue;
        } else {
            cuts.push((z, true));
        }
    }
    let end_vanishes = budget.vanishes(target.1, scale);
    cuts[0].1 |= budget.vanishes(target.0, scale);
    cuts.push((target.1, end_vanishes));
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, va) = w[0];
        let (b, vb) = w[1];
        if b > a && !budget.vanishes(0.5 * (a + b), scale) {
            out.push((a, b, va, vb));
        }
    }
    out
}

fn check_count(n: usize) -> Result<()> {
    if n > MAX_CHAIN {
        Err(Error::NonterminatingChain { count: n })
    } else {
        Ok(())
    }
}

/// Chain `J_{g-1} = J(alpha_g)` leftwards from `start` until the intervals
/// fall below `floor` or reach `lo`. Returned left to right.
fn chain_left(budget: &GrowthBudget, start: IntervalRecord, lo: f64, floor: f64) -> Result<Vec<IntervalRecord>> {
    let mut out = vec![start];
    loop {
        let last = out.last().unwrap();
        if last.s_minus <= lo || last.len() < floor {
            break;
        }
        let next = grow_interval(budget, last.s_minus)?;
        if next.s_minus >= last.s_minus || next.residual > RECORD_TOL {
            break;
        }
        out.push(next);
        check_count(out.len())?;
    }
    out.reverse();
    Ok(out)
}

fn chain_right(budget: &GrowthBudget, start: IntervalRecord, hi: f64, floor: f64) -> Result<Vec<IntervalRecord>> {
    let mut out = vec![start];
    loop {
        let last = out.last().unwrap();
        if last.s_plus >= hi || last.len() < floor {
            break;
        }
        let next = grow_interval(budget, last.s_plus)?;
        if next.s_plus <= last.s_plus || next.residual > RECORD_TOL {
            break;
        }
        out.push(next);
        check_count(out.len())?;
    }
    Ok(out)
}

/// Interlacing selection on a chain with increasing endpoints, anchored at
/// `anchor` and run outward in both directions.
pub fn glue_select(chain: &[(f64, f64)], anchor: usize) -> Vec<usize> {
    let n = chain.len();
    let mut right = Vec::new();
    let mut cur = anchor;
    while cur + 1 < n {
        let end = chain[cur].1;
        let mut g = cur + 1;
        while g + 1 < n && chain[g + 1].0 < end {
            g += 1;
        }
        right.push(g);
        cur = g;
    }
    let mut left = Vec::new();
    let mut cur = anchor;
    while cur > 0 {
        let start = chain[cur].0;
        let mut g = cur - 1;
        while g > 0 && chain[g - 1].1 > start {
            g -= 1;
        }
        left.push(g);
        cur = g;
    }
    left.reverse();
    let mut sel = left;
    // the anchor is redundant when its two neighbours already overlap
    let drop_anchor = match (sel.last(), right.first()) {
        (Some(&l), Some(&r)) => chain[l].1 > chain[r].0,
        _ => false,
    };
    if !drop_anchor {
        sel.push(anchor);
    }
    sel.extend(right);
    sel
}

/// Whether left and right endpoints of consecutive selected intervals
/// interlace: `beta_{j-2} <= alpha_j < beta_{j-1}`.
pub fn interlacing(intervals: &[(f64, f64)]) -> bool {
    for j in 1..intervals.len() {
        if !(intervals[j].0 < intervals[j - 1].1) || !(intervals[j].0 > intervals[j - 1].0) {
            return false;
        }
        if j >= 2 && intervals[j].0 < intervals[j - 2].1 {
            return false;
        }
    }
    true
}

fn reaches_right(r: &IntervalRecord, hi: f64) -> bool {
    r.s_plus >= hi
}

/// Infimum of base points whose interval reaches `hi`, located by scanning
/// and bisection. Returns the interval at the reaching side of the bracket.
fn leftmost_reaching(budget: &GrowthBudget, lo: f64, hi: f64, eps: f64) -> Result<IntervalRecord> {
    let m = 256;
    let pts: Vec<f64> = (1..m).map(|i| lo + (hi - lo) * i as f64 / m as f64).chain([hi - eps]).collect();
    let mut prev: Option<f64> = None;
    for &t in &pts {
        let r = grow_interval(budget, t)?;
        if reaches_right(&r, hi) {
            let Some(mut a) = prev else { return Ok(r) };
            let mut b = t;
            let mut rb = r;
            for _ in 0..60 {
                if b - a <= eps {
                    break;
                }
                let mid = 0.5 * (a + b);
                let rm = grow_interval(budget, mid)?;
                if reaches_right(&rm, hi) {
                    b = mid;
                    rb = rm;
                } else {
                    a = mid;
                }
            }
            return Ok(rb);
        }
        prev = Some(t);
    }
    Err(Error::BudgetExhausted { t: hi })
}

fn reflect(r: &IntervalRecord) -> (f64, f64) {
    (r.s_minus, r.s_plus)
}

/// Case with both ends vanishing: two-sided chain from the midpoint, glued.
fn cover_both_vanish(budget: &GrowthBudget, lo: f64, hi: f64, floor: f64) -> Result<(Vec<IntervalRecord>, usize)> {
    let j0 = grow_interval(budget, 0.5 * (lo + hi))?;
    let left = chain_left(budget, j0.clone(), lo, floor)?;
    let right = chain_right(budget, j0, hi, floor)?;
    let anchor = left.len() - 1;
    let mut chain = left;
    chain.extend(right.into_iter().skip(1));
    let iv: Vec<(f64, f64)> = chain.iter().map(reflect).collect();
    let sel = glue_select(&iv, anchor);
    let grown = chain.len();
    Ok((sel.into_iter().map(|i| chain[i].clone()).collect(), grown))
}

/// Case with only the left end vanishing: start from the leftmost interval
/// reaching the right end, chain leftwards, select.
fn cover_left_vanishes(budget: &GrowthBudget, lo: f64, hi: f64, floor: f64) -> Result<(Vec<IntervalRecord>, usize)> {
    let j0 = leftmost_reaching(budget, lo, hi, floor)?;
    let chain = chain_left(budget, j0, lo, floor)?;
    let iv: Vec<(f64, f64)> = chain.iter().map(reflect).collect();
    let anchor = chain.len() - 1;
    let sel = glue_select(&iv, anchor);
    let grown = chain.len();
    Ok((sel.into_iter().map(|i| chain[i].clone()).collect(), grown))
}

/// Case with neither end vanishing: greedy maximal right endpoint over grown
/// candidates, then pruning.
fn cover_finite(budget: &GrowthBudget, lo: f64, hi: f64, eps: f64) -> Result<(Vec<IntervalRecord>, usize)> {
    let m = budget.seeds.max(1);
    let mut cands: Vec<IntervalRecord> = Vec::new();
    let bases = std::iter::once(lo + eps)
        .chain((1..m).map(|i| lo + (hi - lo) * i as f64 / m as f64))
        .chain(std::iter::once(hi - eps));
    for t in bases {
        cands.push(grow_interval(budget, t)?);
    }
    let mut chain: Vec<usize> = Vec::new();
    let first = (0..cands.len())
        .filter(|&i| cands[i].s_minus <= lo)
        .max_by(|&i, &j| cands[i].s_plus.total_cmp(&cands[j].s_plus))
        .ok_or(Error::BudgetExhausted { t: lo })?;
    chain.push(first);
    let mut reach = cands[first].s_plus;
    let mut step = cands[first].s_plus - cands[first].t1;
    while reach < hi {
        // a base point ahead of the reach covers more when its interval
        // still contains the reach; the reach itself always works
        let mut best: Option<IntervalRecord> = None;
        let mut ahead = reach + 0.9 * step;
        for _ in 0..4 {
            match grow_interval(budget, ahead) {
                Ok(rec) if ahead < hi && rec.s_minus < reach => {
                    ahead = reach + 2.0 * (ahead - reach);
                    best = Some(rec);
                }
                _ => break,
            }
        }
        cands.push(match best {
            Some(rec) => rec,
            None => grow_interval(budget, reach)?,
        });
        step = cands.last().map(|r| r.s_plus - r.t1).unwrap();
        check_count(cands.len())?;
        let next = (0..cands.len())
            .filter(|&i| cands[i].s_minus < reach && cands[i].s_plus > reach)
            .max_by(|&i, &j| cands[i].s_plus.total_cmp(&cands[j].s_plus))
            .unwrap();
        chain.push(next);
        reach = cands[next].s_plus;
    }
    let iv: Vec<(f64, f64)> = cands.iter().map(reflect).collect();
    let sel = prune_chain(&iv, &chain);
    let grown = cands.len();
    Ok((sel.into_iter().map(|i| cands[i].clone()).collect(), grown))
}

/// Subcover of the nonvanishing set within the budget domain.
pub fn extract_subcover(budget: &GrowthBudget) -> Result<CoverReport> {
    extract_subcover_on(budget, budget.domain)
}

/// Subcover of the nonvanishing set within `target`, a subinterval of the
/// budget domain. Intervals still grow inside the whole domain.
pub fn extract_subcover_on(budget: &GrowthBudget, target: (f64, f64)) -> Result<CoverReport> {
    let eps = CHAIN_FLOOR * (budget.domain.1 - budget.domain.0);
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    let mut domain_length = 0.0;
    for (lo, hi, va, vb) in components(budget, target) {
        domain_length += hi - lo;
        let (sel, grown, case) = match (va, vb) {
            (true, true) => {
                let (s, g) = cover_both_vanish(budget, lo, hi, eps)?;
                (s, g, ComponentCase::BothVanish)
            }
            (true, false) => {
                let (s, g) = cover_left_vanishes(budget, lo, hi, eps)?;
                (s, g, ComponentCase::OneVanishes)
            }
            (false, true) => {
                let mirrored = mirror(budget)?;
                let (s, g) = cover_left_vanishes(&mirrored, -hi, -lo, eps)?;
                let mut s: Vec<IntervalRecord> = s.into_iter().map(unmirror).collect();
                s.reverse();
                (s, g, ComponentCase::OneVanishes)
            }
            (false, false) => {
                let (s, g) = cover_finite(budget, lo, hi, eps)?;
                (s, g, ComponentCase::NeitherVanishes)
            }
        };
        let first = sel.first().map(|r| r.s_minus).unwrap_or(hi);
        let last = sel.last().map(|r| r.s_plus).unwrap_or(lo);
        let uncovered = (first - lo).max(0.0) + (hi - last).max(0.0);
        summaries.push(ComponentSummary {
            lo,
            hi,
            case,
            grown,
            selected: sel.len(),
            uncovered,
        });
        records.extend(sel);
    }
    let iv: Vec<(f64, f64)> = records.iter().map(reflect).collect();
    Ok(CoverReport {
        max_overlap: max_overlap(&iv),
        total_length: records.iter().map(|r| r.len()).sum(),
        records,
        components: summaries,
        domain_length,
        eps_len: eps,
    })
}

#[derive(Debug)]
struct Mirrored(CurveRef);

impl crate::curve::Curve for Mirrored {
    fn jet(&self, t: f64, order: usize) -> crate::jet::Jet {
        let mut j = self.0.jet(-t, order);
        for (s, c) in j.c.iter_mut().enumerate() {
            if s % 2 == 1 {
                *c = -*c;
            }
        }
        j
    }
}

fn mirror(b: &GrowthBudget) -> Result<GrowthBudget> {
    let rate = match &b.rate {
        Rate::Constant(l) => Rate::Constant(*l),
        Rate::PerBase(f) => {
            let f = f.clone();
            Rate::PerBase(Arc::new(move |t| f(-t)))
        }
    };
    let radicals = b
        .radicals
        .iter()
        .map(|r| Radical::new(Arc::new(Mirrored(r.curve.clone())), r.index))
        .collect();
    let mut m = GrowthBudget::new(rate, b.d, radicals, (-b.domain.1, -b.domain.0))?;
    m.seeds = b.seeds;
    Ok(m)
}

fn unmirror(r: IntervalRecord) -> IntervalRecord {
    IntervalRecord {
        s_minus: -r.s_plus,
        s_plus: -r.s_minus,
        t1: -r.t1,
        phi_minus: r.phi_plus,
        phi_plus: r.phi_minus,
        ..r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{const_curve, poly_curve};
    use crate::jet::C64;
    use proptest::prelude::*;

    fn one() -> Vec<Radical> {
        vec![Radical::new(const_curve(C64::new(1.0, 0.0)), 2)]
    }

    #[test]
    fn first_kind_constant_radical() {
        let b = GrowthBudget::constant(2.0, 0.2, one(), (0.0, 1.0)).unwrap();
        let r = grow_interval(&b, 0.5).unwrap();
        assert_eq!(r.kind, IntervalKind::First);
        assert!((r.s_minus - 0.45).abs() < 1e-12 && (r.s_plus - 0.55).abs() < 1e-12);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn second_kind_near_left_boundary() {
        let b = GrowthBudget::constant(2.0, 0.2, one(), (0.0, 1.0)).unwrap();
        let r = grow_interval(&b, 0.02).unwrap();
        assert_eq!(r.kind, IntervalKind::Second);
        assert_eq!(r.s_minus, 0.0);
        // 2 * 0.02 spent on the left, the remaining 0.16 on the right
        assert!((r.s_plus - (0.02 + 0.16 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn vanishing_point_is_outside() {
        let b = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[0.0, 1.0]), 2)], (-1.0, 1.0)).unwrap();
        assert!(matches!(grow_interval(&b, 0.0), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn budget_exhausted_when_domain_too_short() {
        let b = GrowthBudget::constant(1.0, 0.2, one(), (0.0, 0.1)).unwrap();
        assert!(matches!(grow_interval(&b, 0.05), Err(Error::BudgetExhausted { .. })));
    }

    #[test]
    fn variation_of_square_root() {
        // b = t on (0, 4): int |(t^{1/2})'| = 2
        let b = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[0.0, 1.0]), 2)], (0.0, 4.0)).unwrap();
        assert!((b.variation(0.0, 4.0) - 2.0).abs() < 1e-10);
        assert!((b.variation(1.0, 2.25) - 0.5).abs() < 1e-12);
    }

    fn check_cover(rep: &CoverReport, lo: f64, hi: f64) {
        let iv = rep.intervals();
        assert!(rep.max_overlap <= 2, "overlap {}", rep.max_overlap);
        assert!(rep.total_length <= 2.0 * rep.domain_length + rep.eps_len * rep.records.len() as f64);
        for r in &rep.records {
            assert!(r.residual <= RECORD_TOL, "{r:?}");
        }
        for i in 1..1000 {
            let t = lo + (hi - lo) * i as f64 / 1000.0;
            let c = iv.iter().filter(|j| j.0 < t && t < j.1).count();
            assert!(c <= 2);
        }
    }

    #[test]
    fn both_ends_vanishing_chain() {
        let b = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[0.0, 1.0, -1.0]), 2)], (0.0, 1.0)).unwrap();
        let rep = extract_subcover(&b).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert_eq!(rep.components[0].case, ComponentCase::BothVanish);
        check_cover(&rep, 0.0, 1.0);
        assert!(rep.total_length <= 2.0);
        assert!(interlacing(&rep.intervals()));
        assert!(rep.components[0].uncovered < 1e-5, "{:?}", rep.components);
        for i in 1..10000 {
            let t = i as f64 / 10000.0;
            assert!(rep.intervals().iter().any(|j| j.0 < t && t < j.1), "{t}");
        }
    }

    #[test]
    fn one_end_vanishing() {
        let b = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[0.0, 1.0]), 2)], (0.0, 1.0)).unwrap();
        let rep = extract_subcover(&b).unwrap();
        assert_eq!(rep.components[0].case, ComponentCase::OneVanishes);
        check_cover(&rep, 0.0, 1.0);
        assert_eq!(rep.records.last().unwrap().s_plus, 1.0);
        let m = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[1.0, -1.0]), 2)], (0.0, 1.0)).unwrap();
        let rep = extract_subcover(&m).unwrap();
        check_cover(&rep, 0.0, 1.0);
        assert_eq!(rep.records[0].s_minus, 0.0);
        assert!(interlacing(&rep.intervals()));
    }

    #[test]
    fn interior_zero_splits_components() {
        let b = GrowthBudget::constant(1.0, 0.2, vec![Radical::new(poly_curve(&[-0.3, 1.0]), 2)], (0.0, 1.0)).unwrap();
        let rep = extract_subcover(&b).unwrap();
        assert_eq!(rep.components.len(), 2);
        assert!((rep.components[0].hi - 0.3).abs() < 1e-12);
        check_cover(&rep, 0.0, 1.0);
    }

    #[test]
    fn finite_case_and_whole_interval() {
        let b = GrowthBudget::constant(1.0, 0.2, one(), (0.0, 1.0)).unwrap();
        let rep = extract_subcover(&b).unwrap();
        assert_eq!(rep.components[0].case, ComponentCase::NeitherVanishes);
        check_cover(&rep, 0.0, 1.0);
        assert!(covers(&rep.intervals(), (0.0, 1.0)));
        let whole = [(0.2, 0.5), (-0.5, 1.5), (0.4, 0.9)];
        let sel = select_finite_subcover(&whole, (0.0, 1.0)).unwrap();
        assert_eq!(sel, vec![1]);
        assert_eq!(max_overlap(&[whole[1]]), 1);
    }

    fn brute_force_exists(iv: &[(f64, f64)], target: (f64, f64)) -> bool {
        (1u32..1 << iv.len()).any(|mask| {
            let sub: Vec<(f64, f64)> = (0..iv.len()).filter(|i| mask >> i & 1 == 1).map(|i| iv[i]).collect();
            covers(&sub, target) && max_overlap(&sub) <= 2
        })
    }

    #[test]
    fn seven_interval_selection_matches_brute_force() {
        let iv = [(0.0, 0.3), (-0.1, 0.25), (0.2, 0.6), (0.25, 0.5), (0.45, 0.8), (0.55, 0.9), (0.7, 1.05)];
        let sel = select_finite_subcover(&iv, (0.0, 1.0)).unwrap();
        let sub: Vec<(f64, f64)> = sel.iter().map(|&i| iv[i]).collect();
        assert!(covers(&sub, (0.0, 1.0)));
        assert!(max_overlap(&sub) <= 2);
        assert!(brute_force_exists(&iv, (0.0, 1.0)));
        let gap = [(0.0, 0.3), (0.3, 0.6), (0.5, 1.0), (-0.2, 0.1), (0.1, 0.2), (0.55, 0.7), (0.9, 1.2)];
        assert_eq!(select_finite_subcover(&gap, (0.0, 1.0)).is_some(), brute_force_exists(&gap, (0.0, 1.0)));
    }

    proptest! {
        #[test]
        fn selection_agrees_with_brute_force(raw in proptest::collection::vec((-0.2f64..1.0, 0.05f64..0.6), 7)) {
            let iv: Vec<(f64, f64)> = raw.iter().map(|&(a, w)| (a, a + w)).collect();
            let target = (0.0, 1.0);
            let sel = select_finite_subcover(&iv, target);
            prop_assert_eq!(sel.is_some(), brute_force_exists(&iv, target));
            if let Some(sel) = sel {
                let sub: Vec<(f64, f64)> = sel.iter().map(|&i| iv[i]).collect();
                prop_assert!(covers(&sub, target));
                prop_assert!(max_overlap(&sub) <= 2);
            }
        }

        #[test]
        fn larger_budget_grows_first_kind_interval(d in 0.01f64..0.15, t in 0.3f64..0.7) {
            let r = vec![Radical::new(poly_curve(&[0.5, 1.0, -0.7]), 2)];
            let a = GrowthBudget::constant(1.0, d, r.clone(), (0.0, 1.0)).unwrap();
            let b = GrowthBudget::constant(1.0, d * 1.5, r, (0.0, 1.0)).unwrap();
            let ja = grow_interval(&a, t).unwrap();
            let jb = grow_interval(&b, t).unwrap();
            prop_assume!(ja.kind == IntervalKind::First && jb.kind == IntervalKind::First);
            prop_assert!(jb.s_minus < ja.s_minus && jb.s_plus > ja.s_plus);
            prop_assert!((ja.phi_minus - ja.phi_plus).abs() <= 1e-10 * ja.rhs);
        }
    }
}
