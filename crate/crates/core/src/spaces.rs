//! Sampled functions and their Lebesgue, weak Lebesgue and Hölder norms.
//!
//! Norms are exact for the piecewise-linear interpolant of the moduli
//! (or for piecewise-constant data, such as slopes of an interpolant).

use crate::curve::{Curve, CurveFamily, CurveRef};
use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Samples of a complex function on an increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: Vec<f64>,
    pub values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::SizeMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        if grid.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                have: grid.len(),
            });
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.iter().map(|&t| f(t)).collect();
        SampledFunction { grid, values }
    }

    pub fn from_real_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| C64::new(f(t), 0.0))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    pub fn length(&self) -> f64 {
        self.domain().1 - self.domain().0
    }

    /// Piecewise-linear profile of `|f|`.
    pub fn profile(&self) -> Profile {
        let pieces = self
            .grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| Piece {
                h: g[1] - g[0],
                u: v[0].norm(),
                v: v[1].norm(),
            })
            .collect();
        Profile::new(pieces, self.length())
    }

    /// Slopes of the piecewise-linear interpolant, one per segment.
    pub fn slopes(&self) -> Vec<C64> {
        self.grid
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(g, v)| (v[1] - v[0]) / (g[1] - g[0]))
            .collect()
    }

    /// Profile of `|f'|` for the piecewise-linear interpolant (piecewise constant).
    pub fn slope_profile(&self) -> Profile {
        let pieces = self
            .grid
            .windows(2)
            .zip(self.slopes())
            .map(|(g, s)| Piece {
                h: g[1] - g[0],
                u: s.norm(),
                v: s.norm(),
            })
            .collect();
        Profile::new(pieces, self.length())
    }

    /// Derivative by central differences (second-order on nonuniform grids),
    /// one-sided at the ends.
    pub fn central_derivative(&self) -> SampledFunction {
        let n = self.len();
        let (x, y) = (&self.grid, &self.values);
        let mut d = Vec::with_capacity(n);
        for i in 0..n {
            let v = if i == 0 {
                (y[1] - y[0]) / (x[1] - x[0])
            } else if i == n - 1 {
                (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2])
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                y[i + 1] * (h0 / (h1 * (h0 + h1))) - y[i - 1] * (h1 / (h0 * (h0 + h1)))
                    + y[i] * ((h1 - h0) / (h0 * h1))
            };
            d.push(v);
        }
        SampledFunction {
            grid: x.clone(),
            values: d,
        }
    }
}

/// An affine piece of a nonnegative function: length `h`, values `u` and `v`
/// at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub h: f64,
    pub u: f64,
    pub v: f64,
}

/// A nonnegative function given as a finite union of affine pieces on an
/// interval of length `domain_length` (pieces need not cover all of it).
#[derive(Debug, Clone, Serialize)]
pub struct Profile {
    pub pieces: Vec<Piece>,
    pub domain_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub lp: f64,
    pub weak_lp: f64,
    pub lp_normalized: f64,
    pub weak_lp_normalized: f64,
    pub domain_length: f64,
}

/// Neumaier compensated sum.
#[derive(Default, Clone, Copy)]
struct Acc {
    s: f64,
    c: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    fn get(&self) -> f64 {
        self.s + self.c
    }
}

impl Profile {
    pub fn new(pieces: Vec<Piece>, domain_length: f64) -> Self {
        Profile { pieces, domain_length }
    }

    pub fn concat(parts: &[Profile], domain_length: f64) -> Self {
        Profile {
            pieces: parts.iter().flat_map(|p| p.pieces.iter().copied()).collect(),
            domain_length,
        }
    }

    pub fn scale(&self, k: f64) -> Profile {
        Profile {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    h: p.h,
                    u: p.u * k,
                    v: p.v * k,
                })
                .collect(),
            domain_length: self.domain_length,
        }
    }

    pub fn sup(&self) -> f64 {
        self.pieces.iter().map(|p| p.u.max(p.v)).fold(0.0, f64::max)
    }

    /// `int |f|^p`.
    pub fn lp_power(&self, p: f64) -> f64 {
        let mut acc = Acc::default();
        for pc in &self.pieces {
            acc.add(piece_power_integral(pc, p));
        }
        acc.get()
    }

    pub fn lp(&self, p: f64) -> f64 {
        self.lp_power(p).powf(1.0 / p)
    }

    /// `|{f > r}|`.
    pub fn distribution(&self, r: f64) -> f64 {
        let mut acc = Acc::default();
        for pc in &self.pieces {
            let (lo, hi) = if pc.u <= pc.v { (pc.u, pc.v) } else { (pc.v, pc.u) };
            if hi <= r {
                continue;
            }
            if lo > r || hi == lo {
                acc.add(pc.h);
            } else {
                acc.add(pc.h * (hi - r) / (hi - lo));
            }
        }
        acc.get()
    }

    /// `sup_r r |{f > r}|^{1/p}`, exact for the affine pieces. The
    /// distribution function is affine in `r` between consecutive node
    /// values, so each gap is maximized in closed form.
    pub fn weak_lp(&self, p: f64) -> f64 {
        #[derive(Clone, Copy)]
        enum Ev {
            Jump(f64),
            Start(f64, f64, f64),
            End(f64, f64),
        }
        let mut events: Vec<(f64, Ev)> = Vec::with_capacity(2 * self.pieces.len());
        let mut total = Acc::default();
        for pc in &self.pieces {
            if pc.h <= 0.0 {
                continue;
            }
            total.add(pc.h);
            let (lo, hi) = if pc.u <= pc.v { (pc.u, pc.v) } else { (pc.v, pc.u) };
            if hi - lo <= 1e-15 * hi {
                events.push((hi, Ev::Jump(pc.h)));
            } else {
                let s = pc.h / (hi - lo);
                events.push((lo, Ev::Start(s, hi, pc.h)));
                events.push((hi, Ev::End(s, hi)));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        // m(r) = c - d r on the current gap
        let mut c = total;
        let mut d = Acc::default();
        let mut best: f64 = 0.0;
        let inv = 1.0 / p;
        let g = |r: f64, c: f64, d: f64| -> f64 {
            let m = (c - d * r).max(0.0);
            r * m.powf(inv)
        };
        let mut r_prev = 0.0;
        let mut i = 0;
        while i < events.len() {
            let r_e = events[i].0;
            let (cv, dv) = (c.get(), d.get());
            if r_e > r_prev {
                best = best.max(g(r_prev, cv, dv)).max(g(r_e, cv, dv));
                if dv > 0.0 {
                    let rs = p * cv / (dv * (p + 1.0));
                    if rs > r_prev && rs < r_e {
                        best = best.max(g(rs, cv, dv));
                    }
                }
            }
            while i < events.len() && events[i].0 == r_e {
                match events[i].1 {
                    Ev::Jump(h) => c.add(-h),
                    Ev::Start(s, hi, h) => {
                        // the piece switches from h to s (hi - r)
                        c.add(s * hi);
                        c.add(-h);
                        d.add(s);
                    }
                    Ev::End(s, hi) => {
                        c.add(-s * hi);
                        d.add(-s);
                    }
                }
                i += 1;
            }
            r_prev = r_e;
        }
        best
    }

    pub fn report(&self, p: f64) -> NormReport {
        let lp = self.lp(p);
        let weak = self.weak_lp(p);
        let k = self.domain_length.powf(-1.0 / p);
        NormReport {
            p,
            lp,
            weak_lp: weak,
            lp_normalized: lp * k,
            weak_lp_normalized: weak * k,
            domain_length: self.domain_length,
        }
    }
}

fn piece_power_integral(pc: &Piece, p: f64) -> f64 {
    let (u, v) = (pc.u, pc.v);
    let m = 0.5 * (u + v);
    let dlt = 0.5 * (v - u).abs();
    if m == 0.0 {
        return 0.0;
    }
    if dlt <= 1e-4 * m {
        let r = dlt / m;
        pc.h * m.powf(p) * (1.0 + p * (p - 1.0) * r * r / 6.0)
    } else {
        pc.h * (v.powf(p + 1.0) - u.powf(p + 1.0)) / ((p + 1.0) * (v - u))
    }
}

pub fn lp_norm(f: &SampledFunction, p: f64) -> f64 {
    f.profile().lp(p)
}

pub fn weak_lp_quasinorm(f: &SampledFunction, p: f64) -> f64 {
    f.profile().weak_lp(p)
}

pub fn norm_report(f: &SampledFunction, p: f64) -> NormReport {
    f.profile().report(p)
}

/// Grid on `(a, b)` graded dyadically toward `a`: level `j` covers
/// `[a + L 2^{-(j+1)}, a + L 2^{-j}]` and is split into `per_level` equal
/// parts; the finest level stops at `a + L 2^{-depth}`.
pub fn graded_grid_left(a: f64, b: f64, depth: usize, per_level: usize) -> Vec<f64> {
    let l = b - a;
    let mut g = Vec::with_capacity(depth * per_level + 1);
    for j in (0..depth).rev() {
        let lo = l * 0.5f64.powi(j as i32 + 1);
        let hi = l * 0.5f64.powi(j as i32);
        for s in 0..per_level {
            g.push(a + lo + (hi - lo) * s as f64 / per_level as f64);
        }
    }
    g.push(b);
    g
}

pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

// ---- Hölder data ------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolderSource {
    Oracle,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolderData {
    pub k: usize,
    pub alpha: f64,
    /// `sup |f^(s)|` for `s = 0..=k`.
    pub sup_norms: Vec<f64>,
    /// Hölder constant of `f^(k)` with exponent `alpha`.
    pub top_holder: f64,
    /// `sum_s sup |f^(s)| + top_holder`.
    pub norm: f64,
    pub source: HolderSource,
}

/// Exhaustive pairs up to this many; beyond it, pairs at dyadic index gaps.
pub const PAIR_BUDGET: usize = 200_000;

/// `sup |v_i - v_j| / |x_i - x_j|^alpha` over sample pairs.
pub fn holder_quotient_sup(x: &[f64], v: &[C64], alpha: f64) -> f64 {
    let n = x.len();
    let mut best: f64 = 0.0;
    let mut consider = |i: usize, j: usize| {
        let dx = (x[j] - x[i]).abs();
        if dx > 0.0 {
            let q = (v[j] - v[i]).norm() / dx.powf(alpha);
            if q > best {
                best = q;
            }
        }
    };
    if n * n.saturating_sub(1) / 2 <= PAIR_BUDGET {
        for i in 0..n {
            for j in i + 1..n {
                consider(i, j);
            }
        }
    } else {
        let mut gap = 1;
        while gap < n {
            for i in 0..n - gap {
                consider(i, i + gap);
            }
            gap *= 2;
        }
    }
    best
}

/// Hölder data of a curve oracle by dense sampling. For `alpha = 1` the
/// Lipschitz constant also takes `sup |f^(k+1)|` into account.
pub fn holder_data_oracle(f: &dyn Curve, domain: (f64, f64), k: usize, alpha: f64, samples: usize) -> HolderData {
    let order = if alpha == 1.0 { k + 1 } else { k };
    let mut sup = vec![0.0f64; k + 1];
    let mut xs = Vec::with_capacity(samples);
    let mut top = Vec::with_capacity(samples);
    let mut lip: f64 = 0.0;
    for i in 0..samples {
        let t = domain.0 + (domain.1 - domain.0) * i as f64 / (samples - 1) as f64;
        let j = f.jet(t, order);
        for s in 0..=k {
            sup[s] = sup[s].max(j.derivative(s).norm());
        }
        if order > k {
            lip = lip.max(j.derivative(k + 1).norm());
        }
        xs.push(t);
        top.push(j.derivative(k));
    }
    let h = holder_quotient_sup(&xs, &top, alpha).max(lip);
    HolderData {
        k,
        alpha,
        norm: sup.iter().sum::<f64>() + h,
        sup_norms: sup,
        top_holder: h,
        source: HolderSource::Oracle,
    }
}

/// Hölder data from samples via divided differences.
pub fn holder_data_sampled(f: &SampledFunction, k: usize, alpha: f64) -> Result<HolderData> {
    if f.len() < k + 2 {
        return Err(Error::InsufficientData {
            needed: k + 2,
            have: f.len(),
        });
    }
    let mut xs: Vec<f64> = f.grid.clone();
    let mut dd: Vec<C64> = f.values.clone();
    let mut sup = vec![dd.iter().map(|v| v.norm()).fold(0.0, f64::max)];
    // position of each divided difference: mean of its nodes
    for m in 1..=k {
        let mut nd = Vec::with_capacity(dd.len() - 1);
        let mut nx = Vec::with_capacity(dd.len() - 1);
        for i in 0..dd.len() - 1 {
            let span = f.grid[i + m] - f.grid[i];
            nd.push((dd[i + 1] - dd[i]) / span * m as f64);
            nx.push(f.grid[i..=i + m].iter().sum::<f64>() / (m + 1) as f64);
        }
        dd = nd;
        xs = nx;
        sup.push(dd.iter().map(|v| v.norm()).fold(0.0, f64::max));
    }
    let h = holder_quotient_sup(&xs, &dd, alpha);
    Ok(HolderData {
        k,
        alpha,
        norm: sup.iter().sum::<f64>() + h,
        sup_norms: sup,
        top_holder: h,
        source: HolderSource::FiniteDifference,
    })
}

/// Diameter of a finite point set in the plane (convex hull + all hull pairs).
pub fn diameter(points: &[C64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|z| (z.re, z.im)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() <= 1 {
        return 0.0;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let mut d: f64 = 0.0;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            d = d.max(((hull[i].0 - hull[j].0).powi(2) + (hull[i].1 - hull[j].1).powi(2)).sqrt());
        }
    }
    if hull.len() < 2 {
        d = ((pts[0].0 - pts[pts.len() - 1].0).powi(2) + (pts[0].1 - pts[pts.len() - 1].1).powi(2)).sqrt();
    }
    d
}

/// `V_I(f)`: diameter of the value set. Exact for the piecewise-linear
/// interpolant, whose image lies in the convex hull of the samples.
pub fn oscillation(f: &SampledFunction) -> f64 {
    diameter(&f.values)
}

/// Oscillation of an oracle on `domain` from `samples` evaluations.
pub fn oscillation_oracle(f: &dyn Curve, domain: (f64, f64), samples: usize) -> f64 {
    let vals: Vec<C64> = (0..samples)
        .map(|i| f.value(domain.0 + (domain.1 - domain.0) * i as f64 / (samples - 1) as f64))
        .collect();
    diameter(&vals)
}

/// Derivative norms of `f` extended by zero outside `support`. The
/// function must vanish at every boundary point of the support that lies
/// inside the grid's interval.
pub fn extend_by_zero(f: &SampledFunction, support: &[(f64, f64)], p: f64) -> Result<NormReport> {
    let (a, b) = f.domain();
    let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let value_at = |t: f64| -> C64 {
        let i = match f.grid.binary_search_by(|g| g.total_cmp(&t)) {
            Ok(i) => return f.values[i],
            Err(i) => i.clamp(1, f.len() - 1),
        };
        let w = (t - f.grid[i - 1]) / (f.grid[i] - f.grid[i - 1]);
        f.values[i - 1] * (1.0 - w) + f.values[i] * w
    };
    for &(lo, hi) in support {
        for e in [lo, hi] {
            if e > a && e < b && value_at(e).norm() > 1e-9 * scale {
                return Err(Error::NonvanishingBoundary { point: e });
            }
        }
    }
    let inside = |t: f64| support.iter().any(|&(lo, hi)| t > lo && t < hi);
    let pieces = f
        .grid
        .windows(2)
        .zip(f.slopes())
        .map(|(g, s)| {
            let m = if inside(0.5 * (g[0] + g[1])) { s.norm() } else { 0.0 };
            Piece { h: g[1] - g[0], u: m, v: m }
        })
        .collect();
    Ok(Profile::new(pieces, b - a).report(p))
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub q: f64,
    pub p: f64,
    pub weak_q: f64,
    pub lq: f64,
    /// `(p/(p-q))^{1/q} |Omega|^{1/q - 1/p} ||f||_{p,w}`.
    pub upper: f64,
    pub lq_normalized: f64,
    pub lp_normalized: f64,
    pub weak_q_normalized: f64,
    pub weak_p_normalized: f64,
    pub holds: bool,
}

/// `||f||_{q,w} <= ||f||_q <= C ||f||_{p,w}` and the normalized inclusions
/// `||f||*_{q,w} <= ||f||*_q <= ||f||*_p`, `||f||*_q <= (p/(p-q))^{1/q} ||f||*_{p,w}`.
pub fn norm_sandwich_check(f: &SampledFunction, q: f64, p: f64) -> Result<SandwichReport> {
    if !(q > 0.0 && q < p) {
        return Err(Error::Config("need 0 < q < p".into()));
    }
    let pr = f.profile();
    let len = pr.domain_length;
    let weak_q = pr.weak_lp(q);
    let lq = pr.lp(q);
    let weak_p = pr.weak_lp(p);
    let lp = pr.lp(p);
    let c = (p / (p - q)).powf(1.0 / q);
    let upper = c * len.powf(1.0 / q - 1.0 / p) * weak_p;
    let nq = len.powf(-1.0 / q);
    let np = len.powf(-1.0 / p);
    let tol = 1e-12;
    let le = |x: f64, y: f64| x <= y * (1.0 + tol) + 1e-300;
    let holds = le(weak_q, lq)
        && le(lq, upper)
        && le(weak_q * nq, lq * nq)
        && le(lq * nq, lp * np)
        && le(lq * nq, c * weak_p * np);
    Ok(SandwichReport {
        q,
        p,
        weak_q,
        lq,
        upper,
        lq_normalized: lq * nq,
        lp_normalized: lp * np,
        weak_q_normalized: weak_q * nq,
        weak_p_normalized: weak_p * np,
        holds,
    })
}

// ---- Whitney extension --------------------------------------------------

fn smooth_step_s(y: &Jet) -> Jet {
    // exp(-1/y) for y > 0; every derivative underflows below y ~ 0.002
    if y.value().re <= 0.002 {
        return Jet::zero(y.order());
    }
    (-&y.recip()).exp()
}

/// `phi(x) = S(1-x) / (S(x) + S(1-x))`: 1 for `x <= 0`, 0 for `x >= 1`.
pub fn cutoff_jet(x: &Jet) -> Jet {
    let x0 = x.value().re;
    let order = x.order();
    if x0 <= 0.0 {
        return Jet::constant(C64::new(1.0, 0.0), order);
    }
    if x0 >= 1.0 {
        return Jet::zero(order);
    }
    let one = Jet::constant(C64::new(1.0, 0.0), order);
    let a = smooth_step_s(&(&one - x));
    let b = smooth_step_s(x);
    a.div(&(&a + &b))
}

/// A coefficient extended from `[alpha, beta]` by its Taylor polynomial of
/// order `m` at the nearest endpoint, then multiplied by the cutoff
/// `psi(t) = phi(alpha - t) phi(t - beta)`.
#[derive(Debug, Clone)]
pub struct WhitneyCurve {
    pub inner: CurveRef,
    pub alpha: f64,
    pub beta: f64,
    pub m: usize,
}

impl Curve for WhitneyCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        // the cutoff is identically one on [alpha, beta]
        if t >= self.alpha && t <= self.beta {
            return self.inner.jet(t, order);
        }
        let base = if t < self.alpha || t > self.beta {
            let e = if t < self.alpha { self.alpha } else { self.beta };
            let taylor = self.inner.jet(e, self.m);
            Jet::variable(t - e, order).compose_poly(&taylor.c)
        } else {
            self.inner.jet(t, order)
        };
        let tv = Jet::variable(t, order);
        let left = cutoff_jet(&(&Jet::constant(C64::new(self.alpha, 0.0), order) - &tv));
        let right = cutoff_jet(&(&tv - &Jet::constant(C64::new(self.beta, 0.0), order)));
        &(&left * &right) * &base
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WhitneyReport {
    /// `C^{n-1,1}` norm of each extended coefficient over the original one.
    pub inflation: Vec<f64>,
    /// `max_j sup |a_j|^{1/j}` on the extended interval.
    pub sup_radical: f64,
    /// `sum_j int |(a_j^{1/j})'|` on the extended interval.
    pub radical_variation: f64,
    pub holds: bool,
}

/// `|(c^{1/j})'| = |c'| |c|^{1/j - 1} / j`, independent of the branch.
pub fn radical_derivative_abs(c: &dyn Curve, j: usize, t: f64) -> f64 {
    let jt = c.jet(t, 1);
    let v = jt.value().norm();
    if v == 0.0 {
        return if jt.derivative(1).norm() == 0.0 || j == 1 { jt.derivative(1).norm() } else { f64::INFINITY };
    }
    jt.derivative(1).norm() * v.powf(1.0 / j as f64 - 1.0) / j as f64
}

/// `int_a^b |(c^{1/j})'|` by adaptive quadrature.
pub fn radical_variation(c: &dyn Curve, j: usize, a: f64, b: f64) -> f64 {
    quad::integrate(|t| radical_derivative_abs(c, j, t), a, b, 1e-13, 1e-11)
}

/// Extend a Tschirnhausen family from `[alpha, beta]` to
/// `[alpha - 1, beta + 1]`, vanishing to infinite order at the new ends.
pub fn whitney_extend(family: &CurveFamily) -> Result<(CurveFamily, WhitneyReport)> {
    let curves = family
        .curves()
        .ok_or_else(|| Error::Config("Whitney extension needs an analytic family".into()))?;
    let n = family.degree;
    let (a, b) = family.domain;
    let ext: Vec<CurveRef> = curves
        .iter()
        .map(|c| {
            Arc::new(WhitneyCurve {
                inner: c.clone(),
                alpha: a,
                beta: b,
                m: n.saturating_sub(1),
            }) as CurveRef
        })
        .collect();
    let dom = (a - 1.0, b + 1.0);
    let mut inflation = Vec::new();
    let mut sup_radical: f64 = 0.0;
    let mut variation = 0.0;
    for (j, (orig, e)) in curves.iter().zip(&ext).enumerate() {
        let j = j + 1;
        let no = crate::curve::smooth_norm(&**orig, n, (a, b), 1024);
        let ne = crate::curve::smooth_norm(&**e, n, dom, 3072);
        inflation.push(if no > 0.0 { ne / no } else { 0.0 });
        if j >= 2 {
            for i in 0..=2048 {
                let t = dom.0 + (dom.1 - dom.0) * i as f64 / 2048.0;
                sup_radical = sup_radical.max(e.value(t).norm().powf(1.0 / j as f64));
            }
            variation += radical_variation(&**e, j, dom.0, dom.1);
        }
    }
    let holds = sup_radical <= variation * (1.0 + 1e-9) + 1e-300;
    Ok((
        CurveFamily::analytic(dom, ext),
        WhitneyReport {
            inflation,
            sup_radical,
            radical_variation: variation,
            holds,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::poly_curve;
    use proptest::prelude::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn constant_norms() {
        let f = SampledFunction::from_real_fn(uniform_grid(0.0, 1.0, 10), |_| 1.0);
        assert!((lp_norm(&f, 2.0) - 1.0).abs() < 1e-15);
        assert!((weak_lp_quasinorm(&f, 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_lp_norm() {
        // int_0^1 t^2 = 1/3
        let f = SampledFunction::from_real_fn(uniform_grid(0.0, 1.0, 1), |t| t);
        assert!((lp_norm(&f, 2.0).powi(2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn weak_norm_of_linear_ramp() {
        // |{t > r}| = 1 - r on (0,1); sup r (1 - r)^{1/p} at r = p/(p+1)
        let f = SampledFunction::from_real_fn(uniform_grid(0.0, 1.0, 1), |t| t);
        let p = 2.0;
        let rs = p / (p + 1.0);
        let expect = rs * (1.0 - rs as f64).sqrt();
        assert!((weak_lp_quasinorm(&f, p) - expect).abs() < 1e-15);
    }

    #[test]
    fn distribution_of_ramp() {
        let f = SampledFunction::from_real_fn(uniform_grid(0.0, 1.0, 3), |t| t);
        let prof = f.profile();
        for &r in &[0.0, 0.2, 0.5, 0.9] {
            assert!((prof.distribution(r) - (1.0 - r)).abs() < 1e-15);
        }
        assert_eq!(prof.distribution(1.0), 0.0);
    }

    #[test]
    fn weak_norm_of_power_singularity_on_unit_length() {
        for &p in &[1.2, 1.5, 2.0] {
            let g = graded_grid_left(0.0, 1.0, 24, 1024);
            let f = SampledFunction::from_real_fn(g, |t| t.powf(-1.0 / p));
            let w = weak_lp_quasinorm(&f, p).powf(p);
            assert!((w - 1.0).abs() < 1e-6, "p = {p}: {w}");
        }
    }

    #[test]
    fn weak_norm_away_from_singularity() {
        for &p in &[1.2, 1.5, 2.0] {
            let f = SampledFunction::from_real_fn(uniform_grid(1.0, 2.0, 4096), |t| t.powf(-1.0 / p));
            let w = weak_lp_quasinorm(&f, p).powf(p);
            assert!((w - 0.5).abs() < 1e-9, "p = {p}: {w}");
        }
    }

    #[test]
    fn holder_of_square() {
        let f = poly_curve(&[0.0, 0.0, 1.0]);
        let h = holder_data_oracle(&*f, (-1.0, 1.0), 1, 1.0, 201);
        assert!((h.top_holder - 2.0).abs() < 1e-12);
        assert_eq!(h.source, HolderSource::Oracle);
    }

    #[test]
    fn holder_from_samples() {
        let f = SampledFunction::from_real_fn(uniform_grid(-1.0, 1.0, 200), |t| t * t);
        let h = holder_data_sampled(&f, 1, 1.0).unwrap();
        assert!((h.top_holder - 2.0).abs() < 1e-9);
        assert_eq!(h.source, HolderSource::FiniteDifference);
        let tiny = SampledFunction::from_real_fn(vec![0.0, 1.0], |t| t);
        assert!(matches!(holder_data_sampled(&tiny, 1, 1.0), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn oscillation_of_circle() {
        let f = SampledFunction::from_fn(uniform_grid(0.0, 2.0 * std::f64::consts::PI, 400), |t| C64::from_polar(1.0, t));
        assert!((oscillation(&f) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn extension_by_zero_examples() {
        let g = uniform_grid(-1.0, 1.0, 2000);
        let f = SampledFunction::from_real_fn(g.clone(), |t| t.max(0.0).sqrt());
        let r = extend_by_zero(&f, &[(0.0, 1.0)], 1.0).unwrap();
        assert!((r.lp - 1.0).abs() < 1e-12);
        let f = SampledFunction::from_real_fn(g.clone(), |t| t.max(0.0));
        let r = extend_by_zero(&f, &[(0.0, 1.0)], 1.0).unwrap();
        assert!((r.lp - 1.0).abs() < 1e-12);
        let f = SampledFunction::from_real_fn(g, |t| t + 2.0);
        assert!(matches!(
            extend_by_zero(&f, &[(0.0, 1.0)], 1.0),
            Err(Error::NonvanishingBoundary { .. })
        ));
    }

    #[test]
    fn sandwich_for_constant_is_equality() {
        let f = SampledFunction::from_real_fn(uniform_grid(0.0, 3.0, 10), |_| 1.0);
        let r = norm_sandwich_check(&f, 1.0, 2.0).unwrap();
        assert!(r.holds);
        assert!((r.weak_q_normalized - 1.0).abs() < 1e-12);
        assert!((r.lq_normalized - 1.0).abs() < 1e-12);
        assert!((r.lp_normalized - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_is_smooth_partition() {
        let x = Jet::variable(0.3, 3);
        let a = cutoff_jet(&x);
        let b = cutoff_jet(&(&Jet::constant(re(1.0), 3) - &x));
        let s = &a + &b;
        assert!((s.value() - re(1.0)).norm() < 1e-14);
        for k in 1..=3 {
            assert!(s.derivative(k).norm() < 1e-10);
        }
    }

    #[test]
    fn whitney_extension_of_square() {
        let fam = CurveFamily::analytic((0.0, 1.0), vec![poly_curve(&[0.0]), poly_curve(&[0.0, 0.0, 1.0])]);
        let (ext, rep) = whitney_extend(&fam).unwrap();
        assert!(rep.holds);
        assert!(rep.inflation[1].is_finite() && rep.inflation[1] > 1.0);
        let c = &ext.curves().unwrap()[1];
        assert!((c.value(0.5) - re(0.25)).norm() < 1e-15);
        assert!(c.value(-1.0).norm() < 1e-300);
        assert!(c.value(2.0).norm() < 1e-300);
    }

    fn arb_samples() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..40)
    }

    proptest! {
        #[test]
        fn weak_below_strong(vals in arb_samples(), p in 1.0f64..4.0) {
            let n = vals.len();
            let f = SampledFunction::new(
                uniform_grid(0.0, 2.0, n - 1),
                vals.iter().map(|&(a, b)| C64::new(a, b)).collect(),
            ).unwrap();
            prop_assert!(weak_lp_quasinorm(&f, p) <= lp_norm(&f, p) * (1.0 + 1e-12) + 1e-15);
        }

        #[test]
        fn sandwich_holds(vals in arb_samples(), q in 0.5f64..1.5, dp in 0.1f64..2.0) {
            let n = vals.len();
            let f = SampledFunction::new(
                uniform_grid(0.0, 1.5, n - 1),
                vals.iter().map(|&(a, b)| C64::new(a, b)).collect(),
            ).unwrap();
            prop_assert!(norm_sandwich_check(&f, q, q + dp).unwrap().holds);
        }

        #[test]
        fn weak_norm_subadditive_on_partitions(vals in arb_samples(), p in 1.0f64..3.0, cut in 1usize..38) {
            let n = vals.len();
            let cut = cut.min(n - 2).max(1);
            let f = SampledFunction::new(
                uniform_grid(0.0, 1.0, n - 1),
                vals.iter().map(|&(a, b)| C64::new(a, b)).collect(),
            ).unwrap();
            let left = SampledFunction::new(f.grid[..=cut].to_vec(), f.values[..=cut].to_vec()).unwrap();
            let right = SampledFunction::new(f.grid[cut..].to_vec(), f.values[cut..].to_vec()).unwrap();
            let whole = weak_lp_quasinorm(&f, p).powf(p);
            let parts = weak_lp_quasinorm(&left, p).powf(p) + weak_lp_quasinorm(&right, p).powf(p);
            prop_assert!(whole <= parts * (1.0 + 1e-10) + 1e-14);
        }

        #[test]
        fn weak_norm_matches_brute_force(vals in prop::collection::vec(0.0f64..5.0, 2..12), p in 1.0f64..3.0) {
            let n = vals.len();
            let f = SampledFunction::from_real_fn(uniform_grid(0.0, 1.0, n - 1), |t| {
                let x = t * (n - 1) as f64;
                let i = (x.floor() as usize).min(n - 2);
                let w = x - i as f64;
                vals[i] * (1.0 - w) + vals[i + 1] * w
            });
            let pr = f.profile();
            let w = pr.weak_lp(p);
            // distribution function by direct evaluation on a fine r grid
            let top = pr.sup();
            let mut brute: f64 = 0.0;
            for k in 0..4000 {
                let r = top * k as f64 / 4000.0;
                let m: f64 = pr.pieces.iter().map(|pc| {
                    let (lo, hi) = (pc.u.min(pc.v), pc.u.max(pc.v));
                    if r < lo { pc.h } else if r >= hi { 0.0 } else { pc.h * (hi - r) / (hi - lo) }
                }).sum();
                brute = brute.max(r * m.powf(1.0 / p));
            }
            prop_assert!(w >= brute * (1.0 - 1e-12));
            prop_assert!(w <= brute * (1.0 + 2e-3) + 1e-12);
        }
    }
}
