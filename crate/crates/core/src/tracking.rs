//! Continuous root tracking along one-parameter families, monodromy,
//! regularity reports, two-parameter boxes and multi-valued functions.

use crate::assignment::lexicographic_assignment;
use crate::curve::{CurveFamily, PolyPath};
use crate::error::{Error, Result};
use crate::jet::C64;
use crate::poly::{cauchy_bound, solve_roots, MonicPolynomial};
use crate::spaces::{holder_data_oracle, holder_data_sampled, SampledFunction};
use serde::{Deserialize, Serialize};

/// `perm[i]` is the index in `next` matched to `prev[i]`, minimizing the
/// total squared displacement (lexicographically smallest among ties).
pub fn match_step(prev: &[C64], next: &[C64]) -> Result<Vec<usize>> {
    if prev.len() != next.len() {
        return Err(Error::SizeMismatch {
            left: prev.len(),
            right: next.len(),
        });
    }
    let n = prev.len();
    let mut cost = Vec::with_capacity(n * n);
    for a in prev {
        for b in next {
            cost.push((a - b).norm_sqr());
        }
    }
    Ok(lexicographic_assignment(&cost, n).0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// `points` equal steps.
    Uniform { points: usize },
    /// Geometric spacing from the left end (which must be positive).
    Geometric { points: usize },
    Explicit { grid: Vec<f64> },
}

impl GridSpec {
    pub fn build(&self, domain: (f64, f64)) -> Result<Vec<f64>> {
        let (a, b) = domain;
        let g = match self {
            GridSpec::Uniform { points } => {
                let n = (*points).max(1);
                let mut g: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
                g[n] = b;
                g
            }
            GridSpec::Geometric { points } => {
                if !(a > 0.0) {
                    return Err(Error::Config("geometric grid needs a positive left end".into()));
                }
                let n = (*points).max(1);
                let r = (b / a).ln();
                let mut g: Vec<f64> = (0..=n).map(|i| a * (r * i as f64 / n as f64).exp()).collect();
                g[0] = a;
                g[n] = b;
                g
            }
            GridSpec::Explicit { grid } => grid.clone(),
        };
        if g.len() < 2 || g.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("tracking grid must be strictly increasing".into()));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrackOptions {
    pub grid: GridSpec,
    /// A step is bisected when its largest matched displacement exceeds
    /// `jump_tol * scale * (step / |domain|)^{1/n}`.
    pub jump_tol: f64,
    pub max_depth: usize,
    pub root_tol: f64,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            grid: GridSpec::Uniform { points: 256 },
            jump_tol: 1.0,
            max_depth: 24,
            root_tol: 1e-10,
        }
    }
}

impl TrackOptions {
    pub fn uniform(points: usize) -> Self {
        TrackOptions {
            grid: GridSpec::Uniform { points },
            ..Default::default()
        }
    }
}

/// Continuous branches `branches[b][i]` at `grid[i]`.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectories {
    pub grid: Vec<f64>,
    pub branches: Vec<Vec<C64>>,
    pub max_step_jump: f64,
    pub refinements: usize,
    pub max_depth_reached: usize,
}

impl Trajectories {
    pub fn branch(&self, b: usize) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.branches[b].clone(),
        }
    }

    pub fn roots_at(&self, i: usize) -> Vec<C64> {
        self.branches.iter().map(|b| b[i]).collect()
    }
}

struct Tracker<'a> {
    path: &'a dyn PolyPath,
    opts: &'a TrackOptions,
    scale: f64,
    length: f64,
    n: usize,
    grid: Vec<f64>,
    rows: Vec<Vec<C64>>,
    max_jump: f64,
    refinements: usize,
    depth_reached: usize,
}

impl Tracker<'_> {
    fn solve(&self, t: f64) -> Result<Vec<C64>> {
        solve_roots(&self.path.poly_at(t), self.opts.root_tol)
    }

    fn advance(&mut self, a: f64, b: f64, rb: Vec<C64>, depth: usize) -> Result<()> {
        let ra = self.rows.last().unwrap().clone();
        let perm = match_step(&ra, &rb)?;
        let ordered: Vec<C64> = perm.iter().map(|&j| rb[j]).collect();
        let disp = ra
            .iter()
            .zip(&ordered)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        let thresh = self.opts.jump_tol * self.scale * ((b - a) / self.length).powf(1.0 / self.n as f64);
        if disp > thresh {
            if depth >= self.opts.max_depth {
                return Err(Error::RefinementCeiling { t: a });
            }
            self.refinements += 1;
            self.depth_reached = self.depth_reached.max(depth + 1);
            let m = 0.5 * (a + b);
            let rm = self.solve(m)?;
            self.advance(a, m, rm, depth + 1)?;
            return self.advance(m, b, rb, depth + 1);
        }
        self.max_jump = self.max_jump.max(disp);
        self.grid.push(b);
        self.rows.push(ordered);
        Ok(())
    }
}

/// Track all roots along `path`, bisecting steps whose displacement is too
/// large for the Hölder-1/n scale of the family.
pub fn track_curve(path: &dyn PolyPath, opts: &TrackOptions) -> Result<Trajectories> {
    let n = path.degree();
    let dom = path.domain();
    let grid = opts.grid.build(dom)?;
    let mut solved = Vec::with_capacity(grid.len());
    let mut scale: f64 = 0.0;
    for &t in &grid {
        let p = path.poly_at(t);
        scale = scale.max(cauchy_bound(&p));
        solved.push(solve_roots(&p, opts.root_tol)?);
    }
    if scale == 0.0 {
        scale = f64::MIN_POSITIVE;
    }
    let mut tr = Tracker {
        path,
        opts,
        scale,
        length: grid[grid.len() - 1] - grid[0],
        n: n.max(1),
        grid: vec![grid[0]],
        rows: vec![solved[0].clone()],
        max_jump: 0.0,
        refinements: 0,
        depth_reached: 0,
    };
    for i in 1..grid.len() {
        tr.advance(grid[i - 1], grid[i], solved[i].clone(), 0)?;
    }
    let branches = (0..n).map(|b| tr.rows.iter().map(|r| r[b]).collect()).collect();
    Ok(Trajectories {
        grid: tr.grid,
        branches,
        max_step_jump: tr.max_jump,
        refinements: tr.refinements,
        max_depth_reached: tr.depth_reached,
    })
}

/// Cycle lengths of a permutation, largest first.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    /// Branch starting at root `i` ends at root `permutation[i]`.
    pub permutation: Vec<usize>,
    pub cycle_type: Vec<usize>,
    pub refinements: usize,
}

/// Permutation of the roots induced by one trip along a closed loop.
pub fn monodromy_loop(path: &dyn PolyPath, opts: &TrackOptions) -> Result<MonodromyReport> {
    let tr = track_curve(path, opts)?;
    let last = tr.grid.len() - 1;
    let start = tr.roots_at(0);
    let end = tr.roots_at(last);
    let permutation = match_step(&end, &start)?;
    Ok(MonodromyReport {
        cycle_type: cycle_type(&permutation),
        permutation,
        refinements: tr.refinements,
    })
}

// ---- regularity reports -------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub branch: usize,
    pub p: f64,
    pub lp_of_derivative: f64,
    pub weak_lp_of_derivative: f64,
    /// `sup |lambda(t) - lambda(s)| / |t - s|^{1 - 1/p}` over sample pairs.
    pub holder_quotient_sup: f64,
    pub coefficient_scale: f64,
    pub bound_ratio: f64,
    pub in_guaranteed_range: bool,
    pub holder_consistent: bool,
}

/// `max_j ||a_j||_{C^{n-1,1}}^{1/j}` by oracle sampling or divided differences.
pub fn coefficient_scale(family: &CurveFamily) -> Result<f64> {
    let n = family.degree;
    let k = n.saturating_sub(1);
    let mut best: f64 = 0.0;
    match family.curves() {
        Some(curves) => {
            for (j, c) in curves.iter().enumerate() {
                let h = holder_data_oracle(&**c, family.domain, k, 1.0, 2001);
                best = best.max(h.norm.powf(1.0 / (j + 1) as f64));
            }
        }
        None => {
            let grid = family.sample_grid().unwrap().to_vec();
            for j in 0..n {
                let vals = grid.iter().map(|&t| family.poly_at(t).coeffs[j]).collect();
                let f = SampledFunction::new(grid.clone(), vals)?;
                let h = holder_data_sampled(&f, k, 1.0)?;
                best = best.max(h.norm.powf(1.0 / (j + 1) as f64));
            }
        }
    }
    Ok(best)
}

/// Exact sup of the Hölder quotient over all sample pairs.
pub fn holder_quotient_all_pairs(x: &[f64], v: &[C64], gamma: f64) -> f64 {
    let n = x.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = (v[j] - v[i]).norm();
            if d > 0.0 {
                let q = d / (x[j] - x[i]).powf(gamma);
                if q > best {
                    best = q;
                }
            }
        }
    }
    best
}

/// Norms of the derivative of one tracked branch. The derivative is that of
/// the piecewise-linear interpolant of the branch.
pub fn regularity_report(
    traj: &Trajectories,
    branch: usize,
    p: f64,
    degree: usize,
    scale: f64,
) -> Result<RegularityReport> {
    if branch >= traj.branches.len() {
        return Err(Error::Config(format!("branch {branch} out of range")));
    }
    let f = traj.branch(branch);
    let prof = f.slope_profile();
    let lp = prof.lp(p);
    let weak = prof.weak_lp(p);
    let gamma = 1.0 - 1.0 / p;
    let hq = holder_quotient_all_pairs(&f.grid, &f.values, gamma);
    let len = f.length();
    let denom = len.powf(1.0 / p).max(1.0) * scale;
    let n = degree as f64;
    Ok(RegularityReport {
        branch,
        p,
        lp_of_derivative: lp,
        weak_lp_of_derivative: weak,
        holder_quotient_sup: hq,
        coefficient_scale: scale,
        bound_ratio: if denom > 0.0 { lp / denom } else { 0.0 },
        in_guaranteed_range: degree <= 1 || p < n / (n - 1.0),
        holder_consistent: hq <= lp * (1.0 + 1e-9) + 1e-300,
    })
}

// ---- two-parameter boxes ------------------------------------------------

/// A monic polynomial depending on two real parameters.
pub trait Field2: Sync {
    fn degree(&self) -> usize;
    fn poly_at(&self, x: f64, y: f64) -> MonicPolynomial;
}

/// Closure-backed field.
pub struct FnField<F: Fn(f64, f64) -> MonicPolynomial + Sync> {
    pub degree: usize,
    pub f: F,
}

impl<F: Fn(f64, f64) -> MonicPolynomial + Sync> Field2 for FnField<F> {
    fn degree(&self) -> usize {
        self.degree
    }
    fn poly_at(&self, x: f64, y: f64) -> MonicPolynomial {
        (self.f)(x, y)
    }
}

struct Segment<'a> {
    field: &'a dyn Field2,
    start: (f64, f64),
    end: (f64, f64),
}

impl PolyPath for Segment<'_> {
    fn degree(&self) -> usize {
        self.field.degree()
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn poly_at(&self, s: f64) -> MonicPolynomial {
        let x = if s == 1.0 { self.end.0 } else { self.start.0 + (self.end.0 - self.start.0) * s };
        let y = if s == 1.0 { self.end.1 } else { self.start.1 + (self.end.1 - self.start.1) * s };
        self.field.poly_at(x, y)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxOptions {
    pub nx: usize,
    pub ny: usize,
    pub p: f64,
    pub edge_points: usize,
    pub branch: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxReport {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Stitched branch at the grid nodes, `values[j][i]` at `(xs[i], ys[j])`.
    pub values: Vec<Vec<C64>>,
    /// `int |d_x lambda|^p dx` along each row `y = ys[j]`.
    pub row_integrals: Vec<f64>,
    /// `int |d_y lambda|^p dy` along each column `x = xs[i]`.
    pub column_integrals: Vec<f64>,
    /// `sum_b int |d_x lambda_b|^p dx` over all branches, per row; does not
    /// depend on how branches are labelled.
    pub row_integrals_all_branches: Vec<f64>,
    pub lp_dx: f64,
    pub lp_dy: f64,
    pub lp_gradient: f64,
}

struct Edge {
    /// label at start node -> label at end node
    map: Vec<usize>,
    /// tracked parameter and roots in start-node label order
    s: Vec<f64>,
    roots: Vec<Vec<C64>>,
}

fn track_edge(field: &dyn Field2, start: (f64, f64), end: (f64, f64), a: &[C64], b: &[C64], points: usize) -> Result<Edge> {
    let seg = Segment { field, start, end };
    let tr = track_curve(&seg, &TrackOptions::uniform(points))?;
    // relabel so branch i starts at node root a[i]
    let first = tr.roots_at(0);
    let to_start = match_step(a, &first)?;
    let last = tr.grid.len() - 1;
    let end_roots: Vec<C64> = to_start.iter().map(|&k| tr.branches[k][last]).collect();
    let map = match_step(&end_roots, b)?;
    let roots = (0..tr.grid.len())
        .map(|i| to_start.iter().map(|&k| tr.branches[k][i]).collect())
        .collect();
    Ok(Edge { map, s: tr.grid, roots })
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let l = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            0.5 * (l + r)
        })
        .collect()
}

/// Track roots over `[x0,x1] x [y0,y1]` along the axis-parallel grid lines,
/// check that every cell has trivial monodromy, stitch one branch and
/// aggregate the partial-derivative norms line by line.
pub fn track_box(field: &dyn Field2, xr: (f64, f64), yr: (f64, f64), opts: &BoxOptions) -> Result<BoxReport> {
    let (nx, ny) = (opts.nx.max(1), opts.ny.max(1));
    let deg = field.degree();
    if opts.branch >= deg {
        return Err(Error::Config("branch index exceeds degree".into()));
    }
    let xs: Vec<f64> = (0..=nx).map(|i| if i == nx { xr.1 } else { xr.0 + (xr.1 - xr.0) * i as f64 / nx as f64 }).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| if j == ny { yr.1 } else { yr.0 + (yr.1 - yr.0) * j as f64 / ny as f64 }).collect();
    let mut nodes = vec![vec![Vec::new(); nx + 1]; ny + 1];
    for j in 0..=ny {
        for i in 0..=nx {
            nodes[j][i] = solve_roots(&field.poly_at(xs[i], ys[j]), 1e-10)?;
        }
    }
    let mut hor = Vec::with_capacity(ny + 1);
    for j in 0..=ny {
        let mut row = Vec::with_capacity(nx);
        for i in 0..nx {
            row.push(track_edge(field, (xs[i], ys[j]), (xs[i + 1], ys[j]), &nodes[j][i], &nodes[j][i + 1], opts.edge_points)?);
        }
        hor.push(row);
    }
    let mut ver = Vec::with_capacity(ny);
    for j in 0..ny {
        let mut row = Vec::with_capacity(nx + 1);
        for i in 0..=nx {
            row.push(track_edge(field, (xs[i], ys[j]), (xs[i], ys[j + 1]), &nodes[j][i], &nodes[j + 1][i], opts.edge_points)?);
        }
        ver.push(row);
    }
    let invert = |p: &[usize]| {
        let mut q = vec![0; p.len()];
        for (i, &v) in p.iter().enumerate() {
            q[v] = i;
        }
        q
    };
    for j in 0..ny {
        for i in 0..nx {
            let s1 = &hor[j][i].map;
            let s2 = &ver[j][i + 1].map;
            let s3 = invert(&hor[j + 1][i].map);
            let s4 = invert(&ver[j][i].map);
            let perm: Vec<usize> = (0..deg).map(|l| s4[s3[s2[s1[l]]]]).collect();
            if perm.iter().enumerate().any(|(a, &b)| a != b) {
                return Err(Error::MonodromyObstruction { i, j, permutation: perm });
            }
        }
    }
    let mut label = vec![vec![0usize; nx + 1]; ny + 1];
    label[0][0] = opts.branch;
    for i in 0..nx {
        label[0][i + 1] = hor[0][i].map[label[0][i]];
    }
    for j in 0..ny {
        for i in 0..=nx {
            label[j + 1][i] = ver[j][i].map[label[j][i]];
        }
    }
    let values: Vec<Vec<C64>> = (0..=ny)
        .map(|j| (0..=nx).map(|i| nodes[j][i][label[j][i]]).collect())
        .collect();
    let p = opts.p;
    let line_integral = |edges: &[&Edge], labels: &[usize], coords: &[f64]| -> (f64, f64) {
        let mut chosen = 0.0;
        let mut all = 0.0;
        for (k, e) in edges.iter().enumerate() {
            let len = coords[k + 1] - coords[k];
            for b in 0..deg {
                let vals: Vec<C64> = e.roots.iter().map(|r| r[b]).collect();
                let grid: Vec<f64> = e.s.iter().map(|s| coords[k] + s * len).collect();
                let f = SampledFunction { grid, values: vals };
                let v = f.slope_profile().lp_power(p);
                all += v;
                if b == labels[k] {
                    chosen += v;
                }
            }
        }
        (chosen, all)
    };
    let mut row_integrals = Vec::new();
    let mut row_all = Vec::new();
    for j in 0..=ny {
        let edges: Vec<&Edge> = hor[j].iter().collect();
        let (c, a) = line_integral(&edges, &label[j][..nx], &xs);
        row_integrals.push(c);
        row_all.push(a);
    }
    let mut column_integrals = Vec::new();
    for i in 0..=nx {
        let edges: Vec<&Edge> = (0..ny).map(|j| &ver[j][i]).collect();
        let labels: Vec<usize> = (0..ny).map(|j| label[j][i]).collect();
        column_integrals.push(line_integral(&edges, &labels, &ys).0);
    }
    let wy = trapezoid_weights(&ys);
    let wx = trapezoid_weights(&xs);
    let dx: f64 = row_integrals.iter().zip(&wy).map(|(v, w)| v * w).sum();
    let dy: f64 = column_integrals.iter().zip(&wx).map(|(v, w)| v * w).sum();
    Ok(BoxReport {
        xs,
        ys,
        values,
        row_integrals,
        column_integrals,
        row_integrals_all_branches: row_all,
        lp_dx: dx.powf(1.0 / p),
        lp_dy: dy.powf(1.0 / p),
        lp_gradient: (dx + dy).powf(1.0 / p),
    })
}

// ---- multi-valued functions -------------------------------------------

/// Unordered n-tuples sampled on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiValued {
    pub grid: Vec<f64>,
    pub values: Vec<Vec<C64>>,
}

/// `min over permutations (sum |a_i - b_sigma(i)|^2)^{1/2}`.
pub fn an_distance(a: &[C64], b: &[C64]) -> Result<f64> {
    let perm = match_step(a, b)?;
    Ok(a.iter().zip(perm).map(|(x, j)| (x - b[j]).norm_sqr()).sum::<f64>().sqrt())
}

/// `L^p` norm of the metric speed `d(f(t_{i+1}), f(t_i)) / (t_{i+1} - t_i)`.
pub fn intrinsic_w1p_energy(f: &MultiValued, p: f64) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..f.grid.len().saturating_sub(1) {
        let h = f.grid[i + 1] - f.grid[i];
        let d = an_distance(&f.values[i], &f.values[i + 1])?;
        acc += h * (d / h).powf(p);
    }
    Ok(acc.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{power_family, unit_loop_family};
    use std::f64::consts::PI;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn match_step_examples() {
        assert_eq!(match_step(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap(), vec![1, 0]);
        assert_eq!(
            match_step(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(0.0, 1.0), c(0.0, -1.0)]).unwrap(),
            vec![0, 1]
        );
        assert!(matches!(match_step(&[c(0.0, 0.0)], &[]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn square_root_branches() {
        let fam = power_family(2, 1.0, (0.0, 1.0));
        let tr = track_curve(&fam, &TrackOptions::uniform(64)).unwrap();
        for b in &tr.branches {
            for (t, z) in tr.grid.iter().zip(b) {
                assert!((z.norm() - t.sqrt()).abs() < 1e-7);
            }
        }
        let mut ends: Vec<f64> = tr.branches.iter().map(|b| b.last().unwrap().re).collect();
        ends.sort_by(f64::total_cmp);
        assert!((ends[0] + 1.0).abs() < 1e-9 && (ends[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_loop_monodromy() {
        let r2 = monodromy_loop(&unit_loop_family(2), &TrackOptions::uniform(64)).unwrap();
        assert_eq!(r2.cycle_type, vec![2]);
        let r3 = monodromy_loop(&unit_loop_family(3), &TrackOptions::uniform(64)).unwrap();
        assert_eq!(r3.cycle_type, vec![3]);
    }

    #[test]
    fn derivative_of_sqrt_has_unit_l1_norm() {
        let fam = power_family(2, 1.0, (0.0, 1.0));
        let tr = track_curve(&fam, &TrackOptions::uniform(256)).unwrap();
        let r = regularity_report(&tr, 0, 1.0, 2, 1.0).unwrap();
        assert!((r.lp_of_derivative - 1.0).abs() < 1e-9);
        assert!(r.holder_consistent);
    }

    #[test]
    fn an_distance_example() {
        let d = an_distance(&[c(1.0, 0.0), c(-1.0, 0.0)], &[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(d, 0.0);
        assert!(matches!(an_distance(&[c(1.0, 0.0)], &[]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn intrinsic_energy_of_loop() {
        let n = 4000;
        let grid: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let values = grid
            .iter()
            .map(|&t| {
                let r = C64::from_polar(1.0, t / 2.0);
                vec![r, -r]
            })
            .collect();
        let e = intrinsic_w1p_energy(&MultiValued { grid, values }, 1.0).unwrap();
        assert!((e - 2.0 * PI * 2f64.sqrt() / 2.0).abs() < 1e-5);
    }

    #[test]
    fn box_with_branch_point_is_obstructed() {
        let f = FnField {
            degree: 2,
            f: |x: f64, y: f64| MonicPolynomial::new(vec![c(0.0, 0.0), c(-x, -y)]),
        };
        let opts = BoxOptions { nx: 3, ny: 3, p: 1.5, edge_points: 16, branch: 0 };
        match track_box(&f, (-1.0, 1.0), (-1.0, 1.0), &opts) {
            Err(Error::MonodromyObstruction { i, j, permutation }) => {
                assert_eq!((i, j), (1, 1));
                assert_eq!(permutation, vec![1, 0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_with_positive_discriminant() {
        let f = FnField {
            degree: 2,
            f: |x: f64, y: f64| MonicPolynomial::new(vec![c(0.0, 0.0), c(-(x * x + y * y), 0.0)]),
        };
        let opts = BoxOptions { nx: 5, ny: 5, p: 1.5, edge_points: 16, branch: 0 };
        let r = track_box(&f, (-1.0, 1.0), (-1.0, 1.0), &opts).unwrap();
        // stitched branch is +-sqrt(x^2 + y^2) with a single sign
        let sign = r.values[0][0].re.signum();
        for row in &r.values {
            for v in row {
                assert!(v.re * sign >= 0.0);
            }
        }
        assert!(r.lp_gradient.is_finite() && r.lp_gradient > 0.0);
    }
}
