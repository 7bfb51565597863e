//! Coefficient bounds for polynomials controlled on an interval, Taylor
//! estimates for C^{m,alpha} functions, Glaeser-type inequalities and the
//! radical envelope `|g'| |g|^{1/(k+alpha) - 1}`.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::jet::{factorial, C64};
use crate::spaces::{holder_data_oracle, oscillation_oracle, Piece, Profile};
use nalgebra::DMatrix;
use serde::Serialize;

const SAMPLES: usize = 4001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationBranch {
    /// Nodes adapted to the growth `1 + M x^{m+alpha}`.
    Adapted,
    /// Some adapted node left [0, 1]: classical bound with `A (m+alpha)/alpha`.
    ClassicalFallback,
    /// `M = 0`: classical bound.
    Classical,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationBound {
    pub branch: InterpolationBranch,
    /// Nodes for the reduced problem `A = B = 1`.
    pub nodes: Vec<f64>,
    pub constant_c: f64,
    /// Bound on `|a_j|`, `j = 1..=m`.
    pub per_coefficient_bounds: Vec<f64>,
    pub condition: f64,
}

/// Inverse and infinity-norm condition number of a small real matrix.
fn inverse_with_condition(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let inv = a.clone().try_inverse().ok_or(Error::SingularMatrix { cond: f64::INFINITY })?;
    let norm = |m: &DMatrix<f64>| {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let cond = norm(a) * norm(&inv);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::SingularMatrix { cond });
    }
    Ok((inv, cond))
}

/// Row sums `sum_k |Linv_{jk}| w_k`, maximized over `j`.
fn weighted_row_sum(inv: &DMatrix<f64>, w: &[f64]) -> f64 {
    (0..inv.nrows())
        .map(|j| (0..inv.ncols()).map(|k| inv[(j, k)].abs() * w[k]).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Classical constant: `|b_j| <= C` whenever `|sum_j b_j x^j| <= 1` on [0, 1],
/// from interpolation at `x_k = k/m`.
pub fn classical_constant(m: usize) -> Result<(f64, f64)> {
    let v = DMatrix::from_fn(m, m, |k, j| ((k + 1) as f64 / m as f64).powi(j as i32 + 1));
    let (inv, cond) = inverse_with_condition(&v)?;
    Ok((weighted_row_sum(&inv, &vec![1.0; m]), cond))
}

/// Constant of the adapted branch: row sums of `L^{-1}` weighted by
/// `(m+alpha)/(m+alpha-k)`, with `L_{kj} = (k/(m+alpha-k))^{j/(m+alpha)}`.
pub fn adapted_constant(m: usize, alpha: f64) -> Result<(f64, f64)> {
    let d = m as f64 + alpha;
    let l = DMatrix::from_fn(m, m, |k, j| {
        let k = (k + 1) as f64;
        (k / (d - k)).powf((j + 1) as f64 / d)
    });
    let (inv, cond) = inverse_with_condition(&l)?;
    let w: Vec<f64> = (1..=m).map(|k| d / (d - k as f64)).collect();
    Ok((weighted_row_sum(&inv, &w), cond))
}

/// Universal constant `C(m, alpha)`: the largest constant over the three branches.
pub fn interpolation_constant(m: usize, alpha: f64) -> Result<f64> {
    let (cl, _) = classical_constant(m)?;
    let (ad, _) = adapted_constant(m, alpha)?;
    let d = m as f64 + alpha;
    Ok(ad.max(cl * d / alpha).max(cl))
}

/// Coefficient bounds for `P(x) = sum_{j=1}^m a_j x^j` with
/// `|P(x)| <= A (1 + M x^{m+alpha})` on `[0, B]`.
pub fn interpolation_bound(m: usize, alpha: f64, a: f64, b: f64, big_m: f64) -> Result<InterpolationBound> {
    if m == 0 {
        return Err(Error::Config("polynomial degree m must be positive".into()));
    }
    if !(alpha > 0.0 && alpha <= 1.0 && a >= 0.0 && b > 0.0 && big_m >= 0.0) {
        return Err(Error::Config("need 0 < alpha <= 1, A >= 0, B > 0, M >= 0".into()));
    }
    let d = m as f64 + alpha;
    let reduced_m = big_m * b.powf(d);
    let (branch, nodes, c, cond) = if big_m == 0.0 {
        let (cl, cond) = classical_constant(m)?;
        let nodes = (1..=m).map(|k| k as f64 / m as f64).collect();
        (InterpolationBranch::Classical, nodes, cl, cond)
    } else {
        let nodes: Vec<f64> = (1..=m)
            .map(|k| {
                let k = k as f64;
                (k / (d - k)).powf(1.0 / d) * reduced_m.powf(-1.0 / d)
            })
            .collect();
        if nodes.iter().any(|&x| x > 1.0) {
            let (cl, cond) = classical_constant(m)?;
            let nodes = (1..=m).map(|k| k as f64 / m as f64).collect();
            (InterpolationBranch::ClassicalFallback, nodes, cl * d / alpha, cond)
        } else {
            let (ad, cond) = adapted_constant(m, alpha)?;
            (InterpolationBranch::Adapted, nodes, ad, cond)
        }
    };
    let per = (1..=m)
        .map(|j| {
            let jf = j as f64;
            c * a * (1.0 + big_m.powf(jf / d) * b.powf(jf)) * b.powf(-jf)
        })
        .collect();
    Ok(InterpolationBound {
        branch,
        nodes,
        constant_c: c,
        per_coefficient_bounds: per,
        condition: cond,
    })
}

/// Constant in the Taylor and Glaeser estimates of order `s`:
/// `s! 2^s C(m, alpha)` (the half-interval has length `|I|/2`).
pub fn taylor_constant(m: usize, alpha: f64, s: usize) -> Result<f64> {
    Ok(factorial(s) * 2f64.powi(s as i32) * interpolation_constant(m, alpha)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct TaylorReport {
    pub s: usize,
    pub t: f64,
    pub lhs: f64,
    /// Right-hand side without the constant.
    pub core: f64,
    pub constant: f64,
    pub rhs: f64,
    pub oscillation: f64,
    pub holder: f64,
    pub holds: bool,
}

fn rhs_core(len: f64, v: f64, h: f64, m: usize, alpha: f64, s: usize) -> f64 {
    let d = m as f64 + alpha;
    let sf = s as f64;
    let mixed = if v == 0.0 || h == 0.0 {
        0.0
    } else {
        v.powf((d - sf) / d) * h.powf(sf / d) * len.powf(sf)
    };
    len.powf(-sf) * (v + mixed)
}

/// `|f^(s)(t)| <= C |I|^{-s} (V_I(f) + V_I(f)^{(m+alpha-s)/(m+alpha)} Hold_alpha(f^(m))^{s/(m+alpha)} |I|^s)`.
pub fn taylor_bound_check(
    f: &dyn Curve,
    interval: (f64, f64),
    m: usize,
    alpha: f64,
    t: f64,
    s: usize,
) -> Result<TaylorReport> {
    if s == 0 || s > m {
        return Err(Error::OrderOutOfRange { order: s, max: m });
    }
    if !(t >= interval.0 && t <= interval.1) {
        return Err(Error::OutsideDomain { t });
    }
    let len = interval.1 - interval.0;
    let v = oscillation_oracle(f, interval, SAMPLES);
    let h = holder_data_oracle(f, interval, m, alpha, 2001).top_holder;
    let lhs = f.jet(t, s).derivative(s).norm();
    let core = rhs_core(len, v, h, m, alpha, s);
    let constant = taylor_constant(m, alpha, s)?;
    Ok(TaylorReport {
        s,
        t,
        lhs,
        core,
        constant,
        rhs: constant * core,
        oscillation: v,
        holder: h,
        holds: lhs <= constant * core * (1.0 + 1e-12) + 1e-300,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GlaeserReport {
    pub t0: f64,
    pub delta: f64,
    pub holder: f64,
    pub orders: Vec<TaylorReport>,
    pub holds: bool,
}

/// First sign change of a real sampled function, refined by bisection.
fn sign_change(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Option<f64> {
    let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    let mut last: Option<(f64, f64)> = None;
    for &x in &xs {
        let v = f(x);
        if v == 0.0 {
            continue;
        }
        if let Some((lx, lv)) = last {
            if lv.signum() != v.signum() {
                let (mut lo, mut hi) = (lx, x);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = f(mid);
                    if fm == 0.0 {
                        return Some(mid);
                    }
                    if fm.signum() == lv.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
        }
        last = Some((x, v));
    }
    None
}

/// Glaeser-type bound at the center of `(t0 - delta, t0 + delta)` for a real
/// function `f` such that `f` and `f'` keep their sign on the interval.
pub fn glaeser_check(f: &dyn Curve, t0: f64, delta: f64, m: usize, alpha: f64) -> Result<GlaeserReport> {
    let (a, b) = (t0 - delta, t0 + delta);
    for order in 0..=1 {
        if let Some(w) = sign_change(|t| f.jet(t, order).derivative(order).re, a, b, SAMPLES) {
            return Err(Error::SignChange { witness: w });
        }
    }
    let len = b - a;
    let h = holder_data_oracle(f, (a, b), m, alpha, 2001).top_holder;
    let v0 = f.value(t0).norm();
    let jet = f.jet(t0, m);
    let mut orders = Vec::new();
    for s in 1..=m {
        let lhs = jet.derivative(s).norm();
        let core = rhs_core(len, v0, h, m, alpha, s);
        let constant = taylor_constant(m, alpha, s)?;
        orders.push(TaylorReport {
            s,
            t: t0,
            lhs,
            core,
            constant,
            rhs: constant * core,
            oscillation: v0,
            holder: h,
            holds: lhs <= constant * core * (1.0 + 1e-12) + 1e-300,
        });
    }
    Ok(GlaeserReport {
        t0,
        delta,
        holder: h,
        holds: orders.iter().all(|o| o.holds),
        orders,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GlaeserForm {
    /// Two-term form with `|f(t0)|` and the mixed term.
    TwoTerm,
    /// Form with the interval-free mixed term only.
    Mixed,
}

/// Convert a constant valid for one form of the Glaeser inequality to the other.
pub fn glaeser_constant_transform(c: f64, m: usize, alpha: f64, to: GlaeserForm) -> f64 {
    let d = m as f64 + alpha;
    match to {
        GlaeserForm::Mixed => c.max(c.powf((d - 1.0) / d)),
        GlaeserForm::TwoTerm => c.max(c.powf(d / (d - 1.0))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RadicalEnvelope {
    pub k: usize,
    pub alpha: f64,
    pub p: f64,
    pub weak_norm: f64,
    pub holder: f64,
    pub sup_derivative: f64,
    /// `max{Hold_alpha(g^(k))^{1/(k+alpha)} |I|^{1/p}, ||g'||_inf^{1/(k+alpha)}}`.
    pub rhs_core: f64,
    pub ratio: f64,
    #[serde(skip)]
    pub profile: Profile,
}

/// Samples of `Lambda = |g'| |g|^{1/(k+alpha) - 1}` on `{g != 0}` as a
/// profile (pieces touching a zero of `g` are dropped).
pub fn envelope_profile(g: &dyn Curve, grid: &[f64], exponent: f64) -> Profile {
    let vals: Vec<Option<f64>> = grid
        .iter()
        .map(|&t| {
            let j = g.jet(t, 1);
            let v = j.value().norm();
            if v == 0.0 {
                None
            } else {
                Some(j.derivative(1).norm() * v.powf(exponent - 1.0))
            }
        })
        .collect();
    let mut pieces = Vec::new();
    for i in 0..grid.len() - 1 {
        if let (Some(u), Some(v)) = (vals[i], vals[i + 1]) {
            pieces.push(Piece {
                h: grid[i + 1] - grid[i],
                u,
                v,
            });
        }
    }
    Profile::new(pieces, grid[grid.len() - 1] - grid[0])
}

/// Weak-L^p norm of the radical envelope at `p = (k+alpha)/(k+alpha-1)`
/// against the bound in terms of `g`'s smoothness.
pub fn radical_envelope(g: &dyn Curve, grid: &[f64], k: usize, alpha: f64) -> Result<RadicalEnvelope> {
    if grid.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, have: grid.len() });
    }
    let d = k as f64 + alpha;
    if d <= 1.0 {
        return Err(Error::Config("need k + alpha > 1".into()));
    }
    let p = d / (d - 1.0);
    let dom = (grid[0], grid[grid.len() - 1]);
    let profile = envelope_profile(g, grid, 1.0 / d);
    let weak = profile.weak_lp(p);
    let hd = holder_data_oracle(g, dom, k, alpha, 2001);
    let sup1 = if k >= 1 {
        hd.sup_norms[1]
    } else {
        (0..2001)
            .map(|i| g.jet(dom.0 + (dom.1 - dom.0) * i as f64 / 2000.0, 1).derivative(1).norm())
            .fold(0.0, f64::max)
    };
    let len = dom.1 - dom.0;
    let core = (hd.top_holder.powf(1.0 / d) * len.powf(1.0 / p)).max(sup1.powf(1.0 / d));
    Ok(RadicalEnvelope {
        k,
        alpha,
        p,
        weak_norm: weak,
        holder: hd.top_holder,
        sup_derivative: sup1,
        rhs_core: core,
        ratio: if core > 0.0 { weak / core } else { 0.0 },
        profile,
    })
}

/// Weak norm of `|f'|` for a sampled continuous branch `f = g^{1/n}`, by
/// central differences.
pub fn branch_derivative_weak_norm(grid: &[f64], branch: &[C64], p: f64) -> f64 {
    let f = crate::spaces::SampledFunction {
        grid: grid.to_vec(),
        values: branch.to_vec(),
    };
    f.central_derivative().profile().weak_lp(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::poly_curve;
    use crate::spaces::graded_grid_left;

    #[test]
    fn taylor_example_square() {
        let f = poly_curve(&[0.0, 0.0, 1.0]);
        let r = taylor_bound_check(&*f, (-1.0, 1.0), 1, 1.0, 0.5, 1).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14);
        let expect = 0.5 * (1.0 + 2f64.sqrt() * 2.0);
        assert!((r.core - expect).abs() < 1e-9, "{}", r.core);
        assert!(r.holds);
    }

    #[test]
    fn order_out_of_range() {
        let f = poly_curve(&[0.0, 1.0]);
        assert!(matches!(
            taylor_bound_check(&*f, (0.0, 1.0), 1, 1.0, 0.5, 2),
            Err(Error::OrderOutOfRange { .. })
        ));
    }

    #[test]
    fn glaeser_sign_change_witness() {
        let f = poly_curve(&[0.0, 1.0]);
        match glaeser_check(&*f, 0.0, 1.0, 1, 1.0) {
            Err(Error::SignChange { witness }) => assert!(witness.abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn glaeser_holds_for_exponential() {
        let f = crate::curve::FnCurve::new("exp", |t| t.exp());
        let r = glaeser_check(&f, 0.0, 0.5, 2, 1.0).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn constant_transforms() {
        assert_eq!(glaeser_constant_transform(4.0, 1, 1.0, GlaeserForm::Mixed), 4.0);
        assert_eq!(glaeser_constant_transform(4.0, 1, 1.0, GlaeserForm::TwoTerm), 16.0);
        assert_eq!(glaeser_constant_transform(0.25, 1, 1.0, GlaeserForm::Mixed), 0.5);
    }

    #[test]
    fn classical_constant_degree_one() {
        // |b_1 x| <= 1 on [0,1] gives |b_1| <= 1
        assert!((classical_constant(1).unwrap().0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interpolation_branches() {
        assert_eq!(interpolation_bound(2, 1.0, 1.0, 1.0, 0.0).unwrap().branch, InterpolationBranch::Classical);
        assert_eq!(interpolation_bound(2, 1.0, 1.0, 1.0, 0.01).unwrap().branch, InterpolationBranch::ClassicalFallback);
        assert_eq!(interpolation_bound(2, 1.0, 1.0, 1.0, 100.0).unwrap().branch, InterpolationBranch::Adapted);
    }

    #[test]
    fn envelope_of_identity() {
        // Lambda = t^{-1/2} on (0, 1): weak-2 quasinorm squared = 1
        let g = poly_curve(&[0.0, 1.0]);
        let grid = graded_grid_left(0.0, 1.0, 30, 512);
        let e = radical_envelope(&*g, &grid, 1, 1.0).unwrap();
        assert!((e.p - 2.0).abs() < 1e-15);
        assert!((e.weak_norm.powi(2) - 1.0).abs() < 1e-6, "{}", e.weak_norm);
    }
}
