//! Monic complex polynomials `Z^n + a_1 Z^{n-1} + ... + a_n`: roots,
//! Tschirnhausen normal form, rescaling, cluster splitting and resultants.

use crate::error::{Error, Result};
use crate::jet::{binomial, Jet, C64};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Rotation of the initial Aberth guesses (an irrational multiple of pi).
const START_ANGLE: f64 = 0.5 * std::f64::consts::SQRT_2;

/// Coefficients `a_1..a_n` of a monic polynomial; the leading 1 is implicit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonicPolynomial {
    pub coeffs: Vec<C64>,
}

impl MonicPolynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        MonicPolynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_j` with `a_0 = 1`.
    pub fn coeff(&self, j: usize) -> C64 {
        if j == 0 {
            ONE
        } else {
            self.coeffs[j - 1]
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().fold(ONE, |acc, &a| acc * z + a)
    }

    /// Value and derivative by Horner's scheme.
    pub fn eval_with_derivative(&self, z: C64) -> (C64, C64) {
        let mut p = ONE;
        let mut d = ZERO;
        for &a in &self.coeffs {
            d = d * z + p;
            p = p * z + a;
        }
        (p, d)
    }

    /// Rounding-error bound for Horner evaluation at `z`.
    fn eval_error_bound(&self, z: C64) -> f64 {
        let r = z.norm();
        let s = self.coeffs.iter().fold(1.0, |acc, a| acc * r + a.norm());
        4.0 * (self.degree() as f64 + 1.0) * f64::EPSILON * s
    }

    /// Product of two monic polynomials.
    pub fn mul(&self, other: &MonicPolynomial) -> MonicPolynomial {
        let (m, n) = (self.degree(), other.degree());
        let mut c = vec![ZERO; m + n];
        for i in 0..=m {
            for j in 0..=n {
                if i + j > 0 {
                    c[i + j - 1] += self.coeff(i) * other.coeff(j);
                }
            }
        }
        MonicPolynomial::new(c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// `2 max_j |a_j|^{1/j}`; every root has modulus at most this.
pub fn cauchy_bound(p: &MonicPolynomial) -> f64 {
    2.0 * p
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm().powf(1.0 / (i + 1) as f64))
        .fold(0.0, f64::max)
}

pub fn from_roots(roots: &[C64]) -> MonicPolynomial {
    let mut c: Vec<C64> = Vec::with_capacity(roots.len());
    for &r in roots {
        // multiply by (Z - r)
        c.push(ZERO);
        for j in (0..c.len()).rev() {
            let prev = if j == 0 { ONE } else { c[j - 1] };
            c[j] -= r * prev;
        }
    }
    MonicPolynomial::new(c)
}

/// All roots with multiplicity, by Aberth-Ehrlich iteration from a fixed
/// starting configuration (deterministic).
pub fn solve_roots(p: &MonicPolynomial, tol: f64) -> Result<Vec<C64>> {
    let n = p.degree();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![-p.coeffs[0]]);
    }
    let cb = cauchy_bound(p);
    if cb == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let radius = cb / 2.0;
    let mut z: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + START_ANGLE))
        .collect();
    let mut frozen = vec![false; n];
    for _ in 0..2000 {
        let mut all = true;
        for k in 0..n {
            if frozen[k] {
                continue;
            }
            let (v, d) = p.eval_with_derivative(z[k]);
            if v.norm() <= p.eval_error_bound(z[k]) {
                frozen[k] = true;
                continue;
            }
            all = false;
            let mut s = ZERO;
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff != ZERO {
                        s += diff.inv();
                    }
                }
            }
            if d == ZERO {
                z[k] += C64::new(cb * 1e-9, cb * 1e-9);
                continue;
            }
            let ratio = v / d;
            let corr = ratio / (ONE - ratio * s);
            if !corr.is_finite() {
                z[k] += C64::new(cb * 1e-9, 0.0);
                continue;
            }
            z[k] -= corr;
            if corr.norm() <= 2.0 * f64::EPSILON * z[k].norm() {
                frozen[k] = true;
            }
        }
        if all {
            break;
        }
    }
    let scale = (1.0 + cb).powi(n as i32);
    let residual = z.iter().map(|&r| p.eval(r).norm()).fold(0.0, f64::max);
    if !(residual <= tol * scale) {
        return Err(Error::NonConvergence { residual });
    }
    Ok(z)
}

/// Tschirnhausen normal form: coefficients of `P(Z - a_1/n)`, whose first
/// coefficient vanishes. Returns the transformed polynomial and the shift `a_1/n`.
pub fn tschirnhausen(p: &MonicPolynomial) -> (MonicPolynomial, C64) {
    let n = p.degree();
    if n == 0 {
        return (p.clone(), ZERO);
    }
    let shift = p.coeffs[0] / n as f64;
    let mut c = vec![ZERO; n];
    for j in 1..=n {
        let mut s = ZERO;
        for l in 0..=j {
            s += p.coeff(l) * binomial(n - l, j - l) * (-shift).powu((j - l) as u32);
        }
        c[j - 1] = s;
    }
    c[0] = ZERO;
    (MonicPolynomial::new(c), shift)
}

/// Tschirnhausen transform applied to coefficient jets `a_1..a_n`.
pub fn tschirnhausen_jets(a: &[Jet]) -> Vec<Jet> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let order = a[0].order();
    if n == 1 {
        return vec![Jet::zero(order)];
    }
    let shift = a[0].scale(C64::new(-1.0 / n as f64, 0.0));
    let mut pows = vec![Jet::constant(ONE, order)];
    for m in 1..=n {
        pows.push(&pows[m - 1] * &shift);
    }
    let mut out = Vec::with_capacity(n);
    for j in 1..=n {
        let mut s = pows[j].scale(C64::new(binomial(n, j), 0.0));
        for l in 1..=j {
            let term = (&a[l - 1] * &pows[j - l]).scale(C64::new(binomial(n - l, j - l), 0.0));
            s = &s + &term;
        }
        out.push(s);
    }
    out[0] = Jet::zero(order);
    out
}

/// Smallest `k >= 2` attaining `max_j |a_j|^{1/j}`.
pub fn dominant_index(p: &MonicPolynomial) -> Result<usize> {
    let mut best = 0.0;
    let mut k = 0;
    for j in 2..=p.degree() {
        let v = p.coeff(j).norm().powf(1.0 / j as f64);
        if v > best {
            best = v;
            k = j;
        }
    }
    if k == 0 {
        Err(Error::AllCoefficientsZero)
    } else {
        Ok(k)
    }
}

/// A point of the rescaled model space together with the k-th root of
/// `a_k` that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct ModelPoint {
    pub coeffs: MonicPolynomial,
    pub root: C64,
}

/// `abar_j = a_k^{-j/k} a_j`. Without `prev` the principal root of `a_k` is
/// used; otherwise the k-th root closest to `prev`, which keeps the branch
/// continuous along a parameter.
pub fn rescale_to_model(p: &MonicPolynomial, k: usize, prev: Option<C64>) -> Result<ModelPoint> {
    let ak = p.coeff(k);
    if ak == ZERO {
        return Err(Error::ZeroDominant);
    }
    let principal = ak.powf(1.0 / k as f64);
    let root = match prev {
        None => principal,
        Some(q) => (0..k)
            .map(|m| principal * C64::from_polar(1.0, 2.0 * PI * m as f64 / k as f64))
            .min_by(|x, y| (x - q).norm().total_cmp(&(y - q).norm()))
            .unwrap(),
    };
    let mut c: Vec<C64> = (1..=p.degree())
        .map(|j| p.coeff(j) / root.powu(j as u32))
        .collect();
    c[k - 1] = ONE;
    Ok(ModelPoint {
        coeffs: MonicPolynomial::new(c),
        root,
    })
}

/// Resultant as the determinant of the Sylvester matrix.
pub fn resultant(p: &MonicPolynomial, q: &MonicPolynomial) -> C64 {
    let (m, n) = (p.degree(), q.degree());
    let size = m + n;
    if size == 0 {
        return ONE;
    }
    let mut s = DMatrix::<C64>::zeros(size, size);
    for r in 0..n {
        for j in 0..=m {
            s[(r, r + j)] = p.coeff(j);
        }
    }
    for r in 0..m {
        for j in 0..=n {
            s[(n + r, r + j)] = q.coeff(j);
        }
    }
    s.determinant()
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitResult {
    pub left: MonicPolynomial,
    pub right: MonicPolynomial,
    pub left_roots: Vec<C64>,
    pub right_roots: Vec<C64>,
    /// Minimum distance between the clusters.
    pub gap: f64,
    /// Gap divided by the larger cluster diameter.
    pub ratio: f64,
    pub resultant: C64,
}

fn diameter(pts: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

fn partition_score(roots: &[C64], mask: &[bool]) -> (f64, f64) {
    let a: Vec<C64> = roots.iter().zip(mask).filter(|(_, &m)| m).map(|(r, _)| *r).collect();
    let b: Vec<C64> = roots.iter().zip(mask).filter(|(_, &m)| !m).map(|(r, _)| *r).collect();
    let mut gap = f64::INFINITY;
    for x in &a {
        for y in &b {
            gap = gap.min((x - y).norm());
        }
    }
    let diam = diameter(&a).max(diameter(&b));
    let ratio = if diam == 0.0 { f64::INFINITY } else { gap / diam };
    (gap, ratio)
}

/// Candidate two-cluster partitions: every cut of the minimum spanning tree
/// of the roots, plus the largest gap in modulus.
fn candidate_partitions(roots: &[C64]) -> Vec<Vec<bool>> {
    let n = roots.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::new();
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&i, &j| best[i].total_cmp(&best[j]))
            .unwrap();
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            edges.push((parent[u], u));
        }
        for v in 0..n {
            let d = (roots[u] - roots[v]).norm();
            if !in_tree[v] && d < best[v] {
                best[v] = d;
                parent[v] = u;
            }
        }
    }
    let mut out = Vec::new();
    for cut in 0..edges.len() {
        // flood fill from vertex 0 without the cut edge
        let mut mask = vec![false; n];
        mask[0] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for (e, &(a, b)) in edges.iter().enumerate() {
                if e != cut && mask[a] != mask[b] {
                    mask[a] = true;
                    mask[b] = true;
                    changed = true;
                }
            }
        }
        out.push(mask);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| roots[i].norm().total_cmp(&roots[j].norm()));
    let mut best_gap = -1.0;
    let mut at = 0;
    for w in 1..n {
        let g = roots[order[w]].norm() - roots[order[w - 1]].norm();
        if g > best_gap {
            best_gap = g;
            at = w;
        }
    }
    let mut mask = vec![false; n];
    for &i in &order[..at] {
        mask[i] = true;
    }
    out.push(mask);
    out
}

/// Factor `p = left * right` along the best-separated two-cluster partition
/// of its roots. Fails with `NoSplit` when no partition has separation ratio
/// above `gap_factor`.
pub fn split_clusters(p: &MonicPolynomial, gap_factor: f64, tol: f64) -> Result<SplitResult> {
    if p.degree() < 2 {
        return Err(Error::NoSplit { gap_factor });
    }
    let roots = solve_roots(p, tol)?;
    split_with_roots(p, &roots, gap_factor)
}

/// As [`split_clusters`] with roots already computed.
pub fn split_with_roots(p: &MonicPolynomial, roots: &[C64], gap_factor: f64) -> Result<SplitResult> {
    let mut best: Option<(Vec<bool>, f64, f64)> = None;
    for mask in candidate_partitions(roots) {
        let k = mask.iter().filter(|&&m| m).count();
        if k == 0 || k == roots.len() {
            continue;
        }
        let (gap, ratio) = partition_score(roots, &mask);
        if best.as_ref().map_or(true, |b| ratio > b.2) {
            best = Some((mask, gap, ratio));
        }
    }
    let (mut mask, gap, ratio) = best.ok_or(Error::NoSplit { gap_factor })?;
    if !(ratio > gap_factor) || gap == 0.0 {
        return Err(Error::NoSplit { gap_factor });
    }
    let k = mask.iter().filter(|&&m| m).count();
    if 2 * k > roots.len() || (2 * k == roots.len() && !mask[0]) {
        mask.iter_mut().for_each(|m| *m = !*m);
    }
    let left_roots: Vec<C64> = roots.iter().zip(&mask).filter(|(_, &m)| m).map(|(r, _)| *r).collect();
    let right_roots: Vec<C64> = roots.iter().zip(&mask).filter(|(_, &m)| !m).map(|(r, _)| *r).collect();
    let mut left = from_roots(&left_roots);
    let mut right = from_roots(&right_roots);
    if let Ok(r) = refine_split_newton(p, &left, &right, 1e-15, 8) {
        left = r.left;
        right = r.right;
    }
    let res = resultant(&left, &right);
    Ok(SplitResult {
        left,
        right,
        left_roots,
        right_roots,
        gap,
        ratio,
        resultant: res,
    })
}

/// Jacobian of `(b, c) -> coeffs(P_b P_c)` at `(b, c)`; its determinant is
/// the resultant up to sign.
fn split_jacobian(b: &MonicPolynomial, c: &MonicPolynomial) -> DMatrix<C64> {
    let (nb, nc) = (b.degree(), c.degree());
    let n = nb + nc;
    let mut jac = DMatrix::<C64>::zeros(n, n);
    for k in 1..=n {
        for i in 1..=nb {
            if k >= i && k - i <= nc {
                jac[(k - 1, i - 1)] = c.coeff(k - i);
            }
        }
        for j in 1..=nc {
            if k >= j && k - j <= nb {
                jac[(k - 1, nb + j - 1)] = b.coeff(k - j);
            }
        }
    }
    jac
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonSplit {
    pub left: MonicPolynomial,
    pub right: MonicPolynomial,
    pub iterations: usize,
    pub residual: f64,
}

fn rel_residual(p: &MonicPolynomial, b: &MonicPolynomial, c: &MonicPolynomial) -> f64 {
    let prod = b.mul(c);
    let err = prod
        .coeffs
        .iter()
        .zip(&p.coeffs)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    err / (1.0 + p.max_abs_coeff())
}

/// Newton's method on `(b, c) -> coeffs(P_b P_c) - coeffs(p)`.
pub fn refine_split_newton(
    p: &MonicPolynomial,
    b0: &MonicPolynomial,
    c0: &MonicPolynomial,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonSplit> {
    let (nb, nc) = (b0.degree(), c0.degree());
    if nb + nc != p.degree() {
        return Err(Error::SizeMismatch {
            left: nb + nc,
            right: p.degree(),
        });
    }
    let mut b = b0.clone();
    let mut c = c0.clone();
    let mut res = rel_residual(p, &b, &c);
    let mut it = 0;
    while res > tol {
        if it >= max_iter {
            return Err(Error::NonConvergence { residual: res });
        }
        let jac = split_jacobian(&b, &c);
        let prod = b.mul(&c);
        let rhs = DMatrix::from_iterator(
            p.degree(),
            1,
            prod.coeffs.iter().zip(&p.coeffs).map(|(x, y)| y - x),
        );
        let lu = jac.lu();
        let delta = lu.solve(&rhs).ok_or(Error::SingularJacobian)?;
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        for i in 0..nb {
            b.coeffs[i] += delta[i];
        }
        for j in 0..nc {
            c.coeffs[j] += delta[nb + j];
        }
        it += 1;
        let new_res = rel_residual(p, &b, &c);
        if new_res.is_nan() {
            return Err(Error::NonConvergence { residual: new_res });
        }
        // stagnation at rounding level counts as converged
        if new_res >= res && new_res < 1e3 * f64::EPSILON {
            res = new_res;
            break;
        }
        res = new_res;
    }
    Ok(NewtonSplit {
        left: b,
        right: c,
        iterations: it,
        residual: res,
    })
}

/// Given coefficient jets `a_1..a_n` of a polynomial family and a split
/// `P_b P_c` of its value, return jets of the factor coefficients. Solved
/// order by order with the (constant) Newton Jacobian.
pub fn lift_split_jets(
    a: &[Jet],
    b: &MonicPolynomial,
    c: &MonicPolynomial,
) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let (nb, nc) = (b.degree(), c.degree());
    let n = nb + nc;
    let order = a.iter().map(|j| j.order()).min().unwrap_or(0);
    let lu = split_jacobian(b, c).lu();
    let mut bj: Vec<Jet> = b.coeffs.iter().map(|&v| Jet::constant(v, order)).collect();
    let mut cj: Vec<Jet> = c.coeffs.iter().map(|&v| Jet::constant(v, order)).collect();
    let bcoef = |bj: &Vec<Jet>, i: usize, m: usize| -> C64 {
        if i == 0 {
            if m == 0 {
                ONE
            } else {
                ZERO
            }
        } else {
            bj[i - 1].c[m]
        }
    };
    let mut rhs = DMatrix::<C64>::zeros(n, 1);
    for m in 1..=order {
        for k in 1..=n {
            let mut s = a[k - 1].c[m];
            for i in 0..=nb.min(k) {
                let j = k - i;
                if j > nc {
                    continue;
                }
                for q in 0..=m {
                    let r = m - q;
                    // linear terms at order m are the unknowns
                    if (q == m && i > 0) || (r == m && j > 0) {
                        continue;
                    }
                    s -= bcoef(&bj, i, q) * bcoef(&cj, j, r);
                }
            }
            rhs[(k - 1, 0)] = s;
        }
        if !lu.solve_mut(&mut rhs) {
            return Err(Error::SingularJacobian);
        }
        for i in 0..nb {
            bj[i].c[m] = rhs[i];
        }
        for j in 0..nc {
            cj[j].c[m] = rhs[nb + j];
        }
    }
    Ok((bj, cj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn same_multiset(a: &[C64], b: &[C64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.len() == b.len()
            && a.iter().all(|x| {
                if let Some(j) = (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() < tol) {
                    used[j] = true;
                    true
                } else {
                    false
                }
            })
    }

    #[test]
    fn roots_of_z2_minus_1() {
        let r = solve_roots(&MonicPolynomial::from_real(&[0.0, -1.0]), 1e-12).unwrap();
        assert!(same_multiset(&r, &[c(1.0), c(-1.0)], 1e-12));
    }

    #[test]
    fn roots_of_z3_minus_1_are_cube_roots_of_unity() {
        let r = solve_roots(&MonicPolynomial::from_real(&[0.0, 0.0, -1.0]), 1e-12).unwrap();
        let expect: Vec<C64> = (0..3).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0)).collect();
        assert!(same_multiset(&r, &expect, 1e-12));
    }

    #[test]
    fn zero_polynomial_has_zero_roots() {
        let r = solve_roots(&MonicPolynomial::from_real(&[0.0, 0.0]), 1e-12).unwrap();
        assert_eq!(r, vec![ZERO, ZERO]);
    }

    #[test]
    fn double_root_has_small_residual() {
        let p = MonicPolynomial::from_real(&[-2.0, 1.0]);
        let r = solve_roots(&p, 1e-12).unwrap();
        for z in r {
            assert!((z - c(1.0)).norm() < 1e-7);
        }
    }

    #[test]
    fn cauchy_bound_example() {
        // a_1 = 0, a_2 = -4: 2 * 4^{1/2}
        assert_eq!(cauchy_bound(&MonicPolynomial::from_real(&[0.0, -4.0])), 4.0);
    }

    #[test]
    fn tschirnhausen_of_shifted_square() {
        let (t, shift) = tschirnhausen(&MonicPolynomial::from_real(&[2.0, 1.0]));
        assert_eq!(t.coeffs, vec![c(0.0), c(0.0)]);
        assert_eq!(shift, c(1.0));
    }

    #[test]
    fn dominant_index_examples() {
        assert_eq!(dominant_index(&MonicPolynomial::from_real(&[0.0, 0.0, 8.0])).unwrap(), 3);
        assert_eq!(dominant_index(&MonicPolynomial::from_real(&[0.0, 4.0, 8.0])).unwrap(), 2);
        assert!(matches!(
            dominant_index(&MonicPolynomial::from_real(&[0.0, 0.0])),
            Err(Error::AllCoefficientsZero)
        ));
    }

    #[test]
    fn rescale_example() {
        let p = MonicPolynomial::from_real(&[0.0, 4.0, 8.0]);
        let m = rescale_to_model(&p, 2, None).unwrap();
        assert!((m.coeffs.coeffs[1] - c(1.0)).norm() < 1e-15);
        assert!((m.coeffs.coeffs[2] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn rescale_continues_branch() {
        let p = MonicPolynomial::from_real(&[0.0, 4.0, 0.0]);
        let m = rescale_to_model(&p, 2, Some(c(-1.9))).unwrap();
        assert!((m.root - c(-2.0)).norm() < 1e-15);
    }

    #[test]
    fn resultant_examples() {
        let r = resultant(&MonicPolynomial::from_real(&[-1.0]), &MonicPolynomial::from_real(&[1.0]));
        assert!((r - c(2.0)).norm() < 1e-14);
        let r = resultant(&MonicPolynomial::from_real(&[0.0, -1.0]), &MonicPolynomial::from_real(&[0.0]));
        assert!((r - c(-1.0)).norm() < 1e-14);
    }

    #[test]
    fn split_z3_minus_100z() {
        let p = MonicPolynomial::from_real(&[0.0, -100.0, 0.0]);
        let s = split_clusters(&p, 0.5, 1e-12).unwrap();
        assert_eq!(s.left.degree(), 1);
        assert!((s.gap - 10.0).abs() < 1e-9);
        let prod = s.left.mul(&s.right);
        for (x, y) in prod.coeffs.iter().zip(&p.coeffs) {
            assert!((x - y).norm() < 1e-10);
        }
        assert!(matches!(split_clusters(&p, 1.5, 1e-12), Err(Error::NoSplit { .. })));
    }

    #[test]
    fn newton_example() {
        let p = MonicPolynomial::from_real(&[0.0, -1.0]);
        let r = refine_split_newton(
            &p,
            &MonicPolynomial::from_real(&[-1.001]),
            &MonicPolynomial::from_real(&[0.999]),
            1e-14,
            20,
        )
        .unwrap();
        assert!((r.left.coeffs[0] - c(-1.0)).norm() < 1e-12);
        assert!((r.right.coeffs[0] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn newton_on_coincident_factors_is_singular() {
        let p = MonicPolynomial::from_real(&[-2.1, 1.1]);
        let b = MonicPolynomial::from_real(&[-1.0]);
        let r = refine_split_newton(&p, &b, &b, 1e-14, 5);
        assert!(matches!(r, Err(Error::SingularJacobian)));
    }

    #[test]
    fn lifted_jets_match_finite_differences() {
        // a(t) = coefficients of (Z - 1 - t)(Z + 2 + t^2)
        let order = 3;
        let t0 = 0.3;
        let make = |t: &Jet| -> Vec<Jet> {
            let one = Jet::constant(c(1.0), order);
            let r1 = &one + t;
            let r2 = &(&one + &one) + &(t * t);
            // (Z - r1)(Z + r2) = Z^2 + (r2 - r1) Z - r1 r2
            vec![&r2 - &r1, -&(&r1 * &r2)]
        };
        let a = make(&Jet::variable(t0, order));
        let b = MonicPolynomial::new(vec![-(c(1.0) + t0)]);
        let cc = MonicPolynomial::new(vec![c(2.0) + t0 * t0]);
        let (bj, cj) = lift_split_jets(&a, &b, &cc).unwrap();
        assert!((bj[0].derivative(1) - c(-1.0)).norm() < 1e-12);
        assert!((bj[0].derivative(2)).norm() < 1e-12);
        assert!((cj[0].derivative(1) - c(2.0 * t0)).norm() < 1e-12);
        assert!((cj[0].derivative(2) - c(2.0)).norm() < 1e-12);
        assert!((cj[0].derivative(3)).norm() < 1e-12);
    }

    #[test]
    fn tschirnhausen_jets_agree_with_scalar() {
        let a = vec![
            Jet::from_coeffs(&[c(3.0), c(1.0)]),
            Jet::from_coeffs(&[c(-1.0), c(0.5)]),
            Jet::from_coeffs(&[c(2.0), c(0.0)]),
        ];
        let jets = tschirnhausen_jets(&a);
        let (scalar, _) = tschirnhausen(&MonicPolynomial::from_real(&[3.0, -1.0, 2.0]));
        for (j, s) in jets.iter().zip(&scalar.coeffs) {
            assert!((j.value() - s).norm() < 1e-12);
        }
    }
}
