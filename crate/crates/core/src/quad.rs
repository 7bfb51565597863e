//! Adaptive Gauss-Kronrod (7/15) quadrature for integrands with integrable
//! endpoint or interior singularities.

use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn kronrod<F: FnMut(f64) -> f64>(g: &mut F, a: f64, b: f64) -> (f64, f64) {
    // a singular point hit exactly is a null set
    let mut f = |x: f64| {
        let v = g(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Integral of `f` over `[a, b]` to absolute tolerance `abs_tol` or relative
/// tolerance `rel_tol`, whichever is looser. Bisects the worst panel until the
/// error estimate is below tolerance or `max_panels` is reached.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    integrate_with_limit(&mut f, a, b, abs_tol, rel_tol, 400)
}

pub fn integrate_with_limit<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (v, e) = kronrod(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut settled = 0.0;
    while err > abs_tol.max(rel_tol * total.abs()) && heap.len() < max_panels {
        let Some(p) = heap.pop() else { break };
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            // cannot split further; keep its value and stop counting its error
            settled += p.value;
            err -= p.err;
            continue;
        }
        let (v1, e1) = kronrod(f, p.a, m);
        let (v2, e2) = kronrod(f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
    }
    // resum to limit drift from incremental updates
    settled + heap.iter().map(|p| p.value).sum::<f64>()
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x, 0.0, 3.0, 1e-14, 1e-14);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 x^{-1/2} / 2 = 1
        let v = integrate(|x| 0.5 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interior_singularity() {
        let v = integrate(|x| (x - 0.3).abs().powf(-0.5), 0.0, 1.0, 1e-12, 1e-12);
        let exact = 2.0 * (0.3f64.sqrt() + 0.7f64.sqrt());
        // the panel touching the singular point cannot shrink below one ulp,
        // which caps the accuracy near sqrt(ulp)
        assert!((v - exact).abs() < 1e-7, "{}", v - exact);
    }
}
