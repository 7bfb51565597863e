//! Truncated Taylor series ("jets") with complex coefficients.
//!
//! A jet of order `m` at a point `t` stores `c[s] = f^(s)(t) / s!` for
//! `s = 0..=m`. Arithmetic on jets propagates derivatives exactly, which is
//! how every curve in the crate supplies its derivative oracle.

use num_complex::Complex64;
use smallvec::SmallVec;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: SmallVec<[C64; 8]>,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        Jet {
            c: SmallVec::from_elem(C64::new(0.0, 0.0), order + 1),
        }
    }

    pub fn constant(v: C64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.c[0] = v;
        j
    }

    /// The identity function `t` expanded at `t0`.
    pub fn variable(t0: f64, order: usize) -> Self {
        let mut j = Self::constant(C64::new(t0, 0.0), order);
        if order >= 1 {
            j.c[1] = C64::new(1.0, 0.0);
        }
        j
    }

    pub fn from_coeffs(c: &[C64]) -> Self {
        Jet {
            c: SmallVec::from_slice(c),
        }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    /// `f^(s)(t)`.
    pub fn derivative(&self, s: usize) -> C64 {
        if s >= self.c.len() {
            return C64::new(0.0, 0.0);
        }
        self.c[s] * factorial(s)
    }

    /// All derivatives `f, f', ..., f^(order)`.
    pub fn derivatives(&self) -> Vec<C64> {
        (0..self.c.len()).map(|s| self.derivative(s)).collect()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut j = Self::zero(order);
        for s in 0..=order.min(self.order()) {
            j.c[s] = self.c[s];
        }
        j
    }

    pub fn scale(&self, k: C64) -> Self {
        Jet {
            c: self.c.iter().map(|&x| x * k).collect(),
        }
    }

    pub fn recip(&self) -> Self {
        Jet::constant(C64::new(1.0, 0.0), self.order()).div(self)
    }

    pub fn div(&self, b: &Jet) -> Self {
        let n = self.order().min(b.order());
        let mut q = Self::zero(n);
        let b0 = b.c[0];
        for m in 0..=n {
            let mut s = self.c[m];
            for i in 1..=m {
                s -= b.c[i] * q.c[m - i];
            }
            q.c[m] = s / b0;
        }
        q
    }

    pub fn exp(&self) -> Self {
        let n = self.order();
        let mut e = Self::zero(n);
        e.c[0] = self.c[0].exp();
        for m in 1..=n {
            let mut s = C64::new(0.0, 0.0);
            for i in 1..=m {
                s += self.c[i] * e.c[m - i] * (i as f64);
            }
            e.c[m] = s / (m as f64);
        }
        e
    }

    /// `f^r` on the principal branch at the expansion point; requires `f(t) != 0`.
    pub fn powf(&self, r: f64) -> Self {
        let n = self.order();
        let mut p = Self::zero(n);
        let a0 = self.c[0];
        p.c[0] = a0.powf(r);
        for m in 1..=n {
            let mut s = C64::new(0.0, 0.0);
            for i in 1..=m {
                s += self.c[i] * p.c[m - i] * ((r + 1.0) * i as f64 - m as f64);
            }
            p.c[m] = s / (a0 * m as f64);
        }
        p
    }

    /// Integer power by repeated multiplication (valid when `f(t) = 0`).
    pub fn powi(&self, k: u32) -> Self {
        let mut r = Jet::constant(C64::new(1.0, 0.0), self.order());
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// `g(f)` for a polynomial `g` with coefficients in ascending order.
    pub fn compose_poly(&self, g: &[C64]) -> Self {
        let mut r = Jet::zero(self.order());
        for &gc in g.iter().rev() {
            r = &r * self;
            r.c[0] += gc;
        }
        r
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, b: &Jet) -> Jet {
        let n = self.order().min(b.order());
        Jet {
            c: (0..=n).map(|i| self.c[i] + b.c[i]).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, b: &Jet) -> Jet {
        let n = self.order().min(b.order());
        Jet {
            c: (0..=n).map(|i| self.c[i] - b.c[i]).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, b: &Jet) -> Jet {
        let n = self.order().min(b.order());
        let mut r = Jet::zero(n);
        for i in 0..=n {
            if self.c[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..=(n - i) {
                r.c[i + j] += self.c[i] * b.c[j];
            }
        }
        r
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            c: self.c.iter().map(|&x| -x).collect(),
        }
    }
}

pub fn factorial(s: usize) -> f64 {
    (1..=s).fold(1.0, |a, k| a * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exp_of_variable_has_all_derivatives_equal() {
        let j = Jet::variable(0.3, 5).exp();
        for s in 0..=5 {
            assert!((j.derivative(s) - c(0.3f64.exp())).norm() < 1e-13);
        }
    }

    #[test]
    fn powf_matches_closed_form() {
        // d^2/dt^2 t^{1/3} = -2/9 t^{-5/3}
        let j = Jet::variable(2.0, 3).powf(1.0 / 3.0);
        let expect = -2.0 / 9.0 * 2f64.powf(-5.0 / 3.0);
        assert!((j.derivative(2).re - expect).abs() < 1e-14);
    }

    #[test]
    fn div_inverts_mul() {
        let a = Jet::from_coeffs(&[c(1.0), c(2.0), c(-1.0), c(0.5)]);
        let b = Jet::from_coeffs(&[c(3.0), C64::new(0.0, 1.0), c(2.0), c(1.0)]);
        let q = (&a * &b).div(&b);
        for i in 0..4 {
            assert!((q.c[i] - a.c[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn compose_poly_derivative() {
        // g(t) = 1 + t^2 at t = 3: g' = 6, g'' = 2
        let j = Jet::variable(3.0, 2).compose_poly(&[c(1.0), c(0.0), c(1.0)]);
        assert_eq!(j.derivatives(), vec![c(10.0), c(6.0), c(2.0)]);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 4), 0.0);
    }
}
