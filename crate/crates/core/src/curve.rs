//! Coefficient curves with derivative oracles and families of monic
//! polynomials parameterized by an interval.

use crate::error::{Error, Result};
use crate::jet::{Jet, C64};
use crate::poly::MonicPolynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

/// A complex function of a real parameter that can report its Taylor jet.
pub trait Curve: Send + Sync + Debug {
    fn jet(&self, t: f64, order: usize) -> Jet;

    fn value(&self, t: f64) -> C64 {
        self.jet(t, 0).value()
    }
}

pub type CurveRef = Arc<dyn Curve>;

#[derive(Debug, Clone)]
pub struct ConstCurve(pub C64);

impl Curve for ConstCurve {
    fn jet(&self, _t: f64, order: usize) -> Jet {
        Jet::constant(self.0, order)
    }
}

/// Polynomial in `t`, coefficients in ascending order.
#[derive(Debug, Clone)]
pub struct PolyCurve(pub Vec<C64>);

impl Curve for PolyCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        Jet::variable(t, order).compose_poly(&self.0)
    }
}

/// `sum_m cos_m cos(m w t) + sin_m sin(m w t)`.
#[derive(Debug, Clone)]
pub struct TrigCurve {
    pub omega: f64,
    pub cos: Vec<C64>,
    pub sin: Vec<C64>,
}

impl Curve for TrigCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        let mut j = Jet::zero(order);
        let half = C64::new(0.5, 0.0);
        let i = C64::new(0.0, 1.0);
        let terms = self.cos.len().max(self.sin.len());
        for m in 0..terms {
            let cm = self.cos.get(m).copied().unwrap_or_default();
            let sm = self.sin.get(m).copied().unwrap_or_default();
            // cos = (e+ + e-)/2, sin = (e+ - e-)/(2i)
            let plus = cm * half + sm * half / i;
            let minus = cm * half - sm * half / i;
            let kappa = m as f64 * self.omega;
            for (amp, k) in [(plus, kappa), (minus, -kappa)] {
                let e = C64::from_polar(1.0, k * t);
                let ik = C64::new(0.0, k);
                let mut pw = amp * e;
                let mut fact = 1.0;
                for s in 0..=order {
                    if s > 0 {
                        pw *= ik;
                        fact *= s as f64;
                    }
                    j.c[s] += pw / fact;
                }
            }
        }
        j
    }
}

/// `amp * exp(rate * t)`.
#[derive(Debug, Clone)]
pub struct ExpCurve {
    pub amp: C64,
    pub rate: C64,
}

impl Curve for ExpCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        let mut j = Jet::zero(order);
        let mut v = self.amp * (self.rate * t).exp();
        let mut fact = 1.0;
        for s in 0..=order {
            if s > 0 {
                v *= self.rate;
                fact *= s as f64;
            }
            j.c[s] = v / fact;
        }
        j
    }
}

/// `amp * (t - shift)^gamma` for `t > shift`, zero otherwise.
#[derive(Debug, Clone)]
pub struct PowerCurve {
    pub amp: C64,
    pub gamma: f64,
    pub shift: f64,
}

impl Curve for PowerCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        if t <= self.shift {
            return Jet::zero(order);
        }
        let x = Jet::variable(t - self.shift, order);
        x.powf(self.gamma).scale(self.amp)
    }
}

#[derive(Debug, Clone)]
pub struct SumCurve(pub Vec<CurveRef>);

impl Curve for SumCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        self.0
            .iter()
            .fold(Jet::zero(order), |acc, c| &acc + &c.jet(t, order))
    }
}

#[derive(Debug, Clone)]
pub struct ProductCurve(pub CurveRef, pub CurveRef);

impl Curve for ProductCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        &self.0.jet(t, order) * &self.1.jet(t, order)
    }
}

#[derive(Debug, Clone)]
pub struct ScaledCurve(pub C64, pub CurveRef);

impl Curve for ScaledCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        self.1.jet(t, order).scale(self.0)
    }
}

/// A curve defined by a jet-level closure of the parameter jet.
#[derive(Clone)]
pub struct FnCurve {
    pub name: String,
    pub f: Arc<dyn Fn(&Jet) -> Jet + Send + Sync>,
}

impl Debug for FnCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FnCurve({})", self.name)
    }
}

impl Curve for FnCurve {
    fn jet(&self, t: f64, order: usize) -> Jet {
        (self.f)(&Jet::variable(t, order))
    }
}

impl FnCurve {
    pub fn new(name: &str, f: impl Fn(&Jet) -> Jet + Send + Sync + 'static) -> Self {
        FnCurve {
            name: name.to_string(),
            f: Arc::new(f),
        }
    }
}

pub fn poly_curve(c: &[f64]) -> CurveRef {
    Arc::new(PolyCurve(c.iter().map(|&x| C64::new(x, 0.0)).collect()))
}

pub fn const_curve(v: C64) -> CurveRef {
    Arc::new(ConstCurve(v))
}

/// Anything that yields a monic polynomial for each parameter value.
pub trait PolyPath {
    fn degree(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    fn poly_at(&self, t: f64) -> MonicPolynomial;
}

#[derive(Debug, Clone)]
pub enum Coefficients {
    Analytic(Vec<CurveRef>),
    /// Coefficient vectors on a grid, linearly interpolated in between.
    Sampled { grid: Vec<f64>, values: Vec<Vec<C64>> },
}

/// `P_a(t)(Z) = Z^n + sum_j a_j(t) Z^{n-j}` on an interval.
#[derive(Debug, Clone)]
pub struct CurveFamily {
    pub degree: usize,
    pub domain: (f64, f64),
    pub coeffs: Coefficients,
}

impl CurveFamily {
    pub fn analytic(domain: (f64, f64), coeffs: Vec<CurveRef>) -> Self {
        CurveFamily {
            degree: coeffs.len(),
            domain,
            coeffs: Coefficients::Analytic(coeffs),
        }
    }

    pub fn curves(&self) -> Option<&[CurveRef]> {
        match &self.coeffs {
            Coefficients::Analytic(c) => Some(c),
            Coefficients::Sampled { .. } => None,
        }
    }

    /// Jets of `a_1..a_n` (analytic families only).
    pub fn jets_at(&self, t: f64, order: usize) -> Result<Vec<Jet>> {
        match &self.coeffs {
            Coefficients::Analytic(c) => Ok(c.iter().map(|x| x.jet(t, order)).collect()),
            Coefficients::Sampled { .. } => Err(Error::Config(
                "derivative oracle requested from a sampled family".into(),
            )),
        }
    }

    pub fn sample_grid(&self) -> Option<&[f64]> {
        match &self.coeffs {
            Coefficients::Sampled { grid, .. } => Some(grid),
            _ => None,
        }
    }
}

impl PolyPath for CurveFamily {
    fn degree(&self) -> usize {
        self.degree
    }

    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn poly_at(&self, t: f64) -> MonicPolynomial {
        match &self.coeffs {
            Coefficients::Analytic(c) => MonicPolynomial::new(c.iter().map(|x| x.value(t)).collect()),
            Coefficients::Sampled { grid, values } => {
                let i = match grid.binary_search_by(|g| g.total_cmp(&t)) {
                    Ok(i) => return MonicPolynomial::new(values[i].clone()),
                    Err(i) => i.clamp(1, grid.len() - 1),
                };
                let w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
                MonicPolynomial::new(
                    values[i - 1]
                        .iter()
                        .zip(&values[i])
                        .map(|(a, b)| a * (1.0 - w) + b * w)
                        .collect(),
                )
            }
        }
    }
}

/// `Z^n - g(t)`.
pub fn radical_family(n: usize, domain: (f64, f64), g: CurveRef) -> CurveFamily {
    let mut c: Vec<CurveRef> = (1..n).map(|_| const_curve(C64::new(0.0, 0.0))).collect();
    c.push(Arc::new(ScaledCurve(C64::new(-1.0, 0.0), g)));
    CurveFamily::analytic(domain, c)
}

/// `Z^n - t^gamma` on `domain` (positive parameter values).
pub fn power_family(n: usize, gamma: f64, domain: (f64, f64)) -> CurveFamily {
    radical_family(
        n,
        domain,
        Arc::new(PowerCurve {
            amp: C64::new(1.0, 0.0),
            gamma,
            shift: 0.0,
        }),
    )
}

/// `Z^n - exp(i t)`: a closed loop for `t` in `[0, 2 pi]`.
pub fn unit_loop_family(n: usize) -> CurveFamily {
    radical_family(
        n,
        (0.0, 2.0 * PI),
        Arc::new(ExpCurve {
            amp: C64::new(1.0, 0.0),
            rate: C64::new(0.0, 1.0),
        }),
    )
}

/// Degree 3 family in Tschirnhausen form with `a_2 = t`, `a_3 = t^2` on (0, 1).
pub fn worked_cubic_family() -> CurveFamily {
    CurveFamily::analytic(
        (0.0, 1.0),
        vec![poly_curve(&[0.0]), poly_curve(&[0.0, 1.0]), poly_curve(&[0.0, 0.0, 1.0])],
    )
}

/// Degree 4 family `(Z + 3)((Z - 1)^3 - (1 + t))` on (0, 1): splits off a
/// cubic factor that must itself be split again.
pub fn worked_quartic_family() -> CurveFamily {
    CurveFamily::analytic(
        (0.0, 1.0),
        vec![
            poly_curve(&[0.0]),
            poly_curve(&[-6.0]),
            poly_curve(&[7.0, -1.0]),
            poly_curve(&[-6.0, -3.0]),
        ],
    )
}

/// Random complex trigonometric polynomial of degree `1..=max_degree` on `domain`.
pub fn random_trig_curve(rng: &mut ChaCha8Rng, max_degree: usize, domain: (f64, f64)) -> TrigCurve {
    let d = rng.gen_range(1..=max_degree);
    let omega = 2.0 * PI / (domain.1 - domain.0);
    let mut gen = |m: usize| {
        let s = 1.0 / (1.0 + m as f64).powi(2);
        C64::new(rng.gen_range(-1.0..1.0) * s, rng.gen_range(-1.0..1.0) * s)
    };
    let cos: Vec<C64> = (0..=d).map(&mut gen).collect();
    let sin: Vec<C64> = (0..=d).map(|m| if m == 0 { C64::default() } else { gen(m) }).collect();
    TrigCurve { omega, cos, sin }
}

/// `max_{s <= n} sup |f^(s)|` on a dense grid, i.e. the C^{n-1,1} norm with
/// the Lipschitz constant of `f^(n-1)` read off `sup |f^(n)|`.
pub fn smooth_norm(c: &dyn Curve, n: usize, domain: (f64, f64), samples: usize) -> f64 {
    let mut sup = vec![0.0f64; n + 1];
    for i in 0..samples {
        let t = domain.0 + (domain.1 - domain.0) * i as f64 / (samples - 1) as f64;
        let j = c.jet(t, n);
        for s in 0..=n {
            sup[s] = sup[s].max(j.derivative(s).norm());
        }
    }
    let lip = sup[n];
    sup[..n].iter().sum::<f64>() + lip
}

/// Seeded family of trigonometric coefficients, each rescaled so its
/// C^{n-1,1} norm lies in [0.1, 10] (log-uniform).
pub fn random_trig_family(n: usize, seed: u64, max_degree: usize, domain: (f64, f64)) -> CurveFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs: Vec<CurveRef> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = random_trig_curve(&mut rng, max_degree, domain);
        let target = 10f64.powf(rng.gen_range(-1.0..1.0));
        let norm = smooth_norm(&c, n, domain, 512);
        let k = C64::new(target / norm, 0.0);
        c.cos.iter_mut().for_each(|x| *x *= k);
        c.sin.iter_mut().for_each(|x| *x *= k);
        coeffs.push(Arc::new(c));
    }
    CurveFamily::analytic(domain, coeffs)
}

// ---- serialization ----------------------------------------------------

/// JSON description of a single coefficient curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CurveSpec {
    Const { value: C64 },
    Poly { coeffs: Vec<C64> },
    Trig { omega: f64, cos: Vec<C64>, sin: Vec<C64> },
    Exp { amp: C64, rate: C64 },
    Power { amp: C64, gamma: f64, #[serde(default)] shift: f64 },
    Sum { terms: Vec<CurveSpec> },
}

impl CurveSpec {
    pub fn build(&self) -> CurveRef {
        match self {
            CurveSpec::Const { value } => const_curve(*value),
            CurveSpec::Poly { coeffs } => Arc::new(PolyCurve(coeffs.clone())),
            CurveSpec::Trig { omega, cos, sin } => Arc::new(TrigCurve {
                omega: *omega,
                cos: cos.clone(),
                sin: sin.clone(),
            }),
            CurveSpec::Exp { amp, rate } => Arc::new(ExpCurve { amp: *amp, rate: *rate }),
            CurveSpec::Power { amp, gamma, shift } => Arc::new(PowerCurve {
                amp: *amp,
                gamma: *gamma,
                shift: *shift,
            }),
            CurveSpec::Sum { terms } => Arc::new(SumCurve(terms.iter().map(|t| t.build()).collect())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySource {
    Builtin(BuiltinFamily),
    Sampled { grid: Vec<f64>, values: Vec<Vec<C64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum BuiltinFamily {
    /// `Z^n - t^exponent`.
    Power {
        #[serde(default = "one")]
        exponent: f64,
    },
    /// `Z^n - g(t)`.
    RadicalOf { g: CurveSpec },
    /// Seeded random trigonometric coefficients.
    TrigPoly {
        seed: u64,
        #[serde(default = "six")]
        max_degree: usize,
    },
    /// `Z^n - exp(i t)`.
    UnitLoop,
    /// Explicit coefficient curves `a_1..a_n`.
    Coefficients { coefficients: Vec<CurveSpec> },
    WorkedCubic,
    WorkedQuartic,
}

fn one() -> f64 {
    1.0
}

fn six() -> usize {
    6
}

/// `{"degree": n, "domain": [a, b], "family": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpec {
    pub degree: usize,
    pub domain: (f64, f64),
    pub family: FamilySource,
}

impl FamilySpec {
    pub fn build(&self) -> Result<CurveFamily> {
        let n = self.degree;
        let dom = self.domain;
        if n == 0 {
            return Err(Error::Config("degree must be positive".into()));
        }
        if !(dom.0 < dom.1) {
            return Err(Error::Config("domain must satisfy a < b".into()));
        }
        let fam = match &self.family {
            FamilySource::Sampled { grid, values } => {
                if grid.len() < 2 || grid.len() != values.len() {
                    return Err(Error::Config("sampled family: grid and values differ in length".into()));
                }
                if values.iter().any(|v| v.len() != n) {
                    return Err(Error::Config("sampled family: coefficient vector length != degree".into()));
                }
                if grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::Config("sampled family: grid must be increasing".into()));
                }
                CurveFamily {
                    degree: n,
                    domain: (grid[0], *grid.last().unwrap()),
                    coeffs: Coefficients::Sampled {
                        grid: grid.clone(),
                        values: values.clone(),
                    },
                }
            }
            FamilySource::Builtin(b) => match b {
                BuiltinFamily::Power { exponent } => power_family(n, *exponent, dom),
                BuiltinFamily::RadicalOf { g } => radical_family(n, dom, g.build()),
                BuiltinFamily::TrigPoly { seed, max_degree } => random_trig_family(n, *seed, *max_degree, dom),
                BuiltinFamily::UnitLoop => {
                    let mut f = unit_loop_family(n);
                    f.domain = dom;
                    f
                }
                BuiltinFamily::Coefficients { coefficients } => {
                    if coefficients.len() != n {
                        return Err(Error::Config("number of coefficients != degree".into()));
                    }
                    CurveFamily::analytic(dom, coefficients.iter().map(|c| c.build()).collect())
                }
                BuiltinFamily::WorkedCubic => {
                    if n != 3 {
                        return Err(Error::Config("worked-cubic has degree 3".into()));
                    }
                    worked_cubic_family()
                }
                BuiltinFamily::WorkedQuartic => {
                    if n != 4 {
                        return Err(Error::Config("worked-quartic has degree 4".into()));
                    }
                    worked_quartic_family()
                }
            },
        };
        Ok(fam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_curve_derivatives() {
        // cos(2t) + i sin(t): second derivative -4 cos(2t) - i sin(t)
        let c = TrigCurve {
            omega: 1.0,
            cos: vec![C64::default(), C64::default(), C64::new(1.0, 0.0)],
            sin: vec![C64::default(), C64::new(0.0, 1.0)],
        };
        let t = 0.7;
        let j = c.jet(t, 2);
        let v = C64::new((2.0 * t).cos(), t.sin());
        let d2 = C64::new(-4.0 * (2.0 * t).cos(), -t.sin());
        assert!((j.value() - v).norm() < 1e-14);
        assert!((j.derivative(2) - d2).norm() < 1e-13);
    }

    #[test]
    fn family_spec_roundtrip() {
        let json = r#"{"degree": 2, "domain": [0.0, 1.0], "family": {"kind": "builtin", "name": "power"}}"#;
        let spec: FamilySpec = serde_json::from_str(json).unwrap();
        let fam = spec.build().unwrap();
        let p = fam.poly_at(0.25);
        assert_eq!(p.coeffs[1], C64::new(-0.25, 0.0));
    }

    #[test]
    fn sampled_family_interpolates() {
        let json = r#"{"degree": 1, "domain": [0.0, 1.0], "family": {"kind": "sampled", "grid": [0.0, 1.0], "values": [[[0.0, 0.0]], [[2.0, 0.0]]]}}"#;
        let spec: FamilySpec = serde_json::from_str(json).unwrap();
        let fam = spec.build().unwrap();
        assert_eq!(fam.poly_at(0.5).coeffs[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn random_family_is_seeded() {
        let a = random_trig_family(3, 7, 6, (0.0, 1.0));
        let b = random_trig_family(3, 7, 6, (0.0, 1.0));
        assert_eq!(a.poly_at(0.3), b.poly_at(0.3));
        let norm = smooth_norm(&*a.curves().unwrap()[1], 3, (0.0, 1.0), 512);
        assert!((0.1..=10.0).contains(&norm));
    }
}
