//! wasm-bindgen exports behind `www/index.html`. Every export takes plain
//! numbers and returns a JSON string; the same functions run natively.

use rootreg::covers::{extract_subcover, GrowthBudget, IntervalKind, Radical};
use rootreg::curve::{power_family, radical_family, CurveRef, PolyCurve, TrigCurve};
use rootreg::spaces::{graded_grid_left, SampledFunction};
use rootreg::tracking::{track_curve, GridSpec, TrackOptions};
use rootreg::C64;
use serde_json::json;
use std::sync::Arc;
use wasm_bindgen::prelude::*;

fn failure(e: impl std::fmt::Display) -> String {
    json!({ "error": e.to_string() }).to_string()
}

/// Roots of `Z^n - g(t)` on `[0, 1]`, where `g` is one of
/// `power` (`t^gamma`), `loop` (`exp(2 pi i t)` times `gamma`) or
/// `wobble` (`cos(2 pi t) + gamma i sin(4 pi t)`, passing near zero).
#[wasm_bindgen]
pub fn track_roots(n: usize, family: &str, gamma: f64, points: usize) -> String {
    if !(1..=8).contains(&n) || points < 2 || points > 20_000 {
        return failure("need 1 <= n <= 8 and 2 <= points <= 20000");
    }
    let fam = match family {
        "power" => power_family(n, gamma, (0.0, 1.0)),
        "loop" => {
            let g: CurveRef = Arc::new(TrigCurve {
                omega: 2.0 * std::f64::consts::PI,
                cos: vec![C64::default(), C64::new(gamma, 0.0)],
                sin: vec![C64::default(), C64::new(0.0, gamma)],
            });
            radical_family(n, (0.0, 1.0), g)
        }
        "wobble" => {
            let g: CurveRef = Arc::new(TrigCurve {
                omega: 2.0 * std::f64::consts::PI,
                cos: vec![C64::default(), C64::new(1.0, 0.0)],
                sin: vec![C64::default(), C64::default(), C64::new(0.0, gamma)],
            });
            radical_family(n, (0.0, 1.0), g)
        }
        other => return failure(format!("unknown family {other}")),
    };
    let opts = TrackOptions {
        grid: GridSpec::Uniform { points },
        ..Default::default()
    };
    match track_curve(&fam, &opts) {
        Ok(tr) => {
            let branches: Vec<Vec<[f64; 2]>> = tr
                .branches
                .iter()
                .map(|b| b.iter().map(|z| [z.re, z.im]).collect())
                .collect();
            json!({
                "grid": tr.grid,
                "branches": branches,
                "max_step_jump": tr.max_step_jump,
                "refinements": tr.refinements,
            })
            .to_string()
        }
        Err(e) => failure(e),
    }
}

/// Lebesgue and weak Lebesgue norms of `t^{-a}` on `(0, 1)` and samples of
/// `r -> r |{f > r}|^{1/p}` whose supremum is the weak quasinorm.
#[wasm_bindgen]
pub fn weak_norm_explorer(a: f64, p: f64, depth: usize) -> String {
    if !(a > 0.0 && p >= 1.0) || !(4..=40).contains(&depth) {
        return failure("need a > 0, p >= 1 and 4 <= depth <= 40");
    }
    let f = SampledFunction::from_real_fn(graded_grid_left(0.0, 1.0, depth, 64), |t| t.powf(-a));
    let prof = f.profile();
    let (lo, hi) = (1.0f64, prof.sup());
    let samples = 200;
    let curve: Vec<[f64; 2]> = (0..=samples)
        .map(|i| {
            let r = lo * (hi / lo).powf(i as f64 / samples as f64);
            [r, r * prof.distribution(r).powf(1.0 / p)]
        })
        .collect();
    let lp_power = prof.lp_power(p);
    json!({
        "a": a,
        "p": p,
        "lp": lp_power.powf(1.0 / p),
        "weak_lp": prof.weak_lp(p),
        // a p < 1 is integrable; a p = 1 is the borderline weak case
        "critical_a": 1.0 / p,
        "curve": curve,
    })
    .to_string()
}

/// Cover of `(0, 1)` for the budget `rate |J| + ||(b^{1/k})'||_{L^1(J)} = d |b(t)|^{1/k}`
/// with `b = c t^j (1 - t)^m` where `vanishing` picks `(j, m)`:
/// `neither` (0, 0) with `c = 1 + t/2`, `left` (1, 0), `both` (1, 1).
#[wasm_bindgen]
pub fn cover_demo(rate: f64, d: f64, k: usize, vanishing: &str) -> String {
    if !(1..=6).contains(&k) {
        return failure("need 1 <= k <= 6");
    }
    let coeffs: &[f64] = match vanishing {
        "neither" => &[1.0, 0.5],
        "left" => &[0.0, 1.0],
        "both" => &[0.0, 1.0, -1.0],
        other => return failure(format!("unknown vanishing pattern {other}")),
    };
    let b: CurveRef = Arc::new(PolyCurve(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect()));
    let budget = match GrowthBudget::constant(rate, d, vec![Radical::new(b, k)], (0.0, 1.0)) {
        Ok(b) => b,
        Err(e) => return failure(e),
    };
    match extract_subcover(&budget) {
        Ok(rep) => {
            let intervals: Vec<_> = rep
                .records
                .iter()
                .map(|r| json!([r.s_minus, r.s_plus, r.t1, matches!(r.kind, IntervalKind::Second)]))
                .collect();
            json!({
                "intervals": intervals,
                "max_overlap": rep.max_overlap,
                "total_length": rep.total_length,
                "domain_length": rep.domain_length,
            })
            .to_string()
        }
        Err(e) => failure(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn square_root_endpoints() {
        let v = parse(track_roots(2, "power", 1.0, 64));
        let b = v["branches"].as_array().unwrap();
        // roots of Z^2 - 1 at t = 1
        let end = b[0].as_array().unwrap().last().unwrap()[0].as_f64().unwrap();
        assert!((end.abs() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn loop_swaps_square_roots() {
        let v = parse(track_roots(2, "loop", 1.0, 128));
        let b0 = v["branches"][0].as_array().unwrap();
        let (first, last) = (&b0[0], b0.last().unwrap());
        // the branch starting at 1 ends at -1
        assert!((first[0].as_f64().unwrap() + last[0].as_f64().unwrap()).abs() < 1e-9);
    }

    #[test]
    fn borderline_weak_norm_is_one() {
        // t^{-1/p}: weak quasinorm^p = 1 on (0, 1)
        let v = parse(weak_norm_explorer(0.5, 2.0, 30));
        assert!((v["weak_lp"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn cover_overlap_at_most_two() {
        for kind in ["neither", "left", "both"] {
            let v = parse(cover_demo(1.0, 0.2, 2, kind));
            assert!(v["max_overlap"].as_u64().unwrap() <= 2, "{kind}");
        }
        assert!(parse(cover_demo(1.0, 0.2, 2, "middle"))["error"].is_string());
    }
}
