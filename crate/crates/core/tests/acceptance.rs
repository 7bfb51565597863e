//! The ten acceptance criteria, run in sequence with one PASS/FAIL line each.
//!
//! Criterion 2 contains a sub-check that the closed form rules out: at
//! `p = n/(n-1) - 0.1` the integral still changes by 16-20% between
//! `eps = 1e-6` and `1e-8`. It is run as stated and reported as FAIL; the
//! test then requires the measured change to agree with the closed form.

use rootreg::experiments::{parse_config, run_experiment, ExperimentOutput, ExperimentRequest};
use rootreg::spaces::{graded_grid_left, uniform_grid, weak_lp_quasinorm, SampledFunction};
use serde_json::{json, Value};
use std::time::{Duration, Instant};

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

fn run(id: usize, limit: Option<u64>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f();
    let elapsed = start.elapsed();
    let limit = limit.map(Duration::from_secs);
    let in_time = limit.map_or(true, |l| elapsed < l);
    let o = Outcome {
        id,
        pass: ok && in_time,
        detail: if in_time { detail } else { format!("{detail}; over time limit") },
        elapsed,
        limit,
    };
    println!(
        "criterion {:>2}: {} ({:.2?}{}) {}",
        o.id,
        if o.pass { "PASS" } else { "FAIL" },
        o.elapsed,
        o.limit.map_or(String::new(), |l| format!(" < {l:?}")),
        o.detail
    );
    o
}

fn experiment(cfg: Value) -> (ExperimentRequest, ExperimentOutput) {
    let req = parse_config(&cfg).expect("config parses");
    let out = run_experiment(&req).expect("experiment runs");
    (req, out)
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn weak_norms() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for &p in &[1.2, 1.5, 2.0] {
        let eps = 1e-3;
        let g = graded_grid_left(0.0, eps, 24, 1024);
        let near = SampledFunction::from_real_fn(g, |t| t.powf(-1.0 / p));
        let far = SampledFunction::from_real_fn(uniform_grid(1.0, 2.0, 4096), |t| t.powf(-1.0 / p));
        worst = worst
            .max((weak_lp_quasinorm(&near, p).powf(p) - 1.0).abs())
            .max((weak_lp_quasinorm(&far, p).powf(p) - 0.5).abs());
    }
    (worst <= 1e-6, format!("max error {worst:.2e}"))
}

/// `(critical part passes, subcritical part passes, closed form agrees, detail)`.
fn sharpness(out: &ExperimentOutput) -> (bool, bool, bool, String) {
    let mut crit = true;
    let mut sub = true;
    let mut agree = true;
    let mut detail = Vec::new();
    for d in out.report["degrees"].as_array().unwrap() {
        let e = d["exponents"].as_array().unwrap();
        let (c, s) = (&e[0], &e[1]);
        let r2 = f(&c["r_squared"]);
        let se = f(&c["slope_rel_error"]);
        let ch = f(&s["change"]);
        let cf = f(&s["change_closed_form"]);
        crit &= r2 >= 0.999 && se <= 0.05;
        sub &= ch < 0.01;
        agree &= (ch - cf).abs() <= 0.01 * cf;
        detail.push(format!("n={} R2={r2:.6} slope err={se:.2e} sub change={ch:.4} (closed form {cf:.4})", d["n"]));
    }
    (crit, sub, agree, detail.join("; "))
}

fn bound_survey(out: &ExperimentOutput) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in out.report["degrees"].as_array().unwrap() {
        let change = f(&d["refinement_change"]);
        let good = d["finite"] == json!(true)
            && d["errors"].as_array().unwrap().is_empty()
            && d["families"] == json!(100)
            && change <= 0.1
            && d["holder_consistent"] == json!(true)
            && f(&d["max_holder_slack"]) <= 1e-9;
        ok &= good;
        detail.push(format!(
            "n={} max ratio {:.4} -> {:.4} ({:.1}%) slack {:.1e}",
            d["n"],
            f(&d["max_ratio"]),
            f(&d["max_ratio_fine"]),
            100.0 * change,
            f(&d["max_holder_slack"])
        ));
    }
    (ok, detail.join("; "))
}

fn cover_demo(out: &ExperimentOutput) -> (bool, String) {
    let r = &out.report;
    let inst = r["instances"].as_array().unwrap();
    let seven = &r["seven_interval"];
    let ok = inst.len() == 50
        && r["all_overlap_ok"] == json!(true)
        && r["all_length_ok"] == json!(true)
        && r["all_residual_ok"] == json!(true)
        && inst.iter().all(|i| i["max_overlap"].as_u64().unwrap() <= 2)
        && seven["agrees"] == json!(true)
        && seven["selection_valid"] == json!(true);
    let res = inst.iter().map(|i| f(&i["max_residual"])).fold(0.0, f64::max);
    (
        ok,
        format!(
            "{} instances, max residual {res:.1e}, seven-interval brute force {} subcovers",
            inst.len(),
            seven["brute_force_subcovers"]
        ),
    )
}

fn interpolation(out: &ExperimentOutput) -> (bool, String) {
    let r = &out.report["interpolation"];
    let ok = r["cases"] == json!(500) && r["violations"] == json!(0) && r["hypothesis_held"].as_u64().unwrap() > 0;
    (
        ok,
        format!(
            "{} of {} satisfy the hypothesis, {} violations, worst ratio {:.3}",
            r["hypothesis_held"], r["cases"], r["violations"], f(&r["max_ratio_when_held"])
        ),
    )
}

fn splitting(out: &ExperimentOutput) -> (bool, String) {
    let r = &out.report["splitting"];
    let err = f(&r["max_product_error"]);
    let res = f(&r["min_resultant_abs"]);
    let it = r["max_newton_iterations"].as_u64().unwrap_or(u64::MAX);
    let ok = r["cases"] == json!(200) && err <= 1e-9 && res > 0.0 && r["newton_failures"] == json!(0) && it <= 8;
    (ok, format!("product error {err:.1e}, min |res| {res:.1e}, Newton iterations <= {it}"))
}

fn monodromy(out: &ExperimentOutput) -> (bool, String) {
    let r = &out.report;
    let loops_ok = r["loops"]
        .as_array()
        .unwrap()
        .iter()
        .all(|l| l["stable"] == json!(true) && l["single_cycle"] == json!(true));
    let boxes = r["boxes"].as_array().unwrap();
    let with_origin = boxes.iter().filter(|b| b["contains_origin"] == json!(true)).count();
    let boxes_ok = boxes.iter().all(|b| b["as_expected"] == json!(true));
    (
        loops_ok && boxes_ok && with_origin > 0,
        format!("loops ok: {loops_ok}, {} boxes ({with_origin} around 0) ok: {boxes_ok}", boxes.len()),
    )
}

fn traces(out: &ExperimentOutput) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for fam in out.report["families"].as_array().unwrap() {
        let s = &fam["summary"];
        ok &= fam["complete"] == json!(true) && s["failed"] == json!(0) && s["nodes"].as_u64().unwrap() > 0;
        detail.push(format!(
            "{}: {} nodes, {} checks, {} failed, {} uncalibrated",
            fam["family"].as_str().unwrap(),
            s["nodes"],
            s["checks"],
            s["failed"],
            s["uncalibrated"]
        ));
    }
    (ok, detail.join("; "))
}

fn radicals(out: &ExperimentOutput) -> (bool, String) {
    let r = &out.report["radical_identity"];
    let d = f(&r["max_rel_diff_finest"]);
    let n = r["cases"].as_array().unwrap().len();
    (n == 20 && d <= 1e-4, format!("{n} cases, max relative difference {d:.2e}"))
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();
    let mut runs: Vec<(ExperimentRequest, ExperimentOutput)> = Vec::new();

    outcomes.push(run(1, Some(1), weak_norms));

    let mut sub_agrees = false;
    let mut crit_ok = false;
    outcomes.push(run(2, Some(10), || {
        let (req, out) = experiment(json!({"name": "sharpness"}));
        let (crit, sub, agree, detail) = sharpness(&out);
        runs.push((req, out));
        sub_agrees = agree;
        crit_ok = crit;
        (crit && sub, detail)
    }));

    let glaeser = |section: &str| {
        let mut cfg = json!({"name": "glaeser-suite", "seed": 5, "interpolation_cases": 0, "split_cases": 0, "radical_cases": 0});
        let (key, n) = match section {
            "interpolation" => ("interpolation_cases", 500),
            "split" => ("split_cases", 200),
            _ => ("radical_cases", 20),
        };
        cfg[key] = json!(n);
        experiment(cfg)
    };

    let mut check = |id: usize, limit: u64, cfg: Option<Value>, section: Option<&str>, eval: fn(&ExperimentOutput) -> (bool, String)| {
        let o = run(id, Some(limit), || {
            let (req, out) = match (&cfg, section) {
                (Some(c), _) => experiment(c.clone()),
                (None, Some(s)) => glaeser(s),
                _ => unreachable!(),
            };
            let r = eval(&out);
            runs.push((req, out));
            r
        });
        outcomes.push(o);
    };
    check(3, 300, Some(json!({"name": "bound-survey", "seed": 11})), None, bound_survey);
    check(4, 30, Some(json!({"name": "cover-demo", "seed": 3})), None, cover_demo);
    check(5, 10, None, Some("interpolation"), interpolation);
    check(6, 10, None, Some("split"), splitting);
    check(7, 5, Some(json!({"name": "monodromy"})), None, monodromy);
    check(8, 30, Some(json!({"name": "appendix-trace"})), None, traces);
    check(9, 10, None, Some("radical"), radicals);

    outcomes.push(run(10, None, || {
        let mut same = 0;
        let mut differ = Vec::new();
        for (req, first) in &runs {
            let again = run_experiment(req).expect("rerun");
            let csv_same = first.series.iter().zip(&again.series).all(|(a, b)| a.to_csv() == b.to_csv());
            if again.report_json() == first.report_json() && csv_same {
                same += 1;
            } else {
                differ.push(first.name.clone());
            }
        }
        (differ.is_empty(), format!("{same} of {} runs byte-identical {differ:?}", runs.len()))
    }));

    outcomes.sort_by_key(|o| o.id);
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("failed criteria: {failed:?}");
    // criterion 2 may only fail through its subcritical clause, and then
    // the measurement must follow the closed form
    assert!(failed.iter().all(|&id| id == 2), "unexpected failures: {failed:?}");
    if failed.contains(&2) {
        assert!(crit_ok, "critical exponent part of criterion 2 failed");
        assert!(sub_agrees, "subcritical change disagrees with the closed form");
        println!("criterion  2: subcritical clause unattainable; measured change matches the closed form");
    }
}
