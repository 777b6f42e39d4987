//! Acceptance criteria 1–9. Runs as a plain binary so every criterion
//! prints one PASS/FAIL line; exits nonzero if any criterion fails.

use std::f64::consts::E;
use std::time::{Duration, Instant};

use hardy_means::envelope::{concave_envelope, grid_envelope_oracle, EnvelopeParams};
use hardy_means::generator::{DiniSide, GeneratorSpec};
use hardy_means::hardy::{
    hardy_auto, hardy_envelope, hardy_factorial_bound, hardy_truncated, HardyReport,
};
use hardy_means::harness::{sweep, SweepConfig};
use hardy_means::mean::{mean_generic, mean_truncated, MeanRequest, QdMean};
use hardy_means::presets::{g_dip, g_l, parse_generator};
use hardy_means::validate::log_grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{random_phi, scalar_oracle};

const GOLDEN_REL_TOL: f64 = 1e-8;
const GOLDEN_RUNTIME: Duration = Duration::from_secs(2);
const TRUNCATED_INTEGRAL_TOL: f64 = 1e-10;
const ROUTE_AGREEMENT_TOL: f64 = 1e-6;
const ROUTES_RUNTIME: Duration = Duration::from_secs(5);
const ENVELOPE_SUP_TOL: f64 = 5e-3;
const ENVELOPE_IDENTITY_TOL: f64 = 1e-12;
const DINI_TOL: f64 = 1e-8;
const EXACT_MEAN_REL_TOL: f64 = 1e-10;
const EXACT_MEAN_RUNTIME: Duration = Duration::from_secs(10);
const HOMOGENEITY_TOL: f64 = 1e-10;
const COMPARISON_TOL: f64 = 1e-10;
const SEED: u64 = 42;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for p in [-2.0f64, -1.0, -0.5, 0.0, 1.0 / 3.0, 0.5, 0.75] {
        let g = parse_generator(&format!("power:{p}")).map_err(|e| e.to_string())?;
        let r = hardy_auto(&g).map_err(|e| format!("p = {p}: {e}"))?;
        let expected: f64 = if p == 0.0 {
            E
        } else {
            (1.0 - p).powf(-1.0 / p)
        };
        let err = rel(r.constant, expected);
        worst = worst.max(err);
        check(
            err <= GOLDEN_REL_TOL,
            format!("p = {p}: {} vs {expected}", r.constant),
        )?;
    }
    for p in [1.0, 2.0] {
        let g = parse_generator(&format!("power:{p}")).map_err(|e| e.to_string())?;
        let r = hardy_auto(&g).map_err(|e| format!("p = {p}: {e}"))?;
        check(
            r.constant == f64::INFINITY,
            format!("p = {p}: expected ∞, got {}", r.constant),
        )?;
    }
    let t = start.elapsed();
    check(t < GOLDEN_RUNTIME, format!("runtime {t:?}"))?;
    Ok(format!(
        "max relative error {worst:.1e}, ∞ for p = 1, 2, {t:.2?}"
    ))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    for m in [0.1, 1.0, 10.0, 100.0] {
        let g = GeneratorSpec::truncated_linear(m).map_err(|e| e.to_string())?;
        let r = hardy_means::quadrature::integral_f_inv(&g, 1.0).map_err(|e| e.to_string())?;
        let err = (r.value - (m + 1.0f64).ln()).abs();
        worst = worst.max(err);
        check(
            err <= TRUNCATED_INTEGRAL_TOL,
            format!("M = {m}: {} vs ln(M+1)", r.value),
        )?;
    }
    Ok(format!("max abs error {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let oracle = scalar_oracle(2f64.ln());
    let reports: Vec<(&str, HardyReport)> = vec![
        (
            "g_dip",
            hardy_envelope(&g_dip()).map_err(|e| format!("g_dip: {e}"))?,
        ),
        (
            "gL",
            hardy_envelope(&g_l()).map_err(|e| format!("gL: {e}"))?,
        ),
        (
            "truncated(1)",
            hardy_truncated(1.0).map_err(|e| e.to_string())?,
        ),
    ];
    for (i, (na, ra)) in reports.iter().enumerate() {
        check(
            rel(ra.constant, oracle) <= ROUTE_AGREEMENT_TOL,
            format!("{na}: {} vs oracle {oracle}", ra.constant),
        )?;
        for (nb, rb) in &reports[i + 1..] {
            check(
                rel(ra.constant, rb.constant) <= ROUTE_AGREEMENT_TOL,
                format!("{na} {} vs {nb} {}", ra.constant, rb.constant),
            )?;
        }
    }
    let t = start.elapsed();
    check(t < ROUTES_RUNTIME, format!("runtime {t:?}"))?;
    let routes: Vec<String> = reports
        .iter()
        .map(|(n, r)| format!("{n}={:.8} ({:?})", r.constant, r.route))
        .collect();
    Ok(format!(
        "{}; oracle {oracle:.8}, {t:.2?}",
        routes.join(", ")
    ))
}

fn random_inputs() -> Vec<(String, GeneratorSpec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    [
        (true, false),
        (false, true),
        (true, true),
        (true, true),
        (false, true),
    ]
    .iter()
    .enumerate()
    .map(|(i, &(a, b))| (format!("random#{i}"), random_phi(&mut rng, a, b)))
    .collect()
}

fn envelope_inputs() -> Vec<(String, GeneratorSpec)> {
    let mut v = vec![("g_dip".to_string(), g_dip()), ("gL".to_string(), g_l())];
    v.extend(random_inputs());
    v
}

fn criterion_4() -> Outcome {
    let eval = log_grid(1e-2, 1e2, 2000);
    let mut oracle_grid = log_grid(1e-9, 1e9, 40_000);
    oracle_grid.extend(&eval);
    oracle_grid.sort_by(f64::total_cmp);
    oracle_grid.dedup();
    let mut worst: f64 = 0.0;
    for (name, g) in envelope_inputs() {
        let env = concave_envelope(&g).map_err(|e| format!("{name}: {e}"))?;
        let hull = grid_envelope_oracle(&g, &oracle_grid).map_err(|e| e.to_string())?;
        let d = eval
            .iter()
            .map(|&t| (env.envelope.value(t) - hull.eval(t)).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d);
        check(d <= ENVELOPE_SUP_TOL, format!("{name}: sup-norm {d:e}"))?;
    }
    for (name, g) in [
        ("log", GeneratorSpec::log()),
        (
            "truncated(1)",
            GeneratorSpec::truncated_linear(1.0).unwrap(),
        ),
    ] {
        let env = concave_envelope(&g).map_err(|e| format!("{name}: {e}"))?;
        let d = eval
            .iter()
            .map(|&t| (env.envelope.value(t) - g.value(t)).abs())
            .fold(0.0, f64::max);
        check(
            d <= ENVELOPE_IDENTITY_TOL,
            format!("{name}: identity off by {d:e}"),
        )?;
    }
    Ok(format!(
        "7 envelopes within {worst:.1e} of the hull oracle; identity for log, truncated"
    ))
}

fn sandwich(g: &GeneratorSpec, x: f64, slope: f64, what: &str) -> Result<(), String> {
    let up = g.dini(x, DiniSide::RightUpper).map_err(|e| e.to_string())?;
    let low = g.dini(x, DiniSide::LeftLower).map_err(|e| e.to_string())?;
    check(
        up <= slope + DINI_TOL && slope <= low + DINI_TOL,
        format!("{what}: D⁺ = {up}, slope = {slope}, D₋ = {low}"),
    )
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for (name, g) in envelope_inputs() {
        let e: EnvelopeParams = concave_envelope(&g).map_err(|e| format!("{name}: {e}"))?;
        if g.alpha() > 0.0 {
            sandwich(&g, e.a, e.p, &format!("{name} at a = {}", e.a))?;
            checked += 1;
        }
        if g.beta().is_finite() {
            sandwich(&g, e.b, e.q, &format!("{name} at b = {}", e.b))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} contact points satisfy D⁺g ≤ slope ≤ D₋g"
    ))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ms = [0.1, 1.0, 10.0];
    let mut worst: f64 = 0.0;
    for trial in 0..500 {
        let m = ms[trial % 3];
        let n = rng.gen_range(1..=64);
        let x: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
            .collect();
        let fast = mean_truncated(m, &x).map_err(|e| e.to_string())?;
        let g = GeneratorSpec::truncated_linear(m).unwrap();
        let slow =
            mean_generic(&MeanRequest::new(g, x.clone()).unwrap()).map_err(|e| e.to_string())?;
        let err = rel(fast, slow);
        worst = worst.max(err);
        check(
            err <= EXACT_MEAN_REL_TOL,
            format!("trial {trial}, M = {m}: {fast} vs {slow}"),
        )?;
    }
    let t = start.elapsed();
    check(t < EXACT_MEAN_RUNTIME, format!("runtime {t:?}"))?;
    Ok(format!(
        "500 vectors, max relative difference {worst:.1e}, {t:.2?}"
    ))
}

fn criterion_7() -> Outcome {
    let grid = log_grid(1e-3, 1e3, 50);
    let mut min_gap = f64::INFINITY;
    for &m in &grid {
        let c = hardy_truncated(m).map_err(|e| e.to_string())?.constant;
        for n in 2..=6 {
            let bound = hardy_factorial_bound(m, n).map_err(|e| e.to_string())?;
            check(
                c < bound,
                format!("M = {m}, n = {n}: c = {c} ≥ bound {bound}"),
            )?;
            min_gap = min_gap.min(bound - c);
        }
    }
    Ok(format!(
        "250 pairs strictly below the bound, smallest gap {min_gap:.2e}"
    ))
}

fn criterion_8() -> Outcome {
    let config = SweepConfig::from_json(
        r#"{
            "generators": [
                {"id": "truncated(0.5)", "generator": "truncated:0.5"},
                {"id": "truncated(1)", "generator": "truncated:1"},
                {"id": "truncated(2)", "generator": "truncated:2"},
                {"id": "log", "generator": "log"},
                {"id": "power(1/2)", "generator": "power:0.5"},
                {"id": "g_dip", "generator": "g_dip"}
            ],
            "sequences": [
                {"id": "geometric(0.3)", "sequence": "geometric:0.3"},
                {"id": "geometric(0.7)", "sequence": "geometric:0.7"},
                {"id": "power_decay(2)", "sequence": "power_decay:2"}
            ],
            "n": 4096
        }"#,
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let rows = sweep(&config);
    check(rows.len() == 18, format!("{} rows", rows.len()))?;
    let mut min_margin = f64::INFINITY;
    for r in &rows {
        check(
            r.error.is_none() && r.dominated == Some(true),
            format!("{} × {}: {:?}", r.generator, r.sequence, r),
        )?;
        min_margin = min_margin.min(r.margin.unwrap_or(f64::INFINITY));
    }
    Ok(format!(
        "18 cells dominated, smallest margin {min_margin:.3}, {:.2?}",
        start.elapsed()
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for (name, g) in [("g_dip", g_dip()), ("gL", g_l())] {
        let solver = QdMean::new(&g).map_err(|e| e.to_string())?;
        let env = concave_envelope(&g).map_err(|e| e.to_string())?;
        let conc = QdMean::new(&env.envelope).map_err(|e| e.to_string())?;
        for trial in 0..200 {
            let n = rng.gen_range(1..=32);
            let x: Vec<f64> = (0..n)
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect();
            let lambda = 10f64.powf(rng.gen_range(-2.0..2.0));
            let y = solver.mean(&x).map_err(|e| e.to_string())?;
            let (lo, hi) = x
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
            check(
                lo <= y && y <= hi,
                format!("{name} trial {trial}: internality, {y} ∉ [{lo}, {hi}]"),
            )?;
            let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            let ys = solver.mean(&xs).map_err(|e| e.to_string())?;
            check(
                rel(ys, lambda * y) <= HOMOGENEITY_TOL,
                format!("{name} trial {trial}: homogeneity, {ys} vs {}", lambda * y),
            )?;
            let yc = conc.mean(&x).map_err(|e| e.to_string())?;
            check(
                y <= yc + COMPARISON_TOL * yc,
                format!("{name} trial {trial}: comparison, {y} > {yc}"),
            )?;
        }
    }
    Ok("200 vectors each for g_dip and gL: internality, homogeneity, E_g ≤ E_conc(g)".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("golden power-mean constants", criterion_1),
        ("truncated integral equals ln(M+1)", criterion_2),
        ("three-route agreement", criterion_3),
        ("envelope vs hull oracle", criterion_4),
        ("Dini sandwich at contact points", criterion_5),
        ("exact truncated mean vs bisection", criterion_6),
        ("factorial bound", criterion_7),
        ("empirical domination sweep", criterion_8),
        ("mean axioms and comparison", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
