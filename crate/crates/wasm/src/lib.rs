//! Browser bindings. Every entry point returns a JSON string for the plain
//! JS front end in `www/`; the `*_json` functions are the same computations
//! without the `JsError` wrapping, so they can be tested natively.

use hardy_means::envelope::concave_envelope;
use hardy_means::hardy::{hardy_auto, hardy_factorial_bound, hardy_truncated, Route};
use hardy_means::harness::{prefix_means, SequenceKind, SequenceSpec};
use hardy_means::presets::parse_generator;
use hardy_means::validate::log_grid;
use hardy_means::{Error, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Longest sequence the demo will sum.
pub const MAX_TERMS: usize = 4096;
/// Points kept per plotted curve.
const MAX_CURVE_POINTS: usize = 400;

#[derive(Serialize)]
struct EnvelopeCurve {
    ts: Vec<f64>,
    g: Vec<f64>,
    envelope: Vec<f64>,
    a: f64,
    b: Option<f64>,
    p: f64,
    q: f64,
    constant: Option<f64>,
    route: Route,
}

#[derive(Serialize)]
struct FactorialCurve {
    n: u32,
    bound: Vec<f64>,
}

#[derive(Serialize)]
struct ConstantCurve {
    m: Vec<f64>,
    constant: Vec<f64>,
    bounds: Vec<FactorialCurve>,
}

#[derive(Serialize)]
struct RatioCurve {
    n: Vec<usize>,
    ratio: Vec<f64>,
    terms: Vec<f64>,
    constant: Option<f64>,
    route: Route,
    dominated: bool,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Parse(e.to_string()))
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn check_range(lo: f64, hi: f64, points: usize) -> Result<()> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(Error::Argument(format!(
            "need 0 < lo < hi < ∞ and at least 2 points, got [{lo}, {hi}] with {points}"
        )));
    }
    Ok(())
}

/// `g` and its concave envelope on a log grid over `[t_min, t_max]`, with
/// the contact data and the Hardy constant of the envelope.
pub fn envelope_curve_json(
    generator: &str,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<String> {
    check_range(t_min, t_max, points)?;
    let g = parse_generator(generator)?;
    let env = concave_envelope(&g)?;
    let hardy = hardy_auto(&g)?;
    let ts = log_grid(t_min, t_max, points.min(MAX_CURVE_POINTS * 4));
    to_json(&EnvelopeCurve {
        g: ts.iter().map(|&t| g.value(t)).collect(),
        envelope: ts.iter().map(|&t| env.envelope.value(t)).collect(),
        ts,
        a: env.a,
        b: finite(env.b),
        p: env.p,
        q: env.q,
        constant: finite(hardy.constant),
        route: hardy.route,
    })
}

/// Hardy constant of `min(t - 1, M)` over a log grid of `M`, with the
/// factorial bounds for `n = 2..=6`.
pub fn hardy_vs_m_json(m_min: f64, m_max: f64, points: usize) -> Result<String> {
    check_range(m_min, m_max, points)?;
    let m = log_grid(m_min, m_max, points.min(MAX_CURVE_POINTS));
    let constant = m
        .iter()
        .map(|&v| hardy_truncated(v).map(|r| r.constant))
        .collect::<Result<_>>()?;
    let bounds = (2..=6)
        .map(|n| {
            let bound = m
                .iter()
                .map(|&v| hardy_factorial_bound(v, n))
                .collect::<Result<_>>()?;
            Ok(FactorialCurve { n, bound })
        })
        .collect::<Result<_>>()?;
    to_json(&ConstantCurve {
        m,
        constant,
        bounds,
    })
}

/// Partial Hardy ratios `Σ_{k≤N} 𝓔(x₁..x_k) / Σ_{k≤N} x_k` for `N = 1..=n`,
/// thinned to at most a few hundred points.
pub fn ratio_curve_json(generator: &str, sequence: &str, n: usize) -> Result<String> {
    if n == 0 || n > MAX_TERMS {
        return Err(Error::Argument(format!(
            "n must be in 1..={MAX_TERMS}, got {n}"
        )));
    }
    let kind = SequenceKind::parse(sequence)?;
    if matches!(kind, SequenceKind::Csv { .. }) {
        return Err(Error::Argument(
            "csv sequences are not available in the browser".into(),
        ));
    }
    let g = parse_generator(generator)?;
    let x = SequenceSpec::new(kind, n, 1.0)?.terms()?;
    let means = prefix_means(&g, &x)?;
    let hardy = hardy_auto(&g)?;

    let step = n.div_ceil(MAX_CURVE_POINTS);
    let (mut sm, mut sx) = (0.0, 0.0);
    let (mut ns, mut ratio) = (Vec::new(), Vec::new());
    for k in 0..n {
        sm += means[k];
        sx += x[k];
        if (k + 1) % step == 0 || k + 1 == n {
            ns.push(k + 1);
            ratio.push(sm / sx);
        }
    }
    let last = *ratio.last().expect("n ≥ 1");
    to_json(&RatioCurve {
        n: ns,
        ratio,
        terms: x.into_iter().take(MAX_CURVE_POINTS).collect(),
        constant: finite(hardy.constant),
        route: hardy.route,
        dominated: last <= hardy.constant + 1e-9,
    })
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = envelopeCurve)]
pub fn envelope_curve(
    generator: &str,
    t_min: f64,
    t_max: f64,
    points: usize,
) -> Result<String, JsError> {
    envelope_curve_json(generator, t_min, t_max, points).map_err(js)
}

#[wasm_bindgen(js_name = hardyVsM)]
pub fn hardy_vs_m(m_min: f64, m_max: f64, points: usize) -> Result<String, JsError> {
    hardy_vs_m_json(m_min, m_max, points).map_err(js)
}

#[wasm_bindgen(js_name = ratioCurve)]
pub fn ratio_curve(generator: &str, sequence: &str, n: usize) -> Result<String, JsError> {
    ratio_curve_json(generator, sequence, n).map_err(js)
}
