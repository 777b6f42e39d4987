#![allow(dead_code)]

use hardy_means::generator::{Declared, GeneratorSpec};
use hardy_means::Piecewise;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Root of `c - 1 - ln c = l` on `(1, ∞)` by plain bisection.
pub fn scalar_oracle(l: f64) -> f64 {
    let h = |c: f64| c - 1.0 - c.ln() - l;
    let (mut lo, mut hi) = (1.0, 2.0);
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Random piecewise generator satisfying Φ1–Φ3c by construction:
/// a quadratic below the chord on `(0, α]`, a concave piecewise-linear
/// middle through `(1, 0)` with slopes ≥ 1 before 1 and in `[0, 1]` after,
/// and for `β < ∞` a dip below `g(β)` followed by slope `q`.
pub fn random_phi(rng: &mut ChaCha8Rng, alpha_pos: bool, beta_finite: bool) -> GeneratorSpec {
    let alpha = if alpha_pos {
        rng.gen_range(0.1..0.6)
    } else {
        0.0
    };
    let beta = if beta_finite {
        rng.gen_range(1.5..4.0)
    } else {
        f64::INFINITY
    };

    // Middle knots and decreasing slopes.
    let lo = if alpha_pos { alpha } else { 0.05 };
    let mut left_knots: Vec<f64> = (0..2).map(|_| rng.gen_range(lo..1.0)).collect();
    left_knots.sort_by(f64::total_cmp);
    let mut left_slopes: Vec<f64> = (0..3).map(|_| rng.gen_range(1.0..2.5)).collect();
    left_slopes.sort_by(|a, b| b.total_cmp(a));
    let right_end = if beta_finite { beta } else { 6.0 };
    let mut right_knots: Vec<f64> = (0..2).map(|_| rng.gen_range(1.0..right_end)).collect();
    right_knots.sort_by(f64::total_cmp);
    let mut right_slopes: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
    right_slopes.sort_by(|a, b| b.total_cmp(a));
    if !beta_finite {
        right_slopes[2] = 0.0;
    }

    // Build (knot, value, slope-after) going left to right through (1, 0).
    let mut knots = vec![
        left_knots[0],
        left_knots[1],
        1.0,
        right_knots[0],
        right_knots[1],
    ];
    let slopes = [
        left_slopes[0],
        left_slopes[1],
        left_slopes[2],
        right_slopes[0],
        right_slopes[1],
        right_slopes[2],
    ];
    // slopes[i] is active left of knots[i] for i < 5, slopes[5] after knots[4].
    let mut values = [0.0; 5];
    values[1] = values[2] - slopes[2] * (knots[2] - knots[1]);
    values[0] = values[1] - slopes[1] * (knots[1] - knots[0]);
    values[3] = values[2] + slopes[3] * (knots[3] - knots[2]);
    values[4] = values[3] + slopes[4] * (knots[4] - knots[3]);
    let line = |t0: f64, v0: f64, s: f64| vec![v0 - s * t0, s];

    let mut breakpoints = Vec::new();
    let mut coeffs = Vec::new();
    let g0plus;
    if alpha_pos {
        let g_alpha = values[0] - slopes[0] * (knots[0] - alpha);
        g0plus = -1.0 - rng.gen_range(0.0..1.0);
        let d = rng.gen_range(0.5..3.0);
        let chord = (g_alpha - g0plus) / alpha;
        coeffs.push(vec![g0plus, chord - d * alpha, d]);
        breakpoints.push(alpha);
        coeffs.push(line(knots[0], values[0], slopes[0]));
    } else {
        coeffs.push(line(knots[0], values[0], slopes[0]));
        g0plus = values[0] - slopes[0] * knots[0];
    }
    for i in 0..5 {
        breakpoints.push(knots[i]);
        coeffs.push(line(knots[i], values[i], slopes[i + 1]));
    }
    let (q, sup);
    if beta_finite {
        // Cut the middle at β, then dip and continue with slope q.
        let keep = knots.iter().filter(|&&k| k < beta).count();
        breakpoints.truncate(breakpoints.len() - (5 - keep));
        coeffs.truncate(coeffs.len() - (5 - keep));
        knots.truncate(keep);
        let last = coeffs.last().unwrap().clone();
        let gb = last[0] + last[1] * beta;
        let w = rng.gen_range(0.5..2.0);
        let e = rng.gen_range(0.1..0.9) * gb / (w * w / 4.0);
        // gb - e (t - β)(β + w - t)
        coeffs.push(vec![gb + e * beta * (beta + w), -e * (2.0 * beta + w), e]);
        breakpoints.push(beta);
        q = if rng.gen_bool(0.5) {
            0.0
        } else {
            rng.gen_range(0.0..0.3)
        };
        breakpoints.push(beta + w);
        coeffs.push(vec![gb - q * (beta + w), q]);
        sup = if q == 0.0 { gb } else { f64::INFINITY };
    } else {
        q = 0.0;
        sup = values[4];
    }
    let pw = Piecewise::new(breakpoints, coeffs).expect("continuous by construction");
    GeneratorSpec::piecewise(pw)
        .with_interval(alpha, beta)
        .and_then(|g| g.with_g0plus(Declared::Value(g0plus)))
        .and_then(|g| g.with_q_inf(Declared::Value(q)))
        .and_then(|g| g.with_sup_g(Declared::Value(sup)))
        .expect("valid class data")
}
