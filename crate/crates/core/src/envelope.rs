//! Concave envelope `conc(g) = Γ_{a,b;p,q}(g)` of a class-Φ generator.
//!
//! `Γ` keeps `g` on `(a, b)` and replaces it by the affine pieces
//! `g(a) + p(t - a)` on `(0, a]` and `g(b) + q(t - b)` on `[b, ∞)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extreal;
use crate::generator::{Declared, DiniSide, GeneratorSpec};
use crate::poly::Piecewise;
use crate::roots::argmax_smallest;
use crate::validate::{self, check_grid};

/// Tolerance of the Dini sandwich check.
pub const DINI_TOL: f64 = 1e-8;
/// Slack of the majorization and concavity checks.
const CHECK_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeParams {
    pub a: f64,
    #[serde(serialize_with = "extreal::inf_null::serialize")]
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub envelope: GeneratorSpec,
}

impl EnvelopeParams {
    /// Whether the envelope is `g` itself.
    pub fn is_identity(&self) -> bool {
        self.a == 0.0 && self.b == f64::INFINITY
    }
}

fn slope_of(g: &GeneratorSpec) -> Option<impl Fn(f64) -> f64 + '_> {
    g.as_piecewise()
        .map(|pw| move |t: f64| pw.right_derivative(t))
}

/// Left contact point `a` and slope `p`. `(0, 1)` when `alpha = 0`.
pub fn find_a(g: &GeneratorSpec) -> Result<(f64, f64)> {
    let alpha = g.alpha();
    if alpha == 0.0 {
        return Ok((0.0, 1.0));
    }
    let g0 = match g.g0plus() {
        Declared::Value(v) => v,
        Declared::Estimate => g.limsup_at_zero()?,
    };
    if !g0.is_finite() {
        return Err(Error::Precondition(format!(
            "alpha = {alpha} > 0 needs a finite limsup of g at 0, got {g0}"
        )));
    }
    let phi = |t: f64| (g.value(t) - g0) / t;
    // φ'(t) = (g'(t) t - (g(t) - g0)) / t²
    let a = match slope_of(g) {
        Some(ds) => {
            let dphi = |t: f64| (ds(t) * t - (g.value(t) - g0)) / (t * t);
            argmax_smallest(phi, Some(dphi), alpha, 1.0).0
        }
        None => argmax_smallest(phi, None::<fn(f64) -> f64>, alpha, 1.0).0,
    };
    Ok((a, phi(a)))
}

/// Right contact point `b` and slope `q`. `(∞, 1)` when `beta = ∞`.
pub fn find_b(g: &GeneratorSpec) -> Result<(f64, f64)> {
    let beta = g.beta();
    if beta == f64::INFINITY {
        return Ok((f64::INFINITY, 1.0));
    }
    let q = match g.q_inf() {
        Declared::Value(v) => v,
        Declared::Estimate => g
            .limsup_slope_at_inf()
            .map_err(|e| Error::Precondition(format!("beta < ∞ needs a resolved q_inf: {e}")))?,
    };
    let psi = |t: f64| g.value(t) - q * t;
    let b = match slope_of(g) {
        Some(ds) => {
            let dpsi = |t: f64| ds(t) - q;
            argmax_smallest(psi, Some(dpsi), 1.0, beta).0
        }
        None => argmax_smallest(psi, None::<fn(f64) -> f64>, 1.0, beta).0,
    };
    Ok((b, q))
}

/// `Γ_{a,b;p,q}(g)` as a generator. With `a = 0` and `b = ∞` this is `g`
/// itself; otherwise `g` must be piecewise polynomial (or reducible to one).
pub fn gamma(g: &GeneratorSpec, a: f64, b: f64, p: f64, q: f64) -> Result<GeneratorSpec> {
    if !(a >= 0.0 && a < b) || b.is_nan() {
        return Err(Error::Argument(format!(
            "gamma needs 0 ≤ a < b, got a = {a}, b = {b}"
        )));
    }
    if !(p.is_finite() && q.is_finite()) {
        return Err(Error::Argument(format!(
            "slopes must be finite, got p = {p}, q = {q}"
        )));
    }
    if a == 0.0 && b == f64::INFINITY {
        return Ok(g.clone());
    }
    let pw = g.as_piecewise().ok_or_else(|| {
        Error::Config("envelopes with affine pieces need a piecewise-polynomial generator".into())
    })?;

    let mut breakpoints = Vec::new();
    let mut coeffs = Vec::new();
    if a > 0.0 {
        let ga = g.value(a);
        coeffs.push(vec![ga - p * a, p]);
        breakpoints.push(a);
    }
    let first = if a > 0.0 { pw.piece_index_right(a) } else { 0 };
    let last = if b.is_finite() {
        pw.piece_index(b)
    } else {
        pw.pieces() - 1
    };
    for i in first..=last {
        if i > first {
            breakpoints.push(pw.breakpoints()[i - 1]);
        }
        coeffs.push(pw.coeffs()[i].clone());
    }
    if b.is_finite() {
        let gb = g.value(b);
        breakpoints.push(b);
        coeffs.push(vec![gb - q * b, q]);
    }
    let env = Piecewise::new(breakpoints, coeffs)?;

    let g0plus = if a > 0.0 {
        match g.g0plus() {
            Declared::Value(v) if v.is_finite() => Declared::Value(v),
            _ => Declared::Value((g.value(a) - p * a).min(-1.0)),
        }
    } else {
        g.g0plus()
    };
    let q_inf = if b.is_finite() {
        Declared::Value(q)
    } else {
        g.q_inf()
    };
    let sup_g = if b.is_finite() {
        if q == 0.0 {
            Declared::Value(g.value(b))
        } else {
            Declared::Value(f64::INFINITY)
        }
    } else {
        g.sup_g()
    };
    GeneratorSpec::piecewise(env).with_class_data(0.0, f64::INFINITY, g0plus, q_inf, sup_g)
}

/// Validation grid plus the points that matter for this envelope.
fn check_points(g: &GeneratorSpec, a: f64, b: f64) -> Vec<f64> {
    let mut pts = validate::default_grid();
    pts.extend(g.kinks());
    for t in [a, b] {
        if t > 0.0 && t.is_finite() {
            pts.push(t);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `conc(g)` for `g` in class Φ, with every structural invariant checked.
pub fn concave_envelope(g: &GeneratorSpec) -> Result<EnvelopeParams> {
    let g = validate::require_phi(g)?;
    let (a, p) = find_a(&g)?;
    let (b, q) = find_b(&g)?;
    let envelope = gamma(&g, a, b, p, q)?;
    let params = EnvelopeParams {
        a,
        b,
        p,
        q,
        envelope,
    };
    verify(&g, &params)?;
    Ok(params)
}

fn verify(g: &GeneratorSpec, e: &EnvelopeParams) -> Result<()> {
    let fail = |what: &str, t: f64, lhs: f64, rhs: f64| {
        Err(Error::Consistency(format!(
            "envelope {what} fails at t = {t}: {lhs} vs {rhs}"
        )))
    };
    if !(0.0..=1.0).contains(&e.q) {
        return fail("slope bound 0 ≤ q ≤ 1", e.b, e.q, 1.0);
    }
    let env = &e.envelope;
    let pts = check_points(g, e.a, e.b);
    for &t in &pts {
        let (gv, ev) = (g.value(t), env.value(t));
        if ev < gv - CHECK_SLACK * gv.abs().max(1.0) {
            return fail("majorization", t, ev, gv);
        }
        if t > e.a && t < e.b && (ev - gv).abs() > 1e-12 * gv.abs().max(1.0) {
            return fail("agreement on (a, b)", t, ev, gv);
        }
    }
    if let (Some(w), _) = validate::midpoint_concavity(env, &pts) {
        return fail("concavity", w.t, w.lhs, w.rhs);
    }
    if g.alpha() > 0.0 {
        dini_sandwich(g, e.a, e.p).or_else(|(l, r)| fail("Dini sandwich at a", e.a, l, r))?;
    }
    if g.beta().is_finite() {
        dini_sandwich(g, e.b, e.q).or_else(|(l, r)| fail("Dini sandwich at b", e.b, l, r))?;
    }
    Ok(())
}

/// `D⁺g(x) ≤ slope ≤ D₋g(x)` within [`DINI_TOL`]; the error carries the
/// violated pair.
fn dini_sandwich(g: &GeneratorSpec, x: f64, slope: f64) -> std::result::Result<(), (f64, f64)> {
    let upper = g
        .dini(x, DiniSide::RightUpper)
        .map_err(|_| (f64::NAN, slope))?;
    let lower = g
        .dini(x, DiniSide::LeftLower)
        .map_err(|_| (slope, f64::NAN))?;
    if upper > slope + DINI_TOL {
        return Err((upper, slope));
    }
    if slope > lower + DINI_TOL {
        return Err((slope, lower));
    }
    Ok(())
}

/// Least concave majorant of sampled points, linear between vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHull {
    ts: Vec<f64>,
    vs: Vec<f64>,
}

impl SampledHull {
    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ts.iter().copied().zip(self.vs.iter().copied())
    }

    /// Hull value at `t`; outside the sampled range the end segments extend.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.ts.len();
        if n == 1 {
            return self.vs[0];
        }
        let i = self.ts.partition_point(|&x| x < t).clamp(1, n - 1);
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let (v0, v1) = (self.vs[i - 1], self.vs[i]);
        let lam = (t - t0) / (t1 - t0);
        v0 + lam * (v1 - v0)
    }
}

/// Brute-force envelope: upper hull of `{(t, g(t))}` over `grid` by a
/// monotone-chain sweep.
pub fn grid_envelope_oracle(g: &GeneratorSpec, grid: &[f64]) -> Result<SampledHull> {
    check_grid(grid)?;
    let mut ts: Vec<f64> = Vec::new();
    let mut vs: Vec<f64> = Vec::new();
    for &t in grid {
        let v = g.value(t);
        while ts.len() >= 2 {
            let n = ts.len();
            let (ox, oy) = (ts[n - 2], vs[n - 2]);
            let (ax, ay) = (ts[n - 1], vs[n - 1]);
            let cross = (ax - ox) * (v - oy) - (ay - oy) * (t - ox);
            if cross >= 0.0 {
                ts.pop();
                vs.pop();
            } else {
                break;
            }
        }
        ts.push(t);
        vs.push(v);
    }
    Ok(SampledHull { ts, vs })
}
