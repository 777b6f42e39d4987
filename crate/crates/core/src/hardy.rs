//! Hardy constants of quasideviation means.
//!
//! Routes:
//! * concave generators: `c` solves `∫_0^c f(1/x) dx = 0`;
//! * truncated linear `min(t - 1, M)`: `c - 1 - ln c = ln(M + 1)`;
//! * class Φ: the three cases of the envelope equations, cross-checked
//!   against the direct equation for `conc(g)`;
//! * generators dominating `s(t - 1)` with `s = g'(1)`: the mean dominates
//!   the arithmetic mean and the constant is infinite.

use serde::Serialize;

use crate::envelope::{concave_envelope, EnvelopeParams};
use crate::error::{Error, Result};
use crate::extreal;
use crate::generator::{DiniSide, GeneratorSpec, Kind};
use crate::quadrature::{integral_f_inv, integrate_s, k_of_g, Panel};
use crate::roots::{bisect, bracket_by_doubling, BracketStep};
use crate::validate;

/// Relative width at which root brackets for `c` stop.
pub const ROOT_REL_TOL: f64 = 1e-12;
/// Largest admissible residual of a finite constant.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Relative agreement required between a case formula and the direct root.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// `|K|` below which both case-(iii) branches are solved.
pub const K_DEGENERATE: f64 = 1e-12;
/// Agreement required between the two branches when `K ≈ 0`.
pub const BRANCH_AGREEMENT_TOL: f64 = 1e-8;
/// Largest slope `q` accepted by case (ii).
pub const CASE_II_Q_MAX: f64 = 1e-10;
const BRACKET_START: f64 = 1.0 + 1e-8;
const BRACKET_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    #[serde(rename = "concave_integral")]
    ConcaveIntegral,
    #[serde(rename = "bounded_transcendental")]
    BoundedTranscendental,
    #[serde(rename = "envelope_case_i")]
    EnvelopeCaseI,
    #[serde(rename = "envelope_case_ii")]
    EnvelopeCaseII,
    #[serde(rename = "envelope_case_iii_Kneg")]
    EnvelopeCaseIIIKneg,
    #[serde(rename = "envelope_case_iii_Kpos")]
    EnvelopeCaseIIIKpos,
    #[serde(rename = "arithmetic_comparison")]
    ArithmeticComparison,
}

/// Direct root of `∫_0^c conc(g)(1/t) dt = 0` next to the case formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    #[serde(serialize_with = "extreal::serialize")]
    pub direct_constant: f64,
    pub relative_difference: f64,
}

/// Another route's constant, for reports that compare routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Alternative {
    pub route: Route,
    #[serde(serialize_with = "extreal::serialize")]
    pub constant: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub brackets: Vec<BracketStep>,
    /// Quadrature panels of the residual evaluated at the returned root.
    pub panels: Vec<Panel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardyReport {
    #[serde(serialize_with = "extreal::serialize")]
    pub constant: f64,
    pub route: Route,
    #[serde(rename = "K_value", skip_serializing_if = "Option::is_none")]
    pub k_value: Option<f64>,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factorial_bounds: Option<Vec<(u32, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    /// Whether the generator passed the class-𝓕 checks; recorded, not
    /// required, by the envelope route.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Alternative>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl HardyReport {
    fn new(constant: f64, route: Route, residual: f64) -> Self {
        HardyReport {
            constant,
            route,
            k_value: None,
            residual,
            factorial_bounds: None,
            envelope: None,
            cross_check: None,
            f_certified: None,
            diagnosis: None,
            alternatives: Vec::new(),
            trace: None,
        }
    }

    fn infinite(route: Route, diagnosis: String) -> Self {
        let mut r = HardyReport::new(f64::INFINITY, route, 0.0);
        r.diagnosis = Some(diagnosis);
        r
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
    }
}

/// Route selection for [`hardy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    Auto,
    Concave,
    Truncated,
    Envelope,
}

/// A root `c > 1` of `r`, with `r > 0` just above `1` and `r ≤ 0` eventually.
fn solve_from_one(r: impl Fn(f64) -> f64, trace: &mut Trace) -> Result<f64> {
    let (lo, hi) = bracket_by_doubling(&r, BRACKET_START, 2.0, BRACKET_CAP, &mut trace.brackets)?;
    bisect(&r, lo, hi, ROOT_REL_TOL, &mut trace.brackets)
}

fn finite_integral(g: &GeneratorSpec, lo: f64, hi: f64) -> f64 {
    integrate_s(g, lo, hi).map(|r| r.value).unwrap_or(f64::NAN)
}

fn panels(g: &GeneratorSpec, lo: f64, hi: f64) -> Vec<Panel> {
    integrate_s(g, lo, hi).map(|r| r.panels).unwrap_or_default()
}

/// Root of `ψ(c) = ∫_0^c f(1/x) dx`, or `None` when `∫_0^1` diverges.
fn concave_root(f: &GeneratorSpec, trace: &mut Trace) -> Result<Option<(f64, f64)>> {
    let head = integral_f_inv(f, 1.0)?;
    if head.divergence_flag {
        return Ok(None);
    }
    let i1 = head.value;
    let psi = |c: f64| i1 + finite_integral(f, 1.0 / c, 1.0);
    let c = solve_from_one(psi, trace)?;
    trace.panels = head.panels;
    trace.panels.extend(panels(f, 1.0 / c, 1.0));
    Ok(Some((c, psi(c))))
}

fn check_residual(route: &str, c: f64, residual: f64) -> Result<()> {
    if residual.abs() > RESIDUAL_TOL {
        return Err(Error::Solver(format!(
            "{route}: residual {residual:e} at c = {c} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    Ok(())
}

/// Hardy constant of a concave generator: the root of `∫_0^c f(1/x) dx = 0`,
/// or `+∞` when `x ↦ f(1/x)` is not integrable on `(0, 1]`.
pub fn hardy_concave(f: &GeneratorSpec) -> Result<HardyReport> {
    hardy_concave_traced(f).map(|mut r| {
        r.trace = None;
        r
    })
}

pub fn hardy_concave_traced(f: &GeneratorSpec) -> Result<HardyReport> {
    if !validate::concavity_certificate(f) {
        return Err(Error::Precondition(
            "generator has no concavity certificate on the default grid; use the envelope route"
                .into(),
        ));
    }
    let mut trace = Trace::default();
    let mut report = match concave_root(f, &mut trace)? {
        None => HardyReport::infinite(
            Route::ConcaveIntegral,
            "∫_0^1 f(1/x) dx diverges, so the mean is not a Hardy mean".into(),
        ),
        Some((c, residual)) => {
            check_residual("concave route", c, residual)?;
            HardyReport::new(c, Route::ConcaveIntegral, residual)
        }
    };
    report.trace = Some(trace);
    Ok(report)
}

/// `h(δ) = δ - ln(1 + δ)`, with a series for small `δ`.
fn delta_minus_log1p(d: f64) -> f64 {
    if d.abs() < 1e-2 {
        // δ²/2 - δ³/3 + δ⁴/4 - ...
        let mut term = d * d;
        let mut acc = 0.0;
        for k in 2..20 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * term / k as f64;
            term *= d;
        }
        acc
    } else {
        d - d.ln_1p()
    }
}

/// Root `c > 1` of `c - 1 - ln c = L` by safeguarded Newton on `δ = c - 1`.
fn solve_c_minus_log(l: f64, trace: &mut Trace) -> f64 {
    let h = |d: f64| delta_minus_log1p(d) - l;
    let mut lo = 0.0;
    let mut hi = (2.0 * l).sqrt().max(l) + 1.0;
    while h(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    let mut d = if l < 1.0 {
        (2.0 * l).sqrt()
    } else {
        l + (1.0 + l).ln()
    };
    d = d.clamp(lo, hi);
    for _ in 0..200 {
        let v = h(d);
        trace.brackets.push(BracketStep {
            lo: 1.0 + lo,
            hi: 1.0 + hi,
            x: 1.0 + d,
            fx: v,
        });
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        let slope = d / (1.0 + d);
        let mut next = d - v / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - d).abs() <= 1e-16 * d || hi - lo <= 1e-16 * hi {
            d = next;
            break;
        }
        d = next;
    }
    1.0 + d
}

/// `exp((n! ln(M + 1))^(1/n))`, an upper bound for the truncated constant.
pub fn hardy_factorial_bound(m: f64, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Argument(format!(
            "the factorial bound needs n ≥ 2, got {n}"
        )));
    }
    if !(m > 0.0) {
        return Err(Error::Argument(format!("M must be positive, got {m}")));
    }
    let fact: f64 = (2..=n).map(f64::from).product();
    Ok((fact * m.ln_1p()).powf(1.0 / f64::from(n)).exp())
}

/// Hardy constant of `min(t - 1, M)`: the root of `c - 1 - ln c = ln(M + 1)`.
/// Reports the factorial bounds for `n = 2..=6`.
pub fn hardy_truncated(m: f64) -> Result<HardyReport> {
    hardy_truncated_traced(m).map(|mut r| {
        r.trace = None;
        r
    })
}

pub fn hardy_truncated_traced(m: f64) -> Result<HardyReport> {
    if !(m > 0.0) {
        return Err(Error::Argument(format!("M must be positive, got {m}")));
    }
    if m == f64::INFINITY {
        return Ok(HardyReport::infinite(
            Route::BoundedTranscendental,
            "sup g is infinite; the bounded route does not apply".into(),
        ));
    }
    let mut trace = Trace::default();
    let l = m.ln_1p();
    let c = solve_c_minus_log(l, &mut trace);
    let residual = delta_minus_log1p(c - 1.0) - l;
    check_residual("bounded route", c, residual)?;
    let mut r = HardyReport::new(c, Route::BoundedTranscendental, residual);
    r.factorial_bounds = Some(
        (2..=6)
            .map(|n| Ok((n, hardy_factorial_bound(m, n)?)))
            .collect::<Result<_>>()?,
    );
    r.trace = Some(trace);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceBranch {
    /// `beta = ∞`: integrability of `g(1/t)` on `(0, 1]`.
    IntegralTest,
    /// `beta < ∞`: boundedness of `g`.
    Boundedness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Existence {
    pub exists: bool,
    pub branch: ExistenceBranch,
    /// `∫_0^1 g(1/t) dt` (integral branch) or `sup g` (boundedness branch).
    #[serde(serialize_with = "extreal::serialize")]
    pub value: f64,
    pub diagnosis: String,
}

/// Whether `𝓔_{conc(g)}` is a Hardy mean, for `g` in class Φ.
pub fn hardy_exists(g: &GeneratorSpec) -> Result<Existence> {
    let g = validate::require_phi(g)?;
    if g.beta() == f64::INFINITY {
        let r = integral_f_inv(&g, 1.0)?;
        let exists = !r.divergence_flag && r.value.is_finite();
        Ok(Existence {
            exists,
            branch: ExistenceBranch::IntegralTest,
            value: r.value,
            diagnosis: if exists {
                format!("beta = ∞ and ∫_0^1 g(1/t) dt = {} is finite", r.value)
            } else {
                "beta = ∞ and ∫_0^1 g(1/t) dt diverges".into()
            },
        })
    } else {
        let sup = g.supremum().map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("beta < ∞ needs sup_g: {msg}")),
            other => other,
        })?;
        let exists = sup.is_finite();
        Ok(Existence {
            exists,
            branch: ExistenceBranch::Boundedness,
            value: sup,
            diagnosis: if exists {
                format!("beta = {} < ∞ and sup g = {sup} is finite", g.beta())
            } else {
                format!("beta = {} < ∞ and g is unbounded above", g.beta())
            },
        })
    }
}

fn case_route(g: &GeneratorSpec) -> Route {
    match (g.alpha() == 0.0, g.beta().is_infinite()) {
        (true, true) => Route::EnvelopeCaseI,
        (true, false) => Route::EnvelopeCaseII,
        (false, _) => Route::EnvelopeCaseIIIKpos,
    }
}

/// Hardy constant of `𝓔_{conc(g)}` for `g` in class Φ, which bounds the
/// constant of `𝓔_g` from above.
pub fn hardy_envelope(g: &GeneratorSpec) -> Result<HardyReport> {
    hardy_envelope_traced(g).map(|mut r| {
        r.trace = None;
        r
    })
}

pub fn hardy_envelope_traced(g: &GeneratorSpec) -> Result<HardyReport> {
    let g = validate::require_phi(g)?;
    let f_certified = validate::script_f_certificate(&g)?;
    let existence = hardy_exists(&g)?;
    if !existence.exists {
        let mut r = HardyReport::infinite(case_route(&g), existence.diagnosis);
        r.f_certified = Some(f_certified);
        return Ok(r);
    }
    let env = concave_envelope(&g)?;
    let mut trace = Trace::default();
    let (route, c, residual, k_value, note) = if g.alpha() == 0.0 && g.beta().is_infinite() {
        let (c, res) = concave_root(&g, &mut trace)?.ok_or_else(|| {
            Error::Consistency("integral diverges after passing the existence test".into())
        })?;
        (Route::EnvelopeCaseI, c, res, None, None)
    } else if g.alpha() == 0.0 {
        let (c, res) = case_ii(&g, &env, &mut trace)?;
        (Route::EnvelopeCaseII, c, res, None, None)
    } else {
        case_iii(&g, &env, &mut trace)?
    };
    check_residual("envelope route", c, residual)?;

    let mut direct_trace = Trace::default();
    let direct = concave_root(&env.envelope, &mut direct_trace)?
        .map(|(c, _)| c)
        .unwrap_or(f64::INFINITY);
    let rel = (c - direct).abs() / direct;
    if !(rel <= CROSS_CHECK_TOL) {
        return Err(Error::Consistency(format!(
            "case formula gives c = {c} but the direct equation for conc(g) gives {direct} \
             (relative difference {rel:e})"
        )));
    }
    match route {
        Route::EnvelopeCaseIIIKneg if c > (1.0 / env.a) * (1.0 + 1e-12) => {
            return Err(Error::Consistency(format!(
                "K ≤ 0 branch returned c = {c} > 1/a = {}",
                1.0 / env.a
            )))
        }
        Route::EnvelopeCaseIIIKpos if c <= 1.0 / env.a => {
            return Err(Error::Consistency(format!(
                "K > 0 branch returned c = {c} ≤ 1/a = {}",
                1.0 / env.a
            )))
        }
        _ => {}
    }

    let mut r = HardyReport::new(c, route, residual);
    r.k_value = k_value;
    r.envelope = Some(env);
    r.cross_check = Some(CrossCheck {
        direct_constant: direct,
        relative_difference: rel,
    });
    r.f_certified = Some(f_certified);
    r.diagnosis = note;
    r.trace = Some(trace);
    Ok(r)
}

/// `g(b)/b + ∫_{1/b}^c g(1/t) dt = 0`, i.e. `g(b)/b + ∫_{1/c}^b g(s)/s² ds = 0`.
fn case_ii(g: &GeneratorSpec, env: &EnvelopeParams, trace: &mut Trace) -> Result<(f64, f64)> {
    if !(env.q < CASE_II_Q_MAX) {
        return Err(Error::Inconsistent(format!(
            "case alpha = 0, beta < ∞ needs q = 0 for a bounded generator, got q = {}",
            env.q
        )));
    }
    let b = env.b;
    let head = g.value(b) / b;
    let r = |c: f64| head + finite_integral(g, 1.0 / c, b);
    let c = solve_from_one(r, trace)?;
    trace.panels = panels(g, 1.0 / c, b);
    Ok((c, r(c)))
}

type CaseResult = (Route, f64, f64, Option<f64>, Option<String>);

fn case_iii(g: &GeneratorSpec, env: &EnvelopeParams, trace: &mut Trace) -> Result<CaseResult> {
    let (a, p) = (env.a, env.p);
    let k = k_of_g(g, a, env.b)?;
    if k.divergence_flag || !k.value.is_finite() {
        return Err(Error::Consistency(
            "K(g) diverges although the existence test passed".into(),
        ));
    }
    let kv = k.value;
    let ga = g.value(a);

    let kneg = |trace: &mut Trace| -> Result<(f64, f64)> {
        // K - ∫_a^{1/c} g(s)/s² ds on (1, 1/a]
        let r = |c: f64| kv - finite_integral(g, a, 1.0 / c);
        let c = bisect(&r, 1.0, 1.0 / a, ROOT_REL_TOL, &mut trace.brackets)?;
        trace.panels = panels(g, a, 1.0 / c);
        Ok((c, r(c)))
    };
    let kpos = |trace: &mut Trace| -> Result<(f64, f64)> {
        let r = |c: f64| kv + p * (c * a).ln() + (c - 1.0 / a) * (ga - p * a);
        let (lo, hi) = bracket_by_doubling(&r, 1.0 / a, 2.0 / a, BRACKET_CAP, &mut trace.brackets)?;
        let c = bisect(&r, lo, hi, ROOT_REL_TOL, &mut trace.brackets)?;
        trace.panels = k.panels.clone();
        Ok((c, r(c)))
    };

    if kv.abs() <= K_DEGENERATE {
        let (c1, r1) = kneg(trace)?;
        let mut t2 = Trace::default();
        let (c2, _) = kpos(&mut t2)?;
        if (c1 - c2).abs() > BRANCH_AGREEMENT_TOL * c1 {
            return Err(Error::Consistency(format!(
                "K ≈ 0 but the two branches disagree: {c1} vs {c2}"
            )));
        }
        return Ok((
            Route::EnvelopeCaseIIIKneg,
            c1,
            r1,
            Some(kv),
            Some(format!(
                "degenerate branch: |K| = {:e}; both branches agree",
                kv.abs()
            )),
        ));
    }
    if kv < 0.0 {
        let (c, r) = kneg(trace)?;
        Ok((Route::EnvelopeCaseIIIKneg, c, r, Some(kv), None))
    } else {
        let (c, r) = kpos(trace)?;
        Ok((Route::EnvelopeCaseIIIKpos, c, r, Some(kv), None))
    }
}

/// Whether `g ≥ s(t - 1)` on the default grid with `s = g'(1) > 0`. For a
/// generator in class 𝓕 this makes the mean dominate the arithmetic mean,
/// which is not a Hardy mean.
pub fn dominates_arithmetic(g: &GeneratorSpec) -> Result<bool> {
    let left = g.dini(1.0, DiniSide::LeftLower)?;
    let right = g.dini(1.0, DiniSide::RightUpper)?;
    if !((left - right).abs() <= 1e-8 * left.abs().max(1.0) && left > 0.0) {
        return Ok(false);
    }
    let s = 0.5 * (left + right);
    let below = validate::default_grid().into_iter().any(|t| {
        let rhs = s * (t - 1.0);
        g.value(t) < rhs - validate::INEQ_SLACK * rhs.abs().max(1.0)
    });
    if below {
        return Ok(false);
    }
    validate::script_f_certificate(g)
}

fn arithmetic_comparison() -> HardyReport {
    HardyReport::infinite(
        Route::ArithmeticComparison,
        "g ≥ g'(1)(t - 1): the mean dominates the arithmetic mean, which is not a Hardy mean"
            .into(),
    )
}

/// Best available upper bound for the Hardy constant of `𝓔_g`: the smaller
/// of the bounded route with `M = sup g` (when `g` is bounded and below
/// `t - 1`) and the envelope route (when `g` is in class Φ).
pub fn hardy_upper_bound_phi(g: &GeneratorSpec) -> Result<HardyReport> {
    let mut candidates: Vec<HardyReport> = Vec::new();
    let mut reasons: Vec<String> = Vec::new();

    let below_identity = validate::default_grid()
        .into_iter()
        .all(|t| g.value(t) <= (t - 1.0) + validate::INEQ_SLACK * (t - 1.0).abs().max(1.0));
    match g.supremum() {
        Ok(sup) if sup.is_finite() && below_identity => candidates.push(hardy_truncated(sup)?),
        Ok(sup) if sup.is_finite() => reasons.push("bounded route: g ≤ t - 1 fails".into()),
        Ok(_) => reasons.push("bounded route: sup g is infinite".into()),
        Err(e) => reasons.push(format!("bounded route: {e}")),
    }
    match hardy_envelope(g) {
        Ok(r) => candidates.push(r),
        Err(e @ (Error::Consistency(_) | Error::Solver(_))) => return Err(e),
        Err(e) => reasons.push(format!("envelope route: {e}")),
    }
    if candidates.is_empty() {
        return Err(Error::Precondition(format!(
            "no upper-bound route applies: {}",
            reasons.join("; ")
        )));
    }
    candidates.sort_by(|x, y| x.constant.total_cmp(&y.constant));
    let mut best = candidates.remove(0);
    best.alternatives = candidates
        .iter()
        .map(|r| Alternative {
            route: r.route,
            constant: r.constant,
        })
        .collect();
    let mut notes: Vec<String> = best.diagnosis.take().into_iter().collect();
    notes.push(format!(
        "upper bound for the Hardy constant; {:?} route is tightest",
        best.route
    ));
    notes.extend(reasons);
    best.diagnosis = Some(notes.join("; "));
    Ok(best)
}

/// Route dispatch used by the command-line front end. `Auto` tries, in
/// order: the bounded route for truncated generators, the concave route,
/// the arithmetic comparison, and the envelope route.
pub fn hardy(g: &GeneratorSpec, choice: RouteChoice, trace: bool) -> Result<HardyReport> {
    let mut r = match choice {
        RouteChoice::Concave => hardy_concave_traced(g)?,
        RouteChoice::Envelope => hardy_envelope_traced(g)?,
        RouteChoice::Truncated => match g.kind() {
            Kind::TruncatedLinear { m } => hardy_truncated_traced(*m)?,
            _ => {
                let r = hardy_upper_bound_phi(g)?;
                if r.route != Route::BoundedTranscendental
                    && !r
                        .alternatives
                        .iter()
                        .any(|a| a.route == Route::BoundedTranscendental)
                {
                    return Err(Error::Precondition(
                        "the bounded route needs a generator bounded above with g ≤ t - 1".into(),
                    ));
                }
                r
            }
        },
        RouteChoice::Auto => {
            if let Kind::TruncatedLinear { m } = g.kind() {
                hardy_truncated_traced(*m)?
            } else if validate::concavity_certificate(g) {
                hardy_concave_traced(g)?
            } else if dominates_arithmetic(g)? {
                arithmetic_comparison()
            } else {
                hardy_envelope_traced(g)?
            }
        }
    };
    if !trace {
        r.trace = None;
    }
    Ok(r)
}

/// [`hardy`] with automatic routing and no trace.
pub fn hardy_auto(g: &GeneratorSpec) -> Result<HardyReport> {
    hardy(g, RouteChoice::Auto, false)
}
