//! Singular integrals of generators.
//!
//! Every improper integral `∫_0^c f(1/x) dx` is moved to `s = 1/x`, where it
//! reads `∫_{1/c}^∞ f(s)/s² ds`. The integrand is then bounded near `0`
//! and all singular behaviour sits in the tail, which is summed in
//! geometric blocks `[2^k/c, 2^(k+1)/c]`. Polynomial pieces of degree ≤ 4
//! are integrated in closed form; everything else goes through adaptive
//! 15-point Gauss–Kronrod.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extreal;
use crate::generator::GeneratorSpec;
use crate::poly::{self, Piecewise};

/// Absolute tolerance for one integral.
pub const ABS_TOL: f64 = 1e-11;
/// Block contribution below which the tail is considered summed.
const BLOCK_TOL: f64 = 1e-13;
/// Blocks summed before the decay of the tail is judged.
const MAX_BLOCKS: usize = 60;
/// Highest polynomial degree integrated in closed form.
const CLOSED_FORM_MAX_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelMethod {
    ClosedForm,
    GaussKronrod,
    /// Geometric extrapolation of the remaining tail blocks.
    TailExtrapolation,
}

/// Contribution of one panel `[lo, hi]` in `s`-space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    pub lo: f64,
    #[serde(serialize_with = "extreal::inf_null::serialize")]
    pub hi: f64,
    #[serde(serialize_with = "extreal::serialize")]
    pub value: f64,
    pub method: PanelMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralResult {
    /// The integral; `±∞` when the tail diverges.
    #[serde(serialize_with = "extreal::serialize")]
    pub value: f64,
    pub converged: bool,
    pub abs_error_estimate: f64,
    pub divergence_flag: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub panels: Vec<Panel>,
}

impl IntegralResult {
    fn divergent(sign: f64, panels: Vec<Panel>) -> Self {
        IntegralResult {
            value: if sign < 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            converged: false,
            abs_error_estimate: f64::INFINITY,
            divergence_flag: true,
            panels,
        }
    }

    /// The value when it is finite and converged.
    pub fn finite(&self) -> Option<f64> {
        (self.converged && self.value.is_finite()).then_some(self.value)
    }
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod on a finite interval.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
        let (v, e) = gk15(f, a, b);
        if e <= tol.max(1e-15 * v.abs()) || depth >= 40 || b - a <= 4.0 * f64::EPSILON * a.abs() {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, m, 0.5 * tol, depth + 1);
        let (v2, e2) = rec(f, m, b, 0.5 * tol, depth + 1);
        (v1 + v2, e1 + e2)
    }
    if a == b {
        return (0.0, 0.0);
    }
    rec(f, a, b, tol, 0)
}

/// `∫_lo^hi g(s)/s² ds` for `0 < lo`, `hi ≤ ∞`. Reversed limits flip the sign.
pub fn integrate_s(g: &GeneratorSpec, lo: f64, hi: f64) -> Result<IntegralResult> {
    if !(lo > 0.0) || hi.is_nan() || !(hi > 0.0) {
        return Err(Error::Domain(format!(
            "s-space integral needs positive limits, got [{lo}, {hi}]"
        )));
    }
    if hi < lo {
        let mut r = integrate_s(g, hi, lo)?;
        r.value = -r.value;
        for p in &mut r.panels {
            p.value = -p.value;
        }
        return Ok(r);
    }
    if hi == lo {
        return Ok(IntegralResult {
            value: 0.0,
            converged: true,
            abs_error_estimate: 0.0,
            divergence_flag: false,
            panels: Vec::new(),
        });
    }
    Ok(match g.as_piecewise() {
        Some(pw) => integrate_piecewise(&pw, lo, hi),
        None => integrate_smooth(|s| g.value(s) / (s * s), lo, hi),
    })
}

fn integrate_piecewise(pw: &Piecewise, lo: f64, hi: f64) -> IntegralResult {
    let mut panels = Vec::new();
    let mut total = 0.0;
    let mut err = 0.0;
    let first = pw.piece_index_right(lo);
    for i in first..pw.pieces() {
        let (plo, phi) = pw.piece_interval(i);
        let a = plo.max(lo);
        let b = phi.min(hi);
        if a >= hi {
            break;
        }
        let coeffs = &pw.coeffs()[i];
        let deg = poly::degree(coeffs);
        if b.is_infinite() {
            // Polynomial tail: only constants are integrable against s⁻².
            if deg >= 1 {
                let lead = coeffs[deg];
                return IntegralResult::divergent(lead, panels);
            }
            let v = coeffs[0] / a;
            total += v;
            panels.push(Panel {
                lo: a,
                hi: b,
                value: v,
                method: PanelMethod::ClosedForm,
            });
            break;
        }
        if deg <= CLOSED_FORM_MAX_DEGREE {
            let v = poly::integral_over_s2(coeffs, a, b);
            total += v;
            err += 4.0 * f64::EPSILON * v.abs();
            panels.push(Panel {
                lo: a,
                hi: b,
                value: v,
                method: PanelMethod::ClosedForm,
            });
        } else {
            let f = |s: f64| poly::horner(coeffs, s) / (s * s);
            let r = integrate_smooth(f, a, b);
            total += r.value;
            err += r.abs_error_estimate;
            panels.extend(r.panels);
        }
    }
    IntegralResult {
        value: total,
        converged: true,
        abs_error_estimate: err,
        divergence_flag: false,
        panels,
    }
}

/// Geometric blocks from `lo`; the last one is cut at `hi` when finite.
fn integrate_smooth<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> IntegralResult {
    let mut panels = Vec::new();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut blocks: Vec<f64> = Vec::new();
    let mut a = lo;
    loop {
        let b = (2.0 * a).min(hi);
        let (v, e) = adaptive_gk(&f, a, b, 0.01 * BLOCK_TOL);
        total += v;
        err += e;
        panels.push(Panel {
            lo: a,
            hi: b,
            value: v,
            method: PanelMethod::GaussKronrod,
        });
        if !total.is_finite() {
            return IntegralResult::divergent(total, panels);
        }
        if b >= hi {
            break;
        }
        blocks.push(v);
        a = b;
        let k = blocks.len();
        if k >= 3 {
            let r = blocks[k - 1] / blocks[k - 2];
            if blocks[k - 1].abs() < BLOCK_TOL && (0.0..=0.9).contains(&r) {
                let tail = blocks[k - 1] * r / (1.0 - r);
                total += tail;
                err += tail.abs();
                panels.push(Panel {
                    lo: a,
                    hi: f64::INFINITY,
                    value: tail,
                    method: PanelMethod::TailExtrapolation,
                });
                break;
            }
        }
        if k >= MAX_BLOCKS {
            let r1 = blocks[k - 2] / blocks[k - 3];
            let r2 = blocks[k - 1] / blocks[k - 2];
            let decaying = r2.is_finite() && (0.0..1.0 - 1e-6).contains(&r2);
            let settled = (r2 - r1).abs() <= 1e-4 * (1.0 - r2);
            if decaying && settled {
                let tail = blocks[k - 1] * r2 / (1.0 - r2);
                total += tail;
                err += tail.abs() * (r2 - r1).abs() / (1.0 - r2) + f64::EPSILON * tail.abs();
                panels.push(Panel {
                    lo: a,
                    hi: f64::INFINITY,
                    value: tail,
                    method: PanelMethod::TailExtrapolation,
                });
                break;
            }
            let sign = blocks[k - 1].signum();
            return IntegralResult::divergent(sign, panels);
        }
    }
    IntegralResult {
        value: total,
        converged: err <= ABS_TOL.max(1e-12 * total.abs()),
        abs_error_estimate: err,
        divergence_flag: false,
        panels,
    }
}

/// `∫_0^c f(1/x) dx`, computed as `∫_{1/c}^∞ f(s)/s² ds`.
pub fn integral_f_inv(f: &GeneratorSpec, c: f64) -> Result<IntegralResult> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "upper limit must be positive, got {c}"
        )));
    }
    integrate_s(f, 1.0 / c, f64::INFINITY)
}

/// `∫_{c1}^{c2} f(1/x) dx` for `0 < c1, c2`.
pub fn integral_f_inv_between(f: &GeneratorSpec, c1: f64, c2: f64) -> Result<IntegralResult> {
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Domain(format!(
            "limits must be positive, got [{c1}, {c2}]"
        )));
    }
    integrate_s(f, 1.0 / c2, 1.0 / c1)
}

/// `∫_eps^c f(1/x) dx` directly in `x`, split at the images of the
/// generator's kinks and in geometric blocks. Independent of the
/// `s`-space route; used to cross-check it.
pub fn integral_direct(f: &GeneratorSpec, eps: f64, c: f64) -> Result<f64> {
    if !(eps > 0.0 && c > eps) {
        return Err(Error::Argument(format!(
            "direct integral needs 0 < eps < c, got eps = {eps}, c = {c}"
        )));
    }
    let mut cuts: Vec<f64> = f
        .kinks()
        .into_iter()
        .map(|t| 1.0 / t)
        .filter(|&x| x > eps && x < c)
        .collect();
    let mut x = eps;
    while 2.0 * x < c {
        x *= 2.0;
        cuts.push(x);
    }
    cuts.push(eps);
    cuts.push(c);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let h = |x: f64| f.value(1.0 / x);
    Ok(cuts
        .windows(2)
        .map(|w| adaptive_gk(&h, w[0], w[1], 1e-14).0)
        .sum())
}

/// `K(g)` of the envelope case `alpha > 0`:
/// `∫_a^∞ g(s)/s² ds` when `b = ∞`, else `g(b)/b + ∫_a^b g(s)/s² ds`.
pub fn k_of_g(g: &GeneratorSpec, a: f64, b: f64) -> Result<IntegralResult> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::Argument(format!("K(g) needs a in (0, 1], got {a}")));
    }
    if !(b >= 1.0) {
        return Err(Error::Argument(format!("K(g) needs b ≥ 1, got {b}")));
    }
    if b.is_infinite() {
        return integrate_s(g, a, f64::INFINITY);
    }
    let mut r = integrate_s(g, a, b)?;
    let head = g.value(b) / b;
    r.value += head;
    r.panels.push(Panel {
        lo: 0.0,
        hi: b,
        value: head,
        method: PanelMethod::ClosedForm,
    });
    Ok(r)
}
