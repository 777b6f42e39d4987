//! Grid certificates for class Φ, class 𝓕 and the `t^p g(t)` monotonicity
//! criterion.
//!
//! Membership on all of `(0, ∞)` cannot be decided numerically; every check
//! here is a statement about the supplied grid only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{Declared, GeneratorSpec};

/// Number of points in the default validation grid.
pub const DEFAULT_GRID_POINTS: usize = 2048;
/// Slack for non-strict inequalities, scaled by `max(1, |rhs|)`.
pub const INEQ_SLACK: f64 = 1e-10;
/// Margin required by "strictly increasing" checks.
pub const STRICT_MARGIN: f64 = 1e-12;
/// Upper bound on the number of `x` samples used for condition (ii) of 𝓕.
const F_II_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "Φ1")]
    Phi1,
    #[serde(rename = "Φ2")]
    Phi2,
    #[serde(rename = "Φ3a")]
    Phi3a,
    #[serde(rename = "Φ3b")]
    Phi3b,
    #[serde(rename = "Φ3c")]
    Phi3c,
    #[serde(rename = "F-i")]
    FI,
    #[serde(rename = "F-ii")]
    FIi,
    #[serde(rename = "LHQD")]
    Lhqd,
}

/// First violation found by a check. The condition requires `lhs ≤ rhs`
/// (`lhs < rhs` for strict monotonicity checks, where `lhs` and `rhs` are
/// consecutive values); `x` is the auxiliary parameter of condition F-ii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub condition_id: ConditionId,
    pub passed: bool,
    pub witness: Option<Witness>,
    /// Number of grid comparisons made; `0` when the condition was skipped.
    pub grid_size: usize,
}

impl ValidationReport {
    fn pass(condition_id: ConditionId, grid_size: usize) -> Self {
        ValidationReport {
            condition_id,
            passed: true,
            witness: None,
            grid_size,
        }
    }

    fn from_check(condition_id: ConditionId, grid_size: usize, witness: Option<Witness>) -> Self {
        ValidationReport {
            condition_id,
            passed: witness.is_none(),
            witness,
            grid_size,
        }
    }
}

/// `true` when every report passed.
pub fn all_passed(reports: &[ValidationReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

/// First failing report, if any.
pub fn first_failure(reports: &[ValidationReport]) -> Option<&ValidationReport> {
    reports.iter().find(|r| !r.passed)
}

/// `n` log-spaced points on `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2, "invalid log grid request");
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// 2048 log-spaced points on `[1e-6, 1e6]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, DEFAULT_GRID_POINTS)
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Argument("grid is empty".into()));
    }
    if grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::Argument(
            "grid points must be finite and strictly positive".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn slack(rhs: f64) -> f64 {
    INEQ_SLACK * rhs.abs().max(1.0)
}

fn sign_check(g: &GeneratorSpec, grid: &[f64], id: ConditionId) -> ValidationReport {
    let witness = grid.iter().find_map(|&t| {
        let v = g.value(t);
        let want = (t - 1.0).partial_cmp(&0.0);
        (v.partial_cmp(&0.0) != want).then_some(Witness {
            t,
            lhs: v,
            rhs: t - 1.0,
            x: None,
        })
    });
    ValidationReport::from_check(id, grid.len(), witness)
}

/// Checks conditions Φ1–Φ3c on `grid`.
///
/// Φ3b needs a declared `g0plus` when `alpha > 0`; Φ3c needs a declared
/// `q_inf` when `beta < ∞`. Fields still set to `estimate` are a
/// configuration error: resolve them first with
/// [`GeneratorSpec::resolve_limits`].
pub fn validate_phi(g: &GeneratorSpec, grid: &[f64]) -> Result<Vec<ValidationReport>> {
    check_grid(grid)?;
    let (alpha, beta) = (g.alpha(), g.beta());
    let g0plus = if alpha > 0.0 {
        Some(g.g0plus().value().ok_or_else(|| {
            Error::Config(
                "g0plus is 'estimate'; run the limit estimators (resolve_limits) before validating Φ3b"
                    .into(),
            )
        })?)
    } else {
        None
    };
    let q_inf = if beta.is_finite() {
        Some(g.q_inf().value().ok_or_else(|| {
            Error::Config(
                "q_inf is 'estimate'; run the limit estimators (resolve_limits) before validating Φ3c"
                    .into(),
            )
        })?)
    } else {
        None
    };

    let mut reports = vec![sign_check(g, grid, ConditionId::Phi1)];

    let phi2 = grid.iter().find_map(|&t| {
        let (lhs, rhs) = (g.value(t), t - 1.0);
        (lhs > rhs + slack(rhs)).then_some(Witness {
            t,
            lhs,
            rhs,
            x: None,
        })
    });
    reports.push(ValidationReport::from_check(
        ConditionId::Phi2,
        grid.len(),
        phi2,
    ));

    let inner: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|&t| t > alpha && t < beta)
        .collect();
    let (w, n) = midpoint_concavity(g, &inner);
    reports.push(ValidationReport::from_check(ConditionId::Phi3a, n, w));

    reports.push(match g0plus {
        None => ValidationReport::pass(ConditionId::Phi3b, 0),
        Some(g0) => {
            let ga = g.value(alpha);
            let pts: Vec<f64> = grid.iter().copied().filter(|&t| t <= alpha).collect();
            let w = pts.iter().find_map(|&t| {
                let lhs = g.value(t);
                let rhs = if t == alpha {
                    ga
                } else {
                    (t / alpha) * ga + ((alpha - t) / alpha) * g0
                };
                (lhs > rhs + slack(rhs)).then_some(Witness {
                    t,
                    lhs,
                    rhs,
                    x: None,
                })
            });
            ValidationReport::from_check(ConditionId::Phi3b, pts.len(), w)
        }
    });

    reports.push(match q_inf {
        None => ValidationReport::pass(ConditionId::Phi3c, 0),
        Some(q) => {
            let gb = g.value(beta);
            let pts: Vec<f64> = grid.iter().copied().filter(|&t| t >= beta).collect();
            let w = pts.iter().find_map(|&t| {
                let (lhs, rhs) = (g.value(t), gb + q * (t - beta));
                (lhs > rhs + slack(rhs)).then_some(Witness {
                    t,
                    lhs,
                    rhs,
                    x: None,
                })
            });
            ValidationReport::from_check(ConditionId::Phi3c, pts.len(), w)
        }
    });
    Ok(reports)
}

/// Concavity on consecutive grid triples: `g(t₂)` must not fall below the
/// chord through `t₁, t₃`. For sampled data this is equivalent to checking
/// all triples.
pub(crate) fn midpoint_concavity(g: &GeneratorSpec, pts: &[f64]) -> (Option<Witness>, usize) {
    if pts.len() < 3 {
        return (None, 0);
    }
    let vals: Vec<f64> = pts.iter().map(|&t| g.value(t)).collect();
    let w = (1..pts.len() - 1).find_map(|i| {
        let (t1, t2, t3) = (pts[i - 1], pts[i], pts[i + 1]);
        let lam = (t3 - t2) / (t3 - t1);
        let chord = lam * vals[i - 1] + (1.0 - lam) * vals[i + 1];
        let scale = vals[i - 1].abs().max(vals[i + 1].abs());
        (chord > vals[i] + slack(scale)).then_some(Witness {
            t: t2,
            lhs: chord,
            rhs: vals[i],
            x: None,
        })
    });
    (w, pts.len() - 2)
}

/// Checks the class-𝓕 conditions on `grid`: (i) the sign condition and
/// (ii) strict increase of `t ↦ g(t)/g(t/x)` on `(x, 1)` for up to 64
/// values of `x` drawn from the grid points in `(0, 1)`.
pub fn validate_script_f(g: &GeneratorSpec, grid: &[f64]) -> Result<Vec<ValidationReport>> {
    check_grid(grid)?;
    let sign = sign_check(g, grid, ConditionId::FI);

    let below: Vec<f64> = grid.iter().copied().filter(|&t| t < 1.0).collect();
    let stride = below.len().div_ceil(F_II_SAMPLES).max(1);
    let mut comparisons = 0;
    let mut witness = None;
    'outer: for &x in below.iter().step_by(stride) {
        let mut prev: Option<(f64, f64)> = None;
        for &t in below.iter().filter(|&&t| t > x) {
            let den = g.value(t / x);
            if den == 0.0 {
                continue;
            }
            let r = g.value(t) / den;
            if let Some((_, rp)) = prev {
                comparisons += 1;
                if !(r > rp + STRICT_MARGIN) {
                    witness = Some(Witness {
                        t,
                        lhs: rp,
                        rhs: r,
                        x: Some(x),
                    });
                    break 'outer;
                }
            }
            prev = Some((t, r));
        }
    }
    Ok(vec![
        sign,
        ValidationReport::from_check(ConditionId::FIi, comparisons, witness),
    ])
}

/// Sufficient certificate for class 𝓕: `t^p g(t)` nondecreasing on the grid
/// and strictly increasing on the grid points in `(0, 1)`. A pass certifies
/// membership; a failure says nothing about it.
pub fn check_lhqd(g: &GeneratorSpec, p: f64, grid: &[f64]) -> Result<ValidationReport> {
    check_grid(grid)?;
    if !p.is_finite() {
        return Err(Error::Argument(format!("exponent must be finite, got {p}")));
    }
    let f = |t: f64| t.powf(p) * g.value(t);
    let mut witness = None;
    let mut prev = f(grid[0]);
    for w in grid.windows(2) {
        let t = w[1];
        let cur = f(t);
        let violated = if t < 1.0 {
            !(cur > prev + STRICT_MARGIN)
        } else {
            cur < prev - slack(prev)
        };
        if violated {
            witness = Some(Witness {
                t,
                lhs: prev,
                rhs: cur,
                x: None,
            });
            break;
        }
        prev = cur;
    }
    // The certificate also needs the sign condition.
    let sign = sign_check(g, grid, ConditionId::Lhqd);
    Ok(ValidationReport::from_check(
        ConditionId::Lhqd,
        grid.len().saturating_sub(1),
        witness.or(sign.witness),
    ))
}

/// Resolves `estimate` fields and runs [`validate_phi`] on the default grid,
/// failing with the first violated condition.
pub(crate) fn require_phi(g: &GeneratorSpec) -> Result<GeneratorSpec> {
    let resolved = resolve_needed(g)?;
    let reports = validate_phi(&resolved, &default_grid())?;
    if let Some(bad) = first_failure(&reports) {
        return Err(Error::Precondition(format!(
            "generator is not in class Φ on the default grid: {:?} fails at {:?}",
            bad.condition_id, bad.witness
        )));
    }
    Ok(resolved)
}

/// Resolves only the limit fields that the class-Φ checks and the envelope
/// construction need.
pub(crate) fn resolve_needed(g: &GeneratorSpec) -> Result<GeneratorSpec> {
    let mut out = g.clone();
    if g.alpha() > 0.0 && g.g0plus() == Declared::Estimate {
        out = out.with_g0plus(Declared::Value(g.limsup_at_zero()?))?;
    }
    if g.beta().is_finite() && g.q_inf() == Declared::Estimate {
        out = out.with_q_inf(Declared::Value(g.limsup_slope_at_inf()?))?;
    }
    Ok(out)
}

/// Whether the generator carries a class-𝓕 certificate: closed-form
/// concavity with the sign condition, the `t^p g(t)` monotonicity criterion
/// for `p ∈ {0, -1, 1}`,
/// or a passing [`validate_script_f`] on the default grid.
pub fn script_f_certificate(g: &GeneratorSpec) -> Result<bool> {
    if g.is_concave_builtin() {
        return Ok(true);
    }
    let grid = default_grid();
    // Any exponent works; t^-1 g(t) separates values near 0 when g is flat
    // there.
    for p in [0.0, -1.0, 1.0] {
        if check_lhqd(g, p, &grid)?.passed {
            return Ok(true);
        }
    }
    Ok(all_passed(&validate_script_f(g, &grid)?))
}

/// Whether `g` is concave with the correct sign on the default grid.
pub fn concavity_certificate(g: &GeneratorSpec) -> bool {
    if g.is_concave_builtin() {
        return true;
    }
    let grid = default_grid();
    let mut pts = grid.clone();
    pts.extend(g.kinks());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    midpoint_concavity(g, &pts).0.is_none() && sign_check(g, &grid, ConditionId::Phi1).passed
}
