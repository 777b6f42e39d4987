//! Bracketed scalar root finding and one-dimensional maximization.

use serde::Serialize;

use crate::error::{Error, Result};

/// One evaluation made while bracketing or bisecting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketStep {
    pub lo: f64,
    pub hi: f64,
    pub x: f64,
    pub fx: f64,
}

/// Finds a sign change of `f` on `[lo, hi]`, assuming `f(lo) > 0 ≥ f(hi)`
/// or the reverse. Iterates until the bracket is below `rel_tol · |hi|` or
/// stops shrinking in floating point.
pub fn bisect<F>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    history: &mut Vec<BracketStep>,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let flo = f(lo);
    let fhi = f(hi);
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::Solver(format!(
            "residual is NaN at bracket ends [{lo}, {hi}]"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Solver(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let lo_positive = flo > 0.0;
    for _ in 0..400 {
        let mid = if hi / lo > 4.0 && lo > 0.0 {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let fm = f(mid);
        history.push(BracketStep {
            lo,
            hi,
            x: mid,
            fx: fm,
        });
        if fm.is_nan() {
            return Err(Error::Solver(format!("residual is NaN at {mid}")));
        }
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Starting from `start` where `f > 0`, doubles `hi` (from `first`) until
/// `f(hi) ≤ 0`. Returns `(lo, hi)` with the sign change inside.
pub fn bracket_by_doubling<F>(
    mut f: F,
    start: f64,
    first: f64,
    cap: f64,
    history: &mut Vec<BracketStep>,
) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let f0 = f(start);
    history.push(BracketStep {
        lo: start,
        hi: start,
        x: start,
        fx: f0,
    });
    if !(f0 > 0.0) {
        return Err(Error::Solver(format!(
            "expected a positive residual at {start}, got {f0}"
        )));
    }
    let mut lo = start;
    let mut hi = first.max(start);
    loop {
        let fh = f(hi);
        history.push(BracketStep {
            lo,
            hi,
            x: hi,
            fx: fh,
        });
        if fh.is_nan() {
            return Err(Error::Solver(format!("residual is NaN at {hi}")));
        }
        if fh <= 0.0 {
            return Ok((lo, hi));
        }
        if hi >= cap {
            return Err(Error::Solver(format!(
                "no sign change below {cap}; the root is suspected to be infinite"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(cap);
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a local maximum of `f` on `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Smallest maximizer of a continuous `f` on `[lo, hi]`.
///
/// A 512-point scan locates the basin, golden-section refinement polishes
/// the maximum, and a final bisection moves to the left end of any plateau
/// of maximal values. `slope`, when given, is a one-sided derivative of `f`
/// used to pin interior stationary points more sharply than golden section.
pub fn argmax_smallest<F, D>(f: F, slope: Option<D>, lo: f64, hi: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    const SCAN: usize = 512;
    if hi <= lo {
        return (lo, f(lo));
    }
    let h = (hi - lo) / (SCAN - 1) as f64;
    let node = |i: usize| if i == SCAN - 1 { hi } else { lo + h * i as f64 };
    let values: Vec<f64> = (0..SCAN).map(|i| f(node(i))).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-14 * (1.0 + max.abs());
    let first = values.iter().position(|&v| v >= max - tie).unwrap_or(0);

    let left = node(first.saturating_sub(1));
    let right = node((first + 1).min(SCAN - 1));
    let (mut best_t, mut best_v) = (node(first), values[first]);
    let (gt, gv) = golden_max(&f, left, right, 1e-12 * (1.0 + right.abs()));
    if gv > best_v + tie {
        best_t = gt;
        best_v = gv;
    }
    if let Some(ds) = slope {
        // Pin an interior stationary point by bisection on the slope sign.
        let step = 4.0 * h;
        let (a, b) = ((best_t - step).max(lo), (best_t + step).min(hi));
        if ds(a) > 0.0 && ds(b) < 0.0 {
            let (mut a, mut b) = (a, b);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if ds(m) > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            // `b` is the smallest node seen with a nonpositive right slope.
            let t = b;
            let v = f(t);
            if v >= best_v - tie {
                best_t = t;
                best_v = v.max(best_v);
            }
        }
    }
    // Leftmost point of a plateau of maximal values. Only attempted when the
    // next scan node is also maximal; near a smooth peak the level set
    // `f ≥ max - tie` has width ~sqrt(tie) and must not shift the result.
    let plateau = first + 1 < SCAN && values[first + 1] >= max - tie;
    if !plateau {
        return (best_t, best_v);
    }
    let flat = 4.0 * f64::EPSILON * (1.0 + max.abs());
    let a = left.min(best_t);
    if f(a) >= best_v - flat {
        return (a, f(a));
    }
    let (mut a, mut b) = (a, node(first).min(best_t));
    if f(b) < best_v - flat {
        b = best_t;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if f(m) >= best_v - flat {
            b = m;
        } else {
            a = m;
        }
    }
    (b, f(b))
}
