//! Polynomials and piecewise polynomials on `(0, ∞)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Breakpoint continuity tolerance, scaled by `max(1, |value|)`.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// Evaluates `Σ c_j t^j` (ascending coefficients) by Horner's rule.
pub fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Derivative of `Σ c_j t^j` at `t`.
pub fn horner_deriv(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (j, &c)| acc * t + j as f64 * c)
}

/// Degree ignoring trailing zero coefficients (`0` for the zero polynomial).
pub fn degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
}

/// Antiderivative of `p(s) / s²` evaluated at `s > 0`.
///
/// `∫ Σ c_j s^(j-2) ds = -c_0/s + c_1 ln s + Σ_{j≥2} c_j s^(j-1)/(j-1)`.
pub fn antideriv_over_s2(coeffs: &[f64], s: f64) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        acc += match j {
            0 => -c / s,
            1 => c * s.ln(),
            _ => c * s.powi(j as i32 - 1) / (j as f64 - 1.0),
        };
    }
    acc
}

/// `∫_lo^hi p(s)/s² ds` in closed form for finite `0 < lo ≤ hi`.
///
/// The `c_1` term is grouped as `c_1 ln(hi/lo)` to avoid cancellation.
pub fn integral_over_s2(coeffs: &[f64], lo: f64, hi: f64) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        acc += match j {
            0 => c * (hi - lo) / (lo * hi),
            1 => c * (hi / lo).ln(),
            _ => {
                let k = j as i32 - 1;
                c * (hi.powi(k) - lo.powi(k)) / k as f64
            }
        };
    }
    acc
}

/// A continuous piecewise polynomial on `(0, ∞)`.
///
/// With breakpoints `t_1 < ... < t_k`, `coeffs[0]` is active on `(0, t_1]`,
/// `coeffs[i]` on `[t_i, t_{i+1}]` and `coeffs[k]` on `[t_k, ∞)`.
/// Coefficients are in ascending degree order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct Piecewise {
    breakpoints: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawPiecewise {
    breakpoints: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl TryFrom<RawPiecewise> for Piecewise {
    type Error = Error;

    fn try_from(raw: RawPiecewise) -> Result<Self> {
        Piecewise::new(raw.breakpoints, raw.coeffs)
    }
}

impl Piecewise {
    pub fn new(breakpoints: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.len() != breakpoints.len() + 1 {
            return Err(Error::Config(format!(
                "piecewise generator needs {} coefficient lists for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                coeffs.len()
            )));
        }
        if breakpoints.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(
                "breakpoints must be finite and positive".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Config(
                "every piece needs at least one finite coefficient".into(),
            ));
        }
        for (i, &t) in breakpoints.iter().enumerate() {
            let left = horner(&coeffs[i], t);
            let right = horner(&coeffs[i + 1], t);
            if (left - right).abs() > CONTINUITY_TOL * left.abs().max(right.abs()).max(1.0) {
                return Err(Error::Config(format!(
                    "piecewise generator is discontinuous at t = {t}: {left} vs {right}"
                )));
            }
        }
        Ok(Piecewise {
            breakpoints,
            coeffs,
        })
    }

    /// A single polynomial on all of `(0, ∞)`.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        Piecewise::new(Vec::new(), vec![coeffs])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len()
    }

    /// Index of the piece used for evaluation at `t` (left-closed convention
    /// at breakpoints, which is immaterial by continuity).
    pub fn piece_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b < t)
    }

    /// Index of the piece active immediately to the right of `t`.
    pub fn piece_index_right(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    /// Interval `(lo, hi)` covered by piece `i`; `lo = 0` for the first and
    /// `hi = ∞` for the last.
    pub fn piece_interval(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { 0.0 } else { self.breakpoints[i - 1] };
        let hi = self.breakpoints.get(i).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    pub fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs[self.piece_index(t)], t)
    }

    pub fn left_derivative(&self, t: f64) -> f64 {
        horner_deriv(&self.coeffs[self.piece_index(t)], t)
    }

    pub fn right_derivative(&self, t: f64) -> f64 {
        horner_deriv(&self.coeffs[self.piece_index_right(t)], t)
    }

    pub fn left_tail(&self) -> &[f64] {
        &self.coeffs[0]
    }

    pub fn right_tail(&self) -> &[f64] {
        &self.coeffs[self.coeffs.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_derivative() {
        let c = [2.8, -1.5, 0.3];
        assert!((horner(&c, 2.0) - 1.0).abs() < 1e-15);
        assert!((horner(&c, 3.0) - 1.0).abs() < 1e-14);
        assert!((horner_deriv(&c, 2.0) + 0.3).abs() < 1e-15);
        assert_eq!(degree(&[1.0, 0.0, 0.0]), 0);
        assert_eq!(degree(&[1.0, 2.0, 0.0]), 1);
    }

    #[test]
    fn closed_form_integral_matches_antiderivative() {
        let c = [-1.0, 0.5, 0.25, -0.125];
        let direct = integral_over_s2(&c, 0.5, 3.0);
        let anti = antideriv_over_s2(&c, 3.0) - antideriv_over_s2(&c, 0.5);
        assert!((direct - anti).abs() < 1e-14);
        // ∫_1^2 (s-1)/s² ds = ln 2 - 1/2
        let v = integral_over_s2(&[-1.0, 1.0], 1.0, 2.0);
        assert!((v - (2f64.ln() - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn rejects_discontinuity_and_bad_shapes() {
        assert!(Piecewise::new(vec![1.0], vec![vec![-1.0], vec![0.0, 1.0]]).is_err());
        assert!(Piecewise::new(vec![1.0], vec![vec![-1.0, 1.0]]).is_err());
        assert!(Piecewise::new(vec![2.0, 1.0], vec![vec![0.0]; 3]).is_err());
        assert!(Piecewise::new(vec![-1.0], vec![vec![0.0]; 2]).is_err());
    }

    #[test]
    fn one_sided_pieces_at_breakpoint() {
        let pw = Piecewise::new(vec![2.0], vec![vec![-1.0, 1.0], vec![1.0]]).unwrap();
        assert_eq!(pw.left_derivative(2.0), 1.0);
        assert_eq!(pw.right_derivative(2.0), 0.0);
        assert_eq!(pw.eval(2.0), 1.0);
        assert_eq!(pw.piece_interval(1), (2.0, f64::INFINITY));
    }

    #[test]
    fn json_shape() {
        let pw: Piecewise =
            serde_json::from_str(r#"{"breakpoints":[2.0],"coeffs":[[-1.0,1.0],[1.0]]}"#).unwrap();
        assert_eq!(pw.eval(5.0), 1.0);
        let bad = serde_json::from_str::<Piecewise>(
            r#"{"breakpoints":[2.0],"coeffs":[[-1.0,1.0],[0.0]]}"#,
        );
        assert!(bad.is_err());
    }
}
