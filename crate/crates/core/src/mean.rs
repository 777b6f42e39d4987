//! Homogeneous quasideviation means: `y = 𝓔_f(x)` solves `Σ f(xᵢ/y) = 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::{GeneratorSpec, Kind};
use crate::roots::bisect;
use crate::validate;

/// Relative bracket width at which the mean solver stops.
pub const MEAN_REL_TOL: f64 = 4.0 * f64::EPSILON;
/// Number of log-spaced probes used to find the first sign change when the
/// generator carries no 𝓕 certificate.
const UNCERTIFIED_PROBES: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct MeanRequest {
    pub generator: GeneratorSpec,
    pub data: Vec<f64>,
}

impl MeanRequest {
    pub fn new(generator: GeneratorSpec, data: Vec<f64>) -> Result<Self> {
        check_data(&data)?;
        Ok(MeanRequest { generator, data })
    }
}

pub(crate) fn check_data(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Domain("mean needs at least one data point".into()));
    }
    if let Some(bad) = x.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Domain(format!(
            "data must be positive and finite, got {bad}"
        )));
    }
    Ok(())
}

/// A mean solver bound to one generator, with its class-𝓕 certificate
/// computed once.
#[derive(Debug, Clone)]
pub struct QdMean {
    g: GeneratorSpec,
    certified: bool,
}

impl QdMean {
    pub fn new(g: &GeneratorSpec) -> Result<Self> {
        Ok(QdMean {
            g: g.clone(),
            certified: validate::script_f_certificate(g)?,
        })
    }

    /// Whether the generator passed the class-𝓕 checks. Without the
    /// certificate the root may not be unique; the first sign change from
    /// the left is returned.
    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.g
    }

    /// `Σ f(xᵢ/y)`.
    pub fn residual(&self, x: &[f64], y: f64) -> f64 {
        x.iter().map(|&v| self.g.value(v / y)).sum()
    }

    pub fn mean(&self, x: &[f64]) -> Result<f64> {
        check_data(x)?;
        let (lo, hi) = min_max(x);
        if lo == hi {
            return Ok(lo);
        }
        let f = |y: f64| self.residual(x, y);
        let (mut blo, mut bhi) = (lo, hi);
        if !self.certified {
            // First sign change from the left among log-spaced probes.
            let probes = validate::log_grid(lo, hi, UNCERTIFIED_PROBES);
            let mut prev = probes[0];
            let mut found = false;
            for &y in &probes[1..] {
                if f(y) <= 0.0 {
                    (blo, bhi) = (prev, y);
                    found = true;
                    break;
                }
                prev = y;
            }
            if !found {
                return Err(no_sign_change(lo, hi, f(lo), f(hi)));
            }
        }
        let (flo, fhi) = (f(blo), f(bhi));
        if flo < 0.0 || fhi > 0.0 {
            return Err(no_sign_change(blo, bhi, flo, fhi));
        }
        bisect(f, blo, bhi, MEAN_REL_TOL, &mut Vec::new())
    }
}

fn no_sign_change(lo: f64, hi: f64, flo: f64, fhi: f64) -> Error {
    Error::Solver(format!(
        "Σ f(x/y) has no sign change on [{lo}, {hi}] (values {flo}, {fhi}); \
         the generator violates the class conditions"
    ))
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        })
}

/// `𝓔_f(x)` by sign-change bisection on `[min x, max x]`.
pub fn mean_generic(req: &MeanRequest) -> Result<f64> {
    QdMean::new(&req.generator)?.mean(&req.data)
}

/// Power mean `((1/n) Σ xᵢ^p)^(1/p)`, geometric mean for `p = 0`.
pub fn power_mean(p: f64, x: &[f64]) -> Result<f64> {
    check_data(x)?;
    let n = x.len() as f64;
    if p == 0.0 {
        return Ok((x.iter().map(|v| v.ln()).sum::<f64>() / n).exp());
    }
    // log-sum-exp keeps large |p| in range.
    let logs: Vec<f64> = x.iter().map(|v| p * v.ln()).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = logs.iter().map(|l| (l - m).exp()).sum();
    Ok(((m + (s / n).ln()) / p).exp())
}

/// Mean of the truncated linear generator together with the number `k`
/// of unclipped terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedMean {
    pub y: f64,
    pub k: usize,
}

/// Exact finite algorithm for `f = min(t - 1, M)`: with `x` sorted and
/// `S_k` the prefix sums, `k` is the largest index with `k > nM/(M+1)` and
/// `x_k ≤ S_k / (k - nM/(M+1))`, and `y = S_k / (k(M+1) - nM)`.
pub fn mean_truncated_detail(m: f64, x: &[f64]) -> Result<TruncatedMean> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Argument(format!(
            "M must be positive and finite, got {m}"
        )));
    }
    check_data(x)?;
    let mut xs = x.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let mut prefix = Vec::with_capacity(n);
    let mut s = 0.0;
    for &v in &xs {
        s += v;
        prefix.push(s);
    }
    let nf = n as f64;
    let thr = nf * m / (m + 1.0);
    for k in (1..=n).rev() {
        let kf = k as f64;
        if kf <= thr {
            break;
        }
        let sk = prefix[k - 1];
        if xs[k - 1] <= sk / (kf - thr) {
            return Ok(TruncatedMean {
                y: sk / (kf * (m + 1.0) - nf * m),
                k,
            });
        }
    }
    Err(Error::Consistency(format!(
        "no admissible index for the truncated mean with M = {m} and n = {n}"
    )))
}

pub fn mean_truncated(m: f64, x: &[f64]) -> Result<f64> {
    mean_truncated_detail(m, x).map(|r| r.y)
}

/// Closed-form or exact evaluation where one exists, bisection otherwise.
pub fn mean_fast(solver: &QdMean, x: &[f64]) -> Result<f64> {
    match solver.generator().kind() {
        Kind::Power { p } => power_mean(*p, x),
        Kind::Log => power_mean(0.0, x),
        Kind::TruncatedLinear { m } => mean_truncated(*m, x),
        Kind::Piecewise(_) => solver.mean(x),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Internality,
    Homogeneity,
    Monotonicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub axiom: Axiom,
    pub data: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    /// Monotonicity is only checked for generators with a concavity
    /// certificate.
    pub monotonicity_checked: bool,
    pub counterexample: Option<Counterexample>,
}

/// Relative tolerance of the homogeneity check.
pub const HOMOGENEITY_TOL: f64 = 1e-10;

/// Internality, homogeneity and (for concave generators) coordinatewise
/// monotonicity on the request data followed by `trials` seeded random
/// vectors of length 1..=16 with entries log-uniform in `[1e-3, 1e3]`.
pub fn check_mean_axioms(req: &MeanRequest, trials: usize, seed: u64) -> Result<AxiomReport> {
    let solver = QdMean::new(&req.generator)?;
    let monotone = validate::concavity_certificate(&req.generator);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AxiomReport {
        trials,
        seed,
        passed: true,
        monotonicity_checked: monotone,
        counterexample: None,
    };
    let mut vectors = vec![req.data.clone()];
    for _ in 0..trials {
        let n = rng.gen_range(1..=16);
        vectors.push(
            (0..n)
                .map(|_| 10f64.powf(rng.gen_range(-3.0..3.0)))
                .collect(),
        );
    }
    for x in vectors {
        let lambda = 10f64.powf(rng.gen_range(-2.0..2.0));
        let bump = (rng.gen_range(0..x.len()), rng.gen_range(0.0..1.0));
        if let Some(c) = axioms_on(&solver, &x, lambda, bump, monotone)? {
            report.passed = false;
            report.counterexample = Some(c);
            break;
        }
    }
    Ok(report)
}

fn axioms_on(
    solver: &QdMean,
    x: &[f64],
    lambda: f64,
    (i, u): (usize, f64),
    monotone: bool,
) -> Result<Option<Counterexample>> {
    let fail = |axiom, detail: String| {
        Ok(Some(Counterexample {
            axiom,
            data: x.to_vec(),
            detail,
        }))
    };
    let y = solver.mean(x)?;
    let (lo, hi) = min_max(x);
    if y < lo * (1.0 - 1e-14) || y > hi * (1.0 + 1e-14) {
        return fail(Axiom::Internality, format!("mean {y} outside [{lo}, {hi}]"));
    }
    let scaled: Vec<f64> = x.iter().map(|v| lambda * v).collect();
    let ys = solver.mean(&scaled)?;
    if (ys - lambda * y).abs() > HOMOGENEITY_TOL * lambda * y {
        return fail(
            Axiom::Homogeneity,
            format!(
                "mean(λx) = {ys} but λ·mean(x) = {} for λ = {lambda}",
                lambda * y
            ),
        );
    }
    if monotone {
        let mut bumped = x.to_vec();
        bumped[i] *= 1.0 + u;
        let yb = solver.mean(&bumped)?;
        if yb < y * (1.0 - 1e-12) {
            return fail(
                Axiom::Monotonicity,
                format!(
                    "raising x[{i}] by a factor {} lowered the mean from {y} to {yb}",
                    1.0 + u
                ),
            );
        }
    }
    Ok(None)
}
