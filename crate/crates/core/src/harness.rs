//! Empirical Hardy ratios `Σ_{n≤N} 𝓔(x₁..xₙ) / Σ_{n≤N} xₙ` and sweeps.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extreal;
use crate::generator::{GeneratorSpec, Kind};
use crate::hardy::{hardy_auto, Route};
use crate::mean::{check_data, QdMean};
use crate::presets::parse_generator;

/// Largest prefix length for generators without a fast path.
pub const GENERIC_N_CAP: usize = 4096;
/// Slack of the domination test.
pub const DOMINATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    /// `scale · r^(n-1)`.
    Geometric {
        ratio: f64,
    },
    /// `scale · n^(-s)`.
    PowerDecay {
        exponent: f64,
    },
    Constant,
    /// First column of a CSV file, truncated to the requested length.
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub kind: SequenceKind,
    pub length: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl SequenceKind {
    /// `geometric:<r>`, `power_decay:<s>`, `constant` or `csv:<path>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (text, None),
        };
        let number = || -> Result<f64> {
            let p = param
                .ok_or_else(|| Error::Parse(format!("sequence '{name}' needs a parameter")))?;
            p.trim()
                .parse()
                .map_err(|e| Error::Parse(format!("bad parameter '{p}' for '{name}': {e}")))
        };
        let kind = match name {
            "geometric" => SequenceKind::Geometric { ratio: number()? },
            "power_decay" => SequenceKind::PowerDecay { exponent: number()? },
            "constant" => SequenceKind::Constant,
            "csv" => SequenceKind::Csv {
                path: PathBuf::from(param.ok_or_else(|| Error::Parse("csv sequence needs a path".into()))?),
            },
            _ => {
                return Err(Error::Parse(format!(
                    "unknown sequence '{text}' (expected geometric:<r>, power_decay:<s>, constant or csv:<path>)"
                )))
            }
        };
        kind.check()?;
        Ok(kind)
    }

    fn check(&self) -> Result<()> {
        match self {
            SequenceKind::Geometric { ratio } if !(*ratio > 0.0 && *ratio < 1.0) => Err(
                Error::Argument(format!("geometric ratio must lie in (0, 1), got {ratio}")),
            ),
            SequenceKind::PowerDecay { exponent } if !(*exponent > 1.0 && exponent.is_finite()) => {
                Err(Error::Argument(format!(
                    "power_decay exponent must exceed 1, got {exponent}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Short label used in sweep output.
    pub fn label(&self) -> String {
        match self {
            SequenceKind::Geometric { ratio } => format!("geometric:{ratio}"),
            SequenceKind::PowerDecay { exponent } => format!("power_decay:{exponent}"),
            SequenceKind::Constant => "constant".into(),
            SequenceKind::Csv { path } => format!("csv:{}", path.display()),
        }
    }
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, length: usize, scale: f64) -> Result<Self> {
        let s = SequenceSpec {
            kind,
            length,
            scale,
        };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        self.kind.check()?;
        if self.length == 0 {
            return Err(Error::Argument("sequence length must be at least 1".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Argument(format!(
                "scale must be positive, got {}",
                self.scale
            )));
        }
        Ok(())
    }

    /// The terms `x₁..x_N`. Geometric terms are floored at the smallest
    /// normal double so long sequences stay positive.
    pub fn terms(&self) -> Result<Vec<f64>> {
        self.check()?;
        let n = self.length;
        let s = self.scale;
        let x: Vec<f64> = match &self.kind {
            SequenceKind::Geometric { ratio } => (0..n)
                .map(|i| (s * ratio.powi(i as i32)).max(f64::MIN_POSITIVE))
                .collect(),
            SequenceKind::PowerDecay { exponent } => (1..=n)
                .map(|i| (s * (i as f64).powf(-exponent)).max(f64::MIN_POSITIVE))
                .collect(),
            SequenceKind::Constant => vec![s; n],
            SequenceKind::Csv { path } => {
                let mut v = read_column(path)?;
                v.truncate(n);
                v.iter_mut().for_each(|x| *x *= s);
                v
            }
        };
        check_data(&x)?;
        Ok(x)
    }
}

/// First column of a CSV file; an optional non-numeric first line is skipped.
pub fn read_column(path: &std::path::Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let Some(field) = rec.get(0).map(str::trim).filter(|f| !f.is_empty()) else {
            continue;
        };
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            // A non-numeric first line is a header.
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::Parse(format!(
                    "{}:{}: '{field}': {e}",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub n: usize,
    /// `(N', ratio)` at powers of two and at `N`.
    pub partial_ratios: Vec<(usize, f64)>,
    pub final_ratio: f64,
    #[serde(serialize_with = "extreal::serialize")]
    pub theoretical_constant: f64,
    pub theoretical_route: Route,
    pub dominated: bool,
}

/// Prefix means `𝓔(x₁..xₙ)` for `n = 1..=N`.
pub fn prefix_means(g: &GeneratorSpec, x: &[f64]) -> Result<Vec<f64>> {
    check_data(x)?;
    match g.kind() {
        Kind::Power { p } => Ok(prefix_power_means(*p, x)),
        Kind::Log => Ok(prefix_power_means(0.0, x)),
        Kind::TruncatedLinear { m } => prefix_truncated_means(*m, x),
        Kind::Piecewise(_) => {
            if x.len() > GENERIC_N_CAP {
                return Err(Error::Argument(format!(
                    "prefix means for piecewise generators are capped at N = {GENERIC_N_CAP}, got {}",
                    x.len()
                )));
            }
            let solver = QdMean::new(g)?;
            (1..=x.len()).map(|n| solver.mean(&x[..n])).collect()
        }
    }
}

/// Running power means via a rescaled sum of `exp(p ln xᵢ)`.
fn prefix_power_means(p: f64, x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    if p == 0.0 {
        let mut acc = 0.0;
        for (i, v) in x.iter().enumerate() {
            acc += v.ln();
            out.push((acc / (i + 1) as f64).exp());
        }
        return out;
    }
    let mut m = f64::NEG_INFINITY;
    let mut s = 0.0;
    for (i, v) in x.iter().enumerate() {
        let l = p * v.ln();
        if l > m {
            s = s * (m - l).exp() + 1.0;
            m = l;
        } else {
            s += (l - m).exp();
        }
        out.push(((m + (s / (i + 1) as f64).ln()) / p).exp());
    }
    out
}

/// Fenwick tree over value ranks holding counts and sums.
struct Fenwick {
    cnt: Vec<u32>,
    sum: Vec<f64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            cnt: vec![0; n + 1],
            sum: vec![0.0; n + 1],
        }
    }

    fn add(&mut self, rank: usize, v: f64) {
        let mut i = rank + 1;
        while i < self.cnt.len() {
            self.cnt[i] += 1;
            self.sum[i] += v;
            i += i & i.wrapping_neg();
        }
    }

    /// Rank of the `k`-th smallest inserted element and the sum of the
    /// `k - 1` smaller ones.
    fn kth(&self, k: u32) -> (usize, f64) {
        let n = self.cnt.len() - 1;
        let mut pos = 0;
        let mut seen = 0;
        let mut acc = 0.0;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= n && seen + self.cnt[next] < k {
                pos = next;
                seen += self.cnt[next];
                acc += self.sum[next];
            }
            step >>= 1;
        }
        (pos, acc)
    }
}

/// Truncated prefix means in `O(N log² N)`: with `x_(k)` and `S_k` the
/// order statistics and sums of the prefix,
/// `G(k) = S_k (M+1)/x_(k) - k(M+1) + nM` is nonincreasing in `k`, and the
/// mean uses the largest `k` with `G(k) ≥ 0`.
fn prefix_truncated_means(m: f64, x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    let mut rank = vec![0; n];
    let mut sorted = vec![0.0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
        sorted[r] = x[i];
    }
    let mut tree = Fenwick::new(n);
    let mut out = Vec::with_capacity(n);
    for (idx, &v) in x.iter().enumerate() {
        tree.add(rank[idx], v);
        let len = idx + 1;
        let nm = len as f64 * m;
        let stat = |k: usize| {
            let (r, below) = tree.kth(k as u32);
            (sorted[r], below + sorted[r])
        };
        let g = |k: usize| {
            let (xk, sk) = stat(k);
            sk * (m + 1.0) / xk - k as f64 * (m + 1.0) + nm >= 0.0
        };
        // G(1) = nM ≥ 0; find the last k with G(k) ≥ 0.
        let (mut lo, mut hi) = (1, len);
        while lo < hi {
            let mid = (lo + hi).div_ceil(2);
            if g(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let k = lo;
        let denom = k as f64 * (m + 1.0) - nm;
        if !(denom > 0.0) {
            return Err(Error::Consistency(format!(
                "no admissible index for the truncated mean of a prefix of length {len}"
            )));
        }
        out.push(stat(k).1 / denom);
    }
    Ok(out)
}

fn checkpoints(n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k < n)
        .collect();
    v.push(n);
    v
}

fn ratio_report(means: &[f64], x: &[f64], constant: f64, route: Route) -> RatioReport {
    let marks = checkpoints(x.len());
    let mut partial = Vec::with_capacity(marks.len());
    let (mut num, mut den) = (0.0, 0.0);
    let mut next = 0;
    for i in 0..x.len() {
        num += means[i];
        den += x[i];
        if marks[next] == i + 1 {
            partial.push((i + 1, num / den));
            next += 1;
        }
    }
    let final_ratio = num / den;
    RatioReport {
        n: x.len(),
        partial_ratios: partial,
        final_ratio,
        theoretical_constant: constant,
        theoretical_route: route,
        dominated: final_ratio <= constant + DOMINATION_TOL,
    }
}

/// Empirical ratio for `g` on `seq`, compared with the constant from the
/// automatic Hardy route (an upper bound for non-concave generators).
pub fn hardy_ratio(g: &GeneratorSpec, seq: &SequenceSpec) -> Result<RatioReport> {
    let x = seq.terms()?;
    let theory = hardy_auto(g)?;
    let means = prefix_means(g, &x)?;
    Ok(ratio_report(&means, &x, theory.constant, theory.route))
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GeneratorRef {
    Preset(String),
    Spec(GeneratorSpec),
}

impl GeneratorRef {
    pub fn resolve(&self) -> Result<GeneratorSpec> {
        match self {
            GeneratorRef::Preset(s) => parse_generator(s),
            GeneratorRef::Spec(g) => Ok(g.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SequenceRef {
    Text(String),
    Spec(SequenceKind),
}

impl SequenceRef {
    pub fn resolve(&self) -> Result<SequenceKind> {
        match self {
            SequenceRef::Text(s) => SequenceKind::parse(s),
            SequenceRef::Spec(k) => {
                k.check()?;
                Ok(k.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepGenerator {
    pub id: String,
    pub generator: GeneratorRef,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepSequence {
    pub id: String,
    pub sequence: SequenceRef,
}

/// Generator grid × sequence grid, all at the same length `n`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SweepConfig {
    #[serde(default)]
    pub generators: Vec<SweepGenerator>,
    #[serde(default)]
    pub sequences: Vec<SweepSequence>,
    pub n: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("sweep config: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub generator: String,
    pub sequence: String,
    pub n: usize,
    pub ratio: Option<f64>,
    #[serde(serialize_with = "extreal::opt::serialize")]
    pub theoretical_constant: Option<f64>,
    pub margin: Option<f64>,
    pub dominated: Option<bool>,
    pub error: Option<String>,
}

/// Runs every cell, in parallel across available cores. Rows come back in
/// cell order (generator-major); a failing cell records its error and the
/// sweep continues.
pub fn sweep(config: &SweepConfig) -> Vec<SweepRow> {
    let gens: Vec<Result<(GeneratorSpec, f64, Route)>> = config
        .generators
        .iter()
        .map(|g| {
            let spec = g.generator.resolve()?;
            let r = hardy_auto(&spec)?;
            Ok((spec, r.constant, r.route))
        })
        .collect();
    let seqs: Vec<Result<SequenceSpec>> = config
        .sequences
        .iter()
        .map(|s| SequenceSpec::new(s.sequence.resolve()?, config.n, config.scale))
        .collect();

    let cells: Vec<(usize, usize)> = (0..gens.len())
        .flat_map(|i| (0..seqs.len()).map(move |j| (i, j)))
        .collect();
    let run = |&(i, j): &(usize, usize)| -> SweepRow {
        let mut row = SweepRow {
            generator: config.generators[i].id.clone(),
            sequence: config.sequences[j].id.clone(),
            n: config.n,
            ratio: None,
            theoretical_constant: None,
            margin: None,
            dominated: None,
            error: None,
        };
        let outcome = (|| -> Result<RatioReport> {
            let (g, c, route) = gens[i].as_ref().map_err(Clone::clone)?;
            let seq = seqs[j].as_ref().map_err(Clone::clone)?;
            let x = seq.terms()?;
            let means = prefix_means(g, &x)?;
            Ok(ratio_report(&means, &x, *c, *route))
        })();
        match outcome {
            Ok(r) => {
                row.ratio = Some(r.final_ratio);
                row.theoretical_constant = Some(r.theoretical_constant);
                row.margin = Some(r.theoretical_constant - r.final_ratio);
                row.dominated = Some(r.dominated);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    };

    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cells.len().max(1));
    let mut rows: Vec<Option<SweepRow>> = vec![None; cells.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let cells = &cells;
                let run = &run;
                scope.spawn(move || {
                    (w..cells.len())
                        .step_by(workers)
                        .map(|c| (c, run(&cells[c])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (c, row) in h.join().expect("sweep worker panicked") {
                rows[c] = Some(row);
            }
        }
    });
    rows.into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

fn fmt_ext(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

/// CSV with header `generator,sequence,n,ratio,theoretical_constant,margin,dominated,error`.
pub fn rows_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "generator",
        "sequence",
        "n",
        "ratio",
        "theoretical_constant",
        "margin",
        "dominated",
        "error",
    ])
    .map_err(io)?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_ext).unwrap_or_default();
        w.write_record([
            r.generator.clone(),
            r.sequence.clone(),
            r.n.to_string(),
            opt(r.ratio),
            opt(r.theoretical_constant),
            opt(r.margin),
            r.dominated.map(|d| d.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
