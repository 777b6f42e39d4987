//! Named generators and the textual generator syntax shared by the CLI and
//! the browser demo.

use crate::error::{Error, Result};
use crate::generator::{Declared, GeneratorSpec};
use crate::poly::Piecewise;

/// `t - 1` on `(0, 2]`, a quadratic dip `1 - 0.3(t-2)(3-t)` on `[2, 3]`,
/// `1` on `[3, ∞)`; concave on `(0, 2)`.
pub fn g_dip() -> GeneratorSpec {
    let pw = Piecewise::new(
        vec![2.0, 3.0],
        vec![vec![-1.0, 1.0], vec![2.8, -1.5, 0.3], vec![1.0]],
    )
    .expect("g_dip pieces are continuous");
    GeneratorSpec::piecewise(pw)
        .with_interval(0.0, 2.0)
        .and_then(|g| g.with_g0plus(Declared::Value(-1.0)))
        .and_then(|g| g.with_q_inf(Declared::Value(0.0)))
        .and_then(|g| g.with_sup_g(Declared::Value(1.0)))
        .expect("g_dip class data is valid")
}

/// `t² - 1` on `(0, 1/2]`, `3/2 (t - 1)` on `[1/2, 1]`, `min(t - 1, 1)` on
/// `[1, ∞)`; concave on `(1/2, ∞)`.
pub fn g_l() -> GeneratorSpec {
    let pw = Piecewise::new(
        vec![0.5, 1.0, 2.0],
        vec![
            vec![-1.0, 0.0, 1.0],
            vec![-1.5, 1.5],
            vec![-1.0, 1.0],
            vec![1.0],
        ],
    )
    .expect("g_l pieces are continuous");
    GeneratorSpec::piecewise(pw)
        .with_interval(0.5, f64::INFINITY)
        .and_then(|g| g.with_g0plus(Declared::Value(-1.0)))
        .and_then(|g| g.with_q_inf(Declared::Value(0.0)))
        .and_then(|g| g.with_sup_g(Declared::Value(1.0)))
        .expect("g_l class data is valid")
}

/// Parses a generator argument:
///
/// * `log`, `g_dip`, `g_l`
/// * `power:<p>`, `truncated:<M>` (alias `truncated_linear:<M>`)
/// * an inline JSON `GeneratorSpec` (starts with `{`)
/// * `@<path>` or a path to a JSON file
pub fn parse_generator(arg: &str) -> Result<GeneratorSpec> {
    let arg = arg.trim();
    if arg.starts_with('{') {
        return serde_json::from_str(arg).map_err(|e| Error::Parse(format!("generator JSON: {e}")));
    }
    if let Some(path) = arg.strip_prefix('@') {
        return read_generator_file(path);
    }
    let (name, param) = match arg.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (arg, None),
    };
    let number = |p: Option<&str>| -> Result<f64> {
        let p = p.ok_or_else(|| Error::Parse(format!("preset '{name}' needs a parameter")))?;
        p.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad parameter '{p}' for '{name}': {e}")))
    };
    match name {
        "log" => Ok(GeneratorSpec::log()),
        "g_dip" | "gdip" => Ok(g_dip()),
        "g_l" | "gL" | "gl" => Ok(g_l()),
        "power" => GeneratorSpec::power(number(param)?),
        "truncated" | "truncated_linear" => GeneratorSpec::truncated_linear(number(param)?),
        _ if std::path::Path::new(arg).is_file() => read_generator_file(arg),
        _ => Err(Error::Parse(format!(
            "unknown generator '{arg}' (expected log, g_dip, g_l, power:<p>, truncated:<M>, JSON or a file)"
        ))),
    }
}

fn read_generator_file(path: &str) -> Result<GeneratorSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{path}: {e}")))
}
