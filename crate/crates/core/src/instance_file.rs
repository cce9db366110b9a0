//! Plain-text instance files.
//!
//! ```text
//! [params]
//! l_x = 1.0000000000000000e1
//! l_y = ...
//! l_xy = ...
//! mu_x = ...
//! mu_y = ...
//! mu_xy = ...
//! mu_yx = ...
//!
//! [f]
//! dim = 2
//! hessian = h11 h12; h21 h22
//! linear = q1 q2
//!
//! [g]
//! ...same keys as [f]...
//!
//! [B]
//! rows = 1
//! cols = 2
//! entries = b11 b12
//! ```
//!
//! Matrix rows are separated by `;`, entries by whitespace. Lines starting
//! with `;` or `#` are comments. `f` and `g` are quadratics
//! `½ xᵀHx + qᵀx` carrying the declared constants from `[params]`.

use std::fmt::Write as _;
use std::path::Path;

use ini::Ini;

use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::oracles::{materialize, Quadratic};
use crate::saddle::{quadratic_parts, ProblemParams, SaddlePointProblem};
use crate::trace::fmt_real;

const PARAM_KEYS: [&str; 7] = ["l_x", "l_y", "l_xy", "mu_x", "mu_y", "mu_xy", "mu_yx"];

fn fmt_row(v: &[f64]) -> String {
    v.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(" ")
}

fn fmt_mat(m: &Mat) -> String {
    (0..m.rows()).map(|i| fmt_row(m.row(i))).collect::<Vec<_>>().join("; ")
}

/// Serializes a problem whose `f` and `g` are quadratic.
pub fn instance_to_string(problem: &SaddlePointProblem) -> Result<String> {
    let p = problem.params();
    let vals = [p.l_x, p.l_y, p.l_xy, p.mu_x, p.mu_y, p.mu_xy, p.mu_yx];
    let mut s = String::from("[params]\n");
    for (k, v) in PARAM_KEYS.iter().zip(vals) {
        writeln!(s, "{k} = {}", fmt_real(v)).unwrap();
    }
    for (name, h) in [("f", problem.f()), ("g", problem.g())] {
        let (hess, lin) = quadratic_parts(h)?;
        writeln!(s, "\n[{name}]\ndim = {}\nhessian = {}\nlinear = {}", lin.len(), fmt_mat(&hess), fmt_row(&lin))
            .unwrap();
    }
    let b = materialize(problem.b());
    writeln!(s, "\n[B]\nrows = {}\ncols = {}\nentries = {}", b.rows(), b.cols(), fmt_mat(&b)).unwrap();
    Ok(s)
}

pub fn save_instance(path: &Path, problem: &SaddlePointProblem) -> Result<()> {
    std::fs::write(path, instance_to_string(problem)?)?;
    Ok(())
}

fn field_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config { field: field.into(), msg: msg.into() }
}

fn get<'a>(ini: &'a Ini, section: &str, key: &str) -> Result<&'a str> {
    let field = format!("{section}.{key}");
    let props = ini.section(Some(section)).ok_or_else(|| field_err(section, "missing section"))?;
    props.get(key).ok_or_else(|| field_err(&field, "missing key"))
}

fn parse_real(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|e| field_err(field, format!("bad number `{s}`: {e}")))?;
    if !v.is_finite() {
        return Err(field_err(field, "must be finite"));
    }
    Ok(v)
}

fn parse_count(ini: &Ini, section: &str, key: &str) -> Result<usize> {
    let s = get(ini, section, key)?;
    s.trim().parse().map_err(|e| field_err(&format!("{section}.{key}"), format!("bad integer `{s}`: {e}")))
}

fn parse_row(field: &str, s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(|t| parse_real(field, t)).collect()
}

fn parse_mat(field: &str, s: &str, rows: usize, cols: usize) -> Result<Mat> {
    let parts: Vec<&str> = if s.trim().is_empty() { Vec::new() } else { s.split(';').collect() };
    if parts.len() != rows {
        return Err(field_err(field, format!("expected {rows} rows, got {}", parts.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, part) in parts.iter().enumerate() {
        let row = parse_row(field, part)?;
        if row.len() != cols {
            return Err(field_err(field, format!("row {} has {} entries, expected {cols}", i + 1, row.len())));
        }
        data.extend(row);
    }
    Mat::from_row_major(rows, cols, data)
}

fn parse_quadratic(ini: &Ini, section: &str, l: f64, mu: f64) -> Result<Quadratic> {
    let n = parse_count(ini, section, "dim")?;
    let h = parse_mat(&format!("{section}.hessian"), get(ini, section, "hessian")?, n, n)?;
    let q = parse_row(&format!("{section}.linear"), get(ini, section, "linear")?)?;
    if q.len() != n {
        return Err(field_err(&format!("{section}.linear"), format!("expected {n} entries, got {}", q.len())));
    }
    Quadratic::with_constants(h, q, l, mu).map_err(|e| field_err(section, e.to_string()))
}

pub fn instance_from_str(text: &str) -> Result<SaddlePointProblem> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Parse { line: e.line, msg: e.msg.into_owned() })?;
    let mut vals = [0.0; 7];
    for (v, k) in vals.iter_mut().zip(PARAM_KEYS) {
        *v = parse_real(&format!("params.{k}"), get(&ini, "params", k)?)?;
    }
    let [l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx] = vals;
    let p =
        ProblemParams::new(l_x, l_y, l_xy, mu_x, mu_y, mu_xy, mu_yx).map_err(|e| field_err("params", e.to_string()))?;
    let f = parse_quadratic(&ini, "f", l_x, mu_x)?;
    let g = parse_quadratic(&ini, "g", l_y, mu_y)?;
    let rows = parse_count(&ini, "B", "rows")?;
    let cols = parse_count(&ini, "B", "cols")?;
    let b = parse_mat("B.entries", get(&ini, "B", "entries")?, rows, cols)?;
    SaddlePointProblem::new(Box::new(f), Box::new(g), Box::new(b), p)
}

pub fn load_instance(path: &Path) -> Result<SaddlePointProblem> {
    instance_from_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::preset;

    #[test]
    fn round_trip_is_exact() {
        let prob = preset("sc_c_small", 5).unwrap();
        let text = instance_to_string(&prob).unwrap();
        let back = instance_from_str(&text).unwrap();
        assert_eq!(back.params(), prob.params());
        assert_eq!(back.b().dense(), prob.b().dense());
        let (h0, q0) = quadratic_parts(prob.g()).unwrap();
        let (h1, q1) = quadratic_parts(back.g()).unwrap();
        assert_eq!(h0, h1);
        assert_eq!(q0, q1);
        assert_eq!(instance_to_string(&back).unwrap(), text);
    }

    #[test]
    fn missing_key_names_field() {
        let text = "[params]\nl_x = 1\n";
        match instance_from_str(text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "params.l_y"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ragged_matrix_rejected() {
        let prob = preset("scsc_small", 1).unwrap();
        let text = instance_to_string(&prob).unwrap();
        let bad = text.replacen("entries = ", "entries = 1 ", 1);
        match instance_from_str(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "B.entries"),
            other => panic!("{other:?}"),
        }
    }
}
