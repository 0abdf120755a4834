//! Plain-text formats for covariance matrices and channels.
//!
//! A CM file:
//!
//! ```text
//! # single-mode vacuum and a maximally mixed mode
//! modes 2
//! split 1 1
//! matrix
//! 0 1 0 0
//! -1 0 0 0
//! 0 0 0 0
//! 0 0 0 0
//! ```
//!
//! Majorana indices are ordered mode by mode, all A modes before all B
//! modes. A channel file has `n_in`, `n_out`, then `x_matrix` with `2 n_out`
//! rows of `2 n_in` entries and `n_matrix` with `2 n_out` rows. Blank lines and
//! everything after `#` are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::channels::{self, GaussianChannel};
use crate::fgs::{self, BipartiteCM, CovarianceMatrix};
use crate::matalg;
use crate::{Error, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
pub struct CmDocument {
    pub cm: CovarianceMatrix,
    pub split: Option<(usize, usize)>,
}

impl CmDocument {
    pub fn bipartite(&self) -> Result<BipartiteCM> {
        let (na, nb) = self
            .split
            .ok_or_else(|| Error::InvalidParameter("file declares no split".into()))?;
        BipartiteCM::new(self.cm.clone(), na, nb)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

struct Section {
    line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

#[derive(Default)]
struct Document {
    scalars: HashMap<String, (usize, Vec<usize>)>,
    sections: HashMap<String, Section>,
}

fn tokenize(text: &str, sections: &[&str]) -> Result<Document> {
    let mut doc = Document::default();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let head = words.next().expect("non-empty line");
        if sections.contains(&head) {
            if words.next().is_some() {
                return Err(parse_err(line, format!("`{head}` takes no arguments")));
            }
            if doc.sections.contains_key(head) {
                return Err(parse_err(line, format!("duplicate `{head}` section")));
            }
            doc.sections.insert(head.to_string(), Section { line, rows: vec![] });
            current = Some(head.to_string());
        } else if head.parse::<f64>().is_ok() || head == "-" {
            let Some(name) = &current else {
                return Err(parse_err(line, "numbers outside a matrix section"));
            };
            let row = content
                .split_whitespace()
                .map(|w| {
                    w.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| parse_err(line, format!("bad number `{w}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            doc.sections.get_mut(name).expect("open section").rows.push((line, row));
        } else {
            let values = words
                .map(|w| {
                    w.parse::<usize>()
                        .map_err(|_| parse_err(line, format!("`{head}` expects non-negative integers, got `{w}`")))
                })
                .collect::<Result<Vec<usize>>>()?;
            if doc.scalars.insert(head.to_string(), (line, values)).is_some() {
                return Err(parse_err(line, format!("duplicate `{head}`")));
            }
            current = None;
        }
    }
    Ok(doc)
}

fn scalar(doc: &Document, key: &str, arity: usize) -> Result<Option<Vec<usize>>> {
    match doc.scalars.get(key) {
        None => Ok(None),
        Some((_, v)) if v.len() == arity => Ok(Some(v.clone())),
        Some((line, v)) => Err(parse_err(
            *line,
            format!("`{key}` expects {arity} value(s), got {}", v.len()),
        )),
    }
}

fn check_keys(doc: &Document, allowed: &[&str]) -> Result<()> {
    for (k, (line, _)) in &doc.scalars {
        if !allowed.contains(&k.as_str()) {
            return Err(parse_err(*line, format!("unknown keyword `{k}`")));
        }
    }
    Ok(())
}

fn matrix(doc: &Document, name: &str, rows: usize, cols: usize) -> Result<(usize, DMatrix<f64>)> {
    let sec = doc
        .sections
        .get(name)
        .ok_or_else(|| parse_err(0, format!("missing `{name}` section")))?;
    if sec.rows.len() != rows {
        return Err(parse_err(
            sec.line,
            format!("`{name}` needs {rows} rows, found {}", sec.rows.len()),
        ));
    }
    let mut m = DMatrix::zeros(rows, cols);
    for (r, (line, vals)) in sec.rows.iter().enumerate() {
        if vals.len() != cols {
            return Err(parse_err(*line, format!("expected {cols} entries, found {}", vals.len())));
        }
        for (c, v) in vals.iter().enumerate() {
            m[(r, c)] = *v;
        }
    }
    Ok((sec.line, m))
}

fn antisym_or_parse(m: &DMatrix<f64>, line: usize, tol: &Tolerances) -> Result<matalg::AntisymmetricMatrix> {
    matalg::antisymmetrize_with(m, tol.antisym_rtol).map_err(|e| match e {
        Error::NotAntisymmetric { residue } => {
            parse_err(line, format!("matrix is not antisymmetric (residue {residue:e})"))
        }
        other => other,
    })
}

/// Parses and validates a CM document.
pub fn parse_cm(text: &str, tol: &Tolerances) -> Result<CmDocument> {
    let doc = tokenize(text, &["matrix"])?;
    check_keys(&doc, &["modes", "split"])?;
    let modes = scalar(&doc, "modes", 1)?
        .ok_or_else(|| parse_err(0, "missing `modes`"))?[0];
    if modes == 0 {
        return Err(parse_err(doc.scalars["modes"].0, "`modes` must be positive"));
    }
    let split = scalar(&doc, "split", 2)?.map(|v| (v[0], v[1]));
    if let Some((a, b)) = split {
        if a + b != modes {
            return Err(parse_err(
                doc.scalars["split"].0,
                format!("split {a} + {b} does not add up to {modes} modes"),
            ));
        }
    }
    let (line, m) = matrix(&doc, "matrix", 2 * modes, 2 * modes)?;
    let k = antisym_or_parse(&m, line, tol)?;
    let cm = fgs::validate_cm_with(k, tol)?;
    Ok(CmDocument { cm, split })
}

/// Parses and validates a channel document.
pub fn parse_channel(text: &str, tol: &Tolerances) -> Result<GaussianChannel> {
    let doc = tokenize(text, &["x_matrix", "n_matrix"])?;
    check_keys(&doc, &["n_in", "n_out"])?;
    let n_in = scalar(&doc, "n_in", 1)?.ok_or_else(|| parse_err(0, "missing `n_in`"))?[0];
    let n_out = scalar(&doc, "n_out", 1)?.ok_or_else(|| parse_err(0, "missing `n_out`"))?[0];
    if n_in == 0 || n_out == 0 {
        return Err(parse_err(0, "mode counts must be positive"));
    }
    let (_, x) = matrix(&doc, "x_matrix", 2 * n_out, 2 * n_in)?;
    let (line, n) = matrix(&doc, "n_matrix", 2 * n_out, 2 * n_out)?;
    let n = antisym_or_parse(&n, line, tol)?;
    channels::validate_channel_with(&x, &n, tol)
}

fn write_rows(out: &mut String, m: &DMatrix<f64>) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:?}", m[(r, c)] + 0.0)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Serializes any even-dimensional square matrix in the CM format.
pub fn write_cm(m: &DMatrix<f64>, split: Option<(usize, usize)>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "modes {}", m.nrows() / 2);
    if let Some((a, b)) = split {
        let _ = writeln!(out, "split {a} {b}");
    }
    out.push_str("matrix\n");
    write_rows(&mut out, m);
    out
}

pub fn write_channel(ch: &GaussianChannel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n_in {}", ch.n_in());
    let _ = writeln!(out, "n_out {}", ch.n_out());
    out.push_str("x_matrix\n");
    write_rows(&mut out, ch.x());
    out.push_str("n_matrix\n");
    write_rows(&mut out, ch.n().as_matrix());
    out
}
