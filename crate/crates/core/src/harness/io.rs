//! CSV formats: solver traces, labeled datasets, and theory constants.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::LabeledDataset;
use crate::solvers::Record;
use crate::theory::ProblemConstants;
use crate::vector::Vector;

use super::config::config_error;

pub const TRACE_HEADER: &str = "iter,f,best_f,step,fevals,elapsed_ms";

/// Real rendered with 17 significant digits, enough to recover the bits.
pub(crate) fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_trace(records: &[Record]) -> String {
    let mut s = String::with_capacity(96 * (records.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.iter,
            fmt_sig17(r.f),
            fmt_sig17(r.best_f),
            fmt_sig17(r.step),
            r.fevals,
            fmt_sig17(r.elapsed_ms)
        );
    }
    s
}

fn parse_field<T: std::str::FromStr>(field: &str, row: usize, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("cannot parse {what} `{field}`"),
    })
}

pub fn parse_trace(text: &str) -> Result<Vec<Record>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == TRACE_HEADER => {}
        other => {
            return Err(Error::Parse {
                row: 1,
                message: format!("expected header `{TRACE_HEADER}`, got `{}`", other.unwrap_or("")),
            })
        }
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let row = i + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    row,
                    message: format!("expected 6 fields, found {}", fields.len()),
                });
            }
            Ok(Record {
                iter: parse_field(fields[0], row, "iter")?,
                f: parse_field(fields[1], row, "f")?,
                best_f: parse_field(fields[2], row, "best_f")?,
                step: parse_field(fields[3], row, "step")?,
                fevals: parse_field(fields[4], row, "fevals")?,
                elapsed_ms: parse_field(fields[5], row, "elapsed_ms")?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CsvSchema {
    /// `id,diagnosis,30 features`; `M` maps to `+1` and `B` to `-1`.
    Wdbc,
    /// Every column except `label_column` is a feature. With a token, the
    /// label is `+1` on an exact match and `-1` otherwise; without one the
    /// label is parsed as a real number.
    Generic {
        label_column: usize,
        positive_token: Option<String>,
    },
}

pub const WDBC_FIELDS: usize = 32;

/// Parses labeled rows. Blank lines are skipped; reported rows are 1-based
/// line numbers.
pub fn parse_labeled_csv(text: &str, schema: &CsvSchema) -> Result<LabeledDataset> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let row = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (label, feats): (f64, Vec<&str>) = match schema {
            CsvSchema::Wdbc => {
                if fields.len() != WDBC_FIELDS {
                    return Err(Error::Parse {
                        row,
                        message: format!("expected {WDBC_FIELDS} fields, found {}", fields.len()),
                    });
                }
                let label = match fields[1] {
                    "M" => 1.0,
                    "B" => -1.0,
                    t => {
                        return Err(Error::Parse {
                            row,
                            message: format!("unknown diagnosis token `{t}`"),
                        })
                    }
                };
                (label, fields[2..].to_vec())
            }
            CsvSchema::Generic {
                label_column,
                positive_token,
            } => {
                if *label_column >= fields.len() {
                    return Err(Error::Parse {
                        row,
                        message: format!("no label column {label_column} in {} fields", fields.len()),
                    });
                }
                let token = fields[*label_column];
                let label = match positive_token {
                    Some(p) => {
                        if token == p {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    None => parse_real(token, row)?,
                };
                let rest = fields
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| j != label_column)
                    .map(|(_, f)| *f)
                    .collect();
                (label, rest)
            }
        };
        let x = feats.iter().map(|f| parse_real(f, row)).collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(x.len()),
            Some(w) if w != x.len() => {
                return Err(Error::Parse {
                    row,
                    message: format!("expected {w} features, found {}", x.len()),
                })
            }
            _ => {}
        }
        features.push(Vector::new(x).map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?);
        labels.push(label);
    }
    LabeledDataset::new(features, labels)
}

fn parse_real(field: &str, row: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            message: format!("unparseable real `{field}`"),
        }),
    }
}

pub fn load_labeled_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_labeled_csv(&text, schema)
}

/// Generic layout with the label in column 0, readable back with
/// `CsvSchema::Generic { label_column: 0, positive_token: None }`.
pub fn render_labeled_csv(data: &LabeledDataset) -> String {
    let mut s = String::new();
    for (x, y) in data.features().iter().zip(data.labels()) {
        s.push_str(&fmt_sig17(*y));
        for v in x.iter() {
            s.push(',');
            s.push_str(&fmt_sig17(*v));
        }
        s.push('\n');
    }
    s
}

/// Reads `key = value` lines into theory constants. Keys: `l1`, `gamma`,
/// `beta`, `n`, `r`, `dx`, `sigma`, `h`, `mu`, `t`, `eps`.
pub fn parse_constants(text: &str) -> Result<ProblemConstants> {
    let mut c = ProblemConstants::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_error(&format!("line {}", i + 1), "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        let real = || v.parse::<f64>().map_err(|e| config_error(k, format!("cannot parse `{v}`: {e}")));
        let count = || v.parse::<usize>().map_err(|e| config_error(k, format!("cannot parse `{v}`: {e}")));
        let slot = match k {
            "l1" => &mut c.l1,
            "gamma" => &mut c.gamma,
            "beta" => &mut c.beta,
            "r" => &mut c.r,
            "dx" => &mut c.dx,
            "sigma" => &mut c.sigma,
            "h" => &mut c.h,
            "mu" => &mut c.mu,
            "eps" => &mut c.eps,
            "n" => {
                if c.n.replace(count()?).is_some() {
                    return Err(config_error(k, "duplicate key"));
                }
                continue;
            }
            "t" => {
                if c.t.replace(count()?).is_some() {
                    return Err(config_error(k, "duplicate key"));
                }
                continue;
            }
            other => return Err(config_error(other, "unknown constant")),
        };
        if slot.replace(real()?).is_some() {
            return Err(config_error(k, "duplicate key"));
        }
    }
    Ok(c)
}
