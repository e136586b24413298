//! Problem files, price-path files and CSV outputs.
//!
//! A problem file is either a matrix
//!
//! ```text
//! matrix 2 2
//! 3 1
//! 2 2
//! ```
//!
//! (rows are actions, columns scenarios) or a single one-way line
//! `oneway m=1 M=2 T=2 [prices=5] [alloc=8]`.  Blank lines and lines
//! starting with `#` are skipped.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::analysis::{CurveSample, RegretCurve};
use crate::error::{Error, Result};
use crate::matrix::MatrixProblem;
use crate::oneway::{MarketSpec, OnewayGrid, TraceRow};

pub const DEFAULT_GRID_PRICES: usize = 5;
pub const DEFAULT_GRID_ALLOC: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Matrix(MatrixProblem),
    /// A market without grid parameters is handled in closed form.
    Oneway { spec: MarketSpec, grid: Option<(usize, usize)> },
}

impl ProblemSource {
    /// The discretized tree, if this source has one.
    pub fn oneway_grid(&self) -> Option<Result<OnewayGrid>> {
        match self {
            ProblemSource::Oneway {
                spec,
                grid: Some((prices, alloc)),
            } => Some(OnewayGrid::new(*spec, *prices, *alloc)),
            _ => None,
        }
    }
}

fn at_line(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::input(format!("line {line}: {msg}"))
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_number<T: std::str::FromStr>(line: usize, what: &str, token: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| at_line(line, format!("invalid {what} '{token}'")))
}

/// Parses the one-way builtin line.
pub fn parse_oneway(line: usize, text: &str) -> Result<ProblemSource> {
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("oneway") {
        return Err(at_line(line, "expected 'oneway'"));
    }
    let (mut m, mut big_m, mut t, mut prices, mut alloc) = (None, None, None, None, None);
    for token in tokens {
        let Some((key, value)) = token.split_once('=') else {
            return Err(at_line(line, format!("expected key=value, got '{token}'")));
        };
        match key {
            "m" => m = Some(parse_number::<f64>(line, "m", value)?),
            "M" => big_m = Some(parse_number::<f64>(line, "M", value)?),
            "T" => t = Some(parse_number::<usize>(line, "T", value)?),
            "prices" => prices = Some(parse_number::<usize>(line, "prices", value)?),
            "alloc" => alloc = Some(parse_number::<usize>(line, "alloc", value)?),
            other => return Err(at_line(line, format!("unknown key '{other}'"))),
        }
    }
    let missing = |k: &str| at_line(line, format!("missing {k}="));
    let spec = MarketSpec::new(m.ok_or_else(|| missing("m"))?, big_m.ok_or_else(|| missing("M"))?, t.ok_or_else(|| missing("T"))?)
        .map_err(|e| at_line(line, e))?;
    let grid = match (prices, alloc) {
        (None, None) => None,
        (p, a) => Some((p.unwrap_or(DEFAULT_GRID_PRICES), a.unwrap_or(DEFAULT_GRID_ALLOC))),
    };
    if let Some((p, a)) = grid {
        OnewayGrid::new(spec, p, a).map_err(|e| at_line(line, e))?;
    }
    Ok(ProblemSource::Oneway { spec, grid })
}

pub fn parse_problem(text: &str) -> Result<ProblemSource> {
    let mut lines = content_lines(text);
    let Some((first, header)) = lines.next() else {
        return Err(Error::input("problem file is empty"));
    };
    if header.starts_with("oneway") {
        if let Some((extra, _)) = lines.next() {
            return Err(at_line(extra, "unexpected content after the oneway line"));
        }
        return parse_oneway(first, header);
    }
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.first() != Some(&"matrix") || tokens.len() != 3 {
        return Err(at_line(first, "expected 'matrix R C' or 'oneway ...'"));
    }
    let rows: usize = parse_number(first, "row count", tokens[1])?;
    let cols: usize = parse_number(first, "column count", tokens[2])?;
    if rows == 0 || cols == 0 {
        return Err(at_line(first, "matrix dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(rows);
    let mut last = first;
    for (line, text) in lines {
        if data.len() == rows {
            return Err(at_line(line, format!("more than {rows} rows")));
        }
        let row = text
            .split_whitespace()
            .map(|t| {
                let v: f64 = parse_number(line, "number", t)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(at_line(line, format!("non-finite entry '{t}'")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != cols {
            return Err(at_line(line, format!("expected {cols} entries, got {}", row.len())));
        }
        data.push(row);
        last = line;
    }
    if data.len() != rows {
        return Err(at_line(last, format!("expected {rows} rows, got {}", data.len())));
    }
    Ok(ProblemSource::Matrix(MatrixProblem::new(data)?))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))
}

pub fn read_problem_file(path: &Path) -> Result<ProblemSource> {
    parse_problem(&read_text(path)?).map_err(|e| match e {
        Error::Input(msg) => Error::input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// One price per line, exactly `T` lines.
pub fn parse_price_path(text: &str, spec: &MarketSpec) -> Result<Vec<f64>> {
    let mut path = Vec::with_capacity(spec.periods());
    for (line, token) in content_lines(text) {
        if path.len() == spec.periods() {
            return Err(at_line(line, format!("more than T = {} prices", spec.periods())));
        }
        let price: f64 = parse_number(line, "price", token)?;
        if !spec.contains(price) {
            return Err(at_line(
                line,
                format!("price {price} outside [{}, {}]", spec.min_price(), spec.max_price()),
            ));
        }
        path.push(price);
    }
    if path.len() != spec.periods() {
        return Err(Error::input(format!(
            "price path has {} prices, expected T = {}",
            path.len(),
            spec.periods()
        )));
    }
    Ok(path)
}

pub fn read_price_path(path: &Path, spec: &MarketSpec) -> Result<Vec<f64>> {
    parse_price_path(&read_text(path)?, spec).map_err(|e| match e {
        Error::Input(msg) => Error::input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::input(format!("line {}: {e}", pos.line())),
        None => Error::input(e.to_string()),
    }
}

/// `beta,value,policy_id` with full-precision numbers.
pub fn write_curve_csv<W: Write>(out: W, curve: &RegretCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "value", "policy_id"]).map_err(csv_error)?;
    for s in curve.samples() {
        let id = s.policy_id.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([s.beta.to_string(), s.value.to_string(), id]).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

#[derive(Deserialize)]
struct CurveRecord {
    beta: f64,
    value: f64,
    policy_id: String,
}

pub fn read_curve_csv<R: Read>(input: R, problem_id: &str) -> Result<RegretCurve> {
    let mut r = csv::Reader::from_reader(input);
    let mut samples = Vec::new();
    for record in r.deserialize::<CurveRecord>() {
        let record = record.map_err(csv_error)?;
        let policy_id = if record.policy_id.is_empty() {
            None
        } else {
            Some(record.policy_id.parse().map_err(|_| Error::input(format!("bad policy id '{}'", record.policy_id)))?)
        };
        samples.push(CurveSample {
            beta: record.beta,
            value: record.value,
            policy_id,
        });
    }
    RegretCurve::new(problem_id, samples)
}

/// Two whitespace-separated columns, no header.
pub fn write_plot_data<W: Write>(mut out: W, curve: &RegretCurve) -> Result<()> {
    for s in curve.samples() {
        writeln!(out, "{} {}", s.beta, s.value).map_err(|e| Error::input(e.to_string()))?;
    }
    Ok(())
}

/// `t,price,sold,remaining,revenue,pmax`
pub fn write_trace_csv<W: Write>(out: W, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "price", "sold", "remaining", "revenue", "pmax"]).map_err(csv_error)?;
    for row in trace {
        w.write_record([
            row.period.to_string(),
            row.price.to_string(),
            row.sold.to_string(),
            row.remaining.to_string(),
            row.revenue.to_string(),
            row.max_price.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::input(e.to_string()))
}

#[derive(Deserialize)]
struct TraceRecord {
    t: usize,
    price: f64,
    sold: f64,
    remaining: f64,
    revenue: f64,
    pmax: f64,
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<TraceRecord>()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            Ok(TraceRow {
                period: rec.t,
                price: rec.price,
                sold: rec.sold,
                remaining: rec.remaining,
                revenue: rec.revenue,
                max_price: rec.pmax,
            })
        })
        .collect()
}
