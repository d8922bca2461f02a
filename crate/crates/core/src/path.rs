//! Sampled paths in `R^l` with piecewise-linear interpolation and CSV IO.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// A path sampled at strictly increasing times, read as its piecewise-linear
/// interpolant between samples.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePath {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl PiecewisePath {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("path needs at least one sample".into()));
        }
        if times.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("path dimension must be positive".into()));
        }
        for (i, v) in values.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite value at sample {i}")));
            }
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidInput(format!(
                    "times must be strictly increasing (sample {})",
                    i + 1
                )));
            }
        }
        Ok(PiecewisePath { times, values })
    }

    /// Samples `f` at the given times.
    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let values = times.iter().map(|&t| f(t)).collect();
        Self::new(times, values)
    }

    /// Samples `f` on `steps + 1` equally spaced times of `[t0, t1]`.
    pub fn uniform(t0: f64, t1: f64, steps: usize, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        Self::from_fn(uniform_grid(t0, t1, steps)?, f)
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// `x_{t_{i+1}} - x_{t_i}`.
    pub fn increment(&self, i: usize) -> Vec<f64> {
        sub(&self.values[i + 1], &self.values[i])
    }

    pub fn start(&self) -> &[f64] {
        &self.values[0]
    }

    pub fn end(&self) -> &[f64] {
        &self.values[self.values.len() - 1]
    }

    /// Linear interpolation; clamps outside the sampled range.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let (i, theta) = locate(&self.times, t);
        if theta == 0.0 {
            return self.values[i].clone();
        }
        self.values[i]
            .iter()
            .zip(&self.values[i + 1])
            .map(|(a, b)| a + theta * (b - a))
            .collect()
    }

    /// Pointwise sum with a path on the same times.
    pub fn add(&self, other: &PiecewisePath) -> Result<Self> {
        self.check_same_times(other)?;
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(PiecewisePath {
            times: self.times.clone(),
            values,
        })
    }

    /// Stacks the components of two paths sampled on the same times.
    pub fn concat_components(&self, other: &PiecewisePath) -> Result<Self> {
        self.check_same_times(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(PiecewisePath {
            times: self.times.clone(),
            values,
        })
    }

    pub(crate) fn check_same_times(&self, other: &PiecewisePath) -> Result<()> {
        same_grid(&self.times, &other.times)
    }

    /// Reads a CSV with header `t,x1,...,xl`. Lines starting with `#` are skipped.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Csv { row: 1, msg: e.to_string() })?
            .clone();
        if headers.len() < 2 || &headers[0] != "t" {
            return Err(Error::Csv {
                row: 1,
                msg: "header must be `t,x1,...,xl`".into(),
            });
        }
        for (k, h) in headers.iter().enumerate().skip(1) {
            if h != format!("x{k}") {
                return Err(Error::Csv {
                    row: 1,
                    msg: format!("column {} must be named `x{k}`, found `{h}`", k + 1),
                });
            }
        }
        let dim = headers.len() - 1;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::Csv { row, msg: e.to_string() }
            })?;
            let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != dim + 1 {
                return Err(Error::Csv {
                    row,
                    msg: format!("expected {} fields, found {}", dim + 1, rec.len()),
                });
            }
            let mut parsed = Vec::with_capacity(dim + 1);
            for (col, field) in rec.iter().enumerate() {
                let x: f64 = field.parse().map_err(|_| Error::Csv {
                    row,
                    msg: format!("column {}: cannot parse `{field}` as a number", col + 1),
                })?;
                parsed.push(x);
            }
            times.push(parsed[0]);
            values.push(parsed[1..].to_vec());
        }
        Self::new(times, values).map_err(|e| Error::Csv { row: 0, msg: e.to_string() })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_table(writer, &self.times, &self.values, &[])
    }
}

/// Writes `t,x1,...` rows preceded by `# `-prefixed comment lines.
pub fn write_table<W: Write>(mut writer: W, times: &[f64], values: &[Vec<f64>], comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(writer, "# {c}")?;
    }
    let dim = values.first().map_or(0, |v| v.len());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((1..=dim).map(|k| format!("x{k}")));
    wtr.write_record(&header).map_err(csv_err)?;
    for (t, v) in times.iter().zip(values) {
        let mut row = vec![fmt_f64(*t)];
        row.extend(v.iter().map(|x| fmt_f64(*x)));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Csv { row: 0, msg: e.to_string() }
}

/// Shortest representation that round-trips.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// `steps + 1` equally spaced points from `t0` to `t1` (endpoints exact).
pub fn uniform_grid(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(t1 > t0) {
        return Err(Error::InvalidInput(format!(
            "need t1 > t0 and at least one step (got [{t0}, {t1}], {steps} steps)"
        )));
    }
    let h = (t1 - t0) / steps as f64;
    let mut g: Vec<f64> = (0..=steps).map(|i| t0 + i as f64 * h).collect();
    g[steps] = t1;
    Ok(g)
}

/// Cell index `i` and fraction `theta` in `[0, 1)` with
/// `t = times[i] + theta (times[i+1] - times[i])`; clamps to the ends.
pub(crate) fn locate(times: &[f64], t: f64) -> (usize, f64) {
    let n = times.len();
    if n == 1 || t <= times[0] {
        return (0, 0.0);
    }
    if t >= times[n - 1] {
        return (n - 1, 0.0);
    }
    let i = times.partition_point(|&x| x <= t) - 1;
    let theta = (t - times[i]) / (times[i + 1] - times[i]);
    (i, theta)
}

/// Index of the grid node equal to `t` (up to a relative 1e-12 of the span).
pub(crate) fn node_index(times: &[f64], t: f64) -> Option<usize> {
    let span = (times[times.len() - 1] - times[0]).abs().max(1.0);
    let i = times.partition_point(|&x| x < t);
    [i.saturating_sub(1), i]
        .into_iter()
        .filter(|&j| j < times.len())
        .find(|&j| (times[j] - t).abs() <= 1e-12 * span)
}

pub(crate) fn same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!("{} vs {} grid points", a.len(), b.len())));
    }
    let span = (a[a.len() - 1] - a[0]).abs().max(1.0);
    if let Some(i) = a.iter().zip(b).position(|(x, y)| (x - y).abs() > 1e-12 * span) {
        return Err(Error::GridMismatch(format!("grids differ at point {i}")));
    }
    Ok(())
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
