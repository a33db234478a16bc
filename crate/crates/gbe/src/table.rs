//! Grids, result tables and their CSV/JSON encodings.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inclusive grid `start:stop:step`; the last point is the largest
/// `start + k·step` not beyond `stop` by more than half a step.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    decimals: usize,
}

impl Grid {
    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 0.5).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid points, rounded to the number of decimals written in the grid
    /// text so that `0.1` steps print as `0.3` rather than `0.30000000000000004`.
    pub fn points(&self) -> Vec<f64> {
        let scale = 10f64.powi(self.decimals.min(15) as i32);
        (0..self.len())
            .map(|k| {
                let x = self.start + k as f64 * self.step;
                if self.decimals >= 15 {
                    x
                } else {
                    (x * scale).round() / scale
                }
            })
            .collect()
    }
}

fn decimals_of(text: &str) -> usize {
    let mantissa = text.split(['e', 'E']).next().unwrap_or("");
    let frac = mantissa.split('.').nth(1).map_or(0, str::len);
    if mantissa.len() < text.len() {
        17
    } else {
        frac
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |why: &str| Error::Grid { text: text.to_string(), why: why.to_string() };
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad("not a number"));
        let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(bad("values must be finite"));
        }
        if step <= 0.0 {
            return Err(bad("step must be positive"));
        }
        if stop < start - 0.5 * step {
            return Err(bad("stop lies below start"));
        }
        if (stop - start) / step > 1e7 {
            return Err(bad("more than 10^7 points"));
        }
        let decimals = parts.iter().map(|p| decimals_of(p)).max().unwrap_or(0);
        Ok(Grid { start, stop, step, decimals })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Text(t) => t.parse().ok(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

/// Shortest decimal that reads back to the same double (at most 17
/// significant digits); scientific notation for very small or large values.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(x) => out.push_str(&format_f64(*x)),
                    Cell::Text(t) => out.push_str(t),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `text` to `path`, or to stdout when no path is given. Files are
/// written whole through a temporary sibling so a failed run leaves no
/// partial output.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let mut tmp = p.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = std::path::PathBuf::from(tmp);
            let wrap = |source| Error::Write { path: p.to_path_buf(), source };
            std::fs::write(&tmp, text).map_err(wrap)?;
            std::fs::rename(&tmp, p).map_err(wrap)?;
        }
    }
    Ok(())
}

/// One value per line.
pub fn lines(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 20);
    for v in values {
        let _ = writeln!(s, "{}", format_f64(*v));
    }
    s
}
