use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const SOLUTION_HEADER: &[&str] = &["x", "phi"];
pub const SUMMARY_HEADER: &[&str] = &["eps", "phi0", "phi1", "iters", "c_eps"];
pub const LIMITS_HEADER: &[&str] = &["gamma", "t", "c", "t_minus_c", "c_star_neutral", "c_star_bracket"];
pub const DIAGNOSTICS_HEADER: &[&str] = &["eps", "kappa", "check", "value", "reference", "tolerance", "pass"];

/// `%g`-style formatting with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    // exponent after rounding to `digits` significant digits
    let sci = format!("{:.*e}", digits - 1, v);
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if exp < -4 || exp >= digits as i32 {
        let (mant, _) = sci.split_at(sci.find('e').unwrap());
        format!("{}e{}", trim_zeros(mant), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            bail!("row has {} cells, header has {}", row.len(), self.header.len());
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn render(&self, digits: usize) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Num(v) => out.push_str(&format_sig(*v, digits)),
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path, digits: usize) -> Result<()> {
        std::fs::write(path, self.render(digits)).with_context(|| format!("writing {}", path.display()))
    }
}
