//! File formats: Matrix Market dense arrays, plain vectors (one number per
//! line) and `key = value` problem manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{LassoError, Result};
use crate::model::{DenseMatrix, LassoProblem};
use crate::probgen::Instance;

fn parse_err(context: impl Into<String>, message: impl Into<String>) -> LassoError {
    LassoError::Parse { context: context.into(), message: message.into() }
}

fn parse_f64(tok: &str, context: &str) -> Result<f64> {
    tok.parse::<f64>().map_err(|_| parse_err(context, format!("'{tok}' is not a number")))
}

/// Reads `%%MatrixMarket matrix array real general`.
pub fn parse_matrix_market(text: &str, context: &str) -> Result<DenseMatrix<f64>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| parse_err(context, "empty file"))?;
    let h: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "array" || h[3] != "real" || h[4] != "general"
    {
        return Err(parse_err(context, "expected '%%MatrixMarket matrix array real general'"));
    }
    let mut body = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let dims = body.next().ok_or_else(|| parse_err(context, "missing size line"))?;
    let d: Vec<&str> = dims.split_whitespace().collect();
    if d.len() != 2 {
        return Err(parse_err(context, "size line must hold two integers"));
    }
    let rows: usize = d[0].parse().map_err(|_| parse_err(context, "bad row count"))?;
    let cols: usize = d[1].parse().map_err(|_| parse_err(context, "bad column count"))?;
    let mut data = Vec::with_capacity(rows * cols);
    for line in body {
        for tok in line.split_whitespace() {
            data.push(parse_f64(tok, context)?);
        }
    }
    if data.len() != rows * cols {
        return Err(parse_err(context, format!("expected {} entries, found {}", rows * cols, data.len())));
    }
    DenseMatrix::from_col_major(rows, cols, data)
}

pub fn format_matrix_market(a: &DenseMatrix<f64>) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} {}", a.nrows(), a.ncols());
    for v in a.data() {
        let _ = writeln!(s, "{v:e}");
    }
    s
}

pub fn parse_vector(text: &str, context: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with('%'))
        .map(|l| parse_f64(l, context))
        .collect()
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::new();
    for x in v {
        let _ = writeln!(s, "{x:e}");
    }
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| LassoError::Io(format!("{}: {e}", path.display())))
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix<f64>> {
    parse_matrix_market(&read(path)?, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read(path)?, &path.display().to_string())
}

/// Parsed manifest. File paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub a: PathBuf,
    pub b: PathBuf,
    pub w: Option<PathBuf>,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: f64,
    pub c: Option<PathBuf>,
}

impl Manifest {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut a = None;
        let mut b = None;
        let mut w = None;
        let mut tau = None;
        let mut sigma = None;
        let mut mu = None;
        let mut c = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("line {}", lineno + 1), "expected key = value"))?;
            let key = key.trim();
            let value = value.trim();
            let slot_path = |slot: &mut Option<PathBuf>| -> Result<()> {
                if slot.is_some() {
                    return Err(parse_err(key, "duplicate key"));
                }
                if value.is_empty() {
                    return Err(parse_err(key, "empty path"));
                }
                *slot = Some(base.join(value));
                Ok(())
            };
            let slot_num = |slot: &mut Option<f64>| -> Result<()> {
                if slot.is_some() {
                    return Err(parse_err(key, "duplicate key"));
                }
                *slot = Some(parse_f64(value, key)?);
                Ok(())
            };
            match key {
                "A" => slot_path(&mut a)?,
                "b" => slot_path(&mut b)?,
                "w" => slot_path(&mut w)?,
                "c" => slot_path(&mut c)?,
                "tau" => slot_num(&mut tau)?,
                "sigma" => slot_num(&mut sigma)?,
                "mu" => slot_num(&mut mu)?,
                other => return Err(parse_err(other, "unknown key")),
            }
        }
        let a = a.ok_or_else(|| parse_err("A", "missing required key"))?;
        let b = b.ok_or_else(|| parse_err("b", "missing required key"))?;
        match (tau, sigma) {
            (Some(_), Some(_)) => return Err(parse_err("tau", "tau and sigma are mutually exclusive")),
            (None, None) => return Err(parse_err("tau", "one of tau or sigma is required")),
            _ => {}
        }
        Ok(Self { a, b, w, tau, sigma, mu: mu.unwrap_or(0.0), c })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&read(path)?, base)
    }

    /// Loads the data. With `sigma` set the returned problem has `τ = 0`.
    pub fn load(&self) -> Result<LassoProblem<f64>> {
        let a = read_matrix_market(&self.a)?;
        let b = read_vector(&self.b)?;
        let tau = self.tau.unwrap_or(0.0);
        let mut p = LassoProblem::new(Arc::new(a), b, tau).map_err(|e| keyed(e, "b"))?;
        if let Some(w) = &self.w {
            p = p.with_weights(read_vector(w)?).map_err(|e| keyed(e, "w"))?;
        }
        if let Some(c) = &self.c {
            p = p.with_linear_term(read_vector(c)?).map_err(|e| keyed(e, "c"))?;
        }
        p.with_mu(self.mu).map_err(|e| keyed(e, "mu"))
    }

    pub fn render(&self, base: &Path) -> String {
        let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
        let mut s = String::new();
        let _ = writeln!(s, "A = {}", rel(&self.a));
        let _ = writeln!(s, "b = {}", rel(&self.b));
        if let Some(w) = &self.w {
            let _ = writeln!(s, "w = {}", rel(w));
        }
        if let Some(c) = &self.c {
            let _ = writeln!(s, "c = {}", rel(c));
        }
        if let Some(t) = self.tau {
            let _ = writeln!(s, "tau = {t:e}");
        }
        if let Some(t) = self.sigma {
            let _ = writeln!(s, "sigma = {t:e}");
        }
        if self.mu != 0.0 {
            let _ = writeln!(s, "mu = {:e}", self.mu);
        }
        s
    }
}

fn keyed(e: LassoError, key: &str) -> LassoError {
    match e {
        LassoError::Parse { .. } | LassoError::Io(_) => e,
        other => parse_err(key, other.to_string()),
    }
}

/// Writes `A.mtx`, `b.txt`, `x0.txt`, `manifest.txt` and `metadata.json`.
///
/// The manifest carries `sigma` when the instance has one, `tau` otherwise.
pub fn write_bundle(dir: &Path, inst: &Instance) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("A.mtx"), format_matrix_market(&inst.a))?;
    fs::write(dir.join("b.txt"), format_vector(&inst.b))?;
    fs::write(dir.join("x0.txt"), format_vector(&inst.x0))?;
    let manifest = Manifest {
        a: dir.join("A.mtx"),
        b: dir.join("b.txt"),
        w: None,
        tau: if inst.sigma.is_some() { None } else { Some(inst.tau) },
        sigma: inst.sigma,
        mu: 0.0,
        c: None,
    };
    fs::write(dir.join("manifest.txt"), manifest.render(dir))?;
    let meta = serde_json::to_string_pretty(&inst.metadata).map_err(|e| LassoError::Io(e.to_string()))?;
    fs::write(dir.join("metadata.json"), meta + "\n")?;
    Ok(())
}
