use std::path::Path;

use crate::error::{Error, Result};
use crate::simplex::{Composition, LogData};

/// Largest accepted `|Σ_j x_ij − 1|` under [`Closure::Strict`].
pub const STRICT_CLOSURE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroPolicy {
    /// Reject zero cells.
    Error,
    /// Replace zeros by ε, then renormalize the row.
    EpsilonReplace(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// Rows must already sum to 1 within [`STRICT_CLOSURE_TOLERANCE`].
    Strict,
    /// Rows are divided by their sums.
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadOptions {
    pub has_header: bool,
    pub zero_policy: ZeroPolicy,
    pub closure: Closure,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            has_header: true,
            zero_policy: ZeroPolicy::Error,
            closure: Closure::Strict,
        }
    }
}

/// A named compositional sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub component_labels: Vec<String>,
    pub rows: Vec<Composition>,
    pub provenance: String,
}

impl Dataset {
    pub fn n_parts(&self) -> usize {
        self.component_labels.len()
    }

    pub fn log_data(&self) -> Result<LogData> {
        LogData::new(&self.rows)
    }
}

fn input_err(path: &Path, detail: String) -> Error {
    Error::Input {
        path: path.to_path_buf(),
        detail,
    }
}

/// Read a comma-separated file of compositions, one per row.
///
/// Rows and columns in messages are 1-based; the header (if any) is row 1.
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    if let ZeroPolicy::EpsilonReplace(eps) = opts.zero_policy {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("zero replacement ε must lie in (0, 1), got {eps}")));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: path.to_path_buf(),
                source,
            },
            other => input_err(path, format!("{other:?}")),
        })?;
    let mut labels: Option<Vec<String>> = if opts.has_header {
        let h = reader
            .headers()
            .map_err(|e| input_err(path, e.to_string()))?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };
    let offset = if opts.has_header { 2 } else { 1 };
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + offset;
        let rec = rec.map_err(|e| input_err(path, format!("row {line}: {e}")))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let width = labels.as_ref().map_or(rec.len(), Vec::len);
        if rec.len() != width {
            return Err(input_err(
                path,
                format!("row {line} has {} fields, expected {width}", rec.len()),
            ));
        }
        let mut values = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                input_err(path, format!("row {line}, column {}: {cell:?} is not a number", j + 1))
            })?;
            if !v.is_finite() || v < 0.0 {
                return Err(input_err(
                    path,
                    format!("row {line}, column {}: {v} is not a nonnegative number", j + 1),
                ));
            }
            values.push(v);
        }
        if labels.is_none() {
            labels = Some((1..=width).map(|j| format!("x{j}")).collect());
        }
        rows.push(close_row(path, line, values, opts)?);
    }
    let component_labels = labels.unwrap_or_default();
    if rows.is_empty() {
        return Err(input_err(path, "no data rows".into()));
    }
    if component_labels.len() < 2 {
        return Err(input_err(path, "compositions need at least 2 columns".into()));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset {
        name,
        component_labels,
        rows,
        provenance: format!("loaded from {}", path.display()),
    })
}

fn close_row(path: &Path, line: usize, mut values: Vec<f64>, opts: &LoadOptions) -> Result<Composition> {
    let sum: f64 = values.iter().sum();
    if opts.closure == Closure::Strict && (sum - 1.0).abs() > STRICT_CLOSURE_TOLERANCE {
        return Err(input_err(
            path,
            format!("row {line} sums to {sum}, not 1 within {STRICT_CLOSURE_TOLERANCE}"),
        ));
    }
    if let Some(j) = values.iter().position(|v| *v == 0.0) {
        match opts.zero_policy {
            ZeroPolicy::Error => {
                return Err(input_err(
                    path,
                    format!("row {line}, column {}: zero component", j + 1),
                ))
            }
            ZeroPolicy::EpsilonReplace(eps) => {
                let total = sum.max(f64::MIN_POSITIVE);
                values.iter_mut().for_each(|v| {
                    *v = if *v == 0.0 { eps } else { *v / total };
                });
            }
        }
    }
    Composition::close(values).map_err(|e| input_err(path, format!("row {line}: {e}")))
}
