//! CSV writers. Column orders:
//!
//! - compositions: one column per part, header = labels
//! - profile: `alpha, profile_loglik, gamma_<label>…` (empty cells for gaps)
//! - mean curve: `alpha, mean_<label>…, se_<label>…`
//! - order study: `alpha, exact, asymptotic, gap`
//! - comparison: `method, alpha, <label>…` (empty cells for failed rows)
//!
//! Reals use the shortest representation that parses back to the same
//! double.

use std::io::Write;

use crate::alpha_fit::ProfileCurve;
use crate::sim::{ComparisonTable, MeanCurve, OrderRow};

pub fn format_real(v: f64) -> String {
    format!("{v}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn io(e: csv::Error) -> std::io::Error {
    e.into()
}

pub fn write_compositions<W: Write>(w: W, labels: &[String], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(labels).map_err(io)?;
    for r in rows {
        out.write_record(r.iter().map(|v| format_real(*v))).map_err(io)?;
    }
    out.flush()
}

pub fn write_profile<W: Write>(w: W, labels: &[String], curve: &ProfileCurve) -> std::io::Result<()> {
    let mut out = writer(w);
    let mut header = vec!["alpha".to_string(), "profile_loglik".to_string()];
    header.extend(labels.iter().map(|l| format!("gamma_{l}")));
    out.write_record(&header).map_err(io)?;
    for ((a, v), p) in curve.alphas.iter().zip(&curve.values).zip(&curve.params) {
        let mut rec = vec![format_real(*a), v.map(format_real).unwrap_or_default()];
        match p {
            Some(p) => rec.extend(p.shapes().iter().map(|g| format_real(*g))),
            None => rec.extend(labels.iter().map(|_| String::new())),
        }
        out.write_record(&rec).map_err(io)?;
    }
    out.flush()
}

pub fn write_mean_curve<W: Write>(w: W, labels: &[String], curve: &MeanCurve) -> std::io::Result<()> {
    let mut out = writer(w);
    let mut header = vec!["alpha".to_string()];
    header.extend(labels.iter().map(|l| format!("mean_{l}")));
    header.extend(labels.iter().map(|l| format!("se_{l}")));
    out.write_record(&header).map_err(io)?;
    for ((a, m), s) in curve.alphas.iter().zip(&curve.means).zip(&curve.std_errors) {
        let rec = std::iter::once(format_real(*a))
            .chain(m.iter().map(|v| format_real(*v)))
            .chain(s.iter().map(|v| format_real(*v)));
        out.write_record(rec).map_err(io)?;
    }
    out.flush()
}

pub fn write_order_study<W: Write>(w: W, rows: &[OrderRow]) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(["alpha", "exact", "asymptotic", "gap"]).map_err(io)?;
    for r in rows {
        out.write_record([r.alpha, r.exact, r.asymptotic, r.gap].map(format_real))
            .map_err(io)?;
    }
    out.flush()
}

pub fn write_comparison<W: Write>(w: W, table: &ComparisonTable) -> std::io::Result<()> {
    let mut out = writer(w);
    let mut header = vec!["method".to_string(), "alpha".to_string()];
    header.extend(table.component_labels.iter().cloned());
    out.write_record(&header).map_err(io)?;
    for row in &table.rows {
        let mut rec = vec![row.estimator.label().to_string(), format_real(table.alpha_used)];
        match &row.shapes {
            Some(s) => rec.extend(s.iter().map(|v| format_real(*v))),
            None => rec.extend(table.component_labels.iter().map(|_| String::new())),
        }
        out.write_record(&rec).map_err(io)?;
    }
    out.flush()
}
