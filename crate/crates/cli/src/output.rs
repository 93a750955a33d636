//! CSV documents. Numbers are written in scientific notation with a fixed
//! count of significant digits, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use arrival_core::comparison::TimeSeries;
use arrival_core::protocol::ProtocolRow;
use arrival_core::Result as CoreResult;

use crate::ConfigError;

pub const TIMESERIES_HEADER: &str = "t,t_n,j,j_plus,p_x,delta,delta_abs";
pub const TABLE_HEADER: &str = "d,x0,t_i,t_f,X,transmittance,epsilon_used";

/// `x` with `digits` significant digits; `nan` for missing or non-finite.
pub fn format_number(x: Option<f64>, digits: usize) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{:.*e}", digits.saturating_sub(1), v),
        _ => "nan".to_string(),
    }
}

pub fn timeseries_csv(series: &TimeSeries, digits: usize) -> String {
    let mut doc = String::with_capacity(series.points.len() * 16 * digits);
    doc.push_str(TIMESERIES_HEADER);
    doc.push('\n');
    for p in &series.points {
        let c = p.current.as_ref();
        let d = p.delta.as_ref();
        let cells = [
            Some(p.t),
            Some(p.t_n),
            c.map(|c| c.j),
            c.map(|c| c.j_plus),
            c.map(|c| c.p_x),
            d.map(|d| d.delta),
            d.map(|d| d.delta_abs),
        ];
        let row: Vec<String> = cells.iter().map(|&v| format_number(v, digits)).collect();
        let _ = writeln!(doc, "{}", row.join(","));
    }
    doc
}

/// Failed rows keep their width and epsilon; the solved columns are `nan`.
pub fn table_csv(widths: &[f64], rows: &[CoreResult<ProtocolRow>], epsilon: f64, digits: usize) -> String {
    let mut doc = String::new();
    doc.push_str(TABLE_HEADER);
    doc.push('\n');
    for (&d, row) in widths.iter().zip(rows) {
        let cells = match row {
            Ok(r) => [Some(r.width), Some(r.x0), Some(r.t_i), Some(r.t_f), Some(r.detector), Some(r.transmittance), Some(r.epsilon)],
            Err(_) => [Some(d), None, None, None, None, None, Some(epsilon)],
        };
        let row: Vec<String> = cells.iter().map(|&v| format_number(v, digits)).collect();
        let _ = writeln!(doc, "{}", row.join(","));
    }
    doc
}

pub fn write_document(path: Option<&Path>, doc: &str) -> Result<(), ConfigError> {
    match path {
        Some(p) => fs::write(p, doc).map_err(|source| ConfigError::Io { path: p.to_path_buf(), source }),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}
