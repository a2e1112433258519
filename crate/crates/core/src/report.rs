// SPDX-License-Identifier: Apache-2.0

//! CSV output. Floats are written with 17 significant digits so that every
//! value reads back to the same double.

use std::io::Write;

use crate::error::{Result, TnsError};
use crate::geometry::DimensionReport;
use crate::optimize::{CurvePoint, TraceRecord};

pub const TRACE_HEADER: [&str; 8] = [
    "iteration",
    "f",
    "f_reg",
    "overlap",
    "max_abs_entry",
    "frobenius_norms",
    "transfer_product_norm",
    "flag",
];

pub const GEOMETRY_HEADER: [&str; 6] = ["state", "N", "m", "predicted", "measured", "match"];

pub const CURVE_HEADER: [&str; 5] = ["N", "eps", "f", "overlap", "max_abs_entry"];

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        format!("{}", x)
    }
}

fn csv_err(e: csv::Error) -> TnsError {
    TnsError::Format(format!("csv: {}", e))
}

/// Writes a header and rows, quoting fields as needed.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| TnsError::Format(format!("csv: {}", e)))
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    String::from_utf8(buf).map_err(|e| TnsError::Format(e.to_string()))
}

pub fn trace_rows(records: &[TraceRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            let norms: Vec<String> = r.frobenius_norms.iter().map(|&x| fmt_f64(x)).collect();
            vec![
                r.iteration.to_string(),
                fmt_f64(r.f),
                fmt_f64(r.f_reg),
                fmt_f64(r.overlap),
                fmt_f64(r.max_abs_entry),
                format!("[{}]", norms.join(",")),
                fmt_f64(r.transfer_product_norm),
                r.flag.clone(),
            ]
        })
        .collect()
}

pub fn geometry_row(state: &str, n: usize, m: usize, report: &DimensionReport) -> Vec<String> {
    vec![
        state.to_string(),
        n.to_string(),
        m.to_string(),
        report.predicted.to_string(),
        report.measured.to_string(),
        report.matched.to_string(),
    ]
}

pub fn curve_row(n: usize, p: &CurvePoint) -> Vec<String> {
    vec![n.to_string(), fmt_f64(p.eps), fmt_f64(p.f), fmt_f64(p.overlap), fmt_f64(p.max_abs_entry)]
}
