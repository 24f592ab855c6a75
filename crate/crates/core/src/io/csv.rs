use std::fmt::Write as _;
use std::path::Path;

use crate::diagnostics::{BmoMode, DiagnosticsRecord};
use crate::error::{Error, Result};

/// Column names of a diagnostics series, in order.
pub const SERIES_COLUMNS: [&str; 19] = [
    "time",
    "l2_u",
    "l2_v",
    "l2_theta",
    "l2_triple",
    "hhalf_triple",
    "h1_triple",
    "h32_triple",
    "h2_triple",
    "lp_alpha_u",
    "lp_beta_v",
    "bmo_u",
    "bmo_v",
    "bmo_theta",
    "pi",
    "pi_tilde",
    "energy_residual",
    "damping_res_u",
    "damping_res_v",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(r: &DiagnosticsRecord, mode: BmoMode) -> [f64; 19] {
    let [bu, bv, bt] = r.bmo(mode);
    [
        r.time,
        r.l2.u,
        r.l2.v,
        r.l2.theta,
        r.l2.triple,
        r.h_half.triple,
        r.h1.triple,
        r.h32.triple,
        r.h2.triple,
        r.lp_alpha_u,
        r.lp_beta_v,
        bu,
        bv,
        bt,
        r.pi,
        r.pi_tilde,
        r.energy_residual,
        r.damping_res_u,
        r.damping_res_v,
    ]
}

/// Header plus one line per record; the BMO columns use `mode`.
pub fn series_to_csv(records: &[DiagnosticsRecord], mode: BmoMode) -> String {
    let mut out = SERIES_COLUMNS.join(",");
    out.push('\n');
    for r in records {
        let line: Vec<String> = row(r, mode).iter().map(|&x| fmt_float(x)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

/// Writes [`series_to_csv`] to `path`, creating parent directories.
pub fn write_series(records: &[DiagnosticsRecord], mode: BmoMode, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, series_to_csv(records, mode))?;
    Ok(())
}

/// A numeric CSV table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Columns {
    pub names: Vec<String>,
    /// One vector per data line.
    pub rows: Vec<Vec<f64>>,
}

impl Columns {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

/// Parses a header line followed by numeric lines.
pub fn split_columns(text: &str) -> Result<Columns> {
    let bad = |msg: String| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, msg));
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let names: Vec<String> = match lines.next() {
        Some(h) => h.split(',').map(|s| s.trim().to_string()).collect(),
        None => return Err(bad("empty CSV file".into())),
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let vals = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        if vals.len() != names.len() {
            return Err(bad(format!(
                "line {}: {} fields, header has {}",
                i + 2,
                vals.len(),
                names.len()
            )));
        }
        rows.push(vals);
    }
    Ok(Columns { names, rows })
}

pub fn read_columns(path: &Path) -> Result<Columns> {
    split_columns(&std::fs::read_to_string(path)?)
}
