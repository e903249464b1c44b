//! Result emission: summary CSV, convergence CSV, trace JSONL. Numbers are
//! printed at 17 significant digits; wall-clock columns are excluded from
//! reproducibility comparisons.

use sha2::{Digest, Sha256};
use smolyak_ps::adaptive::TraceStep;
use smolyak_ps::fmt::sig17;
use std::io::Write;
use std::path::Path;

use crate::CliError;

pub const SUMMARY_HEADER: &str = "mode,dim,evals,eps_global,mc_l2_error,wall_ms,config_hash";

/// Short hash of the raw config bytes, embedded in every summary row.
pub fn config_hash(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    let mut s = String::with_capacity(16);
    for b in &digest[..8] {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub struct SummaryRow {
    pub mode: &'static str,
    pub dim: usize,
    pub evals: u64,
    pub eps_global: f64,
    pub mc_l2_error: f64,
    pub wall_ms: u64,
    pub config_hash: String,
}

pub fn write_summary(path: &Path, row: &SummaryRow) -> Result<(), CliError> {
    let body = format!(
        "{}\n{},{},{},{},{},{},{}\n",
        SUMMARY_HEADER,
        row.mode,
        row.dim,
        row.evals,
        sig17(row.eps_global),
        sig17(row.mc_l2_error),
        row.wall_ms,
        row.config_hash
    );
    std::fs::write(path, body).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn write_trace(path: &Path, trace: &[TraceStep]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    for step in trace {
        let line = serde_json::to_string(step).expect("trace serialization cannot fail");
        writeln!(f, "{line}").map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

pub struct ConvergenceRow {
    pub evals: u64,
    pub l2_error: f64,
    pub eps_global: f64,
}

pub fn write_convergence(path: &Path, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    let mut body = String::from("evals,l2_error,eps_global\n");
    for r in rows {
        body.push_str(&format!(
            "{},{},{}\n",
            r.evals,
            sig17(r.l2_error),
            sig17(r.eps_global)
        ));
    }
    std::fs::write(path, body).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
