//! Deterministic text output: fixed-precision floats, trace CSV, and
//! key-value summaries. Identical inputs always produce identical bytes.

use std::io::Write;
use std::path::Path;

use feedsolve::IterationTrace;

use crate::error::CliError;

/// 17 significant decimal digits: parses back to the exact same f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trace CSV columns: sweep, forward_diff, error, cum_sim_time. The error
/// column stays empty when no ground truth was computed.
pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("sweep,forward_diff,error,cum_sim_time\n");
    let mut cum = 0.0;
    for r in &trace.records {
        cum += r.sim_cost.unwrap_or(0.0);
        let err = r.error_to_truth.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.sweep,
            fmt_f64(r.forward_diff),
            err,
            fmt_f64(cum)
        ));
    }
    out
}

/// `key = value` lines in the order given.
pub fn key_value_block(pairs: &[(&str, String)]) -> String {
    let mut out = String::new();
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(content.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}
