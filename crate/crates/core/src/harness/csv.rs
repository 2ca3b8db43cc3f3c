//! CSV output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::ResultRow;

pub const HEADER: &str = "sweep_value,scheme,metric_mean,metric_stderr,outage_rate,trials";

/// Writes the rows to any sink. Floats carry 13 significant digits.
pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.12e},{},{:.12e},{:.12e},{:.12e},{}",
            r.sweep_value, r.scheme, r.metric_mean, r.metric_stderr, r.outage_rate, r.trials
        )?;
    }
    out.flush()
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to write".into()));
    }
    let io_err = |source| Error::Io { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err)?;
    write_csv(rows, BufWriter::new(file)).map_err(io_err)
}
