//! Tidy `(x, y, group)` tables for external plotting tools.

use std::path::Path;

use super::csvout::Table;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStatus {
    Written { rows: usize },
    /// The source had no data rows; only the header was written.
    EmptyInput,
}

/// Projects `csv_path` onto the columns `x`, `y`, `group` and writes them to
/// `out_path`. Rows are kept verbatim and in order, duplicates included.
pub fn emit_plotdata(csv_path: &Path, x: &str, y: &str, group: &str, out_path: &Path) -> Result<PlotStatus> {
    let src = Table::read(csv_path)?;
    let col = |name: &str| {
        src.header().iter().position(|h| h == name).ok_or_else(|| {
            Error::Parameter(format!(
                "field `{name}` not found in {}; available fields: {}",
                csv_path.display(),
                src.header().join(", ")
            ))
        })
    };
    let (xi, yi, gi) = (col(x)?, col(y)?, col(group)?);
    let mut out = Table::new(&["x", "y", "group"]);
    for r in src.rows() {
        out.push([r[xi].clone(), r[yi].clone(), r[gi].clone()]);
    }
    out.write(out_path)?;
    Ok(if src.rows().is_empty() {
        PlotStatus::EmptyInput
    } else {
        PlotStatus::Written { rows: src.rows().len() }
    })
}
