//! Time series assembly, correlation, charts and bit-stable exports.

mod correlation;
mod export;
mod svg;
mod table;

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub use correlation::{
    correlation_from_series, correlation_matrix, pearson, ranks, series, CorrelationMatrix, CorrelationMethod,
    AUX_NAMES,
};
pub use export::{export, to_bytes, Artifact, ExportFormat, FEATURE_COLUMNS, PROFILE_COLUMNS};
pub use svg::{diverging_color, render_heatmap, render_line_chart};
pub use table::{assemble_timeseries, FeatureRow, FeatureTable, TableMetadata};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no analyzed days")]
    NoDays,
    #[error("day {0} appears more than once")]
    DuplicateDay(NaiveDate),
    #[error("correlation needs at least 2 days, got {0}")]
    TooFewRows(usize),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
