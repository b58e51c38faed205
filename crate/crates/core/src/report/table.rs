use chrono::NaiveDate;
use primitive_types::U256;
use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::features::FeatureVector;

/// One analyzed day: the feature vector plus the raw core values and daily totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub features: FeatureVector,
    /// Core size before the significance policy was applied.
    pub n_core_raw: usize,
    pub avg_core_degree_raw: f64,
    pub z_error: u64,
    pub core_p_value: Option<f64>,
    pub significant: bool,
    #[serde(with = "crate::util::u256_dec")]
    pub daily_value: U256,
    pub daily_addresses: usize,
    pub daily_transfers: u64,
}

impl FeatureRow {
    pub fn day(&self) -> NaiveDate {
        self.features.day
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub token: String,
    pub config_digest: String,
}

/// Daily rows in strictly increasing date order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureTable {
    pub metadata: TableMetadata,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn total_value(&self) -> U256 {
        self.rows
            .iter()
            .fold(U256::zero(), |acc, r| acc.saturating_add(r.daily_value))
    }
}

/// Sorts per-day rows by date. Days without transfers are simply absent.
pub fn assemble_timeseries<I>(metadata: TableMetadata, per_day: I) -> Result<FeatureTable, ReportError>
where
    I: IntoIterator<Item = FeatureRow>,
{
    let mut rows: Vec<FeatureRow> = per_day.into_iter().collect();
    if rows.is_empty() {
        return Err(ReportError::NoDays);
    }
    rows.sort_by_key(FeatureRow::day);
    if let Some(w) = rows.windows(2).find(|w| w[0].day() == w[1].day()) {
        return Err(ReportError::DuplicateDay(w[0].day()));
    }
    Ok(FeatureTable { metadata, rows })
}
