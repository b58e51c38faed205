//! Transfer ingestion: parsing, filtering, daily bucketing and graph construction.

mod cache;
mod graph;
mod records;

use std::collections::{BTreeMap, HashSet};

use chrono::NaiveDate;
use primitive_types::U256;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::address::Address;

pub use cache::{
    load_graph, load_graph_cache, load_stats, save_graph, write_graph_cache, CacheError, GRAPH_FORMAT,
    GRAPH_FORMAT_VERSION,
};
pub(crate) use graph::pair_key;
pub use graph::{build_daily_graph, DailyGraph, Edge, GraphBuilder, GraphError, NodeId};
pub use records::{parse_timestamp, parse_transfers, parse_value, InputFormat, RowError, RowErrorKind, TransferRecord};

/// Counts accumulated while ingesting one token's export.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub rows_read: u64,
    pub rows_malformed: u64,
    pub rows_other_token: u64,
    pub rows_filtered_null: u64,
    pub rows_filtered_selfloop: u64,
    pub rows_retained: u64,
    pub days: u64,
    pub first_day: Option<NaiveDate>,
    pub last_day: Option<NaiveDate>,
    /// Calendar span `first_day..=last_day`, counting both ends.
    pub duration_days: u64,
    pub unique_addresses: u64,
    #[serde(with = "crate::util::u256_dec")]
    pub total_value: U256,
}

/// Removal counts from [`filter_records`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterCounts {
    pub null: u64,
    pub selfloop: u64,
}

/// Why a record is dropped before graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    NullAddress,
    SelfLoop,
}

pub fn rejection(record: &TransferRecord) -> Option<Rejection> {
    if record.from_address.is_null() || record.to_address.is_null() {
        Some(Rejection::NullAddress)
    } else if record.from_address == record.to_address {
        Some(Rejection::SelfLoop)
    } else {
        None
    }
}

/// Drops mint/burn rows (null counterparty) and self-transfers.
pub fn filter_records(records: Vec<TransferRecord>) -> (Vec<TransferRecord>, FilterCounts) {
    let mut counts = FilterCounts::default();
    let kept = records
        .into_iter()
        .filter(|r| match rejection(r) {
            Some(Rejection::NullAddress) => {
                counts.null += 1;
                false
            }
            Some(Rejection::SelfLoop) => {
                counts.selfloop += 1;
                false
            }
            None => true,
        })
        .collect();
    (kept, counts)
}

/// Groups records by the UTC calendar date of their timestamp.
pub fn bucket_by_day(records: Vec<TransferRecord>) -> BTreeMap<NaiveDate, Vec<TransferRecord>> {
    let mut buckets: BTreeMap<NaiveDate, Vec<TransferRecord>> = BTreeMap::new();
    for r in records {
        buckets.entry(r.timestamp.date_naive()).or_default().push(r);
    }
    buckets
}

/// Number of calendar days from `first` to `last`, both included.
pub fn inclusive_duration(first: NaiveDate, last: NaiveDate) -> u64 {
    ((last - first).num_days() + 1).max(0) as u64
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    /// Stop at the first malformed row.
    #[default]
    Abort,
    /// Count malformed rows and continue.
    Skip,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub policy: ErrorPolicy,
    /// Restrict to one token; without it, every row must share one token address.
    pub token: Option<Address>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Row(#[from] RowError),
    #[error("export mixes tokens {first} and {other} (line {line}); select one with a token filter")]
    MixedTokens { first: Address, other: Address, line: u64 },
    #[error("no records")]
    NoRecords,
    #[error("total value overflows 256 bits")]
    ValueOverflow,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// All daily graphs of one token export.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub token: Address,
    pub graphs: Vec<DailyGraph>,
    pub stats: IngestStats,
}

/// Streams parsed rows into per-day graphs.
///
/// Rows are folded into per-day builders as they arrive, so the full record
/// set is never held in memory.
pub fn ingest<I>(rows: I, options: &IngestOptions) -> Result<Dataset, IngestError>
where
    I: IntoIterator<Item = Result<TransferRecord, RowError>>,
{
    let mut stats = IngestStats::default();
    let mut token = options.token;
    let mut builders: BTreeMap<NaiveDate, GraphBuilder> = BTreeMap::new();
    let mut addresses: HashSet<Address> = HashSet::new();
    let mut total = U256::zero();

    for row in rows {
        stats.rows_read += 1;
        let record = match row {
            Ok(r) => r,
            Err(e) => match options.policy {
                ErrorPolicy::Abort => return Err(e.into()),
                ErrorPolicy::Skip => {
                    log::warn!("skipping {e}");
                    stats.rows_malformed += 1;
                    continue;
                }
            },
        };
        match token {
            None => token = Some(record.token_address),
            Some(t) if t != record.token_address => {
                if options.token.is_some() {
                    stats.rows_other_token += 1;
                    continue;
                }
                return Err(IngestError::MixedTokens {
                    first: t,
                    other: record.token_address,
                    line: stats.rows_read + 1,
                });
            }
            Some(_) => {}
        }
        match rejection(&record) {
            Some(Rejection::NullAddress) => {
                stats.rows_filtered_null += 1;
                continue;
            }
            Some(Rejection::SelfLoop) => {
                stats.rows_filtered_selfloop += 1;
                continue;
            }
            None => {}
        }
        stats.rows_retained += 1;
        total = total.checked_add(record.value).ok_or(IngestError::ValueOverflow)?;
        addresses.insert(record.from_address);
        addresses.insert(record.to_address);
        let day = record.timestamp.date_naive();
        builders
            .entry(day)
            .or_insert_with(|| GraphBuilder::new(day))
            .push(&record)?;
    }

    let token = token.ok_or(IngestError::NoRecords)?;
    if builders.is_empty() {
        return Err(IngestError::NoRecords);
    }
    let graphs = builders
        .into_values()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(GraphBuilder::finish)
        .collect::<Result<Vec<_>, _>>()?;

    stats.days = graphs.len() as u64;
    stats.first_day = graphs.first().map(DailyGraph::day);
    stats.last_day = graphs.last().map(DailyGraph::day);
    if let (Some(first), Some(last)) = (stats.first_day, stats.last_day) {
        stats.duration_days = inclusive_duration(first, last);
    }
    stats.unique_addresses = addresses.len() as u64;
    stats.total_value = total;
    Ok(Dataset { token, graphs, stats })
}
