//! Decentralization analysis of token transfer networks.
//!
//! The pipeline turns raw transfer exports into one undirected graph per UTC
//! day ([`ingest`]), measures four topology features ([`features`]), detects
//! and significance-tests a discrete core-periphery split ([`coreperiphery`]),
//! profiles core addresses ([`intel`]) and writes tables and charts
//! ([`report`]). [`pipeline`] wires the stages together with on-disk caches
//! between them.

pub mod address;
pub mod coreperiphery;
pub mod features;
pub mod ingest;
pub mod intel;
pub mod pipeline;
pub mod report;
mod util;

pub use address::Address;
pub use util::{fmt_f64, mix_seed};
