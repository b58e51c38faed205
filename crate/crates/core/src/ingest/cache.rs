//! On-disk graph cache: one versioned JSON document per day.
//!
//! ```text
//! <dir>/graphs/YYYY-MM-DD.json   {"format":"tokennet-daily-graph","version":1,"day":...,
//!                                 "nodes":["0x…",…],"edges":[{"a":0,"b":1,"weight":"8","count":2},…]}
//! <dir>/ingest-stats.json        IngestStats plus the token address
//! ```
//!
//! Weights are decimal strings so 256-bit sums survive any JSON reader.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DailyGraph, Edge, GraphError, IngestStats};
use crate::address::Address;

pub const GRAPH_FORMAT: &str = "tokennet-daily-graph";
pub const GRAPH_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unsupported graph cache format {format:?} version {version}")]
    Version {
        path: PathBuf,
        format: String,
        version: u32,
    },
    #[error("{path}: {source}")]
    Graph {
        path: PathBuf,
        #[source]
        source: GraphError,
    },
    #[error("no graph cache under {0}")]
    Missing(PathBuf),
}

impl CacheError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        CacheError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Serialize)]
struct GraphDocRef<'a> {
    format: &'a str,
    version: u32,
    day: NaiveDate,
    nodes: &'a [Address],
    edges: &'a [Edge],
}

#[derive(Deserialize)]
struct GraphDoc {
    format: String,
    version: u32,
    day: NaiveDate,
    nodes: Vec<Address>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct StatsDoc {
    format: String,
    version: u32,
    token: Address,
    stats: IngestStats,
}

pub fn save_graph(graph: &DailyGraph, path: &Path) -> Result<(), CacheError> {
    let file = fs::File::create(path).map_err(|e| CacheError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let doc = GraphDocRef {
        format: GRAPH_FORMAT,
        version: GRAPH_FORMAT_VERSION,
        day: graph.day(),
        nodes: graph.nodes(),
        edges: graph.edges(),
    };
    serde_json::to_writer(&mut out, &doc).map_err(|e| CacheError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| CacheError::io(path, e))
}

pub fn load_graph(path: &Path) -> Result<DailyGraph, CacheError> {
    let file = fs::File::open(path).map_err(|e| CacheError::io(path, e))?;
    let doc: GraphDoc = serde_json::from_reader(BufReader::new(file)).map_err(|e| CacheError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    if doc.format != GRAPH_FORMAT || doc.version != GRAPH_FORMAT_VERSION {
        return Err(CacheError::Version {
            path: path.to_path_buf(),
            format: doc.format,
            version: doc.version,
        });
    }
    DailyGraph::from_parts(doc.day, doc.nodes, doc.edges).map_err(|e| CacheError::Graph {
        path: path.to_path_buf(),
        source: e,
    })
}

fn graphs_dir(dir: &Path) -> PathBuf {
    dir.join("graphs")
}

/// Writes every graph plus the stats file, replacing any earlier cache in `dir`.
pub fn write_graph_cache(
    dir: &Path,
    token: Address,
    graphs: &[DailyGraph],
    stats: &IngestStats,
) -> Result<(), CacheError> {
    let gdir = graphs_dir(dir);
    fs::create_dir_all(&gdir).map_err(|e| CacheError::io(&gdir, e))?;
    for entry in fs::read_dir(&gdir).map_err(|e| CacheError::io(&gdir, e))? {
        let path = entry.map_err(|e| CacheError::io(&gdir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            fs::remove_file(&path).map_err(|e| CacheError::io(&path, e))?;
        }
    }
    for g in graphs {
        save_graph(g, &gdir.join(format!("{}.json", g.day())))?;
    }
    let path = dir.join("ingest-stats.json");
    let doc = StatsDoc {
        format: "tokennet-ingest-stats".into(),
        version: GRAPH_FORMAT_VERSION,
        token,
        stats: stats.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CacheError::Json {
        path: path.clone(),
        source: e,
    })?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CacheError::io(&path, e))
}

pub fn load_stats(dir: &Path) -> Result<(Address, IngestStats), CacheError> {
    let path = dir.join("ingest-stats.json");
    if !path.exists() {
        return Err(CacheError::Missing(dir.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(|e| CacheError::io(&path, e))?;
    let doc: StatsDoc = serde_json::from_str(&text).map_err(|e| CacheError::Json { path, source: e })?;
    Ok((doc.token, doc.stats))
}

/// Loads every cached day in ascending date order.
pub fn load_graph_cache(dir: &Path) -> Result<Vec<DailyGraph>, CacheError> {
    let gdir = graphs_dir(dir);
    if !gdir.is_dir() {
        return Err(CacheError::Missing(dir.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(&gdir)
        .map_err(|e| CacheError::io(&gdir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    if paths.is_empty() {
        return Err(CacheError::Missing(dir.to_path_buf()));
    }
    paths.sort();
    paths.iter().map(|p| load_graph(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip_with_large_weight() {
        let dir = tempfile::tempdir().unwrap();
        let day = NaiveDate::from_ymd_opt(2021, 4, 5).unwrap();
        let mut g = DailyGraph::from_pairs(day, 3, &[(0, 1), (1, 2)]).unwrap();
        let mut edges = g.edges().to_vec();
        edges[0].weight = primitive_types::U256::from_dec_str("1295000000000000000000000000000").unwrap();
        g = DailyGraph::from_parts(day, g.nodes().to_vec(), edges).unwrap();
        let path = dir.path().join("g.json");
        save_graph(&g, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"format\":\"tokennet-daily-graph\",\"version\":1,"));
        assert!(text.contains("\"weight\":\"1295000000000000000000000000000\""));
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    #[test]
    fn rejects_unknown_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        fs::write(
            &path,
            r#"{"format":"tokennet-daily-graph","version":99,"day":"2021-04-05","nodes":[],"edges":[]}"#,
        )
        .unwrap();
        assert!(matches!(
            load_graph(&path),
            Err(CacheError::Version { version: 99, .. })
        ));
    }

    #[test]
    fn missing_cache_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_graph_cache(dir.path()), Err(CacheError::Missing(_))));
        assert!(matches!(load_stats(dir.path()), Err(CacheError::Missing(_))));
    }
}
