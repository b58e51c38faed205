//! C ABI over the tokennet library.
//!
//! Graphs and datasets are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`TnStatus`]; on failure [`tn_last_error`] describes the problem. Strings
//! returned by this library are freed with [`tn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use chrono::NaiveDate;

use tokennet::coreperiphery::{analyze_core, lip_partition, NullModel, NullModelConfig};
use tokennet::features::topology_features;
use tokennet::ingest::{load_graph_cache, DailyGraph, NodeId};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Graph = 4,
    Io = 5,
    Feature = 6,
    Core = 7,
    Panic = 8,
}

/// Null model used by the core significance test.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnNullModel {
    Gnm = 0,
    DegreePreserving = 1,
}

/// One day's transfer graph.
pub struct TnGraph {
    inner: DailyGraph,
}

/// All cached days of one token, ascending by date.
pub struct TnDataset {
    graphs: Vec<TnGraph>,
}

/// The four topology features.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnTopology {
    pub n_components: usize,
    pub largest_component_ratio: f64,
    pub modularity: f64,
    pub degree_centrality_std: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TnCoreConfig {
    pub replicates: u32,
    pub swaps_per_edge: u32,
    pub alpha: f64,
    pub seed: u64,
    pub null_model: TnNullModel,
    /// Run the significance test; otherwise the day counts as not significant.
    pub run_test: bool,
}

/// Core-periphery outcome. `p_value` is meaningful only when `has_p_value`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TnCoreResult {
    pub n_core: usize,
    pub avg_core_degree: f64,
    pub z_error: u64,
    pub has_p_value: bool,
    pub p_value: f64,
    pub significant: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl ToString) {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn guard<F: FnOnce() -> Result<(), (TnStatus, String)>>(f: F) -> TnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            TnStatus::Ok
        }
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TnStatus::Panic
        }
    }
}

fn null_err(what: &str) -> (TnStatus, String) {
    (TnStatus::NullPointer, format!("{what} is null"))
}

/// Message of the last failed call on this thread, or null after a success.
///
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn tn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a graph on nodes `0..node_count` from `edge_count` pairs stored
/// flat in `edges` (`edges[2i]`, `edges[2i+1]`). Every node needs an edge;
/// nodes get synthetic addresses in index order.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_graph_from_edges(
    year: i32,
    month: u32,
    day: u32,
    node_count: usize,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut TnGraph,
) -> TnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        if edges.is_null() && edge_count > 0 {
            return Err(null_err("edges"));
        }
        let date = NaiveDate::from_ymd_opt(year, month, day)
            .ok_or_else(|| (TnStatus::InvalidArgument, format!("invalid date {year}-{month}-{day}")))?;
        let flat: &[u32] = if edge_count == 0 {
            &[]
        } else {
            std::slice::from_raw_parts(edges, edge_count * 2)
        };
        let pairs: Vec<(NodeId, NodeId)> = flat.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let graph = DailyGraph::from_pairs(date, node_count, &pairs).map_err(|e| (TnStatus::Graph, e.to_string()))?;
        *out = Box::into_raw(Box::new(TnGraph { inner: graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from [`tn_graph_from_edges`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tn_graph_free(graph: *mut TnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tn_graph_node_count(graph: *const TnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.node_count())
}

/// # Safety
/// `graph` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tn_graph_edge_count(graph: *const TnGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Address of `node` as a `0x…` string, to be freed with [`tn_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_graph_address(graph: *const TnGraph, node: u32, out: *mut *mut c_char) -> TnStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        if node as usize >= g.inner.node_count() {
            return Err((TnStatus::InvalidArgument, format!("node {node} out of range")));
        }
        let s = CString::new(g.inner.address(node).to_string()).expect("hex has no NUL");
        *out = s.into_raw();
        Ok(())
    })
}

/// Loads every cached day from a dataset directory written by `tokennet ingest`.
///
/// # Safety
/// `dir` must be a NUL-terminated UTF-8 path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_dataset_load(dir: *const c_char, out: *mut *mut TnDataset) -> TnStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        *out = ptr::null_mut();
        if dir.is_null() {
            return Err(null_err("dir"));
        }
        let dir = CStr::from_ptr(dir)
            .to_str()
            .map_err(|_| (TnStatus::InvalidArgument, "dir is not UTF-8".to_string()))?;
        let graphs = load_graph_cache(Path::new(dir)).map_err(|e| (TnStatus::Io, e.to_string()))?;
        *out = Box::into_raw(Box::new(TnDataset {
            graphs: graphs.into_iter().map(|inner| TnGraph { inner }).collect(),
        }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must come from [`tn_dataset_load`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tn_dataset_free(dataset: *mut TnDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn tn_dataset_len(dataset: *const TnDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.graphs.len())
}

/// Borrowed graph of day `index`, valid while the dataset lives; null when out of range.
///
/// # Safety
/// `dataset` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tn_dataset_graph(dataset: *const TnDataset, index: usize) -> *const TnGraph {
    dataset
        .as_ref()
        .and_then(|d| d.graphs.get(index))
        .map_or(ptr::null(), |g| g as *const TnGraph)
}

/// Components, largest-component ratio, modularity and degree-centrality spread.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_topology(graph: *const TnGraph, community_seed: u64, out: *mut TnTopology) -> TnStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let t = topology_features(&g.inner, community_seed).map_err(|e| (TnStatus::Feature, e.to_string()))?;
        *out = TnTopology {
            n_components: t.n_components,
            largest_component_ratio: t.largest_component_ratio,
            modularity: t.modularity,
            degree_centrality_std: t.degree_centrality_std,
        };
        Ok(())
    })
}

/// Default core configuration: 100 replicates, 10 swaps per edge, alpha 0.05,
/// seed 0, G(n,m) null, test enabled.
#[no_mangle]
pub extern "C" fn tn_core_config_default() -> TnCoreConfig {
    let d = NullModelConfig::default();
    TnCoreConfig {
        replicates: d.replicates,
        swaps_per_edge: d.swaps_per_edge,
        alpha: d.alpha,
        seed: d.master_seed,
        null_model: TnNullModel::Gnm,
        run_test: true,
    }
}

/// Detects the core and optionally tests its significance.
///
/// # Safety
/// `graph` and `config` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_core_periphery(
    graph: *const TnGraph,
    config: *const TnCoreConfig,
    out: *mut TnCoreResult,
) -> TnStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        let c = config.as_ref().ok_or_else(|| null_err("config"))?;
        let out = out.as_mut().ok_or_else(|| null_err("out"))?;
        let null = NullModelConfig {
            replicates: c.replicates,
            swaps_per_edge: c.swaps_per_edge,
            alpha: c.alpha,
            master_seed: c.seed,
            null_model: match c.null_model {
                TnNullModel::Gnm => NullModel::Gnm,
                TnNullModel::DegreePreserving => NullModel::DegreePreserving,
            },
            ..NullModelConfig::default()
        };
        let r = analyze_core(&g.inner, &null, c.run_test).map_err(|e| (TnStatus::Core, e.to_string()))?;
        *out = TnCoreResult {
            n_core: r.n_core,
            avg_core_degree: r.avg_core_degree,
            z_error: r.z_error,
            has_p_value: r.p_value.is_some(),
            p_value: r.p_value.unwrap_or(f64::NAN),
            significant: r.significant,
        };
        Ok(())
    })
}

/// Writes the core's node indices (highest degree first) into `buf`.
///
/// `*len` always receives the core size; if it exceeds `cap` nothing is
/// written and `BufferTooSmall` is returned. `buf` may be null when `cap` is 0.
///
/// # Safety
/// `buf` must have room for `cap` values; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tn_core_nodes(graph: *const TnGraph, buf: *mut u32, cap: usize, len: *mut usize) -> TnStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null_err("graph"))?;
        let len = len.as_mut().ok_or_else(|| null_err("len"))?;
        let core = lip_partition(&g.inner).core;
        *len = core.len();
        if core.len() > cap {
            return Err((
                TnStatus::BufferTooSmall,
                format!("core has {} nodes, buffer holds {cap}", core.len()),
            ));
        }
        if !core.is_empty() {
            if buf.is_null() {
                return Err(null_err("buf"));
            }
            std::slice::from_raw_parts_mut(buf, core.len()).copy_from_slice(&core);
        }
        Ok(())
    })
}
