//! Stage runners: ingest → analyze → report, plus classify.
//!
//! Each stage reads the previous stage's cache from disk, so an expensive
//! stage can be rerun with new parameters without repeating the cheap ones.
//!
//! ```text
//! <out>/<token>/graphs/YYYY-MM-DD.json     ingest
//! <out>/<token>/ingest-stats.json          ingest
//! <out>/<token>/analysis/YYYY-MM-DD.json   analyze
//! <out>/<token>/features.csv               report
//! <out>/<token>/correlation.csv            report
//! <out>/<token>/profiles.csv               report, classify
//! <out>/<token>/charts/*.svg               report
//! <out>/<token>/run-metadata.json          report
//! ```

use std::fs::{self, File};
use std::io::{self, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::address::Address;
use crate::coreperiphery::{analyze_core, CoreError, CorePeripheryResult, CorePolicy, NullModelConfig};
use crate::features::{topology_features, FeatureError, FeatureVector, FEATURE_DIRECTIONS, FEATURE_NAMES};
use crate::ingest::{
    ingest, load_graph_cache, load_stats, parse_transfers, write_graph_cache, CacheError, DailyGraph, ErrorPolicy,
    IngestError, IngestOptions, IngestStats, InputFormat, RowError,
};
use crate::intel::{
    build_profiles, classify_many, tally_core_days, AddressKind, AddressProfile, CodeLookup, IntelError, JsonRpcClient,
    LabelError, LabelStore, RpcOptions,
};
use crate::report::{
    correlation_from_series, correlation_matrix, export, render_heatmap, render_line_chart, series, Artifact,
    CorrelationMatrix, CorrelationMethod, ExportFormat, FeatureRow, FeatureTable, ReportError, TableMetadata,
};
use crate::util::mix_seed;

pub const ANALYSIS_FORMAT: &str = "tokennet-day-analysis";
pub const ANALYSIS_FORMAT_VERSION: u32 = 1;
pub const METADATA_FORMAT: &str = "tokennet-run-metadata";

/// Every setting that changes analysis results. Its digest identifies a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    /// `master_seed` is the run seed; each day derives its own from it.
    pub null_model: NullModelConfig,
    pub community_seed: u64,
    pub core_policy: CorePolicy,
    /// Sample the null model; when off, days follow `null_model.untested`.
    pub significance: bool,
    pub correlation: CorrelationMethod,
    pub extended_correlation: bool,
}

impl AnalysisConfig {
    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Null-model and community seeds for one day.
    pub fn day_seeds(&self, day: NaiveDate) -> (u64, u64) {
        let salt = day.num_days_from_ce() as u64;
        (
            mix_seed(self.null_model.master_seed, salt),
            mix_seed(self.community_seed, salt),
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// Forced input format; otherwise inferred per file from its extension.
    pub format: Option<InputFormat>,
    /// Dataset name used as the output subdirectory; defaults to the token address.
    pub token: Option<String>,
    /// Keep only rows of this token.
    pub token_address: Option<Address>,
    pub out: PathBuf,
    pub on_error: ErrorPolicy,
    pub analysis: AnalysisConfig,
    pub rpc_url: Option<String>,
    /// Label store; defaults to `<out>/labels.csv`.
    pub labels: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Also chart the daily value and address series.
    pub aux_charts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            format: None,
            token: None,
            token_address: None,
            out: PathBuf::from("out"),
            on_error: ErrorPolicy::Abort,
            analysis: AnalysisConfig {
                significance: true,
                ..AnalysisConfig::default()
            },
            rpc_url: None,
            labels: None,
            jobs: 0,
            aux_charts: false,
        }
    }
}

impl RunConfig {
    pub fn labels_path(&self) -> PathBuf {
        self.labels.clone().unwrap_or_else(|| self.out.join("labels.csv"))
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Ingest {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error(transparent)]
    IngestAll(IngestError),
    #[error("no graph cache in {}; run `tokennet ingest` first", .0.display())]
    MissingCache(PathBuf),
    #[error("no analysis results in {}; run `tokennet analyze` first", .0.display())]
    MissingAnalysis(PathBuf),
    #[error("analysis results in {} come from different runs; rerun `tokennet analyze`", .0.display())]
    MixedAnalysis(PathBuf),
    #[error(transparent)]
    Cache(CacheError),
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{day}: {source}")]
    Feature {
        day: NaiveDate,
        #[source]
        source: FeatureError,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Intel(#[from] IntelError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

/// Process exit status for an error: 1 usage, 2 data, 3 I/O.
impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Usage(_) | PipelineError::Core(CoreError::NoReplicates | CoreError::BadAlpha(_)) => 1,
            PipelineError::Io { .. }
            | PipelineError::MissingCache(_)
            | PipelineError::MissingAnalysis(_)
            | PipelineError::Cache(CacheError::Io { .. })
            | PipelineError::Label(LabelError::Io { .. })
            | PipelineError::Report(ReportError::Io { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<CacheError> for PipelineError {
    fn from(e: CacheError) -> Self {
        match e {
            CacheError::Missing(dir) => PipelineError::MissingCache(dir),
            e => PipelineError::Cache(e),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(io_err(path))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, PipelineError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| PipelineError::Usage(format!("cannot start {jobs} worker threads: {e}")))
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "."
        && name != ".."
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

/// Dataset directory of an existing ingest: the named one, or the only one under `out`.
pub fn dataset_dir(config: &RunConfig) -> Result<PathBuf, PipelineError> {
    if let Some(name) = &config.token {
        if !valid_name(name) {
            return Err(PipelineError::Usage(format!("invalid token name {name:?}")));
        }
        return Ok(config.out.join(name));
    }
    let mut found: Vec<PathBuf> = match fs::read_dir(&config.out) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("ingest-stats.json").is_file())
            .collect(),
        Err(_) => Vec::new(),
    };
    found.sort();
    match found.len() {
        0 => Err(PipelineError::MissingCache(config.out.clone())),
        1 => Ok(found.remove(0)),
        _ => Err(PipelineError::Usage(format!(
            "{} holds several datasets; select one with --token",
            config.out.display()
        ))),
    }
}

// ---------------------------------------------------------------- ingest

#[derive(Debug, Clone)]
pub struct IngestSummary {
    pub dir: PathBuf,
    pub token: Address,
    pub stats: IngestStats,
    pub edges: usize,
}

fn open_input(path: &Path) -> Result<Box<dyn Read>, PipelineError> {
    if path == Path::new("-") {
        return Ok(Box::new(io::stdin().lock()));
    }
    let file = File::open(path).map_err(io_err(path))?;
    Ok(Box::new(BufReader::with_capacity(1 << 20, file)))
}

/// Parses every input, builds daily graphs and writes the graph cache.
pub fn cmd_ingest(config: &RunConfig) -> Result<IngestSummary, PipelineError> {
    if config.inputs.is_empty() {
        return Err(PipelineError::Usage("no input files given".into()));
    }
    let options = IngestOptions {
        policy: config.on_error,
        token: config.token_address,
    };
    let mut readers = Vec::with_capacity(config.inputs.len());
    for path in &config.inputs {
        let format = config.format.unwrap_or_else(|| InputFormat::from_path(path));
        readers.push((path.clone(), format, open_input(path)?));
    }
    // Remember which file is being read so row errors can name it.
    let current = std::cell::RefCell::new(PathBuf::new());
    let rows = readers.into_iter().flat_map(|(path, format, reader)| {
        let tag = path.clone();
        let current = &current;
        parse_transfers(reader, format).inspect(move |row: &Result<_, RowError>| {
            if row.is_err() {
                *current.borrow_mut() = tag.clone();
            }
        })
    });
    let dataset = ingest(rows, &options).map_err(|e| match e {
        IngestError::Row(_) => PipelineError::Ingest {
            path: current.borrow().clone(),
            source: e,
        },
        e => PipelineError::IngestAll(e),
    })?;

    let name = match &config.token {
        Some(n) => n.clone(),
        None => dataset.token.to_string(),
    };
    if !valid_name(&name) {
        return Err(PipelineError::Usage(format!("invalid token name {name:?}")));
    }
    let dir = config.out.join(&name);
    write_graph_cache(&dir, dataset.token, &dataset.graphs, &dataset.stats)?;
    Ok(IngestSummary {
        dir,
        token: dataset.token,
        edges: dataset.graphs.iter().map(DailyGraph::edge_count).sum(),
        stats: dataset.stats,
    })
}

// ---------------------------------------------------------------- analyze

/// Everything computed for one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayAnalysis {
    pub row: FeatureRow,
    pub core: CorePeripheryResult,
}

#[derive(Serialize, Deserialize)]
struct AnalysisDoc {
    format: String,
    version: u32,
    config_digest: String,
    #[serde(flatten)]
    analysis: DayAnalysis,
}

/// Features and core-periphery result of one daily graph.
pub fn analyze_day(graph: &DailyGraph, config: &AnalysisConfig) -> Result<DayAnalysis, PipelineError> {
    let day = graph.day();
    let (null_seed, community_seed) = config.day_seeds(day);
    let topo = topology_features(graph, community_seed).map_err(|source| PipelineError::Feature { day, source })?;
    let null = NullModelConfig {
        master_seed: null_seed,
        ..config.null_model.clone()
    };
    let core = analyze_core(graph, &null, config.significance)?;
    let metrics = core.feature_metrics(config.core_policy);
    let features = FeatureVector {
        day,
        n_components: topo.n_components,
        largest_component_ratio: topo.largest_component_ratio,
        modularity: topo.modularity,
        degree_centrality_std: topo.degree_centrality_std,
        n_core: metrics.n_core,
        avg_core_degree: metrics.avg_core_degree,
    };
    let row = FeatureRow {
        features,
        n_core_raw: core.n_core,
        avg_core_degree_raw: core.avg_core_degree,
        z_error: core.z_error,
        core_p_value: core.p_value,
        significant: core.significant,
        daily_value: graph.total_weight(),
        daily_addresses: graph.node_count(),
        daily_transfers: graph.transfer_count(),
    };
    Ok(DayAnalysis { row, core })
}

#[derive(Debug, Clone)]
pub struct AnalyzeSummary {
    pub dir: PathBuf,
    pub days: usize,
    pub significant_days: usize,
    pub config_digest: String,
}

fn analysis_dir(dir: &Path) -> PathBuf {
    dir.join("analysis")
}

/// Analyzes every cached day on `config.jobs` threads and writes one result file per day.
pub fn cmd_analyze(config: &RunConfig) -> Result<AnalyzeSummary, PipelineError> {
    config.analysis.null_model.validate()?;
    let dir = dataset_dir(config)?;
    let graphs = load_graph_cache(&dir)?;
    let digest = config.analysis.digest();
    let total = graphs.len();
    let done = AtomicUsize::new(0);
    let step = (total / 10).max(1);
    let results: Vec<DayAnalysis> = thread_pool(config.jobs)?.install(|| {
        graphs
            .par_iter()
            .map(|g| {
                let r = analyze_day(g, &config.analysis);
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n % step == 0 || n == total {
                    log::info!("analyzed {n}/{total} days");
                }
                r
            })
            .collect::<Result<_, _>>()
    })?;

    let adir = analysis_dir(&dir);
    fs::create_dir_all(&adir).map_err(io_err(&adir))?;
    for entry in fs::read_dir(&adir).map_err(io_err(&adir))? {
        let path = entry.map_err(io_err(&adir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }
    write_text(&analysis_config_path(&dir), &to_json(&config.analysis))?;
    for r in &results {
        let doc = AnalysisDoc {
            format: ANALYSIS_FORMAT.into(),
            version: ANALYSIS_FORMAT_VERSION,
            config_digest: digest.clone(),
            analysis: r.clone(),
        };
        write_text(&adir.join(format!("{}.json", r.row.day())), &to_json(&doc))?;
    }
    Ok(AnalyzeSummary {
        dir,
        days: results.len(),
        significant_days: results.iter().filter(|r| r.core.significant).count(),
        config_digest: digest,
    })
}

fn analysis_config_path(dir: &Path) -> PathBuf {
    dir.join("analysis-config.json")
}

/// Settings of the last `analyze` run in `dir`.
pub fn load_analysis_config(dir: &Path) -> Result<AnalysisConfig, PipelineError> {
    let path = analysis_config_path(dir);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(PipelineError::MissingAnalysis(dir.to_path_buf())),
        Err(e) => return Err(io_err(&path)(e)),
    };
    serde_json::from_str(&text).map_err(|source| PipelineError::Json { path, source })
}

/// Loads per-day results in date order together with their shared config digest.
pub fn load_analysis(dir: &Path) -> Result<(String, Vec<DayAnalysis>), PipelineError> {
    let adir = analysis_dir(dir);
    let mut paths: Vec<PathBuf> = match fs::read_dir(&adir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect(),
        Err(_) => Vec::new(),
    };
    if paths.is_empty() {
        return Err(PipelineError::MissingAnalysis(dir.to_path_buf()));
    }
    paths.sort();
    let mut digest: Option<String> = None;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path).map_err(io_err(&path))?;
        let doc: AnalysisDoc = serde_json::from_str(&text).map_err(|source| PipelineError::Json {
            path: path.clone(),
            source,
        })?;
        if doc.format != ANALYSIS_FORMAT || doc.version != ANALYSIS_FORMAT_VERSION {
            return Err(PipelineError::Usage(format!(
                "{}: unsupported analysis format {:?} version {}",
                path.display(),
                doc.format,
                doc.version
            )));
        }
        match &digest {
            None => digest = Some(doc.config_digest),
            Some(d) if *d != doc.config_digest => return Err(PipelineError::MixedAnalysis(dir.to_path_buf())),
            Some(_) => {}
        }
        out.push(doc.analysis);
    }
    Ok((digest.unwrap_or_default(), out))
}

// ---------------------------------------------------------------- classify / report

fn load_labels(config: &RunConfig) -> Result<LabelStore, PipelineError> {
    let mut store = LabelStore::starter();
    let path = config.labels_path();
    if path.exists() {
        store.merge(LabelStore::load(&path)?);
    } else if config.labels.is_some() {
        log::warn!("label store {} not found; using built-in labels", path.display());
    }
    Ok(store)
}

fn rpc_client(config: &RunConfig) -> Option<JsonRpcClient> {
    config
        .rpc_url
        .as_ref()
        .filter(|u| !u.trim().is_empty())
        .map(|u| JsonRpcClient::new(u.trim(), RpcOptions::default()))
}

#[derive(Debug, Clone)]
pub struct ProfileSummary {
    pub profiles: Vec<AddressProfile>,
    /// Core addresses left unclassified.
    pub unknown: usize,
}

fn profiles_for(
    config: &RunConfig,
    policy: CorePolicy,
    results: &[DayAnalysis],
    store: &mut LabelStore,
) -> Result<ProfileSummary, PipelineError> {
    let tallies = tally_core_days(results.iter().map(|r| (r.core.day, r.core.effective_core(policy))))?;
    let addresses: Vec<Address> = tallies.keys().copied().collect();
    let client = rpc_client(config);
    let rpc = client.as_ref().map(|c| c as &dyn CodeLookup);
    let jobs = if config.jobs == 0 {
        rayon::current_num_threads()
    } else {
        config.jobs
    };
    let classes = classify_many(&addresses, store, rpc, jobs)?;
    let profiles = build_profiles(&tallies, &classes);
    let unknown = profiles.iter().filter(|p| p.kind == AddressKind::Unknown).count();
    if unknown > 0 {
        if client.is_none() {
            log::warn!("{unknown} core addresses are unlabeled and no RPC endpoint is set; reported as unknown");
        } else {
            log::warn!("{unknown} core addresses could not be classified; reported as unknown");
        }
    }
    Ok(ProfileSummary { profiles, unknown })
}

/// Classifies core addresses, persists lookups to the label store and writes profiles.
pub fn cmd_classify(config: &RunConfig) -> Result<ProfileSummary, PipelineError> {
    let dir = dataset_dir(config)?;
    let (_, results) = load_analysis(&dir)?;
    let policy = load_analysis_config(&dir)?.core_policy;
    let mut store = load_labels(config)?;
    let summary = profiles_for(config, policy, &results, &mut store)?;
    let labels = config.labels_path();
    if let Some(parent) = labels.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    store.save(&labels)?;
    export(
        Artifact::Profiles(&summary.profiles),
        ExportFormat::Csv,
        &dir.join("profiles.csv"),
    )?;
    export(
        Artifact::Profiles(&summary.profiles),
        ExportFormat::Json,
        &dir.join("profiles.json"),
    )?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub name: String,
    pub direction: crate::features::Direction,
}

/// Contents of `run-metadata.json`. Holds no timestamps so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub format: String,
    pub tool_version: String,
    pub token: String,
    pub token_address: Address,
    pub config_digest: String,
    pub analysis: AnalysisConfig,
    pub ingest: IngestStats,
    pub days_analyzed: usize,
    pub significant_days: usize,
    pub features: Vec<FeatureInfo>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ReportSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub unknown: usize,
}

fn chart_title(name: &str) -> &'static str {
    match name {
        "n_components" => "Number of connected components",
        "largest_component_ratio" => "Largest connected component ratio",
        "modularity" => "Modularity",
        "degree_centrality_std" => "Degree centrality standard deviation",
        "n_core" => "Number of core nodes",
        "avg_core_degree" => "Average core degree",
        "daily_value" => "Daily transaction value",
        "daily_addresses" => "Daily active addresses",
        _ => "Series",
    }
}

fn build_correlation(table: &FeatureTable, config: &AnalysisConfig) -> CorrelationMatrix {
    match correlation_matrix(table, config.correlation, config.extended_correlation) {
        Ok(m) => m,
        Err(e) => {
            log::warn!("{e}; correlation entries are undefined");
            correlation_from_series(&series(table, config.extended_correlation), config.correlation)
        }
    }
}

/// Writes the feature table, correlation matrix, profiles, charts and run metadata.
pub fn cmd_report(config: &RunConfig) -> Result<ReportSummary, PipelineError> {
    let dir = dataset_dir(config)?;
    let (token_address, stats) = load_stats(&dir)?;
    let (_, results) = load_analysis(&dir)?;
    // Analysis settings come from the stored run; correlation settings from this invocation.
    let stored_config = AnalysisConfig {
        correlation: config.analysis.correlation,
        extended_correlation: config.analysis.extended_correlation,
        ..load_analysis_config(&dir)?
    };
    let digest = stored_config.digest();
    let token = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let table = crate::report::assemble_timeseries(
        TableMetadata {
            token: token.clone(),
            config_digest: digest.clone(),
        },
        results.iter().map(|r| r.row.clone()),
    )?;
    if table.total_value() != stats.total_value {
        log::warn!("daily values do not sum to the ingested total; the graph cache may be stale");
    }
    let matrix = build_correlation(&table, &stored_config);
    let mut store = load_labels(config)?;
    let profiles = profiles_for(config, stored_config.core_policy, &results, &mut store)?;

    let charts = dir.join("charts");
    fs::create_dir_all(&charts).map_err(io_err(&charts))?;
    for entry in fs::read_dir(&charts).map_err(io_err(&charts))? {
        let path = entry.map_err(io_err(&charts))?.path();
        if path.extension().is_some_and(|e| e == "svg") {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }

    let mut files = vec![
        dir.join("features.csv"),
        dir.join("correlation.csv"),
        dir.join("profiles.csv"),
    ];
    export(Artifact::Features(&table), ExportFormat::Csv, &files[0])?;
    export(Artifact::Correlation(&matrix), ExportFormat::Csv, &files[1])?;
    export(Artifact::Profiles(&profiles.profiles), ExportFormat::Csv, &files[2])?;

    let days: Vec<NaiveDate> = table.rows.iter().map(FeatureRow::day).collect();
    let svgs: Vec<(PathBuf, String)> = series(&table, config.aux_charts)
        .into_par_iter()
        .map(|(name, values)| {
            let points: Vec<(NaiveDate, f64)> = days.iter().copied().zip(values).collect();
            let svg = render_line_chart(&points, chart_title(&name), "date", &name);
            (charts.join(format!("{name}.svg")), svg)
        })
        .collect();
    for (path, svg) in svgs {
        write_text(&path, &svg)?;
        files.push(path);
    }
    let heatmap = charts.join("heatmap.svg");
    write_text(
        &heatmap,
        &render_heatmap(&matrix, &format!("Feature correlation: {token}")),
    )?;
    files.push(heatmap);

    let metadata_path = dir.join("run-metadata.json");
    files.push(metadata_path.clone());
    let outputs = files
        .iter()
        .filter_map(|p| p.strip_prefix(&dir).ok())
        .map(|p| p.to_string_lossy().replace('\\', "/"))
        .collect();
    let metadata = RunMetadata {
        format: METADATA_FORMAT.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        token,
        token_address,
        config_digest: digest,
        analysis: stored_config,
        ingest: stats,
        days_analyzed: results.len(),
        significant_days: results.iter().filter(|r| r.core.significant).count(),
        features: FEATURE_NAMES
            .iter()
            .zip(FEATURE_DIRECTIONS)
            .map(|(n, d)| FeatureInfo {
                name: n.to_string(),
                direction: d,
            })
            .collect(),
        outputs,
    };
    write_text(&metadata_path, &to_json(&metadata))?;
    Ok(ReportSummary {
        dir,
        files,
        unknown: profiles.unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coreperiphery::NullModel;

    #[test]
    fn digest_tracks_analysis_settings_only() {
        let base = AnalysisConfig::default();
        let d = base.digest();
        assert_eq!(d.len(), 64);
        assert_eq!(d, AnalysisConfig::default().digest());
        let mut changed = base.clone();
        changed.null_model.replicates = 50;
        assert_ne!(changed.digest(), d);
        let mut changed = base.clone();
        changed.null_model.null_model = NullModel::DegreePreserving;
        assert_ne!(changed.digest(), d);
        let mut changed = base.clone();
        changed.community_seed = 1;
        assert_ne!(changed.digest(), d);
        let mut changed = base.clone();
        changed.core_policy = CorePolicy::Raw;
        assert_ne!(changed.digest(), d);
    }

    #[test]
    fn day_seeds_differ_by_day() {
        let c = AnalysisConfig::default();
        let d1 = NaiveDate::from_ymd_opt(2021, 4, 5).unwrap();
        let d2 = d1.succ_opt().unwrap();
        assert_ne!(c.day_seeds(d1), c.day_seeds(d2));
        assert_eq!(c.day_seeds(d1), c.day_seeds(d1));
    }

    #[test]
    fn names_are_path_safe() {
        assert!(valid_name("LUSD"));
        assert!(valid_name("0xabc"));
        assert!(!valid_name("../x"));
        assert!(!valid_name(".."));
        assert!(!valid_name(""));
    }

    #[test]
    fn star_day_analysis() {
        let g = DailyGraph::from_pairs(
            NaiveDate::from_ymd_opt(2021, 4, 5).unwrap(),
            5,
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
        )
        .unwrap();
        let config = AnalysisConfig {
            core_policy: CorePolicy::Raw,
            significance: false,
            ..AnalysisConfig::default()
        };
        let a = analyze_day(&g, &config).unwrap();
        assert_eq!(a.row.features.n_core, 1);
        assert_eq!(a.row.features.avg_core_degree, 4.0);
        assert_eq!(a.row.daily_transfers, 4);
        assert_eq!(a.row.daily_addresses, 5);
    }

    #[test]
    fn missing_cache_hints_ingest() {
        let dir = tempfile::tempdir().unwrap();
        let config = RunConfig {
            out: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let err = cmd_analyze(&config).unwrap_err();
        assert!(err.to_string().contains("tokennet ingest"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }
}
