// SPDX-License-Identifier: Apache-2.0

//! End-to-end drivers: ingest → cluster → partition → report, for a single
//! method or a sweep across methods, plus the generator and oracle-check
//! entry points the CLI wraps. Lives in the library so tests can drive the
//! identical code paths.

use crate::cluster::{
    cluster_hg, cluster_kmeans, cluster_none, cluster_pwl, default_pwl_threshold, pwl_feasibility,
    Clustering, Feasibility, Method,
};
use crate::designgen::{generate_raw, insert_buffers, CoreSpec, TopologySpec};
use crate::error::{Error, Result};
use crate::ingest::{parse_counter, parse_design, strip_buffer_tree, write_native, Format};
use crate::model::{build_hypergraph, Design, Hyperedge, Hypergraph};
use crate::partition::{
    brute_force_bipartition, directives_to_csv, directives_to_json, fm_bipartition,
    gate_directives, BalanceSpec, Partition,
};
use crate::report::{
    compare_methods, cut_report, histogram_svg, report_csv, report_json, table_csv, table_json,
    ComparisonTable, CutReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Cluster-count knob: a fixed count or `auto` = max(16, cells / 50).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "ClusterCountRepr")]
pub enum ClusterCount {
    Auto,
    Fixed(usize),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ClusterCountRepr {
    Text(String),
    Count(usize),
}

impl TryFrom<ClusterCountRepr> for ClusterCount {
    type Error = String;
    fn try_from(r: ClusterCountRepr) -> std::result::Result<Self, String> {
        match r {
            ClusterCountRepr::Count(n) => Ok(ClusterCount::Fixed(n)),
            ClusterCountRepr::Text(s) => ClusterCount::parse(&s).map_err(|e| e.to_string()),
        }
    }
}

impl Serialize for ClusterCount {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ClusterCount::Auto => ser.serialize_str("auto"),
            ClusterCount::Fixed(n) => ser.serialize_u64(*n as u64),
        }
    }
}

impl ClusterCount {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(ClusterCount::Auto)
        } else {
            s.parse().map(ClusterCount::Fixed).map_err(|_| {
                Error::Domain(format!(
                    "pipeline: cluster count must be 'auto' or an integer, got '{s}'"
                ))
            })
        }
    }

    /// Desk-scale auto rule: max(16, |cells| / 50).
    pub fn resolve(&self, design: &Design) -> usize {
        match self {
            ClusterCount::Fixed(n) => *n,
            ClusterCount::Auto => (design.cells.len() / 50).max(16),
        }
    }
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterCount::Auto => f.write_str("auto"),
            ClusterCount::Fixed(n) => write!(f, "{n}"),
        }
    }
}

/// Absorption-threshold knob: a fixed length or `auto` = 100 average gate
/// widths of the ingested design.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "ThresholdRepr")]
pub enum Threshold {
    Auto,
    Fixed(f64),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Text(String),
    Length(f64),
}

impl TryFrom<ThresholdRepr> for Threshold {
    type Error = String;
    fn try_from(r: ThresholdRepr) -> std::result::Result<Self, String> {
        match r {
            ThresholdRepr::Length(v) => Ok(Threshold::Fixed(v)),
            ThresholdRepr::Text(s) => Threshold::parse(&s).map_err(|e| e.to_string()),
        }
    }
}

impl Serialize for Threshold {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threshold::Auto => ser.serialize_str("auto"),
            Threshold::Fixed(v) => ser.serialize_f64(*v),
        }
    }
}

impl Threshold {
    pub fn parse(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(Threshold::Auto)
        } else {
            s.parse().map(Threshold::Fixed).map_err(|_| {
                Error::Domain(format!(
                    "pipeline: threshold must be 'auto' or a length, got '{s}'"
                ))
            })
        }
    }

    pub fn resolve(&self, design: &Design) -> Result<f64> {
        match self {
            Threshold::Fixed(v) if *v >= 0.0 => Ok(*v),
            Threshold::Fixed(v) => Err(Error::Domain(format!(
                "pipeline: threshold must be non-negative, got {v}"
            ))),
            Threshold::Auto => default_pwl_threshold(design),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Auto => f.write_str("auto"),
            Threshold::Fixed(v) => write!(f, "{v}"),
        }
    }
}

/// Effective configuration of one pipeline run. Serialized into the output
/// directory for provenance; execution knobs (`out_dir`, `parallel`) are
/// excluded so reruns of the same experiment echo identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    /// None infers the format from the file extension.
    pub format: Option<Format>,
    pub methods: Vec<Method>,
    pub clusters: ClusterCount,
    pub threshold: Threshold,
    pub kmeans_max_iters: usize,
    pub balance: f64,
    pub restarts: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Run methods concurrently; results are identical either way.
    #[serde(skip)]
    pub parallel: bool,
    /// Also emit the cross-method comparison table (sweep mode).
    #[serde(skip)]
    pub comparison: bool,
}

impl PipelineConfig {
    pub fn new(input: PathBuf, methods: Vec<Method>, out_dir: PathBuf) -> Self {
        PipelineConfig {
            input,
            format: None,
            methods,
            clusters: ClusterCount::Fixed(1000),
            threshold: Threshold::Auto,
            kmeans_max_iters: 200,
            balance: 0.51,
            restarts: 16,
            seed: 42,
            out_dir,
            parallel: true,
            comparison: false,
        }
    }
}

/// Optional config file (JSON). Any field present overrides the built-in
/// default; CLI flags override both.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub format: Option<Format>,
    pub methods: Option<Vec<Method>>,
    pub clusters: Option<ClusterCount>,
    pub threshold: Option<Threshold>,
    pub kmeans_max_iters: Option<usize>,
    pub balance: Option<f64>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// Parse + strip in one step. The running parse counter appears in verbose
/// logs so sweep runs can demonstrate single ingestion.
pub fn ingest_design(path: &Path, format: Option<Format>) -> Result<Design> {
    let fmt = format.unwrap_or_else(|| Format::infer(path));
    let raw = parse_design(path, fmt)?;
    let design = strip_buffer_tree(&raw)?;
    log::debug!(
        "pipeline: ingested {} ({} cells, {} nets; netlists parsed this process: {})",
        path.display(),
        design.cells.len(),
        design.nets.len(),
        parse_counter()
    );
    Ok(design)
}

/// Result of clustering + partitioning + reporting one method.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub clustering: Clustering,
    pub hypergraph: Hypergraph,
    pub partition: Partition,
    pub report: CutReport,
}

/// Runs one clustering method through partitioning and reporting.
/// Progressive wire-length infeasibility (one cluster larger than a side)
/// surfaces as an infeasibility error before any partitioning work.
pub fn run_method(design: &Design, method: Method, config: &PipelineConfig) -> Result<MethodRun> {
    let balance = BalanceSpec::new(config.balance)?;
    let clustering = match method {
        Method::Nc => cluster_none(design),
        Method::Hg => cluster_hg(design, config.clusters.resolve(design))?,
        Method::Km => cluster_kmeans(
            design,
            config.clusters.resolve(design),
            config.kmeans_max_iters,
        )?,
        Method::Pwl => {
            let threshold = config.threshold.resolve(design)?;
            let c = cluster_pwl(design, threshold)?;
            if let Feasibility::Infeasible {
                cluster,
                area_fraction,
            } = pwl_feasibility(&c, balance.max_fraction)
            {
                return Err(Error::Infeasible(format!(
                    "cluster: threshold {threshold} merges {:.1}% of the cell area into cluster {cluster} \
                     (side capacity {:.0}%); no balanced bi-partition exists — lower the threshold",
                    area_fraction * 100.0,
                    balance.max_fraction * 100.0
                )));
            }
            c
        }
    };
    log::debug!(
        "pipeline: {} clustering -> {} clusters ({})",
        method,
        clustering.cluster_count(),
        clustering.params
    );
    let hypergraph = build_hypergraph(design, &clustering)?;
    let partition = fm_bipartition(&hypergraph, &balance, config.restarts, config.seed)?;
    let report = cut_report(design, &hypergraph, &partition, method)?;
    Ok(MethodRun {
        method,
        clustering,
        hypergraph,
        partition,
        report,
    })
}

#[derive(Serialize)]
struct RunSummary<'a> {
    method: Method,
    params: &'a str,
    clusters: usize,
    hyperedges: usize,
    cut_weight: u64,
    side_areas: [f64; 2],
    balance: f64,
    restarts_used: usize,
    rng_seed: u64,
}

/// Writes the per-method artifact set into `dir` and returns the paths.
pub fn write_method_artifacts(
    design: &Design,
    run: &MethodRun,
    balance: f64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut emit = |name: &str, content: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, content)?;
        files.push(path);
        Ok(())
    };
    emit("clustering.csv", run.clustering.to_csv(design))?;
    let directives = gate_directives(&run.partition, &run.hypergraph, design)?;
    emit("directives.csv", directives_to_csv(&directives))?;
    emit("directives.json", directives_to_json(&directives))?;
    emit("report.csv", report_csv(&run.report))?;
    emit("report.json", report_json(&run.report))?;
    emit("histogram.svg", histogram_svg(&run.report))?;
    let summary = RunSummary {
        method: run.method,
        params: &run.clustering.params,
        clusters: run.clustering.cluster_count(),
        hyperedges: run.hypergraph.edges.len(),
        cut_weight: run.partition.cut_weight,
        side_areas: run.partition.side_areas,
        balance,
        restarts_used: run.partition.restarts_used,
        rng_seed: run.partition.rng_seed,
    };
    let mut text =
        serde_json::to_string_pretty(&summary).expect("summary serialization is infallible");
    text.push('\n');
    emit("summary.json", text)?;
    Ok(files)
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub reports: Vec<CutReport>,
    pub table: Option<ComparisonTable>,
    pub files: Vec<PathBuf>,
}

/// Ingests the design once, runs every configured method, and writes all
/// artifacts under method-scoped subdirectories of `out_dir`. Method order
/// in the config decides report order and error precedence.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutcome> {
    if config.methods.is_empty() {
        return Err(Error::Domain(
            "pipeline: no clustering method selected".into(),
        ));
    }
    if config.kmeans_max_iters < 1 {
        return Err(Error::Domain(
            "pipeline: kmeans_max_iters must be >= 1".into(),
        ));
    }
    BalanceSpec::new(config.balance)?;
    let design = ingest_design(&config.input, config.format)?;
    log::info!(
        "pipeline: sweep over {:?} (netlists parsed this process: {})",
        config.methods,
        parse_counter()
    );
    let results: Vec<Result<MethodRun>> = if config.parallel && config.methods.len() > 1 {
        config
            .methods
            .par_iter()
            .map(|&m| run_method(&design, m, config))
            .collect()
    } else {
        config
            .methods
            .iter()
            .map(|&m| run_method(&design, m, config))
            .collect()
    };
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        runs.push(r?);
    }

    std::fs::create_dir_all(&config.out_dir)?;
    let mut files = Vec::new();
    for run in &runs {
        let dir = config.out_dir.join(run.method.as_str());
        files.extend(write_method_artifacts(&design, run, config.balance, &dir)?);
    }
    let reports: Vec<CutReport> = runs.iter().map(|r| r.report.clone()).collect();
    let table = if config.comparison {
        let t = compare_methods(&reports)?;
        let csv_path = config.out_dir.join("comparison.csv");
        std::fs::write(&csv_path, table_csv(&t))?;
        files.push(csv_path);
        let json_path = config.out_dir.join("comparison.json");
        std::fs::write(&json_path, table_json(&t))?;
        files.push(json_path);
        Some(t)
    } else {
        None
    };
    let echo_path = config.out_dir.join("config.json");
    let mut echo =
        serde_json::to_string_pretty(config).expect("config serialization is infallible");
    echo.push('\n');
    std::fs::write(&echo_path, echo)?;
    files.push(echo_path);
    Ok(PipelineOutcome {
        reports,
        table,
        files,
    })
}

/// Generator entry point: write a synthetic design (optionally with buffer
/// chains on the longest nets) in the native format.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub core: CoreSpec,
    pub topo: TopologySpec,
    /// Insert buffer chains on this percentage of the longest nets.
    pub with_buffers: Option<f64>,
    pub out: PathBuf,
}

pub fn run_gen(config: &GenConfig) -> Result<PathBuf> {
    let mut raw = generate_raw(&config.core, &config.topo)?;
    if let Some(percent) = config.with_buffers {
        let added = insert_buffers(&mut raw, percent, config.core.rng_seed)?;
        log::debug!("pipeline: inserted {added} buffers on the longest {percent}% of nets");
    }
    if let Some(parent) = config.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_native(&raw, &config.out)?;
    Ok(config.out.clone())
}

/// Validation workload: a random hypergraph with an even vertex count in
/// [8, 12], 10–20 unit-weight hyperedges of degree 2–3, and unit vertex
/// weights. Even counts keep a 49/51 split feasible for unit weights.
pub fn random_unit_hypergraph(rng: &mut ChaCha8Rng) -> Hypergraph {
    let n = 2 * rng.gen_range(4..=6);
    let m = rng.gen_range(10..=20);
    let mut edges = Vec::with_capacity(m);
    for i in 0..m {
        let degree = rng.gen_range(2..=3);
        let mut members = Vec::new();
        while members.len() < degree {
            let v = rng.gen_range(0..n);
            if !members.contains(&v) {
                members.push(v);
            }
        }
        edges.push(Hyperedge {
            members,
            weight: 1,
            source_net: i,
            length: 0.0,
        });
    }
    Hypergraph {
        vertex_weights: vec![1.0; n],
        edges,
        vertex_origin: (0..n).map(|i| vec![i]).collect(),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleOutcome {
    pub trials: usize,
    /// Trials where the heuristic hit the exhaustive optimum.
    pub matched: usize,
    /// Trials where the heuristic reported a cut below the optimum
    /// (impossible for a correct implementation).
    pub below_optimum: usize,
}

/// Cross-validates the heuristic partitioner against the exhaustive oracle
/// on seeded random hypergraphs.
pub fn run_oracle_check(trials: usize, restarts: usize, seed: u64) -> Result<OracleOutcome> {
    if trials < 1 {
        return Err(Error::Domain(
            "pipeline: oracle check needs >= 1 trial".into(),
        ));
    }
    let balance = BalanceSpec::default();
    let mut matched = 0;
    let mut below = 0;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let hg = random_unit_hypergraph(&mut rng);
        let oracle = brute_force_bipartition(&hg, &balance)?;
        let fm = fm_bipartition(&hg, &balance, restarts, seed.wrapping_add(t as u64))?;
        match fm.cut_weight.cmp(&oracle.cut_weight) {
            std::cmp::Ordering::Equal => matched += 1,
            std::cmp::Ordering::Less => below += 1,
            std::cmp::Ordering::Greater => {}
        }
    }
    Ok(OracleOutcome {
        trials,
        matched,
        below_optimum: below,
    })
}
