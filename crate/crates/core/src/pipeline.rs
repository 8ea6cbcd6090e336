//! Dataset registry, experiment configuration and the batch runner.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cheshire::CheshireParams;
use crate::ergm::{MpleOptions, DEFAULT_DECAY};
use crate::evaluation::{
    aggregate, run_trial, AggregateRow, ErgmOptions, Method, PreparedDataset, TrialOptions, TrialResult,
    TrialStatus,
};
use crate::graph::{graph_stats, parse_edgelist, parse_message_log, project_messages, EdgelistFormat, MessageLog};
use crate::masking::Mechanism;
use crate::{Error, Graph, Result};

/// Environment variable naming a directory of `<key>.edgelist` files that
/// replace the bundled copies.
pub const REGISTRY_ENV: &str = "HYPERBENCH_REGISTRY";

/// Published summary of a registry network, used as a load-time self-check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpectedStats {
    pub nodes: usize,
    pub edges: usize,
    /// Density as printed, six decimals.
    pub density: &'static str,
    pub triangles: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct RegistryEntry {
    pub key: &'static str,
    pub title: &'static str,
    pub expected: ExpectedStats,
    bundled: &'static str,
}

const fn entry(
    key: &'static str,
    title: &'static str,
    bundled: &'static str,
    nodes: usize,
    edges: usize,
    density: &'static str,
    triangles: u64,
) -> RegistryEntry {
    RegistryEntry {
        key,
        title,
        bundled,
        expected: ExpectedStats {
            nodes,
            edges,
            density,
            triangles,
        },
    }
}

pub const REGISTRY: &[RegistryEntry] = &[
    entry(
        "christmas_eve2000",
        "Christmas Eve 2000",
        include_str!("../data/christmas_eve2000.edgelist"),
        14,
        16,
        "0.175800",
        5,
    ),
    entry(
        "bali2002",
        "Bali bombing 2002",
        include_str!("../data/bali2002.edgelist"),
        15,
        24,
        "0.228600",
        22,
    ),
    entry(
        "australian_embassy2004",
        "Australian Embassy 2004",
        include_str!("../data/australian_embassy2004.edgelist"),
        10,
        15,
        "0.333300",
        8,
    ),
    entry(
        "bali2005",
        "Bali bombing 2005",
        include_str!("../data/bali2005.edgelist"),
        9,
        15,
        "0.416700",
        11,
    ),
    entry(
        "hamburg_cell",
        "Hamburg Cell",
        include_str!("../data/hamburg_cell.edgelist"),
        12,
        23,
        "0.348500",
        23,
    ),
    entry(
        "london_gang",
        "London Gang",
        include_str!("../data/london_gang.edgelist"),
        50,
        85,
        "0.069400",
        46,
    ),
];

pub fn registry_keys() -> Vec<&'static str> {
    REGISTRY.iter().map(|e| e.key).collect()
}

pub fn registry_entry(key: &str) -> Option<&'static RegistryEntry> {
    REGISTRY.iter().find(|e| e.key == key)
}

/// A loaded network, with its message log when it came from one.
#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub name: String,
    pub graph: Graph,
    pub messages: Option<MessageLog>,
    pub volumes: Option<Vec<u64>>,
}

impl LoadedDataset {
    pub fn prepare(self) -> Result<PreparedDataset> {
        PreparedDataset::new(self.name, self.graph, self.volumes)
    }
}

fn looks_like_message_log(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_ascii_lowercase().starts_with("sender,recipient,weight"))
        .unwrap_or(false)
}

fn load_text(name: String, text: &str, csv_like: bool) -> Result<LoadedDataset> {
    if looks_like_message_log(text) {
        let log = parse_message_log(text)?;
        let projection = project_messages(&log)?;
        return Ok(LoadedDataset {
            name,
            graph: projection.graph,
            volumes: Some(projection.volumes),
            messages: Some(log),
        });
    }
    let format = if csv_like {
        EdgelistFormat::Csv
    } else {
        EdgelistFormat::Plain
    };
    let parsed = parse_edgelist(text, format)?;
    if parsed.self_loops > 0 || parsed.duplicates > 0 {
        info!(
            "{name}: dropped {} self-loops, collapsed {} duplicate edges",
            parsed.self_loops, parsed.duplicates
        );
    }
    Ok(LoadedDataset {
        name,
        graph: parsed.graph,
        messages: None,
        volumes: None,
    })
}

/// Differences between a graph and its registry summary; empty when it matches.
pub fn self_check(entry: &RegistryEntry, g: &Graph) -> Vec<String> {
    let stats = match graph_stats(g) {
        Ok(s) => s,
        Err(e) => return vec![e.to_string()],
    };
    let want = entry.expected;
    let mut diffs = Vec::new();
    if stats.nodes != want.nodes {
        diffs.push(format!("nodes {} != {}", stats.nodes, want.nodes));
    }
    if stats.edges != want.edges {
        diffs.push(format!("edges {} != {}", stats.edges, want.edges));
    }
    if stats.density_display() != want.density {
        diffs.push(format!("density {} != {}", stats.density_display(), want.density));
    }
    if stats.triangles != want.triangles {
        diffs.push(format!("triangles {} != {}", stats.triangles, want.triangles));
    }
    diffs
}

/// Loads a registry key or a file path.
///
/// Files ending in `.csv` whose first line is `sender,recipient,weight...` are
/// read as message logs and projected; anything else is an edgelist. Registry
/// keys resolve to `$HYPERBENCH_REGISTRY/<key>.edgelist` when that file exists,
/// else to the bundled copy. A registry graph that disagrees with its expected
/// summary only produces a warning.
pub fn load_dataset(key_or_path: &str) -> Result<LoadedDataset> {
    if let Some(entry) = registry_entry(key_or_path) {
        let override_path = std::env::var_os(REGISTRY_ENV)
            .map(|dir| Path::new(&dir).join(format!("{}.edgelist", entry.key)))
            .filter(|p| p.is_file());
        let loaded = match override_path {
            Some(path) => {
                info!("{}: loading override {}", entry.key, path.display());
                load_text(entry.key.to_string(), &fs::read_to_string(&path)?, false)?
            }
            None => load_text(entry.key.to_string(), entry.bundled, false)?,
        };
        let diffs = self_check(entry, &loaded.graph);
        if !diffs.is_empty() {
            warn!("{}: summary differs from registry ({})", entry.key, diffs.join(", "));
        }
        return Ok(loaded);
    }
    let path = Path::new(key_or_path);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        let csv_like = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("csv"))
            .unwrap_or(false);
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| key_or_path.to_string());
        return load_text(name, &text, csv_like);
    }
    Err(Error::UnknownDataset {
        key: key_or_path.to_string(),
        available: registry_keys().join(", "),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheshireSection {
    pub embed_dim: usize,
    pub conv_dim: usize,
    pub cheby_order: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learn_rate: f64,
    pub train_neg_ratio: usize,
}

impl Default for CheshireSection {
    fn default() -> Self {
        let p = CheshireParams::default();
        CheshireSection {
            embed_dim: p.embed_dim,
            conv_dim: p.conv_dim,
            cheby_order: p.cheby_order,
            epochs: p.epochs,
            batch_size: p.batch_size,
            learn_rate: p.learn_rate,
            train_neg_ratio: p.train_neg_ratio,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatcompSection {
    /// Defaults to `min(16, n - 1)` when absent.
    pub rank: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErgmSection {
    pub degree_decay: f64,
    pub esp_decay: f64,
    pub core: usize,
    pub core_threshold: usize,
    pub ridge: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for ErgmSection {
    fn default() -> Self {
        let mple = MpleOptions::default();
        let e = ErgmOptions::default();
        ErgmSection {
            degree_decay: DEFAULT_DECAY,
            esp_decay: DEFAULT_DECAY,
            core: e.core,
            core_threshold: e.core_threshold,
            ridge: mple.ridge,
            max_iter: mple.max_iter,
            tol: mple.tol,
        }
    }
}

/// Experiment manifest, read from TOML. Every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry keys or file paths.
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub mechanism: String,
    pub rho: OneOrMany,
    pub trials: usize,
    /// Trial `t` runs with seed `seed + t`.
    pub seed: u64,
    pub out: PathBuf,
    pub chart: bool,
    pub neg_ratio: usize,
    pub mnar_exponent: f64,
    pub threshold: f64,
    /// Dataset name to methods that are not run on it; their rows are written
    /// with a `skipped` status.
    pub exclude: BTreeMap<String, Vec<String>>,
    pub cheshire: CheshireSection,
    pub matcomp: MatcompSection,
    pub ergm: ErgmSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            datasets: registry_keys().into_iter().map(String::from).collect(),
            methods: Method::ALL
                .iter()
                .filter(|m| **m != Method::Ergm)
                .map(|m| m.name().to_string())
                .collect(),
            mechanism: "MCAR".into(),
            rho: OneOrMany::One(0.2),
            trials: 20,
            seed: 7,
            out: PathBuf::from("results"),
            chart: false,
            neg_ratio: 1,
            mnar_exponent: 1.0,
            threshold: 0.5,
            exclude: BTreeMap::new(),
            cheshire: CheshireSection::default(),
            matcomp: MatcompSection::default(),
            ergm: ErgmSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|m| m.parse()).collect()
    }

    pub fn mechanism(&self) -> Result<Mechanism> {
        self.mechanism.parse()
    }

    pub fn rho_values(&self) -> Vec<f64> {
        self.rho.values()
    }

    pub fn validate(&self) -> Result<()> {
        if self.datasets.is_empty() {
            return Err(Error::Config("datasets must not be empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        self.methods().map_err(|e| Error::Config(e.to_string()))?;
        self.mechanism().map_err(|e| Error::Config(e.to_string()))?;
        let rho = self.rho_values();
        if rho.is_empty() {
            return Err(Error::Config("rho must not be empty".into()));
        }
        if let Some(r) = rho.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
            return Err(Error::Config(format!("rho {r} outside (0, 1)")));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.neg_ratio == 0 {
            return Err(Error::Config("neg_ratio must be >= 1".into()));
        }
        for methods in self.exclude.values() {
            for m in methods {
                m.parse::<Method>().map_err(|e| Error::Config(format!("exclude: {e}")))?;
            }
        }
        self.trial_options().cheshire.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn trial_options(&self) -> TrialOptions {
        let c = &self.cheshire;
        let e = &self.ergm;
        TrialOptions {
            neg_ratio: self.neg_ratio,
            mnar_exponent: self.mnar_exponent,
            matcomp_rank: self.matcomp.rank,
            cheshire: CheshireParams {
                embed_dim: c.embed_dim,
                conv_dim: c.conv_dim,
                cheby_order: c.cheby_order,
                epochs: c.epochs,
                batch_size: c.batch_size,
                learn_rate: c.learn_rate,
                train_neg_ratio: c.train_neg_ratio,
                seed: self.seed,
            },
            ergm: ErgmOptions {
                degree_decay: e.degree_decay,
                esp_decay: e.esp_decay,
                core: e.core,
                core_threshold: e.core_threshold,
                mple: MpleOptions {
                    ridge: e.ridge,
                    max_iter: e.max_iter,
                    tol: e.tol,
                },
            },
            threshold: self.threshold,
        }
    }

    fn is_excluded(&self, dataset: &str, method: Method) -> bool {
        self.exclude
            .get(dataset)
            .map(|ms| ms.iter().any(|m| m.parse::<Method>().ok() == Some(method)))
            .unwrap_or(false)
    }
}

/// Raw trial rows in grid order plus their aggregate.
#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub results: Vec<TrialResult>,
    pub aggregate: Vec<AggregateRow>,
}

/// Runs the full grid (dataset → method → ρ → trial). Trials run in parallel
/// but rows come back in grid order, so output does not depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let methods = cfg.methods()?;
    let mechanism = cfg.mechanism()?;
    let rhos = cfg.rho_values();
    let opts = cfg.trial_options();

    let prepared = cfg
        .datasets
        .iter()
        .map(|key| load_dataset(key)?.prepare())
        .collect::<Result<Vec<_>>>()?;

    let mut grid = Vec::new();
    for ds in &prepared {
        for &method in &methods {
            for &rho in &rhos {
                for t in 0..cfg.trials {
                    grid.push((ds, method, rho, cfg.seed.wrapping_add(t as u64)));
                }
            }
        }
    }
    info!("running {} trials", grid.len());
    let results: Vec<TrialResult> = grid
        .par_iter()
        .map(|&(ds, method, rho, seed)| {
            if cfg.is_excluded(&ds.name, method) {
                TrialResult::unscored(
                    &ds.name,
                    method,
                    mechanism,
                    rho,
                    seed,
                    TrialStatus::Skipped("excluded".into()),
                )
            } else {
                run_trial(ds, method, mechanism, rho, seed, &opts)
            }
        })
        .collect();
    for r in results.iter().filter(|r| matches!(r.status, TrialStatus::Failed(_))) {
        warn!("{} {} rho={} seed={}: {}", r.dataset, r.method, r.rho, r.seed, r.status);
    }
    let aggregate = aggregate(&results);
    Ok(ExperimentOutput { results, aggregate })
}

fn metric(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        String::new()
    }
}

fn metric3(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        String::new()
    }
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const RESULTS_HEADER: [&str; 10] = [
    "dataset", "method", "task", "mechanism", "rho", "seed", "auc", "f1", "mcc", "status",
];

pub const AGGREGATE_HEADER: [&str; 12] = [
    "dataset", "method", "task", "mechanism", "rho", "n_trials", "auc_mean", "auc_sd", "f1_mean", "f1_sd",
    "mcc_mean", "mcc_sd",
];

/// One row per trial; metrics are written at full precision and left empty
/// for failed or skipped trials.
pub fn results_csv(results: &[TrialResult]) -> Result<String> {
    let rows = results
        .iter()
        .map(|r| {
            vec![
                r.dataset.clone(),
                r.method.to_string(),
                r.task.to_string(),
                r.mechanism.to_string(),
                format!("{}", r.rho),
                r.seed.to_string(),
                metric(r.auc),
                metric(r.f1),
                metric(r.mcc),
                r.status.to_string(),
            ]
        })
        .collect();
    csv_text(&RESULTS_HEADER, rows)
}

/// Aggregate table with means and sample standard deviations at three
/// decimals. `n_trials` counts successful trials only.
pub fn aggregate_csv(rows: &[AggregateRow]) -> Result<String> {
    let rows = rows
        .iter()
        .map(|a| {
            vec![
                a.dataset.clone(),
                a.method.to_string(),
                a.task.to_string(),
                a.mechanism.to_string(),
                format!("{}", a.rho),
                a.n_trials.to_string(),
                metric3(a.auc_mean),
                metric3(a.auc_sd),
                metric3(a.f1_mean),
                metric3(a.f1_sd),
                metric3(a.mcc_mean),
                metric3(a.mcc_sd),
            ]
        })
        .collect();
    csv_text(&AGGREGATE_HEADER, rows)
}

/// Mean-AUC table with one row per (dataset, ρ) and one column per method.
pub fn pivot_table(rows: &[AggregateRow]) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut groups: Vec<(String, u64)> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        let key = (r.dataset.clone(), r.rho.to_bits());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let width = groups.iter().map(|g| g.0.len()).max().unwrap_or(0).max(7);
    let mut out = String::new();
    let _ = write!(out, "{:<width$} {:>5}", "dataset", "rho");
    for m in &methods {
        let _ = write!(out, " {:>11}", m.name());
    }
    out.push('\n');
    for (dataset, rho_bits) in &groups {
        let _ = write!(out, "{:<width$} {:>5}", dataset, f64::from_bits(*rho_bits));
        for m in &methods {
            let cell = rows
                .iter()
                .find(|r| &r.dataset == dataset && r.rho.to_bits() == *rho_bits && r.method == *m)
                .map(|r| if r.n_trials == 0 { "---".to_string() } else { format!("{:.3}", r.auc_mean) })
                .unwrap_or_else(|| "---".into());
            let _ = write!(out, " {cell:>11}");
        }
        out.push('\n');
    }
    out
}

const PALETTE: [&str; 8] = [
    "#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Grouped bar chart of mean AUC: one group per dataset (and ρ, when several
/// are present), one bar per method.
pub fn chart_svg(rows: &[AggregateRow]) -> String {
    let mut methods: Vec<Method> = Vec::new();
    let mut groups: Vec<(String, u64)> = Vec::new();
    for r in rows {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
        let key = (r.dataset.clone(), r.rho.to_bits());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let several_rho = {
        let mut bits: Vec<u64> = groups.iter().map(|g| g.1).collect();
        bits.sort_unstable();
        bits.dedup();
        bits.len() > 1
    };
    let (bar, gap, plot_h, left, top, bottom) = (14.0, 20.0, 240.0, 50.0, 20.0, 70.0);
    let group_w = bar * methods.len() as f64 + gap;
    let width = left + group_w * groups.len() as f64 + 20.0;
    let legend_h = 18.0 * methods.len() as f64;
    let height = top + plot_h + bottom + legend_h;
    let base = top + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="10">"#
    );
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let y = base - v * plot_h;
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd"/><text x="{:.0}" y="{:.1}" text-anchor="end">{v:.2}</text>"##,
            width - 20.0,
            left - 4.0,
            y + 3.0
        );
    }
    for (gi, (dataset, rho_bits)) in groups.iter().enumerate() {
        let gx = left + gap / 2.0 + gi as f64 * group_w;
        for (mi, m) in methods.iter().enumerate() {
            let Some(r) = rows
                .iter()
                .find(|r| &r.dataset == dataset && r.rho.to_bits() == *rho_bits && r.method == *m)
            else {
                continue;
            };
            if !r.auc_mean.is_finite() {
                continue;
            }
            let h = r.auc_mean.clamp(0.0, 1.0) * plot_h;
            let _ = writeln!(
                s,
                r#"<rect x="{:.1}" y="{:.1}" width="{bar}" height="{h:.1}" fill="{}"><title>{} {}: {:.3}</title></rect>"#,
                gx + mi as f64 * bar,
                base - h,
                PALETTE[mi % PALETTE.len()],
                xml_escape(dataset),
                m,
                r.auc_mean
            );
        }
        let label = if several_rho {
            format!("{dataset} ρ={}", f64::from_bits(*rho_bits))
        } else {
            dataset.clone()
        };
        let cx = gx + bar * methods.len() as f64 / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="{cx:.1}" y="{:.1}" text-anchor="end" transform="rotate(-35 {cx:.1} {:.1})">{}</text>"#,
            base + 12.0,
            base + 12.0,
            xml_escape(&label)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">mean ROC-AUC</text>"#,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );
    for (mi, m) in methods.iter().enumerate() {
        let y = base + bottom + 18.0 * mi as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{left}" y="{y:.1}" width="10" height="10" fill="{}"/><text x="{:.0}" y="{:.1}">{m}</text>"#,
            PALETTE[mi % PALETTE.len()],
            left + 14.0,
            y + 9.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Paths written by [`write_outputs`].
#[derive(Clone, Debug)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub aggregate: PathBuf,
    pub chart: Option<PathBuf>,
}

/// Writes `results.csv`, `aggregate.csv` and, when requested, `chart.svg`
/// into `dir`.
pub fn write_outputs(dir: &Path, output: &ExperimentOutput, chart: bool) -> Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let results = dir.join("results.csv");
    fs::write(&results, results_csv(&output.results)?)?;
    let aggregate = dir.join("aggregate.csv");
    fs::write(&aggregate, aggregate_csv(&output.aggregate)?)?;
    let chart = if chart {
        let path = dir.join("chart.svg");
        fs::write(&path, chart_svg(&output.aggregate))?;
        Some(path)
    } else {
        None
    };
    Ok(OutputPaths {
        results,
        aggregate,
        chart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_overrides() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.rho_values(), vec![0.2]);
        assert_eq!(cfg.datasets.len(), 6);
        assert_eq!(cfg.methods.len(), 7);

        let cfg = ExperimentConfig::from_toml(
            r#"
            datasets = ["bali2002"]
            methods = ["HP-Null", "ERGM"]
            mechanism = "mnar"
            rho = [0.1, 0.3]
            trials = 3
            [exclude]
            bali2002 = ["ERGM"]
            [cheshire]
            epochs = 5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.mechanism().unwrap(), Mechanism::Mnar);
        assert_eq!(cfg.rho_values(), vec![0.1, 0.3]);
        assert_eq!(cfg.trial_options().cheshire.epochs, 5);
        assert!(cfg.is_excluded("bali2002", Method::Ergm));
        assert!(!cfg.is_excluded("bali2002", Method::HpNull));
    }

    #[test]
    fn config_rejects_invalid() {
        for bad in [
            "datasets = []",
            "methods = []",
            "methods = [\"HP-XYZ\"]",
            "rho = 1.0",
            "rho = [0.2, 0.0]",
            "trials = 0",
            "mechanism = \"sometimes\"",
            "unknown_key = 1",
        ] {
            assert!(ExperimentConfig::from_toml(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unknown_dataset_lists_keys() {
        let err = load_dataset("no_such_network").unwrap_err().to_string();
        assert!(err.contains("bali2002") && err.contains("london_gang"), "{err}");
    }

    #[test]
    fn bundled_graphs_pass_self_check() {
        for e in REGISTRY {
            let d = load_dataset(e.key).unwrap();
            assert!(self_check(e, &d.graph).is_empty(), "{}", e.key);
        }
    }

    #[test]
    fn message_log_paths_are_projected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mail.csv");
        fs::write(&path, "sender,recipient,weight\na,b,2\nb,c,1\nc,a,4\n").unwrap();
        let d = load_dataset(path.to_str().unwrap()).unwrap();
        assert_eq!(d.name, "mail");
        assert_eq!(d.graph.edge_count(), 3);
        assert!(d.messages.is_some());
        assert_eq!(d.volumes.unwrap(), vec![6, 3, 5]);
    }
}
