//! Metrics, single-trial orchestration and aggregation.

use std::fmt;
use std::str::FromStr;

use crate::cheshire::{self, CheshireModel, CheshireParams};
use crate::dyadic::{default_rank, fit_matcomp, DyadScorer};
use crate::ergm::{fit_mple, ErgmScorer, ErgmSpec, MpleOptions, DEFAULT_DECAY};
use crate::graph::core_k;
use crate::masking::{self, hp_candidates, lp_candidates, observed_graph, CandidateSet, Mechanism};
use crate::{Error, Graph, Hypergraph, Result};

/// Tie-corrected ROC-AUC (Mann–Whitney with average ranks). Ranks are
/// accumulated doubled, in integers, so a constant scorer gives exactly 0.5.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let (pos, neg) = class_counts(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut doubled_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        // 1-based positions start+1 ..= end+1 share the average rank.
        let doubled = (start + 1 + end + 1) as u128;
        let positives = order[start..=end].iter().filter(|&&i| labels[i]).count() as u128;
        doubled_rank_sum += doubled * positives;
        start = end + 1;
    }
    let (p, q) = (pos as u128, neg as u128);
    let numerator = doubled_rank_sum - p * (p + 1);
    Ok(numerator as f64 / (2 * p * q) as f64)
}

fn class_counts(scores: &[f64], labels: &[bool]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidArgument("metrics need both positive and negative labels".into()));
    }
    Ok((pos, neg))
}

/// F1 and Matthews correlation of `score >= threshold`. F1 is 0 without
/// predicted or actual positives; MCC is 0 when any confusion marginal is 0.
pub fn f1_mcc(scores: &[f64], labels: &[bool], threshold: f64) -> Result<(f64, f64)> {
    class_counts(scores, labels)?;
    let (mut tp, mut fp, mut tn, mut fn_) = (0f64, 0f64, 0f64, 0f64);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, false) => tn += 1.0,
            (false, true) => fn_ += 1.0,
        }
    }
    let f1 = if tp + fp == 0.0 || tp + fn_ == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fn_)
    };
    let marginals = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    let mcc = if marginals.contains(&0.0) {
        0.0
    } else {
        (tp * tn - fp * fn_) / marginals.iter().product::<f64>().sqrt()
    };
    Ok((f1, mcc))
}

/// Min-max rescaling to `[0, 1]`; a constant vector maps to 0.5.
pub fn minmax_normalize(scores: &[f64]) -> Vec<f64> {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return vec![0.5; scores.len()];
    }
    scores.iter().map(|s| (s - lo) / (hi - lo)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Task {
    Lp,
    Hp,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Lp => "LP",
            Task::Hp => "HP",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    LpCn,
    LpAa,
    HpCn,
    HpAa,
    HpNull,
    HpMatComp,
    HpCheshire,
    Ergm,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::LpCn,
        Method::LpAa,
        Method::HpCn,
        Method::HpAa,
        Method::HpNull,
        Method::HpMatComp,
        Method::HpCheshire,
        Method::Ergm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::LpCn => "LP-CN",
            Method::LpAa => "LP-AA",
            Method::HpCn => "HP-CN",
            Method::HpAa => "HP-AA",
            Method::HpNull => "HP-Null",
            Method::HpMatComp => "HP-MatComp",
            Method::HpCheshire => "HP-CHESHIRE",
            Method::Ergm => "ERGM",
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Method::LpCn | Method::LpAa => Task::Lp,
            _ => Task::Hp,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(Method::name).collect();
                Error::InvalidArgument(format!("unknown method '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgmOptions {
    pub degree_decay: f64,
    pub esp_decay: f64,
    /// Core size used when the observed graph is too large to fit directly.
    pub core: usize,
    /// Fit on the core when the observed graph has more nodes than this.
    pub core_threshold: usize,
    pub mple: MpleOptions,
}

impl Default for ErgmOptions {
    fn default() -> Self {
        ErgmOptions {
            degree_decay: DEFAULT_DECAY,
            esp_decay: DEFAULT_DECAY,
            core: 100,
            core_threshold: 1000,
            mple: MpleOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOptions {
    /// Negatives per positive candidate.
    pub neg_ratio: usize,
    pub mnar_exponent: f64,
    /// Matrix-completion rank; `None` means `min(16, n − 1)`.
    pub matcomp_rank: Option<usize>,
    /// CHESHIRE hyperparameters; the seed is replaced by the trial seed.
    pub cheshire: CheshireParams,
    pub ergm: ErgmOptions,
    pub threshold: f64,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions {
            neg_ratio: 1,
            mnar_exponent: 1.0,
            matcomp_rank: None,
            cheshire: CheshireParams::default(),
            ergm: ErgmOptions::default(),
            threshold: 0.5,
        }
    }
}

/// A dataset ready for trials: the graph, its clique hypergraph and, when
/// known, per-node activity volumes.
#[derive(Clone, Debug)]
pub struct PreparedDataset {
    pub name: String,
    pub graph: Graph,
    pub hypergraph: Hypergraph,
    pub volumes: Option<Vec<u64>>,
}

impl PreparedDataset {
    pub fn new(name: impl Into<String>, graph: Graph, volumes: Option<Vec<u64>>) -> Result<Self> {
        let hypergraph = crate::hypergraph::derive_hypergraph(&graph)?;
        Ok(PreparedDataset {
            name: name.into(),
            graph,
            hypergraph,
            volumes,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    Failed(String),
    Skipped(String),
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrialStatus::Ok => f.write_str("ok"),
            TrialStatus::Failed(r) => write!(f, "failed: {r}"),
            TrialStatus::Skipped(r) => write!(f, "skipped: {r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub dataset: String,
    pub method: Method,
    pub task: Task,
    pub mechanism: Mechanism,
    pub rho: f64,
    pub seed: u64,
    pub auc: f64,
    pub f1: f64,
    pub mcc: f64,
    pub status: TrialStatus,
}

impl TrialResult {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }

    pub fn unscored(
        dataset: &str,
        method: Method,
        mechanism: Mechanism,
        rho: f64,
        seed: u64,
        status: TrialStatus,
    ) -> Self {
        TrialResult {
            dataset: dataset.to_string(),
            method,
            task: method.task(),
            mechanism,
            rho,
            seed,
            auc: f64::NAN,
            f1: f64::NAN,
            mcc: f64::NAN,
            status,
        }
    }
}

/// Scores and labels of one trial, before metrics.
#[derive(Clone, Debug)]
pub struct ScoredCandidates {
    pub candidates: CandidateSet,
    pub scores: Vec<f64>,
    /// Whether scores are probabilities (thresholded as-is) or need rescaling.
    pub probabilistic: bool,
}

fn lifted_scores(scorer: &DyadScorer<'_>, cs: &CandidateSet) -> Result<Vec<f64>> {
    cs.items.iter().map(|c| scorer.lift(&c.nodes)).collect()
}

fn fit_ergm_for(ds: &PreparedDataset, g_obs: &Graph, opts: &ErgmOptions) -> Result<crate::ergm::ErgmFit> {
    let spec = ErgmSpec::standard(opts.degree_decay, opts.esp_decay)?;
    if g_obs.n() > opts.core_threshold {
        let volumes = ds.volumes.clone().unwrap_or_else(|| g_obs.degrees());
        let core = core_k(g_obs, &volumes, opts.core)?;
        fit_mple(&core, &spec, &opts.mple)
    } else {
        fit_mple(g_obs, &spec, &opts.mple)
    }
}

/// Runs the masking, candidate and scoring stages of one trial. A pre-trained
/// CHESHIRE model may be supplied to skip per-trial training.
pub fn score_trial(
    ds: &PreparedDataset,
    method: Method,
    mechanism: Mechanism,
    rho: f64,
    seed: u64,
    opts: &TrialOptions,
    pretrained: Option<&CheshireModel>,
) -> Result<ScoredCandidates> {
    let h = &ds.hypergraph;
    let split = masking::mask_with_exponent(h, rho, mechanism, seed, opts.mnar_exponent)?;
    let g_obs = observed_graph(&ds.graph, h, &split);
    let candidates = match method.task() {
        Task::Lp => lp_candidates(&ds.graph, h, &split, opts.neg_ratio, seed)?,
        Task::Hp => hp_candidates(h, &split, opts.neg_ratio, seed)?,
    };
    let (scores, probabilistic) = match method {
        Method::LpCn | Method::HpCn => (lifted_scores(&DyadScorer::CommonNeighbors(&g_obs), &candidates)?, false),
        Method::LpAa | Method::HpAa => (lifted_scores(&DyadScorer::AdamicAdar(&g_obs), &candidates)?, false),
        Method::HpNull => (lifted_scores(&DyadScorer::Null, &candidates)?, true),
        Method::HpMatComp => {
            let rank = opts.matcomp_rank.unwrap_or_else(|| default_rank(g_obs.n())).min(g_obs.n());
            let scorer = DyadScorer::MatComp(fit_matcomp(&g_obs, rank)?);
            (lifted_scores(&scorer, &candidates)?, false)
        }
        Method::HpCheshire => {
            let trained;
            let model = match pretrained {
                Some(m) => m,
                None => {
                    let h_obs = h.restrict(&split.observed);
                    let params = CheshireParams {
                        seed,
                        ..opts.cheshire.clone()
                    };
                    trained = cheshire::train(&h_obs, params)?;
                    &trained
                }
            };
            let scores = candidates
                .items
                .iter()
                .map(|c| model.score(&c.nodes))
                .collect::<Result<Vec<_>>>()?;
            (scores, true)
        }
        Method::Ergm => {
            let fit = fit_ergm_for(ds, &g_obs, &opts.ergm)?;
            let scorer = DyadScorer::Ergm(ErgmScorer::new(fit, &g_obs)?);
            (lifted_scores(&scorer, &candidates)?, true)
        }
    };
    Ok(ScoredCandidates {
        candidates,
        scores,
        probabilistic,
    })
}

/// Load-free trial: mask, build candidates, score on observed data only,
/// compute metrics. Stage errors are reported in the status, not raised.
pub fn run_trial(
    ds: &PreparedDataset,
    method: Method,
    mechanism: Mechanism,
    rho: f64,
    seed: u64,
    opts: &TrialOptions,
) -> TrialResult {
    run_trial_with(ds, method, mechanism, rho, seed, opts, None)
}

pub fn run_trial_with(
    ds: &PreparedDataset,
    method: Method,
    mechanism: Mechanism,
    rho: f64,
    seed: u64,
    opts: &TrialOptions,
    pretrained: Option<&CheshireModel>,
) -> TrialResult {
    let outcome = score_trial(ds, method, mechanism, rho, seed, opts, pretrained).and_then(|sc| {
        let labels = sc.candidates.labels();
        let auc = roc_auc(&sc.scores, &labels)?;
        let thresholded = if sc.probabilistic {
            sc.scores.clone()
        } else {
            minmax_normalize(&sc.scores)
        };
        let (f1, mcc) = f1_mcc(&thresholded, &labels, opts.threshold)?;
        Ok((auc, f1, mcc))
    });
    match outcome {
        Ok((auc, f1, mcc)) => TrialResult {
            dataset: ds.name.clone(),
            method,
            task: method.task(),
            mechanism,
            rho,
            seed,
            auc,
            f1,
            mcc,
            status: TrialStatus::Ok,
        },
        Err(e) => TrialResult::unscored(&ds.name, method, mechanism, rho, seed, TrialStatus::Failed(e.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub dataset: String,
    pub method: Method,
    pub task: Task,
    pub mechanism: Mechanism,
    pub rho: f64,
    /// Successful trials in the group.
    pub n_trials: usize,
    /// Failed or skipped trials, excluded from the means.
    pub n_failed: usize,
    pub auc_mean: f64,
    pub auc_sd: f64,
    pub f1_mean: f64,
    pub f1_sd: f64,
    pub mcc_mean: f64,
    pub mcc_sd: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Groups by `(dataset, method, task, mechanism, rho)` in first-seen order and
/// reports mean and sample standard deviation of each metric over successful trials.
pub fn aggregate(trials: &[TrialResult]) -> Vec<AggregateRow> {
    type Key = (String, Method, Task, Mechanism, u64);
    let mut keys: Vec<Key> = Vec::new();
    let mut groups: Vec<Vec<&TrialResult>> = Vec::new();
    for t in trials {
        let key = (t.dataset.clone(), t.method, t.task, t.mechanism, t.rho.to_bits());
        match keys.iter().position(|k| *k == key) {
            Some(i) => groups[i].push(t),
            None => {
                keys.push(key);
                groups.push(vec![t]);
            }
        }
    }
    groups
        .into_iter()
        .map(|group| {
            let first = group[0];
            let ok: Vec<&TrialResult> = group.iter().copied().filter(|t| t.is_ok()).collect();
            let col = |f: fn(&TrialResult) -> f64| mean_sd(&ok.iter().map(|t| f(t)).collect::<Vec<_>>());
            let (auc_mean, auc_sd) = col(|t| t.auc);
            let (f1_mean, f1_sd) = col(|t| t.f1);
            let (mcc_mean, mcc_sd) = col(|t| t.mcc);
            AggregateRow {
                dataset: first.dataset.clone(),
                method: first.method,
                task: first.task,
                mechanism: first.mechanism,
                rho: first.rho,
                n_trials: ok.len(),
                n_failed: group.len() - ok.len(),
                auc_mean,
                auc_sd,
                f1_mean,
                f1_sd,
                mcc_mean,
                mcc_sd,
            }
        })
        .collect()
}
