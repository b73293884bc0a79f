//! Runs the full pipeline over each corpus case and tallies detection rates.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::corpus::{case_dirs, CorpusCase, Expected, Variant};
use crate::driver::{analyze, DriverError, Manifest, Outcome, Project, RunOptions, Timing};
use crate::frontend::ast::SrcLoc;
use crate::reports::to_json;
use crate::wpa::Verdict;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub fp: usize,
    pub tn: usize,
}

impl Counts {
    /// TP / (TP + FN); 0 without positives.
    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// FP / (FP + TN); 0 without negatives.
    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }

    fn add(&mut self, o: &Counts) {
        self.tp += o.tp;
        self.fn_ += o.fn_;
        self.fp += o.fp;
        self.tn += o.tn;
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CweRates {
    #[serde(flatten)]
    pub counts: Counts,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseOutcome {
    pub cwe: u16,
    pub id: String,
    pub variant: Variant,
    #[serde(flatten)]
    pub counts: Counts,
    /// Locations of reports that count as detections, sorted.
    pub flagged: Vec<SrcLoc>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    /// Keyed `CWE<N>`.
    pub per_cwe: BTreeMap<String, CweRates>,
    /// Sorted by CWE then id.
    pub cases: Vec<CaseOutcome>,
    #[serde(skip)]
    pub timing: Option<Timing>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("{0}: malformed expected.json: {1}")]
    Expected(PathBuf, serde_json::Error),
}

/// A case ready to run: its project plus labels.
#[derive(Clone, Debug)]
pub struct LoadedCase {
    pub expected: Expected,
    /// `Err` holds a load failure, scored like a pipeline failure.
    pub project: Result<Project, String>,
}

impl LoadedCase {
    pub fn from_case(c: &CorpusCase) -> LoadedCase {
        let mut p = Project::from_sources(&c.sources());
        p.manifest.checkers = vec![format!("cwe{}", c.cwe())];
        LoadedCase { expected: c.expected.clone(), project: Ok(p) }
    }

    pub fn load(dir: &Path) -> Result<LoadedCase, BenchError> {
        let path = dir.join("expected.json");
        let text = std::fs::read_to_string(&path).map_err(|e| BenchError::Io(path.clone(), e))?;
        let expected = serde_json::from_str(&text).map_err(|e| BenchError::Expected(path, e))?;
        let project = Manifest::load(&dir.join("manifest.json"))
            .and_then(Project::load)
            .map_err(|e: DriverError| e.to_string());
        Ok(LoadedCase { expected, project })
    }
}

pub fn load_corpus(root: &Path) -> Result<Vec<LoadedCase>, BenchError> {
    case_dirs(root).map_err(|e| BenchError::Io(root.to_path_buf(), e))?.iter().map(|d| LoadedCase::load(d)).collect()
}

/// Run every case under `root`.
pub fn run_corpus(root: &Path, opts: &RunOptions) -> Result<BenchResult, BenchError> {
    Ok(run_cases(&load_corpus(root)?, opts))
}

struct CaseRun {
    outcome: CaseOutcome,
    front: Duration,
    stage1: Duration,
    stage2: Duration,
    queries: usize,
}

/// Cases run in parallel on `opts.jobs` threads; each case runs its
/// pipeline single-threaded and without the cache.
pub fn run_cases(cases: &[LoadedCase], opts: &RunOptions) -> BenchResult {
    let inner = RunOptions { jobs: 1, use_cache: false, cache_dir: None, exit_zero: true };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build().expect("thread pool");
    let mut runs: Vec<CaseRun> = pool.install(|| cases.par_iter().map(|c| run_case(c, &inner)).collect());
    runs.sort_by(|a, b| (a.outcome.cwe, &a.outcome.id).cmp(&(b.outcome.cwe, &b.outcome.id)));

    let mut totals: BTreeMap<u16, Counts> = BTreeMap::new();
    let (mut front, mut s1, mut s2, mut queries) = (Duration::ZERO, Duration::ZERO, Duration::ZERO, 0);
    for r in &runs {
        totals.entry(r.outcome.cwe).or_default().add(&r.outcome.counts);
        front += r.front;
        s1 += r.stage1;
        s2 += r.stage2;
        queries += r.queries;
    }
    let per_cwe = totals
        .into_iter()
        .map(|(cwe, counts)| (format!("CWE{cwe}"), CweRates { counts, tpr: counts.tpr(), fpr: counts.fpr() }))
        .collect();
    BenchResult {
        per_cwe,
        cases: runs.into_iter().map(|r| r.outcome).collect(),
        timing: Some(Timing::compute(front, s1, s2, queries)),
    }
}

fn run_case(case: &LoadedCase, opts: &RunOptions) -> CaseRun {
    let e = &case.expected;
    let positives = e.sites.iter().filter(|s| s.should_flag).count();
    let mut run = CaseRun {
        outcome: CaseOutcome {
            cwe: e.cwe,
            id: e.id.clone(),
            variant: e.variant,
            counts: Counts::default(),
            flagged: Vec::new(),
            error: None,
        },
        front: Duration::ZERO,
        stage1: Duration::ZERO,
        stage2: Duration::ZERO,
        queries: 0,
    };
    let result = case.project.clone().and_then(|p| analyze(&p, opts).map_err(|e| e.to_string()));
    let out = match result {
        Ok(out) => out,
        Err(msg) => {
            log::warn!("cwe{}/{}: {msg}", e.cwe, e.id);
            run.outcome.error = Some(msg);
            // a failed bad case misses every site; a failed good case raises nothing
            match e.variant {
                Variant::Bad => run.outcome.counts.fn_ = positives,
                Variant::Good => run.outcome.counts.tn = 1,
            }
            return run;
        }
    };
    run.front = out.stage1.parse_time + out.stage1.lower_time;
    run.stage1 = out.stage1.analysis_time;
    run.stage2 = out.stage2.time;
    run.queries = out.stage2.queries;
    if !out.stage1.errors.is_empty() {
        run.outcome.error = Some(format!("{:?}", out.stage1.errors));
    }

    let cwe = format!("CWE{}", e.cwe);
    let mut flagged: Vec<SrcLoc> = out
        .stage2
        .results
        .iter()
        .filter(|q| q.cwe == cwe)
        .filter(|q| match &q.outcome {
            Outcome::Final => true,
            Outcome::Validated { report } => report.verdict == Verdict::Confirmed,
            Outcome::Error { .. } => false,
        })
        .filter_map(|q| out.stage1.reports.iter().find(|r| r.id == q.report_id))
        .map(|r| r.loc.clone())
        .collect();
    flagged.sort();
    flagged.dedup();

    let c = &mut run.outcome.counts;
    match e.variant {
        Variant::Bad => {
            for s in e.sites.iter().filter(|s| s.should_flag) {
                if flagged.iter().any(|l| s.extent.contains(l)) {
                    c.tp += 1;
                } else {
                    c.fn_ += 1;
                }
            }
        }
        Variant::Good if flagged.is_empty() => c.tn = 1,
        Variant::Good => c.fp = 1,
    }
    run.outcome.flagged = flagged;
    run
}

/// Per-CWE table: counts and rates as percentages.
pub fn render_table(r: &BenchResult) -> String {
    let mut s = format!("{:<8} {:>4} {:>4} {:>4} {:>4} {:>8} {:>8}\n", "CWE", "TP", "FN", "FP", "TN", "TPR%", "FPR%");
    for (cwe, v) in &r.per_cwe {
        let c = v.counts;
        s.push_str(&format!(
            "{:<8} {:>4} {:>4} {:>4} {:>4} {:>8.2} {:>8.2}\n",
            cwe,
            c.tp,
            c.fn_,
            c.fp,
            c.tn,
            v.tpr * 100.0,
            v.fpr * 100.0
        ));
    }
    s
}

/// Write `bench-results.json`, `bench-results.txt` and `timing.json`.
pub fn write_results(out: &Path, r: &BenchResult) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("bench-results.json"), to_json(r))?;
    std::fs::write(out.join("bench-results.txt"), render_table(r))?;
    if let Some(t) = &r.timing {
        std::fs::write(out.join("timing.json"), to_json(t))?;
    }
    Ok(())
}
