//! Manifest-driven pipeline: parse, stage 1 per unit (parallel, cached),
//! link, stage 2 per candidate.

mod cache;
mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{sha256_hex, BuildCache, CacheEntry};
pub use manifest::{unit_name, Manifest};

use crate::checkers::registry;
use crate::engine::analyze_unit;
use crate::frontend::ast::{DeclId, TranslationUnit};
use crate::frontend::{parse_unit_file, pretty, resolve_program, Diagnostic, ProgramAst};
use crate::ir::{link, lower_unit, to_canonical_json, IrModule, IrProgram, LinkError};
use crate::reports::{self, emit_candidate, query_for, to_json, CandidateReport, EngineMeta, ReportError};
use crate::wpa::{Verdict, WholeProgram, WpReport};

pub const CACHE_ENV: &str = "ANALYZER_CACHE_DIR";

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("no entry points: list `entries` in the manifest or define `main`")]
    NoEntries,
    #[error("link: {0}")]
    Link(#[from] LinkError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DriverError + '_ {
    move |e| DriverError::Io(path.to_path_buf(), e)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    pub exit_zero: bool,
    pub use_cache: bool,
    /// Overrides both `ANALYZER_CACHE_DIR` and the default location.
    pub cache_dir: Option<PathBuf>,
}

impl RunOptions {
    pub fn cache(&self, m: &Manifest) -> Option<BuildCache> {
        if !self.use_cache {
            return None;
        }
        let dir = self
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
            .unwrap_or_else(|| m.base_dir.join(".analyzer-cache"));
        Some(BuildCache::new(dir))
    }

    fn pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build().expect("thread pool").install(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceUnit {
    pub name: String,
    pub file: String,
    pub text: String,
}

/// A manifest together with the unit sources it names.
#[derive(Clone, Debug)]
pub struct Project {
    pub manifest: Manifest,
    pub units: Vec<SourceUnit>,
}

impl Project {
    pub fn load(manifest: Manifest) -> Result<Project, DriverError> {
        let units = manifest
            .units
            .iter()
            .map(|u| {
                let path = manifest.unit_path(u);
                let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                let file = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
                Ok(SourceUnit { name: unit_name(u), file, text })
            })
            .collect::<Result<_, DriverError>>()?;
        Ok(Project { manifest, units })
    }

    /// In-memory project; unit `n` lives in `n.mo`.
    pub fn from_sources(sources: &[(&str, &str)]) -> Project {
        let units = sources
            .iter()
            .map(|(n, t)| SourceUnit { name: n.to_string(), file: format!("{n}.mo"), text: t.to_string() })
            .collect();
        let paths = sources.iter().map(|(n, _)| PathBuf::from(format!("{n}.mo"))).collect();
        Project { manifest: Manifest::for_units(Path::new("."), paths), units }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitError {
    pub unit: String,
    pub diagnostics: Vec<String>,
}

/// Parse every unit, then resolve the ones that parsed. Units whose
/// resolution fails (including through a broken import) are dropped with
/// their diagnostics and the rest are resolved again.
pub fn parse_project(project: &Project, opts: &RunOptions) -> (ProgramAst, Vec<UnitError>) {
    let parsed: Vec<(String, Result<TranslationUnit, Vec<Diagnostic>>)> = opts.pool(|| {
        project.units.par_iter().map(|u| (u.name.clone(), parse_unit_file(&u.text, &u.name, &u.file))).collect()
    });
    let mut errors = Vec::new();
    let mut units = Vec::new();
    for (name, r) in parsed {
        match r {
            Ok(u) => units.push(u),
            Err(d) => errors.push(unit_error(&name, &d)),
        }
    }
    loop {
        match resolve_program(units.clone()) {
            Ok(p) => {
                errors.sort();
                return (p, errors);
            }
            Err(diags) => {
                let before = units.len();
                let bad: Vec<String> =
                    units.iter().filter(|u| diags.iter().any(|d| d.file == u.file())).map(|u| u.name.clone()).collect();
                for name in &bad {
                    let own: Vec<Diagnostic> =
                        diags.iter().filter(|d| units.iter().any(|u| u.name == *name && u.file() == d.file)).cloned().collect();
                    errors.push(unit_error(name, &own));
                }
                units.retain(|u| !bad.contains(&u.name));
                if units.len() == before {
                    for u in units.drain(..) {
                        errors.push(unit_error(&u.name, &diags));
                    }
                }
            }
        }
    }
}

fn unit_error(unit: &str, diags: &[Diagnostic]) -> UnitError {
    let mut d: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
    d.sort();
    UnitError { unit: unit.to_string(), diagnostics: d }
}

/// Cache key of a unit: its own text, the declarations it can see in
/// other units, the engine configuration and the enabled checkers. Stage 1
/// never looks at bodies outside the unit, so editing an imported unit's
/// code without changing its declarations keeps the key.
pub fn unit_key(project: &Project, program: &ProgramAst, unit: &str) -> String {
    let m = &project.manifest;
    let cfg = serde_json::to_string(&m.engine).unwrap_or_default();
    let mut checkers = m.checkers.clone();
    checkers.sort();
    let mut parts: Vec<Vec<u8>> = vec![
        b"analyzer-stage1-v1".to_vec(),
        env!("CARGO_PKG_VERSION").as_bytes().to_vec(),
        cfg.into_bytes(),
        checkers.join(",").into_bytes(),
    ];
    if let Some(s) = project.units.iter().find(|s| s.name == unit) {
        parts.extend([s.name.as_bytes().to_vec(), s.file.as_bytes().to_vec(), s.text.as_bytes().to_vec()]);
    }
    let index = program.unit_index(unit);
    let mut deps = index.visible.get(unit).cloned().unwrap_or_default();
    deps.remove(unit);
    parts.push(format!("{deps:?}").into_bytes());
    for c in index.classes.values().filter(|c| c.unit != unit) {
        parts.push(format!("{c:?}").into_bytes());
    }
    for f in index.functions.values().filter(|f| f.unit != unit) {
        parts.push(format!("{f:?}").into_bytes());
    }
    for g in index.globals.values().filter(|g| g.unit != unit) {
        parts.push(format!("{g:?}").into_bytes());
    }
    let refs: Vec<&[u8]> = parts.iter().map(Vec::as_slice).collect();
    sha256_hex(&refs)
}

#[derive(Clone, Debug, Default)]
pub struct Stage1Output {
    pub program: Option<ProgramAst>,
    /// Sorted by id.
    pub reports: Vec<CandidateReport>,
    /// One per resolved unit, in manifest order.
    pub modules: Vec<IrModule>,
    pub errors: Vec<UnitError>,
    pub analyzed: Vec<String>,
    pub cache_hits: Vec<String>,
    pub parse_time: Duration,
    pub analysis_time: Duration,
    pub lower_time: Duration,
}

impl Stage1Output {
    pub fn log_lines(&self) -> Vec<String> {
        let mut lines: BTreeMap<&str, String> = BTreeMap::new();
        let count = |u: &str| {
            self.reports.iter().filter(|r| self.unit_of_report(r).as_deref() == Some(u)).count()
        };
        for u in &self.analyzed {
            lines.insert(u, format!("stage1 {u}: analyzed, {} report(s)", count(u)));
        }
        for u in &self.cache_hits {
            lines.insert(u, format!("stage1 {u}: cache hit, {} report(s)", count(u)));
        }
        for e in &self.errors {
            lines.insert(&e.unit, format!("stage1 {}: error: {}", e.unit, e.diagnostics.join("; ")));
        }
        lines.into_values().collect()
    }

    fn unit_of_report(&self, r: &CandidateReport) -> Option<String> {
        let p = self.program.as_ref()?;
        p.units.iter().find(|u| u.file() == r.loc.file).map(|u| u.name.clone())
    }
}

struct UnitResult {
    name: String,
    key: String,
    cached: Option<(CacheEntry, IrModule)>,
    reports: Vec<CandidateReport>,
}

/// Stage 1 over every unit that resolves. Cached units are not explored
/// again; their reports and IR come from the cache.
pub fn stage1(project: &Project, opts: &RunOptions) -> Stage1Output {
    let cache = opts.cache(&project.manifest);
    let m = &project.manifest;
    let t = Instant::now();
    let (program, errors) = parse_project(project, opts);
    let parse_time = t.elapsed();

    let t = Instant::now();
    let checkers = registry(&m.checkers).unwrap_or_default();
    let results: Vec<UnitResult> = opts.pool(|| {
        program
            .units
            .par_iter()
            .map(|u| {
                let key = unit_key(project, &program, &u.name);
                if let Some(hit) = cache.as_ref().and_then(|c| c.get(&key)) {
                    return UnitResult { name: u.name.clone(), key, reports: hit.0.reports.clone(), cached: Some(hit) };
                }
                let index = program.unit_index(&u.name);
                let a = analyze_unit(u, &index, &m.engine, &checkers);
                let mut reports: Vec<CandidateReport> = a
                    .findings
                    .iter()
                    .map(|f| {
                        let meta = a.summaries.get(&f.function).map(EngineMeta::from).unwrap_or_default();
                        emit_candidate(f, meta, &u.source)
                    })
                    .collect();
                reports.sort_by(|a, b| a.id.cmp(&b.id));
                UnitResult { name: u.name.clone(), key, cached: None, reports }
            })
            .collect()
    });
    let analysis_time = t.elapsed();

    let t = Instant::now();
    let modules: Vec<IrModule> = opts.pool(|| {
        program
            .units
            .par_iter()
            .zip(&results)
            .map(|(u, r)| match &r.cached {
                Some((_, ir)) => ir.clone(),
                None => lower_unit(u, &program.unit_index(&u.name)),
            })
            .collect()
    });
    let lower_time = t.elapsed();

    if let Some(c) = &cache {
        for ((u, r), ir) in program.units.iter().zip(&results).zip(&modules) {
            if r.cached.is_none() {
                let entry = CacheEntry {
                    key: r.key.clone(),
                    unit: r.name.clone(),
                    fingerprint: sha256_hex(&[pretty::print_unit(u).as_bytes()]),
                    reports: r.reports.clone(),
                    ir: format!("{}.ir.json", r.key),
                };
                if let Err(e) = c.put(&entry, ir) {
                    log::warn!("cache write for {}: {e}", r.name);
                }
            }
        }
    }

    let mut reports: Vec<CandidateReport> = results.iter().flat_map(|r| r.reports.iter().cloned()).collect();
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    reports.dedup_by(|a, b| a.id == b.id);
    let (hits, misses): (Vec<&UnitResult>, Vec<&UnitResult>) = results.iter().partition(|r| r.cached.is_some());
    Stage1Output {
        reports,
        modules,
        errors,
        analyzed: misses.iter().map(|r| r.name.clone()).collect(),
        cache_hits: hits.iter().map(|r| r.name.clone()).collect(),
        parse_time,
        analysis_time,
        lower_time,
        program: Some(program),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    /// Reports of checkers that stage 2 does not validate.
    Final,
    Validated { report: WpReport },
    Error { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub report_id: String,
    pub cwe: String,
    pub local_path: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default)]
pub struct Stage2Output {
    pub entries: Vec<DeclId>,
    pub program: Option<IrProgram>,
    /// Sorted by report id.
    pub results: Vec<QueryResult>,
    /// Garbage-read queries answered (errors included).
    pub queries: usize,
    pub time: Duration,
}

impl Stage2Output {
    pub fn log_lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                let status = match &r.outcome {
                    Outcome::Final => "reported".to_string(),
                    Outcome::Validated { report } => match report.verdict {
                        Verdict::Confirmed => format!("confirmed, {} chain(s)", report.chains.len()),
                        Verdict::FalsePositive => "false positive".to_string(),
                    },
                    Outcome::Error { message } => format!("error: {message}"),
                };
                format!("stage2 report-{}: {status}", r.report_id)
            })
            .collect()
    }
}

fn entries_for(m: &Manifest, modules: &[IrModule]) -> Result<Vec<DeclId>, DriverError> {
    if !m.entries.is_empty() {
        return Ok(m.entries.clone());
    }
    if modules.iter().any(|md| md.functions.iter().any(|f| f.id == "main")) {
        return Ok(vec!["main".into()]);
    }
    Err(DriverError::NoEntries)
}

/// Link the modules once and validate every garbage-read candidate against
/// the shared whole-program view.
pub fn stage2(
    project: &Project,
    opts: &RunOptions,
    reports: &[CandidateReport],
    modules: &[IrModule],
) -> Result<Stage2Output, DriverError> {
    let t = Instant::now();
    let m = &project.manifest;
    let validated = |r: &CandidateReport| r.cwe == "CWE457";
    let mut out = Stage2Output::default();
    let mut sorted: Vec<&CandidateReport> = reports.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let whole = if sorted.iter().any(|r| validated(r)) {
        let entries = entries_for(m, modules)?;
        let program = link(modules, &entries)?;
        out.entries = entries.clone();
        Some(WholeProgram::new(program, entries, m.wpa.clone()))
    } else {
        None
    };
    out.results = opts.pool(|| {
        sorted
            .par_iter()
            .map(|r| {
                let outcome = match &whole {
                    Some(w) if validated(r) => match query_for(r, &w.program) {
                        Ok(q) => match w.validate(&q) {
                            Ok(report) => Outcome::Validated { report },
                            Err(e) => Outcome::Error { message: ReportError::Stale(e.to_string()).to_string() },
                        },
                        Err(e) => Outcome::Error { message: e.to_string() },
                    },
                    _ => Outcome::Final,
                };
                QueryResult { report_id: r.id.clone(), cwe: r.cwe.clone(), local_path: r.local_path.clone(), outcome }
            })
            .collect()
    });
    out.queries = sorted.iter().filter(|r| validated(r)).count();
    out.program = whole.map(|w| w.program);
    out.time = t.elapsed();
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitSummary {
    pub candidates: usize,
    /// Confirmed garbage reads plus reports of stage-1-final checkers.
    pub confirmed: usize,
    pub false_positives: usize,
    /// Units that failed to parse or check, and reports that could not be
    /// validated.
    pub errors: usize,
}

impl ExitSummary {
    /// 2 on errors, 1 on confirmed reports unless `exit_zero`, else 0.
    pub fn exit_code(&self, exit_zero: bool) -> i32 {
        if self.errors > 0 {
            2
        } else if self.confirmed > 0 && !exit_zero {
            1
        } else {
            0
        }
    }

    pub fn from_outputs(s1: &Stage1Output, s2: &Stage2Output) -> ExitSummary {
        let mut s = ExitSummary { candidates: s1.reports.len(), errors: s1.errors.len(), ..Default::default() };
        for r in &s2.results {
            match &r.outcome {
                Outcome::Final => s.confirmed += 1,
                Outcome::Validated { report } if report.verdict == Verdict::Confirmed => s.confirmed += 1,
                Outcome::Validated { .. } => s.false_positives += 1,
                Outcome::Error { .. } => s.errors += 1,
            }
        }
        s
    }
}

/// Stage times normalized to front-end time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Parse plus IR lowering, seconds.
    #[serde(rename = "N_t")]
    pub n_t: f64,
    #[serde(rename = "SA_x")]
    pub sa_x: f64,
    #[serde(rename = "WPA_x")]
    pub wpa_x: f64,
    #[serde(rename = "TA_x")]
    pub ta_x: f64,
    /// Mean stage-2 seconds per query.
    #[serde(rename = "WPAvg_t")]
    pub wpavg_t: f64,
    pub stage1_s: f64,
    pub stage2_s: f64,
    pub queries: usize,
    /// Timer resolution, seconds.
    pub least_count_s: f64,
}

impl Timing {
    pub const LEAST_COUNT_S: f64 = 1e-9;

    pub fn compute(front: Duration, stage1: Duration, stage2: Duration, queries: usize) -> Timing {
        let n = front.as_nanos().max(1) as f64;
        let (sa, wpa) = (stage1.as_nanos() as f64, stage2.as_nanos() as f64);
        Timing {
            n_t: n * 1e-9,
            sa_x: sa / n,
            wpa_x: wpa / n,
            ta_x: (sa + wpa) / n,
            wpavg_t: if queries == 0 { 0.0 } else { wpa * 1e-9 / queries as f64 },
            stage1_s: sa * 1e-9,
            stage2_s: wpa * 1e-9,
            queries,
            least_count_s: Self::LEAST_COUNT_S,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub summary: ExitSummary,
    pub unit_errors: Vec<UnitError>,
    pub reports: Vec<QueryResult>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub stage1: Stage1Output,
    pub stage2: Stage2Output,
    pub summary: ExitSummary,
    pub timing: Timing,
    pub log: Vec<String>,
}

/// Replace every file in `dir` whose name starts with `prefix`.
fn clear(dir: &Path, prefix: &str) -> Result<(), DriverError> {
    let Ok(rd) = std::fs::read_dir(dir) else { return Ok(()) };
    for e in rd.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        if name.starts_with(prefix) {
            std::fs::remove_file(e.path()).map_err(io_err(&e.path()))?;
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), DriverError> {
    if let Some(p) = path.parent() {
        std::fs::create_dir_all(p).map_err(io_err(p))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_candidates(dir: &Path, reports: &[CandidateReport]) -> Result<(), DriverError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    clear(dir, "report-")?;
    for r in reports {
        reports::write_candidate(dir, r).map_err(io_err(dir))?;
    }
    Ok(())
}

fn write_stage2(dir: &Path, s2: &Stage2Output) -> Result<(), DriverError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    clear(dir, "wp-report-")?;
    for r in &s2.results {
        if let Outcome::Validated { report } = &r.outcome {
            reports::write_wp(dir, report, &s2.entries).map_err(io_err(dir))?;
        }
    }
    Ok(())
}

fn write_log(m: &Manifest, lines: &[String]) -> Result<(), DriverError> {
    for l in lines {
        log::info!("{l}");
    }
    let mut text = lines.join("\n");
    text.push('\n');
    write(&m.out_dir().join("run.log"), &text)
}

fn ir_dir(m: &Manifest) -> PathBuf {
    m.out_dir().join("ir")
}

/// One canonical `<unit>.mir.json` per module into `<out>/ir`.
fn write_modules(m: &Manifest, modules: &[IrModule]) -> Result<(), DriverError> {
    let dir = ir_dir(m);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    clear(&dir, "")?;
    for md in modules {
        write(&dir.join(format!("{}.mir.json", md.unit)), &to_canonical_json(md))?;
    }
    Ok(())
}

fn write_program(m: &Manifest, program: Option<&IrProgram>) -> Result<(), DriverError> {
    let path = m.out_dir().join("program.mir.json");
    match program {
        Some(p) => write(&path, &to_canonical_json(p)),
        None => {
            let _ = std::fs::remove_file(&path);
            Ok(())
        }
    }
}

/// Stage 1 only: candidate reports into `<out>/reports` and per-unit IR
/// into `<out>/ir`.
pub fn run_stage1(manifest: &Manifest, opts: &RunOptions) -> Result<(Stage1Output, ExitSummary), DriverError> {
    let project = Project::load(manifest.clone())?;
    let s1 = stage1(&project, opts);
    write_candidates(&manifest.reports_dir(), &s1.reports)?;
    write_modules(manifest, &s1.modules)?;
    let mut lines = s1.log_lines();
    let summary = ExitSummary { candidates: s1.reports.len(), errors: s1.errors.len(), ..Default::default() };
    lines.push(format!("stage1: {} candidate(s), {} unit error(s)", summary.candidates, summary.errors));
    write_log(manifest, &lines)?;
    Ok((s1, summary))
}

/// Read the candidate reports in `<out>/reports`. Unreadable ones are
/// returned as errors keyed by file name.
pub fn read_candidates(dir: &Path) -> Result<(Vec<CandidateReport>, Vec<(String, ReportError)>), DriverError> {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io_err(dir))?
        .flatten()
        .map(|e| e.path())
        .filter(|p| {
            let n = p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            n.starts_with("report-") && n.ends_with(".json")
        })
        .collect();
    files.sort();
    for f in files {
        let text = std::fs::read_to_string(&f).map_err(io_err(&f))?;
        match reports::read_candidate(&text) {
            Ok(r) => ok.push(r),
            Err(e) => bad.push((f.file_name().unwrap().to_string_lossy().into_owned(), e)),
        }
    }
    Ok((ok, bad))
}

/// Stage 2 only, over the candidate reports already in `<out>/reports`.
/// The current sources are lowered again (cached units reuse their IR), so
/// reports made against an older program come back stale.
pub fn run_stage2(manifest: &Manifest, opts: &RunOptions) -> Result<(Stage2Output, ExitSummary), DriverError> {
    let project = Project::load(manifest.clone())?;
    let (candidates, unreadable) = read_candidates(&manifest.reports_dir())?;
    let s1 = stage1(&project, opts);
    let s2 = stage2(&project, opts, &candidates, &s1.modules)?;
    write_stage2(&manifest.reports_dir(), &s2)?;
    write_program(manifest, s2.program.as_ref())?;
    let mut summary = ExitSummary::from_outputs(&Stage1Output { reports: candidates, ..Default::default() }, &s2);
    summary.errors += unreadable.len() + s1.errors.len();
    let mut lines = s2.log_lines();
    lines.extend(unreadable.iter().map(|(f, e)| format!("stage2 {f}: error: {e}")));
    lines.push(summary_line(&summary));
    write_log(manifest, &lines)?;
    Ok((s2, summary))
}

fn summary_line(s: &ExitSummary) -> String {
    format!(
        "summary: {} candidate(s), {} confirmed, {} false positive(s), {} error(s)",
        s.candidates, s.confirmed, s.false_positives, s.errors
    )
}

/// Run both stages in memory, without writing anything.
pub fn analyze(project: &Project, opts: &RunOptions) -> Result<RunOutput, DriverError> {
    let s1 = stage1(project, opts);
    let s2 = stage2(project, opts, &s1.reports, &s1.modules)?;
    let summary = ExitSummary::from_outputs(&s1, &s2);
    let timing = Timing::compute(s1.parse_time + s1.lower_time, s1.analysis_time, s2.time, s2.queries);
    let mut log = s1.log_lines();
    log.extend(s2.log_lines());
    log.push(summary_line(&summary));
    Ok(RunOutput { stage1: s1, stage2: s2, summary, timing, log })
}

/// Full pipeline. Writes candidate and whole-program reports plus
/// `summary.json` to `<out>/reports`, per-unit IR to `<out>/ir`, the linked
/// program to `<out>/program.mir.json`, and `timing.json` and `run.log` to
/// `<out>`.
pub fn run_all(manifest: &Manifest, opts: &RunOptions) -> Result<RunOutput, DriverError> {
    let project = Project::load(manifest.clone())?;
    let run = analyze(&project, opts)?;
    let dir = manifest.reports_dir();
    write_candidates(&dir, &run.stage1.reports)?;
    write_stage2(&dir, &run.stage2)?;
    let file = SummaryFile {
        summary: run.summary,
        unit_errors: run.stage1.errors.clone(),
        reports: run.stage2.results.clone(),
    };
    write(&dir.join("summary.json"), &to_json(&file))?;
    write_modules(manifest, &run.stage1.modules)?;
    write_program(manifest, run.stage2.program.as_ref())?;
    write(&manifest.out_dir().join("timing.json"), &to_json(&run.timing))?;
    write_log(manifest, &run.log)?;
    Ok(run)
}
