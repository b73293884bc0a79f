//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the lines always print.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::AssertUnwindSafe;
use std::path::Path;
use std::time::{Duration, Instant};

use miniobj_analyzer::bench::{self, oracle_interpret, LoadedCase, OracleConfig, Variant};
use miniobj_analyzer::checkers::{registry, ALL_IDS};
use miniobj_analyzer::driver::{run_all, Manifest, Outcome, RunOptions, Timing};
use miniobj_analyzer::engine::summary::UseEntry;
use miniobj_analyzer::engine::{analyze_unit, EngineConfig};
use miniobj_analyzer::fixtures::{self, many_units, write_project};
use miniobj_analyzer::frontend::ast::SrcLoc;
use miniobj_analyzer::frontend::load_program;
use miniobj_analyzer::ir::{link, lower_unit, IrProgram};
use miniobj_analyzer::wpa::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Files under `reports` against `tests/golden/<scenario>/`, both ways.
fn check_reports_golden(scenario: &str, reports: &Path) -> Result<(), String> {
    let actual = common::snapshot(reports);
    for (name, bytes) in &actual {
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        common::check_golden(&format!("{scenario}/{name}"), text)?;
    }
    let golden: BTreeSet<String> = common::snapshot(&common::golden_dir().join(scenario)).into_keys().collect();
    let produced: BTreeSet<String> = actual.into_keys().collect();
    ensure!(golden == produced, "{scenario}: golden files {golden:?} but produced {produced:?}");
    Ok(())
}

fn no_cache() -> RunOptions {
    RunOptions { jobs: 0, exit_zero: false, use_cache: false, cache_dir: None }
}

fn run_scenario(sources: &[(&str, &str)], extra: serde_json::Value) -> Result<(tempfile::TempDir, Manifest, miniobj_analyzer::driver::RunOutput, Duration), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = write_project(tmp.path(), sources, extra).map_err(|e| e.to_string())?;
    let m = Manifest::load(&path).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let run = run_all(&m, &no_cache()).map_err(|e| e.to_string())?;
    Ok((tmp, m, run, t.elapsed()))
}

fn single_verdict(run: &miniobj_analyzer::driver::RunOutput) -> Result<WpReport, String> {
    ensure!(run.stage2.results.len() == 1, "expected one stage-2 result, got {}", run.stage2.results.len());
    match &run.stage2.results[0].outcome {
        Outcome::Validated { report } => Ok(report.clone()),
        other => Err(format!("not validated: {other:?}")),
    }
}

fn wp_text(m: &Manifest, id: &str) -> Result<String, String> {
    std::fs::read_to_string(m.reports_dir().join(format!("wp-report-{id}.txt"))).map_err(|e| e.to_string())
}

fn criterion_1() -> Check {
    let (_tmp, m, run, elapsed) = run_scenario(&fixtures::running_example(), json!({}))?;
    ensure!(run.stage1.reports.len() == 1, "{} candidates", run.stage1.reports.len());
    let r = &run.stage1.reports[0];
    ensure!(r.local_path == "foo::x->foo::isZero", "local_path {}", r.local_path);
    ensure!(r.message == "Potentially uninitialized object field", "message {}", r.message);
    let wp = single_verdict(&run)?;
    ensure!(wp.verdict == Verdict::Confirmed, "verdict {:?}", wp.verdict);
    let text = wp_text(&m, &r.id)?;
    ensure!(text.contains("Candidate callchain is:\n\nfoo::isZero()\nmain\n"), "chain block missing:\n{text}");
    check_reports_golden("running-example", &m.reports_dir())?;
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("1 candidate, Confirmed via main -> foo::isZero, golden match, {:.0} ms", elapsed.as_secs_f64() * 1e3))
}

fn criterion_2() -> Check {
    let (_tmp, _m, base, _) = run_scenario(&fixtures::running_example(), json!({}))?;
    let (_tmp2, m, run, _) = run_scenario(&fixtures::running_example_initialized(), json!({}))?;
    ensure!(run.stage1.reports.len() == 1, "{} candidates", run.stage1.reports.len());
    let (a, b) = (&base.stage1.reports[0], &run.stage1.reports[0]);
    ensure!(a.id == b.id && a.local_path == b.local_path && a.loc == b.loc, "stage-1 candidate differs: {a:?} vs {b:?}");
    let wp = single_verdict(&run)?;
    ensure!(wp.verdict == Verdict::FalsePositive, "verdict {:?}", wp.verdict);
    let text = wp_text(&m, &b.id)?;
    ensure!(text.contains("All loads have a matching store\n"), "missing matching-store line:\n{text}");
    check_reports_golden("running-example-initialized", &m.reports_dir())?;
    Ok(format!("same candidate {} in stage 1, FalsePositive in stage 2, golden match", b.id))
}

fn criterion_3() -> Check {
    let mut out = Vec::new();
    for (on, scenario, want) in
        [(false, "aliased-store-off", Verdict::Confirmed), (true, "aliased-store-on", Verdict::FalsePositive)]
    {
        let (_tmp, m, run, _) =
            run_scenario(&fixtures::aliased_store(), json!({ "wpa": { "resolve_ref_aliases": on } }))?;
        let wp = single_verdict(&run)?;
        ensure!(wp.verdict == want, "aliases {on}: verdict {:?}", wp.verdict);
        check_reports_golden(scenario, &m.reports_dir())?;
        out.push(format!("aliases {}: {:?}", if on { "on" } else { "off" }, wp.verdict));
    }
    Ok(format!("{}, golden match", out.join(", ")))
}

fn criterion_4() -> Check {
    let root = common::corpus_dir();
    let cases = bench::harness::load_corpus(&root).map_err(|e| e.to_string())?;
    let mut per_cwe: BTreeMap<u16, (usize, usize)> = BTreeMap::new();
    for c in &cases {
        let e = per_cwe.entry(c.expected.cwe).or_default();
        match c.expected.variant {
            Variant::Bad => e.0 += 1,
            Variant::Good => e.1 += 1,
        }
    }
    ensure!(cases.len() >= 160, "only {} cases", cases.len());
    for cwe in [457, 843, 195, 194] {
        let (b, g) = per_cwe.get(&cwe).copied().unwrap_or_default();
        ensure!(b >= 20 && g >= 20, "cwe{cwe}: {b} bad, {g} good");
    }
    let r = bench::run_cases(&cases, &RunOptions::default());
    for (cwe, v) in &r.per_cwe {
        ensure!(v.counts.fn_ == 0, "{cwe}: {} oracle-observed defect(s) missed", v.counts.fn_);
    }
    // every site's oracle chain replays in the final call graph
    let mut chains = 0;
    for c in cases.iter().filter(|c| c.expected.cwe == 457 && c.expected.variant == Variant::Bad) {
        let Ok(project) = &c.project else { return Err(format!("{}: unloadable", c.expected.id)) };
        let sources: Vec<(&str, &str)> = project.units.iter().map(|u| (u.name.as_str(), u.text.as_str())).collect();
        let program = load_program(&sources).map_err(|d| format!("{d:?}"))?;
        let facts = oracle_interpret(&program, &["main".into()], &OracleConfig { universe: c.expected.universe, ..Default::default() });
        let wp = WholeProgram::new(lowered(&sources), vec!["main".into()], WpaConfig::default());
        for read in &facts.uninit_reads {
            for w in read.chain.windows(2) {
                ensure!(wp.callgraph.has_edge(&w[0], &w[1]), "{}: edge {} -> {} missing", c.expected.id, w[0], w[1]);
            }
            chains += 1;
        }
    }
    let json = miniobj_analyzer::reports::to_json(&r);
    common::check_golden("bench-results.json", &json)?;
    let rates: Vec<String> = r
        .per_cwe
        .iter()
        .map(|(k, v)| format!("{k} TPR {:.1}% FPR {:.1}%", v.tpr * 100.0, v.fpr * 100.0))
        .collect();
    Ok(format!("{} cases, 0 FN, {chains} oracle chains replayed, golden match ({})", cases.len(), rates.join(", ")))
}

fn lowered(sources: &[(&str, &str)]) -> IrProgram {
    let prog = load_program(sources).expect("generated program compiles");
    let mods: Vec<_> = prog.units.iter().map(|u| lower_unit(u, &prog.index)).collect();
    link(&mods, &["main".into()]).expect("links")
}

/// Random single-inheritance hierarchy with virtual slots, call sites taking
/// each class, and a `main` that passes every instantiated object to every
/// compatible site. Methods that run may call higher-numbered slots on
/// `this`.
fn random_hierarchy(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(1..=6);
    let k = rng.random_range(1..=3);
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut defines: Vec<Vec<bool>> = Vec::new();
    for i in 0..n {
        parent.push(if i == 0 || rng.random_bool(0.25) { None } else { Some(rng.random_range(0..i)) });
        defines.push((0..k).map(|_| rng.random_bool(0.5)).collect());
    }
    let ancestors = |mut c: usize| {
        let mut v = vec![c];
        while let Some(p) = parent[c] {
            v.push(p);
            c = p;
        }
        v
    };
    let visible = |c: usize, j: usize| ancestors(c).iter().any(|&a| defines[a][j]);
    let dispatch = |c: usize, j: usize| ancestors(c).into_iter().find(|&a| defines[a][j]);
    let live: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.6)).collect();
    // only methods some live object dispatches to get call sites, so every
    // site is executed
    let runs = |i: usize, j: usize| live.iter().any(|&l| dispatch(l, j) == Some(i));
    let mut src = String::new();
    for i in 0..n {
        let base = parent[i].map(|p| format!(" : C{p}")).unwrap_or_default();
        src.push_str(&format!("class C{i}{base} {{\n"));
        for j in 0..k {
            if !defines[i][j] {
                continue;
            }
            let inherited = ancestors(i)[1..].iter().any(|&a| defines[a][j]);
            let kw = if inherited { "fn" } else { "virtual fn" };
            let mut body = String::new();
            for l in j + 1..k {
                if runs(i, j) && visible(i, l) && rng.random_bool(0.4) {
                    body.push_str(&format!("    this.m{l}();\n"));
                }
            }
            src.push_str(&format!("  {kw} m{j}() {{\n{body}  }}\n"));
        }
        src.push_str("}\n\n");
    }
    let mut sites = Vec::new();
    for c in 0..n {
        for j in 0..k {
            if visible(c, j) {
                src.push_str(&format!("fn call_{c}_{j}(p: C{c}) {{\n  p.m{j}();\n}}\n\n"));
                sites.push((c, j));
            }
        }
    }
    src.push_str("fn main() {\n");
    for &i in &live {
        src.push_str(&format!("  let o{i} = new C{i}();\n"));
    }
    for &(c, j) in &sites {
        for &i in &live {
            if ancestors(i).contains(&c) {
                src.push_str(&format!("  call_{c}_{j}(o{i});\n"));
            }
        }
    }
    src.push_str("}\n");
    src
}

fn criterion_5() -> Check {
    let t = Instant::now();
    let (mut sites, mut observed_sites, mut devirt) = (0, 0, 0);
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_hierarchy(&mut rng);
        let sources = [("h", src.as_str())];
        let program = load_program(&sources).map_err(|d| format!("seed {seed}: {d:?}\n{src}"))?;
        let facts = oracle_interpret(&program, &["main".into()], &OracleConfig::default());
        ensure!(!facts.partial, "seed {seed}: oracle partial");
        let ir = {
            let mods: Vec<_> = program.units.iter().map(|u| lower_unit(u, &program.index)).collect();
            link(&mods, &["main".into()]).map_err(|e| e.to_string())?
        };
        let cg = build_callgraph(&ir);
        let ch = ClassHierarchy::build(&ir);
        let cha = devirtualize_cha(&cg, &ch);
        let rta = rta_prune(&cg, &ch.clone().with_instantiated(&cg, &["main".into()]));
        let fin = WholeProgram::new(ir, vec!["main".into()], WpaConfig::default()).callgraph;
        let site_locs: BTreeSet<&SrcLoc> = cg.virtual_sites.iter().map(|s| &s.site).collect();
        for loc in facts.vcall_targets.keys() {
            ensure!(site_locs.contains(loc), "seed {seed}: oracle site {loc:?} unknown to the call graph");
        }
        let empty = BTreeSet::new();
        for s in &cg.virtual_sites {
            sites += 1;
            let seen = facts.vcall_targets.get(&s.site).unwrap_or(&empty);
            let seen: BTreeSet<&String> = seen.iter().collect();
            let cha_t = cha.site_targets(&s.caller, &s.site);
            let rta_t = rta.site_targets(&s.caller, &s.site);
            ensure!(seen.is_subset(&cha_t), "seed {seed} {:?}: oracle {seen:?} not within CHA {cha_t:?}\n{src}", s.site);
            ensure!(rta_t.is_subset(&cha_t), "seed {seed} {:?}: RTA {rta_t:?} not within CHA {cha_t:?}", s.site);
            ensure!(seen.is_subset(&rta_t), "seed {seed} {:?}: oracle {seen:?} not within RTA {rta_t:?}\n{src}", s.site);
            if !seen.is_empty() {
                observed_sites += 1;
            }
            let is_devirt = fin.edges.iter().any(|e| e.site == s.site && e.caller == s.caller && e.kind == EdgeKind::Devirtualized);
            if is_devirt {
                devirt += 1;
                let target = fin.site_targets(&s.caller, &s.site);
                ensure!(seen.len() == 1 && seen == target, "seed {seed} {:?}: devirtualized to {target:?}, oracle saw {seen:?}\n{src}", s.site);
            }
        }
    }
    let elapsed = t.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    ensure!(devirt > 0 && observed_sites > 0, "degenerate generator: {devirt} devirtualized, {observed_sites} observed");
    Ok(format!(
        "200 hierarchies, {sites} vcall sites ({observed_sites} executed, {devirt} devirtualized), {:.1} s",
        elapsed.as_secs_f64()
    ))
}

/// Reference summary of a straight-line method: a member read before any
/// write to it is a use without def; each member's first write is its def.
struct GenKillCase {
    src: String,
    defs: BTreeMap<String, SrcLoc>,
    uses: BTreeSet<UseEntry>,
}

fn random_straight_line(rng: &mut ChaCha8Rng) -> GenKillCase {
    const FIELDS: usize = 4;
    let mut src = String::from("class G {\n");
    for f in 0..FIELDS {
        src.push_str(&format!("  f{f}: i32;\n"));
    }
    src.push_str("  fn run(a: i32) {\n");
    let mut line = 2 + FIELDS as u32;
    let loc = |line: u32, col: usize| SrcLoc { file: "g.mo".into(), line, col: col as u32 };
    let mut defs: BTreeMap<String, SrcLoc> = BTreeMap::new();
    let mut uses = BTreeSet::new();
    let mut locals = 0usize;
    for _ in 0..rng.random_range(0..=12) {
        line += 1;
        let mut text = String::from("    ");
        // target
        let target = match rng.random_range(0..4) {
            0 if locals > 0 => {
                text.push_str(&format!("t{} = ", rng.random_range(0..locals)));
                None
            }
            0 | 1 => {
                let f = rng.random_range(0..FIELDS);
                let col = text.len() + 1;
                text.push_str(&format!("f{f} = "));
                Some((f, col))
            }
            2 => {
                let f = rng.random_range(0..FIELDS);
                let col = text.len() + 1 + "this.".len();
                text.push_str(&format!("this.f{f} = "));
                Some((f, col))
            }
            _ => {
                text.push_str(&format!("let t{locals} = "));
                None
            }
        };
        let mut reads = Vec::new();
        for i in 0..rng.random_range(1..=3) {
            if i > 0 {
                text.push_str(if rng.random_bool(0.5) { " + " } else { " - " });
            }
            match rng.random_range(0..5) {
                0 => text.push_str(&rng.random_range(0..100).to_string()),
                1 => text.push('a'),
                2 if locals > 0 => text.push_str(&format!("t{}", rng.random_range(0..locals))),
                2 | 3 => {
                    let f = rng.random_range(0..FIELDS);
                    reads.push((f, text.len() + 1));
                    text.push_str(&format!("f{f}"));
                }
                _ => {
                    let f = rng.random_range(0..FIELDS);
                    reads.push((f, text.len() + 1 + "this.".len()));
                    text.push_str(&format!("this.f{f}"));
                }
            }
        }
        if text.trim_start().starts_with("let ") {
            locals += 1;
        }
        text.push_str(";\n");
        src.push_str(&text);
        for (f, col) in reads {
            let member = format!("G::f{f}");
            if !defs.contains_key(&member) {
                uses.insert(UseEntry { local_path: format!("{member}->G::run"), member, loc: loc(line, col) });
            }
        }
        if let Some((f, col)) = target {
            defs.entry(format!("G::f{f}")).or_insert_with(|| loc(line, col));
        }
    }
    src.push_str("  }\n}\n");
    GenKillCase { src, defs, uses }
}

fn criterion_6() -> Check {
    let checkers = registry(&ALL_IDS).map_err(|e| e.to_string())?;
    let (mut n_defs, mut n_uses) = (0, 0);
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + seed);
        let case = random_straight_line(&mut rng);
        let prog = load_program(&[("g", &case.src)]).map_err(|d| format!("seed {seed}: {d:?}\n{}", case.src))?;
        let a = analyze_unit(prog.unit("g").unwrap(), &prog.index, &EngineConfig::default(), &checkers);
        let s = a.summaries.get("G::run").ok_or("no summary for G::run")?;
        ensure!(s.def_set == case.defs, "seed {seed}: defs {:?} != reference {:?}\n{}", s.def_set, case.defs, case.src);
        ensure!(s.use_without_def_set == case.uses, "seed {seed}: uses {:?} != reference {:?}\n{}", s.use_without_def_set, case.uses, case.src);
        ensure!(!s.truncated && s.paths_explored == 1, "seed {seed}: {} paths, truncated {}", s.paths_explored, s.truncated);
        n_defs += case.defs.len();
        n_uses += case.uses.len();
    }
    Ok(format!("500 functions, {n_defs} defs and {n_uses} uses-without-def match the reference"))
}

/// Copy every corpus case into `dst/<cwe>/<id>` and return the manifests.
fn copy_corpus(cases: &[LoadedCase], dst: &Path) -> Result<Vec<Manifest>, String> {
    let mut out = Vec::new();
    for c in cases {
        let Ok(p) = &c.project else { return Err(format!("{}: unloadable", c.expected.id)) };
        let dir = dst.join(format!("cwe{}", c.expected.cwe)).join(&c.expected.id);
        let sources: Vec<(&str, &str)> = p.units.iter().map(|u| (u.name.as_str(), u.text.as_str())).collect();
        let checkers = json!({ "checkers": p.manifest.checkers });
        let path = write_project(&dir, &sources, checkers).map_err(|e| e.to_string())?;
        out.push(Manifest::load(&path).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn criterion_7() -> Check {
    let cases = bench::harness::load_corpus(&common::corpus_dir()).map_err(|e| e.to_string())?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let serial = copy_corpus(&cases, &tmp.path().join("serial"))?;
    let parallel = copy_corpus(&cases, &tmp.path().join("parallel"))?;
    let cache = tmp.path().join("cache");
    let o1 = RunOptions { jobs: 1, exit_zero: false, use_cache: true, cache_dir: Some(cache) };
    let o8 = RunOptions { jobs: 8, ..no_cache() };
    let mut files = 0;
    for (a, b) in serial.iter().zip(&parallel) {
        run_all(a, &o1).map_err(|e| e.to_string())?;
        run_all(b, &o8).map_err(|e| e.to_string())?;
        let (sa, sb) = (common::snapshot(&a.reports_dir()), common::snapshot(&b.reports_dir()));
        ensure!(sa == sb, "{}: --jobs 1 and --jobs 8 differ", a.base_dir.display());
        run_all(a, &o1).map_err(|e| e.to_string())?;
        ensure!(common::snapshot(&a.reports_dir()) == sa, "{}: second run differs", a.base_dir.display());
        files += sa.len();
    }
    let r1 = bench::run_cases(&cases, &RunOptions { jobs: 1, ..no_cache() });
    let r8 = bench::run_cases(&cases, &RunOptions { jobs: 8, ..no_cache() });
    ensure!(
        miniobj_analyzer::reports::to_json(&r1) == miniobj_analyzer::reports::to_json(&r8),
        "bench results differ between 1 and 8 jobs"
    );
    Ok(format!("{} cases, {files} report files identical across --jobs 1/8 and reruns", cases.len()))
}

fn criterion_8() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut srcs = many_units(19);
    let borrowed: Vec<(&str, &str)> = srcs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let m = Manifest::load(&write_project(tmp.path(), &borrowed, json!({})).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let o = RunOptions { jobs: 4, exit_zero: false, use_cache: true, cache_dir: Some(tmp.path().join("cache")) };
    let first = run_all(&m, &o).map_err(|e| e.to_string())?;
    ensure!(first.stage1.analyzed.len() == 20, "first run analyzed {}", first.stage1.analyzed.len());
    let before = common::snapshot(&m.reports_dir());
    srcs[7].1.push_str("// touched\n");
    std::fs::write(tmp.path().join("u7.mo"), &srcs[7].1).map_err(|e| e.to_string())?;
    run_all(&m, &o).map_err(|e| e.to_string())?;
    let log = std::fs::read_to_string(m.out_dir().join("run.log")).map_err(|e| e.to_string())?;
    let analyzed: Vec<&str> = log.lines().filter(|l| l.starts_with("stage1 ") && l.contains(": analyzed")).collect();
    let hits = log.lines().filter(|l| l.starts_with("stage1 ") && l.contains(": cache hit")).count();
    ensure!(analyzed.len() == 1 && analyzed[0].starts_with("stage1 u7:"), "re-analyzed {analyzed:?}");
    ensure!(hits == 19, "{hits} cache hits");
    ensure!(common::snapshot(&m.reports_dir()) == before, "reports changed after touching u7");
    Ok(format!("20 units, touching u7 re-ran 1 unit, {hits} cache hits, {} report files unchanged", before.len()))
}

fn timing_ok(t: &Timing, what: &str) -> Result<(), String> {
    let lc = t.least_count_s / t.n_t;
    ensure!((t.ta_x - (t.sa_x + t.wpa_x)).abs() <= lc, "{what}: TA_x {} != SA_x {} + WPA_x {}", t.ta_x, t.sa_x, t.wpa_x);
    let avg = if t.queries == 0 { 0.0 } else { t.stage2_s / t.queries as f64 };
    ensure!((t.wpavg_t - avg).abs() <= t.least_count_s, "{what}: WPAvg_t {} != {avg}", t.wpavg_t);
    Ok(())
}

fn criterion_9() -> Check {
    let (_tmp, m, _, _) = run_scenario(&fixtures::running_example(), json!({}))?;
    let text = std::fs::read_to_string(m.out_dir().join("timing.json")).map_err(|e| e.to_string())?;
    let t: Timing = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    timing_ok(&t, "running example")?;
    ensure!(t.queries == 1, "{} queries", t.queries);

    let start = Instant::now();
    let r = bench::run_corpus(&common::corpus_dir(), &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    bench::write_results(out.path(), &r).map_err(|e| e.to_string())?;
    let t: Timing = serde_json::from_str(&std::fs::read_to_string(out.path().join("timing.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    timing_ok(&t, "corpus")?;
    ensure!(elapsed < Duration::from_secs(60), "corpus took {elapsed:?}");
    Ok(format!(
        "identities hold (corpus: SA_x {:.2}, WPA_x {:.2}, {} queries); full corpus in {:.2} s",
        t.sa_x,
        t.wpa_x,
        t.queries,
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("running-example fidelity", criterion_1),
        ("false-positive classification", criterion_2),
        ("aliased-store limitation", criterion_3),
        ("oracle soundness suite", criterion_4),
        ("call-graph property suite", criterion_5),
        ("gen-kill oracle equivalence", criterion_6),
        ("determinism and parallelism", criterion_7),
        ("incrementality", criterion_8),
        ("timing decomposition", criterion_9),
    ];
    let filter = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str()) && *f != n.to_string()) {
            continue;
        }
        let result = std::panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
