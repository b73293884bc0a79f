//! Per-unit cache: a second run reuses every unit, and touching one unit
//! re-analyzes only that unit.
//!
//! ```text
//! cargo run --example incremental
//! ```

use miniobj_analyzer::driver::{run_all, Manifest, RunOptions};
use miniobj_analyzer::fixtures;

fn run(manifest: &Manifest, opts: &RunOptions, label: &str) -> anyhow::Result<()> {
    let out = run_all(manifest, opts)?;
    println!(
        "{label}: {} analyzed, {} cache hit(s), {} candidate(s)",
        out.stage1.analyzed.len(),
        out.stage1.cache_hits.len(),
        out.summary.candidates
    );
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let units = fixtures::many_units(10);
    let refs: Vec<(&str, &str)> = units.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
    let path = fixtures::write_project(dir.path(), &refs, serde_json::json!({}))?;
    let manifest = Manifest::load(&path)?;
    let opts = RunOptions { use_cache: true, cache_dir: Some(dir.path().join("cache")), exit_zero: true, ..Default::default() };

    run(&manifest, &opts, "cold")?;
    run(&manifest, &opts, "warm")?;
    let u3 = dir.path().join("u3.mo");
    let text = std::fs::read_to_string(&u3)?;
    std::fs::write(&u3, format!("{text}// edited\n"))?;
    run(&manifest, &opts, "after editing u3")
}
