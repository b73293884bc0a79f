//! A member stored only through a reference parameter of a helper. The
//! verdict flips with `resolve_ref_aliases`.
//!
//! ```text
//! cargo run --example aliased_store
//! ```

use miniobj_analyzer::driver::{analyze, Outcome, Project, RunOptions};
use miniobj_analyzer::fixtures;

fn main() -> anyhow::Result<()> {
    for aliases in [false, true] {
        let mut p = Project::from_sources(&fixtures::aliased_store());
        p.manifest.wpa.resolve_ref_aliases = aliases;
        let out = analyze(&p, &RunOptions::default())?;
        for q in &out.stage2.results {
            if let Outcome::Validated { report } = &q.outcome {
                println!("resolve_ref_aliases={aliases}: {} {:?}", report.field, report.verdict);
            }
        }
    }
    Ok(())
}
