//! Both stages on the running example and on its variant whose
//! constructor initializes `x` through a virtual call.
//!
//! ```text
//! cargo run --example running_example
//! ```

use miniobj_analyzer::driver::{analyze, Outcome, Project, RunOptions};
use miniobj_analyzer::fixtures;
use miniobj_analyzer::reports::render_wp_text;

fn show(title: &str, sources: &[(&str, &str)]) -> anyhow::Result<()> {
    println!("== {title}");
    let out = analyze(&Project::from_sources(sources), &RunOptions::default())?;
    for r in &out.stage1.reports {
        print!("{}", r.render_text());
    }
    for q in &out.stage2.results {
        if let Outcome::Validated { report } = &q.outcome {
            print!("{}", render_wp_text(report, &out.stage2.entries));
        }
    }
    println!("{:?}\n", out.summary);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    show("constructor leaves x unset", &fixtures::running_example())?;
    show("constructor calls reset()", &fixtures::running_example_initialized())
}
