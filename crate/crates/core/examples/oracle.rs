//! Ground truth by exhaustive execution: every choice of external input
//! within a small universe, recording defects actually observed.
//!
//! ```text
//! cargo run --example oracle
//! ```

use miniobj_analyzer::bench::{oracle_interpret, OracleConfig, Universe};
use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::load_program;

const SIGN: &str = "\
fn main() {
  let v = extern_input();
  if (tag_of(v) == Int) {
    let s = as_int8(v);
    let u: u32 = cast<u32>(s);
  }
}
";

fn main() -> anyhow::Result<()> {
    let ast = load_program(&fixtures::running_example()).map_err(|d| anyhow::anyhow!("{d:?}"))?;
    let facts = oracle_interpret(&ast, &["main".into()], &OracleConfig::default());
    for r in &facts.uninit_reads {
        println!("uninitialized {} read at {} via {}", r.field, r.site.loc, r.chain.join(" -> "));
    }

    let ast = load_program(&[("sign", SIGN)]).map_err(|d| anyhow::anyhow!("{d:?}"))?;
    let cfg = OracleConfig { universe: Universe::I8, ..OracleConfig::default() };
    let facts = oracle_interpret(&ast, &["main".into()], &cfg);
    println!("{} executions, partial: {}", facts.executions, facts.partial);
    for s in facts.sites(195) {
        println!("negative value to unsigned at {} in {}", s.loc, s.function);
    }
    Ok(())
}
