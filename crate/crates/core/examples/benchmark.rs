//! Detection rates over the labeled corpus.
//!
//! ```text
//! cargo run --release --example benchmark -- [corpus-dir] [out-dir]
//! ```

use std::path::PathBuf;

use miniobj_analyzer::bench::{render_table, run_corpus, write_results};
use miniobj_analyzer::driver::RunOptions;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let corpus = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("corpus"));
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("bench-out"));
    let r = run_corpus(&corpus, &RunOptions::default())?;
    print!("{}", render_table(&r));
    if let Some(t) = &r.timing {
        println!("{t:?}");
    }
    write_results(&out, &r)?;
    println!("results in {}", out.display());
    Ok(())
}
