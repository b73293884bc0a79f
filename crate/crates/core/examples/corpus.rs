//! Regenerate the labeled corpus.
//!
//! ```text
//! cargo run --example corpus -- [out-dir]   # default: corpus
//! ```

use std::path::PathBuf;

use miniobj_analyzer::bench::{generate, write_corpus, Variant};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("corpus"));
    let (cases, rejected) = generate();
    for r in &rejected {
        eprintln!("rejected {r}");
    }
    if out.exists() {
        std::fs::remove_dir_all(&out)?;
    }
    write_corpus(&out, &cases)?;
    let bad = cases.iter().filter(|c| c.variant() == Variant::Bad).count();
    println!("{} cases ({bad} bad, {} good) written to {}", cases.len(), cases.len() - bad, out.display());
    Ok(())
}
