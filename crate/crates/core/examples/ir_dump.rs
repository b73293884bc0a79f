//! Lower one unit to IR and print its canonical JSON form.
//!
//! ```text
//! cargo run --example ir_dump -- [file.mo]   # default: the running example
//! ```

use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::load_program;
use miniobj_analyzer::ir::{lower_unit, to_canonical_json};

fn main() -> anyhow::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => fixtures::RUNNING_FOO.to_string(),
    };
    let ast = load_program(&[("unit", text.as_str())]).map_err(|d| anyhow::anyhow!("{d:?}"))?;
    println!("{}", to_canonical_json(&lower_unit(&ast.units[0], &ast.index)));
    Ok(())
}
