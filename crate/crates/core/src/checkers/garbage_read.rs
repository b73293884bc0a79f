use super::{Checker, CheckerFinding, UnitResults};
use crate::engine::summary::classify_candidates;

pub const MESSAGE: &str = "Potentially uninitialized object field";

/// CWE457: reads of object fields that no constructor initializes.
pub struct GarbageRead;

impl Checker for GarbageRead {
    fn id(&self) -> &'static str {
        "cwe457"
    }

    fn cwe(&self) -> u16 {
        457
    }

    fn finish(&self, r: &UnitResults<'_>) -> Vec<CheckerFinding> {
        let classes: Vec<String> = r.unit.classes().map(|c| c.name.clone()).collect();
        classify_candidates(r.summaries, &classes, r.index)
            .into_iter()
            .map(|g| CheckerFinding {
                cwe: 457,
                decl: g.member,
                loc: g.loc,
                local_path: g.local_path,
                message: MESSAGE.to_string(),
                function: g.function,
            })
            .collect()
    }
}
