use super::{Checker, CheckerFinding, Event, EventSite};

/// CWE843: a tainted `var` read through an accessor whose tag has not been
/// established, or a downcast whose operand may have an unrelated type.
pub struct TypeConfusion;

impl Checker for TypeConfusion {
    fn id(&self) -> &'static str {
        "cwe843"
    }

    fn cwe(&self) -> u16 {
        843
    }

    fn on_event(&self, site: &EventSite<'_>, event: &Event<'_>) -> Option<CheckerFinding> {
        match event {
            Event::VarAccess { builtin, expected, tags, tainted, text } => {
                if *tainted && !tags.is_only(*expected) {
                    let msg = format!(
                        "{} reads an input whose tag may be {tags}, not only {}",
                        builtin.name(),
                        expected.name()
                    );
                    return Some(site.finding(843, text, &msg));
                }
                None
            }
            Event::Downcast { class, possible, allowed, text } => {
                if !possible.is_subset(allowed) {
                    let bad: Vec<&str> = possible.difference(allowed).map(String::as_str).collect();
                    let msg = format!("Downcast to {class} of an object that may be a {}", bad.join(" or "));
                    return Some(site.finding(843, text, &msg));
                }
                None
            }
            _ => None,
        }
    }
}
