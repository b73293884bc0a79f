use super::{Checker, CheckerFinding, Event, EventSite};

/// CWE195: an equal-width signed to unsigned conversion of a possibly
/// negative value.
pub struct SignConversion;

impl Checker for SignConversion {
    fn id(&self) -> &'static str {
        "cwe195"
    }

    fn cwe(&self) -> u16 {
        195
    }

    fn on_event(&self, site: &EventSite<'_>, event: &Event<'_>) -> Option<CheckerFinding> {
        let Event::Conversion { from, to, value, text } = event else { return None };
        if from.signed() && !to.signed() && from.bits() == to.bits() && value.admits_negative() {
            let msg = format!("Possibly negative {} value converted to {}", from.name(), to.name());
            return Some(site.finding(195, text, &msg));
        }
        None
    }
}

/// CWE194: a sign-extended, possibly negative value used as a size.
pub struct SignExtension;

impl Checker for SignExtension {
    fn id(&self) -> &'static str {
        "cwe194"
    }

    fn cwe(&self) -> u16 {
        194
    }

    fn on_event(&self, site: &EventSite<'_>, event: &Event<'_>) -> Option<CheckerFinding> {
        let Event::SizeSink { builtin, value, text } = event else { return None };
        if value.sign_ext && value.admits_negative() {
            let msg = format!("Sign-extended value may be negative when used as the size of {}", builtin.name());
            return Some(site.finding(194, text, &msg));
        }
        None
    }
}
