//! Candidate and whole-program report formats.
//!
//! Every report exists as JSON (the machine-readable form consumed by stage
//! 2) and as plain text rendered from the same struct.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::checkers::CheckerFinding;
use crate::engine::summary::FunctionSummary;
use crate::frontend::ast::SrcLoc;
use crate::ir::{IrProgram, Pos};
use crate::wpa::{Verdict, WpQuery, WpReport};

/// What a report is about.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeclRef {
    Member { class: String, member: String },
    Expr { text: String },
}

impl DeclRef {
    /// `foo::x` is a member; anything else is an expression descriptor.
    pub fn from_finding(decl: &str, cwe: u16) -> DeclRef {
        match decl.rsplit_once("::") {
            Some((class, member)) if cwe == 457 => DeclRef::Member { class: class.into(), member: member.into() },
            _ => DeclRef::Expr { text: decl.into() },
        }
    }

    /// The string hashed into the report id and shown in the local path.
    pub fn key(&self) -> String {
        match self {
            DeclRef::Member { class, member } => format!("{class}::{member}"),
            DeclRef::Expr { text } => text.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineMeta {
    pub truncated: bool,
    pub paths_explored: u64,
}

impl From<&FunctionSummary> for EngineMeta {
    fn from(s: &FunctionSummary) -> Self {
        EngineMeta { truncated: s.truncated, paths_explored: s.paths_explored }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateReport {
    pub id: String,
    /// `CWE457`, `CWE843`, ...
    pub cwe: String,
    pub decl: DeclRef,
    /// `<decl>-><function>`.
    pub local_path: String,
    pub loc: SrcLoc,
    pub message: String,
    pub engine_meta: EngineMeta,
    /// The flagged source line, verbatim.
    pub snippet: String,
}

/// First 8 hex chars of SHA-256 over `cwe`, `decl`, `local_path` and
/// `file:line:col`, newline separated.
pub fn report_id(cwe: &str, decl: &str, local_path: &str, loc: &SrcLoc) -> String {
    let text = format!("{cwe}\n{decl}\n{local_path}\n{}:{}:{}", loc.file, loc.line, loc.col);
    hex::encode(Sha256::digest(text.as_bytes()))[..8].to_string()
}

pub fn cwe_name(cwe: u16) -> String {
    format!("CWE{cwe}")
}

impl CandidateReport {
    pub fn recompute_id(&self) -> String {
        report_id(&self.cwe, &self.decl.key(), &self.local_path, &self.loc)
    }

    pub fn file_stem(&self) -> String {
        format!("report-{}", self.id)
    }

    /// Function segment of the local path.
    pub fn anchor_function(&self) -> Option<&str> {
        self.local_path.split_once("->").map(|(_, f)| f).filter(|f| !f.is_empty())
    }

    /// Listing-style text: local path, then the flagged line with a caret
    /// under the reported column.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "// {}.json", self.file_stem());
        let _ = writeln!(out, "Bug Type: {}", self.cwe);
        let _ = writeln!(out, "Local Path to Bug: {}", self.local_path);
        out.push('\n');
        out.push_str("Annotated Source Code\n");
        let _ = writeln!(
            out,
            "{}:{}:{}: warning: {}",
            self.loc.file, self.loc.line, self.loc.col, self.message
        );
        let _ = writeln!(out, "{}", self.snippet);
        let _ = writeln!(out, "{}", caret_line(&self.snippet, self.loc.col));
        out.push_str("1 warning generated.\n");
        out
    }
}

/// Caret under 1-based column `col`, keeping tabs so it lines up.
fn caret_line(line: &str, col: u32) -> String {
    let mut s: String =
        line.chars().take(col.saturating_sub(1) as usize).map(|c| if c == '\t' { '\t' } else { ' ' }).collect();
    let missing = (col.saturating_sub(1) as usize).saturating_sub(s.chars().count());
    s.extend(std::iter::repeat_n(' ', missing));
    s.push('^');
    s
}

/// Build the candidate report for one finding. `source` is the text of the
/// unit containing the finding.
pub fn emit_candidate(finding: &CheckerFinding, meta: EngineMeta, source: &str) -> CandidateReport {
    let cwe = cwe_name(finding.cwe);
    let decl = DeclRef::from_finding(&finding.decl, finding.cwe);
    let id = report_id(&cwe, &decl.key(), &finding.local_path, &finding.loc);
    let snippet = source
        .lines()
        .nth(finding.loc.line.saturating_sub(1) as usize)
        .unwrap_or("")
        .trim_end()
        .to_string();
    CandidateReport {
        id,
        cwe,
        decl,
        local_path: finding.local_path.clone(),
        loc: finding.loc.clone(),
        message: finding.message.clone(),
        engine_meta: meta,
        snippet,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error("stale report: {0}")]
    Stale(String),
    #[error("report {0} is not a garbage-read candidate")]
    NotValidated(String),
}

/// Decode a candidate report without consulting any program.
pub fn read_candidate(json: &str) -> Result<CandidateReport, ReportError> {
    let r: CandidateReport = serde_json::from_str(json).map_err(|e| ReportError::Malformed(e.to_string()))?;
    if r.recompute_id() != r.id {
        return Err(ReportError::Malformed(format!("id {} does not match content", r.id)));
    }
    if r.anchor_function().is_none() {
        return Err(ReportError::Malformed(format!("local path `{}` has no function", r.local_path)));
    }
    Ok(r)
}

/// Turn a garbage-read candidate into a stage-2 query against `program`.
/// The anchor function must still exist, still contain the reported
/// location, and the field must still be declared.
pub fn parse_candidate(json: &str, program: &IrProgram) -> Result<WpQuery, ReportError> {
    let r = read_candidate(json)?;
    query_for(&r, program)
}

pub fn query_for(r: &CandidateReport, program: &IrProgram) -> Result<WpQuery, ReportError> {
    let DeclRef::Member { .. } = &r.decl else {
        return Err(ReportError::NotValidated(r.id.clone()));
    };
    if r.cwe != "CWE457" {
        return Err(ReportError::NotValidated(r.id.clone()));
    }
    let field = r.decl.key();
    let anchor = r.anchor_function().unwrap_or_default();
    let f = program
        .function(anchor)
        .ok_or_else(|| ReportError::Stale(format!("function `{anchor}` not in program")))?;
    if !program.has_field(&field) {
        return Err(ReportError::Stale(format!("field `{field}` not in program")));
    }
    if f.file != r.loc.file || !f.contains(Pos { line: r.loc.line, col: r.loc.col }) {
        return Err(ReportError::Stale(format!("{}:{}:{} is outside `{anchor}`", r.loc.file, r.loc.line, r.loc.col)));
    }
    Ok(WpQuery { report_id: r.id.clone(), field, anchor_function: anchor.to_string(), anchor_loc: r.loc.clone() })
}

/// Render a function name the way the chain listing shows it: entry points
/// bare, everything else with `()`.
fn chain_name(f: &str, entries: &[String]) -> String {
    if entries.iter().any(|e| e == f) {
        f.to_string()
    } else {
        format!("{f}()")
    }
}

/// Whole-program report text. Chains are listed callee first.
pub fn render_wp_text(r: &WpReport, entries: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "---------- report-{} ---------", r.report_id);
    let _ = writeln!(out, "[+] Parsing bug report report-{}.json", r.report_id);
    let _ = writeln!(out, "[+] Query: loads of {} reached through {}", r.field, r.anchor_function);
    let _ = writeln!(out, "[+] Running garbage read validation against {}", entries.join(", "));
    out.push_str("---------------------------------------\n");
    match r.verdict {
        Verdict::FalsePositive => {
            match r.stats.note.as_deref() {
                Some("unreachable") => {
                    let _ = writeln!(out, "{} is unreachable from the entry points", r.anchor_function);
                }
                _ => out.push_str("All loads have a matching store\n"),
            }
            out.push_str("Verdict: false positive\n");
        }
        Verdict::Confirmed => {
            for chain in &r.chains {
                out.push_str("Candidate callchain is:\n\n");
                for f in chain.iter().rev() {
                    let _ = writeln!(out, "{}", chain_name(f, entries));
                }
                out.push_str("-----------------------\n");
            }
            out.push_str("Verdict: confirmed\n");
        }
    }
    if let Some(note) = r.stats.note.as_deref().filter(|n| *n != "unreachable") {
        let _ = writeln!(out, "Note: {note}");
    }
    out
}

/// Pretty JSON with exactly one trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

/// Write `report-<id>.json` and `report-<id>.txt`; returns the JSON path.
pub fn write_candidate(dir: &Path, r: &CandidateReport) -> io::Result<PathBuf> {
    let json = dir.join(format!("{}.json", r.file_stem()));
    std::fs::write(&json, to_json(r))?;
    std::fs::write(dir.join(format!("{}.txt", r.file_stem())), r.render_text())?;
    Ok(json)
}

/// Write `wp-report-<id>.json` and `wp-report-<id>.txt`.
pub fn write_wp(dir: &Path, r: &WpReport, entries: &[String]) -> io::Result<PathBuf> {
    let json = dir.join(format!("wp-report-{}.json", r.report_id));
    std::fs::write(&json, to_json(r))?;
    std::fs::write(dir.join(format!("wp-report-{}.txt", r.report_id)), render_wp_text(r, entries))?;
    Ok(json)
}
