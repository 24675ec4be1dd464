//! Log removal for leakage-safe feature extraction.
//!
//! Removed: every detected log statement, plus else-less guard `if`s on a
//! level check whose then-branch is left empty. Retained and counted as
//! residual: a statement whose own chain does not match but which passes a
//! logger call (receiver such as `LOG` or `mLogger`) as a value to another
//! call. Removal runs to a fixed point, so it is idempotent.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::logs::LogDetector;
use super::syntax::{all_nodes, is_comment, named_children, own_nodes};
use super::{parse_unit, JavaUnit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub logs_before: usize,
    pub logs_after: usize,
    pub guards_removed: usize,
}

impl RemovalReport {
    /// `logs_after / logs_before`, or 0 when there was nothing to remove.
    pub fn residual_ratio(&self) -> f64 {
        if self.logs_before == 0 {
            0.0
        } else {
            self.logs_after as f64 / self.logs_before as f64
        }
    }

    pub fn merge(&mut self, other: &RemovalReport) {
        self.logs_before += other.logs_before;
        self.logs_after += other.logs_after;
        self.guards_removed += other.guards_removed;
    }
}

/// Aggregate residual ratio over many per-unit reports.
pub fn removal_residual_ratio<'a>(reports: impl IntoIterator<Item = &'a RemovalReport>) -> f64 {
    let mut total = RemovalReport::default();
    for r in reports {
        total.merge(r);
    }
    total.residual_ratio()
}

/// Remove log statements and their guards from the whole unit.
pub fn remove_logs(unit: &JavaUnit, detector: &LogDetector) -> Result<(JavaUnit, RemovalReport)> {
    remove_logs_mapped(unit, detector).map(|(u, r, _)| (u, r))
}

/// Like [`remove_logs`], also returning for every byte offset of the
/// modified source (and its end) the offset it came from in `unit`.
pub fn remove_logs_mapped(
    unit: &JavaUnit,
    detector: &LogDetector,
) -> Result<(JavaUnit, RemovalReport, Vec<usize>)> {
    let logs_before = detector.detect_all(unit).len();
    let mut guards_removed = 0;
    let mut current = unit.clone();
    let mut origin: Vec<usize> = (0..=unit.source().len()).collect();
    // Each pass can only shrink the source, so this terminates; the bound
    // is a backstop against a planner bug.
    for _ in 0..64 {
        let plan = plan_edits(&current, detector);
        if plan.edits.is_empty() {
            let logs_after = detector.detect_all(&current).len();
            let report = RemovalReport {
                logs_before,
                logs_after,
                guards_removed,
            };
            return Ok((current, report, origin));
        }
        guards_removed += plan.guards;
        let (source, map) = apply_edits(current.source(), &plan.edits, &origin);
        origin = map;
        current = parse_unit(current.path().to_string(), source).map_err(|e| {
            Error::Internal(format!("log removal produced unparsable source: {e}"))
        })?;
    }
    Err(Error::Internal(format!(
        "log removal did not converge for {}",
        unit.path()
    )))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edit {
    start: usize,
    end: usize,
    replacement: &'static str,
}

struct Plan {
    edits: Vec<Edit>,
    guards: usize,
}

fn plan_edits(unit: &JavaUnit, detector: &LogDetector) -> Plan {
    let mut removed: HashSet<usize> = HashSet::new();
    let mut items: Vec<Node<'_>> = Vec::new();
    for stmt in detector.detect_all(unit) {
        if is_removable(unit, detector, stmt) {
            removed.insert(stmt.id());
            items.push(stmt);
        }
    }

    let mut guards = 0;
    let ifs: Vec<Node<'_>> = all_nodes(unit.root())
        .into_iter()
        .filter(|n| n.kind() == "if_statement")
        .collect();
    // reverse pre-order visits inner guards before the guards wrapping them
    for stmt in ifs.into_iter().rev() {
        if stmt.child_by_field_name("alternative").is_some() {
            continue;
        }
        let (Some(cond), Some(then)) = (
            stmt.child_by_field_name("condition"),
            stmt.child_by_field_name("consequence"),
        ) else {
            continue;
        };
        if !detector.is_guard_condition(unit.text(cond)) {
            continue;
        }
        if branch_empties(then, &removed) {
            removed.insert(stmt.id());
            items.push(stmt);
            guards += 1;
        }
    }

    items.sort_by_key(|n| (n.start_byte(), std::cmp::Reverse(n.end_byte())));
    let mut edits: Vec<Edit> = Vec::new();
    let mut covered_until = 0usize;
    for item in items {
        if item.start_byte() < covered_until {
            continue;
        }
        covered_until = item.end_byte();
        edits.push(edit_for(unit.source(), item));
    }
    Plan { edits, guards }
}

fn branch_empties(branch: Node<'_>, removed: &HashSet<usize>) -> bool {
    if branch.kind() == "block" {
        let stmts: Vec<Node<'_>> = named_children(branch)
            .into_iter()
            .filter(|n| !is_comment(*n))
            .collect();
        !stmts.is_empty() && stmts.iter().all(|s| removed.contains(&s.id()))
    } else {
        removed.contains(&branch.id())
    }
}

fn is_removable(unit: &JavaUnit, detector: &LogDetector, stmt: Node<'_>) -> bool {
    let Some(expr) = named_children(stmt).into_iter().next() else {
        return false;
    };
    let mut chain_ids = HashSet::new();
    let chain = chain_text(unit, expr, &mut chain_ids).to_lowercase();
    if detector.matches_lowercase(&chain) {
        return true;
    }
    // A logger call nested in the arguments is a log used as a value.
    !own_nodes(expr).into_iter().any(|n| {
        n.kind() == "method_invocation" && !chain_ids.contains(&n.id()) && has_logger_receiver(unit, n)
    })
}

/// True when the innermost receiver of an invocation chain is an identifier
/// whose last camel-case word is `log`, `logger` or `logging`
/// (`LOG`, `mLogger`, `FLog`, but not `dialog`).
fn has_logger_receiver(unit: &JavaUnit, call: Node<'_>) -> bool {
    let mut node = call;
    while let Some(obj) = node.child_by_field_name("object") {
        node = obj;
    }
    if node == call || node.kind() != "identifier" {
        return false;
    }
    let name = unit.text(node);
    let last = if name.chars().all(|c| !c.is_lowercase()) {
        name.rsplit('_').next().unwrap_or(name)
    } else {
        let start = name
            .char_indices()
            .filter(|(_, c)| c.is_uppercase())
            .map(|(i, _)| i)
            .last()
            .unwrap_or(0);
        &name[start..]
    };
    matches!(last.to_lowercase().as_str(), "log" | "logger" | "logging")
}

/// Receiver chain of an invocation without argument lists:
/// `LOG.atWarn().log(x)` -> `LOG.atWarn.log`.
fn chain_text(unit: &JavaUnit, node: Node<'_>, ids: &mut HashSet<usize>) -> String {
    match node.kind() {
        "method_invocation" => {
            ids.insert(node.id());
            let name = node
                .child_by_field_name("name")
                .map(|n| unit.text(n))
                .unwrap_or("");
            match node.child_by_field_name("object") {
                Some(obj) => format!("{}.{}", chain_text(unit, obj, ids), name),
                None => name.to_string(),
            }
        }
        "field_access" => {
            let field = node
                .child_by_field_name("field")
                .map(|n| unit.text(n))
                .unwrap_or("");
            match node.child_by_field_name("object") {
                Some(obj) => format!("{}.{}", chain_text(unit, obj, ids), field),
                None => field.to_string(),
            }
        }
        "identifier" | "this" | "super" | "scoped_identifier" | "type_identifier" => {
            unit.text(node).to_string()
        }
        "object_creation_expression" => node
            .child_by_field_name("type")
            .map(|t| unit.text(t).to_string())
            .unwrap_or_default(),
        _ => String::new(),
    }
}

fn edit_for(source: &str, node: Node<'_>) -> Edit {
    let parent = node.parent().map(|p| p.kind()).unwrap_or("program");
    match parent {
        "block" | "constructor_body" | "switch_block_statement_group" | "program" => {
            let (start, end) = line_extent(source, node.start_byte(), node.end_byte());
            Edit {
                start,
                end,
                replacement: "",
            }
        }
        // a statement slot that must stay occupied
        "switch_rule" => Edit {
            start: node.start_byte(),
            end: node.end_byte(),
            replacement: "{}",
        },
        _ => Edit {
            start: node.start_byte(),
            end: node.end_byte(),
            replacement: ";",
        },
    }
}

/// Widen a deletion to whole lines when nothing else shares them.
fn line_extent(source: &str, start: usize, end: usize) -> (usize, usize) {
    let bytes = source.as_bytes();
    let line_start = source[..start].rfind('\n').map(|i| i + 1).unwrap_or(0);
    let line_end = source[end..].find('\n').map(|i| end + i).unwrap_or(source.len());
    let blank = |s: &[u8]| s.iter().all(|b| b.is_ascii_whitespace());
    if blank(&bytes[line_start..start]) && blank(&bytes[end..line_end]) {
        let stop = if line_end < source.len() { line_end + 1 } else { line_end };
        (line_start, stop)
    } else {
        (start, end)
    }
}

fn apply_edits(source: &str, edits: &[Edit], origin: &[usize]) -> (String, Vec<usize>) {
    let mut sorted = edits.to_vec();
    sorted.sort_by_key(|e| e.start);
    let mut out = String::with_capacity(source.len());
    let mut map = Vec::with_capacity(origin.len());
    let mut cursor = 0;
    for e in sorted {
        let start = e.start.max(cursor);
        out.push_str(&source[cursor..start]);
        map.extend_from_slice(&origin[cursor..start]);
        out.push_str(e.replacement);
        map.extend(std::iter::repeat_n(origin[start], e.replacement.len()));
        cursor = e.end.max(cursor);
    }
    out.push_str(&source[cursor..]);
    map.extend_from_slice(&origin[cursor..]);
    (out, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(src: &str) -> (String, RemovalReport) {
        let unit = parse_unit("A.java", src).unwrap();
        let (out, report) = remove_logs(&unit, &LogDetector::default()).unwrap();
        (out.source().to_string(), report)
    }

    #[test]
    fn plain_statement_is_deleted() {
        let (src, r) = run("class A { void m() { LOG.info(\"x\"); work(); } }");
        assert_eq!(src, "class A { void m() {  work(); } }");
        assert_eq!((r.logs_before, r.logs_after, r.guards_removed), (1, 0, 0));
    }

    #[test]
    fn guard_is_removed_with_its_log() {
        let src = "class A {\n  void m(String s) {\n    if (LOG.isDebugEnabled()) {\n      LOG.debug(s);\n    }\n    work();\n  }\n}\n";
        let (out, r) = run(src);
        assert_eq!(out, "class A {\n  void m(String s) {\n    work();\n  }\n}\n");
        assert_eq!(r.guards_removed, 1);
        assert_eq!(r.logs_after, 0);
    }

    #[test]
    fn guard_with_else_is_kept() {
        let src = "class A { void m() { if (LOG.isDebugEnabled()) { LOG.debug(\"a\"); } else { work(); } } }";
        let (out, r) = run(src);
        assert!(out.contains("if (LOG.isDebugEnabled())"));
        assert!(out.contains("work();"));
        assert_eq!(r.guards_removed, 0);
    }

    #[test]
    fn business_if_is_kept_even_when_emptied() {
        let src = "class A { void m(int x) { if (x > 0) { LOG.info(\"pos\"); } } }";
        let (out, r) = run(src);
        assert!(out.contains("if (x > 0)"));
        assert_eq!(r.guards_removed, 0);
    }

    #[test]
    fn unbraced_branch_keeps_statement_slot() {
        let (out, _) = run("class A { void m(int x) { if (x > 0) LOG.info(\"pos\"); work(); } }");
        assert_eq!(out, "class A { void m(int x) { if (x > 0) ; work(); } }");
    }

    #[test]
    fn embedded_log_is_residual() {
        let (out, r) = run("class A { void m() { process(LOG.info(\"x\")); } }");
        assert!(out.contains("process(LOG.info"));
        assert_eq!((r.logs_before, r.logs_after), (1, 1));
        assert_eq!(r.residual_ratio(), 1.0);
    }

    #[test]
    fn printed_error_message_is_removed() {
        let (_, r) = run("class A { void m() { System.err.println(\"error: bad\"); } }");
        assert_eq!((r.logs_before, r.logs_after), (1, 0));
    }

    #[test]
    fn lambda_block_logs_go_and_the_call_stays() {
        let (out, r) = run("class A { void m() { items.forEach(x -> { LOG.info(x); }); } }");
        assert!(out.contains("items.forEach"));
        assert!(!out.contains("LOG"));
        assert_eq!((r.logs_before, r.logs_after), (2, 0));
    }

    #[test]
    fn over_matched_statement_goes_with_its_anonymous_class() {
        let src = "class A { void m() { dlg.setButton(new AlertDialog.OnClickListener() { public void onClick(int w) { dialog.cancel(); } }); show(); } }";
        let (out, r) = run(src);
        assert_eq!(out, "class A { void m() {  show(); } }");
        assert_eq!((r.logs_before, r.logs_after), (2, 0));
    }

    #[test]
    fn over_matched_call_with_matching_argument_is_deleted() {
        let (out, r) = run("class A { void m() { obj.put(\"url\", error.getUrl()); keep(); } }");
        assert_eq!(out, "class A { void m() {  keep(); } }");
        assert_eq!((r.logs_before, r.logs_after), (1, 0));
    }

    #[test]
    fn logger_receivers() {
        let src = "class A { void m() { f(LOG.x(), mLogger.y(), FLog.z(), dialog.w(), Logs.v(), LOG_TAG.u()); } }";
        let unit = parse_unit("A.java", src).unwrap();
        let calls: Vec<bool> = all_nodes(unit.root())
            .into_iter()
            .filter(|n| n.kind() == "method_invocation" && n.child_by_field_name("object").is_some())
            .map(|n| has_logger_receiver(&unit, n))
            .collect();
        assert_eq!(calls, vec![true, true, true, false, false, false]);
    }

    #[test]
    fn offsets_map_back_to_the_original() {
        let src = "class A {\n  void m() {\n    LOG.info(\"x\");\n    if (a) LOG.warn(\"y\");\n    work();\n  }\n}\n";
        let unit = parse_unit("A.java", src).unwrap();
        let (out, _, origin) = remove_logs_mapped(&unit, &LogDetector::default()).unwrap();
        assert_eq!(origin.len(), out.source().len() + 1);
        let at = out.source().find("work").unwrap();
        assert_eq!(origin[at], src.find("work").unwrap());
        let semi = out.source().find("(a) ;").unwrap() + 4;
        assert_eq!(origin[semi], src.find("LOG.warn").unwrap());
        assert_eq!(origin[out.source().len()], src.len());
    }

    #[test]
    fn removal_is_idempotent() {
        let src = "class A { void m() { run(x -> { LOG.info(\"e\"); }, \"error\"); if (log.isTraceEnabled()) { if (log.isDebugEnabled()) { log.debug(\"d\"); } } keep(LOG.x()); } }";
        let unit = parse_unit("A.java", src).unwrap();
        let d = LogDetector::default();
        let (once, r1) = remove_logs(&unit, &d).unwrap();
        let (twice, r2) = remove_logs(&once, &d).unwrap();
        assert_eq!(once.source(), twice.source());
        assert_eq!(r1.logs_after, r2.logs_after);
        assert_eq!(r2.logs_before, r2.logs_after);
        assert_eq!(r1.guards_removed, 2);
    }

    #[test]
    fn residual_ratio_of_zero_logs_is_zero() {
        assert_eq!(RemovalReport::default().residual_ratio(), 0.0);
    }
}
