//! Lexical log-statement detection.
//!
//! A log statement is an expression statement whose expression is a method
//! invocation and whose lowercased text matches `.*log(ger)?.*` or
//! `.*(error|warn|info|debug).*`. Multi-line statements and fluent chains are
//! covered because the whole statement text is matched at once.

use regex::Regex;
use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::syntax::{named_children, opens_nested_type, own_nodes};
use super::JavaUnit;

/// Direct enclosing construct of a log statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogContext {
    IfElse,
    CatchClause,
    MethodDeclaration,
    TryStatement,
    LoopStatement,
    Other,
}

impl LogContext {
    pub const ALL: [LogContext; 6] = [
        LogContext::IfElse,
        LogContext::CatchClause,
        LogContext::MethodDeclaration,
        LogContext::TryStatement,
        LogContext::LoopStatement,
        LogContext::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LogContext::IfElse => "if_else",
            LogContext::CatchClause => "catch_clause",
            LogContext::MethodDeclaration => "method_declaration",
            LogContext::TryStatement => "try_statement",
            LogContext::LoopStatement => "loop_statement",
            LogContext::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogStatement {
    pub start_byte: usize,
    pub end_byte: usize,
    /// 1-based line numbers.
    pub start_line: usize,
    pub end_line: usize,
    pub context: LogContext,
}

/// Matches log-call text and level-check guard conditions.
#[derive(Debug, Clone)]
pub struct LogDetector {
    strict: bool,
    log_name: Regex,
    log_level: Regex,
    guard: Regex,
}

impl Default for LogDetector {
    fn default() -> Self {
        Self::new(false)
    }
}

impl LogDetector {
    /// `strict` anchors the patterns on word boundaries so identifiers such
    /// as `dialog` no longer match.
    pub fn new(strict: bool) -> Self {
        let (name, level, guard) = if strict {
            (
                r"\blog(ger)?\b",
                r"\b(error|warn|info|debug)\b",
                r"\blog(ger)?\b|\b(is)?(trace|debug|info|warn|error)enabled\b",
            )
        } else {
            (
                r"log(ger)?",
                r"(error|warn|info|debug)",
                r"log(ger)?|(is)?(trace|debug|info|warn|error).*enabled",
            )
        };
        LogDetector {
            strict,
            log_name: Regex::new(name).expect("valid regex"),
            log_level: Regex::new(level).expect("valid regex"),
            guard: Regex::new(guard).expect("valid regex"),
        }
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Pattern test on already lowercased text.
    pub fn matches_lowercase(&self, text: &str) -> bool {
        self.log_name.is_match(text) || self.log_level.is_match(text)
    }

    pub fn matches(&self, text: &str) -> bool {
        self.matches_lowercase(&text.to_lowercase())
    }

    pub fn is_guard_condition(&self, text: &str) -> bool {
        self.guard.is_match(&text.to_lowercase())
    }

    /// True when `node` is an expression statement wrapping a method
    /// invocation whose text matches a log pattern.
    pub fn is_log_statement(&self, unit: &JavaUnit, node: Node<'_>) -> bool {
        if node.kind() != "expression_statement" {
            return false;
        }
        match named_children(node).first() {
            Some(expr) if expr.kind() == "method_invocation" => {
                self.matches(&own_text(unit, *expr))
            }
            _ => false,
        }
    }

    /// Log statements owned by `scope` (a method, initializer, or whole
    /// unit), excluding statements inside nested type declarations.
    pub fn detect_in<'t>(&self, unit: &'t JavaUnit, scope: Node<'t>) -> Vec<Node<'t>> {
        own_nodes(scope)
            .into_iter()
            .filter(|n| self.is_log_statement(unit, *n))
            .collect()
    }

    /// Every log statement of the unit, across all types.
    pub fn detect_all<'t>(&self, unit: &'t JavaUnit) -> Vec<Node<'t>> {
        super::syntax::all_nodes(unit.root())
            .into_iter()
            .filter(|n| self.is_log_statement(unit, *n))
            .collect()
    }

    /// Detect and classify the log statements of one method.
    pub fn detect_log_statements(&self, unit: &JavaUnit, method: Node<'_>) -> Vec<LogStatement> {
        match method.child_by_field_name("body") {
            Some(body) => self
                .detect_in(unit, body)
                .into_iter()
                .map(|n| LogStatement {
                    start_byte: n.start_byte(),
                    end_byte: n.end_byte(),
                    start_line: n.start_position().row + 1,
                    end_line: n.end_position().row + 1,
                    context: classify_enclosing_context(n),
                })
                .collect(),
            None => Vec::new(),
        }
    }
}

/// Source text of `node` with nested type bodies cut out, so a call that
/// merely passes an anonymous class containing a log is not itself a log.
pub fn own_text(unit: &JavaUnit, node: Node<'_>) -> String {
    let mut out = String::new();
    let mut cursor = node.start_byte();
    let mut stack = vec![node];
    let mut holes = Vec::new();
    while let Some(n) = stack.pop() {
        if n != node && opens_nested_type(n) {
            holes.push(n.byte_range());
            continue;
        }
        stack.extend(super::syntax::children(n));
    }
    holes.sort_by_key(|r| r.start);
    let src = unit.source();
    for hole in holes {
        out.push_str(&src[cursor..hole.start]);
        cursor = hole.end;
    }
    out.push_str(&src[cursor..node.end_byte()]);
    out
}

/// Innermost enclosing construct of a statement.
pub fn classify_enclosing_context(statement: Node<'_>) -> LogContext {
    let mut child = statement;
    while let Some(parent) = child.parent() {
        match parent.kind() {
            "if_statement" => return LogContext::IfElse,
            "catch_clause" => return LogContext::CatchClause,
            "try_statement" | "try_with_resources_statement" | "finally_clause" => {
                return LogContext::TryStatement
            }
            "for_statement" | "enhanced_for_statement" | "while_statement" | "do_statement" => {
                return LogContext::LoopStatement
            }
            "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
                return LogContext::MethodDeclaration
            }
            "constructor_body" => {
                if parent
                    .parent()
                    .map(|g| g.kind() == "constructor_declaration")
                    .unwrap_or(false)
                {
                    return LogContext::MethodDeclaration;
                }
                return LogContext::Other;
            }
            "block" | "labeled_statement" => child = parent,
            _ => return LogContext::Other,
        }
    }
    LogContext::Other
}
