//! Java source analysis on top of tree-sitter.
//!
//! A [`JavaUnit`] owns one parsed compilation unit. [`structure`] enumerates
//! its types and methods, [`logs`] finds log statements and their enclosing
//! context, and [`removal`] produces a log-free copy of the unit for metric
//! extraction.

pub mod logs;
pub mod removal;
pub mod structure;
pub mod syntax;

use tree_sitter::{Node, Parser, Tree};

use crate::error::{Error, Result};

pub use logs::{LogContext, LogDetector, LogStatement};
pub use removal::{remove_logs, remove_logs_mapped, removal_residual_ratio, RemovalReport};
pub use structure::{ClassKind, MethodDecl, MethodId, MethodRecord, TypeDecl, UnitStructure};

/// A parsed Java compilation unit.
pub struct JavaUnit {
    path: String,
    source: String,
    tree: Tree,
}

impl Clone for JavaUnit {
    fn clone(&self) -> Self {
        JavaUnit {
            path: self.path.clone(),
            source: self.source.clone(),
            tree: self.tree.clone(),
        }
    }
}

impl std::fmt::Debug for JavaUnit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JavaUnit")
            .field("path", &self.path)
            .field("bytes", &self.source.len())
            .finish()
    }
}

/// Parse `source` as a Java compilation unit.
///
/// Units containing syntax errors are rejected so a corpus run can skip them
/// with a warning instead of extracting metrics from a recovered tree.
pub fn parse_unit(path: impl Into<String>, source: impl Into<String>) -> Result<JavaUnit> {
    let path = path.into();
    let source = source.into();
    let mut parser = Parser::new();
    parser
        .set_language(&tree_sitter_java::LANGUAGE.into())
        .map_err(|e| Error::Internal(format!("loading Java grammar: {e}")))?;
    let tree = parser.parse(&source, None).ok_or_else(|| Error::Parse {
        path: path.clone(),
        message: "parser returned no tree".into(),
    })?;
    let root = tree.root_node();
    if root.has_error() {
        let at = first_error(root)
            .map(|n| format!("syntax error at line {}", n.start_position().row + 1))
            .unwrap_or_else(|| "syntax error".into());
        return Err(Error::Parse { path, message: at });
    }
    Ok(JavaUnit { path, source, tree })
}

fn first_error(node: Node<'_>) -> Option<Node<'_>> {
    if node.is_error() || node.is_missing() {
        return Some(node);
    }
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        if child.has_error() {
            return first_error(child).or(Some(child));
        }
    }
    None
}

impl JavaUnit {
    pub fn path(&self) -> &str {
        &self.path
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> Node<'_> {
        self.tree.root_node()
    }

    pub fn text(&self, node: Node<'_>) -> &str {
        &self.source[node.byte_range()]
    }

    /// Enumerate package, imports, type declarations, and methods.
    pub fn structure(&self) -> UnitStructure<'_> {
        structure::enumerate(self)
    }
}
