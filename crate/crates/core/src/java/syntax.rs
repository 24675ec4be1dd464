//! Small tree-sitter helpers shared by the analysis and metric passes.

use tree_sitter::Node;

pub fn is_type_declaration(kind: &str) -> bool {
    matches!(
        kind,
        "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "record_declaration"
            | "annotation_type_declaration"
    )
}

/// True for a `class_body` that defines an anonymous class.
pub fn is_anonymous_body(node: Node<'_>) -> bool {
    node.kind() == "class_body"
        && node
            .parent()
            .map(|p| matches!(p.kind(), "object_creation_expression" | "enum_constant"))
            .unwrap_or(false)
}

/// True when `node` opens a scope owned by a nested type.
pub fn opens_nested_type(node: Node<'_>) -> bool {
    is_type_declaration(node.kind()) || is_anonymous_body(node)
}

pub fn named_children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).collect()
}

pub fn children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.children(&mut cursor).collect()
}

pub fn is_comment(node: Node<'_>) -> bool {
    matches!(node.kind(), "line_comment" | "block_comment")
}

/// Pre-order traversal of `root` and every descendant that belongs to the
/// same type scope. Nested type declarations and anonymous class bodies are
/// visited themselves but never entered.
pub fn own_nodes(root: Node<'_>) -> Vec<Node<'_>> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        out.push(node);
        if node != root && opens_nested_type(node) {
            continue;
        }
        let kids = children(node);
        stack.extend(kids.into_iter().rev());
    }
    out
}

/// Every descendant of `root` in pre-order, crossing type boundaries.
pub fn all_nodes(root: Node<'_>) -> Vec<Node<'_>> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        out.push(node);
        let kids = children(node);
        stack.extend(kids.into_iter().rev());
    }
    out
}

/// Modifier keywords attached to a declaration.
pub fn modifier_keywords(decl: Node<'_>) -> Vec<&'static str> {
    const KEYWORDS: [&str; 10] = [
        "public",
        "private",
        "protected",
        "static",
        "final",
        "abstract",
        "synchronized",
        "default",
        "native",
        "transient",
    ];
    let mut out = Vec::new();
    for child in children(decl) {
        if child.kind() == "modifiers" {
            for m in children(child) {
                if let Some(k) = KEYWORDS.iter().find(|k| **k == m.kind()) {
                    out.push(*k);
                }
            }
        }
    }
    out
}

/// Remove generic arguments and whitespace from a type as written.
pub fn erase_type(text: &str) -> String {
    let mut depth = 0usize;
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '<' => depth += 1,
            '>' => depth = depth.saturating_sub(1),
            c if depth == 0 && !c.is_whitespace() => out.push(c),
            _ => {}
        }
    }
    out
}

/// Last dotted segment of an erased type name (`a.b.Map.Entry` -> `Entry`).
pub fn simple_type_name(text: &str) -> String {
    let erased = erase_type(text);
    let base = erased.trim_end_matches("[]").trim_end_matches("...");
    base.rsplit('.').next().unwrap_or(base).to_string()
}
