use std::collections::BTreeSet;

use tree_sitter::Node;

use crate::java::syntax::{
    erase_type, is_anonymous_body, is_type_declaration, named_children, opens_nested_type,
    own_nodes,
};
use crate::java::{JavaUnit, UnitStructure};

pub type FieldUse = BTreeSet<String>;

const JAVA_LANG: &[&str] = &[
    "Object", "String", "StringBuilder", "StringBuffer", "Integer", "Long", "Short", "Byte",
    "Character", "Boolean", "Double", "Float", "Number", "Math", "StrictMath", "System",
    "Thread", "Runnable", "Exception", "RuntimeException", "Error", "Throwable", "Class",
    "Enum", "Iterable", "Comparable", "CharSequence", "Void", "Override", "Deprecated",
    "SuppressWarnings", "FunctionalInterface", "SafeVarargs", "AutoCloseable", "Cloneable",
    "Record", "Process", "ProcessBuilder", "Runtime", "ClassLoader", "ThreadLocal",
    "InterruptedException", "IllegalArgumentException", "IllegalStateException",
    "NullPointerException", "IndexOutOfBoundsException", "ArrayIndexOutOfBoundsException",
    "UnsupportedOperationException", "ClassCastException", "NumberFormatException",
    "ArithmeticException", "CloneNotSupportedException", "ClassNotFoundException",
    "SecurityException", "OutOfMemoryError", "StackOverflowError", "AssertionError",
    "ReflectiveOperationException", "NoSuchMethodException", "NoSuchFieldException",
    "IllegalAccessException", "InstantiationException", "StringIndexOutOfBoundsException",
];

const NUMBER_KINDS: &[&str] = &[
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "hex_floating_point_literal",
];

fn is_java_lang(name: &str) -> bool {
    JAVA_LANG.contains(&name)
}

/// Type-ish spelling: leading uppercase letter and at least one lowercase one.
fn looks_like_type(name: &str) -> bool {
    name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
        && name.chars().any(|c| c.is_ascii_lowercase())
}

/// Drop a leading package path: `java.util.Map.Entry` -> `Map.Entry`.
fn strip_package(name: &str) -> String {
    let segments: Vec<&str> = name.split('.').collect();
    let first_type = segments
        .iter()
        .position(|s| s.chars().next().is_some_and(|c| c.is_ascii_uppercase()))
        .unwrap_or(segments.len().saturating_sub(1));
    segments[first_type..].join(".")
}

/// Split an identifier into lowercase words on `_`, `$`, digits-to-letters
/// and camelCase boundaries (`parseHTTPHeader2` -> parse, http, header2).
pub fn split_words(ident: &str) -> Vec<String> {
    let chars: Vec<char> = ident.chars().collect();
    let mut words = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c == '_' || c == '$' {
            if !current.is_empty() {
                words.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower)
            {
                words.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        words.push(current);
    }
    words
}

/// Unit-wide name facts used to tell types from variables.
pub struct ScopeFacts {
    declared_types: BTreeSet<String>,
    imported_types: BTreeSet<String>,
    static_imports: BTreeSet<String>,
    variable_names: BTreeSet<String>,
    type_params: BTreeSet<String>,
}

impl ScopeFacts {
    pub fn new(unit: &JavaUnit, structure: &UnitStructure<'_>, nodes: &[Node<'_>]) -> Self {
        let mut variable_names = BTreeSet::new();
        let mut type_params = BTreeSet::new();
        for n in nodes {
            match n.kind() {
                "variable_declarator" | "formal_parameter" | "catch_formal_parameter"
                | "enhanced_for_statement" | "resource" => {
                    if let Some(name) = n.child_by_field_name("name") {
                        variable_names.insert(unit.text(name).to_string());
                    }
                }
                "inferred_parameters" => {
                    for c in named_children(*n) {
                        variable_names.insert(unit.text(c).to_string());
                    }
                }
                "lambda_expression" => {
                    if let Some(p) = n.child_by_field_name("parameters") {
                        if p.kind() == "identifier" {
                            variable_names.insert(unit.text(p).to_string());
                        }
                    }
                }
                "type_parameter" => {
                    if let Some(id) = named_children(*n)
                        .into_iter()
                        .find(|c| c.kind() == "type_identifier")
                    {
                        type_params.insert(unit.text(id).to_string());
                    }
                }
                _ => {}
            }
        }
        ScopeFacts {
            declared_types: structure.declared_type_names(),
            imported_types: structure.imports.types.clone(),
            static_imports: structure.imports.static_members.clone(),
            variable_names,
            type_params,
        }
    }

    fn is_type_name(&self, name: &str) -> bool {
        if self.declared_types.contains(name)
            || self.imported_types.contains(name)
            || is_java_lang(name)
        {
            return true;
        }
        looks_like_type(name) && !self.variable_names.contains(name)
    }

    /// Number of distinct coupled types among `refs`.
    pub fn coupled_types(&self, refs: &BTreeSet<String>, own_name: &str) -> u64 {
        refs.iter()
            .filter(|r| {
                let r = r.as_str();
                !is_java_lang(r) && r != own_name && r != "var" && !self.type_params.contains(r)
            })
            .count() as u64
    }
}

/// Raw counts gathered over the own nodes of a method or type.
#[derive(Debug, Default)]
pub struct Tally {
    pub decisions: u64,
    pub invoked: BTreeSet<(String, usize)>,
    pub invocations: u64,
    pub unqualified_calls: BTreeSet<String>,
    pub static_invocations: u64,
    pub type_refs: BTreeSet<String>,
    pub variables: u64,
    pub returns: u64,
    pub loops: u64,
    pub comparisons: u64,
    pub math: u64,
    pub numbers: u64,
    pub strings: u64,
    pub parens: u64,
    pub lambdas: u64,
    pub anonymous: u64,
    pub inner: u64,
    pub assignments: u64,
    pub words: BTreeSet<String>,
    pub fields_used: FieldUse,
}

impl Tally {
    pub fn collect(
        unit: &JavaUnit,
        scope: Node<'_>,
        facts: &ScopeFacts,
        static_methods: &BTreeSet<String>,
        field_names: &BTreeSet<String>,
    ) -> Tally {
        let nodes = own_nodes(scope);
        let mut t = Tally::default();

        let mut locals = BTreeSet::new();
        for n in &nodes {
            let declared = match n.kind() {
                "variable_declarator" => n
                    .parent()
                    .filter(|p| p.kind() == "local_variable_declaration")
                    .and_then(|_| n.child_by_field_name("name")),
                "formal_parameter" | "catch_formal_parameter" | "enhanced_for_statement"
                | "resource" => n.child_by_field_name("name"),
                _ => None,
            };
            if let Some(name) = declared {
                locals.insert(unit.text(name).to_string());
            }
            if n.kind() == "inferred_parameters" {
                for c in named_children(*n) {
                    locals.insert(unit.text(c).to_string());
                }
            }
            if n.kind() == "lambda_expression" {
                if let Some(p) = n.child_by_field_name("parameters") {
                    if p.kind() == "identifier" {
                        locals.insert(unit.text(p).to_string());
                    }
                }
            }
        }

        for &n in &nodes {
            if n != scope && opens_nested_type(n) {
                if is_anonymous_body(n) {
                    t.anonymous += 1;
                } else if is_type_declaration(n.kind()) {
                    t.inner += 1;
                }
                continue;
            }
            match n.kind() {
                "if_statement" | "catch_clause" | "ternary_expression" => t.decisions += 1,
                "enhanced_for_statement" => {
                    t.decisions += 1;
                    t.loops += 1;
                    t.variables += 1;
                }
                "while_statement" | "for_statement" | "do_statement" => {
                    t.decisions += 1;
                    t.loops += 1;
                }
                "switch_label" => {
                    if unit.text(n).trim_start().starts_with("case") {
                        t.decisions += 1;
                    }
                }
                "binary_expression" => {
                    let op = n.child_by_field_name("operator").map(|o| o.kind());
                    match op {
                        Some("&&" | "||") => t.decisions += 1,
                        Some("==" | "!=" | "<" | ">" | "<=" | ">=") => t.comparisons += 1,
                        Some("+" | "-" | "*" | "/" | "%") => t.math += 1,
                        _ => {}
                    }
                }
                "return_statement" => t.returns += 1,
                "string_literal" => t.strings += 1,
                "lambda_expression" => t.lambdas += 1,
                "assignment_expression" => t.assignments += 1,
                "parenthesized_expression" => {
                    let is_condition = n.parent().is_some_and(|p| match p.kind() {
                        "if_statement" | "while_statement" | "do_statement" => {
                            p.child_by_field_name("condition") == Some(n)
                        }
                        "switch_expression" | "synchronized_statement" => true,
                        _ => false,
                    });
                    if !is_condition {
                        t.parens += 1;
                    }
                }
                "variable_declarator" => {
                    if n.child_by_field_name("value").is_some() {
                        t.assignments += 1;
                    }
                    if n
                        .parent()
                        .is_some_and(|p| p.kind() == "local_variable_declaration")
                    {
                        t.variables += 1;
                    }
                }
                "resource" => {
                    if n.child_by_field_name("name").is_some() {
                        t.variables += 1;
                    }
                }
                "method_invocation" => t.invocation(unit, n, facts, static_methods),
                "type_identifier" => {
                    if n.parent().is_some_and(|p| p.kind() != "scoped_type_identifier") {
                        t.type_refs.insert(unit.text(n).to_string());
                    }
                }
                "scoped_type_identifier" => {
                    if n.parent().is_some_and(|p| p.kind() != "scoped_type_identifier") {
                        t.type_refs
                            .insert(strip_package(&erase_type(unit.text(n))));
                    }
                }
                "identifier" => {
                    if let Some(field) = field_reference(unit, n, field_names, &locals) {
                        t.fields_used.insert(field);
                    }
                }
                k if NUMBER_KINDS.contains(&k) => t.numbers += 1,
                _ => {}
            }
            if matches!(n.kind(), "identifier" | "type_identifier") {
                for w in split_words(unit.text(n)) {
                    t.words.insert(w);
                }
            }
        }
        t
    }

    fn invocation(
        &mut self,
        unit: &JavaUnit,
        n: Node<'_>,
        facts: &ScopeFacts,
        static_methods: &BTreeSet<String>,
    ) {
        self.invocations += 1;
        let Some(name) = n.child_by_field_name("name") else {
            return;
        };
        let name = unit.text(name).to_string();
        let argc = n
            .child_by_field_name("arguments")
            .map(|a| {
                named_children(a)
                    .into_iter()
                    .filter(|c| !crate::java::syntax::is_comment(*c))
                    .count()
            })
            .unwrap_or(0);
        self.invoked.insert((name.clone(), argc));

        match n.child_by_field_name("object") {
            None => {
                if static_methods.contains(&name) || facts.static_imports.contains(&name) {
                    self.static_invocations += 1;
                }
                self.unqualified_calls.insert(name);
            }
            Some(obj) if obj.kind() == "this" => {
                self.unqualified_calls.insert(name);
            }
            Some(obj) => {
                let text = unit.text(obj);
                let qualifier = match obj.kind() {
                    "identifier" if facts.is_type_name(text) => Some(text.to_string()),
                    "field_access" | "scoped_identifier" => qualified_type(text),
                    _ => None,
                };
                if let Some(q) = qualifier {
                    self.static_invocations += 1;
                    self.type_refs.insert(q);
                }
            }
        }
    }
}

/// `a.b.Type` used as a call qualifier yields `Type`.
fn qualified_type(text: &str) -> Option<String> {
    if text.contains(['(', ' ', '\n']) {
        return None;
    }
    let segments: Vec<&str> = text.split('.').collect();
    let (last, prefix) = segments.split_last()?;
    let package_like = prefix
        .iter()
        .all(|s| s.chars().next().is_some_and(|c| c.is_ascii_lowercase()));
    (package_like && looks_like_type(last)).then(|| last.to_string())
}

fn field_reference(
    unit: &JavaUnit,
    n: Node<'_>,
    field_names: &BTreeSet<String>,
    locals: &BTreeSet<String>,
) -> Option<String> {
    let text = unit.text(n);
    if !field_names.contains(text) {
        return None;
    }
    let parent = n.parent()?;
    match parent.kind() {
        "field_access" => {
            if parent.child_by_field_name("field") == Some(n) {
                let obj = parent.child_by_field_name("object")?;
                return (obj.kind() == "this").then(|| text.to_string());
            }
        }
        "method_invocation" => {
            if parent.child_by_field_name("name") == Some(n) {
                return None;
            }
        }
        "variable_declarator" | "formal_parameter" | "catch_formal_parameter"
        | "enhanced_for_statement" | "resource" | "method_declaration"
        | "constructor_declaration" | "inferred_parameters" | "lambda_expression"
        | "labeled_statement" | "break_statement" | "continue_statement" => {
            if parent.child_by_field_name("name") == Some(n)
                || matches!(
                    parent.kind(),
                    "inferred_parameters"
                        | "lambda_expression"
                        | "labeled_statement"
                        | "break_statement"
                        | "continue_statement"
                )
            {
                return None;
            }
        }
        _ => {}
    }
    (!locals.contains(text)).then(|| text.to_string())
}

/// Deepest nesting of blocks below `body`, which itself is level 0.
pub fn max_block_depth(body: Node<'_>) -> u64 {
    fn walk(node: Node<'_>, depth: u64) -> u64 {
        let mut best = depth;
        let mut cursor = node.walk();
        for child in node.children(&mut cursor) {
            if opens_nested_type(child) {
                continue;
            }
            let d = if matches!(child.kind(), "block" | "switch_block") {
                depth + 1
            } else {
                depth
            };
            best = best.max(walk(child, d));
        }
        best
    }
    walk(body, 0)
}
