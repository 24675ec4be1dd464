use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::logs::LogStatement;
use super::syntax::{children, erase_type, is_type_declaration, named_children, simple_type_name};
use super::JavaUnit;

/// Kind of a type declaration as used by the `classType` feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Class,
    InnerClass,
    Interface,
    EnumType,
    Anonymous,
}

impl ClassKind {
    pub const ALL: [ClassKind; 5] = [
        ClassKind::Class,
        ClassKind::InnerClass,
        ClassKind::Interface,
        ClassKind::EnumType,
        ClassKind::Anonymous,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Identity triple used to index labels and features.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodId {
    pub file_path: String,
    pub class_fqn: String,
    pub signature: String,
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}::{}", self.file_path, self.class_fqn, self.signature)
    }
}

/// One method of the corpus with its label and detected log statements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub id: MethodId,
    pub is_constructor: bool,
    pub label: bool,
    pub log_statements: Vec<LogStatement>,
}

#[derive(Debug, Clone)]
pub struct TypeDecl<'t> {
    /// Declaration node, or the `class_body` of an anonymous class.
    pub node: Node<'t>,
    pub body: Option<Node<'t>>,
    pub kind: ClassKind,
    pub fqn: String,
    pub simple_name: String,
    pub parent: Option<usize>,
    /// Simple name of the extended class (anonymous: the instantiated type).
    pub superclass: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MethodDecl<'t> {
    pub node: Node<'t>,
    pub body: Option<Node<'t>>,
    pub type_index: usize,
    pub name: String,
    pub signature: String,
    pub is_constructor: bool,
}

#[derive(Debug, Clone, Default)]
pub struct Imports {
    /// Simple names of single-type imports.
    pub types: BTreeSet<String>,
    /// Member names brought in by `import static a.B.m;`.
    pub static_members: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct UnitStructure<'t> {
    pub package: String,
    pub imports: Imports,
    pub types: Vec<TypeDecl<'t>>,
    pub methods: Vec<MethodDecl<'t>>,
}

impl<'t> UnitStructure<'t> {
    pub fn method_id(&self, unit_path: &str, method: &MethodDecl<'t>) -> MethodId {
        MethodId {
            file_path: unit_path.to_string(),
            class_fqn: self.types[method.type_index].fqn.clone(),
            signature: method.signature.clone(),
        }
    }

    pub fn methods_of(&self, type_index: usize) -> impl Iterator<Item = &MethodDecl<'t>> {
        self.methods.iter().filter(move |m| m.type_index == type_index)
    }

    /// Simple names of every type declared in the unit.
    pub fn declared_type_names(&self) -> BTreeSet<String> {
        self.types
            .iter()
            .filter(|t| t.kind != ClassKind::Anonymous)
            .map(|t| t.simple_name.clone())
            .collect()
    }
}

struct Walker<'t, 'u> {
    unit: &'u JavaUnit,
    package: String,
    types: Vec<TypeDecl<'t>>,
    methods: Vec<MethodDecl<'t>>,
    anon_counters: BTreeMap<usize, usize>,
    seen: BTreeMap<(String, String), usize>,
}

pub(crate) fn enumerate(unit: &JavaUnit) -> UnitStructure<'_> {
    let root = unit.root();
    let mut package = String::new();
    let mut imports = Imports::default();
    for child in named_children(root) {
        match child.kind() {
            "package_declaration" => {
                if let Some(name) = named_children(child)
                    .into_iter()
                    .find(|n| matches!(n.kind(), "scoped_identifier" | "identifier"))
                {
                    package = unit.text(name).to_string();
                }
            }
            "import_declaration" => record_import(unit.text(child), &mut imports),
            _ => {}
        }
    }
    let mut w = Walker {
        unit,
        package: package.clone(),
        types: Vec::new(),
        methods: Vec::new(),
        anon_counters: BTreeMap::new(),
        seen: BTreeMap::new(),
    };
    w.visit(root, None);
    UnitStructure {
        package,
        imports,
        types: w.types,
        methods: w.methods,
    }
}

fn record_import(text: &str, imports: &mut Imports) {
    let body = text
        .trim()
        .trim_start_matches("import")
        .trim()
        .trim_end_matches(';')
        .trim();
    let (is_static, path) = match body.strip_prefix("static") {
        Some(rest) => (true, rest.trim()),
        None => (false, body),
    };
    let path: String = path.chars().filter(|c| !c.is_whitespace()).collect();
    let mut segs: Vec<&str> = path.split('.').collect();
    if segs.last() == Some(&"*") {
        segs.pop();
        if is_static {
            if let Some(t) = segs.last() {
                imports.types.insert(t.to_string());
            }
        }
        return;
    }
    if is_static {
        if let Some(m) = segs.pop() {
            imports.static_members.insert(m.to_string());
        }
        if let Some(t) = segs.last() {
            imports.types.insert(t.to_string());
        }
    } else if let Some(t) = segs.last() {
        imports.types.insert(t.to_string());
    }
}

impl<'t, 'u> Walker<'t, 'u>
where
    'u: 't,
{
    fn visit(&mut self, node: Node<'t>, enclosing: Option<usize>) {
        let kind = node.kind();
        if is_type_declaration(kind) {
            let idx = self.push_named_type(node, enclosing);
            for child in children(node) {
                self.visit(child, Some(idx));
            }
            return;
        }
        match kind {
            "object_creation_expression" | "enum_constant" => {
                let body = named_children(node)
                    .into_iter()
                    .find(|c| c.kind() == "class_body");
                if let (Some(body), Some(parent)) = (body, enclosing) {
                    for child in children(node) {
                        if child == body {
                            let idx = self.push_anonymous(node, body, parent);
                            for grand in children(body) {
                                self.visit(grand, Some(idx));
                            }
                        } else {
                            self.visit(child, enclosing);
                        }
                    }
                    return;
                }
            }
            "method_declaration" | "constructor_declaration" | "compact_constructor_declaration" => {
                if let Some(t) = enclosing {
                    self.push_method(node, t);
                }
            }
            _ => {}
        }
        for child in children(node) {
            self.visit(child, enclosing);
        }
    }

    fn push_named_type(&mut self, node: Node<'t>, parent: Option<usize>) -> usize {
        let name = node
            .child_by_field_name("name")
            .map(|n| self.unit.text(n).to_string())
            .unwrap_or_default();
        let fqn = match parent {
            Some(p) => format!("{}.{}", self.types[p].fqn, name),
            None if self.package.is_empty() => name.clone(),
            None => format!("{}.{}", self.package, name),
        };
        let kind = match node.kind() {
            "interface_declaration" | "annotation_type_declaration" => ClassKind::Interface,
            "enum_declaration" => ClassKind::EnumType,
            _ if parent.is_some() => ClassKind::InnerClass,
            _ => ClassKind::Class,
        };
        let superclass = node
            .child_by_field_name("superclass")
            .and_then(|s| named_children(s).into_iter().next())
            .map(|t| simple_type_name(self.unit.text(t)));
        self.types.push(TypeDecl {
            node,
            body: node.child_by_field_name("body"),
            kind,
            fqn,
            simple_name: name,
            parent,
            superclass,
        });
        self.types.len() - 1
    }

    fn push_anonymous(&mut self, creation: Node<'t>, body: Node<'t>, parent: usize) -> usize {
        let n = self.anon_counters.entry(parent).or_insert(0);
        *n += 1;
        let fqn = format!("{}${}", self.types[parent].fqn, n);
        let superclass = if creation.kind() == "enum_constant" {
            Some(self.types[parent].simple_name.clone())
        } else {
            creation
                .child_by_field_name("type")
                .map(|t| simple_type_name(self.unit.text(t)))
        };
        self.types.push(TypeDecl {
            node: body,
            body: Some(body),
            kind: ClassKind::Anonymous,
            simple_name: fqn.rsplit('.').next().unwrap_or(&fqn).to_string(),
            fqn,
            parent: Some(parent),
            superclass,
        });
        self.types.len() - 1
    }

    fn push_method(&mut self, node: Node<'t>, type_index: usize) {
        let name = node
            .child_by_field_name("name")
            .map(|n| self.unit.text(n).to_string())
            .unwrap_or_default();
        let params: Vec<String> = node
            .child_by_field_name("parameters")
            .map(|p| {
                named_children(p)
                    .into_iter()
                    .filter_map(|param| self.param_type(param))
                    .collect()
            })
            .unwrap_or_default();
        let mut signature = format!("{}({})", name, params.join(","));
        let key = (self.types[type_index].fqn.clone(), signature.clone());
        let seen = self.seen.entry(key).or_insert(0);
        *seen += 1;
        if *seen > 1 {
            signature = format!("{signature}#{seen}");
        }
        self.methods.push(MethodDecl {
            node,
            body: node.child_by_field_name("body"),
            type_index,
            name,
            signature,
            is_constructor: node.kind() != "method_declaration",
        });
    }

    fn param_type(&self, param: Node<'t>) -> Option<String> {
        match param.kind() {
            "formal_parameter" => {
                let ty = param.child_by_field_name("type")?;
                let mut t = erase_type(self.unit.text(ty));
                if let Some(d) = param.child_by_field_name("dimensions") {
                    t.push_str(&erase_type(self.unit.text(d)));
                }
                Some(t)
            }
            "spread_parameter" => {
                let ty = named_children(param).into_iter().find(|c| {
                    !matches!(c.kind(), "modifiers" | "variable_declarator" | "identifier")
                })?;
                Some(format!("{}...", erase_type(self.unit.text(ty))))
            }
            _ => None,
        }
    }
}
