//! Method- and class-level code metrics and the 68-slot feature vector.
//!
//! All metrics are lexical/syntactic and are always computed on the
//! log-free version of a unit. Definitions:
//!
//! * cyclomatic complexity: 1 + `if`, `while`, `for`, enhanced `for`, `do`,
//!   `case` labels, `catch`, `?:`, `&&`, `||`; WMC sums it over methods.
//! * RFC: distinct invoked `name/arity` pairs (class: union over methods plus
//!   the declared methods).
//! * CBO: distinct referenced type names outside `java.lang`, excluding the
//!   type itself and type parameters.
//! * LCOM: pairs of methods sharing no field minus pairs sharing one, floored
//!   at 0.
//! * DIT: superclass chain length up to `Object`; interfaces are 1.
//! * NOSI: invocations qualified by a type name, or unqualified calls to
//!   static methods of the class or statically imported members.
//! * SLOC: non-blank, non-comment lines in the declaration span.
//! * maxNestedBlocksQty: deepest block nesting below the method body.
//! * uniqueWordsQty: distinct identifier words after camelCase/underscore
//!   splitting, lowercased; literals are not included.
//!
//! Method counts never look inside nested or anonymous type bodies; those
//! are counted as `innerClassesQty`/`anonymousClassesQty` and analysed as
//! types of their own.

mod collect;
pub mod hierarchy;
pub mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::java::syntax::{all_nodes, is_comment, modifier_keywords, named_children};
use crate::java::{ClassKind, JavaUnit, MethodId, UnitStructure};
pub use collect::split_words;
use collect::{max_block_depth, FieldUse, ScopeFacts, Tally};
pub use hierarchy::HierarchyIndex;
pub use schema::{schema, schema_hash, FeatureSchema, FEATURE_COUNT};

macro_rules! metric_set {
    ($(#[$meta:meta])* $name:ident { $($field:ident => $label:literal,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
        pub struct $name {
            $(pub $field: u64,)*
        }

        impl $name {
            pub const NAMES: &'static [&'static str] = &[$($label),*];

            pub fn values(&self) -> Vec<f64> {
                vec![$(self.$field as f64),*]
            }

            pub fn get(&self, label: &str) -> Option<u64> {
                match label {
                    $($label => Some(self.$field),)*
                    _ => None,
                }
            }
        }
    };
}

metric_set! {
    /// The 23 numeric method-level metrics.
    MethodCounts {
        cbo => "CBO",
        wmc => "WMC",
        rfc => "RFC",
        sloc => "SLOC",
        parameters => "parametersQty",
        variables => "variablesQty",
        returns => "returnsQty",
        loops => "loopQty",
        comparisons => "comparisonsQty",
        max_nested_blocks => "maxNestedBlocksQty",
        anonymous_classes => "anonymousClassesQty",
        inner_classes => "innerClassesQty",
        lambdas => "lambdasQty",
        unique_words => "uniqueWordsQty",
        numbers => "numbersQty",
        assignments => "assignmentsQty",
        math_operations => "mathOperationsQty",
        string_literals => "stringLiteralsQty",
        parenthesized_exps => "parenthesizedExpsQty",
        methods_invoked => "methodsInvokedQty",
        methods_invoked_local => "methodsInvokedLocalQty",
        methods_invoked_indirect_local => "methodsInvokedIndirectLocalQty",
        nosi => "NOSI",
    }
}

metric_set! {
    /// The 38 numeric class-level metrics.
    ClassCounts {
        cbo => "CBO",
        dit => "DIT",
        wmc => "WMC",
        rfc => "RFC",
        lcom => "LCOM",
        nosi => "NOSI",
        sloc => "SLOC",
        loops => "loopQty",
        comparisons => "comparisonsQty",
        max_nested_blocks => "maxNestedBlocksQty",
        anonymous_classes => "anonymousClassesQty",
        inner_classes => "innerClassesQty",
        lambdas => "lambdasQty",
        unique_words => "uniqueWordsQty",
        numbers => "numbersQty",
        assignments => "assignmentsQty",
        math_operations => "mathOperationsQty",
        string_literals => "stringLiteralsQty",
        parenthesized_exps => "parenthesizedExpsQty",
        variables => "variablesQty",
        returns => "returnsQty",
        total_methods => "totalMethodsQty",
        static_methods => "staticMethodsQty",
        public_methods => "publicMethodsQty",
        private_methods => "privateMethodsQty",
        protected_methods => "protectedMethodsQty",
        default_methods => "defaultMethodsQty",
        abstract_methods => "abstractMethodsQty",
        final_methods => "finalMethodsQty",
        synchronized_methods => "synchronizedMethodsQty",
        total_fields => "totalFieldsQty",
        static_fields => "staticFieldsQty",
        public_fields => "publicFieldsQty",
        private_fields => "privateFieldsQty",
        protected_fields => "protectedFieldsQty",
        default_fields => "defaultFieldsQty",
        final_fields => "finalFieldsQty",
        visible_fields => "visibleFieldsQty",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodMetrics {
    pub counts: MethodCounts,
    pub is_constructor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub counts: ClassCounts,
    pub class_kind: ClassKind,
}

/// One dataset row: identity, 68 values in schema order, and the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub id: MethodId,
    pub values: Vec<f64>,
    pub label: bool,
}

/// Concatenate method counts, class counts, and the two one-hot blocks.
pub fn assemble_features(
    mm: &MethodMetrics,
    cm: &ClassMetrics,
    label: bool,
    id: MethodId,
) -> FeatureVector {
    let mut values = mm.counts.values();
    values.extend(cm.counts.values());
    values.push(if mm.is_constructor { 0.0 } else { 1.0 });
    values.push(if mm.is_constructor { 1.0 } else { 0.0 });
    for kind in ClassKind::ALL {
        values.push(if kind == cm.class_kind { 1.0 } else { 0.0 });
    }
    debug_assert_eq!(values.len(), FEATURE_COUNT);
    FeatureVector { id, values, label }
}

/// Per-unit facts shared by every metric computation on that unit.
pub struct UnitMetrics<'t> {
    unit: &'t JavaUnit,
    pub structure: UnitStructure<'t>,
    comments: Vec<Range<usize>>,
    facts: ScopeFacts,
    types: Vec<TypeFacts>,
    method_tallies: Vec<Tally>,
}

#[derive(Debug, Default)]
struct TypeFacts {
    field_names: BTreeSet<String>,
    method_names: BTreeSet<String>,
    /// Local callee names per declared method name.
    call_graph: BTreeMap<String, BTreeSet<String>>,
}

impl<'t> UnitMetrics<'t> {
    pub fn new(unit: &'t JavaUnit) -> Self {
        let structure = unit.structure();
        let nodes = all_nodes(unit.root());
        let comments = nodes
            .iter()
            .filter(|n| is_comment(**n))
            .map(|n| n.byte_range())
            .collect();
        let facts = ScopeFacts::new(unit, &structure, &nodes);

        let mut types: Vec<TypeFacts> = structure
            .types
            .iter()
            .map(|t| TypeFacts {
                field_names: field_declarators(unit, t.body)
                    .into_iter()
                    .map(|(name, _, _)| name)
                    .collect(),
                ..Default::default()
            })
            .collect();
        for m in &structure.methods {
            types[m.type_index].method_names.insert(m.name.clone());
        }
        let static_methods: Vec<BTreeSet<String>> = (0..structure.types.len())
            .map(|i| static_method_names(&structure, i))
            .collect();

        let method_tallies: Vec<Tally> = structure
            .methods
            .iter()
            .map(|m| {
                Tally::collect(
                    unit,
                    m.node,
                    &facts,
                    &static_methods[m.type_index],
                    &types[m.type_index].field_names,
                )
            })
            .collect();
        for (m, tally) in structure.methods.iter().zip(&method_tallies) {
            let local: BTreeSet<String> = tally
                .unqualified_calls
                .intersection(&types[m.type_index].method_names)
                .cloned()
                .collect();
            types[m.type_index]
                .call_graph
                .entry(m.name.clone())
                .or_default()
                .extend(local);
        }

        UnitMetrics {
            unit,
            structure,
            comments,
            facts,
            types,
            method_tallies,
        }
    }

    pub fn unit(&self) -> &'t JavaUnit {
        self.unit
    }

    /// Non-blank, non-comment lines within `range`.
    pub fn sloc(&self, range: Range<usize>) -> u64 {
        let src = self.unit.source().as_bytes();
        let mut buf = src[range.clone()].to_vec();
        for c in &self.comments {
            let s = c.start.max(range.start);
            let e = c.end.min(range.end);
            if s < e {
                for b in &mut buf[s - range.start..e - range.start] {
                    if *b != b'\n' {
                        *b = b' ';
                    }
                }
            }
        }
        buf.split(|b| *b == b'\n')
            .filter(|line| line.iter().any(|b| !b.is_ascii_whitespace()))
            .count() as u64
    }

    pub fn method_metrics(&self, method_index: usize) -> MethodMetrics {
        let m = &self.structure.methods[method_index];
        let tally = &self.method_tallies[method_index];
        let facts = &self.types[m.type_index];

        let direct: BTreeSet<String> = tally
            .unqualified_calls
            .intersection(&facts.method_names)
            .cloned()
            .collect();
        let mut reached: BTreeSet<String> = BTreeSet::new();
        let mut frontier: Vec<String> = direct.iter().cloned().collect();
        while let Some(name) = frontier.pop() {
            if let Some(callees) = facts.call_graph.get(&name) {
                for c in callees {
                    if reached.insert(c.clone()) {
                        frontier.push(c.clone());
                    }
                }
            }
        }
        let indirect = reached
            .iter()
            .filter(|n| !direct.contains(*n) && **n != m.name)
            .count();

        let parameters = arity(m.node);

        let own_type = &self.structure.types[m.type_index].simple_name;
        let counts = MethodCounts {
            cbo: self.facts.coupled_types(&tally.type_refs, own_type),
            wmc: 1 + tally.decisions,
            rfc: tally.invoked.len() as u64,
            sloc: self.sloc(m.node.byte_range()),
            parameters: parameters as u64,
            variables: tally.variables,
            returns: tally.returns,
            loops: tally.loops,
            comparisons: tally.comparisons,
            max_nested_blocks: m.body.map(max_block_depth).unwrap_or(0),
            anonymous_classes: tally.anonymous,
            inner_classes: tally.inner,
            lambdas: tally.lambdas,
            unique_words: tally.words.len() as u64,
            numbers: tally.numbers,
            assignments: tally.assignments,
            math_operations: tally.math,
            string_literals: tally.strings,
            parenthesized_exps: tally.parens,
            methods_invoked: tally.invocations,
            methods_invoked_local: direct.len() as u64,
            methods_invoked_indirect_local: indirect as u64,
            nosi: tally.static_invocations,
        };
        MethodMetrics {
            counts,
            is_constructor: m.is_constructor,
        }
    }

    pub fn class_metrics(&self, type_index: usize, hierarchy: &HierarchyIndex) -> ClassMetrics {
        let t = &self.structure.types[type_index];
        let is_interface = t.kind == ClassKind::Interface;
        let static_methods = static_method_names(&self.structure, type_index);
        let tally = Tally::collect(
            self.unit,
            t.node,
            &self.facts,
            &static_methods,
            &self.types[type_index].field_names,
        );

        let methods: Vec<usize> = self
            .structure
            .methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.type_index == type_index)
            .map(|(i, _)| i)
            .collect();

        let mut c = ClassCounts {
            cbo: self.facts.coupled_types(&tally.type_refs, &t.simple_name),
            dit: hierarchy.dit(&self.structure, type_index),
            nosi: tally.static_invocations,
            sloc: self.sloc(t.node.byte_range()),
            loops: tally.loops,
            comparisons: tally.comparisons,
            anonymous_classes: tally.anonymous,
            inner_classes: tally.inner,
            lambdas: tally.lambdas,
            unique_words: tally.words.len() as u64,
            numbers: tally.numbers,
            assignments: tally.assignments,
            math_operations: tally.math,
            string_literals: tally.strings,
            parenthesized_exps: tally.parens,
            variables: tally.variables,
            returns: tally.returns,
            ..Default::default()
        };

        let mut responses: BTreeSet<(String, usize)> = BTreeSet::new();
        let mut field_uses: Vec<&FieldUse> = Vec::new();
        for &i in &methods {
            let m = &self.structure.methods[i];
            let mt = &self.method_tallies[i];
            c.wmc += 1 + mt.decisions;
            c.max_nested_blocks = c
                .max_nested_blocks
                .max(m.body.map(max_block_depth).unwrap_or(0));
            responses.extend(mt.invoked.iter().cloned());
            responses.insert((m.name.clone(), arity(m.node)));
            field_uses.push(&mt.fields_used);

            let mods = modifier_keywords(m.node);
            let has = |k: &str| mods.contains(&k);
            c.total_methods += 1;
            if has("static") {
                c.static_methods += 1;
            }
            if has("final") {
                c.final_methods += 1;
            }
            if has("synchronized") {
                c.synchronized_methods += 1;
            }
            if is_interface {
                if has("private") {
                    c.private_methods += 1;
                } else {
                    c.public_methods += 1;
                }
                if m.body.is_none() && !has("static") && !has("private") {
                    c.abstract_methods += 1;
                }
            } else {
                if has("public") {
                    c.public_methods += 1;
                } else if has("private") {
                    c.private_methods += 1;
                } else if has("protected") {
                    c.protected_methods += 1;
                } else {
                    c.default_methods += 1;
                }
                if has("abstract") {
                    c.abstract_methods += 1;
                }
            }
        }
        c.rfc = responses.len() as u64;
        c.lcom = lcom(&field_uses);

        for (_, decl, is_constant) in field_declarators(self.unit, t.body) {
            let mods = modifier_keywords(decl);
            let has = |k: &str| mods.contains(&k);
            c.total_fields += 1;
            if is_constant || is_interface {
                c.public_fields += 1;
                c.static_fields += 1;
                c.final_fields += 1;
                c.visible_fields += 1;
                continue;
            }
            if has("static") {
                c.static_fields += 1;
            }
            if has("final") {
                c.final_fields += 1;
            }
            if has("public") {
                c.public_fields += 1;
                c.visible_fields += 1;
            } else if has("private") {
                c.private_fields += 1;
            } else if has("protected") {
                c.protected_fields += 1;
            } else {
                c.default_fields += 1;
                c.visible_fields += 1;
            }
        }

        ClassMetrics {
            counts: c,
            class_kind: t.kind,
        }
    }
}

fn static_method_names(structure: &UnitStructure<'_>, type_index: usize) -> BTreeSet<String> {
    structure
        .methods_of(type_index)
        .filter(|m| modifier_keywords(m.node).contains(&"static"))
        .map(|m| m.name.clone())
        .collect()
}

fn arity(method: tree_sitter::Node<'_>) -> usize {
    method
        .child_by_field_name("parameters")
        .map(|p| {
            named_children(p)
                .into_iter()
                .filter(|c| matches!(c.kind(), "formal_parameter" | "spread_parameter"))
                .count()
        })
        .unwrap_or(0)
}

/// Lack of cohesion over the per-method sets of used fields.
pub fn lcom(field_uses: &[&FieldUse]) -> u64 {
    let mut disjoint = 0i64;
    let mut sharing = 0i64;
    for i in 0..field_uses.len() {
        for j in i + 1..field_uses.len() {
            if field_uses[i].is_disjoint(field_uses[j]) {
                disjoint += 1;
            } else {
                sharing += 1;
            }
        }
    }
    (disjoint - sharing).max(0) as u64
}

/// `(name, declaration node, is_interface_constant)` for each declared field.
fn field_declarators<'t>(
    unit: &'t JavaUnit,
    body: Option<tree_sitter::Node<'t>>,
) -> Vec<(String, tree_sitter::Node<'t>, bool)> {
    let mut out = Vec::new();
    let Some(body) = body else { return out };
    let mut members = named_children(body);
    if let Some(decls) = members
        .iter()
        .find(|n| n.kind() == "enum_body_declarations")
        .copied()
    {
        members.extend(named_children(decls));
    }
    for member in members {
        let is_constant = member.kind() == "constant_declaration";
        if member.kind() != "field_declaration" && !is_constant {
            continue;
        }
        for d in named_children(member) {
            if d.kind() == "variable_declarator" {
                if let Some(name) = d.child_by_field_name("name") {
                    out.push((unit.text(name).to_string(), member, is_constant));
                }
            }
        }
    }
    out
}
