//! Corpus-wide superclass lookup for DIT.

use std::collections::{BTreeMap, BTreeSet};

use crate::java::{ClassKind, UnitStructure};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    package: String,
    fqn: String,
    kind: ClassKind,
    superclass: Option<String>,
}

/// Named types of a corpus keyed by simple name.
#[derive(Debug, Default, Clone)]
pub struct HierarchyIndex {
    by_name: BTreeMap<String, Vec<Entry>>,
}

impl HierarchyIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_unit(&mut self, structure: &UnitStructure<'_>) {
        for t in &structure.types {
            if t.kind == ClassKind::Anonymous {
                continue;
            }
            let entries = self.by_name.entry(t.simple_name.clone()).or_default();
            entries.push(Entry {
                package: structure.package.clone(),
                fqn: t.fqn.clone(),
                kind: t.kind,
                superclass: t.superclass.clone(),
            });
            entries.sort();
        }
    }

    pub fn merge(&mut self, other: HierarchyIndex) {
        for (name, mut entries) in other.by_name {
            let slot = self.by_name.entry(name).or_default();
            slot.append(&mut entries);
            slot.sort();
        }
    }

    /// Same-package declaration first, then the smallest FQN.
    fn resolve(&self, name: &str, package: &str) -> Option<&Entry> {
        let entries = self.by_name.get(name)?;
        entries
            .iter()
            .find(|e| e.package == package)
            .or_else(|| entries.first())
    }

    /// Depth of inheritance over the resolvable superclass chain. Classes
    /// without a known superclass are 1; interfaces and enums are 1;
    /// anonymous classes are one below their base class when it is a known
    /// class, else 1.
    pub fn dit(&self, structure: &UnitStructure<'_>, type_index: usize) -> u64 {
        let t = &structure.types[type_index];
        let package = structure.package.as_str();
        match t.kind {
            ClassKind::Interface | ClassKind::EnumType => 1,
            ClassKind::Anonymous => match t
                .superclass
                .as_deref()
                .and_then(|s| self.resolve(s, package))
            {
                Some(e) if matches!(e.kind, ClassKind::Class | ClassKind::InnerClass) => {
                    1 + self.chain(e, package)
                }
                _ => 1,
            },
            ClassKind::Class | ClassKind::InnerClass => {
                let mut depth = 1;
                if let Some(sup) = t.superclass.as_deref() {
                    if sup != "Object" {
                        if let Some(e) = self.resolve(sup, package).filter(|e| e.fqn != t.fqn) {
                            depth += self.chain(e, package);
                        }
                    }
                }
                depth
            }
        }
    }

    /// DIT of a resolved class entry.
    fn chain(&self, start: &Entry, package: &str) -> u64 {
        let mut seen = BTreeSet::new();
        let mut depth = 1;
        let mut current = start;
        seen.insert(current.fqn.clone());
        while let Some(sup) = current.superclass.as_deref() {
            if sup == "Object" {
                break;
            }
            match self.resolve(sup, &current.package).or_else(|| self.resolve(sup, package)) {
                Some(next) if seen.insert(next.fqn.clone()) => {
                    depth += 1;
                    current = next;
                }
                _ => break,
            }
        }
        depth
    }
}
