use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{Composition, ElementKind, ElementType, MemberType, Model, ReferenceKind, ValueType};
use crate::pattern::Pattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// Offending element, when the issue is tied to one.
    pub element: Option<String>,
    pub member: Option<String>,
    /// Short name of the violated rule, e.g. `duplicate-name`.
    pub constraint: &'static str,
    pub message: String,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.element, &self.member) {
            (Some(e), Some(m)) => write!(f, "{e}.{m}: {} [{}]", self.message, self.constraint),
            (Some(e), None) => write!(f, "{e}: {} [{}]", self.message, self.constraint),
            _ => write!(f, "{} [{}]", self.message, self.constraint),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.issues.iter().any(|i| i.message.contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

struct Checker<'m> {
    model: &'m Model,
    issues: Vec<ValidationIssue>,
}

impl<'m> Checker<'m> {
    fn push(&mut self, element: Option<&str>, member: Option<&str>, constraint: &'static str, message: String) {
        self.issues.push(ValidationIssue {
            element: element.map(str::to_string),
            member: member.map(str::to_string),
            constraint,
            message,
        });
    }

    fn pattern(&mut self, element: &str, member: Option<&str>, what: &str, source: &str) {
        if let Err(e) = Pattern::new(source) {
            self.push(Some(element), member, "pattern", format!("{what}: {e}"));
        }
    }

    fn names(&mut self) {
        let mut seen = HashSet::new();
        for e in &self.model.elements {
            if !seen.insert(e.name.as_str()) {
                self.push(Some(&e.name), None, "duplicate-name", format!("duplicate element name `{}`", e.name));
            }
        }
        if self.model.elements.is_empty() {
            self.push(None, None, "empty-model", "model declares no elements".into());
        } else if self.model.start_element().is_none() {
            self.push(None, None, "start", format!("start element `{}` is not declared", self.model.start));
        }
        if let Some(skip) = &self.model.skip {
            if let Err(e) = Pattern::new(skip) {
                self.push(None, None, "pattern", format!("skip pattern: {e}"));
            }
        }
    }

    fn element(&mut self, e: &'m ElementType) {
        let model = self.model;
        let name = e.name.as_str();
        if let Some(sup) = &e.supertype {
            match model.element(sup) {
                None => self.push(Some(name), None, "undeclared", format!("supertype `{sup}` is not declared")),
                Some(s) if s.kind != ElementKind::Selection => self.push(
                    Some(name),
                    None,
                    "supertype",
                    format!("supertype `{sup}` is not an abstract (selection) element"),
                ),
                _ => {}
            }
        }
        match e.kind {
            ElementKind::Basic => {
                match &e.pattern {
                    Some(p) if !p.regex.is_empty() => self.pattern(name, None, "@pattern", &p.regex),
                    _ => self.push(Some(name), None, "pattern", "basic element requires exactly one @pattern".into()),
                }
                if !e.members.is_empty() {
                    self.push(Some(name), None, "members", "basic element cannot declare members".into());
                }
            }
            ElementKind::Selection | ElementKind::Composite => {
                if e.pattern.is_some() {
                    self.push(Some(name), None, "pattern", "@pattern/@value are only allowed on basic elements".into());
                }
            }
        }
        if e.kind == ElementKind::Selection {
            if !e.members.is_empty() {
                self.push(Some(name), None, "members", "abstract element cannot declare members".into());
            }
            if model.subelements(name).next().is_none() {
                self.push(Some(name), None, "subelements", "abstract element has no subelements".into());
            }
        }
        if e.kind == ElementKind::Composite && e.members.is_empty() {
            self.push(Some(name), None, "members", "composite element needs at least one member".into());
        }
        for p in &e.delimiters.prefixes {
            self.pattern(name, None, "@prefix", p);
        }
        for s in &e.delimiters.suffixes {
            self.pattern(name, None, "@suffix", s);
        }
        if e.evaluation.free_order && (e.kind != ElementKind::Composite || e.members.len() < 2) {
            self.push(Some(name), None, "freeorder", "@freeorder needs a composite with at least two members".into());
        }
        if e.evaluation.composition != Composition::Unspecified {
            self.composition(e);
        }
        self.members(e);
    }

    fn composition(&mut self, e: &ElementType) {
        let name = e.name.as_str();
        let ordered = e.ordered_members();
        let trailing = ordered.last();
        let ok = e.kind == ElementKind::Composite
            && !e.evaluation.free_order
            && e.delimiters.suffixes.is_empty()
            && ordered.len() >= 2
            && trailing.is_some_and(|m| m.optional && !m.is_token() && m.bounds().is_single());
        if !ok {
            self.push(
                Some(name),
                None,
                "composition",
                "@composition needs a composite without suffix or @freeorder whose last member is @optional".into(),
            );
        }
    }

    fn members(&mut self, e: &ElementType) {
        let model = self.model;
        let name = e.name.as_str();
        let mut fields = HashSet::new();
        let mut positions = HashMap::new();
        let mut ids = 0;
        for m in &e.members {
            let field = Some(m.field.as_str());
            if !fields.insert(m.field.as_str()) {
                self.push(Some(name), field, "duplicate-member", format!("duplicate member `{}`", m.field));
            }
            match &m.target {
                MemberType::Element(t) if model.element(t).is_none() => {
                    self.push(Some(name), field, "undeclared", format!("member type `{t}` is not declared"));
                }
                MemberType::Token(regex) => {
                    self.pattern(name, field, "token member", regex);
                    if m.reference != ReferenceKind::None {
                        self.push(Some(name), field, "reference", "token members cannot be @id or @reference".into());
                    }
                }
                _ => {}
            }
            let b = m.bounds();
            if let Some(max) = b.max {
                if max == 0 {
                    self.push(Some(name), field, "multiplicity", "maximum multiplicity must be positive".into());
                } else if b.min > max {
                    self.push(Some(name), field, "multiplicity", format!("minimum {} exceeds maximum {max}", b.min));
                }
            }
            if let Some(p) = m.position {
                if (p as usize) >= e.members.len() {
                    self.push(Some(name), field, "position", format!("position {p} is out of range"));
                }
                if let Some(other) = positions.insert(p, m.field.as_str()) {
                    self.push(Some(name), field, "position", format!("position {p} already used by `{other}`"));
                }
            }
            for s in &m.separator {
                self.pattern(name, field, "@separator", s);
            }
            if !m.separator.is_empty() && !m.is_repeated() {
                self.push(Some(name), field, "separator", "@separator on a member that does not repeat".into());
            }
            match m.reference {
                ReferenceKind::Id => {
                    ids += 1;
                    let basic_text = m
                        .element_name()
                        .and_then(|t| model.element(t))
                        .is_some_and(|t| t.kind == ElementKind::Basic && t.value_type() == ValueType::Text);
                    if !basic_text {
                        self.push(Some(name), field, "id", "@id member must be a basic element with @value(text)".into());
                    }
                    if b != super::Multiplicity::ONE {
                        self.push(Some(name), field, "id", "@id member must be mandatory and single".into());
                    }
                }
                ReferenceKind::Reference => {
                    let referenceable = m
                        .element_name()
                        .is_some_and(|t| model.reference_token_element(t).is_some());
                    if !referenceable {
                        self.push(Some(name), field, "reference", "@reference target must own an @id member".into());
                    }
                }
                ReferenceKind::None => {}
            }
        }
        if ids > 1 {
            self.push(Some(name), None, "id", "at most one member may carry @id".into());
        }
    }

    fn supertype_cycles(&mut self) {
        for e in &self.model.elements {
            let mut seen = HashSet::new();
            let mut cur = Some(e.name.as_str());
            while let Some(n) = cur {
                if !seen.insert(n) {
                    if n == e.name {
                        self.push(Some(&e.name), None, "supertype-cycle", "supertype chain is cyclic".into());
                    }
                    break;
                }
                cur = self.model.element(n).and_then(|x| x.supertype.as_deref());
            }
        }
    }

    /// Least fixed point of "can derive a finite sentence".
    fn productivity(&mut self) {
        let model = self.model;
        let mut productive: HashSet<&str> = HashSet::new();
        loop {
            let before = productive.len();
            for e in &model.elements {
                if productive.contains(e.name.as_str()) {
                    continue;
                }
                let ok = match e.kind {
                    ElementKind::Basic => true,
                    ElementKind::Selection => model
                        .subelements(&e.name)
                        .any(|s| productive.contains(s.name.as_str())),
                    ElementKind::Composite => e.members.iter().all(|m| {
                        if m.bounds().min == 0 {
                            return true;
                        }
                        match &m.target {
                            MemberType::Token(_) => true,
                            MemberType::Element(t) if m.reference == ReferenceKind::Reference => {
                                model.reference_token_element(t).is_some()
                            }
                            MemberType::Element(t) => productive.contains(t.as_str()),
                        }
                    }),
                };
                if ok {
                    productive.insert(&e.name);
                }
            }
            if productive.len() == before {
                break;
            }
        }
        for e in &model.elements {
            if !productive.contains(e.name.as_str()) {
                self.push(Some(&e.name), None, "finite-derivation", "no finite derivation: every sentence would be infinite".into());
            }
        }
    }
}

/// Checks every well-formedness rule and reports all violations.
pub fn validate_model(model: &Model) -> ValidationReport {
    let mut c = Checker { model, issues: Vec::new() };
    c.names();
    for e in &model.elements {
        c.element(e);
    }
    c.supertype_cycles();
    c.productivity();
    ValidationReport { issues: c.issues }
}
