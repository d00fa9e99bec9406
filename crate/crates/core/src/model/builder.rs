use std::collections::HashSet;

use thiserror::Error;

use super::{
    validate_model, Associativity, Composition, ElementKind, ElementType, MemberSpec, Model,
    Multiplicity, PatternSpec, ReferenceKind, ValidationReport, ValueType,
};

/// Element-level annotations.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementConstraint {
    Pattern(String),
    Value(ValueType),
    Prefix(Vec<String>),
    Suffix(Vec<String>),
    Associativity(Associativity),
    Priority(i64),
    Composition(Composition),
    FreeOrder,
    Constraint(String),
    Start,
}

impl ElementConstraint {
    fn key(&self) -> &'static str {
        match self {
            ElementConstraint::Pattern(_) => "pattern",
            ElementConstraint::Value(_) => "value",
            ElementConstraint::Prefix(_) => "prefix",
            ElementConstraint::Suffix(_) => "suffix",
            ElementConstraint::Associativity(_) => "associativity",
            ElementConstraint::Priority(_) => "priority",
            ElementConstraint::Composition(_) => "composition",
            ElementConstraint::FreeOrder => "freeorder",
            ElementConstraint::Constraint(_) => "constraint",
            ElementConstraint::Start => "start",
        }
    }
}

/// Member-level annotations.
#[derive(Debug, Clone, PartialEq)]
pub enum MemberConstraint {
    Optional,
    Multiplicity(Multiplicity),
    Separator(Vec<String>),
    Position(u32),
    Id,
    Reference,
}

impl MemberConstraint {
    fn key(&self) -> &'static str {
        match self {
            MemberConstraint::Optional => "optional",
            MemberConstraint::Multiplicity(_) => "multiplicity",
            MemberConstraint::Separator(_) => "separator",
            MemberConstraint::Position(_) => "position",
            MemberConstraint::Id | MemberConstraint::Reference => "id/reference",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BuildError {
    #[error("unknown element name `{0}`")]
    UnknownElement(String),
    #[error("element `{element}` has no member `{field}`")]
    UnknownMember { element: String, field: String },
    #[error("conflicting constraint: `@{constraint}` set twice on {target}")]
    ConflictingConstraint { target: String, constraint: String },
    #[error("conflicting constraint on {target}: {message}")]
    Contradiction { target: String, message: String },
    #[error("model is invalid:\n{0}")]
    Invalid(ValidationReport),
}

/// Incremental construction of a [`Model`].
///
/// Elements may be referenced before they are declared; unresolved names are
/// reported when [`ModelBuilder::build`] validates the result.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    name: String,
    elements: Vec<ElementType>,
    start: Option<String>,
    skip: Option<String>,
    seen: HashSet<(usize, Option<String>, &'static str)>,
}

impl ModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ModelBuilder {
            name: name.into(),
            elements: Vec::new(),
            start: None,
            skip: None,
            seen: HashSet::new(),
        }
    }

    pub fn add_element(
        &mut self,
        name: impl Into<String>,
        kind: ElementKind,
        supertype: Option<&str>,
    ) -> &mut Self {
        let mut e = ElementType::new(name, kind);
        e.supertype = supertype.map(str::to_string);
        self.elements.push(e);
        self
    }

    // Duplicate declarations are allowed here so validation can report them;
    // annotations attach to the most recent declaration.
    fn index(&self, element: &str) -> Result<usize, BuildError> {
        self.elements
            .iter()
            .rposition(|e| e.name == element)
            .ok_or_else(|| BuildError::UnknownElement(element.to_string()))
    }

    pub fn add_member(&mut self, element: &str, member: MemberSpec) -> Result<&mut Self, BuildError> {
        let i = self.index(element)?;
        self.elements[i].members.push(member);
        Ok(self)
    }

    pub fn set_constraint(
        &mut self,
        element: &str,
        constraint: ElementConstraint,
    ) -> Result<&mut Self, BuildError> {
        let i = self.index(element)?;
        if !self.seen.insert((i, None, constraint.key())) {
            return Err(BuildError::ConflictingConstraint {
                target: format!("element `{element}`"),
                constraint: constraint.key().to_string(),
            });
        }
        let e = &mut self.elements[i];
        match constraint {
            ElementConstraint::Pattern(regex) => match &mut e.pattern {
                Some(p) => p.regex = regex,
                None => e.pattern = Some(PatternSpec { regex, value_type: ValueType::None }),
            },
            ElementConstraint::Value(value_type) => match &mut e.pattern {
                Some(p) => p.value_type = value_type,
                None => e.pattern = Some(PatternSpec { regex: String::new(), value_type }),
            },
            ElementConstraint::Prefix(p) => e.delimiters.prefixes = p,
            ElementConstraint::Suffix(s) => e.delimiters.suffixes = s,
            ElementConstraint::Associativity(a) => e.evaluation.associativity = a,
            ElementConstraint::Priority(p) => e.evaluation.priority = Some(p),
            ElementConstraint::Composition(c) => e.evaluation.composition = c,
            ElementConstraint::FreeOrder => e.evaluation.free_order = true,
            ElementConstraint::Constraint(hook) => e.constraint = Some(hook),
            ElementConstraint::Start => {
                if let Some(prev) = &self.start {
                    return Err(BuildError::ConflictingConstraint {
                        target: format!("elements `{prev}` and `{element}`"),
                        constraint: "start".into(),
                    });
                }
                self.start = Some(element.to_string());
            }
        }
        Ok(self)
    }

    pub fn set_member_constraint(
        &mut self,
        element: &str,
        field: &str,
        constraint: MemberConstraint,
    ) -> Result<&mut Self, BuildError> {
        let i = self.index(element)?;
        let target = format!("member `{element}.{field}`");
        let j = self.elements[i]
            .members
            .iter()
            .rposition(|m| m.field == field)
            .ok_or_else(|| BuildError::UnknownMember {
                element: element.to_string(),
                field: field.to_string(),
            })?;
        if !self.seen.insert((i, Some(field.to_string()), constraint.key())) {
            return Err(BuildError::ConflictingConstraint {
                target,
                constraint: constraint.key().to_string(),
            });
        }
        let m = &mut self.elements[i].members[j];
        let contradiction = |message: &str| BuildError::Contradiction {
            target: target.clone(),
            message: message.to_string(),
        };
        match constraint {
            MemberConstraint::Optional => {
                if m.multiplicity.is_some_and(|mult| mult != Multiplicity::OPTIONAL) {
                    return Err(contradiction("@optional contradicts the declared @multiplicity"));
                }
                m.optional = true;
            }
            MemberConstraint::Multiplicity(mult) => {
                if m.optional && mult != Multiplicity::OPTIONAL {
                    return Err(contradiction("@multiplicity contradicts @optional"));
                }
                m.multiplicity = Some(mult);
            }
            MemberConstraint::Separator(s) => m.separator = s,
            MemberConstraint::Position(p) => m.position = Some(p),
            MemberConstraint::Id => m.reference = ReferenceKind::Id,
            MemberConstraint::Reference => m.reference = ReferenceKind::Reference,
        }
        Ok(self)
    }

    pub fn set_skip(&mut self, pattern: impl Into<String>) -> Result<&mut Self, BuildError> {
        if self.skip.is_some() {
            return Err(BuildError::ConflictingConstraint {
                target: format!("language `{}`", self.name),
                constraint: "skip".into(),
            });
        }
        self.skip = Some(pattern.into());
        Ok(self)
    }

    /// Assembles the model without validating it.
    pub fn finish(self) -> Model {
        let start = self
            .start
            .or_else(|| self.elements.first().map(|e| e.name.clone()))
            .unwrap_or_default();
        Model {
            name: self.name,
            elements: self.elements,
            start,
            skip: self.skip,
        }
    }

    /// Assembles and validates the model.
    pub fn build(self) -> Result<Model, BuildError> {
        let model = self.finish();
        let report = validate_model(&model);
        if report.is_ok() {
            Ok(model)
        } else {
            Err(BuildError::Invalid(report))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_element_model_starts_at_first() {
        let mut b = ModelBuilder::new("Tiny");
        b.add_element("Expression", ElementKind::Selection, None);
        b.add_element("Literal", ElementKind::Basic, Some("Expression"));
        b.set_constraint("Literal", ElementConstraint::Pattern("[0-9]+".into()))
            .unwrap();
        let model = b.build().unwrap();
        assert_eq!(model.elements.len(), 2);
        assert_eq!(model.start, "Expression");
    }

    #[test]
    fn priority_twice_conflicts() {
        let mut b = ModelBuilder::new("T");
        b.add_element("Op", ElementKind::Basic, None);
        b.set_constraint("Op", ElementConstraint::Priority(1)).unwrap();
        let err = b.set_constraint("Op", ElementConstraint::Priority(2)).unwrap_err();
        assert!(matches!(err, BuildError::ConflictingConstraint { .. }));
        assert!(err.to_string().contains("conflicting constraint"));
    }

    #[test]
    fn unknown_element_is_rejected() {
        let mut b = ModelBuilder::new("T");
        let err = b
            .set_constraint("Missing", ElementConstraint::FreeOrder)
            .unwrap_err();
        assert_eq!(err, BuildError::UnknownElement("Missing".into()));
        assert!(b.add_member("Missing", MemberSpec::element("x", "X")).is_err());
    }

    #[test]
    fn optional_with_list_multiplicity_contradicts() {
        let mut b = ModelBuilder::new("T");
        b.add_element("A", ElementKind::Composite, None);
        b.add_member("A", MemberSpec::element("x", "A")).unwrap();
        b.set_member_constraint(
            "A",
            "x",
            MemberConstraint::Multiplicity(Multiplicity { min: 1, max: None }),
        )
        .unwrap();
        let err = b
            .set_member_constraint("A", "x", MemberConstraint::Optional)
            .unwrap_err();
        assert!(matches!(err, BuildError::Contradiction { .. }));
    }

    #[test]
    fn forward_references_resolve_at_build() {
        let mut b = ModelBuilder::new("T");
        b.add_element("Pair", ElementKind::Composite, None);
        b.add_member("Pair", MemberSpec::element("left", "Word")).unwrap();
        b.add_member("Pair", MemberSpec::element("right", "Word")).unwrap();
        b.add_element("Word", ElementKind::Basic, None);
        b.set_constraint("Word", ElementConstraint::Pattern("[a-z]+".into()))
            .unwrap();
        assert!(b.build().is_ok());
    }
}
