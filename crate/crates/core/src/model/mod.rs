//! Abstract syntax models: element types, members and the constraint
//! annotations that map them onto a concrete textual syntax.
//!
//! A [`Model`] is plain data. It is produced either by a [`ModelBuilder`] or
//! by reading a `.mcc` file (see [`crate::text`]) and is immutable once
//! validated.

mod builder;
mod validate;

pub use builder::{BuildError, ElementConstraint, MemberConstraint, ModelBuilder};
pub use validate::{validate_model, ValidationIssue, ValidationReport};

/// Index of an element inside [`Model::elements`].
pub type ElementId = usize;

/// Default skip pattern applied between tokens.
pub const DEFAULT_SKIP: &str = "[ \\t\\r\\n]+";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    /// Concatenation of members.
    Composite,
    /// Abstract element whose alternatives are its subelements.
    Selection,
    /// Pattern-matched leaf element.
    Basic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ValueType {
    Text,
    Number,
    Boolean,
    #[default]
    None,
}

impl ValueType {
    pub fn keyword(self) -> &'static str {
        match self {
            ValueType::Text => "text",
            ValueType::Number => "number",
            ValueType::Boolean => "boolean",
            ValueType::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSpec {
    pub regex: String,
    pub value_type: ValueType,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DelimiterSpec {
    pub prefixes: Vec<String>,
    pub suffixes: Vec<String>,
}

impl DelimiterSpec {
    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty() && self.suffixes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Associativity {
    LeftToRight,
    RightToLeft,
    NonAssociative,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Composition {
    Eager,
    Lazy,
    #[default]
    Unspecified,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvaluationSpec {
    pub associativity: Associativity,
    /// Lower values bind tighter.
    pub priority: Option<i64>,
    pub composition: Composition,
    pub free_order: bool,
}

/// What a member slot holds: another element, or an inline token that is
/// matched but never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberType {
    Element(String),
    Token(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReferenceKind {
    #[default]
    None,
    Id,
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Multiplicity {
    pub min: u32,
    /// `None` means unbounded.
    pub max: Option<u32>,
}

impl Multiplicity {
    pub const ONE: Multiplicity = Multiplicity { min: 1, max: Some(1) };
    pub const OPTIONAL: Multiplicity = Multiplicity { min: 0, max: Some(1) };

    pub fn is_single(self) -> bool {
        self.max == Some(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberSpec {
    pub field: String,
    pub target: MemberType,
    pub optional: bool,
    /// Explicit `@multiplicity`, if any.
    pub multiplicity: Option<Multiplicity>,
    pub separator: Vec<String>,
    pub position: Option<u32>,
    pub reference: ReferenceKind,
}

impl MemberSpec {
    pub fn element(field: impl Into<String>, element: impl Into<String>) -> Self {
        Self::with_target(field, MemberType::Element(element.into()))
    }

    pub fn token(field: impl Into<String>, regex: impl Into<String>) -> Self {
        Self::with_target(field, MemberType::Token(regex.into()))
    }

    fn with_target(field: impl Into<String>, target: MemberType) -> Self {
        MemberSpec {
            field: field.into(),
            target,
            optional: false,
            multiplicity: None,
            separator: Vec::new(),
            position: None,
            reference: ReferenceKind::None,
        }
    }

    /// Effective cardinality bounds.
    pub fn bounds(&self) -> Multiplicity {
        match (self.optional, self.multiplicity) {
            (_, Some(m)) => m,
            (true, None) => Multiplicity::OPTIONAL,
            (false, None) => Multiplicity::ONE,
        }
    }

    /// True for members that may hold more than one value.
    pub fn is_repeated(&self) -> bool {
        !self.bounds().is_single()
    }

    pub fn element_name(&self) -> Option<&str> {
        match &self.target {
            MemberType::Element(name) => Some(name),
            MemberType::Token(_) => None,
        }
    }

    pub fn is_token(&self) -> bool {
        matches!(self.target, MemberType::Token(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementType {
    pub name: String,
    pub kind: ElementKind,
    pub supertype: Option<String>,
    pub members: Vec<MemberSpec>,
    pub pattern: Option<PatternSpec>,
    pub delimiters: DelimiterSpec,
    pub evaluation: EvaluationSpec,
    /// Name of a registered custom constraint hook.
    pub constraint: Option<String>,
}

impl ElementType {
    pub fn new(name: impl Into<String>, kind: ElementKind) -> Self {
        ElementType {
            name: name.into(),
            kind,
            supertype: None,
            members: Vec::new(),
            pattern: None,
            delimiters: DelimiterSpec::default(),
            evaluation: EvaluationSpec::default(),
            constraint: None,
        }
    }

    pub fn member(&self, field: &str) -> Option<&MemberSpec> {
        self.members.iter().find(|m| m.field == field)
    }

    /// The member annotated `@id`, if the element is referenceable.
    pub fn id_member(&self) -> Option<&MemberSpec> {
        self.members.iter().find(|m| m.reference == ReferenceKind::Id)
    }

    pub fn value_type(&self) -> ValueType {
        self.pattern.as_ref().map(|p| p.value_type).unwrap_or_default()
    }

    /// Members in concrete-syntax order: explicit `@position` slots first
    /// claim their index, the rest fill the remaining slots in declaration
    /// order.
    pub fn ordered_members(&self) -> Vec<&MemberSpec> {
        let n = self.members.len();
        let mut slots: Vec<Option<&MemberSpec>> = vec![None; n];
        for m in &self.members {
            if let Some(p) = m.position {
                if let Some(slot) = slots.get_mut(p as usize) {
                    if slot.is_none() {
                        *slot = Some(m);
                    }
                }
            }
        }
        let mut rest = self
            .members
            .iter()
            .filter(|m| m.position.is_none_or(|p| (p as usize) >= n));
        for slot in slots.iter_mut() {
            if slot.is_none() {
                *slot = rest.next();
            }
        }
        slots.into_iter().flatten().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub elements: Vec<ElementType>,
    pub start: String,
    /// Language-level `@skip` pattern; `None` means [`DEFAULT_SKIP`].
    pub skip: Option<String>,
}

impl Model {
    pub fn id_of(&self, name: &str) -> Option<ElementId> {
        self.elements.iter().position(|e| e.name == name)
    }

    pub fn element(&self, name: &str) -> Option<&ElementType> {
        self.elements.iter().find(|e| e.name == name)
    }

    pub fn start_element(&self) -> Option<&ElementType> {
        self.element(&self.start)
    }

    pub fn skip_pattern(&self) -> &str {
        self.skip.as_deref().unwrap_or(DEFAULT_SKIP)
    }

    /// Direct subelements of `name`, in declaration order.
    pub fn subelements<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ElementType> + 'a {
        self.elements
            .iter()
            .filter(move |e| e.supertype.as_deref() == Some(name))
    }

    /// Proper ancestors of `name`, nearest first. Stops on cycles.
    pub fn ancestors(&self, name: &str) -> Vec<&ElementType> {
        let mut out: Vec<&ElementType> = Vec::new();
        let mut cur = self.element(name).and_then(|e| e.supertype.as_deref());
        while let Some(s) = cur {
            match self.element(s) {
                Some(e) if !out.iter().any(|o| o.name == e.name) && e.name != name => {
                    out.push(e);
                    cur = e.supertype.as_deref();
                }
                _ => break,
            }
        }
        out
    }

    /// `sub` equals `sup` or inherits from it.
    pub fn is_subtype_of(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.ancestors(sub).iter().any(|a| a.name == sup)
    }

    /// Non-selection elements that are `name` itself or inherit from it.
    pub fn concrete_descendants(&self, name: &str) -> Vec<&ElementType> {
        self.elements
            .iter()
            .filter(|e| e.kind != ElementKind::Selection && self.is_subtype_of(&e.name, name))
            .collect()
    }

    pub fn effective_priority(&self, name: &str) -> Option<i64> {
        let e = self.element(name)?;
        e.evaluation
            .priority
            .or_else(|| self.ancestors(name).iter().find_map(|a| a.evaluation.priority))
    }

    pub fn effective_associativity(&self, name: &str) -> Associativity {
        let own = self
            .element(name)
            .map(|e| e.evaluation.associativity)
            .unwrap_or_default();
        if own != Associativity::Unspecified {
            return own;
        }
        self.ancestors(name)
            .iter()
            .map(|a| a.evaluation.associativity)
            .find(|a| *a != Associativity::Unspecified)
            .unwrap_or_default()
    }

    /// The Basic element a reference to `target` is written as: the type of
    /// the target's `@id` member.
    /// For a selection, every concrete descendant must be keyed by the same
    /// basic element.
    pub fn reference_token_element(&self, target: &str) -> Option<&ElementType> {
        let e = self.element(target)?;
        if e.kind != ElementKind::Selection {
            return self.element(e.id_member()?.element_name()?);
        }
        let mut found: Option<&ElementType> = None;
        for d in self.concrete_descendants(target) {
            let t = self.element(d.id_member()?.element_name()?)?;
            match found {
                Some(f) if f.name != t.name => return None,
                _ => found = Some(t),
            }
        }
        found
    }
}
