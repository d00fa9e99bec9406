use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::grammar::{Binding, Grammar, Origin, ProdId, Symbol};
use crate::model::{Associativity, Composition, ElementId, ElementKind, Model, ReferenceKind};

/// The four rule families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    Priority,
    Associativity,
    Composition,
    Custom,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Priority => "priority",
            Rule::Associativity => "associativity",
            Rule::Composition => "composition",
            Rule::Custom => "custom constraint",
        })
    }
}

/// Which rule families are enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleSet {
    pub priority: bool,
    pub associativity: bool,
    pub composition: bool,
    pub custom: bool,
}

impl RuleSet {
    pub const ALL: RuleSet = RuleSet { priority: true, associativity: true, composition: true, custom: true };
    pub const NONE: RuleSet = RuleSet { priority: false, associativity: false, composition: false, custom: false };

    pub fn is_empty(&self) -> bool {
        *self == RuleSet::NONE
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet::ALL
    }
}

/// Which operand of an operator composite a child fills.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
    Both,
}

/// Where the operator of an operator composite comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpSource {
    /// The composite itself carries priority or associativity.
    Element(ElementId),
    /// The operator is the element bound at this right-hand-side index.
    Slot(usize),
}

/// Everything the rules need to know about one production.
#[derive(Debug, Clone, Default)]
pub struct ProdInfo {
    /// Undelimited selection unit production: the node is its child.
    pub pass_through: bool,
    /// Selection unit production: index of the alternative.
    pub sub_index: Option<usize>,
    pub sub: Option<ElementId>,
    pub op: Option<OpSource>,
    /// Operators a `Slot` may hold.
    pub ops: Vec<ElementId>,
    pub left: Option<usize>,
    pub right: Option<usize>,
    /// `(bit, trailing member present)` for composition elements.
    pub composition: Option<(u32, bool)>,
    /// Element whose derivations are subject to a custom hook.
    pub hooked: Option<ElementId>,
}

#[derive(Debug, Clone, Copy)]
pub struct CompositionRule {
    pub element: ElementId,
    pub trailing: ElementId,
    pub eager: bool,
}

/// A parse candidate as seen by a custom constraint hook.
#[derive(Debug, Clone)]
pub struct CandidateView<'a> {
    pub element: &'a str,
    pub text: &'a str,
    pub span: (usize, usize),
    /// Source text of each bound member, in right-hand-side order.
    pub fields: Vec<(&'a str, &'a str)>,
}

pub type Hook = Arc<dyn Fn(&CandidateView<'_>) -> bool + Send + Sync>;

/// Registry of custom constraint predicates by name.
#[derive(Clone, Default)]
pub struct Hooks {
    map: BTreeMap<String, Hook>,
}

impl Hooks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        hook: impl Fn(&CandidateView<'_>) -> bool + Send + Sync + 'static,
    ) -> &mut Self {
        self.map.insert(name.into(), Arc::new(hook));
        self
    }

    pub fn get(&self, name: &str) -> Option<&Hook> {
        self.map.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }
}

impl fmt::Debug for Hooks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.map.keys()).finish()
    }
}

/// Evaluation-order constraints of a model, tabulated against its grammar.
#[derive(Debug, Clone)]
pub struct Constraints {
    pub rules: RuleSet,
    pub prods: Vec<ProdInfo>,
    pub compositions: Vec<CompositionRule>,
    pub hooks: Hooks,
    pub element_names: Vec<String>,
    priority: Vec<Option<i64>>,
    associativity: Vec<Associativity>,
    comparable: Vec<Vec<bool>>,
    subtype: Vec<Vec<bool>>,
    op_slot_symbols: HashSet<Symbol>,
    /// Hooked basic elements, checked on every token.
    pub hooked_tokens: Vec<bool>,
    /// Hook name declared by each element.
    pub hook_names: Vec<Option<String>>,
}

/// How an element acts as an operator, if it does.
fn operator_source(model: &Model, element: ElementId) -> Option<Result<(), String>> {
    let e = &model.elements[element];
    if model.effective_priority(&e.name).is_some()
        || model.effective_associativity(&e.name) != Associativity::Unspecified
    {
        return Some(Ok(()));
    }
    let carries = |name: &str| {
        model.concrete_descendants(name).iter().any(|d| {
            model.effective_priority(&d.name).is_some()
                || model.effective_associativity(&d.name) != Associativity::Unspecified
        })
    };
    let slots: Vec<&str> = e
        .members
        .iter()
        .filter(|m| m.bounds() == crate::model::Multiplicity::ONE && m.reference == ReferenceKind::None)
        .filter_map(|m| m.element_name().filter(|t| carries(t)).map(|_| m.field.as_str()))
        .collect();
    match slots.as_slice() {
        [field] => Some(Err(field.to_string())),
        _ => None,
    }
}

impl Constraints {
    pub fn new(model: &Model, grammar: &Grammar, rules: RuleSet, hooks: Hooks) -> Self {
        let n = model.elements.len();
        let names: Vec<&str> = model.elements.iter().map(|e| e.name.as_str()).collect();
        let priority = names.iter().map(|e| model.effective_priority(e)).collect();
        let associativity = names.iter().map(|e| model.effective_associativity(e)).collect();
        let mut subtype = vec![vec![false; n]; n];
        let mut comparable = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                subtype[a][b] = model.is_subtype_of(names[a], names[b]);
                let ancestors_a: HashSet<&str> = model.ancestors(names[a]).iter().map(|x| x.name.as_str()).collect();
                comparable[a][b] = a == b
                    || model.ancestors(names[b]).iter().any(|x| ancestors_a.contains(x.name.as_str()));
            }
        }
        let compositions: Vec<CompositionRule> = model
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.evaluation.composition != Composition::Unspecified)
            .filter_map(|(i, e)| {
                let last = e.ordered_members().last().copied()?;
                Some(CompositionRule {
                    element: i,
                    trailing: model.id_of(last.element_name()?)?,
                    eager: e.evaluation.composition == Composition::Eager,
                })
            })
            .take(64)
            .collect();

        let mut op_slot_symbols = HashSet::new();
        let prods = grammar
            .productions
            .iter()
            .map(|p| {
                let mut info = ProdInfo::default();
                match &p.origin {
                    Origin::Selection { sub, .. } => {
                        let idx = p.bindings.iter().position(|b| *b == Binding::Sub);
                        info.sub_index = idx;
                        info.sub = Some(*sub);
                        info.pass_through = p.rhs.len() == 1;
                    }
                    Origin::Composite { element, absent, .. } => {
                        let e = &model.elements[*element];
                        if e.constraint.is_some() {
                            info.hooked = Some(*element);
                        }
                        if let Some(bit) = compositions.iter().position(|c| c.element == *element) {
                            let trailing = &e.ordered_members().last().expect("composite").field;
                            info.composition = Some((bit as u32, !absent.contains(trailing)));
                        }
                        match operator_source(model, *element) {
                            Some(Ok(())) => info.op = Some(OpSource::Element(*element)),
                            Some(Err(field)) => {
                                let idx = p
                                    .bindings
                                    .iter()
                                    .position(|b| *b == Binding::Field(field.clone()))
                                    .expect("mandatory member is present");
                                let target = e.member(&field).and_then(|m| m.element_name()).expect("element member");
                                info.ops = model
                                    .concrete_descendants(target)
                                    .iter()
                                    .map(|d| model.id_of(&d.name).expect("declared"))
                                    .collect();
                                op_slot_symbols.insert(p.rhs[idx]);
                                info.op = Some(OpSource::Slot(idx));
                            }
                            None => {}
                        }
                        if info.op.is_some() {
                            let operand = |i: usize| match &p.bindings[i] {
                                Binding::Field(f) => e.member(f).is_some_and(|m| {
                                    m.bounds() == crate::model::Multiplicity::ONE
                                        && m.reference == ReferenceKind::None
                                        && m.element_name().is_some_and(|t| model.is_subtype_of(&e.name, t))
                                }),
                                _ => false,
                            };
                            if !p.rhs.is_empty() {
                                info.left = Some(0).filter(|&i| operand(i));
                                info.right = Some(p.rhs.len() - 1).filter(|&i| operand(i));
                            }
                        }
                    }
                    Origin::ListRecursive { .. } | Origin::ListBase { .. } => {}
                }
                info
            })
            .collect();
        // Selections feeding an operator slot need their concrete operator
        // tracked all the way down.
        let mut frontier: Vec<Symbol> = op_slot_symbols.iter().copied().collect();
        while let Some(s) = frontier.pop() {
            if let Symbol::Nt(nt) = s {
                for &p in grammar.productions_of(nt) {
                    if let Origin::Selection { .. } = grammar.productions[p].origin {
                        for (sym, b) in grammar.productions[p].rhs.iter().zip(&grammar.productions[p].bindings) {
                            if *b == Binding::Sub && op_slot_symbols.insert(*sym) {
                                frontier.push(*sym);
                            }
                        }
                    }
                }
            }
        }
        let hooked_tokens = model
            .elements
            .iter()
            .map(|e| e.kind == ElementKind::Basic && e.constraint.is_some())
            .collect();
        Constraints {
            rules,
            prods,
            compositions,
            hooks,
            element_names: names.iter().map(|s| s.to_string()).collect(),
            priority,
            associativity,
            comparable,
            subtype,
            op_slot_symbols,
            hooked_tokens,
            hook_names: model.elements.iter().map(|e| e.constraint.clone()).collect(),
        }
    }

    pub fn is_subtype(&self, sub: ElementId, sup: ElementId) -> bool {
        self.subtype[sub][sup]
    }

    pub fn tracks_concrete(&self, symbol: Symbol) -> bool {
        self.op_slot_symbols.contains(&symbol)
    }

    pub fn info(&self, p: ProdId) -> &ProdInfo {
        &self.prods[p]
    }

    /// Whether a child whose top operator is `child` may fill operand
    /// `side` of operator `parent`; the violated rule otherwise.
    pub fn admits(&self, child: Option<ElementId>, parent: ElementId, side: Side) -> Result<(), Rule> {
        let Some(child) = child else { return Ok(()) };
        if !self.comparable[child][parent] {
            return Ok(());
        }
        let (pc, pp) = (self.priority[child], self.priority[parent]);
        let same_level = match (pc, pp) {
            (Some(a), Some(b)) => {
                if self.rules.priority && a > b {
                    return Err(Rule::Priority);
                }
                a == b
            }
            (None, None) => child == parent,
            _ => false,
        };
        if same_level && self.rules.associativity {
            let rejected = match self.associativity[parent] {
                Associativity::LeftToRight => side != Side::Left,
                Associativity::RightToLeft => side != Side::Right,
                Associativity::NonAssociative => true,
                Associativity::Unspecified => false,
            };
            if rejected {
                return Err(Rule::Associativity);
            }
        }
        Ok(())
    }

    /// Head bits for a node or token of this symbol.
    pub fn head_bits(&self, element: Option<ElementId>) -> u64 {
        let Some(e) = element else { return 0 };
        self.compositions
            .iter()
            .enumerate()
            .filter(|(_, c)| c.trailing == e)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    pub fn eager_mask(&self) -> u64 {
        self.compositions
            .iter()
            .enumerate()
            .filter(|(_, c)| c.eager)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    pub fn is_eager(&self, bit: u32) -> bool {
        self.compositions[bit as usize].eager
    }
}
