//! Concrete-syntax grammar derived from a model.
//!
//! Composite elements become one production per member ordering and
//! optional-member subset, selections become unit productions, repeated
//! members become synthesized list nonterminals and basic elements become
//! terminals. No factoring or left-recursion removal is applied.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{ElementId, ElementKind, MemberSpec, MemberType, Model, ReferenceKind};
use crate::pattern::{Pattern, PatternError};

pub type NtId = usize;
pub type TermId = usize;
pub type ProdId = usize;

/// Largest composite, in members, that `@freeorder` expands.
pub const MAX_FREE_ORDER_MEMBERS: usize = 6;
/// Largest `max - min` a bounded multiplicity is unrolled for.
pub const MAX_UNROLL: u32 = 64;
/// Largest number of optional members per composite.
pub const MAX_OPTIONAL_MEMBERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Nt(NtId),
    T(TermId),
}

#[derive(Debug, Clone)]
pub struct Terminal {
    /// Element name for basic elements, the regex source for literals.
    pub name: String,
    pub pattern: Pattern,
    /// Prefix, suffix, separator and inline-token literals.
    pub fixed: bool,
    pub element: Option<ElementId>,
}

/// What the items of a list nonterminal stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ItemKind {
    Element(ElementId),
    /// Identifier tokens naming an instance of the given element.
    Reference(ElementId),
    Token,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NonterminalKind {
    Element(ElementId),
    List { item: ItemKind, min: u32, max: Option<u32> },
}

#[derive(Debug, Clone)]
pub struct Nonterminal {
    pub name: String,
    pub kind: NonterminalKind,
}

/// Role of one right-hand-side symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// Value of the named member.
    Field(String),
    /// Prefix, suffix, separator or inline token: matched, never stored.
    Delimiter,
    /// The alternative chosen by a selection production.
    Sub,
    /// One list item.
    Item,
    /// Remainder of a recursive list.
    Rest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Composite {
        element: ElementId,
        /// Index of the member permutation (always 0 without `@freeorder`).
        permutation: usize,
        /// Optional members left out of this variant.
        absent: Vec<String>,
    },
    Selection {
        element: ElementId,
        sub: ElementId,
    },
    ListRecursive {
        list: NtId,
    },
    ListBase {
        list: NtId,
        count: u32,
    },
}

#[derive(Debug, Clone)]
pub struct Production {
    pub id: ProdId,
    pub lhs: NtId,
    pub rhs: Vec<Symbol>,
    pub origin: Origin,
    /// Parallel to `rhs`.
    pub bindings: Vec<Binding>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("element `{element}`: @freeorder over {members} members exceeds the limit of {MAX_FREE_ORDER_MEMBERS}")]
    FreeOrderTooLarge { element: String, members: usize },
    #[error("element `{element}`: multiplicity of `{field}` spans more than {MAX_UNROLL} counts")]
    UnrollTooLarge { element: String, field: String },
    #[error("element `{element}` has more than {MAX_OPTIONAL_MEMBERS} optional members")]
    TooManyOptional { element: String },
    #[error("cyclic unit derivation through `{0}`")]
    CyclicUnit(String),
    #[error("start element `{0}` must be composite or abstract")]
    BasicStart(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub nonterminals: Vec<Nonterminal>,
    pub terminals: Vec<Terminal>,
    pub productions: Vec<Production>,
    pub start: NtId,
    pub skip: Pattern,
    by_lhs: Vec<Vec<ProdId>>,
    nullable: Vec<bool>,
    element_symbols: Vec<Symbol>,
}

impl Grammar {
    pub fn productions_of(&self, nt: NtId) -> &[ProdId] {
        &self.by_lhs[nt]
    }

    pub fn production(&self, id: ProdId) -> &Production {
        &self.productions[id]
    }

    pub fn is_nullable(&self, nt: NtId) -> bool {
        self.nullable[nt]
    }

    /// Symbol an element is written as: its terminal for basic elements,
    /// its nonterminal otherwise.
    pub fn element_symbol(&self, element: ElementId) -> Symbol {
        self.element_symbols[element]
    }

    /// Element a symbol stands for, if any.
    pub fn symbol_element(&self, symbol: Symbol) -> Option<ElementId> {
        match symbol {
            Symbol::T(t) => self.terminals[t].element,
            Symbol::Nt(n) => match self.nonterminals[n].kind {
                NonterminalKind::Element(e) => Some(e),
                NonterminalKind::List { .. } => None,
            },
        }
    }

    pub fn nt_by_name(&self, name: &str) -> Option<NtId> {
        self.nonterminals.iter().position(|n| n.name == name)
    }

    pub fn symbol_name(&self, symbol: Symbol) -> String {
        match symbol {
            Symbol::Nt(n) => format!("<{}>", self.nonterminals[n].name),
            Symbol::T(t) => {
                let term = &self.terminals[t];
                if term.fixed {
                    format!("\"{}\"", term.name)
                } else {
                    format!("<{}>", term.name)
                }
            }
        }
    }

    /// Terminals that occur in some production reachable from the start.
    pub fn reachable_terminals(&self) -> Vec<TermId> {
        let mut seen = vec![false; self.nonterminals.len()];
        let mut terms = vec![false; self.terminals.len()];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(nt) = stack.pop() {
            for &p in &self.by_lhs[nt] {
                for &s in &self.productions[p].rhs {
                    match s {
                        Symbol::T(t) => terms[t] = true,
                        Symbol::Nt(n) if !seen[n] => {
                            seen[n] = true;
                            stack.push(n);
                        }
                        Symbol::Nt(_) => {}
                    }
                }
            }
        }
        (0..self.terminals.len()).filter(|&t| terms[t]).collect()
    }

    pub fn production_line(&self, p: &Production) -> String {
        let mut line = format!("<{}> ::=", self.nonterminals[p.lhs].name);
        if p.rhs.is_empty() {
            line.push_str(" ε");
        }
        for &s in &p.rhs {
            line.push(' ');
            line.push_str(&self.symbol_name(s));
        }
        line
    }

    /// One production per line, ordered by left-hand side name and then by
    /// generation order.
    pub fn dump(&self) -> String {
        let mut order: Vec<&Production> = self.productions.iter().collect();
        order.sort_by(|a, b| {
            self.nonterminals[a.lhs]
                .name
                .cmp(&self.nonterminals[b.lhs].name)
                .then(a.id.cmp(&b.id))
        });
        let mut out = String::new();
        for p in order {
            let _ = writeln!(out, "{}", self.production_line(p));
        }
        out
    }
}

struct Generator<'m> {
    model: &'m Model,
    nonterminals: Vec<Nonterminal>,
    terminals: Vec<Terminal>,
    literals: HashMap<String, TermId>,
    productions: Vec<Production>,
    element_symbols: Vec<Symbol>,
    lists: HashMap<(ItemKind, u32, Option<u32>, Vec<String>), NtId>,
}

impl<'m> Generator<'m> {
    fn literal(&mut self, regex: &str) -> Result<TermId, GrammarError> {
        if let Some(&t) = self.literals.get(regex) {
            return Ok(t);
        }
        let t = self.terminals.len();
        self.terminals.push(Terminal {
            name: regex.to_string(),
            pattern: Pattern::new(regex)?,
            fixed: true,
            element: None,
        });
        self.literals.insert(regex.to_string(), t);
        Ok(t)
    }

    fn push(&mut self, lhs: NtId, parts: Vec<(Symbol, Binding)>, origin: Origin) {
        let (rhs, bindings) = parts.into_iter().unzip();
        let id = self.productions.len();
        self.productions.push(Production { id, lhs, rhs, origin, bindings });
    }

    fn delimiters(&mut self, regexes: &[String], out: &mut Vec<(Symbol, Binding)>) -> Result<(), GrammarError> {
        for r in regexes {
            let t = self.literal(r)?;
            out.push((Symbol::T(t), Binding::Delimiter));
        }
        Ok(())
    }

    /// Symbols for one occurrence of `element`: basic elements carry their
    /// own delimiters inline.
    fn occurrence(&mut self, element: ElementId, binding: Binding) -> Result<Vec<(Symbol, Binding)>, GrammarError> {
        let e = &self.model.elements[element];
        let mut out = Vec::new();
        if e.kind == ElementKind::Basic {
            let (pre, suf) = (e.delimiters.prefixes.clone(), e.delimiters.suffixes.clone());
            self.delimiters(&pre, &mut out)?;
            out.push((self.element_symbols[element], binding));
            self.delimiters(&suf, &mut out)?;
        } else {
            out.push((self.element_symbols[element], binding));
        }
        Ok(out)
    }

    fn item(&mut self, kind: ItemKind) -> Result<Vec<(Symbol, Binding)>, GrammarError> {
        match kind {
            ItemKind::Element(e) => self.occurrence(e, Binding::Item),
            ItemKind::Reference(target) => {
                let model = self.model;
                let id = model
                    .reference_token_element(&model.elements[target].name)
                    .expect("validated model");
                self.occurrence(model.id_of(&id.name).expect("declared"), Binding::Item)
            }
            ItemKind::Token => unreachable!("token items are expanded by the caller"),
        }
    }

    fn item_kind(&self, m: &MemberSpec) -> ItemKind {
        match &m.target {
            MemberType::Token(_) => ItemKind::Token,
            MemberType::Element(t) => {
                let target = self.model.id_of(t).expect("validated model");
                if m.reference == ReferenceKind::Reference {
                    ItemKind::Reference(target)
                } else {
                    ItemKind::Element(target)
                }
            }
        }
    }

    fn list_name(&self, m: &MemberSpec) -> String {
        let base = match &m.target {
            MemberType::Element(t) => t.clone(),
            MemberType::Token(_) => "Token".to_string(),
        };
        let taken = |n: &str| {
            self.nonterminals.iter().any(|x| x.name == n) || self.model.element(n).is_some()
        };
        let first = format!("{base}List");
        if !taken(&first) {
            return first;
        }
        (2..)
            .map(|i| format!("{base}List{i}"))
            .find(|n| !taken(n))
            .expect("unbounded search")
    }

    fn list(&mut self, owner: &str, m: &MemberSpec, min: u32, max: Option<u32>) -> Result<NtId, GrammarError> {
        let kind = self.item_kind(m);
        let key = (kind, min, max, m.separator.clone());
        if let Some(&nt) = self.lists.get(&key) {
            return Ok(nt);
        }
        if let Some(max) = max {
            if max - min > MAX_UNROLL {
                return Err(GrammarError::UnrollTooLarge { element: owner.to_string(), field: m.field.clone() });
            }
        }
        let nt = self.nonterminals.len();
        self.nonterminals.push(Nonterminal {
            name: self.list_name(m),
            kind: NonterminalKind::List { item: kind, min, max },
        });
        self.lists.insert(key, nt);

        let item = match &m.target {
            MemberType::Token(r) => vec![(Symbol::T(self.literal(r)?), Binding::Item)],
            MemberType::Element(_) => self.item(kind)?,
        };
        let mut sep = Vec::new();
        self.delimiters(&m.separator, &mut sep)?;
        let sequence = |count: u32| {
            let mut out = Vec::new();
            for i in 0..count {
                if i > 0 {
                    out.extend(sep.iter().cloned());
                }
                out.extend(item.iter().cloned());
            }
            out
        };
        match max {
            None => {
                let mut rec = item.clone();
                if min > 0 {
                    rec.extend(sep.iter().cloned());
                }
                rec.push((Symbol::Nt(nt), Binding::Rest));
                self.push(nt, rec, Origin::ListRecursive { list: nt });
                self.push(nt, sequence(min), Origin::ListBase { list: nt, count: min });
            }
            Some(max) => {
                for count in min..=max {
                    self.push(nt, sequence(count), Origin::ListBase { list: nt, count });
                }
            }
        }
        Ok(nt)
    }

    /// Symbols for one member slot.
    fn member(&mut self, owner: &str, m: &MemberSpec) -> Result<Vec<(Symbol, Binding)>, GrammarError> {
        let field = Binding::Field(m.field.clone());
        let b = m.bounds();
        if m.is_repeated() {
            // An unbounded list that may be empty but has a separator is
            // written as an optional non-empty list.
            let min = if b.max.is_none() && b.min == 0 && !m.separator.is_empty() { 1 } else { b.min };
            let nt = self.list(owner, m, min, b.max)?;
            return Ok(vec![(Symbol::Nt(nt), field)]);
        }
        match &m.target {
            MemberType::Token(r) => Ok(vec![(Symbol::T(self.literal(r)?), Binding::Delimiter)]),
            MemberType::Element(t) => {
                let target = self.model.id_of(t).expect("validated model");
                let shown = if m.reference == ReferenceKind::Reference {
                    let id = self.model.reference_token_element(t).expect("validated model");
                    self.model.id_of(&id.name).expect("validated model")
                } else {
                    target
                };
                self.occurrence(shown, field)
            }
        }
    }

    fn composite(&mut self, element: ElementId) -> Result<(), GrammarError> {
        let model = self.model;
        let e = &model.elements[element];
        let lhs = match self.element_symbols[element] {
            Symbol::Nt(n) => n,
            Symbol::T(_) => unreachable!(),
        };
        let ordered = e.ordered_members();
        let optional: Vec<&str> = ordered
            .iter()
            .filter(|m| {
                let b = m.bounds();
                (b.max == Some(1) && b.min == 0)
                    || (b.max.is_none() && b.min == 0 && !m.separator.is_empty())
            })
            .map(|m| m.field.as_str())
            .collect();
        if optional.len() > MAX_OPTIONAL_MEMBERS {
            return Err(GrammarError::TooManyOptional { element: e.name.clone() });
        }
        let orders = if e.evaluation.free_order {
            if ordered.len() > MAX_FREE_ORDER_MEMBERS {
                return Err(GrammarError::FreeOrderTooLarge { element: e.name.clone(), members: ordered.len() });
            }
            permutations(ordered.len())
        } else {
            vec![(0..ordered.len()).collect()]
        };
        let mut slots = Vec::new();
        for m in &ordered {
            slots.push(self.member(&e.name, m)?);
        }
        let (pre, suf) = (e.delimiters.prefixes.clone(), e.delimiters.suffixes.clone());
        for (permutation, order) in orders.iter().enumerate() {
            for mask in 0u32..(1 << optional.len()) {
                let absent: Vec<String> = optional
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, f)| f.to_string())
                    .collect();
                let mut parts = Vec::new();
                self.delimiters(&pre, &mut parts)?;
                for &i in order {
                    if !absent.iter().any(|f| *f == ordered[i].field) {
                        parts.extend(slots[i].iter().cloned());
                    }
                }
                self.delimiters(&suf, &mut parts)?;
                self.push(lhs, parts, Origin::Composite { element, permutation, absent });
            }
        }
        Ok(())
    }

    fn selection(&mut self, element: ElementId) -> Result<(), GrammarError> {
        let model = self.model;
        let e = &model.elements[element];
        let lhs = match self.element_symbols[element] {
            Symbol::Nt(n) => n,
            Symbol::T(_) => unreachable!(),
        };
        let (pre, suf) = (e.delimiters.prefixes.clone(), e.delimiters.suffixes.clone());
        let subs: Vec<ElementId> = model
            .subelements(&e.name)
            .map(|s| model.id_of(&s.name).expect("declared"))
            .collect();
        for sub in subs {
            let mut parts = Vec::new();
            self.delimiters(&pre, &mut parts)?;
            parts.extend(self.occurrence(sub, Binding::Sub)?);
            self.delimiters(&suf, &mut parts)?;
            self.push(lhs, parts, Origin::Selection { element, sub });
        }
        Ok(())
    }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("pivot exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
}

fn nullable_set(nonterminals: usize, productions: &[Production]) -> Vec<bool> {
    let mut nullable = vec![false; nonterminals];
    loop {
        let mut changed = false;
        for p in productions {
            if !nullable[p.lhs] && p.rhs.iter().all(|s| matches!(s, Symbol::Nt(n) if nullable[*n])) {
                nullable[p.lhs] = true;
                changed = true;
            }
        }
        if !changed {
            return nullable;
        }
    }
}

/// Finds `A =>+ A` derivations: an edge `A -> B` exists when some
/// production of `A` has `B` surrounded only by nullable symbols.
fn find_unit_cycle(nonterminals: usize, productions: &[Production], nullable: &[bool]) -> Option<NtId> {
    let is_nullable = |s: &Symbol| matches!(s, Symbol::Nt(n) if nullable[*n]);
    let mut edges = vec![Vec::new(); nonterminals];
    for p in productions {
        for (i, s) in p.rhs.iter().enumerate() {
            if let Symbol::Nt(b) = s {
                if p.rhs[..i].iter().all(is_nullable) && p.rhs[i + 1..].iter().all(is_nullable) {
                    edges[p.lhs].push(*b);
                }
            }
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; nonterminals];
    for root in 0..nonterminals {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        state[root] = 1;
        while let Some(&mut (n, ref mut next)) = stack.last_mut() {
            if let Some(&m) = edges[n].get(*next) {
                *next += 1;
                match state[m] {
                    0 => {
                        state[m] = 1;
                        stack.push((m, 0));
                    }
                    1 => return Some(m),
                    _ => {}
                }
            } else {
                state[n] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Derives the grammar of a validated model.
pub fn generate_grammar(model: &Model) -> Result<Grammar, GrammarError> {
    let start_element = model.start_element().expect("validated model");
    if start_element.kind == ElementKind::Basic {
        return Err(GrammarError::BasicStart(start_element.name.clone()));
    }
    let mut g = Generator {
        model,
        nonterminals: Vec::new(),
        terminals: Vec::new(),
        literals: HashMap::new(),
        productions: Vec::new(),
        element_symbols: Vec::new(),
        lists: HashMap::new(),
    };
    for (id, e) in model.elements.iter().enumerate() {
        let symbol = if e.kind == ElementKind::Basic {
            let regex = &e.pattern.as_ref().expect("validated model").regex;
            g.terminals.push(Terminal {
                name: e.name.clone(),
                pattern: Pattern::new(regex)?,
                fixed: false,
                element: Some(id),
            });
            Symbol::T(g.terminals.len() - 1)
        } else {
            g.nonterminals.push(Nonterminal { name: e.name.clone(), kind: NonterminalKind::Element(id) });
            Symbol::Nt(g.nonterminals.len() - 1)
        };
        g.element_symbols.push(symbol);
    }
    for (id, e) in model.elements.iter().enumerate() {
        match e.kind {
            ElementKind::Composite => g.composite(id)?,
            ElementKind::Selection => g.selection(id)?,
            ElementKind::Basic => {}
        }
    }
    let start = match g.element_symbols[model.id_of(&start_element.name).expect("declared")] {
        Symbol::Nt(n) => n,
        Symbol::T(_) => unreachable!(),
    };
    let n = g.nonterminals.len();
    let nullable = nullable_set(n, &g.productions);
    if let Some(nt) = find_unit_cycle(n, &g.productions, &nullable) {
        return Err(GrammarError::CyclicUnit(g.nonterminals[nt].name.clone()));
    }
    let mut by_lhs = vec![Vec::new(); n];
    for p in &g.productions {
        by_lhs[p.lhs].push(p.id);
    }
    let skip = Pattern::new(model.skip_pattern())?;
    Ok(Grammar {
        nonterminals: g.nonterminals,
        terminals: g.terminals,
        productions: g.productions,
        start,
        skip,
        by_lhs,
        nullable,
        element_symbols: g.element_symbols,
    })
}

/// Names of nonterminals with no production; used by tests.
pub fn unproductive_nonterminals(grammar: &Grammar) -> HashSet<String> {
    (0..grammar.nonterminals.len())
        .filter(|&n| grammar.productions_of(n).is_empty())
        .map(|n| grammar.nonterminals[n].name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::read_model;

    fn grammar(src: &str) -> Grammar {
        generate_grammar(&read_model(src).unwrap().model).unwrap()
    }

    #[test]
    fn permutations_are_lexicographic() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![0, 2, 1]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn single_member_composite() {
        let g = grammar("language T; element A { b : B; } basic element B @pattern(\"b\");");
        assert_eq!(g.dump(), "<A> ::= <B>\n");
    }

    #[test]
    fn optional_members_double_productions() {
        let g = grammar(
            "language T; element A { x : B @optional; y : B @optional; z : B; } basic element B @pattern(\"b\");",
        );
        assert_eq!(g.productions.len(), 4);
    }

    #[test]
    fn empty_list_without_separator_has_epsilon_base() {
        let g = grammar("language T; element A { xs : B @multiplicity(0,*); } basic element B @pattern(\"b\");");
        let dump = g.dump();
        assert!(dump.contains("<BList> ::= <B> <BList>"), "{dump}");
        assert!(dump.contains("<BList> ::= ε"), "{dump}");
    }

    #[test]
    fn bounded_multiplicity_unrolls() {
        let g = grammar(
            "language T; element A { xs : B @multiplicity(2,4) @separator(\",\"); } basic element B @pattern(\"b\");",
        );
        let list = g.nt_by_name("BList").unwrap();
        assert_eq!(g.productions_of(list).len(), 3);
        assert!(g.dump().contains("<BList> ::= <B> \",\" <B>\n"));
    }

    #[test]
    fn free_order_permutes() {
        let g = grammar(
            "language T; element A @freeorder { x : B; y : C; z : D; } \
             basic element B @pattern(\"b\"); basic element C @pattern(\"c\"); basic element D @pattern(\"d\");",
        );
        assert_eq!(g.productions.len(), 6);
    }

    #[test]
    fn unit_cycles_are_rejected() {
        let m = read_model(
            "language T; abstract element S; element W : S { s : S; } basic element L : S @pattern(\"l\");",
        )
        .unwrap()
        .model;
        assert_eq!(generate_grammar(&m).unwrap_err(), GrammarError::CyclicUnit("S".into()));
    }

    #[test]
    fn reference_members_use_the_identifier_terminal() {
        let g = grammar(
            "language T; element Use { target : Def @reference; } \
             element Def { name : Name @id; } basic element Name @pattern(\"[a-z]+\") @value(text);",
        );
        assert!(g.dump().contains("<Use> ::= <Name>"));
    }

    #[test]
    fn generation_is_deterministic() {
        let src = "language T; element A { xs : B @multiplicity(0,*) @separator(\",\"); } basic element B @pattern(\"b\");";
        assert_eq!(grammar(src).dump(), grammar(src).dump());
        assert!(unproductive_nonterminals(&grammar(src)).is_empty());
    }
}
