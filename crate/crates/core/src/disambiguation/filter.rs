use std::collections::{HashMap, VecDeque};

use super::rules::{CandidateView, Constraints, OpSource, Rule, Side};
use crate::grammar::{Binding, Grammar, Origin, Symbol};
use crate::lexer::TokenGraph;
use crate::parser::{Child, Derivation, ForestNode, NodeId, ParseForest};

const NONE: u32 = u32::MAX;

/// What a parent needs to know about a subtree to apply the rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Shape {
    /// Operator at the top of the subtree, seen through pass-through
    /// selections.
    op: u32,
    /// Concrete element the subtree stands for, tracked for operator slots.
    concrete: u32,
    /// Composition elements whose trailing type starts the subtree.
    head: u64,
    /// Composition elements ending the subtree without / with their
    /// trailing member.
    open: u64,
    closed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VChild {
    Node(NodeId, usize),
    Token(usize),
}

struct Variant {
    shape: Shape,
    derivations: Vec<(usize, Vec<VChild>)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("over-constrained: every interpretation is rejected (last rule applied: {})", rule.map_or("none".to_string(), |r| r.to_string()))]
pub struct OverConstrained {
    pub rule: Option<Rule>,
}

struct Filter<'a> {
    forest: &'a ParseForest,
    grammar: &'a Grammar,
    graph: &'a TokenGraph,
    c: &'a Constraints,
    text_end: Vec<usize>,
    token_ok: HashMap<usize, bool>,
    last_rule: Option<Rule>,
}

impl<'a> Filter<'a> {
    fn reject(&mut self, rule: Rule) {
        self.last_rule = Some(rule);
    }

    fn child_text_end(&self, child: &Child) -> usize {
        match child {
            Child::Token(t) => self.graph.tokens[*t].end,
            Child::Node(m) => self.text_end[*m],
        }
    }

    fn child_start(&self, child: &Child) -> usize {
        match child {
            Child::Token(t) => self.graph.tokens[*t].start,
            Child::Node(m) => self.forest.nodes[*m].start,
        }
    }

    fn non_empty(&self, child: &Child) -> bool {
        match child {
            Child::Token(_) => true,
            Child::Node(m) => self.forest.nodes[*m].start < self.forest.nodes[*m].end,
        }
    }

    fn token_allowed(&mut self, t: usize) -> bool {
        if let Some(&ok) = self.token_ok.get(&t) {
            return ok;
        }
        let tok = self.graph.tokens[t];
        let ok = match self.grammar.terminals[tok.class].element {
            Some(e) if self.c.hooked_tokens[e] => {
                let name = &self.c.element_names[e];
                let text = self.graph.text(&tok);
                let view = CandidateView { element: name, text, span: (tok.start, tok.end), fields: Vec::new() };
                self.hook_for(e).is_none_or(|h| h(&view))
            }
            _ => true,
        };
        self.token_ok.insert(t, ok);
        ok
    }

    fn hook_for(&self, element: usize) -> Option<&super::rules::Hook> {
        let name = self.grammar_model_hook(element)?;
        self.c.hooks.get(name)
    }

    fn grammar_model_hook(&self, element: usize) -> Option<&'a str> {
        self.c.hook_names.get(element).and_then(|h| h.as_deref())
    }

    fn derivation_allowed(&self, node: &ForestNode, d: &Derivation) -> bool {
        let info = self.c.info(d.production);
        let Some(e) = info.hooked else { return true };
        let Some(hook) = self.hook_for(e) else { return true };
        let input = self.graph.input.as_str();
        let end = d
            .children
            .iter()
            .rev()
            .find(|c| self.non_empty(c))
            .map_or(node.start, |c| self.child_text_end(c));
        let p = self.grammar.production(d.production);
        let fields = p
            .bindings
            .iter()
            .zip(&d.children)
            .filter_map(|(b, c)| match b {
                Binding::Field(f) => Some((f.as_str(), &input[self.child_start(c)..self.child_text_end(c).max(self.child_start(c))])),
                _ => None,
            })
            .collect();
        let view = CandidateView {
            element: &self.c.element_names[e],
            text: &input[node.start..end],
            span: (node.start, end),
            fields,
        };
        hook(&view)
    }

    fn token_shape(&self, t: usize) -> Shape {
        let element = self.grammar.terminals[self.graph.tokens[t].class].element;
        Shape {
            op: NONE,
            concrete: element.map_or(NONE, |e| e as u32),
            head: self.c.head_bits(element),
            open: 0,
            closed: 0,
        }
    }

    /// Checks one choice of child variants; returns the resulting shape.
    fn combine(&mut self, node: &ForestNode, d: &Derivation, shapes: &[Shape]) -> Option<Shape> {
        let c = self.c;
        let info = c.info(d.production);
        let p = self.grammar.production(d.production);
        let parent_op = match info.op {
            Some(OpSource::Element(e)) => e as u32,
            Some(OpSource::Slot(i)) => shapes[i].concrete,
            None => NONE,
        };
        if parent_op != NONE && (c.rules.priority || c.rules.associativity) {
            let both = info.left.is_some() && info.left == info.right;
            for (slot, side) in [(info.left, Side::Left), (info.right, Side::Right)] {
                let Some(i) = slot else { continue };
                let side = if both { Side::Both } else { side };
                let child = Some(shapes[i].op as usize).filter(|&o| o as u32 != NONE);
                if let Err(rule) = c.admits(child, parent_op as usize, side) {
                    self.reject(rule);
                    return None;
                }
            }
        }
        let present: Vec<usize> = (0..d.children.len()).filter(|&i| self.non_empty(&d.children[i])).collect();
        if c.rules.composition && !c.compositions.is_empty() {
            let eager = c.eager_mask();
            for w in present.windows(2) {
                if shapes[w[0]].open & shapes[w[1]].head & eager != 0 {
                    self.reject(Rule::Composition);
                    return None;
                }
            }
            if let (Some((bit, false)), Some(&last)) = (info.composition, present.last()) {
                if !c.is_eager(bit) && shapes[last].closed & (1 << bit) != 0 {
                    self.reject(Rule::Composition);
                    return None;
                }
            }
        }
        let op = if parent_op != NONE {
            parent_op
        } else if info.pass_through {
            info.sub_index.map_or(NONE, |i| shapes[i].op)
        } else {
            NONE
        };
        let symbol = Symbol::Nt(node.symbol);
        let concrete = if !c.tracks_concrete(symbol) {
            NONE
        } else if let Some(i) = info.sub_index {
            shapes[i].concrete
        } else if let Origin::Composite { element, .. } = p.origin {
            element as u32
        } else {
            NONE
        };
        let mut head = c.head_bits(self.grammar.symbol_element(symbol));
        let (mut open, mut closed) = (0, 0);
        if let Some(&f) = present.first() {
            head |= shapes[f].head;
        }
        if let Some(&l) = present.last() {
            open = shapes[l].open;
            closed = shapes[l].closed;
        }
        match info.composition {
            Some((bit, true)) => closed |= 1 << bit,
            Some((bit, false)) => open |= 1 << bit,
            None => {}
        }
        Some(Shape { op, concrete, head, open, closed })
    }
}

/// Removes every tree that violates an enabled rule. The result contains
/// exactly the surviving trees; nodes whose subtrees differ in a way the
/// rules can observe are split into separately tagged nodes.
pub fn filter_forest(
    forest: &ParseForest,
    grammar: &Grammar,
    graph: &TokenGraph,
    constraints: &Constraints,
) -> Result<ParseForest, OverConstrained> {
    let order = forest.post_order();
    let mut f = Filter {
        forest,
        grammar,
        graph,
        c: constraints,
        text_end: vec![0; forest.nodes.len()],
        token_ok: HashMap::new(),
        last_rule: None,
    };
    for &n in &order {
        let node = &forest.nodes[n];
        let end = node.derivations.first().and_then(|d| {
            d.children.iter().rev().find(|c| f.non_empty(c)).map(|c| f.child_text_end(c))
        });
        f.text_end[n] = end.unwrap_or(node.start);
    }

    let mut variants: Vec<Vec<Variant>> = (0..forest.nodes.len()).map(|_| Vec::new()).collect();
    for &n in &order {
        let node = &forest.nodes[n];
        let mut out: Vec<Variant> = Vec::new();
        for d in &node.derivations {
            if constraints.rules.custom && !f.derivation_allowed(node, d) {
                f.reject(Rule::Custom);
                continue;
            }
            let mut options: Vec<usize> = Vec::with_capacity(d.children.len());
            let mut dead = false;
            for c in &d.children {
                let k = match c {
                    Child::Node(m) => variants[*m].len(),
                    Child::Token(t) => usize::from(!constraints.rules.custom || f.token_allowed(*t)),
                };
                if k == 0 {
                    dead = true;
                    if matches!(c, Child::Token(_)) {
                        f.reject(Rule::Custom);
                    }
                    break;
                }
                options.push(k);
            }
            if dead {
                continue;
            }
            let mut pick = vec![0usize; options.len()];
            let mut shapes = Vec::with_capacity(options.len());
            loop {
                shapes.clear();
                for (c, &v) in d.children.iter().zip(&pick) {
                    shapes.push(match c {
                        Child::Node(m) => variants[*m][v].shape,
                        Child::Token(t) => f.token_shape(*t),
                    });
                }
                if let Some(shape) = f.combine(node, d, &shapes) {
                    let children = d
                        .children
                        .iter()
                        .zip(&pick)
                        .map(|(c, &v)| match c {
                            Child::Node(m) => VChild::Node(*m, v),
                            Child::Token(t) => VChild::Token(*t),
                        })
                        .collect();
                    match out.iter_mut().find(|x| x.shape == shape) {
                        Some(x) => x.derivations.push((d.production, children)),
                        None => out.push(Variant { shape, derivations: vec![(d.production, children)] }),
                    }
                }
                // odometer step
                let mut k = pick.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    pick[k] += 1;
                    if pick[k] < options[k] {
                        break;
                    }
                    pick[k] = 0;
                    if k == 0 {
                        k = usize::MAX;
                        break;
                    }
                }
                if k == usize::MAX || pick.is_empty() {
                    break;
                }
            }
        }
        variants[n] = out;
    }

    let root = forest.root;
    if variants[root].is_empty() {
        return Err(OverConstrained { rule: f.last_rule });
    }

    let mut nodes: Vec<ForestNode> = Vec::new();
    let mut ids: HashMap<(NodeId, usize), NodeId> = HashMap::new();
    let mut queue: VecDeque<(NodeId, Vec<(NodeId, usize)>)> = VecDeque::new();
    let rn = &forest.nodes[root];
    nodes.push(ForestNode { symbol: rn.symbol, tag: 0, start: rn.start, end: rn.end, derivations: Vec::new() });
    queue.push_back((0, (0..variants[root].len()).map(|v| (root, v)).collect()));
    while let Some((new_id, sources)) = queue.pop_front() {
        let mut derivations = Vec::new();
        for (old, v) in sources {
            for (production, children) in &variants[old][v].derivations {
                let children = children
                    .iter()
                    .map(|c| match *c {
                        VChild::Token(t) => Child::Token(t),
                        VChild::Node(m, w) => {
                            let id = *ids.entry((m, w)).or_insert_with(|| {
                                let src = &forest.nodes[m];
                                nodes.push(ForestNode {
                                    symbol: src.symbol,
                                    tag: w as u32,
                                    start: src.start,
                                    end: src.end,
                                    derivations: Vec::new(),
                                });
                                queue.push_back((nodes.len() - 1, vec![(m, w)]));
                                nodes.len() - 1
                            });
                            Child::Node(id)
                        }
                    })
                    .collect();
                derivations.push(Derivation { production: *production, children });
            }
        }
        nodes[new_id].derivations = derivations;
    }
    crate::parser::sort_derivations(&mut nodes, graph);
    Ok(ParseForest { nodes, root: 0 })
}
