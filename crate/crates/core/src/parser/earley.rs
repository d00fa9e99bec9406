use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use super::{Child, Derivation, ForestNode, ParseForest, SyntaxError};
use crate::disambiguation::{Constraints, OpSource, Side};
use crate::grammar::{Grammar, Symbol};
use crate::lexer::TokenGraph;
use crate::model::ElementId;

const NONE: u32 = u32::MAX;

/// Prediction context used by guided parsing: which operand slot the
/// predicted symbol fills and which operator it must yield.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
struct Context {
    operand: Option<(ElementId, Side)>,
    require: Option<ElementId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key {
    prod: u32,
    dot: u32,
    origin: u32,
    ctx: u32,
    op: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum LinkChild {
    /// Completed nonterminal ending where the linking item lives.
    Node { nt: u32, ctx: u32, start: u32 },
    Token(u32),
}

#[derive(Debug, Clone, Copy)]
struct Link {
    prev: u32,
    child: LinkChild,
}

struct Item {
    key: Key,
    set: u32,
    links: Vec<Link>,
}

#[derive(Default)]
struct EarleySet {
    items: Vec<u32>,
    index: HashMap<Key, u32>,
    waiting: HashMap<(u32, u32), Vec<u32>>,
    predicted: HashSet<(u32, u32)>,
    propagated: HashSet<(u32, u32, u32)>,
    empty_done: HashSet<(u32, u32)>,
    completed: HashMap<(u32, u32, u32), Vec<u32>>,
    scanning: Vec<u32>,
}

struct Chart<'a> {
    grammar: &'a Grammar,
    guide: Option<&'a Constraints>,
    contexts: Vec<Context>,
    context_ids: HashMap<Context, u32>,
    items: Vec<Item>,
    sets: Vec<EarleySet>,
}

impl<'a> Chart<'a> {
    fn context(&mut self, c: Context) -> u32 {
        if let Some(&id) = self.context_ids.get(&c) {
            return id;
        }
        let id = self.contexts.len() as u32;
        self.contexts.push(c);
        self.context_ids.insert(c, id);
        id
    }

    /// Operator specializations of production `p` predicted under `ctx`.
    fn choices(&self, p: usize, ctx: u32) -> Vec<u32> {
        let Some(guide) = self.guide else { return vec![NONE] };
        let info = guide.info(p);
        let c = self.contexts[ctx as usize];
        if let (Some(req), Some(sub)) = (c.require, info.sub) {
            if !guide.is_subtype(req, sub) {
                return Vec::new();
            }
        }
        let ops: Vec<ElementId> = match info.op {
            None => return vec![NONE],
            Some(OpSource::Element(e)) => vec![e],
            Some(OpSource::Slot(_)) => info.ops.clone(),
        };
        ops.into_iter()
            .filter(|&o| match c.operand {
                Some((parent, side)) => guide.admits(Some(o), parent, side).is_ok(),
                None => true,
            })
            .map(|o| o as u32)
            .collect()
    }

    fn child_context(&mut self, key: Key, index: usize) -> u32 {
        let Some(guide) = self.guide else { return 0 };
        let info = guide.info(key.prod as usize);
        let c = self.contexts[key.ctx as usize];
        if info.sub_index == Some(index) {
            if info.pass_through {
                return key.ctx;
            }
            return self.context(Context { operand: None, require: c.require });
        }
        if key.op == NONE {
            return 0;
        }
        let op = key.op as ElementId;
        let side = match (info.left == Some(index), info.right == Some(index)) {
            (true, true) => Some(Side::Both),
            (true, false) => Some(Side::Left),
            (false, true) => Some(Side::Right),
            (false, false) => None,
        };
        if let Some(side) = side {
            return self.context(Context { operand: Some((op, side)), require: None });
        }
        if info.op == Some(OpSource::Slot(index)) {
            return self.context(Context { operand: None, require: Some(op) });
        }
        0
    }

    fn add(&mut self, set: usize, key: Key) -> (u32, bool) {
        if let Some(&id) = self.sets[set].index.get(&key) {
            return (id, false);
        }
        let id = self.items.len() as u32;
        self.items.push(Item { key, set: set as u32, links: Vec::new() });
        self.sets[set].index.insert(key, id);
        self.sets[set].items.push(id);
        (id, true)
    }

    fn advance(&mut self, from: u32, child: LinkChild, target: usize) {
        let mut key = self.items[from as usize].key;
        key.dot += 1;
        let (id, _) = self.add(target, key);
        self.items[id as usize].links.push(Link { prev: from, child });
    }

    fn predict(&mut self, set: usize, nt: u32, ctx: u32) {
        let grammar = self.grammar;
        for &p in grammar.productions_of(nt as usize) {
            for op in self.choices(p, ctx) {
                self.add(set, Key { prod: p as u32, dot: 0, origin: set as u32, ctx, op });
            }
        }
    }

    fn close(&mut self, i: usize) {
        let grammar = self.grammar;
        let mut k = 0;
        while k < self.sets[i].items.len() {
            let id = self.sets[i].items[k];
            k += 1;
            let key = self.items[id as usize].key;
            let prod = grammar.production(key.prod as usize);
            if key.dot as usize == prod.rhs.len() {
                let nt = prod.lhs as u32;
                let entry = (nt, key.ctx, key.origin);
                self.sets[i].completed.entry(entry).or_default().push(id);
                if self.sets[i].propagated.insert(entry) {
                    if key.origin as usize == i {
                        self.sets[i].empty_done.insert((nt, key.ctx));
                    }
                    let waiters = self.sets[key.origin as usize]
                        .waiting
                        .get(&(nt, key.ctx))
                        .cloned()
                        .unwrap_or_default();
                    for w in waiters {
                        self.advance(w, LinkChild::Node { nt, ctx: key.ctx, start: key.origin }, i);
                    }
                }
                continue;
            }
            match prod.rhs[key.dot as usize] {
                Symbol::T(_) => self.sets[i].scanning.push(id),
                Symbol::Nt(b) => {
                    let b = b as u32;
                    let c = self.child_context(key, key.dot as usize);
                    self.sets[i].waiting.entry((b, c)).or_default().push(id);
                    if self.sets[i].predicted.insert((b, c)) {
                        self.predict(i, b, c);
                    }
                    if self.sets[i].empty_done.contains(&(b, c)) {
                        self.advance(id, LinkChild::Node { nt: b, ctx: c, start: i as u32 }, i);
                    }
                }
            }
        }
    }

    /// All child sequences of one completed item.
    fn derivations_of(&self, item: u32, out: &mut Vec<Vec<(LinkChild, u32)>>) {
        // (item, children collected so far in reverse, each with its end set)
        let mut stack: Vec<(u32, Vec<(LinkChild, u32)>)> = vec![(item, Vec::new())];
        while let Some((id, acc)) = stack.pop() {
            let it = &self.items[id as usize];
            if it.key.dot == 0 {
                let mut children = acc;
                children.reverse();
                out.push(children);
                continue;
            }
            for link in &it.links {
                let mut next = acc.clone();
                next.push((link.child, it.set));
                stack.push((link.prev, next));
            }
        }
    }
}

fn syntax_error(chart: &Chart<'_>, graph: &TokenGraph, positions: &[usize]) -> SyntaxError {
    let furthest = (0..chart.sets.len())
        .rev()
        .find(|&i| !chart.sets[i].items.is_empty())
        .unwrap_or(0);
    let offset = positions.get(furthest).copied().unwrap_or(graph.origin);
    let mut expected = BTreeSet::new();
    for &id in &chart.sets[furthest].scanning {
        let key = chart.items[id as usize].key;
        let sym = chart.grammar.production(key.prod as usize).rhs[key.dot as usize];
        expected.insert(chart.grammar.symbol_name(sym));
    }
    let found = graph
        .starting_at(offset)
        .next()
        .map(|t| graph.text(&graph.tokens[t]).to_string());
    SyntaxError { offset, expected: expected.into_iter().collect(), found }
}

/// Parses a token graph into a forest holding every derivation of the
/// start symbol over the whole input.
///
/// With a `guide`, operator productions are specialized per concrete
/// operator and predictions that priority or associativity would reject
/// are never made; the result then needs only the post-filter to agree
/// with an unguided parse followed by filtering.
pub fn parse(grammar: &Grammar, graph: &TokenGraph, guide: Option<&Constraints>) -> Result<ParseForest, SyntaxError> {
    let positions = graph.positions();
    let set_of = |offset: usize| positions.binary_search(&offset).expect("token boundary");
    let mut chart = Chart {
        grammar,
        guide,
        contexts: Vec::new(),
        context_ids: HashMap::new(),
        items: Vec::new(),
        sets: (0..positions.len()).map(|_| EarleySet::default()).collect(),
    };
    let root_ctx = chart.context(Context::default());
    let start = grammar.start as u32;
    let first = set_of(graph.origin);
    chart.sets[first].predicted.insert((start, root_ctx));
    chart.predict(first, start, root_ctx);

    let mut by_class: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &at) in positions.iter().enumerate().skip(first) {
        chart.close(i);
        by_class.clear();
        for t in graph.starting_at(at) {
            by_class.entry(graph.tokens[t].class).or_default().push(t);
        }
        let scanning = std::mem::take(&mut chart.sets[i].scanning);
        for &id in &scanning {
            let key = chart.items[id as usize].key;
            let Symbol::T(class) = grammar.production(key.prod as usize).rhs[key.dot as usize] else {
                unreachable!("scanning items expect terminals")
            };
            for &t in by_class.get(&class).map(Vec::as_slice).unwrap_or(&[]) {
                let target = set_of(graph.tokens[t].next);
                chart.advance(id, LinkChild::Token(t as u32), target);
            }
        }
        chart.sets[i].scanning = scanning;
    }

    let last = set_of(graph.input.len().max(graph.origin));
    let accepted = graph.is_complete()
        && chart.sets[last].completed.contains_key(&(start, root_ctx, first as u32));
    if !accepted {
        return Err(syntax_error(&chart, graph, &positions));
    }

    let mut nodes: Vec<ForestNode> = Vec::new();
    let mut ids: HashMap<(u32, u32, u32, u32), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let root_key = (start, root_ctx, first as u32, last as u32);
    ids.insert(root_key, 0);
    nodes.push(ForestNode {
        symbol: start as usize,
        tag: root_ctx,
        start: positions[first],
        end: positions[last],
        derivations: Vec::new(),
    });
    queue.push_back(root_key);
    let mut paths = Vec::new();
    while let Some(key @ (nt, ctx, s, e)) = queue.pop_front() {
        let node = ids[&key];
        let mut derivations = Vec::new();
        for &item in &chart.sets[e as usize].completed[&(nt, ctx, s)] {
            paths.clear();
            chart.derivations_of(item, &mut paths);
            let production = chart.items[item as usize].key.prod as usize;
            for path in &paths {
                let mut children = Vec::with_capacity(path.len());
                for &(child, end) in path {
                    children.push(match child {
                        LinkChild::Token(t) => Child::Token(t as usize),
                        LinkChild::Node { nt, ctx, start } => {
                            let k = (nt, ctx, start, end);
                            let id = *ids.entry(k).or_insert_with(|| {
                                nodes.push(ForestNode {
                                    symbol: nt as usize,
                                    tag: ctx,
                                    start: positions[start as usize],
                                    end: positions[end as usize],
                                    derivations: Vec::new(),
                                });
                                queue.push_back(k);
                                nodes.len() - 1
                            });
                            Child::Node(id)
                        }
                    });
                }
                derivations.push(Derivation { production, children });
            }
        }
        nodes[node].derivations = derivations;
    }
    sort_derivations(&mut nodes, graph);
    Ok(ParseForest { nodes, root: 0 })
}

/// Orders derivations by production and then by child spans so that tree
/// enumeration does not depend on chart internals.
pub(crate) fn sort_derivations(nodes: &mut [ForestNode], graph: &TokenGraph) {
    let spans: Vec<(usize, usize, usize, u32)> =
        nodes.iter().map(|n| (n.start, n.end, n.symbol, n.tag)).collect();
    let key = |c: &Child| match c {
        Child::Node(m) => {
            let (s, e, sym, tag) = spans[*m];
            (s, e, 0, sym, tag)
        }
        Child::Token(t) => {
            let tok = &graph.tokens[*t];
            (tok.start, tok.end, 1, tok.class, 0)
        }
    };
    for n in nodes.iter_mut() {
        n.derivations.sort_by(|a, b| {
            a.production
                .cmp(&b.production)
                .then_with(|| a.children.iter().map(key).cmp(b.children.iter().map(key)))
        });
    }
}
