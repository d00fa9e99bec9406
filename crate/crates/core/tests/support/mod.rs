//! Brute-force oracles. Nothing here touches the crate's lexer, parser or
//! disambiguation code: they only read the generated grammar as data.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap};

use modelcc::grammar::{Grammar, ProdId, Symbol, TermId};
use regex::Regex;

/// `(class, start, end, next)` like the pipeline's tokens.
pub type OracleToken = (TermId, usize, usize, usize);

fn exact(source: &str) -> Regex {
    Regex::new(&format!("^(?:{source})$")).expect("terminal pattern compiles")
}

/// Longest non-empty prefix of `text[at..]` matched by `re`, tried end by end.
fn longest(re: &Regex, text: &str, at: usize) -> Option<usize> {
    (at + 1..=text.len())
        .rev()
        .filter(|&e| text.is_char_boundary(e))
        .find(|&e| re.is_match(&text[at..e]))
}

/// Per-offset maximal-match enumeration: at every offset reachable from
/// the start, each class contributes its longest match; a literal class
/// hides a pattern class with the same span. Returns every candidate and
/// the subset lying on a path that covers the whole input.
pub fn maximal_matches(grammar: &Grammar, classes: &[TermId], input: &str) -> (Vec<OracleToken>, Vec<OracleToken>) {
    let skip = exact(grammar.skip.source());
    let res: Vec<(TermId, Regex, bool)> = classes
        .iter()
        .map(|&t| (t, exact(grammar.terminals[t].pattern.source()), grammar.terminals[t].fixed))
        .collect();
    let resume = |at: usize| longest(&skip, input, at).unwrap_or(at);
    let origin = resume(0);
    let mut all = Vec::new();
    let mut todo = BTreeSet::from([origin]);
    let mut done = BTreeSet::new();
    while let Some(at) = todo.pop_first() {
        if at >= input.len() || !done.insert(at) {
            continue;
        }
        let found: Vec<(TermId, usize, bool)> =
            res.iter().filter_map(|(t, re, fixed)| longest(re, input, at).map(|e| (*t, e, *fixed))).collect();
        for &(t, e, fixed) in &found {
            if !fixed && found.iter().any(|&(_, e2, f2)| f2 && e2 == e) {
                continue;
            }
            let next = resume(e);
            all.push((t, at, e, next));
            todo.insert(next);
        }
    }
    all.sort_by_key(|&(t, s, e, _)| (s, e, t));
    // a token is on a complete path when its start is reachable and the
    // end of input is reachable from its next offset
    let reaches_end = |from: usize| {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(p) = stack.pop() {
            if p == input.len() {
                return true;
            }
            if seen.insert(p) {
                stack.extend(all.iter().filter(|t| t.1 == p).map(|t| t.3));
            }
        }
        false
    };
    let mut reachable = BTreeSet::from([origin]);
    for t in &all {
        if reachable.contains(&t.1) {
            reachable.insert(t.3);
        }
    }
    let complete = all.iter().copied().filter(|t| reachable.contains(&t.1) && reaches_end(t.3)).collect();
    (all, complete)
}

/// Every way to split `input` into tokens along complete paths, each as a
/// list of class ids.
pub fn token_paths(tokens: &[OracleToken], origin: usize, len: usize) -> Vec<Vec<TermId>> {
    let mut out = Vec::new();
    let mut stack = vec![(origin, Vec::new())];
    while let Some((at, path)) = stack.pop() {
        if at == len {
            out.push(path.clone());
        }
        for t in tokens.iter().filter(|t| t.1 == at) {
            let mut p = path.clone();
            p.push(t.0);
            stack.push((t.3, p));
        }
    }
    out.sort();
    out
}

/// A tree over a token sequence: productions with children, or the index
/// of a token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OTree {
    Node(ProdId, Vec<OTree>),
    Leaf(usize),
}

impl OTree {
    /// Productions in pre-order; equals `ParseTree::productions` for the
    /// same tree.
    pub fn productions(&self) -> Vec<ProdId> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let OTree::Node(p, children) = t {
                out.push(*p);
                stack.extend(children.iter().rev());
            }
        }
        out
    }

    /// Token range `[start, end)` covered.
    pub fn span(&self, at: usize) -> (usize, usize) {
        match self {
            OTree::Leaf(i) => (*i, *i + 1),
            OTree::Node(_, children) => {
                let mut end = at;
                for c in children {
                    end = c.span(end).1;
                }
                (at, end)
            }
        }
    }
}

/// Fewest tokens each nonterminal derives; used to skip splits that
/// cannot complete.
fn min_lengths(grammar: &Grammar) -> Vec<usize> {
    let mut min = vec![usize::MAX; grammar.nonterminals.len()];
    loop {
        let mut changed = false;
        for p in &grammar.productions {
            let total = p.rhs.iter().try_fold(0usize, |acc, s| match s {
                Symbol::T(_) => Some(acc + 1),
                Symbol::Nt(n) => (min[*n] != usize::MAX).then(|| acc + min[*n]),
            });
            if let Some(t) = total {
                if t < min[p.lhs] {
                    min[p.lhs] = t;
                    changed = true;
                }
            }
        }
        if !changed {
            return min;
        }
    }
}

fn min_len(min: &[usize], s: &Symbol) -> usize {
    match s {
        Symbol::T(_) => 1,
        Symbol::Nt(n) => min[*n],
    }
}

/// Exhaustive span-splitting enumeration of every derivation of the start
/// symbol over `tokens`.
pub struct TreeOracle<'a> {
    grammar: &'a Grammar,
    tokens: &'a [TermId],
    memo: HashMap<(Symbol, usize, usize), Vec<OTree>>,
    active: BTreeSet<(Symbol, usize, usize)>,
    min: Vec<usize>,
}

impl<'a> TreeOracle<'a> {
    pub fn new(grammar: &'a Grammar, tokens: &'a [TermId]) -> Self {
        TreeOracle { grammar, tokens, memo: HashMap::new(), active: BTreeSet::new(), min: min_lengths(grammar) }
    }

    pub fn all_trees(&mut self) -> Vec<OTree> {
        let start = Symbol::Nt(self.grammar.start);
        self.trees(start, 0, self.tokens.len())
    }

    fn trees(&mut self, s: Symbol, i: usize, j: usize) -> Vec<OTree> {
        if let Some(v) = self.memo.get(&(s, i, j)) {
            return v.clone();
        }
        let out = match s {
            Symbol::T(t) => {
                if j == i + 1 && self.tokens[i] == t {
                    vec![OTree::Leaf(i)]
                } else {
                    Vec::new()
                }
            }
            Symbol::Nt(nt) => {
                // a symbol re-entered over the same span only arises through
                // cycles, which admit no finite derivation
                if !self.active.insert((s, i, j)) {
                    return Vec::new();
                }
                let mut out = Vec::new();
                for &p in self.grammar.productions_of(nt) {
                    let rhs = self.grammar.productions[p].rhs.clone();
                    for children in self.sequences(&rhs, i, j) {
                        out.push(OTree::Node(p, children));
                    }
                }
                self.active.remove(&(s, i, j));
                out
            }
        };
        self.memo.insert((s, i, j), out.clone());
        out
    }

    fn sequences(&mut self, rhs: &[Symbol], i: usize, j: usize) -> Vec<Vec<OTree>> {
        let Some((first, rest)) = rhs.split_first() else {
            return if i == j { vec![Vec::new()] } else { Vec::new() };
        };
        let mut out = Vec::new();
        let need: usize = rest.iter().map(|s| min_len(&self.min, s)).sum();
        if need == usize::MAX || i + min_len(&self.min, first) + need > j {
            return out;
        }
        for k in i + min_len(&self.min, first)..=j - need {
            let heads = self.trees(*first, i, k);
            if heads.is_empty() {
                continue;
            }
            let tails = self.sequences(rest, k, j);
            for h in &heads {
                for t in &tails {
                    let mut v = Vec::with_capacity(t.len() + 1);
                    v.push(h.clone());
                    v.extend(t.iter().cloned());
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Number of parse trees, counted by the same exhaustive splitting.
pub fn count_trees_bruteforce(grammar: &Grammar, tokens: &[TermId]) -> u128 {
    #[allow(clippy::too_many_arguments)]
    fn count(
        g: &Grammar,
        tokens: &[TermId],
        s: Symbol,
        i: usize,
        j: usize,
        memo: &mut HashMap<(Symbol, usize, usize), u128>,
        active: &mut BTreeSet<(Symbol, usize, usize)>,
        min: &[usize],
    ) -> u128 {
        if let Some(&c) = memo.get(&(s, i, j)) {
            return c;
        }
        let c = match s {
            Symbol::T(t) => u128::from(j == i + 1 && tokens[i] == t),
            Symbol::Nt(nt) => {
                if !active.insert((s, i, j)) {
                    return 0;
                }
                let mut total = 0;
                for &p in g.productions_of(nt) {
                    let rhs = &g.productions[p].rhs;
                    // ways[k] = derivations of rhs[..m] over tokens i..k
                    let mut ways = vec![0u128; j + 1];
                    ways[i] = 1;
                    if rhs.iter().any(|s| min_len(min, s) == usize::MAX) {
                        continue;
                    }
                    for (m, sym) in rhs.iter().enumerate() {
                        let need: usize = rhs[m + 1..].iter().map(|s| min_len(min, s)).sum();
                        let mut next = vec![0u128; j + 1];
                        for a in i..=j {
                            if ways[a] == 0 {
                                continue;
                            }
                            for b in a + min_len(min, sym)..=j.saturating_sub(need) {
                                let n = count(g, tokens, *sym, a, b, memo, active, min);
                                next[b] += ways[a] * n;
                            }
                        }
                        ways = next;
                    }
                    total += ways[j];
                }
                active.remove(&(s, i, j));
                total
            }
        };
        memo.insert((s, i, j), c);
        c
    }
    let mut memo = HashMap::new();
    let mut active = BTreeSet::new();
    let min = min_lengths(grammar);
    count(grammar, tokens, Symbol::Nt(grammar.start), 0, tokens.len(), &mut memo, &mut active, &min)
}

/// Terminal ids of a token sequence spelled by terminal names, e.g.
/// `["Literal", "\\+", "Literal"]`.
pub fn terminals(grammar: &Grammar, names: &[&str]) -> Vec<TermId> {
    names
        .iter()
        .map(|n| grammar.terminals.iter().position(|t| t.name == *n).unwrap_or_else(|| panic!("no terminal {n}")))
        .collect()
}

/// Shunting-yard evaluation of `+ - * /` with parentheses, standard
/// precedence and left associativity.
pub fn eval_conventional(expr: &str) -> f64 {
    #[derive(Clone, Copy, PartialEq)]
    enum Tok {
        Num(f64),
        Op(char),
        Open,
        Close,
    }
    let mut toks = Vec::new();
    let chars: Vec<char> = expr.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push(Tok::Num(s.parse().expect("number")));
            continue;
        }
        match c {
            '+' | '-' | '*' | '/' => toks.push(Tok::Op(c)),
            '(' => toks.push(Tok::Open),
            ')' => toks.push(Tok::Close),
            _ => {}
        }
        i += 1;
    }
    let prec = |op: char| if op == '+' || op == '-' { 1 } else { 2 };
    let apply = |out: &mut Vec<f64>, op: char| {
        let b = out.pop().expect("operand");
        let a = out.pop().expect("operand");
        out.push(match op {
            '+' => a + b,
            '-' => a - b,
            '*' => a * b,
            _ => a / b,
        });
    };
    let mut out: Vec<f64> = Vec::new();
    let mut ops: Vec<Tok> = Vec::new();
    for t in toks {
        match t {
            Tok::Num(n) => out.push(n),
            Tok::Op(o) => {
                while let Some(&Tok::Op(top)) = ops.last() {
                    if prec(top) >= prec(o) {
                        apply(&mut out, top);
                        ops.pop();
                    } else {
                        break;
                    }
                }
                ops.push(t);
            }
            Tok::Open => ops.push(t),
            Tok::Close => {
                while let Some(top) = ops.pop() {
                    match top {
                        Tok::Op(o) => apply(&mut out, o),
                        _ => break,
                    }
                }
            }
        }
    }
    while let Some(top) = ops.pop() {
        if let Tok::Op(o) = top {
            apply(&mut out, o);
        }
    }
    out.pop().expect("value")
}

pub fn catalan(n: u64) -> u128 {
    // C(n) = (2n)! / ((n+1)! n!), built up multiplicatively
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

/// Structural JSON equality with numbers compared as doubles.
pub fn json_equal(a: &serde_json::Value, b: &serde_json::Value) -> bool {
    use serde_json::Value::*;
    match (a, b) {
        (Number(x), Number(y)) => x.as_f64() == y.as_f64(),
        (Array(x), Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| json_equal(p, q)),
        (Object(x), Object(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|((k1, v1), (k2, v2))| k1 == k2 && json_equal(v1, v2))
        }
        _ => a == b,
    }
}

/// Composite nodes of a tree: `(element, start token, end token, absent fields)`.
fn composites<'g>(grammar: &'g Grammar, tree: &OTree) -> Vec<(usize, usize, usize, &'g [String])> {
    use modelcc::grammar::Origin;
    let mut out = Vec::new();
    let mut stack = vec![(tree, 0usize)];
    while let Some((t, at)) = stack.pop() {
        let OTree::Node(p, children) = t else { continue };
        let (_, end) = t.span(at);
        if let Origin::Composite { element, absent, .. } = &grammar.productions[*p].origin {
            out.push((*element, at, end, absent.as_slice()));
        }
        let mut pos = at;
        for c in children {
            stack.push((c, pos));
            pos = c.span(pos).1;
        }
    }
    out
}

/// An optional trailing member and how it attaches.
pub struct CompositionRule {
    pub element: &'static str,
    pub field: &'static str,
    pub trailing: &'static str,
    pub eager: bool,
}

/// Eager: a composite missing its trailing member may not be followed
/// directly by a trailing-type node. Lazy: a composite missing it may not
/// end together with a nested one that has it.
pub fn violates_composition(grammar: &Grammar, model: &modelcc::Model, tree: &OTree, rule: &CompositionRule) -> bool {
    let c = model.id_of(rule.element).unwrap();
    let t = model.id_of(rule.trailing).unwrap();
    let nodes = composites(grammar, tree);
    let open = |n: &(usize, usize, usize, &[String])| n.0 == c && n.3.iter().any(|f| f == rule.field);
    nodes.iter().filter(|x| open(x)).any(|x| {
        if rule.eager {
            nodes.iter().any(|n| n.0 == t && n.1 == x.2)
        } else {
            nodes.iter().any(|y| y.0 == c && !open(y) && y.1 > x.1 && y.2 == x.2)
        }
    })
}

/// Leaf element reached by following single-child selection nodes.
fn leaf_element(grammar: &Grammar, tree: &OTree, tokens: &[TermId]) -> Option<usize> {
    match tree {
        OTree::Leaf(i) => grammar.terminals[tokens[*i]].element,
        OTree::Node(_, children) if children.len() == 1 => leaf_element(grammar, &children[0], tokens),
        _ => None,
    }
}

/// The operator of a binary expression reached through selections only.
fn top_operator(grammar: &Grammar, tree: &OTree, tokens: &[TermId], binary: usize) -> Option<usize> {
    use modelcc::grammar::Origin;
    let OTree::Node(p, children) = tree else { return None };
    match &grammar.productions[*p].origin {
        Origin::Selection { .. } if children.len() == 1 => top_operator(grammar, &children[0], tokens, binary),
        Origin::Composite { element, .. } if *element == binary => leaf_element(grammar, &children[1], tokens),
        _ => None,
    }
}

/// Priority (lower binds tighter) and left associativity for
/// `e1 op e2` binary expressions.
pub fn violates_arith(grammar: &Grammar, model: &modelcc::Model, tree: &OTree, tokens: &[TermId]) -> bool {
    use modelcc::grammar::Origin;
    let binary = model.id_of("BinaryExpression").unwrap();
    let prio = |e: usize| model.effective_priority(&model.elements[e].name).unwrap();
    let mut stack = vec![tree];
    while let Some(t) = stack.pop() {
        let OTree::Node(p, children) = t else { continue };
        if let Origin::Composite { element, .. } = &grammar.productions[*p].origin {
            if *element == binary {
                let op = prio(leaf_element(grammar, &children[1], tokens).unwrap());
                if let Some(l) = top_operator(grammar, &children[0], tokens, binary) {
                    if prio(l) > op {
                        return true;
                    }
                }
                if let Some(r) = top_operator(grammar, &children[2], tokens, binary) {
                    if prio(r) >= op {
                        return true;
                    }
                }
            }
        }
        stack.extend(children.iter());
    }
    false
}

pub mod harness;
pub mod json;
pub mod checks;
