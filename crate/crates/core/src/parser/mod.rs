//! Earley parsing over token graphs into shared packed parse forests.

mod earley;
mod trees;

use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::{Grammar, NtId, ProdId};
use crate::lexer::TokenGraph;

pub use earley::parse;
pub use trees::{ParseTree, TreeList, TreeNode};
pub(crate) use earley::sort_derivations;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Child {
    Node(NodeId),
    /// Index into [`TokenGraph::tokens`].
    Token(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub production: ProdId,
    pub children: Vec<Child>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestNode {
    pub symbol: NtId,
    /// Distinguishes nodes sharing `(symbol, start, end)`: the prediction
    /// context in guided parses, the shape class after filtering.
    pub tag: u32,
    /// Chart offsets: `end` is the start of whatever follows.
    pub start: usize,
    pub end: usize,
    pub derivations: Vec<Derivation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseForest {
    pub nodes: Vec<ForestNode>,
    pub root: NodeId,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {}", describe(.expected, .found))]
pub struct SyntaxError {
    pub offset: usize,
    /// Display names of the terminals that could continue the input.
    pub expected: Vec<String>,
    pub found: Option<String>,
}

fn describe(expected: &[String], found: &Option<String>) -> String {
    let found = match found {
        Some(f) => format!("found {f:?}"),
        None => "found end of input".to_string(),
    };
    if expected.is_empty() {
        format!("unexpected input, {found}")
    } else {
        format!("expected one of {}, {found}", expected.join(", "))
    }
}

impl ParseForest {
    pub fn node(&self, id: NodeId) -> &ForestNode {
        &self.nodes[id]
    }

    /// Nodes reachable from the root, children before parents.
    pub fn post_order(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut state = vec![0u8; self.nodes.len()];
        let mut stack = vec![(self.root, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                if state[n] != 2 {
                    state[n] = 2;
                    order.push(n);
                }
                continue;
            }
            if state[n] != 0 {
                continue;
            }
            state[n] = 1;
            stack.push((n, true));
            for d in &self.nodes[n].derivations {
                for c in &d.children {
                    if let Child::Node(m) = c {
                        if state[*m] == 0 {
                            stack.push((*m, false));
                        }
                    }
                }
            }
        }
        order
    }

    /// Number of distinct trees, saturating at `u128::MAX`.
    pub fn tree_count(&self) -> u128 {
        let mut count = vec![0u128; self.nodes.len()];
        for n in self.post_order() {
            let mut total = 0u128;
            for d in &self.nodes[n].derivations {
                let mut product = 1u128;
                for c in &d.children {
                    if let Child::Node(m) = c {
                        product = product.saturating_mul(count[*m]);
                    }
                }
                total = total.saturating_add(product);
            }
            count[n] = total;
        }
        count[self.root]
    }

    pub fn derivation_count(&self) -> usize {
        self.nodes.iter().map(|n| n.derivations.len()).sum()
    }

    /// One line per node: `<Symbol>[start,end) derivations=k`.
    pub fn dump(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "n{i} <{}>[{},{}) derivations={}",
                grammar.nonterminals[n.symbol].name,
                n.start,
                n.end,
                n.derivations.len()
            );
        }
        out
    }

    /// Exact source span of a node: first token start to last token end.
    pub fn text_span(&self, id: NodeId, tokens: &TokenGraph) -> (usize, usize) {
        let first = self.edge_token(id, true);
        let last = self.edge_token(id, false);
        match (first, last) {
            (Some(a), Some(b)) => (tokens.tokens[a].start, tokens.tokens[b].end),
            _ => (self.nodes[id].start, self.nodes[id].start),
        }
    }

    fn edge_token(&self, id: NodeId, first: bool) -> Option<usize> {
        let mut cur = id;
        loop {
            let node = &self.nodes[cur];
            let d = node.derivations.first()?;
            let mut children: Box<dyn Iterator<Item = &Child>> =
                if first { Box::new(d.children.iter()) } else { Box::new(d.children.iter().rev()) };
            let next = children.find(|c| match c {
                Child::Token(_) => true,
                Child::Node(m) => self.nodes[*m].start < self.nodes[*m].end,
            })?;
            match next {
                Child::Token(t) => return Some(*t),
                Child::Node(m) => cur = *m,
            }
        }
    }
}
