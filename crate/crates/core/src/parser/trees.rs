use std::fmt::Write as _;

use super::{Child, ParseForest};
use crate::grammar::{Grammar, NtId, ProdId};
use crate::lexer::TokenGraph;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreeNode {
    Inner {
        symbol: NtId,
        production: ProdId,
        start: usize,
        end: usize,
        children: Vec<usize>,
    },
    Leaf {
        token: usize,
    },
}

/// One parse tree, stored flat in pre-order; node 0 is the root and every
/// child index is greater than its parent's.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParseTree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone)]
pub struct TreeList {
    pub trees: Vec<ParseTree>,
    /// True when the limit cut the enumeration short.
    pub more: bool,
}

impl ParseTree {
    /// Bracketed rendering: `(Symbol child ...)` with tokens quoted.
    pub fn render(&self, grammar: &Grammar, tokens: &TokenGraph) -> String {
        let mut out = String::new();
        // (node, closing) pairs
        let mut stack = vec![(0usize, false)];
        while let Some((i, closing)) = stack.pop() {
            if closing {
                out.push(')');
                continue;
            }
            if !out.is_empty() && !out.ends_with('(') {
                out.push(' ');
            }
            match &self.nodes[i] {
                TreeNode::Leaf { token } => {
                    let _ = write!(out, "{:?}", tokens.text(&tokens.tokens[*token]));
                }
                TreeNode::Inner { symbol, children, .. } => {
                    let _ = write!(out, "({}", grammar.nonterminals[*symbol].name);
                    stack.push((i, true));
                    for &c in children.iter().rev() {
                        stack.push((c, false));
                    }
                }
            }
        }
        out
    }

    /// Productions in pre-order; identifies the tree's shape.
    pub fn productions(&self) -> Vec<ProdId> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Inner { production, .. } => Some(*production),
                TreeNode::Leaf { .. } => None,
            })
            .collect()
    }
}

impl ParseForest {
    /// Builds the tree selected by `prefix` (derivation indices in pre-order,
    /// missing entries meaning 0), returning the full choice vector and the
    /// number of alternatives at each choice point.
    fn expand(&self, prefix: &[u32]) -> (ParseTree, Vec<u32>, Vec<u32>) {
        let mut nodes = Vec::new();
        let mut choices = Vec::new();
        let mut counts = Vec::new();
        let mut stack: Vec<(Child, Option<usize>)> = vec![(Child::Node(self.root), None)];
        while let Some((child, parent)) = stack.pop() {
            let index = nodes.len();
            if let Some(p) = parent {
                if let TreeNode::Inner { children, .. } = &mut nodes[p] {
                    children.push(index);
                }
            }
            match child {
                Child::Token(token) => nodes.push(TreeNode::Leaf { token }),
                Child::Node(n) => {
                    let node = &self.nodes[n];
                    let k = choices.len();
                    let choice = prefix.get(k).copied().unwrap_or(0);
                    choices.push(choice);
                    counts.push(node.derivations.len() as u32);
                    let d = &node.derivations[choice as usize];
                    nodes.push(TreeNode::Inner {
                        symbol: node.symbol,
                        production: d.production,
                        start: node.start,
                        end: node.end,
                        children: Vec::with_capacity(d.children.len()),
                    });
                    for &c in d.children.iter().rev() {
                        stack.push((c, Some(index)));
                    }
                }
            }
        }
        (ParseTree { nodes }, choices, counts)
    }

    /// Up to `limit` distinct trees in lexicographic order of their
    /// pre-order derivation choices.
    pub fn enumerate_trees(&self, limit: usize) -> TreeList {
        let mut trees = Vec::new();
        if self.nodes[self.root].derivations.is_empty() {
            return TreeList { trees, more: false };
        }
        let mut prefix: Vec<u32> = Vec::new();
        loop {
            let (tree, choices, counts) = self.expand(&prefix);
            if trees.len() == limit {
                return TreeList { trees, more: true };
            }
            trees.push(tree);
            let Some(k) = (0..choices.len()).rev().find(|&k| choices[k] + 1 < counts[k]) else {
                return TreeList { trees, more: false };
            };
            prefix.clear();
            prefix.extend_from_slice(&choices[..k]);
            prefix.push(choices[k] + 1);
        }
    }

    /// The first tree in enumeration order.
    pub fn first_tree(&self) -> ParseTree {
        self.expand(&[]).0
    }
}
