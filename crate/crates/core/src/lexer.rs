//! Ambiguity-preserving tokenization.
//!
//! At every position reachable from the start of the input, each token
//! class contributes its longest match. Different classes may match
//! different lengths, so the result is a graph of alternative
//! tokenizations rather than a single token string.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::{Grammar, TermId};
use crate::pattern::Pattern;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token {
    pub class: TermId,
    pub start: usize,
    pub end: usize,
    /// Offset of the next token start after `end`, past skipped text.
    pub next: usize,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("lexical error at offset {offset}: unexpected character {found:?}")]
pub struct LexError {
    pub offset: usize,
    pub found: char,
}

#[derive(Debug, Clone)]
pub struct TokenGraph {
    pub input: String,
    /// Sorted by `(start, end, class)`.
    pub tokens: Vec<Token>,
    /// Offset of the first token, past leading skipped text.
    pub origin: usize,
}

impl TokenGraph {
    pub fn text(&self, token: &Token) -> &str {
        &self.input[token.start..token.end]
    }

    /// Indices of tokens starting at `offset`.
    pub fn starting_at(&self, offset: usize) -> std::ops::Range<usize> {
        let lo = self.tokens.partition_point(|t| t.start < offset);
        let hi = self.tokens.partition_point(|t| t.start <= offset);
        lo..hi
    }

    /// Token start offsets plus the end of input, ascending.
    pub fn positions(&self) -> Vec<usize> {
        let mut set: BTreeSet<usize> = self.tokens.iter().map(|t| t.start).collect();
        set.insert(self.origin);
        set.extend(self.tokens.iter().map(|t| t.next));
        set.into_iter().collect()
    }

    /// True when some path covers the whole input.
    pub fn is_complete(&self) -> bool {
        self.origin == self.input.len() || self.tokens.iter().any(|t| t.next == self.input.len())
    }

    /// Keeps only tokens on a path from the origin to the end of input.
    pub fn prune(&mut self) {
        let len = self.input.len();
        let mut alive: HashMap<usize, bool> = HashMap::new();
        alive.insert(len, true);
        // Tokens only move forward, so a reverse sweep sees successors first.
        for t in self.tokens.iter().rev() {
            let ok = alive.get(&t.next).copied().unwrap_or(false);
            let entry = alive.entry(t.start).or_insert(false);
            *entry |= ok;
        }
        let mut reachable: BTreeSet<usize> = BTreeSet::new();
        reachable.insert(self.origin);
        let mut kept = Vec::new();
        for t in &self.tokens {
            if reachable.contains(&t.start) && alive.get(&t.next).copied().unwrap_or(false) {
                reachable.insert(t.next);
                kept.push(*t);
            }
        }
        self.tokens = kept;
    }

    /// One `class@[start,end) "text"` line per token.
    pub fn dump(&self, grammar: &Grammar) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            let _ = writeln!(
                out,
                "{}@[{},{}) {:?}",
                grammar.terminals[t.class].name,
                t.start,
                t.end,
                self.text(t)
            );
        }
        out
    }
}

/// A token class set plus a skip pattern.
#[derive(Debug, Clone)]
pub struct Lexer {
    classes: Vec<(TermId, Pattern, bool)>,
    skip: Pattern,
}

impl Lexer {
    /// Lexer over the terminals reachable from the grammar's start symbol.
    pub fn for_grammar(grammar: &Grammar) -> Self {
        let classes = grammar
            .reachable_terminals()
            .into_iter()
            .map(|t| {
                let term = &grammar.terminals[t];
                (t, term.pattern.clone(), term.fixed)
            })
            .collect();
        Lexer { classes, skip: grammar.skip.clone() }
    }

    pub fn new(classes: Vec<(TermId, Pattern, bool)>, skip: Pattern) -> Self {
        Lexer { classes, skip }
    }

    fn resume(&self, input: &str, at: usize) -> usize {
        self.skip.longest_match_at(input, at).unwrap_or(at)
    }

    /// Every candidate reachable from the start, before path pruning.
    pub fn candidates(&self, input: &str) -> (TokenGraph, Option<LexError>) {
        let origin = self.resume(input, 0);
        let mut pending: BTreeSet<usize> = BTreeSet::new();
        pending.insert(origin);
        let mut tokens = Vec::new();
        let mut dead_end: Option<usize> = None;
        while let Some(at) = pending.pop_first() {
            if at >= input.len() {
                continue;
            }
            let mut here: Vec<(TermId, usize, bool)> = Vec::new();
            for (class, pattern, fixed) in &self.classes {
                if let Some(end) = pattern.longest_match_at(input, at) {
                    here.push((*class, end, *fixed));
                }
            }
            // A literal beats a pattern class only on the identical span.
            let fixed_ends: Vec<usize> = here.iter().filter(|h| h.2).map(|h| h.1).collect();
            here.retain(|h| h.2 || !fixed_ends.contains(&h.1));
            if here.is_empty() {
                dead_end = Some(dead_end.map_or(at, |d: usize| d.max(at)));
            }
            for (class, end, _) in here {
                let next = self.resume(input, end);
                tokens.push(Token { class, start: at, end, next });
                pending.insert(next);
            }
        }
        tokens.sort_by_key(|t| (t.start, t.end, t.class));
        let graph = TokenGraph { input: input.to_string(), tokens, origin };
        let error = if graph.is_complete() {
            None
        } else {
            let offset = dead_end.unwrap_or(origin);
            let found = input[offset..].chars().next().unwrap_or('\0');
            Some(LexError { offset, found })
        };
        (graph, error)
    }

    /// Token graph restricted to complete paths.
    pub fn tokenize(&self, input: &str) -> Result<TokenGraph, LexError> {
        let (mut graph, error) = self.candidates(input);
        if let Some(e) = error {
            return Err(e);
        }
        graph.prune();
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexer(classes: &[(&str, bool)]) -> Lexer {
        Lexer::new(
            classes
                .iter()
                .enumerate()
                .map(|(i, (p, fixed))| (i, Pattern::new(p).unwrap(), *fixed))
                .collect(),
            Pattern::new(crate::model::DEFAULT_SKIP).unwrap(),
        )
    }

    #[test]
    fn integer_and_real_both_survive_until_pruning() {
        let lx = lexer(&[("[0-9]+", false), ("[0-9]+\\.[0-9]+", false)]);
        let (raw, err) = lx.candidates("3.14");
        assert!(err.is_none());
        let spans: Vec<_> = raw.tokens.iter().map(|t| (t.start, t.end, t.class)).collect();
        assert_eq!(spans, vec![(0, 1, 0), (0, 4, 1)]);
        let pruned = lx.tokenize("3.14").unwrap();
        assert_eq!(pruned.tokens.len(), 1);
        assert_eq!(pruned.text(&pruned.tokens[0]), "3.14");
    }

    #[test]
    fn empty_input_has_no_tokens() {
        let lx = lexer(&[("a", false)]);
        let g = lx.tokenize("").unwrap();
        assert!(g.tokens.is_empty());
        assert!(lx.tokenize("  \n").unwrap().tokens.is_empty());
    }

    #[test]
    fn literal_beats_pattern_on_identical_span_only() {
        let lx = lexer(&[("[a-z]+", false), ("if", true)]);
        let g = lx.tokenize("if").unwrap();
        assert_eq!(g.tokens.len(), 1);
        assert_eq!(g.tokens[0].class, 1);
        let g = lx.tokenize("iffy").unwrap();
        let classes: Vec<_> = g.tokens.iter().map(|t| (t.start, t.end, t.class)).collect();
        assert_eq!(classes, vec![(0, 2, 1), (0, 4, 0), (2, 4, 0)]);
    }

    #[test]
    fn reports_furthest_dead_end() {
        let lx = lexer(&[("[0-9]+", false), ("\\+", true)]);
        let err = lx.tokenize("1 + 2 ? 3").unwrap_err();
        assert_eq!(err, LexError { offset: 6, found: '?' });
    }

    #[test]
    fn whitespace_is_skipped_between_tokens() {
        let lx = lexer(&[("[0-9]+", false), ("\\+", true)]);
        let g = lx.tokenize("  1 +2 ").unwrap();
        assert_eq!(g.origin, 2);
        let t: Vec<_> = g.tokens.iter().map(|t| (t.start, t.end, t.next)).collect();
        assert_eq!(t, vec![(2, 3, 4), (4, 5, 5), (5, 6, 7)]);
        assert_eq!(g.positions(), vec![2, 4, 5, 7]);
    }
}
