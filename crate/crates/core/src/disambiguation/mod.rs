//! Declarative disambiguation: priority, associativity, composition and
//! custom constraints applied to parse forests.

mod filter;
mod rules;

use thiserror::Error;

pub use filter::{filter_forest, OverConstrained};
pub use rules::{
    CandidateView, CompositionRule, Constraints, Hook, Hooks, OpSource, ProdInfo, Rule, RuleSet, Side,
};

use crate::grammar::Grammar;
use crate::lexer::TokenGraph;
use crate::parser::{ParseForest, ParseTree};

/// How disambiguation rules are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Keep every parse.
    Off,
    /// Parse without rules, then filter the forest.
    Post,
    /// Prune during parsing, then filter what remains.
    #[default]
    Inline,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AmbiguityError {
    #[error("ambiguous input: {count} interpretations\n  first:  {first}\n  second: {second}")]
    Ambiguous { count: u128, first: String, second: String },
    #[error("no interpretation")]
    Empty,
}

/// The single tree of a forest, or an ambiguity report.
pub fn unique_tree(forest: &ParseForest, grammar: &Grammar, tokens: &TokenGraph) -> Result<ParseTree, AmbiguityError> {
    match forest.tree_count() {
        0 => Err(AmbiguityError::Empty),
        1 => Ok(forest.first_tree()),
        count => {
            let two = forest.enumerate_trees(2).trees;
            Err(AmbiguityError::Ambiguous {
                count,
                first: two[0].render(grammar, tokens),
                second: two[1].render(grammar, tokens),
            })
        }
    }
}
