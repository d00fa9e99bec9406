use std::sync::Arc;

use crate::binder::{instantiate, resolve_references, Asg, SymbolTable};
use crate::disambiguation::{filter_forest, unique_tree, Constraints, Hooks, Mode, RuleSet};
use crate::error::Error;
use crate::grammar::{generate_grammar, Grammar};
use crate::lexer::{LexError, Lexer, TokenGraph};
use crate::model::{validate_model, Model};
use crate::parser::{parse, ParseForest, ParseTree};
use crate::text::read_model;

/// A model compiled into grammar, lexer and constraint tables.
#[derive(Debug, Clone)]
pub struct Language {
    model: Arc<Model>,
    grammar: Grammar,
    lexer: Lexer,
    constraints: Constraints,
}

/// Tokens and forest of one input.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub tokens: TokenGraph,
    pub forest: ParseForest,
}

impl Language {
    pub fn new(model: Model) -> Result<Self, Error> {
        Self::with_hooks(model, Hooks::new())
    }

    /// Every `@constraint` named by the model must be registered in `hooks`.
    pub fn with_hooks(model: Model, hooks: Hooks) -> Result<Self, Error> {
        let report = validate_model(&model);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        for e in &model.elements {
            if let Some(h) = &e.constraint {
                if hooks.get(h).is_none() {
                    return Err(Error::Hook(format!("element `{}`: constraint hook `{h}` is not registered", e.name)));
                }
            }
        }
        let grammar = generate_grammar(&model)?;
        let lexer = Lexer::for_grammar(&grammar);
        let constraints = Constraints::new(&model, &grammar, RuleSet::ALL, hooks);
        Ok(Language { model: Arc::new(model), grammar, lexer, constraints })
    }

    pub fn from_source(text: &str) -> Result<Self, Error> {
        Self::new(read_model(text)?.model)
    }

    /// The same language with only the given rule families enforced.
    pub fn with_rules(mut self, rules: RuleSet) -> Self {
        self.constraints.rules = rules;
        self
    }

    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn constraints(&self) -> &Constraints {
        &self.constraints
    }

    pub fn symbol_table(&self) -> SymbolTable {
        SymbolTable::new(self.model.clone())
    }

    /// Token graph restricted to complete tokenizations.
    pub fn tokenize(&self, input: &str) -> Result<TokenGraph, LexError> {
        self.lexer.tokenize(input)
    }

    pub fn parse_forest(&self, input: &str, mode: Mode) -> Result<Parsed, Error> {
        let tokens = self.tokenize(input)?;
        let rules = &self.constraints;
        let forest = match mode {
            Mode::Off => parse(&self.grammar, &tokens, None)?,
            Mode::Post => {
                let forest = parse(&self.grammar, &tokens, None)?;
                filter_forest(&forest, &self.grammar, &tokens, rules)?
            }
            Mode::Inline => match parse(&self.grammar, &tokens, Some(rules)) {
                Ok(forest) => filter_forest(&forest, &self.grammar, &tokens, rules)?,
                Err(guided) => {
                    // tell a syntax error from input that only the rules reject
                    let forest = parse(&self.grammar, &tokens, None).map_err(|_| guided)?;
                    filter_forest(&forest, &self.grammar, &tokens, rules)?
                }
            },
        };
        Ok(Parsed { tokens, forest })
    }

    /// The single tree the rules leave, or an ambiguity error.
    pub fn parse_tree(&self, input: &str) -> Result<(TokenGraph, ParseTree), Error> {
        let Parsed { tokens, forest } = self.parse_forest(input, Mode::Inline)?;
        let tree = unique_tree(&forest, &self.grammar, &tokens)?;
        Ok((tokens, tree))
    }

    /// Parses, instantiates and resolves references against `table`.
    pub fn parse(&self, input: &str, table: &SymbolTable) -> Result<Asg, Error> {
        let (tokens, tree) = self.parse_tree(input)?;
        let asg = instantiate(&tree, &self.grammar, &tokens, &self.model)?;
        Ok(resolve_references(asg, table)?)
    }
}
