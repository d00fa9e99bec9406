//! Model-driven parser generation.
//!
//! A language is described by an abstract syntax [`model`] whose element
//! types carry constraint annotations. From it the crate derives a
//! [`grammar`], tokenizes input into an ambiguity-preserving token graph,
//! parses every interpretation into a shared forest, filters that forest
//! with the declared evaluation-order constraints and binds the surviving
//! tree into an abstract syntax graph with resolved references.
//!
//! ```
//! use modelcc::binder::apply_semantics;
//! use modelcc::gallery::{self, constant, eval_semantics};
//!
//! # fn main() -> Result<(), modelcc::Error> {
//! let lang = gallery::entry("constants").unwrap().language()?;
//! let mut table = lang.symbol_table();
//! table.register(constant("pi", 3.1415927))?;
//! let asg = lang.parse("2*pi", &table)?;
//! let v = apply_semantics(&asg, &eval_semantics())?;
//! assert!((v - 6.2831854).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod grammar;
pub mod model;
pub mod pattern;
pub mod text;
pub mod disambiguation;
pub mod lexer;
pub mod parser;
pub mod binder;
pub mod error;
pub mod gallery;
pub mod language;

pub use binder::{Asg, SymbolTable};
pub use disambiguation::{Hooks, Mode, RuleSet};
pub use error::{Error, ErrorKind};
pub use language::{Language, Parsed};
pub use model::Model;
