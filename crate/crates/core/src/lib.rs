//! Context-free parsing with derivatives.
//!
//! A [`Grammar`] is a graph of parsing expressions that may contain cycles.
//! Parsing takes one derivative per input token and then extracts the trees
//! for the empty word as a shared, possibly cyclic [`ParseForest`].
//!
//! ```
//! use pwd_core::{Grammar, ParseCount};
//!
//! let mut g = Grammar::load("start = S ; S : S S | 'a' ;").unwrap();
//! assert!(g.recognize(&["a", "a", "a"]));
//! assert_eq!(g.parse(&["a"; 4]).count(), ParseCount::from(5));
//! ```

mod compact;
mod derive;
pub mod forest;
mod grammar;
mod ids;
pub mod instrument;
pub mod loader;
mod normalize;
mod nullability;
pub mod oracle;
pub mod synth;

pub use compact::BuildError;
pub use forest::{count_parses, enumerate_trees, ForestKind, ForestSet, ForestStore, ParseCount, ParseForest, Reduction, Tree};
pub use grammar::{Form, FormKind, Grammar, MemoMode, Node, NullabilityMode, ParserConfig};
pub use ids::{ForestId, NodeId, RedId, Sym, Symbols, WILDCARD};
pub use instrument::{CompactionRule, Counters, EmitError, FormCounts, NameTable, NodeName, NamingRule, RuleCounts};
pub use loader::{parse_grammar_text, LoadError};
pub use nullability::{NullEngine, NullState};
pub use oracle::{earley_count, earley_recognize, enumerate_language, BnfGrammar, BnfSymbol};
