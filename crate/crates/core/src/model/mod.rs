//! Terms, rules, programs and the static analyses every evaluator relies on.

mod analysis;
mod fresh;
mod program;
mod term;

pub use analysis::{
    check_safety, dependency_graph, desugar_let, desugar_query_lets, stratify, unsafe_variables, validate_program,
    Dependency, DependencyGraph, Strata,
};
pub use fresh::FreshNames;
pub use program::{
    apply_substitution, Atom, Database, Fact, Literal, Mode, PredAtom, Program, Query, Rule, Substitute, Substitution,
};
pub use term::{Symbol, Term, Value};
