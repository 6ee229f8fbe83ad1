use crate::model::Symbol;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("program is recursive: cycle through {}", join(cycle))]
    RecursiveProgram { cycle: Vec<Symbol> },

    #[error("unsafe rule `{rule}`: variables {} do not occur positively", join(variables))]
    Unsafe { rule: String, variables: Vec<Symbol> },

    #[error("built-in literal `{literal}` has unbound variables {}", join(variables))]
    UnboundBuiltin { literal: String, variables: Vec<Symbol> },

    #[error("rule head `{head}` must contain only variables")]
    NonVariableHead { head: String },

    #[error("predicate `{predicate}` used with arity {found}, expected {expected}")]
    ArityMismatch { predicate: Symbol, expected: usize, found: usize },

    #[error("let literal for `{variable}` not found in rule {rule}")]
    LetNotFound { rule: usize, variable: Symbol },

    #[error("let variable `{variable}` touches only extensional predicates in rule {rule}")]
    NothingBelow { rule: usize, variable: Symbol },

    #[error("variable `{variable}` does not occur where required")]
    VariableAbsent { variable: Symbol },

    #[error("no rule with index {0}")]
    NoSuchRule(usize),

    #[error("unknown relation `{0}`")]
    UnknownRelation(Symbol),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("{count} null occurrences exceed the limit of {limit}")]
    TooManyNulls { count: usize, limit: usize },

    #[error("{line}:{col}: syntax error, expected {expected}")]
    Syntax { line: usize, col: usize, expected: String },

    #[error("{line}:{col}: modal and plain rules cannot be mixed")]
    MixedModes { line: usize, col: usize },

    #[error("unknown semantics profile `{0}`")]
    UnknownProfile(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

impl Error {
    /// Source position carried by the error, if any.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            Error::Syntax { line, col, .. } | Error::MixedModes { line, col } => Some((*line, *col)),
            _ => None,
        }
    }
}

fn join(names: &[Symbol]) -> String {
    names.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
}
