//! Surface syntax: parsers and printers for facts, programs and algebra expressions.

mod algebra;
mod lexer;
mod parse;
mod print;

pub use algebra::{parse_algebra, Schemas};
pub use parse::{parse_atom, parse_facts, parse_facts_file, parse_program, parse_query, FactsFile, ParsedProgram};
pub use print::print_facts;
