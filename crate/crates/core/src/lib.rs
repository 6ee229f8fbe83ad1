//! Nested and modal Datalog with a SPARQL algebra fragment over nulls, and
//! configurable semantics for `FILTER EXISTS`.

pub mod algebra;
pub mod datalog;
pub mod error;
pub mod exists;
pub mod modal;
pub mod model;
pub mod nesting;
pub mod syntax;
pub mod worlds;

pub use error::{Error, Result};
