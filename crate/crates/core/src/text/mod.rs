//! Text bridge between policy artifacts on disk and the in-memory model:
//! parse and serialize adaptation policies, context schemas, system models
//! and context flows.
//!
//! File formats (UTF-8, LF or CRLF accepted, LF emitted, `#` starts a line
//! comment in all of them):
//!
//! - `.apl` adaptation policy, one rule per `when`/`if`/`then` clause triple:
//!   ```text
//!   when requestdensity is 'high' or 'medium'
//!   if cacheHandler.size == 0
//!   then utility of addCache is 'high'
//!   ```
//! - `.ctx` context schema, one property per line:
//!   ```text
//!   property LOAD : int [0,100] levels { low: [0,49], high: [50,100] }
//!   ```
//! - `.sys` system model, state declarations then effects:
//!   ```text
//!   state cacheHandler.size = 0
//!   effect addCache 'high' => cacheHandler.size := 1
//!   ```
//! - `.flow` context flow, one instance per line as comma-separated integers
//!   in schema property order.
//!
//! Keywords and qualitative values are case-insensitive; the canonical
//! serialization lower-cases qualitative values. Parsing then serializing is
//! idempotent.

mod flow;
mod lexer;
mod policy;
mod schema;
mod sysmodel;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Policy;

pub use flow::{parse_flow, serialize_flow};
pub use policy::{parse_policy, serialize_policy, ParsedPolicy};
pub use schema::parse_schema;
pub use sysmodel::parse_system_model;

/// Policy file extension.
pub const POLICY_EXT: &str = "apl";
/// Context schema file extension.
pub const SCHEMA_EXT: &str = "ctx";
/// System model file extension.
pub const SYSMODEL_EXT: &str = "sys";
/// Context flow file extension.
pub const FLOW_EXT: &str = "flow";

/// Position of a token or rule in source text. Lines and columns are
/// 1-based; columns count characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

impl SourceSpan {
    pub fn new(line: u32, column: u32, length: u32) -> Self {
        SourceSpan { line, column, length }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

/// A parse failure, pointing at the offending token.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at {span}: {message}")]
pub struct SyntaxError {
    pub span: SourceSpan,
    pub message: String,
}

impl SyntaxError {
    pub(crate) fn new(span: SourceSpan, message: impl Into<String>) -> Self {
        SyntaxError { span, message: message.into() }
    }
}

/// A bridge between one textual policy syntax and the policy model. The
/// mutation operators work on models only, so adding a second syntax means
/// adding a second bridge, nothing else.
pub trait PolicyBridge {
    /// Parse policy text into a model, keeping per-rule source spans.
    fn parse(&self, text: &str) -> Result<ParsedPolicy, SyntaxError>;
    /// Serialize a policy to canonical text for this syntax.
    fn serialize(&self, policy: &Policy) -> String;
}

/// The default `.apl` syntax.
#[derive(Debug, Clone, Copy, Default)]
pub struct AplBridge;

impl PolicyBridge for AplBridge {
    fn parse(&self, text: &str) -> Result<ParsedPolicy, SyntaxError> {
        parse_policy(text)
    }

    fn serialize(&self, policy: &Policy) -> String {
        serialize_policy(policy)
    }
}
