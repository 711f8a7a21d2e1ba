//! Symmetric string rewriting systems and exact walk counting on the
//! graphs they induce.
//!
//! Two strings of equal length are adjacent when they differ inside a
//! single window whose contents form a related pair. `(Aⁿ)_{s,t}` counts
//! the ways to turn `s` into `t` with exactly `n` replacements, and the
//! quantity of interest is `Δ(n) = (Aⁿ)_{s,t} − (Aⁿ)_{s,t′}`.

mod json;
mod system;
mod walk;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use system::{
    decode, encode, symmetric_close, Alphabet, RewritingSystem, Rule, StringLabel, Symbol, Targets,
};
pub use walk::{
    brute_force_count, count_walks, delta, delta_scaled, delta_scaled_with, delta_series, delta_with,
    walk_probability, Interner, StringId, WalkVector, Walker,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewriteError {
    #[error("alphabet must contain at least one token")]
    EmptyAlphabet,
    #[error("alphabet has {0} tokens, more than symbol indices can address")]
    AlphabetTooLarge(usize),
    #[error("duplicate token {0:?}")]
    DuplicateToken(String),
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("rule sides have lengths {lhs} and {rhs}")]
    UnequalRuleLengths { lhs: usize, rhs: usize },
    #[error("rule sides must be nonempty")]
    EmptyRule,
    #[error("rule relates a substring to itself")]
    SelfLoop,
    #[error("rule width {width} exceeds window {window}")]
    RuleTooWide { width: usize, window: usize },
    #[error("window must be at least 1")]
    ZeroWindow,
    #[error("window {0} too large to encode for this alphabet")]
    WindowTooLarge(usize),
    #[error("symbol index {0} outside the alphabet")]
    SymbolOutOfRange(Symbol),
    #[error("window code {0} outside the alphabet")]
    CodeOutOfRange(u64),
    #[error("{0} directed rules exceed the index capacity")]
    TooManyRules(usize),
    #[error("strings have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("scaled walk vector overflowed")]
    Overflow,
    #[error("scaled walk vector underflowed")]
    Underflow,
    #[error("walk enumeration exceeded {0} visited prefixes")]
    EnumerationLimit(u64),
    #[error("component is not regular: degree {found} where {expected} was expected")]
    NonRegular { expected: usize, found: usize },
    #[error("vertex budget of {0} strings exhausted")]
    VertexBudget(usize),
}

/// A decision query in token form: a system, the strings s, t, t′ and
/// an exponent. Extra fields present in compiled instance files are
/// ignored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub system: RewritingSystem,
    pub s: Vec<String>,
    pub t: Vec<String>,
    pub t_prime: Vec<String>,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl ProblemInstance {
    /// The three strings as symbol sequences.
    pub fn strings(&self) -> Result<(StringLabel, StringLabel, StringLabel), RewriteError> {
        let a = self.system.alphabet();
        Ok((a.parse(&self.s)?, a.parse(&self.t)?, a.parse(&self.t_prime)?))
    }
}
