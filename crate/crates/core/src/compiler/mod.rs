//! Translation of a layered circuit and an input into a rewriting
//! instance over the 224-cell alphabet with window 3.

pub mod cell;
pub mod control;
pub mod instance;
pub mod layout;
pub mod local;
pub mod rules;

use thiserror::Error;

pub use cell::{cell_alphabet, render_bands, Cell, DataSymbol, GateSymbol, ProgramSymbol, CELL_COUNT};
pub use control::{control_simulate, ControlRun, Step};
pub use instance::{build_strings, compile, Compilation, CompileOptions, CompiledInstance};
pub use layout::{layout, Layout, LayoutError};
pub use local::{forward_images, forward_images_with, Direction, Execution, LocalTriple, SwapSchedule, Transition};
pub use rules::{generate_rules, generate_rules_cached, generate_rules_with, GeneratedRules, RuleError, RuleStats};

use crate::spectral::SpectralError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("no transition applies at step {step}")]
    Stuck { step: usize },
    #[error("transitions apply at several positions {positions:?} at step {step}")]
    Ambiguous { step: usize, positions: Vec<usize> },
    #[error("configuration at step {step} repeats an earlier one")]
    Revisit { step: usize },
    #[error("a transition reaches past the tape end at step {step}")]
    Boundary { step: usize },
    #[error("executed (H, S, T) = {found:?}, circuit has {expected:?}")]
    ExecutionCount { expected: [usize; 3], found: [usize; 3] },
    #[error("orbit exceeded {0} steps")]
    StepLimit(usize),
    #[error("m = {m} has the parity of ℓ = {ell}")]
    Parity { ell: usize, m: usize },
    #[error("a rule applies in an outer margin window")]
    InertMargin,
}
