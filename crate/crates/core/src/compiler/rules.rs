//! Rule generation by exhaustive enumeration of three-cell windows.
//!
//! σ and τ are related exactly when ⟨τ|V̂|σ⟩ = 1 or ⟨σ|V̂|τ⟩ = 1. The
//! scan also certifies the structural properties the reduction relies
//! on: at most two images per window, no window related to itself, and
//! no window that has both forward and backward images.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::cell::{cell_alphabet, Cell, CELL_COUNT};
use super::local::{forward_images_with, LocalTriple, SwapSchedule};
use crate::rewriting::{RewriteError, RewritingSystem, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleError {
    #[error("window {0} has more than two forward images")]
    TooManyImages(String),
    #[error("window {0} is its own image")]
    SelfPair(String),
    #[error("window {0} has both forward and backward images")]
    Bidirectional(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Counts gathered during generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleStats {
    pub triples: u64,
    /// Windows with one forward image.
    pub single: u64,
    /// Windows with two forward images.
    pub double: u64,
    /// Distinct (σ, τ) pairs with τ a forward image of σ.
    pub pairs: u64,
    /// Windows that are a forward image of some window.
    pub targets: u64,
}

#[derive(Debug)]
pub struct GeneratedRules {
    pub system: Arc<RewritingSystem>,
    pub stats: RuleStats,
    pub schedule: SwapSchedule,
}

const RADIX: u64 = CELL_COUNT as u64;

pub fn triple_code(t: &LocalTriple) -> u64 {
    (t[0].index() as u64 * RADIX + t[1].index() as u64) * RADIX + t[2].index() as u64
}

pub fn triple_from_code(code: u64) -> LocalTriple {
    let c = |x: u64| Cell::from_index((x % RADIX) as usize);
    [c(code / (RADIX * RADIX)), c(code / RADIX), c(code)]
}

fn describe(code: u64) -> String {
    let t = triple_from_code(code);
    format!("{} {} {}", t[0], t[1], t[2])
}

/// Pairs for one leading cell with single and double counts.
type Chunk = (Vec<(u64, u64)>, u64, u64);

/// Forward pairs (σ, τ) for every window, with the structural checks.
pub fn forward_pairs(schedule: SwapSchedule) -> Result<(Vec<(u64, u64)>, RuleStats), RuleError> {
    let chunks: Vec<Result<Chunk, RuleError>> = (0..CELL_COUNT)
        .into_par_iter()
        .map(|first| {
            let mut out = Vec::new();
            let (mut single, mut double) = (0, 0);
            let c0 = Cell::from_index(first);
            for second in 0..CELL_COUNT {
                let c1 = Cell::from_index(second);
                for third in 0..CELL_COUNT {
                    let sigma = [c0, c1, Cell::from_index(third)];
                    let images = forward_images_with(&sigma, schedule);
                    let code = triple_code(&sigma);
                    match images.len() {
                        0 => continue,
                        1 => single += 1,
                        2 => double += 1,
                        _ => return Err(RuleError::TooManyImages(describe(code))),
                    }
                    let mut codes: Vec<u64> = images.as_slice().iter().map(triple_code).collect();
                    codes.sort_unstable();
                    codes.dedup();
                    for tau in codes {
                        if tau == code {
                            return Err(RuleError::SelfPair(describe(code)));
                        }
                        out.push((code, tau));
                    }
                }
            }
            Ok((out, single, double))
        })
        .collect();

    let mut pairs = Vec::new();
    let (mut single, mut double) = (0, 0);
    for chunk in chunks {
        let (p, s, d) = chunk?;
        pairs.extend(p);
        single += s;
        double += d;
    }
    pairs.sort_unstable();

    let space = (RADIX * RADIX * RADIX) as usize;
    let mut has_forward = vec![0u64; space.div_ceil(64)];
    let mut has_backward = vec![0u64; space.div_ceil(64)];
    let set = |bits: &mut [u64], i: u64| bits[(i / 64) as usize] |= 1 << (i % 64);
    for &(s, t) in &pairs {
        set(&mut has_forward, s);
        set(&mut has_backward, t);
    }
    let mut targets = 0u64;
    for (w, (f, b)) in has_forward.iter().zip(&has_backward).enumerate() {
        targets += u64::from(b.count_ones());
        let both = f & b;
        if both != 0 {
            let code = w as u64 * 64 + u64::from(both.trailing_zeros());
            return Err(RuleError::Bidirectional(describe(code)));
        }
    }
    let stats = RuleStats {
        triples: space as u64,
        single,
        double,
        pairs: pairs.len() as u64,
        targets,
    };
    Ok((pairs, stats))
}

/// Builds the rewriting system for one swap schedule.
pub fn generate_rules_with(schedule: SwapSchedule) -> Result<GeneratedRules, RuleError> {
    let (pairs, stats) = forward_pairs(schedule)?;
    let system = Arc::new(RewritingSystem::from_code_pairs(cell_alphabet(), 3, 3, pairs)?);
    Ok(GeneratedRules {
        system,
        stats,
        schedule,
    })
}

static ALIGNED: OnceLock<Arc<GeneratedRules>> = OnceLock::new();
static LITERAL: OnceLock<Arc<GeneratedRules>> = OnceLock::new();

/// The rules for a schedule, generated once per process.
pub fn generate_rules_cached(schedule: SwapSchedule) -> Result<Arc<GeneratedRules>, RuleError> {
    let cell = match schedule {
        SwapSchedule::Aligned => &ALIGNED,
        SwapSchedule::Literal => &LITERAL,
    };
    if let Some(g) = cell.get() {
        return Ok(g.clone());
    }
    let g = Arc::new(generate_rules_with(schedule)?);
    Ok(cell.get_or_init(|| g).clone())
}

/// The rewriting system of the default schedule.
pub fn generate_rules() -> Result<Arc<GeneratedRules>, RuleError> {
    generate_rules_cached(SwapSchedule::default())
}

/// Symbols of a cell string.
pub fn symbols(cells: &[Cell]) -> Vec<Symbol> {
    cells.iter().map(|c| c.symbol()).collect()
}
