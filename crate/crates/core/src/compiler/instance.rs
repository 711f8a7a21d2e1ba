//! Assembly of a compiled instance from a circuit and an input.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::cell::{Cell, ProgramSymbol};
use super::control::{control_simulate, ControlRun};
use super::layout::{layout, Layout};
use super::local::SwapSchedule;
use super::rules::{generate_rules_cached, symbols, RuleStats};
use super::CompileError;
use crate::circuit::Circuit;
use crate::rewriting::{ProblemInstance, RewriteError, RewritingSystem, StringLabel, Symbol};
use crate::spectral::{self, MMode, PathSpectrum};

/// A decision instance produced from a circuit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompiledInstance {
    pub system: Arc<RewritingSystem>,
    /// ω₀.
    pub s: Vec<String>,
    /// α₁.
    pub t: Vec<String>,
    /// α₀.
    pub t_prime: Vec<String>,
    pub m: usize,
    pub ell: usize,
    #[serde(with = "bit")]
    pub d_parity: bool,
    pub c: f64,
    pub epsilon: f64,
    pub block: usize,
    /// Swap schedule the rules were generated with.
    #[serde(default)]
    pub schedule: SwapSchedule,
}

mod bit {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*b))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(de::Error::custom(format!("d_parity must be 0 or 1, got {other}"))),
        }
    }
}

impl CompiledInstance {
    /// s, t and t′ as symbol strings.
    pub fn strings(&self) -> Result<(StringLabel, StringLabel, StringLabel), RewriteError> {
        let a = self.system.alphabet();
        Ok((a.parse(&self.s)?, a.parse(&self.t)?, a.parse(&self.t_prime)?))
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    /// The decision query alone.
    pub fn problem(&self) -> ProblemInstance {
        ProblemInstance {
            system: (*self.system).clone(),
            s: self.s.clone(),
            t: self.t.clone(),
            t_prime: self.t_prime.clone(),
            m: self.m,
            c: Some(self.c),
            epsilon: Some(self.epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileOptions {
    pub m_mode: MMode,
    pub schedule: SwapSchedule,
}

/// A compiled instance with the intermediate artifacts it was built from.
#[derive(Debug, Clone)]
pub struct Compilation {
    pub instance: CompiledInstance,
    pub layout: Layout,
    pub run: ControlRun,
    pub rule_stats: RuleStats,
    pub schedule: SwapSchedule,
}

impl Compilation {
    /// α̃ with the given sim bit above ■.
    pub fn alpha(&self, sim: bool) -> Vec<Cell> {
        let mut cells = self.layout.cells(&self.layout.program);
        cells[self.layout.register_start].s = sim;
        cells
    }

    /// ω̃ with the given aux bit carried at the final ■ position.
    pub fn omega(&self, aux: bool) -> Vec<Cell> {
        let last = self.run.configs.last().expect("orbit is nonempty");
        let mut cells = self.layout.cells(last);
        cells[self.run.final_position].a = aux;
        cells
    }
}

/// ω₀, α₁ and α₀ from a layout and its orbit.
pub fn build_strings(layout: &Layout, run: &ControlRun) -> (Vec<Cell>, Vec<Cell>, Vec<Cell>) {
    let omega = layout.cells(run.configs.last().expect("orbit is nonempty"));
    let alpha0 = layout.cells(&layout.program);
    let mut alpha1 = alpha0.clone();
    let exec = layout.register_start;
    debug_assert_eq!(alpha1[exec].p, ProgramSymbol::Exec);
    alpha1[exec].s = true;
    (omega, alpha1, alpha0)
}

fn tokens(cells: &[Cell]) -> Vec<String> {
    cells.iter().map(|c| c.token()).collect()
}

/// No rule applies in the outermost window at either end.
fn margins_inert(system: &RewritingSystem, s: &[Symbol]) -> bool {
    let len = s.len();
    if len < 3 {
        return false;
    }
    let radix = system.alphabet().len() as u64;
    [&s[..3], &s[len - 3..]].iter().all(|w| {
        system
            .targets(3, crate::rewriting::encode(w, radix))
            .is_empty()
    })
}

pub fn compile(circuit: &Circuit, x: &[bool], options: CompileOptions) -> Result<Compilation, CompileError> {
    let layout = layout(circuit, x)?;
    let run = control_simulate(&layout, circuit)?;
    let ell = run.ell();
    let m = spectral::choose_m(ell, options.m_mode)?;
    if m % 2 == ell % 2 {
        return Err(CompileError::Parity { ell, m });
    }
    let spectrum = PathSpectrum::new(ell)?;
    let rules = generate_rules_cached(options.schedule)?;
    let (s, t, t_prime) = build_strings(&layout, &run);
    for cells in [&s, &t, &t_prime] {
        if !margins_inert(&rules.system, &symbols(cells)) {
            return Err(CompileError::InertMargin);
        }
    }
    let instance = CompiledInstance {
        system: rules.system.clone(),
        s: tokens(&s),
        t: tokens(&t),
        t_prime: tokens(&t_prime),
        m,
        ell,
        d_parity: run.d_parity,
        c: std::f64::consts::SQRT_2 * spectrum.lambda0,
        epsilon: spectrum.w0() / (3.0 * std::f64::consts::SQRT_2),
        block: layout.block,
        schedule: options.schedule,
    };
    Ok(Compilation {
        instance,
        layout,
        run,
        rule_stats: rules.stats,
        schedule: options.schedule,
    })
}
