//! Deterministic simulation of the program band.
//!
//! Transitions read only program symbols and the data formatting (‖
//! against •, 0 or 1), which execution never changes, so the orbit of
//! the initial layout can be traced without the quantum bands.

use rustc_hash::FxHashSet;
use serde::Serialize;

use super::cell::{DataSymbol, ProgramSymbol};
use super::layout::Layout;
use super::local::{classify, match_transition, Execution, Transition};
use super::CompileError;
use crate::circuit::{Circuit, GateKind};

/// One forward step: the window whose cell 0 sits at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Step {
    pub position: usize,
    pub rule: Transition,
    pub execution: Execution,
}

/// The orbit α̃ = c₀, c₁, …, c_{ℓ−1} of the program band.
#[derive(Debug, Clone, Serialize)]
pub struct ControlRun {
    pub configs: Vec<Vec<ProgramSymbol>>,
    /// `steps[i]` leads from `configs[i]` to `configs[i + 1]`.
    pub steps: Vec<Step>,
    /// Window at which ■ meets B above the register in c_{ℓ−1}.
    pub final_position: usize,
    pub hadamards: usize,
    pub dummy_hadamards: usize,
    /// Parity of the number of dummy Hadamards.
    pub d_parity: bool,
}

impl ControlRun {
    pub fn ell(&self) -> usize {
        self.configs.len()
    }
}

/// All windows (by cell-0 position) with an applicable transition.
pub fn applicable(program: &[ProgramSymbol], data: &[DataSymbol]) -> Vec<(usize, Transition)> {
    let len = program.len();
    (1..len.saturating_sub(1))
        .filter_map(|i| {
            match_transition(program[i], program[i + 1], data[i], data[i + 1]).map(|(r, _, _)| (i, r))
        })
        .collect()
}

/// Whether a transition would match a window reaching past either end
/// of the tape, taking the outside to be # over •.
pub fn touches_boundary(program: &[ProgramSymbol], data: &[DataSymbol]) -> bool {
    let len = program.len();
    if len < 2 {
        return true;
    }
    let outside = (ProgramSymbol::Blank, DataSymbol::Dot);
    let edges = [
        (outside, (program[0], data[0])),
        ((program[0], data[0]), (program[1], data[1])),
        ((program[len - 1], data[len - 1]), outside),
    ];
    edges
        .iter()
        .any(|&((p0, d0), (p1, d1))| match_transition(p0, p1, d0, d1).is_some())
}

/// Runs the program band from the initial layout until ■ meets B above
/// the register.
pub fn control_simulate(layout: &Layout, circuit: &Circuit) -> Result<ControlRun, CompileError> {
    let data = &layout.data;
    let mut program = layout.program.clone();
    let mut configs = Vec::new();
    let mut steps = Vec::new();
    let mut seen: FxHashSet<Vec<ProgramSymbol>> = FxHashSet::default();
    let mut executed = [0usize; 3];
    let mut dummy = 0usize;
    // Every pass of ■ or □ crosses the tape once; this bounds any orbit
    // of a correct layout with a wide margin.
    let limit = 4 * program.len() * program.len() + 16;

    loop {
        let index = configs.len();
        if touches_boundary(&program, data) {
            return Err(CompileError::Boundary { step: index });
        }
        if !seen.insert(program.clone()) {
            return Err(CompileError::Revisit { step: index });
        }
        let windows = applicable(&program, data);
        let (position, rule) = match windows.as_slice() {
            [] => return Err(CompileError::Stuck { step: index }),
            [w] => *w,
            _ => {
                return Err(CompileError::Ambiguous {
                    step: index,
                    positions: windows.iter().map(|w| w.0).collect(),
                })
            }
        };
        let execution = classify(
            program[position],
            program[position + 1],
            [data[position - 1], data[position], data[position + 1]],
        );
        configs.push(program.clone());
        if execution == Execution::Boundary {
            if !layout.is_register(position + 1) {
                return Err(CompileError::Stuck { step: index });
            }
            let expected = gate_counts(circuit);
            if executed != expected {
                return Err(CompileError::ExecutionCount {
                    expected,
                    found: executed,
                });
            }
            return Ok(ControlRun {
                configs,
                steps,
                final_position: position,
                hadamards: executed[0],
                dummy_hadamards: dummy,
                d_parity: dummy % 2 == 1,
            });
        }
        if index >= limit {
            return Err(CompileError::StepLimit(limit));
        }
        match execution {
            Execution::Hadamard => executed[0] += 1,
            Execution::Swap => {
                executed[1] += 1;
                dummy += 1;
            }
            Execution::Toffoli => {
                executed[2] += 1;
                dummy += 1;
            }
            _ => dummy += 1,
        }
        let (_, q0, q1) = match_transition(
            program[position],
            program[position + 1],
            data[position],
            data[position + 1],
        )
        .expect("matched above");
        program[position] = q0;
        program[position + 1] = q1;
        steps.push(Step {
            position,
            rule,
            execution,
        });
    }
}

/// Hadamard, swap and Toffoli counts of a circuit.
fn gate_counts(circuit: &Circuit) -> [usize; 3] {
    let mut n = [0; 3];
    for g in circuit.layers.iter().flat_map(|l| &l.gates) {
        n[match g.kind {
            GateKind::Hadamard => 0,
            GateKind::Swap => 1,
            GateKind::Toffoli => 2,
        }] += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, Layer};
    use crate::compiler::layout::layout;

    fn run(c: &Circuit, x: &[bool]) -> ControlRun {
        control_simulate(&layout(c, x).unwrap(), c).unwrap()
    }

    #[test]
    fn single_hadamard_orbit() {
        let c = Circuit::new(1, vec![Layer::new(vec![Gate::h(0)])]);
        let r = run(&c, &[]);
        assert_eq!(r.hadamards, 1);
        assert_eq!(r.steps.len() + 1, r.ell());
        assert_eq!(r.d_parity, (r.ell() - 1 - 1) % 2 == 1);
        let distinct: FxHashSet<_> = r.configs.iter().collect();
        assert_eq!(distinct.len(), r.ell());
    }

    #[test]
    fn every_golden_circuit_terminates() {
        let circuits = [
            Circuit::new(1, vec![Layer::new(vec![Gate::h(0)])]),
            Circuit::new(
                1,
                vec![Layer::new(vec![Gate::h(0)]), Layer::new(vec![Gate::h(0)])],
            ),
            Circuit::new(
                2,
                vec![Layer::new(vec![Gate::h(0)]), Layer::new(vec![Gate::swap(0)])],
            ),
            Circuit::new(3, vec![Layer::new(vec![Gate::toffoli(0)])]),
            Circuit::new(
                4,
                vec![
                    Layer::new(vec![Gate::toffoli(0), Gate::h(3)]),
                    Layer::new(vec![Gate::h(0), Gate::swap(1)]),
                ],
            ),
        ];
        for c in &circuits {
            let r = run(c, &vec![true; c.n_qubits]);
            assert_eq!(r.steps.len() + 1, r.ell());
            let distinct: FxHashSet<_> = r.configs.iter().collect();
            assert_eq!(distinct.len(), r.ell());
        }
    }

    #[test]
    fn boundary_detection() {
        use ProgramSymbol::*;
        let dots = vec![DataSymbol::Dot; 4];
        assert!(!touches_boundary(&[Blank, Blank, Blank, Blank], &dots));
        assert!(touches_boundary(&[Hole, GateI, Blank, Blank], &dots));
        assert!(touches_boundary(&[Blank, Blank, Blank, Hole], &dots));
        assert!(touches_boundary(&[MarkH, Blank, Blank, Blank], &dots));
    }
}
