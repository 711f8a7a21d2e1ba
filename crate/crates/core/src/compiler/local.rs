//! The local forward operator on three-cell windows.
//!
//! A window σ = (c₋₁, c₀, c₁) is first acted on by the execution
//! operator, which applies the gate under the execution signal (or a
//! dummy Hadamard on the aux band), and then by the transition operator,
//! which rewrites the program symbols of cells 0 and 1 and moves the
//! aux and sim bits along with the signal. Every nonzero matrix element
//! of the result is 1, so the operator is described by its image sets.

use serde::{Deserialize, Serialize};

use super::cell::{Cell, DataSymbol, GateSymbol, ProgramSymbol};

pub type LocalTriple = [Cell; 3];

/// The transition rules acting on program cells 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// □G → G□
    R1a,
    /// ■G → G■
    R1b,
    /// □# → ◇# over •, 0 or 1
    R2a,
    /// ■# → ◇# over ‖
    R2b,
    /// G◇ → 𝔾#
    R3,
    /// F𝔾 → 𝔽G
    R4,
    /// #𝔾 → ◇G
    R5,
    /// #◇ → #□ with •, 0 or 1 under the ◇
    R6a,
    /// #◇ → #■ with ‖ under the ◇
    R6b,
}

/// Which pair of cells exchanges aux and sim bits on a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Cells 0 and 1.
    Right,
    /// Cells −1 and 0.
    Left,
    None,
}

/// Assignment of aux/sim swaps to transition rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapSchedule {
    /// Rules 1 swap right, rules 3–5 swap left, rules 2 and 6 do not
    /// swap. With this assignment the carried aux qubit and sim marker
    /// lose contact with the signal at both turnarounds.
    Literal,
    /// Rules 1 and 6 swap right, rules 2–5 swap left. The carried bits
    /// sit under the signal while it moves right and one cell left of
    /// it while it moves left, so every window the signal acts on
    /// holds them in cell 0.
    #[default]
    Aligned,
}

impl Transition {
    pub fn direction(self, schedule: SwapSchedule) -> Direction {
        use Transition::*;
        match (self, schedule) {
            (R1a | R1b, _) => Direction::Right,
            (R3 | R4 | R5, _) => Direction::Left,
            (R2a | R2b | R6a | R6b, SwapSchedule::Literal) => Direction::None,
            (R2a | R2b, SwapSchedule::Aligned) => Direction::Left,
            (R6a | R6b, SwapSchedule::Aligned) => Direction::Right,
        }
    }
}

fn is_filler(d: DataSymbol) -> bool {
    d != DataSymbol::Sep
}

/// Matches the program symbols of cells 0 and 1, with the data symbols
/// under them, against the transition rules. Returns the rule and the
/// rewritten program symbols.
pub fn match_transition(
    p0: ProgramSymbol,
    p1: ProgramSymbol,
    d0: DataSymbol,
    d1: DataSymbol,
) -> Option<(Transition, ProgramSymbol, ProgramSymbol)> {
    use ProgramSymbol::*;
    match (p0, p1) {
        (Hole, g) if g.as_gate().is_some() => Some((Transition::R1a, g, Hole)),
        (Exec, g) if g.as_gate().is_some() => Some((Transition::R1b, g, Exec)),
        (Hole, Blank) if is_filler(d0) => Some((Transition::R2a, Turn, Blank)),
        (Exec, Blank) if d0 == DataSymbol::Sep => Some((Transition::R2b, Turn, Blank)),
        (g, Turn) if g.as_gate().is_some() => {
            Some((Transition::R3, ProgramSymbol::mark(g.as_gate()?), Blank))
        }
        (f, m) if f.as_gate().is_some() && m.as_mark().is_some() => Some((
            Transition::R4,
            ProgramSymbol::mark(f.as_gate()?),
            ProgramSymbol::gate(m.as_mark()?),
        )),
        (Blank, m) if m.as_mark().is_some() => {
            Some((Transition::R5, Turn, ProgramSymbol::gate(m.as_mark()?)))
        }
        (Blank, Turn) if is_filler(d1) => Some((Transition::R6a, Blank, Hole)),
        (Blank, Turn) if d1 == DataSymbol::Sep => Some((Transition::R6b, Blank, Exec)),
        _ => None,
    }
}

/// Case of the execution operator selected by a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Execution {
    Toffoli,
    Swap,
    Hadamard,
    /// Annihilates: the computation has ended.
    Boundary,
    /// Identity on the data, dummy Hadamard on the aux band.
    Idle,
}

/// Classifies a window: a gate executes when ■ sits in cell 0, the gate
/// symbol in cell 1, and the data cells it acts on hold qubits.
pub fn classify(p0: ProgramSymbol, p1: ProgramSymbol, d: [DataSymbol; 3]) -> Execution {
    if p0 != ProgramSymbol::Exec {
        return Execution::Idle;
    }
    match p1.as_gate() {
        Some(GateSymbol::T) if d.iter().all(|x| x.is_bit()) => Execution::Toffoli,
        Some(GateSymbol::S) if d[1].is_bit() && d[2].is_bit() => Execution::Swap,
        Some(GateSymbol::H) if d[2].is_bit() => Execution::Hadamard,
        Some(GateSymbol::B) if d[2].is_bit() => Execution::Boundary,
        _ => Execution::Idle,
    }
}

/// At most two images.
#[derive(Debug, Clone, Copy)]
pub struct Images {
    len: usize,
    items: [LocalTriple; 2],
}

impl Images {
    fn new(blank: LocalTriple) -> Self {
        Self {
            len: 0,
            items: [blank; 2],
        }
    }

    fn push(&mut self, t: LocalTriple) {
        self.items[self.len] = t;
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[LocalTriple] {
        &self.items[..self.len]
    }
}

/// Flips the sim bit of cell 0 on the 1 → 1 branch, the only negative
/// entry of the Hadamard matrix.
fn hadamard_branch(input: bool, output: bool, sim: &mut bool) {
    if input && output {
        *sim = !*sim;
    }
}

/// All τ with matrix element 1 from σ, using the default schedule.
pub fn forward_images(sigma: &LocalTriple) -> Images {
    forward_images_with(sigma, SwapSchedule::default())
}

pub fn forward_images_with(sigma: &LocalTriple, schedule: SwapSchedule) -> Images {
    let mut out = Images::new(*sigma);
    // The transition only reads program symbols and formatting, which
    // execution never changes, so a window with no transition is
    // annihilated regardless of the execution branch.
    let Some((rule, q0, q1)) = match_transition(sigma[1].p, sigma[2].p, sigma[1].d, sigma[2].d)
    else {
        return out;
    };
    let kind = classify(
        sigma[1].p,
        sigma[2].p,
        [sigma[0].d, sigma[1].d, sigma[2].d],
    );
    let mut branches = [*sigma; 2];
    match kind {
        Execution::Boundary => return out,
        Execution::Hadamard => {
            let input = sigma[2].d == DataSymbol::D1;
            for (branch, output) in branches.iter_mut().zip([false, true]) {
                branch[2].d = DataSymbol::from_bit(output);
                hadamard_branch(input, output, &mut branch[1].s);
            }
        }
        Execution::Toffoli | Execution::Swap | Execution::Idle => {
            let mut gated = *sigma;
            if kind == Execution::Toffoli && gated[0].d == DataSymbol::D1 && gated[1].d == DataSymbol::D1
            {
                gated[2].d = DataSymbol::from_bit(gated[2].d != DataSymbol::D1);
            }
            if kind == Execution::Swap {
                let (x, y) = (gated[1].d, gated[2].d);
                gated[1].d = y;
                gated[2].d = x;
            }
            let input = gated[1].a;
            for (branch, output) in branches.iter_mut().zip([false, true]) {
                *branch = gated;
                branch[1].a = output;
                hadamard_branch(input, output, &mut branch[1].s);
            }
        }
    }
    for mut tau in branches {
        tau[1].p = q0;
        tau[2].p = q1;
        match rule.direction(schedule) {
            Direction::Right => swap_carried(&mut tau, 1, 2),
            Direction::Left => swap_carried(&mut tau, 0, 1),
            Direction::None => {}
        }
        out.push(tau);
    }
    out
}

fn swap_carried(t: &mut LocalTriple, i: usize, j: usize) {
    let (a, s) = (t[i].a, t[i].s);
    t[i].a = t[j].a;
    t[i].s = t[j].s;
    t[j].a = a;
    t[j].s = s;
}
