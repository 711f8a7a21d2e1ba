//! Placement of a circuit on the program and data bands.
//!
//! With block size n = qubits + 1, the data band holds the register
//! followed by a separator, framed by separator-delimited blocks of dots
//! on both sides. The program band holds `B ■` with ■ above the first
//! register cell, followed by one block of n code symbols per layer.
//! Slot q of block k sits above qubit q during the k-th pass of ■ over
//! the register; slot n−1 sits above the separator and always holds I.
//! Each pass translates the code left by one block, so the margins grow
//! with the number of blocks.

use serde::Serialize;
use thiserror::Error;

use super::cell::{Cell, DataSymbol, GateSymbol, ProgramSymbol};
use crate::circuit::{Circuit, CircuitError, GateKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("input has {bits} bits but the register holds {n_qubits}")]
    RegisterOverflow { bits: usize, n_qubits: usize },
    #[error("code position {index} receives two symbols")]
    Collision { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub program: Vec<ProgramSymbol>,
    pub data: Vec<DataSymbol>,
    /// Column of the first register cell; ■ starts here.
    pub register_start: usize,
    /// n = qubits + 1.
    pub block: usize,
    pub n_qubits: usize,
    /// Number of code blocks, including a leading empty block or a
    /// trailing block for the terminating B when needed.
    pub blocks: usize,
    /// Whether an empty block was inserted in front of the first layer
    /// because it needs a symbol above qubit 0, where ■ starts.
    pub leading_empty_layer: bool,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.program.len()
    }

    pub fn is_empty(&self) -> bool {
        self.program.is_empty()
    }

    pub fn is_register(&self, column: usize) -> bool {
        (self.register_start..self.register_start + self.n_qubits).contains(&column)
    }

    /// Cells with aux and sim bits zero.
    pub fn cells(&self, program: &[ProgramSymbol]) -> Vec<Cell> {
        program
            .iter()
            .zip(&self.data)
            .map(|(&p, &d)| Cell::new(p, d))
            .collect()
    }

    pub fn render(&self) -> String {
        let program: String = self.program.iter().map(|p| p.glyph()).collect();
        let data: String = self.data.iter().map(|d| d.glyph()).collect();
        format!("{program}\n{data}")
    }
}

fn gate_symbol(kind: GateKind) -> GateSymbol {
    match kind {
        GateKind::Hadamard => GateSymbol::H,
        GateKind::Swap => GateSymbol::S,
        GateKind::Toffoli => GateSymbol::T,
    }
}

/// Lays out a validated circuit with input x (remaining qubits zero).
pub fn layout(circuit: &Circuit, x: &[bool]) -> Result<Layout, LayoutError> {
    circuit.validate()?;
    let nq = circuit.n_qubits;
    if x.len() > nq {
        return Err(LayoutError::RegisterOverflow {
            bits: x.len(),
            n_qubits: nq,
        });
    }
    let n = nq + 1;

    // Gate symbol slots per layer.
    let mut layers: Vec<Vec<(usize, GateSymbol)>> = circuit
        .layers
        .iter()
        .map(|layer| {
            let mut v: Vec<(usize, GateSymbol)> = layer
                .gates
                .iter()
                .map(|g| (g.last_qubit(), gate_symbol(g.kind)))
                .collect();
            v.sort();
            v
        })
        .collect();
    let leading_empty_layer = layers
        .first()
        .is_some_and(|l| l.iter().any(|&(slot, _)| slot == 0));
    if leading_empty_layer || layers.is_empty() {
        layers.insert(0, Vec::new());
    }

    // Terminating B: first register slot of the last block past all of
    // its gate symbols. Slot 0 of the first block is occupied by ■.
    let last = layers.len() - 1;
    let min_slot = match layers[last].iter().map(|&(s, _)| s + 1).max() {
        Some(s) => s,
        None if last == 0 => 1,
        None => 0,
    };
    let (blocks, b_index) = if min_slot < nq {
        (layers.len(), last * n + min_slot)
    } else {
        (layers.len() + 1, layers.len() * n)
    };

    // Code symbols c_1..c_K after ■, indexed so that c_i sits at
    // register_start + i.
    let k_len = blocks * n - 1;
    let mut code: Vec<Option<GateSymbol>> = vec![None; k_len + 1];
    for (k, layer) in layers.iter().enumerate() {
        for &(slot, g) in layer {
            let i = k * n + slot;
            if i == 0 || code[i].is_some() {
                return Err(LayoutError::Collision { index: i });
            }
            code[i] = Some(g);
        }
    }
    if code[b_index].is_some() {
        return Err(LayoutError::Collision { index: b_index });
    }
    code[b_index] = Some(GateSymbol::B);

    let r = n * (blocks - 1) + 3;
    let len = r + k_len + 3;
    let mut program = vec![ProgramSymbol::Blank; len];
    program[r - 1] = ProgramSymbol::GateB;
    program[r] = ProgramSymbol::Exec;
    for (i, c) in code.iter().enumerate().skip(1) {
        program[r + i] = ProgramSymbol::gate(c.unwrap_or(GateSymbol::I));
    }

    let mut data = vec![DataSymbol::Dot; len];
    // Separators at r − 1 + k·n for k = −(blocks − 1) ..= blocks.
    let lowest = r - 1 - (blocks - 1) * n;
    for k in 0..2 * blocks {
        data[lowest + k * n] = DataSymbol::Sep;
    }
    for q in 0..nq {
        data[r + q] = DataSymbol::from_bit(x.get(q).copied().unwrap_or(false));
    }

    Ok(Layout {
        program,
        data,
        register_start: r,
        block: n,
        n_qubits: nq,
        blocks,
        leading_empty_layer,
    })
}
