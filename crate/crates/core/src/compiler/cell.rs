//! The 224-symbol cell alphabet: program × data × aux bit × sim bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rewriting::{Alphabet, Symbol};

/// Gate symbols carried by the program band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateSymbol {
    I,
    H,
    S,
    T,
    B,
}

impl GateSymbol {
    pub const ALL: [GateSymbol; 5] = [
        GateSymbol::I,
        GateSymbol::H,
        GateSymbol::S,
        GateSymbol::T,
        GateSymbol::B,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProgramSymbol {
    GateI,
    GateH,
    GateS,
    GateT,
    GateB,
    MarkI,
    MarkH,
    MarkS,
    MarkT,
    MarkB,
    /// □, shifts the code left as it passes.
    Hole,
    /// ■, executes the gates it passes over.
    Exec,
    /// ◇, the turnaround signal.
    Turn,
    /// #
    Blank,
}

impl ProgramSymbol {
    pub const ALL: [ProgramSymbol; 14] = [
        ProgramSymbol::GateI,
        ProgramSymbol::GateH,
        ProgramSymbol::GateS,
        ProgramSymbol::GateT,
        ProgramSymbol::GateB,
        ProgramSymbol::MarkI,
        ProgramSymbol::MarkH,
        ProgramSymbol::MarkS,
        ProgramSymbol::MarkT,
        ProgramSymbol::MarkB,
        ProgramSymbol::Hole,
        ProgramSymbol::Exec,
        ProgramSymbol::Turn,
        ProgramSymbol::Blank,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn gate(g: GateSymbol) -> Self {
        Self::ALL[g as usize]
    }

    pub fn mark(g: GateSymbol) -> Self {
        Self::ALL[5 + g as usize]
    }

    /// The gate symbol if this is an unmarked gate.
    pub fn as_gate(self) -> Option<GateSymbol> {
        let i = self.index();
        (i < 5).then(|| GateSymbol::ALL[i])
    }

    /// The gate symbol if this is a marked gate.
    pub fn as_mark(self) -> Option<GateSymbol> {
        let i = self.index();
        (5..10).contains(&i).then(|| GateSymbol::ALL[i - 5])
    }

    pub fn name(self) -> &'static str {
        match self {
            ProgramSymbol::GateI => "GATE_I",
            ProgramSymbol::GateH => "GATE_H",
            ProgramSymbol::GateS => "GATE_S",
            ProgramSymbol::GateT => "GATE_T",
            ProgramSymbol::GateB => "GATE_B",
            ProgramSymbol::MarkI => "MARK_I",
            ProgramSymbol::MarkH => "MARK_H",
            ProgramSymbol::MarkS => "MARK_S",
            ProgramSymbol::MarkT => "MARK_T",
            ProgramSymbol::MarkB => "MARK_B",
            ProgramSymbol::Hole => "HOLE",
            ProgramSymbol::Exec => "EXEC",
            ProgramSymbol::Turn => "TURN",
            ProgramSymbol::Blank => "BLANK",
        }
    }

    /// Single-character rendering used in diagnostics.
    pub fn glyph(self) -> char {
        match self {
            ProgramSymbol::GateI => 'I',
            ProgramSymbol::GateH => 'H',
            ProgramSymbol::GateS => 'S',
            ProgramSymbol::GateT => 'T',
            ProgramSymbol::GateB => 'B',
            ProgramSymbol::MarkI => 'i',
            ProgramSymbol::MarkH => 'h',
            ProgramSymbol::MarkS => 's',
            ProgramSymbol::MarkT => 't',
            ProgramSymbol::MarkB => 'b',
            ProgramSymbol::Hole => '□',
            ProgramSymbol::Exec => '■',
            ProgramSymbol::Turn => '◇',
            ProgramSymbol::Blank => '#',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DataSymbol {
    D0,
    D1,
    /// ‖
    Sep,
    /// •
    Dot,
}

impl DataSymbol {
    pub const ALL: [DataSymbol; 4] = [DataSymbol::D0, DataSymbol::D1, DataSymbol::Sep, DataSymbol::Dot];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bit(b: bool) -> Self {
        if b {
            DataSymbol::D1
        } else {
            DataSymbol::D0
        }
    }

    /// The qubit value, for D0 and D1.
    pub fn bit(self) -> Option<bool> {
        match self {
            DataSymbol::D0 => Some(false),
            DataSymbol::D1 => Some(true),
            _ => None,
        }
    }

    pub fn is_bit(self) -> bool {
        self.bit().is_some()
    }

    pub fn name(self) -> &'static str {
        match self {
            DataSymbol::D0 => "D0",
            DataSymbol::D1 => "D1",
            DataSymbol::Sep => "SEP",
            DataSymbol::Dot => "DOT",
        }
    }

    pub fn glyph(self) -> char {
        match self {
            DataSymbol::D0 => '0',
            DataSymbol::D1 => '1',
            DataSymbol::Sep => '‖',
            DataSymbol::Dot => '•',
        }
    }
}

/// One tape cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub p: ProgramSymbol,
    pub d: DataSymbol,
    pub a: bool,
    pub s: bool,
}

/// Number of distinct cells.
pub const CELL_COUNT: usize = 14 * 4 * 2 * 2;

impl Cell {
    pub fn new(p: ProgramSymbol, d: DataSymbol) -> Self {
        Self {
            p,
            d,
            a: false,
            s: false,
        }
    }

    pub fn index(self) -> usize {
        ((self.p.index() * 4 + self.d.index()) * 2 + usize::from(self.a)) * 2 + usize::from(self.s)
    }

    pub fn symbol(self) -> Symbol {
        self.index() as Symbol
    }

    pub fn from_index(i: usize) -> Self {
        debug_assert!(i < CELL_COUNT);
        Self {
            p: ProgramSymbol::from_index(i / 16),
            d: DataSymbol::ALL[(i / 4) % 4],
            a: (i / 2) % 2 == 1,
            s: i % 2 == 1,
        }
    }

    pub fn from_symbol(s: Symbol) -> Self {
        Self::from_index(usize::from(s))
    }

    /// Token of the form `P.D.A.S`, e.g. `EXEC.D1.0.0`.
    pub fn token(self) -> String {
        format!(
            "{}.{}.{}.{}",
            self.p.name(),
            self.d.name(),
            u8::from(self.a),
            u8::from(self.s)
        )
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// The 224-token alphabet in cell index order.
pub fn cell_alphabet() -> Alphabet {
    Alphabet::new((0..CELL_COUNT).map(|i| Cell::from_index(i).token()))
        .expect("cell tokens are distinct")
}

/// Renders program and data bands of a cell string on two lines.
pub fn render_bands(cells: &[Cell]) -> String {
    let program: String = cells.iter().map(|c| c.p.glyph()).collect();
    let data: String = cells.iter().map(|c| c.d.glyph()).collect();
    format!("{program}\n{data}")
}
