//! The [[7,1,3]] Steane code and its concatenation.
//!
//! Qubit `j` (0-based) of a block sits at Hamming column `j + 1`, so the
//! syndrome of a single flipped bit is that bit's 1-based position. A level-`l`
//! block has `7^l` physical qubits laid out sub-block major.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::tableau::{Gate, StabilizerState};

/// Supports of the three Hamming parity checks (0-based qubits).
pub const CHECK_SUPPORTS: [[usize; 4]; 3] = [[0, 2, 4, 6], [1, 2, 5, 6], [3, 4, 5, 6]];

/// Qubits prepared in `|+⟩` by the encoder; each fans out along its row.
pub const PIVOTS: [usize; 3] = [0, 1, 3];

/// Encoder C-Not edges `(pivot, target)` producing `|0̄⟩`.
pub const ENCODER_EDGES: [(usize, usize); 9] = [
    (0, 2),
    (0, 4),
    (0, 6),
    (1, 2),
    (1, 5),
    (1, 6),
    (3, 4),
    (3, 5),
    (3, 6),
];

pub fn block_size(level: u32) -> usize {
    7usize.pow(level)
}

/// Three X-type then three Z-type weight-4 generators.
pub fn stabilizer_generators() -> Vec<PauliString> {
    let mut gens = Vec::with_capacity(6);
    for p in [Pauli::X, Pauli::Z] {
        for row in CHECK_SUPPORTS {
            gens.push(PauliString::uniform(7, row, p));
        }
    }
    gens
}

/// Generators of a level-`level` block: every level's checks lifted to
/// transversal logical operators on the sub-blocks.
pub fn concatenated_generators(level: u32) -> Vec<PauliString> {
    let n = block_size(level);
    let mut gens = Vec::new();
    for k in 1..=level {
        // checks of level k act on blocks of size 7^k, built from 7 sub-blocks of 7^(k-1)
        let sub = block_size(k - 1);
        for blk in 0..n / block_size(k) {
            let base = blk * block_size(k);
            for p in [Pauli::X, Pauli::Z] {
                for row in CHECK_SUPPORTS {
                    let qs = row.iter().flat_map(|&j| (base + j * sub)..(base + (j + 1) * sub));
                    gens.push(PauliString::uniform(n, qs, p));
                }
            }
        }
    }
    gens
}

pub fn logical_x(level: u32) -> PauliString {
    let n = block_size(level);
    PauliString::uniform(n, 0..n, Pauli::X)
}

pub fn logical_z(level: u32) -> PauliString {
    let n = block_size(level);
    PauliString::uniform(n, 0..n, Pauli::Z)
}

/// Syndrome of a 7-bit pattern: XOR of the 1-based positions of set bits.
#[inline]
pub fn syndrome_of(bits: u8) -> u8 {
    let mut s = 0;
    for j in 0..7 {
        if (bits >> j) & 1 == 1 {
            s ^= j as u8 + 1;
        }
    }
    s
}

/// Minimum-weight correction of a 7-bit pattern followed by its parity.
#[inline]
pub fn decode7(bits: u8) -> bool {
    let s = syndrome_of(bits);
    let corrected = if s == 0 { bits } else { bits ^ (1 << (s - 1)) };
    corrected.count_ones() % 2 == 1
}

/// Hierarchically decodes `7^level` bits (read through `bit`) into one
/// logical bit. Level 0 is the bit itself.
pub fn decode_level(level: u32, bit: &dyn Fn(usize) -> bool) -> bool {
    decode_at(level, 0, bit)
}

fn decode_at(level: u32, offset: usize, bit: &dyn Fn(usize) -> bool) -> bool {
    if level == 0 {
        return bit(offset);
    }
    decode7(top_bits(level, offset, bit))
}

fn top_bits(level: u32, offset: usize, bit: &dyn Fn(usize) -> bool) -> u8 {
    let sub = block_size(level - 1);
    let mut bits = 0u8;
    for j in 0..7 {
        if decode_at(level - 1, offset + j * sub, bit) {
            bits |= 1 << j;
        }
    }
    bits
}

/// Level-`level` syndrome of a measured pattern: lower levels are decoded,
/// then the three top-level checks are evaluated. Returns the 3-bit syndrome
/// and the raw parity of the decoded sub-block bits.
pub fn block_syndrome(level: u32, bit: &dyn Fn(usize) -> bool) -> (u8, bool) {
    assert!(level >= 1, "syndromes need a level >= 1 block");
    let bits = top_bits(level, 0, bit);
    (syndrome_of(bits), bits.count_ones() % 2 == 1)
}

/// Outcome of measuring the six generators of one block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Syndrome {
    /// Outcomes of the X-type checks; they flag Z errors.
    pub x_checks: u8,
    /// Outcomes of the Z-type checks; they flag X errors.
    pub z_checks: u8,
}

impl Syndrome {
    pub fn is_clean(&self) -> bool {
        self.x_checks == 0 && self.z_checks == 0
    }

    /// Syndrome of a Pauli error on one level-1 block.
    pub fn of_error(e: &PauliString) -> Self {
        let mut xs = 0u8;
        let mut zs = 0u8;
        for j in 0..7 {
            if e.x_bit(j) {
                xs |= 1 << j;
            }
            if e.z_bit(j) {
                zs |= 1 << j;
            }
        }
        Syndrome {
            x_checks: syndrome_of(zs),
            z_checks: syndrome_of(xs),
        }
    }

    pub fn xor(self, other: Self) -> Self {
        Syndrome {
            x_checks: self.x_checks ^ other.x_checks,
            z_checks: self.z_checks ^ other.z_checks,
        }
    }
}

/// A code block: `7^level` physical qubit indices, sub-block major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CodeBlock {
    pub level: u32,
    pub qubits: Vec<usize>,
}

impl CodeBlock {
    pub fn new(level: u32, qubits: Vec<usize>) -> Result<Self> {
        if level == 0 || qubits.len() != block_size(level) {
            return Err(Error::Domain(format!(
                "a level-{level} block needs {} qubits, got {}",
                block_size(level),
                qubits.len()
            )));
        }
        Ok(Self { level, qubits })
    }

    pub fn contiguous(level: u32, start: usize) -> Self {
        Self {
            level,
            qubits: (start..start + block_size(level)).collect(),
        }
    }

    /// The seven level-`level - 1` children.
    pub fn children(&self) -> Vec<CodeBlock> {
        let sub = block_size(self.level - 1);
        self.qubits
            .chunks(sub)
            .map(|c| CodeBlock {
                level: self.level - 1,
                qubits: c.to_vec(),
            })
            .collect()
    }

    /// Lifts a logical Pauli on this block to the physical register.
    pub fn logical(&self, n: usize, p: Pauli) -> PauliString {
        PauliString::uniform(n, self.qubits.iter().copied(), p)
    }
}

/// Noiseless encoder gates for a level-`level` block starting from `|0…0⟩`.
/// `plus` selects `|+̄⟩` instead of `|0̄⟩`.
pub fn encoder_gates(level: u32, plus: bool, qubits: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    push_encoder(level, plus, qubits, &mut out);
    out
}

fn push_encoder(level: u32, plus: bool, qubits: &[usize], out: &mut Vec<Gate>) {
    if level == 0 {
        if plus {
            out.push(Gate::H(qubits[0]));
        }
        return;
    }
    let sub = block_size(level - 1);
    let child = |j: usize| &qubits[j * sub..(j + 1) * sub];
    for j in 0..7 {
        push_encoder(level - 1, PIVOTS.contains(&j), child(j), out);
    }
    for (c, t) in ENCODER_EDGES {
        for (&a, &b) in child(c).iter().zip(child(t)) {
            out.push(Gate::Cnot(a, b));
        }
    }
    if plus {
        out.extend(qubits.iter().map(|&q| Gate::H(q)));
    }
}

/// Which code state to prepare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicalState {
    Zero,
    Plus,
}

/// Noiseless 7-qubit `|0̄⟩` or `|+̄⟩`.
pub fn encode_logical(which: LogicalState) -> StabilizerState {
    let mut s = StabilizerState::new(7);
    for g in encoder_gates(1, which == LogicalState::Plus, &(0..7).collect::<Vec<_>>()) {
        s.apply(g).expect("encoder targets are valid");
    }
    s
}

/// Applies `gate` transversally across equal-level blocks.
pub fn transversal_gate(
    state: &mut StabilizerState,
    blocks: &[&CodeBlock],
    gate: TransversalGate,
) -> Result<()> {
    match gate {
        TransversalGate::H | TransversalGate::S => {
            for q in &blocks[0].qubits {
                state.apply(if gate == TransversalGate::H {
                    Gate::H(*q)
                } else {
                    Gate::S(*q)
                })?;
            }
        }
        TransversalGate::Cz | TransversalGate::Cnot => {
            let (a, b) = (blocks[0], blocks[1]);
            if a.level != b.level {
                return Err(Error::LevelMismatch(a.level, b.level));
            }
            for (&x, &y) in a.qubits.iter().zip(&b.qubits) {
                state.apply(if gate == TransversalGate::Cz {
                    Gate::Cz(x, y)
                } else {
                    Gate::Cnot(x, y)
                })?;
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransversalGate {
    H,
    S,
    Cz,
    Cnot,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_shape() {
        let g = stabilizer_generators();
        assert_eq!(g.len(), 6);
        assert!(g.iter().all(|p| p.weight() == 4));
        for a in &g {
            for b in &g {
                assert!(a.commutes_with(b));
            }
            assert!(a.commutes_with(&logical_x(1)));
            assert!(a.commutes_with(&logical_z(1)));
        }
        assert!(!logical_x(1).commutes_with(&logical_z(1)));
    }

    #[test]
    fn encoded_zero_and_plus() {
        let zero = encode_logical(LogicalState::Zero);
        zero.check_invariants().unwrap();
        for g in stabilizer_generators() {
            assert!(zero.is_stabilized_by(&g), "{g}");
        }
        assert!(zero.is_stabilized_by(&logical_z(1)));
        let plus = encode_logical(LogicalState::Plus);
        for g in stabilizer_generators() {
            assert!(plus.is_stabilized_by(&g));
        }
        assert!(plus.is_stabilized_by(&logical_x(1)));
    }

    #[test]
    fn generators_with_logical_z_fix_zero_state() {
        // 6 generators + Z̄ are 7 independent commuting operators: they fix |0̄⟩
        let mut ops = stabilizer_generators();
        ops.push(logical_z(1));
        assert_eq!(crate::tableau::gf2_rank(&ops, 7), 7);
        let zero = encode_logical(LogicalState::Zero);
        for op in &ops {
            assert_eq!(zero.peek(op), Some(1));
        }
    }

    #[test]
    fn single_x_error_on_qubit_three() {
        // 1-based qubit 3 is column 011
        let e = PauliString::single(7, 2, Pauli::X);
        let s = Syndrome::of_error(&e);
        assert_eq!(s.z_checks, 0b011);
        assert_eq!(s.x_checks, 0);
    }

    #[test]
    fn decode_corrects_single_flips() {
        for j in 0..7 {
            assert!(!decode7(1 << j));
            assert!(decode7(!(1u8 << j) & 0x7f));
        }
        assert!(decode7(0x7f));
        assert!(!decode7(0));
        // two flips always decode to the wrong class
        for a in 0..7 {
            for b in (a + 1)..7 {
                assert!(decode7((1 << a) | (1 << b)));
            }
        }
    }

    #[test]
    fn concatenated_block_encodes() {
        let qs: Vec<usize> = (0..49).collect();
        let mut s = StabilizerState::new(49);
        for g in encoder_gates(2, false, &qs) {
            s.apply(g).unwrap();
        }
        for g in concatenated_generators(2) {
            assert!(s.is_stabilized_by(&g));
        }
        assert!(s.is_stabilized_by(&logical_z(2)));
        assert_eq!(concatenated_generators(2).len(), 48);
    }

    #[test]
    fn level_two_decoding() {
        // one flip in each of two different sub-blocks: corrected at level 1
        let flips = [3usize, 7 + 5];
        let bit = |i: usize| flips.contains(&i);
        assert!(!decode_level(2, &bit));
        assert_eq!(block_syndrome(2, &bit).0, 0);
        // two flips in one sub-block: a level-1 logical error, seen at level 2
        let flips = [7usize, 8];
        let bit = |i: usize| flips.contains(&i);
        assert_eq!(block_syndrome(2, &bit).0, 2);
        assert!(!decode_level(2, &bit));
    }

    #[test]
    fn code_block_children() {
        let b = CodeBlock::contiguous(2, 0);
        let ch = b.children();
        assert_eq!(ch.len(), 7);
        assert!(ch.iter().all(|c| c.qubits.len() == 7 && c.level == 1));
        assert!(CodeBlock::new(1, vec![0; 6]).is_err());
    }
}
