//! Stabilizer tableau with destabilizers and a deferred Pauli frame.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers. Gates conjugate
//! every row and the frame. Errors are multiplied into the frame instead of
//! the tableau; a measurement reports the tableau outcome flipped when the
//! frame anticommutes with the observable.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    Cz(usize, usize),
    Cnot(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) => (q, None),
            Gate::Cz(a, b) | Gate::Cnot(a, b) => (a, Some(b)),
        }
    }

    /// Conjugates `p` in place; targets are assumed valid.
    pub fn conjugate(&self, p: &mut PauliString) {
        match *self {
            Gate::H(q) => p.conj_h(q),
            Gate::S(q) => p.conj_s(q),
            Gate::X(q) => p.conj_x(q),
            Gate::Z(q) => p.conj_z(q),
            Gate::Cz(a, b) => p.conj_cz(a, b),
            Gate::Cnot(c, t) => p.conj_cnot(c, t),
        }
    }
}

/// A measurement result: `outcome` is `+1` or `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: i8,
    pub deterministic: bool,
}

impl Measurement {
    pub fn is_minus(&self) -> bool {
        self.outcome < 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    rows: Vec<PauliString>,
    frame: PauliString,
}

impl StabilizerState {
    /// `|0…0⟩` on `n` qubits.
    pub fn new(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::X));
        }
        for q in 0..n {
            rows.push(PauliString::single(n, q, Pauli::Z));
        }
        Self {
            n,
            rows,
            frame: PauliString::identity(n),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    pub fn pauli_frame(&self) -> &PauliString {
        &self.frame
    }

    pub fn clear_frame(&mut self) {
        self.frame = PauliString::identity(self.n);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n,
            });
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: Gate) -> Result<&mut Self> {
        let (a, b) = gate.qubits();
        self.check_qubit(a)?;
        if let Some(b) = b {
            self.check_qubit(b)?;
            if a == b {
                return Err(Error::DuplicateTarget(a));
            }
        }
        for row in &mut self.rows {
            gate.conjugate(row);
        }
        gate.conjugate(&mut self.frame);
        Ok(self)
    }

    pub fn h(&mut self, q: usize) -> &mut Self {
        self.apply(Gate::H(q)).expect("invalid H target")
    }

    pub fn s(&mut self, q: usize) -> &mut Self {
        self.apply(Gate::S(q)).expect("invalid S target")
    }

    pub fn cz(&mut self, a: usize, b: usize) -> &mut Self {
        self.apply(Gate::Cz(a, b)).expect("invalid CZ targets")
    }

    pub fn cnot(&mut self, c: usize, t: usize) -> &mut Self {
        self.apply(Gate::Cnot(c, t)).expect("invalid CNOT targets")
    }

    /// Applies a Pauli directly to the state (not to the frame).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.n_qubits(),
            });
        }
        for q in p.support() {
            if p.x_bit(q) {
                for row in &mut self.rows {
                    row.conj_x(q);
                }
            }
            if p.z_bit(q) {
                for row in &mut self.rows {
                    row.conj_z(q);
                }
            }
        }
        Ok(())
    }

    /// Records an error in the Pauli frame.
    pub fn push_frame(&mut self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: p.n_qubits(),
            });
        }
        self.frame.mul_assign_right(p);
        Ok(())
    }

    /// Folds the frame into the state and clears it.
    pub fn flush_frame(&mut self) {
        let f = std::mem::replace(&mut self.frame, PauliString::identity(self.n));
        self.apply_pauli(&f).expect("frame has matching size");
    }

    /// Outcome the tableau alone would give, if `obs` is in the stabilizer
    /// group up to sign. The frame is ignored.
    pub fn peek(&self, obs: &PauliString) -> Option<i8> {
        if self.stabilizers().iter().any(|s| !s.commutes_with(obs)) {
            return None;
        }
        let mut acc = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.rows[i].commutes_with(obs) {
                acc.mul_assign_right(&self.rows[self.n + i]);
            }
        }
        debug_assert_eq!(acc.unsigned(), obs.unsigned());
        Some(if acc.phase() == obs.phase() { 1 } else { -1 })
    }

    /// Measures a Hermitian Pauli observable.
    pub fn measure_pauli<R: Rng + ?Sized>(&mut self, obs: &PauliString, rng: &mut R) -> Result<Measurement> {
        self.measure_with(obs, || rng.gen::<bool>())
    }

    /// Like [`measure_pauli`](Self::measure_pauli), but a random outcome is
    /// forced to `-1` when `minus` is set (before the frame flip).
    pub fn measure_pauli_forced(&mut self, obs: &PauliString, minus: bool) -> Result<Measurement> {
        self.measure_with(obs, || minus)
    }

    fn measure_with(&mut self, obs: &PauliString, coin: impl FnOnce() -> bool) -> Result<Measurement> {
        if obs.n_qubits() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: obs.n_qubits(),
            });
        }
        let flip = !self.frame.commutes_with(obs);
        let pivot = (self.n..2 * self.n).find(|&r| !self.rows[r].commutes_with(obs));
        let (outcome, deterministic) = match pivot {
            None => (self.peek(obs).expect("commutes with all stabilizers"), true),
            Some(p) => {
                let pivot_row = self.rows[p].clone();
                for r in 0..2 * self.n {
                    if r != p && !self.rows[r].commutes_with(obs) {
                        self.rows[r].mul_assign_right(&pivot_row);
                    }
                }
                let outcome: i8 = if coin() { -1 } else { 1 };
                let mut new_stab = obs.clone();
                if outcome < 0 {
                    new_stab.set_phase(new_stab.phase() + 2);
                }
                self.rows[p - self.n] = pivot_row;
                self.rows[p] = new_stab;
                (outcome, false)
            }
        };
        Ok(Measurement {
            outcome: if flip { -outcome } else { outcome },
            deterministic,
        })
    }

    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<Measurement> {
        self.check_qubit(q)?;
        let obs = PauliString::single(self.n, q, Pauli::Z);
        self.measure_pauli(&obs, rng)
    }

    pub fn measure_x<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<Measurement> {
        self.check_qubit(q)?;
        let obs = PauliString::single(self.n, q, Pauli::X);
        self.measure_pauli(&obs, rng)
    }

    /// Resets qubit `q` to `|0⟩`, clearing its frame component.
    pub fn reset<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<()> {
        self.check_qubit(q)?;
        self.frame.set(q, Pauli::I);
        let m = self.measure_z(q, rng)?;
        if m.is_minus() {
            self.apply_pauli(&PauliString::single(self.n, q, Pauli::X))?;
        }
        Ok(())
    }

    /// True when `obs` (with its sign) stabilizes the state, frame included.
    pub fn is_stabilized_by(&self, obs: &PauliString) -> bool {
        let flip = !self.frame.commutes_with(obs);
        match self.peek(obs) {
            Some(o) => (if flip { -o } else { o }) == 1,
            None => false,
        }
    }

    /// Checks commutation relations and full symplectic rank.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let s_i = &self.rows[n + i];
                if !s_i.commutes_with(&self.rows[n + j]) {
                    return Err(format!("stabilizers {i} and {j} anticommute"));
                }
                let anti = !s_i.commutes_with(&self.rows[j]);
                if anti != (i == j) {
                    return Err(format!("stabilizer {i} vs destabilizer {j}: wrong relation"));
                }
            }
            if !self.rows[n + i].label_phase().is_multiple_of(2) {
                return Err(format!("stabilizer {i} is not Hermitian"));
            }
        }
        if gf2_rank(&self.rows, n) != 2 * n {
            return Err("generators are not independent".into());
        }
        Ok(())
    }

    /// Generators of the stabilizer subgroup supported on `qubits`.
    pub fn subgroup_on(&self, qubits: &[usize]) -> Vec<PauliString> {
        let keep: Vec<bool> = (0..self.n).map(|q| qubits.contains(&q)).collect();
        let mut rows: Vec<PauliString> = self.stabilizers().to_vec();
        let mut rank = 0;
        // eliminate on columns outside `qubits`
        for q in (0..self.n).filter(|&q| !keep[q]) {
            for use_x in [true, false] {
                let bit = |p: &PauliString| if use_x { p.x_bit(q) } else { p.z_bit(q) };
                if let Some(pos) = (rank..rows.len()).find(|&r| bit(&rows[r])) {
                    rows.swap(rank, pos);
                    let pivot = rows[rank].clone();
                    for (r, row) in rows.iter_mut().enumerate() {
                        if r != rank && bit(row) {
                            row.mul_assign_right(&pivot);
                        }
                    }
                    rank += 1;
                }
            }
        }
        rows.split_off(rank)
            .into_iter()
            .filter(|p| !p.is_identity())
            .collect()
    }
}

/// Rank over GF(2) of the symplectic matrix formed by `rows`.
pub(crate) fn gf2_rank(rows: &[PauliString], n: usize) -> usize {
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.x_words().iter().chain(r.z_words()).copied().collect())
        .collect();
    let w = crate::pauli::word_count(n);
    let mut rank = 0;
    for col in 0..2 * n {
        let (word, bit) = if col < n {
            (col >> 6, col & 63)
        } else {
            (w + ((col - n) >> 6), (col - n) & 63)
        };
        let Some(pos) = (rank..m.len()).find(|&r| (m[r][word] >> bit) & 1 == 1) else {
            continue;
        };
        m.swap(rank, pos);
        let pivot = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && (row[word] >> bit) & 1 == 1 {
                for (a, b) in row.iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}
