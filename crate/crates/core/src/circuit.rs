//! Flat circuit representation shared by every executor.
//!
//! A [`Circuit`] is a list of [`Op`]s on a pool of physical qubits. Verified
//! sub-preparations are [`Segment`]s: an executor may repeat a segment until
//! all of its checks pass, which is how lower-level resources are supplied
//! "already verified" to the gadget that consumes them.

use serde::{Deserialize, Serialize};

use crate::pauli::{Pauli, PauliString};
use crate::steane::{self, LogicalState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    /// The single-qubit error that flips a measurement (or preparation) in
    /// this basis.
    pub fn flip_error(self) -> Pauli {
        match self {
            Basis::X => Pauli::Z,
            Basis::Z => Pauli::X,
        }
    }

    pub fn observable(self) -> Pauli {
        match self {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// Physical preparation of `|0⟩` (Z) or `|+⟩` (X); noisy.
    Prep {
        q: usize,
        basis: Basis,
    },
    /// Noiseless single-qubit gates.
    H(usize),
    S(usize),
    /// Noisy two-qubit gates, followed by a draw from the two-qubit table.
    Cz(usize, usize),
    Cnot(usize, usize),
    /// Noisy single-qubit measurement into `record`.
    Measure {
        q: usize,
        basis: Basis,
        record: usize,
    },
    /// A block that appears already encoded and verified, carrying the
    /// homogeneous single-qubit error model on every physical qubit.
    Fresh {
        qubits: Vec<usize>,
        level: u32,
        state: LogicalState,
    },
    /// Applies `pauli` to `target` when `record` reads `-1`.
    Feedforward {
        record: usize,
        target: usize,
        pauli: Pauli,
    },
    /// Deterministic planted error.
    Error {
        q: usize,
        pauli: Pauli,
    },
    /// Evaluates check `id`; a dirty check rejects the enclosing segment.
    Check(usize),
    Segment(Segment),
}

impl Op {
    /// True for operations that carry a noise location.
    pub fn is_noisy(&self) -> bool {
        matches!(
            self,
            Op::Prep { .. } | Op::Cz(..) | Op::Cnot(..) | Op::Measure { .. } | Op::Fresh { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub label: String,
    pub ops: Vec<Op>,
}

/// Syndrome check over measured blocks. Each entry of `blocks` lists the
/// `7^level` records of one block in block order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub level: u32,
    pub blocks: Vec<Vec<usize>>,
    /// Also require the decoded logical value to be `+1`.
    pub logical: bool,
}

impl Check {
    /// Evaluates the check on record values (`true` = `-1` or flipped).
    ///
    /// Applied to flip patterns this is exact whenever the noiseless record
    /// values form codewords, which holds for every check we build.
    pub fn passes(&self, bit: impl Fn(usize) -> bool) -> bool {
        self.blocks.iter().all(|recs| {
            let (syn, parity) = steane::block_syndrome(self.level, &|i| bit(recs[i]));
            syn == 0 && !(self.logical && parity)
        })
    }
}

/// One logical qubit delivered by a circuit: either a live block or a block
/// that was read out transversally.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputBlock {
    pub level: u32,
    pub qubits: Vec<usize>,
    pub measured: Option<(Basis, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub n_records: usize,
    pub ops: Vec<Op>,
    pub checks: Vec<Check>,
    pub outputs: Vec<OutputBlock>,
    /// Generators of the ideal logical state, one qubit per output.
    pub logical_stabilizers: Vec<PauliString>,
}

impl Circuit {
    /// Residual logical Pauli on the outputs, given the physical frame and
    /// record flips. Live blocks are decoded hierarchically per error type;
    /// a flipped readout counts as the error that anticommutes with its basis.
    pub fn logical_frame(
        &self,
        x_of: impl Fn(usize) -> bool,
        z_of: impl Fn(usize) -> bool,
        record: impl Fn(usize) -> bool,
    ) -> PauliString {
        let mut out = PauliString::identity(self.outputs.len());
        for (i, o) in self.outputs.iter().enumerate() {
            let p = match &o.measured {
                Some((basis, recs)) => {
                    if steane::decode_level(o.level, &|j| record(recs[j])) {
                        basis.flip_error()
                    } else {
                        Pauli::I
                    }
                }
                None => Pauli::from_bits(
                    steane::decode_level(o.level, &|j| x_of(o.qubits[j])),
                    steane::decode_level(o.level, &|j| z_of(o.qubits[j])),
                ),
            };
            out.set(i, p);
        }
        out
    }

    /// A logical frame is an error when it anticommutes with the ideal state.
    pub fn is_logical_error(&self, frame: &PauliString) -> bool {
        self.logical_stabilizers.iter().any(|s| !s.commutes_with(frame))
    }

    /// Canonical representative of `frame` modulo the ideal stabilizer group,
    /// phases ignored. The identity means the frame acts trivially.
    pub fn reduce_frame(&self, frame: &PauliString) -> PauliString {
        let n = frame.n_qubits();
        assert!(n <= 32, "logical frames are limited to 32 outputs");
        let bits = |p: &PauliString| -> u64 {
            (0..n).fold(0, |a, i| {
                a | (p.x_bit(i) as u64) << i | (p.z_bit(i) as u64) << (32 + i)
            })
        };
        let mut rows: Vec<u64> = Vec::new();
        for s in &self.logical_stabilizers {
            let mut v = bits(s);
            for &r in &rows {
                v = v.min(v ^ r);
            }
            if v != 0 {
                rows.push(v);
                rows.sort_unstable_by(|a, b| b.cmp(a));
            }
        }
        let mut v = bits(frame);
        for &r in &rows {
            v = v.min(v ^ r);
        }
        let mut out = PauliString::identity(n);
        for i in 0..n {
            out.set(i, Pauli::from_bits(v >> i & 1 == 1, v >> (32 + i) & 1 == 1));
        }
        out
    }

    /// Number of noise locations, segments counted once.
    pub fn location_count(&self) -> usize {
        fn walk(ops: &[Op]) -> usize {
            ops.iter()
                .map(|op| match op {
                    Op::Segment(s) => walk(&s.ops),
                    Op::Fresh { qubits, .. } => qubits.len(),
                    op if op.is_noisy() => 1,
                    _ => 0,
                })
                .sum()
        }
        walk(&self.ops)
    }

    pub fn segment_count(&self) -> usize {
        fn walk(ops: &[Op]) -> usize {
            ops.iter()
                .map(|op| match op {
                    Op::Segment(s) => 1 + walk(&s.ops),
                    _ => 0,
                })
                .sum()
        }
        walk(&self.ops)
    }

    /// Copy with a planted error inserted after the operation at `path`
    /// (indices into nested segment bodies).
    pub fn with_error_after(&self, path: &[usize], q: usize, pauli: Pauli) -> Circuit {
        fn insert(ops: &mut Vec<Op>, path: &[usize], op: Op) {
            if path.len() == 1 {
                ops.insert(path[0] + 1, op);
            } else if let Op::Segment(s) = &mut ops[path[0]] {
                insert(&mut s.ops, &path[1..], op);
            } else {
                panic!("path does not lead into a segment");
            }
        }
        let mut c = self.clone();
        insert(&mut c.ops, path, Op::Error { q, pauli });
        c
    }

    /// Paths of all noisy operations in schedule order.
    pub fn noisy_paths(&self) -> Vec<Vec<usize>> {
        fn walk(ops: &[Op], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            for (i, op) in ops.iter().enumerate() {
                prefix.push(i);
                match op {
                    Op::Segment(s) => walk(&s.ops, prefix, out),
                    op if op.is_noisy() => out.push(prefix.clone()),
                    _ => {}
                }
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(&self.ops, &mut Vec::new(), &mut out);
        out
    }

    pub fn op_at(&self, path: &[usize]) -> &Op {
        let mut ops = &self.ops;
        for (k, &i) in path.iter().enumerate() {
            if k + 1 == path.len() {
                return &ops[i];
            }
            match &ops[i] {
                Op::Segment(s) => ops = &s.ops,
                _ => panic!("path does not lead into a segment"),
            }
        }
        panic!("empty path")
    }
}

/// Incremental circuit construction with qubit reuse.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    n_qubits: usize,
    free: Vec<usize>,
    n_records: usize,
    stack: Vec<(String, Vec<Op>)>,
    ops: Vec<Op>,
    checks: Vec<Check>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, k: usize) -> Vec<usize> {
        (0..k)
            .map(|_| {
                self.free.pop().unwrap_or_else(|| {
                    self.n_qubits += 1;
                    self.n_qubits - 1
                })
            })
            .collect()
    }

    /// Returns measured qubits to the pool. Reused qubits are always
    /// prepared again before use.
    pub fn release(&mut self, qubits: &[usize]) {
        self.free.extend(qubits.iter().rev());
    }

    fn push(&mut self, op: Op) {
        match self.stack.last_mut() {
            Some((_, ops)) => ops.push(op),
            None => self.ops.push(op),
        }
    }

    pub fn prep(&mut self, q: usize, basis: Basis) {
        self.push(Op::Prep { q, basis });
    }

    pub fn h(&mut self, q: usize) {
        self.push(Op::H(q));
    }

    pub fn s(&mut self, q: usize) {
        self.push(Op::S(q));
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.push(Op::Cz(a, b));
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        self.push(Op::Cnot(c, t));
    }

    pub fn record_count(&self) -> usize {
        self.n_records
    }

    pub fn measure(&mut self, q: usize, basis: Basis) -> usize {
        let record = self.n_records;
        self.n_records += 1;
        self.push(Op::Measure { q, basis, record });
        record
    }

    pub fn measure_block(&mut self, qubits: &[usize], basis: Basis) -> Vec<usize> {
        qubits.iter().map(|&q| self.measure(q, basis)).collect()
    }

    pub fn fresh(&mut self, qubits: &[usize], level: u32, state: LogicalState) {
        self.push(Op::Fresh {
            qubits: qubits.to_vec(),
            level,
            state,
        });
    }

    pub fn feedforward(&mut self, record: usize, target: usize, pauli: Pauli) {
        self.push(Op::Feedforward {
            record,
            target,
            pauli,
        });
    }

    pub fn error(&mut self, q: usize, pauli: Pauli) {
        self.push(Op::Error { q, pauli });
    }

    pub fn check(&mut self, name: &str, level: u32, blocks: Vec<Vec<usize>>, logical: bool) -> usize {
        let id = self.checks.len();
        self.checks.push(Check {
            name: name.to_string(),
            level,
            blocks,
            logical,
        });
        self.push(Op::Check(id));
        id
    }

    pub fn begin_segment(&mut self, label: &str) {
        self.stack.push((label.to_string(), Vec::new()));
    }

    pub fn end_segment(&mut self) {
        let (label, ops) = self.stack.pop().expect("no open segment");
        self.push(Op::Segment(Segment { label, ops }));
    }

    pub fn finish(
        self,
        name: &str,
        outputs: Vec<OutputBlock>,
        logical_stabilizers: Vec<PauliString>,
    ) -> Circuit {
        assert!(self.stack.is_empty(), "unterminated segment");
        Circuit {
            name: name.to_string(),
            n_qubits: self.n_qubits,
            n_records: self.n_records,
            ops: self.ops,
            checks: self.checks,
            outputs,
            logical_stabilizers,
        }
    }
}
