//! Single-shot executors: a Pauli-frame simulator driven by a
//! [`NoiseSource`], and a tableau executor for noiseless soundness checks.

use rand::Rng;

use crate::analytic;
use crate::circuit::{Basis, Circuit, Op};
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::{flip_bit, get_bit, word_count, Pauli, PauliString};
use crate::steane::{self, LogicalState};
use crate::tableau::{Gate, StabilizerState};

/// Where the frame executor draws its faults from.
pub trait NoiseSource {
    fn prep_flip(&mut self) -> bool;
    fn measure_flip(&mut self) -> bool;
    fn two_qubit(&mut self) -> (Pauli, Pauli);
    /// Error on one qubit of a fresh verified block.
    fn fresh(&mut self) -> Pauli;
}

/// No faults at all; planted [`Op::Error`]s still apply.
#[derive(Clone, Copy, Debug, Default)]
pub struct Noiseless;

impl NoiseSource for Noiseless {
    fn prep_flip(&mut self) -> bool {
        false
    }
    fn measure_flip(&mut self) -> bool {
        false
    }
    fn two_qubit(&mut self) -> (Pauli, Pauli) {
        (Pauli::I, Pauli::I)
    }
    fn fresh(&mut self) -> Pauli {
        Pauli::I
    }
}

/// Faults drawn from a [`NoiseModel`].
pub struct SampledNoise<'a, R: Rng + ?Sized> {
    model: &'a NoiseModel<f64>,
    eps: [f64; 3],
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> SampledNoise<'a, R> {
    pub fn new(model: &'a NoiseModel<f64>, rng: &'a mut R) -> Self {
        let e = analytic::homogeneous_errors(model);
        Self {
            model,
            eps: [e.eps_x, e.eps_y, e.eps_z],
            rng,
        }
    }
}

impl<R: Rng + ?Sized> NoiseSource for SampledNoise<'_, R> {
    fn prep_flip(&mut self) -> bool {
        self.model.sample_measurement_flip(self.rng)
    }
    fn measure_flip(&mut self) -> bool {
        self.model.sample_measurement_flip(self.rng)
    }
    fn two_qubit(&mut self) -> (Pauli, Pauli) {
        self.model.sample_pair(self.rng)
    }
    fn fresh(&mut self) -> Pauli {
        let mut u: f64 = self.rng.gen();
        for (p, e) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().zip(self.eps) {
            if u < e {
                return p;
            }
            u -= e;
        }
        Pauli::I
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExecOptions {
    /// Repeat a segment until its checks pass; otherwise a dirty segment
    /// rejects the whole run.
    pub retry: bool,
    pub max_attempts: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            retry: true,
            max_attempts: 1_000_000,
        }
    }
}

impl ExecOptions {
    pub fn abort() -> Self {
        Self {
            retry: false,
            ..Self::default()
        }
    }
}

/// Result of one frame-simulated run.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRun {
    pub accepted: bool,
    pub failed_check: Option<usize>,
    /// Record flips relative to the noiseless run, bit-packed.
    pub flips: Vec<u64>,
    pub frame_x: Vec<u64>,
    pub frame_z: Vec<u64>,
    /// Segment repetitions beyond the first attempt.
    pub retries: u64,
}

impl FrameRun {
    pub fn flip(&self, r: usize) -> bool {
        get_bit(&self.flips, r)
    }

    pub fn frame(&self, n: usize) -> PauliString {
        PauliString::from_bits(self.frame_x.clone(), self.frame_z.clone(), n, 0)
    }

    pub fn logical_frame(&self, c: &Circuit) -> PauliString {
        c.logical_frame(
            |q| get_bit(&self.frame_x, q),
            |q| get_bit(&self.frame_z, q),
            |r| get_bit(&self.flips, r),
        )
    }
}

struct FrameExec<'a, N: NoiseSource> {
    c: &'a Circuit,
    noise: &'a mut N,
    opts: ExecOptions,
    x: Vec<u64>,
    z: Vec<u64>,
    flips: Vec<u64>,
    retries: u64,
}

impl<N: NoiseSource> FrameExec<'_, N> {
    fn xor(&mut self, q: usize, p: Pauli) {
        if p.x_bit() {
            flip_bit(&mut self.x, q);
        }
        if p.z_bit() {
            flip_bit(&mut self.z, q);
        }
    }

    fn clear(&mut self, q: usize) {
        crate::pauli::set_bit(&mut self.x, q, false);
        crate::pauli::set_bit(&mut self.z, q, false);
    }

    fn run(&mut self, ops: &[Op]) -> std::result::Result<(), usize> {
        for op in ops {
            match op {
                Op::Prep { q, basis } => {
                    self.clear(*q);
                    if self.noise.prep_flip() {
                        self.xor(*q, basis.flip_error());
                    }
                }
                Op::H(q) => Self::swap_xz(&mut self.x, &mut self.z, *q),
                Op::S(q) => {
                    if get_bit(&self.x, *q) {
                        flip_bit(&mut self.z, *q);
                    }
                }
                Op::Cz(a, b) => {
                    let (xa, xb) = (get_bit(&self.x, *a), get_bit(&self.x, *b));
                    if xb {
                        flip_bit(&mut self.z, *a);
                    }
                    if xa {
                        flip_bit(&mut self.z, *b);
                    }
                    let (pa, pb) = self.noise.two_qubit();
                    self.xor(*a, pa);
                    self.xor(*b, pb);
                }
                Op::Cnot(c, t) => {
                    if get_bit(&self.x, *c) {
                        flip_bit(&mut self.x, *t);
                    }
                    if get_bit(&self.z, *t) {
                        flip_bit(&mut self.z, *c);
                    }
                    let (pc, pt) = self.noise.two_qubit();
                    self.xor(*c, pc);
                    self.xor(*t, pt);
                }
                Op::Measure { q, basis, record } => {
                    let anti = match basis {
                        Basis::Z => get_bit(&self.x, *q),
                        Basis::X => get_bit(&self.z, *q),
                    };
                    let flipped = anti ^ self.noise.measure_flip();
                    crate::pauli::set_bit(&mut self.flips, *record, flipped);
                    self.clear(*q);
                }
                Op::Fresh { qubits, .. } => {
                    for &q in qubits {
                        self.clear(q);
                        let p = self.noise.fresh();
                        self.xor(q, p);
                    }
                }
                Op::Feedforward {
                    record,
                    target,
                    pauli,
                } => {
                    if get_bit(&self.flips, *record) {
                        self.xor(*target, *pauli);
                    }
                }
                Op::Error { q, pauli } => self.xor(*q, *pauli),
                Op::Check(id) => {
                    let flips = &self.flips;
                    if !self.c.checks[*id].passes(|r| get_bit(flips, r)) {
                        return Err(*id);
                    }
                }
                Op::Segment(seg) => {
                    let mut attempts = 0u64;
                    loop {
                        match self.run(&seg.ops) {
                            Ok(()) => break,
                            Err(id) => {
                                attempts += 1;
                                if !self.opts.retry || attempts >= self.opts.max_attempts {
                                    return Err(id);
                                }
                                self.retries += 1;
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn swap_xz(x: &mut [u64], z: &mut [u64], q: usize) {
        let (a, b) = (get_bit(x, q), get_bit(z, q));
        if a != b {
            flip_bit(x, q);
            flip_bit(z, q);
        }
    }
}

/// Runs `c` once, tracking only the error frame.
pub fn run_frame<N: NoiseSource>(c: &Circuit, noise: &mut N, opts: ExecOptions) -> FrameRun {
    let w = word_count(c.n_qubits);
    let mut ex = FrameExec {
        c,
        noise,
        opts,
        x: vec![0; w],
        z: vec![0; w],
        flips: vec![0; word_count(c.n_records)],
        retries: 0,
    };
    let res = ex.run(&c.ops);
    FrameRun {
        accepted: res.is_ok(),
        failed_check: res.err(),
        flips: ex.flips,
        frame_x: ex.x,
        frame_z: ex.z,
        retries: ex.retries,
    }
}

/// Result of a tableau run.
#[derive(Clone, Debug)]
pub struct TableauRun {
    pub accepted: bool,
    pub failed_check: Option<usize>,
    /// `true` where the record read `-1`.
    pub outcomes: Vec<bool>,
    pub state: StabilizerState,
}

/// Runs `c` on a full stabilizer state, without noise. Planted errors are
/// applied to the state; feedforward is applied physically. Segments run
/// once, since a noiseless segment either always or never passes.
pub fn run_tableau<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> Result<TableauRun> {
    let mut st = StabilizerState::new(c.n_qubits);
    let mut outcomes = vec![false; c.n_records];
    let res = tableau_ops(c, &c.ops, &mut st, &mut outcomes, rng)?;
    Ok(TableauRun {
        accepted: res.is_none(),
        failed_check: res,
        outcomes,
        state: st,
    })
}

fn tableau_ops<R: Rng + ?Sized>(
    c: &Circuit,
    ops: &[Op],
    st: &mut StabilizerState,
    outcomes: &mut [bool],
    rng: &mut R,
) -> Result<Option<usize>> {
    let n = c.n_qubits;
    for op in ops {
        match op {
            Op::Prep { q, basis } => {
                st.reset(*q, rng)?;
                if *basis == Basis::X {
                    st.apply(Gate::H(*q))?;
                }
            }
            Op::H(q) => {
                st.apply(Gate::H(*q))?;
            }
            Op::S(q) => {
                st.apply(Gate::S(*q))?;
            }
            Op::Cz(a, b) => {
                st.apply(Gate::Cz(*a, *b))?;
            }
            Op::Cnot(a, b) => {
                st.apply(Gate::Cnot(*a, *b))?;
            }
            Op::Measure { q, basis, record } => {
                let obs = PauliString::single(n, *q, basis.observable());
                outcomes[*record] = st.measure_pauli(&obs, rng)?.is_minus();
            }
            Op::Fresh { qubits, level, state } => {
                for &q in qubits {
                    st.reset(q, rng)?;
                }
                for g in steane::encoder_gates(*level, *state == LogicalState::Plus, qubits) {
                    st.apply(g)?;
                }
            }
            Op::Feedforward {
                record,
                target,
                pauli,
            } => {
                if outcomes[*record] {
                    st.apply_pauli(&PauliString::single(n, *target, *pauli))?;
                }
            }
            Op::Error { q, pauli } => st.apply_pauli(&PauliString::single(n, *q, *pauli))?,
            Op::Check(id) => {
                if !c.checks[*id].passes(|r| outcomes[r]) {
                    return Ok(Some(*id));
                }
            }
            Op::Segment(seg) => {
                if let Some(id) = tableau_ops(c, &seg.ops, st, outcomes, rng)? {
                    return Ok(Some(id));
                }
            }
        }
    }
    Ok(None)
}

impl TableauRun {
    /// Checks that live outputs are codewords stabilized by the ideal logical
    /// generators, and that readouts decode to the ideal eigenvalue.
    pub fn verify_ideal(&self, c: &Circuit) -> std::result::Result<(), String> {
        if !self.accepted {
            return Err(format!("rejected at check {:?}", self.failed_check));
        }
        let n = c.n_qubits;
        for (i, o) in c.outputs.iter().enumerate() {
            if o.measured.is_some() {
                continue;
            }
            for g in steane::concatenated_generators(o.level) {
                let mut p = PauliString::identity(n);
                for j in g.support() {
                    p.set(o.qubits[j], g.get(j));
                }
                if self.state.peek(&p) != Some(1) {
                    return Err(format!("output {i} leaves the code space ({g})"));
                }
            }
        }
        for s in &c.logical_stabilizers {
            let mut phys = PauliString::identity(n);
            for i in s.support() {
                let o = &c.outputs[i];
                let letter = s.get(i);
                match &o.measured {
                    Some((basis, recs)) => {
                        if s.weight() != 1 || letter != basis.observable() {
                            return Err(format!("stabilizer {s} is not a readout of output {i}"));
                        }
                        let minus = steane::decode_level(o.level, &|j| self.outcomes[recs[j]]);
                        if minus != (s.label_phase() == 2) {
                            return Err(format!("readout of output {i} disagrees with {s}"));
                        }
                    }
                    None => {
                        if letter == Pauli::Y {
                            return Err("Y in logical stabilizers is not supported".into());
                        }
                        for &q in &o.qubits {
                            phys.set(q, letter);
                        }
                    }
                }
            }
            if !phys.is_identity() {
                phys.set_label_phase(s.label_phase());
                if self.state.peek(&phys) != Some(1) {
                    return Err(format!("logical stabilizer {s} does not hold"));
                }
            }
        }
        Ok(())
    }
}

/// Convenience: error if the circuit is not noiselessly sound.
pub fn assert_sound<R: Rng + ?Sized>(c: &Circuit, rng: &mut R) -> Result<()> {
    let run = run_tableau(c, rng)?;
    run.verify_ideal(c)
        .map_err(|m| Error::InvalidPlan(format!("{}: {m}", c.name)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{CircuitBuilder, OutputBlock};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bell_readout() -> Circuit {
        let mut b = CircuitBuilder::new();
        let q = b.alloc(2);
        b.prep(q[0], Basis::X);
        b.prep(q[1], Basis::Z);
        b.cnot(q[0], q[1]);
        b.measure(q[0], Basis::Z);
        b.measure(q[1], Basis::Z);
        b.finish("bell", vec![], vec![])
    }

    #[test]
    fn frame_propagates_through_cnot() {
        let c = bell_readout().with_error_after(&[1], 0, Pauli::X);
        let run = run_frame(&c, &mut Noiseless, ExecOptions::default());
        assert!(run.flip(0) && run.flip(1));
        let c = bell_readout().with_error_after(&[2], 1, Pauli::Y);
        let run = run_frame(&c, &mut Noiseless, ExecOptions::default());
        assert!(!run.flip(0) && run.flip(1));
        let t = run_tableau(&c, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_ne!(t.outcomes[0], t.outcomes[1]);
    }

    #[test]
    fn fresh_block_is_codeword() {
        let mut b = CircuitBuilder::new();
        let q = b.alloc(7);
        b.fresh(&q, 1, LogicalState::Plus);
        let c = b.finish(
            "fresh",
            vec![OutputBlock {
                level: 1,
                qubits: q,
                measured: None,
            }],
            vec![PauliString::from_label("X").unwrap()],
        );
        assert_sound(&c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    }

    #[test]
    fn sampled_noise_respects_model() {
        let m = NoiseModel::with_table(1.0, &[((Pauli::Z, Pauli::I), 0.5)], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = SampledNoise::new(&m, &mut rng);
        for _ in 0..100 {
            // eps_z = 2 p_ZI = 1
            assert_eq!(s.fresh(), Pauli::Z);
        }
    }
}
