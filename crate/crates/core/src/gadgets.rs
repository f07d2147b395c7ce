//! Expansion of blueprints into circuits, and the fundamental-cluster
//! gadgets built from them.
//!
//! Preparations inside a gadget are either expanded recursively as verified
//! [segments](crate::circuit::Segment) (`Mode::Faithful`) or injected as fresh
//! blocks carrying the homogeneous error model (`Mode::Fast`).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blueprint::{self, Blueprint, GateKind, Step};
use crate::circuit::{Basis, Circuit, CircuitBuilder, OutputBlock};
use crate::error::{Error, Result};
use crate::exec::{self, ExecOptions, SampledNoise};
use crate::noise::NoiseModel;
use crate::pauli::{get_bit, Pauli, PauliString};
use crate::steane::{self, LogicalState, Syndrome};
use crate::tableau::StabilizerState;

/// Highest level a gadget may be built at; a level-5 block has 16807 qubits.
pub const MAX_LEVEL: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Faithful,
    Fast,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "fast" => Ok(Mode::Fast),
            _ => Err(Error::InvalidPlan(format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Faithful => "faithful",
            Mode::Fast => "fast",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gadget {
    #[serde(rename = "hexa")]
    Hexa,
    #[serde(rename = "cz_single")]
    CzSingle,
    #[serde(rename = "cz_double")]
    CzDouble,
    #[serde(rename = "encode_zero")]
    EncodeZero,
    #[serde(rename = "encode_plus")]
    EncodePlus,
    #[serde(rename = "readout")]
    Readout,
}

impl Gadget {
    pub const ALL: [Gadget; 6] = [
        Gadget::Hexa,
        Gadget::CzSingle,
        Gadget::CzDouble,
        Gadget::EncodeZero,
        Gadget::EncodePlus,
        Gadget::Readout,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gadget::Hexa => "hexa",
            Gadget::CzSingle => "cz_single",
            Gadget::CzDouble => "cz_double",
            Gadget::EncodeZero => "encode_zero",
            Gadget::EncodePlus => "encode_plus",
            Gadget::Readout => "readout",
        }
    }

    pub fn min_level(self) -> u32 {
        match self {
            Gadget::Hexa => 2,
            _ => 1,
        }
    }

    pub fn validate(self, level: u32, mode: Mode) -> Result<()> {
        let unsupported = |reason: &str| Error::UnsupportedLevel {
            gadget: self.name().into(),
            level,
            reason: reason.into(),
        };
        if level < self.min_level() {
            return Err(unsupported("below the lowest level of this gadget"));
        }
        if level > MAX_LEVEL {
            return Err(unsupported("block size exceeds the simulator limit"));
        }
        if mode == Mode::Fast && level < 2 && self != Gadget::Readout {
            return Err(unsupported(
                "fast mode replaces lower levels and needs level >= 2",
            ));
        }
        Ok(())
    }
}

impl FromStr for Gadget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Gadget::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::UnknownGadget(s.to_string()))
    }
}

impl fmt::Display for Gadget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The 6-qubit linear cluster state.
pub fn ideal_hexa_state() -> StabilizerState {
    let mut s = StabilizerState::new(6);
    for q in 0..6 {
        s.h(q);
    }
    for q in 0..5 {
        s.cz(q, q + 1);
    }
    s
}

/// Generators `Z_{i-1} X_i Z_{i+1}` of an `n`-qubit linear cluster.
pub fn linear_cluster_stabilizers(n: usize) -> Vec<PauliString> {
    (0..n)
        .map(|i| {
            let mut p = PauliString::single(n, i, Pauli::X);
            if i > 0 {
                p.set(i - 1, Pauli::Z);
            }
            if i + 1 < n {
                p.set(i + 1, Pauli::Z);
            }
            p
        })
        .collect()
}

/// One-bit teleportation of `source` into `target` (assumed `|+⟩`-like):
/// transversal C-Z, X readout of the source and a Z correction per qubit.
/// The target ends up holding `H` applied to the source state.
pub fn one_bit_teleport(b: &mut CircuitBuilder, source: &[usize], target: &[usize]) -> Vec<usize> {
    for (&s, &t) in source.iter().zip(target) {
        b.cz(s, t);
    }
    let recs = b.measure_block(source, Basis::X);
    for (&r, &t) in recs.iter().zip(target) {
        b.feedforward(r, t, Pauli::Z);
    }
    b.release(source);
    recs
}

struct Expander<'a> {
    b: &'a mut CircuitBuilder,
    mode: Mode,
}

/// Per-node qubits and records after expanding a blueprint.
struct Expansion {
    qubits: Vec<Vec<usize>>,
    levels: Vec<u32>,
}

impl Expander<'_> {
    fn raw_block(&mut self, state: LogicalState) -> Vec<usize> {
        let qs = self.b.alloc(7);
        for (j, &q) in qs.iter().enumerate() {
            let basis = if steane::PIVOTS.contains(&j) {
                Basis::X
            } else {
                Basis::Z
            };
            self.b.prep(q, basis);
        }
        for (c, t) in steane::ENCODER_EDGES {
            self.b.cnot(qs[c], qs[t]);
        }
        if state == LogicalState::Plus {
            for &q in &qs {
                self.b.h(q);
            }
        }
        qs
    }

    /// A verified level-`level` code state.
    fn prep_block(&mut self, level: u32, state: LogicalState) -> Result<Vec<usize>> {
        match self.mode {
            Mode::Fast => {
                let qs = self.b.alloc(steane::block_size(level));
                self.b.fresh(&qs, level, state);
                Ok(qs)
            }
            Mode::Faithful => {
                let tag = format!("{}@{level}", state_name(state));
                self.b.begin_segment(&tag);
                let qs = self.encode(level, state, &tag)?;
                self.b.end_segment();
                Ok(qs)
            }
        }
    }

    /// Expands the encoder blueprint for `state` in place.
    fn encode(&mut self, level: u32, state: LogicalState, tag: &str) -> Result<Vec<usize>> {
        let name = match (level, state) {
            (1, LogicalState::Zero) => "encode_zero_l1",
            (1, LogicalState::Plus) => "encode_plus_l1",
            (_, LogicalState::Zero) => "encode_zero",
            (_, LogicalState::Plus) => "encode_plus",
        };
        let bp = blueprint::get(name)?;
        let ex = self.expand(bp, level, &[], tag)?;
        Ok(bp
            .outputs()
            .into_iter()
            .flat_map(|i| ex.qubits[i].clone())
            .collect())
    }

    /// `|+⟩` at `level`, teleported from a `|0⟩` onto seven `|+⟩` sub-blocks
    /// for `level ≥ 2`.
    fn tele_plus(&mut self, level: u32) -> Result<Vec<usize>> {
        if level == 1 {
            return self.prep_block(1, LogicalState::Plus);
        }
        let src = self.prep_block(level, LogicalState::Zero)?;
        let mut tgt = Vec::with_capacity(src.len());
        for _ in 0..7 {
            tgt.extend(self.prep_block(level - 1, LogicalState::Plus)?);
        }
        one_bit_teleport(self.b, &src, &tgt);
        Ok(tgt)
    }

    fn expand(&mut self, bp: &Blueprint, level: u32, inputs: &[Vec<usize>], tag: &str) -> Result<Expansion> {
        let mut levels = Vec::with_capacity(bp.nodes.len());
        for nd in &bp.nodes {
            levels.push(nd.level.resolve(level).ok_or_else(|| Error::UnsupportedLevel {
                gadget: bp.name.clone(),
                level,
                reason: format!("node `{}` would sit below level 1", nd.id),
            })?);
        }
        let mut qubits: Vec<Vec<usize>> = vec![Vec::new(); bp.nodes.len()];
        let mut records: Vec<Vec<usize>> = vec![Vec::new(); bp.nodes.len()];
        let ins = bp.inputs();
        if ins.len() != inputs.len() {
            return Err(Error::InvalidPlan(format!(
                "{} expects {} inputs, got {}",
                bp.name,
                ins.len(),
                inputs.len()
            )));
        }
        for (&i, q) in ins.iter().zip(inputs) {
            if q.len() != steane::block_size(levels[i]) {
                return Err(Error::LevelMismatch(levels[i], 0));
            }
            qubits[i] = q.clone();
        }
        for step in &bp.steps {
            match step {
                Step::Gate { kind, nodes } => match kind {
                    GateKind::Prep0 | GateKind::PrepPlus => {
                        let st = if *kind == GateKind::Prep0 {
                            LogicalState::Zero
                        } else {
                            LogicalState::Plus
                        };
                        for &i in nodes {
                            qubits[i] = self.prep_block(levels[i], st)?;
                        }
                    }
                    GateKind::Raw0 | GateKind::RawPlus => {
                        let st = if *kind == GateKind::Raw0 {
                            LogicalState::Zero
                        } else {
                            LogicalState::Plus
                        };
                        for &i in nodes {
                            if levels[i] != 1 {
                                return Err(Error::UnsupportedLevel {
                                    gadget: bp.name.clone(),
                                    level,
                                    reason: "raw encoders exist only at level 1".into(),
                                });
                            }
                            qubits[i] = self.raw_block(st);
                        }
                    }
                    GateKind::TelePlus => {
                        for &i in nodes {
                            qubits[i] = self.tele_plus(levels[i])?;
                        }
                    }
                    GateKind::H | GateKind::S => {
                        for &i in nodes {
                            for &q in &qubits[i] {
                                if *kind == GateKind::H {
                                    self.b.h(q);
                                } else {
                                    self.b.s(q);
                                }
                            }
                        }
                    }
                    GateKind::Cz | GateKind::Cnot => {
                        let (a, c) = (nodes[0], nodes[1]);
                        for (&x, &y) in qubits[a].iter().zip(&qubits[c]) {
                            if *kind == GateKind::Cz {
                                self.b.cz(x, y);
                            } else {
                                self.b.cnot(x, y);
                            }
                        }
                    }
                    GateKind::Vcz1 | GateKind::Vcz2 => {
                        let (a, c) = (nodes[0], nodes[1]);
                        let sub = if *kind == GateKind::Vcz1 {
                            "cz_single"
                        } else {
                            "cz_double"
                        };
                        let sub_tag = format!(
                            "{tag}/{}({},{})",
                            if *kind == GateKind::Vcz1 { "vcz1" } else { "vcz2" },
                            bp.nodes[a].id,
                            bp.nodes[c].id
                        );
                        let pair = [qubits[a].clone(), qubits[c].clone()];
                        self.expand(blueprint::get(sub)?, levels[a], &pair, &sub_tag)?;
                    }
                },
                Step::BareCz(a, c) => {
                    for (&x, &y) in qubits[*a].iter().zip(&qubits[*c]) {
                        self.b.cz(x, y);
                    }
                }
                Step::Measure { basis, nodes } => {
                    for &i in nodes {
                        records[i] = self.b.measure_block(&qubits[i], *basis);
                        self.b.release(&qubits[i]);
                    }
                }
                Step::Check { name, nodes, logical } => {
                    let blocks = nodes.iter().map(|&i| records[i].clone()).collect();
                    self.b
                        .check(&format!("{tag}/{name}"), levels[nodes[0]], blocks, *logical);
                }
            }
        }
        Ok(Expansion { qubits, levels })
    }
}

fn state_name(s: LogicalState) -> &'static str {
    match s {
        LogicalState::Zero => "zero",
        LogicalState::Plus => "plus",
    }
}

fn live_output(level: u32, qubits: Vec<usize>) -> OutputBlock {
    OutputBlock {
        level,
        qubits,
        measured: None,
    }
}

/// Builds the circuit of `gadget` at `level`.
pub fn build(gadget: Gadget, level: u32, mode: Mode) -> Result<Circuit> {
    gadget.validate(level, mode)?;
    let mut b = CircuitBuilder::new();
    let mut ex = Expander { b: &mut b, mode };
    let tag = format!("{}@{level}", gadget.name());
    let (outputs, stabs) = match gadget {
        Gadget::Hexa => {
            let bp = blueprint::get("hexa")?;
            let e = ex.expand(bp, level, &[], &tag)?;
            let outs = bp
                .outputs()
                .into_iter()
                .map(|i| live_output(e.levels[i], e.qubits[i].clone()))
                .collect();
            (outs, linear_cluster_stabilizers(6))
        }
        Gadget::CzSingle | Gadget::CzDouble => {
            let a = ex.prep_block(level, LogicalState::Plus)?;
            let c = ex.prep_block(level, LogicalState::Plus)?;
            ex.expand(
                blueprint::get(gadget.name())?,
                level,
                &[a.clone(), c.clone()],
                &tag,
            )?;
            (
                vec![live_output(level, a), live_output(level, c)],
                linear_cluster_stabilizers(2),
            )
        }
        Gadget::EncodeZero | Gadget::EncodePlus => {
            let (st, p) = if gadget == Gadget::EncodeZero {
                (LogicalState::Zero, Pauli::Z)
            } else {
                (LogicalState::Plus, Pauli::X)
            };
            let qs = ex.encode(level, st, &tag)?;
            (vec![live_output(level, qs)], vec![PauliString::single(1, 0, p)])
        }
        Gadget::Readout => {
            let bp = blueprint::get("readout")?;
            let e = ex.expand(bp, level, &[], &tag)?;
            let q = e.qubits[bp.node_index("q").expect("readout has node q")].clone();
            // the readout records are the last ones issued
            let n_rec = ex.b.record_count();
            let recs: Vec<usize> = (n_rec - q.len()..n_rec).collect();
            (
                vec![OutputBlock {
                    level,
                    qubits: q,
                    measured: Some((Basis::X, recs)),
                }],
                vec![PauliString::single(1, 0, Pauli::X)],
            )
        }
    };
    Ok(b.finish(&tag, outputs, stabs))
}

/// Outcome of one noisy run of a gadget.
#[derive(Clone, Debug, PartialEq)]
pub struct VerificationOutcome {
    pub accepted: bool,
    pub failed_checkpoint: Option<String>,
    /// Physical frame on the live output qubits, blocks concatenated.
    pub residual_frame: PauliString,
    /// Decoded logical frame, one qubit per output.
    pub logical_frame: PauliString,
    pub logical_error: bool,
}

impl VerificationOutcome {
    pub fn from_run(c: &Circuit, run: &exec::FrameRun) -> Self {
        let live: Vec<usize> = c
            .outputs
            .iter()
            .filter(|o| o.measured.is_none())
            .flat_map(|o| o.qubits.iter().copied())
            .collect();
        let mut residual = PauliString::identity(live.len());
        if run.accepted {
            for (k, &q) in live.iter().enumerate() {
                residual.set(
                    k,
                    Pauli::from_bits(get_bit(&run.frame_x, q), get_bit(&run.frame_z, q)),
                );
            }
        }
        let logical = if run.accepted {
            run.logical_frame(c)
        } else {
            PauliString::identity(c.outputs.len())
        };
        Self {
            accepted: run.accepted,
            failed_checkpoint: run.failed_check.map(|i| c.checks[i].name.clone()),
            logical_error: run.accepted && c.is_logical_error(&logical),
            residual_frame: residual,
            logical_frame: logical,
        }
    }
}

/// Builds `gadget` and runs it once under `model`.
pub fn run_once<R: Rng + ?Sized>(
    gadget: Gadget,
    level: u32,
    mode: Mode,
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let c = build(gadget, level, mode)?;
    Ok(run_circuit(&c, model, rng, ExecOptions::default()))
}

pub fn run_circuit<R: Rng + ?Sized>(
    c: &Circuit,
    model: &NoiseModel<f64>,
    rng: &mut R,
    opts: ExecOptions,
) -> VerificationOutcome {
    let mut noise = SampledNoise::new(model, rng);
    let run = exec::run_frame(c, &mut noise, opts);
    VerificationOutcome::from_run(c, &run)
}

/// Logical C-Z between two verified `|+⟩` blocks with one round of checks.
pub fn verified_cz_single<R: Rng + ?Sized>(
    level: u32,
    mode: Mode,
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    run_once(Gadget::CzSingle, level, mode, model, rng)
}

/// As [`verified_cz_single`], with two rounds of checks.
pub fn verified_cz_double<R: Rng + ?Sized>(
    level: u32,
    mode: Mode,
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    run_once(Gadget::CzDouble, level, mode, model, rng)
}

pub fn build_hexa<R: Rng + ?Sized>(
    level: u32,
    mode: Mode,
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    run_once(Gadget::Hexa, level, mode, model, rng)
}

pub fn build_code_ancilla<R: Rng + ?Sized>(
    level: u32,
    which: LogicalState,
    mode: Mode,
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Result<VerificationOutcome> {
    let g = match which {
        LogicalState::Zero => Gadget::EncodeZero,
        LogicalState::Plus => Gadget::EncodePlus,
    };
    run_once(g, level, mode, model, rng)
}

/// Result of a level-1 verification with its measured syndromes.
#[derive(Clone, Debug, PartialEq)]
pub struct Level1Verification {
    pub outcome: VerificationOutcome,
    /// Syndrome of each round, in order.
    pub syndromes: Vec<Syndrome>,
}

/// Raw level-1 encoding of `which` followed by `rounds` rounds of
/// verification (one flip and one phase extraction each, with unverified
/// raw ancillas). `planted` errors are applied right after encoding.
pub fn level1_verification_circuit(
    which: LogicalState,
    rounds: usize,
    planted: &[(usize, Pauli)],
) -> Circuit {
    let mut b = CircuitBuilder::new();
    let mut ex = Expander {
        b: &mut b,
        mode: Mode::Faithful,
    };
    let blk = ex.raw_block(which);
    for &(q, p) in planted {
        b.error(blk[q], p);
    }
    // a block that should be |0⟩ ends with the flip check, |+⟩ with phase
    let flip_last = which == LogicalState::Zero;
    for r in 0..rounds {
        let last = r + 1 == rounds;
        let order = if flip_last { [false, true] } else { [true, false] };
        for flip in order {
            let logical = last && flip == flip_last;
            extract_round(&mut b, &blk, flip, logical, &format!("round{r}"));
        }
    }
    let stab = PauliString::single(
        1,
        0,
        if which == LogicalState::Zero {
            Pauli::Z
        } else {
            Pauli::X
        },
    );
    b.finish(
        &format!("verify_{}", state_name(which)),
        vec![live_output(1, blk)],
        vec![stab],
    )
}

/// One syndrome extraction on a level-1 block with a raw ancilla. A flip
/// round copies X errors onto a `|0⟩` ancilla read in Z; a phase round
/// copies Z errors onto a `|+⟩` ancilla read in X.
fn extract_round(b: &mut CircuitBuilder, blk: &[usize], flip: bool, logical: bool, tag: &str) -> usize {
    let mut ex = Expander {
        b,
        mode: Mode::Faithful,
    };
    let (anc, basis, name) = if flip {
        let anc = ex.raw_block(LogicalState::Zero);
        for (&d, &a) in blk.iter().zip(&anc) {
            b.cnot(d, a);
        }
        (anc, Basis::Z, "flip")
    } else {
        let anc = ex.raw_block(LogicalState::Plus);
        for (&d, &a) in blk.iter().zip(&anc) {
            b.cnot(a, d);
        }
        (anc, Basis::X, "phase")
    };
    let recs = b.measure_block(&anc, basis);
    b.release(&anc);
    b.check(&format!("{tag}/{name}"), 1, vec![recs], logical)
}

/// Verifies a raw level-1 encoding. Rejection is a normal outcome.
pub fn verify_level1_preparation<R: Rng + ?Sized>(
    which: LogicalState,
    rounds: usize,
    planted: &[(usize, Pauli)],
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Level1Verification {
    let c = level1_verification_circuit(which, rounds, planted);
    let mut noise = SampledNoise::new(model, rng);
    let run = exec::run_frame(&c, &mut noise, ExecOptions::abort());
    let syndromes = syndromes_by_round(&c, &run);
    Level1Verification {
        outcome: VerificationOutcome::from_run(&c, &run),
        syndromes,
    }
}

fn syndromes_by_round(c: &Circuit, run: &exec::FrameRun) -> Vec<Syndrome> {
    let mut out: Vec<Syndrome> = Vec::new();
    for chk in &c.checks {
        let bits = chk.blocks[0]
            .iter()
            .enumerate()
            .fold(0u8, |acc, (j, &r)| acc | ((run.flip(r) as u8) << j));
        let round: usize = chk.name[5..chk.name.find('/').unwrap_or(chk.name.len())]
            .parse()
            .unwrap_or(0);
        if out.len() <= round {
            out.resize(round + 1, Syndrome::default());
        }
        if chk.name.ends_with("flip") {
            out[round].z_checks = steane::syndrome_of(bits);
        } else {
            out[round].x_checks = steane::syndrome_of(bits);
        }
    }
    out
}

/// One transversal syndrome extraction on a noiselessly encoded level-1
/// block in state `which`, with `planted` errors on the data. `basis`
/// selects which checks are read: `Z` gives the Z-type checks (X errors),
/// `X` the X-type checks (Z errors).
pub fn extract_syndrome_transversal<R: Rng + ?Sized>(
    which: LogicalState,
    basis: Basis,
    planted: &[(usize, Pauli)],
    model: &NoiseModel<f64>,
    rng: &mut R,
) -> Syndrome {
    let mut b = CircuitBuilder::new();
    let blk = b.alloc(7);
    b.fresh(&blk, 1, which);
    for &(q, p) in planted {
        b.error(blk[q], p);
    }
    let flip = basis == Basis::Z;
    extract_round(&mut b, &blk, flip, false, "round0");
    let c = b.finish("extract", vec![live_output(1, blk)], vec![]);
    // the data block is noiseless apart from the planted errors
    let mut noise = NoFreshNoise(SampledNoise::new(model, rng));
    let run = exec::run_frame(&c, &mut noise, ExecOptions::abort());
    syndromes_by_round(&c, &run)[0]
}

struct NoFreshNoise<N>(N);

impl<N: exec::NoiseSource> exec::NoiseSource for NoFreshNoise<N> {
    fn prep_flip(&mut self) -> bool {
        self.0.prep_flip()
    }
    fn measure_flip(&mut self) -> bool {
        self.0.measure_flip()
    }
    fn two_qubit(&mut self) -> (Pauli, Pauli) {
        self.0.two_qubit()
    }
    fn fresh(&mut self) -> Pauli {
        Pauli::I
    }
}
