//! Fault-effect compilation and fast sampling.
//!
//! Every noisy location is expanded into basis faults (one per flip, four
//! per two-qubit gate, two per fresh qubit). A single bit-sliced pass over
//! the circuit gives, for each basis fault, the set of tracked records and
//! output frame bits it flips. A trial then only samples which locations
//! fault and XORs their precomputed effects; check outcomes follow because
//! noiseless records are codewords and decoding is linear.

use rand::Rng;

use crate::circuit::{Basis, Circuit, Op};
use crate::error::{Error, Result};
use crate::exec::ExecOptions;
use crate::noise::{pair_from_index, NoiseModel};
use crate::pauli::{flip_bit, get_bit, word_count, Pauli, PauliString};

const PREP: usize = 0;
const MEASURE: usize = 1;
const TWO_QUBIT: usize = 2;
const FRESH: usize = 3;

/// Number of outcomes of each site kind.
const OUTCOMES: [usize; 4] = [1, 1, 15, 3];

#[derive(Clone, Debug, Default)]
struct Plan {
    /// Sites of this segment by kind, excluding nested segments.
    sites: [Vec<u32>; 4],
    /// Effect ids of planted errors, applied on every attempt.
    planted: Vec<u32>,
    items: Vec<Item>,
}

#[derive(Clone, Debug)]
enum Item {
    Check(usize),
    Child(Plan),
}

/// Effects of all faults of a circuit, independent of the noise strength.
#[derive(Clone, Debug)]
pub struct FaultMap {
    circuit: Circuit,
    root: Plan,
    /// First effect id and kind of each site.
    site_effect: Vec<u32>,
    site_kind: Vec<SiteKind>,
    eff_start: Vec<u32>,
    eff_cols: Vec<u32>,
    n_cols: usize,
    record_col: Vec<u32>,
    qubit_x_col: Vec<u32>,
    qubit_z_col: Vec<u32>,
    n_basis: usize,
}

const NONE: u32 = u32::MAX;

struct Compiler {
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
    records: Vec<Option<Vec<u64>>>,
    keep: Vec<bool>,
    next_basis: usize,
    /// Per site: kind and first basis fault; planted sites carry their Pauli.
    sites: Vec<(usize, usize)>,
    planted: Vec<(usize, Pauli)>,
}

fn count_basis(ops: &[Op]) -> usize {
    ops.iter()
        .map(|op| match op {
            Op::Prep { .. } | Op::Measure { .. } => 1,
            Op::Cz(..) | Op::Cnot(..) => 4,
            Op::Fresh { qubits, .. } => 2 * qubits.len(),
            Op::Error { .. } => 2,
            Op::Segment(s) => count_basis(&s.ops),
            _ => 0,
        })
        .sum()
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

impl Compiler {
    fn new_basis(&mut self, k: usize) -> usize {
        let b = self.next_basis;
        self.next_basis += k;
        b
    }

    fn clear(&mut self, q: usize) {
        self.x[q].iter_mut().for_each(|w| *w = 0);
        self.z[q].iter_mut().for_each(|w| *w = 0);
    }

    /// Adds basis faults `b` (X part) and `b + 1` (Z part) on qubit `q`.
    fn add_xz(&mut self, q: usize, b: usize) {
        flip_bit(&mut self.x[q], b);
        flip_bit(&mut self.z[q], b + 1);
    }

    fn walk(&mut self, ops: &[Op]) -> Plan {
        let mut plan = Plan::default();
        for op in ops {
            match op {
                Op::Prep { q, basis } => {
                    self.clear(*q);
                    let b = self.new_basis(1);
                    match basis.flip_error() {
                        Pauli::X => flip_bit(&mut self.x[*q], b),
                        _ => flip_bit(&mut self.z[*q], b),
                    }
                    plan.sites[PREP].push(self.sites.len() as u32);
                    self.sites.push((PREP, b));
                }
                Op::H(q) => std::mem::swap(&mut self.x[*q], &mut self.z[*q]),
                Op::S(q) => {
                    let x = self.x[*q].clone();
                    xor_into(&mut self.z[*q], &x);
                }
                Op::Cz(a, b) | Op::Cnot(a, b) => {
                    let (a, b) = (*a, *b);
                    if matches!(op, Op::Cz(..)) {
                        let (xa, xb) = (self.x[a].clone(), self.x[b].clone());
                        xor_into(&mut self.z[a], &xb);
                        xor_into(&mut self.z[b], &xa);
                    } else {
                        let xa = self.x[a].clone();
                        xor_into(&mut self.x[b], &xa);
                        let zb = self.z[b].clone();
                        xor_into(&mut self.z[a], &zb);
                    }
                    let f = self.new_basis(4);
                    self.add_xz(a, f);
                    self.add_xz(b, f + 2);
                    plan.sites[TWO_QUBIT].push(self.sites.len() as u32);
                    self.sites.push((TWO_QUBIT, f));
                }
                Op::Measure { q, basis, record } => {
                    let mut row = match basis {
                        Basis::Z => self.x[*q].clone(),
                        Basis::X => self.z[*q].clone(),
                    };
                    let b = self.new_basis(1);
                    flip_bit(&mut row, b);
                    plan.sites[MEASURE].push(self.sites.len() as u32);
                    self.sites.push((MEASURE, b));
                    if self.keep[*record] {
                        self.records[*record] = Some(row);
                    }
                    self.clear(*q);
                }
                Op::Fresh { qubits, .. } => {
                    for &q in qubits {
                        self.clear(q);
                        let b = self.new_basis(2);
                        self.add_xz(q, b);
                        plan.sites[FRESH].push(self.sites.len() as u32);
                        self.sites.push((FRESH, b));
                    }
                }
                Op::Feedforward {
                    record,
                    target,
                    pauli,
                } => {
                    let row = self.records[*record]
                        .as_ref()
                        .expect("feedforward record is kept")
                        .clone();
                    if pauli.x_bit() {
                        xor_into(&mut self.x[*target], &row);
                    }
                    if pauli.z_bit() {
                        xor_into(&mut self.z[*target], &row);
                    }
                }
                Op::Error { q, pauli } => {
                    let b = self.new_basis(2);
                    self.add_xz(*q, b);
                    plan.planted.push(self.planted.len() as u32);
                    self.planted.push((b, *pauli));
                }
                Op::Check(id) => plan.items.push(Item::Check(*id)),
                Op::Segment(s) => {
                    let child = self.walk(&s.ops);
                    plan.items.push(Item::Child(child));
                }
            }
        }
        plan
    }
}

/// Symmetric difference of sorted lists.
fn sym_diff(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn fixup_planted(plan: &mut Plan, base: u32) {
    for p in &mut plan.planted {
        *p += base;
    }
    for it in &mut plan.items {
        if let Item::Child(c) = it {
            fixup_planted(c, base);
        }
    }
}

impl FaultMap {
    pub fn compile(c: &Circuit) -> Result<Self> {
        let n_basis = count_basis(&c.ops);
        let w = word_count(n_basis).max(1);
        let mut keep = vec![false; c.n_records];
        let mut tracked = vec![false; c.n_records];
        for chk in &c.checks {
            for &r in chk.blocks.iter().flatten() {
                keep[r] = true;
                tracked[r] = true;
            }
        }
        for o in &c.outputs {
            if let Some((_, recs)) = &o.measured {
                for &r in recs {
                    keep[r] = true;
                    tracked[r] = true;
                }
            }
        }
        fn mark_ff(ops: &[Op], keep: &mut [bool]) {
            for op in ops {
                match op {
                    Op::Feedforward { record, .. } => keep[*record] = true,
                    Op::Segment(s) => mark_ff(&s.ops, keep),
                    _ => {}
                }
            }
        }
        mark_ff(&c.ops, &mut keep);

        let mut comp = Compiler {
            x: vec![vec![0; w]; c.n_qubits],
            z: vec![vec![0; w]; c.n_qubits],
            records: vec![None; c.n_records],
            keep,
            next_basis: 0,
            sites: Vec::new(),
            planted: Vec::new(),
        };
        let mut root = comp.walk(&c.ops);
        debug_assert_eq!(comp.next_basis, n_basis);

        // columns: tracked records, then x and z of live output qubits
        let mut n_cols = 0u32;
        let mut record_col = vec![NONE; c.n_records];
        let mut rows: Vec<&[u64]> = Vec::new();
        for r in 0..c.n_records {
            if tracked[r] {
                record_col[r] = n_cols;
                n_cols += 1;
                rows.push(comp.records[r].as_deref().expect("tracked record was measured"));
            }
        }
        let mut qubit_x_col = vec![NONE; c.n_qubits];
        let mut qubit_z_col = vec![NONE; c.n_qubits];
        for o in c.outputs.iter().filter(|o| o.measured.is_none()) {
            for &q in &o.qubits {
                qubit_x_col[q] = n_cols;
                rows.push(&comp.x[q]);
                qubit_z_col[q] = n_cols + 1;
                rows.push(&comp.z[q]);
                n_cols += 2;
            }
        }
        if n_cols == NONE {
            return Err(Error::InvalidPlan("too many tracked bits".into()));
        }

        // transpose: effects of each basis fault
        let mut basis: Vec<Vec<u32>> = vec![Vec::new(); n_basis];
        for (col, row) in rows.iter().enumerate() {
            for (wi, &word) in row.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    let t = bits.trailing_zeros() as usize;
                    let b = wi * 64 + t;
                    if b < n_basis {
                        basis[b].push(col as u32);
                    }
                    bits &= bits - 1;
                }
            }
        }

        let mut eff_start = vec![0u32];
        let mut eff_cols = Vec::new();
        let mut push = |cols: Vec<u32>, eff_start: &mut Vec<u32>| {
            eff_cols.extend(cols);
            eff_start.push(eff_cols.len() as u32);
        };
        let mut site_effect = Vec::with_capacity(comp.sites.len());
        let site_kind = comp
            .sites
            .iter()
            .map(|&(k, _)| match k {
                PREP | MEASURE => SiteKind::Flip,
                TWO_QUBIT => SiteKind::TwoQubit,
                _ => SiteKind::Fresh,
            })
            .collect();
        let mut n_eff = 0u32;
        let pauli_effect = |b: usize, p: Pauli| -> Vec<u32> {
            let mut e = Vec::new();
            if p.x_bit() {
                e = sym_diff(&e, &basis[b]);
            }
            if p.z_bit() {
                e = sym_diff(&e, &basis[b + 1]);
            }
            e
        };
        for &(kind, b) in &comp.sites {
            site_effect.push(n_eff);
            match kind {
                PREP | MEASURE => push(basis[b].clone(), &mut eff_start),
                TWO_QUBIT => {
                    for i in 0..15 {
                        let (pa, pb) = pair_from_index(i);
                        push(
                            sym_diff(&pauli_effect(b, pa), &pauli_effect(b + 2, pb)),
                            &mut eff_start,
                        );
                    }
                }
                _ => {
                    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                        push(pauli_effect(b, p), &mut eff_start);
                    }
                }
            }
            n_eff += OUTCOMES[kind] as u32;
        }
        // planted errors follow the site effects
        fixup_planted(&mut root, n_eff);
        for &(b, p) in &comp.planted {
            push(pauli_effect(b, p), &mut eff_start);
        }
        drop(rows);

        Ok(Self {
            circuit: c.clone(),
            root,
            site_effect,
            site_kind,
            eff_start,
            eff_cols,
            n_cols: n_cols as usize,
            record_col,
            qubit_x_col,
            qubit_z_col,
            n_basis,
        })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn basis_fault_count(&self) -> usize {
        self.n_basis
    }

    pub fn site_count(&self) -> usize {
        self.site_effect.len()
    }

    fn effect(&self, id: u32) -> &[u32] {
        &self.eff_cols[self.eff_start[id as usize] as usize..self.eff_start[id as usize + 1] as usize]
    }

    /// All sites with their kind and first effect id.
    pub fn sites(&self) -> impl Iterator<Item = (SiteKind, u32)> + '_ {
        self.site_kind
            .iter()
            .copied()
            .zip(self.site_effect.iter().copied())
    }

    /// Evaluates a run given the set of applied effects, in abort mode.
    pub fn evaluate(&self, effects: &[u32]) -> Trial {
        let mut acc = vec![0u64; word_count(self.n_cols).max(1)];
        for &e in effects {
            for &col in self.effect(e) {
                flip_bit(&mut acc, col as usize);
            }
        }
        fn planted(p: &Plan, out: &mut Vec<u32>) {
            out.extend(&p.planted);
            for it in &p.items {
                if let Item::Child(c) = it {
                    planted(c, out);
                }
            }
        }
        let mut pl = Vec::new();
        planted(&self.root, &mut pl);
        for e in pl {
            for &col in self.effect(e) {
                flip_bit(&mut acc, col as usize);
            }
        }
        let failed = (0..self.circuit.checks.len()).find(|&id| !self.check_passes(id, &acc));
        self.finish(&acc, failed, 0)
    }

    fn check_passes(&self, id: usize, acc: &[u64]) -> bool {
        self.circuit.checks[id].passes(|r| get_bit(acc, self.record_col[r] as usize))
    }

    fn logical_frame(&self, acc: &[u64]) -> PauliString {
        self.circuit.logical_frame(
            |q| get_bit(acc, self.qubit_x_col[q] as usize),
            |q| get_bit(acc, self.qubit_z_col[q] as usize),
            |r| get_bit(acc, self.record_col[r] as usize),
        )
    }

    fn finish(&self, acc: &[u64], failed: Option<usize>, retries: u64) -> Trial {
        if failed.is_some() {
            return Trial {
                accepted: false,
                failed_check: failed,
                logical_error: false,
                frame_error: false,
                retries,
            };
        }
        let frame = self.logical_frame(acc);
        Trial {
            accepted: true,
            failed_check: None,
            logical_error: self.circuit.is_logical_error(&frame),
            frame_error: !self.circuit.reduce_frame(&frame).is_identity(),
            retries,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SiteKind {
    Flip,
    TwoQubit,
    Fresh,
}

/// Outcome of one sampled trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Trial {
    pub accepted: bool,
    pub failed_check: Option<usize>,
    /// The residual logical frame anticommutes with the ideal state.
    pub logical_error: bool,
    /// The residual logical frame is outside the ideal stabilizer group.
    pub frame_error: bool,
    pub retries: u64,
}

/// Per-kind fault probabilities and conditional outcome distributions.
#[derive(Clone, Debug)]
pub struct FaultRates {
    total: [f64; 4],
    cumulative: [Vec<f64>; 4],
}

impl FaultRates {
    pub fn new(model: &NoiseModel<f64>) -> Result<Self> {
        model.validate()?;
        let eps = crate::analytic::homogeneous_errors(model);
        let two: Vec<f64> = model.table().to_vec();
        let fresh = vec![eps.eps_x, eps.eps_y, eps.eps_z];
        let cum = |v: &[f64]| -> (f64, Vec<f64>) {
            let t: f64 = v.iter().sum();
            let mut acc = 0.0;
            let c = v
                .iter()
                .map(|x| {
                    acc += x;
                    if t > 0.0 {
                        acc / t
                    } else {
                        1.0
                    }
                })
                .collect();
            (t, c)
        };
        let (t2, c2) = cum(&two);
        let (tf, cf) = cum(&fresh);
        if tf > 1.0 {
            return Err(Error::InvalidNoiseModel("fresh-block error exceeds 1".into()));
        }
        Ok(Self {
            total: [model.p_m, model.p_m, t2, tf],
            cumulative: [vec![1.0], vec![1.0], c2, cf],
        })
    }
}

/// Samples trials of a compiled circuit.
pub struct Sampler<'a> {
    map: &'a FaultMap,
    rates: FaultRates,
    opts: ExecOptions,
    acc: Vec<u64>,
    journal: Vec<u32>,
    retries: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(map: &'a FaultMap, model: &NoiseModel<f64>, opts: ExecOptions) -> Result<Self> {
        Ok(Self {
            map,
            rates: FaultRates::new(model)?,
            opts,
            acc: vec![0; word_count(map.n_cols).max(1)],
            journal: Vec::new(),
            retries: 0,
        })
    }

    fn apply(&mut self, id: u32) {
        for &col in self.map.effect(id) {
            flip_bit(&mut self.acc, col as usize);
        }
        self.journal.push(id);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.journal.len() > mark {
            let id = self.journal.pop().unwrap();
            for &col in self.map.effect(id) {
                flip_bit(&mut self.acc, col as usize);
            }
        }
    }

    fn sample_sites<R: Rng + ?Sized>(&mut self, plan: &Plan, rng: &mut R) {
        let Sampler {
            map,
            rates,
            acc,
            journal,
            ..
        } = self;
        for kind in 0..4 {
            let sites = &plan.sites[kind];
            let p = rates.total[kind];
            if sites.is_empty() || p <= 0.0 {
                continue;
            }
            let cum = &rates.cumulative[kind];
            let ln_q = (-p).ln_1p();
            let mut i = 0usize;
            loop {
                if p < 1.0 {
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let skip = (u.ln() / ln_q).floor();
                    if skip >= (sites.len() - i) as f64 {
                        break;
                    }
                    i += skip as usize;
                }
                if i >= sites.len() {
                    break;
                }
                let k = if cum.len() == 1 {
                    0
                } else {
                    let u: f64 = rng.gen();
                    cum.iter().position(|&c| u < c).unwrap_or(cum.len() - 1)
                };
                let id = map.site_effect[sites[i] as usize] + k as u32;
                for &col in map.effect(id) {
                    flip_bit(acc, col as usize);
                }
                journal.push(id);
                i += 1;
            }
        }
    }

    /// Runs one attempt series of `plan`; `Err` carries the failing check.
    fn run_plan<R: Rng + ?Sized>(
        &mut self,
        plan: &Plan,
        retry: bool,
        rng: &mut R,
    ) -> std::result::Result<(), usize> {
        let mark = self.journal.len();
        let mut attempts = 0u64;
        'attempt: loop {
            for &e in &plan.planted {
                self.apply(e);
            }
            self.sample_sites(plan, rng);
            for it in &plan.items {
                let res = match it {
                    Item::Child(c) => self.run_plan(c, self.opts.retry, rng),
                    Item::Check(id) => {
                        if self.map.check_passes(*id, &self.acc) {
                            Ok(())
                        } else {
                            Err(*id)
                        }
                    }
                };
                if let Err(id) = res {
                    attempts += 1;
                    let is_child = matches!(it, Item::Child(_));
                    if is_child || !retry || attempts >= self.opts.max_attempts {
                        return Err(id);
                    }
                    self.retries += 1;
                    self.undo_to(mark);
                    continue 'attempt;
                }
            }
            return Ok(());
        }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Trial {
        self.undo_to(0);
        self.retries = 0;
        let map = self.map;
        let res = self.run_plan(&map.root, false, rng);
        map.finish(&self.acc, res.err(), self.retries)
    }

    /// Like [`Sampler::sample`], returning the logical frame of an accepted
    /// run.
    pub fn sample_frame<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<PauliString> {
        self.sample(rng)
            .accepted
            .then(|| self.map.logical_frame(&self.acc))
    }
}
