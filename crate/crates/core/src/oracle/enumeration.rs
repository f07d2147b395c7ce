//! Exhaustive low-order fault enumeration for level-1 circuits.
//!
//! Each fault outcome is simulated once, directly with the frame executor,
//! and summarized by the syndrome and raw parity of every check block and
//! output block. At level 1 these are linear in the flips, so the summary of
//! a fault pair is the XOR of the two single summaries and pairs can be
//! combined by summary class instead of being simulated.
//!
//! Runs are in abort mode: a single failing check rejects.

use std::collections::HashMap;

use crate::circuit::{Circuit, Op};
use crate::error::{Error, Result};
use crate::exec::{run_frame, ExecOptions, NoiseSource};
use crate::noise::{pair_from_index, NoiseModel};
use crate::pauli::{get_bit, word_count, Pauli, PauliString};
use crate::steane;

/// Oracle values for acceptance and the conditional logical error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleEstimate {
    pub acceptance: f64,
    /// `P(accepted and logical error)`.
    pub joint_error: f64,
    /// `P(logical error | accepted)`.
    pub conditional_error: f64,
    /// Probability mass covered by the enumerated fault sets.
    pub covered: f64,
    pub locations: usize,
    pub order: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Draw {
    Prep,
    Measure,
    TwoQubit,
    Fresh,
}

/// Records the sequence of noise draws without faulting.
#[derive(Default)]
struct Recorder(Vec<Draw>);

impl NoiseSource for Recorder {
    fn prep_flip(&mut self) -> bool {
        self.0.push(Draw::Prep);
        false
    }
    fn measure_flip(&mut self) -> bool {
        self.0.push(Draw::Measure);
        false
    }
    fn two_qubit(&mut self) -> (Pauli, Pauli) {
        self.0.push(Draw::TwoQubit);
        (Pauli::I, Pauli::I)
    }
    fn fresh(&mut self) -> Pauli {
        self.0.push(Draw::Fresh);
        Pauli::I
    }
}

/// Faults exactly one draw with a given outcome.
struct Scripted {
    at: usize,
    outcome: usize,
    k: usize,
}

impl Scripted {
    fn hit(&mut self) -> Option<usize> {
        let h = (self.k == self.at).then_some(self.outcome);
        self.k += 1;
        h
    }
}

impl NoiseSource for Scripted {
    fn prep_flip(&mut self) -> bool {
        self.hit().is_some()
    }
    fn measure_flip(&mut self) -> bool {
        self.hit().is_some()
    }
    fn two_qubit(&mut self) -> (Pauli, Pauli) {
        self.hit().map_or((Pauli::I, Pauli::I), pair_from_index)
    }
    fn fresh(&mut self) -> Pauli {
        self.hit().map_or(Pauli::I, |o| [Pauli::X, Pauli::Y, Pauli::Z][o])
    }
}

fn strip_checks(ops: &[Op]) -> Vec<Op> {
    ops.iter()
        .filter_map(|op| match op {
            Op::Check(_) => None,
            Op::Segment(s) => {
                let mut s = s.clone();
                s.ops = strip_checks(&s.ops);
                Some(Op::Segment(s))
            }
            op => Some(op.clone()),
        })
        .collect()
}

/// Per-block nibble: syndrome in the low three bits, raw parity in bit 3.
fn nibble(bits: u8) -> u8 {
    steane::syndrome_of(bits) | ((bits.count_ones() as u8 & 1) << 3)
}

fn pack7(f: impl Fn(usize) -> bool) -> u8 {
    (0..7).fold(0u8, |a, j| a | ((f(j) as u8) << j))
}

struct Layout<'a> {
    c: &'a Circuit,
}

impl Layout<'_> {
    /// Summary of a run: check blocks in order, then outputs (x and z for
    /// live blocks, the records for readouts).
    fn summary(&self, flips: &[u64], fx: &[u64], fz: &[u64]) -> Vec<u8> {
        let mut v = Vec::new();
        for chk in &self.c.checks {
            for recs in &chk.blocks {
                v.push(nibble(pack7(|j| get_bit(flips, recs[j]))));
            }
        }
        for o in &self.c.outputs {
            match &o.measured {
                Some((_, recs)) => v.push(nibble(pack7(|j| get_bit(flips, recs[j])))),
                None => {
                    v.push(nibble(pack7(|j| get_bit(fx, o.qubits[j]))));
                    v.push(nibble(pack7(|j| get_bit(fz, o.qubits[j]))));
                }
            }
        }
        v
    }

    /// `(accepted, logical error)` of a summary.
    fn judge(&self, v: &[u8]) -> (bool, bool) {
        let mut i = 0;
        for chk in &self.c.checks {
            for _ in &chk.blocks {
                let nb = v[i];
                i += 1;
                if nb & 7 != 0 || (chk.logical && nb & 8 != 0) {
                    return (false, false);
                }
            }
        }
        let decoded = |nb: u8| ((nb >> 3) & 1 == 1) ^ (nb & 7 != 0);
        let mut frame = PauliString::identity(self.c.outputs.len());
        for (k, o) in self.c.outputs.iter().enumerate() {
            let p = match &o.measured {
                Some((basis, _)) => {
                    let flipped = decoded(v[i]);
                    i += 1;
                    if flipped {
                        basis.flip_error()
                    } else {
                        Pauli::I
                    }
                }
                None => {
                    let p = Pauli::from_bits(decoded(v[i]), decoded(v[i + 1]));
                    i += 2;
                    p
                }
            };
            frame.set(k, p);
        }
        (true, self.c.is_logical_error(&frame))
    }
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Enumerates all fault sets of size at most `order` (1 or 2) of a level-1
/// circuit under `model`, each weighted by its exact probability.
pub fn enumerate(c: &Circuit, model: &NoiseModel<f64>, order: u32) -> Result<OracleEstimate> {
    model.validate()?;
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidPlan(format!(
            "enumeration order {order} is not supported"
        )));
    }
    if c.checks.iter().any(|k| k.level != 1) || c.outputs.iter().any(|o| o.level != 1) {
        return Err(Error::UnsupportedLevel {
            gadget: c.name.clone(),
            level: 2,
            reason: "enumeration relies on linear level-1 decoding".into(),
        });
    }
    let mut free = c.clone();
    free.ops = strip_checks(&c.ops);
    let mut rec = Recorder::default();
    run_frame(&free, &mut rec, ExecOptions::abort());
    let draws = rec.0;

    let eps = crate::analytic::homogeneous_errors(model);
    let table = model.table();
    let outcome_probs = |d: Draw| -> Vec<f64> {
        match d {
            Draw::Prep | Draw::Measure => vec![model.p_m],
            Draw::TwoQubit => table.to_vec(),
            Draw::Fresh => vec![eps.eps_x, eps.eps_y, eps.eps_z],
        }
    };

    let layout = Layout { c };
    // log of the no-fault weight, and per-location outcome ratios p / (1 - p_total)
    let mut log_w0 = 0.0;
    let mut singles: Vec<Vec<(Vec<u8>, f64)>> = Vec::with_capacity(draws.len());
    for (k, &d) in draws.iter().enumerate() {
        let probs = outcome_probs(d);
        let total: f64 = probs.iter().sum();
        if total >= 1.0 {
            return Err(Error::InvalidNoiseModel(
                "a location faults with certainty".into(),
            ));
        }
        log_w0 += (-total).ln_1p();
        let mut outs = Vec::new();
        for (o, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut noise = Scripted {
                at: k,
                outcome: o,
                k: 0,
            };
            let run = run_frame(&free, &mut noise, ExecOptions::abort());
            outs.push((
                layout.summary(&run.flips, &run.frame_x, &run.frame_z),
                p / (1.0 - total),
            ));
        }
        singles.push(outs);
    }
    let w0 = log_w0.exp();

    // weight by summary class
    let zero = layout.summary(
        &vec![0; word_count(c.n_records)],
        &vec![0; word_count(c.n_qubits)],
        &vec![0; word_count(c.n_qubits)],
    );
    let mut classes: HashMap<Vec<u8>, f64> = HashMap::new();
    *classes.entry(zero.clone()).or_default() += 1.0;
    let mut first: HashMap<Vec<u8>, f64> = HashMap::new();
    for outs in &singles {
        for (s, r) in outs {
            *first.entry(s.clone()).or_default() += r;
        }
    }
    for (s, r) in &first {
        *classes.entry(s.clone()).or_default() += r;
    }
    if order == 2 {
        // ordered pairs over all locations, minus pairs within one location, halved
        let firsts: Vec<(&Vec<u8>, f64)> = first.iter().map(|(s, &r)| (s, r)).collect();
        let mut pairs: HashMap<Vec<u8>, f64> = HashMap::new();
        for (a, ra) in &firsts {
            for (b, rb) in &firsts {
                *pairs.entry(xor(a, b)).or_default() += ra * rb;
            }
        }
        for outs in &singles {
            for (a, ra) in outs {
                for (b, rb) in outs {
                    *pairs.entry(xor(a, b)).or_default() -= ra * rb;
                }
            }
        }
        for (s, r) in pairs {
            *classes.entry(s).or_default() += 0.5 * r;
        }
    }

    let (mut acc, mut joint, mut mass) = (0.0, 0.0, 0.0);
    for (s, r) in &classes {
        mass += r;
        let (a, l) = layout.judge(s);
        if a {
            acc += r;
            if l {
                joint += r;
            }
        }
    }
    let (acc, joint, mass) = (w0 * acc, w0 * joint, w0 * mass);
    Ok(OracleEstimate {
        acceptance: acc,
        joint_error: joint,
        conditional_error: if acc > 0.0 { joint / acc } else { 0.0 },
        covered: mass,
        locations: draws.len(),
        order,
    })
}

/// Fault outcomes of `c` that are accepted yet leave a logical error, as
/// `(draw index, outcome)` pairs. Empty for a fault-tolerant gadget.
pub fn undetected_single_faults(c: &Circuit) -> Result<Vec<(usize, usize)>> {
    let model = NoiseModel::depolarizing(1e-3);
    let mut free = c.clone();
    free.ops = strip_checks(&c.ops);
    let mut rec = Recorder::default();
    run_frame(&free, &mut rec, ExecOptions::abort());
    let layout = Layout { c };
    let mut bad = Vec::new();
    for (k, &d) in rec.0.iter().enumerate() {
        let n = match d {
            Draw::Prep | Draw::Measure => 1,
            Draw::TwoQubit => model.table().len(),
            Draw::Fresh => 3,
        };
        for o in 0..n {
            let mut noise = Scripted {
                at: k,
                outcome: o,
                k: 0,
            };
            let run = run_frame(&free, &mut noise, ExecOptions::abort());
            if layout.judge(&layout.summary(&run.flips, &run.frame_x, &run.frame_z)) == (true, true) {
                bad.push((k, o));
            }
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build, Gadget, Mode};

    #[test]
    fn noiseless_is_certain_acceptance() {
        let c = build(Gadget::CzSingle, 1, Mode::Faithful).unwrap();
        let e = enumerate(&c, &NoiseModel::noiseless(), 2).unwrap();
        assert_eq!(e.acceptance, 1.0);
        assert_eq!(e.joint_error, 0.0);
    }

    #[test]
    fn level_one_gadgets_have_no_undetected_single_faults() {
        for g in [
            Gadget::CzSingle,
            Gadget::CzDouble,
            Gadget::EncodeZero,
            Gadget::EncodePlus,
        ] {
            let c = build(g, 1, Mode::Faithful).unwrap();
            assert!(undetected_single_faults(&c).unwrap().is_empty(), "{g}");
        }
    }

    #[test]
    fn second_order_refines_first() {
        let c = build(Gadget::CzSingle, 1, Mode::Faithful).unwrap();
        let m = NoiseModel::depolarizing(1e-3);
        let a = enumerate(&c, &m, 1).unwrap();
        let b = enumerate(&c, &m, 2).unwrap();
        assert!(b.covered > a.covered && b.covered <= 1.0 + 1e-12);
        assert!(1.0 - b.covered < (1.0 - a.covered) * 0.2);
        assert!(b.acceptance >= a.acceptance);
        assert_eq!(a.joint_error, 0.0);
        assert!(b.joint_error > 0.0);
    }

    #[test]
    fn rejects_higher_levels() {
        let c = build(Gadget::CzSingle, 2, Mode::Fast).unwrap();
        assert!(enumerate(&c, &NoiseModel::depolarizing(1e-3), 1).is_err());
    }
}
