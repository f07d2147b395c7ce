//! Dense state-vector simulator for small registers (`n ≤ 12`).
//!
//! Qubit `q` is bit `q` of the basis index.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::pauli::PauliString;
use crate::tableau::{Gate, StabilizerState};

pub const MAX_QUBITS: usize = 12;

#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize) -> Self {
        assert!(
            n <= MAX_QUBITS,
            "state-vector oracle limited to {MAX_QUBITS} qubits"
        );
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn apply(&mut self, gate: Gate) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match gate {
            Gate::H(q) => {
                let m = 1 << q;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | m] = (a - b) * s;
                    }
                }
            }
            Gate::S(q) => self.phase_where(|i| (i >> q) & 1 == 1, Complex64::new(0.0, 1.0)),
            Gate::Z(q) => self.phase_where(|i| (i >> q) & 1 == 1, Complex64::new(-1.0, 0.0)),
            Gate::X(q) => self.swap_where(q, |_| true),
            Gate::Cz(a, b) => self.phase_where(
                |i| (i >> a) & 1 == 1 && (i >> b) & 1 == 1,
                Complex64::new(-1.0, 0.0),
            ),
            Gate::Cnot(c, t) => self.swap_where(t, |i| (i >> c) & 1 == 1),
        }
    }

    fn phase_where(&mut self, pred: impl Fn(usize) -> bool, f: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if pred(i) {
                *a *= f;
            }
        }
    }

    fn swap_where(&mut self, t: usize, pred: impl Fn(usize) -> bool) {
        let m = 1 << t;
        for i in 0..self.amps.len() {
            if i & m == 0 && pred(i) {
                self.amps.swap(i, i | m);
            }
        }
    }

    /// `P|ψ⟩` for `P = i^phase X^x Z^z`.
    pub fn apply_pauli(&self, p: &PauliString) -> Vec<Complex64> {
        let (mut x, mut z) = (0usize, 0usize);
        for q in 0..self.n {
            x |= (p.x_bit(q) as usize) << q;
            z |= (p.z_bit(q) as usize) << q;
        }
        let ph = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][p.phase() as usize];
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (z & b).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ x] += a * ph * sign;
        }
        out
    }

    /// `⟨ψ|P|ψ⟩`.
    pub fn expectation(&self, p: &PauliString) -> Complex64 {
        let pv = self.apply_pauli(p);
        self.amps.iter().zip(&pv).map(|(a, b)| a.conj() * b).sum()
    }

    /// Joint Z-basis distribution of `qubits` (outcome bit `k` = qubit `qubits[k]`).
    pub fn distribution(&self, qubits: &[usize]) -> BTreeMap<u64, f64> {
        let mut out = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            let pr = a.norm_sqr();
            if pr < 1e-14 {
                continue;
            }
            let key = qubits
                .iter()
                .enumerate()
                .fold(0u64, |k, (j, &q)| k | ((((i >> q) & 1) as u64) << j));
            *out.entry(key).or_insert(0.0) += pr;
        }
        out
    }
}

/// Exact Z-basis distribution of `qubits` for a stabilizer state (frame
/// included), by branching on every random measurement.
pub fn tableau_distribution(state: &StabilizerState, qubits: &[usize]) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    branch(state.clone(), qubits, 0, 0, 1.0, &mut out);
    out
}

fn branch(s: StabilizerState, qubits: &[usize], k: usize, key: u64, prob: f64, out: &mut BTreeMap<u64, f64>) {
    if k == qubits.len() {
        *out.entry(key).or_insert(0.0) += prob;
        return;
    }
    let obs = PauliString::single(s.n_qubits(), qubits[k], crate::pauli::Pauli::Z);
    let mut a = s.clone();
    let m = a.measure_pauli_forced(&obs, false).expect("sizes agree");
    let bit = |m: &crate::tableau::Measurement| (m.is_minus() as u64) << k;
    if m.deterministic {
        branch(a, qubits, k + 1, key | bit(&m), prob, out);
    } else {
        branch(a, qubits, k + 1, key | bit(&m), prob / 2.0, out);
        let mut b = s;
        let m = b.measure_pauli_forced(&obs, true).expect("sizes agree");
        branch(b, qubits, k + 1, key | bit(&m), prob / 2.0, out);
    }
}

/// Total-variation distance between two distributions.
pub fn total_variation(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
}

/// Which phase `S` applies in the dense simulator. `Conjugated` swaps `S`
/// for `S†`, a deliberately wrong convention for negative controls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PhaseConvention {
    #[default]
    Standard,
    Conjugated,
}

/// Uniformly drawn gates from `{H, S, X, Z, CZ, CNOT}` on `n` qubits.
pub fn random_clifford_circuit<R: Rng + ?Sized>(n: usize, depth: usize, rng: &mut R) -> Vec<Gate> {
    (0..depth)
        .map(|_| {
            let kind = if n < 2 {
                rng.gen_range(0..4)
            } else {
                rng.gen_range(0..6)
            };
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n.max(2) - 1);
            if b >= a {
                b += 1;
            }
            match kind {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::X(a),
                3 => Gate::Z(a),
                4 => Gate::Cz(a, b),
                _ => Gate::Cnot(a, b),
            }
        })
        .collect()
}

/// Outcome of comparing the tableau against the dense simulator on one
/// circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheck {
    pub n: usize,
    pub gates: Vec<Gate>,
    /// Largest `|⟨ψ|g|ψ⟩ - 1|` over the tableau's stabilizer generators.
    pub stabilizer_defect: f64,
    /// Distance between the two exact Z-basis distributions.
    pub exact_tv: f64,
    /// Distance between `shots` tableau samples of qubits 0 and 1 and the
    /// dense marginal.
    pub shot_tv: f64,
    pub shots: u64,
}

impl CrossCheck {
    pub fn passes(&self, shot_tol: f64) -> bool {
        self.stabilizer_defect < 1e-9 && self.exact_tv < 1e-9 && self.shot_tv < shot_tol
    }

    /// Name of the first violated invariant, if any.
    pub fn violation(&self, shot_tol: f64) -> Option<&'static str> {
        if self.stabilizer_defect >= 1e-9 {
            Some("stabilizer expectation (phase convention)")
        } else if self.exact_tv >= 1e-9 {
            Some("exact Z-basis distribution")
        } else if self.shot_tv >= shot_tol {
            Some("sampled marginal distribution")
        } else {
            None
        }
    }
}

/// Runs `gates` through both simulators and compares them. With `shots = 0`
/// only the exact comparisons are made.
pub fn cross_check<R: Rng + ?Sized>(
    n: usize,
    gates: &[Gate],
    shots: u64,
    convention: PhaseConvention,
    rng: &mut R,
) -> Result<CrossCheck> {
    let mut tab = StabilizerState::new(n);
    let mut dense = StateVector::new(n);
    for &g in gates {
        tab.apply(g)?;
        match (g, convention) {
            (Gate::S(q), PhaseConvention::Conjugated) => {
                dense.apply(Gate::S(q));
                dense.apply(Gate::Z(q));
            }
            _ => dense.apply(g),
        }
    }
    let stabilizer_defect = tab
        .stabilizers()
        .iter()
        .map(|g| (dense.expectation(g) - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let all: Vec<usize> = (0..n).collect();
    let exact_tv = total_variation(&tableau_distribution(&tab, &all), &dense.distribution(&all));

    let window: Vec<usize> = (0..n.min(2)).collect();
    if shots == 0 {
        return Ok(CrossCheck {
            n,
            gates: gates.to_vec(),
            stabilizer_defect,
            exact_tv,
            shot_tv: 0.0,
            shots,
        });
    }
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let mut s = tab.clone();
        let mut key = 0u64;
        for (k, &q) in window.iter().enumerate() {
            key |= (s.measure_z(q, rng)?.is_minus() as u64) << k;
        }
        *hist.entry(key).or_insert(0.0) += 1.0 / shots as f64;
    }
    let shot_tv = total_variation(&hist, &dense.distribution(&window));
    Ok(CrossCheck {
        n,
        gates: gates.to_vec(),
        stabilizer_defect,
        exact_tv,
        shot_tv,
        shots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_state() {
        let mut v = StateVector::new(2);
        v.apply(Gate::H(0));
        v.apply(Gate::Cnot(0, 1));
        let d = v.distribution(&[0, 1]);
        assert_eq!(d.len(), 2);
        assert!((d[&0] - 0.5).abs() < 1e-12 && (d[&3] - 0.5).abs() < 1e-12);
        let zz = PauliString::from_label("ZZ").unwrap();
        assert!((v.expectation(&zz).re - 1.0).abs() < 1e-12);
        let yy = PauliString::from_label("-YY").unwrap();
        assert!((v.expectation(&yy).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tableau_matches_on_ghz() {
        let mut s = StabilizerState::new(3);
        s.h(0).cnot(0, 1).cnot(1, 2);
        let d = tableau_distribution(&s, &[0, 1, 2]);
        let mut v = StateVector::new(3);
        for g in [Gate::H(0), Gate::Cnot(0, 1), Gate::Cnot(1, 2)] {
            v.apply(g);
        }
        assert!(total_variation(&d, &v.distribution(&[0, 1, 2])) < 1e-12);
    }

    #[test]
    fn random_circuits_agree_and_wrong_phase_is_caught() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 1..=5 {
            let gates = random_clifford_circuit(n, 30, &mut rng);
            let c = cross_check(n, &gates, 2000, PhaseConvention::Standard, &mut rng).unwrap();
            assert!(c.passes(0.05), "{c:?}");
        }
        let gates = [Gate::H(0), Gate::S(0), Gate::H(0)];
        let c = cross_check(1, &gates, 100, PhaseConvention::Conjugated, &mut rng).unwrap();
        assert_eq!(
            c.violation(0.05),
            Some("stabilizer expectation (phase convention)")
        );
    }
}
