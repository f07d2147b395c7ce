//! Physical error model: a two-qubit Pauli table for every C-Z / C-Not, a
//! measurement flip probability (also used for preparation flips), and the
//! memory parameters that enter only the analytic memory threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};
use crate::scalar::Scalar;

/// Index of the pair `AB` in the 15-entry table (`II` excluded).
pub fn pair_index(a: Pauli, b: Pauli) -> Option<usize> {
    let i = a as usize * 4 + b as usize;
    i.checked_sub(1)
}

pub fn pair_from_index(i: usize) -> (Pauli, Pauli) {
    let k = i + 1;
    (Pauli::ALL[k / 4], Pauli::ALL[k % 4])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel<T: Scalar = f64> {
    pub p_e: T,
    table: Vec<T>,
    pub p_m: T,
    pub tau_m: T,
    pub n_steps: u32,
}

impl<T: Scalar> NoiseModel<T> {
    /// Uniform depolarizing model: `p_AB = p_e/15`, `p_M = 4 p_e/15`.
    pub fn depolarizing(p_e: T) -> Self {
        let fifteenth = p_e.clone() / T::ratio(15, 1);
        Self {
            table: vec![fifteenth.clone(); 15],
            p_m: fifteenth * T::ratio(4, 1),
            p_e,
            tau_m: T::zero(),
            n_steps: 12,
        }
    }

    pub fn noiseless() -> Self {
        Self::depolarizing(T::zero())
    }

    /// Model with an explicit table; missing pairs are zero.
    pub fn with_table(p_e: T, entries: &[((Pauli, Pauli), T)], p_m: T) -> Result<Self> {
        let mut table = vec![T::zero(); 15];
        for ((a, b), v) in entries {
            let i =
                pair_index(*a, *b).ok_or_else(|| Error::InvalidNoiseModel("II is not an error".into()))?;
            table[i] = v.clone();
        }
        let m = Self {
            p_e,
            table,
            p_m,
            tau_m: T::zero(),
            n_steps: 12,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_memory(mut self, tau_m: T, n_steps: u32) -> Self {
        self.tau_m = tau_m;
        self.n_steps = n_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: &T| -> Result<()> {
            if v.is_probability() {
                Ok(())
            } else {
                Err(Error::InvalidProbability {
                    name: name.into(),
                    value: v.approx(),
                })
            }
        };
        check("p_e", &self.p_e)?;
        check("p_M", &self.p_m)?;
        for (i, v) in self.table.iter().enumerate() {
            let (a, b) = pair_from_index(i);
            check(&format!("p_{}{}", a.to_char(), b.to_char()), v)?;
        }
        if !self.two_qubit_total().is_probability() {
            return Err(Error::InvalidNoiseModel(format!(
                "two-qubit table sums to {}",
                self.two_qubit_total().approx()
            )));
        }
        if self.tau_m < T::zero() {
            return Err(Error::InvalidNoiseModel("tau_m must be non-negative".into()));
        }
        Ok(())
    }

    /// `p_AB`; zero for `II`.
    pub fn p_ab(&self, a: Pauli, b: Pauli) -> T {
        pair_index(a, b).map_or_else(T::zero, |i| self.table[i].clone())
    }

    pub fn set_p_ab(&mut self, a: Pauli, b: Pauli, v: T) {
        if let Some(i) = pair_index(a, b) {
            self.table[i] = v;
        }
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    /// `Σ_B p_AB` over `B ∈ {I, X, Y, Z}`.
    pub fn row_sum(&self, a: Pauli) -> T {
        Pauli::ALL.iter().fold(T::zero(), |acc, &b| acc + self.p_ab(a, b))
    }

    pub fn two_qubit_total(&self) -> T {
        self.table.iter().fold(T::zero(), |acc, v| acc + v.clone())
    }

    /// Multiplies every probability (and `p_e`) by `k`.
    pub fn scaled(&self, k: T) -> Self {
        Self {
            p_e: self.p_e.clone() * k.clone(),
            table: self.table.iter().map(|v| v.clone() * k.clone()).collect(),
            p_m: self.p_m.clone() * k,
            tau_m: self.tau_m.clone(),
            n_steps: self.n_steps,
        }
    }

    pub fn to_f64(&self) -> NoiseModel<f64> {
        NoiseModel {
            p_e: self.p_e.approx(),
            table: self.table.iter().map(Scalar::approx).collect(),
            p_m: self.p_m.approx(),
            tau_m: self.tau_m.approx(),
            n_steps: self.n_steps,
        }
    }
}

impl NoiseModel<f64> {
    /// Draws the error following a two-qubit gate; `(I, I)` means no error.
    pub fn sample_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (Pauli, Pauli) {
        let mut u: f64 = rng.gen();
        for (i, &p) in self.table.iter().enumerate() {
            if u < p {
                return pair_from_index(i);
            }
            u -= p;
        }
        (Pauli::I, Pauli::I)
    }

    pub fn sample_two_qubit_error<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliString {
        let (a, b) = self.sample_pair(rng);
        let mut s = PauliString::identity(2);
        s.set(0, a);
        s.set(1, b);
        s
    }

    pub fn sample_measurement_flip<R: Rng + ?Sized>(&self, rng: &mut R) -> bool {
        self.p_m > 0.0 && rng.gen::<f64>() < self.p_m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_indexing_covers_fifteen() {
        let mut seen = std::collections::HashSet::new();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                if let Some(i) = pair_index(a, b) {
                    assert!(i < 15);
                    assert_eq!(pair_from_index(i), (a, b));
                    seen.insert(i);
                }
            }
        }
        assert_eq!(seen.len(), 15);
        assert_eq!(pair_index(Pauli::I, Pauli::I), None);
    }

    #[test]
    fn default_table_is_uniform() {
        let m = NoiseModel::<BigRational>::depolarizing(BigRational::ratio(3, 200));
        assert_eq!(m.p_ab(Pauli::X, Pauli::I), BigRational::ratio(1, 1000));
        assert_eq!(m.p_m, BigRational::ratio(4, 1000));
        assert_eq!(m.two_qubit_total(), BigRational::ratio(15, 1000));
        m.validate().unwrap();
    }

    #[test]
    fn zero_noise_never_errs() {
        let m = NoiseModel::<f64>::noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10_000 {
            assert_eq!(m.sample_pair(&mut rng), (Pauli::I, Pauli::I));
            assert!(!m.sample_measurement_flip(&mut rng));
        }
    }

    #[test]
    fn degenerate_table() {
        let m = NoiseModel::with_table(1.0, &[((Pauli::X, Pauli::I), 1.0)], 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert_eq!(m.sample_two_qubit_error(&mut rng).to_string(), "+XI");
            assert!(m.sample_measurement_flip(&mut rng));
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(NoiseModel::with_table(
            0.1,
            &[((Pauli::X, Pauli::I), 0.7), ((Pauli::Z, Pauli::Z), 0.7)],
            0.0
        )
        .is_err());
        assert!(NoiseModel::with_table(0.1, &[((Pauli::X, Pauli::I), -0.1)], 0.0).is_err());
        assert!(NoiseModel::with_table(0.1, &[((Pauli::I, Pauli::I), 0.1)], 0.0).is_err());
    }
}
