//! Closed-form error propagation, the concatenation recursion and the
//! threshold formulas, generic over [`Scalar`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::pauli::Pauli;
use crate::scalar::Scalar;

/// Number of weight-2 fault pairs in a 7-qubit block, `C(7,2)`.
pub const PAIR_COUNT: u64 = 21;

/// Default multiplier turning `p_q^(l)` into the error of a measurement
/// performed inside a level-`l` construction.
pub const DEFAULT_MEASUREMENT_MULTIPLIER: u64 = 2;

/// Single-qubit error probabilities carried by a verified cluster qubit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousErrors<T: Scalar = f64> {
    pub eps_x: T,
    pub eps_y: T,
    pub eps_z: T,
}

impl<T: Scalar> HomogeneousErrors<T> {
    pub fn zero() -> Self {
        Self {
            eps_x: T::zero(),
            eps_y: T::zero(),
            eps_z: T::zero(),
        }
    }

    pub fn total(&self) -> T {
        self.eps_x.clone() + self.eps_y.clone() + self.eps_z.clone()
    }

    pub fn get(&self, p: Pauli) -> T {
        match p {
            Pauli::I => T::zero(),
            Pauli::X => self.eps_x.clone(),
            Pauli::Y => self.eps_y.clone(),
            Pauli::Z => self.eps_z.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps_x", &self.eps_x),
            ("eps_y", &self.eps_y),
            ("eps_z", &self.eps_z),
        ] {
            if !v.is_probability() {
                return Err(Error::InvalidProbability {
                    name: name.into(),
                    value: v.approx(),
                });
            }
        }
        if !self.total().is_probability() {
            return Err(Error::Domain("homogeneous errors sum above 1".into()));
        }
        Ok(())
    }
}

/// `(p_XI, p_YI, 2 p_ZI)`.
pub fn homogeneous_errors<T: Scalar>(model: &NoiseModel<T>) -> HomogeneousErrors<T> {
    HomogeneousErrors {
        eps_x: model.p_ab(Pauli::X, Pauli::I),
        eps_y: model.p_ab(Pauli::Y, Pauli::I),
        eps_z: model.p_ab(Pauli::Z, Pauli::I) * T::ratio(2, 1),
    }
}

/// Errors on a qubit after a bare C-Z to a partner carrying `eps`.
/// The partner's X and Y errors reach this qubit as Z.
pub fn bare_cz_update<T: Scalar>(eps: &HomogeneousErrors<T>, model: &NoiseModel<T>) -> HomogeneousErrors<T> {
    HomogeneousErrors {
        eps_x: eps.eps_x.clone() + model.row_sum(Pauli::X),
        eps_y: eps.eps_y.clone() + model.row_sum(Pauli::Y),
        eps_z: eps.eps_z.clone() + eps.eps_x.clone() + eps.eps_y.clone() + model.row_sum(Pauli::Z),
    }
}

/// `p_q^(0) = ε'_Z + ε'_Y + p_M`: error of an X-basis readout.
pub fn measurement_error_p0<T: Scalar>(eps_prime: &HomogeneousErrors<T>, model: &NoiseModel<T>) -> T {
    eps_prime.eps_z.clone() + eps_prime.eps_y.clone() + model.p_m.clone()
}

/// `p_q^(0)` for a model, through the full chain.
pub fn physical_readout_error<T: Scalar>(model: &NoiseModel<T>) -> T {
    let eps = homogeneous_errors(model);
    measurement_error_p0(&bare_cz_update(&eps, model), model)
}

/// `(21 p_q0)^(2^l) / 21`, clamped to `[0, 1]`.
pub fn level_error<T: Scalar>(l: u32, p_q0: &T) -> T {
    let c = T::count(PAIR_COUNT);
    ((c.clone() * p_q0.clone()).powu(1u64 << l) / c).clamp_unit()
}

/// The same quantity through `p^(l) = 21 (p^(l-1))^2`, without clamping.
pub fn level_error_recursive<T: Scalar>(l: u32, p_q0: &T) -> T {
    let c = T::count(PAIR_COUNT);
    (0..l).fold(p_q0.clone(), |p, _| c.clone() * p.clone() * p)
}

/// Error of a measurement made inside a level-`l` construction: a multiple
/// of `p_q^(l)` covering the readout and its Pauli-frame error.
pub fn in_construction_error<T: Scalar>(p_ql: &T, multiplier: u64) -> T {
    (p_ql.clone() * T::count(multiplier)).clamp_unit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdParams<T: Scalar = f64> {
    pub d: T,
    pub p_th: T,
    pub c: u64,
}

impl<T: Scalar> ThresholdParams<T> {
    /// `p_th = 1 / (21 D)`.
    pub fn from_d(d: T) -> Result<Self> {
        if d <= T::zero() {
            return Err(Error::Domain(format!("D must be positive, got {d}")));
        }
        let p_th = T::one() / (T::count(PAIR_COUNT) * d.clone());
        Ok(Self {
            d,
            p_th,
            c: PAIR_COUNT,
        })
    }
}

/// `D = p_q^(0) / p_e` and the resulting threshold.
pub fn threshold<T: Scalar>(model: &NoiseModel<T>) -> Result<ThresholdParams<T>> {
    if model.p_e <= T::zero() {
        return Err(Error::Degenerate("D is undefined at p_e = 0".into()));
    }
    ThresholdParams::from_d(physical_readout_error(model) / model.p_e.clone())
}

/// A computation size `N = mantissa · 10^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComputationSize {
    pub mantissa: f64,
    pub exponent: i64,
}

impl ComputationSize {
    pub fn new(mantissa: f64, exponent: i64) -> Result<Self> {
        if !(mantissa > 0.0 && mantissa.is_finite()) {
            return Err(Error::Domain(format!(
                "N must be positive, got mantissa {mantissa}"
            )));
        }
        let shift = mantissa.log10().floor() as i64;
        Ok(Self {
            mantissa: mantissa / 10f64.powi(shift as i32),
            exponent: exponent + shift,
        })
    }

    pub fn pow10(exponent: i64) -> Self {
        Self {
            mantissa: 1.0,
            exponent,
        }
    }

    pub fn log10(&self) -> f64 {
        self.exponent as f64 + self.mantissa.log10()
    }

    /// `log2(log10 N)`, the asymptotic level count.
    pub fn asymptotic_level(&self) -> Result<f64> {
        let l = self.log10();
        if l <= 0.0 {
            return Err(Error::Domain("log2(log10 N) needs N > 1".into()));
        }
        Ok(l.log2())
    }
}

impl FromStr for ComputationSize {
    type Err = Error;

    /// Accepts `1e20`, `3.5E8`, `1000`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse computation size `{s}`"));
        let (m, e) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (s, 0),
        };
        Self::new(m.parse::<f64>().map_err(|_| bad())?, e)
    }
}

impl fmt::Display for ComputationSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mantissa == 1.0 {
            write!(f, "1e{}", self.exponent)
        } else {
            write!(f, "{}e{}", self.mantissa, self.exponent)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryThreshold {
    /// `[21 {1 + log2(log10 N) n τ_m}]^-1`.
    pub verbatim: f64,
    /// The same bracket with the gate factor `D` folded in.
    pub d_adjusted: f64,
    pub d: f64,
    pub levels: f64,
}

/// Threshold including memory errors accumulated over `n_steps` waiting
/// steps per level.
pub fn memory_threshold(n: ComputationSize, n_steps: u32, tau_m: f64, d: f64) -> Result<MemoryThreshold> {
    if n.log10() <= 1.0 {
        return Err(Error::Domain("memory threshold needs N > 10".into()));
    }
    if tau_m.is_nan() || tau_m < 0.0 {
        return Err(Error::Domain(format!("tau_m must be non-negative, got {tau_m}")));
    }
    if d.is_nan() || d <= 0.0 {
        return Err(Error::Domain(format!("D must be positive, got {d}")));
    }
    let levels = n.asymptotic_level()?;
    let bracket = PAIR_COUNT as f64 * (1.0 + levels * n_steps as f64 * tau_m);
    Ok(MemoryThreshold {
        verbatim: 1.0 / bracket,
        d_adjusted: 1.0 / (bracket * d),
        d,
        levels,
    })
}

/// Smallest `l` with `p_q^(l) ≤ 0.1 / N`.
pub fn highest_level<T: Scalar>(n: ComputationSize, p_q0: &T) -> Result<u32> {
    let p = p_q0.approx();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability {
            name: "p_q0".into(),
            value: p,
        });
    }
    if p == 0.0 {
        return Ok(0);
    }
    let x = PAIR_COUNT as f64 * p;
    if x >= 1.0 {
        return Err(Error::AboveThreshold(p));
    }
    // log10 p^(l) = 2^l log10(21 p) - log10 21
    let target = -1.0 - n.log10();
    let c = (PAIR_COUNT as f64).log10();
    let mut l = 0u32;
    while 2f64.powi(l as i32) * x.log10() - c > target + 1e-12 {
        l += 1;
        if l > 64 {
            return Err(Error::Domain("level search did not terminate".into()));
        }
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn uniform_chain() {
        let m = NoiseModel::<Q>::depolarizing(Q::ratio(15, 1000));
        let eps = homogeneous_errors(&m);
        assert_eq!(eps.eps_x, Q::ratio(1, 1000));
        assert_eq!(eps.eps_z, Q::ratio(2, 1000));
        let e2 = bare_cz_update(&eps, &m);
        assert_eq!(
            (e2.eps_x.clone(), e2.eps_y.clone(), e2.eps_z.clone()),
            (Q::ratio(5, 1000), Q::ratio(5, 1000), Q::ratio(8, 1000))
        );
        assert_eq!(measurement_error_p0(&e2, &m), Q::ratio(17, 1000));
    }

    #[test]
    fn threshold_values() {
        let t = threshold(&NoiseModel::<Q>::depolarizing(Q::ratio(1, 100))).unwrap();
        assert_eq!(t.d, Q::ratio(17, 15));
        assert_eq!(t.p_th, Q::ratio(15, 357));
        assert!(threshold(&NoiseModel::<f64>::noiseless()).is_err());
        let unit = ThresholdParams::from_d(1.0f64).unwrap();
        assert!((unit.p_th - 1.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn level_error_examples() {
        assert_eq!(level_error(0, &0.01f64), 0.01);
        assert!((level_error(1, &0.01f64) - 2.1e-3).abs() < 1e-15);
        let fixed = Q::ratio(1, 21);
        for l in 0..6 {
            assert_eq!(level_error(l, &fixed), fixed);
        }
        assert_eq!(level_error(3, &0.5f64), 1.0);
    }

    #[test]
    fn computation_size_parsing() {
        let n: ComputationSize = "1e20".parse().unwrap();
        assert_eq!(n, ComputationSize::pow10(20));
        let m: ComputationSize = "2500".parse().unwrap();
        assert_eq!(m.exponent, 3);
        assert!((m.mantissa - 2.5).abs() < 1e-12);
        assert!("abc".parse::<ComputationSize>().is_err());
        assert!("-1e3".parse::<ComputationSize>().is_err());
        assert_eq!(n.to_string(), "1e20");
    }

    #[test]
    fn memory_threshold_limits() {
        let n = ComputationSize::pow10(20);
        let m = memory_threshold(n, 10, 0.0, 1.0).unwrap();
        assert!((m.verbatim - 1.0 / 21.0).abs() < 1e-15);
        assert!(memory_threshold(ComputationSize::pow10(1), 10, 0.1, 1.0).is_err());
        let a = memory_threshold(ComputationSize::pow10(10), 10, 0.1, 1.0).unwrap();
        assert!(a.verbatim > memory_threshold(n, 10, 0.1, 1.0).unwrap().verbatim);
    }

    #[test]
    fn highest_level_examples() {
        assert_eq!(highest_level(ComputationSize::pow10(0), &0.01f64).unwrap(), 0);
        assert_eq!(highest_level(ComputationSize::pow10(3), &0.01f64).unwrap(), 2);
        assert_eq!(highest_level(ComputationSize::pow10(20), &0.0f64).unwrap(), 0);
        assert!(highest_level(ComputationSize::pow10(3), &0.05f64).is_err());
    }
}
