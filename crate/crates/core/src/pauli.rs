//! Pauli operators on `n` qubits.
//!
//! A [`PauliString`] stores `i^phase · X^x · Z^z` with bit-packed masks. In
//! this product form `Y = i·X·Z`, so a single-qubit `Y` has both bits set and
//! phase 1, and the product `X·Z` (phase 0) reads as `-i·Y`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | '_' | '.' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

pub(crate) fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn get_bit(words: &[u64], i: usize) -> bool {
    (words[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub(crate) fn flip_bit(words: &mut [u64], i: usize) {
    words[i >> 6] ^= 1 << (i & 63);
}

#[inline]
pub(crate) fn set_bit(words: &mut [u64], i: usize, v: bool) {
    if v {
        words[i >> 6] |= 1 << (i & 63);
    } else {
        words[i >> 6] &= !(1 << (i & 63));
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Exponent of `i` in the product form, mod 4.
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = word_count(n);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    /// Builds a Pauli that acts as `p` on every listed qubit.
    pub fn uniform(n: usize, qubits: impl IntoIterator<Item = usize>, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        for q in qubits {
            s.set(q, p);
        }
        s
    }

    /// Parses labels such as `XIZY`, `-XX`, `+iZ` or `-iYI`.
    pub fn from_label(label: &str) -> Result<Self> {
        let mut rest = label.trim();
        let mut label_phase = 0u8;
        if let Some(r) = rest.strip_prefix('-') {
            label_phase = 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            label_phase = (label_phase + 1) % 4;
            rest = r;
        }
        let n = rest.chars().count();
        let mut s = Self::identity(n);
        for (q, c) in rest.chars().enumerate() {
            let p = Pauli::from_char(c).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("bad Pauli character `{c}` in `{label}`"),
            })?;
            s.set(q, p);
        }
        s.set_label_phase(label_phase);
        Ok(s)
    }

    pub fn from_bits(x: Vec<u64>, z: Vec<u64>, n: usize, phase: u8) -> Self {
        debug_assert_eq!(x.len(), word_count(n));
        debug_assert_eq!(z.len(), word_count(n));
        Self {
            n,
            x,
            z,
            phase: phase & 3,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn x_bit(&self, q: usize) -> bool {
        get_bit(&self.x, q)
    }

    pub fn z_bit(&self, q: usize) -> bool {
        get_bit(&self.z, q)
    }

    /// Product-form phase exponent (`i^phase · X^x Z^z`).
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    fn y_count(&self) -> u32 {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Phase exponent when the operator is written with `Y` letters.
    pub fn label_phase(&self) -> u8 {
        ((self.phase as u32 + 4 - self.y_count() % 4) % 4) as u8
    }

    pub fn set_label_phase(&mut self, label_phase: u8) {
        self.phase = ((label_phase as u32 + self.y_count()) % 4) as u8;
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    /// Overwrites qubit `q`, keeping the label phase unchanged.
    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let lp = self.label_phase();
        set_bit(&mut self.x, q, p.x_bit());
        set_bit(&mut self.z, q, p.z_bit());
        self.set_label_phase(lp);
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// True when the operator is the identity up to phase.
    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// Group product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = self.clone();
        out.mul_assign_right(other);
        Ok(out)
    }

    /// `self ← self · other`; sizes must agree.
    pub fn mul_assign_right(&mut self, other: &PauliString) {
        debug_assert_eq!(self.n, other.n);
        let mut swaps = 0u32;
        for i in 0..self.x.len() {
            swaps += (self.z[i] & other.x[i]).count_ones();
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * (swaps & 1)) % 4) as u8;
    }

    /// Drops the phase, keeping only the Pauli letters.
    pub fn unsigned(&self) -> PauliString {
        let mut out = self.clone();
        out.set_label_phase(0);
        out
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    pub fn letters(&self) -> String {
        (0..self.n).map(|q| self.get(q).to_char()).collect()
    }
}

impl PauliString {
    // Conjugation `P -> G P G†` by the elementary Cliffords. These act on
    // tableau rows and on Pauli frames alike.

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = (self.x_bit(q), self.z_bit(q));
        if x && z {
            self.phase = (self.phase + 2) & 3;
        }
        set_bit(&mut self.x, q, z);
        set_bit(&mut self.z, q, x);
    }

    pub fn conj_s(&mut self, q: usize) {
        if self.x_bit(q) {
            self.phase = (self.phase + 1) & 3;
            flip_bit(&mut self.z, q);
        }
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z_bit(q) {
            self.phase = (self.phase + 2) & 3;
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x_bit(q) {
            self.phase = (self.phase + 2) & 3;
        }
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.x_bit(a), self.x_bit(b));
        if xa && xb {
            self.phase = (self.phase + 2) & 3;
        }
        if xb {
            flip_bit(&mut self.z, a);
        }
        if xa {
            flip_bit(&mut self.z, b);
        }
    }

    pub fn conj_cnot(&mut self, c: usize, t: usize) {
        if self.x_bit(c) {
            flip_bit(&mut self.x, t);
        }
        if self.z_bit(t) {
            flip_bit(&mut self.z, c);
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.label_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{sign}{}", self.letters())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        PauliString::from_label(s).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        for l in ["XYZI", "-iZZXY", "IIII"] {
            let a = p(l);
            let id = PauliString::identity(a.n_qubits());
            assert_eq!(id.mul(&a).unwrap(), a);
            assert_eq!(a.mul(&id).unwrap(), a);
        }
        assert_eq!(PauliString::identity(3).label_phase(), 0);
        assert_eq!(PauliString::identity(3).weight(), 0);
    }

    #[test]
    fn x_squared_is_identity() {
        let x = p("X");
        let xx = x.mul(&x).unwrap();
        assert!(xx.is_identity());
        assert_eq!(xx.label_phase(), 0);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let r = p("X").mul(&p("Z")).unwrap();
        assert_eq!(r.get(0), Pauli::Y);
        assert_eq!(r.label_phase(), 3);
        assert_eq!(r.to_string(), "-iY");
        // and Z·X = +iY
        assert_eq!(p("Z").mul(&p("X")).unwrap().to_string(), "+iY");
    }

    #[test]
    fn y_squared_is_identity() {
        let y = p("Y");
        let r = y.mul(&y).unwrap();
        assert!(r.is_identity());
        assert_eq!(r.label_phase(), 0);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        assert!(matches!(
            p("XX").mul(&p("X")),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn commutation() {
        assert!(!p("X").commutes_with(&p("Z")));
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(p("XZ").commutes_with(&p("ZX")));
    }

    #[test]
    fn label_roundtrip() {
        for l in ["+XYZ", "-iIYI", "+iZZ", "-XXXXXXX"] {
            assert_eq!(p(l).to_string(), l);
        }
    }

    #[test]
    fn wide_strings() {
        let n = 130;
        let a = PauliString::uniform(n, 0..n, Pauli::X);
        let b = PauliString::uniform(n, 0..n, Pauli::Z);
        assert_eq!(a.weight(), n);
        assert!(a.commutes_with(&b)); // 130 anticommuting sites
        let c = a.mul(&b).unwrap();
        assert!((0..n).all(|q| c.get(q) == Pauli::Y));
    }
}
