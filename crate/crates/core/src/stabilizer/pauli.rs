//! Pauli strings over bit-packed GF(2) words.
//!
//! A string is stored as `i^k * prod_s W(x_s, z_s)` with the Hermitian
//! single-site basis `W(0,0)=I, W(1,0)=X, W(0,1)=Z, W(1,1)=Y`. Generators of
//! a stabilizer group always carry `k` in `{0, 2}`, i.e. a sign; the odd
//! values only appear transiently while composing strings.

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Phase exponent (of `i`) picked up when multiplying two W-basis words:
/// per site, `W(a,b) * W(c,d) = i^e W(a^c, b^d)` with
/// `e = ab + cd + 2bc - (a^c)(b^d)  (mod 4)`.
/// Summed over a whole word via popcounts.
#[inline]
pub(crate) fn word_phase_exponent(a: u64, b: u64, c: u64, d: u64) -> u32 {
    let t1 = (a & b).count_ones();
    let t2 = (c & d).count_ones();
    let t3 = (b & c).count_ones();
    let t4 = ((a ^ c) & (b ^ d)).count_ones();
    (t1 + t2 + 2 * t3 + 3 * t4) & 3
}

/// A (possibly signed) Pauli operator on `n` qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    /// Exponent of the global `i^k` prefactor, reduced mod 4.
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Build from per-site bits; `sign` is +1 or -1.
    pub fn from_bits(x_bits: &[bool], z_bits: &[bool], sign: i8) -> Result<Self> {
        if x_bits.len() != z_bits.len() {
            return Err(Error::InvalidSize("x/z bit vectors differ in length".into()));
        }
        let mut p = PauliString::identity(x_bits.len());
        for (i, (&xb, &zb)) in x_bits.iter().zip(z_bits).enumerate() {
            if xb {
                p.set_x(i, true);
            }
            if zb {
                p.set_z(i, true);
            }
        }
        p.phase = match sign {
            1 => 0,
            -1 => 2,
            _ => return Err(Error::Domain("sign must be +1 or -1".into())),
        };
        Ok(p)
    }

    /// Single-site Pauli, `which` in {"X","Y","Z"}.
    pub fn single(n: usize, site: usize, which: char, sign: i8) -> Result<Self> {
        if site >= n {
            return Err(Error::Index(format!("site {site} out of range for n={n}")));
        }
        let mut p = PauliString::identity(n);
        match which {
            'X' => p.set_x(site, true),
            'Z' => p.set_z(site, true),
            'Y' => {
                p.set_x(site, true);
                p.set_z(site, true);
            }
            other => return Err(Error::Domain(format!("unknown Pauli letter {other}"))),
        }
        if sign == -1 {
            p.phase = 2;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_bit(&self, i: usize) -> bool {
        (self.x[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, i: usize) -> bool {
        (self.z[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn set_x(&mut self, i: usize, v: bool) {
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        if v {
            self.x[w] |= 1 << b;
        } else {
            self.x[w] &= !(1 << b);
        }
    }

    pub fn set_z(&mut self, i: usize, v: bool) {
        let (w, b) = (i / WORD_BITS, i % WORD_BITS);
        if v {
            self.z[w] |= 1 << b;
        } else {
            self.z[w] &= !(1 << b);
        }
    }

    pub(crate) fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub(crate) fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub(crate) fn phase_quarter(&self) -> u8 {
        self.phase
    }

    pub(crate) fn add_phase_quarter(&mut self, k: u8) {
        self.phase = (self.phase + k) & 3;
    }

    /// Sign of a Hermitian string. Panics in debug if the phase is imaginary.
    pub fn sign(&self) -> i8 {
        debug_assert!(self.phase % 2 == 0, "imaginary phase on a generator");
        if self.phase & 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_identity_bits(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// True if the two strings commute (symplectic inner product zero).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        assert_eq!(self.n, other.n);
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]).count_ones() & 1;
            acc ^= (self.z[i] & other.x[i]).count_ones() & 1;
        }
        acc == 0
    }

    /// Operator product `self * other`, with exact phase tracking.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n);
        let mut out = PauliString::identity(self.n);
        let mut e = (self.phase + other.phase) as u32;
        for i in 0..self.x.len() {
            e += word_phase_exponent(self.x[i], self.z[i], other.x[i], other.z[i]);
            out.x[i] = self.x[i] ^ other.x[i];
            out.z[i] = self.z[i] ^ other.z[i];
        }
        out.phase = (e & 3) as u8;
        out
    }

    /// Letter at a site, for display and tests.
    pub fn letter(&self, i: usize) -> char {
        match (self.x_bit(i), self.z_bit(i)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.phase {
            0 => write!(f, "+")?,
            1 => write!(f, "+i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => unreachable!(),
        }
        for i in 0..self.n {
            write!(f, "{}", self.letter(i))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(which: char) -> PauliString {
        PauliString::single(1, 0, which, 1).unwrap()
    }

    #[test]
    fn single_site_products_match_pauli_algebra() {
        // (lhs, rhs, expected letter, expected i^k)
        let table: &[(char, char, char, u8)] = &[
            ('X', 'X', 'I', 0),
            ('X', 'Z', 'Y', 3),
            ('Z', 'X', 'Y', 1),
            ('X', 'Y', 'Z', 1),
            ('Y', 'X', 'Z', 3),
            ('Z', 'Y', 'X', 3),
            ('Y', 'Z', 'X', 1),
            ('Y', 'Y', 'I', 0),
            ('Z', 'Z', 'I', 0),
        ];
        for &(a, b, l, k) in table {
            let p = single(a).mul(&single(b));
            assert_eq!(p.letter(0), l, "{a}*{b}");
            assert_eq!(p.phase_quarter(), k, "{a}*{b}");
        }
    }

    #[test]
    fn composition_xors_bits() {
        let a = PauliString::from_bits(&[true, false, true], &[false, false, true], 1).unwrap();
        let b = PauliString::from_bits(&[true, true, false], &[false, true, true], 1).unwrap();
        let c = a.mul(&b);
        for i in 0..3 {
            assert_eq!(c.x_bit(i), a.x_bit(i) ^ b.x_bit(i));
            assert_eq!(c.z_bit(i), a.z_bit(i) ^ b.z_bit(i));
        }
    }

    #[test]
    fn commutation() {
        let x = single('X');
        let z = single('Z');
        assert!(!x.commutes_with(&z));
        let xx = PauliString::from_bits(&[true, true], &[false, false], 1).unwrap();
        let zz = PauliString::from_bits(&[false, false], &[true, true], 1).unwrap();
        assert!(xx.commutes_with(&zz));
    }
}
