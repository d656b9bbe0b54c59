//! Clifford gates represented by their conjugation action on Pauli
//! generators, plus uniform sampling of the two-qubit Clifford group.
//!
//! Gate internals are stack-only (bit patterns and a fixed lookup table):
//! ensembles sample hundreds of millions of gates, so construction must not
//! allocate.

use rand::Rng;

use super::pauli::PauliString;
use crate::error::{Error, Result};

/// Local Pauli patterns pack as x0 | z0<<1 | x1<<2 | z1<<3.
type Pattern = u8;

/// i^e exponent picked up by multiplying two W-basis local Paulis
/// (per site: e = ab + cd + 2bc + 3 (a^c)(b^d), summed mod 4).
#[inline]
fn mul_pattern(pa: Pattern, ka: u8, pb: Pattern, kb: u8) -> (Pattern, u8) {
    let mut e = (ka + kb) as u32;
    for site in 0..2 {
        let a = (pa >> (2 * site)) as u32 & 1;
        let b = (pa >> (2 * site + 1)) as u32 & 1;
        let c = (pb >> (2 * site)) as u32 & 1;
        let d = (pb >> (2 * site + 1)) as u32 & 1;
        e += a * b + c * d + 2 * b * c + 3 * ((a ^ c) & (b ^ d));
    }
    (pa ^ pb, (e & 3) as u8)
}

/// Symplectic inner product of two patterns (commutation parity).
#[inline]
fn sym(u: Pattern, v: Pattern) -> u8 {
    let mut acc = 0u8;
    for site in 0..2 {
        let (ux, uz) = (u >> (2 * site) & 1, u >> (2 * site + 1) & 1);
        let (vx, vz) = (v >> (2 * site) & 1, v >> (2 * site + 1) & 1);
        acc ^= (ux & vz) ^ (uz & vx);
    }
    acc
}

/// A 1- or 2-qubit Clifford gate, stored as the images of `X_i`, `Z_i`
/// under conjugation together with a per-pattern lookup table, so applying
/// it to one tableau row costs O(1).
#[derive(Clone, Debug)]
pub struct CliffordGate {
    arity: usize,
    /// Images of X_0, Z_0 (, X_1, Z_1): W-basis bits and i^k phase (k even).
    img_bits: [Pattern; 4],
    img_phase: [u8; 4],
    /// `lut[pattern]` = (image pattern, i^k phase increment).
    lut: [(Pattern, u8); 16],
}

impl CliffordGate {
    fn build(arity: usize, img_bits: [Pattern; 4], img_phase: [u8; 4]) -> Self {
        let mut lut = [(0u8, 0u8); 16];
        let n_pat = 1usize << (2 * arity);
        for (pattern, slot) in lut.iter_mut().enumerate().take(n_pat) {
            // Local operator i^{sum x_s z_s} X0^a Z0^b X1^c Z1^d conjugates to
            // the ordered product of generator images.
            let mut acc: (Pattern, u8) = (0, 0);
            for site in 0..arity {
                let xb = pattern >> (2 * site) & 1 == 1;
                let zb = pattern >> (2 * site + 1) & 1 == 1;
                if xb && zb {
                    acc.1 = (acc.1 + 1) & 3; // W(1,1) = i XZ
                }
                if xb {
                    acc = mul_pattern(acc.0, acc.1, img_bits[2 * site], img_phase[2 * site]);
                }
                if zb {
                    acc =
                        mul_pattern(acc.0, acc.1, img_bits[2 * site + 1], img_phase[2 * site + 1]);
                }
            }
            debug_assert!(acc.1 % 2 == 0, "conjugation must preserve Hermiticity");
            *slot = acc;
        }
        CliffordGate { arity, img_bits, img_phase, lut }
    }

    /// Build a gate from generator images, checking the symplectic condition.
    ///
    /// `images` holds the images of X_0, Z_0, ..., X_{arity-1}, Z_{arity-1},
    /// in that order, each defined on `arity` qubits.
    pub fn from_images(arity: usize, images: Vec<PauliString>) -> Result<Self> {
        if !(arity == 1 || arity == 2) {
            return Err(Error::InvalidSize(format!("gate arity {arity} not supported")));
        }
        if images.len() != 2 * arity || images.iter().any(|p| p.n() != arity) {
            return Err(Error::InvalidSize("wrong number or size of generator images".into()));
        }
        let mut img_bits = [0u8; 4];
        let mut img_phase = [0u8; 4];
        for (k, img) in images.iter().enumerate() {
            if img.phase_quarter() % 2 != 0 {
                return Err(Error::Domain("generator image has imaginary phase".into()));
            }
            for site in 0..arity {
                img_bits[k] |= (img.x_bit(site) as u8) << (2 * site);
                img_bits[k] |= (img.z_bit(site) as u8) << (2 * site + 1);
            }
            img_phase[k] = img.phase_quarter();
        }
        // Conjugation preserves commutation relations: images of X_i, Z_i must
        // anticommute within a pair and commute across pairs.
        for i in 0..2 * arity {
            for j in (i + 1)..2 * arity {
                let same_pair = i / 2 == j / 2;
                let anti = sym(img_bits[i], img_bits[j]) == 1;
                if same_pair != anti {
                    return Err(Error::Domain("images violate the symplectic condition".into()));
                }
            }
        }
        Ok(Self::build(arity, img_bits, img_phase))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Image of the k-th generator (order X_0, Z_0, X_1, Z_1).
    pub fn image(&self, k: usize) -> PauliString {
        assert!(k < 2 * self.arity);
        let bits = self.img_bits[k];
        let mut x = [false; 2];
        let mut z = [false; 2];
        for site in 0..self.arity {
            x[site] = bits >> (2 * site) & 1 == 1;
            z[site] = bits >> (2 * site + 1) & 1 == 1;
        }
        let sign = if self.img_phase[k] & 2 == 0 { 1 } else { -1 };
        PauliString::from_bits(&x[..self.arity], &z[..self.arity], sign).unwrap()
    }

    #[inline]
    pub(crate) fn lut(&self) -> &[(Pattern, u8); 16] {
        &self.lut
    }

    pub fn hadamard() -> Self {
        // X -> Z, Z -> X.
        Self::build(1, [0b10, 0b01, 0, 0], [0; 4])
    }

    pub fn phase_s() -> Self {
        // X -> Y, Z -> Z.
        Self::build(1, [0b11, 0b10, 0, 0], [0; 4])
    }

    /// CNOT with control = first target index, target = second.
    pub fn cnot() -> Self {
        // X0 -> X0 X1, Z0 -> Z0, X1 -> X1, Z1 -> Z0 Z1.
        Self::build(2, [0b0101, 0b0010, 0b0100, 0b1010], [0; 4])
    }

    pub fn cz() -> Self {
        // X0 -> X0 Z1, Z0 -> Z0, X1 -> Z0 X1, Z1 -> Z1.
        Self::build(2, [0b1001, 0b0010, 0b0110, 0b1000], [0; 4])
    }
}

/// Uniform draw from the 4-bit vectors satisfying `keep`, allocation-free.
#[inline]
fn pick<R: Rng>(rng: &mut R, keep: impl Fn(Pattern) -> bool) -> Pattern {
    let mut candidates = [0u8; 16];
    let mut count = 0usize;
    for v in 0u8..16 {
        if keep(v) {
            candidates[count] = v;
            count += 1;
        }
    }
    candidates[rng.gen_range(0..count)]
}

/// Sample a uniformly random element of the two-qubit Clifford group modulo
/// global phase (order 11520 = |Sp(4,2)| * 2^4).
///
/// A symplectic basis (f1, g1, f2, g2) of F_2^4 is drawn uniformly by
/// counting: f1 from the 15 nonzero vectors, g1 from the 8 with
/// <f1,g1> = 1, f2 from the 3 nonzero vectors of the symplectic complement
/// of span(f1,g1), g2 from the remaining 2. Together with 4 sign bits this
/// enumerates every group element exactly once.
pub fn sample_two_qubit_clifford<R: Rng>(rng: &mut R) -> CliffordGate {
    let f1 = pick(rng, |v| v != 0);
    let g1 = pick(rng, |v| sym(f1, v) == 1);
    let f2 = pick(rng, |v| v != 0 && sym(f1, v) == 0 && sym(g1, v) == 0);
    let g2 = pick(rng, |v| sym(f1, v) == 0 && sym(g1, v) == 0 && sym(f2, v) == 1);
    let phases = [
        if rng.gen::<bool>() { 2 } else { 0 },
        if rng.gen::<bool>() { 2 } else { 0 },
        if rng.gen::<bool>() { 2 } else { 0 },
        if rng.gen::<bool>() { 2 } else { 0 },
    ];
    CliffordGate::build(2, [f1, g1, f2, g2], phases)
}

/// Canonical index of a two-qubit Clifford within the 11520-element
/// enumeration: the packed symplectic images plus sign bits. Used by the
/// uniformity test.
pub fn canonical_index(gate: &CliffordGate) -> u32 {
    assert_eq!(gate.arity(), 2);
    let mut idx: u32 = 0;
    for k in 0..4 {
        idx = idx << 4 | gate.img_bits[k] as u32;
        idx = idx << 1 | (gate.img_phase[k] >> 1) as u32;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn named_gates_act_correctly() {
        let h = CliffordGate::hadamard();
        assert_eq!(h.image(0).letter(0), 'Z'); // H X H = Z
        assert_eq!(h.image(1).letter(0), 'X');
        let s = CliffordGate::phase_s();
        assert_eq!(s.image(0).letter(0), 'Y'); // S X S^dag = Y
        let cx = CliffordGate::cnot();
        assert_eq!(format!("{}", cx.image(0)), "+XX");
        assert_eq!(format!("{}", cx.image(3)), "+ZZ");
    }

    #[test]
    fn from_images_validates_symplectic_condition() {
        let x = PauliString::single(1, 0, 'X', 1).unwrap();
        let also_x = PauliString::single(1, 0, 'X', 1).unwrap();
        assert!(CliffordGate::from_images(1, vec![x, also_x]).is_err());
    }

    #[test]
    fn sampling_is_deterministic_under_fixed_seed() {
        let g1 = sample_two_qubit_clifford(&mut ChaCha12Rng::seed_from_u64(9));
        let g2 = sample_two_qubit_clifford(&mut ChaCha12Rng::seed_from_u64(9));
        assert_eq!(canonical_index(&g1), canonical_index(&g2));
    }

    #[test]
    fn samples_satisfy_symplectic_condition() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..500 {
            let g = sample_two_qubit_clifford(&mut rng);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    let same_pair = i / 2 == j / 2;
                    assert_eq!(sym(g.img_bits[i], g.img_bits[j]) == 1, same_pair);
                }
            }
        }
    }

    #[test]
    fn lut_is_involution_consistent() {
        // Identity pattern maps to identity with no phase.
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..100 {
            let g = sample_two_qubit_clifford(&mut rng);
            assert_eq!(g.lut()[0], (0, 0));
            // The LUT is a homomorphism: image(p ^ q) phase-consistent with
            // image(p) * image(q) for commuting local patterns.
            for p in 0..16u8 {
                for q in 0..16u8 {
                    if sym(p, q) == 0 {
                        let (bp, kp) = g.lut()[p as usize];
                        let (bq, kq) = g.lut()[q as usize];
                        let (bits, k) = mul_pattern(bp, kp, bq, kq);
                        // i^{pq reorder} on the source side:
                        let (sb, sk) = mul_pattern(p, 0, q, 0);
                        let (wb, wk) = g.lut()[sb as usize];
                        assert_eq!(bits, wb);
                        assert_eq!((k + 4 - sk as u8) % 4, wk, "p={p} q={q}");
                    }
                }
            }
        }
    }
}
