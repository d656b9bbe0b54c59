//! Bit-packed stabilizer tableau with destabilizer rows (CHP scheme).
//!
//! Rows are stored flat: destabilizer `i` at row `i`, stabilizer `i` at row
//! `cap + i`, where `cap` is the preallocated qubit capacity. Keeping the
//! stabilizer block at a fixed offset lets `append_fresh_qubit` run without
//! repacking until capacity is exhausted. Each row carries a 2-bit phase
//! accumulator (exponent of i), reduced to a sign at read time.

use rand::Rng;

use super::gate::CliffordGate;
use super::pauli::{word_phase_exponent, words_for, PauliString, WORD_BITS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    cap: usize,
    words: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: Vec<u8>,
}

/// Result of a single-site projective measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureOutcome {
    /// +1 or -1.
    pub value: i8,
    /// True when the outcome was fixed by the state (no coin flip).
    pub deterministic: bool,
}

impl StabilizerTableau {
    /// The all-zeros product state on `n` qubits.
    pub fn product_state(n: usize) -> Result<Self> {
        Self::product_state_with_capacity(n, n)
    }

    /// Product state with room to append qubits up to `cap` without repacking.
    pub fn product_state_with_capacity(n: usize, cap: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("empty register".into()));
        }
        let cap = cap.max(n);
        let words = words_for(cap);
        let mut t = StabilizerTableau {
            n,
            cap,
            words,
            x: vec![0; 2 * cap * words],
            z: vec![0; 2 * cap * words],
            phase: vec![0; 2 * cap],
        };
        for i in 0..n {
            t.set_bit_x(i, i, true); // destabilizer i = X_i
            t.set_bit_z(cap + i, i, true); // stabilizer i = Z_i
        }
        Ok(t)
    }

    /// `l` Bell pairs; system qubit `i` is paired with environment qubit
    /// `l + i`. Generators are `X_i X_{l+i}` and `Z_i Z_{l+i}`.
    pub fn bell_pairs(l: usize) -> Result<Self> {
        Self::bell_pairs_with_capacity(l, 2 * l)
    }

    pub fn bell_pairs_with_capacity(l: usize, cap: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidSize("empty register".into()));
        }
        let n = 2 * l;
        let cap = cap.max(n);
        let words = words_for(cap);
        let mut t = StabilizerTableau {
            n,
            cap,
            words,
            x: vec![0; 2 * cap * words],
            z: vec![0; 2 * cap * words],
            phase: vec![0; 2 * cap],
        };
        for i in 0..l {
            let (g_xx, g_zz) = (cap + 2 * i, cap + 2 * i + 1);
            t.set_bit_x(g_xx, i, true);
            t.set_bit_x(g_xx, l + i, true);
            t.set_bit_z(g_zz, i, true);
            t.set_bit_z(g_zz, l + i, true);
            // Destabilizers: Z_i for the XX generator, X_{l+i} for the ZZ one.
            t.set_bit_z(2 * i, i, true);
            t.set_bit_x(2 * i + 1, l + i, true);
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn row_off(&self, row: usize) -> usize {
        row * self.words
    }

    fn set_bit_x(&mut self, row: usize, col: usize, v: bool) {
        let idx = self.row_off(row) + col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        if v {
            self.x[idx] |= mask;
        } else {
            self.x[idx] &= !mask;
        }
    }

    fn set_bit_z(&mut self, row: usize, col: usize, v: bool) {
        let idx = self.row_off(row) + col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        if v {
            self.z[idx] |= mask;
        } else {
            self.z[idx] &= !mask;
        }
    }

    #[inline]
    fn bit_x(&self, row: usize, col: usize) -> bool {
        self.x[self.row_off(row) + col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1
    }

    #[inline]
    fn bit_z(&self, row: usize, col: usize) -> bool {
        self.z[self.row_off(row) + col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1
    }

    /// In-group product: row `dst` <- row `dst` * row `src`, with exact
    /// phase accumulation.
    fn row_mul(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        let w = self.words;
        let (d0, s0) = (dst * w, src * w);
        let mut e = (self.phase[dst] + self.phase[src]) as u32;
        for k in 0..w {
            let (a, b) = (self.x[d0 + k], self.z[d0 + k]);
            let (c, d) = (self.x[s0 + k], self.z[s0 + k]);
            e += word_phase_exponent(a, b, c, d);
            self.x[d0 + k] = a ^ c;
            self.z[d0 + k] = b ^ d;
        }
        self.phase[dst] = (e & 3) as u8;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        let (d0, s0) = (dst * w, src * w);
        for k in 0..w {
            self.x[d0 + k] = self.x[s0 + k];
            self.z[d0 + k] = self.z[s0 + k];
        }
        self.phase[dst] = self.phase[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        let off = row * w;
        self.x[off..off + w].fill(0);
        self.z[off..off + w].fill(0);
        self.phase[row] = 0;
    }

    /// Conjugate every generator and destabilizer by `gate` on `targets`.
    pub fn apply_gate(&mut self, gate: &CliffordGate, targets: &[usize]) -> Result<()> {
        if targets.len() != gate.arity() {
            return Err(Error::Index("target count does not match gate arity".into()));
        }
        if targets.iter().any(|&t| t >= self.n) {
            return Err(Error::Index(format!("target out of range (n = {})", self.n)));
        }
        match *targets {
            [q] => self.apply1(gate, q),
            [q0, q1] => {
                if q0 == q1 {
                    return Err(Error::Index("repeated gate target".into()));
                }
                self.apply2(gate, q0, q1);
            }
            _ => return Err(Error::Index("unsupported arity".into())),
        }
        Ok(())
    }

    fn apply1(&mut self, gate: &CliffordGate, q: usize) {
        let lut = gate.lut();
        let w = self.words;
        let (wq, bq) = (q / WORD_BITS, q % WORD_BITS);
        for block in [0, self.cap] {
            for r in block..block + self.n {
                let idx = r * w + wq;
                let a = self.x[idx] >> bq & 1;
                let b = self.z[idx] >> bq & 1;
                let (bits, k) = lut[(a | b << 1) as usize];
                self.x[idx] = (self.x[idx] & !(1 << bq)) | ((bits as u64 & 1) << bq);
                self.z[idx] = (self.z[idx] & !(1 << bq)) | ((bits as u64 >> 1 & 1) << bq);
                self.phase[r] = (self.phase[r] + k) & 3;
            }
        }
    }

    fn apply2(&mut self, gate: &CliffordGate, q0: usize, q1: usize) {
        let lut = gate.lut();
        let w = self.words;
        let (w0, b0) = (q0 / WORD_BITS, q0 % WORD_BITS);
        let (w1, b1) = (q1 / WORD_BITS, q1 % WORD_BITS);
        for block in [0, self.cap] {
            for r in block..block + self.n {
                let off = r * w;
                let (i0, i1) = (off + w0, off + w1);
                let a = self.x[i0] >> b0 & 1;
                let b = self.z[i0] >> b0 & 1;
                let c = self.x[i1] >> b1 & 1;
                let d = self.z[i1] >> b1 & 1;
                let pattern = (a | b << 1 | c << 2 | d << 3) as usize;
                let (bits, k) = lut[pattern];
                let bits = bits as u64;
                self.x[i0] = (self.x[i0] & !(1 << b0)) | ((bits & 1) << b0);
                self.z[i0] = (self.z[i0] & !(1 << b0)) | ((bits >> 1 & 1) << b0);
                self.x[i1] = (self.x[i1] & !(1 << b1)) | ((bits >> 2 & 1) << b1);
                self.z[i1] = (self.z[i1] & !(1 << b1)) | ((bits >> 3 & 1) << b1);
                self.phase[r] = (self.phase[r] + k) & 3;
            }
        }
    }

    /// Projective measurement of `Z_site`. Random outcomes draw one bool
    /// from `rng`; deterministic outcomes leave the state unchanged.
    pub fn measure_z<R: Rng>(&mut self, site: usize, rng: &mut R) -> Result<MeasureOutcome> {
        if site >= self.n {
            return Err(Error::Index(format!("site {site} out of range (n = {})", self.n)));
        }
        let (wc, bc) = (site / WORD_BITS, site % WORD_BITS);
        let mask = 1u64 << bc;
        let w = self.words;

        let pivot = (0..self.n).find(|&r| self.x[(self.cap + r) * w + wc] & mask != 0);
        match pivot {
            Some(p) => {
                let prow = self.cap + p;
                for r in 0..self.n {
                    if r != p && self.x[r * w + wc] & mask != 0 {
                        self.row_mul(r, prow);
                    }
                    let s = self.cap + r;
                    if s != prow && self.x[s * w + wc] & mask != 0 {
                        self.row_mul(s, prow);
                    }
                }
                self.copy_row(p, prow);
                self.clear_row(prow);
                self.set_bit_z(prow, site, true);
                let minus = rng.gen::<bool>();
                self.phase[prow] = if minus { 2 } else { 0 };
                Ok(MeasureOutcome { value: if minus { -1 } else { 1 }, deterministic: false })
            }
            None => {
                // Outcome fixed: accumulate the product of stabilizers
                // selected by the destabilizer rows that anticommute with Z_site.
                let mut sx = vec![0u64; w];
                let mut sz = vec![0u64; w];
                let mut e: u32 = 0;
                for r in 0..self.n {
                    if self.x[r * w + wc] & mask != 0 {
                        let s0 = (self.cap + r) * w;
                        e += self.phase[self.cap + r] as u32;
                        for k in 0..w {
                            e += word_phase_exponent(
                                sx[k],
                                sz[k],
                                self.x[s0 + k],
                                self.z[s0 + k],
                            );
                            sx[k] ^= self.x[s0 + k];
                            sz[k] ^= self.z[s0 + k];
                        }
                        e &= 3;
                    }
                }
                debug_assert!(sx.iter().all(|&v| v == 0), "scratch must reduce to Z_site");
                debug_assert_eq!(sz[wc] & mask, mask);
                debug_assert!(e % 2 == 0);
                Ok(MeasureOutcome { value: if e & 2 == 0 { 1 } else { -1 }, deterministic: true })
            }
        }
    }

    /// Extend the register with one fresh qubit in |0>, unentangled.
    pub fn append_fresh_qubit(&mut self) {
        if self.n == self.cap {
            self.grow(2 * self.cap.max(1));
        }
        let q = self.n;
        self.n += 1;
        // Rows were zero-initialized (or zeroed by grow); just install the
        // new generator pair.
        self.clear_row(q);
        self.clear_row(self.cap + q);
        self.set_bit_x(q, q, true);
        self.set_bit_z(self.cap + q, q, true);
    }

    fn grow(&mut self, new_cap: usize) {
        let new_words = words_for(new_cap);
        let mut x = vec![0u64; 2 * new_cap * new_words];
        let mut z = vec![0u64; 2 * new_cap * new_words];
        let mut phase = vec![0u8; 2 * new_cap];
        for r in 0..self.n {
            for (old_block, new_block) in [(0, 0), (self.cap, new_cap)] {
                let old = (old_block + r) * self.words;
                let new = (new_block + r) * new_words;
                x[new..new + self.words].copy_from_slice(&self.x[old..old + self.words]);
                z[new..new + self.words].copy_from_slice(&self.z[old..old + self.words]);
                phase[new_block + r] = self.phase[old_block + r];
            }
        }
        self.cap = new_cap;
        self.words = new_words;
        self.x = x;
        self.z = z;
        self.phase = phase;
    }

    fn extract_row(&self, row: usize) -> PauliString {
        let mut p = PauliString::identity(self.n);
        for i in 0..self.n {
            if self.bit_x(row, i) {
                p.set_x(i, true);
            }
            if self.bit_z(row, i) {
                p.set_z(i, true);
            }
        }
        p.add_phase_quarter(self.phase[row]);
        p
    }

    pub fn stabilizer(&self, i: usize) -> PauliString {
        assert!(i < self.n);
        self.extract_row(self.cap + i)
    }

    pub fn destabilizer(&self, i: usize) -> PauliString {
        assert!(i < self.n);
        self.extract_row(i)
    }

    /// Expectation value of a Pauli string on the state: -1, 0 or +1.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        if p.n() != self.n {
            return Err(Error::InvalidSize("operator size mismatch".into()));
        }
        for i in 0..self.n {
            if !self.row_commutes(self.cap + i, p) {
                return Ok(0);
            }
        }
        // P commutes with the whole group, so P = +/- Q with Q the product of
        // the stabilizers whose destabilizer partners anticommute with P.
        let mut q = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.row_commutes(i, p) {
                q = q.mul(&self.stabilizer(i));
            }
        }
        debug_assert!(q
            .x_words()
            .iter()
            .zip(p.x_words())
            .all(|(a, b)| a == b));
        let diff = (4 + p.phase_quarter() as i8 - q.phase_quarter() as i8) % 4;
        debug_assert!(diff % 2 == 0);
        Ok(if diff == 0 { 1 } else { -1 })
    }

    fn row_commutes(&self, row: usize, p: &PauliString) -> bool {
        let off = self.row_off(row);
        let mut acc = 0u32;
        for k in 0..self.words.min(p.x_words().len()) {
            acc ^= (self.x[off + k] & p.z_words()[k]).count_ones() & 1;
            acc ^= (self.z[off + k] & p.x_words()[k]).count_ones() & 1;
        }
        acc == 0
    }

    /// Copy of the stabilizer block as packed rows (x then z words per row),
    /// for the entropy engine. Column `i` of qubit `i` is bit `i`.
    pub(crate) fn stab_rows_packed(&self) -> (usize, usize, Vec<u64>, Vec<u64>) {
        let live = words_for(self.n);
        let mut xs = Vec::with_capacity(self.n * live);
        let mut zs = Vec::with_capacity(self.n * live);
        for r in 0..self.n {
            let off = (self.cap + r) * self.words;
            xs.extend_from_slice(&self.x[off..off + live]);
            zs.extend_from_slice(&self.z[off..off + live]);
        }
        (self.n, live, xs, zs)
    }

    /// Structural validity: generators mutually commute, are independent,
    /// destabilizers pair correctly, and phases are real. Test support.
    pub fn validate(&self) -> Result<()> {
        let stabs: Vec<PauliString> = (0..self.n).map(|i| self.stabilizer(i)).collect();
        let destabs: Vec<PauliString> = (0..self.n).map(|i| self.destabilizer(i)).collect();
        for i in 0..self.n {
            if stabs[i].phase_quarter() % 2 != 0 {
                return Err(Error::Domain(format!("stabilizer {i} has imaginary phase")));
            }
            for j in 0..self.n {
                if !stabs[i].commutes_with(&stabs[j]) {
                    return Err(Error::Domain(format!("stabilizers {i},{j} anticommute")));
                }
                let need_anti = i == j;
                if destabs[i].commutes_with(&stabs[j]) == need_anti {
                    return Err(Error::Domain(format!(
                        "destabilizer {i} has wrong commutation with stabilizer {j}"
                    )));
                }
            }
        }
        // GF(2) independence: rank of the n x 2n check matrix must be n.
        let mut rows: Vec<Vec<bool>> = stabs
            .iter()
            .map(|p| (0..2 * self.n).map(|c| if c < self.n { p.x_bit(c) } else { p.z_bit(c - self.n) }).collect())
            .collect();
        let mut rank = 0usize;
        for col in 0..2 * self.n {
            if let Some(pr) = (rank..self.n).find(|&r| rows[r][col]) {
                rows.swap(rank, pr);
                let pivot = rows[rank].clone();
                for (r, row) in rows.iter_mut().enumerate() {
                    if r != rank && row[col] {
                        for (a, b) in row.iter_mut().zip(&pivot) {
                            *a ^= *b;
                        }
                    }
                }
                rank += 1;
            }
        }
        if rank != self.n {
            return Err(Error::Domain(format!("generator rank {rank} != n {}", self.n)));
        }
        Ok(())
    }
}
