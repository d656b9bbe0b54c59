//! Von Neumann entanglement entropies of stabilizer-state subsets.
//!
//! For a pure stabilizer state, the entropy of a subset A in bits equals
//! `rank_GF2(check matrix restricted to A's columns) - |A|`. Contiguous
//! intervals of a 1D ordering can instead be read from the clipped gauge,
//! where every site hosts exactly two generator endpoints. Entropies are
//! handled as exact integer bit counts; conversion to nats happens at the
//! edges of the pipeline.

use crate::error::{Error, Result};
use crate::stabilizer::StabilizerTableau;
use crate::LN2;

const WORD_BITS: usize = 64;

/// An entanglement entropy, stored exactly in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EntropyValue {
    bits: u32,
}

impl EntropyValue {
    pub fn from_bits(bits: u32) -> Self {
        EntropyValue { bits }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn nats(self) -> f64 {
        self.bits as f64 * LN2
    }
}

fn check_subset(t: &StabilizerTableau, a: &[usize]) -> Result<()> {
    let n = t.n();
    let mut seen = vec![false; n];
    for &q in a {
        if q >= n {
            return Err(Error::Index(format!("qubit {q} out of range (n = {n})")));
        }
        if seen[q] {
            return Err(Error::Index(format!("qubit {q} repeated in subset")));
        }
        seen[q] = true;
    }
    Ok(())
}

/// Entropy of the qubit subset `a` (need not be contiguous).
pub fn entropy_subset(t: &StabilizerTableau, a: &[usize]) -> Result<EntropyValue> {
    check_subset(t, a)?;
    if a.is_empty() {
        return Ok(EntropyValue::from_bits(0));
    }
    let (n_rows, live, xs, zs) = t.stab_rows_packed();
    let m = a.len();
    let w = (2 * m).div_ceil(WORD_BITS);
    let mut sub = vec![0u64; n_rows * w];
    for r in 0..n_rows {
        let (xr, zr) = (&xs[r * live..], &zs[r * live..]);
        let out = &mut sub[r * w..(r + 1) * w];
        for (j, &q) in a.iter().enumerate() {
            let xb = xr[q / WORD_BITS] >> (q % WORD_BITS) & 1;
            let zb = zr[q / WORD_BITS] >> (q % WORD_BITS) & 1;
            out[(2 * j) / WORD_BITS] |= xb << ((2 * j) % WORD_BITS);
            out[(2 * j + 1) / WORD_BITS] |= zb << ((2 * j + 1) % WORD_BITS);
        }
    }
    let rank = gf2_rank(&mut sub, n_rows, w, 2 * m);
    debug_assert!(rank >= m);
    Ok(EntropyValue::from_bits((rank - m) as u32))
}

/// Mutual information I(A;B) = S(A) + S(B) - S(A u B), in bits.
pub fn mutual_information(
    t: &StabilizerTableau,
    a: &[usize],
    b: &[usize],
) -> Result<EntropyValue> {
    if a.iter().any(|q| b.contains(q)) {
        return Err(Error::Overlap("mutual information needs disjoint subsets".into()));
    }
    let sa = entropy_subset(t, a)?.bits() as i64;
    let sb = entropy_subset(t, b)?.bits() as i64;
    let mut ab: Vec<usize> = a.to_vec();
    ab.extend_from_slice(b);
    let sab = entropy_subset(t, &ab)?.bits() as i64;
    let i = sa + sb - sab;
    debug_assert!(i >= 0, "subadditivity violated");
    Ok(EntropyValue::from_bits(i.max(0) as u32))
}

/// Rank of an n_rows x n_cols GF(2) matrix stored as packed rows of `w`
/// words. Destroys the matrix.
fn gf2_rank(rows: &mut [u64], n_rows: usize, w: usize, n_cols: usize) -> usize {
    let mut rank = 0usize;
    for col in 0..n_cols {
        if rank == n_rows {
            break;
        }
        let (cw, cb) = (col / WORD_BITS, col % WORD_BITS);
        let mask = 1u64 << cb;
        let Some(p) = (rank..n_rows).find(|&r| rows[r * w + cw] & mask != 0) else {
            continue;
        };
        if p != rank {
            for k in 0..w {
                rows.swap(rank * w + k, p * w + k);
            }
        }
        for r in (rank + 1)..n_rows {
            if rows[r * w + cw] & mask != 0 {
                for k in cw..w {
                    rows[r * w + k] ^= rows[rank * w + k];
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Stabilizer generators reduced to the clipped gauge with respect to a 1D
/// site ordering. Phases are dropped; the gauge is a view for entropy
/// queries only.
pub struct ClippedTableau {
    n: usize,
    /// Per generator: (leftmost site, rightmost site) in order space.
    endpoints: Vec<(u32, u32)>,
    /// Endpoint densities per site.
    left_count: Vec<u32>,
    right_count: Vec<u32>,
    /// Prefix-cut entropies in bits: `prefix[k]` = S(first k sites).
    prefix: Vec<u32>,
}

/// Row-reduce the generators so that each site hosts exactly two generator
/// endpoints (for a pure state). `order[s]` is the tableau qubit placed at
/// 1D position `s`; all n qubits must appear exactly once.
pub fn clip_gauge(t: &StabilizerTableau, order: &[usize]) -> Result<ClippedTableau> {
    let n = t.n();
    if order.len() != n {
        return Err(Error::InvalidSize("ordering must cover every qubit".into()));
    }
    check_subset(t, order)?;

    let (n_rows, live, xs, zs) = t.stab_rows_packed();
    debug_assert_eq!(n_rows, n);
    let cols = 2 * n;
    let w = cols.div_ceil(WORD_BITS);
    // Interleaved packing: site s contributes columns 2s (x) and 2s+1 (z).
    let mut mat = vec![0u64; n * w];
    for r in 0..n {
        let (xr, zr) = (&xs[r * live..], &zs[r * live..]);
        let out = &mut mat[r * w..(r + 1) * w];
        for (s, &q) in order.iter().enumerate() {
            let xb = xr[q / WORD_BITS] >> (q % WORD_BITS) & 1;
            let zb = zr[q / WORD_BITS] >> (q % WORD_BITS) & 1;
            out[(2 * s) / WORD_BITS] |= xb << ((2 * s) % WORD_BITS);
            out[(2 * s + 1) / WORD_BITS] |= zb << ((2 * s + 1) % WORD_BITS);
        }
    }

    let first_set = |row: &[u64]| -> Option<usize> {
        row.iter().enumerate().find(|(_, &v)| v != 0).map(|(k, &v)| {
            k * WORD_BITS + v.trailing_zeros() as usize
        })
    };
    let last_set = |row: &[u64]| -> Option<usize> {
        row.iter().enumerate().rev().find(|(_, &v)| v != 0).map(|(k, &v)| {
            k * WORD_BITS + (WORD_BITS - 1 - v.leading_zeros() as usize)
        })
    };

    // Pass 1: left echelon. Each column ends up leading for at most one row,
    // so each site hosts at most two left endpoints.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; cols];
    for r in 0..n {
        loop {
            let lead = first_set(&mat[r * w..(r + 1) * w])
                .ok_or_else(|| Error::Domain("dependent generator row".into()))?;
            match pivot_of_col[lead] {
                None => {
                    pivot_of_col[lead] = Some(r);
                    break;
                }
                Some(p) => {
                    for k in 0..w {
                        let v = mat[p * w + k];
                        mat[r * w + k] ^= v;
                    }
                }
            }
        }
    }

    // Pass 2: from the right, make every column trailing for at most one
    // row. Reducing with the pivot of largest leading column keeps pass 1
    // intact, and strictly decreases the victims' trailing columns, so a
    // single descending sweep with re-bucketing terminates.
    let mut leading = vec![0usize; n];
    let mut trailing = vec![0usize; n];
    let mut bucket: Vec<Vec<usize>> = vec![Vec::new(); cols];
    for r in 0..n {
        leading[r] = first_set(&mat[r * w..(r + 1) * w]).unwrap();
        trailing[r] = last_set(&mat[r * w..(r + 1) * w]).unwrap();
        bucket[trailing[r]].push(r);
    }
    for c in (0..cols).rev() {
        while bucket[c].len() > 1 {
            let rows = std::mem::take(&mut bucket[c]);
            let &p = rows.iter().max_by_key(|&&r| leading[r]).unwrap();
            for &r in &rows {
                if r == p {
                    continue;
                }
                for k in 0..w {
                    let v = mat[p * w + k];
                    mat[r * w + k] ^= v;
                }
                debug_assert!(leading[r] == first_set(&mat[r * w..(r + 1) * w]).unwrap());
                trailing[r] = last_set(&mat[r * w..(r + 1) * w])
                    .ok_or_else(|| Error::Domain("row vanished while clipping".into()))?;
                debug_assert!(trailing[r] < c);
                bucket[trailing[r]].push(r);
            }
            bucket[c].push(p);
        }
    }

    let mut endpoints = Vec::with_capacity(n);
    let mut left_count = vec![0u32; n];
    let mut right_count = vec![0u32; n];
    for r in 0..n {
        let (l, t_) = ((leading[r] / 2) as u32, (trailing[r] / 2) as u32);
        endpoints.push((l, t_));
        left_count[l as usize] += 1;
        right_count[t_ as usize] += 1;
    }

    // prefix[k] = number of generators crossing the cut between sites k-1, k.
    let mut prefix = vec![0u32; n + 1];
    let mut open = 0i64;
    for s in 0..n {
        prefix[s] = open as u32;
        open += left_count[s] as i64;
        open -= right_count[s] as i64;
    }
    prefix[n] = 0;
    // Crossing counts are even for a pure state; store entropies directly.
    for v in prefix.iter_mut() {
        debug_assert!(*v % 2 == 0);
        *v /= 2;
    }

    Ok(ClippedTableau { n, endpoints, left_count, right_count, prefix })
}

impl ClippedTableau {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn left_endpoint_counts(&self) -> &[u32] {
        &self.left_count
    }

    pub fn right_endpoint_counts(&self) -> &[u32] {
        &self.right_count
    }

    pub fn endpoints(&self) -> &[(u32, u32)] {
        &self.endpoints
    }

    /// Every site hosts exactly two endpoints (pure state on an open chain).
    pub fn endpoint_density_is_valid(&self) -> bool {
        (0..self.n).all(|s| self.left_count[s] + self.right_count[s] == 2)
    }

    /// Entropy of the first `k` sites of the ordering.
    pub fn entropy_prefix(&self, k: usize) -> EntropyValue {
        EntropyValue::from_bits(self.prefix[k])
    }

    /// Entropy of the contiguous interval `[a, b]` (inclusive, order space):
    /// half the number of generators with exactly one endpoint inside.
    pub fn entropy_interval(&self, a: usize, b: usize) -> EntropyValue {
        let (a, b) = (a as u32, b as u32);
        let mut count = 0u32;
        for &(l, r) in &self.endpoints {
            let lin = l >= a && l <= b;
            let rin = r >= a && r <= b;
            if lin != rin {
                count += 1;
            }
        }
        debug_assert!(count % 2 == 0);
        EntropyValue::from_bits(count / 2)
    }
}
