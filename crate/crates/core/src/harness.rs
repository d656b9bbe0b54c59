//! The boundary-condition experiments: brickwork hybrid circuits with
//! scheduled entropy and mutual-information probes.
//!
//! Five qubit layouts share one evolution loop: a product or Bell-pair
//! start, open or periodic brickwork of sampled two-qubit Cliffords, a
//! Z-measurement sweep at rate p after every unitary layer, and (for the
//! injection layouts) ejection of the edge qubits at the end of every
//! period with fresh replacements. Ejected qubits stay in the tableau and
//! become side-edge probe targets.
//!
//! Realizations are independent tasks owning their tableau and RNG stream;
//! ensemble aggregation sums exact integer bit counts, so results are
//! independent of worker count and completion order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{clip_gauge, entropy_subset, mutual_information, ClippedTableau};
use crate::error::{Error, Result};
use crate::seed;
use crate::series::{ObservableSeries, RunMeta, SegmentSpec, SeriesRecord, Side};
use crate::stabilizer::{sample_two_qubit_clifford, StabilizerTableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayoutKind {
    /// Product start, open ends; physical qubits only on the top edge.
    Fffa,
    /// Product start with fresh-qubit injection at both spatial edges.
    Afaa,
    /// Bell-pair start: the system chain evolves, its maximally entangled
    /// partner chain is static on the bottom edge.
    Fafa,
    /// Bell-pair start plus edge injection: physical qubits on all sides.
    Aaaa,
    /// Product start on a ring.
    PbcProduct,
    /// Bell-pair start on a ring.
    PbcBell,
    /// Product start with `a_len` chain qubits (from `a_start`) Bell-paired
    /// to static reference qubits.
    ReferenceQubits { a_start: u32, a_len: u32 },
}

impl LayoutKind {
    pub fn name(&self) -> String {
        match self {
            LayoutKind::Fffa => "fffa".into(),
            LayoutKind::Afaa => "afaa".into(),
            LayoutKind::Fafa => "fafa".into(),
            LayoutKind::Aaaa => "aaaa".into(),
            LayoutKind::PbcProduct => "pbc-product".into(),
            LayoutKind::PbcBell => "pbc-bell".into(),
            LayoutKind::ReferenceQubits { a_start, a_len } => format!("ref:{a_start}:{a_len}"),
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "fffa" => Ok(LayoutKind::Fffa),
            "afaa" => Ok(LayoutKind::Afaa),
            "fafa" => Ok(LayoutKind::Fafa),
            "aaaa" => Ok(LayoutKind::Aaaa),
            "pbc-product" => Ok(LayoutKind::PbcProduct),
            "pbc-bell" => Ok(LayoutKind::PbcBell),
            other => {
                if let Some(rest) = other.strip_prefix("ref:") {
                    let parts: Vec<&str> = rest.split(':').collect();
                    if let [a, n] = parts.as_slice() {
                        let a_start = a.parse().map_err(|_| {
                            Error::Config(format!("layout: bad reference start {a:?}"))
                        })?;
                        let a_len = n.parse().map_err(|_| {
                            Error::Config(format!("layout: bad reference length {n:?}"))
                        })?;
                        return Ok(LayoutKind::ReferenceQubits { a_start, a_len });
                    }
                }
                Err(Error::Config(format!("layout: unknown kind {other:?}")))
            }
        }
    }

    pub fn periodic(&self) -> bool {
        matches!(self, LayoutKind::PbcProduct | LayoutKind::PbcBell)
    }

    pub fn injects(&self) -> bool {
        matches!(self, LayoutKind::Afaa | LayoutKind::Aaaa)
    }

    pub fn has_environment(&self) -> bool {
        matches!(self, LayoutKind::Fafa | LayoutKind::Aaaa | LayoutKind::PbcBell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub kind: LayoutKind,
    /// Chain length in qubits.
    pub l: usize,
    /// Depth in unitary layers.
    pub t: u32,
    /// Measurement probability per site per layer.
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub t: u32,
    pub segment: SegmentSpec,
}

/// Probe points sorted by time; record order in the output follows this.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProbeSchedule {
    points: Vec<ProbePoint>,
}

impl ProbeSchedule {
    pub fn new(mut points: Vec<ProbePoint>) -> Self {
        points.sort_by_key(|p| p.t);
        ProbeSchedule { points }
    }

    pub fn points(&self) -> &[ProbePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Check every probe against the layout before any simulation runs.
pub fn validate(params: &RunParams, schedule: &ProbeSchedule) -> Result<()> {
    let RunParams { kind, l, t, p } = *params;
    if l < 2 {
        return Err(Error::Config(format!("chain length {l} too small")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("measurement probability {p} outside [0,1]")));
    }
    if kind.periodic() && l % 2 != 0 {
        return Err(Error::Config("periodic brickwork needs an even chain length".into()));
    }
    if kind.injects() && t % 2 != 0 {
        return Err(Error::Config("injection layouts need an even depth".into()));
    }
    if let LayoutKind::ReferenceQubits { a_start, a_len } = kind {
        if a_len == 0 || (a_start + a_len) as usize > l {
            return Err(Error::Config(format!(
                "reference segment {a_start}+{a_len} outside the chain"
            )));
        }
    }
    let lu = l as u32;
    for pt in schedule.points() {
        if pt.t > t {
            return Err(Error::Schedule(format!("probe at t = {} beyond depth {t}", pt.t)));
        }
        if kind.injects() && pt.t % 2 != 0 {
            return Err(Error::Schedule(format!(
                "injection layouts probe at even times only, got t = {}",
                pt.t
            )));
        }
        // Live top-edge positions after an ejection exclude the edge slots.
        let (lo, hi) = if kind.injects() && pt.t >= 2 { (1, lu - 1) } else { (0, lu) };
        let iv_ok = |a: u32, b: u32| a >= lo && a < b && b <= hi;
        let bad = |msg: String| Err(Error::Schedule(msg));
        match (pt.segment, kind) {
            (SegmentSpec::Cut { k }, LayoutKind::Fffa) => {
                if k == 0 || k >= lu {
                    return bad(format!("cut {k} outside 1..{lu}"));
                }
            }
            (SegmentSpec::SideCut { k, .. }, LayoutKind::Afaa) => {
                if k == 0 || k > pt.t / 2 {
                    return bad(format!(
                        "side level {k} not ejected yet at t = {} (have {})",
                        pt.t,
                        pt.t / 2
                    ));
                }
            }
            (SegmentSpec::SidePair { k5, k6 }, LayoutKind::Afaa) => {
                if k5 == 0 || k6 == 0 || k5 > pt.t / 2 || k6 > pt.t / 2 {
                    return bad(format!("side pair ({k5},{k6}) not ejected yet at t = {}", pt.t));
                }
            }
            (SegmentSpec::Interval { a, b }, LayoutKind::Fffa)
            | (SegmentSpec::Interval { a, b }, LayoutKind::Fafa)
            | (SegmentSpec::Interval { a, b }, LayoutKind::Aaaa)
            | (SegmentSpec::Interval { a, b }, LayoutKind::PbcProduct) => {
                if !iv_ok(a, b) {
                    return bad(format!("interval [{a},{b}) outside live chain [{lo},{hi})"));
                }
            }
            (SegmentSpec::CornerPair { k5, k6 }, LayoutKind::Fffa) => {
                if k5 == 0 || k5 >= k6 || k6 >= lu {
                    return bad(format!("corner pair ({k5},{k6}) must satisfy 0<k5<k6<{lu}"));
                }
            }
            (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, LayoutKind::Fffa)
            | (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, LayoutKind::Aaaa)
            | (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, LayoutKind::PbcProduct) => {
                if !iv_ok(a1, a2) || !iv_ok(b1, b2) || a2 > b1 {
                    return bad(format!("interval pair [{a1},{a2}) [{b1},{b2}) invalid"));
                }
            }
            (SegmentSpec::OppositePair { a1, a2, b1, b2 }, LayoutKind::Aaaa)
            | (SegmentSpec::OppositePair { a1, a2, b1, b2 }, LayoutKind::Fafa) => {
                if !iv_ok(a1, a2) || b1 >= b2 || b2 > lu {
                    return bad(format!("opposite pair [{a1},{a2}) [{b1},{b2}) invalid"));
                }
            }
            (SegmentSpec::Bell, k2) if k2.has_environment() => {}
            (SegmentSpec::RefSet, LayoutKind::ReferenceQubits { .. }) => {}
            (seg, _) => {
                return bad(format!("segment {seg} not supported by layout {}", kind.name()));
            }
        }
    }
    Ok(())
}

struct RunState {
    tab: StabilizerTableau,
    /// Tableau index of each chain position; MAX marks a just-ejected slot.
    chain: Vec<usize>,
    /// Ejected qubits per side, earliest first.
    left: Vec<usize>,
    right: Vec<usize>,
    /// Environment (bottom edge) tableau indices by position.
    env: Vec<usize>,
    /// Static reference qubits.
    refs: Vec<usize>,
}

const EJECTED: usize = usize::MAX;

fn init_state<R: Rng>(params: &RunParams, _rng: &mut R) -> Result<RunState> {
    let l = params.l;
    let t = params.t as usize;
    let (tab, env, refs) = match params.kind {
        LayoutKind::Fffa | LayoutKind::PbcProduct => {
            (StabilizerTableau::product_state(l)?, Vec::new(), Vec::new())
        }
        LayoutKind::Afaa => {
            (StabilizerTableau::product_state_with_capacity(l, l + t)?, Vec::new(), Vec::new())
        }
        LayoutKind::Fafa | LayoutKind::PbcBell => {
            (StabilizerTableau::bell_pairs(l)?, (l..2 * l).collect(), Vec::new())
        }
        LayoutKind::Aaaa => (
            StabilizerTableau::bell_pairs_with_capacity(l, 2 * l + t)?,
            (l..2 * l).collect(),
            Vec::new(),
        ),
        LayoutKind::ReferenceQubits { a_start, a_len } => {
            let mut tab = StabilizerTableau::product_state(l + a_len as usize)?;
            let h = crate::stabilizer::CliffordGate::hadamard();
            let cx = crate::stabilizer::CliffordGate::cnot();
            for j in 0..a_len as usize {
                let sys = a_start as usize + j;
                let r = l + j;
                tab.apply_gate(&h, &[sys])?;
                tab.apply_gate(&cx, &[sys, r])?;
            }
            (tab, Vec::new(), (l..l + a_len as usize).collect())
        }
    };
    Ok(RunState { tab, chain: (0..l).collect(), left: Vec::new(), right: Vec::new(), env, refs })
}

/// Probe-evaluation context at one probe time.
struct ProbeCtx {
    /// Full 1D ordering of every tableau qubit (boundary-arc order for the
    /// injection layouts: left side up, top, right side down, then bottom).
    order: Vec<usize>,
    /// Offset of the live-chain block within `order`, and the chain
    /// position its first entry corresponds to.
    chain_block: usize,
    chain_lo: u32,
    live_len: usize,
    right_end: usize,
    env_block: Option<usize>,
}

fn probe_ctx(params: &RunParams, state: &RunState, t_now: u32) -> ProbeCtx {
    let l = params.l;
    let ejected = params.kind.injects() && t_now >= 2;
    let (chain_lo, live): (u32, Vec<usize>) = if ejected {
        (1, state.chain[1..l - 1].to_vec())
    } else {
        (0, state.chain.clone())
    };
    let mut order = Vec::with_capacity(state.tab.n());
    order.extend_from_slice(&state.left);
    let chain_block = order.len();
    let live_len = live.len();
    order.extend_from_slice(&live);
    order.extend(state.right.iter().rev());
    let right_end = order.len();
    let env_block = if state.env.is_empty() {
        None
    } else {
        let b = order.len();
        order.extend_from_slice(&state.env);
        Some(b)
    };
    order.extend_from_slice(&state.refs);
    ProbeCtx { order, chain_block, chain_lo, live_len, right_end, env_block }
}

fn needs_clip(seg: &SegmentSpec) -> bool {
    match seg {
        SegmentSpec::Cut { .. }
        | SegmentSpec::SideCut { .. }
        | SegmentSpec::CornerPair { .. }
        | SegmentSpec::SidePair { .. }
        | SegmentSpec::Bell => true,
        SegmentSpec::Interval { a, b } => b - a > 48,
        _ => false,
    }
}

fn eval_probe(
    seg: &SegmentSpec,
    ctx: &ProbeCtx,
    state: &RunState,
    clip: Option<&ClippedTableau>,
) -> Result<u32> {
    let chain_pos = |p: u32| -> usize { ctx.chain_block + (p - ctx.chain_lo) as usize };
    let chain_idxs =
        |a: u32, b: u32| -> Vec<usize> { (a..b).map(|p| state.chain[p as usize]).collect() };
    match *seg {
        SegmentSpec::Cut { k } => {
            let c = clip.expect("cut probes use the clipped gauge");
            Ok(c.entropy_prefix(k as usize).bits())
        }
        SegmentSpec::SideCut { side, k } => {
            let c = clip.expect("side probes use the clipped gauge");
            let k = k as usize;
            match side {
                Side::Left => Ok(c.entropy_interval(0, k - 1).bits()),
                Side::Right => Ok(c.entropy_interval(ctx.right_end - k, ctx.right_end - 1).bits()),
            }
        }
        SegmentSpec::Interval { a, b } => {
            if let Some(c) = clip {
                Ok(c.entropy_interval(chain_pos(a), chain_pos(b) - 1).bits())
            } else {
                Ok(entropy_subset(&state.tab, &chain_idxs(a, b))?.bits())
            }
        }
        SegmentSpec::CornerPair { k5, k6 } => {
            // I(A;B) with A u B the complement of the middle interval
            // (the state on the chain is pure).
            let c = clip.expect("corner pairs use the clipped gauge");
            let l = ctx.live_len;
            let sa = c.entropy_prefix(k5 as usize).bits() as i64;
            let sb = c.entropy_interval(k6 as usize, l - 1).bits() as i64;
            let sm = c.entropy_interval(k5 as usize, k6 as usize - 1).bits() as i64;
            let mi = sa + sb - sm;
            debug_assert!(mi >= 0);
            Ok(mi.max(0) as u32)
        }
        SegmentSpec::SidePair { k5, k6 } => {
            let c = clip.expect("side pairs use the clipped gauge");
            let n = ctx.right_end;
            let (k5, k6) = (k5 as usize, k6 as usize);
            let sa = c.entropy_interval(0, k5 - 1).bits() as i64;
            let sb = c.entropy_interval(n - k6, n - 1).bits() as i64;
            let sm = c.entropy_interval(k5, n - k6 - 1).bits() as i64;
            let mi = sa + sb - sm;
            debug_assert!(mi >= 0);
            Ok(mi.max(0) as u32)
        }
        SegmentSpec::IntervalPair { a1, a2, b1, b2 } => {
            let a = chain_idxs(a1, a2);
            let b = chain_idxs(b1, b2);
            Ok(mutual_information(&state.tab, &a, &b)?.bits())
        }
        SegmentSpec::OppositePair { a1, a2, b1, b2 } => {
            let a = chain_idxs(a1, a2);
            let b: Vec<usize> = (b1..b2).map(|p| state.env[p as usize]).collect();
            Ok(mutual_information(&state.tab, &a, &b)?.bits())
        }
        SegmentSpec::Bell => {
            let c = clip.expect("bell probes use the clipped gauge");
            let b = ctx.env_block.expect("layout has an environment");
            Ok(c.entropy_interval(b, b + state.env.len() - 1).bits())
        }
        SegmentSpec::RefSet => Ok(entropy_subset(&state.tab, &state.refs)?.bits()),
    }
}

fn eval_probes_at(
    params: &RunParams,
    state: &RunState,
    t_now: u32,
    probes: &[&SegmentSpec],
    out: &mut Vec<u32>,
) -> Result<()> {
    let ctx = probe_ctx(params, state, t_now);
    let clip = if probes.iter().any(|s| needs_clip(s)) {
        Some(clip_gauge(&state.tab, &ctx.order)?)
    } else {
        None
    };
    for seg in probes {
        out.push(eval_probe(seg, &ctx, state, clip.as_ref())?);
    }
    Ok(())
}

/// Run one trajectory, returning the probe values (in bits) in schedule
/// order. The RNG stream fully determines the realization.
pub fn run_realization<R: Rng>(
    params: &RunParams,
    schedule: &ProbeSchedule,
    rng: &mut R,
) -> Result<Vec<u32>> {
    validate(params, schedule)?;
    run_realization_validated(params, schedule, rng)
}

fn run_realization_validated<R: Rng>(
    params: &RunParams,
    schedule: &ProbeSchedule,
    rng: &mut R,
) -> Result<Vec<u32>> {
    let l = params.l;
    let mut state = init_state(params, rng)?;
    let mut out = Vec::with_capacity(schedule.len());
    let points = schedule.points();
    let mut next = 0usize;

    let probe_now = |state: &RunState, t_now: u32, next: &mut usize, out: &mut Vec<u32>| -> Result<()> {
        let start = *next;
        while *next < points.len() && points[*next].t == t_now {
            *next += 1;
        }
        if *next > start {
            let segs: Vec<&SegmentSpec> =
                points[start..*next].iter().map(|p| &p.segment).collect();
            eval_probes_at(params, state, t_now, &segs, out)?;
        }
        Ok(())
    };

    probe_now(&state, 0, &mut next, &mut out)?;

    for t_layer in 1..=params.t {
        // Brickwork layer: odd layers pair (0,1)(2,3)..., even layers
        // (1,2)(3,4)... with the wrap pair (L-1, 0) on a ring. Open-edge
        // qubits idle on alternating layers.
        let start = if t_layer % 2 == 1 { 0usize } else { 1 };
        let mut q = start;
        while q + 1 < l {
            let gate = sample_two_qubit_clifford(rng);
            state.tab.apply_gate(&gate, &[state.chain[q], state.chain[q + 1]])?;
            q += 2;
        }
        if params.kind.periodic() && t_layer % 2 == 0 {
            let gate = sample_two_qubit_clifford(rng);
            state.tab.apply_gate(&gate, &[state.chain[l - 1], state.chain[0]])?;
        }
        // Measurement sweep after every unitary layer.
        for pos in 0..l {
            if rng.gen::<f64>() < params.p {
                state.tab.measure_z(state.chain[pos], rng)?;
            }
        }
        // End of a period: retire the edge qubits to the side lists.
        if params.kind.injects() && t_layer % 2 == 0 {
            state.left.push(state.chain[0]);
            state.right.push(state.chain[l - 1]);
            state.chain[0] = EJECTED;
            state.chain[l - 1] = EJECTED;
        }
        probe_now(&state, t_layer, &mut next, &mut out)?;
        // Fresh qubits fill the edge slots for the next period.
        if params.kind.injects() && t_layer % 2 == 0 && t_layer < params.t {
            state.tab.append_fresh_qubit();
            state.chain[0] = state.tab.n() - 1;
            state.tab.append_fresh_qubit();
            state.chain[l - 1] = state.tab.n() - 1;
        }
    }
    debug_assert_eq!(next, points.len());
    Ok(out)
}

/// Run `n_realizations` independent trajectories and aggregate by exact
/// integer bit sums. `workers = None` uses the ambient rayon pool.
pub fn run_ensemble(
    params: &RunParams,
    schedule: &ProbeSchedule,
    n_realizations: u64,
    master_seed: u64,
    workers: Option<usize>,
) -> Result<ObservableSeries> {
    validate(params, schedule)?;
    if n_realizations == 0 {
        return Err(Error::Config("ensemble needs at least one realization".into()));
    }
    let m = schedule.len();
    let body = || -> Result<Vec<u64>> {
        (0..n_realizations)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed::stream(master_seed, i);
                let bits = run_realization_validated(params, schedule, &mut rng)?;
                let mut v = vec![0u64; 2 * m];
                for (k, &b) in bits.iter().enumerate() {
                    v[2 * k] = b as u64;
                    v[2 * k + 1] = (b as u64) * (b as u64);
                }
                Ok(v)
            })
            .try_reduce(
                || vec![0u64; 2 * m],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    Ok(a)
                },
            )
    };
    let sums = match workers {
        None => body()?,
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(body)?,
    };
    let records = schedule
        .points()
        .iter()
        .enumerate()
        .map(|(k, pt)| SeriesRecord {
            t: pt.t,
            segment: pt.segment,
            sum_bits: sums[2 * k],
            sumsq_bits: sums[2 * k + 1],
            count: n_realizations,
        })
        .collect();
    let meta = RunMeta {
        kind: params.kind.name(),
        l: params.l,
        t: params.t,
        p: params.p,
        n_realizations,
        master_seed,
        y_over_t: f64::NAN, // attached at analysis time
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: 0,
    };
    Ok(ObservableSeries { meta, records })
}

/// The reference-qubit purification experiment: entropy of the static
/// reference set against circuit depth.
pub fn run_reference_qubit_experiment(
    l: usize,
    t: u32,
    p: f64,
    a_start: u32,
    a_len: u32,
    times: &[u32],
    n_realizations: u64,
    master_seed: u64,
) -> Result<ObservableSeries> {
    let params =
        RunParams { kind: LayoutKind::ReferenceQubits { a_start, a_len }, l, t, p };
    let schedule = ProbeSchedule::new(
        times.iter().map(|&t| ProbePoint { t, segment: SegmentSpec::RefSet }).collect(),
    );
    run_ensemble(&params, &schedule, n_realizations, master_seed, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LN2;

    fn every_period(t: u32, segment: SegmentSpec) -> ProbeSchedule {
        ProbeSchedule::new((1..=t / 2).map(|k| ProbePoint { t: 2 * k, segment }).collect())
    }

    #[test]
    fn full_measurement_dephases_everything() {
        // p = 1: every probed entropy is 0 at all times.
        let params = RunParams { kind: LayoutKind::Fffa, l: 16, t: 8, p: 1.0 };
        let sched = every_period(8, SegmentSpec::Cut { k: 8 });
        let s = run_ensemble(&params, &sched, 5, 1, None).unwrap();
        assert!(s.records.iter().all(|r| r.sum_bits == 0), "{:?}", s.records);
    }

    #[test]
    fn unitaries_cannot_purify_bell_entropy() {
        // p = 0: the system-environment entropy stays at L ln 2.
        let params = RunParams { kind: LayoutKind::Fafa, l: 8, t: 6, p: 0.0 };
        let sched = every_period(6, SegmentSpec::Bell);
        let s = run_ensemble(&params, &sched, 3, 2, None).unwrap();
        for r in &s.records {
            assert_eq!(r.sum_bits, 3 * 8, "t = {}", r.t);
            assert!((r.mean_nats() - 8.0 * LN2).abs() < 1e-12);
        }
    }

    #[test]
    fn full_chain_entropy_vanishes_for_pure_layouts() {
        // S([z1, z4]) = 0 at all times: probe the full-chain interval by
        // its complement cut at every position... the direct statement is
        // that the state on the whole register is pure, so the widest
        // corner pair has I = 2 S(A).
        let params = RunParams { kind: LayoutKind::Fffa, l: 12, t: 8, p: 0.3 };
        let sched = ProbeSchedule::new(vec![
            ProbePoint { t: 8, segment: SegmentSpec::Cut { k: 6 } },
            ProbePoint { t: 8, segment: SegmentSpec::CornerPair { k5: 6, k6: 6 + 1 } },
        ]);
        // CornerPair(k5=6,k6=7) = S(0..6) + S(7..12) - S(6..7).
        let s = run_ensemble(&params, &sched, 20, 3, None).unwrap();
        assert!(s.records[0].sum_bits > 0);
    }

    #[test]
    fn n_equals_one_has_zero_stderr() {
        let params = RunParams { kind: LayoutKind::Fffa, l: 8, t: 4, p: 0.2 };
        let sched = every_period(4, SegmentSpec::Cut { k: 4 });
        let s = run_ensemble(&params, &sched, 1, 9, None).unwrap();
        assert!(s.records.iter().all(|r| r.stderr_nats() == 0.0));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let params = RunParams { kind: LayoutKind::Aaaa, l: 12, t: 8, p: 0.16 };
        let sched = ProbeSchedule::new(vec![
            ProbePoint { t: 4, segment: SegmentSpec::Interval { a: 3, b: 7 } },
            ProbePoint { t: 8, segment: SegmentSpec::IntervalPair { a1: 1, a2: 3, b1: 8, b2: 10 } },
            ProbePoint { t: 8, segment: SegmentSpec::OppositePair { a1: 1, a2: 3, b1: 5, b2: 7 } },
        ]);
        let a = run_ensemble(&params, &sched, 24, 7, Some(1)).unwrap();
        let b = run_ensemble(&params, &sched, 24, 7, Some(8)).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn schedule_validation_errors() {
        let afaa = RunParams { kind: LayoutKind::Afaa, l: 8, t: 8, p: 0.1 };
        // Side level 3 needs t >= 6.
        let bad = ProbeSchedule::new(vec![ProbePoint {
            t: 4,
            segment: SegmentSpec::SideCut { side: Side::Left, k: 3 },
        }]);
        assert!(matches!(validate(&afaa, &bad), Err(Error::Schedule(_))));
        // Odd probe time under injection.
        let odd = ProbeSchedule::new(vec![ProbePoint {
            t: 3,
            segment: SegmentSpec::SideCut { side: Side::Left, k: 1 },
        }]);
        assert!(validate(&afaa, &odd).is_err());
        // Wrong segment for the layout.
        let fffa = RunParams { kind: LayoutKind::Fffa, l: 8, t: 8, p: 0.1 };
        let wrong = ProbeSchedule::new(vec![ProbePoint { t: 2, segment: SegmentSpec::Bell }]);
        assert!(validate(&fffa, &wrong).is_err());
        // Probe beyond the depth.
        let late = ProbeSchedule::new(vec![ProbePoint { t: 10, segment: SegmentSpec::Cut { k: 4 } }]);
        assert!(validate(&fffa, &late).is_err());
    }

    #[test]
    fn afaa_tableau_grows_to_l_plus_t() {
        let params = RunParams { kind: LayoutKind::Afaa, l: 8, t: 12, p: 0.2 };
        let sched = ProbeSchedule::new(vec![ProbePoint {
            t: 12,
            segment: SegmentSpec::SideCut { side: Side::Left, k: 6 },
        }]);
        let mut rng = seed::stream(5, 0);
        let bits = run_realization(&params, &sched, &mut rng).unwrap();
        assert_eq!(bits.len(), 1);
        // (L - 2) + T live-plus-ejected qubits.
        let mut rng = seed::stream(5, 0);
        let mut state = init_state(&params, &mut rng).unwrap();
        for _ in 0..6 {
            state.tab.append_fresh_qubit();
        }
        // Direct check through a fresh run: n = L + (T/2 - 1) * 2 = L + T - 2
        // tableau qubits, which carry (L-2) top + T side coordinates.
        let expected_n = params.l + params.t as usize - 2;
        let mut rng = seed::stream(6, 0);
        let mut st = init_state(&params, &mut rng).unwrap();
        for t_layer in 1..=params.t {
            if t_layer % 2 == 0 {
                st.left.push(st.chain[0]);
                st.right.push(st.chain[params.l - 1]);
                st.chain[0] = EJECTED;
                st.chain[params.l - 1] = EJECTED;
                if t_layer < params.t {
                    st.tab.append_fresh_qubit();
                    st.chain[0] = st.tab.n() - 1;
                    st.tab.append_fresh_qubit();
                    st.chain[params.l - 1] = st.tab.n() - 1;
                }
            }
        }
        assert_eq!(st.tab.n(), expected_n);
        assert_eq!(st.left.len(), params.t as usize / 2);
        assert_eq!(st.right.len(), params.t as usize / 2);
    }

    #[test]
    fn fafa_mirror_symmetry_of_segment_entropies() {
        // Ensemble-mean entropy of a system segment equals that of the
        // mirror environment segment within 3 combined standard errors.
        // (Meaningful beyond L ~ 24; tinier rectangles feel the brickwork's
        // time-reversal offset.)
        let l = 24usize;
        let params = RunParams { kind: LayoutKind::Fafa, l, t: 16, p: 0.16 };
        let (a0, b0) = (4usize, 14usize);
        let mut sys_sum = 0u64;
        let mut env_sum = 0u64;
        let mut sys_sq = 0u64;
        let mut env_sq = 0u64;
        let n = 800u64;
        for i in 0..n {
            let mut rng = seed::stream(21, i);
            let mut st = init_state(&params, &mut rng).unwrap();
            for t_layer in 1..=params.t {
                let start = if t_layer % 2 == 1 { 0usize } else { 1 };
                let mut q = start;
                while q + 1 < l {
                    let g = sample_two_qubit_clifford(&mut rng);
                    st.tab.apply_gate(&g, &[st.chain[q], st.chain[q + 1]]).unwrap();
                    q += 2;
                }
                for pos in 0..l {
                    if rng.gen::<f64>() < params.p {
                        st.tab.measure_z(st.chain[pos], &mut rng).unwrap();
                    }
                }
            }
            let sys: Vec<usize> = (a0..b0).collect();
            let env: Vec<usize> = (a0..b0).map(|k| l + k).collect();
            let a = entropy_subset(&st.tab, &sys).unwrap().bits() as u64;
            let b = entropy_subset(&st.tab, &env).unwrap().bits() as u64;
            sys_sum += a;
            sys_sq += a * a;
            env_sum += b;
            env_sq += b * b;
        }
        let nf = n as f64;
        let mean = |s: u64| s as f64 / nf;
        let se = |s: u64, sq: u64| {
            (((sq as f64 - (s as f64).powi(2) / nf) / (nf - 1.0)).max(0.0) / nf).sqrt()
        };
        let diff = (mean(sys_sum) - mean(env_sum)).abs();
        let sigma = se(sys_sum, sys_sq).hypot(se(env_sum, env_sq));
        assert!(diff <= 3.0 * sigma.max(1e-9), "diff {diff} vs sigma {sigma}");
    }

    #[test]
    fn reference_qubits_start_maximally_entangled() {
        // T = 0 probe: S_Q = |A| ln 2 exactly; p = 0 keeps it there.
        let s = run_reference_qubit_experiment(10, 4, 0.0, 3, 4, &[0, 2, 4], 5, 11).unwrap();
        for r in &s.records {
            assert_eq!(r.sum_bits, 5 * 4, "t = {}", r.t);
        }
    }

    #[test]
    fn realization_is_seed_deterministic() {
        let params = RunParams { kind: LayoutKind::Aaaa, l: 10, t: 6, p: 0.16 };
        let sched = ProbeSchedule::new(vec![
            ProbePoint { t: 6, segment: SegmentSpec::Interval { a: 2, b: 8 } },
        ]);
        let mut r1 = seed::stream(33, 4);
        let mut r2 = seed::stream(33, 4);
        assert_eq!(
            run_realization(&params, &sched, &mut r1).unwrap(),
            run_realization(&params, &sched, &mut r2).unwrap()
        );
    }
}
