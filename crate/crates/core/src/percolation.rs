//! First-passage percolation comparator on the brickwork circuit lattice.
//!
//! The lattice is a square grid of qubit worldlines: vertical bonds (one per
//! site per layer) are broken independently with probability p, standing for
//! measurements, while horizontal bonds exist in the fixed alternating
//! brickwork pattern of the two-qubit gates. The minimal number of unbroken
//! links a separating path must cross equals, by planar duality, the
//! max-flow between the corresponding boundary terminals with unit
//! capacities on unbroken links; one crossed link costs ln 2.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::series::{ObservableSeries, RunMeta, SegmentSpec, SeriesRecord};
use crate::LN2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wrap {
    Open,
    Periodic,
}

/// Terminal coloring for the minimal cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coloring {
    /// Top edge split at chain position `cut`: the cut separates the first
    /// `cut` final-time sites from the rest of the top edge, ending anywhere
    /// on the three free edges.
    TopBipartition { cut: usize },
    /// Full top edge against full bottom edge (the purification analogue).
    TopVsBottom,
}

/// A sampled brickwork lattice. Sites live at (x, j) with x in 0..l and
/// j in 0..=t; vertical bonds connect consecutive j.
#[derive(Clone, Debug)]
pub struct PercolationInstance {
    pub l: usize,
    pub t: usize,
    pub p: f64,
    pub wrap: Wrap,
    pub coloring: Coloring,
    /// Broken flags for vertical bonds, indexed j * l + x, j in 0..t.
    broken: Vec<bool>,
}

/// Cost of a minimal cut, exact in crossed links.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub cost: u32,
}

impl CutResult {
    pub fn nats(self) -> f64 {
        self.cost as f64 * LN2
    }
}

impl PercolationInstance {
    pub fn vertical_broken(&self, x: usize, j: usize) -> bool {
        self.broken[j * self.l + x]
    }

    /// Horizontal bond to the right of (x, j), following the brickwork
    /// parity; rows 0 and t carry no gates.
    pub fn horizontal_present(&self, x: usize, j: usize) -> bool {
        if j == 0 || j >= self.t {
            return false;
        }
        match self.wrap {
            Wrap::Open if x + 1 >= self.l => false,
            _ => (x + j) % 2 == 0,
        }
    }

    /// Flip one vertical bond to broken (for perturbation tests).
    pub fn break_vertical(&mut self, x: usize, j: usize) {
        self.broken[j * self.l + x] = true;
    }

    pub fn broken_fraction(&self) -> f64 {
        self.broken.iter().filter(|&&b| b).count() as f64 / self.broken.len() as f64
    }
}

pub fn build_instance(
    l: usize,
    t: usize,
    p: f64,
    coloring: Coloring,
    wrap: Wrap,
    seed: u64,
) -> Result<PercolationInstance> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    build_instance_with_rng(l, t, p, coloring, wrap, &mut rng)
}

pub fn build_instance_with_rng<R: Rng>(
    l: usize,
    t: usize,
    p: f64,
    coloring: Coloring,
    wrap: Wrap,
    rng: &mut R,
) -> Result<PercolationInstance> {
    if l == 0 || l % 2 != 0 {
        return Err(Error::Geometry(format!("brickwork parity needs even width, got {l}")));
    }
    if t == 0 {
        return Err(Error::Geometry("depth must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Geometry(format!("breaking probability {p} outside [0,1]")));
    }
    if let Coloring::TopBipartition { cut } = coloring {
        if cut == 0 || cut >= l {
            return Err(Error::Geometry(format!("cut {cut} outside 1..{l}")));
        }
    }
    let broken = (0..l * t).map(|_| rng.gen::<f64>() < p).collect();
    Ok(PercolationInstance { l, t, p, wrap, coloring, broken })
}

/// Breadth-first max-flow (unit capacities) between terminal supernodes.
struct FlowGraph {
    // edges[k] = (to, cap); edge k^1 is the reverse.
    to: Vec<u32>,
    cap: Vec<u32>,
    head: Vec<Vec<u32>>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph { to: Vec::new(), cap: Vec::new(), head: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, u: usize, v: usize, cap_uv: u32, cap_vu: u32) {
        let k = self.to.len() as u32;
        self.to.push(v as u32);
        self.cap.push(cap_uv);
        self.to.push(u as u32);
        self.cap.push(cap_vu);
        self.head[u].push(k);
        self.head[v].push(k + 1);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u32 {
        let mut flow = 0u32;
        let mut parent_edge = vec![u32::MAX; self.head.len()];
        let mut queue = Vec::with_capacity(self.head.len());
        loop {
            parent_edge.fill(u32::MAX);
            parent_edge[s] = u32::MAX - 1;
            queue.clear();
            queue.push(s as u32);
            let mut qi = 0;
            let mut reached = false;
            'bfs: while qi < queue.len() {
                let u = queue[qi] as usize;
                qi += 1;
                for &e in &self.head[u] {
                    let v = self.to[e as usize] as usize;
                    if self.cap[e as usize] > 0 && parent_edge[v] == u32::MAX {
                        parent_edge[v] = e;
                        if v == t {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push(v as u32);
                    }
                }
            }
            if !reached {
                return flow;
            }
            // Unit bottleneck on every interior edge.
            let mut v = t;
            let mut bottleneck = u32::MAX;
            while v != s {
                let e = parent_edge[v] as usize;
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1] as usize;
            }
            let mut v = t;
            while v != s {
                let e = parent_edge[v] as usize;
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1] as usize;
            }
            flow += bottleneck;
        }
    }
}

/// Exact minimal-cut cost for the instance's coloring.
pub fn min_cut(inst: &PercolationInstance) -> CutResult {
    min_cut_with(inst, inst.coloring)
}

/// Minimal cut with an explicit coloring (so one instance can be swept over
/// several bipartition points).
pub fn min_cut_with(inst: &PercolationInstance, coloring: Coloring) -> CutResult {
    let (l, t) = (inst.l, inst.t);
    let site = |x: usize, j: usize| j * l + x;
    let n_sites = l * (t + 1);
    let (source, sink) = (n_sites, n_sites + 1);
    let mut g = FlowGraph::new(n_sites + 2);
    const BIG: u32 = u32::MAX / 4;

    for j in 0..t {
        for x in 0..l {
            if !inst.vertical_broken(x, j) {
                g.add(site(x, j), site(x, j + 1), 1, 1);
            }
        }
    }
    for j in 1..t {
        for x in 0..l {
            if inst.horizontal_present(x, j) {
                g.add(site(x, j), site((x + 1) % l, j), 1, 1);
            }
        }
    }
    match coloring {
        Coloring::TopBipartition { cut } => {
            for x in 0..l {
                if x < cut {
                    g.add(source, site(x, t), BIG, 0);
                } else {
                    g.add(site(x, t), sink, BIG, 0);
                }
            }
        }
        Coloring::TopVsBottom => {
            for x in 0..l {
                g.add(source, site(x, t), BIG, 0);
                g.add(site(x, 0), sink, BIG, 0);
            }
        }
    }
    CutResult { cost: g.max_flow(source, sink) }
}

/// Probe set for one ensemble: every listed coloring is evaluated on every
/// instance.
#[derive(Clone, Debug)]
pub struct PercolationProbe {
    pub segment: SegmentSpec,
    pub coloring: Coloring,
}

/// Ensemble of minimal-cut costs over fresh instances per depth in
/// `t_grid`, shaped identically to the circuit harness output (the segment
/// column carries the bipartition point; Y/T is fixed to 1 downstream).
pub fn run_percolation_ensemble(
    l: usize,
    t_grid: &[usize],
    p: f64,
    probes: &[PercolationProbe],
    wrap: Wrap,
    n_realizations: u64,
    master_seed: u64,
) -> Result<ObservableSeries> {
    if probes.is_empty() || t_grid.is_empty() {
        return Err(Error::Config("empty percolation probe set".into()));
    }
    // Fail fast on bad geometry before the parallel section.
    build_instance(l, t_grid[0], p, probes[0].coloring, wrap, 0)?;

    let mut records = Vec::new();
    for (ti, &t) in t_grid.iter().enumerate() {
        let sums = (0..n_realizations)
            .into_par_iter()
            .map(|i| {
                // One stream per (depth, realization) pair.
                let mut rng = seed::stream(master_seed, (ti as u64) << 32 | i);
                let inst = build_instance_with_rng(l, t, p, probes[0].coloring, wrap, &mut rng)
                    .expect("validated above");
                let mut v = vec![0u64; 2 * probes.len()];
                for (k, probe) in probes.iter().enumerate() {
                    let c = min_cut_with(&inst, probe.coloring).cost as u64;
                    v[2 * k] = c;
                    v[2 * k + 1] = c * c;
                }
                v
            })
            .reduce(
                || vec![0u64; 2 * probes.len()],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        for (k, probe) in probes.iter().enumerate() {
            records.push(SeriesRecord {
                t: t as u32,
                segment: probe.segment,
                sum_bits: sums[2 * k],
                sumsq_bits: sums[2 * k + 1],
                count: n_realizations,
            });
        }
    }
    let meta = RunMeta {
        kind: format!(
            "percolation-{}-{}",
            match wrap {
                Wrap::Open => "open",
                Wrap::Periodic => "pbc",
            },
            match probes[0].coloring {
                Coloring::TopBipartition { .. } => "bipartition",
                Coloring::TopVsBottom => "topbottom",
            }
        ),
        l,
        t: *t_grid.iter().max().unwrap() as u32,
        p,
        n_realizations,
        master_seed,
        y_over_t: 1.0,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        created_unix: 0,
    };
    Ok(ObservableSeries { meta, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_errors() {
        assert!(build_instance(5, 4, 0.5, Coloring::TopVsBottom, Wrap::Open, 0).is_err());
        assert!(build_instance(4, 0, 0.5, Coloring::TopVsBottom, Wrap::Open, 0).is_err());
        assert!(
            build_instance(4, 4, 0.5, Coloring::TopBipartition { cut: 4 }, Wrap::Open, 0).is_err()
        );
    }

    #[test]
    fn extreme_probabilities() {
        let all_intact = build_instance(8, 6, 0.0, Coloring::TopVsBottom, Wrap::Open, 1).unwrap();
        assert_eq!(all_intact.broken_fraction(), 0.0);
        let all_broken = build_instance(8, 6, 1.0, Coloring::TopVsBottom, Wrap::Open, 1).unwrap();
        assert_eq!(all_broken.broken_fraction(), 1.0);
        assert_eq!(min_cut(&all_broken).cost, 0);
    }

    #[test]
    fn intact_lattice_costs_full_width() {
        // Every column's worldline must be crossed exactly once.
        for t in [1usize, 2, 7] {
            let inst = build_instance(6, t, 0.0, Coloring::TopVsBottom, Wrap::Open, 3).unwrap();
            assert_eq!(min_cut(&inst).cost, 6, "t = {t}");
        }
    }

    #[test]
    fn broken_fraction_matches_probability() {
        // 10^4 links at p = 0.5 within a 5-sigma binomial band.
        let inst = build_instance(100, 100, 0.5, Coloring::TopVsBottom, Wrap::Open, 9).unwrap();
        let f = inst.broken_fraction();
        let sigma = 0.5 / (10_000f64).sqrt();
        assert!((f - 0.5).abs() < 5.0 * sigma, "fraction = {f}");
    }

    #[test]
    fn breaking_a_link_never_increases_cost() {
        for seed in 0..40u64 {
            let mut inst =
                build_instance(8, 8, 0.45, Coloring::TopVsBottom, Wrap::Open, seed).unwrap();
            let before = min_cut(&inst).cost;
            let (x, j) = ((seed as usize * 3) % 8, (seed as usize * 5) % 8);
            inst.break_vertical(x, j);
            let after = min_cut(&inst).cost;
            assert!(after <= before, "seed {seed}: {before} -> {after}");
        }
    }

    #[test]
    fn bipartition_cut_is_bounded_by_depth_and_interface() {
        // With everything intact the cheapest separating path hugs the
        // interface: cost = min over escape routes, <= t + detour.
        let inst =
            build_instance(8, 2, 0.0, Coloring::TopBipartition { cut: 4 }, Wrap::Open, 0).unwrap();
        let c = min_cut(&inst).cost;
        assert!(c >= 1 && c <= 4, "cost = {c}");
    }

    #[test]
    fn ensemble_shape_and_determinism() {
        let probes = vec![
            PercolationProbe {
                segment: SegmentSpec::Cut { k: 4 },
                coloring: Coloring::TopBipartition { cut: 4 },
            },
            PercolationProbe { segment: SegmentSpec::Bell, coloring: Coloring::TopVsBottom },
        ];
        let a = run_percolation_ensemble(8, &[4, 8], 0.5, &probes, Wrap::Open, 50, 77).unwrap();
        let b = run_percolation_ensemble(8, &[4, 8], 0.5, &probes, Wrap::Open, 50, 77).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.records.len(), 4);
        assert!(a.records.iter().all(|r| r.count == 50));
        assert_eq!(a.meta.y_over_t, 1.0);
    }

    #[test]
    fn vertical_reflection_symmetry_of_topbottom_costs() {
        // The instance distribution is reflection symmetric for even t, so
        // independent ensembles of reflected and unreflected lattices must
        // agree within combined errors.
        let probes =
            vec![PercolationProbe { segment: SegmentSpec::Bell, coloring: Coloring::TopVsBottom }];
        let a = run_percolation_ensemble(16, &[16], 0.5, &probes, Wrap::Open, 4000, 5).unwrap();
        let b = run_percolation_ensemble(16, &[16], 0.5, &probes, Wrap::Open, 4000, 6).unwrap();
        let (ra, rb) = (&a.records[0], &b.records[0]);
        let diff = (ra.mean_nats() - rb.mean_nats()).abs();
        let sigma = ra.stderr_nats().hypot(rb.stderr_nats());
        assert!(diff < 3.0 * sigma.max(1e-12), "diff {diff} vs sigma {sigma}");
    }

    #[test]
    fn periodic_wrap_reduces_bipartition_cost_symmetrically() {
        // On a cylinder a cut at k and at l-k see statistically identical
        // geometry; smoke-check means agree loosely.
        let probes = vec![
            PercolationProbe {
                segment: SegmentSpec::Cut { k: 4 },
                coloring: Coloring::TopBipartition { cut: 4 },
            },
            PercolationProbe {
                segment: SegmentSpec::Cut { k: 12 },
                coloring: Coloring::TopBipartition { cut: 12 },
            },
        ];
        let s =
            run_percolation_ensemble(16, &[32], 0.5, &probes, Wrap::Periodic, 3000, 11).unwrap();
        let (ra, rb) = (&s.records[0], &s.records[1]);
        let diff = (ra.mean_nats() - rb.mean_nats()).abs();
        let sigma = ra.stderr_nats().hypot(rb.stderr_nats());
        assert!(diff < 4.0 * sigma.max(1e-12), "diff {diff} vs sigma {sigma}");
    }
}
