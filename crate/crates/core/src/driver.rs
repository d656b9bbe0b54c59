//! Run configuration, per-figure schedule presets, collapse-coordinate
//! attachment, and the simulate / percolate / calibrate / fit pipelines
//! shared by the command-line front end and the test suites.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::cft::{
    eta_rect, eta_strip, xi_three_point, xi_two_point, xi_two_point_cylinder, BoundaryZ,
    ConformalFrame,
};
use crate::error::{Error, Result};
use crate::fit::{self, BellLateMode, FitResult, FitWindow, SeriesPoint};
use crate::harness::{self, LayoutKind, ProbePoint, ProbeSchedule, RunParams};
use crate::percolation::{self, Coloring, PercolationProbe, Wrap};
use crate::series::{
    read_result_file, write_result_file, CsvRow, ObservableSeries, SegmentSpec, Side,
};

/// Default time-rescaling constant for the random Clifford circuit,
/// re-derivable with the `calibrate` pipeline.
pub const DEFAULT_Y_OVER_T: f64 = 0.61;
/// Default critical measurement rate, re-derivable with `calibrate`.
pub const DEFAULT_P_C: f64 = 0.16;

/// Collapse coordinates attached to one record at analysis time.
#[derive(Clone, Copy, Debug)]
pub struct Coords {
    pub tau: f64,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    /// Minimal lattice separation of the probe, for fit windows.
    pub sep: f64,
}

/// Chain cut position -> rectangle x coordinate.
fn cut_x(l: usize, k: u32) -> f64 {
    k as f64 - l as f64 / 2.0
}

/// Compute the collapse coordinates of one probe. Everything is a pure
/// function of (layout, L, Y/T, t, segment), so files can be recomputed
/// bit-identically from their own header.
pub fn collapse_coordinates(
    kind: &LayoutKind,
    l: usize,
    y_over_t: f64,
    t: u32,
    seg: &SegmentSpec,
) -> Result<Coords> {
    let lf = l as f64;
    let tau = y_over_t * t as f64 / lf;
    let none = |sep: f64| Coords { tau, xi: None, eta: None, sep };
    if t == 0 {
        let sep = match *seg {
            SegmentSpec::Interval { a, b } => (b - a) as f64,
            _ => 0.0,
        };
        return Ok(none(sep));
    }
    // Below the tau ~ 0.03 precision floor the rectangle map loses the
    // boundary points in double precision; those rows keep their data but
    // carry no rectangle-frame coordinate. (The wide-strip rules below do
    // not go through the elliptic parameter and stay exact.)
    let frame = || -> Result<Option<ConformalFrame>> {
        let f = ConformalFrame::from_circuit(l, t, y_over_t)?;
        Ok(if f.precision_warning { None } else { Some(f) })
    };
    match (*seg, kind) {
        (SegmentSpec::Cut { k }, LayoutKind::Fffa) => {
            let sep = k.min(l as u32 - k) as f64;
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let xi = xi_three_point(&f, 1, BoundaryZ::Top { x: cut_x(l, k) }, 4)?;
            Ok(Coords { tau, xi: Some(xi), eta: None, sep })
        }
        (SegmentSpec::CornerPair { k5, k6 }, LayoutKind::Fffa) => {
            let sep = k5.min(k6 - k5).min(l as u32 - k6) as f64;
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let eta = eta_rect(
                &f,
                [
                    f.corner(1),
                    BoundaryZ::Top { x: cut_x(l, k5) },
                    BoundaryZ::Top { x: cut_x(l, k6) },
                    f.corner(4),
                ],
            )?;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (SegmentSpec::SideCut { side, k }, LayoutKind::Afaa) => {
            let lat = (2 * k - 1) as f64;
            let sep = lat.min(t as f64 - lat);
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let y = y_over_t * (2 * k - 1) as f64;
            let probe = match side {
                Side::Left => BoundaryZ::Left { y },
                Side::Right => BoundaryZ::Right { y },
            };
            let xi = xi_three_point(&f, 2, probe, 3)?;
            Ok(Coords { tau, xi: Some(xi), eta: None, sep })
        }
        (SegmentSpec::SidePair { k5, k6 }, LayoutKind::Afaa) => {
            let l5 = (2 * k5 - 1) as f64;
            let l6 = (2 * k6 - 1) as f64;
            let sep = l5.min(l6).min(t as f64 - l5).min(t as f64 - l6);
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let y5 = y_over_t * (2 * k5 - 1) as f64;
            let y6 = y_over_t * (2 * k6 - 1) as f64;
            let eta = eta_rect(
                &f,
                [f.corner(2), BoundaryZ::Left { y: y5 }, BoundaryZ::Right { y: y6 }, f.corner(3)],
            )?;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (SegmentSpec::Interval { a, b }, LayoutKind::Aaaa) => {
            let sep = (b - a) as f64;
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let xi = xi_two_point(
                &f,
                BoundaryZ::Top { x: cut_x(l, a) },
                BoundaryZ::Top { x: cut_x(l, b) },
            )?;
            Ok(Coords { tau, xi: Some(xi), eta: None, sep })
        }
        (SegmentSpec::Interval { a, b }, LayoutKind::PbcProduct) => {
            let xi = xi_two_point_cylinder(lf, cut_x(l, a), cut_x(l, b))?;
            let w = b - a;
            Ok(Coords { tau, xi: Some(xi), eta: None, sep: w.min(l as u32 - w) as f64 })
        }
        (SegmentSpec::Interval { a, b }, _) => Ok(none((b - a) as f64)),
        (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, LayoutKind::Aaaa) => {
            let xs = [cut_x(l, a1), cut_x(l, a2), cut_x(l, b1), cut_x(l, b2)];
            // Shallow wide circuits sit below the elliptic precision floor;
            // there the strip (L -> infinity) map is the faithful geometry.
            let eta = match frame()? {
                Some(f) => eta_rect(
                    &f,
                    [
                        BoundaryZ::Top { x: xs[0] },
                        BoundaryZ::Top { x: xs[1] },
                        BoundaryZ::Top { x: xs[2] },
                        BoundaryZ::Top { x: xs[3] },
                    ],
                )?,
                None => eta_strip(
                    [(xs[0], true), (xs[1], true), (xs[2], true), (xs[3], true)],
                    y_over_t * t as f64,
                )?,
            };
            let sep = (a2 - a1).min(b2 - b1).min(b1 - a2) as f64;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, LayoutKind::PbcProduct) => {
            let eta = eta_cylinder(lf, [cut_x(l, a1), cut_x(l, a2), cut_x(l, b1), cut_x(l, b2)])?;
            let sep = (a2 - a1).min(b2 - b1).min(b1 - a2) as f64;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (SegmentSpec::IntervalPair { a1, a2, b1, b2 }, _) => {
            Ok(none((a2 - a1).min(b2 - b1).min(b1 - a2) as f64))
        }
        (SegmentSpec::OppositePair { a1, a2, b1, b2 }, LayoutKind::Aaaa)
        | (SegmentSpec::OppositePair { a1, a2, b1, b2 }, LayoutKind::Fafa) => {
            let sep = (a2 - a1).min(b2 - b1) as f64;
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let eta = eta_rect(
                &f,
                [
                    BoundaryZ::Top { x: cut_x(l, a1) },
                    BoundaryZ::Top { x: cut_x(l, a2) },
                    BoundaryZ::Bottom { x: cut_x(l, b1) },
                    BoundaryZ::Bottom { x: cut_x(l, b2) },
                ],
            )?;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (SegmentSpec::Bell, _) => Ok(none(lf)),
        (SegmentSpec::RefSet, LayoutKind::ReferenceQubits { a_start, a_len }) => {
            let sep = *a_len as f64;
            let Some(f) = frame()? else { return Ok(none(sep)) };
            let eta = eta_rect(
                &f,
                [
                    f.corner(1),
                    BoundaryZ::Bottom { x: cut_x(l, *a_start) },
                    BoundaryZ::Bottom { x: cut_x(l, a_start + a_len) },
                    f.corner(4),
                ],
            )?;
            Ok(Coords { tau, xi: None, eta: Some(eta), sep })
        }
        (seg, kind) => Err(Error::Config(format!(
            "no collapse rule for segment {seg} under layout {}",
            kind.name()
        ))),
    }
}

/// Cross ratio of four boundary points of the semi-infinite cylinder; the
/// tan images reduce to a pure product of sines.
fn eta_cylinder(l: f64, xs: [f64; 4]) -> Result<f64> {
    let s = |a: f64, b: f64| (std::f64::consts::PI * (a - b) / l).sin();
    let d02 = s(xs[0], xs[2]);
    let d13 = s(xs[1], xs[3]);
    if d02 == 0.0 || d13 == 0.0 {
        return Err(Error::DegenerateProbe("coincident cylinder points".into()));
    }
    Ok((s(xs[0], xs[1]) * s(xs[2], xs[3]) / (d02 * d13)).abs())
}

/// Even probe times from 2 to `t_max`: every period up to `dense_until`,
/// then geometrically thinned.
pub fn even_times(t_max: u32, dense_until: u32, ratio: f64) -> Vec<u32> {
    let mut times = Vec::new();
    let mut t = 2u32;
    while t <= t_max.min(dense_until) {
        times.push(t);
        t += 2;
    }
    if ratio > 1.0 {
        let mut ft = (t_max.min(dense_until) as f64).max(2.0);
        while ft * ratio <= t_max as f64 {
            ft *= ratio;
            let even = (ft / 2.0).round() as u32 * 2;
            if even > *times.last().unwrap_or(&0) && even <= t_max {
                times.push(even);
            }
        }
    }
    let t_even = t_max - t_max % 2;
    if t_even >= 2 && *times.last().unwrap_or(&0) != t_even {
        times.push(t_even);
    }
    times
}

/// Named probe schedules reproducing the standard figures; see the README
/// for the catalogue.
pub fn schedule_preset(name: &str, kind: &LayoutKind, l: usize, t: u32) -> Result<ProbeSchedule> {
    let lu = l as u32;
    let times = even_times(t, 64, 1.3);
    let mut pts: Vec<ProbePoint> = Vec::new();
    match (name, kind) {
        ("fig5a", LayoutKind::Fffa) => {
            let step = (lu / 32).max(2);
            for &time in &times {
                let mut k = step;
                while k < lu {
                    pts.push(ProbePoint { t: time, segment: SegmentSpec::Cut { k } });
                    k += step;
                }
            }
        }
        ("fig5b", LayoutKind::Fffa) => {
            let coarse = (lu / 8).max(2);
            for &time in &times {
                let mut k5 = coarse;
                while k5 < lu {
                    let mut k6 = k5 + coarse;
                    while k6 < lu {
                        pts.push(ProbePoint {
                            t: time,
                            segment: SegmentSpec::CornerPair { k5, k6 },
                        });
                        k6 += coarse;
                    }
                    k5 += coarse;
                }
                // Narrow gaps for the eta -> 1 limit.
                for gap in [2u32, 4, 8] {
                    let k5 = lu / 2 - gap / 2;
                    pts.push(ProbePoint {
                        t: time,
                        segment: SegmentSpec::CornerPair { k5, k6: k5 + gap },
                    });
                }
            }
        }
        ("fig6a", LayoutKind::Afaa) => {
            for &time in &times {
                for k in level_grid(time / 2) {
                    for side in [Side::Left, Side::Right] {
                        pts.push(ProbePoint { t: time, segment: SegmentSpec::SideCut { side, k } });
                    }
                }
            }
        }
        ("fig6b", LayoutKind::Afaa) => {
            for &time in &times {
                for k5 in level_grid(time / 2) {
                    for k6 in level_grid(time / 2) {
                        pts.push(ProbePoint { t: time, segment: SegmentSpec::SidePair { k5, k6 } });
                    }
                }
            }
        }
        ("fig8b", LayoutKind::Fafa) | ("fig10b", LayoutKind::PbcBell) => {
            for time in even_times(t, 128, 1.15) {
                pts.push(ProbePoint { t: time, segment: SegmentSpec::Bell });
            }
        }
        ("fig9a", LayoutKind::Aaaa) => {
            let step = (lu / 16).max(2);
            for &time in &times {
                for w in [2u32, 4, 8, 16, 32] {
                    let mut a = step;
                    while a + w < lu - 1 {
                        pts.push(ProbePoint {
                            t: time,
                            segment: SegmentSpec::Interval { a, b: a + w },
                        });
                        a += step.max(w);
                    }
                }
            }
        }
        ("fig9b", LayoutKind::Aaaa) => {
            let c = lu / 2;
            for &time in &times {
                for w in [2u32, 4] {
                    for s in [1u32, 2, 4, 8, 16, 32, 64] {
                        if s + w < c - 1 {
                            pts.push(ProbePoint {
                                t: time,
                                segment: SegmentSpec::IntervalPair {
                                    a1: c - s - w,
                                    a2: c - s,
                                    b1: c + s,
                                    b2: c + s + w,
                                },
                            });
                            pts.push(ProbePoint {
                                t: time,
                                segment: SegmentSpec::OppositePair {
                                    a1: c - s - w,
                                    a2: c - s,
                                    b1: c + s,
                                    b2: c + s + w,
                                },
                            });
                        }
                    }
                }
            }
        }
        ("fig10a", LayoutKind::PbcProduct) => {
            for &time in &times {
                let mut w = 4u32;
                while w <= lu / 2 {
                    for a in [0u32, lu / 4] {
                        pts.push(ProbePoint {
                            t: time,
                            segment: SegmentSpec::Interval { a, b: a + w },
                        });
                    }
                    w *= 2;
                }
            }
        }
        ("fig12", LayoutKind::ReferenceQubits { .. }) => {
            for time in even_times(t, 32, 1.2) {
                pts.push(ProbePoint { t: time, segment: SegmentSpec::RefSet });
            }
        }
        ("lightcone", LayoutKind::Aaaa) => {
            let c = lu / 2;
            let far = (8.0 * DEFAULT_Y_OVER_T * t as f64 / 2.0).ceil() as u32;
            let mut seps: Vec<u32> = vec![1, 2, 3, 4, 6, 8, 12, 16];
            if !seps.contains(&far) {
                seps.push(far);
            }
            for s in seps {
                if s + 2 < c - 1 && c > s + 3 {
                    pts.push(ProbePoint {
                        t,
                        segment: SegmentSpec::IntervalPair {
                            a1: c - s - 2,
                            a2: c - s,
                            b1: c + s,
                            b2: c + s + 2,
                        },
                    });
                }
            }
        }
        (other, kind) => {
            return Err(Error::Config(format!("no preset {other:?} for layout {}", kind.name())));
        }
    }
    Ok(ProbeSchedule::new(pts))
}

/// Geometric side-level grid 1, 2, 3, 4, 6, 9, ... up to `max`.
fn level_grid(max: u32) -> Vec<u32> {
    let mut ks = Vec::new();
    let mut k = 1u32;
    while k <= max {
        ks.push(k);
        k = if k < 4 { k + 1 } else { k * 3 / 2 };
    }
    ks
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub layout: String,
    pub l: usize,
    pub t: u32,
    pub p: f64,
    pub n: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub y_over_t: f64,
    /// Preset name, or a path to a JSON file holding `[ {t, segment}, .. ]`.
    pub schedule: String,
    pub out: PathBuf,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn load_schedule(spec: &str, kind: &LayoutKind, l: usize, t: u32) -> Result<ProbeSchedule> {
    if spec.ends_with(".json") || spec.contains('/') {
        let text = std::fs::read_to_string(spec)?;
        let pts: Vec<ProbePoint> = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("schedule file {spec}: {e}")))?;
        Ok(ProbeSchedule::new(pts))
    } else {
        schedule_preset(spec, kind, l, t)
    }
}

/// Turn an aggregated series into serializable rows with coordinates.
pub fn series_to_rows(
    kind: &LayoutKind,
    y_over_t: f64,
    series: &ObservableSeries,
) -> Result<Vec<CsvRow>> {
    series
        .records
        .iter()
        .map(|r| {
            let c = collapse_coordinates(kind, series.meta.l, y_over_t, r.t, &r.segment)?;
            Ok(CsvRow {
                t: r.t,
                tau: c.tau,
                segment: r.segment.to_string(),
                sep: c.sep,
                xi: c.xi,
                eta: c.eta,
                mean_nats: r.mean_nats(),
                stderr_nats: r.stderr_nats(),
                sum_bits: r.sum_bits,
                sumsq_bits: r.sumsq_bits,
                count: r.count,
            })
        })
        .collect()
}

/// Run one circuit ensemble and write its result file.
pub fn simulate(config: &SimulateConfig) -> Result<ObservableSeries> {
    let kind = LayoutKind::from_name(&config.layout)?;
    let params = RunParams { kind, l: config.l, t: config.t, p: config.p };
    let schedule = load_schedule(&config.schedule, &kind, config.l, config.t)?;
    harness::validate(&params, &schedule)?;
    let mut series =
        harness::run_ensemble(&params, &schedule, config.n, config.seed, config.workers)?;
    series.meta.y_over_t = config.y_over_t;
    series.meta.created_unix = now_unix();
    let rows = series_to_rows(&kind, config.y_over_t, &series)?;
    write_result_file(&config.out, &series.meta, &rows)?;
    Ok(series)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PercolateConfig {
    pub l: usize,
    pub t_grid: Vec<usize>,
    pub p: f64,
    /// "bipartition" (interface cuts on the top edge) or "topbottom".
    pub coloring: String,
    pub periodic: bool,
    pub n: u64,
    pub seed: u64,
    pub out: PathBuf,
}

/// The circuit layout whose collapse rules a percolation series reuses.
pub fn percolation_effective_kind(meta_kind: &str) -> Result<LayoutKind> {
    if meta_kind.ends_with("bipartition") {
        Ok(LayoutKind::Fffa)
    } else if meta_kind == "percolation-pbc-topbottom" {
        Ok(LayoutKind::PbcBell)
    } else if meta_kind.ends_with("topbottom") {
        Ok(LayoutKind::Fafa)
    } else {
        Err(Error::Config(format!("not a percolation series: {meta_kind:?}")))
    }
}

/// Run a minimal-cut ensemble and write it in the circuit file schema
/// (Y/T = 1: the lattice is isotropic).
pub fn percolate(config: &PercolateConfig) -> Result<ObservableSeries> {
    let wrap = if config.periodic { Wrap::Periodic } else { Wrap::Open };
    let probes: Vec<PercolationProbe> = match config.coloring.as_str() {
        "bipartition" => {
            let step = (config.l as u32 / 32).max(2);
            let mut v = Vec::new();
            let mut k = step;
            while (k as usize) < config.l {
                v.push(PercolationProbe {
                    segment: SegmentSpec::Cut { k },
                    coloring: Coloring::TopBipartition { cut: k as usize },
                });
                k += step;
            }
            v
        }
        "topbottom" => {
            vec![PercolationProbe { segment: SegmentSpec::Bell, coloring: Coloring::TopVsBottom }]
        }
        other => return Err(Error::Config(format!("unknown coloring {other:?}"))),
    };
    let mut series = percolation::run_percolation_ensemble(
        config.l,
        &config.t_grid,
        config.p,
        &probes,
        wrap,
        config.n,
        config.seed,
    )?;
    series.meta.created_unix = now_unix();
    let eff = percolation_effective_kind(&series.meta.kind)?;
    let rows = series_to_rows(&eff, 1.0, &series)?;
    write_result_file(&config.out, &series.meta, &rows)?;
    Ok(series)
}

/// Which column feeds the fit abscissa.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitKind {
    LogLinear,
    PowerLaw,
    EtaToOne,
    BellEarly,
    BellLateOpen,
    BellLatePbc,
}

impl FitKind {
    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "log-linear" => Ok(FitKind::LogLinear),
            "power-law" => Ok(FitKind::PowerLaw),
            "eta-one" => Ok(FitKind::EtaToOne),
            "bell-early" => Ok(FitKind::BellEarly),
            "bell-late-open" => Ok(FitKind::BellLateOpen),
            "bell-late-pbc" => Ok(FitKind::BellLatePbc),
            other => Err(Error::Config(format!("unknown fit kind {other:?}"))),
        }
    }
}

/// Convert file rows into fit points for the given fit kind.
pub fn rows_to_fit_points(kind: FitKind, rows: &[CsvRow]) -> Vec<SeriesPoint> {
    rows.iter()
        .filter_map(|r| {
            let abscissa = match kind {
                FitKind::LogLinear => r.xi?,
                FitKind::PowerLaw | FitKind::EtaToOne => r.eta?,
                FitKind::BellEarly | FitKind::BellLateOpen | FitKind::BellLatePbc => r.tau,
            };
            Some(SeriesPoint {
                tau: r.tau,
                abscissa,
                value: r.mean_nats,
                stderr: r.stderr_nats,
                sep: r.sep,
            })
        })
        .collect()
}

pub fn run_fit(kind: FitKind, pts: &[SeriesPoint], win: &FitWindow) -> Result<FitResult> {
    match kind {
        FitKind::LogLinear => fit::fit_log_linear(pts, win),
        FitKind::PowerLaw => fit::fit_power_law(pts, win),
        FitKind::EtaToOne => fit::fit_eta_to_one(pts, win),
        FitKind::BellEarly => fit::fit_bell_early(pts, win),
        FitKind::BellLateOpen => fit::fit_bell_late(pts, BellLateMode::Open, win),
        FitKind::BellLatePbc => fit::fit_bell_late(pts, BellLateMode::Periodic, win),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrateConfig {
    pub l: usize,
    /// Steady-state depth for the rate scan.
    pub t_steady: u32,
    /// Depth for the early-time Bell run.
    pub t_bell: u32,
    pub p_grid: Vec<f64>,
    pub yt_grid: Vec<f64>,
    pub n_steady: u64,
    pub n_bell: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

/// Steady-state interval probes at a few late time slices for the rate scan.
fn steady_schedule(l: usize, t: u32) -> ProbeSchedule {
    let lu = l as u32;
    let mut pts = Vec::new();
    let mut slices = vec![t - t % 2];
    if t >= 16 {
        slices.push((t - t / 8) & !1);
        slices.push((t - t / 4) & !1);
    }
    for &time in &slices {
        let mut w = 4u32;
        while w <= lu / 2 {
            for a in [0u32, lu / 3, 2 * lu / 3] {
                pts.push(ProbePoint { t: time, segment: SegmentSpec::Interval { a, b: a + w } });
            }
            w = ((w as f64 * 1.6).round() as u32).max(w + 2) & !1;
        }
    }
    ProbeSchedule::new(pts)
}

/// Scan the measurement rate for the straightest steady-state collapse,
/// then scan Y/T against the early-time Bell decay. One Bell ensemble is
/// reused across the whole Y/T grid: the rescaling is analysis-time only.
pub fn calibrate(config: &CalibrateConfig) -> Result<fit::CalibrationResult> {
    let win = FitWindow::default();
    let mut steady_by_p = Vec::new();
    for (pi, &p) in config.p_grid.iter().enumerate() {
        let params = RunParams { kind: LayoutKind::PbcProduct, l: config.l, t: config.t_steady, p };
        let schedule = steady_schedule(config.l, config.t_steady);
        let series = harness::run_ensemble(
            &params,
            &schedule,
            config.n_steady,
            config.seed.wrapping_add(pi as u64 + 1),
            config.workers,
        )?;
        let rows = series_to_rows(&LayoutKind::PbcProduct, 1.0, &series)?;
        let pts: Vec<SeriesPoint> = rows
            .iter()
            .filter_map(|r| {
                Some(SeriesPoint {
                    tau: 10.0, // steady state: out of any early-time window
                    abscissa: r.xi?,
                    value: r.mean_nats,
                    stderr: r.stderr_nats,
                    sep: r.sep,
                })
            })
            .collect();
        steady_by_p.push((p, pts));
    }

    let p_best = steady_by_p
        .iter()
        .map(|(p, pts)| {
            let r2 = fit::fit_log_linear(pts, &win).map(|f| f.r_squared).unwrap_or(f64::MIN);
            (*p, r2)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
        .unwrap_or(DEFAULT_P_C);

    let bell_params =
        RunParams { kind: LayoutKind::PbcBell, l: config.l, t: config.t_bell, p: p_best };
    let bell_schedule = ProbeSchedule::new(
        even_times(config.t_bell, config.t_bell, 1.0)
            .into_iter()
            .map(|t| ProbePoint { t, segment: SegmentSpec::Bell })
            .collect(),
    );
    let bell = harness::run_ensemble(
        &bell_params,
        &bell_schedule,
        config.n_bell,
        config.seed.wrapping_add(0x5eed),
        config.workers,
    )?;
    let bell_by_t: Vec<(u32, f64, f64)> =
        bell.records.iter().map(|r| (r.t, r.mean_nats(), r.stderr_nats())).collect();

    fit::calibrate(&steady_by_p, &bell_by_t, &config.yt_grid, config.l, &win)
}

/// Recompute the collapse coordinates of an existing result file under a
/// different Y/T and write it to `out`.
pub fn recollapse(input: &Path, y_over_t: f64, out: &Path) -> Result<()> {
    let (mut meta, rows) = read_result_file(input)?;
    let kind =
        LayoutKind::from_name(&meta.kind).or_else(|_| percolation_effective_kind(&meta.kind))?;
    let new_rows: Vec<CsvRow> = rows
        .iter()
        .map(|r| {
            let seg: SegmentSpec = r.segment.parse()?;
            let c = collapse_coordinates(&kind, meta.l, y_over_t, r.t, &seg)?;
            Ok(CsvRow { tau: c.tau, sep: c.sep, xi: c.xi, eta: c.eta, ..r.clone() })
        })
        .collect::<Result<_>>()?;
    meta.y_over_t = y_over_t;
    write_result_file(out, &meta, &new_rows)
}
