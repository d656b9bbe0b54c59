//! Exponent extraction, collapse-quality scoring, and the critical-point /
//! time-rescaling calibration procedure.
//!
//! Every fitter is a weighted least-squares line in transformed coordinates.
//! Weights are 1/stderr^2 when standard errors are present, 1 otherwise.
//! Entropies enter in nats throughout, so fitted exponents are directly
//! comparable across data sources.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single ensemble-mean observation ready for fitting.
#[derive(Clone, Copy, Debug)]
pub struct SeriesPoint {
    /// Aspect ratio of the probe time (analysis constant applied).
    pub tau: f64,
    /// Collapse abscissa: xi, eta, or tau itself depending on the fit.
    pub abscissa: f64,
    /// Ensemble mean in nats.
    pub value: f64,
    /// Standard error in nats; 0 when unknown.
    pub stderr: f64,
    /// Minimal lattice separation of the probe (distance to nearest corner
    /// or between interval endpoints), for the short-distance window.
    pub sep: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub offset: f64,
    pub covariance: [[f64; 2]; 2],
    pub r_squared: f64,
    /// Abscissa range actually used (after windowing), in the fit's
    /// transformed coordinate.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl FitResult {
    pub fn exponent_stderr(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Weighted least squares of y = offset + exponent * u.
fn wls(pts: &[(f64, f64, f64)]) -> Result<FitResult> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!("need >= 3 points, have {n}")));
    }
    let has_err = pts.iter().all(|&(_, _, s)| s > 0.0);
    let weights: Vec<f64> =
        pts.iter().map(|&(_, _, s)| if has_err { 1.0 / (s * s) } else { 1.0 }).collect();
    let sw: f64 = weights.iter().sum();
    let su: f64 = pts.iter().zip(&weights).map(|(&(u, _, _), w)| w * u).sum();
    let sy: f64 = pts.iter().zip(&weights).map(|(&(_, y, _), w)| w * y).sum();
    let suu: f64 = pts.iter().zip(&weights).map(|(&(u, _, _), w)| w * u * u).sum();
    let suy: f64 = pts.iter().zip(&weights).map(|(&(u, y, _), w)| w * u * y).sum();
    let det = sw * suu - su * su;
    let spread = suu / sw - (su / sw) * (su / sw);
    if spread <= 1e-12 * (suu / sw).max(1e-300) {
        return Err(Error::Fit("degenerate abscissa spread".into()));
    }
    let slope = (sw * suy - su * sy) / det;
    let offset = (suu * sy - su * suy) / det;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let ybar = sy / sw;
    for (&(u, y, _), w) in pts.iter().zip(&weights) {
        let r = y - offset - slope * u;
        ss_res += w * r * r;
        ss_tot += w * (y - ybar) * (y - ybar);
    }
    // Covariance of (offset, slope). With supplied errors this is the usual
    // (X^T W X)^-1; otherwise scale by the residual variance.
    let scale = if has_err { 1.0 } else { ss_res / (n as f64 - 2.0).max(1.0) };
    let cov = [
        [scale * suu / det, -scale * su / det],
        [-scale * su / det, scale * sw / det],
    ];
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(u, _, _) in pts {
        lo = lo.min(u);
        hi = hi.max(u);
    }
    Ok(FitResult {
        exponent: slope,
        offset,
        covariance: cov,
        r_squared,
        window: (lo, hi),
        n_points: n,
    })
}

/// Window controls shared by the fitters. Field meanings depend on the fit;
/// zeros mean "use the default".
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FitWindow {
    /// Probes closer than this many lattice units to a corner (or to each
    /// other) are excluded from log-abscissa fits.
    pub min_sep: f64,
    /// Data below this aspect ratio are excluded (elliptic-parameter
    /// precision floor).
    pub min_tau: f64,
    /// Upper edge for eta -> 0 fits; lower edge 1 - x for eta -> 1 fits.
    pub eta_window: f64,
    /// tau range for the Bell-entropy fits.
    pub tau_range: (f64, f64),
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { min_sep: 4.0, min_tau: 0.03, eta_window: 0.1, tau_range: (0.0, 0.3) }
    }
}

/// S = -exponent * ln(xi) + const. The fitted `exponent` is the boundary
/// scaling dimension h of the collapse.
pub fn fit_log_linear(pts: &[SeriesPoint], win: &FitWindow) -> Result<FitResult> {
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| p.abscissa > 0.0 && p.sep >= win.min_sep && p.tau >= win.min_tau)
        .map(|p| (-p.abscissa.ln(), p.value, p.stderr))
        .collect();
    wls(&data)
}

/// ln I = exponent * ln(eta) + const on the eta -> 0 branch.
pub fn fit_power_law(pts: &[SeriesPoint], win: &FitWindow) -> Result<FitResult> {
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| {
            p.abscissa > 0.0 && p.abscissa < win.eta_window && p.value > 0.0 && p.tau >= win.min_tau
        })
        .map(|p| (p.abscissa.ln(), p.value.ln(), p.stderr / p.value))
        .collect();
    wls(&data)
}

/// Two-term variant of the eta -> 0 fit: I = A eta^Delta + B eta, scanned
/// over Delta. Returns (Delta, A, B).
pub fn fit_power_law_two_term(pts: &[SeriesPoint], win: &FitWindow) -> Result<(f64, f64, f64)> {
    let data: Vec<(f64, f64)> = pts
        .iter()
        .filter(|p| p.abscissa > 0.0 && p.abscissa < win.eta_window && p.value > 0.0)
        .map(|p| (p.abscissa, p.value))
        .collect();
    if data.len() < 4 {
        return Err(Error::Fit("not enough points for a two-term fit".into()));
    }
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    let mut delta = 0.1;
    while delta <= 3.0 {
        // Linear LS for (A, B) given Delta.
        let (mut s11, mut s12, mut s22, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(eta, i) in &data {
            let f1 = eta.powf(delta);
            let f2 = eta;
            s11 += f1 * f1;
            s12 += f1 * f2;
            s22 += f2 * f2;
            sy1 += i * f1;
            sy2 += i * f2;
        }
        let det = s11 * s22 - s12 * s12;
        if det.abs() > 1e-30 {
            let a = (sy1 * s22 - sy2 * s12) / det;
            let b = (s11 * sy2 - s12 * sy1) / det;
            let sse: f64 = data
                .iter()
                .map(|&(eta, i)| {
                    let r = i - a * eta.powf(delta) - b * eta;
                    r * r
                })
                .sum();
            if sse < best.0 {
                best = (sse, delta, a, b);
            }
        }
        delta += 0.01;
    }
    Ok((best.1, best.2, best.3))
}

/// I = exponent * (-ln(1 - eta)) + const on the eta -> 1 branch; the slope
/// estimates twice the leading boundary dimension.
pub fn fit_eta_to_one(pts: &[SeriesPoint], win: &FitWindow) -> Result<FitResult> {
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| {
            p.abscissa > 0.0
                && 1.0 - p.abscissa > 0.0
                && 1.0 - p.abscissa < win.eta_window
                && p.tau >= win.min_tau
        })
        .map(|p| (-(1.0 - p.abscissa).ln(), p.value, p.stderr))
        .collect();
    wls(&data)
}

/// Early-time Bell-entropy decay S = exponent * (pi / tau) + const.
/// `win.tau_range` bounds the usable window; the default lower edge should
/// be h pi / L, below which the entropy saturates at L ln 2.
pub fn fit_bell_early(pts: &[SeriesPoint], win: &FitWindow) -> Result<FitResult> {
    let (lo, hi) = win.tau_range;
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| p.tau >= lo && p.tau <= hi)
        .map(|p| (std::f64::consts::PI / p.tau, p.value, p.stderr))
        .collect();
    wls(&data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BellLateMode {
    Open,
    Periodic,
}

/// Late-time Bell-entropy decay ln S = -k pi tau (open) or -k 2 pi tau
/// (periodic); the returned exponent is k.
pub fn fit_bell_late(pts: &[SeriesPoint], mode: BellLateMode, win: &FitWindow) -> Result<FitResult> {
    let lo = if win.tau_range.1 > 1.0 { win.tau_range.0 } else { 1.0 };
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| p.tau > lo && p.value > 0.0)
        .map(|p| (p.tau, p.value.ln(), p.stderr / p.value))
        .collect();
    let mut fit = wls(&data)?;
    let denom = match mode {
        BellLateMode::Open => std::f64::consts::PI,
        BellLateMode::Periodic => 2.0 * std::f64::consts::PI,
    };
    fit.exponent = -fit.exponent / denom;
    for row in fit.covariance.iter_mut() {
        for v in row.iter_mut() {
            *v /= denom * denom;
        }
    }
    Ok(fit)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub p_c: f64,
    pub p_c_err: f64,
    pub y_over_t: f64,
    pub y_over_t_err: f64,
    /// Collapse slope at the chosen critical point.
    pub h_at_pc: f64,
    /// (p, r^2 of the steady-state collapse) per grid point.
    pub p_objective: Vec<(f64, f64)>,
    /// (Y/T, weighted residual of the early-time Bell fit) per grid point.
    pub yt_objective: Vec<(f64, f64)>,
    /// Set when either optimum landed on its grid edge.
    pub edge_flag: bool,
}

/// Refine a grid extremum with a parabola through the three points around
/// it. Returns (argbest, half-step uncertainty estimate).
fn parabola_vertex(grid: &[(f64, f64)], i: usize, maximize: bool) -> (f64, f64) {
    let step = if grid.len() > 1 { grid[1].0 - grid[0].0 } else { 0.0 };
    if i == 0 || i + 1 >= grid.len() {
        return (grid[i].0, step);
    }
    let (ym, y0, yp) = (grid[i - 1].1, grid[i].1, grid[i + 1].1);
    let curv = ym - 2.0 * y0 + yp;
    let ok = if maximize { curv < 0.0 } else { curv > 0.0 };
    if !ok || curv.abs() < 1e-300 {
        return (grid[i].0, step);
    }
    let shift = 0.5 * (ym - yp) / curv;
    (grid[i].0 + shift.clamp(-1.0, 1.0) * step, step)
}

/// Two-step calibration: pick the measurement rate whose steady-state
/// collapse is straightest, then the time rescaling that matches the
/// early-time Bell decay with the slope found in step one.
///
/// `steady_by_p`: per grid rate, the (xi2, S) steady-state points.
/// `bell_by_t`: the Bell entropy against layer index t (rescaling-free).
pub fn calibrate(
    steady_by_p: &[(f64, Vec<SeriesPoint>)],
    bell_by_t: &[(u32, f64, f64)],
    yt_grid: &[f64],
    l: usize,
    win: &FitWindow,
) -> Result<CalibrationResult> {
    if steady_by_p.len() < 3 || yt_grid.len() < 3 {
        return Err(Error::Fit("calibration grids need >= 3 points".into()));
    }
    let mut p_objective = Vec::new();
    let mut fits = Vec::new();
    for (p, pts) in steady_by_p {
        let fit = fit_log_linear(pts, win)?;
        p_objective.push((*p, fit.r_squared));
        fits.push(fit);
    }
    let i_best = p_objective
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap();
    let (p_c, p_c_err) = parabola_vertex(&p_objective, i_best, true);
    let h = fits[i_best].exponent;
    let mut edge_flag = i_best == 0 || i_best + 1 == p_objective.len();

    // Step 2: Y/T from the early-time Bell decay with slope pinned to h.
    let tau0 = h * std::f64::consts::PI / l as f64;
    let mut yt_objective = Vec::new();
    for &yt in yt_grid {
        let mut sse = 0.0;
        let mut used = 0usize;
        for &(t, s, err) in bell_by_t {
            let tau = yt * t as f64 / l as f64;
            if tau < tau0 || tau > 0.3 {
                continue;
            }
            let w = if err > 0.0 { 1.0 / (err * err) } else { 1.0 };
            let r = s - h * std::f64::consts::PI / tau;
            sse += w * r * r;
            used += 1;
        }
        if used < 3 {
            return Err(Error::Fit(format!("Y/T = {yt}: too few points in the tau window")));
        }
        yt_objective.push((yt, sse / used as f64));
    }
    let j_best = yt_objective
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(j, _)| j)
        .unwrap();
    let (y_over_t, y_over_t_err) = parabola_vertex(&yt_objective, j_best, false);
    edge_flag |= j_best == 0 || j_best + 1 == yt_objective.len();

    Ok(CalibrationResult {
        p_c,
        p_c_err,
        y_over_t,
        y_over_t_err,
        h_at_pc: h,
        p_objective,
        yt_objective,
        edge_flag,
    })
}

/// One ensemble-mean mutual-information observation for the locality test.
#[derive(Clone, Copy, Debug)]
pub struct LightconePoint {
    /// Separation between the intervals, lattice units.
    pub r: f64,
    /// Circuit depth in layers.
    pub t_layers: f64,
    /// Mean mutual information, nats.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelComparison {
    pub aic_cross_ratio: f64,
    pub aic_lightcone: f64,
    /// Positive when the cross-ratio power law is preferred.
    pub delta_aic: f64,
    pub cross_ratio_exponent: f64,
}

/// Compare `ln I = a + h ln eta(r, Y)` (2 parameters) against the best
/// exponential-lightcone form `ln I = b - C (r - v t)` (3 parameters,
/// linear in (1, r, t)) by AIC over the same observations.
pub fn compare_lightcone_models(
    pts: &[LightconePoint],
    y_over_t: f64,
) -> Result<ModelComparison> {
    let data: Vec<(f64, f64, f64)> = pts
        .iter()
        .filter(|p| p.value > 0.0)
        .map(|p| (p.r, p.t_layers, p.value.ln()))
        .collect();
    let n = data.len();
    if n < 5 {
        return Err(Error::Fit("lightcone comparison needs >= 5 positive means".into()));
    }

    // Model 1: cross-ratio power law through the strip map.
    let mut m1: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for &(r, t, lni) in &data {
        let y = y_over_t * t;
        let x = r / 2.0;
        let a = std::f64::consts::PI / y;
        let eta = (a.sinh() / ((x + 1.0) * a).sinh()).powi(2);
        m1.push((eta.ln(), lni, 0.0));
    }
    let f1 = wls(&m1)?;
    let sse1: f64 = m1.iter().map(|&(u, y, _)| (y - f1.offset - f1.exponent * u).powi(2)).sum();
    let aic1 = n as f64 * (sse1 / n as f64).max(1e-300).ln() + 2.0 * 2.0;

    // Model 2: ln I = b0 + b1 r + b2 t (covers every B exp(-C (r - v t))).
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for &(r, t, lni) in &data {
        let row = [1.0, r, t];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * lni;
        }
    }
    let beta = solve3(ata, aty).ok_or_else(|| Error::Fit("singular lightcone design".into()))?;
    let sse2: f64 = data
        .iter()
        .map(|&(r, t, lni)| (lni - beta[0] - beta[1] * r - beta[2] * t).powi(2))
        .sum();
    let aic2 = n as f64 * (sse2 / n as f64).max(1e-300).ln() + 2.0 * 3.0;

    Ok(ModelComparison {
        aic_cross_ratio: aic1,
        aic_lightcone: aic2,
        delta_aic: aic2 - aic1,
        cross_ratio_exponent: f1.exponent,
    })
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}
