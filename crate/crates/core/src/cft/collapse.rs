//! Collapse abscissas and cross ratios built from the conformal maps.
//!
//! All quantities are magnitudes: the correlation-function ratios the
//! observables collapse onto are positive for boundary-ordered probe points,
//! so only |w_i - w_j| distances enter. Near-corner differences on the side
//! and top edges are evaluated through cancellation-free identities, which
//! matters at small aspect ratio where `1 - m` is far below float epsilon.

use super::elliptic::sn_cn_dn_from_complement;
use super::map::{
    proj_diff, rect_to_lhp, strip_map, BoundaryZ, ConformalFrame,
};
use crate::error::{Error, Result};

fn is_corner(frame: &ConformalFrame, x: f64) -> bool {
    (x.abs() - frame.l / 2.0).abs() < 1e-9 * frame.l
}

/// |w(a) - w(b)| with edge-aware stable evaluation.
fn abs_diff(frame: &ConformalFrame, a: BoundaryZ, b: BoundaryZ) -> Result<f64> {
    use BoundaryZ::*;
    // Side point against the bottom corner of the same side: both images are
    // ~m^(-1/2) apart by O(mc), so subtract through dn identities instead.
    let side_corner = |side_y: f64, right: bool, corner_x: f64| -> Option<f64> {
        let corner_right = corner_x > 0.0;
        if corner_right != right || !is_corner(frame, corner_x) {
            return None;
        }
        let v = frame.lambda * (frame.y - side_y);
        let (_s, c, d) = sn_cn_dn_from_complement(v, frame.m);
        let rm = frame.m.sqrt();
        // 1/d - 1/rm with d^2 = 1 - mc s^2, rm^2 = m = 1 - mc:
        // (rm - d)/(rm d) = -mc c^2 / (rm d (rm + d)).
        Some(frame.mc * c * c / (rm * d * (rm + d)))
    };
    // Top point against a top corner. Toward the corner (sn of matching
    // sign) the plain difference cancels; there |1 -+ sn| = cn^2/(1 +- sn)
    // with a denominator near 2. Away from it the plain form is exact.
    let top_corner = |x: f64, corner_x: f64| -> Option<f64> {
        if !is_corner(frame, corner_x) {
            return None;
        }
        let (s, c, _) = sn_cn_dn_from_complement(frame.lambda * x, frame.mc);
        let toward = if corner_x > 0.0 { s } else { -s };
        Some(if toward > 0.0 { c * c / (1.0 + toward) } else { 1.0 - toward })
    };

    let special = match (a, b) {
        (Right { y }, Bottom { x }) | (Bottom { x }, Right { y }) => side_corner(y, true, x),
        (Left { y }, Bottom { x }) | (Bottom { x }, Left { y }) => side_corner(y, false, x),
        (Top { x }, Top { x: cx }) if is_corner(frame, cx) && !is_corner(frame, x) => {
            top_corner(x, cx)
        }
        (Top { x: cx }, Top { x }) if is_corner(frame, cx) && !is_corner(frame, x) => {
            top_corner(x, cx)
        }
        _ => None,
    };
    if let Some(d) = special {
        return Ok(d);
    }
    let (pa, pb) = (rect_to_lhp(frame, a)?, rect_to_lhp(frame, b)?);
    let (_, da) = pa.proj();
    let (_, db) = pb.proj();
    Ok((proj_diff(&pa, &pb) / (da * db)).abs())
}

/// Three-point collapse abscissa for a bipartition probe:
/// `xi = |dw/dz|_probe * |w_ab| / (|w_a - w_probe| |w_probe - w_b|)`.
pub fn xi_three_point(
    frame: &ConformalFrame,
    corner_a: usize,
    probe: BoundaryZ,
    corner_b: usize,
) -> Result<f64> {
    let (ca, cb) = (frame.corner(corner_a), frame.corner(corner_b));
    let img = rect_to_lhp(frame, probe)?;
    let dab = abs_diff(frame, ca, cb)?;
    let da5 = abs_diff(frame, ca, probe)?;
    let d5b = abs_diff(frame, probe, cb)?;
    if da5 == 0.0 || d5b == 0.0 {
        return Err(Error::DegenerateProbe("probe coincides with a corner".into()));
    }
    Ok(img.dw_dz * dab / (da5 * d5b))
}

/// Two-point collapse abscissa for an interval probe on the rectangle:
/// `xi2 = |dw/dz|_5 |dw/dz|_6 / (w_5 - w_6)^2`.
pub fn xi_two_point(frame: &ConformalFrame, p5: BoundaryZ, p6: BoundaryZ) -> Result<f64> {
    let (i5, i6) = (rect_to_lhp(frame, p5)?, rect_to_lhp(frame, p6)?);
    let d56 = abs_diff(frame, p5, p6)?;
    if d56 == 0.0 {
        return Err(Error::DegenerateProbe("interval endpoints coincide".into()));
    }
    Ok(i5.dw_dz * i6.dw_dz / (d56 * d56))
}

/// Cross ratio `eta = |w_pq w_rs| / |w_pr w_qs|` of four boundary points.
pub fn eta_rect(frame: &ConformalFrame, pts: [BoundaryZ; 4]) -> Result<f64> {
    let [p, q, r, s] = pts;
    let dpq = abs_diff(frame, p, q)?;
    let drs = abs_diff(frame, r, s)?;
    let dpr = abs_diff(frame, p, r)?;
    let dqs = abs_diff(frame, q, s)?;
    if dpr == 0.0 || dqs == 0.0 {
        return Err(Error::DegenerateProbe("coincident cross-ratio points".into()));
    }
    Ok(dpq * drs / (dpr * dqs))
}

/// Cross ratio of four points on the infinite-strip boundary, evaluated in
/// log space so far-separated intervals do not overflow.
pub fn eta_strip(pts: [(f64, bool); 4], y_total: f64) -> Result<f64> {
    let images: Vec<_> = pts
        .iter()
        .map(|&(x, top)| strip_map(x, top, y_total))
        .collect::<Result<_>>()?;
    // log |w_a - w_b| via the larger magnitude.
    let logdiff = |a: usize, b: usize| -> Result<f64> {
        let (pa, pb) = (images[a], images[b]);
        let m = pa.log_mag.max(pb.log_mag);
        let val = pa.sign * (pa.log_mag - m).exp() - pb.sign * (pb.log_mag - m).exp();
        if val == 0.0 {
            return Err(Error::DegenerateProbe("coincident strip points".into()));
        }
        Ok(m + val.abs().ln())
    };
    let ln_eta = logdiff(0, 1)? + logdiff(2, 3)? - logdiff(0, 2)? - logdiff(1, 3)?;
    Ok(ln_eta.exp())
}

/// Two-point abscissa on the semi-infinite cylinder. The tan-map derivative
/// and image difference cancel analytically to
/// `xi2 = (pi/L)^2 / sin^2(pi (x1 - x2) / L)`.
pub fn xi_two_point_cylinder(l: f64, x1: f64, x2: f64) -> Result<f64> {
    if !(l > 0.0) {
        return Err(Error::Domain("circumference must be positive".into()));
    }
    let s = (std::f64::consts::PI * (x1 - x2) / l).sin();
    if s == 0.0 {
        return Err(Error::DegenerateProbe("cylinder interval endpoints coincide".into()));
    }
    Ok((std::f64::consts::PI / l).powi(2) / (s * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cft::map::cylinder_map;

    #[test]
    fn adjacent_intervals_push_eta_to_one() {
        // Corner-anchored intervals separated by one lattice unit: eta -> 1
        // as the probes coincide, with 1 - eta ~ 2 lambda set by the lattice
        // spacing (0.9877 at tau = 1, L = 512, approaching 1 as L grows).
        let mut last = 0.0;
        for &l in &[512.0, 2048.0, 8192.0] {
            let frame = ConformalFrame::new(l, l).unwrap();
            let eta = eta_rect(
                &frame,
                [
                    frame.corner(1),
                    BoundaryZ::Top { x: -0.5 },
                    BoundaryZ::Top { x: 0.5 },
                    frame.corner(4),
                ],
            )
            .unwrap();
            assert!(eta < 1.0 && eta > last, "eta = {eta} at L = {l}");
            assert!(1.0 - eta < 2.2 * frame.lambda, "eta = {eta} at L = {l}");
            last = eta;
        }
        assert!(last > 0.998);
    }

    #[test]
    fn shallow_rectangle_xi_independent_of_probe_position() {
        // tau -> 0: corners are infinitely far, so ln xi barely moves with x5.
        let l = 4096.0;
        let frame = ConformalFrame::new(l, 0.05 * l).unwrap();
        let xi_mid = xi_three_point(&frame, 1, BoundaryZ::Top { x: 0.0 }, 4).unwrap();
        for &x in &[-800.0, -200.0, 300.0, 900.0] {
            let xi = xi_three_point(&frame, 1, BoundaryZ::Top { x }, 4).unwrap();
            let rel = (xi.ln() - xi_mid.ln()).abs() / xi_mid.ln().abs();
            assert!(rel < 0.01, "x={x}: ln xi varies by {rel}");
        }
    }

    #[test]
    fn xi_three_point_rejects_corner_probe() {
        let frame = ConformalFrame::new(64.0, 32.0).unwrap();
        let r = xi_three_point(&frame, 1, BoundaryZ::Top { x: -32.0 }, 4);
        assert!(r.is_err());
    }

    #[test]
    fn cross_ratio_is_invariant_under_fractional_linear_maps() {
        // eta computed from raw w values agrees with eta after w -> (aw+b)/(cw+d).
        let frame = ConformalFrame::new(96.0, 64.0).unwrap();
        let pts = [
            BoundaryZ::Top { x: -40.0 },
            BoundaryZ::Top { x: -10.0 },
            BoundaryZ::Top { x: 15.0 },
            BoundaryZ::Top { x: 44.0 },
        ];
        let eta = eta_rect(&frame, pts).unwrap();
        let ws: Vec<f64> = pts.iter().map(|&p| rect_to_lhp(&frame, p).unwrap().w).collect();
        let moeb = |w: f64| (2.0 * w + 1.0) / (0.3 * w + 3.0);
        let tw: Vec<f64> = ws.iter().map(|&w| moeb(w)).collect();
        let cross = |w: &[f64]| ((w[0] - w[1]) * (w[2] - w[3]) / ((w[0] - w[2]) * (w[1] - w[3]))).abs();
        assert!((cross(&tw) - eta).abs() <= 1e-10 * eta, "{} vs {eta}", cross(&tw));
    }

    #[test]
    fn mixed_edge_cross_ratio_handles_bottom_midpoint_pole() {
        // One interval on the top edge, one straddling the bottom midpoint,
        // where w itself diverges; the projective path must stay finite.
        let frame = ConformalFrame::new(64.0, 48.0).unwrap();
        let eta = eta_rect(
            &frame,
            [
                BoundaryZ::Top { x: -10.0 },
                BoundaryZ::Top { x: -2.0 },
                BoundaryZ::Bottom { x: -1.0 },
                BoundaryZ::Bottom { x: 6.0 },
            ],
        )
        .unwrap();
        assert!(eta.is_finite() && eta > 0.0, "eta = {eta}");
    }

    #[test]
    fn strip_cross_ratio_matches_sinh_form() {
        // Two size-2 intervals at distance 2x on the top edge:
        // eta = sinh^2(pi/Y) / sinh^2(pi (1+x) / Y).
        let y = 9.0;
        for &x in &[4.0f64, 10.0, 30.0] {
            let pts = [
                (-x - 2.0, true),
                (-x, true),
                (x, true),
                (x + 2.0, true),
            ];
            let eta = eta_strip(pts, y).unwrap();
            let a = std::f64::consts::PI / y;
            let want = (a.sinh() / (a * (x + 1.0)).sinh()).powi(2);
            assert!((eta - want).abs() <= 1e-9 * want, "x={x}: {eta} vs {want}");
        }
    }

    #[test]
    fn cylinder_xi2_agrees_with_composed_route() {
        // Independent route: explicit tan images and derivatives.
        let l = 256.0;
        let (x1, x2) = (-32.0, 32.0); // separation L/4
        let got = xi_two_point_cylinder(l, x1, x2).unwrap();
        let p1 = cylinder_map(x1, l).unwrap();
        let p2 = cylinder_map(x2, l).unwrap();
        let composed = p1.dw_dz * p2.dw_dz / (p1.w() - p2.w()).powi(2);
        assert!((got - composed).abs() <= 1e-12 * composed);
        // And the simplified analytic value at x12 = L/4.
        let want = (std::f64::consts::PI / l).powi(2)
            / (std::f64::consts::PI * (x1 - x2) / l).sin().powi(2);
        assert!((got - want).abs() <= 1e-15 * want);
    }

    #[test]
    fn afaa_side_probe_abscissa_is_stable_at_small_tau() {
        // At tau = 0.05, w-images of side points and bottom corners agree to
        // ~1e-13 in absolute value; the stable path must still produce the
        // smooth closed form xi = 2 lambda sqrt(m) sc(v | mc).
        let l = 2048.0;
        let frame = ConformalFrame::new(l, 0.05 * l).unwrap();
        for &y in &[frame.y * 0.25, frame.y * 0.5, frame.y * 0.75] {
            let xi = xi_three_point(&frame, 2, BoundaryZ::Left { y }, 3).unwrap();
            let v = frame.lambda * (frame.y - y);
            let (s, c, _) = sn_cn_dn_from_complement(v, frame.m);
            let want = 2.0 * frame.lambda * frame.m.sqrt() * s / c;
            assert!((xi - want).abs() <= 1e-9 * want, "y={y}: {xi} vs {want}");
        }
    }
}
