//! Conformal maps from circuit spacetime geometries to the half plane.
//!
//! The rectangle `[-L/2, L/2] x [0, Y]` maps to the lower half plane through
//! `w(z) = sn(lambda (z - iY) | m)`, with the elliptic parameter chosen so
//! the aspect ratios match. Boundary points are also carried as projective
//! pairs `(num, den)` so that cross ratios stay finite arithmetic even where
//! `w` itself diverges (the bottom-edge midpoint maps to infinity).

use super::elliptic::{
    ellint_k, ellint_k_from_complement, sn_cn_dn_from_complement, solve_m, EllipticModulus,
};
use crate::error::{Error, Result};

/// A point on the rectangle boundary, tagged by edge so containment is exact.
/// `x` runs over [-L/2, L/2]; `y` over [0, Y] with the physical qubits at
/// y = Y (the top edge).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryZ {
    Top { x: f64 },
    Bottom { x: f64 },
    Left { y: f64 },
    Right { y: f64 },
}

/// Elliptic data for one rectangle aspect ratio.
#[derive(Clone, Copy, Debug)]
pub struct ConformalFrame {
    pub l: f64,
    pub y: f64,
    pub tau: f64,
    pub m: f64,
    pub mc: f64,
    /// K(m)
    pub k_m: f64,
    /// K(1-m)
    pub k_mc: f64,
    /// Scale 2K(m)/L = K(1-m)/Y.
    pub lambda: f64,
    pub precision_warning: bool,
}

fn k_pair(em: &EllipticModulus) -> (f64, f64) {
    let k_m = if em.m <= em.mc {
        ellint_k(em.m).unwrap()
    } else {
        ellint_k_from_complement(em.mc).unwrap()
    };
    let k_mc = if em.mc <= em.m {
        ellint_k(em.mc).unwrap()
    } else {
        ellint_k_from_complement(em.m).unwrap()
    };
    (k_m, k_mc)
}

impl ConformalFrame {
    /// Frame for a rectangle of width `l` and rescaled depth `y`.
    pub fn new(l: f64, y: f64) -> Result<Self> {
        if !(l > 0.0) || !(y > 0.0) {
            return Err(Error::Domain("rectangle dimensions must be positive".into()));
        }
        let tau = y / l;
        let em = solve_m(tau)?;
        let (k_m, k_mc) = k_pair(&em);
        Ok(ConformalFrame {
            l,
            y,
            tau,
            m: em.m,
            mc: em.mc,
            k_m,
            k_mc,
            lambda: 2.0 * k_m / l,
            precision_warning: em.precision_warning,
        })
    }

    /// Frame for a circuit of `l` qubits after `t` layers, with the
    /// time-rescaling constant `y_over_t` fixed at analysis time.
    pub fn from_circuit(l: usize, t: u32, y_over_t: f64) -> Result<Self> {
        Self::new(l as f64, y_over_t * t as f64)
    }

    /// Rectangle corners; `w` images are -1, -m^(-1/2), +m^(-1/2), +1.
    pub fn corner(&self, idx: usize) -> BoundaryZ {
        let h = self.l / 2.0;
        match idx {
            1 => BoundaryZ::Top { x: -h },
            2 => BoundaryZ::Bottom { x: -h },
            3 => BoundaryZ::Bottom { x: h },
            4 => BoundaryZ::Top { x: h },
            _ => panic!("corner index must be 1..=4"),
        }
    }
}

/// Image of a boundary point under the rectangle-to-half-plane map.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPointImage {
    /// Real half-plane coordinate (may be +/-inf at the bottom midpoint).
    pub w: f64,
    /// Magnitude of the map derivative along the boundary arc.
    pub dw_dz: f64,
    num: f64,
    den: f64,
}

impl BoundaryPointImage {
    /// Projective representation (num, den) with w = num/den.
    pub fn proj(&self) -> (f64, f64) {
        (self.num, self.den)
    }
}

/// Signed difference of two projective boundary images, up to the (shared,
/// cancelling) product of denominators: `num_a den_b - num_b den_a`.
pub(crate) fn proj_diff(a: &BoundaryPointImage, b: &BoundaryPointImage) -> f64 {
    a.num * b.den - b.num * a.den
}

/// Map a rectangle boundary point to the half plane.
pub fn rect_to_lhp(frame: &ConformalFrame, z: BoundaryZ) -> Result<BoundaryPointImage> {
    let h = frame.l / 2.0;
    let eps = 1e-9 * frame.l.max(frame.y);
    let lam = frame.lambda;
    match z {
        BoundaryZ::Top { x } => {
            if x.abs() > h + eps {
                return Err(Error::Domain(format!("top-edge x = {x} outside [-L/2, L/2]")));
            }
            let (sn, cn, dn) = sn_cn_dn_from_complement(lam * x, frame.mc);
            Ok(BoundaryPointImage { w: sn, dw_dz: (lam * cn * dn).abs(), num: sn, den: 1.0 })
        }
        BoundaryZ::Bottom { x } => {
            if x.abs() > h + eps {
                return Err(Error::Domain(format!("bottom-edge x = {x} outside [-L/2, L/2]")));
            }
            // sn(u - iK') = 1/(sqrt(m) sn(u)).
            let (sn, cn, dn) = sn_cn_dn_from_complement(lam * x, frame.mc);
            let rm = frame.m.sqrt();
            let den = rm * sn;
            let dlen = if sn == 0.0 { f64::INFINITY } else { (lam * cn * dn / (rm * sn * sn)).abs() };
            Ok(BoundaryPointImage { w: 1.0 / den, dw_dz: dlen, num: 1.0, den })
        }
        BoundaryZ::Left { y } | BoundaryZ::Right { y } => {
            if !(-eps..=frame.y + eps).contains(&y) {
                return Err(Error::Domain(format!("side-edge y = {y} outside [0, Y]")));
            }
            // sn(+-K - iv | m) = +-dn(v|mc) / (cn(v|mc)^2 + m sn(v|mc)^2),
            // evaluated through the real Landen recursion at parameter mc.
            let v = lam * (frame.y - y);
            let (s, c, d) = sn_cn_dn_from_complement(v, frame.m);
            let den = c * c + frame.m * s * s;
            let mag = d / den;
            let dlen = (lam * frame.mc * s * c * d * d / (den * den)).abs();
            let w = if matches!(z, BoundaryZ::Right { .. }) { mag } else { -mag };
            Ok(BoundaryPointImage { w, dw_dz: dlen, num: w, den: 1.0 })
        }
    }
}

/// Infinite-strip map `w(z) = -exp(pi z / Y)`: the upper edge (y = Y) lands
/// on the positive real axis, the lower edge on the negative one. Points are
/// kept as sign and log-magnitude so far-separated probes stay representable.
#[derive(Clone, Copy, Debug)]
pub struct StripPointImage {
    pub sign: f64,
    /// ln |w| = pi x / Y.
    pub log_mag: f64,
}

pub fn strip_map(x: f64, top: bool, y_total: f64) -> Result<StripPointImage> {
    if !(y_total > 0.0) {
        return Err(Error::Domain("strip width must be positive".into()));
    }
    let log_mag = std::f64::consts::PI * x / y_total;
    Ok(StripPointImage { sign: if top { 1.0 } else { -1.0 }, log_mag })
}

impl StripPointImage {
    pub fn w(&self) -> f64 {
        self.sign * self.log_mag.exp()
    }
}

/// Semi-infinite cylinder (periodic steady state) map `w(z) = tan(pi z/L)`,
/// carried projectively as (sin, cos).
#[derive(Clone, Copy, Debug)]
pub struct CylinderPointImage {
    pub sin: f64,
    pub cos: f64,
    /// |dw/dz| = (pi/L) / cos^2.
    pub dw_dz: f64,
}

pub fn cylinder_map(x: f64, l: f64) -> Result<CylinderPointImage> {
    if !(l > 0.0) {
        return Err(Error::Domain("circumference must be positive".into()));
    }
    let a = std::f64::consts::PI * x / l;
    let (s, c) = a.sin_cos();
    let dw = if c == 0.0 { f64::INFINITY } else { (std::f64::consts::PI / l) / (c * c) };
    Ok(CylinderPointImage { sin: s, cos: c, dw_dz: dw })
}

impl CylinderPointImage {
    pub fn w(&self) -> f64 {
        self.sin / self.cos
    }
}
