//! Complete elliptic integrals and Jacobi elliptic functions, in the
//! parameter convention `m = k^2`.
//!
//! Everything near the `m -> 1` end is computed through the complementary
//! parameter `mc = 1 - m`, which stays representable down to aspect ratios
//! far below the tau ~ 0.03 scale where `1 - m` itself would round to zero.

use crate::error::{Error, Result};

/// Arithmetic-geometric mean of `a0 >= b0 > 0`.
fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let c = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = c;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `K(m)`.
pub fn ellint_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("K(m) needs 0 <= m < 1, got {m}")));
    }
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, (1.0 - m).sqrt()))
}

/// `K(m)` evaluated from the complementary parameter `mc = 1 - m`,
/// preserving precision as `m -> 1`.
pub fn ellint_k_from_complement(mc: f64) -> Result<f64> {
    if !(mc > 0.0 && mc <= 1.0) {
        return Err(Error::Domain(format!("K from complement needs 0 < mc <= 1, got {mc}")));
    }
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, mc.sqrt()))
}

/// Jacobi sn, cn, dn at real argument `u`, specified by the complementary
/// parameter `mc = 1 - m`. Descending Landen recursion; absolute error
/// below ~1e-12 for |u| <= 2K(m).
pub fn sn_cn_dn_from_complement(u: f64, mc: f64) -> (f64, f64, f64) {
    const CA: f64 = 3.0e-9; // error scales as CA^2

    if mc == 0.0 {
        // m = 1 degenerate limit.
        let cn = 1.0 / u.cosh();
        return (u.tanh(), cn, cn);
    }
    debug_assert!(mc > 0.0 && mc <= 1.0);
    if mc == 1.0 {
        return (u.sin(), u.cos(), 1.0);
    }

    let mut emc = mc;
    let mut a = 1.0f64;
    let mut dn = 1.0f64;
    let mut em = [0.0f64; 16];
    let mut en = [0.0f64; 16];
    let mut c = 0.0f64;
    let mut l = 0usize;
    for i in 0..16 {
        l = i;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= CA * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let uu = u * c;
    let mut sn = uu.sin();
    let mut cn = uu.cos();
    if sn != 0.0 {
        let mut aa = cn / sn;
        c *= aa;
        for i in (0..=l).rev() {
            let b = em[i];
            aa *= c;
            c *= dn;
            dn = (en[i] + aa) / (b + aa);
            aa = c / b;
        }
        let inv = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { inv } else { -inv };
        cn = c * sn;
    }
    (sn, cn, dn)
}

/// Jacobi `sn(u | m)` for `m` in [0, 1).
pub fn jacobi_sn(u: f64, m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Domain(format!("sn needs 0 <= m < 1, got {m}")));
    }
    Ok(sn_cn_dn_from_complement(u, 1.0 - m).0)
}

/// Elliptic parameter for a rectangle of aspect ratio tau, carried on both
/// sides of the unit interval so the small one keeps full precision.
#[derive(Clone, Copy, Debug)]
pub struct EllipticModulus {
    pub m: f64,
    pub mc: f64,
    /// Set when tau is below the ~0.03 scale the analyses treat as the
    /// working precision floor.
    pub precision_warning: bool,
}

/// Aspect ratio of the modulus, `tau(m) = K(1-m) / 2K(m)`, evaluated from
/// whichever of (m, mc) is small.
fn tau_of(m: f64, mc: f64) -> f64 {
    if m <= mc {
        // m small: K(m) direct, K(1-m) via complement m.
        ellint_k_from_complement(m).unwrap() / (2.0 * ellint_k(m).unwrap())
    } else {
        ellint_k(mc).unwrap() / (2.0 * ellint_k_from_complement(mc).unwrap())
    }
}

/// Solve `K(1-m) / 2K(m) = tau` for the elliptic parameter.
///
/// The root is bracketed in the small-side parameter (mc below tau = 1/2,
/// m above), seeded from the asymptotic forms
/// `1 - m ~ 16 exp(-pi/(2 tau))` and `m ~ 16 exp(-2 pi tau)` when tau is
/// extreme, then bisected in log space to |tau(m) - tau| < 1e-12 max(1,tau).
pub fn solve_m(tau: f64) -> Result<EllipticModulus> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("aspect ratio must be positive, got {tau}")));
    }
    let tol = 1e-12 * tau.max(1.0);
    if (tau - 0.5).abs() < 1e-15 {
        return Ok(EllipticModulus { m: 0.5, mc: 0.5, precision_warning: false });
    }

    // Solve for the small-side parameter q; tau(q) is monotone increasing in
    // mc (tau < 1/2 branch) and monotone decreasing in m (tau > 1/2 branch).
    let small_is_mc = tau < 0.5;
    let tau_of_q = |q: f64| -> f64 {
        if small_is_mc {
            tau_of(1.0 - q, q)
        } else {
            tau_of(q, 1.0 - q)
        }
    };

    // Asymptotic seeds keep the bracket tight for extreme aspect ratios.
    let seed = if small_is_mc {
        16.0 * (-std::f64::consts::PI / (2.0 * tau)).exp()
    } else {
        16.0 * (-2.0 * std::f64::consts::PI * tau).exp()
    };
    let (mut lo, mut hi) = if (0.05..=5.0).contains(&tau) {
        (1e-30f64, 0.5f64)
    } else {
        ((seed * 1e-4).max(1e-280), (seed * 1e4).min(0.5))
    };
    // Ensure the bracket actually straddles the root.
    let increasing = small_is_mc;
    let below = |q: f64| if increasing { tau_of_q(q) < tau } else { tau_of_q(q) > tau };
    for _ in 0..200 {
        if below(lo) {
            break;
        }
        lo = (lo * lo).max(1e-280);
        if lo <= 1e-280 {
            break;
        }
    }
    if !below(lo) {
        return Err(Error::Domain(format!("aspect ratio {tau} below f64 resolution")));
    }
    while below(hi) && hi < 0.5 {
        hi = (hi * 100.0).min(0.5);
    }

    let (mut llo, mut lhi) = (lo.ln(), hi.ln());
    let mut q = 0.5 * (llo + lhi);
    for _ in 0..300 {
        q = 0.5 * (llo + lhi);
        let t = tau_of_q(q.exp());
        if (t - tau).abs() < tol {
            break;
        }
        let go_up = if increasing { t < tau } else { t > tau };
        if go_up {
            llo = q;
        } else {
            lhi = q;
        }
    }
    let qv = q.exp();
    let (m, mc) = if small_is_mc { (1.0 - qv, qv) } else { (qv, 1.0 - qv) };
    Ok(EllipticModulus { m, mc, precision_warning: tau < 0.03 })
}
