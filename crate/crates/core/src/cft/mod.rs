//! Elliptic special functions and the conformal maps that turn circuit
//! coordinates into half-plane collapse coordinates and cross ratios.

mod collapse;
mod elliptic;
mod map;

pub use collapse::{
    eta_rect, eta_strip, xi_three_point, xi_two_point, xi_two_point_cylinder,
};
pub use elliptic::{
    ellint_k, ellint_k_from_complement, jacobi_sn, sn_cn_dn_from_complement, solve_m,
    EllipticModulus,
};
pub use map::{
    cylinder_map, rect_to_lhp, strip_map, BoundaryPointImage, BoundaryZ, ConformalFrame,
    CylinderPointImage, StripPointImage,
};
