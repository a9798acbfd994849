//! Spherical cap geometry on high-dimensional spheres.
//!
//! Everything here is a pure function of its arguments and works without the
//! standard library (only `alloc` is required). Measures are carried in
//! natural-log form because cap measures underflow `f64` long before the
//! dimensions of interest are reached.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: sphere normalisation, regularized incomplete beta, cap
//!   fractions and their inverse, the latitude measure.
//! * [`quad`]: log-domain adaptive Gauss-Legendre and Gauss-Jacobi rules.
//! * [`geometry`]: geodesic angle and the exact cap-cap intersection volume.
//! * [`sampling`]: reproducible Haar and cap sampling from seeded streams.
//! * [`sets`]: the zonal test-set family with exact measures and
//!   neighbourhoods.
//! * [`rearrange`]: equal-measure latitude grids, symmetric decreasing
//!   rearrangement, zonal convolution and the Riesz functional.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod estimate;
pub mod geometry;
pub mod numeric;
pub mod quad;
pub mod rearrange;
pub mod sampling;
pub mod sets;
pub mod specfun;

pub use error::{Error, Result};
pub use estimate::{wilson_interval, MonteCarloEstimate};
pub use geometry::{
    cap_intersection_fraction, geodesic_angle, ln_cap_intersection_fraction, theorem1_v, CapSpec, Pole, SpherePoint,
};
pub use rearrange::{
    beta_threshold, layer_cake_integral, pairing, projected_kernel, proof_chain_check, proof_chain_check_with,
    rearrange, riesz_functional, super_level_measure, zonal_convolve, zonal_convolve_at, KernelProjector, LatitudeGrid,
    MonotoneKernel, ProofChainReport, ZonalConvolver, ZonalFunction,
};
pub use sampling::{sample_cap, sample_sphere, CapSampler, RandomStream};
pub use sets::{Measured, Shape, SphereSet, ZonalSet};
pub use specfun::{
    cap_angle, cap_angle_from_ln, cap_fraction, ln_band_fraction, ln_cap_fraction, log_sphere_area, nu_log_weight,
    reg_inc_beta, LogMeasure, Sphere,
};
