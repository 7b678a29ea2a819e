//! Numerical laboratory for Bergman-type spaces `A^p(D)` of holomorphic
//! functions on bounded Reinhardt domains in ℂⁿ.
//!
//! * [`geometry`]: the domain catalog, samplers and boundary probes.
//! * [`functions`]: Laurent polynomials, monomial and Möbius maps, Jacobians.
//! * [`integrate`]: `p`-norms by closed form, quadrature and Monte Carlo.
//! * [`kernel`]: finite-span estimates of the `p`-Bergman kernel.
//! * [`isometry`]: weighted composition isometries and equimeasurability checks.
//! * [`reconstruct`]: recovering the point map from an isometry.
//! * [`scenarios`]: packaged end-to-end experiments with reports.

pub mod error;
pub mod functions;
pub mod geometry;
pub mod integrate;
pub mod isometry;
pub mod kernel;
pub mod reconstruct;
pub mod rng;
pub mod scenarios;
mod verdict;

pub use error::{Error, Result};
pub use functions::{HoloFn, HoloMapExpr, Holomorphic, LaurentPolynomial, MonomialMap, MultiIndex, Weight};
pub use geometry::{BoundedDomain, DomainSpec, Point, RadialProfile};
pub use integrate::{NormMethod, PNormResult};
pub use num_complex::Complex64;
pub use verdict::Verdict;
