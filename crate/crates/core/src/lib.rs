//! Point-vortex dynamics on closed Riemann surfaces.
//!
//! The crate models a surface by conformal charts carrying a metric density
//! `lambda`, builds its Green function and harmonic one-forms, and evolves
//! point vortices together with the circulations around homology cycles.
//!
//! Built-in surfaces are the unit [`Sphere`], flat tori ([`FlatTorus`]) and
//! the Schottky double of the unit disk ([`DiskDouble`]). All numerics are
//! generic over [`Real`]; the aliases below fix the scalar to `f64`.

// NaN must fail validity checks, hence `!(x > 0)`; index loops mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod connections;
pub mod diff;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod homology;
pub mod pairlab;
pub mod quadrature;
pub mod scalar;
pub mod schottky;
pub mod surface;
pub mod theta;

pub use connections::{AffineConnection, HolomorphicMap, Mobius, Order, ProjectiveConnection};
pub use dynamics::{IntegratorOptions, Scheme, Vortex};
pub use error::{Result, VortexError};
pub use greens::{GreenModel, SphereGreen};
pub use homology::Covector;
pub use scalar::Real;
pub use schottky::DiskDouble;
pub use surface::{ChartId, Sphere, Surface};

pub type Complex64 = num_complex::Complex<f64>;
pub type ChartPoint = surface::ChartPoint<f64>;
pub type GeodesicState = surface::GeodesicState<f64>;
pub type GeodesicSample = surface::GeodesicSample<f64>;
pub type FlatTorus = surface::FlatTorus<f64>;
pub type TorusGreen = greens::TorusGreen<f64>;
pub type RegularExpansion = greens::RegularExpansion<f64>;
pub type HarmonicBasis = homology::HarmonicBasis<f64>;
pub type PeriodMatrix = homology::PeriodMatrix<f64>;
pub type PhaseState = dynamics::PhaseState<f64>;
pub type CirculationState = dynamics::CirculationState<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type VortexModel<'a> = dynamics::VortexModel<'a, f64>;
pub type PairRun<'a> = pairlab::PairRun<'a, f64>;
pub type KimuraRow = pairlab::KimuraRow<f64>;
