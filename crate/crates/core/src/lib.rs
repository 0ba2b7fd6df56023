//! Spectral Galerkin simulation of the incompressible Navier–Stokes equation
//! on the periodic torus driven by stochastic transport noise, with numerical
//! audits of the inequalities a local well-posedness argument relies on.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which is what the
//! experiments and reports use.

pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod harness;
pub mod lab;
pub mod noise;
pub mod operators;
pub mod random;
pub mod sde;
pub mod real;
pub mod snapshot;
pub mod spectrum;
pub mod stats;

pub use error::{Error, Result};
pub use field::{leray_project, sobolev_inner, sobolev_norm, stokes_apply, RawField, SpectralField};
pub use grid::{make_grid, TorusGrid};
pub use noise::{BrownianPath, XiEnsemble, XiParams};
pub use operators::OperatorWorkspace;
pub use real::Real;
pub use spectrum::StokesSpectrum;

/// Double-precision divergence-free field.
pub type Field = SpectralField<f64>;
/// Double-precision unprojected field.
pub type Raw = RawField<f64>;
/// Double-precision ξ ensemble.
pub type Ensemble = XiEnsemble<f64>;
/// Double-precision operator workspace.
pub type Workspace = OperatorWorkspace<f64>;
