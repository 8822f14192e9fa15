pub mod airy;
pub mod characteristics;
pub mod dbm;
pub mod deformed_mp;
pub mod edge_stats;
pub mod ensembles;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod spectral_laws;
pub mod stats;
pub mod tracy_widom;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type SpectralLaw64 = spectral_laws::SpectralLaw<f64>;
pub type DeformedLaw64 = deformed_mp::DeformedLaw<f64>;
pub type Population64 = deformed_mp::Population<f64>;
