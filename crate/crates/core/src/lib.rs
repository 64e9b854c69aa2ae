//! Martingale couplings between discrete measures in convex order.
//!
//! Exact constructions of the Hoeffding-Fréchet coupling, the inverse transform
//! martingale coupling and its `Q`-family, martingale rearrangements under the
//! barycentre dispersion assumption, and adapted Wasserstein distances.

pub mod coupling;
pub mod error;
pub mod gen;
pub mod io;
pub mod itmc;
pub mod matching;
pub mod measure;
pub mod piecewise;
pub mod rearrange;
pub mod scalar;
pub mod stability;
pub mod transport;

pub use coupling::{DiscreteCoupling, Kernel, LiftedCoupling, Segment};
pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, StochasticOrder};
pub use piecewise::{PiecewiseConstantFn, PiecewiseLinearFn};
pub use scalar::{Approx, Rational, Rho, Scalar};
