//! First-passage percolation on the Poisson Boolean model.
//!
//! Module overview:
//! - `radius_laws`: parametric radius measures, moments, tails, tilted draws.
//! - `geometry`:    balls, terminal sets, set gaps, tau of polygonal paths, grid index.
//! - `sampler`:     exact hitting-set sampling of the ball process, superposition.
//! - `percolation`: connected components and finite-window crossing events.
//! - `travel_time`: exact travel times via the component gap graph, witness paths.
//! - `greedy_paths`: greedy path ratio (exact and beam/Dinkelbach) and its tail integral.
//! - `estimator`:   Monte Carlo estimates of the time constant, crossing and
//!   G(0, alpha) probabilities, threshold scans, diagnostics.
//! - `cli`:         run configuration, subcommands, CSV and manifest output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN. Index loops over
// distance matrices read better than zipped iterators.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod greedy_paths;
pub mod percolation;
pub mod radius_laws;
pub mod sampler;
pub mod travel_time;

pub use error::{Error, Result};
pub use geometry::{gap, tau_of_path, Ball, GridIndex, Polyline, Shape, Terminal};
pub use radius_laws::RadiusLaw;
pub use sampler::{sample_hitting, superpose, BallSample, ModelParams, Stream};
pub use travel_time::{annulus_time, travel_time, travel_time_radial, TravelTimeResult};
