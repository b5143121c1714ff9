//! Point processes on directed acyclic linear networks (DALNs).
//!
//! A DALN is a set of directed line segments joined at vertices with no
//! directed loops. The direction structure induces a strict partial order on
//! the network, which makes it possible to specify a point process through a
//! conditional intensity function evaluated segment by segment, exactly as for
//! temporal point processes on the half line.
//!
//! The crate provides:
//!
//! - [`network`]: the network data model, directed shortest-path distances
//!   (a quasi-metric), path enumeration, and topological segment orderings.
//! - [`pattern`]: point patterns and marked point patterns on a network,
//!   including genealogy relations (parents/ancestors) and interevent
//!   distances.
//! - [`model`]: conditional-intensity models (Poisson, Hawkes, modified
//!   Hawkes, non-linear Hawkes, self-correcting, multitype Hawkes) exposing
//!   the intensity, its integral along a segment, and dominating bounds for
//!   thinning.
//! - [`simulate`]: exact simulation by the inverse method or modified
//!   thinning, segment by segment in topological order.
//! - [`likelihood`] and [`fit`]: exact log-likelihood evaluation and
//!   derivative-free maximum-likelihood fitting (joint and marginal).
//! - [`residual`]: the compensator transform onto an abstract residual
//!   network plus goodness-of-fit tests (KS against Exp(1) and a Monte Carlo
//!   rank envelope on interevent-distance ECDFs).
//! - [`study`]: a simulate-then-fit harness over increasing network sizes.
//!
//! The crate is `no_std`-compatible (requires `alloc`); all transcendental
//! math goes through `libm` so results are bit-stable across platforms.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod fit;
pub mod likelihood;
pub mod math;
pub mod model;
pub mod network;
pub mod pattern;
pub mod residual;
pub mod rng;
pub mod simulate;
pub mod stats;
pub mod study;

pub use fit::{FitError, FitOptions, FitResult, ModelFamily};
pub use model::{
    HawkesParams, IntensityModel, MarkedIntensityModel, Model, ModelError, MultitypeHawkesParams,
    SelfCorrectingParams,
};
pub use network::{
    DirectedPath, DirectedSegment, Network, NetworkError, NetworkLocation, SegmentId, Vertex,
    VertexId,
};
pub use pattern::{IntereventRecord, MarkedPointPattern, PatternError, PointId, PointPattern};
pub use residual::{DiagnosticsError, EnvelopeResult, KsResult, ResidualProcess};
pub use simulate::{Algorithm, SimulationConfig, SimulationError};
