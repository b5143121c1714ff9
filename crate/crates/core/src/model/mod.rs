//! Conditional-intensity models on a directed network.
//!
//! Every model exposes three things for a location `u = u_i(t)` given the
//! history of points that precede it: the conditional intensity `λ*(u)`, the
//! integrated intensity `Λ*(u)` along segment `i` from its tail, and a
//! dominating bound `(M*, L*)` with `λ*(s) <= M*` on `[t, t + L*]` while no
//! new point arrives (used by the thinning simulator).
//!
//! Evaluation is organised around per-segment sweep sessions: a sweep is
//! created with the frozen upstream history, same-segment points are then
//! added in increasing offset order, and all queries at offsets at or above
//! the last added point are O(1) thanks to the exponential kernel's decay
//! recursion. The one-shot operations on [`IntensityModel`] are thin wrappers
//! that build a fresh sweep, so there is a single evaluation code path.

use alloc::boxed::Box;
use alloc::vec::Vec;

use thiserror::Error;

use crate::network::{Network, NetworkError, NetworkLocation, SegmentId};
use crate::pattern::{MarkedPointPattern, PointPattern};

mod hawkes;
mod multitype;
mod nonlinear;
mod poisson;
mod self_correcting;

pub use hawkes::HawkesModel;
pub use multitype::MultitypeHawkesModel;
pub use nonlinear::NonlinearHawkesModel;
pub use poisson::PoissonModel;
pub use self_correcting::SelfCorrectingModel;

/// Discarded kernel tail mass for the path-sum truncation of the modified
/// Hawkes model: paths are cut once `1 - Γ(r) < PATH_TAIL_EPS`.
pub(crate) const PATH_TAIL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("NegativeRate: intensity function returned {rate} at offset {offset} of segment {segment}")]
    NegativeRate { segment: u32, offset: f64, rate: f64 },
    #[error("RootCannotReach: segment {segment} is not reachable from the designated root")]
    RootCannotReach { segment: u32 },
    #[error("UnknownMark: label {label} outside mark space 1..={mark_count}")]
    UnknownMark { label: u32, mark_count: u32 },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Hawkes parameters: baseline `mu`, mean offspring count `alpha`, and the
/// exponential kernel rate `kappa` (`γ(t) = κ e^{-κt}`). All positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HawkesParams {
    pub mu: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Non-linear Hawkes parameters: the intensity is
/// `exp(mu + alpha Σ γ(d))`, so `mu` and `alpha` may take any sign while the
/// kernel rate `kappa` stays positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearHawkesParams {
    pub mu: f64,
    pub alpha: f64,
    pub kappa: f64,
}

/// Self-correcting parameters: `mu > 0` grows the intensity with root
/// distance, `alpha >= 0` damps it per point met on the shortest root path.
/// The root vertex is the network's designated root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCorrectingParams {
    pub mu: f64,
    pub alpha: f64,
}

/// Multitype Hawkes parameters over a mark space `1..=K`: per-mark baselines
/// and `K x K` excitation/kernel-rate matrices indexed `[source][target]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitypeHawkesParams {
    pub mu: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub kappa: Vec<Vec<f64>>,
}

impl MultitypeHawkesParams {
    pub fn mark_count(&self) -> u32 {
        self.mu.len() as u32
    }
}

/// A per-segment evaluation session.
///
/// Queries take offsets `t` at or above the last added point; `add_point`
/// offsets must be non-decreasing. At an offset equal to the last added
/// point the intensity is the right limit (the new point contributes its
/// kernel value at distance zero).
pub trait SegmentSweep {
    /// The conditional intensity at offset `t`.
    fn intensity(&self, t: f64) -> f64;
    /// The integrated intensity from the segment tail to offset `t`.
    fn integrated(&self, t: f64) -> f64;
    /// `(M*, L*)`: a bound dominating the intensity on `[t, t + L*]` given
    /// that no further points arrive there.
    fn bounds(&self, t: f64) -> (f64, f64);
    /// Record a same-segment point at offset `t`.
    fn add_point(&mut self, t: f64);
}

/// An unmarked conditional-intensity model.
pub trait IntensityModel {
    /// Start a sweep over `seg` conditional on the points of `history` that
    /// lie strictly upstream of it. Same-segment points in `history` are
    /// ignored here; feed them through [`SegmentSweep::add_point`].
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError>;

    /// λ*(u) given the full pattern `history` (same-segment points of
    /// `history` at offsets below `u` are conditioned on; a point exactly at
    /// `u` is not).
    fn intensity(
        &self,
        net: &Network,
        u: NetworkLocation,
        history: &PointPattern,
    ) -> Result<f64, ModelError> {
        let si = net.check_location(u)?;
        let mut sweep = self.begin_segment(net, u.segment, history)?;
        for &(off, _) in history.on_segment_idx(si) {
            if off < u.offset {
                sweep.add_point(off);
            } else {
                break;
            }
        }
        Ok(sweep.intensity(u.offset))
    }

    /// Λ*(u_i(t)) along segment `seg` given `history`.
    fn integrated_intensity(
        &self,
        net: &Network,
        seg: SegmentId,
        t: f64,
        history: &PointPattern,
    ) -> Result<f64, ModelError> {
        let si = net.check_location(NetworkLocation::new(seg, t))?;
        let mut sweep = self.begin_segment(net, seg, history)?;
        for &(off, _) in history.on_segment_idx(si) {
            if off < t {
                sweep.add_point(off);
            } else {
                break;
            }
        }
        Ok(sweep.integrated(t))
    }

    /// Dominating bound at offset `t` of `seg` given `history` (same-segment
    /// points at offsets up to and including `t` are conditioned on).
    fn thinning_bounds(
        &self,
        net: &Network,
        seg: SegmentId,
        t: f64,
        history: &PointPattern,
    ) -> Result<(f64, f64), ModelError> {
        let si = net.check_location(NetworkLocation::new(seg, t))?;
        let mut sweep = self.begin_segment(net, seg, history)?;
        for &(off, _) in history.on_segment_idx(si) {
            if off <= t {
                sweep.add_point(off);
            } else {
                break;
            }
        }
        Ok(sweep.bounds(t))
    }
}

/// A per-segment evaluation session for a marked model.
pub trait MarkedSegmentSweep {
    fn ground_intensity(&self, t: f64) -> f64;
    fn intensity(&self, t: f64, mark: u32) -> f64;
    fn ground_integrated(&self, t: f64) -> f64;
    fn integrated(&self, t: f64, mark: u32) -> f64;
    /// Conditional mark probabilities at `t`, normalized to sum to one.
    fn mark_distribution(&self, t: f64) -> Vec<f64>;
    fn bounds(&self, t: f64) -> (f64, f64);
    fn add_point(&mut self, t: f64, mark: u32);
}

/// A marked conditional-intensity model over a finite mark space `1..=K`.
pub trait MarkedIntensityModel {
    fn mark_count(&self) -> u32;

    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &MarkedPointPattern,
    ) -> Result<Box<dyn MarkedSegmentSweep>, ModelError>;

    fn check_mark(&self, mark: u32) -> Result<(), ModelError> {
        if mark == 0 || mark > self.mark_count() {
            return Err(ModelError::UnknownMark { label: mark, mark_count: self.mark_count() });
        }
        Ok(())
    }

    /// λ*(u, m) given the marked history.
    fn intensity(
        &self,
        net: &Network,
        u: NetworkLocation,
        mark: u32,
        history: &MarkedPointPattern,
    ) -> Result<f64, ModelError> {
        self.check_mark(mark)?;
        let si = net.check_location(u)?;
        let mut sweep = self.begin_segment(net, u.segment, history)?;
        for (off, m) in history.marks_on_segment_idx(si) {
            if off < u.offset {
                sweep.add_point(off, m);
            } else {
                break;
            }
        }
        Ok(sweep.intensity(u.offset, mark))
    }

    /// Ground intensity Σ_m λ*(u, m).
    fn ground_intensity(
        &self,
        net: &Network,
        u: NetworkLocation,
        history: &MarkedPointPattern,
    ) -> Result<f64, ModelError> {
        let si = net.check_location(u)?;
        let mut sweep = self.begin_segment(net, u.segment, history)?;
        for (off, m) in history.marks_on_segment_idx(si) {
            if off < u.offset {
                sweep.add_point(off, m);
            } else {
                break;
            }
        }
        Ok(sweep.ground_intensity(u.offset))
    }

    /// Conditional mark distribution at `u`.
    fn mark_distribution(
        &self,
        net: &Network,
        u: NetworkLocation,
        history: &MarkedPointPattern,
    ) -> Result<Vec<f64>, ModelError> {
        let si = net.check_location(u)?;
        let mut sweep = self.begin_segment(net, u.segment, history)?;
        for (off, m) in history.marks_on_segment_idx(si) {
            if off < u.offset {
                sweep.add_point(off, m);
            } else {
                break;
            }
        }
        Ok(sweep.mark_distribution(u.offset))
    }

    /// Per-mark integrated intensity Λ*_m(u_i(t)).
    fn integrated_intensity(
        &self,
        net: &Network,
        seg: SegmentId,
        t: f64,
        mark: u32,
        history: &MarkedPointPattern,
    ) -> Result<f64, ModelError> {
        self.check_mark(mark)?;
        let si = net.check_location(NetworkLocation::new(seg, t))?;
        let mut sweep = self.begin_segment(net, seg, history)?;
        for (off, m) in history.marks_on_segment_idx(si) {
            if off < t {
                sweep.add_point(off, m);
            } else {
                break;
            }
        }
        Ok(sweep.integrated(t, mark))
    }
}

/// The unmarked model families, dispatching to the concrete implementations.
#[derive(Debug, Clone)]
pub enum Model {
    Poisson(PoissonModel),
    Hawkes(HawkesModel),
    NonlinearHawkes(NonlinearHawkesModel),
    SelfCorrecting(SelfCorrectingModel),
}

impl Model {
    pub fn homogeneous_poisson(rate: f64) -> Result<Self, ModelError> {
        Ok(Model::Poisson(PoissonModel::homogeneous(rate)?))
    }

    pub fn hawkes(params: HawkesParams) -> Result<Self, ModelError> {
        Ok(Model::Hawkes(HawkesModel::new(params, false)?))
    }

    /// The cluster-splitting variant: offspring mass is divided by the
    /// junction out-degree product along every path.
    pub fn modified_hawkes(params: HawkesParams) -> Result<Self, ModelError> {
        Ok(Model::Hawkes(HawkesModel::new(params, true)?))
    }

    pub fn nonlinear_hawkes(params: NonlinearHawkesParams) -> Result<Self, ModelError> {
        Ok(Model::NonlinearHawkes(NonlinearHawkesModel::new(params)?))
    }

    pub fn self_correcting(params: SelfCorrectingParams) -> Result<Self, ModelError> {
        Ok(Model::SelfCorrecting(SelfCorrectingModel::new(params)?))
    }
}

impl IntensityModel for Model {
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError> {
        match self {
            Model::Poisson(m) => m.begin_segment(net, seg, history),
            Model::Hawkes(m) => m.begin_segment(net, seg, history),
            Model::NonlinearHawkes(m) => m.begin_segment(net, seg, history),
            Model::SelfCorrecting(m) => m.begin_segment(net, seg, history),
        }
    }

    fn intensity(
        &self,
        net: &Network,
        u: NetworkLocation,
        history: &PointPattern,
    ) -> Result<f64, ModelError> {
        match self {
            Model::Poisson(m) => m.intensity(net, u, history),
            Model::Hawkes(m) => m.intensity(net, u, history),
            Model::NonlinearHawkes(m) => m.intensity(net, u, history),
            Model::SelfCorrecting(m) => m.intensity(net, u, history),
        }
    }

    fn integrated_intensity(
        &self,
        net: &Network,
        seg: SegmentId,
        t: f64,
        history: &PointPattern,
    ) -> Result<f64, ModelError> {
        match self {
            Model::Poisson(m) => m.integrated_intensity(net, seg, t, history),
            Model::Hawkes(m) => m.integrated_intensity(net, seg, t, history),
            Model::NonlinearHawkes(m) => m.integrated_intensity(net, seg, t, history),
            Model::SelfCorrecting(m) => m.integrated_intensity(net, seg, t, history),
        }
    }
}

/// Upstream kernel-sum helper shared by the Hawkes-family models: computes
/// `Σ_j exp(-κ c_j)` over all history points on segments strictly upstream
/// of `seg_idx`, where `c_j` is the directed distance from the point to the
/// segment's tail vertex.
pub(crate) fn upstream_exp_sum(
    net: &Network,
    seg_idx: usize,
    history: &PointPattern,
    kappa: f64,
) -> f64 {
    let tail = net.tail_of(seg_idx);
    let mut sum = 0.0;
    for j in 0..net.segment_count() {
        if !net.reaches_idx(j, seg_idx) {
            continue;
        }
        for &(off, _) in history.on_segment_idx(j) {
            let c = net.distance_to_vertex_idx(j, off, tail);
            if c.is_finite() {
                sum += crate::math::exp(-kappa * c);
            }
        }
    }
    sum
}
