//! Self-correcting process for regular patterns: the intensity grows
//! exponentially with the directed distance from the designated root and
//! drops by a factor `e^{-α}` for every pattern point on the realized
//! shortest path from the root,
//! `λ*(u) = exp(μ d(v0, u) - α |x ∩ sp(v0, u)|)`.
//!
//! Only points on the tie-broken shortest path count. Along one segment the
//! root distance grows linearly and the path point count is frozen except
//! for same-segment points, so the integral has a closed form in `e^{μt}`
//! pieces between points.

use alloc::boxed::Box;

use crate::math;
use crate::model::{IntensityModel, ModelError, SegmentSweep, SelfCorrectingParams};
use crate::network::{Network, SegmentId};
use crate::pattern::PointPattern;

#[derive(Debug, Clone, Copy)]
pub struct SelfCorrectingModel {
    params: SelfCorrectingParams,
}

impl SelfCorrectingModel {
    pub fn new(params: SelfCorrectingParams) -> Result<Self, ModelError> {
        let ok = params.mu > 0.0
            && params.mu.is_finite()
            && params.alpha >= 0.0
            && params.alpha.is_finite();
        if !ok {
            return Err(ModelError::InvalidParameter(
                "self-correcting requires mu > 0 and alpha >= 0",
            ));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> SelfCorrectingParams {
        self.params
    }
}

struct SelfCorrectingSweep {
    mu: f64,
    alpha: f64,
    seg_len: f64,
    /// `μ d(v0, tail) - α |x ∩ sp(v0, tail)|`: the log intensity at offset 0.
    log_at_tail: f64,
    /// Same-segment points added so far.
    count: usize,
    last_t: f64,
    accrued: f64,
}

impl SelfCorrectingSweep {
    #[inline]
    fn log_lambda(&self, t: f64) -> f64 {
        self.log_at_tail + self.mu * t - self.alpha * self.count as f64
    }

    fn gap_integral(&self, t: f64) -> f64 {
        // ∫ exp(log_at_tail + μv - αn) dv over [last_t, t].
        math::exp(self.log_lambda(self.last_t)) * math::expm1(self.mu * (t - self.last_t))
            / self.mu
    }
}

impl SegmentSweep for SelfCorrectingSweep {
    fn intensity(&self, t: f64) -> f64 {
        math::exp(self.log_lambda(t))
    }

    fn integrated(&self, t: f64) -> f64 {
        self.accrued + self.gap_integral(t)
    }

    fn bounds(&self, t: f64) -> (f64, f64) {
        // The intensity increases along the segment while no point arrives,
        // so the segment-end value dominates.
        (math::exp(self.log_lambda(self.seg_len)), self.seg_len - t)
    }

    fn add_point(&mut self, t: f64) {
        debug_assert!(t >= self.last_t);
        self.accrued += self.gap_integral(t);
        self.count += 1;
        self.last_t = t;
    }
}

impl IntensityModel for SelfCorrectingModel {
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError> {
        let idx = net.seg_idx(seg)?;
        let d0 = net
            .root_dist_to_tail(idx)
            .ok_or(ModelError::Network(crate::network::NetworkError::NoRootDesignated))?;
        if !d0.is_finite() {
            return Err(ModelError::RootCannotReach { segment: seg.0 });
        }
        // Points on the realized root path to the segment tail; traversed
        // segments count all of their points, boundary offsets included.
        let path = net.root_path_to_tail(idx).expect("root data present");
        let count0: usize = path.iter().map(|&s| history.on_segment_idx(s).len()).sum();
        Ok(Box::new(SelfCorrectingSweep {
            mu: self.params.mu,
            alpha: self.params.alpha,
            seg_len: net.seg_by_idx(idx).length,
            log_at_tail: self.params.mu * d0 - self.params.alpha * count0 as f64,
            count: 0,
            last_t: 0.0,
            accrued: 0.0,
        }))
    }
}
