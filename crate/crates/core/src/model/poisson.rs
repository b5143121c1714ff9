//! Poisson processes: a deterministic rate that ignores the history, either
//! constant or given by a caller-supplied function of the location.

use alloc::boxed::Box;
use alloc::sync::Arc;

use crate::math;
use crate::model::{IntensityModel, ModelError, SegmentSweep};
use crate::network::{Network, NetworkLocation, SegmentId};
use crate::pattern::PointPattern;

/// Rate function for the inhomogeneous variant.
pub type RateFn = Arc<dyn Fn(NetworkLocation) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum PoissonModel {
    /// Constant rate `lambda >= 0` (zero gives the degenerate empty process).
    Homogeneous { rate: f64 },
    /// Deterministic location-dependent rate with a global upper bound
    /// (the bound feeds the thinning simulator).
    Inhomogeneous { rate: RateFn, sup_rate: f64 },
}

impl core::fmt::Debug for PoissonModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PoissonModel::Homogeneous { rate } => {
                f.debug_struct("Homogeneous").field("rate", rate).finish()
            }
            PoissonModel::Inhomogeneous { sup_rate, .. } => f
                .debug_struct("Inhomogeneous")
                .field("rate", &"<fn>")
                .field("sup_rate", sup_rate)
                .finish(),
        }
    }
}

impl PoissonModel {
    pub fn homogeneous(rate: f64) -> Result<Self, ModelError> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(ModelError::InvalidParameter("poisson rate must be finite and >= 0"));
        }
        Ok(PoissonModel::Homogeneous { rate })
    }

    pub fn inhomogeneous(rate: RateFn, sup_rate: f64) -> Result<Self, ModelError> {
        if !(sup_rate >= 0.0) || !sup_rate.is_finite() {
            return Err(ModelError::InvalidParameter("poisson sup_rate must be finite and >= 0"));
        }
        Ok(PoissonModel::Inhomogeneous { rate, sup_rate })
    }

    /// The rate at a location, surfacing negative values as `NegativeRate`.
    pub fn rate_at(&self, net: &Network, u: NetworkLocation) -> Result<f64, ModelError> {
        net.check_location(u)?;
        match self {
            PoissonModel::Homogeneous { rate } => Ok(*rate),
            PoissonModel::Inhomogeneous { rate, .. } => {
                let r = rate(u);
                if r < 0.0 || !r.is_finite() {
                    return Err(ModelError::NegativeRate {
                        segment: u.segment.0,
                        offset: u.offset,
                        rate: r,
                    });
                }
                Ok(r)
            }
        }
    }
}

struct HomogeneousSweep {
    rate: f64,
    seg_len: f64,
}

impl SegmentSweep for HomogeneousSweep {
    fn intensity(&self, _t: f64) -> f64 {
        self.rate
    }
    fn integrated(&self, t: f64) -> f64 {
        self.rate * t
    }
    fn bounds(&self, t: f64) -> (f64, f64) {
        (self.rate, self.seg_len - t)
    }
    fn add_point(&mut self, _t: f64) {}
}

struct InhomogeneousSweep {
    rate: RateFn,
    sup_rate: f64,
    seg: SegmentId,
    seg_len: f64,
}

impl InhomogeneousSweep {
    /// Negative rates poison the evaluation with NaN; the one-shot model
    /// operations and the simulator surface that as an error.
    fn rate(&self, t: f64) -> f64 {
        let r = (self.rate)(NetworkLocation::new(self.seg, t));
        if r < 0.0 {
            f64::NAN
        } else {
            r
        }
    }
}

impl SegmentSweep for InhomogeneousSweep {
    fn intensity(&self, t: f64) -> f64 {
        self.rate(t)
    }
    fn integrated(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let tol = 1e-10 * t.min(1.0).max(1e-3);
        math::adaptive_simpson(|v| self.rate(v), 0.0, t, tol)
    }
    fn bounds(&self, t: f64) -> (f64, f64) {
        (self.sup_rate, self.seg_len - t)
    }
    fn add_point(&mut self, _t: f64) {}
}

impl IntensityModel for PoissonModel {
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        _history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError> {
        let idx = net.seg_idx(seg)?;
        let seg_len = net.seg_by_idx(idx).length;
        Ok(match self {
            PoissonModel::Homogeneous { rate } => {
                Box::new(HomogeneousSweep { rate: *rate, seg_len })
            }
            PoissonModel::Inhomogeneous { rate, sup_rate } => Box::new(InhomogeneousSweep {
                rate: rate.clone(),
                sup_rate: *sup_rate,
                seg,
                seg_len,
            }),
        })
    }

    fn intensity(
        &self,
        net: &Network,
        u: NetworkLocation,
        _history: &PointPattern,
    ) -> Result<f64, ModelError> {
        self.rate_at(net, u)
    }

    fn integrated_intensity(
        &self,
        net: &Network,
        seg: SegmentId,
        t: f64,
        history: &PointPattern,
    ) -> Result<f64, ModelError> {
        net.check_location(NetworkLocation::new(seg, t))?;
        let sweep = self.begin_segment(net, seg, history)?;
        let v = sweep.integrated(t);
        if v.is_nan() {
            // Re-probe to produce a located error.
            self.rate_at(net, NetworkLocation::new(seg, t))?;
            return Err(ModelError::NegativeRate { segment: seg.0, offset: t, rate: f64::NAN });
        }
        Ok(v)
    }
}
