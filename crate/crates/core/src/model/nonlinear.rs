//! Non-linear Hawkes process: the linear Hawkes excitation sum is pushed
//! through an exponential, `λ*(u) = exp(μ + α Σ_{x→u} γ(d(x, u)))`.
//!
//! `α > 0` gives clustering, `α < 0` regularity, and `α = 0` collapses to a
//! homogeneous Poisson process with rate `e^μ`. No closed form exists for
//! the integrated intensity; each inter-point gap is integrated by adaptive
//! Simpson quadrature (the integrand is smooth between points because the
//! only derivative discontinuities sit exactly at the points).

use alloc::boxed::Box;

use crate::math;
use crate::model::{
    upstream_exp_sum, IntensityModel, ModelError, NonlinearHawkesParams, SegmentSweep,
};
use crate::network::{Network, SegmentId};
use crate::pattern::PointPattern;

/// Absolute quadrature tolerance per network segment.
const SEGMENT_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct NonlinearHawkesModel {
    params: NonlinearHawkesParams,
}

impl NonlinearHawkesModel {
    pub fn new(params: NonlinearHawkesParams) -> Result<Self, ModelError> {
        let ok = params.kappa > 0.0
            && params.kappa.is_finite()
            && params.mu.is_finite()
            && params.alpha.is_finite();
        if !ok {
            return Err(ModelError::InvalidParameter(
                "nonlinear hawkes requires finite mu, alpha and kappa > 0",
            ));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> NonlinearHawkesParams {
        self.params
    }
}

struct NonlinearSweep {
    mu: f64,
    alpha: f64,
    kappa: f64,
    seg_len: f64,
    excite: f64,
    last_t: f64,
    accrued: f64,
}

impl NonlinearSweep {
    #[inline]
    fn lambda(&self, t: f64) -> f64 {
        let e = self.excite * math::exp(-self.kappa * (t - self.last_t));
        math::exp(self.mu + self.alpha * self.kappa * e)
    }

    fn gap_integral(&self, t: f64) -> f64 {
        if t == self.last_t {
            return 0.0;
        }
        let tol = SEGMENT_QUAD_TOL * ((t - self.last_t) / self.seg_len).max(1e-3);
        math::adaptive_simpson(|v| self.lambda(v), self.last_t, t, tol)
    }
}

impl SegmentSweep for NonlinearSweep {
    fn intensity(&self, t: f64) -> f64 {
        self.lambda(t)
    }

    fn integrated(&self, t: f64) -> f64 {
        self.accrued + self.gap_integral(t)
    }

    fn bounds(&self, t: f64) -> (f64, f64) {
        // Excitation decays along the segment: for alpha >= 0 the intensity
        // decays with it, otherwise it climbs towards exp(mu).
        let m = if self.alpha >= 0.0 { self.lambda(t) } else { math::exp(self.mu) };
        (m, self.seg_len - t)
    }

    fn add_point(&mut self, t: f64) {
        debug_assert!(t >= self.last_t);
        self.accrued += self.gap_integral(t);
        self.excite = self.excite * math::exp(-self.kappa * (t - self.last_t)) + 1.0;
        self.last_t = t;
    }
}

impl IntensityModel for NonlinearHawkesModel {
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError> {
        let idx = net.seg_idx(seg)?;
        let excite = upstream_exp_sum(net, idx, history, self.params.kappa);
        Ok(Box::new(NonlinearSweep {
            mu: self.params.mu,
            alpha: self.params.alpha,
            kappa: self.params.kappa,
            seg_len: net.seg_by_idx(idx).length,
            excite,
            last_t: 0.0,
            accrued: 0.0,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;
    use crate::network::{NetworkLocation, SegmentSpec, Vertex, VertexId};
    use alloc::vec;
    use alloc::vec::Vec;

    fn two_chain() -> Network {
        Network::build(
            vec![
                Vertex { id: VertexId(0), coords: None },
                Vertex { id: VertexId(1), coords: None },
                Vertex { id: VertexId(2), coords: None },
            ],
            vec![
                SegmentSpec { id: SegmentId(1), tail: VertexId(0), head: VertexId(1), length: Some(2.0) },
                SegmentSpec { id: SegmentId(2), tail: VertexId(1), head: VertexId(2), length: Some(2.0) },
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_history_is_exp_mu() {
        let net = two_chain();
        let m = Model::nonlinear_hawkes(NonlinearHawkesParams { mu: 0.4, alpha: -1.0, kappa: 5.0 })
            .unwrap();
        let empty = PointPattern::empty(&net);
        let lam = m.intensity(&net, NetworkLocation::new(SegmentId(1), 0.7), &empty).unwrap();
        assert!((lam - math::exp(0.4)).abs() < 1e-12);
    }

    #[test]
    fn alpha_zero_is_homogeneous() {
        let net = two_chain();
        let m = Model::nonlinear_hawkes(NonlinearHawkesParams { mu: 0.3, alpha: 0.0, kappa: 5.0 })
            .unwrap();
        let hist = PointPattern::new(
            &net,
            vec![
                NetworkLocation::new(SegmentId(1), 0.5),
                NetworkLocation::new(SegmentId(1), 1.5),
            ],
        )
        .unwrap();
        let lam = m.intensity(&net, NetworkLocation::new(SegmentId(2), 1.0), &hist).unwrap();
        assert!((lam - math::exp(0.3)).abs() < 1e-12);
        let v = m.integrated_intensity(&net, SegmentId(2), 2.0, &hist).unwrap();
        assert!((v - 2.0 * math::exp(0.3)).abs() < 1e-8);
    }

    #[test]
    fn inhibiting_parent_at_zero_distance() {
        // alpha = -1, parent at vanishing distance: kernel tends to kappa,
        // so the intensity tends to exp(mu - kappa).
        let net = two_chain();
        let m = Model::nonlinear_hawkes(NonlinearHawkesParams { mu: 1.0, alpha: -1.0, kappa: 5.0 })
            .unwrap();
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), 1.0)]).unwrap();
        let lam = m
            .intensity(&net, NetworkLocation::new(SegmentId(1), 1.0 + 1e-12), &hist)
            .unwrap();
        assert!((lam - math::exp(1.0 - 5.0)).abs() < 1e-9, "lam = {lam}");
    }

    #[test]
    fn integrated_matches_quadrature_oracle() {
        let net = two_chain();
        for alpha in [0.7, -0.9] {
            let m = Model::nonlinear_hawkes(NonlinearHawkesParams { mu: 0.2, alpha, kappa: 3.0 })
                .unwrap();
            let hist = PointPattern::new(
                &net,
                vec![
                    NetworkLocation::new(SegmentId(1), 0.4),
                    NetworkLocation::new(SegmentId(1), 1.1),
                    NetworkLocation::new(SegmentId(2), 0.3),
                ],
            )
            .unwrap();
            for seg in [SegmentId(1), SegmentId(2)] {
                let t = 1.9;
                let closed = m.integrated_intensity(&net, seg, t, &hist).unwrap();
                let knots: Vec<f64> =
                    hist.on_segment(&net, seg).unwrap().iter().map(|&(o, _)| o).collect();
                let oracle = math::quadrature_with_knots(
                    |v| m.intensity(&net, NetworkLocation::new(seg, v), &hist).unwrap(),
                    0.0,
                    t,
                    &knots,
                    1e-13,
                );
                let rel = (closed - oracle).abs() / oracle.abs().max(1e-12);
                assert!(rel < 1e-8, "alpha {alpha} seg {seg:?}: {closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn bounds_dominate_for_both_signs() {
        let net = two_chain();
        let hist = PointPattern::new(
            &net,
            vec![
                NetworkLocation::new(SegmentId(1), 0.2),
                NetworkLocation::new(SegmentId(2), 0.4),
            ],
        )
        .unwrap();
        for alpha in [0.8, -0.8] {
            let m =
                Model::nonlinear_hawkes(NonlinearHawkesParams { mu: 0.5, alpha, kappa: 4.0 })
                    .unwrap();
            let t0 = 0.4;
            let (big_m, big_l) = m.thinning_bounds(&net, SegmentId(2), t0, &hist).unwrap();
            for k in 0..=500 {
                let s = t0 + big_l * k as f64 / 500.0;
                let lam =
                    m.intensity(&net, NetworkLocation::new(SegmentId(2), s), &hist).unwrap();
                assert!(lam <= big_m * (1.0 + 1e-9), "alpha {alpha}: {lam} > {big_m}");
            }
        }
    }
}
