//! Hawkes (self-exciting) processes with an exponential kernel, in two
//! flavours that differ in how offspring mass crosses junctions.
//!
//! Plain: `λ*(u) = μ + α Σ_{x→u} γ(d(x, u))` with `d` the shortest directed
//! distance, so a cluster reaching a diverging junction is copied onto every
//! outgoing branch.
//!
//! Modified (`path_split`): the kernel is summed over every directed path
//! `p` from the source to `u` weighted by `1/n_p`, the product of junction
//! out-degrees along `p`, so clusters split at diverging junctions and
//! superpose at converging ones. Path sums are truncated once the remaining
//! kernel mass drops below `PATH_TAIL_EPS`; the same truncated path set
//! backs both the intensity and its integral, so the two stay consistent.
//!
//! Along one segment both flavours share the same sweep state: the upstream
//! contribution collapses into a single scalar `Σ w_j exp(-κ c_j)` which
//! decays exponentially as the sweep advances, and each same-segment point
//! adds one unit of excitation.

use alloc::boxed::Box;

use crate::math;
use crate::model::{
    upstream_exp_sum, HawkesParams, IntensityModel, ModelError, SegmentSweep, PATH_TAIL_EPS,
};
use crate::network::{Network, SegmentId};
use crate::pattern::PointPattern;

#[derive(Debug, Clone, Copy)]
pub struct HawkesModel {
    params: HawkesParams,
    path_split: bool,
}

impl HawkesModel {
    pub fn new(params: HawkesParams, path_split: bool) -> Result<Self, ModelError> {
        let ok = params.mu > 0.0
            && params.alpha > 0.0
            && params.kappa > 0.0
            && params.mu.is_finite()
            && params.alpha.is_finite()
            && params.kappa.is_finite();
        if !ok {
            return Err(ModelError::InvalidParameter("hawkes requires mu, alpha, kappa > 0"));
        }
        Ok(Self { params, path_split })
    }

    pub fn params(&self) -> HawkesParams {
        self.params
    }

    pub fn splits_at_junctions(&self) -> bool {
        self.path_split
    }

    /// Path length beyond which the kernel tail mass is below
    /// `PATH_TAIL_EPS` and paths are discarded.
    pub fn max_kernel_range(&self) -> f64 {
        -math::ln(PATH_TAIL_EPS) / self.params.kappa
    }

    /// The upstream excitation scalar at the tail of `seg_idx`:
    /// `Σ_j w_j exp(-κ c_j)` with `w_j = 1` for the plain model and
    /// `w_j = Σ_paths 1/n_p` for the path-splitting one.
    fn upstream_sum(&self, net: &Network, seg_idx: usize, history: &PointPattern) -> f64 {
        let kappa = self.params.kappa;
        if !self.path_split {
            return upstream_exp_sum(net, seg_idx, history, kappa);
        }
        let tail_vertex = net.tail_of(seg_idx);
        let tail_id = net.seg_by_idx(seg_idx).tail;
        let entry_degree = net.out_degree(tail_vertex) as f64;
        let r_max = self.max_kernel_range();
        let mut sum = 0.0;
        for j in 0..net.segment_count() {
            if !net.reaches_idx(j, seg_idx) {
                continue;
            }
            let seg_j = net.seg_by_idx(j).id;
            for &(off, _) in history.on_segment_idx(j) {
                let loc = crate::network::NetworkLocation::new(seg_j, off);
                let paths = net
                    .paths_to_vertex(loc, tail_id, r_max)
                    .expect("history locations are valid");
                for p in paths {
                    // Entering the segment crosses its tail junction.
                    let n_p = p.split_product as f64 * entry_degree;
                    sum += math::exp(-kappa * p.length) / n_p;
                }
            }
        }
        sum
    }
}

struct HawkesSweep {
    mu: f64,
    alpha: f64,
    kappa: f64,
    seg_len: f64,
    /// `Σ w_j exp(-κ (c_j + last_t))` over upstream points plus
    /// `Σ exp(-κ (last_t - s_j))` over added same-segment points.
    excite: f64,
    last_t: f64,
    accrued: f64,
}

impl HawkesSweep {
    #[inline]
    fn excite_at(&self, t: f64) -> f64 {
        self.excite * math::exp(-self.kappa * (t - self.last_t))
    }
}

impl SegmentSweep for HawkesSweep {
    fn intensity(&self, t: f64) -> f64 {
        self.mu + self.alpha * self.kappa * self.excite_at(t)
    }

    fn integrated(&self, t: f64) -> f64 {
        let dt = t - self.last_t;
        self.accrued + self.mu * dt
            + self.alpha * self.excite * -math::expm1(-self.kappa * dt)
    }

    fn bounds(&self, t: f64) -> (f64, f64) {
        // The excitation only decays while no new points arrive.
        (self.intensity(t), self.seg_len - t)
    }

    fn add_point(&mut self, t: f64) {
        debug_assert!(t >= self.last_t);
        let dt = t - self.last_t;
        self.accrued +=
            self.mu * dt + self.alpha * self.excite * -math::expm1(-self.kappa * dt);
        self.excite = self.excite_at(t) + 1.0;
        self.last_t = t;
    }
}

impl IntensityModel for HawkesModel {
    fn begin_segment(
        &self,
        net: &Network,
        seg: SegmentId,
        history: &PointPattern,
    ) -> Result<Box<dyn SegmentSweep>, ModelError> {
        let idx = net.seg_idx(seg)?;
        let excite = self.upstream_sum(net, idx, history);
        Ok(Box::new(HawkesSweep {
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

    fn chain(lens: &[f64]) -> Network {
        let vertices =
            (0..=lens.len() as u32).map(|i| Vertex { id: VertexId(i), coords: None }).collect();
        let segments = lens
            .iter()
            .enumerate()
            .map(|(i, &l)| SegmentSpec {
                id: SegmentId(i as u32 + 1),
                tail: VertexId(i as u32),
                head: VertexId(i as u32 + 1),
                length: Some(l),
            })
            .collect();
        Network::build(vertices, segments, Some(VertexId(0))).unwrap()
    }

    /// Stem (1) -> split at v1 -> arms 2, 3 -> merge at v2 -> outlet 4.
    fn diamond(arm_a: f64, arm_b: f64) -> Network {
        let v = |id| Vertex { id: VertexId(id), coords: None };
        let s = |id, tail, head, len: f64| SegmentSpec {
            id: SegmentId(id),
            tail: VertexId(tail),
            head: VertexId(head),
            length: Some(len),
        };
        Network::build(
            vec![v(0), v(1), v(2), v(3)],
            vec![s(1, 0, 1, 2.0), s(2, 1, 2, arm_a), s(3, 1, 2, arm_b), s(4, 2, 3, 2.0)],
            Some(VertexId(0)),
        )
        .unwrap()
    }

    fn params() -> HawkesParams {
        HawkesParams { mu: 1.0, alpha: 0.8, kappa: 5.0 }
    }

    #[test]
    fn empty_history_gives_baseline() {
        let net = chain(&[3.0]);
        let m = Model::hawkes(params()).unwrap();
        let empty = PointPattern::empty(&net);
        let lam = m.intensity(&net, NetworkLocation::new(SegmentId(1), 1.0), &empty).unwrap();
        assert!((lam - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_value_at_half_life() {
        // One parent at distance ln(2)/kappa: gamma = kappa/2, so
        // lambda = mu + alpha * kappa / 2 = 1 + 0.8 * 2.5 = 3.
        let net = chain(&[3.0]);
        let m = Model::hawkes(params()).unwrap();
        let s = 1.0;
        let d = math::ln(2.0) / 5.0;
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), s)]).unwrap();
        let lam = m
            .intensity(&net, NetworkLocation::new(SegmentId(1), s + d), &hist)
            .unwrap();
        assert!((lam - 3.0).abs() < 1e-12, "lam = {lam}");
    }

    #[test]
    fn plain_model_uses_shortest_path_only() {
        // Upstream point reaches u along two routes; only the shortest
        // distance enters the plain intensity.
        let net = diamond(1.0, 3.0);
        let m = Model::hawkes(params()).unwrap();
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), 1.5)]).unwrap();
        let u = NetworkLocation::new(SegmentId(4), 0.5);
        let lam = m.intensity(&net, u, &hist).unwrap();
        let d_short = 0.5 + 1.0 + 0.5;
        let expect = 1.0 + 0.8 * 5.0 * math::exp(-5.0 * d_short);
        assert!((lam - expect).abs() < 1e-12);
    }

    #[test]
    fn integrated_empty_and_single_point() {
        let net = chain(&[3.0]);
        let m = Model::hawkes(params()).unwrap();
        let empty = PointPattern::empty(&net);
        let v = m.integrated_intensity(&net, SegmentId(1), 2.0, &empty).unwrap();
        assert!((v - 2.0).abs() < 1e-12);

        // Single same-segment point at s < t: mu t + alpha (1 - e^{-k(t-s)}).
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), 0.5)]).unwrap();
        let t = 2.0;
        let v = m.integrated_intensity(&net, SegmentId(1), t, &hist).unwrap();
        let expect = 1.0 * t + 0.8 * (1.0 - math::exp(-5.0 * 1.5));
        assert!((v - expect).abs() < 1e-12);
    }

    /// Quadrature oracle: the closed-form integral must match numerical
    /// integration of the intensity on every segment of a random history.
    #[test]
    fn integrated_matches_quadrature() {
        let net = diamond(1.0, 3.0);
        for (model, label) in [
            (Model::hawkes(params()).unwrap(), "plain"),
            (Model::modified_hawkes(params()).unwrap(), "modified"),
        ] {
            let hist = PointPattern::new(
                &net,
                vec![
                    NetworkLocation::new(SegmentId(1), 0.3),
                    NetworkLocation::new(SegmentId(1), 1.7),
                    NetworkLocation::new(SegmentId(2), 0.6),
                    NetworkLocation::new(SegmentId(3), 2.2),
                    NetworkLocation::new(SegmentId(4), 0.4),
                    NetworkLocation::new(SegmentId(4), 1.1),
                ],
            )
            .unwrap();
            for seg in [SegmentId(1), SegmentId(2), SegmentId(3), SegmentId(4)] {
                let len = net.segment(seg).unwrap().length;
                let t = 0.9 * len;
                let closed = model.integrated_intensity(&net, seg, t, &hist).unwrap();
                let knots: Vec<f64> = hist
                    .on_segment(&net, seg)
                    .unwrap()
                    .iter()
                    .map(|&(off, _)| off)
                    .collect();
                let oracle = math::quadrature_with_knots(
                    |v| {
                        model
                            .intensity(&net, NetworkLocation::new(seg, v), &hist)
                            .unwrap()
                    },
                    0.0,
                    t,
                    &knots,
                    1e-12,
                );
                let rel = (closed - oracle).abs() / oracle.abs().max(1e-12);
                assert!(rel < 1e-8, "{label} segment {seg:?}: {closed} vs {oracle}");
            }
        }
    }

    #[test]
    fn modified_equals_plain_without_junctions() {
        let net = chain(&[2.0, 3.0]);
        let plain = Model::hawkes(params()).unwrap();
        let modified = Model::modified_hawkes(params()).unwrap();
        let hist = PointPattern::new(
            &net,
            vec![
                NetworkLocation::new(SegmentId(1), 0.5),
                NetworkLocation::new(SegmentId(1), 1.5),
            ],
        )
        .unwrap();
        let u = NetworkLocation::new(SegmentId(2), 1.0);
        let a = plain.intensity(&net, u, &hist).unwrap();
        let b = modified.intensity(&net, u, &hist).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn single_route_through_degree_two_junction_halves_mass() {
        // Remove one arm's connection to u by putting u on arm 2 itself.
        let net = diamond(1.0, 3.0);
        let m = Model::modified_hawkes(params()).unwrap();
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), 1.5)]).unwrap();
        let u = NetworkLocation::new(SegmentId(2), 0.5);
        let lam = m.intensity(&net, u, &hist).unwrap();
        let d = 0.5 + 0.5;
        let expect = 1.0 + 0.8 * (1.0 / 2.0) * 5.0 * math::exp(-5.0 * d);
        assert!((lam - expect).abs() < 1e-12, "{lam} vs {expect}");
    }

    #[test]
    fn equal_arm_diamond_recombines_mass() {
        // Both length-2 routes weighted 1/2 each: the total equals the value
        // of a single unsplit path of the same length.
        let net = diamond(2.0, 2.0);
        let m = Model::modified_hawkes(params()).unwrap();
        let hist =
            PointPattern::new(&net, vec![NetworkLocation::new(SegmentId(1), 1.5)]).unwrap();
        let u = NetworkLocation::new(SegmentId(4), 0.5);
        let lam = m.intensity(&net, u, &hist).unwrap();
        let d = 0.5 + 2.0 + 0.5;
        let expect = 1.0 + 0.8 * 5.0 * math::exp(-5.0 * d);
        assert!((lam - expect).abs() < 1e-12, "{lam} vs {expect}");
    }

    /// Oracle: the sweep-based modified intensity equals the direct path-sum
    /// definition via exhaustive enumeration.
    #[test]
    fn modified_matches_path_enumeration_oracle() {
        let net = diamond(1.0, 3.0);
        let m = match Model::modified_hawkes(params()).unwrap() {
            Model::Hawkes(h) => h,
            _ => unreachable!(),
        };
        let hist = PointPattern::new(
            &net,
            vec![
                NetworkLocation::new(SegmentId(1), 0.4),
                NetworkLocation::new(SegmentId(2), 0.2),
                NetworkLocation::new(SegmentId(3), 1.0),
            ],
        )
        .unwrap();
        let u = NetworkLocation::new(SegmentId(4), 1.3);
        let lam = m.intensity(&net, u, &hist).unwrap();
        let p = params();
        let mut oracle = p.mu;
        for &x in hist.locations() {
            for path in net.enumerate_paths(x, u, m.max_kernel_range() + 10.0).unwrap() {
                oracle += p.alpha / path.split_product as f64
                    * p.kappa
                    * math::exp(-p.kappa * path.length);
            }
        }
        assert!((lam - oracle).abs() < 1e-9, "{lam} vs {oracle}");
    }

    #[test]
    fn bounds_dominate_on_grid() {
        let net = diamond(1.0, 3.0);
        let m = Model::hawkes(params()).unwrap();
        let hist = PointPattern::new(
            &net,
            vec![
                NetworkLocation::new(SegmentId(1), 0.3),
                NetworkLocation::new(SegmentId(4), 0.2),
            ],
        )
        .unwrap();
        let t0 = 0.2;
        let (big_m, big_l) = m.thinning_bounds(&net, SegmentId(4), t0, &hist).unwrap();
        assert!(big_l > 0.0);
        for k in 0..=1000 {
            let s = t0 + big_l * k as f64 / 1000.0;
            let lam = m.intensity(&net, NetworkLocation::new(SegmentId(4), s), &hist).unwrap();
            assert!(lam <= big_m * (1.0 + 1e-9), "lam {lam} > M {big_m} at {s}");
        }
    }
}
