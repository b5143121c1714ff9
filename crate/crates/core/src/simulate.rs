//! Exact simulation of a conditional-intensity model on a network.
//!
//! Segments are processed one at a time in topological order, so the history
//! upstream of a segment is always complete before the segment itself is
//! simulated. Two algorithms are provided: the inverse method (unit-rate
//! exponential targets mapped through the inverse of the integrated
//! intensity) and the modified thinning algorithm (candidates from a
//! dominating bound, accepted with probability intensity/bound).
//!
//! All randomness flows from the 64-bit seed in [`SimulationConfig`];
//! identical configurations reproduce bit-identical patterns.

use thiserror::Error;

use crate::model::{
    IntensityModel, MarkedIntensityModel, MarkedSegmentSweep, ModelError, SegmentSweep,
};
use crate::network::{Network, NetworkLocation, SegmentId};
use crate::pattern::{MarkedPointPattern, PointPattern};
use crate::rng::Rng;

/// Simulation algorithm choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Inverse,
    Ogata,
}

/// Configuration for one simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimulationConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    /// Root-solve tolerance for the inverse method, relative to the segment
    /// length (the absolute tolerance on a segment is `tol * length`).
    pub root_solve_tol: f64,
}

impl SimulationConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        Self { algorithm, seed, root_solve_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimulationError {
    #[error("NonfiniteIntensity: model returned {value} at offset {offset} of segment {segment}")]
    NonfiniteIntensity { segment: u32, offset: f64, value: f64 },
    #[error("RootSolveFailure: tolerance unreachable on segment {segment}")]
    RootSolveFailure { segment: u32 },
    #[error("BoundViolation: intensity {intensity} exceeds dominating bound {bound} at offset {offset} of segment {segment}")]
    BoundViolation { segment: u32, offset: f64, intensity: f64, bound: f64 },
    #[error("InvalidTolerance: root-solve tolerance must be positive")]
    InvalidTolerance,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outcome of one inverse-method step on a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InverseStep {
    /// The offset solving `Λ*(u_i(t)) = target`.
    Point(f64),
    /// `Λ*` at the segment end stays below the target.
    Exhausted,
}

/// Outcome of one thinning step on a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OgataStep {
    /// A point was accepted at this offset.
    Accepted(f64),
    /// The clock advanced (rejected candidate or bound-window hop).
    Advance(f64),
    /// The candidate fell beyond the segment end.
    Exhausted,
}

fn ensure_finite(v: f64, seg: SegmentId, offset: f64) -> Result<f64, SimulationError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SimulationError::NonfiniteIntensity { segment: seg.0, offset, value: v })
    }
}

/// Solve `Λ(t) = target` for `t` in `[lo0, seg_len]` on a monotone sweep by
/// bracketed bisection with Newton refinement. Returns `None` when the
/// segment is exhausted (`Λ(seg_len) < target`).
fn solve_target(
    sweep: &dyn SegmentSweep,
    seg: SegmentId,
    seg_len: f64,
    lo0: f64,
    target: f64,
    tol: f64,
) -> Result<Option<f64>, SimulationError> {
    let end_val = ensure_finite(sweep.integrated(seg_len), seg, seg_len)?;
    if end_val < target {
        return Ok(None);
    }
    let mut lo = lo0;
    let mut hi = seg_len;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo < tol {
            return Ok(Some(0.5 * (lo + hi)));
        }
        let f = ensure_finite(sweep.integrated(x), seg, x)? - target;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        // Newton step from x when the derivative is usable, otherwise bisect.
        let lam = sweep.intensity(x);
        let newton = x - f / lam;
        x = if lam > 1e-12 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(SimulationError::RootSolveFailure { segment: seg.0 })
}

/// One inverse-method step: find the offset where the integrated intensity
/// reaches `target`, given `history` (whose same-segment points must all sit
/// at integrated-intensity values below `target`).
pub fn inverse_step(
    model: &dyn IntensityModel,
    net: &Network,
    seg: SegmentId,
    history: &PointPattern,
    target: f64,
    root_solve_tol: f64,
) -> Result<InverseStep, SimulationError> {
    if !(root_solve_tol > 0.0) {
        return Err(SimulationError::InvalidTolerance);
    }
    let idx = net.seg_idx(seg).map_err(ModelError::from)?;
    let seg_len = net.seg_by_idx(idx).length;
    let mut sweep = model.begin_segment(net, seg, history)?;
    let mut lo = 0.0;
    for &(off, _) in history.on_segment_idx(idx) {
        sweep.add_point(off);
        lo = off;
    }
    match solve_target(&*sweep, seg, seg_len, lo, target, root_solve_tol * seg_len)? {
        Some(t) if t < seg_len => Ok(InverseStep::Point(t)),
        _ => Ok(InverseStep::Exhausted),
    }
}

/// One thinning step from offset `t`, exactly the modified thinning recipe:
/// draw `T ~ Exp(M*)` and `U ~ Unif(0,1)`; exhausted when the candidate
/// passes the segment end, advance when `T` overshoots the bound window or
/// the candidate is rejected, accept otherwise.
pub fn ogata_step(
    model: &dyn IntensityModel,
    net: &Network,
    seg: SegmentId,
    t: f64,
    history: &PointPattern,
    rng: &mut Rng,
) -> Result<OgataStep, SimulationError> {
    let idx = net.seg_idx(seg).map_err(ModelError::from)?;
    let seg_len = net.seg_by_idx(idx).length;
    let mut sweep = model.begin_segment(net, seg, history)?;
    for &(off, _) in history.on_segment_idx(idx) {
        if off <= t {
            sweep.add_point(off);
        } else {
            break;
        }
    }
    ogata_advance(&*sweep, seg, seg_len, t, rng)
}

fn ogata_advance(
    sweep: &dyn SegmentSweep,
    seg: SegmentId,
    seg_len: f64,
    t: f64,
    rng: &mut Rng,
) -> Result<OgataStep, SimulationError> {
    let (bound, window) = sweep.bounds(t);
    if bound.is_nan() || bound.is_infinite() {
        return Err(SimulationError::NonfiniteIntensity {
            segment: seg.0,
            offset: t,
            value: bound,
        });
    }
    let wait = rng.exp_rate(bound);
    let u = rng.uniform();
    if t + wait > seg_len {
        return Ok(OgataStep::Exhausted);
    }
    if wait > window {
        return Ok(OgataStep::Advance(t + window));
    }
    let mut cand = t + wait;
    if cand <= t {
        // Subnormal waiting time; nudge off the current offset.
        cand = next_up(t);
        if cand >= seg_len {
            return Ok(OgataStep::Exhausted);
        }
    }
    let lam = ensure_finite(sweep.intensity(cand), seg, cand)?;
    if lam > bound * (1.0 + 1e-9) {
        return Err(SimulationError::BoundViolation {
            segment: seg.0,
            offset: cand,
            intensity: lam,
            bound,
        });
    }
    if u > lam / bound {
        Ok(OgataStep::Advance(cand))
    } else {
        Ok(OgataStep::Accepted(cand))
    }
}

fn next_up(x: f64) -> f64 {
    f64::from_bits(x.to_bits() + 1)
}

/// Simulate an unmarked model over the whole network.
pub fn simulate(
    model: &dyn IntensityModel,
    net: &Network,
    cfg: &SimulationConfig,
) -> Result<PointPattern, SimulationError> {
    if !(cfg.root_solve_tol > 0.0) {
        return Err(SimulationError::InvalidTolerance);
    }
    let mut rng = Rng::from_seed(cfg.seed);
    let mut pattern = PointPattern::empty(net);
    for &idx in net.topo_indices() {
        let seg = net.seg_by_idx(idx).id;
        let seg_len = net.seg_by_idx(idx).length;
        let mut sweep = model.begin_segment(net, seg, &pattern)?;
        match cfg.algorithm {
            Algorithm::Inverse => {
                let tol = cfg.root_solve_tol * seg_len;
                let mut target = 0.0;
                let mut prev = 0.0;
                loop {
                    target += rng.exp1();
                    match solve_target(&*sweep, seg, seg_len, prev, target, tol)? {
                        Some(mut t) => {
                            if t <= prev {
                                t = next_up(prev);
                            }
                            if t >= seg_len {
                                break;
                            }
                            sweep.add_point(t);
                            pattern.append_ascending(idx, t, NetworkLocation::new(seg, t));
                            prev = t;
                        }
                        None => break,
                    }
                }
            }
            Algorithm::Ogata => {
                let mut t = 0.0;
                loop {
                    match ogata_advance(&*sweep, seg, seg_len, t, &mut rng)? {
                        OgataStep::Accepted(x) => {
                            sweep.add_point(x);
                            pattern.append_ascending(idx, x, NetworkLocation::new(seg, x));
                            t = x;
                        }
                        OgataStep::Advance(x) => t = x,
                        OgataStep::Exhausted => break,
                    }
                }
            }
        }
    }
    Ok(pattern)
}

/// Simulate a marked model: points come from the ground intensity and each
/// accepted point draws its mark from the conditional mark distribution at
/// its location given the history so far.
pub fn simulate_marked(
    model: &dyn MarkedIntensityModel,
    net: &Network,
    cfg: &SimulationConfig,
) -> Result<MarkedPointPattern, SimulationError> {
    if !(cfg.root_solve_tol > 0.0) {
        return Err(SimulationError::InvalidTolerance);
    }
    let mut rng = Rng::from_seed(cfg.seed);
    let mut pattern = MarkedPointPattern::empty(net, model.mark_count());
    for &idx in net.topo_indices() {
        let seg = net.seg_by_idx(idx).id;
        let seg_len = net.seg_by_idx(idx).length;
        let mut sweep = model.begin_segment(net, seg, &pattern)?;
        match cfg.algorithm {
            Algorithm::Inverse => {
                let tol = cfg.root_solve_tol * seg_len;
                let mut target = 0.0;
                let mut prev = 0.0;
                loop {
                    target += rng.exp1();
                    match solve_ground(&*sweep, seg, seg_len, prev, target, tol)? {
                        Some(mut t) => {
                            if t <= prev {
                                t = next_up(prev);
                            }
                            if t >= seg_len {
                                break;
                            }
                            let mark = draw_mark(&*sweep, t, &mut rng);
                            sweep.add_point(t, mark);
                            pattern.append_ascending(idx, t, NetworkLocation::new(seg, t), mark);
                            prev = t;
                        }
                        None => break,
                    }
                }
            }
            Algorithm::Ogata => {
                let mut t = 0.0;
                loop {
                    let (bound, window) = sweep.bounds(t);
                    if !bound.is_finite() {
                        return Err(SimulationError::NonfiniteIntensity {
                            segment: seg.0,
                            offset: t,
                            value: bound,
                        });
                    }
                    let wait = rng.exp_rate(bound);
                    let u = rng.uniform();
                    if t + wait > seg_len {
                        break;
                    }
                    if wait > window {
                        t += window;
                        continue;
                    }
                    let mut cand = t + wait;
                    if cand <= t {
                        cand = next_up(t);
                        if cand >= seg_len {
                            break;
                        }
                    }
                    let lam = ensure_finite(sweep.ground_intensity(cand), seg, cand)?;
                    if lam > bound * (1.0 + 1e-9) {
                        return Err(SimulationError::BoundViolation {
                            segment: seg.0,
                            offset: cand,
                            intensity: lam,
                            bound,
                        });
                    }
                    if u > lam / bound {
                        t = cand;
                        continue;
                    }
                    let mark = draw_mark(&*sweep, cand, &mut rng);
                    sweep.add_point(cand, mark);
                    pattern.append_ascending(idx, cand, NetworkLocation::new(seg, cand), mark);
                    t = cand;
                }
            }
        }
    }
    Ok(pattern)
}

fn draw_mark(sweep: &dyn MarkedSegmentSweep, t: f64, rng: &mut Rng) -> u32 {
    let dist = sweep.mark_distribution(t);
    rng.categorical(&dist) as u32 + 1
}

fn solve_ground(
    sweep: &dyn MarkedSegmentSweep,
    seg: SegmentId,
    seg_len: f64,
    lo0: f64,
    target: f64,
    tol: f64,
) -> Result<Option<f64>, SimulationError> {
    let end_val = ensure_finite(sweep.ground_integrated(seg_len), seg, seg_len)?;
    if end_val < target {
        return Ok(None);
    }
    let mut lo = lo0;
    let mut hi = seg_len;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        if hi - lo < tol {
            return Ok(Some(0.5 * (lo + hi)));
        }
        let f = ensure_finite(sweep.ground_integrated(x), seg, x)? - target;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let lam = sweep.ground_intensity(x);
        let newton = x - f / lam;
        x = if lam > 1e-12 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(SimulationError::RootSolveFailure { segment: seg.0 })
}
