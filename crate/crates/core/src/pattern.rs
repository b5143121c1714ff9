//! Point patterns and marked point patterns on a network.
//!
//! A pattern stores per-segment strictly increasing offset lists plus stable
//! point ids in insertion order. Patterns are immutable once built and are
//! always interpreted relative to the network they were validated against.
//!
//! Genealogy relations follow the directed structure: the ancestors of a
//! point are all pattern points that precede it, and its parents are the
//! ancestors from which some directed path reaches it without passing over
//! another pattern point.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::network::{Network, NetworkError, NetworkLocation, SegmentId};

/// Stable identifier of a point within one pattern (insertion order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointId(pub u32);

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PatternError {
    #[error("UnknownPoint: no point with id {0}")]
    UnknownPoint(u32),
    #[error("DuplicatePoint: two points at offset {offset} on segment {segment}")]
    DuplicatePoint { segment: u32, offset: f64 },
    #[error("InvalidMark: label {label} outside mark space 1..={mark_count}")]
    InvalidMark { label: u32, mark_count: u32 },
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Distance from a parent point to one of its children.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntereventRecord {
    pub child: PointId,
    pub parent: PointId,
    pub distance: f64,
    /// True iff parent and child lie on different segments, i.e. the
    /// connecting path crosses at least one junction.
    pub crossing: bool,
}

/// An immutable point pattern on a network.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointPattern {
    points: Vec<NetworkLocation>,
    /// Per segment index: (offset, id), strictly increasing in offset.
    per_segment: Vec<Vec<(f64, PointId)>>,
}

impl PointPattern {
    /// Validate locations against `net` and build a pattern.
    ///
    /// Offsets exactly on a segment boundary are resolved through the
    /// vertex-point allocation rule, which may remap them to the canonical
    /// boundary location (the end of the vertex's unique ingoing segment).
    /// Duplicate canonical locations are rejected.
    pub fn new(net: &Network, locations: Vec<NetworkLocation>) -> Result<Self, PatternError> {
        let mut canonical = Vec::with_capacity(locations.len());
        for loc in locations {
            let idx = net.check_location(loc)?;
            let seg = net.seg_by_idx(idx);
            let resolved = if loc.offset == 0.0 {
                net.allocate_vertex_point(seg.tail)?
            } else if loc.offset == seg.length {
                net.allocate_vertex_point(seg.head)?
            } else {
                loc
            };
            canonical.push(resolved);
        }
        Self::from_locations_unchecked(net, canonical)
    }

    /// Build from already-canonical locations (still checks ordering and
    /// duplicates).
    pub(crate) fn from_locations_unchecked(
        net: &Network,
        locations: Vec<NetworkLocation>,
    ) -> Result<Self, PatternError> {
        let mut per_segment: Vec<Vec<(f64, PointId)>> = vec![Vec::new(); net.segment_count()];
        let mut points = Vec::with_capacity(locations.len());
        for (k, loc) in locations.iter().enumerate() {
            let idx = net.check_location(*loc)?;
            per_segment[idx].push((loc.offset, PointId(k as u32)));
            points.push(*loc);
        }
        for (idx, list) in per_segment.iter_mut().enumerate() {
            list.sort_by(|a, b| a.0.total_cmp(&b.0));
            for pair in list.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(PatternError::DuplicatePoint {
                        segment: net.seg_by_idx(idx).id.0,
                        offset: pair[0].0,
                    });
                }
            }
        }
        Ok(Self { points, per_segment })
    }

    /// Empty pattern shaped for `net`.
    pub fn empty(net: &Network) -> Self {
        Self { points: Vec::new(), per_segment: vec![Vec::new(); net.segment_count()] }
    }

    /// Build from per-segment offset lists, assigning ids segment by segment.
    pub(crate) fn from_per_segment(
        net: &Network,
        offsets: Vec<Vec<f64>>,
    ) -> Result<Self, PatternError> {
        let mut locations = Vec::new();
        for (idx, list) in offsets.iter().enumerate() {
            let id = net.seg_by_idx(idx).id;
            for &t in list {
                locations.push(NetworkLocation::new(id, t));
            }
        }
        Self::from_locations_unchecked(net, locations)
    }

    /// Append a point with an offset strictly above every existing point on
    /// the segment (simulation emits points in sweep order).
    pub(crate) fn append_ascending(&mut self, seg_idx: usize, offset: f64, loc: NetworkLocation) {
        debug_assert!(self
            .per_segment[seg_idx]
            .last()
            .map(|&(t, _)| t < offset)
            .unwrap_or(true));
        let id = PointId(self.points.len() as u32);
        self.points.push(loc);
        self.per_segment[seg_idx].push((offset, id));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn location(&self, id: PointId) -> Result<NetworkLocation, PatternError> {
        self.points
            .get(id.0 as usize)
            .copied()
            .ok_or(PatternError::UnknownPoint(id.0))
    }

    /// All locations by point id.
    pub fn locations(&self) -> &[NetworkLocation] {
        &self.points
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.points.len() as u32).map(PointId)
    }

    /// (offset, id) pairs on one segment, ascending in offset.
    pub(crate) fn on_segment_idx(&self, seg_idx: usize) -> &[(f64, PointId)] {
        &self.per_segment[seg_idx]
    }

    /// (offset, id) pairs on one segment by id, ascending in offset.
    pub fn on_segment(
        &self,
        net: &Network,
        seg: SegmentId,
    ) -> Result<&[(f64, PointId)], PatternError> {
        Ok(&self.per_segment[net.seg_idx(seg)?])
    }

    /// Number of points on the segment with offset strictly below `t`.
    pub(crate) fn count_below(&self, seg_idx: usize, t: f64) -> usize {
        self.per_segment[seg_idx].partition_point(|&(off, _)| off < t)
    }

    fn seg_and_offset(&self, net: &Network, id: PointId) -> Result<(usize, f64), PatternError> {
        let loc = self.location(id)?;
        Ok((net.seg_idx(loc.segment)?, loc.offset))
    }

    /// Every pattern point that strictly precedes `x` in the directed order.
    pub fn ancestors(&self, net: &Network, x: PointId) -> Result<Vec<PointId>, PatternError> {
        let (si, t) = self.seg_and_offset(net, x)?;
        let mut out = Vec::new();
        for j in 0..net.segment_count() {
            if net.reaches_idx(j, si) {
                out.extend(self.per_segment[j].iter().map(|&(_, id)| id));
            }
        }
        out.extend(
            self.per_segment[si]
                .iter()
                .take_while(|&&(off, _)| off < t)
                .map(|&(_, id)| id),
        );
        out.sort();
        Ok(out)
    }

    /// Every pattern point that `x` strictly precedes.
    pub fn descendants(&self, net: &Network, x: PointId) -> Result<Vec<PointId>, PatternError> {
        let (si, t) = self.seg_and_offset(net, x)?;
        let mut out = Vec::new();
        for j in 0..net.segment_count() {
            if net.reaches_idx(si, j) {
                out.extend(self.per_segment[j].iter().map(|&(_, id)| id));
            }
        }
        out.extend(
            self.per_segment[si]
                .iter()
                .skip_while(|&&(off, _)| off <= t)
                .map(|&(_, id)| id),
        );
        out.sort();
        Ok(out)
    }

    /// Ancestors from which some directed path reaches `x` without passing
    /// over another pattern point.
    ///
    /// Every path into the interior of `x`'s segment either starts on that
    /// segment below `x` or enters through the segment's tail vertex; in the
    /// first case only the nearest point below can be unobstructed, and in
    /// the second the search walks backwards through point-free segments.
    pub fn parents(&self, net: &Network, x: PointId) -> Result<Vec<PointId>, PatternError> {
        let (si, t) = self.seg_and_offset(net, x)?;
        let below = self.count_below(si, t);
        if below > 0 {
            return Ok(vec![self.per_segment[si][below - 1].1]);
        }
        let mut found = BTreeSet::new();
        let mut visited = BTreeSet::new();
        let mut stack = vec![net.tail_of(si)];
        while let Some(w) = stack.pop() {
            if !visited.insert(w) {
                continue;
            }
            for s in self.in_segments_of_vertex(net, w) {
                if let Some(&(_, id)) = self.per_segment[s].last() {
                    found.insert(id);
                } else {
                    stack.push(net.tail_of(s));
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    /// Descendants reachable from `x` by some path free of other pattern
    /// points (mirror of [`PointPattern::parents`]).
    pub fn children(&self, net: &Network, x: PointId) -> Result<Vec<PointId>, PatternError> {
        let (si, t) = self.seg_and_offset(net, x)?;
        let above = self.per_segment[si].partition_point(|&(off, _)| off <= t);
        if above < self.per_segment[si].len() {
            return Ok(vec![self.per_segment[si][above].1]);
        }
        let mut found = BTreeSet::new();
        let mut visited = BTreeSet::new();
        let mut stack = vec![net.head_of(si)];
        while let Some(w) = stack.pop() {
            if !visited.insert(w) {
                continue;
            }
            for s in self.out_segments_of_vertex(net, w) {
                if let Some(&(_, id)) = self.per_segment[s].first() {
                    found.insert(id);
                } else {
                    stack.push(net.head_of(s));
                }
            }
        }
        Ok(found.into_iter().collect())
    }

    fn in_segments_of_vertex(&self, net: &Network, w: usize) -> Vec<usize> {
        (0..net.segment_count()).filter(|&s| net.head_of(s) == w).collect()
    }

    fn out_segments_of_vertex(&self, net: &Network, w: usize) -> Vec<usize> {
        (0..net.segment_count()).filter(|&s| net.tail_of(s) == w).collect()
    }

    /// One record per (parent, child) pair over all pattern points, ordered
    /// by child id then parent id.
    pub fn interevent_records(&self, net: &Network) -> Vec<IntereventRecord> {
        let mut out = Vec::new();
        for child in self.ids() {
            let child_loc = self.points[child.0 as usize];
            let parents = self.parents(net, child).expect("ids are valid");
            for parent in parents {
                let parent_loc = self.points[parent.0 as usize];
                let distance = net
                    .directed_distance(parent_loc, child_loc)
                    .expect("pattern locations are valid");
                out.push(IntereventRecord {
                    child,
                    parent,
                    distance,
                    crossing: parent_loc.segment != child_loc.segment,
                });
            }
        }
        out
    }

    /// The sub-pattern of points strictly preceding location `u` (points on
    /// segments upstream of `u`'s segment plus same-segment points at
    /// smaller offsets). Point ids are re-assigned in the sub-pattern.
    pub fn history_before(
        &self,
        net: &Network,
        u: NetworkLocation,
    ) -> Result<PointPattern, PatternError> {
        let ui = net.check_location(u)?;
        let mut locations = Vec::new();
        for j in 0..net.segment_count() {
            if net.reaches_idx(j, ui) {
                let seg_id = net.seg_by_idx(j).id;
                locations
                    .extend(self.per_segment[j].iter().map(|&(t, _)| NetworkLocation::new(seg_id, t)));
            }
        }
        let seg_id = net.seg_by_idx(ui).id;
        locations.extend(
            self.per_segment[ui]
                .iter()
                .take_while(|&&(t, _)| t < u.offset)
                .map(|&(t, _)| NetworkLocation::new(seg_id, t)),
        );
        Self::from_locations_unchecked(net, locations)
    }
}

/// A point pattern with a finite mark attached to every point. Marks are
/// integer labels `1..=mark_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedPointPattern {
    base: PointPattern,
    marks: Vec<u32>,
    mark_count: u32,
}

impl MarkedPointPattern {
    /// Build from (location, mark) pairs. When `mark_count` is `None` the
    /// mark space is `1..=max(label)`.
    pub fn new(
        net: &Network,
        points: Vec<(NetworkLocation, u32)>,
        mark_count: Option<u32>,
    ) -> Result<Self, PatternError> {
        let k = match mark_count {
            Some(k) => k,
            None => points.iter().map(|&(_, m)| m).max().unwrap_or(1),
        };
        for &(_, m) in &points {
            if m == 0 || m > k {
                return Err(PatternError::InvalidMark { label: m, mark_count: k });
            }
        }
        let (locations, marks): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        let base = PointPattern::new(net, locations)?;
        Ok(Self { base, marks, mark_count: k })
    }

    pub(crate) fn empty(net: &Network, mark_count: u32) -> Self {
        Self { base: PointPattern::empty(net), marks: Vec::new(), mark_count }
    }

    pub(crate) fn append_ascending(
        &mut self,
        seg_idx: usize,
        offset: f64,
        loc: NetworkLocation,
        mark: u32,
    ) {
        self.base.append_ascending(seg_idx, offset, loc);
        self.marks.push(mark);
    }

    pub fn base(&self) -> &PointPattern {
        &self.base
    }

    pub fn mark_count(&self) -> u32 {
        self.mark_count
    }

    pub fn mark_of(&self, id: PointId) -> Result<u32, PatternError> {
        self.marks
            .get(id.0 as usize)
            .copied()
            .ok_or(PatternError::UnknownPoint(id.0))
    }

    pub fn marks(&self) -> &[u32] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// The unmarked sub-pattern of points carrying mark `m` (ids re-assigned).
    pub fn with_mark(&self, net: &Network, m: u32) -> Result<PointPattern, PatternError> {
        if m == 0 || m > self.mark_count {
            return Err(PatternError::InvalidMark { label: m, mark_count: self.mark_count });
        }
        let locations: Vec<NetworkLocation> = self
            .base
            .ids()
            .filter(|&id| self.marks[id.0 as usize] == m)
            .map(|id| self.base.locations()[id.0 as usize])
            .collect();
        PointPattern::from_locations_unchecked(net, locations)
    }

    /// Marks of the points on one segment, ascending in offset.
    pub(crate) fn marks_on_segment_idx(&self, seg_idx: usize) -> Vec<(f64, u32)> {
        self.base
            .on_segment_idx(seg_idx)
            .iter()
            .map(|&(t, id)| (t, self.marks[id.0 as usize]))
            .collect()
    }
}
