//! The directed acyclic linear network (DALN) data model.
//!
//! A network is a finite collection of directed line segments, each with a
//! positive length, joined at shared vertices. Acyclicity is validated at
//! construction, and the constructor caches everything that the rest of the
//! crate queries in hot loops: a deterministic topological order over
//! segments, segment-to-segment reachability, all-pairs directed vertex
//! distances, and (when a root vertex is designated) distances from the root
//! together with lexicographically tie-broken shortest paths.
//!
//! Locations on the network are addressed as `(segment, offset)` with the
//! offset measured from the segment's tail. Offsets live in the closed
//! interval `[0, length]`; interior-only semantics are the business of
//! simulation and likelihood code, which never produce boundary offsets
//! except through [`Network::allocate_vertex_point`].

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Identifier of a vertex, as declared by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

/// Identifier of a directed segment, as declared by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(pub u32);

impl core::fmt::Display for VertexId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl core::fmt::Display for SegmentId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A network vertex. Coordinates are optional and only used for I/O and for
/// deriving Euclidean segment lengths; all algorithms work on lengths alone.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub coords: Option<Vec<f64>>,
}

/// A directed line segment from `tail` to `head` with a fixed length.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedSegment {
    pub id: SegmentId,
    pub tail: VertexId,
    pub head: VertexId,
    pub length: f64,
}

/// Input description of a segment; the length may be omitted when both
/// endpoint vertices carry coordinates.
#[derive(Debug, Clone)]
pub struct SegmentSpec {
    pub id: SegmentId,
    pub tail: VertexId,
    pub head: VertexId,
    pub length: Option<f64>,
}

/// A point on the network: `offset` along the given segment, measured from
/// its tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkLocation {
    pub segment: SegmentId,
    pub offset: f64,
}

impl NetworkLocation {
    pub fn new(segment: SegmentId, offset: f64) -> Self {
        Self { segment, offset }
    }
}

/// A directed path between two locations.
///
/// `segments` lists the traversed segments in order; the first is entered at
/// `entry_offset` and the last is left at `exit_offset`. `split_product` is
/// the product of the out-degrees of the junction vertices crossed between
/// consecutive segments.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedPath {
    pub segments: Vec<SegmentId>,
    pub entry_offset: f64,
    pub exit_offset: f64,
    pub length: f64,
    pub split_product: u64,
}

/// A directed path from a location to a vertex. `split_product` covers the
/// junctions strictly between consecutive segments; the terminal vertex is
/// not included.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexPath {
    pub segments: Vec<SegmentId>,
    pub length: f64,
    pub split_product: u64,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("CycleDetected: directed cycle through segments {0:?}")]
    CycleDetected(Vec<u32>),
    #[error("DanglingVertexRef: segment {segment} references undeclared vertex {vertex}")]
    DanglingVertexRef { segment: u32, vertex: u32 },
    #[error("NonpositiveLength: segment {segment} has length {length}")]
    NonpositiveLength { segment: u32, length: f64 },
    #[error("MissingLengthAndCoords: segment {segment} has no length and endpoint coordinates are unavailable or inconsistent")]
    MissingLengthAndCoords { segment: u32 },
    #[error("DuplicateVertexId: vertex id {0} declared more than once")]
    DuplicateVertexId(u32),
    #[error("DuplicateSegmentId: segment id {0} declared more than once")]
    DuplicateSegmentId(u32),
    #[error("UnknownSegment: no segment with id {0}")]
    UnknownSegment(u32),
    #[error("UnknownVertex: no vertex with id {0}")]
    UnknownVertex(u32),
    #[error("InvalidLocation: offset {offset} outside [0, {length}] on segment {segment}")]
    InvalidLocation { segment: u32, offset: f64, length: f64 },
    #[error("NoRootDesignated: the operation requires a designated root vertex")]
    NoRootDesignated,
    #[error("RootCannotReach: no directed path from the root to segment {segment}")]
    RootCannotReach { segment: u32 },
    #[error("NonpositiveFactor: scale factor {0} must be positive")]
    NonpositiveFactor(f64),
    #[error("AmbiguousAllocation: vertex {0} has no unique allocation segment")]
    AmbiguousAllocation(u32),
    #[error("IsolatedVertex: vertex {0} touches no segment")]
    IsolatedVertex(u32),
}

/// Relative tolerance used to detect ties between shortest-path lengths.
const TIE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct RootData {
    /// Directed distance from the root to each vertex (`inf` if unreachable).
    dist: Vec<f64>,
    /// Lexicographically smallest shortest segment sequence from the root to
    /// each reachable vertex (empty for the root itself).
    path: Vec<Vec<usize>>,
}

/// An immutable, validated DALN with cached orderings and distances.
///
/// Safe to share across threads; all queries are read-only.
#[derive(Debug, Clone)]
pub struct Network {
    vertices: Vec<Vertex>,
    segments: Vec<DirectedSegment>,
    vertex_index: BTreeMap<u32, usize>,
    segment_index: BTreeMap<u32, usize>,
    /// Outgoing/ingoing segment indices per vertex index, sorted by segment id.
    out_segs: Vec<Vec<usize>>,
    in_segs: Vec<Vec<usize>>,
    tail_idx: Vec<usize>,
    head_idx: Vec<usize>,
    /// Segment indices in a deterministic topological order.
    topo: Vec<usize>,
    /// Bitset rows: `reach_up[i]` holds j iff segment j has a directed path
    /// to segment i.
    reach_up: Vec<Vec<u64>>,
    /// Row-major `V x V` directed vertex distances.
    vertex_dist: Vec<f64>,
    root: Option<usize>,
    root_data: Option<RootData>,
    total_length: f64,
}

impl Network {
    /// Validate and build a network from vertex and segment declarations.
    ///
    /// Explicit segment lengths take precedence; otherwise the Euclidean
    /// distance between endpoint coordinates is used.
    pub fn build(
        vertices: Vec<Vertex>,
        segments: Vec<SegmentSpec>,
        root: Option<VertexId>,
    ) -> Result<Self, NetworkError> {
        let mut resolved = Vec::with_capacity(segments.len());
        let vertex_index: BTreeMap<u32, usize> = {
            let mut m = BTreeMap::new();
            for (i, v) in vertices.iter().enumerate() {
                if m.insert(v.id.0, i).is_some() {
                    return Err(NetworkError::DuplicateVertexId(v.id.0));
                }
            }
            m
        };
        for s in &segments {
            let length = match s.length {
                Some(l) => {
                    if !(l > 0.0) || !l.is_finite() {
                        return Err(NetworkError::NonpositiveLength { segment: s.id.0, length: l });
                    }
                    l
                }
                None => {
                    let ti = *vertex_index.get(&s.tail.0).ok_or(NetworkError::DanglingVertexRef {
                        segment: s.id.0,
                        vertex: s.tail.0,
                    })?;
                    let hi = *vertex_index.get(&s.head.0).ok_or(NetworkError::DanglingVertexRef {
                        segment: s.id.0,
                        vertex: s.head.0,
                    })?;
                    let l = euclidean(&vertices[ti], &vertices[hi])
                        .ok_or(NetworkError::MissingLengthAndCoords { segment: s.id.0 })?;
                    if !(l > 0.0) || !l.is_finite() {
                        return Err(NetworkError::NonpositiveLength { segment: s.id.0, length: l });
                    }
                    l
                }
            };
            resolved.push(DirectedSegment { id: s.id, tail: s.tail, head: s.head, length });
        }
        Self::assemble(vertices, resolved, root, false)
    }

    /// Build from fully resolved segments (used internally and by format
    /// loaders that computed lengths themselves).
    pub fn from_parts(
        vertices: Vec<Vertex>,
        segments: Vec<DirectedSegment>,
        root: Option<VertexId>,
    ) -> Result<Self, NetworkError> {
        Self::assemble(vertices, segments, root, false)
    }

    fn assemble(
        vertices: Vec<Vertex>,
        segments: Vec<DirectedSegment>,
        root: Option<VertexId>,
        allow_zero_length: bool,
    ) -> Result<Self, NetworkError> {
        let mut vertex_index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vertex_index.insert(v.id.0, i).is_some() {
                return Err(NetworkError::DuplicateVertexId(v.id.0));
            }
        }
        let mut segment_index = BTreeMap::new();
        for (i, s) in segments.iter().enumerate() {
            if segment_index.insert(s.id.0, i).is_some() {
                return Err(NetworkError::DuplicateSegmentId(s.id.0));
            }
        }
        let nv = vertices.len();
        let ns = segments.len();
        let mut tail_idx = Vec::with_capacity(ns);
        let mut head_idx = Vec::with_capacity(ns);
        let mut out_segs = vec![Vec::new(); nv];
        let mut in_segs = vec![Vec::new(); nv];
        for (i, s) in segments.iter().enumerate() {
            let lo = if allow_zero_length { s.length >= 0.0 } else { s.length > 0.0 };
            if !lo || !s.length.is_finite() {
                return Err(NetworkError::NonpositiveLength { segment: s.id.0, length: s.length });
            }
            let ti = *vertex_index
                .get(&s.tail.0)
                .ok_or(NetworkError::DanglingVertexRef { segment: s.id.0, vertex: s.tail.0 })?;
            let hi = *vertex_index
                .get(&s.head.0)
                .ok_or(NetworkError::DanglingVertexRef { segment: s.id.0, vertex: s.head.0 })?;
            if ti == hi {
                // A self-loop is itself a directed cycle.
                return Err(NetworkError::CycleDetected(vec![s.id.0]));
            }
            tail_idx.push(ti);
            head_idx.push(hi);
            out_segs[ti].push(i);
            in_segs[hi].push(i);
        }
        for list in out_segs.iter_mut().chain(in_segs.iter_mut()) {
            list.sort_by_key(|&i| segments[i].id.0);
        }
        let root_idx = match root {
            Some(r) => {
                Some(*vertex_index.get(&r.0).ok_or(NetworkError::UnknownVertex(r.0))?)
            }
            None => None,
        };

        let topo = topological_sort(&segments, &head_idx, &tail_idx, &out_segs)?;
        let reach_up = reachability(ns, &topo, &head_idx, &tail_idx, &in_segs);
        let vertex_dist = all_pairs_vertex_distances(nv, &segments, &topo, &tail_idx, &head_idx);
        let total_length = segments.iter().map(|s| s.length).sum();

        let mut net = Self {
            vertices,
            segments,
            vertex_index,
            segment_index,
            out_segs,
            in_segs,
            tail_idx,
            head_idx,
            topo,
            reach_up,
            vertex_dist,
            root: root_idx,
            root_data: None,
            total_length,
        };
        if let Some(r) = root_idx {
            net.root_data = Some(net.compute_root_data(r));
        }
        Ok(net)
    }

    /// Single-source shortest distances and lexicographically smallest
    /// shortest segment sequences from `source`, by relaxation in
    /// topological segment order.
    fn compute_root_data(&self, source: usize) -> RootData {
        let nv = self.vertices.len();
        let mut dist = vec![f64::INFINITY; nv];
        let mut path: Vec<Vec<usize>> = vec![Vec::new(); nv];
        dist[source] = 0.0;
        for &si in &self.topo {
            let t = self.tail_idx[si];
            if !dist[t].is_finite() {
                continue;
            }
            let h = self.head_idx[si];
            let cand = dist[t] + self.segments[si].length;
            let tol = TIE_REL_TOL * (1.0 + math::abs(cand));
            if cand < dist[h] - tol {
                dist[h] = cand;
                path[h] = path[t].clone();
                path[h].push(si);
            } else if cand <= dist[h] + tol {
                let mut candidate = path[t].clone();
                candidate.push(si);
                if seq_lex_less(&self.segments, &candidate, &path[h]) {
                    path[h] = candidate;
                }
            }
        }
        RootData { dist, path }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn root(&self) -> Option<VertexId> {
        self.root.map(|i| self.vertices[i].id)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn segments(&self) -> &[DirectedSegment] {
        &self.segments
    }

    pub fn segment(&self, id: SegmentId) -> Result<&DirectedSegment, NetworkError> {
        self.seg_idx(id).map(|i| &self.segments[i])
    }

    pub(crate) fn seg_idx(&self, id: SegmentId) -> Result<usize, NetworkError> {
        self.segment_index.get(&id.0).copied().ok_or(NetworkError::UnknownSegment(id.0))
    }

    pub(crate) fn vertex_idx(&self, id: VertexId) -> Result<usize, NetworkError> {
        self.vertex_index.get(&id.0).copied().ok_or(NetworkError::UnknownVertex(id.0))
    }

    pub(crate) fn seg_by_idx(&self, idx: usize) -> &DirectedSegment {
        &self.segments[idx]
    }

    pub(crate) fn tail_of(&self, idx: usize) -> usize {
        self.tail_idx[idx]
    }

    pub(crate) fn head_of(&self, idx: usize) -> usize {
        self.head_idx[idx]
    }

    pub(crate) fn out_degree(&self, vertex_idx: usize) -> usize {
        self.out_segs[vertex_idx].len()
    }

    /// Segment ids in cached topological order: whenever there is a directed
    /// path from one segment to another, the former appears first. Ties are
    /// broken by ascending segment id, so the order is deterministic.
    pub fn topological_order(&self) -> Vec<SegmentId> {
        self.topo.iter().map(|&i| self.segments[i].id).collect()
    }

    pub(crate) fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    /// True iff there is a directed path of segments from `a` to `b`
    /// (`a != b` required for a `true` result).
    pub fn segment_reaches(&self, a: SegmentId, b: SegmentId) -> Result<bool, NetworkError> {
        let ai = self.seg_idx(a)?;
        let bi = self.seg_idx(b)?;
        Ok(self.reaches_idx(ai, bi))
    }

    pub(crate) fn reaches_idx(&self, a: usize, b: usize) -> bool {
        (self.reach_up[b][a / 64] >> (a % 64)) & 1 == 1
    }

    /// All segments with a directed path to `id`, ascending by segment id.
    pub fn upstream_segments(&self, id: SegmentId) -> Result<Vec<SegmentId>, NetworkError> {
        let i = self.seg_idx(id)?;
        let mut found: Vec<SegmentId> = (0..self.segments.len())
            .filter(|&j| self.reaches_idx(j, i))
            .map(|j| self.segments[j].id)
            .collect();
        found.sort();
        Ok(found)
    }

    /// Check a location and return its segment index.
    pub(crate) fn check_location(&self, u: NetworkLocation) -> Result<usize, NetworkError> {
        let i = self
            .segment_index
            .get(&u.segment.0)
            .copied()
            .ok_or(NetworkError::InvalidLocation {
                segment: u.segment.0,
                offset: u.offset,
                length: f64::NAN,
            })?;
        let len = self.segments[i].length;
        if !u.offset.is_finite() || u.offset < 0.0 || u.offset > len {
            return Err(NetworkError::InvalidLocation {
                segment: u.segment.0,
                offset: u.offset,
                length: len,
            });
        }
        Ok(i)
    }

    /// Validate a location against this network.
    pub fn validate_location(&self, u: NetworkLocation) -> Result<(), NetworkError> {
        self.check_location(u).map(|_| ())
    }

    /// Directed distance between vertices by index (cached).
    pub(crate) fn vertex_dist_idx(&self, a: usize, b: usize) -> f64 {
        self.vertex_dist[a * self.vertices.len() + b]
    }

    /// Length of the shortest directed path from `u` to `v`; `0` when they
    /// coincide and `+inf` when no directed path exists.
    pub fn directed_distance(
        &self,
        u: NetworkLocation,
        v: NetworkLocation,
    ) -> Result<f64, NetworkError> {
        let ui = self.check_location(u)?;
        let vi = self.check_location(v)?;
        Ok(self.distance_idx(ui, u.offset, vi, v.offset))
    }

    pub(crate) fn distance_idx(&self, ui: usize, tu: f64, vi: usize, tv: f64) -> f64 {
        if ui == vi {
            if tu <= tv {
                return tv - tu;
            }
            return f64::INFINITY;
        }
        let exit = self.segments[ui].length - tu;
        let mid = self.vertex_dist_idx(self.head_idx[ui], self.tail_idx[vi]);
        exit + mid + tv
    }

    /// Directed distance from a location to a vertex, travelling forward
    /// along the location's segment first.
    pub fn distance_to_vertex(
        &self,
        u: NetworkLocation,
        w: VertexId,
    ) -> Result<f64, NetworkError> {
        let ui = self.check_location(u)?;
        let wi = self.vertex_idx(w)?;
        Ok(self.distance_to_vertex_idx(ui, u.offset, wi))
    }

    pub(crate) fn distance_to_vertex_idx(&self, ui: usize, tu: f64, wi: usize) -> f64 {
        let exit = self.segments[ui].length - tu;
        exit + self.vertex_dist_idx(self.head_idx[ui], wi)
    }

    /// True iff `u` strictly precedes `v` in the partial order induced by
    /// directions: same segment with a smaller offset, or a directed segment
    /// path between the two segments.
    pub fn precedes(&self, u: NetworkLocation, v: NetworkLocation) -> Result<bool, NetworkError> {
        let ui = self.check_location(u)?;
        let vi = self.check_location(v)?;
        if ui == vi {
            return Ok(u.offset < v.offset);
        }
        Ok(self.reaches_idx(ui, vi))
    }

    /// Enumerate every directed path from `u` to `v` with length at most
    /// `max_length`, in lexicographic order of their segment-id sequences.
    pub fn enumerate_paths(
        &self,
        u: NetworkLocation,
        v: NetworkLocation,
        max_length: f64,
    ) -> Result<Vec<DirectedPath>, NetworkError> {
        let ui = self.check_location(u)?;
        let vi = self.check_location(v)?;
        let mut out = Vec::new();
        if ui == vi {
            if u.offset < v.offset && v.offset - u.offset <= max_length {
                out.push(DirectedPath {
                    segments: vec![self.segments[ui].id],
                    entry_offset: u.offset,
                    exit_offset: v.offset,
                    length: v.offset - u.offset,
                    split_product: 1,
                });
            }
            return Ok(out);
        }
        if !self.reaches_idx(ui, vi) {
            return Ok(out);
        }
        let first_leg = self.segments[ui].length - u.offset;
        if first_leg > max_length {
            return Ok(out);
        }
        let mut stack = vec![ui];
        self.path_dfs(ui, vi, first_leg, 1, max_length, v.offset, u.offset, &mut stack, &mut out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn path_dfs(
        &self,
        cur: usize,
        target: usize,
        acc: f64,
        splits: u64,
        max_length: f64,
        exit_offset: f64,
        entry_offset: f64,
        stack: &mut Vec<usize>,
        out: &mut Vec<DirectedPath>,
    ) {
        let junction = self.head_idx[cur];
        let degree = self.out_segs[junction].len() as u64;
        for &next in &self.out_segs[junction] {
            let splits_next = splits * degree;
            if next == target {
                let total = acc + exit_offset;
                if total <= max_length {
                    let mut segments: Vec<SegmentId> =
                        stack.iter().map(|&i| self.segments[i].id).collect();
                    segments.push(self.segments[next].id);
                    out.push(DirectedPath {
                        segments,
                        entry_offset,
                        exit_offset,
                        length: total,
                        split_product: splits_next,
                    });
                }
                continue;
            }
            if !self.reaches_idx(next, target) {
                continue;
            }
            let acc_next = acc + self.segments[next].length;
            if acc_next > max_length {
                continue;
            }
            stack.push(next);
            self.path_dfs(
                next,
                target,
                acc_next,
                splits_next,
                max_length,
                exit_offset,
                entry_offset,
                stack,
                out,
            );
            stack.pop();
        }
    }

    /// Enumerate directed paths from `u` that end at vertex `w`, with length
    /// at most `max_length`. Junction out-degrees are multiplied only for
    /// transitions strictly inside the path; the terminal vertex `w` is not
    /// counted.
    pub fn paths_to_vertex(
        &self,
        u: NetworkLocation,
        w: VertexId,
        max_length: f64,
    ) -> Result<Vec<VertexPath>, NetworkError> {
        let ui = self.check_location(u)?;
        let wi = self.vertex_idx(w)?;
        let mut out = Vec::new();
        let first_leg = self.segments[ui].length - u.offset;
        if first_leg > max_length {
            return Ok(out);
        }
        let mut stack = vec![ui];
        self.vertex_dfs(ui, wi, first_leg, 1, max_length, &mut stack, &mut out);
        Ok(out)
    }

    fn vertex_dfs(
        &self,
        cur: usize,
        target: usize,
        acc: f64,
        splits: u64,
        max_length: f64,
        stack: &mut Vec<usize>,
        out: &mut Vec<VertexPath>,
    ) {
        let junction = self.head_idx[cur];
        if junction == target {
            out.push(VertexPath {
                segments: stack.iter().map(|&i| self.segments[i].id).collect(),
                length: acc,
                split_product: splits,
            });
            return;
        }
        // Prune branches that cannot reach the target vertex at all.
        if !self.vertex_dist_idx(junction, target).is_finite() {
            return;
        }
        let degree = self.out_segs[junction].len() as u64;
        for &next in &self.out_segs[junction] {
            let acc_next = acc + self.segments[next].length;
            if acc_next > max_length {
                continue;
            }
            stack.push(next);
            self.vertex_dfs(next, target, acc_next, splits * degree, max_length, stack, out);
            stack.pop();
        }
    }

    /// Distance from the designated root to `u`, together with the realized
    /// shortest path as a segment sequence (ending with `u`'s own segment).
    ///
    /// Among equal-length shortest paths the lexicographically smallest
    /// segment-id sequence is chosen.
    pub fn distance_from_root(
        &self,
        u: NetworkLocation,
    ) -> Result<(f64, Vec<SegmentId>), NetworkError> {
        let ui = self.check_location(u)?;
        let data = self.root_data.as_ref().ok_or(NetworkError::NoRootDesignated)?;
        let t = self.tail_idx[ui];
        if !data.dist[t].is_finite() {
            return Err(NetworkError::RootCannotReach { segment: self.segments[ui].id.0 });
        }
        let mut seq: Vec<SegmentId> = data.path[t].iter().map(|&i| self.segments[i].id).collect();
        seq.push(self.segments[ui].id);
        Ok((data.dist[t] + u.offset, seq))
    }

    /// Root distance to the tail vertex of a segment, `inf` if unreachable.
    pub(crate) fn root_dist_to_tail(&self, seg_idx: usize) -> Option<f64> {
        self.root_data.as_ref().map(|d| d.dist[self.tail_idx[seg_idx]])
    }

    /// Segment indices of the root shortest path to the tail of `seg_idx`.
    pub(crate) fn root_path_to_tail(&self, seg_idx: usize) -> Option<&[usize]> {
        self.root_data.as_ref().map(|d| d.path[self.tail_idx[seg_idx]].as_slice())
    }

    /// Resolve a point lying exactly on a vertex to a unique boundary
    /// location: the designated root with a single outgoing segment maps to
    /// offset 0 of that segment, and any other vertex with exactly one
    /// ingoing segment maps to the end of that segment.
    pub fn allocate_vertex_point(&self, v: VertexId) -> Result<NetworkLocation, NetworkError> {
        let vi = self.vertex_idx(v)?;
        if self.root == Some(vi) && self.out_segs[vi].len() == 1 {
            let s = self.out_segs[vi][0];
            return Ok(NetworkLocation::new(self.segments[s].id, 0.0));
        }
        if self.in_segs[vi].len() == 1 {
            let s = self.in_segs[vi][0];
            return Ok(NetworkLocation::new(self.segments[s].id, self.segments[s].length));
        }
        if self.in_segs[vi].is_empty() && self.out_segs[vi].is_empty() {
            return Err(NetworkError::IsolatedVertex(v.0));
        }
        Err(NetworkError::AmbiguousAllocation(v.0))
    }

    /// Same topology with every segment length multiplied by `factor`;
    /// coordinates are dropped because the scaled network is abstract.
    pub fn scale_lengths(&self, factor: f64) -> Result<Network, NetworkError> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(NetworkError::NonpositiveFactor(factor));
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex { id: v.id, coords: None })
            .collect();
        let segments = self
            .segments
            .iter()
            .map(|s| DirectedSegment { length: s.length * factor, ..s.clone() })
            .collect();
        Self::assemble(vertices, segments, self.root(), false)
    }

    /// Same topology with replaced segment lengths, in declaration order.
    ///
    /// Zero lengths are permitted here: residual networks may contain
    /// degenerate segments. Coordinates are dropped.
    pub fn with_segment_lengths(&self, lengths: &[f64]) -> Result<Network, NetworkError> {
        assert_eq!(lengths.len(), self.segments.len(), "one length per segment");
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex { id: v.id, coords: None })
            .collect();
        let segments = self
            .segments
            .iter()
            .zip(lengths)
            .map(|(s, &l)| DirectedSegment { length: l, ..s.clone() })
            .collect();
        Self::assemble(vertices, segments, self.root(), true)
    }
}

fn euclidean(a: &Vertex, b: &Vertex) -> Option<f64> {
    let ca = a.coords.as_ref()?;
    let cb = b.coords.as_ref()?;
    if ca.len() != cb.len() || ca.is_empty() {
        return None;
    }
    let ss: f64 = ca.iter().zip(cb).map(|(x, y)| (x - y) * (x - y)).sum();
    Some(math::sqrt(ss))
}

/// True iff sequence `a` is lexicographically smaller than `b` when compared
/// by segment id.
fn seq_lex_less(segments: &[DirectedSegment], a: &[usize], b: &[usize]) -> bool {
    let ka = a.iter().map(|&i| segments[i].id.0);
    let kb = b.iter().map(|&i| segments[i].id.0);
    ka.cmp(kb) == core::cmp::Ordering::Less
}

/// Kahn's algorithm over the segment-connection DAG with ties broken by
/// ascending segment id. Returns segment indices; errors name one directed
/// cycle when the graph is not acyclic.
fn topological_sort(
    segments: &[DirectedSegment],
    head_idx: &[usize],
    tail_idx: &[usize],
    out_segs: &[Vec<usize>],
) -> Result<Vec<usize>, NetworkError> {
    use alloc::collections::BTreeSet;
    let ns = segments.len();
    // Successors of segment i: segments leaving i's head vertex.
    let mut indegree = vec![0usize; ns];
    for i in 0..ns {
        for &j in &out_segs[head_idx[i]] {
            indegree[j] += 1;
        }
    }
    let mut ready: BTreeSet<(u32, usize)> = (0..ns)
        .filter(|&i| indegree[i] == 0)
        .map(|i| (segments[i].id.0, i))
        .collect();
    let mut order = Vec::with_capacity(ns);
    while let Some(&(id, i)) = ready.iter().next() {
        ready.remove(&(id, i));
        order.push(i);
        for &j in &out_segs[head_idx[i]] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert((segments[j].id.0, j));
            }
        }
    }
    if order.len() == ns {
        return Ok(order);
    }
    // Name one cycle: every unsorted segment still has an unsorted
    // predecessor, so walking predecessors must eventually repeat.
    let mut preds_of = |i: usize| -> usize {
        // Predecessors of i end at i's tail vertex; pick the smallest
        // unsorted one for determinism.
        (0..ns)
            .filter(|&p| head_idx[p] == tail_idx[i] && indegree[p] > 0)
            .min_by_key(|&p| segments[p].id.0)
            .expect("unsorted segment must have an unsorted predecessor")
    };
    let start = (0..ns).find(|&i| indegree[i] > 0).expect("some segment is unsorted");
    let mut seen = vec![usize::MAX; ns];
    let mut walk: Vec<usize> = Vec::new();
    let mut cur = start;
    loop {
        if seen[cur] != usize::MAX {
            // walk[seen[cur]..] is the cycle in reverse traversal order.
            let mut cycle: Vec<u32> =
                walk[seen[cur]..].iter().map(|&i| segments[i].id.0).collect();
            cycle.reverse();
            return Err(NetworkError::CycleDetected(cycle));
        }
        seen[cur] = walk.len();
        walk.push(cur);
        cur = preds_of(cur);
    }
}

/// Per-segment upstream reachability bitsets, computed in topological order.
fn reachability(
    ns: usize,
    topo: &[usize],
    _head_idx: &[usize],
    tail_idx: &[usize],
    in_segs: &[Vec<usize>],
) -> Vec<Vec<u64>> {
    let words = ns.div_ceil(64);
    let mut reach = vec![vec![0u64; words]; ns];
    for &i in topo {
        // Predecessors of i: segments whose head is i's tail.
        let mut row = vec![0u64; words];
        for &p in &in_segs[tail_idx[i]] {
            row[p / 64] |= 1 << (p % 64);
            for (w, bits) in reach[p].iter().enumerate() {
                row[w] |= bits;
            }
        }
        reach[i] = row;
    }
    reach
}

/// All-pairs directed vertex distances by repeated relaxation in topological
/// segment order (correct on DAGs, including zero-length segments).
fn all_pairs_vertex_distances(
    nv: usize,
    segments: &[DirectedSegment],
    topo: &[usize],
    tail_idx: &[usize],
    head_idx: &[usize],
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; nv * nv];
    for s in 0..nv {
        let row = &mut dist[s * nv..(s + 1) * nv];
        row[s] = 0.0;
        for &si in topo {
            let t = tail_idx[si];
            if row[t].is_finite() {
                let cand = row[t] + segments[si].length;
                if cand < row[head_idx[si]] {
                    row[head_idx[si]] = cand;
                }
            }
        }
    }
    dist
}
