//! Right-most paths and their medial-graph interfaces.
//!
//! A right-most path is a simple oriented lattice path that uses none of its
//! own right-boundary edges; it is the discrete interface between a subgraph
//! and its complement. The module provides the right-boundary enumeration,
//! the right-mostness test, the bijection between right-most paths and
//! medial interfaces, corner-rounded curves with their even-odd hulls, and
//! the circuit decomposition of a connected subgraph together with the
//! coarse-graining quantities `d-per` and `vol`.
//!
//! Orientation convention: counter-clockwise means increasing angle with
//! east = 0° and north = 90°. Right-boundary enumeration at an interior
//! vertex starts after the reversed incoming edge and stops before the
//! outgoing edge, exclusive at both ends. Under this convention the
//! per-vertex right-boundary sizes are exactly
//! `{right turn: 0, straight: 1, left turn: 2, U-turn: 3}`.

use std::collections::HashSet;

use thiserror::Error;

use crate::geom::{common_face, Dir, Edge, OrientedEdge, Vertex};
use crate::lattice::{BoundaryMode, Config, Subgraph};

#[derive(Debug, Error)]
pub enum PathError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("path is not right-most")]
    NotRightMost,
    #[error("expected a circuit")]
    NotCircuit,
    #[error("subgraph must be connected")]
    Disconnected,
    #[error("malformed interface: {0}")]
    BadInterface(String),
}

/// An oriented lattice path, stored by its vertex sequence. A circuit
/// repeats its base vertex at the end.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticePath {
    vertices: Vec<Vertex>,
}

impl LatticePath {
    pub fn new(vertices: Vec<Vertex>) -> Result<LatticePath, PathError> {
        if vertices.is_empty() {
            return Err(PathError::Argument("path needs at least one vertex".into()));
        }
        for pair in vertices.windows(2) {
            if Dir::between(pair[0], pair[1]).is_none() {
                return Err(PathError::Argument(format!(
                    "consecutive vertices {} and {} are not adjacent",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(LatticePath { vertices })
    }

    pub fn single(v: Vertex) -> LatticePath {
        LatticePath { vertices: vec![v] }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_circuit(&self) -> bool {
        !self.is_empty() && self.vertices[0] == self.vertices[self.vertices.len() - 1]
    }

    pub fn start(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn end(&self) -> Vertex {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn edges(&self) -> impl Iterator<Item = OrientedEdge> + '_ {
        self.vertices
            .windows(2)
            .map(|w| OrientedEdge::new(w[0], w[1]))
    }

    /// No oriented edge used twice.
    pub fn is_simple(&self) -> bool {
        let mut seen = HashSet::new();
        self.edges().all(|e| seen.insert(e))
    }

    pub fn reversed(&self) -> LatticePath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        LatticePath { vertices }
    }

    /// Interior (prev, vertex, next) triples; wraps around the base vertex
    /// for circuits.
    fn interior_triples(&self) -> Vec<(Vertex, Vertex, Vertex)> {
        let m = self.len();
        let mut out = Vec::new();
        if m == 0 {
            return out;
        }
        for i in 1..m {
            out.push((self.vertices[i - 1], self.vertices[i], self.vertices[i + 1]));
        }
        if self.is_circuit() {
            out.push((self.vertices[m - 1], self.vertices[0], self.vertices[1]));
        }
        out
    }

    /// The right boundary ∂⁺: all right-boundary edges contributed by
    /// interior vertices (and by the base vertex of a circuit).
    pub fn right_boundary(&self) -> Vec<OrientedEdge> {
        let mut out = Vec::new();
        for (prev, v, next) in self.interior_triples() {
            out.extend(right_boundary_at(Some(prev), v, Some(next)).unwrap());
        }
        out
    }

    /// Line-oriented text form: starting vertex, then one direction letter
    /// per step.
    pub fn to_text(&self) -> String {
        let mut s = format!("start {} {}\n", self.start().x, self.start().y);
        for e in self.edges() {
            s.push(e.dir().letter());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<LatticePath, PathError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| PathError::Argument("empty path text".into()))?;
        let mut parts = head.split_whitespace();
        if parts.next() != Some("start") {
            return Err(PathError::Argument("missing start line".into()));
        }
        let x: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PathError::Argument("bad start x".into()))?;
        let y: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PathError::Argument("bad start y".into()))?;
        let mut vertices = vec![Vertex::new(x, y)];
        for line in lines {
            let c = line.trim().chars().next().unwrap();
            let d = Dir::from_letter(c)
                .ok_or_else(|| PathError::Argument(format!("bad direction letter {c}")))?;
            vertices.push(vertices.last().unwrap().step(d));
        }
        LatticePath::new(vertices)
    }
}

/// Right-boundary edges at a vertex: oriented edges out of `v` strictly
/// between the reversed incoming edge and the outgoing edge, enumerated
/// counter-clockwise and exclusive at both delimiters. Endpoints (a missing
/// `prev` or `next`) contribute nothing.
pub fn right_boundary_at(
    prev: Option<Vertex>,
    v: Vertex,
    next: Option<Vertex>,
) -> Result<Vec<OrientedEdge>, PathError> {
    let (prev, next) = match (prev, next) {
        (Some(p), Some(n)) => (p, n),
        _ => return Ok(Vec::new()),
    };
    let d_in = Dir::between(prev, v).ok_or_else(|| {
        PathError::Argument(format!("prev {prev} is not adjacent to {v}"))
    })?;
    let d_out = Dir::between(v, next).ok_or_else(|| {
        PathError::Argument(format!("next {next} is not adjacent to {v}"))
    })?;
    let mut out = Vec::new();
    let mut c = d_in.reverse().ccw();
    while c != d_out {
        out.push(OrientedEdge::from_dir(v, c));
        c = c.ccw();
    }
    Ok(out)
}

/// True iff the path is simple and no path edge belongs to its own right
/// boundary.
pub fn is_rightmost(path: &LatticePath) -> bool {
    if !path.is_simple() {
        return false;
    }
    let boundary: HashSet<OrientedEdge> = path.right_boundary().into_iter().collect();
    path.edges().all(|e| !boundary.contains(&e))
}

/// A step of an interface either reflects on its medial vertex or cuts
/// through it. Path edges reflect (or sit at an open end); right-boundary
/// edges cut through.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MedialStep {
    Reflect,
    CutThrough,
    End,
}

/// An interface: an edge-self-avoiding oriented path in the medial graph of
/// the lattice, stored as the sequence of lattice edges it visits.
///
/// `path_start` anchors the corresponding lattice path's starting vertex;
/// without it a one-vertex medial sequence could not distinguish a single
/// edge from its reverse, and an out-and-back circuit could not recover its
/// base vertex.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Interface {
    vertices: Vec<Edge>,
    steps: Vec<MedialStep>,
    closed: bool,
    path_start: Vertex,
}

impl Interface {
    pub fn medial_vertices(&self) -> &[Edge] {
        &self.vertices
    }

    pub fn steps(&self) -> &[MedialStep] {
        &self.steps
    }

    pub fn is_circuit(&self) -> bool {
        self.closed
    }

    /// Starting lattice vertex of the corresponding right-most path.
    pub fn path_start(&self) -> Vertex {
        self.path_start
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn neighbors_of(&self, i: usize) -> (Option<Edge>, Option<Edge>) {
        let m = self.vertices.len();
        let prev = if i > 0 {
            Some(self.vertices[i - 1])
        } else if self.closed {
            Some(self.vertices[m - 1])
        } else {
            None
        };
        let next = if i + 1 < m {
            Some(self.vertices[i + 1])
        } else if self.closed {
            Some(self.vertices[0])
        } else {
            None
        };
        (prev, next)
    }

    /// Validate medial adjacency, edge-self-avoidance, and that the stored
    /// reflect/cut flags agree with the face rule.
    pub fn validate(&self) -> Result<(), PathError> {
        if self.vertices.is_empty() {
            return Err(PathError::BadInterface("empty interface".into()));
        }
        if self.vertices.len() != self.steps.len() {
            return Err(PathError::BadInterface("flag count mismatch".into()));
        }
        let m = self.vertices.len();
        let mut medial_edges = HashSet::new();
        let pairs = if self.closed { m } else { m - 1 };
        for i in 0..pairs {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % m];
            // Medial adjacency: distinct perpendicular edges sharing an
            // endpoint (hence consecutive around a face).
            if a == b || a.shared_endpoint(b).is_none() || common_face(a, b).is_none() {
                return Err(PathError::BadInterface(format!(
                    "medial vertices {a:?} and {b:?} are not adjacent"
                )));
            }
            let mut key = [a, b];
            key.sort();
            if !medial_edges.insert(key) {
                return Err(PathError::BadInterface(
                    "interface repeats a medial edge".into(),
                ));
            }
        }
        for i in 0..m {
            let expected = self.classify(i);
            if self.steps[i] != expected {
                return Err(PathError::BadInterface(format!(
                    "flag at {i} is {:?}, face rule says {:?}",
                    self.steps[i], expected
                )));
            }
        }
        Ok(())
    }

    /// Face rule: position `i` reflects iff its interface neighbors bound a
    /// common unit face; open ends are neither.
    fn classify(&self, i: usize) -> MedialStep {
        match self.neighbors_of(i) {
            (Some(a), Some(b)) => {
                if common_face(a, b).is_some() {
                    MedialStep::Reflect
                } else {
                    MedialStep::CutThrough
                }
            }
            _ => MedialStep::End,
        }
    }

    /// The same medial walk traversed backwards. Reflect/cut classification
    /// is symmetric in the neighbors, so corner rounding commutes with
    /// reversal. The underlying lattice walk of the reversal is the reversed
    /// path, which is in general not right-most.
    pub fn reversed(&self) -> Interface {
        // End vertex of the underlying lattice walk.
        let mut cur = self.path_start;
        for (i, e) in self.vertices.iter().enumerate() {
            if self.classify(i) == MedialStep::CutThrough {
                continue;
            }
            cur = if e.a == cur { e.b } else { e.a };
        }
        let mut vertices = self.vertices.clone();
        let mut steps = self.steps.clone();
        if self.closed {
            // Keep the distinguished first vertex first, reverse the rest.
            vertices[1..].reverse();
            steps[1..].reverse();
        } else {
            vertices.reverse();
            steps.reverse();
        }
        Interface {
            vertices,
            steps,
            closed: self.closed,
            path_start: cur,
        }
    }

    /// Line-oriented text form for fixtures: a header with the closure flag
    /// and the path anchor, then one medial vertex per line with its
    /// reflect/cut flag.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "interface {} start {} {}\n",
            if self.closed { "circuit" } else { "open" },
            self.path_start.x,
            self.path_start.y
        );
        for (e, step) in self.vertices.iter().zip(self.steps.iter()) {
            let tag = match step {
                MedialStep::Reflect => 'r',
                MedialStep::CutThrough => 'c',
                MedialStep::End => 'e',
            };
            s.push_str(&format!(
                "{} {} {} {} {}\n",
                e.a.x, e.a.y, e.b.x, e.b.y, tag
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Interface, PathError> {
        let bad = |m: &str| PathError::Argument(format!("interface parse: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| bad("empty"))?;
        let mut parts = head.split_whitespace();
        if parts.next() != Some("interface") {
            return Err(bad("missing header"));
        }
        let closed = match parts.next() {
            Some("circuit") => true,
            Some("open") => false,
            _ => return Err(bad("bad closure flag")),
        };
        if parts.next() != Some("start") {
            return Err(bad("missing start"));
        }
        let sx: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("start x"))?;
        let sy: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("start y"))?;
        let mut vertices = Vec::new();
        let mut steps = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace();
            let mut coord = || -> Result<i32, PathError> {
                it.next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("vertex coordinate"))
            };
            let (ax, ay, bx, by) = (coord()?, coord()?, coord()?, coord()?);
            vertices.push(Edge::new(Vertex::new(ax, ay), Vertex::new(bx, by)));
            steps.push(match it.next() {
                Some("r") => MedialStep::Reflect,
                Some("c") => MedialStep::CutThrough,
                Some("e") => MedialStep::End,
                _ => return Err(bad("bad flag")),
            });
        }
        let iface = Interface {
            vertices,
            steps,
            closed,
            path_start: Vertex::new(sx, sy),
        };
        iface.validate()?;
        Ok(iface)
    }
}

/// Build the interface corresponding to a right-most path: path edges in
/// order, with the right-boundary edges at each interior vertex interleaved
/// in counter-clockwise enumeration order.
pub fn path_to_interface(path: &LatticePath) -> Result<Interface, PathError> {
    if !is_rightmost(path) {
        return Err(PathError::NotRightMost);
    }
    if path.is_empty() {
        return Err(PathError::Argument(
            "a single vertex has no interface; paths need at least one edge".into(),
        ));
    }
    let edges: Vec<OrientedEdge> = path.edges().collect();
    let closed = path.is_circuit();
    let mut vertices = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        vertices.push(e.unoriented());
        let interior = i + 1 < edges.len() || closed;
        if interior {
            let next = edges[(i + 1) % edges.len()];
            let rb = right_boundary_at(Some(e.from), e.to, Some(next.to))?;
            vertices.extend(rb.into_iter().map(|oe| oe.unoriented()));
        }
    }
    let mut iface = Interface {
        steps: vec![MedialStep::Reflect; vertices.len()],
        vertices,
        closed,
        path_start: path.start(),
    };
    for i in 0..iface.vertices.len() {
        iface.steps[i] = iface.classify(i);
    }
    debug_assert!(iface.validate().is_ok());
    Ok(iface)
}

/// Recover the right-most path from an interface: the subsequence of medial
/// vertices that are not cut through, read as the path's edge sequence and
/// walked from the anchored starting vertex.
pub fn interface_to_path(iface: &Interface) -> Result<LatticePath, PathError> {
    iface.validate()?;
    let kept: Vec<Edge> = iface
        .vertices
        .iter()
        .enumerate()
        .filter(|(i, _)| iface.classify(*i) != MedialStep::CutThrough)
        .map(|(_, &e)| e)
        .collect();
    if kept.is_empty() {
        return Err(PathError::BadInterface(
            "interface cuts through every medial vertex".into(),
        ));
    }
    let mut verts: Vec<Vertex> = Vec::with_capacity(kept.len() + 1);
    let mut cur = iface.path_start;
    verts.push(cur);
    for e in kept {
        let next = if e.a == cur {
            e.b
        } else if e.b == cur {
            e.a
        } else {
            return Err(PathError::BadInterface(format!(
                "path edge {e:?} is not incident to the walk at {cur}"
            )));
        };
        verts.push(next);
        cur = next;
    }
    let path = LatticePath::new(verts)?;
    if !is_rightmost(&path) {
        return Err(PathError::NotRightMost);
    }
    Ok(path)
}

/// Oriented right-boundary edges read off an interface: the cut-through
/// medial vertices, oriented to start at the path vertex they hang off.
pub fn interface_cut_edges(iface: &Interface) -> Result<Vec<OrientedEdge>, PathError> {
    let mut out = Vec::new();
    for i in 0..iface.len() {
        if iface.classify(i) != MedialStep::CutThrough {
            continue;
        }
        let (prev, next) = iface.neighbors_of(i);
        let (prev, next) = (
            prev.ok_or_else(|| PathError::BadInterface("cut at open end".into()))?,
            next.ok_or_else(|| PathError::BadInterface("cut at open end".into()))?,
        );
        let e = iface.vertices[i];
        // Both neighbors of a cut-through vertex are incident to the path
        // vertex the right-boundary edge starts at.
        let anchor = [e.a, e.b]
            .into_iter()
            .find(|&u| {
                (prev.a == u || prev.b == u) && (next.a == u || next.b == u)
            })
            .ok_or_else(|| {
                PathError::BadInterface("cut-through vertex has no common anchor".into())
            })?;
        let other = if e.a == anchor { e.b } else { e.a };
        out.push(OrientedEdge::new(anchor, other));
    }
    Ok(out)
}

/// A polyline in the plane, optionally closed.
#[derive(Clone, Debug)]
pub struct PlanarCurve {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

impl PlanarCurve {
    pub fn segments(&self) -> Vec<((f64, f64), (f64, f64))> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            out.push((w[0], w[1]));
        }
        if self.closed && self.points.len() > 1 {
            out.push((self.points[self.points.len() - 1], self.points[0]));
        }
        out
    }

    pub fn length(&self) -> f64 {
        self.segments()
            .iter()
            .map(|&((ax, ay), (bx, by))| ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt())
            .sum()
    }

    pub fn reversed(&self) -> PlanarCurve {
        let mut points = self.points.clone();
        points.reverse();
        PlanarCurve {
            points,
            closed: self.closed,
        }
    }

    /// Signed area by the shoelace formula (meaningful for closed curves;
    /// positive means counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let mut sum = 0.0;
        for &((ax, ay), (bx, by)) in &self.segments() {
            sum += ax * by - bx * ay;
        }
        sum / 2.0
    }

    /// Whether the polyline intersects itself anywhere except at shared
    /// endpoints of consecutive segments.
    pub fn is_simple(&self) -> bool {
        let segs = self.segments();
        let m = segs.len();
        for i in 0..m {
            for j in (i + 1)..m {
                let adjacent = j == i + 1 || (self.closed && i == 0 && j == m - 1);
                if segments_cross(segs[i], segs[j], adjacent) {
                    return false;
                }
            }
        }
        true
    }
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    orient(a, b, p) == 0.0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// Proper or improper intersection of two segments, allowing a shared
/// endpoint when they are consecutive. Coordinates here are dyadic (quarter
/// integers), so the sign tests are exact.
fn segments_cross(
    s: ((f64, f64), (f64, f64)),
    t: ((f64, f64), (f64, f64)),
    adjacent: bool,
) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    if adjacent {
        // Consecutive segments legitimately share one endpoint; any other
        // contact is a self-intersection.
        let shared: Vec<(f64, f64)> = [a, b]
            .iter()
            .filter(|&&p| p == c || p == d)
            .copied()
            .collect();
        if shared.len() == 1 {
            let p = shared[0];
            // The other endpoints must not lie on the partner segment.
            for q in [a, b] {
                if q != p && on_segment(c, d, q) {
                    return true;
                }
            }
            for q in [c, d] {
                if q != p && on_segment(a, b, q) {
                    return true;
                }
            }
            return false;
        }
        return true;
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Corner-round a circuit interface into a simple closed polyline. Each
/// visit of a medial vertex is offset by 1/4 toward the reflected face for
/// reflect steps, and toward the shared lattice endpoint of its neighbors
/// for cut-through steps, so repeated visits separate cleanly. The offset
/// 1/4 keeps every coordinate an exact dyadic.
pub fn corner_round(iface: &Interface) -> Result<PlanarCurve, PathError> {
    if !iface.is_circuit() {
        return Err(PathError::NotCircuit);
    }
    iface.validate()?;
    let mut points = Vec::with_capacity(iface.len());
    for i in 0..iface.len() {
        let e = iface.vertices[i];
        let (mx, my) = e.midpoint();
        let (prev, next) = iface.neighbors_of(i);
        let (prev, next) = (prev.unwrap(), next.unwrap());
        let target = match iface.classify(i) {
            MedialStep::Reflect => {
                let face = common_face(prev, next).ok_or_else(|| {
                    PathError::BadInterface("reflect step without a common face".into())
                })?;
                // Face center of the unit face anchored at its lower-left
                // corner.
                (face.x as f64 + 0.5, face.y as f64 + 0.5)
            }
            MedialStep::CutThrough => {
                let anchor = [e.a, e.b]
                    .into_iter()
                    .find(|&u| {
                        (prev.a == u || prev.b == u) && (next.a == u || next.b == u)
                    })
                    .ok_or_else(|| {
                        PathError::BadInterface(
                            "cut-through vertex has no common anchor".into(),
                        )
                    })?;
                (anchor.x as f64, anchor.y as f64)
            }
            MedialStep::End => unreachable!("circuits have no open ends"),
        };
        let (dx, dy) = (target.0 - mx, target.1 - my);
        // target is at ℓ∞ distance 1/2 from the midpoint along an axis.
        points.push((mx + dx / 2.0, my + dy / 2.0));
    }
    let curve = PlanarCurve {
        points,
        closed: true,
    };
    Ok(curve)
}

/// Region carved out by a closed curve: lattice-point membership by odd
/// winding parity, plus the points on the curve itself.
pub struct Hull<'a> {
    curve: &'a PlanarCurve,
    /// Curve coordinates scaled by 4, which makes them exact integers for
    /// corner-rounded interfaces and integer polygons.
    scaled: Vec<(i64, i64)>,
}

impl<'a> Hull<'a> {
    pub fn new(curve: &'a PlanarCurve) -> Result<Hull<'a>, PathError> {
        if !curve.closed {
            return Err(PathError::NotCircuit);
        }
        if curve.points.is_empty() {
            return Err(PathError::Argument("empty curve".into()));
        }
        let scaled = curve
            .points
            .iter()
            .map(|&(x, y)| {
                let sx = (x * 4.0).round();
                let sy = (y * 4.0).round();
                if (sx - x * 4.0).abs() > 1e-9 || (sy - y * 4.0).abs() > 1e-9 {
                    Err(PathError::Argument(
                        "hull expects quarter-integer curve coordinates".into(),
                    ))
                } else {
                    Ok((sx as i64, sy as i64))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Hull { curve, scaled })
    }

    pub fn curve(&self) -> &PlanarCurve {
        self.curve
    }

    /// Whether a lattice point lies on the curve or has odd winding parity.
    pub fn contains(&self, v: Vertex) -> bool {
        let p = (v.x as i64 * 4, v.y as i64 * 4);
        let m = self.scaled.len();
        // On-curve check, exact in integers.
        for i in 0..m {
            let a = self.scaled[i];
            let b = self.scaled[(i + 1) % m];
            if on_segment_i64(a, b, p) {
                return true;
            }
        }
        // Crossing parity of the horizontal ray to +∞. Crossings are counted
        // with the half-open rule, which handles vertices on the ray.
        let mut crossings = 0u32;
        for i in 0..m {
            let a = self.scaled[i];
            let b = self.scaled[(i + 1) % m];
            let (lo, hi) = if a.1 <= b.1 { (a, b) } else { (b, a) };
            if lo.1 <= p.1 && p.1 < hi.1 {
                // Exact side test: intersection x of the segment with the
                // horizontal line through p, compared to p.0.
                let num = (lo.0 as i128) * ((hi.1 - p.1) as i128)
                    + (hi.0 as i128) * ((p.1 - lo.1) as i128);
                let den = (hi.1 - lo.1) as i128;
                if num > (p.0 as i128) * den {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    /// All lattice points of a centered box that lie in the hull.
    pub fn lattice_points(&self, radius: i32) -> Vec<Vertex> {
        let (mut min_x, mut max_x) = (i64::MAX, i64::MIN);
        let (mut min_y, mut max_y) = (i64::MAX, i64::MIN);
        for &(x, y) in &self.scaled {
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            min_y = min_y.min(y);
            max_y = max_y.max(y);
        }
        let lo_x = (min_x.div_euclid(4) as i32).max(-radius);
        let hi_x = (max_x.div_euclid(4) as i32 + 1).min(radius);
        let lo_y = (min_y.div_euclid(4) as i32).max(-radius);
        let hi_y = (max_y.div_euclid(4) as i32 + 1).min(radius);
        let mut out = Vec::new();
        for y in lo_y..=hi_y {
            for x in lo_x..=hi_x {
                let v = Vertex::new(x, y);
                if self.contains(v) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// The hull's area, by the shoelace formula. Valid when the curve is
    /// simple.
    pub fn area(&self) -> f64 {
        self.curve.signed_area().abs()
    }
}

fn on_segment_i64(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128
        - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
    cross == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

/// |𝔟(γ)| or |𝔟ⁿ(γ)|: the number of distinct open edges in the right
/// boundary, with orientation projected away. `WithinBox` additionally
/// requires both endpoints in the inner box.
pub fn path_weight(path: &LatticePath, config: &Config, mode: BoundaryMode) -> usize {
    weight_edges(path, config, mode).len()
}

/// The distinct open (unoriented) right-boundary edges themselves.
pub fn weight_edges(path: &LatticePath, config: &Config, mode: BoundaryMode) -> Vec<Edge> {
    let mut set: Vec<Edge> = path
        .right_boundary()
        .into_iter()
        .map(|oe| oe.unoriented())
        .filter(|&e| config.is_open(e))
        .filter(|&e| match mode {
            BoundaryMode::Infinite => true,
            BoundaryMode::WithinBox => config.in_inner_box(e.a) && config.in_inner_box(e.b),
        })
        .collect();
    set.sort();
    set.dedup();
    set
}

/// One circuit of the decomposition: the lattice circuit, its interface and
/// the corner-rounded Jordan curve.
pub struct DecompositionPiece {
    pub circuit: LatticePath,
    pub interface: Interface,
    pub curve: PlanarCurve,
}

impl DecompositionPiece {
    /// 𝔟 of the circuit: the distinct open edges among its right-boundary,
    /// read off the interface so the degenerate single-vertex circuit works
    /// too.
    pub fn open_boundary_edges(&self, config: &Config) -> Vec<Edge> {
        let mut out: Vec<Edge> = interface_cut_edges(&self.interface)
            .expect("decomposition interfaces are valid")
            .into_iter()
            .map(|oe| oe.unoriented())
            .filter(|&e| config.is_open(e))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Circuit decomposition of a connected subgraph: an outer counter-clockwise
/// right-most circuit and one clockwise circuit per pocket of finite
/// complementary components, together with `d-per` and the `vol` region
/// data.
pub struct CircuitDecomposition {
    pub outer: DecompositionPiece,
    pub inner: Vec<DecompositionPiece>,
    /// Finite complementary components, grouped by the inner circuit that
    /// carves them (index into `inner`).
    pub pockets: Vec<Vec<Vec<Vertex>>>,
    /// Finite complementary components attached outside the outer circuit;
    /// they are excluded from the hull without a carving circuit.
    pub outside_components: Vec<Vec<Vertex>>,
}

impl CircuitDecomposition {
    /// d-per(U) = |γ| + Σ|γ_j|.
    pub fn dper(&self) -> usize {
        self.outer.circuit.len() + self.inner.iter().map(|p| p.circuit.len()).sum::<usize>()
    }

    /// Leb(vol(U)): area of the outer hull minus the carved pockets.
    pub fn vol_area(&self) -> f64 {
        let outer = self.outer.curve.signed_area().abs();
        let inner: f64 = self
            .inner
            .iter()
            .map(|p| p.curve.signed_area().abs())
            .sum();
        outer - inner
    }

    pub fn well_proportioned(&self) -> bool {
        (self.dper() as f64) <= self.vol_area().powf(2.0 / 3.0)
    }
}

/// Wall-follower transition: entering `v` heading `d_in`, leave along the
/// first open in-set direction counter-clockwise after the reversal of the
/// incoming edge (try right, straight, left, then the U-turn back). The
/// skipped directions are exactly the right-boundary edges of the resulting
/// circuit at this visit.
fn follow(u: &Subgraph, v: Vertex, d_in: Dir) -> Option<Dir> {
    let mut c = d_in.reverse().ccw();
    for _ in 0..4 {
        let w = v.step(c);
        if u.contains(w) && u.config.is_open_step(v, c) {
            return Some(c);
        }
        c = c.ccw();
    }
    None
}

fn trace_cycle(u: &Subgraph, start: OrientedEdge) -> LatticePath {
    let mut verts = vec![start.from, start.to];
    let mut cur = start;
    loop {
        let d = follow(u, cur.to, cur.dir()).expect("vertex with an incoming edge has an exit");
        let next = OrientedEdge::from_dir(cur.to, d);
        if next == start {
            break;
        }
        verts.push(next.to);
        cur = next;
    }
    LatticePath { vertices: verts }
}

/// The reference oriented edge of the cycle that a directed probe `(v, d)`
/// with `d` pointing out of the set falls into: the cycle through the state
/// that skips `(v, d)` as a right-boundary edge.
fn cycle_state_skipping(u: &Subgraph, v: Vertex, d: Dir) -> Option<OrientedEdge> {
    let mut c = d.ccw();
    for _ in 0..3 {
        let w = v.step(c);
        if u.contains(w) && u.config.is_open_step(v, c) {
            return Some(OrientedEdge::new(v, w));
        }
        c = c.ccw();
    }
    None
}

fn canonical_state(u: &Subgraph, start: OrientedEdge) -> OrientedEdge {
    let mut best = start;
    let mut cur = start;
    loop {
        let d = follow(u, cur.to, cur.dir()).expect("cycle state has an exit");
        cur = OrientedEdge::from_dir(cur.to, d);
        if cur < best {
            best = cur;
        }
        if cur == start {
            return best;
        }
    }
}

/// Decompose a connected subgraph of the cluster trace into its boundary
/// circuits and verify nothing structural is off. The construction traces
/// the vertex set's boundary walls directly instead of mirroring the
/// inductive proof of the decomposition's existence.
pub fn circuit_decomposition(u: &Subgraph) -> Result<CircuitDecomposition, PathError> {
    if u.is_empty() {
        return Err(PathError::Argument("empty subgraph".into()));
    }
    if !u.is_connected() {
        return Err(PathError::Disconnected);
    }
    if u.len() == 1 {
        return singleton_decomposition(u);
    }

    // Outer circuit: anchored at the bottom-most, then left-most vertex,
    // entered as if heading east so the unbounded face sits on the right.
    let v0 = *u
        .vertices
        .iter()
        .min_by_key(|v| (v.y, v.x))
        .expect("nonempty");
    let d0 = follow(u, v0, Dir::E).ok_or_else(|| {
        PathError::Argument("subgraph of size > 1 with an isolated vertex".into())
    })?;
    let outer_circuit = trace_cycle(u, OrientedEdge::from_dir(v0, d0));
    let outer = make_piece(outer_circuit)?;
    if outer.curve.signed_area() <= 0.0 {
        return Err(PathError::BadInterface(
            "outer circuit is not counter-clockwise".into(),
        ));
    }

    // Finite complementary components of the trace: flood the trace minus U;
    // components touching the padded box boundary stand in for the infinite
    // one.
    let components = complementary_components(u);
    let outer_canon = canonical_state(u, outer.circuit.edges().next().unwrap());

    let mut cycle_ids: Vec<OrientedEdge> = Vec::new();
    let mut grouped: Vec<Vec<Vec<Vertex>>> = Vec::new();
    let mut outside = Vec::new();
    for comp in components {
        // Anchor the pocket: an open edge from U into the component.
        let (anchor_v, anchor_d) = pocket_anchor(u, &comp)?;
        let state = cycle_state_skipping(u, anchor_v, anchor_d).ok_or_else(|| {
            PathError::BadInterface("pocket anchor vertex has no circuit exit".into())
        })?;
        let canon = canonical_state(u, state);
        if canon == outer_canon {
            outside.push(comp);
            continue;
        }
        match cycle_ids.iter().position(|&c| c == canon) {
            Some(i) => grouped[i].push(comp),
            None => {
                cycle_ids.push(canon);
                grouped.push(vec![comp]);
            }
        }
    }

    let mut inner = Vec::new();
    for canon in &cycle_ids {
        let piece = make_piece(trace_cycle(u, *canon))?;
        if piece.curve.signed_area() >= 0.0 {
            return Err(PathError::BadInterface(
                "inner circuit is not clockwise".into(),
            ));
        }
        inner.push(piece);
    }
    Ok(CircuitDecomposition {
        outer,
        inner,
        pockets: grouped,
        outside_components: outside,
    })
}

fn make_piece(circuit: LatticePath) -> Result<DecompositionPiece, PathError> {
    let interface = path_to_interface(&circuit)?;
    let curve = corner_round(&interface)?;
    Ok(DecompositionPiece {
        circuit,
        interface,
        curve,
    })
}

/// The degenerate decomposition of a single vertex: an empty lattice circuit
/// whose interface is the diamond of the four incident edges, every step a
/// cut-through.
fn singleton_decomposition(u: &Subgraph) -> Result<CircuitDecomposition, PathError> {
    let v = u.vertices[0];
    let vertices: Vec<Edge> = [Dir::E, Dir::N, Dir::W, Dir::S]
        .into_iter()
        .map(|d| Edge::new(v, v.step(d)))
        .collect();
    let iface = Interface {
        steps: vec![MedialStep::CutThrough; 4],
        vertices,
        closed: true,
        path_start: v,
    };
    iface.validate().map_err(|e| {
        PathError::BadInterface(format!("singleton diamond failed validation: {e}"))
    })?;
    let curve = corner_round(&iface)?;
    Ok(CircuitDecomposition {
        outer: DecompositionPiece {
            circuit: LatticePath::single(v),
            interface: iface,
            curve,
        },
        inner: Vec::new(),
        pockets: Vec::new(),
        outside_components: complementary_components(u),
    })
}

/// Finite connected components of (trace ∖ U): flood fill over open edges;
/// components reaching the padded box boundary are treated as the infinite
/// component and dropped.
fn complementary_components(u: &Subgraph) -> Vec<Vec<Vertex>> {
    let config = &u.config;
    let radius = config.radius();
    let mut seen: HashSet<Vertex> = HashSet::new();
    let mut out = Vec::new();
    // Only components adjacent to U through open edges matter: every finite
    // component of the trace complement of a trace subgraph touches U.
    let mut candidates = Vec::new();
    for &v in &u.vertices {
        for d in [Dir::E, Dir::N, Dir::W, Dir::S] {
            let w = v.step(d);
            if config.is_open_step(v, d) && !u.contains(w) && u.in_trace(w) {
                candidates.push(w);
            }
        }
    }
    for start in candidates {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        seen.insert(start);
        let mut touches_boundary = false;
        while let Some(v) = stack.pop() {
            if v.x.abs() == radius || v.y.abs() == radius {
                touches_boundary = true;
            }
            for d in [Dir::E, Dir::N, Dir::W, Dir::S] {
                let w = v.step(d);
                if config.is_open_step(v, d)
                    && u.in_trace(w)
                    && !u.contains(w)
                    && seen.insert(w)
                {
                    comp.push(w);
                    stack.push(w);
                }
            }
        }
        if !touches_boundary {
            comp.sort();
            out.push(comp);
        }
    }
    out.sort();
    out
}

fn pocket_anchor(u: &Subgraph, comp: &[Vertex]) -> Result<(Vertex, Dir), PathError> {
    for &w in comp {
        for d in [Dir::E, Dir::N, Dir::W, Dir::S] {
            let v = w.step(d);
            if u.contains(v) && u.config.is_open_step(w, d) {
                return Ok((v, d.reverse()));
            }
        }
    }
    Err(PathError::BadInterface(
        "complementary component with no open edge into the subgraph".into(),
    ))
}

/// d-per(U), Leb(vol(U)) and the well-proportioned flag.
pub fn dper_vol(u: &Subgraph) -> Result<(usize, f64, bool), PathError> {
    let d = circuit_decomposition(u)?;
    Ok((d.dper(), d.vol_area(), d.well_proportioned()))
}

/// Exhaustively enumerate every right-most path from the origin with at most
/// `max_len` edges. With `fix_first`, the first step is pinned east, which
/// quotients out the four-fold rotation symmetry in expensive sweeps.
pub fn enumerate_rightmost(max_len: usize, fix_first: bool) -> Vec<LatticePath> {
    let mut out = Vec::new();
    let start = Vertex::new(0, 0);
    let mut stack: Vec<LatticePath> = Vec::new();
    let first_dirs: &[Dir] = if fix_first {
        &[Dir::E]
    } else {
        &crate::geom::DIRS
    };
    for &d in first_dirs {
        stack.push(LatticePath {
            vertices: vec![start, start.step(d)],
        });
    }
    while let Some(p) = stack.pop() {
        if is_rightmost(&p) {
            if p.len() < max_len {
                for d in crate::geom::DIRS {
                    let mut verts = p.vertices.clone();
                    verts.push(p.end().step(d));
                    stack.push(LatticePath { vertices: verts });
                }
            }
            out.push(p);
        }
    }
    out
}
