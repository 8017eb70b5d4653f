//! Lattice geometry primitives: vertices, the four axis directions in
//! counter-clockwise order, and canonical / oriented edges.

use std::fmt;

/// A vertex of the square lattice.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Vertex {
    pub x: i32,
    pub y: i32,
}

impl Vertex {
    pub const fn new(x: i32, y: i32) -> Self {
        Vertex { x, y }
    }

    pub fn step(self, d: Dir) -> Vertex {
        let (dx, dy) = d.offset();
        Vertex::new(self.x + dx, self.y + dy)
    }

    /// ℓ∞ distance to a point of the plane.
    pub fn linf_to(self, px: f64, py: f64) -> f64 {
        (self.x as f64 - px).abs().max((self.y as f64 - py).abs())
    }

    pub fn l2_to(self, px: f64, py: f64) -> f64 {
        ((self.x as f64 - px).powi(2) + (self.y as f64 - py).powi(2)).sqrt()
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Axis direction, indexed in counter-clockwise order with east as the
/// angular datum: `E = 0, N = 1, W = 2, S = 3`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Dir {
    E = 0,
    N = 1,
    W = 2,
    S = 3,
}

pub const DIRS: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

impl Dir {
    pub fn from_index(i: u8) -> Dir {
        DIRS[(i & 3) as usize]
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn offset(self) -> (i32, i32) {
        match self {
            Dir::E => (1, 0),
            Dir::N => (0, 1),
            Dir::W => (-1, 0),
            Dir::S => (0, -1),
        }
    }

    pub fn reverse(self) -> Dir {
        Dir::from_index(self.index() + 2)
    }

    /// Next direction counter-clockwise.
    pub fn ccw(self) -> Dir {
        Dir::from_index(self.index() + 1)
    }

    /// Direction of the unit step from `a` to `b`, if they are neighbors.
    pub fn between(a: Vertex, b: Vertex) -> Option<Dir> {
        match (b.x - a.x, b.y - a.y) {
            (1, 0) => Some(Dir::E),
            (0, 1) => Some(Dir::N),
            (-1, 0) => Some(Dir::W),
            (0, -1) => Some(Dir::S),
            _ => None,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Dir::E => 'E',
            Dir::N => 'N',
            Dir::W => 'W',
            Dir::S => 'S',
        }
    }

    pub fn from_letter(c: char) -> Option<Dir> {
        match c {
            'E' => Some(Dir::E),
            'N' => Some(Dir::N),
            'W' => Some(Dir::W),
            'S' => Some(Dir::S),
            _ => None,
        }
    }
}

/// An unoriented lattice edge in canonical form: endpoints ordered
/// lexicographically by `(x, y)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Edge {
    pub a: Vertex,
    pub b: Vertex,
}

impl Edge {
    /// Canonicalize an endpoint pair. Panics if the vertices are not nearest
    /// neighbors.
    pub fn new(u: Vertex, v: Vertex) -> Edge {
        assert!(
            (u.x - v.x).abs() + (u.y - v.y).abs() == 1,
            "edge endpoints must be nearest neighbors: {u} {v}"
        );
        if (u.x, u.y) <= (v.x, v.y) {
            Edge { a: u, b: v }
        } else {
            Edge { a: v, b: u }
        }
    }

    pub fn is_horizontal(self) -> bool {
        self.a.y == self.b.y
    }

    /// Midpoint of the edge, which is the position of the corresponding
    /// medial-graph vertex.
    pub fn midpoint(self) -> (f64, f64) {
        (
            (self.a.x + self.b.x) as f64 / 2.0,
            (self.a.y + self.b.y) as f64 / 2.0,
        )
    }

    /// Endpoint shared with another edge, if any.
    pub fn shared_endpoint(self, other: Edge) -> Option<Vertex> {
        [self.a, self.b].into_iter().find(|&u| u == other.a || u == other.b)
    }
}

/// An oriented lattice edge, distinct from its reverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OrientedEdge {
    pub from: Vertex,
    pub to: Vertex,
}

impl OrientedEdge {
    pub fn new(from: Vertex, to: Vertex) -> OrientedEdge {
        debug_assert!((from.x - to.x).abs() + (from.y - to.y).abs() == 1);
        OrientedEdge { from, to }
    }

    pub fn from_dir(from: Vertex, d: Dir) -> OrientedEdge {
        OrientedEdge {
            from,
            to: from.step(d),
        }
    }

    pub fn dir(self) -> Dir {
        Dir::between(self.from, self.to).expect("oriented edge endpoints are neighbors")
    }

    pub fn reversed(self) -> OrientedEdge {
        OrientedEdge {
            from: self.to,
            to: self.from,
        }
    }

    pub fn unoriented(self) -> Edge {
        Edge::new(self.from, self.to)
    }
}

/// The two unit faces of the lattice bounded by an edge, as face anchors.
/// A face is identified by its lower-left corner.
pub fn faces_of_edge(e: Edge) -> [Vertex; 2] {
    if e.is_horizontal() {
        // Horizontal edge a-(a+e1): faces above (anchor a) and below.
        [e.a, Vertex::new(e.a.x, e.a.y - 1)]
    } else {
        // Vertical edge a-(a+e2): faces right (anchor a) and left.
        [e.a, Vertex::new(e.a.x - 1, e.a.y)]
    }
}

/// Whether two lattice edges bound a common unit face.
pub fn share_face(e: Edge, f: Edge) -> bool {
    let [a, b] = faces_of_edge(e);
    let [c, d] = faces_of_edge(f);
    a == c || a == d || b == c || b == d
}

/// Anchor of the common unit face of two edges, if one exists.
pub fn common_face(e: Edge, f: Edge) -> Option<Vertex> {
    let [a, b] = faces_of_edge(e);
    let [c, d] = faces_of_edge(f);
    if a == c || a == d {
        Some(a)
    } else if b == c || b == d {
        Some(b)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccw_order_is_e_n_w_s() {
        assert_eq!(Dir::E.ccw(), Dir::N);
        assert_eq!(Dir::N.ccw(), Dir::W);
        assert_eq!(Dir::W.ccw(), Dir::S);
        assert_eq!(Dir::S.ccw(), Dir::E);
    }

    #[test]
    fn edge_is_canonical() {
        let u = Vertex::new(1, 0);
        let v = Vertex::new(0, 0);
        let e = Edge::new(u, v);
        assert_eq!(e.a, v);
        assert_eq!(e.b, u);
        assert_eq!(e, Edge::new(v, u));
    }

    #[test]
    fn oriented_edge_distinct_from_reverse() {
        let e = OrientedEdge::from_dir(Vertex::new(0, 0), Dir::E);
        assert_ne!(e, e.reversed());
        assert_eq!(e.unoriented(), e.reversed().unoriented());
    }

    #[test]
    fn perpendicular_edges_at_a_vertex_share_a_face() {
        let h = Edge::new(Vertex::new(0, 0), Vertex::new(1, 0));
        let v = Edge::new(Vertex::new(1, 0), Vertex::new(1, 1));
        assert!(share_face(h, v));
        assert_eq!(common_face(h, v), Some(Vertex::new(0, 0)));
        // Collinear edges through a vertex do not.
        let h2 = Edge::new(Vertex::new(1, 0), Vertex::new(2, 0));
        assert!(!share_face(h, h2));
    }
}
