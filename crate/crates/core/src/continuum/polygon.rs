//! Simple polygons with positive area, their Lebesgue measure and their
//! restricted surface energy under a norm.

use super::{ContinuumError, Norm};

const EDGE_ON_SIDE_TOL: f64 = 1e-12;

/// A simple polygon, stored counter-clockwise.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<(f64, f64)>,
}

impl Polygon {
    /// Build from a vertex list: consecutive duplicates are dropped, the
    /// orientation is normalized to counter-clockwise, simplicity and
    /// positive area are enforced.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Polygon, ContinuumError> {
        vertices.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        if vertices.len() >= 2 {
            let first = vertices[0];
            let last = *vertices.last().unwrap();
            if (first.0 - last.0).abs() < 1e-15 && (first.1 - last.1).abs() < 1e-15 {
                vertices.pop();
            }
        }
        if vertices.len() < 3 {
            return Err(ContinuumError::Degenerate(format!(
                "{} distinct vertices",
                vertices.len()
            )));
        }
        let signed = shoelace(&vertices);
        if signed.abs() < 1e-15 {
            return Err(ContinuumError::Degenerate("zero area".into()));
        }
        if signed < 0.0 {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        if !poly.is_simple() {
            return Err(ContinuumError::NotSimple);
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        let m = self.vertices.len();
        (0..m).map(move |i| (self.vertices[i], self.vertices[(i + 1) % m]))
    }

    /// Lebesgue measure (shoelace; positive by construction).
    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn is_simple(&self) -> bool {
        let segs: Vec<_> = self.edges().collect();
        let m = segs.len();
        for i in 0..m {
            for j in (i + 1)..m {
                let adjacent = j == i + 1 || (i == 0 && j == m - 1);
                if super::approx::segments_intersect(segs[i], segs[j], adjacent) {
                    return false;
                }
            }
        }
        true
    }

    pub fn in_closed_square(&self) -> bool {
        self.vertices
            .iter()
            .all(|&(x, y)| x.abs() <= 1.0 + 1e-9 && y.abs() <= 1.0 + 1e-9)
    }

    /// Even-odd point membership.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        let mut crossings = 0u32;
        for (a, b) in self.edges() {
            let (lo, hi) = if a.1 <= b.1 { (a, b) } else { (b, a) };
            if lo.1 <= py && py < hi.1 {
                let t = (py - lo.1) / (hi.1 - lo.1);
                let x = lo.0 + t * (hi.0 - lo.0);
                if x > px {
                    crossings += 1;
                }
            }
        }
        crossings % 2 == 1
    }

    /// Whether an edge lies on one of the four sides of `[-1,1]^2`.
    fn edge_on_square_side(a: (f64, f64), b: (f64, f64)) -> bool {
        for s in [-1.0, 1.0] {
            if (a.0 - s).abs() <= EDGE_ON_SIDE_TOL && (b.0 - s).abs() <= EDGE_ON_SIDE_TOL {
                return true;
            }
            if (a.1 - s).abs() <= EDGE_ON_SIDE_TOL && (b.1 - s).abs() <= EDGE_ON_SIDE_TOL {
                return true;
            }
        }
        false
    }

    /// Restricted surface energy: the integral of `norm(outward normal)`
    /// over the part of the boundary inside the open square. Segments lying
    /// on the square's sides are free.
    pub fn surface_energy(&self, norm: &Norm) -> Result<f64, ContinuumError> {
        if !self.in_closed_square() {
            return Err(ContinuumError::OutOfSquare);
        }
        let mut total = 0.0;
        for (a, b) in self.edges() {
            if Self::edge_on_square_side(a, b) {
                continue;
            }
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len = (dx * dx + dy * dy).sqrt();
            // Outward normal of a counter-clockwise polygon.
            let (nx, ny) = (dy / len, -dx / len);
            total += norm.eval(nx, ny) * len;
        }
        Ok(total)
    }

    /// Edge-vector form of the same functional, valid for square-symmetric
    /// norms (the normal is the edge vector rotated by 90°, a symmetry of
    /// the norm).
    pub fn surface_energy_edge_form(&self, norm: &Norm) -> Result<f64, ContinuumError> {
        if !self.in_closed_square() {
            return Err(ContinuumError::OutOfSquare);
        }
        let mut total = 0.0;
        for (a, b) in self.edges() {
            if Self::edge_on_square_side(a, b) {
                continue;
            }
            total += norm.eval(b.0 - a.0, b.1 - a.1);
        }
        Ok(total)
    }

    /// Full norm-perimeter, counting every boundary segment.
    pub fn norm_perimeter(&self, norm: &Norm) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                let len = (dx * dx + dy * dy).sqrt();
                if len == 0.0 {
                    0.0
                } else {
                    norm.eval(dy / len, -dx / len) * len
                }
            })
            .sum()
    }

    /// Restricted conductance: surface energy over area.
    pub fn conductance(&self, norm: &Norm) -> Result<f64, ContinuumError> {
        Ok(self.surface_energy(norm)? / self.area())
    }

    /// Structured text: one vertex per line, 12 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = format!("polygon {}\n", self.vertices.len());
        for &(x, y) in &self.vertices {
            s.push_str(&format!("{x:.11e} {y:.11e}\n"));
        }
        s
    }
}

pub(super) fn shoelace(vertices: &[(f64, f64)]) -> f64 {
    let m = vertices.len();
    let mut sum = 0.0;
    for i in 0..m {
        let (ax, ay) = vertices[i];
        let (bx, by) = vertices[(i + 1) % m];
        sum += ax * by - bx * ay;
    }
    sum / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(half: f64) -> Polygon {
        Polygon::new(vec![
            (-half, -half),
            (half, -half),
            (half, half),
            (-half, half),
        ])
        .unwrap()
    }

    #[test]
    fn areas() {
        assert!((square(1.0).area() - 4.0).abs() < 1e-12);
        let left_half = Polygon::new(vec![(-1.0, -1.0), (0.0, -1.0), (0.0, 1.0), (-1.0, 1.0)])
            .unwrap();
        assert!((left_half.area() - 2.0).abs() < 1e-12);
        // Random triangle area matches half the cross product.
        let tri = Polygon::new(vec![(0.1, 0.2), (0.7, -0.3), (0.4, 0.6)]).unwrap();
        let cross: f64 = (0.7 - 0.1) * (0.6 - 0.2) - (-0.3 - 0.2) * (0.4 - 0.1);
        assert!((tri.area() - cross.abs() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn orientation_is_normalized() {
        let cw = Polygon::new(vec![(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 0.0)]).unwrap();
        assert!(cw.area() > 0.0);
        assert!(shoelace(cw.vertices()) > 0.0);
    }

    #[test]
    fn degenerate_and_nonsimple_rejected() {
        assert!(Polygon::new(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(Polygon::new(vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]).is_err());
        // Bowtie: zero signed area, rejected as degenerate.
        assert!(Polygon::new(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]).is_err());
        // Self-crossing with nonzero signed area.
        assert!(matches!(
            Polygon::new(vec![(0.0, 0.0), (3.0, 0.0), (3.0, 1.0), (1.0, -1.0)]),
            Err(ContinuumError::NotSimple)
        ));
    }

    #[test]
    fn bisector_energy_counts_interior_segment_only() {
        let left_half = Polygon::new(vec![(-1.0, -1.0), (0.0, -1.0), (0.0, 1.0), (-1.0, 1.0)])
            .unwrap();
        let energy = left_half.surface_energy(&Norm::Euclidean).unwrap();
        assert!((energy - 2.0).abs() < 1e-12);
        assert!((left_half.conductance(&Norm::Euclidean).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn corner_square_l1_energy() {
        let s = 0.5;
        let corner = Polygon::new(vec![
            (-1.0, -1.0),
            (-1.0 + s, -1.0),
            (-1.0 + s, -1.0 + s),
            (-1.0, -1.0 + s),
        ])
        .unwrap();
        let energy = corner.surface_energy(&Norm::L1).unwrap();
        assert!((energy - 1.0).abs() < 1e-12, "got {energy}");
    }

    #[test]
    fn interior_polygon_euclidean_energy_is_perimeter() {
        let poly = Polygon::new(vec![
            (-0.5, -0.4),
            (0.6, -0.5),
            (0.7, 0.3),
            (0.0, 0.6),
            (-0.6, 0.2),
        ])
        .unwrap();
        let energy = poly.surface_energy(&Norm::Euclidean).unwrap();
        let perimeter: f64 = poly
            .edges()
            .map(|(a, b)| ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt())
            .sum();
        assert!((energy - perimeter).abs() < 1e-12);
        // Restricted <= full perimeter, equal when nothing rests on a side.
        assert!((poly.norm_perimeter(&Norm::Euclidean) - energy).abs() < 1e-12);
    }

    #[test]
    fn dual_form_agrees_for_symmetric_norms() {
        let poly = Polygon::new(vec![(-1.0, -1.0), (0.3, -1.0), (0.1, 0.4), (-1.0, 0.7)]).unwrap();
        for norm in [Norm::Euclidean, Norm::L1, Norm::Linf] {
            let a = poly.surface_energy(&norm).unwrap();
            let b = poly.surface_energy_edge_form(&norm).unwrap();
            assert!((a - b).abs() < 1e-12, "{norm:?}: {a} vs {b}");
        }
    }

    #[test]
    fn restricted_at_most_full_perimeter() {
        let left_half = Polygon::new(vec![(-1.0, -1.0), (0.0, -1.0), (0.0, 1.0), (-1.0, 1.0)])
            .unwrap();
        let restricted = left_half.surface_energy(&Norm::Euclidean).unwrap();
        let full = left_half.norm_perimeter(&Norm::Euclidean);
        assert!(restricted < full);
        assert!((full - 6.0).abs() < 1e-12);
    }

    #[test]
    fn membership() {
        let sq = square(0.5);
        assert!(sq.contains(0.0, 0.0));
        assert!(!sq.contains(0.9, 0.0));
    }
}
