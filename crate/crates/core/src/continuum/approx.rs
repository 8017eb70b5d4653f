//! Polygonal approximation of rectifiable curves and the ℓ∞ Hausdorff
//! distance between point sets or polygons.

use crate::rightmost::PlanarCurve;

use super::{ContinuumError, Norm, Polygon};

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    orient(a, b, p).abs() < 1e-15
        && p.0 >= a.0.min(b.0) - 1e-15
        && p.0 <= a.0.max(b.0) + 1e-15
        && p.1 >= a.1.min(b.1) - 1e-15
        && p.1 <= a.1.max(b.1) + 1e-15
}

/// Segment intersection for simplicity checks; consecutive segments may
/// share exactly one endpoint.
pub(super) fn segments_intersect(
    s: ((f64, f64), (f64, f64)),
    t: ((f64, f64), (f64, f64)),
    adjacent: bool,
) -> bool {
    let (a, b) = s;
    let (c, d) = t;
    if adjacent {
        let shared: Vec<(f64, f64)> = [a, b].iter().filter(|&&p| p == c || p == d).copied().collect();
        if shared.len() == 1 {
            let p = shared[0];
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
    (d1.abs() < 1e-15 && on_segment(c, d, a))
        || (d2.abs() < 1e-15 && on_segment(c, d, b))
        || (d3.abs() < 1e-15 && on_segment(a, b, c))
        || (d4.abs() < 1e-15 && on_segment(a, b, d))
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn point_segment_dist_l2(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return ((p.0 - a.0).powi(2) + (p.1 - a.1).powi(2)).sqrt();
    }
    let t = ((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2;
    let t = t.clamp(0.0, 1.0);
    let (cx, cy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn norm_length(points: &[(f64, f64)], closed: bool, norm: &Norm) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        total += norm.eval(w[1].0 - w[0].0, w[1].1 - w[0].1);
    }
    if closed && points.len() > 1 {
        let a = points[points.len() - 1];
        let b = points[0];
        total += norm.eval(b.0 - a.0, b.1 - a.1);
    }
    total
}

/// Douglas-Peucker simplification of an open polyline chunk; keeps indices.
fn dp_keep(points: &[(f64, f64)], lo: usize, hi: usize, tol: f64, keep: &mut Vec<usize>) {
    if hi <= lo + 1 {
        return;
    }
    let (mut worst, mut at) = (0.0, lo + 1);
    for i in (lo + 1)..hi {
        let d = point_segment_dist_l2(points[i], points[lo], points[hi]);
        if d > worst {
            worst = d;
            at = i;
        }
    }
    if worst > tol {
        dp_keep(points, lo, at, tol, keep);
        keep.push(at);
        dp_keep(points, at, hi, tol, keep);
    }
}

fn simplify(points: &[(f64, f64)], closed: bool, tol: f64) -> Vec<(f64, f64)> {
    if points.len() <= 3 {
        return points.to_vec();
    }
    if !closed {
        let mut keep = vec![0];
        dp_keep(points, 0, points.len() - 1, tol, &mut keep);
        keep.push(points.len() - 1);
        return keep.into_iter().map(|i| points[i]).collect();
    }
    // Closed: anchor at index 0 and the farthest point from it, simplify the
    // two arcs.
    let far = (1..points.len())
        .max_by(|&i, &j| {
            linf(points[i], points[0])
                .partial_cmp(&linf(points[j], points[0]))
                .unwrap()
        })
        .unwrap();
    let mut keep = vec![0];
    dp_keep(points, 0, far, tol, &mut keep);
    keep.push(far);
    let mut tail: Vec<(f64, f64)> = points[far..].to_vec();
    tail.push(points[0]);
    let mut keep_tail = Vec::new();
    dp_keep(&tail, 0, tail.len() - 1, tol, &mut keep_tail);
    let mut out: Vec<(f64, f64)> = keep.into_iter().map(|i| points[i]).collect();
    out.extend(keep_tail.into_iter().map(|i| tail[i]));
    out
}

fn polyline_is_simple(points: &[(f64, f64)], closed: bool) -> bool {
    PlanarCurve {
        points: points.to_vec(),
        closed,
    }
    .is_simple()
}

/// Symmetric ℓ∞ Hausdorff distance between dense samplings of two
/// polylines.
fn polyline_hausdorff(a: &[(f64, f64)], a_closed: bool, b: &[(f64, f64)], b_closed: bool) -> f64 {
    let sample = |pts: &[(f64, f64)], closed: bool| {
        let mut out = Vec::new();
        let curve = PlanarCurve {
            points: pts.to_vec(),
            closed,
        };
        for ((ax, ay), (bx, by)) in curve.segments() {
            let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
            let steps = (len / 0.01).ceil().max(1.0) as usize;
            for i in 0..steps {
                let t = i as f64 / steps as f64;
                out.push((ax + t * (bx - ax), ay + t * (by - ay)));
            }
        }
        if let Some(&last) = pts.last() {
            out.push(last);
        }
        out
    };
    let sa = sample(a, a_closed);
    let sb = sample(b, b_closed);
    point_cloud_hausdorff(&sa, &sb)
}

/// Simplify a rectifiable polyline to a simple polygonal curve with
/// certified bounds: Hausdorff distance at most ε, norm-length increased by
/// at most ε, and (for closed inputs) hull area changed by at most ε. The
/// tolerance backs off until every bound verifies; a simple input always
/// admits the identity as a fallback.
pub fn polygonal_approximation(
    curve: &PlanarCurve,
    norm: &Norm,
    epsilon: f64,
) -> Result<PlanarCurve, ContinuumError> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(ContinuumError::Argument("epsilon must be positive".into()));
    }
    if curve.points.len() < 2 {
        return Err(ContinuumError::Argument(
            "curve needs at least two points".into(),
        ));
    }
    let input_simple = polyline_is_simple(&curve.points, curve.closed);
    let in_len = norm_length(&curve.points, curve.closed, norm);
    let in_area = if curve.closed {
        Some(curve.signed_area().abs())
    } else {
        None
    };
    let mut tol = epsilon / 2.0;
    for _ in 0..24 {
        let points = simplify(&curve.points, curve.closed, tol);
        let ok_shape = points.len() >= if curve.closed { 3 } else { 2 };
        if ok_shape && polyline_is_simple(&points, curve.closed) {
            let out = PlanarCurve {
                points,
                closed: curve.closed,
            };
            let d_h = polyline_hausdorff(&curve.points, curve.closed, &out.points, out.closed);
            let out_len = norm_length(&out.points, out.closed, norm);
            let area_ok = match in_area {
                Some(a) => (out.signed_area().abs() - a).abs() <= epsilon,
                None => true,
            };
            if d_h <= epsilon && out_len <= in_len + epsilon && area_ok {
                return Ok(out);
            }
        }
        tol /= 2.0;
        if tol < 1e-12 {
            break;
        }
    }
    if input_simple {
        return Ok(curve.clone());
    }
    Err(ContinuumError::ApproximationFailed)
}

/// Boundary-plus-interior samples of a shape at a grid resolution.
pub fn polygon_samples(poly: &Polygon, resolution: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for ((ax, ay), (bx, by)) in poly.edges() {
        let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
        let steps = (len / resolution).ceil().max(1.0) as usize;
        for i in 0..steps {
            let t = i as f64 / steps as f64;
            out.push((ax + t * (bx - ax), ay + t * (by - ay)));
        }
    }
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in poly.vertices() {
        min_x = min_x.min(x);
        max_x = max_x.max(x);
        min_y = min_y.min(y);
        max_y = max_y.max(y);
    }
    let mut y = min_y;
    while y <= max_y {
        let mut x = min_x;
        while x <= max_x {
            if poly.contains(x, y) {
                out.push((x, y));
            }
            x += resolution;
        }
        y += resolution;
    }
    out
}

fn point_cloud_hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // Bucketed nearest-neighbor queries in ℓ∞.
    struct Grid {
        cell: f64,
        map: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>>,
    }
    impl Grid {
        fn build(points: &[(f64, f64)], cell: f64) -> Grid {
            let mut map: std::collections::HashMap<(i64, i64), Vec<(f64, f64)>> =
                std::collections::HashMap::new();
            for &p in points {
                let key = ((p.0 / cell).floor() as i64, (p.1 / cell).floor() as i64);
                map.entry(key).or_default().push(p);
            }
            Grid { cell, map }
        }

        fn nearest_linf(&self, p: (f64, f64)) -> f64 {
            let (cx, cy) = (
                (p.0 / self.cell).floor() as i64,
                (p.1 / self.cell).floor() as i64,
            );
            let mut best = f64::INFINITY;
            let mut ring = 0i64;
            loop {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        if let Some(bucket) = self.map.get(&(cx + dx, cy + dy)) {
                            for &q in bucket {
                                best = best.min(linf(p, q));
                            }
                        }
                    }
                }
                // Unscanned cells sit at cell-distance > ring, so their
                // points are at least ring * cell away.
                if best.is_finite() && best <= ring as f64 * self.cell {
                    return best;
                }
                ring += 1;
            }
        }
    }
    let cell = 0.05;
    let ga = Grid::build(a, cell);
    let gb = Grid::build(b, cell);
    let d_ab = a
        .iter()
        .map(|&p| gb.nearest_linf(p))
        .fold(0.0f64, f64::max);
    let d_ba = b
        .iter()
        .map(|&p| ga.nearest_linf(p))
        .fold(0.0f64, f64::max);
    d_ab.max(d_ba)
}

/// Input shape for the Hausdorff distance: a bare point set or a polygon
/// (rasterized to boundary plus interior at the given resolution).
pub enum Shape<'a> {
    Points(&'a [(f64, f64)]),
    Poly(&'a Polygon),
}

/// Symmetric max-min ℓ∞ distance between two shapes, computed on sample
/// grids; the over-approximation error is at most the resolution.
pub fn hausdorff_distance(a: Shape, b: Shape, resolution: f64) -> Result<f64, ContinuumError> {
    if resolution.is_nan() || resolution <= 0.0 {
        return Err(ContinuumError::Argument(
            "resolution must be positive".into(),
        ));
    }
    let to_points = |s: Shape| -> Result<Vec<(f64, f64)>, ContinuumError> {
        match s {
            Shape::Points(p) => {
                if p.is_empty() {
                    Err(ContinuumError::Argument("empty point set".into()))
                } else {
                    Ok(p.to_vec())
                }
            }
            Shape::Poly(p) => Ok(polygon_samples(p, resolution)),
        }
    };
    let pa = to_points(a)?;
    let pb = to_points(b)?;
    Ok(point_cloud_hausdorff(&pa, &pb))
}
