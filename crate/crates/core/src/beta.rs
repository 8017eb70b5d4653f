//! The right-boundary distance b(x,y) and the boundary norm β_p.
//!
//! b(x,y) is the minimal number of distinct open right-boundary edges over
//! open right-most paths joining the cluster vertices nearest x and y. Exact
//! minimization has no obvious polynomial formulation, so the workhorse is a
//! least-cost search over oriented-open-edge states with additive per-vertex
//! turn costs; the search relaxes the problem in two ways (it cannot enforce
//! the global right-mostness condition, and it counts a boundary edge once
//! per contributing vertex instead of once as a set member), so every
//! witness is re-validated and re-weighed exactly, and the result carries an
//! exactness flag. An exhaustive branch-and-bound enumerator provides the
//! ground truth on tiny boxes.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use thiserror::Error;

use crate::geom::{Dir, Edge, OrientedEdge, Vertex, DIRS};
use crate::lattice::{
    cluster, derive_seed, nearest_cluster_vertex, sample_config, BoundaryMode, ClusterLabeling,
    Config, LatticeError,
};
use crate::rightmost::{is_rightmost, path_weight, LatticePath};

#[derive(Debug, Error)]
pub enum BetaError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no open right-most path between the endpoints")]
    NoPath,
    #[error("exhaustive enumeration needs a tiny box ({0} vertices is too many)")]
    ExhaustiveTooLarge(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DistanceMode {
    ExactEnumeration,
    DijkstraRelaxation,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Exactness {
    Exact,
    RelaxedValidated,
    RelaxedUnvalidated,
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    /// Number of distinct open right-boundary edges along the witness (the
    /// true minimum when the flag says so).
    pub value: usize,
    pub witness: LatticePath,
    pub exactness: Exactness,
}

/// Open right-boundary edges at `v` between the reversed in-direction and
/// the out-direction, as the relaxation's additive cost.
fn turn_cost(config: &Config, v: Vertex, d_in: Dir, d_out: Dir) -> usize {
    let mut c = d_in.reverse().ccw();
    let mut cost = 0;
    while c != d_out {
        if config.is_open_step(v, c) {
            cost += 1;
        }
        c = c.ccw();
    }
    cost
}

/// Least-cost search over oriented open edges. States never revisit an
/// oriented edge, so the witness walk is simple.
fn dijkstra_distance(
    config: &Config,
    s: Vertex,
    t: Vertex,
) -> Result<(usize, LatticePath), BetaError> {
    if s == t {
        return Ok((0, LatticePath::single(s)));
    }
    let nv = config.vertex_count();
    let state_of = |e: OrientedEdge| config.vertex_index(e.from) * 4 + e.dir().index() as usize;
    // Keys are (cost, steps): ties in the relaxed cost break toward shorter
    // witnesses, so at p = 1 an axis-aligned query yields the straight path.
    let mut dist = vec![(usize::MAX, u32::MAX); nv * 4];
    let mut parent: Vec<u32> = vec![u32::MAX; nv * 4];
    let mut heap: BinaryHeap<Reverse<(usize, u32, usize)>> = BinaryHeap::new();
    for d in DIRS {
        if config.is_open_step(s, d) {
            let e = OrientedEdge::from_dir(s, d);
            let id = state_of(e);
            dist[id] = (0, 1);
            heap.push(Reverse((0, 1, id)));
        }
    }
    let mut best_end: Option<(usize, usize)> = None;
    while let Some(Reverse((w, steps, id))) = heap.pop() {
        if (w, steps) > dist[id] {
            continue;
        }
        let from = config.vertex_at(id / 4);
        let d_in = Dir::from_index((id % 4) as u8);
        let v = from.step(d_in);
        if v == t {
            // States pop in (cost, steps) order, so the first arrival is
            // optimal; later arrivals cannot improve.
            best_end = Some((w, id));
            break;
        }
        for d_out in DIRS {
            if !config.is_open_step(v, d_out) {
                continue;
            }
            let next = OrientedEdge::from_dir(v, d_out);
            let nid = state_of(next);
            let nw = (w + turn_cost(config, v, d_in, d_out), steps + 1);
            if nw < dist[nid] {
                dist[nid] = nw;
                parent[nid] = id as u32;
                heap.push(Reverse((nw.0, nw.1, nid)));
            }
        }
    }
    let (value, end_state) = best_end.ok_or(BetaError::NoPath)?;
    // Rebuild the witness from the parent chain.
    let mut states = vec![end_state];
    while parent[*states.last().unwrap()] != u32::MAX {
        states.push(parent[*states.last().unwrap()] as usize);
    }
    states.reverse();
    let mut verts = Vec::with_capacity(states.len() + 1);
    for (i, &id) in states.iter().enumerate() {
        let from = config.vertex_at(id / 4);
        let d = Dir::from_index((id % 4) as u8);
        if i == 0 {
            verts.push(from);
        }
        verts.push(from.step(d));
    }
    let witness =
        LatticePath::new(verts).map_err(|e| BetaError::Argument(format!("witness: {e}")))?;
    Ok((value, witness))
}

/// Exhaustive branch-and-bound over open right-most paths. `incumbent` is an
/// achieved upper bound used to seed pruning, if available.
fn exact_distance(
    config: &Config,
    s: Vertex,
    t: Vertex,
    incumbent: Option<(usize, LatticePath)>,
) -> Result<(usize, LatticePath), BetaError> {
    if config.vertex_count() > 200 {
        return Err(BetaError::ExhaustiveTooLarge(config.vertex_count()));
    }
    if s == t {
        return Ok((0, LatticePath::single(s)));
    }

    struct Search<'a> {
        config: &'a Config,
        target: Vertex,
        used: HashSet<OrientedEdge>,
        boundary: HashSet<OrientedEdge>,
        open_set: HashMap<Edge, u32>,
        weight: usize,
        verts: Vec<Vertex>,
        best: usize,
        best_path: Option<Vec<Vertex>>,
    }

    impl Search<'_> {
        fn dfs(&mut self, v: Vertex, d_in: Dir) {
            if v == self.target && self.weight < self.best {
                self.best = self.weight;
                self.best_path = Some(self.verts.clone());
            }
            if self.weight >= self.best {
                return;
            }
            for d_out in DIRS {
                if !self.config.is_open_step(v, d_out) {
                    continue;
                }
                let e_new = OrientedEdge::from_dir(v, d_out);
                if self.used.contains(&e_new) || self.boundary.contains(&e_new) {
                    continue;
                }
                // The vertex v becomes interior: its right-boundary edges
                // appear; none of them may be a path edge already used.
                let mut rb = Vec::new();
                let mut c = d_in.reverse().ccw();
                let mut blocked = false;
                while c != d_out {
                    let r = OrientedEdge::from_dir(v, c);
                    if self.used.contains(&r) {
                        blocked = true;
                        break;
                    }
                    rb.push(r);
                    c = c.ccw();
                }
                if blocked {
                    continue;
                }
                let mut added_weight = Vec::new();
                let mut added_boundary = Vec::new();
                for &r in &rb {
                    if self.boundary.insert(r) {
                        added_boundary.push(r);
                    }
                    let ue = r.unoriented();
                    if self.config.is_open(ue) {
                        let slot = self.open_set.entry(ue).or_insert(0);
                        *slot += 1;
                        if *slot == 1 {
                            self.weight += 1;
                            added_weight.push(ue);
                        } else {
                            added_weight.push(ue);
                        }
                    }
                }
                if self.weight < self.best {
                    self.used.insert(e_new);
                    self.verts.push(e_new.to);
                    self.dfs(e_new.to, d_out);
                    self.verts.pop();
                    self.used.remove(&e_new);
                }
                for ue in added_weight {
                    let slot = self.open_set.get_mut(&ue).unwrap();
                    *slot -= 1;
                    if *slot == 0 {
                        self.open_set.remove(&ue);
                        self.weight -= 1;
                    }
                }
                for r in added_boundary {
                    self.boundary.remove(&r);
                }
            }
        }
    }

    let mut search = Search {
        config,
        target: t,
        used: HashSet::new(),
        boundary: HashSet::new(),
        open_set: HashMap::new(),
        weight: 0,
        verts: vec![s],
        best: usize::MAX,
        best_path: None,
    };
    if let Some((bound, path)) = incumbent {
        // The incumbent is achieved, so only strictly better paths matter.
        search.best = bound.saturating_add(1);
        search.best_path = Some(path.vertices().to_vec());
    }
    for d in DIRS {
        if config.is_open_step(s, d) {
            let e = OrientedEdge::from_dir(s, d);
            search.used.insert(e);
            search.verts.push(e.to);
            search.dfs(e.to, d);
            search.verts.pop();
            search.used.remove(&e);
        }
    }
    let best_path = search.best_path.ok_or(BetaError::NoPath)?;
    let path = LatticePath::new(best_path).expect("search paths are adjacency-valid");
    let value = path_weight(&path, config, BoundaryMode::Infinite);
    Ok((value, path))
}

/// The right-boundary distance b(x,y) between the cluster vertices nearest
/// to two points of the plane.
pub fn right_boundary_distance(
    config: &Config,
    labeling: &ClusterLabeling,
    x: (f64, f64),
    y: (f64, f64),
    mode: DistanceMode,
) -> Result<DistanceResult, BetaError> {
    let s = nearest_cluster_vertex(config, labeling, x.0, x.1)?;
    let t = nearest_cluster_vertex(config, labeling, y.0, y.1)?;
    distance_between(config, s, t, mode)
}

/// Same, anchored directly at lattice vertices of the cluster trace.
pub fn distance_between(
    config: &Config,
    s: Vertex,
    t: Vertex,
    mode: DistanceMode,
) -> Result<DistanceResult, BetaError> {
    if s == t {
        return Ok(DistanceResult {
            value: 0,
            witness: LatticePath::single(s),
            exactness: Exactness::Exact,
        });
    }
    match mode {
        DistanceMode::DijkstraRelaxation => {
            let (value, witness) = dijkstra_distance(config, s, t)?;
            let validated = is_rightmost(&witness)
                && path_weight(&witness, config, BoundaryMode::Infinite) == value;
            Ok(DistanceResult {
                value,
                witness,
                exactness: if validated {
                    Exactness::RelaxedValidated
                } else {
                    Exactness::RelaxedUnvalidated
                },
            })
        }
        DistanceMode::ExactEnumeration => {
            let incumbent = match dijkstra_distance(config, s, t) {
                Ok((value, witness))
                    if is_rightmost(&witness)
                        && path_weight(&witness, config, BoundaryMode::Infinite) == value =>
                {
                    Some((value, witness))
                }
                _ => None,
            };
            let (value, witness) = exact_distance(config, s, t, incumbent)?;
            Ok(DistanceResult {
                value,
                witness,
                exactness: Exactness::Exact,
            })
        }
    }
}

/// Per-scale record of a β estimate.
#[derive(Clone, Debug)]
pub struct ScaleStats {
    pub scale: u32,
    pub mean: f64,
    pub stderr: f64,
    pub censored: u32,
    pub validation_failures: u32,
}

#[derive(Clone, Debug)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    pub stderr: f64,
    pub per_scale: Vec<ScaleStats>,
}

/// Monte Carlo estimate of β_p(v) for a unit direction: the largest-scale
/// mean of b([0],[s·v])/s over fresh padded configurations. Per-scale means
/// are retained so convergence in the scale is inspectable; no extrapolation
/// is applied.
pub fn estimate_beta(
    p: f64,
    direction: (f64, f64),
    scales: &[u32],
    replicas: u32,
    seed: u64,
) -> Result<BetaEstimate, BetaError> {
    if p <= 0.5 {
        return Err(BetaError::Lattice(LatticeError::Subcritical(p)));
    }
    if replicas == 0 {
        return Err(BetaError::Argument("replicas must be positive".into()));
    }
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BetaError::Argument(
            "scales must be nonempty and strictly increasing".into(),
        ));
    }
    let norm = (direction.0 * direction.0 + direction.1 * direction.1).sqrt();
    if norm == 0.0 {
        return Err(BetaError::Argument("direction must be nonzero".into()));
    }
    let v = (direction.0 / norm, direction.1 / norm);
    let mut per_scale = Vec::new();
    for (si, &s) in scales.iter().enumerate() {
        let endpoint = (s as f64 * v.0, s as f64 * v.1);
        let n = endpoint.0.abs().max(endpoint.1.abs()).ceil() as i32 + 2;
        let scale_seed = derive_seed(seed, si as u64);
        let mut samples = Vec::new();
        let mut censored = 0;
        let mut validation_failures = 0;
        for rep in 0..replicas {
            let config = sample_config(n, p, derive_seed(scale_seed, rep as u64), n)?;
            let labeling = cluster(&config);
            match right_boundary_distance(
                &config,
                &labeling,
                (0.0, 0.0),
                endpoint,
                DistanceMode::DijkstraRelaxation,
            ) {
                Ok(res) => {
                    if res.exactness == Exactness::RelaxedUnvalidated {
                        validation_failures += 1;
                    }
                    samples.push(res.value as f64 / s as f64);
                }
                Err(BetaError::NoPath) | Err(BetaError::Lattice(LatticeError::NoGiant)) => {
                    censored += 1;
                }
                Err(e) => return Err(e),
            }
        }
        if samples.is_empty() {
            return Err(BetaError::NoPath);
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = if samples.len() > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64
        } else {
            0.0
        };
        per_scale.push(ScaleStats {
            scale: s,
            mean,
            stderr: (var / samples.len() as f64).sqrt(),
            censored,
            validation_failures,
        });
    }
    let last = per_scale.last().unwrap();
    if last.mean <= 0.0 {
        return Err(BetaError::Argument(format!(
            "degenerate estimate {} at scale {}; scales are too small for p = {p}",
            last.mean, last.scale
        )));
    }
    Ok(BetaEstimate {
        beta_hat: last.mean,
        stderr: last.stderr,
        per_scale,
    })
}

/// Tabulated boundary norm: β̂ on a first-octant angular grid, extended to
/// the plane by the square symmetries (exactly) and by homogeneity (exactly,
/// since only unit-direction values are stored).
#[derive(Clone, Debug, PartialEq)]
pub struct NormTable {
    pub p: f64,
    pub resolution: usize,
    pub scales: Vec<u32>,
    pub replicas: u32,
    pub seed: u64,
    /// Support angles in [0, π/4], increasing, endpoints included.
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
}

impl NormTable {
    /// β̂(x): fold into the first octant, interpolate the support values
    /// piecewise-linearly in angle, scale by |x|₂.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let r = (x * x + y * y).sqrt();
        if r == 0.0 {
            return 0.0;
        }
        let (a, b) = (x.abs(), y.abs());
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        let theta = lo.atan2(hi);
        r * self.interp(theta)
    }

    fn interp(&self, theta: f64) -> f64 {
        let m = self.angles.len();
        if theta <= self.angles[0] {
            return self.values[0];
        }
        if theta >= self.angles[m - 1] {
            return self.values[m - 1];
        }
        let mut i = 1;
        while self.angles[i] < theta {
            i += 1;
        }
        let (a0, a1) = (self.angles[i - 1], self.angles[i]);
        let t = (theta - a0) / (a1 - a0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    /// Largest triangle-inequality violation β(u+v) − β(u) − β(v) over
    /// seeded random pairs; convexity of the interpolant is checked, not
    /// assumed.
    pub fn triangle_defect(&self, pairs: u32, seed: u64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let mut z = seed;
        let mut next = || {
            z = crate::lattice::derive_seed(z, 1);
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for _ in 0..pairs {
            let (ux, uy, vx, vy) = (next(), next(), next(), next());
            let defect = self.eval(ux + vx, uy + vy) - self.eval(ux, uy) - self.eval(vx, vy);
            worst = worst.max(defect);
        }
        worst
    }

    /// Structured text serialization; floats are written with 17 significant
    /// digits so the round trip is lossless.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("percolab-norm-table v1\n");
        s.push_str(&format!("p {:.16e}\n", self.p));
        s.push_str(&format!("resolution {}\n", self.resolution));
        s.push_str(&format!(
            "scales {}\n",
            self.scales
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ));
        s.push_str(&format!("replicas {}\n", self.replicas));
        s.push_str(&format!("seed {}\n", self.seed));
        s.push_str(&format!("rows {}\n", self.angles.len()));
        for i in 0..self.angles.len() {
            s.push_str(&format!(
                "{:.16e} {:.16e} {:.16e}\n",
                self.angles[i], self.values[i], self.stderrs[i]
            ));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<NormTable, BetaError> {
        let bad = |m: &str| BetaError::Argument(format!("norm table parse: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some("percolab-norm-table v1") {
            return Err(bad("bad header"));
        }
        let mut field = |name: &str| -> Result<String, BetaError> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            line.strip_prefix(name)
                .map(|s| s.trim().to_string())
                .ok_or_else(|| bad(&format!("expected field {name}")))
        };
        let p: f64 = field("p ")?.parse().map_err(|_| bad("p"))?;
        let resolution: usize = field("resolution ")?.parse().map_err(|_| bad("resolution"))?;
        let scales_s = field("scales ")?;
        let scales: Vec<u32> = if scales_s.is_empty() {
            Vec::new()
        } else {
            scales_s
                .split(',')
                .map(|x| x.parse().map_err(|_| bad("scales")))
                .collect::<Result<_, _>>()?
        };
        let replicas: u32 = field("replicas ")?.parse().map_err(|_| bad("replicas"))?;
        let seed: u64 = field("seed ")?.parse().map_err(|_| bad("seed"))?;
        let rows: usize = field("rows ")?.parse().map_err(|_| bad("rows"))?;
        let mut angles = Vec::with_capacity(rows);
        let mut values = Vec::with_capacity(rows);
        let mut stderrs = Vec::with_capacity(rows);
        for _ in 0..rows {
            let line = lines.next().ok_or_else(|| bad("missing row"))?;
            let mut it = line.split_whitespace();
            let mut take = || -> Result<f64, BetaError> {
                it.next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("row field"))
            };
            angles.push(take()?);
            values.push(take()?);
            stderrs.push(take()?);
        }
        Ok(NormTable {
            p,
            resolution,
            scales,
            replicas,
            seed,
            angles,
            values,
            stderrs,
        })
    }
}

/// Estimate β̂ on the closed first-octant arc and close it under the square
/// symmetries by construction.
pub fn build_norm_table(
    p: f64,
    resolution: usize,
    scales: &[u32],
    replicas: u32,
    seed: u64,
) -> Result<NormTable, BetaError> {
    if resolution < 2 {
        return Err(BetaError::Argument("resolution must be at least 2".into()));
    }
    let mut angles = Vec::with_capacity(resolution);
    let mut values = Vec::with_capacity(resolution);
    let mut stderrs = Vec::with_capacity(resolution);
    for i in 0..resolution {
        let theta = std::f64::consts::FRAC_PI_4 * i as f64 / (resolution - 1) as f64;
        let est = estimate_beta(
            p,
            (theta.cos(), theta.sin()),
            scales,
            replicas,
            derive_seed(seed, i as u64),
        )?;
        angles.push(theta);
        values.push(est.beta_hat);
        stderrs.push(est.stderr);
    }
    Ok(NormTable {
        p,
        resolution,
        scales: scales.to_vec(),
        replicas,
        seed,
        angles,
        values,
        stderrs,
    })
}

/// How far a distance witness strays from the straight segment joining its
/// endpoints: the ℓ∞ Hausdorff distance between the witness and the segment,
/// normalized by the Euclidean endpoint separation. A diagnostic, not a
/// theorem check.
#[derive(Clone, Debug)]
pub struct GeodesicReport {
    pub b_value: usize,
    pub witness_len: usize,
    pub normalized_deviation: f64,
    pub epsilon: f64,
}

pub fn geodesic_concentration(
    config: &Config,
    labeling: &ClusterLabeling,
    x: (f64, f64),
    y: (f64, f64),
    epsilon: f64,
) -> Result<GeodesicReport, BetaError> {
    let res = right_boundary_distance(config, labeling, x, y, DistanceMode::DijkstraRelaxation)?;
    let sep = ((y.0 - x.0).powi(2) + (y.1 - x.1).powi(2)).sqrt();
    if sep == 0.0 {
        return Ok(GeodesicReport {
            b_value: res.value,
            witness_len: res.witness.len(),
            normalized_deviation: 0.0,
            epsilon,
        });
    }
    // Sample the segment at quarter-lattice spacing.
    let steps = (sep * 4.0).ceil() as usize + 1;
    let segment: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let t = i as f64 / steps as f64;
            (x.0 + t * (y.0 - x.0), x.1 + t * (y.1 - x.1))
        })
        .collect();
    let path_pts: Vec<(f64, f64)> = res
        .witness
        .vertices()
        .iter()
        .map(|v| (v.x as f64, v.y as f64))
        .collect();
    let linf = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs().max((a.1 - b.1).abs());
    let one_sided = |from: &[(f64, f64)], to: &[(f64, f64)]| {
        from.iter()
            .map(|&a| {
                to.iter()
                    .map(|&b| linf(a, b))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    let d_h = one_sided(&path_pts, &segment).max(one_sided(&segment, &path_pts));
    Ok(GeodesicReport {
        b_value: res.value,
        witness_len: res.witness.len(),
        normalized_deviation: d_h / sep,
        epsilon,
    })
}
