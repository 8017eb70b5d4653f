//! Bond percolation on a padded box: seeded sampling, cluster labeling, the
//! giant component, density estimates and open edge boundaries.
//!
//! The infinite cluster is approximated by the largest cluster of a padded
//! box of radius `N = n + pad`; the giant component is the largest connected
//! component of that cluster's trace on the inner box `[-n,n]^2`. Padding is
//! a knob: the edge randomness is keyed by edge geometry, not by box layout,
//! so enlarging the pad leaves the shared region's bits unchanged.

use std::fmt;
use std::io::{self, Read, Write};
use std::sync::Arc;

use thiserror::Error;

use crate::geom::{Dir, Edge, Vertex, DIRS};
use crate::ratio::Ratio;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("box too large for address space: radius {0}")]
    Capacity(i32),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("supercritical parameter required (p = {0} <= 0.5)")]
    Subcritical(f64),
    #[error("no giant component at this scale")]
    NoGiant,
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"PRCL";
const SNAPSHOT_VERSION: u32 = 1;

/// Largest admissible vertex count for a padded box.
const MAX_VERTICES: u64 = 1 << 28;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in `[0,1)` from a 64-bit state.
#[inline]
fn unit(z: u64) -> f64 {
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based uniform draw for an edge, keyed by geometry so that the
/// value does not depend on the box size.
#[inline]
fn edge_unit(seed: u64, x: i32, y: i32, horizontal: bool) -> f64 {
    let z = splitmix(seed ^ splitmix((x as u32 as u64) << 1 | horizontal as u64));
    unit(splitmix(z ^ (y as u32 as u64)))
}

/// Tie-break value η for a vertex, independent of the edge draws.
#[inline]
fn eta_unit(seed: u64, x: i32, y: i32) -> f64 {
    let z = splitmix(seed ^ 0x5bf0_3635_dead_beef ^ splitmix(x as u32 as u64));
    unit(splitmix(z ^ (y as u32 as u64).wrapping_mul(0x9e37_79b9)))
}

/// Derive an independent stream seed, used for replicas and restarts.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix(seed ^ splitmix(stream.wrapping_add(0xa076_1d64_78bd_642f)))
}

/// A sampled bond-percolation configuration on the padded box `[-N,N]^2`,
/// `N = n + pad`. Open bits and tie-break values are pure functions of the
/// seed and the edge / vertex geometry.
pub struct Config {
    n: i32,
    pad: i32,
    p: f64,
    seed: u64,
    /// Horizontal edges (x,y)-(x+1,y), row-major, x in [-N,N-1], y in [-N,N].
    horiz: Vec<u64>,
    /// Vertical edges (x,y)-(x,y+1), row-major, x in [-N,N], y in [-N,N-1].
    vert: Vec<u64>,
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Config(n={}, pad={}, p={}, seed={})",
            self.n, self.pad, self.p, self.seed
        )
    }
}

/// Sample a configuration. Every edge of the padded box is open
/// independently with probability `p` under the seeded generator.
pub fn sample_config(n: i32, p: f64, seed: u64, pad: i32) -> Result<Config, LatticeError> {
    if n < 1 {
        return Err(LatticeError::Argument(format!("n must be >= 1, got {n}")));
    }
    if pad < 0 {
        return Err(LatticeError::Argument(format!(
            "pad must be >= 0, got {pad}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(LatticeError::Argument(format!(
            "p must lie in [0,1], got {p}"
        )));
    }
    let radius = n
        .checked_add(pad)
        .ok_or(LatticeError::Capacity(i32::MAX))?;
    let side = 2i64 * radius as i64 + 1;
    if (side * side) as u64 > MAX_VERTICES {
        return Err(LatticeError::Capacity(radius));
    }
    let mut config = Config {
        n,
        pad,
        p,
        seed,
        horiz: vec![0; ((side - 1) * side) as usize / 64 + 1],
        vert: vec![0; ((side - 1) * side) as usize / 64 + 1],
    };
    let big_n = radius;
    for y in -big_n..=big_n {
        for x in -big_n..big_n {
            if edge_unit(seed, x, y, true) < p {
                let idx = config.h_index(x, y);
                config.horiz[idx / 64] |= 1 << (idx % 64);
            }
        }
    }
    for y in -big_n..big_n {
        for x in -big_n..=big_n {
            if edge_unit(seed, x, y, false) < p {
                let idx = config.v_index(x, y);
                config.vert[idx / 64] |= 1 << (idx % 64);
            }
        }
    }
    Ok(config)
}

impl Config {
    pub fn n(&self) -> i32 {
        self.n
    }

    pub fn pad(&self) -> i32 {
        self.pad
    }

    /// Padded box radius `N = n + pad`.
    pub fn radius(&self) -> i32 {
        self.n + self.pad
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn side(&self) -> i64 {
        2 * self.radius() as i64 + 1
    }

    pub fn vertex_count(&self) -> usize {
        (self.side() * self.side()) as usize
    }

    pub fn in_padded_box(&self, v: Vertex) -> bool {
        let r = self.radius();
        v.x.abs() <= r && v.y.abs() <= r
    }

    pub fn in_inner_box(&self, v: Vertex) -> bool {
        v.x.abs() <= self.n && v.y.abs() <= self.n
    }

    pub fn vertex_index(&self, v: Vertex) -> usize {
        let r = self.radius() as i64;
        ((v.y as i64 + r) * self.side() + (v.x as i64 + r)) as usize
    }

    pub fn vertex_at(&self, idx: usize) -> Vertex {
        let r = self.radius() as i64;
        let side = self.side();
        Vertex::new(
            ((idx as i64 % side) - r) as i32,
            ((idx as i64 / side) - r) as i32,
        )
    }

    fn h_index(&self, x: i32, y: i32) -> usize {
        let r = self.radius() as i64;
        ((y as i64 + r) * (self.side() - 1) + (x as i64 + r)) as usize
    }

    fn v_index(&self, x: i32, y: i32) -> usize {
        let r = self.radius() as i64;
        ((y as i64 + r) * self.side() + (x as i64 + r)) as usize
    }

    /// Whether an edge of the padded box is open. Edges outside the box are
    /// closed by convention.
    pub fn is_open(&self, e: Edge) -> bool {
        if !self.in_padded_box(e.a) || !self.in_padded_box(e.b) {
            return false;
        }
        if e.is_horizontal() {
            let idx = self.h_index(e.a.x.min(e.b.x), e.a.y);
            self.horiz[idx / 64] >> (idx % 64) & 1 == 1
        } else {
            let idx = self.v_index(e.a.x, e.a.y.min(e.b.y));
            self.vert[idx / 64] >> (idx % 64) & 1 == 1
        }
    }

    pub fn is_open_step(&self, v: Vertex, d: Dir) -> bool {
        let w = v.step(d);
        if !self.in_padded_box(v) || !self.in_padded_box(w) {
            return false;
        }
        self.is_open(Edge::new(v, w))
    }

    /// Tie-break value η for a vertex.
    pub fn eta(&self, v: Vertex) -> f64 {
        eta_unit(self.seed, v.x, v.y)
    }

    /// Fraction of open edges among all edges of the padded box.
    pub fn open_fraction(&self) -> f64 {
        let r = self.radius();
        let mut open = 0u64;
        let mut total = 0u64;
        for y in -r..=r {
            for x in -r..r {
                total += 1;
                open += self.is_open(Edge::new(Vertex::new(x, y), Vertex::new(x + 1, y))) as u64;
            }
        }
        for y in -r..r {
            for x in -r..=r {
                total += 1;
                open += self.is_open(Edge::new(Vertex::new(x, y), Vertex::new(x, y + 1))) as u64;
            }
        }
        open as f64 / total as f64
    }

    /// Serialize to the binary snapshot format: header, horizontal bitmap,
    /// vertical bitmap.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<(), LatticeError> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.pad.to_le_bytes())?;
        w.write_all(&self.p.to_bits().to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for words in [&self.horiz, &self.vert] {
            w.write_all(&(words.len() as u64).to_le_bytes())?;
            for word in words.iter() {
                w.write_all(&word.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Config, LatticeError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(LatticeError::Corrupt("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != SNAPSHOT_VERSION {
            return Err(LatticeError::Corrupt("unsupported version".into()));
        }
        r.read_exact(&mut b4)?;
        let n = i32::from_le_bytes(b4);
        r.read_exact(&mut b4)?;
        let pad = i32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let p = f64::from_bits(u64::from_le_bytes(b8));
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        if n < 1 || pad < 0 || !(0.0..=1.0).contains(&p) {
            return Err(LatticeError::Corrupt("bad header fields".into()));
        }
        let mut maps = Vec::with_capacity(2);
        for _ in 0..2 {
            r.read_exact(&mut b8)?;
            let len = u64::from_le_bytes(b8) as usize;
            if len > (MAX_VERTICES / 32) as usize {
                return Err(LatticeError::Corrupt("bitmap too large".into()));
            }
            let mut words = vec![0u64; len];
            for word in words.iter_mut() {
                r.read_exact(&mut b8)?;
                *word = u64::from_le_bytes(b8);
            }
            maps.push(words);
        }
        let vert = maps.pop().unwrap();
        let horiz = maps.pop().unwrap();
        let expected = {
            let side = 2i64 * (n + pad) as i64 + 1;
            ((side - 1) * side) as usize / 64 + 1
        };
        if horiz.len() != expected || vert.len() != expected {
            return Err(LatticeError::Corrupt("bitmap length mismatch".into()));
        }
        Ok(Config {
            n,
            pad,
            p,
            seed,
            horiz,
            vert,
        })
    }
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            self.parent[v as usize] = self.parent[self.parent[v as usize] as usize];
            v = self.parent[v as usize];
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
    }
}

/// Open-adjacency components of the padded box.
pub struct ClusterLabeling {
    /// Compact cluster id per vertex index.
    labels: Vec<u32>,
    /// Vertex count per cluster id.
    sizes: Vec<u32>,
    /// Id of the largest cluster (ties broken by smallest id).
    largest: u32,
}

impl ClusterLabeling {
    pub fn label_of(&self, config: &Config, v: Vertex) -> u32 {
        self.labels[config.vertex_index(v)]
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn largest_id(&self) -> u32 {
        self.largest
    }

    pub fn largest_size(&self) -> u32 {
        self.sizes[self.largest as usize]
    }

    /// Whether a vertex belongs to the approximate infinite-cluster trace,
    /// i.e. the largest cluster of the padded box.
    pub fn in_trace(&self, config: &Config, v: Vertex) -> bool {
        config.in_padded_box(v) && self.label_of(config, v) == self.largest
    }
}

/// Union-find labeling of the open-adjacency components of the padded box.
pub fn cluster(config: &Config) -> ClusterLabeling {
    let count = config.vertex_count();
    let mut uf = UnionFind::new(count);
    let r = config.radius();
    for y in -r..=r {
        for x in -r..=r {
            let v = Vertex::new(x, y);
            let vi = config.vertex_index(v) as u32;
            if x < r && config.is_open_step(v, Dir::E) {
                uf.union(vi, config.vertex_index(v.step(Dir::E)) as u32);
            }
            if y < r && config.is_open_step(v, Dir::N) {
                uf.union(vi, config.vertex_index(v.step(Dir::N)) as u32);
            }
        }
    }
    // Compact ids in root order so label assignment is deterministic.
    let mut root_to_id = vec![u32::MAX; count];
    let mut labels = vec![0u32; count];
    let mut sizes = Vec::new();
    for (idx, label) in labels.iter_mut().enumerate() {
        let root = uf.find(idx as u32) as usize;
        if root_to_id[root] == u32::MAX {
            root_to_id[root] = sizes.len() as u32;
            sizes.push(0);
        }
        *label = root_to_id[root];
        sizes[root_to_id[root] as usize] += 1;
    }
    let mut largest = 0u32;
    for (id, &s) in sizes.iter().enumerate() {
        if s > sizes[largest as usize] {
            largest = id as u32;
        }
    }
    ClusterLabeling {
        labels,
        sizes,
        largest,
    }
}

/// A vertex subset of the giant component, with its configuration context.
#[derive(Clone)]
pub struct Subgraph {
    pub config: Arc<Config>,
    pub labeling: Arc<ClusterLabeling>,
    /// Inner box radius.
    pub n: i32,
    /// Sorted, duplicate-free vertex set.
    pub vertices: Vec<Vertex>,
}

impl fmt::Debug for Subgraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subgraph(n={}, |U|={}, {:?})",
            self.n,
            self.vertices.len(),
            self.config
        )
    }
}

/// Which ambient graph an edge boundary is taken in.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BoundaryMode {
    /// ∂ⁿU: boundary within the giant component of the inner box.
    WithinBox,
    /// ∂∞U: boundary within the whole cluster trace.
    Infinite,
}

impl Subgraph {
    fn sorted(mut vertices: Vec<Vertex>) -> Vec<Vertex> {
        vertices.sort();
        vertices.dedup();
        vertices
    }

    /// Giant-component membership is not rechecked here; use
    /// [`Subgraph::subset`] to carve validated subsets out of a giant
    /// component.
    pub fn new(
        config: Arc<Config>,
        labeling: Arc<ClusterLabeling>,
        n: i32,
        vertices: Vec<Vertex>,
    ) -> Subgraph {
        Subgraph {
            config,
            labeling,
            n,
            vertices: Self::sorted(vertices),
        }
    }

    /// A validated subset of an existing giant component.
    pub fn subset(&self, vertices: Vec<Vertex>) -> Result<Subgraph, LatticeError> {
        let vertices = Self::sorted(vertices);
        for v in &vertices {
            if self.vertices.binary_search(v).is_err() {
                return Err(LatticeError::Argument(format!(
                    "vertex {v} is not in the host giant component"
                )));
            }
        }
        Ok(Subgraph {
            config: self.config.clone(),
            labeling: self.labeling.clone(),
            n: self.n,
            vertices,
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn in_trace(&self, v: Vertex) -> bool {
        self.labeling.in_trace(&self.config, v)
    }

    /// Open edges of the ambient graph with exactly one endpoint in this set.
    pub fn edge_boundary(&self, mode: BoundaryMode) -> Vec<Edge> {
        let mut out = Vec::new();
        for &v in &self.vertices {
            for d in [Dir::E, Dir::N, Dir::W, Dir::S] {
                let w = v.step(d);
                if self.contains(w) || !self.config.is_open_step(v, d) {
                    continue;
                }
                let counts = match mode {
                    BoundaryMode::WithinBox => {
                        // Edges of the giant component proper: both endpoints
                        // in the trace and in the inner box.
                        self.config.in_inner_box(v)
                            && self.config.in_inner_box(w)
                            && self.in_trace(w)
                    }
                    BoundaryMode::Infinite => self.in_trace(w),
                };
                if counts {
                    out.push(Edge::new(v, w));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// |∂U| / |U| as an exact rational.
    pub fn conductance(&self, mode: BoundaryMode) -> Ratio {
        assert!(!self.is_empty(), "conductance of an empty subgraph");
        Ratio::new(self.edge_boundary(mode).len() as u64, self.len() as u64)
    }

    /// Connected pieces of the set through open edges, each as a subgraph.
    pub fn components(&self) -> Vec<Subgraph> {
        let mut comp_id = vec![usize::MAX; self.vertices.len()];
        let mut count = 0;
        for start in 0..self.vertices.len() {
            if comp_id[start] != usize::MAX {
                continue;
            }
            let id = count;
            count += 1;
            let mut stack = vec![start];
            comp_id[start] = id;
            while let Some(i) = stack.pop() {
                let v = self.vertices[i];
                for d in DIRS {
                    if !self.config.is_open_step(v, d) {
                        continue;
                    }
                    if let Ok(j) = self.vertices.binary_search(&v.step(d)) {
                        if comp_id[j] == usize::MAX {
                            comp_id[j] = id;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        (0..count)
            .map(|id| Subgraph {
                config: self.config.clone(),
                labeling: self.labeling.clone(),
                n: self.n,
                vertices: self
                    .vertices
                    .iter()
                    .zip(comp_id.iter())
                    .filter(|(_, &c)| c == id)
                    .map(|(&v, _)| v)
                    .collect(),
            })
            .collect()
    }

    /// Whether the set is connected through open edges inside the inner box.
    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(i) = stack.pop() {
            let v = self.vertices[i];
            for d in DIRS {
                let w = v.step(d);
                if !self.config.is_open_step(v, d) {
                    continue;
                }
                if let Ok(j) = self.vertices.binary_search(&w) {
                    if !seen[j] {
                        seen[j] = true;
                        reached += 1;
                        stack.push(j);
                    }
                }
            }
        }
        reached == self.vertices.len()
    }
}

/// Largest connected component of the infinite-cluster trace on the inner
/// box, approximating the giant component.
pub fn giant_component(
    config: &Arc<Config>,
    labeling: &Arc<ClusterLabeling>,
) -> Result<Subgraph, LatticeError> {
    if config.p() <= 0.5 {
        return Err(LatticeError::Subcritical(config.p()));
    }
    let n = config.n();
    let mut trace = Vec::new();
    for x in -n..=n {
        for y in -n..=n {
            let v = Vertex::new(x, y);
            if labeling.in_trace(config, v) {
                trace.push(v);
            }
        }
    }
    if trace.is_empty() {
        return Err(LatticeError::NoGiant);
    }
    // Components of the trace through open in-box edges; the giant component
    // is the largest one, ties broken by the lexicographically smallest
    // vertex. `trace` is sorted by construction, so component ids are
    // assigned in vertex order and the smallest-vertex rule is the
    // smallest-id rule.
    let mut comp = vec![u32::MAX; trace.len()];
    let mut comp_sizes: Vec<u32> = Vec::new();
    for start in 0..trace.len() {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = comp_sizes.len() as u32;
        comp_sizes.push(0);
        let mut stack = vec![start];
        comp[start] = id;
        while let Some(i) = stack.pop() {
            comp_sizes[id as usize] += 1;
            let v = trace[i];
            for d in DIRS {
                let w = v.step(d);
                if !config.in_inner_box(w) || !config.is_open_step(v, d) {
                    continue;
                }
                if let Ok(j) = trace.binary_search(&w) {
                    if comp[j] == u32::MAX {
                        comp[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
    }
    let mut best = 0u32;
    for (id, &s) in comp_sizes.iter().enumerate() {
        if s > comp_sizes[best as usize] {
            best = id as u32;
        }
    }
    let vertices: Vec<Vertex> = trace
        .iter()
        .zip(comp.iter())
        .filter(|(_, &c)| c == best)
        .map(|(&v, _)| v)
        .collect();
    Ok(Subgraph::new(config.clone(), labeling.clone(), n, vertices))
}

/// Convenience: sample, label and extract the giant component in one call.
pub fn sample_giant(n: i32, p: f64, seed: u64, pad: i32) -> Result<Subgraph, LatticeError> {
    let config = Arc::new(sample_config(n, p, seed, pad)?);
    let labeling = Arc::new(cluster(&config));
    giant_component(&config, &labeling)
}

/// Monte Carlo estimate of the density θ_p of the infinite cluster: mean
/// largest-cluster fraction over independent padded boxes.
pub fn density_estimate(
    p: f64,
    box_radius: i32,
    replicas: u32,
    seed: u64,
) -> Result<(f64, f64), LatticeError> {
    if p <= 0.5 {
        return Err(LatticeError::Subcritical(p));
    }
    if replicas == 0 {
        return Err(LatticeError::Argument("replicas must be positive".into()));
    }
    let mut fractions = Vec::with_capacity(replicas as usize);
    for rep in 0..replicas {
        let config = sample_config(box_radius, p, derive_seed(seed, rep as u64), 0)?;
        let labeling = cluster(&config);
        fractions.push(labeling.largest_size() as f64 / config.vertex_count() as f64);
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    let var = if fractions.len() > 1 {
        fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (fractions.len() - 1) as f64
    } else {
        0.0
    };
    Ok((mean, (var / fractions.len() as f64).sqrt()))
}

/// The ℓ∞-nearest trace vertex to a point of the plane, ties broken by the
/// smallest η (then by vertex order, for exact η collisions).
pub fn nearest_cluster_vertex(
    config: &Config,
    labeling: &ClusterLabeling,
    px: f64,
    py: f64,
) -> Result<Vertex, LatticeError> {
    if labeling.largest_size() == 0 {
        return Err(LatticeError::NoGiant);
    }
    let r = config.radius();
    let cx = px.round().clamp(-(r as f64), r as f64) as i32;
    let cy = py.round().clamp(-(r as f64), r as f64) as i32;
    let mut best: Option<(f64, f64, Vertex)> = None;
    // Expanding ℓ∞ rings around the rounded point. Once a hit is found at
    // ring ρ, rings beyond the hit distance plus one lattice step cannot win.
    for ring in 0..=(2 * r) {
        if let Some((d, _, _)) = best {
            if (ring as f64 - 1.0) - (cx as f64 - px).abs().max((cy as f64 - py).abs()) > d {
                break;
            }
        }
        let lo_x = cx - ring;
        let hi_x = cx + ring;
        let lo_y = cy - ring;
        let hi_y = cy + ring;
        let mut consider = |v: Vertex| {
            if !config.in_padded_box(v) || !labeling.in_trace(config, v) {
                return;
            }
            let d = v.linf_to(px, py);
            let eta = config.eta(v);
            let key = (d, eta, v);
            match best {
                None => best = Some(key),
                Some(cur) => {
                    if key < cur {
                        best = Some(key);
                    }
                }
            }
        };
        if ring == 0 {
            consider(Vertex::new(cx, cy));
            continue;
        }
        for x in lo_x..=hi_x {
            consider(Vertex::new(x, lo_y));
            consider(Vertex::new(x, hi_y));
        }
        for y in (lo_y + 1)..hi_y {
            consider(Vertex::new(lo_x, y));
            consider(Vertex::new(hi_x, y));
        }
    }
    best.map(|(_, _, v)| v).ok_or(LatticeError::NoGiant)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_one_opens_everything_p_zero_nothing() {
        let full = sample_config(2, 1.0, 7, 0).unwrap();
        assert_eq!(full.open_fraction(), 1.0);
        let empty = sample_config(2, 0.0, 7, 0).unwrap();
        assert_eq!(empty.open_fraction(), 0.0);
    }

    #[test]
    fn open_fraction_concentrates() {
        let config = sample_config(50, 0.6, 7, 0).unwrap();
        assert!((config.open_fraction() - 0.6).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_config(10, 0.7, 42, 5).unwrap();
        let b = sample_config(10, 0.7, 42, 5).unwrap();
        assert_eq!(a.horiz, b.horiz);
        assert_eq!(a.vert, b.vert);
    }

    #[test]
    fn coupling_is_monotone_in_p() {
        let lo = sample_config(15, 0.55, 9, 0).unwrap();
        let hi = sample_config(15, 0.8, 9, 0).unwrap();
        for (wl, wh) in lo.horiz.iter().zip(hi.horiz.iter()) {
            assert_eq!(wl & !wh, 0, "open edge at p=0.55 closed at p=0.8");
        }
        for (wl, wh) in lo.vert.iter().zip(hi.vert.iter()) {
            assert_eq!(wl & !wh, 0);
        }
    }

    #[test]
    fn padding_preserves_shared_bits() {
        let small = sample_config(5, 0.6, 3, 0).unwrap();
        let big = sample_config(5, 0.6, 3, 7).unwrap();
        for y in -5..=5 {
            for x in -5..5 {
                let e = Edge::new(Vertex::new(x, y), Vertex::new(x + 1, y));
                assert_eq!(small.is_open(e), big.is_open(e));
            }
        }
    }

    #[test]
    fn cluster_counts_at_extremes() {
        let full = sample_config(3, 1.0, 1, 0).unwrap();
        let labeling = cluster(&full);
        assert_eq!(labeling.largest_size() as usize, full.vertex_count());
        let empty = sample_config(3, 0.0, 1, 0).unwrap();
        let labeling = cluster(&empty);
        assert_eq!(labeling.sizes().len(), empty.vertex_count());
        assert!(labeling.sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn largest_cluster_fraction_tracks_density() {
        let (theta, stderr) = density_estimate(0.6, 60, 8, 11).unwrap();
        assert!(stderr < 0.05);
        let config = sample_config(20, 0.6, 3, 20).unwrap();
        let labeling = cluster(&config);
        let frac = labeling.largest_size() as f64 / config.vertex_count() as f64;
        assert!(
            (frac - theta).abs() < 0.05 + 3.0 * stderr,
            "fraction {frac} vs theta {theta}"
        );
    }

    #[test]
    fn giant_component_at_p_one_is_full_box() {
        let g = sample_giant(2, 1.0, 5, 0).unwrap();
        assert_eq!(g.len(), 25);
    }

    #[test]
    fn giant_component_refuses_subcritical() {
        let config = Arc::new(sample_config(10, 0.3, 1, 0).unwrap());
        let labeling = Arc::new(cluster(&config));
        match giant_component(&config, &labeling) {
            Err(LatticeError::Subcritical(_)) => {}
            other => panic!("expected subcritical error, got {other:?}"),
        }
    }

    #[test]
    fn giant_density_over_seeds() {
        let (theta, _) = density_estimate(0.9, 120, 12, 77).unwrap();
        let mut hits = 0;
        let seeds = 40u64;
        for seed in 0..seeds {
            let g = sample_giant(25, 0.9, seed, 25).unwrap();
            let frac = g.len() as f64 / (51.0 * 51.0);
            if (frac - theta).abs() < 0.05 {
                hits += 1;
            }
        }
        assert!(hits * 100 >= seeds * 95, "only {hits}/{seeds} within band");
    }

    #[test]
    fn density_stderr_shrinks_at_scale() {
        let (theta, stderr) = density_estimate(0.9, 200, 50, 19).unwrap();
        assert!(stderr < 0.01, "stderr {stderr}");
        assert!(theta > 0.9 && theta <= 1.0);
    }

    #[test]
    fn edge_boundary_matches_independent_recount() {
        // Recount by scanning every edge of the box instead of walking
        // vertex neighborhoods.
        let config = Arc::new(sample_config(5, 0.8, 21, 5).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        let u = g
            .subset(g.vertices.iter().take(10).copied().collect())
            .unwrap();
        let reported = u.edge_boundary(BoundaryMode::Infinite);
        let r = config.radius();
        let mut recount = Vec::new();
        for x in -r..=r {
            for y in -r..=r {
                let v = Vertex::new(x, y);
                for w in [Vertex::new(x + 1, y), Vertex::new(x, y + 1)] {
                    if !config.in_padded_box(w) {
                        continue;
                    }
                    let e = Edge::new(v, w);
                    if !config.is_open(e) {
                        continue;
                    }
                    let (inside, trace) = (
                        u.contains(v) as u8 + u.contains(w) as u8,
                        labeling.in_trace(&config, v) && labeling.in_trace(&config, w),
                    );
                    if inside == 1 && trace {
                        recount.push(e);
                    }
                }
            }
        }
        recount.sort();
        assert_eq!(reported, recount);
    }

    #[test]
    fn density_estimate_is_exact_and_deterministic_at_p_one() {
        let (theta, stderr) = density_estimate(1.0, 10, 3, 4).unwrap();
        assert_eq!(theta, 1.0);
        assert_eq!(stderr, 0.0);
        assert_eq!(
            density_estimate(0.8, 30, 5, 13).unwrap(),
            density_estimate(0.8, 30, 5, 13).unwrap()
        );
    }

    #[test]
    fn theta_nonincreasing_as_p_decreases() {
        let (hi, _) = density_estimate(0.95, 40, 6, 5).unwrap();
        let (lo, _) = density_estimate(0.7, 40, 6, 5).unwrap();
        assert!(lo <= hi);
    }

    #[test]
    fn nearest_vertex_basics() {
        let config = Arc::new(sample_config(3, 1.0, 2, 0).unwrap());
        let labeling = Arc::new(cluster(&config));
        assert_eq!(
            nearest_cluster_vertex(&config, &labeling, 0.1, 0.2).unwrap(),
            Vertex::new(0, 0)
        );
        // Midpoint tie between (0,0) and (1,0): smaller η wins.
        let a = Vertex::new(0, 0);
        let b = Vertex::new(1, 0);
        let expect = if config.eta(a) < config.eta(b) { a } else { b };
        assert_eq!(
            nearest_cluster_vertex(&config, &labeling, 0.5, 0.0).unwrap(),
            expect
        );
    }

    #[test]
    fn nearest_vertex_tail_is_monotone() {
        let config = Arc::new(sample_config(20, 0.9, 6, 10).unwrap());
        let labeling = Arc::new(cluster(&config));
        let mut dists = Vec::new();
        let mut state = 99u64;
        for _ in 0..1000 {
            state = splitmix(state);
            let px = (unit(state) - 0.5) * 30.0;
            state = splitmix(state);
            let py = (unit(state) - 0.5) * 30.0;
            let v = nearest_cluster_vertex(&config, &labeling, px, py).unwrap();
            dists.push(v.l2_to(px, py));
        }
        let tail = |r: f64| dists.iter().filter(|&&d| d > r).count();
        let mut prev = usize::MAX;
        for r in 0..6 {
            let t = tail(r as f64);
            assert!(t <= prev);
            prev = t;
        }
        // Nearly every point should have a trace vertex within distance 3.
        assert!(tail(3.0) < 20);
    }

    #[test]
    fn boundary_of_singleton_and_corner() {
        let config = Arc::new(sample_config(2, 1.0, 0, 0).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        let center = g.subset(vec![Vertex::new(0, 0)]).unwrap();
        assert_eq!(center.edge_boundary(BoundaryMode::WithinBox).len(), 4);
        assert_eq!(center.edge_boundary(BoundaryMode::Infinite).len(), 4);
        let corner = g.subset(vec![Vertex::new(2, 2)]).unwrap();
        assert_eq!(corner.edge_boundary(BoundaryMode::WithinBox).len(), 2);
        assert_eq!(corner.conductance(BoundaryMode::WithinBox).to_f64(), 2.0);
    }

    #[test]
    fn corner_with_pad_sees_infinite_boundary() {
        let config = Arc::new(sample_config(2, 1.0, 0, 3).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        let corner = g.subset(vec![Vertex::new(2, 2)]).unwrap();
        assert_eq!(corner.edge_boundary(BoundaryMode::WithinBox).len(), 2);
        assert_eq!(corner.edge_boundary(BoundaryMode::Infinite).len(), 4);
    }

    #[test]
    fn box_boundary_subset_of_infinite_boundary() {
        let config = Arc::new(sample_config(6, 0.8, 17, 6).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        // A few prefixes of the (sorted) giant component as test subsets.
        for take in [1, 5, g.len() / 2] {
            let u = g
                .subset(g.vertices.iter().take(take.max(1)).copied().collect())
                .unwrap();
            let inner = u.edge_boundary(BoundaryMode::WithinBox);
            let outer = u.edge_boundary(BoundaryMode::Infinite);
            for e in &inner {
                assert!(outer.binary_search(e).is_ok(), "∂ⁿ ⊄ ∂∞");
            }
        }
    }

    #[test]
    fn components_split_and_cover() {
        let config = Arc::new(sample_config(3, 1.0, 1, 0).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        let u = g
            .subset(vec![
                Vertex::new(0, 0),
                Vertex::new(0, 1),
                Vertex::new(2, 2),
            ])
            .unwrap();
        let comps = u.components();
        assert_eq!(comps.len(), 2);
        let total: usize = comps.iter().map(|c| c.len()).sum();
        assert_eq!(total, u.len());
        assert!(comps.iter().all(|c| c.is_connected()));
    }

    #[test]
    fn conductance_left_half_of_box() {
        let config = Arc::new(sample_config(2, 1.0, 0, 0).unwrap());
        let labeling = Arc::new(cluster(&config));
        let g = giant_component(&config, &labeling).unwrap();
        let left: Vec<Vertex> = g.vertices.iter().copied().filter(|v| v.x < 0).collect();
        let u = g.subset(left).unwrap();
        assert_eq!(u.len(), 10);
        let c = u.conductance(BoundaryMode::WithinBox);
        assert_eq!(c, Ratio::new(1, 2));
    }

    #[test]
    fn snapshot_round_trip() {
        let config = sample_config(4, 0.65, 123, 2).unwrap();
        let mut buf = Vec::new();
        config.write_snapshot(&mut buf).unwrap();
        let back = Config::read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back.n(), 4);
        assert_eq!(back.pad(), 2);
        assert_eq!(back.seed(), 123);
        assert_eq!(back.horiz, config.horiz);
        assert_eq!(back.vert, config.vert);
        assert!(Config::read_snapshot(&buf[..10]).is_err());
    }

    #[test]
    fn capacity_error_on_huge_box() {
        match sample_config(20_000, 0.6, 1, 0) {
            Err(LatticeError::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
