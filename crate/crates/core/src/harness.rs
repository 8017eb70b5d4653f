//! End-to-end experiments: the scaling run (does n·Φ̂_n approach φ̂_p/θ̂_p?)
//! and the shape run (how far are rescaled discrete optimizers from the
//! continuum candidates?), plus a content-addressed cache for norm tables.
//!
//! Runs are reproducible: every stage derives its randomness from the spec
//! seeds, and CSV output contains no wall-clock data, so identical specs
//! produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::beta::{build_norm_table, BetaError, NormTable};
use crate::cheeger::{cheeger_search, CheegerError, Host};
use crate::continuum::{
    hausdorff_distance, polygonal_approximation, solve_restricted, ContinuumError, Norm, Polygon,
    Shape, SolverSettings,
};
use crate::geom::Vertex;
use crate::lattice::{
    cluster, density_estimate, derive_seed, giant_component, sample_config, LatticeError,
};
use crate::ratio::Ratio;
use crate::rightmost::{circuit_decomposition, Hull, PathError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("run scaling first: no cached optimizers for this spec")]
    MissingScaling,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Beta(#[from] BetaError),
    #[error(transparent)]
    Cheeger(#[from] CheegerError),
    #[error(transparent)]
    Continuum(#[from] ContinuumError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Which norm the continuum stage uses.
#[derive(Clone, Debug)]
pub enum NormSpec {
    /// A builtin norm name, e.g. `l1` or `euclid`.
    Builtin(String),
    /// A norm table persisted at this path.
    TableFile(PathBuf),
    /// Estimate the table for the spec's p (through the cache).
    Estimate {
        resolution: usize,
        scales: Vec<u32>,
        replicas: u32,
    },
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub p: f64,
    pub n_grid: Vec<i32>,
    pub seeds: Vec<u64>,
    /// pad = ceil(pad_factor * n); the default 1.0 doubles the box.
    pub pad_factor: f64,
    pub norm: NormSpec,
    pub cheeger_budget: u64,
    pub solver: SolverSettings,
    pub cache_dir: PathBuf,
    /// Box radius and replica count for the density estimate.
    pub density_radius: i32,
    pub density_replicas: u32,
    pub master_seed: u64,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.n_grid.is_empty() {
            return Err(HarnessError::Argument("empty n grid".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Argument(
                "n grid must be strictly increasing".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Argument("no seeds".into()));
        }
        if self.pad_factor.is_nan() || self.pad_factor < 0.0 {
            return Err(HarnessError::Argument("bad pad factor".into()));
        }
        Ok(())
    }

    pub fn pad_for(&self, n: i32) -> i32 {
        (self.pad_factor * n as f64).ceil() as i32
    }

    /// A stable fingerprint of everything that influences the run.
    fn fingerprint(&self) -> u64 {
        let mut text = String::new();
        let _ = write!(
            text,
            "p={:.17e};grid={:?};seeds={:?};padf={:.17e};budget={};master={};",
            self.p, self.n_grid, self.seeds, self.pad_factor, self.cheeger_budget, self.master_seed
        );
        let _ = match &self.norm {
            NormSpec::Builtin(name) => write!(text, "norm=builtin:{name}"),
            NormSpec::TableFile(path) => write!(text, "norm=file:{}", path.display()),
            NormSpec::Estimate {
                resolution,
                scales,
                replicas,
            } => write!(text, "norm=est:{resolution}:{scales:?}:{replicas}"),
        };
        fnv64(text.as_bytes())
    }
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Content-addressed norm-table lookup: see `cache_norm_table`.
pub struct CacheOutcome {
    pub path: PathBuf,
    pub table: NormTable,
    pub hit: bool,
    pub rebuilt_corrupt: bool,
}

/// Look up (or build) the norm table for `(p, resolution, scales, replicas,
/// seed)` in the cache directory. A table is served only when its checksum
/// and metadata match; a tampered file is rebuilt with a warning.
pub fn cache_norm_table(
    cache_dir: &Path,
    p: f64,
    resolution: usize,
    scales: &[u32],
    replicas: u32,
    seed: u64,
) -> Result<CacheOutcome, HarnessError> {
    fs::create_dir_all(cache_dir)?;
    let key = format!("p={p:.17e};res={resolution};scales={scales:?};reps={replicas};seed={seed}");
    let path = cache_dir.join(format!("norm-{:016x}.txt", fnv64(key.as_bytes())));
    let mut rebuilt_corrupt = false;
    if path.exists() {
        let raw = fs::read_to_string(&path)?;
        match verify_checksummed(&raw) {
            Some(body) => match NormTable::from_text(body) {
                Ok(table)
                    if table.p == p
                        && table.resolution == resolution
                        && table.scales.as_slice() == scales
                        && table.replicas == replicas
                        && table.seed == seed =>
                {
                    return Ok(CacheOutcome {
                        path,
                        table,
                        hit: true,
                        rebuilt_corrupt: false,
                    });
                }
                _ => {
                    eprintln!(
                        "warning: cached norm table {} has mismatched metadata; rebuilding",
                        path.display()
                    );
                    rebuilt_corrupt = true;
                }
            },
            None => {
                eprintln!(
                    "warning: cached norm table {} failed its checksum; rebuilding",
                    path.display()
                );
                rebuilt_corrupt = true;
            }
        }
    }
    let table = build_norm_table(p, resolution, scales, replicas, seed)?;
    let body = table.to_text();
    fs::write(&path, checksummed(&body))?;
    Ok(CacheOutcome {
        path,
        table,
        hit: false,
        rebuilt_corrupt,
    })
}

fn checksummed(body: &str) -> String {
    format!("{body}checksum {:016x}\n", fnv64(body.as_bytes()))
}

fn verify_checksummed(raw: &str) -> Option<&str> {
    let trimmed = raw.strip_suffix('\n')?;
    let at = trimmed.rfind('\n')?;
    let (body, last) = trimmed.split_at(at + 1);
    let sum = last.strip_prefix("checksum ")?;
    let expected = u64::from_str_radix(sum, 16).ok()?;
    (fnv64(body.as_bytes()) == expected).then_some(body)
}

fn resolve_norm(spec: &ExperimentSpec) -> Result<Norm, HarnessError> {
    match &spec.norm {
        NormSpec::Builtin(name) => Ok(Norm::parse_builtin(name)?),
        NormSpec::TableFile(path) => {
            let raw = fs::read_to_string(path)?;
            let body = verify_checksummed(&raw).unwrap_or(&raw);
            Ok(Norm::Table(NormTable::from_text(body).map_err(|e| {
                HarnessError::Cache(format!("norm table {}: {e}", path.display()))
            })?))
        }
        NormSpec::Estimate {
            resolution,
            scales,
            replicas,
        } => {
            let outcome = cache_norm_table(
                &spec.cache_dir,
                spec.p,
                *resolution,
                scales,
                *replicas,
                derive_seed(spec.master_seed, 0xbe7a),
            )?;
            Ok(Norm::Table(outcome.table))
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScalingRecord {
    pub n: i32,
    pub seed: u64,
    pub giant_size: usize,
    pub phi_lower: Ratio,
    pub phi_upper: Ratio,
    pub n_phi: f64,
    pub elapsed_ms: u128,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub records: Vec<ScalingRecord>,
    pub theta_hat: f64,
    pub theta_stderr: f64,
    pub phi_hat: f64,
    pub predicted_limit: f64,
    /// Mean of n·Φ̂ at the largest n.
    pub largest_n_mean: f64,
    /// (n, max - min of n·Φ̂ across seeds).
    pub spreads: Vec<(i32, f64)>,
}

/// The full scaling experiment. Per-row failures are recorded, not fatal.
/// Optimizer subsets are cached for the shape run.
pub fn run_scaling(spec: &ExperimentSpec) -> Result<ScalingReport, HarnessError> {
    spec.validate()?;
    let norm = resolve_norm(spec)?;
    let (theta_hat, theta_stderr) = density_estimate(
        spec.p,
        spec.density_radius,
        spec.density_replicas,
        derive_seed(spec.master_seed, 0x7e7a),
    )?;
    let solved = solve_restricted(&norm, 0.0, spec.solver)?;
    let phi_hat = solved.phi_hat;
    let predicted_limit = phi_hat / theta_hat;

    let mut records = Vec::new();
    let mut optimizer_lines = String::new();
    for &n in &spec.n_grid {
        for &seed in &spec.seeds {
            let started = Instant::now();
            let row = scaling_row(spec, n, seed);
            let elapsed_ms = started.elapsed().as_millis();
            match row {
                Ok((record, best_subset)) => {
                    let _ = write!(optimizer_lines, "{n} {seed}");
                    for v in &best_subset {
                        let _ = write!(optimizer_lines, " {},{}", v.x, v.y);
                    }
                    optimizer_lines.push('\n');
                    records.push(ScalingRecord {
                        elapsed_ms,
                        ..record
                    });
                }
                Err(e) => records.push(ScalingRecord {
                    n,
                    seed,
                    giant_size: 0,
                    phi_lower: Ratio::zero(),
                    phi_upper: Ratio::zero(),
                    n_phi: f64::NAN,
                    elapsed_ms,
                    error: Some(e.to_string()),
                }),
            }
        }
    }

    fs::create_dir_all(&spec.cache_dir)?;
    fs::write(optimizer_cache_path(spec), checksummed(&optimizer_lines))?;

    let spreads = spec
        .n_grid
        .iter()
        .map(|&n| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.n == n && r.error.is_none())
                .map(|r| r.n_phi)
                .collect();
            let spread = match (
                values.iter().cloned().fold(f64::INFINITY, f64::min),
                values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ) {
                (lo, hi) if lo.is_finite() && hi.is_finite() => hi - lo,
                _ => f64::NAN,
            };
            (n, spread)
        })
        .collect();
    let largest = *spec.n_grid.last().unwrap();
    let at_largest: Vec<f64> = records
        .iter()
        .filter(|r| r.n == largest && r.error.is_none())
        .map(|r| r.n_phi)
        .collect();
    let largest_n_mean = if at_largest.is_empty() {
        f64::NAN
    } else {
        at_largest.iter().sum::<f64>() / at_largest.len() as f64
    };
    Ok(ScalingReport {
        records,
        theta_hat,
        theta_stderr,
        phi_hat,
        predicted_limit,
        largest_n_mean,
        spreads,
    })
}

fn scaling_row(
    spec: &ExperimentSpec,
    n: i32,
    seed: u64,
) -> Result<(ScalingRecord, Vec<Vertex>), HarnessError> {
    let config = Arc::new(sample_config(n, spec.p, seed, spec.pad_for(n))?);
    let labeling = Arc::new(cluster(&config));
    let giant = giant_component(&config, &labeling)?;
    let host = Host::from_subgraph(&giant);
    let result = cheeger_search(
        &host,
        spec.cheeger_budget,
        derive_seed(spec.master_seed, derive_seed(n as u64, seed)),
    )?;
    let best: Vec<Vertex> = result.optimizers[0]
        .iter()
        .map(|&i| giant.vertices[i as usize])
        .collect();
    let record = ScalingRecord {
        n,
        seed,
        giant_size: giant.len(),
        phi_lower: result.phi_lower,
        phi_upper: result.phi_upper,
        n_phi: n as f64 * result.phi_upper.to_f64(),
        elapsed_ms: 0,
        error: None,
    };
    Ok((record, best))
}

fn optimizer_cache_path(spec: &ExperimentSpec) -> PathBuf {
    spec.cache_dir
        .join(format!("optimizers-{:016x}.txt", spec.fingerprint()))
}

/// Versioned, deterministic CSV for a scaling report (no wall-clock
/// columns, so identical specs give identical bytes).
pub fn scaling_csv(report: &ScalingReport) -> String {
    let mut out = String::new();
    out.push_str(
        "# percolab-scaling v1: n,seed,giant,phi_lower,phi_lower_real,phi_upper,\
         phi_upper_real,n_phi,theta_hat,phi_hat,predicted_limit,error\n",
    );
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.12e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.n,
            r.seed,
            r.giant_size,
            r.phi_lower,
            r.phi_lower.to_f64(),
            r.phi_upper,
            r.phi_upper.to_f64(),
            r.n_phi,
            report.theta_hat,
            report.phi_hat,
            report.predicted_limit,
            r.error.as_deref().unwrap_or("")
        );
    }
    out
}

#[derive(Clone, Debug)]
pub struct ShapeRecord {
    pub n: i32,
    pub seed: u64,
    /// Hausdorff distance of the rescaled optimizer to each continuum
    /// candidate family.
    pub distances: Vec<(&'static str, f64)>,
    pub best_family: &'static str,
    pub best_distance: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ShapeReport {
    pub records: Vec<ShapeRecord>,
    pub resolution: f64,
}

/// Continuum candidate regions to compare optimizers against.
fn continuum_candidates(
    norm: &Norm,
    solver: SolverSettings,
) -> Result<Vec<(&'static str, Polygon)>, HarnessError> {
    let mut out = Vec::new();
    let cut_v = crate::continuum::CandidateRegion {
        t_start: 1.0,
        t_end: 5.0,
        control: vec![(0.0, -0.5), (0.0, 0.0), (0.0, 0.5)],
    };
    out.push(("straight-cut-v", cut_v.polygon()?));
    let cut_h = crate::continuum::CandidateRegion {
        t_start: 3.0,
        t_end: 7.0,
        control: vec![(0.5, 0.0), (0.0, 0.0), (-0.5, 0.0)],
    };
    out.push(("straight-cut-h", cut_h.polygon()?));
    let quarter = crate::continuum::quarter_wulff_conductance(norm, 0.0, solver.wulff_directions)?;
    out.push(("quarter-wulff", quarter.polygon));
    let solved = solve_restricted(norm, 0.0, solver)?;
    out.push(("free-form", solved.optimizer));
    Ok(out)
}

/// The shape experiment: for each cached optimizer, decompose, corner-round,
/// approximate, rescale by 1/n, and measure the Hausdorff distance to each
/// continuum candidate.
pub fn run_shape(spec: &ExperimentSpec, resolution: f64) -> Result<ShapeReport, HarnessError> {
    spec.validate()?;
    let path = optimizer_cache_path(spec);
    if !path.exists() {
        return Err(HarnessError::MissingScaling);
    }
    let raw = fs::read_to_string(&path)?;
    let body = verify_checksummed(&raw)
        .ok_or_else(|| HarnessError::Cache("optimizer cache failed its checksum".into()))?;
    let norm = resolve_norm(spec)?;
    let candidates = continuum_candidates(&norm, spec.solver)?;
    let mut records = Vec::new();
    for line in body.lines() {
        let mut parts = line.split_whitespace();
        let n: i32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HarnessError::Cache("bad optimizer line".into()))?;
        let seed: u64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HarnessError::Cache("bad optimizer line".into()))?;
        let vertices: Vec<Vertex> = parts
            .map(|tok| {
                let (x, y) = tok
                    .split_once(',')
                    .ok_or_else(|| HarnessError::Cache("bad vertex token".into()))?;
                Ok(Vertex::new(
                    x.parse()
                        .map_err(|_| HarnessError::Cache("bad vertex x".into()))?,
                    y.parse()
                        .map_err(|_| HarnessError::Cache("bad vertex y".into()))?,
                ))
            })
            .collect::<Result<_, HarnessError>>()?;
        match shape_row(spec, &candidates, n, seed, vertices, resolution) {
            Ok(record) => records.push(record),
            Err(e) => records.push(ShapeRecord {
                n,
                seed,
                distances: Vec::new(),
                best_family: "",
                best_distance: f64::NAN,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(ShapeReport {
        records,
        resolution,
    })
}

fn shape_row(
    spec: &ExperimentSpec,
    candidates: &[(&'static str, Polygon)],
    n: i32,
    seed: u64,
    vertices: Vec<Vertex>,
    resolution: f64,
) -> Result<ShapeRecord, HarnessError> {
    let config = Arc::new(sample_config(n, spec.p, seed, spec.pad_for(n))?);
    let labeling = Arc::new(cluster(&config));
    let giant = giant_component(&config, &labeling)?;
    let u = giant.subset(vertices)?;

    // Optimizers may be disconnected; decompose each connected piece and
    // pool the region samples.
    let scale = 1.0 / n as f64;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for piece_graph in u.components() {
        let decomposition = circuit_decomposition(&piece_graph)?;
        let outer = crate::rightmost::PlanarCurve {
            points: decomposition
                .outer
                .curve
                .points
                .iter()
                .map(|&(x, y)| (x * scale, y * scale))
                .collect(),
            closed: true,
        };
        let simplified = polygonal_approximation(&outer, &norm_for_lengths(), resolution)?;
        let outer_poly = Polygon::new(simplified.points.clone())?;
        let mut piece = crate::continuum::polygon_samples(&outer_poly, resolution);
        if !decomposition.inner.is_empty() {
            let holes: Vec<Hull<'_>> = decomposition
                .inner
                .iter()
                .map(|piece| Hull::new(&piece.curve))
                .collect::<Result<_, _>>()?;
            piece.retain(|&(x, y)| {
                let (lx, ly) = (x / scale, y / scale);
                !holes.iter().any(|h| hull_contains_point(h, lx, ly))
            });
        }
        samples.extend(piece);
    }

    let mut distances = Vec::new();
    for (family, poly) in candidates {
        let d = hausdorff_distance(
            Shape::Points(&samples),
            Shape::Poly(poly),
            resolution,
        )?;
        distances.push((*family, d));
    }
    let (best_family, best_distance) = distances
        .iter()
        .copied()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    Ok(ShapeRecord {
        n,
        seed,
        distances,
        best_family,
        best_distance,
        error: None,
    })
}

fn norm_for_lengths() -> Norm {
    Norm::Euclidean
}

fn hull_contains_point(hull: &Hull<'_>, x: f64, y: f64) -> bool {
    // Curve coordinates are quarter-integers; test the continuous point by
    // even-odd crossings directly on the curve.
    let mut crossings = 0u32;
    let pts = &hull.curve().points;
    let m = pts.len();
    for i in 0..m {
        let a = pts[i];
        let b = pts[(i + 1) % m];
        let (lo, hi) = if a.1 <= b.1 { (a, b) } else { (b, a) };
        if lo.1 <= y && y < hi.1 {
            let t = (y - lo.1) / (hi.1 - lo.1);
            if lo.0 + t * (hi.0 - lo.0) > x {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

pub fn shape_csv(report: &ShapeReport) -> String {
    let mut out = String::new();
    out.push_str("# percolab-shape v1: n,seed,family,distance,is_best,error\n");
    for r in &report.records {
        if let Some(err) = &r.error {
            let _ = writeln!(out, "{},{},,,,{err}", r.n, r.seed);
            continue;
        }
        for (family, d) in &r.distances {
            let _ = writeln!(
                out,
                "{},{},{},{:.12e},{},",
                r.n,
                r.seed,
                family,
                d,
                if *family == r.best_family { 1 } else { 0 }
            );
        }
    }
    out
}
