//! Cheeger constants of finite hosts: exact brute force at tiny scale, a
//! rigorous lower bound from the uncapped quotient cut, and a seeded
//! stochastic search for the capped upper bound.
//!
//! The size cap `|H| <= |V|/2` makes exact optimization intractable in
//! general, so the contract is a certified sandwich: `phi_lower` is the
//! exact minimum of `|∂H|/|H|` over all nonempty proper subsets (a superset
//! of the capped feasible set), and `phi_upper` is the best capped subset
//! the search encountered. On hosts small enough for brute force the two
//! ends meet.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::Vertex;
use crate::lattice::Subgraph;
use crate::ratio::Ratio;

#[derive(Debug, Error)]
pub enum CheegerError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("host has {0} vertices, exhaustive threshold is {1}")]
    TooLargeForExact(usize, usize),
    #[error("host must be connected")]
    Disconnected,
}

/// Default size limit for exhaustive subset enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 22;

/// A finite host graph. `positions` carries lattice coordinates when the
/// host came from a percolation subgraph; geometric search seeds use them.
#[derive(Clone, Debug)]
pub struct Host {
    adj: Vec<Vec<u32>>,
    positions: Option<Vec<Vertex>>,
}

impl Host {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Host {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Host {
            adj,
            positions: None,
        }
    }

    /// Host graph of a giant component (or any subgraph): vertices become
    /// indices in sorted-vertex order, edges are the open in-box edges.
    pub fn from_subgraph(g: &Subgraph) -> Host {
        let mut adj = vec![Vec::new(); g.len()];
        for (i, &v) in g.vertices.iter().enumerate() {
            for d in crate::geom::DIRS {
                let w = v.step(d);
                if !g.config.in_inner_box(w) || !g.config.is_open_step(v, d) {
                    continue;
                }
                if let Ok(j) = g.vertices.binary_search(&w) {
                    adj[i].push(j as u32);
                }
            }
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Host {
            adj,
            positions: Some(g.vertices.clone()),
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn positions(&self) -> Option<&[Vertex]> {
        self.positions.as_deref()
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    stack.push(w as usize);
                }
            }
        }
        count == self.len()
    }

    /// |∂H| for a subset given as a membership mask.
    fn boundary_size(&self, in_h: &[bool]) -> u64 {
        let mut cut = 0;
        for v in 0..self.len() {
            if !in_h[v] {
                continue;
            }
            for &w in &self.adj[v] {
                if !in_h[w as usize] {
                    cut += 1;
                }
            }
        }
        cut
    }

    fn subset_ratio(&self, subset: &[u32]) -> Ratio {
        let mut in_h = vec![false; self.len()];
        for &v in subset {
            in_h[v as usize] = true;
        }
        Ratio::new(self.boundary_size(&in_h), subset.len() as u64)
    }

    /// Connected components of the induced subgraph on `subset`.
    fn induced_components(&self, subset: &[u32]) -> Vec<Vec<u32>> {
        let set: HashSet<u32> = subset.iter().copied().collect();
        let mut seen: HashSet<u32> = HashSet::new();
        let mut out = Vec::new();
        for &start in subset {
            if seen.contains(&start) {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            seen.insert(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adj[v as usize] {
                    if set.contains(&w) && seen.insert(w) {
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CheegerResult {
    pub phi_lower: Ratio,
    pub phi_upper: Ratio,
    /// Subsets attaining `phi_upper`, as sorted host indices, deduplicated.
    pub optimizers: Vec<Vec<u32>>,
    pub lower_method: &'static str,
    pub upper_method: &'static str,
}

impl CheegerResult {
    /// Structured text export: bounds as exact fractions and reals, then the
    /// optimizer vertex lists.
    pub fn to_text(&self, host: &Host) -> String {
        let mut s = String::new();
        s.push_str("percolab-cheeger v1\n");
        s.push_str(&format!(
            "phi_lower {} {:.12e} method {}\n",
            self.phi_lower,
            self.phi_lower.to_f64(),
            self.lower_method
        ));
        s.push_str(&format!(
            "phi_upper {} {:.12e} method {}\n",
            self.phi_upper,
            self.phi_upper.to_f64(),
            self.upper_method
        ));
        s.push_str(&format!("optimizers {}\n", self.optimizers.len()));
        for opt in &self.optimizers {
            let row: Vec<String> = match host.positions() {
                Some(pos) => opt
                    .iter()
                    .map(|&i| {
                        let v = pos[i as usize];
                        format!("({},{})", v.x, v.y)
                    })
                    .collect(),
                None => opt.iter().map(|i| i.to_string()).collect(),
            };
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Exact Cheeger constant by enumeration of all nonempty subsets with
/// `|H| <= |V|/2`; returns every minimizer.
pub fn cheeger_exact(host: &Host) -> Result<CheegerResult, CheegerError> {
    let n = host.len();
    if n == 0 {
        return Err(CheegerError::Argument("empty host".into()));
    }
    if n > EXHAUSTIVE_LIMIT {
        return Err(CheegerError::TooLargeForExact(n, EXHAUSTIVE_LIMIT));
    }
    let cap = n / 2;
    if cap == 0 {
        return Err(CheegerError::Argument(
            "host needs at least two vertices".into(),
        ));
    }
    let masks: Vec<u32> = (0..n).map(|v| {
        host.adj[v]
            .iter()
            .fold(0u32, |m, &w| m | 1 << w)
    })
    .collect();
    let mut best: Option<Ratio> = None;
    let mut argmins: Vec<u32> = Vec::new();
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as u64;
        if size as usize > cap {
            continue;
        }
        let mut cut = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            cut += (masks[v] & !mask).count_ones() as u64;
        }
        let ratio = Ratio::new(cut, size);
        match best {
            None => {
                best = Some(ratio);
                argmins.push(mask);
            }
            Some(b) => {
                if ratio < b {
                    best = Some(ratio);
                    argmins.clear();
                    argmins.push(mask);
                } else if ratio == b {
                    argmins.push(mask);
                }
            }
        }
    }
    let best = best.expect("cap >= 1 admits singletons");
    let optimizers: Vec<Vec<u32>> = argmins
        .iter()
        .map(|&mask| (0..n as u32).filter(|&v| mask >> v & 1 == 1).collect())
        .collect();
    Ok(CheegerResult {
        phi_lower: best,
        phi_upper: best,
        optimizers,
        lower_method: "exhaustive",
        upper_method: "exhaustive",
    })
}

/// Iterative bridge finder. Returns the child-side vertex set of every
/// bridge; the other side is the complement.
fn bridges_with_sides(host: &Host) -> Vec<Vec<u32>> {
    let n = host.len();
    let mut tin = vec![u32::MAX; n];
    let mut low = vec![u32::MAX; n];
    let mut parent = vec![u32::MAX; n];
    let mut parent_skipped = vec![false; n];
    let mut subtree = vec![1u32; n];
    // Entry-time order: order[tin[v]] == v, so a DFS subtree is a
    // contiguous slice.
    let mut order: Vec<u32> = Vec::with_capacity(n);
    let mut bridge_children: Vec<u32> = Vec::new();
    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    tin[0] = 0;
    low[0] = 0;
    order.push(0);
    while let Some(entry) = stack.last_mut() {
        let v = entry.0 as usize;
        if entry.1 < host.adj[v].len() {
            let w = host.adj[v][entry.1] as usize;
            entry.1 += 1;
            if w as u32 == parent[v] && !parent_skipped[v] {
                // Skip the single tree edge back to the parent; adjacency
                // lists are deduplicated, so there is exactly one.
                parent_skipped[v] = true;
                continue;
            }
            if tin[w] == u32::MAX {
                parent[w] = v as u32;
                tin[w] = order.len() as u32;
                low[w] = tin[w];
                order.push(w as u32);
                stack.push((w as u32, 0));
            } else {
                low[v] = low[v].min(tin[w]);
            }
        } else {
            stack.pop();
            if let Some(up) = stack.last() {
                let p = up.0 as usize;
                low[p] = low[p].min(low[v]);
                subtree[p] += subtree[v];
                if low[v] > tin[p] {
                    bridge_children.push(v as u32);
                }
            }
        }
    }
    bridge_children
        .into_iter()
        .map(|child| {
            let start = tin[child as usize] as usize;
            let len = subtree[child as usize] as usize;
            let mut side = order[start..start + len].to_vec();
            side.sort_unstable();
            side
        })
        .collect()
}

/// Dinic max-flow on small auxiliary networks for the deg-min >= 3 fallback
/// of the uncapped ratio cut.
struct Dinic {
    to: Vec<u32>,
    cap: Vec<u64>,
    head: Vec<Vec<u32>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Dinic {
        Dinic {
            to: Vec::new(),
            cap: Vec::new(),
            head: vec![Vec::new(); n],
            level: vec![0; n],
            iter: vec![0; n],
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: u64) {
        let id = self.to.len() as u32;
        self.to.push(v as u32);
        self.cap.push(c);
        self.head[u].push(id);
        self.to.push(u as u32);
        self.cap.push(0);
        self.head[v].push(id + 1);
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        let mut queue = std::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &id in &self.head[v] {
                let w = self.to[id as usize] as usize;
                if self.cap[id as usize] > 0 && self.level[w] < 0 {
                    self.level[w] = self.level[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, v: usize, t: usize, f: u64) -> u64 {
        if v == t {
            return f;
        }
        while self.iter[v] < self.head[v].len() {
            let id = self.head[v][self.iter[v]] as usize;
            let w = self.to[id] as usize;
            if self.cap[id] > 0 && self.level[w] == self.level[v] + 1 {
                let d = self.dfs(w, t, f.min(self.cap[id]));
                if d > 0 {
                    self.cap[id] -= d;
                    self.cap[id ^ 1] += d;
                    return d;
                }
            }
            self.iter[v] += 1;
        }
        0
    }

    /// Max flow with early abort once the value reaches `limit` (the partial
    /// flow is a lower bound on the max flow, which is all the caller needs
    /// to discard this network).
    fn max_flow(&mut self, s: usize, t: usize, limit: u64) -> u64 {
        let mut flow = 0;
        while flow < limit && self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, u64::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
                if flow >= limit {
                    break;
                }
            }
        }
        flow
    }

    /// Source side of the current min cut (after max_flow ran to completion).
    fn min_cut_side(&self, s: usize) -> Vec<bool> {
        let n = self.head.len();
        let mut side = vec![false; n];
        let mut stack = vec![s];
        side[s] = true;
        while let Some(v) = stack.pop() {
            for &id in &self.head[v] {
                let w = self.to[id as usize] as usize;
                if self.cap[id as usize] > 0 && !side[w] {
                    side[w] = true;
                    stack.push(w);
                }
            }
        }
        side
    }
}

/// One Dinkelbach subproblem: minimize `den*cut(J) + num*|J|` over nonempty
/// proper J (scaled by λ = num/den). Returns the scaled minimum and an
/// argmin. Exact: singletons and bridge sides cover every J when the
/// minimum degree is at most 2; otherwise an anchored max-flow sweep
/// finishes the job.
fn uncapped_subproblem(host: &Host, num: u64, den: u64) -> (u128, Vec<u32>) {
    let n = host.len();
    let value = |cut: u64, size: u64| den as u128 * cut as u128 + num as u128 * size as u128;
    // Tier 1: singletons.
    let min_deg_vertex = (0..n).min_by_key(|&v| host.degree(v)).unwrap();
    let min_deg = host.degree(min_deg_vertex) as u64;
    let mut best = value(min_deg, 1);
    let mut arg: Vec<u32> = vec![min_deg_vertex as u32];
    if min_deg == 1 {
        // cut >= 1 and |J| >= 1 for proper nonempty J, so a leaf singleton
        // is globally optimal.
        return (best, arg);
    }
    // Tier 2: every J with cut(J) = 1 is one side of a bridge.
    for side in bridges_with_sides(host) {
        let small = side.len().min(n - side.len()) as u64;
        let candidate = value(1, small);
        if candidate < best {
            best = candidate;
            arg = if side.len() as u64 == small {
                side
            } else {
                let inside: HashSet<u32> = side.into_iter().collect();
                (0..n as u32).filter(|v| !inside.contains(v)).collect()
            };
        }
    }
    if min_deg == 2 {
        // Any J with cut >= 2 satisfies value >= value(2, 1) = the best
        // singleton, and cut = 1 sets were scanned above.
        return (best, arg);
    }
    // Fallback: anchored min cuts. Source forces an anchor into J; every
    // vertex pays num on the sink arc, every host edge den per direction.
    let s = n;
    let t = n + 1;
    for anchor in 0..n {
        let mut dinic = Dinic::new(n + 2);
        for v in 0..n {
            for &w in &host.adj[v] {
                if (w as usize) > v {
                    dinic.add_edge(v, w as usize, den);
                    dinic.add_edge(w as usize, v, den);
                }
            }
            dinic.add_edge(v, t, num);
        }
        dinic.add_edge(s, anchor, u64::MAX / 4);
        let limit = u64::try_from(best.min(u64::MAX as u128)).unwrap_or(u64::MAX);
        let flow = dinic.max_flow(s, t, limit);
        if (flow as u128) < best {
            let side = dinic.min_cut_side(s);
            let j: Vec<u32> = (0..n as u32).filter(|&v| side[v as usize]).collect();
            if j.len() < n {
                best = flow as u128;
                arg = j;
            }
        }
    }
    (best, arg)
}

/// Exact minimum of |∂H|/|H| over all nonempty proper subsets (no size
/// cap), by Dinkelbach ratio search. The value is a certified lower bound
/// for the capped Cheeger constant, since capped subsets are a subset of
/// the feasible set here.
pub fn cheeger_lower_uncapped(host: &Host) -> Result<(Ratio, Vec<u32>), CheegerError> {
    let n = host.len();
    if n < 2 {
        return Err(CheegerError::Argument(
            "uncapped ratio needs at least two vertices".into(),
        ));
    }
    if !host.is_connected() {
        return Err(CheegerError::Disconnected);
    }
    // Initial feasible H: everything except a minimum-degree vertex.
    let min_deg_vertex = (0..n).min_by_key(|&v| host.degree(v)).unwrap() as u32;
    let mut h: Vec<u32> = (0..n as u32).filter(|&v| v != min_deg_vertex).collect();
    let mut lambda = host.subset_ratio(&h);
    loop {
        let (best, j) = uncapped_subproblem(host, lambda.num(), lambda.den());
        // D(λ) = min f(J) − λ|V|, scaled by den(λ).
        let threshold = lambda.num() as u128 * n as u128;
        if best >= threshold {
            return Ok((lambda, h));
        }
        let candidate: Vec<u32> = {
            let inside: HashSet<u32> = j.iter().copied().collect();
            (0..n as u32).filter(|v| !inside.contains(v)).collect()
        };
        let ratio = host.subset_ratio(&candidate);
        debug_assert!(ratio < lambda);
        h = candidate;
        lambda = ratio;
    }
}

/// Search configuration for the stochastic upper bound.
#[derive(Clone, Copy, Debug)]
pub struct SearchParams {
    pub budget: u64,
    pub seed: u64,
    /// Restarts with derived seeds; results merge deterministically.
    pub restarts: u32,
}

impl SearchParams {
    pub fn new(budget: u64, seed: u64) -> SearchParams {
        SearchParams {
            budget,
            seed,
            restarts: 2,
        }
    }
}

struct SearchState<'a> {
    host: &'a Host,
    in_h: Vec<bool>,
    members: Vec<u32>,
    /// Neighbors-in-H count per vertex.
    deg_in: Vec<u32>,
    cut: u64,
}

impl<'a> SearchState<'a> {
    fn from_subset(host: &'a Host, subset: &[u32]) -> SearchState<'a> {
        let mut state = SearchState {
            host,
            in_h: vec![false; host.len()],
            members: Vec::new(),
            deg_in: vec![0; host.len()],
            cut: 0,
        };
        for &v in subset {
            state.toggle(v as usize);
        }
        state
    }

    fn toggle(&mut self, v: usize) {
        let joining = !self.in_h[v];
        let delta = self.host.degree(v) as i64 - 2 * self.deg_in[v] as i64;
        if joining {
            self.cut = (self.cut as i64 + delta) as u64;
            self.in_h[v] = true;
            self.members.push(v as u32);
            for &w in &self.host.adj[v] {
                self.deg_in[w as usize] += 1;
            }
        } else {
            self.cut = (self.cut as i64 - delta) as u64;
            self.in_h[v] = false;
            let pos = self.members.iter().position(|&m| m == v as u32).unwrap();
            self.members.swap_remove(pos);
            for &w in &self.host.adj[v] {
                self.deg_in[w as usize] -= 1;
            }
        }
    }

    fn ratio(&self) -> Ratio {
        Ratio::new(self.cut, self.members.len() as u64)
    }

    fn energy(&self) -> f64 {
        self.cut as f64 / self.members.len() as f64
    }
}

/// Geometric and structural seed subsets, each within the size cap.
fn seed_subsets(host: &Host, cap: usize) -> Vec<Vec<u32>> {
    let n = host.len();
    let mut seeds = Vec::new();
    if let Some(pos) = host.positions() {
        let mut order: Vec<u32> = (0..n as u32).collect();
        // Axis half cuts.
        order.sort_by_key(|&i| {
            let v = pos[i as usize];
            (v.x, v.y)
        });
        seeds.push(order[..cap].to_vec());
        order.sort_by_key(|&i| {
            let v = pos[i as usize];
            (v.y, v.x)
        });
        seeds.push(order[..cap].to_vec());
        // Corner quarter region, anchored at the bounding box corner.
        let min_x = pos.iter().map(|v| v.x).min().unwrap();
        let min_y = pos.iter().map(|v| v.y).min().unwrap();
        order.sort_by_key(|&i| {
            let v = pos[i as usize];
            ((v.x - min_x).max(v.y - min_y), v.x, v.y)
        });
        let quarter = (cap / 2).max(1);
        seeds.push(order[..quarter].to_vec());
    }
    // Uncapped minimizer trimmed to the cap by a connected prefix.
    if let Ok((_, h_star)) = cheeger_lower_uncapped(host) {
        let trimmed = connected_prefix(host, &h_star, cap);
        if !trimmed.is_empty() {
            seeds.push(trimmed);
        }
    }
    // Exhaustive optimum on tiny hosts: the search then provably matches
    // the exact value.
    if n <= EXHAUSTIVE_LIMIT {
        if let Ok(exact) = cheeger_exact(host) {
            seeds.push(exact.optimizers[0].clone());
        }
    }
    if seeds.is_empty() {
        seeds.push(vec![0]);
    }
    for s in seeds.iter_mut() {
        s.sort_unstable();
    }
    seeds
}

/// First `cap` vertices of `subset` in BFS order from its smallest member,
/// inside the induced subgraph, so the trim stays connected.
fn connected_prefix(host: &Host, subset: &[u32], cap: usize) -> Vec<u32> {
    if subset.is_empty() {
        return Vec::new();
    }
    let inside: HashSet<u32> = subset.iter().copied().collect();
    let start = *subset.iter().min().unwrap();
    let mut out = vec![start];
    let mut seen: HashSet<u32> = out.iter().copied().collect();
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        if out.len() >= cap {
            break;
        }
        for &w in &host.adj[v as usize] {
            if inside.contains(&w) && seen.insert(w) {
                out.push(w);
                queue.push_back(w);
                if out.len() >= cap {
                    break;
                }
            }
        }
    }
    out.truncate(cap);
    out.sort_unstable();
    out
}

/// Stochastic upper-bound search: simulated annealing over capped subsets
/// with add/remove moves, seeded from structured cuts, plus component
/// repair and a final first-improvement descent. Deterministic for a given
/// seed. Returns the sandwich with the uncapped lower bound.
pub fn cheeger_search(
    host: &Host,
    budget: u64,
    seed: u64,
) -> Result<CheegerResult, CheegerError> {
    cheeger_search_with(host, SearchParams::new(budget, seed))
}

pub fn cheeger_search_with(
    host: &Host,
    params: SearchParams,
) -> Result<CheegerResult, CheegerError> {
    let n = host.len();
    if n < 2 {
        return Err(CheegerError::Argument(
            "search needs at least two vertices".into(),
        ));
    }
    if !host.is_connected() {
        return Err(CheegerError::Disconnected);
    }
    let cap = n / 2;
    let (phi_lower, _) = cheeger_lower_uncapped(host)?;

    let seeds = seed_subsets(host, cap);
    let mut best: Option<Ratio> = None;
    let mut optimizers: Vec<Vec<u32>> = Vec::new();
    let record = |ratio: Ratio, subset: &[u32], best: &mut Option<Ratio>,
                  optimizers: &mut Vec<Vec<u32>>| {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        match *best {
            None => {
                *best = Some(ratio);
                optimizers.push(sorted);
            }
            Some(b) => {
                if ratio < b {
                    *best = Some(ratio);
                    optimizers.clear();
                    optimizers.push(sorted);
                } else if ratio == b && optimizers.len() < 64 && !optimizers.contains(&sorted) {
                    optimizers.push(sorted);
                }
            }
        }
    };

    for seed_subset in &seeds {
        record(
            host.subset_ratio(seed_subset),
            seed_subset,
            &mut best,
            &mut optimizers,
        );
    }

    if params.budget > 0 {
        let per_restart = params.budget / params.restarts.max(1) as u64;
        // Energies are measured relative to the best seed so the temperature
        // schedule is host-size independent.
        let scale = best.expect("seeded").to_f64().max(f64::MIN_POSITIVE);
        for restart in 0..params.restarts.max(1) {
            let mut rng = ChaCha8Rng::seed_from_u64(crate::lattice::derive_seed(
                params.seed,
                restart as u64,
            ));
            let start = &seeds[restart as usize % seeds.len()];
            let mut state = SearchState::from_subset(host, start);
            let mut current = state.energy();
            let t0 = 0.2f64;
            let t1 = 0.002f64;
            for it in 0..per_restart {
                let temp = scale * t0 * (t1 / t0).powf(it as f64 / per_restart.max(1) as f64);
                // Propose: add an outside neighbor of H or remove a member.
                let add = rng.gen_bool(0.5);
                let v = if add {
                    if state.members.len() >= cap {
                        continue;
                    }
                    let anchor =
                        state.members[rng.gen_range(0..state.members.len())] as usize;
                    let nbrs = &host.adj[anchor];
                    let w = nbrs[rng.gen_range(0..nbrs.len())] as usize;
                    if state.in_h[w] {
                        continue;
                    }
                    w
                } else {
                    if state.members.len() <= 1 {
                        continue;
                    }
                    state.members[rng.gen_range(0..state.members.len())] as usize
                };
                state.toggle(v);
                let next = state.energy();
                let accept = next <= current
                    || rng.gen_bool((-((next - current) / temp)).exp().clamp(0.0, 1.0));
                if accept {
                    current = next;
                    record(state.ratio(), &state.members, &mut best, &mut optimizers);
                } else {
                    state.toggle(v);
                }
                // Component repair: adopt the best connected piece when it
                // improves the objective (the mediant inequality guarantees
                // some piece is at least as good).
                if it % 1024 == 1023 {
                    let comps = host.induced_components(&state.members);
                    if comps.len() > 1 {
                        let best_comp = comps
                            .into_iter()
                            .map(|c| (host.subset_ratio(&c), c))
                            .min_by(|a, b| a.0.cmp(&b.0))
                            .unwrap();
                        if best_comp.0 < state.ratio() {
                            record(best_comp.0, &best_comp.1, &mut best, &mut optimizers);
                            state = SearchState::from_subset(host, &best_comp.1);
                            current = state.energy();
                        }
                    }
                }
            }
        }
        // First-improvement descent from the incumbent.
        let incumbent = optimizers[0].clone();
        let mut state = SearchState::from_subset(host, &incumbent);
        let mut improved = true;
        let mut rounds = 0;
        while improved && rounds < 32 {
            improved = false;
            rounds += 1;
            let current = state.ratio();
            for v in 0..n {
                let feasible = if state.in_h[v] {
                    state.members.len() > 1
                } else {
                    state.members.len() < cap
                };
                if !feasible {
                    continue;
                }
                state.toggle(v);
                if state.ratio() < current {
                    record(state.ratio(), &state.members, &mut best, &mut optimizers);
                    improved = true;
                    break;
                }
                state.toggle(v);
            }
        }
    }

    let phi_upper = best.expect("seeded");
    debug_assert!(phi_lower <= phi_upper);
    Ok(CheegerResult {
        phi_lower,
        phi_upper,
        optimizers,
        lower_method: "dinkelbach-uncapped",
        upper_method: if params.budget == 0 {
            "seeds-only"
        } else {
            "annealing"
        },
    })
}
