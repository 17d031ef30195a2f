//! The local search allocation process and the 1-choice / d-choice baselines.
//!
//! Ball `i` (1-based) is born at `draw_birthplace(rs, i, n)`. While some
//! neighbor is strictly lighter than the current vertex the ball moves to a
//! lightest neighbor, choosing among equally light ones by the [`TieRule`];
//! it is placed at the first local minimum it reaches.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graphs::{distances_from, Graph, Vertex};
use crate::rng::{Purpose, RandomSource};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoadVector {
    loads: Vec<u32>,
    total: u64,
}

impl LoadVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            loads: vec![0; n],
            total: 0,
        }
    }

    pub fn from_loads(loads: Vec<u32>) -> Self {
        let total = loads.iter().map(|&x| u64::from(x)).sum();
        Self { loads, total }
    }

    pub fn n(&self) -> usize {
        self.loads.len()
    }

    #[inline]
    pub fn get(&self, v: Vertex) -> u32 {
        self.loads[v as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.loads
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn max_load(&self) -> u32 {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn add(&mut self, v: Vertex) {
        self.loads[v as usize] += 1;
        self.total += 1;
    }

    /// `sum_v |self_v - other_v|`.
    pub fn l1_distance(&self, other: &LoadVector) -> u64 {
        assert_eq!(self.n(), other.n(), "load vectors over different vertex sets");
        self.loads
            .iter()
            .zip(&other.loads)
            .map(|(&a, &b)| u64::from(a.abs_diff(b)))
            .sum()
    }

    /// Largest `|x_u - x_v|` over the edges of `g`.
    pub fn smoothness(&self, g: &Graph) -> u32 {
        g.edges()
            .map(|(u, v)| self.get(u).abs_diff(self.get(v)))
            .max()
            .unwrap_or(0)
    }

    /// Largest load difference on the edges incident to `v`.
    #[inline]
    pub fn local_smoothness(&self, g: &Graph, v: Vertex) -> u32 {
        let x = self.get(v);
        g.neighbors(v)
            .iter()
            .map(|&w| x.abs_diff(self.get(w)))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallTrace {
    /// 1-based ball number.
    pub index: u64,
    pub birthplace: Vertex,
    /// Visited vertices from birthplace to final vertex, both included.
    pub path: Vec<Vertex>,
    pub final_vertex: Vertex,
    /// Neighbor loads inspected while searching.
    pub probes: usize,
}

/// Chooses among equally light, strictly lighter neighbors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieRule {
    /// A fresh uniformly random order of `N_v` for every (ball, vertex) pair.
    UniformRandom,
    /// One fixed order `xi_v` of `N_v` per vertex, shared by all balls.
    FixedPermutation(PermutationTable),
    /// Prefer the candidate closest to `target`, then the smallest id.
    TowardTarget { target: Vertex, dist: Vec<u32> },
}

/// Per-vertex neighbor orders, stored as the rank of every adjacency slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationTable {
    rank: Vec<u32>,
}

impl TieRule {
    /// Validates that `orders[v]` is a permutation of exactly `N_v`.
    pub fn fixed_permutation(g: &Graph, orders: &[Vec<Vertex>]) -> Result<TieRule> {
        if orders.len() != g.n() {
            return Err(Error::InvalidInput(format!(
                "{} neighbor orders for {} vertices",
                orders.len(),
                g.n()
            )));
        }
        let mut rank = vec![u32::MAX; 2 * g.edge_count()];
        for v in g.vertices() {
            let order = &orders[v as usize];
            let nbrs = g.neighbors(v);
            if order.len() != nbrs.len() {
                return Err(Error::InvalidInput(format!("order of vertex {v} has wrong length")));
            }
            for (pos, &w) in order.iter().enumerate() {
                let slot = nbrs.binary_search(&w).map_err(|_| {
                    Error::InvalidInput(format!("{w} is not a neighbor of {v}"))
                })?;
                let cell = &mut rank[g.row_start(v) + slot];
                if *cell != u32::MAX {
                    return Err(Error::InvalidInput(format!("{w} repeated in order of {v}")));
                }
                *cell = pos as u32;
            }
        }
        Ok(TieRule::FixedPermutation(PermutationTable { rank }))
    }

    /// Every vertex prefers its lowest-id neighbor.
    pub fn lowest_id(g: &Graph) -> TieRule {
        let orders: Vec<Vec<Vertex>> = g.vertices().map(|v| g.neighbors(v).to_vec()).collect();
        Self::fixed_permutation(g, &orders).expect("identity orders are valid")
    }

    /// Every vertex prefers its highest-id neighbor.
    pub fn highest_id(g: &Graph) -> TieRule {
        let orders: Vec<Vec<Vertex>> = g
            .vertices()
            .map(|v| g.neighbors(v).iter().rev().copied().collect())
            .collect();
        Self::fixed_permutation(g, &orders).expect("reversed orders are valid")
    }

    /// Arbitrary but fixed orders drawn once from `rs`.
    pub fn random_fixed(g: &Graph, rs: &RandomSource) -> TieRule {
        use rand::seq::SliceRandom;
        let orders: Vec<Vec<Vertex>> = g
            .vertices()
            .map(|v| {
                let mut o = g.neighbors(v).to_vec();
                o.shuffle(&mut rs.stream(Purpose::Permutation, u64::from(v), 0));
                o
            })
            .collect();
        Self::fixed_permutation(g, &orders).expect("shuffled orders are valid")
    }

    pub fn toward_target(g: &Graph, target: Vertex) -> TieRule {
        TieRule::TowardTarget {
            target,
            dist: distances_from(g, target),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TieRule::UniformRandom => "uniform",
            TieRule::FixedPermutation(_) => "fixed-permutation",
            TieRule::TowardTarget { .. } => "toward-target",
        }
    }

    /// Whether the rule meets the hypothesis of the one-ball couplings.
    pub fn supports_coupling(&self) -> bool {
        !matches!(self, TieRule::TowardTarget { .. })
    }

    #[inline]
    fn priority(&self, g: &Graph, rs: &RandomSource, ball: u64, u: Vertex, slot: usize, w: Vertex) -> u64 {
        match self {
            TieRule::UniformRandom => rs.word(Purpose::Tie, ball, u64::from(u), u64::from(w)),
            TieRule::FixedPermutation(t) => u64::from(t.rank[g.row_start(u) + slot]),
            TieRule::TowardTarget { dist, .. } => (u64::from(dist[w as usize]) << 32) | u64::from(w),
        }
    }
}

/// Birthplace of ball `ball`: uniform over `[0, n)`, keyed by the ball index.
#[inline]
pub fn draw_birthplace(rs: &RandomSource, ball: u64, n: usize) -> Vertex {
    rs.below(Purpose::Birth, ball, 0, n as u64) as Vertex
}

/// True iff no neighbor of `v` is strictly lighter.
pub fn is_local_minimum(g: &Graph, lv: &LoadVector, v: Vertex) -> bool {
    let x = lv.get(v);
    g.neighbors(v).iter().all(|&w| lv.get(w) >= x)
}

/// One move of the search: a lightest neighbor if it is strictly lighter
/// than `u`, otherwise `None`.
pub fn local_search_step(
    g: &Graph,
    lv: &LoadVector,
    u: Vertex,
    tr: &TieRule,
    rs: &RandomSource,
    ball: u64,
) -> Option<Vertex> {
    let mut min = lv.get(u);
    if min == 0 {
        return None;
    }
    let mut best: Option<(usize, Vertex)> = None;
    let mut best_priority: Option<u64> = None;
    for (slot, &w) in g.neighbors(u).iter().enumerate() {
        let x = lv.get(w);
        if x < min {
            min = x;
            best = Some((slot, w));
            best_priority = None;
        } else if x == min {
            if let Some((bslot, bw)) = best {
                let bp = *best_priority.get_or_insert_with(|| tr.priority(g, rs, ball, u, bslot, bw));
                let p = tr.priority(g, rs, ball, u, slot, w);
                if p < bp {
                    best = Some((slot, w));
                    best_priority = Some(p);
                }
            }
        }
    }
    best.map(|(_, w)| w)
}

/// Where one ball ended up and what it cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Placement {
    pub final_vertex: Vertex,
    pub probes: usize,
    pub moves: usize,
}

/// Runs the search for one ball and places it. A vertex with load zero is a
/// local minimum without looking at its neighbors, so only vertices with
/// positive load are charged their degree in probes.
pub fn place_ball(
    g: &Graph,
    lv: &mut LoadVector,
    birthplace: Vertex,
    tr: &TieRule,
    rs: &RandomSource,
    ball: u64,
    mut path: Option<&mut Vec<Vertex>>,
) -> Placement {
    let mut at = birthplace;
    let mut probes = 0;
    let mut moves = 0;
    if let Some(p) = path.as_deref_mut() {
        p.push(at);
    }
    loop {
        if lv.get(at) > 0 {
            probes += g.degree(at);
        }
        match local_search_step(g, lv, at, tr, rs, ball) {
            Some(next) => {
                at = next;
                moves += 1;
                if let Some(p) = path.as_deref_mut() {
                    p.push(at);
                }
            }
            None => break,
        }
    }
    lv.add(at);
    Placement {
        final_vertex: at,
        probes,
        moves,
    }
}

/// Places one ball and records its full trace.
pub fn allocate_ball(
    g: &Graph,
    lv: &mut LoadVector,
    birthplace: Vertex,
    tr: &TieRule,
    rs: &RandomSource,
    ball: u64,
) -> BallTrace {
    let mut path = Vec::new();
    let p = place_ball(g, lv, birthplace, tr, rs, ball, Some(&mut path));
    BallTrace {
        index: ball,
        birthplace,
        path,
        final_vertex: p.final_vertex,
        probes: p.probes,
    }
}

/// Per-run bookkeeping collected while balls are placed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunStats {
    pub balls: u64,
    pub probes_total: u64,
    pub probes_max: u64,
    /// Balls born at each vertex.
    pub birth_counts: Vec<u32>,
    /// Largest incident-edge load difference seen right after any placement.
    pub step_smoothness_max: u32,
    pub runtime_ms: f64,
}

impl RunStats {
    fn new(n: usize) -> Self {
        Self {
            birth_counts: vec![0; n],
            ..Default::default()
        }
    }

    pub fn mean_probes(&self) -> f64 {
        if self.balls == 0 {
            0.0
        } else {
            self.probes_total as f64 / self.balls as f64
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalSearchRun {
    pub loads: LoadVector,
    pub stats: RunStats,
    pub traces: Option<Vec<BallTrace>>,
}

/// Allocates balls `1..=m` with birthplaces drawn from `rs`.
pub fn run_local_search(
    g: &Graph,
    m: u64,
    tr: &TieRule,
    rs: &RandomSource,
    record_traces: bool,
) -> LocalSearchRun {
    let n = g.n();
    run_with_births(g, (1..=m).map(|i| (i, draw_birthplace(rs, i, n))), tr, rs, record_traces)
}

/// Allocates an explicit sequence of `(ball index, birthplace)` pairs onto
/// an empty graph. The ball index keys the tie decisions, so two sequences
/// that share indices share tie randomness.
pub fn run_with_births(
    g: &Graph,
    births: impl IntoIterator<Item = (u64, Vertex)>,
    tr: &TieRule,
    rs: &RandomSource,
    record_traces: bool,
) -> LocalSearchRun {
    let start = Instant::now();
    let mut lv = LoadVector::zeros(g.n());
    let mut stats = RunStats::new(g.n());
    let mut traces = record_traces.then(Vec::new);
    for (ball, birth) in births {
        stats.birth_counts[birth as usize] += 1;
        let p = match traces.as_mut() {
            Some(ts) => {
                let t = allocate_ball(g, &mut lv, birth, tr, rs, ball);
                let p = Placement {
                    final_vertex: t.final_vertex,
                    probes: t.probes,
                    moves: t.path.len() - 1,
                };
                ts.push(t);
                p
            }
            None => place_ball(g, &mut lv, birth, tr, rs, ball, None),
        };
        stats.balls += 1;
        stats.probes_total += p.probes as u64;
        stats.probes_max = stats.probes_max.max(p.probes as u64);
        let local = lv.local_smoothness(g, p.final_vertex);
        debug_assert!(local <= 1, "smoothness broken at vertex {} by ball {ball}", p.final_vertex);
        stats.step_smoothness_max = stats.step_smoothness_max.max(local);
    }
    stats.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    LocalSearchRun {
        loads: lv,
        stats,
        traces,
    }
}

/// Classical 1-choice: every ball stays at its birthplace. Uses the same
/// birthplace keys as [`run_local_search`].
pub fn run_one_choice(n: usize, m: u64, rs: &RandomSource) -> (LoadVector, RunStats) {
    run_d_choice(n, m, 1, rs)
}

/// Classical d-choice: each ball goes to the least loaded of `d` independent
/// uniform bins, ties to the lowest id. Choice 0 is the birthplace key, so
/// `d = 1` coincides with [`run_one_choice`].
pub fn run_d_choice(n: usize, m: u64, d: usize, rs: &RandomSource) -> (LoadVector, RunStats) {
    assert!(d >= 1, "d-choice needs d >= 1");
    let start = Instant::now();
    let mut lv = LoadVector::zeros(n);
    let mut stats = RunStats::new(n);
    for ball in 1..=m {
        let first = draw_birthplace(rs, ball, n);
        stats.birth_counts[first as usize] += 1;
        let mut best = first;
        for j in 1..d {
            let c = rs.below(Purpose::Choice, ball, j as u64, n as u64) as Vertex;
            if (lv.get(c), c) < (lv.get(best), best) {
                best = c;
            }
        }
        lv.add(best);
        stats.balls += 1;
        stats.probes_total += d as u64;
        stats.probes_max = d as u64;
    }
    stats.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    (lv, stats)
}
