//! Cell execution and sweep assembly.

use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, GraphParams, Process, TieRuleKind};
use crate::allocator::{run_d_choice, run_local_search, LoadVector, RunStats, TieRule};
use crate::analysis::{local_upper_bound, log_exponential_potential, lower_bound_certificate};
use crate::error::Result;
use crate::graphs::{
    build_clique_cycle, build_cycle, build_erdos_renyi, build_grid, build_hypercube,
    build_random_regular, build_regular_tree_graph, Graph, Layout, Vertex, VertexSet,
};
use crate::par::{map_indexed, Execution};
use crate::rng::{Purpose, RandomSource};

/// One CSV row. Field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    /// maximum degree of the graph
    pub d: usize,
    pub process: String,
    pub tie_rule: String,
    pub seed: u64,
    pub balls: u64,
    pub max_load: u32,
    pub mean_probes: f64,
    pub max_probes: u64,
    pub smoothness_max: u32,
    /// natural log of the exponential potential
    pub phi: f64,
    /// empty when certificates are not enabled or do not apply
    pub lower_bound_ok: Option<bool>,
    pub upper_bound_ok: Option<bool>,
    pub runtime_ms: f64,
    /// empty on success
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn error_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.error.is_empty()).count()
    }
}

/// A built graph and the vertex that `toward-root` steers to.
#[derive(Clone, Debug)]
pub struct CellGraph {
    pub graph: Graph,
    pub root: Vertex,
}

pub fn build_graph(params: GraphParams, seed: u64) -> Result<CellGraph> {
    let plain = |g: Graph| CellGraph { graph: g, root: 0 };
    Ok(match params {
        GraphParams::Cycle { n } => plain(build_cycle(n)?),
        GraphParams::Grid { side, dim } => plain(build_grid(side, dim)?),
        GraphParams::Hypercube { dim } => plain(build_hypercube(dim)?),
        GraphParams::RandomRegular { n, d } => plain(build_random_regular(n, d, seed)?),
        GraphParams::ErdosRenyi { n, p } => plain(build_erdos_renyi(n, p, seed)?),
        GraphParams::CliqueCycle { n, d } => plain(build_clique_cycle(n, d)?),
        GraphParams::TreeRegular { d, depth } => {
            let (graph, root) = build_regular_tree_graph(d, depth)?;
            CellGraph { graph, root }
        }
    })
}

pub fn make_tie_rule(kind: TieRuleKind, cg: &CellGraph, rs: &RandomSource) -> TieRule {
    match kind {
        TieRuleKind::Uniform => TieRule::UniformRandom,
        TieRuleKind::FixedPermutation => TieRule::random_fixed(&cg.graph, rs),
        TieRuleKind::TowardRoot => TieRule::toward_target(&cg.graph, cg.root),
    }
}

/// The tie rule a local search cell runs with; fixed permutations are drawn
/// from a child of the cell source.
pub fn cell_tie_rule(spec: &ExperimentSpec, cg: &CellGraph, rs: &RandomSource) -> TieRule {
    make_tie_rule(spec.tie_rule, cg, &rs.derive(Purpose::Permutation, 0))
}

/// Outcome of the two bound certificates on a finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateOutcome {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub failure: Option<String>,
}

/// Subjects for the lower bound: the vertex with the most births (lowest id
/// on ties) and, on clique-cycles, the clique with the largest load.
pub fn lower_bound_subjects(g: &Graph, lv: &LoadVector, births: &[u32]) -> Vec<VertexSet> {
    let top = (0..g.n()).max_by_key(|&v| (births[v], std::cmp::Reverse(v))).unwrap_or(0);
    let mut subjects = vec![VertexSet::singleton(top as Vertex)];
    if let Some(Layout::CliqueCycle { clique_size: q }) = g.layout() {
        let load = |c: usize| (c * q..(c + 1) * q).map(|v| u64::from(lv.get(v as Vertex))).sum::<u64>();
        let heaviest = (0..g.n() / q).max_by_key(|&c| (load(c), std::cmp::Reverse(c))).unwrap_or(0);
        subjects.push(VertexSet::from_unsorted(
            (heaviest * q..(heaviest + 1) * q).map(|v| v as Vertex).collect(),
        ));
    }
    subjects
}

/// Lower bound on every subject and the local upper bound at `samples`
/// random `(v, r)` with `1 <= r <= max_radius`.
pub fn check_certificates(
    g: &Graph,
    lv: &LoadVector,
    stats: &RunStats,
    samples: usize,
    max_radius: usize,
    rs: &RandomSource,
) -> Result<CertificateOutcome> {
    let mut failure = None;
    let mut lower_ok = true;
    for s in lower_bound_subjects(g, lv, &stats.birth_counts) {
        let c = lower_bound_certificate(g, &stats.birth_counts, lv, &s)?;
        if !c.inequality_holds {
            lower_ok = false;
            failure.get_or_insert_with(|| format!("lower bound fails on {:?}: {c:?}", s.as_slice()));
        }
    }
    let mut upper_ok = true;
    let n = g.n() as u64;
    for k in 0..samples as u64 {
        let v = rs.below(Purpose::Perturb, k, 0, n) as Vertex;
        let r = 1 + rs.below(Purpose::Perturb, k, 1, max_radius as u64) as usize;
        let c = local_upper_bound(g, lv, v, r)?;
        if !c.inequality_holds {
            upper_ok = false;
            failure.get_or_insert_with(|| format!("upper bound fails at v={v}, r={r}: {c:?}"));
        }
    }
    Ok(CertificateOutcome {
        lower_ok,
        upper_ok,
        failure,
    })
}

/// The allocation of one cell, before it is turned into a row.
pub struct CellRun {
    pub loads: LoadVector,
    pub stats: RunStats,
}

pub fn run_process(spec: &ExperimentSpec, cg: &CellGraph, rs: &RandomSource) -> CellRun {
    let g = &cg.graph;
    let m = spec.balls.resolve(g.n());
    match spec.process {
        Process::LocalSearch => {
            let tr = cell_tie_rule(spec, cg, rs);
            let run = run_local_search(g, m, &tr, rs, false);
            CellRun {
                loads: run.loads,
                stats: run.stats,
            }
        }
        Process::OneChoice => {
            let (loads, stats) = run_d_choice(g.n(), m, 1, rs);
            CellRun { loads, stats }
        }
        Process::DChoice(d) => {
            let (loads, stats) = run_d_choice(g.n(), m, d, rs);
            CellRun { loads, stats }
        }
    }
}

/// Graphs that do not depend on the seed, built once per `n`.
struct GraphCache {
    fixed: Vec<Option<std::result::Result<CellGraph, String>>>,
}

impl GraphCache {
    fn new(spec: &ExperimentSpec, exec: Execution) -> Self {
        let fixed = map_indexed(spec.n_values.len(), exec, |i| {
            let params = spec.graph.resolve(spec.n_values[i]).ok()?;
            (!params.is_random()).then(|| build_graph(params, 0).map_err(|e| e.to_string()))
        });
        GraphCache { fixed }
    }

    fn get(&self, spec: &ExperimentSpec, cell: usize) -> std::result::Result<CellGraph, String> {
        let (ni, _) = spec.cell_position(cell);
        match &self.fixed[ni] {
            Some(built) => built.clone(),
            None => {
                let params = spec.graph.resolve(spec.n_values[ni]).map_err(|e| e.to_string())?;
                build_graph(params, spec.cell_seed(cell)).map_err(|e| e.to_string())
            }
        }
    }
}

/// Builds the graph of a single cell.
pub fn cell_graph(spec: &ExperimentSpec, cell: usize) -> Result<CellGraph> {
    let (ni, _) = spec.cell_position(cell);
    build_graph(spec.graph.resolve(spec.n_values[ni])?, spec.cell_seed(cell))
}

fn error_row(spec: &ExperimentSpec, cell: usize, message: String) -> SweepRow {
    let (ni, _) = spec.cell_position(cell);
    let n = spec.n_values[ni];
    SweepRow {
        family: spec.graph.family.clone(),
        n,
        d: 0,
        process: spec.process.to_string(),
        tie_rule: spec.tie_rule.to_string(),
        seed: spec.cell_seed(cell),
        balls: spec.balls.resolve(n),
        max_load: 0,
        mean_probes: 0.0,
        max_probes: 0,
        smoothness_max: 0,
        phi: 0.0,
        lower_bound_ok: None,
        upper_bound_ok: None,
        runtime_ms: 0.0,
        error: message,
    }
}

/// Runs one cell on an already built graph.
pub fn run_cell_on(spec: &ExperimentSpec, cell: usize, cg: &CellGraph) -> SweepRow {
    let start = std::time::Instant::now();
    let g = &cg.graph;
    let rs = RandomSource::new(spec.cell_seed(cell));
    let run = run_process(spec, cg, &rs);
    let mut row = error_row(spec, cell, String::new());
    row.d = g.max_degree();
    row.max_load = run.loads.max_load();
    row.mean_probes = run.stats.mean_probes();
    row.max_probes = run.stats.probes_max;
    row.smoothness_max = run.loads.smoothness(g).max(run.stats.step_smoothness_max);
    row.phi = log_exponential_potential(g, &run.loads, None);
    let certify = spec.process == Process::LocalSearch
        && spec.checks.contains(&super::spec::Check::Certificates);
    if certify {
        let cert_rs = rs.derive(Purpose::Perturb, 0);
        match check_certificates(
            g,
            &run.loads,
            &run.stats,
            spec.verify.upper_bound_samples,
            spec.verify.max_radius,
            &cert_rs,
        ) {
            Ok(c) => {
                row.lower_bound_ok = Some(c.lower_ok);
                row.upper_bound_ok = Some(c.upper_ok);
            }
            Err(e) => row.error = e.to_string(),
        }
    }
    if spec.output.timing {
        row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    }
    row
}

/// Runs one cell, building its graph first. Failures end up in the row.
pub fn run_cell(spec: &ExperimentSpec, cell: usize) -> SweepRow {
    match cell_graph(spec, cell) {
        Ok(cg) => run_cell_on(spec, cell, &cg),
        Err(e) => error_row(spec, cell, e.to_string()),
    }
}

/// Runs every `(n, seed)` cell. Cells are independent and may run in any
/// order; rows come back sorted by cell index, and the cell seed is
/// `seeds.base + cell index` with cells ordered by n first.
pub fn run_sweep(spec: &ExperimentSpec, exec: Execution) -> SweepResult {
    let cache = GraphCache::new(spec, exec);
    let rows = map_indexed(spec.cell_count(), exec, |cell| match cache.get(spec, cell) {
        Ok(cg) => run_cell_on(spec, cell, &cg),
        Err(e) => error_row(spec, cell, e),
    });
    SweepResult { rows }
}
