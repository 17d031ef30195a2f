//! Coupled runs of the allocation process.
//!
//! Tie decisions are keyed by `(ball, vertex)`, so two runs that share a
//! [`RandomSource`] use the same neighbor order whenever the same ball sits
//! at the same vertex. That shared order is the coupling; no replay log is
//! kept.

use serde::{Deserialize, Serialize};

use crate::allocator::{place_ball, run_local_search, LoadVector, TieRule};
use crate::analysis::check_majorizes;
use crate::error::{Error, Result};
use crate::graphs::{Graph, Vertex};
use crate::par::{map_indexed, Execution};
use crate::rng::{Purpose, RandomSource};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledOutcome {
    /// `sum_v |X_v - Y_v|` after the last ball.
    pub l1_distance: u64,
    /// Whether the step-indexed contract held after each ball (index 0 is
    /// ball 1).
    pub per_step_ok: Vec<bool>,
    /// Vertices where the two final load vectors differ.
    pub diff_support: Vec<Vertex>,
    /// The unperturbed process.
    pub first: LoadVector,
    /// The perturbed process.
    pub second: LoadVector,
}

impl CoupledOutcome {
    fn new(first: LoadVector, second: LoadVector, per_step_ok: Vec<bool>) -> Self {
        let diff_support = (0..first.n() as Vertex)
            .filter(|&v| first.get(v) != second.get(v))
            .collect();
        CoupledOutcome {
            l1_distance: first.l1_distance(&second),
            per_step_ok,
            diff_support,
            first,
            second,
        }
    }

    pub fn all_steps_ok(&self) -> bool {
        self.per_step_ok.iter().all(|&ok| ok)
    }

    /// True iff the perturbed vector is at most the original everywhere.
    pub fn second_below_first(&self) -> bool {
        self.first
            .as_slice()
            .iter()
            .zip(self.second.as_slice())
            .all(|(x, z)| z <= x)
    }
}

/// `m` birthplaces drawn from the standard birth keys of `rs`.
pub fn birth_sequence(rs: &RandomSource, m: usize, n: usize) -> Vec<Vertex> {
    (1..=m as u64)
        .map(|i| crate::allocator::draw_birthplace(rs, i, n))
        .collect()
}

fn check_coupling_inputs(g: &Graph, births: &[Vertex], i: usize, tr: &TieRule) -> Result<()> {
    if !tr.supports_coupling() {
        return Err(Error::UnsupportedTieRule(tr.label().to_string()));
    }
    if i == 0 || i > births.len() {
        return Err(Error::InvalidInput(format!(
            "ball index {i} outside 1..={}",
            births.len()
        )));
    }
    if let Some(&v) = births.iter().find(|&&v| v as usize >= g.n()) {
        return Err(Error::InvalidInput(format!("birthplace {v} out of range")));
    }
    Ok(())
}

/// Runs the process on `births` and again with ball `i` (1-based) born at
/// `u_prime` instead. The per-step contract is `l1 <= 2`.
pub fn coupled_lipschitz(
    g: &Graph,
    births: &[Vertex],
    i: usize,
    u_prime: Vertex,
    tr: &TieRule,
    rs: &RandomSource,
) -> Result<CoupledOutcome> {
    check_coupling_inputs(g, births, i, tr)?;
    if u_prime as usize >= g.n() {
        return Err(Error::InvalidInput(format!("birthplace {u_prime} out of range")));
    }
    let mut x = LoadVector::zeros(g.n());
    let mut y = LoadVector::zeros(g.n());
    let mut l1 = 0u64;
    let mut per_step_ok = Vec::with_capacity(births.len());
    for (k, &b) in births.iter().enumerate() {
        let ball = k as u64 + 1;
        let b_y = if k + 1 == i { u_prime } else { b };
        let px = place_ball(g, &mut x, b, tr, rs, ball, None).final_vertex;
        let py = place_ball(g, &mut y, b_y, tr, rs, ball, None).final_vertex;
        if px != py {
            // x gained at px, y gained at py; only those two terms moved
            for v in [px, py] {
                let before = u64::from(
                    (x.get(v) - u32::from(v == px)).abs_diff(y.get(v) - u32::from(v == py)),
                );
                l1 = l1 - before + u64::from(x.get(v).abs_diff(y.get(v)));
            }
        }
        per_step_ok.push(l1 <= 2);
    }
    let out = CoupledOutcome::new(x, y, per_step_ok);
    debug_assert_eq!(out.l1_distance, l1);
    Ok(out)
}

/// Runs the process on `births` and again with ball `i` removed; the other
/// balls keep their indices, hence their tie decisions. The per-step
/// contract is `l1 = 0` before ball `i` and `l1 = 1` from then on.
pub fn coupled_removal(
    g: &Graph,
    births: &[Vertex],
    i: usize,
    tr: &TieRule,
    rs: &RandomSource,
) -> Result<CoupledOutcome> {
    check_coupling_inputs(g, births, i, tr)?;
    let mut x = LoadVector::zeros(g.n());
    let mut z = LoadVector::zeros(g.n());
    let mut per_step_ok = Vec::with_capacity(births.len());
    for (k, &b) in births.iter().enumerate() {
        let ball = k as u64 + 1;
        place_ball(g, &mut x, b, tr, rs, ball, None);
        if k + 1 != i {
            place_ball(g, &mut z, b, tr, rs, ball, None);
        }
        let expected = u64::from(k + 1 >= i);
        per_step_ok.push(x.l1_distance(&z) == expected);
    }
    Ok(CoupledOutcome::new(x, z, per_step_ok))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorizationOutcome {
    /// After ball `k + 1`, the 1-choice vector majorizes the local search one.
    pub per_step: Vec<bool>,
    pub holds: bool,
}

/// Rank coupling against 1-choice. Each step draws a rank `l` uniformly; the
/// local search ball is born at the `l`-th most loaded vertex of its own
/// process and the 1-choice ball lands on the `l`-th most loaded vertex of
/// the 1-choice process. Equal loads are ranked by vertex id.
pub fn coupled_majorization(
    g: &Graph,
    m: u64,
    tr: &TieRule,
    rs: &RandomSource,
) -> MajorizationOutcome {
    let n = g.n();
    let mut x = LoadVector::zeros(n);
    let mut bar = LoadVector::zeros(n);
    let mut order_x: Vec<Vertex> = (0..n as Vertex).collect();
    let mut order_bar = order_x.clone();
    let mut per_step = Vec::with_capacity(m as usize);
    for ball in 1..=m {
        let rank = rs.below(Purpose::Rank, ball, 0, n as u64) as usize;
        order_x.sort_by_key(|&v| (std::cmp::Reverse(x.get(v)), v));
        order_bar.sort_by_key(|&v| (std::cmp::Reverse(bar.get(v)), v));
        place_ball(g, &mut x, order_x[rank], tr, rs, ball, None);
        bar.add(order_bar[rank]);
        per_step.push(check_majorizes(bar.as_slice(), x.as_slice()).expect("equal totals"));
    }
    MajorizationOutcome {
        holds: per_step.iter().all(|&ok| ok),
        per_step,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityEstimate {
    /// number of batches `ceil(n / z)`
    pub batches: u64,
    /// threshold used for the full run, `batches * x`
    pub full_threshold: u64,
    /// estimate of `P(max load after n balls >= batches * x)`
    pub p_full: f64,
    pub se_full: f64,
    /// estimate of `P(max load after z balls >= x)`
    pub p_batch: f64,
    pub se_batch: f64,
    /// `batches * p_batch`
    pub bound: f64,
    /// `p_full` exceeds `bound` by more than three combined standard errors
    pub flagged: bool,
}

/// Monte Carlo estimate of both sides of the subadditivity inequality
/// `P(X_max^(n) >= ceil(n/z) x) <= ceil(n/z) P(X_max^(z) >= x)`.
pub fn subadditivity_experiment(
    g: &Graph,
    z: usize,
    x: u32,
    trials: usize,
    tr: &TieRule,
    rs: &RandomSource,
    exec: Execution,
) -> Result<SubadditivityEstimate> {
    let n = g.n();
    if z == 0 || z > n {
        return Err(Error::InvalidInput(format!("batch size {z} outside 1..={n}")));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("need at least one trial".into()));
    }
    let batches = n.div_ceil(z) as u64;
    let full_threshold = batches * u64::from(x);
    let hits = map_indexed(trials, exec, |t| {
        let full = run_local_search(g, n as u64, tr, &rs.derive(Purpose::Trial, 2 * t as u64), false);
        let batch = run_local_search(g, z as u64, tr, &rs.derive(Purpose::Trial, 2 * t as u64 + 1), false);
        (
            u64::from(full.loads.max_load()) >= full_threshold,
            batch.loads.max_load() >= x,
        )
    });
    let tf = trials as f64;
    let p_full = hits.iter().filter(|h| h.0).count() as f64 / tf;
    let p_batch = hits.iter().filter(|h| h.1).count() as f64 / tf;
    let se = |p: f64| (p * (1.0 - p) / tf).sqrt();
    let (se_full, se_batch) = (se(p_full), se(p_batch));
    let bound = batches as f64 * p_batch;
    let combined = (se_full.powi(2) + (batches as f64 * se_batch).powi(2)).sqrt();
    Ok(SubadditivityEstimate {
        batches,
        full_threshold,
        p_full,
        se_full,
        p_batch,
        se_batch,
        bound,
        flagged: p_full > bound + 3.0 * combined,
    })
}
