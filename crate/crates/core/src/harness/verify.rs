//! Invariant suites over every cell of a spec.

use serde::Serialize;

use super::spec::{Check, ExperimentSpec, Process, TieRuleKind};
use super::sweep::{cell_graph, cell_tie_rule, check_certificates, run_process};
use crate::analysis::{birth_count_event_check, empirical_tail_check};
use crate::coupling::{birth_sequence, coupled_lipschitz, coupled_majorization, coupled_removal};
use crate::error::{Error, Result};
use crate::graphs::Vertex;
use crate::par::{map_indexed, Execution};
use crate::rng::{Purpose, RandomSource};

/// At most this many failure messages are kept per suite.
const KEPT_FAILURES: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub check: Check,
    /// Soft suites report statistical flags and never fail verification.
    pub soft: bool,
    pub passed: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub cells: usize,
    pub suites: Vec<SuiteResult>,
    /// Cells that could not run at all, such as failed graph generation.
    pub errors: Vec<String>,
}

impl VerifyReport {
    pub fn hard_failures(&self) -> usize {
        self.suites.iter().filter(|s| !s.soft).map(|s| s.failed).sum::<usize>() + self.errors.len()
    }

    pub fn passed(&self) -> bool {
        self.hard_failures() == 0
    }

    /// One line per suite.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let status = match (s.failed, s.soft) {
                (0, _) => "pass",
                (_, true) => "flagged",
                (_, false) => "FAIL",
            };
            out += &format!("{:<13} {status:<7} {}/{}\n", s.check.as_str(), s.passed, s.passed + s.failed);
            for f in &s.failures {
                out += &format!("    {f}\n");
            }
        }
        for e in &self.errors {
            out += &format!("error: {e}\n");
        }
        out
    }
}

#[derive(Default)]
struct Tally {
    passed: usize,
    failed: usize,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(what());
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.passed += other.passed;
        self.failed += other.failed;
        let room = KEPT_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }
}

pub fn report_json(report: &VerifyReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// Rejects suite configurations whose hypotheses the spec does not meet.
pub fn check_verify_spec(spec: &ExperimentSpec) -> Result<()> {
    if spec.checks.is_empty() {
        return Ok(());
    }
    if spec.process != Process::LocalSearch {
        return Err(Error::validation("process", "invariant suites need local-search"));
    }
    let coupling = spec.checks.iter().any(|c| matches!(c, Check::Lipschitz | Check::Removal));
    if coupling && spec.tie_rule == TieRuleKind::TowardRoot {
        return Err(Error::UnsupportedTieRule(spec.tie_rule.to_string()));
    }
    Ok(())
}

fn sample_indices(m: u64, trials: usize, rs: &RandomSource) -> Vec<u64> {
    if trials as u64 >= m {
        (1..=m).collect()
    } else {
        (0..trials as u64).map(|k| 1 + rs.below(Purpose::Perturb, k, 0, m)).collect()
    }
}

fn verify_cell(spec: &ExperimentSpec, cell: usize) -> std::result::Result<Vec<Tally>, String> {
    let seed = spec.cell_seed(cell);
    let cg = cell_graph(spec, cell).map_err(|e| format!("seed {seed}: {e}"))?;
    let g = &cg.graph;
    let n = g.n();
    let rs = RandomSource::new(seed);
    let m = spec.balls.resolve(n);
    let run = run_process(spec, &cg, &rs);
    let tr = cell_tie_rule(spec, &cg, &rs);
    let at = |what: String| format!("seed {seed}, n {n}: {what}");
    let mut out = Vec::with_capacity(spec.checks.len());
    for &check in &spec.checks {
        let mut t = Tally::default();
        match check {
            Check::Smoothness => {
                let worst = run.stats.step_smoothness_max.max(run.loads.smoothness(g));
                t.record(worst <= 1, || at(format!("adjacent loads differ by {worst}")));
            }
            Check::Probes => {
                let mean = run.stats.mean_probes();
                let delta = g.max_degree() as f64;
                t.record(mean <= delta, || at(format!("mean probes {mean} > {delta}")));
            }
            Check::Certificates => {
                let c = check_certificates(
                    g,
                    &run.loads,
                    &run.stats,
                    spec.verify.upper_bound_samples,
                    spec.verify.max_radius,
                    &rs.derive(Purpose::Perturb, 0),
                )
                .map_err(|e| at(e.to_string()))?;
                t.record(c.lower_ok && c.upper_ok, || at(c.failure.unwrap_or_default()));
            }
            Check::Lipschitz => {
                let births = birth_sequence(&rs, m as usize, n);
                let prs = rs.derive(Purpose::Perturb, 1);
                for k in 0..spec.verify.lipschitz_trials as u64 {
                    if m == 0 {
                        break;
                    }
                    let i = 1 + prs.below(Purpose::Perturb, k, 0, m) as usize;
                    let u = prs.below(Purpose::Perturb, k, 1, n as u64) as Vertex;
                    let o = coupled_lipschitz(g, &births, i, u, &tr, &rs).map_err(|e| at(e.to_string()))?;
                    let ok = matches!(o.l1_distance, 0 | 2) && o.all_steps_ok();
                    t.record(ok, || at(format!("moving ball {i} to {u} gives l1 {}", o.l1_distance)));
                }
            }
            Check::Removal => {
                let births = birth_sequence(&rs, m as usize, n);
                for i in sample_indices(m, spec.verify.removal_trials, &rs.derive(Purpose::Perturb, 2)) {
                    let o = coupled_removal(g, &births, i as usize, &tr, &rs).map_err(|e| at(e.to_string()))?;
                    let ok = o.l1_distance == 1 && o.second_below_first() && o.all_steps_ok();
                    t.record(ok, || at(format!("removing ball {i} gives l1 {}", o.l1_distance)));
                }
            }
            Check::Majorization => {
                let o = coupled_majorization(g, m, &tr, &rs);
                t.record(o.holds, || {
                    let step = o.per_step.iter().position(|&ok| !ok).map_or(0, |s| s + 1);
                    at(format!("1-choice fails to majorize after ball {step}"))
                });
            }
            Check::Tail => {
                let table = empirical_tail_check(&run.loads, g.max_degree());
                t.record(!table.flagged(), || at("load tail above the exponential bound".into()));
            }
            Check::BirthEvent => {
                let c = birth_count_event_check(g, &run.stats.birth_counts, None).map_err(|e| at(e.to_string()))?;
                t.record(c.holds, || at(format!("{} birth-count violations", c.violations.len())));
            }
        }
        out.push(t);
    }
    Ok(out)
}

/// Runs every enabled suite on every cell.
pub fn verify(spec: &ExperimentSpec, exec: Execution) -> Result<VerifyReport> {
    spec.validate()?;
    check_verify_spec(spec)?;
    let per_cell = map_indexed(spec.cell_count(), exec, |cell| verify_cell(spec, cell));
    let mut tallies: Vec<Tally> = spec.checks.iter().map(|_| Tally::default()).collect();
    let mut errors = Vec::new();
    for outcome in per_cell {
        match outcome {
            Ok(ts) => tallies.iter_mut().zip(ts).for_each(|(a, b)| a.merge(b)),
            Err(e) => errors.push(e),
        }
    }
    let suites = spec
        .checks
        .iter()
        .zip(tallies)
        .map(|(&check, t)| SuiteResult {
            check,
            soft: check.is_soft(),
            passed: t.passed,
            failed: t.failed,
            failures: t.failures,
        })
        .collect();
    Ok(VerifyReport {
        cells: spec.cell_count(),
        suites,
        errors,
    })
}
