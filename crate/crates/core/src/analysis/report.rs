use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::allocator::{BallTrace, LoadVector, RunStats};
use crate::graphs::Graph;

/// Per-run statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub balls: u64,
    pub max_load: u32,
    /// load -> number of vertices carrying it
    pub histogram: BTreeMap<u32, usize>,
    pub smoothness_max: u32,
    pub mean_probes: f64,
    pub max_probes: u64,
    /// balls born at each vertex
    pub birth_counts: Vec<u32>,
    pub potential: Option<f64>,
    pub runtime_ms: f64,
}

/// Builds a report from final loads; probe and birth data come from the
/// traces when they are available.
pub fn summarize(g: &Graph, lv: &LoadVector, traces: Option<&[BallTrace]>) -> RunReport {
    let mut stats = RunStats {
        balls: lv.total(),
        birth_counts: vec![0; g.n()],
        ..Default::default()
    };
    if let Some(ts) = traces {
        for t in ts {
            stats.birth_counts[t.birthplace as usize] += 1;
            stats.probes_total += t.probes as u64;
            stats.probes_max = stats.probes_max.max(t.probes as u64);
        }
    }
    RunReport::from_stats(g, lv, &stats)
}

impl RunReport {
    pub fn from_stats(g: &Graph, lv: &LoadVector, stats: &RunStats) -> RunReport {
        let mut histogram = BTreeMap::new();
        for &x in lv.as_slice() {
            *histogram.entry(x).or_insert(0) += 1;
        }
        RunReport {
            n: g.n(),
            balls: lv.total(),
            max_load: lv.max_load(),
            histogram,
            smoothness_max: lv.smoothness(g),
            mean_probes: stats.mean_probes(),
            max_probes: stats.probes_max,
            birth_counts: stats.birth_counts.clone(),
            potential: None,
            runtime_ms: stats.runtime_ms,
        }
    }

    /// Histogram totals agree with `n` and the ball count.
    pub fn is_consistent(&self) -> bool {
        let vertices: usize = self.histogram.values().sum();
        let mass: u64 = self
            .histogram
            .iter()
            .map(|(&load, &count)| u64::from(load) * count as u64)
            .sum();
        vertices == self.n && mass == self.balls
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::{run_local_search, TieRule};
    use crate::graphs::*;
    use crate::rng::RandomSource;

    #[test]
    fn zero_loads() {
        let g = build_cycle(7).unwrap();
        let r = summarize(&g, &LoadVector::zeros(7), None);
        assert_eq!(r.max_load, 0);
        assert_eq!(r.histogram.into_iter().collect::<Vec<_>>(), vec![(0, 7)]);
    }

    #[test]
    fn worked_example_loads() {
        let g = build_path(6).unwrap();
        let r = summarize(&g, &LoadVector::from_loads(vec![1, 1, 2, 3, 2, 3]), None);
        assert_eq!((r.max_load, r.smoothness_max), (3, 1));
        assert!(r.is_consistent());
    }

    #[test]
    fn completed_run_conserves_balls() {
        let g = build_grid(10, 2).unwrap();
        let run = run_local_search(&g, 250, &TieRule::UniformRandom, &RandomSource::new(2), true);
        let r = summarize(&g, &run.loads, run.traces.as_deref());
        assert!(r.is_consistent());
        assert_eq!(r.balls, 250);
        assert!(r.smoothness_max <= 1);
        assert_eq!(r.birth_counts, run.stats.birth_counts);
        assert_eq!(r.max_probes, run.stats.probes_max);
        assert!((r.mean_probes - run.stats.mean_probes()).abs() < 1e-12);
    }
}
