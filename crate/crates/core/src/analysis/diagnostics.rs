use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::allocator::LoadVector;
use crate::error::{Error, Result};
use crate::graphs::{ball_of_radius, linf_ball, Graph, Layout, Vertex};

/// `max(4 ln n / delta, 1)`, natural log; 1 for graphs without edges.
pub fn default_sigma(g: &Graph) -> f64 {
    if g.min_degree() == 0 {
        return 1.0;
    }
    (4.0 * (g.n() as f64).ln() / g.min_degree() as f64).max(1.0)
}

/// `ln sum_u exp(sigma * sum_{v in N_u} x_v)`, evaluated as a log-sum-exp.
pub fn log_exponential_potential(g: &Graph, lv: &LoadVector, sigma: Option<f64>) -> f64 {
    let sigma = sigma.unwrap_or_else(|| default_sigma(g));
    let exponents: Vec<f64> = g
        .vertices()
        .map(|u| {
            let s: u64 = g.neighbors(u).iter().map(|&v| u64::from(lv.get(v))).sum();
            sigma * s as f64
        })
        .collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + exponents.iter().map(|&e| (e - top).exp()).sum::<f64>().ln()
}

/// `sum_u exp(sigma * sum_{v in N_u} x_v)`; `+inf` once it leaves f64 range
/// (the log form stays finite).
pub fn exponential_potential(g: &Graph, lv: &LoadVector, sigma: Option<f64>) -> f64 {
    log_exponential_potential(g, lv, sigma).exp()
}

/// Number of vertices within distance `r` of `v` carrying load at least `ell`.
pub fn tail_census(g: &Graph, lv: &LoadVector, v: Vertex, r: usize, ell: u32) -> usize {
    ball_of_radius(g, v, r)
        .iter()
        .filter(|&u| lv.get(u) >= ell)
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub z: u32,
    /// fraction of vertices with load >= z
    pub fraction: f64,
    /// `2 (4 e Delta / z)^z`, only defined for `z >= 8 e Delta`
    pub bound: Option<f64>,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub rows: Vec<TailRow>,
    /// smallest z the exponential tail bound applies to: `8 e Delta`
    pub threshold: f64,
    /// `8 e Delta^2`, the lowest load level tracked by the expander analysis
    pub ell0: f64,
}

impl TailTable {
    pub fn flagged(&self) -> bool {
        self.rows.iter().any(|r| r.flagged)
    }
}

/// Empirical per-vertex load tail against the exponential tail bound. A
/// row is flagged when the empirical fraction exceeds the bound by more
/// than three binomial standard errors.
pub fn empirical_tail_check(lv: &LoadVector, delta_max: usize) -> TailTable {
    let n = lv.n() as f64;
    let delta = delta_max as f64;
    let threshold = 8.0 * E * delta;
    let rows = (1..=lv.max_load())
        .map(|z| {
            let count = lv.as_slice().iter().filter(|&&x| x >= z).count();
            let fraction = count as f64 / n;
            let zf = f64::from(z);
            let bound = (zf >= threshold).then(|| 2.0 * (4.0 * E * delta / zf).powf(zf));
            let flagged = bound.is_some_and(|b| {
                let p = b.min(1.0);
                fraction > b + 3.0 * (p * (1.0 - p) / n).sqrt()
            });
            TailRow {
                z,
                fraction,
                bound,
                flagged,
            }
        })
        .collect();
    TailTable {
        rows,
        threshold,
        ell0: 8.0 * E * delta * delta,
    }
}

/// `4 e (d+1) (ln n / ln ln n)^(1/(d+1)) (3 r)^d`.
pub fn birth_event_rho(n: usize, dim: usize, r: f64) -> f64 {
    let ln_n = (n as f64).ln();
    let d = dim as f64;
    4.0 * E * (d + 1.0) * (ln_n / ln_n.ln()).powf(1.0 / (d + 1.0)) * (3.0 * r).powf(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirthEventViolation {
    pub center: Vertex,
    pub radius: usize,
    pub births: u64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirthEventCheck {
    pub holds: bool,
    /// inclusive radius range scanned; empty when `lo > hi`
    pub radii: (usize, usize),
    pub violations: Vec<BirthEventViolation>,
}

/// On a torus grid, checks that the number of balls born inside every
/// coordinatewise ball of radius `r` is at most `rho(r)`, for all centers
/// and all `r` from `(4d)^d (ln n / ln ln n)^(1/(d+1))` (or `min_radius`
/// when given) up to `side / 2`.
pub fn birth_count_event_check(
    g: &Graph,
    birth_counts: &[u32],
    min_radius: Option<f64>,
) -> Result<BirthEventCheck> {
    let Some(Layout::Grid { side, dim }) = g.layout() else {
        return Err(Error::WrongFamily {
            expected: "grid",
            found: g.tag().to_string(),
        });
    };
    let n = g.n();
    if n < 16 {
        return Err(Error::InvalidInput(format!("need n >= 16 so that ln ln n > 0, got {n}")));
    }
    if birth_counts.len() != n {
        return Err(Error::InvalidInput("birth counts must cover every vertex".into()));
    }
    let ln_n = (n as f64).ln();
    let floor = min_radius.unwrap_or_else(|| {
        (4.0 * dim as f64).powi(dim as i32) * (ln_n / ln_n.ln()).powf(1.0 / (dim as f64 + 1.0))
    });
    let lo = floor.max(0.0).ceil() as usize;
    let hi = side / 2;
    let total: u64 = birth_counts.iter().map(|&z| u64::from(z)).sum();
    let mut violations = Vec::new();
    for r in lo..=hi {
        let rho = birth_event_rho(n, dim, r as f64);
        if rho >= total as f64 {
            // no ball can hold more than every birth
            continue;
        }
        for u in g.vertices() {
            let births: u64 = linf_ball(g, u, r)?
                .iter()
                .map(|v| u64::from(birth_counts[v as usize]))
                .sum();
            if births as f64 > rho {
                violations.push(BirthEventViolation {
                    center: u,
                    radius: r,
                    births,
                    rho,
                });
            }
        }
    }
    Ok(BirthEventCheck {
        holds: violations.is_empty(),
        radii: (lo, hi),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::{draw_birthplace, place_ball, run_local_search, TieRule};
    use crate::graphs::*;
    use crate::rng::RandomSource;

    #[test]
    fn potential_of_zero_loads_is_n() {
        for g in [build_hypercube(6).unwrap(), build_cycle(50).unwrap()] {
            let phi = exponential_potential(&g, &LoadVector::zeros(g.n()), None);
            assert!((phi - g.n() as f64).abs() <= 1e-9 * g.n() as f64);
        }
    }

    #[test]
    fn potential_two_terms() {
        let g = build_complete(2).unwrap();
        let phi = exponential_potential(&g, &LoadVector::from_loads(vec![1, 0]), Some(1.0));
        assert!((phi - (E + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn potential_matches_direct_sum() {
        let g = build_grid(5, 2).unwrap();
        let run = run_local_search(&g, 40, &TieRule::UniformRandom, &RandomSource::new(1), false);
        let sigma = 0.7;
        let direct: f64 = g
            .vertices()
            .map(|u| {
                let s: u32 = g.neighbors(u).iter().map(|&v| run.loads.get(v)).sum();
                (sigma * f64::from(s)).exp()
            })
            .sum();
        let phi = exponential_potential(&g, &run.loads, Some(sigma));
        assert!((phi - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn potential_grows_along_a_run() {
        let g = build_hypercube(10).unwrap();
        assert!((default_sigma(&g) - 4.0 * 1024f64.ln() / 10.0).abs() < 1e-12);
        let rs = RandomSource::new(5);
        let tr = TieRule::UniformRandom;
        let mut lv = LoadVector::zeros(g.n());
        let mut last = log_exponential_potential(&g, &lv, None);
        for ball in 1..=1024 {
            let b = draw_birthplace(&rs, ball, g.n());
            place_ball(&g, &mut lv, b, &tr, &rs, ball, None);
            let now = log_exponential_potential(&g, &lv, None);
            assert!(now.is_finite() && now >= last);
            last = now;
        }
    }

    #[test]
    fn tail_census_basics() {
        let g = build_path(6).unwrap();
        let lv = LoadVector::from_loads(vec![1, 1, 2, 3, 2, 3]);
        assert_eq!(tail_census(&g, &lv, 3, 1, 0), 3);
        assert_eq!(tail_census(&g, &lv, 3, 1, 3), 1);
        assert_eq!(tail_census(&g, &lv, 3, 5, 4), 0);
        // monotone in ell and r
        for r in 0..5 {
            for ell in 0..4 {
                assert!(tail_census(&g, &lv, 2, r, ell + 1) <= tail_census(&g, &lv, 2, r, ell));
                assert!(tail_census(&g, &lv, 2, r, ell) <= tail_census(&g, &lv, 2, r + 1, ell));
            }
        }
    }

    #[test]
    fn tail_table() {
        let t = empirical_tail_check(&LoadVector::zeros(10), 4);
        assert!(t.rows.is_empty() && !t.flagged());
        assert!((t.threshold - 32.0 * E).abs() < 1e-12);
        assert!((t.ell0 - 128.0 * E).abs() < 1e-9);

        let loads: Vec<u32> = (0..100).map(|i| if i < 1 { 90 } else { 0 }).collect();
        let t = empirical_tail_check(&LoadVector::from_loads(loads), 4);
        let row87 = &t.rows[86];
        assert_eq!(row87.z, 87);
        let expected = 2.0 * (16.0 * E / 87.0f64).powf(87.0);
        assert!((row87.bound.unwrap() / expected - 1.0).abs() < 1e-12);
        assert!(expected < 2.0 * 0.5f64.powf(86.0));
        // one vertex of a hundred at load 90 is far above the bound
        assert!(row87.flagged);
        assert!(t.rows[85].bound.is_none());
    }

    #[test]
    fn birth_event() {
        let g = build_grid(32, 1).unwrap();
        let run = run_local_search(&g, 32, &TieRule::UniformRandom, &RandomSource::new(0), false);
        let c = birth_count_event_check(&g, &run.stats.birth_counts, None).unwrap();
        assert!(c.holds);
        assert_eq!(c.radii.0, 7);
        // a forced low radius with a concentrated birth vector violates
        let mut births = vec![0; 32];
        births[0] = 32;
        let c = birth_count_event_check(&g, &births, Some(0.0)).unwrap();
        let rho0 = birth_event_rho(32, 1, 0.0);
        assert_eq!(rho0, 0.0);
        assert!(!c.holds);
        assert!(c.violations.iter().all(|v| v.births == 32));
        assert!(matches!(
            birth_count_event_check(&build_cycle(32).unwrap(), &births, None),
            Err(Error::WrongFamily { .. })
        ));
    }
}
