use serde::{Deserialize, Serialize};

use crate::allocator::LoadVector;
use crate::error::{Error, Result};
use crate::graphs::{distances_from, multi_source_distances, sphere_sizes, Graph, Vertex, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    LowerBound,
    UpperBound,
}

/// A checked load bound with every input needed to re-derive the verdict.
///
/// Lower bound (subject `S`, radius `beta = max load`):
/// `beta * region_size >= mass`, where `mass` is the number of balls born in
/// `S` and `region_size = |B_S^beta|`.
///
/// Upper bound (subject `{v}`, radius `r`):
/// `load * region_size <= mass + distance_sum`, where `mass` is the number
/// of balls in `B_v^r`, `region_size = |B_v^r|` and
/// `distance_sum = sum_i i * |N_v^i|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub subject: Vec<Vertex>,
    pub radius: usize,
    /// Lower bound: smallest `beta'` with `beta' * |B_S^beta'| >= mass`.
    /// Upper bound: `mass / region_size + distance_sum / region_size`.
    pub bound_value: f64,
    pub inequality_holds: bool,
    pub load: u32,
    pub mass: u64,
    pub region_size: usize,
    pub distance_sum: u64,
}

impl Certificate {
    /// Re-derives `inequality_holds` from the stored integers.
    pub fn recheck(&self) -> bool {
        let size = self.region_size as u64;
        match self.kind {
            CertificateKind::LowerBound => self.radius as u64 * size >= self.mass,
            CertificateKind::UpperBound => u64::from(self.load) * size <= self.mass + self.distance_sum,
        }
    }
}

/// Checks `beta * |B_S^beta| >= (balls born in S)` for `beta` the maximum
/// load, and reports the smallest `beta'` that would satisfy it.
pub fn lower_bound_certificate(
    g: &Graph,
    birth_counts: &[u32],
    lv: &LoadVector,
    subject: &VertexSet,
) -> Result<Certificate> {
    if subject.is_empty() {
        return Err(Error::InvalidInput("certificate subject must be nonempty".into()));
    }
    if birth_counts.len() != g.n() || lv.n() != g.n() {
        return Err(Error::InvalidInput("birth counts and loads must cover every vertex".into()));
    }
    let mass: u64 = subject.iter().map(|v| u64::from(birth_counts[v as usize])).sum();
    let beta = lv.max_load() as usize;

    // |B_S^r| for every r from one multi-source BFS
    let dist = multi_source_distances(g, subject.iter(), u32::MAX);
    let mut layer = vec![0usize; g.n() + 1];
    for d in dist {
        layer[(d as usize).min(g.n())] += 1;
    }
    let mut ball_sizes = Vec::with_capacity(layer.len());
    let mut acc = 0;
    for c in layer {
        acc += c;
        ball_sizes.push(acc);
    }
    let ball = |r: usize| ball_sizes[r.min(ball_sizes.len() - 1)];

    let region_size = ball(beta);
    let implied = (0u64..)
        .find(|&b| b * ball(b as usize) as u64 >= mass)
        .expect("b = mass always satisfies the inequality");
    Ok(Certificate {
        kind: CertificateKind::LowerBound,
        subject: subject.as_slice().to_vec(),
        radius: beta,
        bound_value: implied as f64,
        inequality_holds: beta as u64 * region_size as u64 >= mass,
        load: beta as u32,
        mass,
        region_size,
        distance_sum: 0,
    })
}

/// Checks `x_v <= Psi + sum_{i<=r} i |N_v^i| / |B_v^r|` with `Psi` the mean
/// load over `B_v^r`. Holds for every smooth load vector.
pub fn local_upper_bound(g: &Graph, lv: &LoadVector, v: Vertex, r: usize) -> Result<Certificate> {
    if r < 1 {
        return Err(Error::invalid("upper bound radius must be >= 1"));
    }
    let dist = distances_from(g, v);
    let mut region_size = 0usize;
    let mut mass = 0u64;
    for u in g.vertices() {
        if dist[u as usize] as usize <= r {
            region_size += 1;
            mass += u64::from(lv.get(u));
        }
    }
    let distance_sum: u64 = sphere_sizes(g, v, r)
        .iter()
        .enumerate()
        .map(|(i, &s)| (i * s) as u64)
        .sum();
    let load = lv.get(v);
    let size = region_size as f64;
    let cert = Certificate {
        kind: CertificateKind::UpperBound,
        subject: vec![v],
        radius: r,
        bound_value: mass as f64 / size + distance_sum as f64 / size,
        inequality_holds: u64::from(load) * region_size as u64 <= mass + distance_sum,
        load,
        mass,
        region_size,
        distance_sum,
    };
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::{run_local_search, TieRule};
    use crate::graphs::*;
    use crate::rng::{Purpose, RandomSource};

    #[test]
    fn single_vertex_lower_bound_is_tight() {
        let g = Graph::from_edges(1, &[], FamilyTag::Custom).unwrap();
        let lv = LoadVector::from_loads(vec![5]);
        let c = lower_bound_certificate(&g, &[5], &lv, &VertexSet::singleton(0)).unwrap();
        assert_eq!((c.radius, c.region_size, c.mass), (5, 1, 5));
        assert!(c.inequality_holds && c.recheck());
        assert_eq!(c.bound_value, 5.0);
    }

    #[test]
    fn lower_bound_scan_on_path() {
        // 10 balls born at the middle of a 7-path: beta' * |B^beta'| >= 10
        // |B^1| = 3, |B^2| = 5, so beta' = 2 (2*5 = 10)
        let g = build_path(7).unwrap();
        let mut births = vec![0; 7];
        births[3] = 10;
        let lv = LoadVector::from_loads(vec![1, 1, 2, 2, 2, 1, 1]);
        let c = lower_bound_certificate(&g, &births, &lv, &VertexSet::singleton(3)).unwrap();
        assert_eq!(c.bound_value, 2.0);
        assert!(c.inequality_holds);
        assert!(lower_bound_certificate(&g, &births, &lv, &VertexSet::default()).is_err());
    }

    #[test]
    fn worked_example_upper_bound() {
        let g = build_path(6).unwrap();
        let lv = LoadVector::from_loads(vec![1, 1, 2, 3, 2, 3]);
        let c = local_upper_bound(&g, &lv, 3, 1).unwrap();
        assert_eq!((c.mass, c.region_size, c.distance_sum), (7, 3, 2));
        assert!((c.bound_value - 3.0).abs() < 1e-12);
        assert!(c.inequality_holds && c.recheck());
        assert!(local_upper_bound(&g, &lv, 3, 0).is_err());
    }

    #[test]
    fn uniform_loads_upper_bound() {
        let g = build_grid(6, 2).unwrap();
        let lv = LoadVector::from_loads(vec![4; 36]);
        for r in 1..4 {
            let c = local_upper_bound(&g, &lv, 0, r).unwrap();
            let mean_dist = c.distance_sum as f64 / c.region_size as f64;
            assert!((c.bound_value - (4.0 + mean_dist)).abs() < 1e-12);
            assert!(c.inequality_holds);
        }
    }

    #[test]
    fn certificates_hold_on_completed_runs() {
        let g = build_random_regular(200, 3, 4).unwrap();
        for seed in 0..5 {
            let rs = RandomSource::new(seed);
            let run = run_local_search(&g, 200, &TieRule::UniformRandom, &rs, false);
            let births = &run.stats.birth_counts;
            let top = (0..200u32).max_by_key(|&v| (births[v as usize], std::cmp::Reverse(v))).unwrap();
            let c = lower_bound_certificate(&g, births, &run.loads, &VertexSet::singleton(top)).unwrap();
            assert!(c.inequality_holds);
            assert!(c.bound_value <= f64::from(run.loads.max_load()));
            for k in 0..100u64 {
                let v = rs.below(Purpose::Trial, k, 0, 200) as Vertex;
                let r = 1 + rs.below(Purpose::Trial, k, 1, 6) as usize;
                assert!(local_upper_bound(&g, &run.loads, v, r).unwrap().inequality_holds);
            }
        }
    }

    #[test]
    fn upper_bound_fails_on_non_smooth_loads() {
        // a spike of 5 next to zeros breaks smoothness, and the bound catches it
        let g = build_path(3).unwrap();
        let lv = LoadVector::from_loads(vec![0, 5, 0]);
        let c = local_upper_bound(&g, &lv, 1, 1).unwrap();
        assert!(!c.inequality_holds && !c.recheck());
    }
}
