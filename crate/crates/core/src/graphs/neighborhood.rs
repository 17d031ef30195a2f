use std::collections::VecDeque;

use super::{Graph, Layout, Vertex, VertexSet};
use crate::error::{Error, Result};

/// BFS distances from `s`; unreachable vertices get `u32::MAX`.
pub fn distances_from(g: &Graph, s: Vertex) -> Vec<u32> {
    multi_source_distances(g, std::iter::once(s), u32::MAX)
}

/// BFS distances to the nearest source, truncated at `max_radius`.
pub fn multi_source_distances(
    g: &Graph,
    sources: impl IntoIterator<Item = Vertex>,
    max_radius: u32,
) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.n()];
    let mut queue = VecDeque::new();
    for s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        if du >= max_radius {
            continue;
        }
        for &w in g.neighbors(u) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// `|N_v^i|` for `i = 0..=r`, by a BFS truncated at depth `r`.
pub fn sphere_sizes(g: &Graph, v: Vertex, r: usize) -> Vec<usize> {
    let radius = r.min(u32::MAX as usize - 1) as u32;
    let mut sizes = vec![0usize; r + 1];
    for d in multi_source_distances(g, [v], radius) {
        if d != u32::MAX {
            sizes[d as usize] += 1;
        }
    }
    sizes
}

/// Vertices at distance at most `r` from `v`.
pub fn ball_of_radius(g: &Graph, v: Vertex, r: usize) -> VertexSet {
    multi_source_ball(g, &VertexSet::singleton(v), r)
}

/// Vertices at distance exactly `r` from `v`.
pub fn sphere(g: &Graph, v: Vertex, r: usize) -> VertexSet {
    let radius = r.min(u32::MAX as usize - 1) as u32;
    let dist = multi_source_distances(g, [v], radius);
    VertexSet(
        g.vertices()
            .filter(|&u| dist[u as usize] == radius)
            .collect(),
    )
}

/// Vertices at distance at most `r` from any vertex of `sources`.
pub fn multi_source_ball(g: &Graph, sources: &VertexSet, r: usize) -> VertexSet {
    let radius = r.min(u32::MAX as usize - 1) as u32;
    let dist = multi_source_distances(g, sources.iter(), radius);
    VertexSet(
        g.vertices()
            .filter(|&u| dist[u as usize] <= radius)
            .collect(),
    )
}

/// Coordinatewise torus ball: every coordinate within torus distance `r`.
pub fn linf_ball(g: &Graph, u: Vertex, r: usize) -> Result<VertexSet> {
    let Some(Layout::Grid { side, dim }) = g.layout() else {
        return Err(Error::WrongFamily {
            expected: "grid",
            found: g.tag().to_string(),
        });
    };
    let span = (2 * r + 1).min(side);
    let strides: Vec<usize> = (0..dim).map(|i| side.pow(i as u32)).collect();
    let coords: Vec<usize> = strides.iter().map(|s| (u as usize / s) % side).collect();
    let mut out = Vec::with_capacity(span.pow(dim as u32));
    let mut offset = vec![0usize; dim];
    loop {
        let id: usize = (0..dim)
            .map(|i| {
                // shift by (offset - r) mod side, staying in unsigned arithmetic
                let shifted = (coords[i] + offset[i] + side - r % side) % side;
                shifted * strides[i]
            })
            .sum();
        out.push(id as Vertex);
        let mut i = 0;
        while i < dim {
            offset[i] += 1;
            if offset[i] < span {
                break;
            }
            offset[i] = 0;
            i += 1;
        }
        if i == dim {
            break;
        }
    }
    Ok(VertexSet::from_unsorted(out))
}

/// Outcome of the exponential growth check; `witness` is the first `(u, r)`
/// found with `|B_u^r| < min(exp(phi r), n/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthCheck {
    pub holds: bool,
    pub witness: Option<(Vertex, usize)>,
}

/// Checks `|B_u^r| >= min(exp(phi r), n/2)` for every vertex, scanning `r`
/// up to the first radius whose ball reaches `n/2`.
pub fn check_exponential_growth(g: &Graph, phi: f64) -> GrowthCheck {
    let half = g.n() as f64 / 2.0;
    let mut dist = vec![u32::MAX; g.n()];
    let mut queue = VecDeque::new();
    for u in g.vertices() {
        dist.fill(u32::MAX);
        queue.clear();
        dist[u as usize] = 0;
        queue.push_back(u);
        let mut ball = 0usize;
        let mut radius = 0u32;
        // BFS layer by layer; `ball` counts vertices with distance <= radius
        loop {
            while let Some(&x) = queue.front() {
                if dist[x as usize] > radius {
                    break;
                }
                queue.pop_front();
                ball += 1;
                for &w in g.neighbors(x) {
                    if dist[w as usize] == u32::MAX {
                        dist[w as usize] = dist[x as usize] + 1;
                        queue.push_back(w);
                    }
                }
            }
            let need = (phi * radius as f64).exp().min(half);
            if (ball as f64) < need {
                return GrowthCheck {
                    holds: false,
                    witness: Some((u, radius as usize)),
                };
            }
            if ball as f64 >= half || queue.is_empty() {
                break;
            }
            radius += 1;
        }
    }
    GrowthCheck {
        holds: true,
        witness: None,
    }
}
