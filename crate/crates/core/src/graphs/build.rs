use rand::seq::SliceRandom;

use super::{FamilyTag, Graph, Layout, Vertex};
use crate::error::{Error, Result};
use crate::rng::{Purpose, RandomSource};

/// Whole-instance rejection budget of the configuration model.
pub const RANDOM_REGULAR_ATTEMPTS: usize = 10_000;

const ERDOS_RENYI_ATTEMPTS: usize = 100;

/// Largest graph any constructor will allocate.
const MAX_VERTICES: usize = 1 << 30;

pub fn build_cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::invalid(format!("cycle needs n >= 3, got {n}")));
    }
    let edges: Vec<_> = (0..n)
        .map(|i| (i as Vertex, ((i + 1) % n) as Vertex))
        .collect();
    Graph::from_edges(n, &edges, FamilyTag::Cycle)
}

/// Path `0 - 1 - ... - (n-1)`; not one of the studied families but handy for
/// small hand-worked configurations.
pub fn build_path(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::invalid("path needs at least one vertex"));
    }
    let edges: Vec<_> = (1..n).map(|i| ((i - 1) as Vertex, i as Vertex)).collect();
    Graph::from_edges(n, &edges, FamilyTag::Custom)
}

pub fn build_complete(n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::invalid("complete graph needs at least one vertex"));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u as Vertex, v as Vertex));
        }
    }
    Graph::from_edges(n, &edges, FamilyTag::Custom)
}

/// `dim`-dimensional torus with `side^dim` vertices, row-major ids.
pub fn build_grid(side: usize, dim: usize) -> Result<Graph> {
    if side < 3 {
        return Err(Error::invalid(format!("grid side must be >= 3, got {side}")));
    }
    if dim < 1 {
        return Err(Error::invalid("grid dimension must be >= 1"));
    }
    let n = (0..dim)
        .try_fold(1usize, |acc, _| acc.checked_mul(side))
        .filter(|&n| n <= MAX_VERTICES)
        .ok_or_else(|| Error::invalid(format!("{side}^{dim} vertices is too large")))?;
    let mut edges = Vec::with_capacity(n * dim);
    let mut stride = 1;
    for _ in 0..dim {
        for v in 0..n {
            let coord = (v / stride) % side;
            let next = if coord + 1 == side {
                v - coord * stride
            } else {
                v + stride
            };
            edges.push((v.min(next) as Vertex, v.max(next) as Vertex));
        }
        stride *= side;
    }
    Ok(Graph::from_edges(n, &edges, FamilyTag::Grid)?.with_layout(Layout::Grid { side, dim }))
}

pub fn build_hypercube(dim: usize) -> Result<Graph> {
    if !(1..=30).contains(&dim) {
        return Err(Error::invalid(format!("hypercube dimension must be in 1..=30, got {dim}")));
    }
    let n = 1usize << dim;
    let mut edges = Vec::with_capacity(n * dim / 2);
    for v in 0..n {
        for b in 0..dim {
            let w = v ^ (1 << b);
            if v < w {
                edges.push((v as Vertex, w as Vertex));
            }
        }
    }
    Ok(Graph::from_edges(n, &edges, FamilyTag::Hypercube)?.with_layout(Layout::Hypercube { dim }))
}

/// Uniform simple connected `d`-regular graph by configuration-model pairing
/// with whole-instance rejection. Attempt `a` shuffles the stubs with the
/// keyed stream `(Graph, a)`, so the result depends only on `(n, d, seed)`.
pub fn build_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d < 3 || d >= n {
        return Err(Error::invalid(format!("random regular graph needs 3 <= d < n, got d={d}, n={n}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::invalid(format!("n*d must be even, got n={n}, d={d}")));
    }
    if n > MAX_VERTICES {
        return Err(Error::invalid(format!("n={n} is too large")));
    }
    let rs = RandomSource::new(seed);
    let mut stubs: Vec<Vertex> = Vec::with_capacity(n * d);
    let mut pairs: Vec<(Vertex, Vertex)> = Vec::with_capacity(n * d / 2);
    let mut last_reason = String::new();
    for attempt in 0..RANDOM_REGULAR_ATTEMPTS {
        stubs.clear();
        stubs.extend((0..n as Vertex).flat_map(|v| std::iter::repeat_n(v, d)));
        stubs.shuffle(&mut rs.stream(Purpose::Graph, attempt as u64, d as u64));
        pairs.clear();
        pairs.extend(stubs.chunks_exact(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))));
        if pairs.iter().any(|&(u, v)| u == v) {
            last_reason = "self-loop".into();
            continue;
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            last_reason = "multi-edge".into();
            continue;
        }
        match Graph::from_edges(n, &pairs, FamilyTag::RandomRegular) {
            Ok(g) => return Ok(g),
            Err(_) => last_reason = "disconnected".into(),
        }
    }
    Err(Error::GenerationFailed {
        attempts: RANDOM_REGULAR_ATTEMPTS,
        reason: format!("last rejection: {last_reason}"),
    })
}

/// G(n, p), retried with fresh keyed streams until connected.
pub fn build_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("edge probability must be in (0, 1), got {p}")));
    }
    if !(2..=MAX_VERTICES).contains(&n) {
        return Err(Error::invalid(format!("n={n} out of range")));
    }
    let rs = RandomSource::new(seed);
    let log_q = (1.0 - p).ln();
    for attempt in 0..ERDOS_RENYI_ATTEMPTS {
        let mut edges = Vec::new();
        // Geometric skipping over the pairs (i, j), i < j, in row-major order.
        let (mut i, mut j) = (0usize, 0usize);
        let mut draw = 0u64;
        loop {
            let u = 1.0 - rs.unit(Purpose::Graph, attempt as u64, draw);
            draw += 1;
            let skip = (u.ln() / log_q).floor();
            let mut step = if skip.is_finite() { skip as usize + 1 } else { usize::MAX };
            // advance `step` pairs from the current position
            while i < n - 1 {
                let remaining = n - 1 - j.max(i);
                if step <= remaining {
                    j = j.max(i) + step;
                    break;
                }
                step -= remaining;
                i += 1;
                j = i;
            }
            if i >= n - 1 {
                break;
            }
            edges.push((i as Vertex, j as Vertex));
        }
        if let Ok(g) = Graph::from_edges(n, &edges, FamilyTag::ErdosRenyi) {
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: ERDOS_RENYI_ATTEMPTS,
        reason: "every attempt was disconnected".into(),
    })
}

/// `n / (d-1)` cliques of size `d-1` on a cycle; vertex `j` of clique `c`
/// is joined to vertex `j` of clique `c+1`.
pub fn build_clique_cycle(n: usize, d: usize) -> Result<Graph> {
    if d < 3 {
        return Err(Error::invalid(format!("clique-cycle needs d >= 3, got {d}")));
    }
    let q = d - 1;
    if !n.is_multiple_of(q) {
        return Err(Error::invalid(format!("clique size {q} does not divide n={n}")));
    }
    let cliques = n / q;
    if cliques < 3 {
        return Err(Error::invalid(format!("need at least 3 cliques, got {cliques}")));
    }
    let id = |c: usize, j: usize| (c * q + j) as Vertex;
    let mut edges = Vec::with_capacity(n * d / 2);
    for c in 0..cliques {
        for a in 0..q {
            for b in a + 1..q {
                edges.push((id(c, a), id(c, b)));
            }
            let (x, y) = (id(c, a), id((c + 1) % cliques, a));
            edges.push((x.min(y), x.max(y)));
        }
    }
    Ok(Graph::from_edges(n, &edges, FamilyTag::CliqueCycle)?
        .with_layout(Layout::CliqueCycle { clique_size: q }))
}

/// Balanced tree of depth `k` below a root of degree `d` (inner vertices
/// have `d-1` children), with the `L = d(d-1)^(k-1)` leaves completed to
/// degree `d` by a circulant: leaf `l` joins `l ± 1, …, l ± floor((d-1)/2)`,
/// plus the antipodal leaf `l + L/2` when `d-1` is odd. Returns the graph
/// and the root id (always 0; ids are assigned level by level).
pub fn build_regular_tree_graph(d: usize, k: usize) -> Result<(Graph, Vertex)> {
    if d < 3 || k < 1 {
        return Err(Error::invalid(format!("tree graph needs d >= 3 and k >= 1, got d={d}, k={k}")));
    }
    let too_big = || Error::invalid(format!("tree graph with d={d}, k={k} is too large"));
    // level sizes: 1, d, d(d-1), ..., d(d-1)^(k-1)
    let mut levels = vec![1usize];
    let mut width = d;
    for i in 0..k {
        if i > 0 {
            width = width.checked_mul(d - 1).ok_or_else(too_big)?;
        }
        levels.push(width);
    }
    let n = levels.iter().try_fold(0usize, |a, &b| a.checked_add(b)).ok_or_else(too_big)?;
    if n > MAX_VERTICES {
        return Err(too_big());
    }
    let leaves = *levels.last().unwrap();
    if (d - 1) % 2 == 1 && leaves % 2 == 1 {
        return Err(Error::invalid(format!("{leaves} leaves cannot take an antipodal matching")));
    }

    let mut edges = Vec::with_capacity(n * d / 2);
    let mut level_start = 0usize;
    for (depth, &width) in levels.iter().enumerate().take(k) {
        let next_start = level_start + width;
        let fanout = if depth == 0 { d } else { d - 1 };
        for (i, parent) in (level_start..next_start).enumerate() {
            for c in 0..fanout {
                edges.push((parent as Vertex, (next_start + i * fanout + c) as Vertex));
            }
        }
        level_start = next_start;
    }
    let leaf = |l: usize| (level_start + l % leaves) as Vertex;
    for l in 0..leaves {
        for off in 1..=(d - 1) / 2 {
            let (a, b) = (leaf(l), leaf(l + off));
            edges.push((a.min(b), a.max(b)));
        }
        if (d - 1) % 2 == 1 && l < leaves / 2 {
            edges.push((leaf(l), leaf(l + leaves / 2)));
        }
    }
    let g = Graph::from_edges(n, &edges, FamilyTag::TreeRegular)?.with_layout(Layout::Tree {
        degree: d,
        depth: k,
        root: 0,
    });
    Ok((g, 0))
}
