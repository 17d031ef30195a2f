//! Immutable simple undirected graphs in compressed adjacency form, the
//! graph families the allocator is studied on, and neighborhood queries.

mod build;
mod edgelist;
mod neighborhood;

pub use build::{
    build_clique_cycle, build_complete, build_cycle, build_erdos_renyi, build_grid,
    build_hypercube, build_path, build_random_regular, build_regular_tree_graph,
    RANDOM_REGULAR_ATTEMPTS,
};
pub use edgelist::parse_edge_list;
pub use neighborhood::{
    ball_of_radius, check_exponential_growth, distances_from, linf_ball, multi_source_ball, multi_source_distances,
    sphere, sphere_sizes, GrowthCheck,
};

use std::fmt;

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Provenance label carried by every graph and written into edge-list headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Cycle,
    Grid,
    Hypercube,
    RandomRegular,
    ErdosRenyi,
    TreeRegular,
    CliqueCycle,
    Custom,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 8] = [
        FamilyTag::Cycle,
        FamilyTag::Grid,
        FamilyTag::Hypercube,
        FamilyTag::RandomRegular,
        FamilyTag::ErdosRenyi,
        FamilyTag::TreeRegular,
        FamilyTag::CliqueCycle,
        FamilyTag::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyTag::Cycle => "cycle",
            FamilyTag::Grid => "grid",
            FamilyTag::Hypercube => "hypercube",
            FamilyTag::RandomRegular => "random-regular",
            FamilyTag::ErdosRenyi => "erdos-renyi",
            FamilyTag::TreeRegular => "tree-regular",
            FamilyTag::CliqueCycle => "clique-cycle",
            FamilyTag::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<FamilyTag> {
        FamilyTag::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structural parameters that some queries need beyond the adjacency.
/// Graphs read back from an edge list have no layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Torus with `side^dim` vertices in row-major order.
    Grid { side: usize, dim: usize },
    Hypercube { dim: usize },
    /// Balanced tree with completed leaves; vertices numbered level by level.
    Tree { degree: usize, depth: usize, root: Vertex },
    /// Clique `c` occupies ids `c*clique_size .. (c+1)*clique_size`.
    CliqueCycle { clique_size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    max_degree: usize,
    min_degree: usize,
    tag: FamilyTag,
    layout: Option<Layout>,
}

impl Graph {
    /// Builds a graph from an undirected edge list, rejecting self-loops,
    /// duplicate edges, out-of-range ids and disconnected inputs.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)], tag: FamilyTag) -> Result<Graph> {
        if n == 0 {
            return Err(Error::invalid("graph must have at least one vertex"));
        }
        if n > Vertex::MAX as usize {
            return Err(Error::invalid(format!("{n} vertices exceed the id range")));
        }
        let mut degree = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0; offsets[n]];
        for &(u, v) in edges {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for v in 0..n {
            let row = &mut targets[offsets[v]..offsets[v + 1]];
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge ({v}, {})", w[0])));
            }
        }
        let graph = Graph {
            max_degree: degree.iter().copied().max().unwrap_or(0),
            min_degree: degree.iter().copied().min().unwrap_or(0),
            offsets,
            targets,
            tag,
            layout: None,
        };
        if !graph.is_connected() {
            return Err(Error::invalid("graph is disconnected"));
        }
        Ok(graph)
    }

    pub(crate) fn with_layout(mut self, layout: Layout) -> Graph {
        self.layout = Some(layout);
        self
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        let v = v as usize;
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    /// Position of `v`'s adjacency row inside the flat target array.
    #[inline]
    pub(crate) fn row_start(&self, v: Vertex) -> usize {
        self.offsets[v as usize]
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn min_degree(&self) -> usize {
        self.min_degree
    }

    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    pub fn layout(&self) -> Option<Layout> {
        self.layout
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        0..self.n() as Vertex
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Degree value -> number of vertices with that degree.
    pub fn degree_histogram(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut hist = std::collections::BTreeMap::new();
        for v in self.vertices() {
            *hist.entry(self.degree(v)).or_insert(0) += 1;
        }
        hist
    }

    fn is_connected(&self) -> bool {
        distances_from(self, 0).iter().all(|&d| d != u32::MAX)
    }

    /// Re-derives every structural invariant from scratch.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n();
        let mut max_d = 0;
        let mut min_d = usize::MAX;
        for u in self.vertices() {
            let row = self.neighbors(u);
            max_d = max_d.max(row.len());
            min_d = min_d.min(row.len());
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidInput(format!("row {u} not strictly sorted")));
                }
            }
            for &v in row {
                if v as usize >= n || v == u {
                    return Err(Error::InvalidInput(format!("bad neighbor {v} of {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(Error::InvalidInput(format!("asymmetric edge {u}->{v}")));
                }
            }
        }
        if max_d != self.max_degree || min_d != self.min_degree {
            return Err(Error::InvalidInput("stored degree bounds are stale".into()));
        }
        if !self.is_connected() {
            return Err(Error::InvalidInput("graph is disconnected".into()));
        }
        Ok(())
    }
}

/// Sorted set of distinct vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn from_unsorted(mut ids: Vec<Vertex>) -> VertexSet {
        ids.sort_unstable();
        ids.dedup();
        VertexSet(ids)
    }

    pub fn singleton(v: Vertex) -> VertexSet {
        VertexSet(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl From<VertexSet> for Vec<Vertex> {
    fn from(s: VertexSet) -> Self {
        s.0
    }
}
