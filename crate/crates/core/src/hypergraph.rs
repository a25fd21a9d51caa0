//! Directed-hypergraph data model.
//!
//! A [`DirectedHypergraph`] is an ordered list of arcs, each an ordered pair of
//! disjoint vertex sets (tail, head) of fixed sizes `r` and `s`. Vertices are
//! opaque labels mapped to dense ids in order of first appearance. The tail
//! support `T(G)` and head support `H(G)` index the two coordinate vectors
//! `x` and `y` used everywhere downstream.
//!
//! Anadiplosis connectivity is computed on the bipartite split, where each
//! vertex gets a tail copy and a head copy: two arcs are connected when they
//! share a vertex on the same side.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// One arc: disjoint tail and head vertex sets, stored as dense vertex ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    tail: Vec<usize>,
    head: Vec<usize>,
}

impl Arc {
    pub fn tail(&self) -> &[usize] {
        &self.tail
    }

    pub fn head(&self) -> &[usize] {
        &self.head
    }
}

/// An `(r,s)`-directed hypergraph. Parallel arcs are kept.
#[derive(Debug, Clone)]
pub struct DirectedHypergraph {
    r: usize,
    s: usize,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    arcs: Vec<Arc>,
    tail_support: Vec<usize>,
    head_support: Vec<usize>,
    // arc -> coordinates into x (tails) and y (heads)
    tail_coords: Vec<Vec<usize>>,
    head_coords: Vec<Vec<usize>>,
}

impl DirectedHypergraph {
    /// Builds and validates a graph from labelled arcs.
    ///
    /// Every tail must have exactly `r` distinct labels and every head
    /// exactly `s`; tail and head must be disjoint. An empty arc list is
    /// accepted (see [`is_empty`](Self::is_empty)).
    pub fn build<I, T, H, L>(r: usize, s: usize, arcs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, H)>,
        T: IntoIterator<Item = L>,
        H: IntoIterator<Item = L>,
        L: ToString,
    {
        if r == 0 || s == 0 {
            return Err(Error::InvalidArity { r, s });
        }
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |label: String| -> usize {
            *index.entry(label.clone()).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            })
        };

        let mut built = Vec::new();
        for (arc_idx, (tail, head)) in arcs.into_iter().enumerate() {
            let tail: Vec<String> = tail.into_iter().map(|l| l.to_string()).collect();
            let head: Vec<String> = head.into_iter().map(|l| l.to_string()).collect();
            let tail_set = dedup_ids(tail.into_iter().map(&mut intern));
            let head_set = dedup_ids(head.into_iter().map(&mut intern));
            if tail_set.len() != r || head_set.len() != s {
                return Err(Error::ArityMismatch {
                    arc: arc_idx,
                    r,
                    s,
                    tail: tail_set.len(),
                    head: head_set.len(),
                });
            }
            if let Some(&v) = tail_set.iter().find(|v| head_set.contains(v)) {
                return Err(Error::Overlap {
                    arc: arc_idx,
                    vertex: labels[v].clone(),
                });
            }
            built.push(Arc {
                tail: tail_set,
                head: head_set,
            });
        }
        Ok(Self::from_parts(r, s, labels, index, built))
    }

    fn from_parts(
        r: usize,
        s: usize,
        labels: Vec<String>,
        index: HashMap<String, usize>,
        arcs: Vec<Arc>,
    ) -> Self {
        let nv = labels.len();
        let mut in_tail = vec![false; nv];
        let mut in_head = vec![false; nv];
        for arc in &arcs {
            arc.tail.iter().for_each(|&v| in_tail[v] = true);
            arc.head.iter().for_each(|&v| in_head[v] = true);
        }
        let tail_support: Vec<usize> = (0..nv).filter(|&v| in_tail[v]).collect();
        let head_support: Vec<usize> = (0..nv).filter(|&v| in_head[v]).collect();
        let mut tail_pos = vec![usize::MAX; nv];
        let mut head_pos = vec![usize::MAX; nv];
        tail_support
            .iter()
            .enumerate()
            .for_each(|(i, &v)| tail_pos[v] = i);
        head_support
            .iter()
            .enumerate()
            .for_each(|(j, &v)| head_pos[v] = j);
        let tail_coords = arcs
            .iter()
            .map(|a| a.tail.iter().map(|&v| tail_pos[v]).collect())
            .collect();
        let head_coords = arcs
            .iter()
            .map(|a| a.head.iter().map(|&v| head_pos[v]).collect())
            .collect();
        Self {
            r,
            s,
            labels,
            index,
            arcs,
            tail_support,
            head_support,
            tail_coords,
            head_coords,
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Number of arcs, `|G|`.
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, e: usize) -> &Arc {
        &self.arcs[e]
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex_id(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// `T(G)` as vertex ids; position `i` is coordinate `x_i`.
    pub fn tail_support(&self) -> &[usize] {
        &self.tail_support
    }

    /// `H(G)` as vertex ids; position `j` is coordinate `y_j`.
    pub fn head_support(&self) -> &[usize] {
        &self.head_support
    }

    /// `m = |T(G)|`.
    pub fn tail_dim(&self) -> usize {
        self.tail_support.len()
    }

    /// `n = |H(G)|`.
    pub fn head_dim(&self) -> usize {
        self.head_support.len()
    }

    /// x-coordinates of the tail of arc `e`, aligned with `arc(e).tail()`.
    pub fn tail_coords(&self, e: usize) -> &[usize] {
        &self.tail_coords[e]
    }

    /// y-coordinates of the head of arc `e`, aligned with `arc(e).head()`.
    pub fn head_coords(&self, e: usize) -> &[usize] {
        &self.head_coords[e]
    }

    pub fn tail_coord_of(&self, v: usize) -> Option<usize> {
        self.tail_support.binary_search(&v).ok()
    }

    pub fn head_coord_of(&self, v: usize) -> Option<usize> {
        self.head_support.binary_search(&v).ok()
    }

    /// Labelled arcs, in order, for serialization.
    pub fn labelled_arcs(&self) -> Vec<(Vec<String>, Vec<String>)> {
        self.arcs
            .iter()
            .map(|a| {
                (
                    a.tail.iter().map(|&v| self.labels[v].clone()).collect(),
                    a.head.iter().map(|&v| self.labels[v].clone()).collect(),
                )
            })
            .collect()
    }

    /// Sub-dirhypergraph on a subset of arcs (kept in the given order).
    pub fn restrict(&self, arc_indices: &[usize]) -> Subgraph {
        let labelled = arc_indices.iter().map(|&e| {
            let a = &self.arcs[e];
            (
                a.tail.iter().map(|&v| self.labels[v].as_str()),
                a.head.iter().map(|&v| self.labels[v].as_str()),
            )
        });
        let graph = Self::build(self.r, self.s, labelled).expect("sub-arcs of a valid graph");
        let tail_map = graph
            .tail_support
            .iter()
            .map(|&v| {
                let parent = self.index[&graph.labels[v]];
                self.tail_coord_of(parent).expect("tail vertex")
            })
            .collect();
        let head_map = graph
            .head_support
            .iter()
            .map(|&v| {
                let parent = self.index[&graph.labels[v]];
                self.head_coord_of(parent).expect("head vertex")
            })
            .collect();
        Subgraph {
            graph,
            arcs: arc_indices.to_vec(),
            tail_map,
            head_map,
        }
    }
}

fn dedup_ids(ids: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for id in ids {
        if !out.contains(&id) {
            out.push(id);
        }
    }
    out
}

/// A restricted graph together with maps from its coordinates back to the
/// parent's coordinates.
#[derive(Debug, Clone)]
pub struct Subgraph {
    pub graph: DirectedHypergraph,
    /// Parent arc index of each arc of `graph`.
    pub arcs: Vec<usize>,
    /// Parent x-coordinate of each x-coordinate of `graph`.
    pub tail_map: Vec<usize>,
    /// Parent y-coordinate of each y-coordinate of `graph`.
    pub head_map: Vec<usize>,
}

/// Out- and in-degree statistics over `T(G)` and `H(G)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSummary {
    /// `d_v^+` indexed by x-coordinate.
    pub out_degree: Vec<usize>,
    /// `d_v^-` indexed by y-coordinate.
    pub in_degree: Vec<usize>,
    pub max_out: usize,
    pub max_in: usize,
    /// Minimum over `T(G)` only.
    pub min_out: usize,
    /// Minimum over `H(G)` only.
    pub min_in: usize,
}

pub fn degree_summary(g: &DirectedHypergraph) -> Result<DegreeSummary> {
    if g.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut out_degree = vec![0; g.tail_dim()];
    let mut in_degree = vec![0; g.head_dim()];
    for e in 0..g.arc_count() {
        g.tail_coords(e).iter().for_each(|&i| out_degree[i] += 1);
        g.head_coords(e).iter().for_each(|&j| in_degree[j] += 1);
    }
    // supports are nonempty when there is at least one arc
    Ok(DegreeSummary {
        max_out: *out_degree.iter().max().unwrap(),
        min_out: *out_degree.iter().min().unwrap(),
        max_in: *in_degree.iter().max().unwrap(),
        min_in: *in_degree.iter().min().unwrap(),
        out_degree,
        in_degree,
    })
}

/// The bipartite split: same arcs, every tail vertex `v` relabelled `v_T`
/// and every head vertex `v_H`, so the two supports are disjoint.
pub fn bipartite_split(g: &DirectedHypergraph) -> DirectedHypergraph {
    let arcs = g.arcs.iter().map(|a| {
        (
            a.tail
                .iter()
                .map(|&v| format!("{}_T", g.labels[v]))
                .collect::<Vec<_>>(),
            a.head
                .iter()
                .map(|&v| format!("{}_H", g.labels[v]))
                .collect::<Vec<_>>(),
        )
    });
    DirectedHypergraph::build(g.r, g.s, arcs).expect("split of a valid graph is valid")
}

/// Arc partition into anadiplosis components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Components {
    /// Arc indices per component; components ordered by smallest arc index,
    /// arcs ascending within each component.
    pub groups: Vec<Vec<usize>>,
    pub connected: bool,
}

impl Components {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.rank[a] < self.rank[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] += 1;
        }
    }
}

/// Groups arcs by connected component of the underlying hypergraph of the
/// bipartite split. Split vertex `i < m` is tail coordinate `i`, split vertex
/// `m + j` is head coordinate `j`.
pub fn anadiplosis_components(g: &DirectedHypergraph) -> Components {
    let m = g.tail_dim();
    let mut dsu = DisjointSet::new(m + g.head_dim());
    for e in 0..g.arc_count() {
        let first = g.tail_coords(e)[0];
        for &i in &g.tail_coords(e)[1..] {
            dsu.union(first, i);
        }
        for &j in g.head_coords(e) {
            dsu.union(first, m + j);
        }
    }
    let mut root_group: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for e in 0..g.arc_count() {
        let root = dsu.find(g.tail_coords(e)[0]);
        let gi = *root_group.entry(root).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[gi].push(e);
    }
    // every split vertex lies on some arc, so one group means one component
    let connected = groups.len() == 1;
    Components { groups, connected }
}
