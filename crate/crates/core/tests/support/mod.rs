#![allow(dead_code)]

use pqspectra::{anadiplosis_components, DirectedHypergraph};
use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn digraph(arcs: &[(u32, u32)]) -> DirectedHypergraph {
    DirectedHypergraph::build(1, 1, arcs.iter().map(|&(a, b)| ([a], [b]))).unwrap()
}

/// `arcs` random arcs over `vertices` labels; each arc draws `r + s`
/// distinct vertices.
pub fn random_graph(
    rng: &mut impl Rng,
    r: usize,
    s: usize,
    arcs: usize,
    vertices: usize,
) -> DirectedHypergraph {
    let list: Vec<(Vec<usize>, Vec<usize>)> = (0..arcs)
        .map(|_| {
            let picked = sample(rng, vertices, r + s).into_vec();
            (picked[..r].to_vec(), picked[r..].to_vec())
        })
        .collect();
    DirectedHypergraph::build(r, s, list).unwrap()
}

pub fn random_connected(
    rng: &mut impl Rng,
    r: usize,
    s: usize,
    arcs: usize,
    vertices: usize,
) -> DirectedHypergraph {
    loop {
        let g = random_graph(rng, r, s, arcs, vertices);
        if anadiplosis_components(&g).connected {
            return g;
        }
    }
}

/// Vertex-disjoint union; labels of part `i` get the suffix `#i`.
pub fn disjoint_union(parts: &[DirectedHypergraph]) -> DirectedHypergraph {
    let arcs = parts.iter().enumerate().flat_map(|(i, g)| {
        g.labelled_arcs().into_iter().map(move |(t, h)| {
            let tag = |v: Vec<String>| v.into_iter().map(|l| format!("{l}#{i}")).collect::<Vec<_>>();
            (tag(t), tag(h))
        })
    });
    DirectedHypergraph::build(parts[0].r(), parts[0].s(), arcs).unwrap()
}

/// Arc groups under the walk definition: arcs sharing a vertex on the same
/// side are adjacent; groups are the closure, ordered by smallest arc.
pub fn walk_groups(g: &DirectedHypergraph) -> Vec<Vec<usize>> {
    let n = g.arc_count();
    let linked = |e: usize, f: usize| {
        let (a, b) = (g.arc(e), g.arc(f));
        a.tail().iter().any(|v| b.tail().contains(v)) || a.head().iter().any(|v| b.head().contains(v))
    };
    let mut seen = vec![false; n];
    let mut groups = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut group = vec![start];
        let mut k = 0;
        while k < group.len() {
            let e = group[k];
            for f in 0..n {
                if !seen[f] && linked(e, f) {
                    seen[f] = true;
                    group.push(f);
                }
            }
            k += 1;
        }
        group.sort_unstable();
        groups.push(group);
    }
    groups
}

/// Every `(r,s)`-arc list with `1..=max_arcs` arcs over at most `max_vertices`
/// vertices, with labels introduced in order of first use.
pub fn enumerate_graphs(
    r: usize,
    s: usize,
    max_arcs: usize,
    max_vertices: usize,
) -> Vec<DirectedHypergraph> {
    fn subsets(pool: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        (0..pool)
            .flat_map(|first| {
                subsets(pool, k - 1)
                    .into_iter()
                    .filter(move |rest| rest.first().is_none_or(|&x| x > first))
                    .map(move |mut rest| {
                        rest.insert(0, first);
                        rest
                    })
            })
            .collect()
    }
    fn grow(
        r: usize,
        s: usize,
        max_arcs: usize,
        max_vertices: usize,
        used: usize,
        arcs: &mut Vec<(Vec<usize>, Vec<usize>)>,
        out: &mut Vec<DirectedHypergraph>,
    ) {
        if !arcs.is_empty() {
            out.push(DirectedHypergraph::build(r, s, arcs.clone()).unwrap());
        }
        if arcs.len() == max_arcs {
            return;
        }
        let pool = (used + r + s).min(max_vertices);
        for tail in subsets(pool, r) {
            for head in subsets(pool, s) {
                if head.iter().any(|v| tail.contains(v)) {
                    continue;
                }
                // fresh vertices must be the next unused labels, in order
                let mut fresh: Vec<usize> =
                    tail.iter().chain(&head).copied().filter(|&v| v >= used).collect();
                fresh.sort_unstable();
                if fresh.iter().enumerate().any(|(k, &v)| v != used + k) {
                    continue;
                }
                let next = used + fresh.len();
                arcs.push((tail.clone(), head.clone()));
                grow(r, s, max_arcs, max_vertices, next, arcs, out);
                arcs.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(r, s, max_arcs, max_vertices, 0, &mut Vec::new(), &mut out);
    out
}
