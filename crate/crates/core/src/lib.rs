//! Spectral radii `λ_{p,q}(G)` of `(r,s)`-directed hypergraphs.
//!
//! `λ_{p,q}(G)` is the maximum of the multilinear polynomial form
//! `P_G(x, y) = Σ_e Π_{u∈T(e)} x_u Π_{v∈H(e)} y_v` over the product of the
//! ℓp unit sphere (tail side) and the ℓq unit sphere (head side).
//!
//! The crate computes it ([`solver`]), certifies it with weighted incidence
//! labelings ([`labeling`]), decomposes graphs into anadiplosis components
//! ([`hypergraph`]) and evaluates closed forms, degree bounds and parameter
//! scans ([`analysis`]).

pub mod analysis;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod labeling;
pub mod polyform;
pub mod solver;

pub use error::{Error, Result};
pub use hypergraph::{
    anadiplosis_components, bipartite_split, degree_summary, Arc, Components, DegreeSummary,
    DirectedHypergraph, Subgraph,
};
pub use polyform::{evaluate, partial_sums, phase_classify, residual, Eigenpair, Phase, SpectralParams};
pub use solver::{solve, Method, SolveOptions, SolveResult};
