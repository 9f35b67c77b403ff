//! Conditionally Poissonian random digraphs.
//!
//! Given an i.i.d. sequence of vertex weights `(w_in, w_out)`, the digraph on
//! `N` vertices carries, for every ordered pair `(v, w)` including `v = w`, an
//! independent `Poisson(w_out[v] * w_in[w] / L_N)` number of arcs. This crate
//! samples such graphs (directly, through the N -> N+1 thinning process, and
//! through the oriented Norros-Reittu constructions), computes degrees and
//! component structure, and evaluates the branching-process predictions for
//! giant component fractions.
//!
//! Vertices are 0-based in the API and 1-based in edge-list files.

pub mod analysis;
pub mod checks;
pub mod cli;
pub mod edgelist;
pub mod error;
pub mod graph;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
pub use graph::{ComponentSummary, DegreeVector, MultiDigraph, Partition};
pub use weights::{Marginal, NormalizerMode, WeightModel, WeightPair, WeightSequence};
