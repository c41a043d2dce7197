//! Hamiltonian l-cycles in randomly perturbed k-uniform hypergraphs.
//!
//! The crate builds a spanning l-cycle in `H ∪ G`, where `H` is a dense
//! k-graph and `G` a binomial random k-graph, using the absorbing method:
//! shave low-degree l-sets, build connector and absorber libraries, cover
//! the remaining vertices by long l-paths, join everything into a cycle and
//! absorb the leftover vertices. Exact backtracking oracles, probabilistic
//! bound evaluators and Monte Carlo sweep helpers sit alongside.

// float checks are written as `!(x > 0.0)` on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments, clippy::type_complexity)]

pub mod absorb;
pub mod bounds;
pub mod connect;
pub mod cover;
pub mod error;
pub mod hypergraph;
pub mod io;
pub mod oracle;
pub mod pattern;
pub mod pipeline;
pub mod random;
pub(crate) mod search;
pub mod shave;
pub mod sweep;

pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, SetFamily, Vertex};
pub use pattern::{CycleWitness, OrderedTuple, PathPattern};
