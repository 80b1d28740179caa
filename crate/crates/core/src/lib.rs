//! Support-aware stochastic local search for random 3-SAT, exact reference
//! solvers, formula generators and concept statistics over GNN embedding
//! trajectories.

pub mod cnf;
pub mod compare;
pub mod concepts;
pub mod embed;
pub mod error;
pub mod exact;
pub mod gen;
mod pool;
pub mod search;

pub use cnf::{Assignment, CnfFormula, Literal, SupportState};
pub use embed::{EmbeddingTrajectory, Matrix};
pub use error::{
    CnfError, CompareError, ConceptError, EmbedError, ExactError, GenError, SearchError,
};
pub use pool::IndexedSet;
pub use search::{Policy, SolverConfig};
