//! Depth-first exploration of configuration-model random graphs.
//!
//! The crate builds a uniform configuration-model multigraph *while* running a
//! depth-first search on it, and compares the resulting contour process, ladder
//! times and degree statistics of the unexplored part of the graph against
//! their deterministic large-graph limits.
//!
//! Layout:
//!
//! * [`degree`]: degree distributions and concrete degree sequences.
//! * [`graph`]: the construct-while-exploring DFS, ladder times and
//!   half-edge classification.
//! * [`genfun`]: generating-function numerics: survival probability,
//!   giant-component fraction, critical exploration fraction, the evolving
//!   degree law and the limiting contour profile.
//! * [`ode`]: drift functions and the fluid-limit differential systems.
//! * [`harness`]: replicated experiments and comparison reports.

pub mod degree;
pub mod error;
pub mod genfun;
pub mod graph;
pub mod harness;
pub mod io;
pub mod ode;

pub use error::{Error, Result};
