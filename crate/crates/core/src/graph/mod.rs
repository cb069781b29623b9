//! Depth-first exploration of configuration-model multigraphs and the
//! statistics read off its contour.

mod classify;
mod explore;
mod ladder;

pub use classify::{classify_half_edges, HalfEdgeClasses};
pub use explore::{
    explore_and_build, longest_path_lower_bound, ContourTrace, DegreeLog, Explorer,
    InducedHistogram, Status, StepKind,
};
pub use ladder::{ladder_times, ladder_window};
