//! The stochastic six-vertex model: path ensembles, the offset particle
//! system (direct and graph-driven), and exact enumeration of short runs.

pub mod ensemble;
pub mod exact;
pub mod offset;

pub use ensemble::{sample_path_ensemble, sweep_vertices, PathEnsemble, Vertex};
pub use exact::{one_step_kernel, trajectory_key, trajectory_law, Dynamics, TrajectoryKey};
pub use offset::{
    advance_offset_direct, advance_offset_graph, evolve_offset_direct, evolve_offset_graph, step_direct, step_graph, step_graph_events, try_jump,
    write_offset_rows, GraphInstructions, JumpChoices, JumpInstructions, OffsetState, OFFSET_HEADER,
};
