//! File formats, run configuration and the command pipeline.

pub mod commands;
pub mod config;
pub mod io;

pub use commands::{
    cmd_analyze, cmd_certify, cmd_contour, cmd_hedge, cmd_keyrate, cmd_simulate, AnalysisRecord,
    ContourRecord, HedgeRecord, KeyRateRecord, RunRecord, SimulationRecord,
};
pub use config::{ConfigFile, OrderingPolicy, RunConfig, Source};
pub use io::{load_contour, load_joint, save_contour, save_joint, JointFile};
