//! Scenario files, deterministic batch runs and their exports.

pub mod export;
pub mod run;
pub mod scenario;
pub mod selftest;

pub use export::{export, parse, summarize, RunExports, SAMPLING_NOTE};
pub use run::{draw_samples, run_scenario, Aggregates, RunResult, SampleRow, ScaleHistogram, CENTER_CLEARANCE};
pub use scenario::{
    cantor_midpoints, generate_centers, CenterSpec, MapSpec, RunSpec, Sampler, ScenarioSpec, ScheduleFamily,
    ScheduleOverride, ScheduleSpec,
};
pub use selftest::{selftest, Check};
