//! Scenario files, closed-loop orchestration and result persistence.

mod plot;
mod run;
mod scenario;
mod sim;

pub use plot::frequency_plot_svg;
pub use run::{
    optimize, run_comparison, run_scenario, write_atomic, ComparisonArtifacts, Manifest,
    OptimizerLog, RunArtifacts,
};
pub use scenario::{
    Actuator, ControllerChoice, ControllerKind, FuzzyPdConfig, LoadEvent, PidAdaptiveConfig,
    RegulatorConfig, Scenario, SimulationConfig, SurrogateBlock, DEFAULT_FUZZY_GAINS, DEFAULT_PD,
};
pub use sim::{
    build_controller, command_limits, fuzzy_objective, simulate, simulate_trace, Divergence,
    LoopSummary, Objective, Sample,
};
