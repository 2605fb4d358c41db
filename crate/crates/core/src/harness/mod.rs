//! Experiment configuration and the command implementations behind the CLI.

mod commands;
mod config;

pub use commands::{
    cmd_asymptotics, cmd_estimate, cmd_figures, cmd_regime_check, cmd_simulate, figure_data, with_threads,
    AsymptoticsReport, CheckRow, EstimateOptions, FigureData, FIGURE_HEADER, LAPLACE_GAMMAS, SAMPLE_HEADER,
};
pub use config::{ExperimentConfig, ResponseSpec};
