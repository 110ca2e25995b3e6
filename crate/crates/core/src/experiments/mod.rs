//! Experiment configuration and the subcommands of the `zero-one` binary.

mod commands;
mod config;

pub use commands::{
    cmd_exact, cmd_index, cmd_mixing, cmd_sample, cmd_sweep, index_text, monotonicity,
    render_sweep, run_mixing, run_sweep, sentence_hash, threshold_diagnostic, trend,
    Monotonicity, Overrides, SweepResult, SweepRow, Trend, TREND_BANDS,
};
pub use config::{
    ExperimentConfig, MethodChoice, MixingSection, ModelSection, Purpose, RunSection,
    SampleSection, ScheduleSection, SentenceSection, TorusSection,
};
