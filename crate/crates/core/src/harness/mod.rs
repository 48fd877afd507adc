//! Experiment orchestration: configuration, the lock-step round loop,
//! traces, plots and the lemma report.

mod check;
mod config;
mod plot;
mod run;
mod trace;

pub use check::{check_lemmas, LemmaCheck, LemmaCheckConfig, LemmaReport};
pub use config::{default_checkpoints, parse_config, Algorithm, Config, ConfigError};
pub use plot::{emit_plot, render_svg, summary_path, PlotError};
pub use run::{
    run_experiment, run_initialization, run_seed, run_sweep, Experiment, InitReport, RunResult, SteadyRounds,
};
pub use trace::{
    read_trace, write_trace, CheckpointSummary, ColumnStats, RunSummary, TraceError, TraceRow, CUMULATIVE_COLUMNS,
    TRACE_COLUMNS,
};
