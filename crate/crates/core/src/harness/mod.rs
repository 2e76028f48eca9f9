//! Experiment harness: configuration, seeded parallel runs, CSV records and
//! SVG plots.

pub mod config;
pub mod plot;
pub mod record;
pub mod run;

pub use config::{Experiment, ExperimentConfig, RawConfig};
pub use plot::{emit_plots, PlotKind};
pub use record::{read_records, write_records, ExperimentRecord};
pub use run::{
    run_clique_sweep, run_embed_dump, run_experiment, run_pq_grid, run_vary_pbar,
};
