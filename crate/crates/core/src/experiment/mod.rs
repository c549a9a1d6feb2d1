//! The four-condition experiment: RawInit, RawFin, StanInit and StanFin,
//! each trained, encoded on three corpora, and scored.

mod config;
mod render;
mod run;

pub use config::{Condition, CorpusId, ExperimentConfig};
pub use render::{render_table, MISSING};
pub use run::{
    run_experiment, trends, ConditionReport, Conventions, ReportBundle, TrendRow, TABLE_HEADER,
};
