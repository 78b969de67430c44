//! Scenario runner, file formats and command line for [`timereg`].
//!
//! A scenario names an operator, data, α values and optional sweep, Monte
//! Carlo and coefficient checks. Running it writes `report.json`,
//! `moments.csv`, `sweep.csv`, `plot.csv`, `mc.csv`, optionally
//! `ensemble.bin`, and `timing.json` (wall-clock, kept out of the report so the
//! report is reproducible bit for bit).

pub mod cli;
pub mod engine;
pub mod ensemble_io;
pub mod fft;
pub mod montecarlo;
pub mod report;
pub mod scenario;
