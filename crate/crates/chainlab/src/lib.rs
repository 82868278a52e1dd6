//! Declarative experiment runner over `chainlab-core`: a line-oriented
//! spec format declaring algebras and probes, a deterministic runner,
//! and bit-stable plain-text reports.

pub mod builder;
pub mod report;
pub mod runner;
pub mod spec;

pub use report::{render_report, strip_timing, Report};
pub use runner::run_spec;
pub use spec::{parse_spec, render_spec, ExperimentSpec};
