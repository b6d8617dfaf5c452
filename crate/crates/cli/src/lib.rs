//! Experiment runner for the `coupon-discovery` model: JSON experiment
//! configs, analytic / Monte Carlo / sweep / fit commands, CSV tables and
//! SVG line plots.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod svg;
pub mod table;

pub use commands::{run_analytic, run_fit, run_simulate, run_sweep, FitReport};
pub use error::{CliError, Result};
pub use experiment::{Experiment, ExperimentSpec};
pub use svg::{emit_svg, PlotStyle};
pub use table::{Cell, Table};
