//! The four table-producing commands.

use coupon_discovery::{
    expected_quality, expected_size, fit_growth, implied_model_parameters, simulate_ensemble_with_workers, GrowthFit,
    ImpliedParameters, ModelKind, SimulationConfig, TrajectoryStats,
};

use crate::error::{CliError, Result};
use crate::experiment::{Experiment, ExperimentSpec, DEFAULT_RUNS};
use crate::table::{Cell, Table};

/// Expected size, fraction and (with a quality vector) quality for
/// `t = 0..=T`. A sweep produces one column group per value, named
/// `expected_size[r=0.1]` and so on, over a common horizon.
pub fn run_analytic(spec: &ExperimentSpec) -> Result<Table> {
    match spec.sweep()? {
        None => {
            let exp = spec.resolve()?;
            let horizon = exp.horizon();
            let curves = AnalyticCurves::compute(&exp, horizon)?;
            let mut columns = vec!["t", "expected_size", "expected_fraction"];
            if curves.quality.is_some() {
                columns.push("expected_quality");
            }
            let mut table = Table::new(columns);
            for t in 0..=horizon as usize {
                let mut row = vec![Cell::Num(t as f64)];
                curves.push_row(&mut row, t);
                table.push(row);
            }
            Ok(table)
        }
        Some(sweep) => {
            let (experiments, horizon) = sweep_experiments(spec)?;
            let mut columns = vec!["t".to_owned()];
            let mut groups = Vec::new();
            for (value, exp) in sweep.values.iter().zip(&experiments) {
                let curves = AnalyticCurves::compute(exp, horizon)?;
                let tag = format!("[{}={value}]", sweep.name.name());
                columns.push(format!("expected_size{tag}"));
                columns.push(format!("expected_fraction{tag}"));
                if curves.quality.is_some() {
                    columns.push(format!("expected_quality{tag}"));
                }
                groups.push(curves);
            }
            let mut table = Table::new(columns);
            for t in 0..=horizon as usize {
                let mut row = vec![Cell::Num(t as f64)];
                for curves in &groups {
                    curves.push_row(&mut row, t);
                }
                table.push(row);
            }
            Ok(table)
        }
    }
}

/// Monte Carlo mean and standard error next to the analytic curve.
/// Uses `n_runs` from the config, [`DEFAULT_RUNS`] when absent.
pub fn run_simulate(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Table> {
    if spec.sweep.is_some() {
        return Err(CliError::spec(
            "sweep",
            "`simulate` does not sweep; use the `sweep` command",
        ));
    }
    let exp = spec.resolve()?;
    let horizon = exp.horizon();
    let n_runs = exp.n_runs.unwrap_or(DEFAULT_RUNS);
    let stats = simulate(&exp, horizon, n_runs, workers)?;
    let analytic = AnalyticCurves::compute(&exp, horizon)?;

    let mut columns = vec!["t", "mc_mean_size", "mc_stderr_size", "analytic_size"];
    if analytic.quality.is_some() {
        columns.extend(["mc_mean_quality", "mc_stderr_quality", "analytic_quality"]);
    }
    let mut table = Table::new(columns);
    for t in 0..=horizon as usize {
        let mut row = vec![
            Cell::Num(t as f64),
            Cell::Num(stats.mean_size[t]),
            Cell::Num(stats.stderr_size[t]),
            Cell::Num(analytic.size[t]),
        ];
        if let (Some(mean), Some(se), Some(q)) = (&stats.mean_quality, &stats.stderr_quality, &analytic.quality) {
            row.extend([Cell::Num(mean[t]), Cell::Num(se[t]), Cell::Num(q[t])]);
        }
        table.push(row);
    }
    Ok(table)
}

/// Long-format sweep: one row per (sweep value, t). Monte Carlo columns are
/// added only when the config sets `n_runs`; every sweep value uses the same
/// master seed.
pub fn run_sweep(spec: &ExperimentSpec, workers: Option<usize>) -> Result<Table> {
    let sweep = spec
        .sweep()?
        .ok_or_else(|| CliError::spec("sweep", "the `sweep` command needs a sweep"))?;
    let (experiments, horizon) = sweep_experiments(spec)?;
    let with_quality = experiments[0].quality.is_some();
    let with_mc = spec.n_runs.is_some();

    let mut columns = vec!["sweep_name", "sweep_value", "t", "analytic_size", "analytic_fraction"];
    if with_quality {
        columns.push("analytic_quality");
    }
    if with_mc {
        columns.extend(["mc_mean_size", "mc_stderr_size"]);
        if with_quality {
            columns.extend(["mc_mean_quality", "mc_stderr_quality"]);
        }
    }
    let mut table = Table::new(columns);
    for (&value, exp) in sweep.values.iter().zip(&experiments) {
        let curves = AnalyticCurves::compute(exp, horizon)?;
        let stats = match exp.n_runs {
            Some(n) => Some(simulate(exp, horizon, n, workers)?),
            None => None,
        };
        for t in 0..=horizon as usize {
            let mut row = vec![
                Cell::Text(sweep.name.name().to_owned()),
                Cell::Num(value),
                Cell::Num(t as f64),
            ];
            curves.push_row(&mut row, t);
            if let Some(stats) = &stats {
                row.extend([Cell::Num(stats.mean_size[t]), Cell::Num(stats.stderr_size[t])]);
                if let (Some(mean), Some(se)) = (&stats.mean_quality, &stats.stderr_quality) {
                    row.extend([Cell::Num(mean[t]), Cell::Num(se[t])]);
                }
            }
            table.push(row);
        }
    }
    Ok(table)
}

/// Result of fitting a growth curve to a CSV series.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub fit: GrowthFit,
    pub implied: Option<ImpliedParameters>,
}

impl FitReport {
    /// Human-readable `name: value` lines.
    pub fn render(&self) -> String {
        let f = &self.fit;
        let mut out = format!(
            "model: {}\nK: {}\nA: {}\nr0: {}\nrmse: {:e}\nconverged: {}\niterations: {}\n",
            f.kind.name(),
            f.capacity,
            f.amplitude,
            f.rate,
            f.rmse,
            f.converged,
            f.iterations
        );
        if let Some(imp) = &self.implied {
            out += &format!("M_est: {}\nrho0_est: {}\n", imp.m_est, imp.rho0_est);
            if imp.rho0_clamped {
                out += "warning: rho0_est clamped to [0, 1]\n";
            }
        }
        if f.non_monotone_input {
            out += "warning: input series is not monotone\n";
        }
        out
    }

    /// One-row table with the same fields as [`FitReport::render`].
    pub fn to_table(&self) -> Table {
        let f = &self.fit;
        let mut columns = vec!["model", "K", "A", "r0", "rmse", "converged", "iterations"];
        let mut row = vec![
            Cell::Text(f.kind.name().to_owned()),
            Cell::Num(f.capacity),
            Cell::Num(f.amplitude),
            Cell::Num(f.rate),
            Cell::Num(f.rmse),
            Cell::Text(f.converged.to_string()),
            Cell::Num(f.iterations as f64),
        ];
        if let Some(imp) = &self.implied {
            columns.extend(["M_est", "rho0_est"]);
            row.extend([Cell::Num(imp.m_est), Cell::Num(imp.rho0_est)]);
        }
        let mut table = Table::new(columns);
        table.push(row);
        table
    }

    pub fn ensure_converged(&self) -> Result<()> {
        if self.fit.converged {
            Ok(())
        } else {
            Err(CliError::NonConvergence {
                iterations: self.fit.iterations,
                rmse: self.fit.rmse,
            })
        }
    }
}

/// Fits `kind` to the `(t, column)` series of `table`. A non-converged fit
/// is still returned; see [`FitReport::ensure_converged`].
pub fn run_fit(
    table: &Table,
    source: &str,
    kind: ModelKind,
    capacity_hint: Option<f64>,
    column: &str,
) -> Result<FitReport> {
    let series = series(table, source, column)?;
    let fit = fit_growth(&series, kind, capacity_hint)?;
    let implied = match kind {
        ModelKind::SaturatingExponential if fit.rate > 0.0 => Some(implied_model_parameters(&fit)?),
        _ => None,
    };
    Ok(FitReport { fit, implied })
}

fn series(table: &Table, source: &str, column: &str) -> Result<Vec<(f64, f64)>> {
    let ti = table.column_index("t").ok_or_else(|| CliError::Parse {
        file: source.to_owned(),
        line: 1,
        message: "missing `t` column".into(),
    })?;
    let vi = table.column_index(column).ok_or_else(|| CliError::Parse {
        file: source.to_owned(),
        line: 1,
        message: format!("missing `{column}` column"),
    })?;
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| match (row[ti].as_f64(), row[vi].as_f64()) {
            (Some(t), Some(v)) => Ok((t, v)),
            _ => Err(CliError::Parse {
                file: source.to_owned(),
                line: i as u64 + 2,
                message: "non-numeric `t` or value".into(),
            }),
        })
        .collect()
}

struct AnalyticCurves {
    m: f64,
    size: Vec<f64>,
    quality: Option<Vec<f64>>,
}

impl AnalyticCurves {
    fn compute(exp: &Experiment, horizon: u64) -> Result<Self> {
        let size = expected_size(&exp.p_tilde, &exp.initial, horizon)?.into_values();
        let quality = match &exp.quality {
            Some(q) => Some(expected_quality(&exp.p_tilde, q, &exp.initial, horizon)?.into_values()),
            None => None,
        };
        Ok(AnalyticCurves {
            m: exp.universe.size() as f64,
            size,
            quality,
        })
    }

    fn push_row(&self, row: &mut Vec<Cell>, t: usize) {
        row.push(Cell::Num(self.size[t]));
        row.push(Cell::Num(self.size[t] / self.m));
        if let Some(q) = &self.quality {
            row.push(Cell::Num(q[t]));
        }
    }
}

/// Resolved experiments for each sweep value and their common horizon: the
/// configured one, or the largest default.
fn sweep_experiments(spec: &ExperimentSpec) -> Result<(Vec<Experiment>, u64)> {
    let sweep = spec.sweep()?.expect("caller checked");
    let experiments = sweep
        .values
        .iter()
        .map(|&v| spec.with_sweep_value(sweep.name, v)?.resolve())
        .collect::<Result<Vec<_>>>()?;
    let horizon = match spec.horizon {
        Some(h) => h,
        None => experiments.iter().map(Experiment::horizon).max().unwrap_or(0),
    };
    Ok((experiments, horizon))
}

fn simulate(exp: &Experiment, horizon: u64, n_runs: u64, workers: Option<usize>) -> Result<TrajectoryStats> {
    let config = SimulationConfig {
        prior: exp.prior.clone(),
        channel: exp.channel.clone(),
        initial: exp.initial.clone(),
        quality: exp.quality.clone(),
        horizon,
        n_runs,
        master_seed: exp.seed,
    };
    Ok(simulate_ensemble_with_workers(&config, workers)?)
}
