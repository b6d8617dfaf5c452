use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coupon_discovery::ModelKind;
use discovery_cli::experiment::{ChannelSpec, OutputSpec, PriorSpec, QualityPreset, QualitySpec};
use discovery_cli::{
    emit_svg, run_analytic, run_fit, run_simulate, run_sweep, CliError, ExperimentSpec, PlotStyle, Result, Table,
};

/// Coupon-collector model of technology-aided discovery.
#[derive(Debug, Parser)]
#[command(name = "discovery", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON experiment file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for Monte Carlo runs
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (CSV, or SVG for `plot`); stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write an SVG plot here
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Universe size M
    #[arg(long = "m", global = true)]
    m: Option<usize>,
    /// Horizon T
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Number of Monte Carlo runs
    #[arg(long, global = true)]
    runs: Option<u64>,
    /// Initial set, comma-separated 1-based indices
    #[arg(long, global = true, value_delimiter = ',')]
    initial: Option<Vec<usize>>,
    /// Initial fraction rho0 (first rho0*M elements)
    #[arg(long, global = true)]
    rho0: Option<f64>,
    /// Binomial prior parameter p
    #[arg(long, global = true)]
    binomial_p: Option<f64>,
    /// Symmetric channel crossover r
    #[arg(long, global = true)]
    symmetric_r: Option<f64>,
    /// Quality preset: aligned or anti_aligned
    #[arg(long, global = true)]
    quality: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form expected size, fraction and quality
    Analytic,
    /// Monte Carlo estimate next to the closed form
    Simulate,
    /// Single-parameter sweep in long format
    Sweep,
    /// Fit a growth curve to a CSV series
    Fit {
        /// CSV with a `t` column and a value column
        input: PathBuf,
        /// logistic or saturating_exponential
        #[arg(long, default_value = "saturating_exponential")]
        model: ModelKind,
        /// Initial capacity guess
        #[arg(long)]
        capacity_hint: Option<f64>,
        /// Value column
        #[arg(long, default_value = "value")]
        column: String,
    },
    /// Render a CSV table as an SVG line plot
    Plot {
        input: PathBuf,
        /// Plot only these columns
        #[arg(long, value_delimiter = ',')]
        column: Option<Vec<String>>,
        #[arg(long)]
        title: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Analytic => {
            let spec = load_spec(g)?;
            emit(&run_analytic(&spec)?, &spec, g)
        }
        Command::Simulate => {
            let spec = load_spec(g)?;
            emit(&run_simulate(&spec, g.workers)?, &spec, g)
        }
        Command::Sweep => {
            let spec = load_spec(g)?;
            emit(&run_sweep(&spec, g.workers)?, &spec, g)
        }
        Command::Fit {
            input,
            model,
            capacity_hint,
            column,
        } => {
            let table = Table::read_csv_file(input)?;
            let report = run_fit(&table, &input.display().to_string(), *model, *capacity_hint, column)?;
            print!("{}", report.render());
            if let Some(out) = &g.out {
                report.to_table().write_csv_file(out)?;
            }
            report.ensure_converged()
        }
        Command::Plot { input, column, title } => {
            let mut table = Table::read_csv_file(input)?;
            if let Some(keep) = column {
                table = select(&table, keep)?;
            }
            let style = PlotStyle {
                title: title.clone(),
                ..PlotStyle::default()
            };
            let svg = emit_svg(&table, &style)?;
            match g.svg.as_ref().or(g.out.as_ref()) {
                Some(path) => write_file(path, svg.as_bytes()),
                None => write_stdout(svg.as_bytes()),
            }
        }
    }
}

/// Config file (if any) with command-line overrides applied.
fn load_spec(g: &GlobalArgs) -> Result<ExperimentSpec> {
    let mut spec = match (&g.config, g.m) {
        (Some(path), _) => ExperimentSpec::from_file(path)?,
        (None, Some(m)) => ExperimentSpec::new(m),
        (None, None) => return Err(CliError::spec("M", "give --config or --m")),
    };
    if let Some(m) = g.m {
        spec.m = m;
    }
    if let Some(h) = g.horizon {
        spec.horizon = Some(h);
    }
    if let Some(n) = g.runs {
        spec.n_runs = Some(n);
    }
    if let Some(seed) = g.seed {
        spec.seed = Some(seed);
    }
    if let Some(initial) = &g.initial {
        spec.initial_set = Some(initial.clone());
        spec.rho0 = None;
    }
    if let Some(rho0) = g.rho0 {
        spec.rho0 = Some(rho0);
        spec.initial_set = None;
    }
    if let Some(p) = g.binomial_p {
        spec.prior = PriorSpec::Binomial { p };
    }
    if let Some(r) = g.symmetric_r {
        spec.channel = ChannelSpec::Symmetric { r };
    }
    if let Some(q) = &g.quality {
        let preset = match q.as_str() {
            "aligned" => QualityPreset::Aligned,
            "anti_aligned" | "anti-aligned" => QualityPreset::AntiAligned,
            other => return Err(CliError::spec("quality", format!("unknown preset `{other}`"))),
        };
        spec.quality = Some(QualitySpec::Preset(preset));
    }
    Ok(spec)
}

/// Writes the table to `--out` / `--svg`, or to the config's outputs, or to
/// stdout.
fn emit(table: &Table, spec: &ExperimentSpec, g: &GlobalArgs) -> Result<()> {
    let targets = if g.out.is_some() || g.svg.is_some() {
        vec![OutputSpec {
            csv: g.out.clone(),
            svg: g.svg.clone(),
        }]
    } else {
        spec.outputs.clone()
    };
    if targets.iter().all(|o| o.csv.is_none()) {
        write_stdout(table.to_csv_string().as_bytes())?;
    }
    for target in &targets {
        if let Some(path) = &target.csv {
            table.write_csv_file(path)?;
        }
        if let Some(path) = &target.svg {
            let svg = emit_svg(table, &PlotStyle::default())?;
            write_file(path, svg.as_bytes())?;
        }
    }
    Ok(())
}

fn select(table: &Table, keep: &[String]) -> Result<Table> {
    let mut names = vec!["t".to_owned()];
    names.extend(keep.iter().filter(|c| c.as_str() != "t").cloned());
    let idx = names
        .iter()
        .map(|c| {
            table
                .column_index(c)
                .ok_or_else(|| CliError::spec("column", format!("no column `{c}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Table::new(names);
    for row in &table.rows {
        out.push(idx.iter().map(|&i| row[i].clone()).collect());
    }
    Ok(out)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn write_stdout(bytes: &[u8]) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("<stdout>", e))
}
