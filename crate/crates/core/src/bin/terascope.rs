use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use terascope::config::{env_seed, format_float, parse_config_with_seed, ConfigParams, ExperimentSpec};
use terascope::coverage::coverage;
use terascope::experiment::{emit_csv, preset, run_experiment, PRESETS};
use terascope::validation::{run_all, ValidationOptions};
use terascope::{BlockageCoupling, Error, Mode, Result, Simulator};

/// Coverage of 3D terahertz downlinks: closed-form analysis and Monte Carlo.
#[derive(Parser, Debug)]
#[command(name = "terascope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed; overrides the config and TERASCOPE_SEED.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Monte Carlo trials per point.
    #[arg(long, global = true, value_name = "N")]
    trials: Option<u64>,

    /// Output file (a directory when several experiments are written).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form coverage at one or more link distances.
    Analytic(PointArgs),
    /// Monte Carlo coverage estimates at one or more link distances.
    Simulate {
        #[command(flatten)]
        point: PointArgs,
        /// Modes to estimate (full, interference-only, blockage-only, dominant-only).
        #[arg(long = "mode", value_name = "MODE")]
        modes: Vec<String>,
        /// Blockage correlation between links (independent or shared).
        #[arg(long, default_value = "independent")]
        blockage_field: String,
    },
    /// Runs the experiments of `--config` or a built-in preset and writes CSV.
    Experiment {
        /// Built-in experiment: fig5, fig6 or fig7.
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
    },
    /// Runs the acceptance suite.
    Validate,
}

#[derive(Args, Debug)]
struct PointArgs {
    /// Horizontal UE-AP distance in metres (repeatable).
    #[arg(long = "x0", value_name = "M", default_values_t = [5.0])]
    x0: Vec<f64>,
    /// Parameter override such as `tau_dB=10` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Experiment table of `--config` to take parameters from (default: the first).
    #[arg(long)]
    experiment: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Analytic(point) => analytic(cli, point),
        Command::Simulate { point, modes, blockage_field } => simulate(cli, point, modes, blockage_field),
        Command::Experiment { preset } => experiment(cli, preset.as_deref()),
        Command::Validate => validate(cli),
    }
}

fn default_seed() -> Result<u64> {
    env_seed()
}

fn load_specs(cli: &Cli) -> Result<Option<Vec<ExperimentSpec>>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let text = fs::read_to_string(path)?;
    let mut specs = parse_config_with_seed(&text, default_seed()?)?;
    for spec in &mut specs {
        if let Some(seed) = cli.seed {
            spec.base_seed = seed;
        }
        if let Some(n) = cli.trials {
            spec.n_trials = n;
        }
    }
    Ok(Some(specs))
}

fn point_params(cli: &Cli, point: &PointArgs) -> Result<(ConfigParams, u64)> {
    let (mut params, mut seed) = (ConfigParams::default(), cli.seed.map_or_else(default_seed, Ok)?);
    if let Some(specs) = load_specs(cli)? {
        let spec = match &point.experiment {
            Some(name) => specs
                .iter()
                .find(|s| &s.name == name)
                .ok_or_else(|| Error::Parse(format!("no experiment `{name}` in config")))?,
            None => &specs[0],
        };
        params = spec.params;
        seed = spec.base_seed;
    }
    for kv in &point.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("override `{kv}` is not KEY=VALUE")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("override `{kv}` has a non-numeric value")))?;
        if !params.set(key.trim(), value) {
            return Err(Error::Parse(format!("unknown parameter `{}`", key.trim())));
        }
    }
    Ok((params, seed))
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn analytic(cli: &Cli, point: &PointArgs) -> Result<bool> {
    let (config, _) = point_params(cli, point)?;
    let params = config.to_system_params()?;
    let rt = params.max_association_radius().map_or(f64::NAN, |r| r);
    let mut out = output(cli)?;
    writeln!(out, "x0,p_c,p_cL,p_L,lambda,dominant_radius,association_radius,infeasible,outside_rt")?;
    for &x0 in &point.x0 {
        let r = coverage(&params, x0)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_float(x0),
            format_float(r.p_c),
            format_float(r.p_cl),
            format_float(r.p_l),
            format_float(r.lambda),
            r.dominant_radius.map_or_else(String::new, format_float),
            format_float(rt),
            u8::from(r.snr_infeasible),
            u8::from(r.outside_association),
        )?;
    }
    out.flush()?;
    Ok(true)
}

fn simulate(cli: &Cli, point: &PointArgs, modes: &[String], field: &str) -> Result<bool> {
    let (config, seed) = point_params(cli, point)?;
    let params = config.to_system_params()?;
    let modes: Vec<Mode> = if modes.is_empty() {
        Mode::ALL.to_vec()
    } else {
        modes.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    let coupling: BlockageCoupling = field.parse()?;
    let n = cli.trials.unwrap_or(terascope::config::DEFAULT_TRIALS);
    let sim = Simulator::new(params)?.with_coupling(coupling);
    let mut out = output(cli)?;
    writeln!(out, "x0,mode,p,half_width_95,n_trials,seed")?;
    for &x0 in &point.x0 {
        for e in sim.estimate_modes(x0, n, &modes, seed, false) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                format_float(x0),
                e.mode,
                format_float(e.value),
                format_float(e.half_width_95),
                e.n_trials,
                e.seed
            )?;
        }
    }
    out.flush()?;
    Ok(true)
}

fn experiment(cli: &Cli, preset_name: Option<&str>) -> Result<bool> {
    let specs = match (preset_name, load_specs(cli)?) {
        (Some(name), _) => {
            let mut specs = preset(name, cli.seed.map_or_else(default_seed, Ok)?)?;
            for s in &mut specs {
                if let Some(n) = cli.trials {
                    s.n_trials = n;
                }
            }
            specs
        }
        (None, Some(specs)) => specs,
        (None, None) => {
            return Err(Error::Parse(format!(
                "give --config PATH or --preset NAME ({})",
                PRESETS.join(", ")
            )))
        }
    };
    match (&cli.out, specs.len()) {
        (Some(path), 1) => write_curve(&specs[0], &mut fs::File::create(path)?, Some(path)),
        (Some(dir), _) => {
            fs::create_dir_all(dir)?;
            for spec in &specs {
                let path = dir.join(format!("{}.csv", spec.name));
                write_curve(spec, &mut fs::File::create(&path)?, Some(&path))?;
            }
            Ok(true)
        }
        (None, _) => {
            let mut stdout = io::stdout().lock();
            for spec in &specs {
                write_curve(spec, &mut stdout, None)?;
            }
            Ok(true)
        }
    }
}

fn write_curve(spec: &ExperimentSpec, out: &mut dyn Write, path: Option<&Path>) -> Result<bool> {
    let curve = run_experiment(spec)?;
    let bytes = emit_csv(&curve, out)?;
    out.flush()?;
    if let Some(path) = path {
        eprintln!("{}: {} rows, {bytes} bytes -> {}", spec.name, curve.rows.len(), path.display());
    }
    Ok(true)
}

fn validate(cli: &Cli) -> Result<bool> {
    let mut opts = ValidationOptions {
        seed: cli.seed.map_or_else(default_seed, Ok)?,
        ..ValidationOptions::default()
    };
    if let Some(n) = cli.trials {
        opts.n_trials = n;
    }
    let reports = run_all(&opts);
    let mut out = output(cli)?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} criteria passed", reports.len())?;
    out.flush()?;
    Ok(passed == reports.len())
}
