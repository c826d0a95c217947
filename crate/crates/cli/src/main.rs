use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use skysim_core::harness::{
    load_config, preset, run_experiment, write_ccdf, write_kpi_table, write_optimizer_report, ExperimentSpec, Format,
    OutputKind, Sweep, SweepParam, PRESET_NAMES,
};
use skysim_core::optimizer::Selection;
use skysim_core::{ConfigError, Error, FieldIssue};

const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(
    name = "skysim",
    version,
    about = "Reliability, latency and availability of multi-connectivity C2 links for aerial vehicles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (JSON; `-` reads stdin).
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a config over one swept parameter.
    Sweep {
        config: PathBuf,
        /// data_rate, bandwidth_rbs, comp_cluster_size, p_interf or band.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        values: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Select the best multi-connectivity path under QoS thresholds.
    Optimize {
        config: PathBuf,
        /// Loss threshold (1 - reliability).
        #[arg(long)]
        eps_th: Option<f64>,
        /// Delay threshold, seconds.
        #[arg(long)]
        d_th: Option<f64>,
        /// Availability threshold.
        #[arg(long)]
        p_th: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in figure preset.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples_outer: Option<u64>,
    #[arg(long)]
    samples_inner: Option<u64>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "jsonl"])]
    format: String,
    /// Output file; further tables go next to it. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
}

enum Failure {
    Config(String),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn config_error(field: &str, reason: impl Into<String>) -> Failure {
    Failure::Config(ConfigError::Validation(vec![FieldIssue::new(field, reason)]).to_string())
}

fn read_spec(path: &Path) -> Result<ExperimentSpec, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading config from stdin")?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
    };
    Ok(load_config(&text)?)
}

fn apply_common(spec: &mut ExperimentSpec, c: &Common) {
    if let Some(s) = c.seed {
        spec.master_seed = s;
    }
    if let Some(n) = c.samples_outer {
        spec.n_outer_drops = n;
    }
    if let Some(n) = c.samples_inner {
        spec.n_inner_packets = n;
    }
}

/// Sibling file for an extra table: `out.csv` -> `out.ccdf.csv`.
fn sibling(out: &Path, table: &str, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{table}.{}", format.extension()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("skysim: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("skysim: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    let (mut spec, common, optimize) = match cli.command {
        Command::Run { config, common } => (read_spec(&config)?, common, false),
        Command::Sweep { config, param, values, common } => {
            let mut spec = read_spec(&config)?;
            let p = SweepParam::parse(&param)
                .ok_or_else(|| config_error("--param", format!("unknown parameter {param:?}")))?;
            let values = values
                .iter()
                .map(|v| p.parse_value(v).ok_or_else(|| config_error("--values", format!("bad value {v:?} for {p}"))))
                .collect::<Result<Vec<_>, _>>()?;
            spec.sweeps.retain(|s| s.param != p);
            spec.sweeps.push(Sweep { param: p, values });
            (spec, common, false)
        }
        Command::Optimize { config, eps_th, d_th, p_th, common } => {
            let mut spec = read_spec(&config)?;
            if let Some(e) = eps_th {
                spec.scenario.eps_th = e;
            }
            if let Some(d) = d_th {
                spec.scenario.d_th_s = d;
            }
            if let Some(p) = p_th {
                spec.p_th = p;
            }
            if !spec.outputs.contains(&OutputKind::OptimizerReport) {
                spec.outputs.push(OutputKind::OptimizerReport);
            }
            (spec, common, true)
        }
        Command::Preset { name, common } => (preset(&name).expect("validated by clap"), common, false),
    };
    apply_common(&mut spec, &common);
    if common.workers == Some(0) {
        return Err(config_error("--workers", "must be at least 1"));
    }
    let issues = spec.validate();
    if !issues.is_empty() {
        return Err(Error::from(ConfigError::Validation(issues)).into());
    }
    let format = Format::parse(&common.format).expect("validated by clap");
    let points = spec.points().len();
    eprintln!("skysim: {points} sweep point(s) x {} drops x {} packets", spec.n_outer_drops, spec.n_inner_packets);
    let result = run_experiment(&spec, common.workers)?;
    if result.singular_comp_events > 0 {
        eprintln!("skysim: {} singular CoMP channel(s) served as outage", result.singular_comp_events);
    }

    let params: Vec<SweepParam> = spec.sweeps.iter().map(|s| s.param).collect();
    let write = |w: &mut dyn Write, kind: OutputKind| -> Result<(), Error> {
        let mut w = w;
        match kind {
            OutputKind::KpiTable => write_kpi_table(&mut w, format, &params, &result.rows),
            OutputKind::Ccdf => write_ccdf(&mut w, format, &params, &result.rows),
            OutputKind::OptimizerReport => write_optimizer_report(&mut w, format, &params, &result.optimizer),
        }
    };
    match &common.out {
        Some(out) => {
            for (i, kind) in spec.outputs.iter().enumerate() {
                let path = if i == 0 {
                    out.clone()
                } else {
                    let table = match kind {
                        OutputKind::KpiTable => "kpi",
                        OutputKind::Ccdf => "ccdf",
                        OutputKind::OptimizerReport => "optimizer",
                    };
                    sibling(out, table, format)
                };
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                write(&mut w, *kind)?;
                w.flush().with_context(|| format!("writing {}", path.display()))?;
                eprintln!("skysim: wrote {}", path.display());
            }
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            for (i, kind) in spec.outputs.iter().enumerate() {
                if i > 0 && format == Format::Csv {
                    writeln!(w).context("writing stdout")?;
                }
                write(&mut w, *kind)?;
            }
            w.flush().context("writing stdout")?;
        }
    }

    if optimize {
        for pt in &result.optimizer {
            let coords: Vec<String> = pt.coords.iter().map(|(p, v)| format!("{p}={v}")).collect();
            let at = if coords.is_empty() { String::new() } else { format!(" at {}", coords.join(", ")) };
            match &pt.selection {
                Selection::Selected { path, se_mean } => {
                    eprintln!("skysim: best path{at}: {path} (SE {se_mean:.4} bit/s/Hz)")
                }
                Selection::Infeasible => eprintln!("skysim: no feasible path{at}"),
            }
        }
        if !result.all_feasible() {
            return Ok(EXIT_INFEASIBLE);
        }
    }
    Ok(0)
}
