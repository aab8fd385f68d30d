use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cvdistill::scenario::{
    self, DegradeMode, GainSpec, GainSweep, ModelKind, ScenarioConfig, PRESETS,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// Entanglement distillation by quantum catalysis: gain sweeps, homodyne
/// sampling and equivalent-state analysis.
#[derive(Parser)]
#[command(name = "cvdistill", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the selected model over the configured gains.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Draw position-quadrature samples of the distilled state.
    Sample {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Fit an equivalent lossy squeezed vacuum to each row of variances.
    Equiv {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// CSV with `g`, `v_diff` and `v_sum` columns; defaults to a model sweep.
        #[arg(long)]
        measured: Option<PathBuf>,
        /// Exit with status 3 if any row has no physical solution.
        #[arg(long)]
        strict: bool,
    },
    /// List bundled presets, or print one.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct OutputArgs {
    /// CSV output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report file with a config echo.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset name (see `cvdistill presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Loss channel on mode B with this intensity transmissivity.
    #[arg(long, conflicts_with = "theta")]
    tau2: Option<f64>,
    /// Pump polarization rotation in degrees.
    #[arg(long)]
    theta: Option<f64>,
    /// Single gain value; replaces any sweep.
    #[arg(long)]
    gain: Option<f64>,
    #[arg(long = "gain.min")]
    gain_min: Option<f64>,
    #[arg(long = "gain.max")]
    gain_max: Option<f64>,
    #[arg(long = "gain.steps")]
    gain_steps: Option<usize>,
    #[arg(long = "gain.log")]
    gain_log: Option<bool>,
    /// Ancilla single-photon efficiency.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "eta-a")]
    eta_a: Option<f64>,
    #[arg(long = "eta-b")]
    eta_b: Option<f64>,
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    /// ideal, single_photon or full_numeric.
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, String> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                ScenarioConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            (None, Some(name)) => ScenarioConfig::from_preset(name).map_err(|e| e.to_string())?,
            (None, None) => return Err("one of --config or --preset is required".into()),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(tau2) = self.tau2 {
            cfg.degrade = DegradeMode::Loss { tau2 };
        }
        if let Some(theta_deg) = self.theta {
            cfg.degrade = DegradeMode::PumpRotation { theta_deg };
        }
        if let Some(g) = self.gain {
            cfg.gain = GainSpec::Fixed(g);
        }
        if self.gain_min.is_some()
            || self.gain_max.is_some()
            || self.gain_steps.is_some()
            || self.gain_log.is_some()
        {
            let mut sweep = match cfg.gain {
                GainSpec::Sweep(s) => s,
                GainSpec::Fixed(g) => GainSweep {
                    g_min: g,
                    g_max: g,
                    steps: 2,
                    log_spacing: false,
                },
            };
            sweep.g_min = self.gain_min.unwrap_or(sweep.g_min);
            sweep.g_max = self.gain_max.unwrap_or(sweep.g_max);
            sweep.steps = self.gain_steps.unwrap_or(sweep.steps);
            sweep.log_spacing = self.gain_log.unwrap_or(sweep.log_spacing);
            cfg.gain = GainSpec::Sweep(sweep);
        }
        if let Some(v) = self.eta {
            cfg.eta_ancilla = v;
        }
        if let Some(v) = self.eta_a {
            cfg.eta_a = v;
        }
        if let Some(v) = self.eta_b {
            cfg.eta_b = v;
        }
        if let Some(v) = self.n_max {
            cfg.n_max = v;
        }
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.samples {
            cfg.sample_count = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
    }
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<cvdistill::Error> for Failure {
    fn from(e: cvdistill::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load_valid(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let cfg = args.load().map_err(Failure::Validation)?;
    let errors = cfg.validate();
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Failure::Validation(
            errors
                .iter()
                .map(|e| format!("  {e}"))
                .collect::<Vec<_>>()
                .join("\n"),
        ))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn emit_csv(
    out: &Option<PathBuf>,
    write: impl FnOnce(&mut dyn Write) -> cvdistill::Result<()>,
) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut file = create(path)?;
            write(&mut file)?;
            file.flush()
                .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            Ok(())
        }
    }
}

fn emit_report(
    report: &Option<PathBuf>,
    write: impl FnOnce(&mut dyn Write) -> cvdistill::Result<()>,
) -> Result<(), Failure> {
    if let Some(path) = report {
        let mut file = create(path)?;
        write(&mut file)?;
        file.flush()
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Sweep { scenario: args, output } => {
            let cfg = load_valid(&args)?;
            let result = scenario::run_scenario(&cfg)?;
            for f in &result.failures {
                eprintln!("warning: g = {} ({}): {}", f.g, f.model, f.reason);
            }
            emit_csv(&output.out, |w| scenario::write_sweep_csv(&result, w))?;
            emit_report(&output.report, |w| {
                scenario::write_sweep_report(&cfg, &result, w)
            })?;
            Ok(0)
        }
        Command::Sample { scenario: args, output } => {
            let cfg = load_valid(&args)?;
            let set = scenario::run_sampling(&cfg)?;
            emit_csv(&output.out, |w| scenario::write_samples_csv(&set, w))?;
            emit_report(&output.report, |w| {
                scenario::write_sample_report(&cfg, &set, w)
            })?;
            Ok(0)
        }
        Command::Equiv {
            scenario: args,
            output,
            measured,
            strict,
        } => {
            let cfg = load_valid(&args)?;
            let points = match &measured {
                Some(path) => {
                    let file = File::open(path)
                        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                    Some(
                        scenario::read_measured_csv(file)
                            .map_err(|e| Failure::Validation(e.to_string()))?,
                    )
                }
                None => None,
            };
            let rows = scenario::run_equivalence(&cfg, points.as_deref())?;
            emit_csv(&output.out, |w| scenario::write_equivalence_csv(&rows, w))?;
            emit_report(&output.report, |w| {
                scenario::write_equivalence_report(&cfg, &rows, w)
            })?;
            let infeasible = rows.iter().filter(|r| r.is_infeasible()).count();
            if infeasible > 0 {
                eprintln!("{infeasible} of {} rows have no physical equivalent state", rows.len());
                if strict {
                    return Ok(EXIT_INFEASIBLE);
                }
            }
            Ok(0)
        }
        Command::Presets { name } => {
            match name {
                None => {
                    for (name, _) in PRESETS {
                        println!("{name}");
                    }
                }
                Some(name) => match scenario::preset(&name) {
                    Some(json) => print!("{json}"),
                    None => {
                        return Err(Failure::Validation(format!("unknown preset `{name}`")))
                    }
                },
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Validation(msg)) => {
            eprintln!("invalid configuration:\n{msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
