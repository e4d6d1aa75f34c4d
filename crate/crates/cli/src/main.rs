use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magnonsteer::{
    cross_check, find_threshold, preset, run_point, run_sweep, Direction, DiffusionMode, Error,
    PresetId, SweepSpec, SystemParams,
};

#[derive(Parser)]
#[command(name = "magnonsteer", version, about = "Steady-state correlations of a qubit-cavity-magnon system with coherent feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one parameter point and print the JSON report.
    Solve {
        /// Parameter file; omitted keys take their defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        /// `paper` or `consistent`.
        #[arg(long)]
        diffusion: Option<String>,
    },
    /// Run a sweep spec and write CSV.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Output path, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a figure preset and write CSV.
    Preset {
        /// fig3a, fig3b, fig2, fig5, fig6, fig10 or fig11.
        #[arg(long)]
        id: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        diffusion: Option<String>,
    },
    /// Axis value where a measure first vanishes in a 1-D spec.
    Threshold {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        measure: String,
        /// `falling` (vanishes towards the end of the axis) or `rising`.
        #[arg(long, default_value = "falling")]
        direction: String,
    },
    /// Cross-check the closed-form covariance matrix against the Lyapunov solver.
    ValidateOracle {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_diffusion(s: Option<String>) -> Result<Option<DiffusionMode>, Error> {
    s.map(|s| s.parse()).transpose()
}

enum Failure {
    Model(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Model(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Model(Error::InvalidSpec(format!("cannot read {}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        print!("{text}");
        return Ok(());
    }
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { params, diffusion } => {
            let mut p = match params {
                Some(path) => SystemParams::from_json(&read(&path)?)?,
                None => SystemParams::default(),
            };
            if let Some(mode) = parse_diffusion(diffusion)? {
                p.diffusion_mode = mode;
            }
            match run_point(&p) {
                Ok(report) => {
                    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
                    Ok(())
                }
                Err(Error::UnstableDrift { max_real_part }) => {
                    let record = serde_json::json!({
                        "error": "unstable_drift",
                        "max_real_part": max_real_part,
                    });
                    println!("{record}");
                    Err(Error::UnstableDrift { max_real_part }.into())
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::from_json(&read(&spec)?)?;
            write(&out, &run_sweep(&spec)?.to_csv())
        }
        Command::Preset { id, out, diffusion } => {
            let mut spec = preset(id.parse::<PresetId>()?);
            if let Some(mode) = parse_diffusion(diffusion)? {
                spec.base.diffusion_mode = mode;
            }
            write(&out, &run_sweep(&spec)?.to_csv())
        }
        Command::Threshold {
            spec,
            measure,
            direction,
        } => {
            let direction: Direction = direction.parse()?;
            let spec = SweepSpec::from_json(&read(&spec)?)?;
            let value = find_threshold(&spec, &measure, direction)?;
            let record = serde_json::json!({
                "measure": measure,
                "parameter": spec.axis1.parameter,
                "direction": direction,
                "threshold": value,
            });
            println!("{record}");
            Ok(())
        }
        Command::ValidateOracle { trials, seed } => {
            let check = cross_check(trials, seed)?;
            println!("{}", serde_json::to_string_pretty(&check).expect("check serializes"));
            if check.passed {
                Ok(())
            } else {
                Err(Failure::Io(format!(
                    "closed form disagrees with the Lyapunov solution (max relative error {:e})",
                    check.max_relative_error
                )))
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnstableDrift { .. } => 2,
        Error::InvalidParameter { .. }
        | Error::InvalidSpec(_)
        | Error::UnknownPreset(_)
        | Error::UnknownMeasure(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
