use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use synchrosqueeze::io::read_signal_csv;
use synchrosqueeze::pipeline::{cmd_analyze, cmd_synthesize, preset, PipelineConfig};
use synchrosqueeze::Error;

/// Synchrosqueezing analysis of sampled signals.
#[derive(Parser)]
#[command(name = "sst", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set ridge.count=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a named test signal (fig1, two-tone, chirp, impulse-train).
    Synthesize {
        name: String,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, short, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Analyse a `time,real[,imag]` CSV or a named preset.
    Analyze {
        /// Signal CSV.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        input: Option<PathBuf>,
        /// Analyse a preset instead of a file.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, short, default_value = "out")]
        out_dir: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Print the effective configuration.
    Config {
        /// Print every default.
        #[arg(long)]
        dump: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synthesize {
            name,
            rate,
            duration,
            out_dir,
            config,
        } => {
            let cfg = PipelineConfig::load(config.config.as_deref(), &config.overrides)?;
            let s = cmd_synthesize(&cfg, &name, rate, duration, &out_dir)?;
            println!("wrote {} samples to {}", s.signal.len(), out_dir.join("signal.csv").display());
            if let Some(class) = s.class {
                println!(
                    "epsilon = {:.6e}, d = {}",
                    class.epsilon_measured,
                    class.d_measured.map_or("n/a".to_string(), |d| format!("{d:.6}"))
                );
            }
        }
        Command::Analyze {
            input,
            preset: name,
            out_dir,
            config,
        } => {
            let cfg = PipelineConfig::load(config.config.as_deref(), &config.overrides)?;
            let signal = match (input, name) {
                (Some(path), _) => {
                    let file = File::open(&path).map_err(|source| Error::Input {
                        path: path.display().to_string(),
                        source,
                    })?;
                    read_signal_csv(BufReader::new(file))?
                }
                (None, Some(name)) => preset(&name)?.synthesize(None, None)?.signal,
                (None, None) => unreachable!("clap requires an input"),
            };
            let out = cmd_analyze(&cfg, &signal, &out_dir)?;
            println!(
                "{}: {} ridges, {} components, dropped fraction {:.3e}; outputs in {}",
                out.backend.name(),
                out.ridges.len(),
                out.components.len(),
                out.squeezed.report.dropped_fraction,
                out_dir.display()
            );
        }
        Command::Config { dump, config } => {
            let cfg = if dump {
                PipelineConfig::default()
            } else {
                PipelineConfig::load(config.config.as_deref(), &config.overrides)?
            };
            println!("{}", cfg.to_json_pretty());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
