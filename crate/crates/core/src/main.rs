use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coverage_poa_core::equilibria::DEFAULT_BUDGET;
use coverage_poa_core::experiments::{
    analyze_game, run_sweep, DistanceGrid, ExperimentKind, SweepSpec, TemperatureGrid,
};
use coverage_poa_core::instances::game_to_string;
use coverage_poa_core::{load_game, worst_case_instance, Error, Game, WorstCaseParams};

#[derive(Parser)]
#[command(
    name = "coverage-poa",
    version,
    about = "Coverage games with compromised agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact equilibrium analysis: NE count, PoA, PoS, distance and bound.
    Analyze {
        #[command(flatten)]
        game: GameArgs,
        /// Maximum number of joint profiles to enumerate.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write a worst-case game file.
    Gen {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-linear learning across a log-spaced temperature grid.
    SweepTemp {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Temperature sweep for every distance on a grid; min/max per distance.
    SweepDist {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        dist: DistArgs,
    },
    /// One temperature, every distance on a grid.
    FixedTemp {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 0.55)]
        temperature: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct GameArgs {
    /// Game file; overrides the generated worst-case game.
    #[arg(long)]
    game: Option<PathBuf>,
    /// Number of compromised agents in the generated game.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    distance: Option<f64>,
    /// Private dummy resources per agent.
    #[arg(long)]
    dummies: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    dummy_value: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = -2.3, allow_hyphen_values = true)]
    temp_min_exp: f64,
    #[arg(long, default_value_t = 2.3, allow_hyphen_values = true)]
    temp_max_exp: f64,
    #[arg(long, default_value_t = 47)]
    temp_points: usize,
    #[arg(long, default_value_t = 200_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// CSV destination; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `text` prints the per-distance summary instead of CSV on stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long, default_value_t = 0.0)]
    dist_min: f64,
    /// Defaults to k - 1.
    #[arg(long)]
    dist_max: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    dist_step: f64,
}

impl GameArgs {
    fn params(&self, k: usize, distance: f64, dummies: usize) -> WorstCaseParams {
        WorstCaseParams {
            k: self.k.unwrap_or(k),
            distance: self.distance.unwrap_or(distance),
            dummy_count: self.dummies.unwrap_or(dummies),
            dummy_value: self.dummy_value,
        }
    }

    fn load(&self, k: usize, distance: f64, dummies: usize) -> Result<Game, Error> {
        match &self.game {
            Some(path) => load_game(path),
            None => worst_case_instance(&self.params(k, distance, dummies)),
        }
    }
}

fn sweep_spec(
    kind: ExperimentKind,
    game: &GameArgs,
    sweep: &SweepArgs,
    dist: Option<&DistArgs>,
) -> Result<SweepSpec, Error> {
    let params = game.params(10, 1.0, 3);
    let distances = match dist {
        Some(d) => DistanceGrid {
            min: d.dist_min,
            max: d.dist_max.unwrap_or(params.k.saturating_sub(1) as f64),
            step: d.dist_step,
        },
        None => DistanceGrid::up_to(params.k),
    };
    Ok(SweepSpec {
        kind,
        k: params.k,
        distance: params.distance,
        dummy_count: params.dummy_count,
        dummy_value: params.dummy_value,
        game: game.game.as_ref().map(load_game).transpose()?,
        temperatures: TemperatureGrid {
            min_exp: sweep.temp_min_exp,
            max_exp: sweep.temp_max_exp,
            points: sweep.temp_points,
        },
        fixed_temperature: 0.55,
        distances,
        steps: sweep.steps,
        seed: sweep.seed,
        trials: sweep.trials,
    })
}

fn sweep(spec: SweepSpec, args: &SweepArgs) -> Result<(), Error> {
    let result = run_sweep(&spec)?;
    let stdout = io::stdout();
    match &args.out {
        Some(path) => {
            result.save_csv(path)?;
            eprint!("{}", result.summary());
            if let Format::Text = args.format {
                print!("{}", result.summary());
            }
        }
        None => match args.format {
            Format::Csv => result.write_csv(stdout.lock())?,
            Format::Text => print!("{}", result.summary()),
        },
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze {
            game,
            budget,
            format,
        } => {
            let g = game.load(3, 1.0, 0)?;
            let summary = match analyze_game(&g, budget) {
                Err(e @ Error::TooLarge { .. }) => {
                    eprintln!("hint: use sweep-temp to study this instance by simulation");
                    return Err(e);
                }
                other => other?,
            };
            match format {
                Format::Text => print!("{}", summary.to_text()),
                Format::Csv => print!("{}", summary.to_csv()),
            }
        }
        Command::Gen { game, out } => {
            let g = game.load(3, 1.0, 0)?;
            let text = game_to_string(&g);
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => io::stdout().write_all(text.as_bytes())?,
            }
        }
        Command::SweepTemp { game, sweep: args } => {
            let spec = sweep_spec(ExperimentKind::TemperatureSweep, &game, &args, None)?;
            sweep(spec, &args)?;
        }
        Command::SweepDist {
            game,
            sweep: args,
            dist,
        } => {
            let spec = sweep_spec(ExperimentKind::DistanceSweep, &game, &args, Some(&dist))?;
            sweep(spec, &args)?;
        }
        Command::FixedTemp {
            game,
            sweep: args,
            dist,
            temperature,
        } => {
            let mut spec = sweep_spec(ExperimentKind::FixedTemperature, &game, &args, Some(&dist))?;
            spec.fixed_temperature = temperature;
            sweep(spec, &args)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::TooLarge { .. } => ExitCode::from(3),
                e if e.is_validation() => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
