//! Simulation sweeps over temperature and distance, exact one-shot analysis,
//! and the CSV output shared by all of them.

use std::env;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::distance::{compute_distance_with_budget, DistanceResult};
use crate::equilibria::{analyze_with_budget, theorem_bound, AnalysisReport};
use crate::error::{Error, Result};
use crate::game::{Game, Value, EPS};
use crate::instances::{worst_case_instance, WorstCaseParams};
use crate::sim::{run_lll, SimConfig, DEFAULT_STEPS};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "COVERAGE_POA_THREADS";

pub const CSV_HEADER: &str =
    "experiment,k,distance,z,temperature,trial,steps,seed,avg_norm_welfare,poa_bound";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    TemperatureSweep,
    DistanceSweep,
    FixedTemperature,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::TemperatureSweep => "temperature_sweep",
            ExperimentKind::DistanceSweep => "distance_sweep",
            ExperimentKind::FixedTemperature => "fixed_temperature",
        }
    }
}

/// Log-spaced temperatures `10^e` for `points` exponents evenly covering
/// `[min_exp, max_exp]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureGrid {
    pub min_exp: f64,
    pub max_exp: f64,
    pub points: usize,
}

impl Default for TemperatureGrid {
    fn default() -> Self {
        TemperatureGrid {
            min_exp: -2.3,
            max_exp: 2.3,
            points: 47,
        }
    }
}

impl TemperatureGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::InvalidParameter("temperature grid is empty".into()));
        }
        if !(self.min_exp.is_finite() && self.max_exp.is_finite()) {
            return Err(Error::InvalidParameter(
                "temperature exponents must be finite".into(),
            ));
        }
        if self.points == 1 {
            return Ok(vec![10f64.powf(self.min_exp)]);
        }
        if self.min_exp >= self.max_exp {
            return Err(Error::InvalidParameter(format!(
                "temperature exponent min {} must be below max {}",
                self.min_exp, self.max_exp
            )));
        }
        let span = self.max_exp - self.min_exp;
        let last = (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| 10f64.powf(self.min_exp + span * i as f64 / last))
            .collect())
    }
}

/// Distances `min, min + step, ...` up to and including `max`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl DistanceGrid {
    /// `0, 0.5, ..., k - 1`.
    pub fn up_to(k: usize) -> Self {
        DistanceGrid {
            min: 0.0,
            max: k.saturating_sub(1) as f64,
            step: 0.5,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "distance step must be positive, got {}",
                self.step
            )));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 || self.max < self.min
        {
            return Err(Error::InvalidParameter(format!(
                "invalid distance range [{}, {}]",
                self.min, self.max
            )));
        }
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.min + i as f64 * self.step)
            .collect())
    }
}

/// Everything needed to reproduce one sweep.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub kind: ExperimentKind,
    pub k: usize,
    /// Distance of the generated game for temperature sweeps.
    pub distance: f64,
    pub dummy_count: usize,
    pub dummy_value: f64,
    /// Overrides the generated game (temperature and fixed-temperature runs).
    pub game: Option<Game>,
    pub temperatures: TemperatureGrid,
    pub fixed_temperature: f64,
    pub distances: DistanceGrid,
    pub steps: u64,
    pub seed: u64,
    pub trials: usize,
}

impl SweepSpec {
    fn base(kind: ExperimentKind) -> Self {
        SweepSpec {
            kind,
            k: 10,
            distance: 1.0,
            dummy_count: 3,
            dummy_value: 0.0,
            game: None,
            temperatures: TemperatureGrid::default(),
            fixed_temperature: 0.55,
            distances: DistanceGrid::up_to(10),
            steps: DEFAULT_STEPS,
            seed: 0,
            trials: 1,
        }
    }

    /// k = 10, D = 1, three dummies per agent, 47 temperatures.
    pub fn temperature_sweep() -> Self {
        Self::base(ExperimentKind::TemperatureSweep)
    }

    /// k = 10, distances 0..=9 in steps of 0.5, full temperature grid each.
    pub fn distance_sweep() -> Self {
        Self::base(ExperimentKind::DistanceSweep)
    }

    /// k = 10, distances 0..=9 in steps of 0.5, T = 0.55.
    pub fn fixed_temperature() -> Self {
        Self::base(ExperimentKind::FixedTemperature)
    }

    fn worst_case(&self, distance: f64) -> Result<Game> {
        worst_case_instance(&WorstCaseParams {
            k: self.k,
            distance,
            dummy_count: self.dummy_count,
            dummy_value: self.dummy_value,
        })
    }

    fn temperature_values(&self) -> Result<Vec<f64>> {
        match self.kind {
            ExperimentKind::FixedTemperature => {
                if !(self.fixed_temperature.is_finite() && self.fixed_temperature > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "temperature must be positive, got {}",
                        self.fixed_temperature
                    )));
                }
                Ok(vec![self.fixed_temperature])
            }
            _ => self.temperatures.values(),
        }
    }

    /// `(k, distance, z, game)` for every distance in the sweep.
    fn games(&self) -> Result<Vec<(usize, f64, usize, Game)>> {
        if let Some(game) = &self.game {
            if self.kind == ExperimentKind::DistanceSweep {
                return Err(Error::InvalidParameter(
                    "distance sweeps regenerate the worst-case game; a game file cannot be used"
                        .into(),
                ));
            }
            let distance = compute_distance_with_budget(game, 1_000_000)
                .map(|d| d.distance)
                .unwrap_or(f64::NAN);
            return Ok(vec![(game.num_compromised(), distance, 0, game.clone())]);
        }
        let distances = match self.kind {
            ExperimentKind::TemperatureSweep => vec![self.distance],
            _ => self.distances.values()?,
        };
        distances
            .into_iter()
            .map(|d| Ok((self.k, d, self.dummy_count, self.worst_case(d)?)))
            .collect()
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub experiment: &'static str,
    pub k: usize,
    pub distance: f64,
    pub z: usize,
    pub temperature: f64,
    pub trial: usize,
    pub steps: u64,
    /// Seed of this individual run (derived from the sweep seed).
    pub seed: u64,
    pub avg_norm_welfare: f64,
    pub poa_bound: f64,
}

/// Min/max of the simulated averages at one distance.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceAggregate {
    pub distance: f64,
    pub min_welfare: f64,
    pub min_temperature: f64,
    pub max_welfare: f64,
    pub max_temperature: f64,
    /// `1 / (1 + k)`.
    pub baseline_bound: f64,
    /// `1 / (1 + k - D)`.
    pub distance_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub aggregates: Vec<DistanceAggregate>,
}

/// SplitMix64 finalizer over `base + (index + 1) * golden`, giving each
/// sweep cell an independent, reproducible seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Worker pool sized by `COVERAGE_POA_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = env::var(THREADS_ENV) {
        let threads: usize = raw.trim().parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
        if threads == 0 {
            return Err(Error::InvalidParameter(format!(
                "{THREADS_ENV} must be positive"
            )));
        }
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot build worker pool: {e}")))
}

struct Cell {
    game: usize,
    temperature: f64,
    trial: usize,
}

/// Runs every (distance, temperature, trial) cell of the sweep. Rows come
/// back ordered by distance, then temperature, then trial.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let games = spec.games()?;
    let temperatures = spec.temperature_values()?;
    let mut cells = Vec::with_capacity(games.len() * temperatures.len() * spec.trials);
    for g in 0..games.len() {
        for &temperature in &temperatures {
            for trial in 0..spec.trials {
                cells.push(Cell {
                    game: g,
                    temperature,
                    trial,
                });
            }
        }
    }
    let bounds: Vec<f64> = games
        .iter()
        .map(|(k, d, _, _)| theorem_bound(*k, *d).unwrap_or(f64::NAN))
        .collect();

    let pool = worker_pool()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(index, cell)| {
                let (k, distance, z, game) = &games[cell.game];
                let seed = derive_seed(spec.seed, index as u64);
                let run = run_lll(game, &SimConfig::new(cell.temperature, spec.steps, seed))?;
                Ok(SweepRow {
                    experiment: spec.kind.label(),
                    k: *k,
                    distance: *distance,
                    z: *z,
                    temperature: cell.temperature,
                    trial: cell.trial,
                    steps: spec.steps,
                    seed,
                    avg_norm_welfare: run.average_normalized_welfare,
                    poa_bound: bounds[cell.game],
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let per_game = temperatures.len() * spec.trials;
    let aggregates = games
        .iter()
        .enumerate()
        .map(|(g, (k, distance, _, _))| {
            let slice = &rows[g * per_game..(g + 1) * per_game];
            let min = slice
                .iter()
                .min_by(|a, b| a.avg_norm_welfare.total_cmp(&b.avg_norm_welfare))
                .expect("nonempty grid");
            let max = slice
                .iter()
                .max_by(|a, b| a.avg_norm_welfare.total_cmp(&b.avg_norm_welfare))
                .expect("nonempty grid");
            DistanceAggregate {
                distance: *distance,
                min_welfare: min.avg_norm_welfare,
                min_temperature: min.temperature,
                max_welfare: max.avg_norm_welfare,
                max_temperature: max.temperature,
                baseline_bound: 1.0 / (1.0 + *k as f64),
                distance_bound: 1.0 / (1.0 + *k as f64 - distance),
            }
        })
        .collect();
    Ok(SweepResult { rows, aggregates })
}

pub fn temperature_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep(&SweepSpec {
        kind: ExperimentKind::TemperatureSweep,
        ..spec.clone()
    })
}

pub fn distance_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep(&SweepSpec {
        kind: ExperimentKind::DistanceSweep,
        ..spec.clone()
    })
}

pub fn fixed_temperature_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep(&SweepSpec {
        kind: ExperimentKind::FixedTemperature,
        ..spec.clone()
    })
}

impl SweepResult {
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(io::BufWriter::new(file))
    }

    /// Human-readable per-distance summary.
    pub fn summary(&self) -> String {
        let mut s = String::from(
            "distance  min_welfare  (at T)     max_welfare  (at T)     1/(1+k)  1/(1+k-D)\n",
        );
        for a in &self.aggregates {
            let _ = writeln!(
                s,
                "{:>8.3}  {:>11.6}  {:>9.4}  {:>11.6}  {:>9.4}  {:>7.4}  {:>9.4}",
                a.distance,
                a.min_welfare,
                a.min_temperature,
                a.max_welfare,
                a.max_temperature,
                a.baseline_bound,
                a.distance_bound
            );
        }
        s
    }
}

/// Exact analysis of one game together with its distance and bound.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisSummary {
    pub k: usize,
    pub report: AnalysisReport,
    pub distance: DistanceResult,
    pub bound: f64,
}

impl AnalysisSummary {
    pub fn bound_holds(&self) -> bool {
        self.report.poa >= self.bound - EPS
    }

    pub fn tight(&self) -> bool {
        (self.report.poa - self.bound).abs() <= EPS
    }

    pub fn to_text(&self) -> String {
        let r = &self.report;
        let mut s = String::new();
        let _ = writeln!(s, "compromised agents   {}", self.k);
        let _ = writeln!(s, "nash equilibria      {}", r.nash_profiles.len());
        let _ = writeln!(s, "optimal welfare      {}", fmt_value(r.optimal_welfare));
        let _ = writeln!(s, "worst NE welfare     {}", fmt_value(r.worst_ne_welfare));
        let _ = writeln!(s, "best NE welfare      {}", fmt_value(r.best_ne_welfare));
        let _ = writeln!(s, "PoA                  {}", fmt_value(r.poa));
        let _ = writeln!(s, "PoS                  {}", fmt_value(r.pos));
        let _ = writeln!(
            s,
            "distance D(G)        {}",
            fmt_value(self.distance.distance)
        );
        let _ = writeln!(s, "witness profile      {}", self.distance.witness_profile);
        let _ = writeln!(s, "bound                {}", fmt_value(self.bound));
        let _ = writeln!(s, "PoA >= bound         {}", self.bound_holds());
        let _ = writeln!(s, "tight                {}", self.tight());
        s
    }

    pub fn to_csv(&self) -> String {
        let r = &self.report;
        format!(
            "k,distance,ne_count,optimal_welfare,worst_ne_welfare,best_ne_welfare,poa,pos,poa_bound,bound_holds,tight\n\
             {},{},{},{},{},{},{},{},{},{},{}\n",
            self.k,
            self.distance.distance,
            r.nash_profiles.len(),
            r.optimal_welfare,
            r.worst_ne_welfare,
            r.best_ne_welfare,
            r.poa,
            r.pos,
            self.bound,
            self.bound_holds(),
            self.tight()
        )
    }
}

fn fmt_value(v: Value) -> String {
    format!("{v:.12}")
}

/// Exhaustive analysis: equilibria, PoA/PoS, distance and the bound.
pub fn analyze_game(game: &Game, budget: u64) -> Result<AnalysisSummary> {
    let report = analyze_with_budget(game, budget)?;
    let distance = compute_distance_with_budget(game, budget)?;
    let k = game.num_compromised();
    let d = distance.distance.min(k as f64 + 1.0);
    let bound = theorem_bound(k, d)?;
    Ok(AnalysisSummary {
        k,
        report,
        distance,
        bound,
    })
}
