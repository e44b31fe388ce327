//! Log-linear learning.
//!
//! At every step one agent, chosen uniformly at random, re-samples its action
//! from a Gibbs distribution over its action set: action `r` is drawn with
//! probability proportional to `exp(U_i(r, a_{-i}) / T)`. Normal agents use
//! the marginal-contribution utility and compromised agents the raw resource
//! value. The current action stays in the support.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, which is portable
//! across platforms, so a run is a pure function of `(game, config)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Value};

pub const DEFAULT_STEPS: u64 = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub temperature: f64,
    pub steps: u64,
    pub seed: u64,
    /// Fraction of leading steps excluded from the average.
    pub burn_in_fraction: f64,
    pub record_trace: bool,
}

impl SimConfig {
    pub fn new(temperature: f64, steps: u64, seed: u64) -> Self {
        SimConfig {
            temperature,
            steps,
            seed,
            burn_in_fraction: 0.0,
            record_trace: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_temperature(self.temperature)?;
        if self.steps == 0 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(Error::InvalidParameter(format!(
                "burn-in fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        Ok(())
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive and finite, got {t}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimRun {
    /// Mean of `W(a(t)) / W(a_opt)` over the post-burn-in steps.
    pub average_normalized_welfare: f64,
    pub final_profile: ActionProfile,
    /// Per-step normalized welfare, when requested.
    pub trace: Option<Vec<f64>>,
}

/// Mutable learning state with per-resource coverage counts.
struct Dynamics<'a> {
    game: &'a Game,
    choices: Vec<usize>,
    counts: Vec<u32>,
    welfare: Value,
    weights: Vec<f64>,
}

impl<'a> Dynamics<'a> {
    fn new(game: &'a Game, choices: Vec<usize>) -> Self {
        let mut counts = vec![0; game.num_resources()];
        for &r in &choices {
            counts[r] += 1;
        }
        let mut d = Dynamics {
            game,
            choices,
            counts,
            welfare: 0.0,
            weights: Vec::new(),
        };
        d.welfare = d.recompute_welfare();
        d
    }

    fn recompute_welfare(&self) -> Value {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(r, _)| self.game.value(r))
            .sum()
    }

    /// Fills `self.weights` with the normalized Gibbs distribution of
    /// `agent` over its action set (max-shifted, so small T cannot overflow).
    fn distribution(&mut self, agent: usize, temperature: f64) {
        let g = self.game;
        let current = self.choices[agent];
        let compromised = g.is_compromised(agent);
        self.weights.clear();
        for &r in g.action_set(agent) {
            let u = if compromised {
                g.value(r)
            } else {
                let others = self.counts[r] - u32::from(r == current);
                if others == 0 {
                    g.value(r)
                } else {
                    0.0
                }
            };
            self.weights.push(u);
        }
        let top = self
            .weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for w in &mut self.weights {
            *w = ((*w - top) / temperature).exp();
            total += *w;
        }
        for w in &mut self.weights {
            *w /= total;
        }
    }

    fn step<R: Rng + ?Sized>(&mut self, temperature: f64, rng: &mut R) {
        let agent = rng.random_range(0..self.choices.len());
        self.distribution(agent, temperature);
        let x: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.weights.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if x < acc {
                pick = i;
                break;
            }
        }
        let next = self.game.action_set(agent)[pick];
        let current = self.choices[agent];
        if next != current {
            self.counts[current] -= 1;
            self.counts[next] += 1;
            self.choices[agent] = next;
            self.welfare = self.recompute_welfare();
        }
    }
}

/// Selection probabilities of `agent` over its action set (in action-set
/// order) at the given temperature.
pub fn selection_distribution(
    game: &Game,
    agent: usize,
    profile: &ActionProfile,
    temperature: f64,
) -> Result<Vec<f64>> {
    check_temperature(temperature)?;
    game.check_profile(profile)?;
    if agent >= game.num_agents() {
        return Err(Error::NoSuchAgent(agent));
    }
    let mut d = Dynamics::new(game, profile.choices().to_vec());
    d.distribution(agent, temperature);
    Ok(d.weights)
}

/// One log-linear learning update.
pub fn lll_step<R: Rng + ?Sized>(
    game: &Game,
    profile: &ActionProfile,
    temperature: f64,
    rng: &mut R,
) -> Result<ActionProfile> {
    check_temperature(temperature)?;
    game.check_profile(profile)?;
    let mut d = Dynamics::new(game, profile.choices().to_vec());
    d.step(temperature, rng);
    Ok(ActionProfile(d.choices))
}

fn random_profile<R: Rng + ?Sized>(game: &Game, rng: &mut R) -> Vec<usize> {
    (0..game.num_agents())
        .map(|i| {
            let actions = game.action_set(i);
            actions[rng.random_range(0..actions.len())]
        })
        .collect()
}

/// Runs `config.steps` updates from a seeded uniformly random start.
pub fn run_lll(game: &Game, config: &SimConfig) -> Result<SimRun> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start = random_profile(game, &mut rng);
    run_from(game, config, start, &mut rng)
}

/// Like [`run_lll`] but from a given starting profile.
pub fn run_lll_from(game: &Game, config: &SimConfig, start: &ActionProfile) -> Result<SimRun> {
    config.validate()?;
    game.check_profile(start)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    run_from(game, config, start.choices().to_vec(), &mut rng)
}

fn run_from(
    game: &Game,
    config: &SimConfig,
    start: Vec<usize>,
    rng: &mut ChaCha8Rng,
) -> Result<SimRun> {
    let optimum = game.max_welfare();
    if optimum <= 0.0 {
        return Err(Error::ZeroWelfare);
    }
    let burn_in = (config.burn_in_fraction * config.steps as f64).floor() as u64;
    let mut dynamics = Dynamics::new(game, start);
    let mut trace = config
        .record_trace
        .then(|| Vec::with_capacity(config.steps as usize));
    let mut sum = 0.0;
    for t in 0..config.steps {
        dynamics.step(config.temperature, rng);
        let normalized = dynamics.welfare / optimum;
        if t >= burn_in {
            sum += normalized;
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(normalized);
        }
    }
    Ok(SimRun {
        average_normalized_welfare: sum / (config.steps - burn_in) as f64,
        final_profile: ActionProfile(dynamics.choices),
        trace,
    })
}
