//! Instance generators and the on-disk game format.

use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Agent, Game, Resource, Value};

/// Parameters of the tight worst-case family: one normal agent that can only
/// reach the value-1 resource `R0`, and `k` compromised agents that each own
/// a private resource worth `1 - distance / k` besides `R0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCaseParams {
    pub k: usize,
    pub distance: Value,
    /// Private dummy resources per agent (normal agent included).
    pub dummy_count: usize,
    pub dummy_value: Value,
}

impl WorstCaseParams {
    pub fn new(k: usize, distance: Value) -> Self {
        WorstCaseParams {
            k,
            distance,
            dummy_count: 0,
            dummy_value: 0.0,
        }
    }

    pub fn with_dummies(mut self, dummy_count: usize) -> Self {
        self.dummy_count = dummy_count;
        self
    }

    fn check(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter(
                "worst-case family needs k >= 1".into(),
            ));
        }
        if !self.distance.is_finite() || self.distance < 0.0 || self.distance > self.k as f64 {
            return Err(Error::InvalidParameter(format!(
                "distance must lie in [0, k = {}], got {}",
                self.k, self.distance
            )));
        }
        if !self.dummy_value.is_finite() || self.dummy_value < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dummy value must be nonnegative, got {}",
                self.dummy_value
            )));
        }
        Ok(())
    }
}

/// Builds the worst-case instance. Resources are ordered `R0, R1..Rk`, then
/// each agent's dummies (`D{agent}_{j}`); agent 0 is the normal agent.
pub fn worst_case_instance(params: &WorstCaseParams) -> Result<Game> {
    params.check()?;
    let k = params.k;
    let shared_value = 1.0 - params.distance / k as f64;

    let mut resources = vec![Resource::new("R0", 1.0)];
    resources.extend((1..=k).map(|i| Resource::new(format!("R{i}"), shared_value)));

    let mut agents = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut actions = vec![0];
        if i > 0 {
            actions.push(i);
        }
        for j in 0..params.dummy_count {
            actions.push(resources.len());
            resources.push(Resource::new(format!("D{i}_{j}"), params.dummy_value));
        }
        agents.push(Agent::new(format!("A{i}"), actions, i > 0));
    }
    Game::new(resources, agents)
}

/// Parameters for seeded random games.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomGameParams {
    pub agents: usize,
    pub resources: usize,
    pub compromised: usize,
    /// Probability that a resource is in a given agent's action set.
    pub density: f64,
    pub seed: u64,
}

/// Seeded random game. Values are uniform on `[0, 1)` with one resource
/// forced to 1; empty action sets get one uniformly chosen resource, and the
/// value-1 resource is added to a random agent if nobody can reach it.
pub fn random_instance(params: &RandomGameParams) -> Result<Game> {
    let RandomGameParams {
        agents: n,
        resources: m,
        compromised: k,
        density,
        seed,
    } = *params;
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "random games need at least one agent and one resource".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "{k} compromised agents requested but only {n} agents"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<Value> = (0..m).map(|_| rng.random::<f64>()).collect();
    let top = rng.random_range(0..m);
    values[top] = 1.0;

    let mut action_sets: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..m).filter(|_| rng.random_bool(density)).collect())
        .collect();
    for set in &mut action_sets {
        if set.is_empty() {
            set.push(rng.random_range(0..m));
        }
    }
    if !action_sets.iter().any(|s| s.contains(&top)) {
        let who = rng.random_range(0..n);
        action_sets[who].push(top);
        action_sets[who].sort_unstable();
    }

    let compromised = sample(&mut rng, n, k).into_vec();
    let resources = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| Resource::new(format!("r{i}"), v))
        .collect();
    let agents = action_sets
        .into_iter()
        .enumerate()
        .map(|(i, actions)| Agent::new(format!("a{i}"), actions, compromised.contains(&i)))
        .collect();
    Game::new(resources, agents)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResourceEntry {
    id: String,
    value: Value,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentEntry {
    id: String,
    actions: Vec<String>,
    compromised: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    resources: Vec<ResourceEntry>,
    agents: Vec<AgentEntry>,
}

/// Serializes a game to the canonical JSON text format.
pub fn game_to_string(game: &Game) -> String {
    let file = GameFile {
        resources: game
            .resources()
            .iter()
            .map(|r| ResourceEntry {
                id: r.id.clone(),
                value: r.value,
            })
            .collect(),
        agents: game
            .agents()
            .iter()
            .map(|a| AgentEntry {
                id: a.id.clone(),
                actions: a
                    .actions
                    .iter()
                    .map(|&r| game.resources()[r].id.clone())
                    .collect(),
                compromised: a.compromised,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("game file is always serializable");
    text.push('\n');
    text
}

pub fn game_from_str(text: &str) -> Result<Game> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let resources: Vec<Resource> = file
        .resources
        .into_iter()
        .map(|r| Resource::new(r.id, r.value))
        .collect();
    let mut agents = Vec::with_capacity(file.agents.len());
    for (i, a) in file.agents.into_iter().enumerate() {
        let actions = a
            .actions
            .iter()
            .map(|id| {
                resources.iter().position(|r| &r.id == id).ok_or_else(|| {
                    Error::Parse(format!("agents[{i}].actions: unknown resource id {id:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        agents.push(Agent::new(a.id, actions, a.compromised));
    }
    Game::new(resources, agents)
}

pub fn save_game(game: &Game, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, game_to_string(game))?;
    Ok(())
}

pub fn load_game(path: impl AsRef<Path>) -> Result<Game> {
    game_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{optimal_profiles, price_of_stability};

    #[test]
    fn smallest_worst_case() {
        let g = worst_case_instance(&WorstCaseParams::new(1, 0.5)).unwrap();
        assert_eq!(g.num_agents(), 2);
        assert_eq!(g.values(), vec![1.0, 0.5]);
        assert_eq!(g.action_set(0), &[0]);
        assert_eq!(g.action_set(1), &[0, 1]);
        assert!(!g.is_compromised(0));
        assert!(g.is_compromised(1));
        assert!(g.validate().is_regular());
    }

    #[test]
    fn worst_case_with_dummies() {
        let g = worst_case_instance(&WorstCaseParams::new(10, 1.0).with_dummies(3)).unwrap();
        assert_eq!(g.num_agents(), 11);
        assert_eq!(g.num_resources(), 11 + 11 * 3);
        assert_eq!(g.action_set(0).len(), 4);
        for i in 1..=10 {
            assert_eq!(g.action_set(i).len(), 5);
        }
        // Dummies are private to their agent.
        let mut seen = std::collections::HashSet::new();
        for a in g.agents() {
            for &r in &a.actions[..] {
                if r > 10 {
                    assert!(seen.insert(r));
                }
            }
        }
    }

    #[test]
    fn zero_value_dummies_keep_optimum() {
        let plain = worst_case_instance(&WorstCaseParams::new(3, 1.0)).unwrap();
        let dummies = worst_case_instance(&WorstCaseParams::new(3, 1.0).with_dummies(2)).unwrap();
        let (_, a) = optimal_profiles(&plain).unwrap();
        let (_, b) = optimal_profiles(&dummies).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn worst_case_rejects_bad_params() {
        assert!(worst_case_instance(&WorstCaseParams::new(0, 0.0)).is_err());
        assert!(worst_case_instance(&WorstCaseParams::new(2, 2.5)).is_err());
    }

    #[test]
    fn random_instance_is_deterministic_and_regular() {
        let params = RandomGameParams {
            agents: 4,
            resources: 5,
            compromised: 2,
            density: 0.3,
            seed: 17,
        };
        let a = random_instance(&params).unwrap();
        let b = random_instance(&params).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_ok());
        assert!(a.validate().is_regular());
        assert_eq!(a.num_compromised(), 2);
        let c = random_instance(&RandomGameParams { seed: 18, ..params }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_games_without_compromise_have_optimal_equilibria() {
        for seed in 0..50 {
            let g = random_instance(&RandomGameParams {
                agents: 3,
                resources: 4,
                compromised: 0,
                density: 0.5,
                seed,
            })
            .unwrap();
            assert!((price_of_stability(&g).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_through_file() {
        let g = worst_case_instance(&WorstCaseParams::new(3, 1.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_game(&g, &path).unwrap();
        assert_eq!(load_game(&path).unwrap(), g);
    }

    #[test]
    fn rejects_negative_values() {
        let text = r#"{"resources":[{"id":"r0","value":-0.5}],
            "agents":[{"id":"a","actions":["r0"],"compromised":false}]}"#;
        let err = game_from_str(text).unwrap_err();
        assert!(err.to_string().contains("negative"), "{err}");
    }

    #[test]
    fn rejects_missing_and_unknown_fields() {
        let text = r#"{"resources":[{"id":"r0","value":1.0}],
            "agents":[{"id":"a","actions":["r0"]}]}"#;
        let err = game_from_str(text).unwrap_err().to_string();
        assert!(err.contains("compromised"), "{err}");
        assert!(err.contains("line"), "{err}");

        let text = r#"{"resources":[{"id":"r0","value":1.0,"weight":2}],
            "agents":[{"id":"a","actions":["r0"],"compromised":false}]}"#;
        let err = game_from_str(text).unwrap_err().to_string();
        assert!(err.contains("weight"), "{err}");

        let text = r#"{"resources":[{"id":"r0","value":1.0}],
            "agents":[{"id":"a","actions":["r9"],"compromised":false}]}"#;
        let err = game_from_str(text).unwrap_err().to_string();
        assert!(err.contains("r9"), "{err}");
    }
}
