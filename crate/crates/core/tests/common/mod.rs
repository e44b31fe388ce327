#![allow(dead_code)]

use coverage_poa_core::{random_instance, Game, RandomGameParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How many compromised agents a corpus game gets.
#[derive(Clone, Copy)]
pub enum Compromised {
    None,
    Exactly(usize),
    AtLeastOne,
}

/// Seeded random game with `1..=max_agents` agents, `1..=max_resources`
/// resources and action-set density in [0.2, 0.8].
pub fn corpus_game(seed: u64, max_agents: usize, max_resources: usize, k: Compromised) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0FF_EE00);
    let min_agents = match k {
        Compromised::Exactly(k) => k.max(1),
        Compromised::AtLeastOne => 1,
        Compromised::None => 1,
    };
    let agents = rng.random_range(min_agents..=max_agents);
    let resources = rng.random_range(1..=max_resources);
    let compromised = match k {
        Compromised::None => 0,
        Compromised::Exactly(k) => k,
        Compromised::AtLeastOne => rng.random_range(1..=agents),
    };
    let density = rng.random_range(0.2..=0.8);
    random_instance(&RandomGameParams {
        agents,
        resources,
        compromised,
        density,
        seed,
    })
    .expect("corpus parameters are valid")
}
