//! Coverage games with compromised agents.
//!
//! Exact equilibrium analysis (price of anarchy and stability), the l1
//! distance to the nearest game with an optimal equilibrium, a generator for
//! the tight worst-case family, and log-linear learning experiments.

pub mod distance;
pub mod equilibria;
pub mod error;
pub mod experiments;
pub mod game;
pub mod instances;
mod matching;
pub mod sim;

pub use distance::{
    apply_perturbation, compute_distance, distance_oracle, optimal_profile_distance,
    DistanceResult, PerturbationVector,
};
pub use equilibria::{
    analyze, enumerate_nash, is_nash, optimal_profiles, price_of_anarchy, price_of_stability,
    theorem_bound, AnalysisReport,
};
pub use error::{Error, Result};
pub use game::{validate, ActionProfile, Agent, Game, Resource, ValidationReport, Value, EPS};
pub use instances::{
    load_game, random_instance, save_game, worst_case_instance, RandomGameParams, WorstCaseParams,
};
pub use sim::{lll_step, run_lll, SimConfig, SimRun};
