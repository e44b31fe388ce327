//! Distance from a game to the nearest game (under nonnegative value
//! increments, measured in l1) whose price of stability is 1.
//!
//! A perturbation `p >= 0` makes `PoS(G_p) = 1` exactly when some target
//! profile `a` is both welfare-optimal and an equilibrium in `G_p`. Normal
//! agents best-respond automatically in an optimal profile, so for a fixed
//! target only two constraint families remain:
//!
//! * every compromised agent's chosen resource must reach the top value of
//!   its action set, and
//! * the target must weakly beat every other covered set.
//!
//! Raising a resource the target does not cover never helps either family,
//! so `p` lives on the target's covered set. For targets that are already
//! optimal the second family is vacuous and the least solution of the first
//! is found by monotone repair. Other targets need a small linear program;
//! most are pruned by the lower bound `OPT - W(a)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use microlp::{ComparisonOp, OptimizationDirection, Problem};

use crate::equilibria::{self, profiles, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Value, EPS};

/// Nonnegative value increments, one per resource.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationVector(pub Vec<Value>);

impl PerturbationVector {
    pub fn zeros(len: usize) -> Self {
        PerturbationVector(vec![0.0; len])
    }

    pub fn l1(&self) -> Value {
        self.0.iter().sum()
    }

    /// Resources with a strictly positive increment.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&r| self.0[r] > EPS).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceResult {
    pub distance: Value,
    pub perturbation: PerturbationVector,
    /// The profile that is optimal and an equilibrium in the perturbed game.
    pub witness_profile: ActionProfile,
}

/// The game with values `v + p`.
pub fn apply_perturbation(game: &Game, p: &PerturbationVector) -> Result<Game> {
    if p.0.len() != game.num_resources() {
        return Err(Error::InvalidParameter(format!(
            "perturbation has {} entries for {} resources",
            p.0.len(),
            game.num_resources()
        )));
    }
    if let Some(r) = p.0.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "perturbation entry {r} is negative or non-finite: {}",
            p.0[r]
        )));
    }
    let values: Vec<Value> = game.values().iter().zip(&p.0).map(|(v, d)| v + d).collect();
    game.with_values(&values)
}

/// Least perturbation, supported on the compromised agents' choices in
/// `target`, that puts each of those choices in its agent's argmax.
///
/// Effective values only ever rise to values already present in the game,
/// so the repair loop reaches its fixed point after finitely many passes.
pub fn repair_perturbation(game: &Game, target: &ActionProfile) -> PerturbationVector {
    let compromised = game.compromised();
    let mut effective = game.values();
    loop {
        let mut changed = false;
        for &j in &compromised {
            let s = target.choices()[j];
            let top = game
                .action_set(j)
                .iter()
                .map(|&r| effective[r])
                .fold(f64::NEG_INFINITY, f64::max);
            if top > effective[s] {
                effective[s] = top;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    PerturbationVector(
        effective
            .iter()
            .zip(game.values())
            .map(|(e, v)| e - v)
            .collect(),
    )
}

/// Minimum repair cost over the game's own optimal profiles. This is the
/// distance when the target is restricted to profiles that are already
/// optimal, and an upper bound on [`compute_distance`] in general.
pub fn optimal_profile_distance(game: &Game) -> Result<DistanceResult> {
    let (optimal, _) = equilibria::optimal_profiles(game)?;
    let mut best: Option<DistanceResult> = None;
    for profile in optimal {
        let p = repair_perturbation(game, &profile);
        let cost = p.l1();
        if best.as_ref().is_none_or(|b| cost < b.distance - EPS) {
            best = Some(DistanceResult {
                distance: cost,
                perturbation: p,
                witness_profile: profile,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidGame("no optimal profile".into()))
}

fn covered_set(choices: &[usize]) -> Vec<usize> {
    let set: BTreeSet<usize> = choices.iter().copied().collect();
    set.into_iter().collect()
}

/// Minimal perturbation making `target` optimal and an equilibrium, or
/// `None` when no nonnegative perturbation can.
fn target_program(
    game: &Game,
    target: &ActionProfile,
    covered: &[usize],
    welfare: Value,
    others: &HashMap<Vec<usize>, Value>,
) -> Result<Option<PerturbationVector>> {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: HashMap<usize, microlp::Variable> = covered
        .iter()
        .map(|&r| (r, problem.add_var(1.0, (0.0, f64::INFINITY))))
        .collect();

    for j in game.compromised() {
        let s = target.choices()[j];
        for &r in game.action_set(j) {
            if r == s {
                continue;
            }
            let rhs = game.value(r) - game.value(s);
            match vars.get(&r) {
                Some(&pr) => {
                    problem.add_constraint([(vars[&s], 1.0), (pr, -1.0)], ComparisonOp::Ge, rhs)
                }
                None if rhs > 0.0 => {
                    problem.add_constraint([(vars[&s], 1.0)], ComparisonOp::Ge, rhs)
                }
                None => {}
            }
        }
    }

    // Beating covered set C needs the increments on target \ C to cover the
    // welfare gap; keep the largest gap per distinct difference.
    let mut gaps: BTreeMap<Vec<usize>, Value> = BTreeMap::new();
    for (set, &w) in others {
        let gap = w - welfare;
        if gap <= EPS {
            continue;
        }
        let diff: Vec<usize> = covered
            .iter()
            .copied()
            .filter(|r| set.binary_search(r).is_err())
            .collect();
        if diff.is_empty() {
            return Ok(None);
        }
        let e = gaps.entry(diff).or_insert(gap);
        *e = e.max(gap);
    }
    for (diff, gap) in gaps {
        problem.add_constraint(
            diff.iter().map(|r| (vars[r], 1.0)).collect::<Vec<_>>(),
            ComparisonOp::Ge,
            gap,
        );
    }

    match problem.solve() {
        Ok(outcome) => {
            let solution = outcome
                .into_solution()
                .map_err(|_| Error::Solver("solve interrupted".into()))?;
            let mut p = PerturbationVector::zeros(game.num_resources());
            for (&r, &var) in &vars {
                p.0[r] = solution.var_value(var).max(0.0);
            }
            Ok(Some(p))
        }
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

pub fn compute_distance(game: &Game) -> Result<DistanceResult> {
    compute_distance_with_budget(game, DEFAULT_BUDGET)
}

/// Exact distance: minimum over every target profile of the least
/// perturbation making it an optimal equilibrium.
pub fn compute_distance_with_budget(game: &Game, budget: u64) -> Result<DistanceResult> {
    let mut sets: HashMap<Vec<usize>, Value> = HashMap::new();
    for p in profiles(game, budget)? {
        sets.entry(covered_set(p.choices()))
            .or_insert_with_key(|covered| covered.iter().map(|&r| game.value(r)).sum());
    }
    let optimum = sets.values().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut best: Option<DistanceResult> = None;
    let beats = |best: &Option<DistanceResult>, cost: Value| {
        best.as_ref().is_none_or(|b| cost < b.distance - EPS)
    };

    // Already-optimal targets first: repair is exact for them.
    for p in profiles(game, budget)? {
        let w = sets[&covered_set(p.choices())];
        if w >= optimum - EPS {
            let pert = repair_perturbation(game, &p);
            let cost = pert.l1();
            if beats(&best, cost) {
                best = Some(DistanceResult {
                    distance: cost,
                    perturbation: pert,
                    witness_profile: p,
                });
            }
        }
    }

    for p in profiles(game, budget)? {
        let covered = covered_set(p.choices());
        let w = sets[&covered];
        if w >= optimum - EPS {
            continue;
        }
        let bound = optimum - w;
        if !beats(&best, bound) {
            continue;
        }
        let repair = repair_perturbation(game, &p).l1();
        if !beats(&best, bound.max(repair)) {
            continue;
        }
        if let Some(pert) = target_program(game, &p, &covered, w, &sets)? {
            let cost = pert.l1();
            if beats(&best, cost) {
                best = Some(DistanceResult {
                    distance: cost,
                    perturbation: pert,
                    witness_profile: p,
                });
            }
        }
    }
    best.ok_or_else(|| Error::InvalidGame("no optimal profile".into()))
}

/// Largest grid the oracle will search.
pub const ORACLE_MAX_GRID_POINTS: u128 = 1_000_000;

/// Brute-force distance: searches perturbations on a uniform grid over
/// *every* resource, in order of increasing l1 norm, and returns the norm
/// of the first one whose perturbed game has an optimal equilibrium.
///
/// Each coordinate ranges over `0, step, ..., ceil(v_max / step) * step`,
/// plus one extra step so that rounding an exact optimum up to the grid
/// stays inside the range.
pub fn distance_oracle(game: &Game, grid_step: Value) -> Result<Value> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be positive, got {grid_step}"
        )));
    }
    let values = game.values();
    let v_max = values.iter().copied().fold(0.0, f64::max);
    let units = (v_max / grid_step - EPS).ceil().max(0.0) as usize + 1;
    let m = values.len();
    let points = ((units + 1) as u128).saturating_pow(m as u32);
    if points > ORACLE_MAX_GRID_POINTS {
        return Err(Error::InvalidParameter(format!(
            "oracle grid has {points} points, limit is {ORACLE_MAX_GRID_POINTS}"
        )));
    }
    let profiles = equilibria::profile_count(game);
    if profiles > DEFAULT_BUDGET as u128 {
        return Err(Error::TooLarge {
            profiles,
            budget: DEFAULT_BUDGET,
        });
    }

    let mut steps = vec![0usize; m];
    for level in 0..=units * m {
        let mut found = false;
        let check = |steps: &[usize]| -> Result<bool> {
            let perturbed: Vec<Value> = values
                .iter()
                .zip(steps)
                .map(|(v, &s)| v + s as f64 * grid_step)
                .collect();
            let g = game.with_values(&perturbed)?;
            let report = equilibria::analyze(&g)?;
            Ok(report.pos >= 1.0 - EPS)
        };
        compositions(&mut steps, 0, level, units, &mut |s| {
            if !found && check(s)? {
                found = true;
            }
            Ok(found)
        })?;
        if found {
            return Ok(level as f64 * grid_step);
        }
    }
    Err(Error::InvalidGame(
        "no grid perturbation yields an optimal equilibrium".into(),
    ))
}

/// Visits every way to write `remaining` as a sum over `steps[pos..]` with
/// each part at most `cap`. Stops early once `visit` returns true.
fn compositions(
    steps: &mut [usize],
    pos: usize,
    remaining: usize,
    cap: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<bool>,
) -> Result<bool> {
    if pos == steps.len() - 1 {
        if remaining > cap {
            return Ok(false);
        }
        steps[pos] = remaining;
        return visit(steps);
    }
    let tail = steps.len() - pos - 1;
    for part in 0..=remaining.min(cap) {
        if remaining - part > tail * cap {
            continue;
        }
        steps[pos] = part;
        if compositions(steps, pos + 1, remaining - part, cap, visit)? {
            return Ok(true);
        }
    }
    Ok(false)
}
