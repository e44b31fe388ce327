//! Exhaustive pure Nash equilibrium enumeration, optimal profiles, and the
//! price of anarchy / price of stability.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game, Value, EPS};

/// Default cap on the number of joint profiles an exhaustive scan may visit.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

const CHUNK: u64 = 1 << 14;

/// Number of joint action profiles, saturating at `u128::MAX`.
pub fn profile_count(game: &Game) -> u128 {
    game.agents()
        .iter()
        .fold(1u128, |acc, a| acc.saturating_mul(a.actions.len() as u128))
}

fn check_budget(game: &Game, budget: u64) -> Result<u64> {
    let profiles = profile_count(game);
    if profiles > budget as u128 {
        return Err(Error::TooLarge { profiles, budget });
    }
    Ok(profiles as u64)
}

/// Mixed-radix odometer over the joint action space. Agent 0 is the most
/// significant digit; each digit walks its agent's action set in order.
#[derive(Clone, Debug)]
pub struct Profiles<'a> {
    game: &'a Game,
    digits: Vec<usize>,
    remaining: u64,
}

impl<'a> Profiles<'a> {
    fn starting_at(game: &'a Game, index: u64, remaining: u64) -> Self {
        let mut digits = vec![0; game.num_agents()];
        let mut rest = index;
        for i in (0..game.num_agents()).rev() {
            let radix = game.action_set(i).len() as u64;
            digits[i] = (rest % radix) as usize;
            rest /= radix;
        }
        Profiles {
            game,
            digits,
            remaining,
        }
    }

    fn current(&self) -> Vec<usize> {
        self.digits
            .iter()
            .enumerate()
            .map(|(i, &d)| self.game.action_set(i)[d])
            .collect()
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.game.action_set(i).len() {
                return;
            }
            self.digits[i] = 0;
        }
    }
}

impl Iterator for Profiles<'_> {
    type Item = ActionProfile;

    fn next(&mut self) -> Option<ActionProfile> {
        if self.remaining == 0 {
            return None;
        }
        let out = ActionProfile(self.current());
        self.remaining -= 1;
        if self.remaining > 0 {
            self.advance();
        }
        Some(out)
    }
}

/// Iterates every joint profile in lexicographic order, subject to `budget`.
pub fn profiles(game: &Game, budget: u64) -> Result<Profiles<'_>> {
    let total = check_budget(game, budget)?;
    Ok(Profiles::starting_at(game, 0, total))
}

/// Reusable per-resource coverage counts for fast profile evaluation.
pub(crate) struct Evaluator<'a> {
    game: &'a Game,
    counts: Vec<u32>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(game: &'a Game) -> Self {
        Evaluator {
            game,
            counts: vec![0; game.num_resources()],
        }
    }

    fn load(&mut self, choices: &[usize]) -> Value {
        self.counts.iter_mut().for_each(|c| *c = 0);
        let mut welfare = 0.0;
        for &r in choices {
            if self.counts[r] == 0 {
                welfare += self.game.value(r);
            }
            self.counts[r] += 1;
        }
        welfare
    }

    fn loaded_is_nash(&self, choices: &[usize]) -> bool {
        let g = self.game;
        choices.iter().enumerate().all(|(i, &current)| {
            let actions = g.action_set(i);
            if g.is_compromised(i) {
                let best = actions
                    .iter()
                    .map(|&r| g.value(r))
                    .fold(f64::NEG_INFINITY, f64::max);
                g.value(current) >= best - EPS
            } else {
                // Marginal value of r given everybody else.
                let marginal = |r: usize| {
                    let others = self.counts[r] - u32::from(r == current);
                    if others == 0 {
                        g.value(r)
                    } else {
                        0.0
                    }
                };
                let now = marginal(current);
                actions.iter().all(|&r| marginal(r) <= now + EPS)
            }
        })
    }

    /// Welfare and Nash membership of a profile.
    pub(crate) fn evaluate(&mut self, choices: &[usize]) -> (Value, bool) {
        let w = self.load(choices);
        (w, self.loaded_is_nash(choices))
    }
}

/// True iff no agent can strictly improve its own utility (beyond `EPS`)
/// by switching unilaterally.
pub fn is_nash(game: &Game, profile: &ActionProfile) -> Result<bool> {
    game.check_profile(profile)?;
    Ok(Evaluator::new(game).evaluate(profile.choices()).1)
}

/// Exact equilibrium-quality summary of a game.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisReport {
    pub nash_profiles: Vec<ActionProfile>,
    pub optimal_profiles: Vec<ActionProfile>,
    pub optimal_welfare: Value,
    pub worst_ne_welfare: Value,
    pub best_ne_welfare: Value,
    pub poa: f64,
    pub pos: f64,
}

#[derive(Default)]
struct ChunkScan {
    nash: Vec<(ActionProfile, Value)>,
    best: Value,
    optimal: Vec<(ActionProfile, Value)>,
}

fn scan(game: &Game, budget: u64) -> Result<ChunkScan> {
    let total = check_budget(game, budget)?;
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<ChunkScan> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(total - start);
            let mut eval = Evaluator::new(game);
            let mut out = ChunkScan {
                best: f64::NEG_INFINITY,
                ..Default::default()
            };
            for p in Profiles::starting_at(game, start, len) {
                let (w, nash) = eval.evaluate(p.choices());
                if w > out.best {
                    out.best = w;
                    out.optimal.retain(|(_, v)| *v >= w - EPS);
                }
                if w >= out.best - EPS {
                    out.optimal.push((p.clone(), w));
                }
                if nash {
                    out.nash.push((p, w));
                }
            }
            out
        })
        .collect();

    let best = parts
        .iter()
        .map(|p| p.best)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut merged = ChunkScan {
        best,
        ..Default::default()
    };
    for part in parts {
        merged.nash.extend(part.nash);
        merged
            .optimal
            .extend(part.optimal.into_iter().filter(|(_, w)| *w >= best - EPS));
    }
    Ok(merged)
}

pub fn enumerate_nash(game: &Game) -> Result<Vec<ActionProfile>> {
    enumerate_nash_with_budget(game, DEFAULT_BUDGET)
}

/// All pure Nash equilibria, in lexicographic profile order.
pub fn enumerate_nash_with_budget(game: &Game, budget: u64) -> Result<Vec<ActionProfile>> {
    Ok(scan(game, budget)?
        .nash
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

pub fn optimal_profiles(game: &Game) -> Result<(Vec<ActionProfile>, Value)> {
    optimal_profiles_with_budget(game, DEFAULT_BUDGET)
}

/// Every welfare-maximizing profile (within `EPS`) and the optimal welfare.
pub fn optimal_profiles_with_budget(
    game: &Game,
    budget: u64,
) -> Result<(Vec<ActionProfile>, Value)> {
    let s = scan(game, budget)?;
    Ok((s.optimal.into_iter().map(|(p, _)| p).collect(), s.best))
}

pub fn analyze(game: &Game) -> Result<AnalysisReport> {
    analyze_with_budget(game, DEFAULT_BUDGET)
}

pub fn analyze_with_budget(game: &Game, budget: u64) -> Result<AnalysisReport> {
    let s = scan(game, budget)?;
    if s.best <= 0.0 {
        return Err(Error::ZeroWelfare);
    }
    let worst = s.nash.iter().map(|(_, w)| *w).fold(f64::INFINITY, f64::min);
    let best_ne = s
        .nash
        .iter()
        .map(|(_, w)| *w)
        .fold(f64::NEG_INFINITY, f64::max);
    // A pure equilibrium always exists; an empty set means a broken game.
    if s.nash.is_empty() {
        return Err(Error::InvalidGame("no pure Nash equilibrium found".into()));
    }
    Ok(AnalysisReport {
        nash_profiles: s.nash.into_iter().map(|(p, _)| p).collect(),
        optimal_profiles: s.optimal.into_iter().map(|(p, _)| p).collect(),
        optimal_welfare: s.best,
        worst_ne_welfare: worst,
        best_ne_welfare: best_ne,
        poa: worst / s.best,
        pos: (best_ne / s.best).min(1.0),
    })
}

pub fn price_of_anarchy(game: &Game) -> Result<f64> {
    Ok(analyze(game)?.poa)
}

pub fn price_of_stability(game: &Game) -> Result<f64> {
    Ok(analyze(game)?.pos)
}

/// Lower bound on the price of anarchy given `k` compromised agents and a
/// distance `distance` to the nearest game with an optimal equilibrium:
/// `min{1/2, 1/(k + 1 - distance)}`, or `1/2` when `k = 0`.
pub fn theorem_bound(k: usize, distance: Value) -> Result<f64> {
    if !distance.is_finite() || distance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "distance must be finite and nonnegative, got {distance}"
        )));
    }
    if distance > k as f64 + 1.0 + EPS {
        return Err(Error::InvalidParameter(format!(
            "distance {distance} exceeds k + 1 = {}",
            k + 1
        )));
    }
    if k == 0 {
        return Ok(0.5);
    }
    let denom = k as f64 + 1.0 - distance;
    if denom <= 2.0 {
        return Ok(0.5);
    }
    Ok((1.0 / denom).min(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Agent, Resource};
    use crate::instances::{worst_case_instance, WorstCaseParams};

    fn fig1(k: usize, d: f64) -> Game {
        worst_case_instance(&WorstCaseParams::new(k, d)).unwrap()
    }

    /// Direct unilateral-deviation check through the public utility API.
    fn nash_by_definition(game: &Game, p: &ActionProfile) -> bool {
        (0..game.num_agents()).all(|i| {
            let now = game.utility(i, p).unwrap();
            game.action_set(i)
                .iter()
                .all(|&r| game.utility(i, &p.with_choice(i, r)).unwrap() <= now + EPS)
        })
    }

    #[test]
    fn is_nash_on_small_worst_case() {
        let g = fig1(1, 0.5);
        assert_eq!(g.values(), vec![1.0, 0.5]);
        let both_r0 = ActionProfile::new(vec![0, 0]);
        let split = ActionProfile::new(vec![0, 1]);
        assert!(is_nash(&g, &both_r0).unwrap());
        assert!(!is_nash(&g, &split).unwrap());
        assert!(nash_by_definition(&g, &both_r0));
        assert!(!nash_by_definition(&g, &split));
    }

    #[test]
    fn single_agent_picks_best() {
        let g = Game::new(
            vec![Resource::new("r0", 1.0), Resource::new("r1", 0.3)],
            vec![Agent::new("a", vec![0, 1], false)],
        )
        .unwrap();
        assert_eq!(
            enumerate_nash(&g).unwrap(),
            vec![ActionProfile::new(vec![0])]
        );
    }

    #[test]
    fn enumerate_matches_definition() {
        for (k, d) in [(1, 0.5), (2, 0.0), (2, 1.0), (3, 1.0)] {
            let g = fig1(k, d);
            let expected: Vec<_> = profiles(&g, DEFAULT_BUDGET)
                .unwrap()
                .filter(|p| nash_by_definition(&g, p))
                .collect();
            assert_eq!(enumerate_nash(&g).unwrap(), expected);
        }
        assert_eq!(
            enumerate_nash(&fig1(1, 0.5)).unwrap(),
            vec![ActionProfile::new(vec![0, 0])]
        );
    }

    #[test]
    fn ties_at_zero_distance_allow_either_choice() {
        // k = 2, D = 0: compromised agents are indifferent between R0 and
        // their own resource, so all four combinations are equilibria.
        let nash = enumerate_nash(&fig1(2, 0.0)).unwrap();
        assert_eq!(nash.len(), 4);
        assert!(nash.contains(&ActionProfile::new(vec![0, 0, 0])));
        assert!(nash.contains(&ActionProfile::new(vec![0, 1, 2])));
    }

    #[test]
    fn optimal_profiles_examples() {
        let (opt, w) = optimal_profiles(&fig1(1, 0.5)).unwrap();
        assert_eq!(opt, vec![ActionProfile::new(vec![0, 1])]);
        assert!((w - 1.5).abs() < EPS);

        let (_, w) = optimal_profiles(&fig1(3, 1.0)).unwrap();
        assert!((w - 3.0).abs() < EPS);

        let g = Game::new(
            vec![Resource::new("r0", 1.0), Resource::new("r1", 0.2)],
            vec![
                Agent::new("a", vec![0], false),
                Agent::new("b", vec![1], false),
            ],
        )
        .unwrap();
        let (opt, _) = optimal_profiles(&g).unwrap();
        assert_eq!(opt, vec![ActionProfile::new(vec![0, 1])]);
    }

    #[test]
    fn poa_of_worst_case_family() {
        assert!((price_of_anarchy(&fig1(1, 0.5)).unwrap() - 2.0 / 3.0).abs() < EPS);
        assert!((price_of_anarchy(&fig1(3, 1.0)).unwrap() - 1.0 / 3.0).abs() < EPS);
    }

    #[test]
    fn zero_welfare_is_an_error() {
        let g = Game::new(
            vec![Resource::new("r0", 0.0)],
            vec![Agent::new("a", vec![0], false)],
        )
        .unwrap();
        assert!(matches!(analyze(&g), Err(Error::ZeroWelfare)));
    }

    #[test]
    fn budget_is_enforced() {
        let g = fig1(4, 1.0);
        match enumerate_nash_with_budget(&g, 10) {
            Err(Error::TooLarge { profiles, budget }) => {
                assert_eq!(profiles, 16);
                assert_eq!(budget, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chunked_scan_matches_sequential() {
        // Large enough to span several chunks.
        let g = worst_case_instance(&WorstCaseParams {
            k: 7,
            distance: 1.0,
            dummy_count: 2,
            dummy_value: 0.0,
        })
        .unwrap();
        assert!(profile_count(&g) > CHUNK as u128);
        let expected: Vec<_> = profiles(&g, DEFAULT_BUDGET)
            .unwrap()
            .filter(|p| nash_by_definition(&g, p))
            .collect();
        assert_eq!(enumerate_nash(&g).unwrap(), expected);
        let (_, w) = optimal_profiles(&g).unwrap();
        assert!((w - g.max_welfare()).abs() < EPS);
    }

    #[test]
    fn theorem_bound_examples() {
        assert!((theorem_bound(10, 1.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(theorem_bound(0, 0.0).unwrap(), 0.5);
        assert_eq!(theorem_bound(3, 2.5).unwrap(), 0.5);
        assert!((theorem_bound(3, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(theorem_bound(3, 4.5).is_err());
        assert!(theorem_bound(3, -1.0).is_err());
    }
}
