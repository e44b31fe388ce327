mod common;

use common::{corpus_game, Compromised};
use coverage_poa_core::equilibria::profiles;
use coverage_poa_core::{
    analyze, apply_perturbation, compute_distance, optimal_profile_distance, theorem_bound,
    worst_case_instance, ActionProfile, Game, WorstCaseParams, EPS,
};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn all_profiles(game: &Game) -> Vec<ActionProfile> {
    profiles(game, 1_000_000).unwrap().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn marginal_is_welfare_difference(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::None);
        for a in all_profiles(&g) {
            let w = g.welfare(&a).unwrap();
            let mut total = 0.0;
            for i in 0..g.num_agents() {
                let m = g.marginal_utility(i, &a).unwrap();
                prop_assert!((m - (w - g.welfare_without(i, &a).unwrap())).abs() < TOL);
                prop_assert!(m >= -TOL);
                total += m;
            }
            prop_assert!(total <= w + TOL);
        }
    }

    #[test]
    fn welfare_is_monotone_and_submodular(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::None);
        let n = g.num_resources();
        let cover = |mask: u32| -> f64 {
            (0..n).filter(|r| mask >> r & 1 == 1).map(|r| g.value(r)).sum()
        };
        for s in 0u32..1 << n {
            for r in 0..n {
                let with_r = s | 1 << r;
                prop_assert!(cover(with_r) >= cover(s) - TOL);
                for t in (0u32..1 << n).filter(|t| t & s == s) {
                    let gain_s = cover(s | 1 << r) - cover(s);
                    let gain_t = cover(t | 1 << r) - cover(t);
                    prop_assert!(gain_s >= gain_t - TOL);
                }
            }
        }
    }

    #[test]
    fn compromised_utility_ignores_others(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::AtLeastOne);
        let ps = all_profiles(&g);
        for c in g.compromised() {
            for a in &ps {
                let u = g.utility(c, a).unwrap();
                prop_assert_eq!(u, g.value(a.choices()[c]));
            }
        }
    }

    #[test]
    fn equilibria_exist_and_are_ordered(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::AtLeastOne);
        let r = analyze(&g).unwrap();
        prop_assert!(!r.nash_profiles.is_empty());
        prop_assert!(r.poa <= r.pos + TOL);
        prop_assert!(r.pos <= 1.0 + TOL);
        prop_assert!(r.poa > 0.0);
    }

    #[test]
    fn matching_optimum_matches_enumeration(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::None);
        let brute = all_profiles(&g)
            .iter()
            .map(|a| g.welfare(a).unwrap())
            .fold(0.0, f64::max);
        prop_assert!((g.max_welfare() - brute).abs() < TOL);
    }

    #[test]
    fn distance_is_sound(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 4, Compromised::AtLeastOne);
        let d = compute_distance(&g).unwrap();
        prop_assert!(d.perturbation.0.iter().all(|&x| x >= -EPS));
        prop_assert!((d.perturbation.l1() - d.distance).abs() < TOL);
        let perturbed = apply_perturbation(&g, &d.perturbation).unwrap();
        let r = analyze(&perturbed).unwrap();
        prop_assert!(r.pos >= 1.0 - 1e-7);
        prop_assert!(r.nash_profiles.contains(&d.witness_profile));
        let w = perturbed.welfare(&d.witness_profile).unwrap();
        prop_assert!(w >= r.optimal_welfare - 1e-7);
    }

    #[test]
    fn exact_distance_never_exceeds_restricted(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 4, Compromised::AtLeastOne);
        let exact = compute_distance(&g).unwrap();
        let restricted = optimal_profile_distance(&g).unwrap();
        prop_assert!(exact.distance <= restricted.distance + TOL);
        let chosen: Vec<usize> = g
            .compromised()
            .iter()
            .map(|&c| restricted.witness_profile.choices()[c])
            .collect();
        for r in restricted.perturbation.support() {
            prop_assert!(chosen.contains(&r));
        }
    }

    #[test]
    fn optimal_equilibrium_means_zero_distance(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 4, Compromised::AtLeastOne);
        let r = analyze(&g).unwrap();
        let d = compute_distance(&g).unwrap().distance;
        if r.pos >= 1.0 - TOL {
            prop_assert!(d.abs() < TOL);
        } else {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn bound_holds_with_exact_distance(seed in any::<u64>()) {
        let g = corpus_game(seed, 4, 5, Compromised::AtLeastOne);
        let k = g.num_compromised();
        let poa = analyze(&g).unwrap().poa;
        let d = compute_distance(&g).unwrap().distance;
        let bound = theorem_bound(k, d.min(k as f64 + 1.0)).unwrap();
        prop_assert!(poa >= bound - TOL);
    }

    #[test]
    fn worst_case_family_is_tight(k in 1usize..=4, half_steps in 0usize..8, z in 0usize..2) {
        let d = (half_steps as f64 * 0.5).min((k - 1) as f64);
        let g = worst_case_instance(&WorstCaseParams::new(k, d).with_dummies(z)).unwrap();
        let poa = analyze(&g).unwrap().poa;
        prop_assert!((poa - 1.0 / (1.0 + k as f64 - d)).abs() < TOL);
        let kf = k as f64;
        // With dummies the normal agent can park on a raised dummy instead.
        let expected = if z == 0 { d } else { d.min(1.0 + (kf - 2.0) * d / kf) };
        prop_assert!((compute_distance(&g).unwrap().distance - expected).abs() < TOL);
        if z == 0 {
            prop_assert!((poa - theorem_bound(k, d).unwrap()).abs() < TOL || kf - d < 1.0);
        }
    }
}
