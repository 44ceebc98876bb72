//! Randomized invariants checked with proptest. Instances are drawn from the
//! seeded generators so every failure shrinks to a reproducible seed.

use proptest::prelude::*;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contracts_core::action_set::ActionSet;
use contracts_core::classes;
use contracts_core::critical::{
    agent_utility, brute_force_critical_values, optimal_from_schedule, principal_utility,
};
use contracts_core::demand::{
    alt_greedy_gs_spa, greedy_gs_spa, greedy_ultra2, greedy_ultra_spa, greedy_up_to_t,
    greedy_wwl_symmetric, BruteForcer,
};
use contracts_core::generate::{additive_reward, draw_instance, BoundFamily};
use contracts_core::rational::Rational;
use contracts_core::structure::epsilon_perturb;

fn family_for(seed: u64) -> BoundFamily {
    BoundFamily::ALL[(seed % 4) as usize]
}

fn alpha_in_unit(num: i64, den: i64) -> Rational {
    Rational::new(num.min(den), den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Every reported maximizer attains the reported utility; the canonical
    /// choice is the lowest mask among reward-maximal maximizers; the tie
    /// flag fires exactly when the maximizer is not unique.
    #[test]
    fn brute_force_demand_is_canonical(
        seed in any::<u64>(),
        n in 3usize..=5,
        num in 0i64..=40,
        den in 1i64..=40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, c) = draw_instance(family_for(seed), n, &mut rng);
        let alpha = alpha_in_unit(num, den);
        let forcer = BruteForcer::new(&f, &c).unwrap();
        let demand = forcer.demand(&alpha);

        for s in &demand.maximizers {
            prop_assert_eq!(&agent_utility(&f, &c, &alpha, s), &demand.result.utility);
        }
        for s in &demand.reward_maximal {
            prop_assert_eq!(&f.value(s), &demand.result.reward);
        }
        for s in &demand.maximizers {
            prop_assert!(f.value(s) <= demand.result.reward);
        }
        let canonical = demand.reward_maximal.iter().min_by_key(|s| s.mask()).unwrap();
        prop_assert_eq!(&demand.result.chosen, canonical);
        prop_assert_eq!(demand.result.tie_events >= 1, demand.maximizers.len() > 1);
    }

    /// On its certified family, each chain algorithm earns exactly the
    /// brute-force utility and reward at an arbitrary contract.
    #[test]
    fn chain_demand_matches_brute_force(
        seed in any::<u64>(),
        n in 3usize..=5,
        num in 0i64..=40,
        den in 1i64..=40,
    ) {
        let family = family_for(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, c) = draw_instance(family, n, &mut rng);
        let alpha = alpha_in_unit(num, den);
        let got = match family {
            BoundFamily::UltraAdditive => greedy_ultra2(&alpha, &f, &c),
            BoundFamily::UltraSpa => greedy_ultra_spa(&alpha, &f, &c),
            BoundFamily::GsSpa => {
                if seed % 2 == 0 {
                    greedy_gs_spa(&alpha, &f, &c)
                } else {
                    alt_greedy_gs_spa(&alpha, &f, &c)
                }
            }
            BoundFamily::WwlSymmetric => greedy_wwl_symmetric(&alpha, &f, &c),
        }
        .unwrap();
        let expected = BruteForcer::new(&f, &c).unwrap().demand(&alpha).result;
        prop_assert_eq!(got.utility, expected.utility);
        prop_assert_eq!(got.reward, expected.reward);
    }

    /// Raising the size cap never drops a chosen action.
    #[test]
    fn size_capped_demand_nests(
        seed in any::<u64>(),
        n in 3usize..=6,
        num in 0i64..=40,
        den in 1i64..=40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, c) = draw_instance(BoundFamily::UltraAdditive, n, &mut rng);
        let alpha = alpha_in_unit(num, den);
        let mut prev = ActionSet::empty(n);
        for t in 1..=n {
            let capped = greedy_up_to_t(&alpha, t, &f, &c).unwrap().chosen;
            prop_assert!(prev.is_subset_of(&capped));
            prev = capped;
        }
    }

    /// Envelope schedules are sorted chains with strictly growing reward and
    /// cost, and their selection agrees with brute-force demand everywhere.
    #[test]
    fn envelope_schedule_is_a_sorted_chain(
        seed in any::<u64>(),
        n in 3usize..=5,
        num in 0i64..=40,
        den in 1i64..=40,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, c) = draw_instance(family_for(seed), n, &mut rng);
        let schedule = brute_force_critical_values(&f, &c).unwrap();

        let mut prev_alpha: Option<Rational> = None;
        let mut prev_after = schedule.initial;
        for b in &schedule.breakpoints {
            prop_assert!(b.alpha.is_positive() && b.alpha <= Rational::one());
            if let Some(p) = &prev_alpha {
                prop_assert!(p < &b.alpha);
            }
            prop_assert_eq!(b.before, prev_after);
            prop_assert!(b.f_before < b.f_after);
            prop_assert!(b.c_before < b.c_after);
            prop_assert_eq!(&b.f_before, &f.value(&b.before));
            prop_assert_eq!(&c.value(&b.after), &b.c_after);
            prev_alpha = Some(b.alpha.clone());
            prev_after = b.after;
        }

        let alpha = alpha_in_unit(num, den);
        let selected = schedule.response_at(&alpha);
        let expected = BruteForcer::new(&f, &c).unwrap().demand(&alpha).result;
        prop_assert_eq!(f.value(&selected), expected.reward);
        prop_assert_eq!(agent_utility(&f, &c, &alpha, &selected), expected.utility);
    }

    /// The reported optimum is self-consistent and beats every candidate
    /// contract in the schedule.
    #[test]
    fn optimal_contract_is_consistent_and_dominant(
        seed in any::<u64>(),
        n in 3usize..=5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (f, c) = draw_instance(family_for(seed), n, &mut rng);
        let schedule = brute_force_critical_values(&f, &c).unwrap();
        let opt = optimal_from_schedule(&f, &c, &schedule);

        prop_assert_eq!(opt.best_response, schedule.response_at(&opt.alpha));
        prop_assert_eq!(
            &opt.agent_utility,
            &agent_utility(&f, &c, &opt.alpha, &opt.best_response)
        );
        prop_assert_eq!(
            &opt.principal_utility,
            &principal_utility(&f, &opt.alpha, &opt.best_response)
        );
        let mut candidates = vec![Rational::zero()];
        candidates.extend(schedule.breakpoints.iter().map(|b| b.alpha.clone()));
        prop_assert_eq!(opt.candidates_examined, candidates.len());
        for alpha in candidates {
            let response = schedule.response_at(&alpha);
            prop_assert!(principal_utility(&f, &alpha, &response) <= opt.principal_utility);
        }
    }

    /// Additive rewards land in every tractable class at once.
    #[test]
    fn additive_rewards_are_in_every_class(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = additive_reward(n, &mut rng);
        let report = classes::classify(&f).unwrap();
        prop_assert!(report.monotone);
        prop_assert!(report.additive);
        prop_assert!(report.submodular);
        prop_assert!(report.ultra);
        prop_assert!(report.gs);
        prop_assert!(report.wwl);
    }

    /// Price noise stays inside [0, ε) per action and scales exactly
    /// linearly when ε is halved with the same seed.
    #[test]
    fn perturbation_is_linear_in_epsilon(
        seed in any::<u64>(),
        n in 2usize..=6,
        den in 2i64..=1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, c) = draw_instance(BoundFamily::UltraAdditive, n, &mut rng);
        let eps = Rational::new(1, den);
        let half = Rational::new(1, 2 * den);
        let coarse = epsilon_perturb(&c, &eps, seed).unwrap();
        let fine = epsilon_perturb(&c, &half, seed).unwrap();
        for a in 0..n {
            let shift = coarse.action_cost(a) - c.action_cost(a);
            prop_assert!(!shift.is_negative());
            prop_assert!(shift < eps);
            let fine_shift = fine.action_cost(a) - c.action_cost(a);
            prop_assert_eq!(shift, fine_shift * Rational::from_int(2));
        }
    }
}
