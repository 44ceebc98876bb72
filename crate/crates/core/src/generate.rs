//! Seeded random instance generators.
//!
//! Every generator draws from a caller-supplied [`ChaCha8Rng`], so the same
//! seed reproduces the same instance byte for byte. Weights are kept as
//! small-denominator rationals, with reward weights a notch larger than
//! costs, so that generated schedules usually have breakpoints inside the
//! contract range instead of collapsing to a constant selection.
//!
//! Rewards come either from families whose class membership holds by
//! construction (additive, concave-symmetric, assignment, …) or by rejection
//! sampling random monotone tables against the triplet checker.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::classes;
use crate::cost::SPACost;
use crate::rational::Rational;
use crate::reward::RewardFunction;

/// Maximum draws before table rejection sampling reports failure.
pub const REJECTION_BUDGET: usize = 10_000;

/// Rejection sampling needs the exhaustive triplet checker per draw, so the
/// ground set is kept tiny.
pub const MAX_REJECTION: usize = 6;

/// Explicit-table generators materialize all `2ⁿ` values.
pub const MAX_TABLE: usize = 14;

/// Errors from instance generation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("rejection sampling exhausted its {budget}-draw budget")]
    RejectionBudget { budget: usize },
    #[error("this generator supports at most {max} actions, got {n}")]
    TooLarge { n: usize, max: usize },
}

/// A positive rational `num/den` with `num ∈ 1..=max_num` and `den` from the
/// given palette.
fn frac(rng: &mut ChaCha8Rng, max_num: i64, dens: &[i64]) -> Rational {
    let num = rng.gen_range(1..=max_num);
    let den = dens[rng.gen_range(0..dens.len())];
    Rational::new(num, den)
}

/// Reward-scale weight: typically around 1.
fn reward_weight(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng, 8, &[3, 4, 5, 6, 8])
}

/// Cost-scale price: typically well below the reward weights.
fn cost_weight(rng: &mut ChaCha8Rng) -> Rational {
    frac(rng, 6, &[10, 12, 16, 20, 24])
}

/// Additive reward with positive weights.
pub fn additive_reward(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let weights = (0..n).map(|_| reward_weight(rng)).collect();
    RewardFunction::additive(weights).expect("positive weights")
}

/// Symmetric reward with strictly increasing, concave levels.
pub fn symmetric_concave_reward(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let mut increments: Vec<Rational> = (0..n).map(|_| reward_weight(rng)).collect();
    increments.sort_by(|a, b| b.cmp(a));
    let mut levels = vec![Rational::zero()];
    for d in increments {
        levels.push(levels.last().unwrap() + d);
    }
    RewardFunction::symmetric(levels).expect("increasing levels")
}

/// Additive-plus-cardinality reward `f(S) = Σ w(a) + h(|S|)` with `h`
/// nondecreasing from 0, materialized as a table. Marginals of any three
/// absent actions split into the same action weights plus the same
/// cardinality steps on both sides of the triplet inequality, so the family
/// is certified by construction — including non-submodular members whenever
/// `h` has growing steps.
pub fn chain_sum_reward(n: usize, rng: &mut ChaCha8Rng) -> Result<RewardFunction, GenerateError> {
    if n > MAX_TABLE {
        return Err(GenerateError::TooLarge { n, max: MAX_TABLE });
    }
    let weights: Vec<Rational> = (0..n).map(|_| reward_weight(rng)).collect();
    let mut steps = Vec::with_capacity(n);
    for _ in 0..n {
        steps.push(if rng.gen_bool(0.4) { Rational::zero() } else { frac(rng, 4, &[2, 3, 4]) });
    }
    let mut card = vec![Rational::zero()];
    for d in &steps {
        card.push(card.last().unwrap() + d);
    }
    let table = (0..(1u64 << n))
        .map(|mask| {
            let sum: Rational =
                (0..n).filter(|a| mask >> a & 1 == 1).map(|a| weights[a].clone()).sum();
            sum + &card[mask.count_ones() as usize]
        })
        .collect();
    Ok(RewardFunction::explicit(table).expect("monotone by construction"))
}

/// Budget-additive reward; the budget sits between the weight range and the
/// full sum so the cap actually binds on some sets.
pub fn budget_additive_reward(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let weights: Vec<Rational> = (0..n).map(|_| reward_weight(rng)).collect();
    let total: Rational = weights.iter().cloned().sum();
    let k = rng.gen_range(1..=n as i64);
    let budget = total * Rational::new(k, n as i64 + 1);
    RewardFunction::budget_additive(weights, budget).expect("positive weights")
}

/// Unit-demand reward with positive weights.
pub fn unit_demand_reward(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let weights = (0..n).map(|_| reward_weight(rng)).collect();
    RewardFunction::unit_demand(weights).expect("positive weights")
}

/// Assignment reward over 2–3 slots with a sprinkling of zero entries.
pub fn oxs_reward(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let slots = rng.gen_range(2..=3usize);
    let weights: Vec<Vec<Rational>> = (0..slots)
        .map(|_| {
            (0..n)
                .map(|_| if rng.gen_bool(0.25) { Rational::zero() } else { reward_weight(rng) })
                .collect()
        })
        .collect();
    RewardFunction::oxs(weights).expect("nonnegative matrix")
}

/// Random monotone table: each set adds a (often zero) increment on top of
/// its best one-smaller subset.
pub fn monotone_table_reward(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RewardFunction, GenerateError> {
    if n > MAX_TABLE {
        return Err(GenerateError::TooLarge { n, max: MAX_TABLE });
    }
    let size = 1usize << n;
    let mut table = vec![Rational::zero(); size];
    for mask in 1..size {
        let floor = (0..n)
            .filter(|a| mask >> a & 1 == 1)
            .map(|a| table[mask & !(1 << a)].clone())
            .max()
            .expect("nonempty set");
        let bump =
            if rng.gen_bool(0.3) { Rational::zero() } else { frac(rng, 3, &[2, 3, 4, 6]) };
        table[mask] = floor + bump;
    }
    Ok(RewardFunction::explicit(table).expect("monotone by construction"))
}

/// Random monotone table with coarse half-unit increments whose probability
/// decays steeply with set size. Much likelier than [`monotone_table_reward`]
/// to satisfy the triplet inequality, which keeps rejection sampling inside
/// its budget, while still producing non-substitutes members.
pub fn coarse_monotone_table_reward(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RewardFunction, GenerateError> {
    if n > MAX_TABLE {
        return Err(GenerateError::TooLarge { n, max: MAX_TABLE });
    }
    let size = 1usize << n;
    let mut table = vec![Rational::zero(); size];
    for mask in 1..size {
        let floor = (0..n)
            .filter(|a| mask >> a & 1 == 1)
            .map(|a| table[mask & !(1 << a)].clone())
            .max()
            .expect("nonempty set");
        let p = match mask.count_ones() {
            1 => 0.9,
            2 => 0.15,
            _ => 0.02,
        };
        let bump = if rng.gen_bool(p) { Rational::new(1, 2) } else { Rational::zero() };
        table[mask] = floor + bump;
    }
    Ok(RewardFunction::explicit(table).expect("monotone by construction"))
}

/// Draws coarse random monotone tables until one passes the exhaustive
/// triplet check, within [`REJECTION_BUDGET`] attempts.
pub fn ultra_rejection_reward(
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RewardFunction, GenerateError> {
    if n > MAX_REJECTION {
        return Err(GenerateError::TooLarge { n, max: MAX_REJECTION });
    }
    for _ in 0..REJECTION_BUDGET {
        let f = coarse_monotone_table_reward(n, rng)?;
        if classes::check_triplet(&f).expect("within checker capacity").holds() {
            return Ok(f);
        }
    }
    Err(GenerateError::RejectionBudget { budget: REJECTION_BUDGET })
}

/// Purely additive cost with positive prices.
pub fn additive_cost(n: usize, rng: &mut ChaCha8Rng) -> SPACost {
    let prices = (0..n).map(|_| cost_weight(rng)).collect();
    SPACost::additive_only(prices).expect("positive prices")
}

/// Additive-plus-symmetric cost; both parts drawn nontrivial.
pub fn spa_cost(n: usize, rng: &mut ChaCha8Rng) -> SPACost {
    let prices: Vec<Rational> = (0..n)
        .map(|_| if rng.gen_bool(0.25) { Rational::zero() } else { cost_weight(rng) })
        .collect();
    let mut levels = vec![Rational::zero()];
    for _ in 0..n {
        let step = if rng.gen_bool(0.4) { Rational::zero() } else { cost_weight(rng) };
        levels.push(levels.last().unwrap() + step);
    }
    SPACost::new(prices, levels).expect("nonnegative parts")
}

/// Purely symmetric cost with strictly increasing levels.
pub fn symmetric_cost(n: usize, rng: &mut ChaCha8Rng) -> SPACost {
    let mut levels = vec![Rational::zero()];
    for _ in 0..n {
        levels.push(levels.last().unwrap() + cost_weight(rng));
    }
    SPACost::symmetric_only(levels).expect("increasing levels")
}

/// Additive cost with at least one deliberately duplicated price (two for
/// larger ground sets), for perturbation experiments.
pub fn degenerate_additive_cost(n: usize, rng: &mut ChaCha8Rng) -> SPACost {
    assert!(n >= 2, "need two actions to duplicate a price");
    let mut prices: Vec<Rational> = (0..n).map(|_| cost_weight(rng)).collect();
    let src = rng.gen_range(0..n);
    let dst = (src + rng.gen_range(1..n)) % n;
    prices[dst] = prices[src].clone();
    if n >= 4 {
        let other = (dst + 1) % n;
        let target = (src + n - 1) % n;
        if other != src && other != dst && target != other {
            prices[other] = prices[target].clone();
        }
    }
    SPACost::additive_only(prices).expect("positive prices")
}

/// Instance family pairing a certified reward class with a cost shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundFamily {
    UltraAdditive,
    UltraSpa,
    GsSpa,
    WwlSymmetric,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 4] =
        [Self::UltraAdditive, Self::UltraSpa, Self::GsSpa, Self::WwlSymmetric];

    pub fn name(self) -> &'static str {
        match self {
            Self::UltraAdditive => "ultra+additive",
            Self::UltraSpa => "ultra+spa",
            Self::GsSpa => "gs+spa",
            Self::WwlSymmetric => "wwl+symmetric",
        }
    }
}

impl std::str::FromStr for BoundFamily {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family {s:?}"))
    }
}

/// A reward from the triplet-certified mix: by-construction families at any
/// size, plus rejection-sampled tables on tiny ground sets.
pub fn ultra_reward_mix(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    let include_tables = n <= MAX_REJECTION;
    let roll = rng.gen_range(0..if include_tables { 6 } else { 5 });
    match roll {
        0 => additive_reward(n, rng),
        1 => symmetric_concave_reward(n, rng),
        2 => unit_demand_reward(n, rng),
        3 => oxs_reward(n, rng),
        4 => chain_sum_reward(n, rng).expect("size checked by caller"),
        _ => ultra_rejection_reward(n, rng)
            .unwrap_or_else(|_| chain_sum_reward(n, rng).expect("size checked by caller")),
    }
}

/// A reward from the substitutes mix (monotone, submodular, triplet).
pub fn gs_reward_mix(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    match rng.gen_range(0..4) {
        0 => additive_reward(n, rng),
        1 => symmetric_concave_reward(n, rng),
        2 => unit_demand_reward(n, rng),
        _ => oxs_reward(n, rng),
    }
}

/// A reward from the weakly-well-layered mix; budget-additive draws are
/// weighted up since they are the members outside the triplet class.
pub fn wwl_reward_mix(n: usize, rng: &mut ChaCha8Rng) -> RewardFunction {
    match rng.gen_range(0..4) {
        0 | 1 => budget_additive_reward(n, rng),
        2 => additive_reward(n, rng),
        _ => symmetric_concave_reward(n, rng),
    }
}

/// One random instance of the family.
pub fn draw_instance(
    family: BoundFamily,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (RewardFunction, SPACost) {
    match family {
        BoundFamily::UltraAdditive => (ultra_reward_mix(n, rng), additive_cost(n, rng)),
        BoundFamily::UltraSpa => (ultra_reward_mix(n, rng), spa_cost(n, rng)),
        BoundFamily::GsSpa => (gs_reward_mix(n, rng), spa_cost(n, rng)),
        BoundFamily::WwlSymmetric => (wwl_reward_mix(n, rng), symmetric_cost(n, rng)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn test_generators_are_deterministic() {
        for family in BoundFamily::ALL {
            let (f1, c1) = draw_instance(family, 5, &mut rng(42));
            let (f2, c2) = draw_instance(family, 5, &mut rng(42));
            assert_eq!(f1.table(), f2.table(), "{}", family.name());
            assert_eq!(c1, c2, "{}", family.name());
        }
    }

    #[test]
    fn test_additive_and_symmetric_families_are_substitutes() {
        for seed in 0..20 {
            let f = additive_reward(4, &mut rng(seed));
            let report = classes::classify(&f).unwrap();
            assert!(report.gs && report.ultra, "additive seed {seed}");
            let f = symmetric_concave_reward(4, &mut rng(seed));
            let report = classes::classify(&f).unwrap();
            assert!(report.gs, "symmetric-concave seed {seed}");
        }
    }

    #[test]
    fn test_assignment_and_unit_demand_are_substitutes() {
        for seed in 0..20 {
            let f = oxs_reward(5, &mut rng(seed));
            let report = classes::classify(&f).unwrap();
            assert!(report.gs, "assignment seed {seed}");
            let f = unit_demand_reward(5, &mut rng(seed));
            assert!(classes::classify(&f).unwrap().gs, "unit-demand seed {seed}");
        }
    }

    #[test]
    fn test_chain_sum_family_is_triplet_certified() {
        let mut not_submodular = 0;
        for seed in 0..30 {
            let f = chain_sum_reward(5, &mut rng(seed)).unwrap();
            let report = classes::classify(&f).unwrap();
            assert!(report.monotone && report.ultra, "chain-sum seed {seed}");
            if !report.submodular {
                not_submodular += 1;
            }
        }
        // The family must exercise the triplet class beyond substitutes.
        assert!(not_submodular > 0);
    }

    #[test]
    fn test_monotone_tables_are_monotone() {
        for seed in 0..20 {
            let f = monotone_table_reward(5, &mut rng(seed)).unwrap();
            assert!(classes::check_monotone(&f).unwrap().holds(), "seed {seed}");
        }
    }

    #[test]
    fn test_rejection_sampling_returns_triplet_functions() {
        for seed in 0..5 {
            for n in [4, 5, 6] {
                let f = ultra_rejection_reward(n, &mut rng(seed)).unwrap();
                assert!(classes::check_triplet(&f).unwrap().holds(), "seed {seed} n {n}");
            }
        }
    }

    #[test]
    fn test_rejection_sampling_caps_ground_set() {
        assert!(matches!(
            ultra_rejection_reward(7, &mut rng(1)),
            Err(GenerateError::TooLarge { n: 7, max: MAX_REJECTION })
        ));
    }

    #[test]
    fn test_budget_additive_family_is_weakly_well_layered() {
        for seed in 0..20 {
            let f = budget_additive_reward(4, &mut rng(seed));
            assert!(classes::check_wwl(&f).unwrap().holds(), "seed {seed}");
        }
    }

    #[test]
    fn test_degenerate_costs_have_duplicates() {
        for seed in 0..20 {
            for n in [2, 3, 5, 6] {
                let c = degenerate_additive_cost(n, &mut rng(seed));
                let prices = c.additive_part();
                let distinct: std::collections::BTreeSet<_> = prices.iter().collect();
                assert!(distinct.len() < prices.len(), "seed {seed} n {n}");
            }
        }
    }

    #[test]
    fn test_cost_shapes() {
        let c = spa_cost(5, &mut rng(9));
        assert_eq!(c.n(), 5);
        let sym = symmetric_cost(5, &mut rng(9));
        assert!(sym.is_symmetric_only());
        let add = additive_cost(5, &mut rng(9));
        assert!(add.is_additive_only());
        for a in 0..5 {
            assert!(add.action_cost(a).is_positive());
        }
    }

    #[test]
    fn test_family_names_round_trip() {
        for family in BoundFamily::ALL {
            assert_eq!(family.name().parse::<BoundFamily>().unwrap(), family);
        }
        assert!("nope".parse::<BoundFamily>().is_err());
    }
}
