//! Structural diagnostics for critical-value schedules.
//!
//! These tools explain *why* schedules of well-behaved instances stay short:
//! degeneracy detection (two different set pairs becoming indifferent at the
//! same contract value), a cost-rank potential that strictly increases along
//! a schedule, the local shape of consecutive best responses, and the closed
//! form size bounds each instance family guarantees. A seeded infinitesimal
//! cost perturbation removes degeneracies without decreasing the number of
//! critical values.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::action_set::ActionSet;
use crate::cost::SPACost;
use crate::critical::{ContractError, CriticalSchedule};
use crate::rational::Rational;
use crate::reward::RewardFunction;

/// Exhaustive pair enumeration cap for [`gamma_set`] and [`is_generic`].
pub const MAX_GAMMA: usize = 8;

/// Resolution of the fixed-point grid used by [`epsilon_perturb`].
const PERTURB_DENOMINATOR: i64 = 1 << 40;

/// Contract values at which two marked sets tie in marginal utility.
///
/// For disjoint `T1`, `T2` this collects, over *every* pair of base sets
/// `(S1, S2)`, the solutions of
/// `α·(f(S1∪T1) − f(S1)) − c(T1) = α·(f(S2∪T2) − f(S2)) − c(T2)`.
/// A base-set pair with equal marginals and equal costs makes every contract
/// value a solution; that is reported through `everywhere`, while `roots`
/// holds the isolated solutions (of either sign) from the remaining pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaSet {
    pub everywhere: bool,
    pub roots: BTreeSet<Rational>,
}

fn require_additive(c: &SPACost) -> Result<(), ContractError> {
    if !c.is_additive_only() {
        return Err(ContractError::NotAdditiveCost);
    }
    Ok(())
}

fn cap_gamma(n: usize) -> Result<(), ContractError> {
    if n > MAX_GAMMA {
        return Err(ContractError::TooLarge { n, max: MAX_GAMMA });
    }
    Ok(())
}

/// All distinct marginal values `f(S ∪ T) − f(S)` of `T`, over every base set.
fn marginal_values(table: &[Rational], n: usize, t: u64) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for mask in 0..(1u64 << n) {
        out.insert(&table[(mask | t) as usize] - &table[mask as usize]);
    }
    out
}

/// The tie set of two disjoint marked sets under an additive cost.
pub fn gamma_set(
    f: &RewardFunction,
    c: &SPACost,
    t1: &ActionSet,
    t2: &ActionSet,
) -> Result<GammaSet, ContractError> {
    require_additive(c)?;
    let n = f.n();
    cap_gamma(n)?;
    if !t1.intersection(t2).is_empty() {
        return Err(ContractError::OverlappingSets);
    }
    if t1.is_empty() && t2.is_empty() {
        return Err(ContractError::EmptyPair);
    }
    let table = f.table();
    let m1 = marginal_values(&table, n, t1.mask());
    let m2 = marginal_values(&table, n, t2.mask());
    let gap = c.value(t1) - c.value(t2);

    let mut diffs = BTreeSet::new();
    for a in &m1 {
        for b in &m2 {
            diffs.insert(a - b);
        }
    }
    let everywhere = gap.is_zero() && diffs.contains(&Rational::zero());
    let mut roots = BTreeSet::new();
    for d in &diffs {
        if !d.is_zero() {
            roots.insert(&gap / d);
        }
    }
    Ok(GammaSet { everywhere, roots })
}

/// A degeneracy witness: why an instance is not generic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum GammaCollision {
    /// One marked pair ties at every contract value (equal pair costs).
    Everywhere { pair: (ActionSet, ActionSet) },
    /// Two different marked pairs tie at the same positive contract value.
    SharedRoot {
        alpha: Rational,
        first: (ActionSet, ActionSet),
        second: (ActionSet, ActionSet),
    },
}

/// Outcome of the exhaustive degeneracy scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenericityReport {
    pub generic: bool,
    /// Whether all `2ⁿ` subset costs are pairwise distinct (a necessary
    /// condition: any repeat makes some disjoint pair tie everywhere).
    pub distinct_set_costs: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collision: Option<GammaCollision>,
}

/// Scans every unordered pair of disjoint marked sets (not both empty) and
/// reports whether any positive contract value ties two different pairs.
pub fn is_generic(f: &RewardFunction, c: &SPACost) -> Result<GenericityReport, ContractError> {
    require_additive(c)?;
    let n = f.n();
    cap_gamma(n)?;
    if f.n() != c.n() {
        return Err(crate::demand::DemandError::MismatchedGroundSets { f: f.n(), c: c.n() }.into());
    }
    let table = f.table();
    let size = 1u64 << n;

    let costs: Vec<Rational> = (0..size)
        .map(|mask| c.value(&ActionSet::from_mask(mask, n).expect("in range")))
        .collect();
    let distinct_set_costs = costs.iter().collect::<BTreeSet<_>>().len() == size as usize;

    let marginals: Vec<BTreeSet<Rational>> =
        (0..size).map(|t| marginal_values(&table, n, t)).collect();

    let to_pair = |a: u64, b: u64| {
        (
            ActionSet::from_mask(a, n).expect("in range"),
            ActionSet::from_mask(b, n).expect("in range"),
        )
    };
    let mut seen: BTreeMap<Rational, (u64, u64)> = BTreeMap::new();
    for t1 in 0..size {
        for t2 in (t1 + 1)..size {
            if t1 & t2 != 0 {
                continue;
            }
            let gap = &costs[t1 as usize] - &costs[t2 as usize];
            if gap.is_zero() {
                // Both marginal sets contain 0 (take the full ground set as
                // the base), so equal pair costs tie at every contract value.
                return Ok(GenericityReport {
                    generic: false,
                    distinct_set_costs,
                    collision: Some(GammaCollision::Everywhere { pair: to_pair(t1, t2) }),
                });
            }
            let positive = gap.is_positive();
            for a in &marginals[t1 as usize] {
                for b in &marginals[t2 as usize] {
                    let d = a - b;
                    if d.is_zero() || d.is_positive() != positive {
                        continue;
                    }
                    let alpha = &gap / &d;
                    if let Some(&(p1, p2)) = seen.get(&alpha) {
                        if (p1, p2) != (t1, t2) {
                            return Ok(GenericityReport {
                                generic: false,
                                distinct_set_costs,
                                collision: Some(GammaCollision::SharedRoot {
                                    alpha,
                                    first: to_pair(p1, p2),
                                    second: to_pair(t1, t2),
                                }),
                            });
                        }
                    } else {
                        seen.insert(alpha, (t1, t2));
                    }
                }
            }
        }
    }
    Ok(GenericityReport { generic: true, distinct_set_costs, collision: None })
}

/// Adds to every action price an independent uniform draw from the grid
/// `{0, ε/2⁴⁰, 2ε/2⁴⁰, …}` below `ε`. Seeded and fully deterministic; with
/// `ε` small enough this breaks cost ties without removing any breakpoint.
pub fn epsilon_perturb(
    c: &SPACost,
    eps: &Rational,
    seed: u64,
) -> Result<SPACost, ContractError> {
    require_additive(c)?;
    if !eps.is_positive() {
        return Err(ContractError::NonPositiveEpsilon);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prices: Vec<Rational> = c
        .additive_part()
        .iter()
        .map(|p| {
            let k = rng.gen_range(0..PERTURB_DENOMINATOR);
            p + eps * Rational::new(k, PERTURB_DENOMINATOR)
        })
        .collect();
    Ok(SPACost::additive_only(prices).expect("perturbed prices stay nonnegative"))
}

/// Cost ranks of the actions: ascending price, rank 1 for the cheapest
/// through rank `n` for the most expensive. Requires pairwise distinct prices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PotentialRanks {
    ranks: Vec<usize>,
}

impl PotentialRanks {
    pub fn new(c: &SPACost) -> Result<Self, ContractError> {
        require_additive(c)?;
        let prices = c.additive_part();
        let mut order: Vec<usize> = (0..prices.len()).collect();
        order.sort_by(|&a, &b| prices[a].cmp(&prices[b]).then(a.cmp(&b)));
        for w in order.windows(2) {
            if prices[w[0]] == prices[w[1]] {
                return Err(ContractError::DuplicateActionCosts {
                    first: w[0].min(w[1]),
                    second: w[0].max(w[1]),
                });
            }
        }
        let mut ranks = vec![0usize; prices.len()];
        for (position, &action) in order.iter().enumerate() {
            ranks[action] = position + 1;
        }
        Ok(PotentialRanks { ranks })
    }

    /// The rank of one action.
    pub fn rank(&self, action: usize) -> usize {
        self.ranks[action]
    }

    /// Sum of the ranks of the actions in `s` (0 for the empty set).
    pub fn potential(&self, s: &ActionSet) -> usize {
        s.iter().map(|a| self.ranks[a]).sum()
    }
}

/// Rank-sum potential of one set under the given additive cost.
pub fn potential(s: &ActionSet, c: &SPACost) -> Result<usize, ContractError> {
    Ok(PotentialRanks::new(c)?.potential(s))
}

/// Whether the rank-sum potential strictly increases along the schedule's
/// interval sets (it must, for any schedule of a priced-chain instance with
/// distinct prices).
pub fn check_potential_monotone(
    schedule: &CriticalSchedule,
    c: &SPACost,
) -> Result<bool, ContractError> {
    let ranks = PotentialRanks::new(c)?;
    let values: Vec<usize> =
        schedule.interval_sets().iter().map(|s| ranks.potential(s)).collect();
    Ok(values.windows(2).all(|w| w[0] < w[1]))
}

/// Checks the local shape of consecutive best responses: each earlier set
/// must arise from its successor by removing a subset, or by exchanging one
/// action for a strictly cheaper one. Returns the index of the first
/// transition violating both forms, or `None` if the whole schedule conforms.
pub fn check_neighbor_structure(
    schedule: &CriticalSchedule,
    c: &SPACost,
) -> Result<Option<usize>, ContractError> {
    require_additive(c)?;
    let sets = schedule.interval_sets();
    for (k, w) in sets.windows(2).enumerate() {
        let (before, after) = (&w[0], &w[1]);
        if before.is_subset_of(after) {
            continue;
        }
        let dropped: Vec<usize> = after.iter().filter(|&a| !before.contains(a)).collect();
        let added: Vec<usize> = before.iter().filter(|&a| !after.contains(a)).collect();
        let swap_ok = dropped.len() == 1
            && added.len() == 1
            && c.action_cost(added[0]) < c.action_cost(dropped[0]);
        if !swap_ok {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Instance family determining which closed-form schedule bound applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Priced chain under a purely additive cost: at most `n(n+1)/2`.
    UltraAdditive,
    /// Priced chain under an additive-plus-symmetric cost: `n²(n+1)(n+2)/2`.
    Spa,
    /// Size-truncated priced chain, additive cost: `n(n+1)/2` (any cutoff).
    Truncated,
    /// Any reward under a purely symmetric cost: at most `n + 1`.
    SymmetricCost,
}

/// The closed-form upper bound on the number of critical values.
pub fn count_bound(kind: BoundKind, n: usize) -> usize {
    match kind {
        BoundKind::UltraAdditive | BoundKind::Truncated => n * (n + 1) / 2,
        BoundKind::Spa => n * n * (n + 1) * (n + 2) / 2,
        BoundKind::SymmetricCost => n + 1,
    }
}

/// Whether the schedule respects its family's closed-form bound.
pub fn verify_count_bound(schedule: &CriticalSchedule, kind: BoundKind) -> bool {
    schedule.count() <= count_bound(kind, schedule.n())
}
