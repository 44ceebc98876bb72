//! Agent demand queries.
//!
//! Under a linear contract the agent keeps the fraction `α` of the reward and
//! pays the cost, so a best response maximizes `α·f(S) − c(S)`. This module
//! provides a brute-force oracle over all subsets plus the family of greedy
//! algorithms that answer the same query in polynomial time on structured
//! reward classes (gross-substitutes and the larger greedy-compatible class,
//! under additive, size-based, or combined costs).
//!
//! Every routine resolves ties identically: prefer higher reward `f`, then
//! the lower bitmask (equivalently the lower action index inside a greedy
//! step). Consistency matters — the critical-value sweep in [`crate::critical`]
//! relies on tie decisions not flipping between nearby contract values.

use serde::Serialize;

use crate::action_set::ActionSet;
use crate::cost::SPACost;
use crate::rational::Rational;
use crate::reward::RewardFunction;

/// Brute-force subset enumeration cap.
pub const MAX_BRUTE_FORCE: usize = 16;

/// Errors from demand queries.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DemandError {
    #[error("brute-force demand supports at most {max} actions, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("reward has {f} actions but cost has {c}")]
    MismatchedGroundSets { f: usize, c: usize },
    #[error("this algorithm requires a purely additive cost")]
    CostNotAdditive,
    #[error("this algorithm requires a purely symmetric cost")]
    CostNotSymmetric,
    #[error("size bound {t} is outside 1..={n}")]
    SizeOutOfRange { t: usize, n: usize },
}

/// Outcome of a demand query.
///
/// `trace` records the greedy steps `(x_i, S_i)` with `S_i = S_{i−1} + x_i`
/// (empty for the brute-force oracle and the candidate-evaluation wrappers).
/// `tie_events` counts decision points where at least two options were
/// exactly tied on utility before the reward rule resolved them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DemandResult {
    #[serde(rename = "set")]
    pub chosen: ActionSet,
    pub utility: Rational,
    pub reward: Rational,
    pub trace: Vec<(usize, ActionSet)>,
    #[serde(rename = "ties")]
    pub tie_events: usize,
}

/// Brute-force demand with the full maximizer collections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceDemand {
    /// Canonical answer: lowest bitmask among the reward-maximal maximizers.
    pub result: DemandResult,
    /// Every utility maximizer, ascending bitmask.
    pub maximizers: Vec<ActionSet>,
    /// The utility maximizers with maximal reward, ascending bitmask.
    pub reward_maximal: Vec<ActionSet>,
}

/// Size restriction for [`best_response_of_size`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SizeMode {
    Exactly,
    AtMost,
}

fn check_grounds(f: &RewardFunction, c: &SPACost) -> Result<(), DemandError> {
    if f.n() != c.n() {
        return Err(DemandError::MismatchedGroundSets { f: f.n(), c: c.n() });
    }
    Ok(())
}

fn require_additive(c: &SPACost) -> Result<(), DemandError> {
    if c.is_additive_only() {
        Ok(())
    } else {
        Err(DemandError::CostNotAdditive)
    }
}

fn utility_of(f: &RewardFunction, c: &SPACost, alpha: &Rational, s: &ActionSet) -> Rational {
    alpha * f.value(s) - c.value(s)
}

/// Fold over candidate sets, keeping the lexicographic maximum by
/// (utility, reward) and then the lower bitmask. `tie` reports whether two
/// distinct candidates shared the maximal utility.
struct Selection {
    set: ActionSet,
    utility: Rational,
    reward: Rational,
    tie: bool,
}

fn select_best(candidates: impl Iterator<Item = (ActionSet, Rational, Rational)>) -> Selection {
    let mut best: Option<Selection> = None;
    for (set, utility, reward) in candidates {
        match &mut best {
            None => best = Some(Selection { set, utility, reward, tie: false }),
            Some(b) => {
                if utility > b.utility {
                    *b = Selection { set, utility, reward, tie: false };
                } else if utility == b.utility {
                    b.tie = true;
                    if reward > b.reward
                        || (reward == b.reward && set.mask() < b.set.mask())
                    {
                        let tie = b.tie;
                        *b = Selection { set, utility, reward, tie };
                    }
                }
            }
        }
    }
    best.expect("at least one candidate")
}

/// One greedy chain: `steps` additions, each taking the action with the
/// highest step score, ties resolved toward the higher reward increment and
/// then the lower index. Returns the trace and the number of tied steps.
fn run_chain(
    f: &RewardFunction,
    steps: usize,
    mut score: impl FnMut(usize, &ActionSet) -> Rational,
) -> (Vec<(usize, ActionSet)>, usize) {
    let n = f.n();
    let mut s = ActionSet::empty(n);
    let mut trace = Vec::with_capacity(steps);
    let mut ties = 0usize;
    for _ in 0..steps {
        let mut best: Option<(Rational, Rational, usize)> = None;
        let mut tied = false;
        for x in s.iter_absent() {
            let sc = score(x, &s);
            let fi = f.marginal(x, &s);
            match &best {
                None => best = Some((sc, fi, x)),
                Some((bs, bf, _)) => {
                    if sc > *bs {
                        best = Some((sc, fi, x));
                        tied = false;
                    } else if sc == *bs {
                        tied = true;
                        if fi > *bf {
                            best = Some((sc, fi, x));
                        }
                    }
                }
            }
        }
        let Some((_, _, x)) = best else { break };
        if tied {
            ties += 1;
        }
        s = s.with(x);
        trace.push((x, s));
    }
    (trace, ties)
}

/// Shared tail of the full-chain algorithms: evaluate the empty set and every
/// chain prefix under `α·f − c` and pick the winner.
fn select_over_chain(
    f: &RewardFunction,
    c: &SPACost,
    alpha: &Rational,
    trace: Vec<(usize, ActionSet)>,
    step_ties: usize,
) -> DemandResult {
    let empty = ActionSet::empty(f.n());
    let candidates = std::iter::once(empty)
        .chain(trace.iter().map(|(_, s)| *s))
        .map(|s| {
            let u = utility_of(f, c, alpha, &s);
            let r = f.value(&s);
            (s, u, r)
        });
    let sel = select_best(candidates);
    DemandResult {
        chosen: sel.set,
        utility: sel.utility,
        reward: sel.reward,
        trace,
        tie_events: step_ties + usize::from(sel.tie),
    }
}

/// Brute-force demand over all subsets with the maximizer collections.
pub fn brute_force_demand(
    f: &RewardFunction,
    c: &SPACost,
    alpha: &Rational,
) -> Result<BruteForceDemand, DemandError> {
    BruteForcer::new(f, c).map(|b| b.demand(alpha))
}

/// All maximizers of `α·f(S) − c(S)` among sets of size exactly/at most `i`.
pub fn best_response_of_size(
    f: &RewardFunction,
    c: &SPACost,
    alpha: &Rational,
    i: usize,
    mode: SizeMode,
) -> Result<Vec<ActionSet>, DemandError> {
    BruteForcer::new(f, c).map(|b| b.best_response_of_size(alpha, i, mode))
}

/// Reusable brute-force oracle: tabulates `f` and `c` once so repeated
/// queries at different contract values cost one pass over the table each.
pub struct BruteForcer {
    n: usize,
    f_vals: Vec<Rational>,
    c_vals: Vec<Rational>,
}

impl BruteForcer {
    pub fn new(f: &RewardFunction, c: &SPACost) -> Result<Self, DemandError> {
        check_grounds(f, c)?;
        let n = f.n();
        if n > MAX_BRUTE_FORCE {
            return Err(DemandError::TooLarge { n, max: MAX_BRUTE_FORCE });
        }
        let f_vals = f.table().into_owned();
        let c_vals = (0..(1u64 << n))
            .map(|mask| c.value(&ActionSet::from_mask(mask, n).expect("in range")))
            .collect();
        Ok(BruteForcer { n, f_vals, c_vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reward(&self, s: &ActionSet) -> Rational {
        self.f_vals[s.mask() as usize].clone()
    }

    pub fn cost(&self, s: &ActionSet) -> Rational {
        self.c_vals[s.mask() as usize].clone()
    }

    pub fn utility(&self, alpha: &Rational, s: &ActionSet) -> Rational {
        alpha * &self.f_vals[s.mask() as usize] - &self.c_vals[s.mask() as usize]
    }

    /// Demand at `alpha` with all maximizers and the reward-maximal filter.
    pub fn demand(&self, alpha: &Rational) -> BruteForceDemand {
        let mut best: Option<Rational> = None;
        let mut maximizers: Vec<u64> = Vec::new();
        for mask in 0..(1u64 << self.n) {
            let u = alpha * &self.f_vals[mask as usize] - &self.c_vals[mask as usize];
            match &best {
                Some(b) if u < *b => {}
                Some(b) if u == *b => maximizers.push(mask),
                _ => {
                    best = Some(u);
                    maximizers.clear();
                    maximizers.push(mask);
                }
            }
        }
        let best_reward = maximizers
            .iter()
            .map(|&m| &self.f_vals[m as usize])
            .max()
            .expect("nonempty")
            .clone();
        let reward_maximal: Vec<u64> = maximizers
            .iter()
            .copied()
            .filter(|&m| self.f_vals[m as usize] == best_reward)
            .collect();
        let canonical = reward_maximal[0];
        let to_set = |m: u64| ActionSet::from_mask(m, self.n).expect("in range");
        let tie_events = usize::from(maximizers.len() > 1);
        BruteForceDemand {
            result: DemandResult {
                chosen: to_set(canonical),
                utility: best.expect("nonempty"),
                reward: best_reward,
                trace: Vec::new(),
                tie_events,
            },
            maximizers: maximizers.into_iter().map(to_set).collect(),
            reward_maximal: reward_maximal.into_iter().map(to_set).collect(),
        }
    }

    /// All maximizers among sets of size exactly/at most `i`, ascending mask.
    pub fn best_response_of_size(
        &self,
        alpha: &Rational,
        i: usize,
        mode: SizeMode,
    ) -> Vec<ActionSet> {
        let mut best: Option<Rational> = None;
        let mut winners: Vec<u64> = Vec::new();
        for mask in 0..(1u64 << self.n) {
            let k = mask.count_ones() as usize;
            let admitted = match mode {
                SizeMode::Exactly => k == i,
                SizeMode::AtMost => k <= i,
            };
            if !admitted {
                continue;
            }
            let u = alpha * &self.f_vals[mask as usize] - &self.c_vals[mask as usize];
            match &best {
                Some(b) if u < *b => {}
                Some(b) if u == *b => winners.push(mask),
                _ => {
                    best = Some(u);
                    winners.clear();
                    winners.push(mask);
                }
            }
        }
        winners
            .into_iter()
            .map(|m| ActionSet::from_mask(m, self.n).expect("in range"))
            .collect()
    }
}

/// Price-greedy demand: add the action with the best marginal `f(x|S) − p(x)`
/// while that marginal is positive; stop once it is nonpositive.
///
/// This is the classic stop-early greedy; it is utility-optimal on
/// gross-substitutes rewards but makes no promise about reward maximality
/// when the agent is exactly indifferent.
pub fn greedy_gs1(f: &RewardFunction, p: &SPACost) -> Result<ActionSet, DemandError> {
    check_grounds(f, p)?;
    require_additive(p)?;
    let n = f.n();
    let mut s = ActionSet::empty(n);
    loop {
        let mut best: Option<(Rational, Rational, usize)> = None;
        for x in s.iter_absent() {
            let fi = f.marginal(x, &s);
            let m = &fi - p.action_cost(x);
            match &best {
                None => best = Some((m, fi, x)),
                Some((bm, bf, _)) => {
                    if m > *bm || (m == *bm && fi > *bf) {
                        best = Some((m, fi, x));
                    }
                }
            }
        }
        match best {
            Some((m, _, x)) if m.is_positive() => s = s.with(x),
            _ => return Ok(s),
        }
    }
}

/// Contract-scaled stop-early greedy for gross-substitutes rewards under
/// additive costs.
///
/// Adds the action maximizing `α·f(x|S) − p(x)` while that marginal is
/// nonnegative, with one refinement over the plain stop rule: an exactly-zero
/// marginal step is taken only when it strictly increases the reward. That is
/// the within-step form of the module-wide tie rule and is what makes the
/// reported reward agree with the brute-force oracle when the agent is
/// indifferent (the contract values where best responses change are exactly
/// such points). Zero-marginal decisions and tied steps count as tie events.
pub fn greedy_gs2(
    alpha: &Rational,
    f: &RewardFunction,
    p: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, p)?;
    require_additive(p)?;
    let (trace, ties) = gs_stop_chain(alpha, f, p);
    let chosen = trace.last().map_or_else(|| ActionSet::empty(f.n()), |(_, s)| *s);
    Ok(DemandResult {
        utility: utility_of(f, p, alpha, &chosen),
        reward: f.value(&chosen),
        chosen,
        trace,
        tie_events: ties,
    })
}

/// The stop-early chain shared by [`greedy_gs2`] and [`greedy_gs_spa`]:
/// marginals are taken against the additive price part only.
fn gs_stop_chain(
    alpha: &Rational,
    f: &RewardFunction,
    p: &SPACost,
) -> (Vec<(usize, ActionSet)>, usize) {
    let n = f.n();
    let mut s = ActionSet::empty(n);
    let mut trace = Vec::new();
    let mut ties = 0usize;
    loop {
        let mut best: Option<(Rational, Rational, usize)> = None;
        let mut tied = false;
        for x in s.iter_absent() {
            let fi = f.marginal(x, &s);
            let m = alpha * &fi - p.action_cost(x);
            match &best {
                None => best = Some((m, fi, x)),
                Some((bm, bf, _)) => {
                    if m > *bm {
                        best = Some((m, fi, x));
                        tied = false;
                    } else if m == *bm {
                        tied = true;
                        if fi > *bf {
                            best = Some((m, fi, x));
                        }
                    }
                }
            }
        }
        let Some((m, fi, x)) = best else { return (trace, ties) };
        if m.is_negative() {
            return (trace, ties);
        }
        if m.is_zero() {
            // Indifferent between stopping and continuing: a tie event.
            ties += 1;
            if !fi.is_positive() {
                return (trace, ties);
            }
        } else if tied {
            ties += 1;
        }
        s = s.with(x);
        trace.push((x, s));
    }
}

/// Full-chain greedy for greedy-compatible rewards under additive prices:
/// builds the complete chain on `f(x|S) − p(x)` (never stopping early) and
/// returns the prefix — the empty set included — maximizing `f(S) − p(S)`.
pub fn greedy_ultra1(f: &RewardFunction, p: &SPACost) -> Result<ActionSet, DemandError> {
    check_grounds(f, p)?;
    require_additive(p)?;
    Ok(chain_demand(&Rational::one(), f, p, f.n()).chosen)
}

/// Contract-scaled full-chain greedy for greedy-compatible rewards under
/// additive costs: chain on `α·f(x|S) − p(x)`, then the best prefix under
/// `α·f − p` (ties toward higher reward, so at indifference points the
/// outcome matches the reward-maximal brute-force demand).
pub fn greedy_ultra2(
    alpha: &Rational,
    f: &RewardFunction,
    p: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, p)?;
    require_additive(p)?;
    Ok(chain_demand(alpha, f, p, f.n()))
}

/// Chain the first `t` greedy steps only, then select the best prefix of
/// size at most `t`. With `t = n` this is exactly [`greedy_ultra2`].
pub fn greedy_up_to_t(
    alpha: &Rational,
    t: usize,
    f: &RewardFunction,
    p: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, p)?;
    require_additive(p)?;
    if t < 1 || t > f.n() {
        return Err(DemandError::SizeOutOfRange { t, n: f.n() });
    }
    Ok(chain_demand(alpha, f, p, t))
}

/// Full-chain greedy under a combined cost: the step score is the whole
/// marginal utility `α·f(x|S) − p(x) − (g(|S|+1) − g(|S|))`, and prefixes are
/// compared under the full cost.
pub fn greedy_ultra_spa(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, c)?;
    Ok(chain_demand(alpha, f, c, f.n()))
}

fn chain_demand(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
    steps: usize,
) -> DemandResult {
    let (trace, ties) =
        run_chain(f, steps, |x, s| alpha * f.marginal(x, s) - c.marginal(x, s));
    select_over_chain(f, c, alpha, trace, ties)
}

/// Evaluate size-restricted candidates under the full cost.
///
/// `size_solver(i)` must return a best response among sets of size at most
/// `i` under the additive price part alone (stable under an infinitesimal
/// increase of the contract value); this wrapper re-scores each candidate,
/// plus the empty set, under `α·f − p − g` and keeps the winner. Tie events
/// from the sub-queries are carried over.
pub fn demand_for_spa(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
    mut size_solver: impl FnMut(usize) -> Result<DemandResult, DemandError>,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, c)?;
    let n = f.n();
    let mut sub_ties = 0usize;
    let mut seen = std::collections::BTreeSet::new();
    let mut candidates = vec![ActionSet::empty(n)];
    seen.insert(0u64);
    for i in 1..=n {
        let sub = size_solver(i)?;
        sub_ties += sub.tie_events;
        if seen.insert(sub.chosen.mask()) {
            candidates.push(sub.chosen);
        }
    }
    let sel = select_best(candidates.into_iter().map(|s| {
        let u = utility_of(f, c, alpha, &s);
        let r = f.value(&s);
        (s, u, r)
    }));
    Ok(DemandResult {
        chosen: sel.set,
        utility: sel.utility,
        reward: sel.reward,
        trace: Vec::new(),
        tie_events: sub_ties + usize::from(sel.tie),
    })
}

/// [`demand_for_spa`] with the truncated-chain greedy as the size solver:
/// the combined-cost demand answered through additive-only sub-queries.
pub fn alt_greedy_ultra_spa(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, c)?;
    let p = SPACost::additive_only(c.additive_part().to_vec()).expect("part of a validated cost");
    demand_for_spa(alpha, f, c, |i| greedy_up_to_t(alpha, i, f, &p))
}

/// Stop-early greedy under a combined cost: chain on the additive-part
/// marginal `α·f(x|S) − p(x)` with the stop rule of [`greedy_gs2`], then the
/// best chain prefix (empty set included) under the full cost.
pub fn greedy_gs_spa(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, c)?;
    let p = SPACost::additive_only(c.additive_part().to_vec()).expect("part of a validated cost");
    let (trace, ties) = gs_stop_chain(alpha, f, &p);
    Ok(select_over_chain(f, c, alpha, trace, ties))
}

/// [`demand_for_spa`] with stop-early greedy queries on reward truncations
/// as the size solver (truncation preserves the gross-substitutes class, so
/// each sub-query stays on certified ground).
pub fn alt_greedy_gs_spa(
    alpha: &Rational,
    f: &RewardFunction,
    c: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, c)?;
    let p = SPACost::additive_only(c.additive_part().to_vec()).expect("part of a validated cost");
    demand_for_spa(alpha, f, c, |i| {
        let truncated = f.truncate(i).expect("1 <= i <= n");
        greedy_gs2(alpha, &truncated, &p)
    })
}

/// Demand for weakly greedy-compatible rewards under a purely symmetric
/// cost: the chain is built on raw reward marginals (independent of the
/// contract value), and the final selection maximizes `α·f(S_i) − g(S_i)`
/// over the empty set and all prefixes.
pub fn greedy_wwl_symmetric(
    alpha: &Rational,
    f: &RewardFunction,
    g: &SPACost,
) -> Result<DemandResult, DemandError> {
    check_grounds(f, g)?;
    if !g.is_symmetric_only() {
        return Err(DemandError::CostNotSymmetric);
    }
    let (trace, ties) = run_chain(f, f.n(), |x, s| f.marginal(x, s));
    Ok(select_over_chain(f, g, alpha, trace, ties))
}
