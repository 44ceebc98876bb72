//! Critical values of the linear contract and the optimal contract.
//!
//! For each action set `S` the agent's utility `α·f(S) − c(S)` is a line in
//! the contract value `α`; the agent's best response traces the upper
//! envelope of all `2ⁿ` lines. The contract values where the selected set
//! changes are the *critical values* — the only candidates the principal
//! ever needs to examine. This module computes them two independent ways:
//!
//! * [`brute_force_critical_values`] builds the exact upper envelope from the
//!   full table of lines (the reference implementation);
//! * [`enumerate_critical_values`] walks the envelope top-down using only a
//!   demand oracle, so it runs in polynomial time whenever a greedy oracle
//!   from [`crate::demand`] fits the instance.
//!
//! Both apply the selection rule used everywhere in this crate: at an exact
//! tie the agent picks the higher reward, then the lower bitmask. A
//! breakpoint therefore carries the *new* (higher-reward) set.

use serde::Serialize;

use crate::action_set::ActionSet;
use crate::cost::SPACost;
use crate::demand::{DemandError, DemandResult};
use crate::rational::Rational;
use crate::reward::RewardFunction;

/// Envelope construction cap: the brute-force route tabulates all subsets.
pub const MAX_ENVELOPE: usize = 14;

/// Errors from critical-value enumeration and the structural checkers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ContractError {
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("envelope enumeration supports at most {max} actions, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("demand oracle misbehaved: {detail}")]
    BrokenOracle { detail: String },
    #[error("this operation requires a purely additive cost")]
    NotAdditiveCost,
    #[error("the two marked sets overlap")]
    OverlappingSets,
    #[error("both marked sets are empty")]
    EmptyPair,
    #[error("actions {first} and {second} have equal cost; ranks are undefined")]
    DuplicateActionCosts { first: usize, second: usize },
    #[error("perturbation width must be positive")]
    NonPositiveEpsilon,
}

/// Agent utility `α·f(S) − c(S)`.
pub fn agent_utility(
    f: &RewardFunction,
    c: &SPACost,
    alpha: &Rational,
    s: &ActionSet,
) -> Rational {
    alpha * f.value(s) - c.value(s)
}

/// Principal utility `(1−α)·f(S)`.
pub fn principal_utility(f: &RewardFunction, alpha: &Rational, s: &ActionSet) -> Rational {
    (Rational::one() - alpha) * f.value(s)
}

/// One change of the agent's best response: at `alpha` the selection moves
/// from `before` to `after` (the higher-reward set, by the tie rule).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Breakpoint {
    pub alpha: Rational,
    pub before: ActionSet,
    pub after: ActionSet,
    #[serde(skip_serializing)]
    pub f_before: Rational,
    #[serde(skip_serializing)]
    pub f_after: Rational,
    #[serde(skip_serializing)]
    pub c_before: Rational,
    #[serde(skip_serializing)]
    pub c_after: Rational,
}

/// The agent's best responses across the whole contract range `[0, 1]`:
/// `initial` on the first interval, then each breakpoint's `after` set.
/// Along the schedule both the reward and the cost of the selected set
/// strictly increase.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalSchedule {
    pub initial: ActionSet,
    pub breakpoints: Vec<Breakpoint>,
}

impl CriticalSchedule {
    /// Number of actions in the ground set.
    pub fn n(&self) -> usize {
        self.initial.ground_size()
    }

    /// Number of critical values.
    pub fn count(&self) -> usize {
        self.breakpoints.len()
    }

    /// The interval sets in order: `initial`, then every `after`.
    pub fn interval_sets(&self) -> Vec<ActionSet> {
        std::iter::once(self.initial)
            .chain(self.breakpoints.iter().map(|b| b.after))
            .collect()
    }

    /// Best response at a given contract value (the set selected on the
    /// interval containing `alpha`, with breakpoints owned by the new set).
    pub fn response_at(&self, alpha: &Rational) -> ActionSet {
        let mut current = self.initial;
        for b in &self.breakpoints {
            if b.alpha <= *alpha {
                current = b.after;
            } else {
                break;
            }
        }
        current
    }
}

struct Line {
    slope: Rational,
    cost: Rational,
    mask: u64,
}

/// Exact critical values from the full upper envelope of all `2ⁿ` utility
/// lines. The reference implementation every other route is tested against.
pub fn brute_force_critical_values(
    f: &RewardFunction,
    c: &SPACost,
) -> Result<CriticalSchedule, ContractError> {
    if f.n() != c.n() {
        return Err(DemandError::MismatchedGroundSets { f: f.n(), c: c.n() }.into());
    }
    let n = f.n();
    if n > MAX_ENVELOPE {
        return Err(ContractError::TooLarge { n, max: MAX_ENVELOPE });
    }
    let table = f.table();

    // One line per subset; identical (reward, cost) lines collapse to the
    // lowest mask, and for a fixed slope only the cheapest line can ever be
    // selected.
    let mut by_slope: std::collections::BTreeMap<Rational, (Rational, u64)> =
        std::collections::BTreeMap::new();
    for mask in 0..(1u64 << n) {
        let s = ActionSet::from_mask(mask, n).expect("in range");
        let slope = table[mask as usize].clone();
        let cost = c.value(&s);
        match by_slope.entry(slope) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert((cost, mask));
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                if cost < e.get().0 {
                    e.insert((cost, mask));
                }
            }
        }
    }

    // Upper hull over increasing slope: pop the top line while the new
    // crossing does not lie strictly right of the previous one (an equal
    // crossing means the popped line never wins strictly — at the shared
    // point the tie rule prefers the higher slope anyway).
    let mut hull: Vec<Line> = Vec::new();
    let mut vertices: Vec<Rational> = Vec::new();
    for (slope, (cost, mask)) in by_slope {
        let line = Line { slope, cost, mask };
        loop {
            let Some(top) = hull.last() else {
                hull.push(line);
                break;
            };
            let x = (&line.cost - &top.cost) / (&line.slope - &top.slope);
            match vertices.last() {
                Some(prev) if x <= *prev => {
                    hull.pop();
                    vertices.pop();
                }
                _ => {
                    hull.push(line);
                    vertices.push(x);
                    break;
                }
            }
        }
    }

    // The piece selected at α = 0 (ties resolved ahead, matching the demand
    // rule): the last piece whose left vertex is ≤ 0.
    let zero = Rational::zero();
    let one = Rational::one();
    let mut idx = 0usize;
    while idx < vertices.len() && vertices[idx] <= zero {
        idx += 1;
    }
    let to_set = |mask: u64| ActionSet::from_mask(mask, n).expect("in range");
    let initial = to_set(hull[idx].mask);
    let mut breakpoints = Vec::new();
    for j in idx..vertices.len() {
        if vertices[j] > one {
            break;
        }
        breakpoints.push(Breakpoint {
            alpha: vertices[j].clone(),
            before: to_set(hull[j].mask),
            after: to_set(hull[j + 1].mask),
            f_before: hull[j].slope.clone(),
            f_after: hull[j + 1].slope.clone(),
            c_before: hull[j].cost.clone(),
            c_after: hull[j + 1].cost.clone(),
        });
    }
    Ok(CriticalSchedule { initial, breakpoints })
}

/// Critical values through a demand oracle, without touching all subsets.
///
/// Walks the envelope top-down: starting from the selections at `α = 0` and
/// `α = 1`, repeatedly intersect the current line with the highest-reward
/// line not yet connected and re-query at the crossing. If the query returns
/// the upper line the crossing is a genuine breakpoint; otherwise the query
/// found an intermediate piece and the descent continues. Each inner step
/// strictly lowers the candidate's reward, so the walk terminates; a `2ⁿ`
/// iteration cap converts a misbehaving oracle into an error instead of a
/// hang.
pub fn enumerate_critical_values(
    f: &RewardFunction,
    c: &SPACost,
    mut demand: impl FnMut(&Rational) -> Result<DemandResult, DemandError>,
) -> Result<CriticalSchedule, ContractError> {
    if f.n() != c.n() {
        return Err(DemandError::MismatchedGroundSets { f: f.n(), c: c.n() }.into());
    }
    let n = f.n();
    let inner_cap = 1usize.checked_shl(n as u32).unwrap_or(usize::MAX);

    let mut s = demand(&Rational::zero())?.chosen;
    let top = demand(&Rational::one())?.chosen;
    let f_top = f.value(&top);
    let initial = s;
    let mut breakpoints: Vec<Breakpoint> = Vec::new();

    let mut f_s = f.value(&s);
    if f_s > f_top {
        return Err(ContractError::BrokenOracle {
            detail: format!(
                "selection at 0 has reward {f_s}, above the reward {f_top} at 1"
            ),
        });
    }
    while f_s < f_top {
        let mut t = top;
        let mut f_t = f_top.clone();
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > inner_cap {
                return Err(ContractError::BrokenOracle {
                    detail: format!("envelope descent exceeded {inner_cap} iterations"),
                });
            }
            let alpha = (c.value(&t) - c.value(&s)) / (&f_t - &f_s);
            if alpha <= breakpoints.last().map_or(Rational::zero(), |b| b.alpha.clone())
                || alpha > Rational::one()
            {
                return Err(ContractError::BrokenOracle {
                    detail: format!("crossing {alpha} left the admissible range"),
                });
            }
            let u = demand(&alpha)?;
            if u.reward == f_t {
                breakpoints.push(Breakpoint {
                    alpha,
                    before: s,
                    after: t,
                    f_before: f_s.clone(),
                    f_after: f_t.clone(),
                    c_before: c.value(&s),
                    c_after: c.value(&t),
                });
                s = t;
                f_s = f_t;
                break;
            }
            if u.reward <= f_s || u.reward > f_t {
                return Err(ContractError::BrokenOracle {
                    detail: format!(
                        "selection at {alpha} has reward {} outside ({f_s}, {f_t})",
                        u.reward
                    ),
                });
            }
            t = u.chosen;
            f_t = u.reward;
        }
    }
    Ok(CriticalSchedule { initial, breakpoints })
}

/// The principal's optimum over the whole contract range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptimalContract {
    pub alpha: Rational,
    pub best_response: ActionSet,
    pub principal_utility: Rational,
    pub agent_utility: Rational,
    /// Contract values evaluated: `α = 0` plus every critical value.
    pub candidates_examined: usize,
}

/// Maximize the principal's utility `(1−α)·f(S_α)` over `α = 0` and every
/// critical value; on a utility tie the smallest contract value wins.
pub fn optimal_contract(
    f: &RewardFunction,
    c: &SPACost,
    demand: impl FnMut(&Rational) -> Result<DemandResult, DemandError>,
) -> Result<OptimalContract, ContractError> {
    let schedule = enumerate_critical_values(f, c, demand)?;
    Ok(optimal_from_schedule(f, c, &schedule))
}

/// The same maximization from an already-computed schedule.
pub fn optimal_from_schedule(
    f: &RewardFunction,
    c: &SPACost,
    schedule: &CriticalSchedule,
) -> OptimalContract {
    let mut best_alpha = Rational::zero();
    let mut best_set = schedule.initial;
    let mut best_up = principal_utility(f, &best_alpha, &best_set);
    for b in &schedule.breakpoints {
        let up = principal_utility(f, &b.alpha, &b.after);
        if up > best_up {
            best_alpha = b.alpha.clone();
            best_set = b.after;
            best_up = up;
        }
    }
    OptimalContract {
        agent_utility: agent_utility(f, c, &best_alpha, &best_set),
        principal_utility: best_up,
        alpha: best_alpha,
        best_response: best_set,
        candidates_examined: 1 + schedule.breakpoints.len(),
    }
}
