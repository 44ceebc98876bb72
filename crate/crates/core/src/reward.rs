//! Reward set functions over action sets, with explicit-table and
//! generator-backed representations behind one value-oracle interface.
//!
//! All public constructors produce monotone functions with `f(∅) = 0`:
//! explicit tables are validated exhaustively, the structured families
//! (additive, symmetric, budget-additive, unit-demand, assignment) are
//! monotone by construction. Two derived forms exist for internal use:
//! [`RewardFunction::truncate`] (size-capped reward) and
//! [`RewardFunction::scale_minus_symmetric`] (`α·f − g`, possibly negative
//! and non-monotone — never accepted as instance input).

use std::borrow::Cow;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::action_set::{subsets_of_size, ActionSet};
use crate::rational::Rational;

/// Hard cap on ground-set size for explicit tables and materialization.
pub const MAX_TABLE_ACTIONS: usize = 20;

/// A reward set function `f : 2^A -> Q`.
#[derive(Clone, Debug)]
pub struct RewardFunction {
    n: usize,
    pub(crate) backing: Backing,
}

#[derive(Clone, Debug)]
pub(crate) enum Backing {
    /// Value table indexed by bitmask; length `2^n`.
    Explicit(Arc<Vec<Rational>>),
    /// `f(S) = Σ_{a in S} w(a)`.
    Additive(Vec<Rational>),
    /// `f(S) = levels[|S|]`.
    Symmetric(Vec<Rational>),
    /// `f(S) = min(budget, Σ_{a in S} w(a))`.
    BudgetAdditive { weights: Vec<Rational>, budget: Rational },
    /// `f(S) = max_{a in S} w(a)` (0 on the empty set).
    UnitDemand(Vec<Rational>),
    /// Max-weight assignment of actions in `S` to slots; `weights[slot][action]`.
    Oxs(Arc<Vec<Vec<Rational>>>),
    /// `f_t(S)`: `f(S)` when `|S| <= t`, else the best `t`-subset of `S`.
    Truncated {
        inner: Arc<RewardFunction>,
        t: usize,
        memo: Arc<Mutex<HashMap<u64, Rational>>>,
    },
    /// `h(S) = α·f(S) - g(|S|)`; may be negative and non-monotone.
    ScaledMinusSymmetric {
        inner: Arc<RewardFunction>,
        alpha: Rational,
        levels: Vec<Rational>,
    },
}

/// Which representation backs a reward function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RewardKind {
    Explicit,
    Additive,
    Symmetric,
    BudgetAdditive,
    UnitDemand,
    Oxs,
    Truncated,
    ScaledMinusSymmetric,
}

/// Validation errors for reward construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RewardError {
    #[error("explicit table length {0} is not a power of two")]
    TableNotPowerOfTwo(usize),
    #[error("table for {n} actions exceeds the explicit cap of {MAX_TABLE_ACTIONS}")]
    TableTooLarge { n: usize },
    #[error("f(empty set) must be 0, got {0}")]
    NonzeroEmptySet(Rational),
    #[error("table is not monotone: f({set:#b} + {action}) < f({set:#b})")]
    NonMonotoneTable { set: u64, action: usize },
    #[error("weight of action {action} is negative ({value})")]
    NegativeWeight { action: usize, value: Rational },
    #[error("budget is negative ({0})")]
    NegativeBudget(Rational),
    #[error("symmetric levels must start at 0 and be nondecreasing (level {0})")]
    BadSymmetricLevels(usize),
    #[error("assignment weight matrix needs at least one row")]
    EmptyAssignmentMatrix,
    #[error("assignment matrix row {row} has {got} entries, expected {want}")]
    RaggedAssignmentRow { row: usize, got: usize, want: usize },
    #[error("negative assignment weight at slot {slot}, action {action}")]
    NegativeAssignmentWeight { slot: usize, action: usize },
    #[error("truncation level {t} outside 1..={n}")]
    BadTruncation { t: usize, n: usize },
    #[error("scale factor {0} outside [0, 1]")]
    ScaleOutOfRange(Rational),
    #[error("size-penalty levels have {got} entries, expected {want}")]
    LevelsLength { got: usize, want: usize },
}

impl RewardFunction {
    /// A reward from an explicit value table indexed by bitmask.
    /// Validates `f(∅) = 0` and monotonicity exhaustively.
    pub fn explicit(table: Vec<Rational>) -> Result<Self, RewardError> {
        let len = table.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(RewardError::TableNotPowerOfTwo(len));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_TABLE_ACTIONS {
            return Err(RewardError::TableTooLarge { n });
        }
        if !table[0].is_zero() {
            return Err(RewardError::NonzeroEmptySet(table[0].clone()));
        }
        for mask in 0..len as u64 {
            for action in 0..n {
                if mask & (1 << action) == 0 {
                    let bigger = mask | (1 << action);
                    if table[bigger as usize] < table[mask as usize] {
                        return Err(RewardError::NonMonotoneTable { set: mask, action });
                    }
                }
            }
        }
        Ok(RewardFunction { n, backing: Backing::Explicit(Arc::new(table)) })
    }

    /// Additive reward with nonnegative per-action weights.
    pub fn additive(weights: Vec<Rational>) -> Result<Self, RewardError> {
        check_nonnegative(&weights)?;
        Ok(RewardFunction { n: weights.len(), backing: Backing::Additive(weights) })
    }

    /// Symmetric reward `f(S) = levels[|S|]`; `levels[0] = 0`, nondecreasing.
    pub fn symmetric(levels: Vec<Rational>) -> Result<Self, RewardError> {
        check_levels(&levels)?;
        Ok(RewardFunction { n: levels.len() - 1, backing: Backing::Symmetric(levels) })
    }

    /// Budget-additive reward `f(S) = min(budget, Σ w(a))`.
    pub fn budget_additive(weights: Vec<Rational>, budget: Rational) -> Result<Self, RewardError> {
        check_nonnegative(&weights)?;
        if budget.is_negative() {
            return Err(RewardError::NegativeBudget(budget));
        }
        Ok(RewardFunction { n: weights.len(), backing: Backing::BudgetAdditive { weights, budget } })
    }

    /// Unit-demand reward `f(S) = max_{a in S} w(a)`.
    pub fn unit_demand(weights: Vec<Rational>) -> Result<Self, RewardError> {
        check_nonnegative(&weights)?;
        Ok(RewardFunction { n: weights.len(), backing: Backing::UnitDemand(weights) })
    }

    /// Assignment (OXS) reward: maximum-weight matching of the actions in `S`
    /// to slots, one action per slot. `weights[slot][action]`, all nonnegative.
    pub fn oxs(weights: Vec<Vec<Rational>>) -> Result<Self, RewardError> {
        if weights.is_empty() {
            return Err(RewardError::EmptyAssignmentMatrix);
        }
        let n = weights[0].len();
        for (row, r) in weights.iter().enumerate() {
            if r.len() != n {
                return Err(RewardError::RaggedAssignmentRow { row, got: r.len(), want: n });
            }
            for (action, w) in r.iter().enumerate() {
                if w.is_negative() {
                    return Err(RewardError::NegativeAssignmentWeight { slot: row, action });
                }
            }
        }
        Ok(RewardFunction { n, backing: Backing::Oxs(Arc::new(weights)) })
    }

    /// The `t`-truncation `f_t`: `f(S)` for `|S| <= t`, otherwise the best
    /// value over `t`-element subsets of `S`. Lazily memoized per queried set.
    pub fn truncate(&self, t: usize) -> Result<Self, RewardError> {
        if t < 1 || t > self.n {
            return Err(RewardError::BadTruncation { t, n: self.n });
        }
        Ok(RewardFunction {
            n: self.n,
            backing: Backing::Truncated {
                inner: Arc::new(self.clone()),
                t,
                memo: Arc::new(Mutex::new(HashMap::new())),
            },
        })
    }

    /// The derived objective `h(S) = α·f(S) - g(|S|)` for `α in [0,1]` and a
    /// nondecreasing size penalty `g` with `g(0) = 0`. The result may be
    /// negative and non-monotone; it exists for analysis, not as input data.
    pub fn scale_minus_symmetric(
        &self,
        alpha: Rational,
        levels: Vec<Rational>,
    ) -> Result<Self, RewardError> {
        if alpha.is_negative() || alpha > Rational::one() {
            return Err(RewardError::ScaleOutOfRange(alpha));
        }
        if levels.len() != self.n + 1 {
            return Err(RewardError::LevelsLength { got: levels.len(), want: self.n + 1 });
        }
        check_levels(&levels)?;
        Ok(RewardFunction {
            n: self.n,
            backing: Backing::ScaledMinusSymmetric {
                inner: Arc::new(self.clone()),
                alpha,
                levels,
            },
        })
    }

    /// Number of actions in the ground set.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Which representation backs this function.
    pub fn kind(&self) -> RewardKind {
        match &self.backing {
            Backing::Explicit(_) => RewardKind::Explicit,
            Backing::Additive(_) => RewardKind::Additive,
            Backing::Symmetric(_) => RewardKind::Symmetric,
            Backing::BudgetAdditive { .. } => RewardKind::BudgetAdditive,
            Backing::UnitDemand(_) => RewardKind::UnitDemand,
            Backing::Oxs(_) => RewardKind::Oxs,
            Backing::Truncated { .. } => RewardKind::Truncated,
            Backing::ScaledMinusSymmetric { .. } => RewardKind::ScaledMinusSymmetric,
        }
    }

    /// Evaluates `f(S)`.
    pub fn value(&self, s: &ActionSet) -> Rational {
        debug_assert_eq!(s.ground_size(), self.n, "set from a different ground set");
        match &self.backing {
            Backing::Explicit(table) => table[s.mask() as usize].clone(),
            Backing::Additive(w) => s.iter().map(|a| &w[a]).sum(),
            Backing::Symmetric(levels) => levels[s.len()].clone(),
            Backing::BudgetAdditive { weights, budget } => {
                let total: Rational = s.iter().map(|a| &weights[a]).sum();
                if total > *budget {
                    budget.clone()
                } else {
                    total
                }
            }
            Backing::UnitDemand(w) => s
                .iter()
                .map(|a| w[a].clone())
                .max()
                .unwrap_or_else(Rational::zero),
            Backing::Oxs(weights) => oxs_value(weights, s),
            Backing::Truncated { inner, t, memo } => {
                if s.len() <= *t {
                    return inner.value(s);
                }
                if let Some(v) = memo.lock().unwrap().get(&s.mask()) {
                    return v.clone();
                }
                let v = subsets_of_size(s, *t)
                    .iter()
                    .map(|sub| inner.value(sub))
                    .max()
                    .expect("nonempty subset family");
                memo.lock().unwrap().insert(s.mask(), v.clone());
                v
            }
            Backing::ScaledMinusSymmetric { inner, alpha, levels } => {
                alpha * inner.value(s) - &levels[s.len()]
            }
        }
    }

    /// Marginal value `f(a | S) = f(S + a) - f(S)`. `a` must not be in `S`.
    pub fn marginal(&self, a: usize, s: &ActionSet) -> Rational {
        debug_assert!(!s.contains(a), "marginal of an action already in the set");
        self.value(&s.with(a)) - self.value(s)
    }

    /// The full value table indexed by bitmask, borrowing when already explicit.
    /// Capped at `2^MAX_TABLE_ACTIONS` entries.
    pub fn table(&self) -> Cow<'_, [Rational]> {
        if let Backing::Explicit(table) = &self.backing {
            return Cow::Borrowed(table.as_slice());
        }
        assert!(
            self.n <= MAX_TABLE_ACTIONS,
            "materializing a table for n={} exceeds the cap of {MAX_TABLE_ACTIONS}",
            self.n
        );
        let mut out = Vec::with_capacity(1usize << self.n);
        for mask in 0..(1u64 << self.n) {
            let s = ActionSet::from_mask(mask, self.n).expect("mask within range");
            out.push(self.value(&s));
        }
        Cow::Owned(out)
    }

    /// An explicit-table copy of this function (same values, no validation
    /// re-run; the source is monotone or an already-constructed derived form).
    pub fn materialize(&self) -> RewardFunction {
        let table = self.table().into_owned();
        let n = self.n;
        RewardFunction { n, backing: Backing::Explicit(Arc::new(table)) }
    }
}

fn check_nonnegative(weights: &[Rational]) -> Result<(), RewardError> {
    for (action, value) in weights.iter().enumerate() {
        if value.is_negative() {
            return Err(RewardError::NegativeWeight { action, value: value.clone() });
        }
    }
    Ok(())
}

fn check_levels(levels: &[Rational]) -> Result<(), RewardError> {
    if levels.is_empty() || !levels[0].is_zero() {
        return Err(RewardError::BadSymmetricLevels(0));
    }
    for i in 1..levels.len() {
        if levels[i] < levels[i - 1] {
            return Err(RewardError::BadSymmetricLevels(i));
        }
    }
    Ok(())
}

/// Max-weight assignment of the actions in `s` to slots, at most one action
/// per slot and one slot per action. DP over slot subsets.
fn oxs_value(weights: &[Vec<Rational>], s: &ActionSet) -> Rational {
    let m = weights.len();
    let mut dp = vec![Rational::zero(); 1 << m];
    for a in s.iter() {
        // Walk slot subsets high-to-low so each action is assigned at most once.
        let prev = dp.clone();
        for used in 0..(1u32 << m) {
            for slot in 0..m {
                if used & (1 << slot) != 0 {
                    let without = used & !(1 << slot);
                    let cand = &prev[without as usize] + &weights[slot][a];
                    if cand > dp[used as usize] {
                        dp[used as usize] = cand;
                    }
                }
            }
        }
    }
    dp.into_iter().max().expect("nonempty dp table")
}
