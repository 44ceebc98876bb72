//! Agent cost functions: a per-action (additive) part plus a size-based
//! (symmetric) part.
//!
//! `c(S) = g(|S|) + Σ_{a in S} p(a)` with `p >= 0`, `g(0) = 0`, and `g`
//! nondecreasing. Setting `g ≡ 0` gives a plain additive cost; setting
//! `p ≡ 0` gives a purely symmetric one.

use serde::Serialize;

use crate::action_set::ActionSet;
use crate::rational::Rational;

/// A cost function `c(S) = g(|S|) + Σ_{a in S} p(a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SPACost {
    additive: Vec<Rational>,
    symmetric: Vec<Rational>,
}

/// Validation errors for cost construction.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CostError {
    #[error("additive part has {got} entries, expected {want}")]
    AdditiveLength { got: usize, want: usize },
    #[error("symmetric part has {got} levels, expected {want} (one per set size 0..=n)")]
    SymmetricLength { got: usize, want: usize },
    #[error("additive cost of action {action} is negative ({value})")]
    NegativeActionCost { action: usize, value: Rational },
    #[error("symmetric level 0 must be 0, got {0}")]
    NonzeroBase(Rational),
    #[error("symmetric levels must be nondecreasing: level {index} is {value}, below {prev}")]
    DecreasingLevels { index: usize, value: Rational, prev: Rational },
}

impl SPACost {
    /// Builds a cost from both parts, validating the invariants above.
    /// `additive` must have one entry per action; `symmetric` one level per
    /// set size `0..=n`.
    pub fn new(additive: Vec<Rational>, symmetric: Vec<Rational>) -> Result<Self, CostError> {
        let n = additive.len();
        if symmetric.len() != n + 1 {
            return Err(CostError::SymmetricLength { got: symmetric.len(), want: n + 1 });
        }
        for (action, value) in additive.iter().enumerate() {
            if value.is_negative() {
                return Err(CostError::NegativeActionCost { action, value: value.clone() });
            }
        }
        if !symmetric[0].is_zero() {
            return Err(CostError::NonzeroBase(symmetric[0].clone()));
        }
        for i in 1..symmetric.len() {
            if symmetric[i] < symmetric[i - 1] {
                return Err(CostError::DecreasingLevels {
                    index: i,
                    value: symmetric[i].clone(),
                    prev: symmetric[i - 1].clone(),
                });
            }
        }
        Ok(SPACost { additive, symmetric })
    }

    /// Purely additive cost: `c(S) = Σ_{a in S} p(a)`.
    pub fn additive_only(additive: Vec<Rational>) -> Result<Self, CostError> {
        let levels = vec![Rational::zero(); additive.len() + 1];
        SPACost::new(additive, levels)
    }

    /// Purely symmetric cost: `c(S) = g(|S|)`.
    pub fn symmetric_only(symmetric: Vec<Rational>) -> Result<Self, CostError> {
        if symmetric.is_empty() {
            return Err(CostError::SymmetricLength { got: 0, want: 1 });
        }
        let additive = vec![Rational::zero(); symmetric.len() - 1];
        SPACost::new(additive, symmetric)
    }

    /// The all-zero cost over `n` actions.
    pub fn zero(n: usize) -> Self {
        SPACost {
            additive: vec![Rational::zero(); n],
            symmetric: vec![Rational::zero(); n + 1],
        }
    }

    /// Number of actions.
    pub fn n(&self) -> usize {
        self.additive.len()
    }

    /// Total cost `g(|S|) + Σ_{a in S} p(a)`.
    pub fn value(&self, s: &ActionSet) -> Rational {
        let mut total = self.symmetric[s.len()].clone();
        for a in s.iter() {
            total += &self.additive[a];
        }
        total
    }

    /// Per-action cost `p(a)`.
    pub fn action_cost(&self, a: usize) -> &Rational {
        &self.additive[a]
    }

    /// Size level `g(k)`.
    pub fn symmetric_level(&self, k: usize) -> &Rational {
        &self.symmetric[k]
    }

    /// Marginal cost of adding `a` to `S`:
    /// `p(a) + g(|S|+1) - g(|S|)`. `a` must not already be in `S`.
    pub fn marginal(&self, a: usize, s: &ActionSet) -> Rational {
        debug_assert!(!s.contains(a), "marginal cost of an action already taken");
        let k = s.len();
        &self.additive[a] + &self.symmetric[k + 1] - &self.symmetric[k]
    }

    pub fn additive_part(&self) -> &[Rational] {
        &self.additive
    }

    pub fn symmetric_part(&self) -> &[Rational] {
        &self.symmetric
    }

    /// True iff the symmetric part is identically zero.
    pub fn is_additive_only(&self) -> bool {
        self.symmetric.iter().all(|g| g.is_zero())
    }

    /// True iff the additive part is identically zero.
    pub fn is_symmetric_only(&self) -> bool {
        self.additive.iter().all(|p| p.is_zero())
    }
}
