//! Problem instances — a reward function plus a cost function — and their
//! JSON wire format.
//!
//! ```json
//! {
//!   "n": 2,
//!   "reward": { "type": "budget_additive",
//!               "weights": ["3/5", "1/2"], "budget": "1" },
//!   "cost": { "additive": ["1/10", "3/10"] }
//! }
//! ```
//!
//! Rationals are `"p/q"` strings (bare integers accepted); explicit tables are
//! objects keyed by the bitmask of each set, as a decimal string. Either cost
//! part may be omitted and defaults to zero. Only the monotone reward families
//! are accepted on the wire — the derived internal forms (truncations,
//! `α·f − g`) have no JSON representation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cost::{CostError, SPACost};
use crate::rational::Rational;
use crate::reward::{Backing, RewardError, RewardFunction, MAX_TABLE_ACTIONS};

/// A labeled problem instance: reward `f` and cost `c` over the same actions.
#[derive(Clone, Debug)]
pub struct Instance {
    reward: RewardFunction,
    cost: SPACost,
    label: String,
}

/// Errors from instance construction or (de)serialization.
#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("reward: {0}")]
    Reward(#[from] RewardError),
    #[error("cost: {0}")]
    Cost(#[from] CostError),
    #[error("reward is over {reward_n} actions but cost is over {cost_n}")]
    MismatchedGroundSets { reward_n: usize, cost_n: usize },
    #[error("{field} has {got} entries but the instance declares n = {n}")]
    WrongLength { field: &'static str, got: usize, n: usize },
    #[error("explicit table for n = {n} needs all {expected} subset keys, found {found}")]
    IncompleteTable { n: usize, expected: usize, found: usize },
    #[error("explicit table key {0} is outside the ground set")]
    TableKeyOutOfRange(u64),
    #[error("explicit table for n = {n} exceeds the cap of {MAX_TABLE_ACTIONS} actions")]
    TableTooLarge { n: usize },
    #[error("reward backing has no JSON representation (derived internal form)")]
    UnserializableReward,
}

impl Instance {
    /// Builds an instance, checking that reward and cost agree on `n`.
    pub fn new(
        reward: RewardFunction,
        cost: SPACost,
        label: impl Into<String>,
    ) -> Result<Self, InstanceError> {
        if reward.n() != cost.n() {
            return Err(InstanceError::MismatchedGroundSets {
                reward_n: reward.n(),
                cost_n: cost.n(),
            });
        }
        Ok(Instance { reward, cost, label: label.into() })
    }

    pub fn n(&self) -> usize {
        self.reward.n()
    }

    pub fn reward(&self) -> &RewardFunction {
        &self.reward
    }

    pub fn cost(&self) -> &SPACost {
        &self.cost
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Parses an instance from its JSON form.
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let repr: InstanceRepr =
            serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
        repr.into_instance()
    }

    /// Canonical pretty-printed JSON form; stable for fixed contents.
    pub fn to_json(&self) -> Result<String, InstanceError> {
        let repr = InstanceRepr::from_instance(self)?;
        serde_json::to_string_pretty(&repr).map_err(|e| InstanceError::Json(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    n: usize,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    label: String,
    reward: RewardRepr,
    cost: CostRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum RewardRepr {
    Explicit {
        #[serde(serialize_with = "ser_table", deserialize_with = "de_table")]
        table: BTreeMap<u64, Rational>,
    },
    Additive { weights: Vec<Rational> },
    Symmetric { levels: Vec<Rational> },
    BudgetAdditive { weights: Vec<Rational>, budget: Rational },
    UnitDemand { weights: Vec<Rational> },
    Oxs { weights: Vec<Vec<Rational>> },
}

/// Table keys travel as decimal strings (JSON object keys); emitted in
/// numeric order.
fn ser_table<S: serde::Serializer>(
    table: &BTreeMap<u64, Rational>,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = serializer.serialize_map(Some(table.len()))?;
    for (mask, value) in table {
        map.serialize_entry(&mask.to_string(), value)?;
    }
    map.end()
}

fn de_table<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
) -> Result<BTreeMap<u64, Rational>, D::Error> {
    let raw: BTreeMap<String, Rational> = Deserialize::deserialize(deserializer)?;
    raw.into_iter()
        .map(|(key, value)| {
            key.trim()
                .parse::<u64>()
                .map(|mask| (mask, value))
                .map_err(|_| {
                    serde::de::Error::custom(format!("table key {key:?} is not a subset bitmask"))
                })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    additive: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    symmetric: Option<Vec<Rational>>,
}

impl InstanceRepr {
    fn into_instance(self) -> Result<Instance, InstanceError> {
        let n = self.n;
        let expect_len =
            |field: &'static str, got: usize, want: usize| -> Result<(), InstanceError> {
                if got != want {
                    Err(InstanceError::WrongLength { field, got, n })
                } else {
                    Ok(())
                }
            };
        let reward = match self.reward {
            RewardRepr::Explicit { table } => {
                if n > MAX_TABLE_ACTIONS {
                    return Err(InstanceError::TableTooLarge { n });
                }
                let expected = 1usize << n;
                if let Some(&key) = table.keys().find(|&&k| k >= expected as u64) {
                    return Err(InstanceError::TableKeyOutOfRange(key));
                }
                if table.len() != expected {
                    return Err(InstanceError::IncompleteTable {
                        n,
                        expected,
                        found: table.len(),
                    });
                }
                // BTreeMap<u64, _> iterates keys 0..2^n in order.
                let values: Vec<Rational> = table.into_values().collect();
                RewardFunction::explicit(values)?
            }
            RewardRepr::Additive { weights } => {
                expect_len("reward.weights", weights.len(), n)?;
                RewardFunction::additive(weights)?
            }
            RewardRepr::Symmetric { levels } => {
                expect_len("reward.levels", levels.len(), n + 1)?;
                RewardFunction::symmetric(levels)?
            }
            RewardRepr::BudgetAdditive { weights, budget } => {
                expect_len("reward.weights", weights.len(), n)?;
                RewardFunction::budget_additive(weights, budget)?
            }
            RewardRepr::UnitDemand { weights } => {
                expect_len("reward.weights", weights.len(), n)?;
                RewardFunction::unit_demand(weights)?
            }
            RewardRepr::Oxs { weights } => {
                for row in &weights {
                    expect_len("reward.weights row", row.len(), n)?;
                }
                RewardFunction::oxs(weights)?
            }
        };
        let additive = match self.cost.additive {
            Some(p) => {
                expect_len("cost.additive", p.len(), n)?;
                p
            }
            None => vec![Rational::zero(); n],
        };
        let symmetric = match self.cost.symmetric {
            Some(g) => {
                expect_len("cost.symmetric", g.len(), n + 1)?;
                g
            }
            None => vec![Rational::zero(); n + 1],
        };
        let cost = SPACost::new(additive, symmetric)?;
        Instance::new(reward, cost, self.label)
    }

    fn from_instance(instance: &Instance) -> Result<Self, InstanceError> {
        let n = instance.n();
        let reward = match &instance.reward.backing {
            Backing::Explicit(table) => {
                let map: BTreeMap<u64, Rational> = table
                    .iter()
                    .enumerate()
                    .map(|(mask, v)| (mask as u64, v.clone()))
                    .collect();
                RewardRepr::Explicit { table: map }
            }
            Backing::Additive(w) => RewardRepr::Additive { weights: w.clone() },
            Backing::Symmetric(levels) => RewardRepr::Symmetric { levels: levels.clone() },
            Backing::BudgetAdditive { weights, budget } => RewardRepr::BudgetAdditive {
                weights: weights.clone(),
                budget: budget.clone(),
            },
            Backing::UnitDemand(w) => RewardRepr::UnitDemand { weights: w.clone() },
            Backing::Oxs(weights) => RewardRepr::Oxs { weights: (**weights).clone() },
            Backing::Truncated { .. } | Backing::ScaledMinusSymmetric { .. } => {
                return Err(InstanceError::UnserializableReward)
            }
        };
        let cost = CostRepr {
            additive: if instance.cost.is_symmetric_only() && instance.cost.is_additive_only() {
                Some(instance.cost.additive_part().to_vec())
            } else if instance.cost.additive_part().iter().all(|p| p.is_zero()) {
                None
            } else {
                Some(instance.cost.additive_part().to_vec())
            },
            symmetric: if instance.cost.symmetric_part().iter().all(|g| g.is_zero()) {
                None
            } else {
                Some(instance.cost.symmetric_part().to_vec())
            },
        };
        Ok(InstanceRepr { n, label: instance.label.clone(), reward, cost })
    }
}
