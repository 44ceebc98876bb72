//! Subsets of the agent's action ground set, stored as `u64` bitmasks.
//!
//! Actions are indexed `0..n` with `n <= 63`. Bit `a` of the mask is set iff
//! action `a` is in the set. Masks double as the canonical total order on
//! sets: "lowest bitmask" is the deterministic tie-break used everywhere a
//! representative must be picked from equally good sets.

use std::fmt;

use serde::{Serialize, Serializer};

/// Largest supported ground-set size.
pub const MAX_ACTIONS: usize = 63;

/// A subset of the ground set `{0, .., n-1}`, as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionSet {
    mask: u64,
    n: u8,
}

/// Error for masks or indices that do not fit the ground set.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ActionSetError {
    #[error("ground set size {0} exceeds the supported maximum {MAX_ACTIONS}")]
    GroundSetTooLarge(usize),
    #[error("bitmask {mask:#x} has bits outside the ground set of size {n}")]
    MaskOutOfRange { mask: u64, n: usize },
    #[error("action index {action} out of range for ground set of size {n}")]
    ActionOutOfRange { action: usize, n: usize },
}

impl ActionSet {
    /// The empty set over a ground set of `n` actions.
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_ACTIONS, "ground set size {n} exceeds {MAX_ACTIONS}");
        ActionSet { mask: 0, n: n as u8 }
    }

    /// The full ground set of `n` actions.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ACTIONS, "ground set size {n} exceeds {MAX_ACTIONS}");
        let mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
        ActionSet { mask, n: n as u8 }
    }

    /// A set from a raw bitmask, validating that all bits lie below `n`.
    pub fn from_mask(mask: u64, n: usize) -> Result<Self, ActionSetError> {
        if n > MAX_ACTIONS {
            return Err(ActionSetError::GroundSetTooLarge(n));
        }
        let full = if n == 0 { 0 } else { (1u64 << n) - 1 };
        if mask & !full != 0 {
            return Err(ActionSetError::MaskOutOfRange { mask, n });
        }
        Ok(ActionSet { mask, n: n as u8 })
    }

    /// The singleton `{a}`.
    pub fn singleton(a: usize, n: usize) -> Self {
        assert!(a < n && n <= MAX_ACTIONS, "action {a} out of range for n={n}");
        ActionSet { mask: 1u64 << a, n: n as u8 }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Ground set size this subset lives in.
    pub fn ground_size(&self) -> usize {
        self.n as usize
    }

    /// Number of actions in the set.
    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, a: usize) -> bool {
        a < self.n as usize && self.mask & (1u64 << a) != 0
    }

    /// `self ∪ {a}`.
    pub fn with(&self, a: usize) -> Self {
        debug_assert!(a < self.n as usize);
        ActionSet { mask: self.mask | (1u64 << a), n: self.n }
    }

    /// `self \ {a}`.
    pub fn without(&self, a: usize) -> Self {
        ActionSet { mask: self.mask & !(1u64 << a), n: self.n }
    }

    pub fn union(&self, other: &ActionSet) -> Self {
        debug_assert_eq!(self.n, other.n);
        ActionSet { mask: self.mask | other.mask, n: self.n }
    }

    pub fn intersection(&self, other: &ActionSet) -> Self {
        debug_assert_eq!(self.n, other.n);
        ActionSet { mask: self.mask & other.mask, n: self.n }
    }

    /// `self \ other`.
    pub fn difference(&self, other: &ActionSet) -> Self {
        debug_assert_eq!(self.n, other.n);
        ActionSet { mask: self.mask & !other.mask, n: self.n }
    }

    pub fn complement(&self) -> Self {
        let full = ActionSet::full(self.n as usize);
        ActionSet { mask: full.mask & !self.mask, n: self.n }
    }

    pub fn is_subset_of(&self, other: &ActionSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint_from(&self, other: &ActionSet) -> bool {
        self.mask & other.mask == 0
    }

    /// Iterates the member actions in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.n as usize).filter(move |a| mask & (1u64 << a) != 0)
    }

    /// Iterates the non-members in increasing index order.
    pub fn iter_absent(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.n as usize).filter(move |a| mask & (1u64 << a) == 0)
    }
}

/// All subsets of a ground set of `n` actions, in increasing mask order.
pub fn all_subsets(n: usize) -> impl Iterator<Item = ActionSet> {
    assert!(n <= 32, "exhaustive subset enumeration capped well below u64 range");
    (0u64..(1u64 << n)).map(move |mask| ActionSet { mask, n: n as u8 })
}

/// All subsets of `s` (including empty and `s` itself), in increasing mask order.
pub fn subsets_of(s: &ActionSet) -> Vec<ActionSet> {
    let n = s.n;
    let m = s.mask;
    let mut out = Vec::with_capacity(1 << s.len());
    // Standard submask walk emits submasks in decreasing order; collect and reverse.
    let mut sub = m;
    loop {
        out.push(ActionSet { mask: sub, n });
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & m;
    }
    out.reverse();
    out
}

/// All subsets of `s` with exactly `k` elements, in increasing mask order.
pub fn subsets_of_size(s: &ActionSet, k: usize) -> Vec<ActionSet> {
    subsets_of(s).into_iter().filter(|t| t.len() == k).collect()
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for ActionSet {
    /// Sets serialize as their bare bitmask integer.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.mask)
    }
}
