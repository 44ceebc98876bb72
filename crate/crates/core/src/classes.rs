//! Structural class checkers for reward set functions.
//!
//! Each checker exhaustively (or, for the priced greedy-chain property, by
//! seeded sampling) tests one defining inequality and returns either a clean
//! pass or the lexicographically smallest violating tuple. The classes:
//!
//! * **monotone** — `f(S) <= f(S + a)`;
//! * **additive** / **symmetric** — structural special cases;
//! * **submodular** — decreasing marginals, `f(a|S) >= f(a|T)` for `S ⊆ T`;
//! * **triplet** (the exchange-style certificate used for the "ultra" class) —
//!   `f(i+j|S) + f(k|S) <= max{f(i|S) + f(j+k|S), f(j|S) + f(i+k|S)}`;
//! * **pairwise exchange** — `f(S) + f(T) <= f(S-x+y) + f(T-y+x)` for some
//!   `y`, an equivalent formulation checked independently;
//! * **greedy-layered** — every tie-breaking branch of the size-by-size
//!   greedy chain (optionally under an additive price vector) lands on a
//!   cardinality-constrained maximizer at every size.
//!
//! Checkers evaluate any function, monotone or not: the derived `α·f − g`
//! objects produced for closure analysis are legitimately non-monotone.
//! Non-monotone *input* data is rejected earlier, at construction.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::action_set::ActionSet;
use crate::rational::Rational;
use crate::reward::RewardFunction;

/// Exhaustive-checker cap for table-driven scans.
pub const MAX_EXHAUSTIVE: usize = 16;
/// Cap for the pairwise exchange scan (it walks all ordered subset pairs).
pub const MAX_EXCHANGE: usize = 12;
/// Cap for all-branch greedy-chain exploration.
pub const MAX_CHAIN: usize = 14;
/// Tie-branch frontier budget for greedy-chain exploration.
pub const CHAIN_STATE_BUDGET: usize = 1_000_000;

/// Outcome of a single class check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CheckResult<W> {
    Holds,
    Fails(W),
}

impl<W> CheckResult<W> {
    pub fn holds(&self) -> bool {
        matches!(self, CheckResult::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            CheckResult::Holds => None,
            CheckResult::Fails(w) => Some(w),
        }
    }
}

/// Errors from class checking.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassError {
    #[error("{checker} supports at most {max} actions, got {n}")]
    TooLarge { checker: &'static str, n: usize, max: usize },
    #[error("tie-branch exploration exceeded {CHAIN_STATE_BUDGET} states; result inconclusive")]
    BranchBudget,
}

fn cap(checker: &'static str, n: usize, max: usize) -> Result<(), ClassError> {
    if n > max {
        Err(ClassError::TooLarge { checker, n, max })
    } else {
        Ok(())
    }
}

/// A counterexample to one of the class properties. Sets serialize as
/// bitmask integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `f(set + action) < f(set)`.
    Monotone { set: ActionSet, action: usize },
    /// `f(set) != Σ_{a in set} f({a})`.
    Additive { set: ActionSet },
    /// `|first| == |second|` but `f(first) != f(second)`.
    Symmetric { first: ActionSet, second: ActionSet },
    /// `f(action | small) < f(action | large)` with `small ⊆ large`.
    Submodular { small: ActionSet, large: ActionSet, action: usize },
    /// Pair `{i, j}` against single `k` outside `base` breaks the triplet bound.
    Triplet { base: ActionSet, i: usize, j: usize, k: usize },
    /// No `y` in `t \ s` repairs the swap of `x` out of `s`.
    Exchange { s: ActionSet, t: ActionSet, x: usize },
    /// A greedy-chain branch reached `set` at `size`, but `set` does not
    /// maximize the (price-adjusted) value among sets of that size.
    Layered {
        #[serde(skip_serializing_if = "Option::is_none")]
        prices: Option<Vec<Rational>>,
        size: usize,
        set: ActionSet,
    },
}

/// Aggregate classification of a reward function.
#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub monotone: bool,
    pub additive: bool,
    pub symmetric: bool,
    pub submodular: bool,
    /// Triplet certificate; with monotonicity this is the class for which the
    /// full greedy chain solves demand queries.
    pub ultra: bool,
    /// `monotone && submodular && ultra`.
    pub gs: bool,
    /// Price-free greedy chains stay size-optimal on every tie branch.
    pub wwl: bool,
    /// Counterexample per failed class, keyed by class name.
    pub witnesses: BTreeMap<&'static str, Witness>,
}

/// Checks `f(S) <= f(S + a)` for every set and absent action.
pub fn check_monotone(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_monotone", n, MAX_EXHAUSTIVE)?;
    let table = f.table();
    for mask in 0..(1u64 << n) {
        for a in 0..n {
            if mask & (1 << a) == 0 && table[(mask | (1 << a)) as usize] < table[mask as usize] {
                return Ok(CheckResult::Fails(Witness::Monotone {
                    set: ActionSet::from_mask(mask, n).expect("in range"),
                    action: a,
                }));
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// Checks `f(S) == Σ_{a in S} f({a})` for every set.
pub fn check_additive(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_additive", n, MAX_EXHAUSTIVE)?;
    let table = f.table();
    for mask in 0..(1u64 << n) {
        let sum: Rational = (0..n)
            .filter(|a| mask & (1 << a) != 0)
            .map(|a| &table[1usize << a])
            .sum();
        if table[mask as usize] != sum {
            return Ok(CheckResult::Fails(Witness::Additive {
                set: ActionSet::from_mask(mask, n).expect("in range"),
            }));
        }
    }
    Ok(CheckResult::Holds)
}

/// Checks that `f` depends only on set size.
pub fn check_symmetric(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_symmetric", n, MAX_EXHAUSTIVE)?;
    let table = f.table();
    // First set of each size in mask order is the reference.
    let mut reference: Vec<Option<u64>> = vec![None; n + 1];
    for mask in 0..(1u64 << n) {
        let k = mask.count_ones() as usize;
        match reference[k] {
            None => reference[k] = Some(mask),
            Some(first) => {
                if table[mask as usize] != table[first as usize] {
                    return Ok(CheckResult::Fails(Witness::Symmetric {
                        first: ActionSet::from_mask(first, n).expect("in range"),
                        second: ActionSet::from_mask(mask, n).expect("in range"),
                    }));
                }
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// Checks decreasing marginals over all `S ⊆ T`, `a ∉ T`.
///
/// A fast adjacent-pair sweep decides the verdict (the two formulations are
/// equivalent); only when a violation exists does the full scan run, so the
/// reported witness is the lexicographically smallest `(S, T, a)` under the
/// unrestricted relation.
pub fn check_submodular(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_submodular", n, MAX_EXHAUSTIVE)?;
    let table = f.table();
    let violated = 'scan: {
        for mask in 0..(1u64 << n) {
            for b in 0..n {
                if mask & (1 << b) != 0 {
                    continue;
                }
                let with_b = mask | (1 << b);
                for a in 0..n {
                    if a == b || mask & (1 << a) != 0 {
                        continue;
                    }
                    let lhs = &table[(mask | (1 << a)) as usize] - &table[mask as usize];
                    let rhs = &table[(with_b | (1 << a)) as usize] - &table[with_b as usize];
                    if lhs < rhs {
                        break 'scan true;
                    }
                }
            }
        }
        false
    };
    if !violated {
        return Ok(CheckResult::Holds);
    }
    let full = (1u64 << n) - 1;
    for s in 0..(1u64 << n) {
        // Supersets of s in increasing mask order.
        let mut t = s;
        loop {
            for a in 0..n {
                if t & (1 << a) != 0 {
                    continue;
                }
                let lhs = &table[(s | (1 << a)) as usize] - &table[s as usize];
                let rhs = &table[(t | (1 << a)) as usize] - &table[t as usize];
                if lhs < rhs {
                    return Ok(CheckResult::Fails(Witness::Submodular {
                        small: ActionSet::from_mask(s, n).expect("in range"),
                        large: ActionSet::from_mask(t, n).expect("in range"),
                        action: a,
                    }));
                }
            }
            if t == full {
                break;
            }
            t = (t + 1) | s;
        }
    }
    unreachable!("adjacent-pair violation implies a full-relation violation");
}

/// Checks the triplet bound for every base set and ordered role assignment:
/// `f(i+j|S) + f(k|S) <= max{f(i|S) + f(j+k|S), f(j|S) + f(i+k|S)}`
/// for distinct `i, j, k ∉ S` (pair `{i,j}`, single `k`).
pub fn check_triplet(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_triplet", n, MAX_EXHAUSTIVE)?;
    let table = f.table();
    let at = |mask: u64| &table[mask as usize];
    for s in 0..(1u64 << n) {
        for i in 0..n {
            if s & (1 << i) != 0 {
                continue;
            }
            for j in (i + 1)..n {
                if s & (1 << j) != 0 {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j || s & (1 << k) != 0 {
                        continue;
                    }
                    let (bi, bj, bk) = (1u64 << i, 1u64 << j, 1u64 << k);
                    // Marginals share the -2 f(S) shift on both sides; compare raw sums.
                    let lhs = at(s | bi | bj) + at(s | bk);
                    let arm_i = at(s | bi) + at(s | bj | bk);
                    let arm_j = at(s | bj) + at(s | bi | bk);
                    let rhs = if arm_i >= arm_j { arm_i } else { arm_j };
                    if lhs > rhs {
                        return Ok(CheckResult::Fails(Witness::Triplet {
                            base: ActionSet::from_mask(s, n).expect("in range"),
                            i,
                            j,
                            k,
                        }));
                    }
                }
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// Checks the pairwise exchange bound: for all `|S| <= |T|` and `x ∈ S \ T`
/// there is `y ∈ T \ S` with `f(S) + f(T) <= f(S-x+y) + f(T-y+x)`.
pub fn check_exchange(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_exchange", n, MAX_EXCHANGE)?;
    let table = f.table();
    for s in 0..(1u64 << n) {
        for t in 0..(1u64 << n) {
            if s.count_ones() > t.count_ones() {
                continue;
            }
            let base = &table[s as usize] + &table[t as usize];
            for x in 0..n {
                if s & (1 << x) == 0 || t & (1 << x) != 0 {
                    continue;
                }
                let repaired = (0..n).any(|y| {
                    t & (1 << y) != 0
                        && s & (1 << y) == 0
                        && {
                            let s2 = (s & !(1u64 << x)) | (1 << y);
                            let t2 = (t & !(1u64 << y)) | (1 << x);
                            base <= &table[s2 as usize] + &table[t2 as usize]
                        }
                });
                if !repaired {
                    return Ok(CheckResult::Fails(Witness::Exchange {
                        s: ActionSet::from_mask(s, n).expect("in range"),
                        t: ActionSet::from_mask(t, n).expect("in range"),
                        x,
                    }));
                }
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// All tie-breaking branches of the size-by-size greedy chain under the given
/// step score. Returns the reachable sets per size (masks, ascending), or an
/// error once the explored-state budget is exhausted.
fn explore_chain_branches(
    n: usize,
    step_score: impl Fn(usize, u64) -> Rational,
) -> Result<Vec<Vec<u64>>, ClassError> {
    let mut levels: Vec<Vec<u64>> = vec![vec![0u64]];
    let mut explored = 1usize;
    for _ in 0..n {
        let mut next: BTreeSet<u64> = BTreeSet::new();
        for &s in levels.last().expect("nonempty") {
            let mut best: Option<Rational> = None;
            let mut argmax: Vec<usize> = Vec::new();
            for x in 0..n {
                if s & (1 << x) != 0 {
                    continue;
                }
                let score = step_score(x, s);
                match &best {
                    Some(b) if score < *b => {}
                    Some(b) if score == *b => argmax.push(x),
                    _ => {
                        best = Some(score);
                        argmax = vec![x];
                    }
                }
            }
            for x in argmax {
                next.insert(s | (1 << x));
            }
        }
        explored += next.len();
        if explored > CHAIN_STATE_BUDGET {
            return Err(ClassError::BranchBudget);
        }
        levels.push(next.into_iter().collect());
    }
    Ok(levels)
}

/// Checks that every branch of the price-free greedy chain lands on a set
/// maximizing `f` among sets of its size, for every size.
pub fn check_wwl(f: &RewardFunction) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_wwl", n, MAX_CHAIN)?;
    let table = f.table();
    let levels =
        explore_chain_branches(n, |x, s| &table[(s | (1 << x)) as usize] - &table[s as usize])?;
    // Best f per size, one pass.
    let mut best: Vec<Option<Rational>> = vec![None; n + 1];
    for mask in 0..(1u64 << n) {
        let k = mask.count_ones() as usize;
        let v = &table[mask as usize];
        if best[k].as_ref().map_or(true, |b| v > b) {
            best[k] = Some(v.clone());
        }
    }
    for (size, frontier) in levels.iter().enumerate() {
        let target = best[size].as_ref().expect("size visited");
        for &mask in frontier {
            if &table[mask as usize] != target {
                return Ok(CheckResult::Fails(Witness::Layered {
                    prices: None,
                    size,
                    set: ActionSet::from_mask(mask, n).expect("in range"),
                }));
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// Samples random additive price vectors and checks that every branch of the
/// priced greedy chain maximizes `f(S) - p(S)` among sets of its size.
/// Deterministic for a fixed seed.
pub fn check_well_layered_sampled(
    f: &RewardFunction,
    trials: usize,
    seed: u64,
) -> Result<CheckResult<Witness>, ClassError> {
    let n = f.n();
    cap("check_well_layered_sampled", n, MAX_CHAIN)?;
    let table = f.table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Price scale: the full-set value (or 1 for the zero function).
    let full_value = table[(1usize << n) - 1].clone();
    let scale = if full_value.is_positive() { full_value } else { Rational::one() };
    for _ in 0..trials {
        let prices: Vec<Rational> = (0..n)
            .map(|_| {
                let k = rng.gen_range(0u64..=1 << 20);
                Rational::new(k as i64, 1 << 20) * &scale
            })
            .collect();
        let price_of = |mask: u64| -> Rational {
            (0..n).filter(|a| mask & (1 << a) != 0).map(|a| &prices[a]).sum()
        };
        let levels = explore_chain_branches(n, |x, s| {
            &table[(s | (1 << x)) as usize] - &table[s as usize] - &prices[x]
        })?;
        let mut best: Vec<Option<Rational>> = vec![None; n + 1];
        for mask in 0..(1u64 << n) {
            let k = mask.count_ones() as usize;
            let v = &table[mask as usize] - price_of(mask);
            if best[k].as_ref().map_or(true, |b| v > *b) {
                best[k] = Some(v);
            }
        }
        for (size, frontier) in levels.iter().enumerate() {
            let target = best[size].as_ref().expect("size visited");
            for &mask in frontier {
                let got = &table[mask as usize] - price_of(mask);
                if got != *target {
                    return Ok(CheckResult::Fails(Witness::Layered {
                        prices: Some(prices),
                        size,
                        set: ActionSet::from_mask(mask, n).expect("in range"),
                    }));
                }
            }
        }
    }
    Ok(CheckResult::Holds)
}

/// Runs every exhaustive checker and assembles the aggregate report.
/// (The sampled priced-chain checker is separate: it needs trial/seed inputs.)
pub fn classify(f: &RewardFunction) -> Result<ClassReport, ClassError> {
    let n = f.n();
    cap("classify", n, MAX_CHAIN)?;
    let mut witnesses = BTreeMap::new();
    let run = |name: &'static str,
                   result: CheckResult<Witness>,
                   witnesses: &mut BTreeMap<&'static str, Witness>| {
        match result {
            CheckResult::Holds => true,
            CheckResult::Fails(w) => {
                witnesses.insert(name, w);
                false
            }
        }
    };
    let monotone = run("monotone", check_monotone(f)?, &mut witnesses);
    let additive = run("additive", check_additive(f)?, &mut witnesses);
    let symmetric = run("symmetric", check_symmetric(f)?, &mut witnesses);
    let submodular = run("submodular", check_submodular(f)?, &mut witnesses);
    let ultra = run("ultra", check_triplet(f)?, &mut witnesses);
    let wwl = run("wwl", check_wwl(f)?, &mut witnesses);
    Ok(ClassReport {
        monotone,
        additive,
        symmetric,
        submodular,
        ultra,
        gs: monotone && submodular && ultra,
        wwl,
        witnesses,
    })
}
