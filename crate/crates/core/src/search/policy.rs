//! Flip-selection rules. Every rule expects at least one unsatisfied clause.

use rand::Rng;

use crate::cnf::{CnfFormula, SupportState};
use crate::pool::IndexedSet;

/// Greedy leg of a WalkSAT move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GreedyRule {
    /// With probability `1 - p`, flip the clause variable of least support.
    #[default]
    LeastSupport,
    /// Selman-Kautz-Cohen: take a zero-break variable of the clause whenever
    /// one exists, otherwise noise move with probability `p`, else least break.
    BreakCount,
}

/// Which support-1 variables SupportSAT-01 may flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportOneScope {
    /// Only support-1 variables that occur in an unsatisfied clause.
    #[default]
    UnsatClauses,
    /// Any support-1 variable of the formula.
    Anywhere,
}

#[inline]
fn uniform<R: Rng + ?Sized>(set: &IndexedSet, rng: &mut R) -> usize {
    set.get(rng.random_range(0..set.len()))
}

fn expect_unsat(state: &SupportState) {
    assert!(
        !state.is_satisfied(),
        "flip requested with no unsatisfied clause"
    );
}

/// Least-support variable of `clause`, ties broken uniformly.
fn least_support<R: Rng + ?Sized>(
    state: &SupportState,
    f: &CnfFormula,
    c: usize,
    rng: &mut R,
) -> (usize, u32) {
    let mut best = u32::MAX;
    let mut chosen = 0;
    let mut ties = 0u32;
    for l in f.clause(c) {
        let s = state.support(l.var());
        if s < best {
            best = s;
            chosen = l.var();
            ties = 1;
        } else if s == best {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                chosen = l.var();
            }
        }
    }
    (chosen, best)
}

/// Random variable of a uniform unsatisfied clause.
fn random_walk<R: Rng + ?Sized>(state: &SupportState, f: &CnfFormula, rng: &mut R) -> usize {
    let clause = f.clause(uniform(state.unsat(), rng));
    clause[rng.random_range(0..clause.len())].var()
}

/// WalkSAT move: a uniform unsatisfied clause, then a noise move with
/// probability `p` or the greedy choice otherwise.
pub fn pick_flip_walksat<R: Rng + ?Sized>(
    state: &SupportState,
    f: &CnfFormula,
    rng: &mut R,
    p: f64,
    greedy: GreedyRule,
) -> usize {
    expect_unsat(state);
    let c = uniform(state.unsat(), rng);
    if greedy == GreedyRule::BreakCount {
        let (v, best) = least_support(state, f, c, rng);
        if best == 0 {
            return v;
        }
    }
    if rng.random_bool(p) {
        let clause = f.clause(c);
        clause[rng.random_range(0..clause.len())].var()
    } else {
        least_support(state, f, c, rng).0
    }
}

/// Flips a uniform support-0 variable from the unsatisfied clauses when one
/// exists, otherwise makes a WalkSAT move.
pub fn pick_flip_walksatpp<R: Rng + ?Sized>(
    state: &SupportState,
    f: &CnfFormula,
    rng: &mut R,
    p: f64,
    greedy: GreedyRule,
) -> usize {
    expect_unsat(state);
    let zero = state.pool(0);
    if !zero.is_empty() {
        return uniform(zero, rng);
    }
    pick_flip_walksat(state, f, rng, p, greedy)
}

/// SupportSAT-01 on top of the WalkSAT noise leg.
///
/// With probability `p` a random variable of a uniform unsatisfied clause is
/// flipped. Otherwise a support-0 candidate is taken with probability 2/3 and a
/// support-1 candidate with probability 1/3. An empty pool falls back to the
/// other class; with both empty a WalkSAT move is made. `p = 0` leaves the bare
/// 2/3-1/3 rule, which never raises the unsat count while a pool is non-empty.
pub fn pick_flip_support01<R: Rng + ?Sized>(
    state: &SupportState,
    f: &CnfFormula,
    rng: &mut R,
    p: f64,
    scope: SupportOneScope,
) -> usize {
    expect_unsat(state);
    if p > 0.0 && rng.random_bool(p) {
        return random_walk(state, f, rng);
    }
    let zero = state.pool(0);
    let one = match scope {
        SupportOneScope::UnsatClauses => state.pool(1),
        SupportOneScope::Anywhere => state.support_one(),
    };
    let (first, second) = if rng.random_bool(2.0 / 3.0) {
        (zero, one)
    } else {
        (one, zero)
    };
    if !first.is_empty() {
        uniform(first, rng)
    } else if !second.is_empty() {
        uniform(second, rng)
    } else {
        pick_flip_walksat(state, f, rng, p, GreedyRule::LeastSupport)
    }
}

/// Uniform variable of support class `class` (0..=2) occurring in an
/// unsatisfied clause, if any.
pub fn pick_from_class<R: Rng + ?Sized>(
    state: &SupportState,
    class: usize,
    rng: &mut R,
) -> Option<usize> {
    let pool = state.pool(class);
    (!pool.is_empty()).then(|| uniform(pool, rng))
}
