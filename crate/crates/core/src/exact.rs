//! Complete DPLL solver and exact backbone computation for small instances.

use crate::cnf::{Assignment, CnfFormula};
use crate::error::ExactError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub witness: Option<Assignment>,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }
}

/// Default search-node budget.
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

const UNASSIGNED: u8 = 0;
const TRUE: u8 = 1;
const FALSE: u8 = 2;

struct Dpll<'a> {
    f: &'a CnfFormula,
    vals: Vec<u8>,
    trail: Vec<usize>,
    nodes: u64,
    budget: u64,
    pos_seen: Vec<bool>,
    neg_seen: Vec<bool>,
}

impl<'a> Dpll<'a> {
    fn new(f: &'a CnfFormula, budget: u64) -> Self {
        let n = f.num_vars();
        Dpll {
            f,
            vals: vec![UNASSIGNED; n],
            trail: Vec::new(),
            nodes: 0,
            budget,
            pos_seen: vec![false; n],
            neg_seen: vec![false; n],
        }
    }

    fn assign(&mut self, v: usize, value: bool) {
        self.vals[v] = if value { TRUE } else { FALSE };
        self.trail.push(v);
    }

    fn undo(&mut self, mark: usize) {
        for v in self.trail.drain(mark..) {
            self.vals[v] = UNASSIGNED;
        }
    }

    /// Unit propagation and pure-literal elimination to a fixpoint.
    /// Returns `false` on a falsified clause.
    fn propagate(&mut self) -> bool {
        loop {
            let mut changed = false;
            self.pos_seen.iter_mut().for_each(|x| *x = false);
            self.neg_seen.iter_mut().for_each(|x| *x = false);
            for c in 0..self.f.num_clauses() {
                let mut free = 0;
                let mut unit = None;
                let mut sat = false;
                for &l in self.f.clause(c) {
                    match self.vals[l.var()] {
                        UNASSIGNED => {
                            free += 1;
                            unit = Some(l);
                        }
                        val => {
                            if (val == TRUE) != l.is_negated() {
                                sat = true;
                                break;
                            }
                        }
                    }
                }
                if sat {
                    continue;
                }
                match (free, unit) {
                    (0, _) => return false,
                    (1, Some(l)) => {
                        self.assign(l.var(), !l.is_negated());
                        changed = true;
                    }
                    _ => {
                        for &l in self.f.clause(c) {
                            if self.vals[l.var()] == UNASSIGNED {
                                if l.is_negated() {
                                    self.neg_seen[l.var()] = true;
                                } else {
                                    self.pos_seen[l.var()] = true;
                                }
                            }
                        }
                    }
                }
            }
            if changed {
                continue;
            }
            for v in 0..self.vals.len() {
                if self.vals[v] == UNASSIGNED && self.pos_seen[v] != self.neg_seen[v] {
                    self.assign(v, self.pos_seen[v]);
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn all_satisfied(&self) -> bool {
        self.f.clauses().all(|cl| {
            cl.iter().any(|l| {
                let val = self.vals[l.var()];
                val != UNASSIGNED && (val == TRUE) != l.is_negated()
            })
        })
    }

    fn search(&mut self) -> Result<bool, ExactError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(ExactError::BudgetExhausted(self.budget));
        }
        let mark = self.trail.len();
        if !self.propagate() {
            self.undo(mark);
            return Ok(false);
        }
        if self.all_satisfied() {
            return Ok(true);
        }
        let v = self
            .vals
            .iter()
            .position(|&x| x == UNASSIGNED)
            .expect("an unsatisfied clause has a free variable");
        let after = self.trail.len();
        for value in [true, false] {
            self.assign(v, value);
            if self.search()? {
                return Ok(true);
            }
            self.undo(after);
        }
        self.undo(mark);
        Ok(false)
    }

    fn witness(&self) -> Assignment {
        self.vals
            .iter()
            .map(|&x| x != FALSE)
            .collect::<Vec<_>>()
            .into()
    }
}

/// Decides `f` with the given assumptions fixed up front.
pub fn dpll_solve_with(
    f: &CnfFormula,
    assumptions: &[(usize, bool)],
    budget: u64,
) -> Result<SolveResult, ExactError> {
    let mut solver = Dpll::new(f, budget);
    for &(v, value) in assumptions {
        match solver.vals[v] {
            UNASSIGNED => solver.assign(v, value),
            existing if (existing == TRUE) != value => {
                return Ok(SolveResult {
                    status: Status::Unsat,
                    witness: None,
                })
            }
            _ => {}
        }
    }
    Ok(if solver.search()? {
        SolveResult {
            status: Status::Sat,
            witness: Some(solver.witness()),
        }
    } else {
        SolveResult {
            status: Status::Unsat,
            witness: None,
        }
    })
}

/// DPLL with unit propagation and pure-literal elimination. Branches on the
/// lowest-index free variable, True first.
pub fn dpll_solve(f: &CnfFormula) -> Result<SolveResult, ExactError> {
    dpll_solve_with(f, &[], DEFAULT_NODE_BUDGET)
}

/// Variables forced to one value in every satisfying assignment, ascending.
///
/// One solver call per variable not yet seen with both values; every SAT answer
/// rules out all variables on which its witness disagrees with the first one.
pub fn backbone_exact(f: &CnfFormula) -> Result<Vec<(usize, bool)>, ExactError> {
    backbone_exact_with_budget(f, DEFAULT_NODE_BUDGET)
}

pub fn backbone_exact_with_budget(
    f: &CnfFormula,
    budget: u64,
) -> Result<Vec<(usize, bool)>, ExactError> {
    let first = dpll_solve_with(f, &[], budget)?;
    let reference = first.witness.ok_or(ExactError::Unsatisfiable)?;
    let n = f.num_vars();
    let mut free = vec![false; n];
    let mut backbone = Vec::new();
    for v in 0..n {
        if free[v] {
            continue;
        }
        let b = reference.get(v);
        let r = dpll_solve_with(f, &[(v, !b)], budget)?;
        match r.witness {
            Some(w) => {
                for (u, slot) in free.iter_mut().enumerate() {
                    if w.get(u) != reference.get(u) {
                        *slot = true;
                    }
                }
            }
            None => backbone.push((v, b)),
        }
    }
    Ok(backbone)
}
