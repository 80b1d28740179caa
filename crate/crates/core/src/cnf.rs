//! CNF data model: literals, formulas with their occurrence index, DIMACS I/O,
//! assignment evaluation and incrementally maintained support counts.
//!
//! A variable `x` *supports* a clause under an assignment when its literal is
//! the only True literal of that clause. Flipping `x` breaks exactly the clauses
//! it supports, so the support of a variable is also its break count.

use std::fmt;
use std::io::{self, Write};

use crate::error::CnfError;
use crate::pool::IndexedSet;

/// A literal encoded as `2 * var + negated`, so `lit` and `!lit` differ in the low bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal(u32);

impl Literal {
    #[inline]
    pub fn new(var: usize, negated: bool) -> Self {
        Literal(((var as u32) << 1) | negated as u32)
    }

    #[inline]
    pub fn positive(var: usize) -> Self {
        Self::new(var, false)
    }

    #[inline]
    pub fn negative(var: usize) -> Self {
        Self::new(var, true)
    }

    #[inline]
    pub fn from_code(code: usize) -> Self {
        Literal(code as u32)
    }

    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn negate(self) -> Self {
        Literal(self.0 ^ 1)
    }

    /// Signed 1-based DIMACS form.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    /// Truth value under a full assignment.
    #[inline]
    pub fn eval(self, values: &[bool]) -> bool {
        values[self.var()] != self.is_negated()
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        self.negate()
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// Position of a literal inside the formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occurrence {
    pub clause: u32,
    pub slot: u32,
}

/// A CNF formula over `n` variables.
///
/// Clauses are stored contiguously; `occ` is the literal side of the factor graph
/// and lists, for every literal code, the clauses containing it.
#[derive(Clone, PartialEq, Eq)]
pub struct CnfFormula {
    n: usize,
    width: Option<usize>,
    starts: Vec<u32>,
    lits: Vec<Literal>,
    occ: Vec<Vec<Occurrence>>,
}

impl fmt::Debug for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CnfFormula")
            .field("n", &self.n)
            .field("m", &self.num_clauses())
            .field("clauses", &self.clauses().collect::<Vec<_>>())
            .finish()
    }
}

impl CnfFormula {
    /// Builds a formula, rejecting empty clauses, out-of-range variables and
    /// clauses that mention a variable twice.
    pub fn new<I, C>(n: usize, clauses: I) -> Result<Self, CnfError>
    where
        I: IntoIterator<Item = C>,
        C: AsRef<[Literal]>,
    {
        let mut f = CnfFormula {
            n,
            width: None,
            starts: vec![0],
            lits: Vec::new(),
            occ: vec![Vec::new(); 2 * n],
        };
        for clause in clauses {
            f.push_clause(clause.as_ref())?;
        }
        Ok(f)
    }

    /// Appends one clause, keeping the occurrence index in sync.
    pub fn push_clause(&mut self, clause: &[Literal]) -> Result<(), CnfError> {
        let idx = self.num_clauses();
        if clause.is_empty() {
            return Err(CnfError::EmptyClause { clause: idx });
        }
        for (i, l) in clause.iter().enumerate() {
            if l.var() >= self.n {
                return Err(CnfError::VariableOutOfRange {
                    clause: idx,
                    var: l.var() as u64 + 1,
                    n: self.n,
                });
            }
            if clause[..i].iter().any(|o| o.var() == l.var()) {
                return Err(CnfError::DuplicateVariable {
                    clause: idx,
                    var: l.var() + 1,
                });
            }
        }
        self.width = match (idx, self.width) {
            (0, _) => Some(clause.len()),
            (_, Some(w)) if w == clause.len() => Some(w),
            _ => None,
        };
        for (slot, &l) in clause.iter().enumerate() {
            self.occ[l.code()].push(Occurrence {
                clause: idx as u32,
                slot: slot as u32,
            });
        }
        self.lits.extend_from_slice(clause);
        self.starts.push(self.lits.len() as u32);
        Ok(())
    }

    #[inline]
    pub fn num_vars(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn num_clauses(&self) -> usize {
        self.starts.len() - 1
    }

    /// Common clause width, or `None` for an empty or mixed-width formula.
    pub fn width(&self) -> Option<usize> {
        self.width
    }

    /// Clause-to-variable ratio m/n.
    pub fn density(&self) -> f64 {
        self.num_clauses() as f64 / self.n as f64
    }

    #[inline]
    pub fn clause(&self, c: usize) -> &[Literal] {
        &self.lits[self.starts[c] as usize..self.starts[c + 1] as usize]
    }

    pub fn clauses(&self) -> impl ExactSizeIterator<Item = &[Literal]> + '_ {
        (0..self.num_clauses()).map(move |c| self.clause(c))
    }

    /// Clauses containing `lit`.
    #[inline]
    pub fn occurrences(&self, lit: Literal) -> &[Occurrence] {
        &self.occ[lit.code()]
    }

    pub fn num_literal_slots(&self) -> usize {
        self.lits.len()
    }

    fn check_len(&self, len: usize) -> Result<(), CnfError> {
        if len != self.n {
            Err(CnfError::LengthMismatch {
                expected: self.n,
                found: len,
            })
        } else {
            Ok(())
        }
    }
}

/// A full truth assignment, one value per variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<bool>);

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Assignment(values)
    }

    pub fn all(n: usize, value: bool) -> Self {
        Assignment(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, v: usize) -> bool {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, value: bool) {
        self.0[v] = value;
    }

    pub fn flip(&mut self, v: usize) {
        self.0[v] = !self.0[v];
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }

    /// Number of coordinates where the two assignments differ.
    pub fn hamming(&self, other: &Assignment) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// One `0`/`1` character per variable.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Option<Self> {
        s.trim_end()
            .chars()
            .map(|ch| match ch {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Assignment)
    }
}

impl fmt::Debug for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Assignment({})", self.to_bitstring())
    }
}

impl From<Vec<bool>> for Assignment {
    fn from(v: Vec<bool>) -> Self {
        Assignment(v)
    }
}

/// Result of evaluating a formula under an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub satisfied: bool,
    /// Indices of clauses whose literals are all False, ascending.
    pub unsat: Vec<usize>,
}

pub fn evaluate(f: &CnfFormula, phi: &Assignment) -> Result<Evaluation, CnfError> {
    f.check_len(phi.len())?;
    let unsat: Vec<usize> = f
        .clauses()
        .enumerate()
        .filter(|(_, cl)| !cl.iter().any(|l| l.eval(phi.values())))
        .map(|(c, _)| c)
        .collect();
    Ok(Evaluation {
        satisfied: unsat.is_empty(),
        unsat,
    })
}

/// Majority vote: True iff positive occurrences >= negative occurrences.
pub fn majority_assignment(f: &CnfFormula) -> Assignment {
    (0..f.num_vars())
        .map(|v| {
            f.occurrences(Literal::positive(v)).len() >= f.occurrences(Literal::negative(v)).len()
        })
        .collect::<Vec<_>>()
        .into()
}

/// Total number of occurrences of each variable, both polarities.
pub fn appearance_counts(f: &CnfFormula) -> Vec<usize> {
    (0..f.num_vars())
        .map(|v| {
            f.occurrences(Literal::positive(v)).len() + f.occurrences(Literal::negative(v)).len()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// DIMACS

/// Parses DIMACS CNF. Comment lines start with `c`; a line starting with `%`
/// ends the clause section (SATLIB files carry such a trailer).
pub fn parse_dimacs(text: &[u8]) -> Result<CnfFormula, CnfError> {
    let text = String::from_utf8_lossy(text);
    let mut header: Option<(usize, usize)> = None;
    let mut formula: Option<CnfFormula> = None;
    let mut current: Vec<Literal> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::MalformedHeader {
                    line: line_no,
                    reason: "duplicate header".into(),
                });
            }
            let (n, m) = parse_header(trimmed, line_no)?;
            header = Some((n, m));
            formula = Some(CnfFormula::new(n, std::iter::empty::<Vec<Literal>>())?);
            continue;
        }
        let f = formula.as_mut().ok_or(CnfError::MissingHeader)?;
        for tok in trimmed.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| CnfError::InvalidToken {
                line: line_no,
                token: tok.to_string(),
            })?;
            if x == 0 {
                f.push_clause(&current)?;
                current.clear();
            } else {
                let var = x.unsigned_abs();
                if var as usize > f.num_vars() {
                    return Err(CnfError::VariableOutOfRange {
                        clause: f.num_clauses(),
                        var,
                        n: f.num_vars(),
                    });
                }
                current.push(Literal::new(var as usize - 1, x < 0));
            }
        }
    }

    let (_, m) = header.ok_or(CnfError::MissingHeader)?;
    let f = formula.expect("formula exists once header is parsed");
    if !current.is_empty() {
        return Err(CnfError::MissingTerminator);
    }
    if f.num_clauses() != m {
        return Err(CnfError::ClauseCountMismatch {
            declared: m,
            found: f.num_clauses(),
        });
    }
    Ok(f)
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, usize), CnfError> {
    let bad = |reason: &str| CnfError::MalformedHeader {
        line: line_no,
        reason: reason.to_string(),
    };
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "p" || parts[1] != "cnf" {
        return Err(bad("expected `p cnf <vars> <clauses>`"));
    }
    let n = parts[2].parse().map_err(|_| bad("variable count"))?;
    let m = parts[3].parse().map_err(|_| bad("clause count"))?;
    Ok((n, m))
}

/// Canonical DIMACS: header, then one clause per line in stored order.
pub fn write_dimacs<W: Write>(f: &CnfFormula, mut out: W) -> io::Result<()> {
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses())?;
    for clause in f.clauses() {
        for l in clause {
            write!(out, "{} ", l.to_dimacs())?;
        }
        out.write_all(b"0\n")?;
    }
    Ok(())
}

pub fn to_dimacs_string(f: &CnfFormula) -> String {
    let mut buf = Vec::with_capacity(f.num_literal_slots() * 6 + 32);
    write_dimacs(f, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("DIMACS output is ASCII")
}

// ---------------------------------------------------------------------------
// Support counts

const NO_POOL: u8 = u8::MAX;

/// Number of support classes with a candidate pool (0, 1 and 2).
pub const POOL_CLASSES: usize = 3;

/// Incrementally maintained support bookkeeping for one assignment.
///
/// Besides per-clause true-literal counts and per-variable supports, the state
/// keeps, for each support class 0..=2, the set of variables of that class that
/// occur in at least one unsatisfied clause. Those pools make class-based flip
/// selection O(1).
#[derive(Debug, Clone)]
pub struct SupportState {
    values: Vec<bool>,
    true_count: Vec<u32>,
    /// The unique True literal of each clause with `true_count == 1`.
    critical: Vec<Literal>,
    support: Vec<u32>,
    unsat: IndexedSet,
    /// Number of unsatisfied clauses each variable occurs in.
    unsat_occ: Vec<u32>,
    pools: [IndexedSet; POOL_CLASSES],
    pool_of: Vec<u8>,
    /// Variables with support exactly 1, anywhere in the formula.
    support_one: IndexedSet,
}

impl SupportState {
    /// Builds the state from scratch in O(total literal slots).
    pub fn new(f: &CnfFormula, phi: &Assignment) -> Result<Self, CnfError> {
        f.check_len(phi.len())?;
        let n = f.num_vars();
        let m = f.num_clauses();
        let mut s = SupportState {
            values: phi.values().to_vec(),
            true_count: vec![0; m],
            critical: vec![Literal(0); m],
            support: vec![0; n],
            unsat: IndexedSet::new(m),
            unsat_occ: vec![0; n],
            pools: [IndexedSet::new(n), IndexedSet::new(n), IndexedSet::new(n)],
            pool_of: vec![NO_POOL; n],
            support_one: IndexedSet::new(n),
        };
        for (c, clause) in f.clauses().enumerate() {
            let mut count = 0;
            for &l in clause {
                if l.eval(&s.values) {
                    count += 1;
                    s.critical[c] = l;
                }
            }
            s.true_count[c] = count;
            match count {
                0 => {
                    s.unsat.insert(c);
                    for l in clause {
                        s.unsat_occ[l.var()] += 1;
                    }
                }
                1 => s.support[s.critical[c].var()] += 1,
                _ => {}
            }
        }
        for v in 0..n {
            s.refresh(v);
        }
        Ok(s)
    }

    #[inline]
    pub fn num_unsat(&self) -> usize {
        self.unsat.len()
    }

    pub fn is_satisfied(&self) -> bool {
        self.unsat.is_empty()
    }

    /// The set of unsatisfied clause indices.
    pub fn unsat(&self) -> &IndexedSet {
        &self.unsat
    }

    #[inline]
    pub fn support(&self, v: usize) -> u32 {
        self.support[v]
    }

    pub fn supports(&self) -> &[u32] {
        &self.support
    }

    #[inline]
    pub fn true_count(&self, c: usize) -> u32 {
        self.true_count[c]
    }

    pub fn true_counts(&self) -> &[u32] {
        &self.true_count
    }

    /// Variable supporting clause `c`, if any.
    pub fn supporter(&self, c: usize) -> Option<usize> {
        (self.true_count[c] == 1).then(|| self.critical[c].var())
    }

    /// Variables of support class `class` (0..=2) that occur in an unsatisfied clause.
    pub fn pool(&self, class: usize) -> &IndexedSet {
        &self.pools[class]
    }

    /// All variables with support exactly 1.
    pub fn support_one(&self) -> &IndexedSet {
        &self.support_one
    }

    /// Number of unsatisfied clauses containing `v`.
    pub fn unsat_occurrences(&self, v: usize) -> u32 {
        self.unsat_occ[v]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn assignment(&self) -> Assignment {
        Assignment(self.values.clone())
    }

    #[inline]
    fn refresh(&mut self, v: usize) {
        let want = if self.unsat_occ[v] > 0 && (self.support[v] as usize) < POOL_CLASSES {
            self.support[v] as u8
        } else {
            NO_POOL
        };
        let have = self.pool_of[v];
        if want != have {
            if have != NO_POOL {
                self.pools[have as usize].remove(v);
            }
            if want != NO_POOL {
                self.pools[want as usize].insert(v);
            }
            self.pool_of[v] = want;
        }
        if self.support[v] == 1 {
            self.support_one.insert(v);
        } else {
            self.support_one.remove(v);
        }
    }

    /// Flips variable `v`, touching only the clauses in which it occurs.
    pub fn flip(&mut self, f: &CnfFormula, v: usize) -> Result<(), CnfError> {
        if v >= self.values.len() {
            return Err(CnfError::NoSuchVariable {
                var: v,
                n: self.values.len(),
            });
        }
        self.values[v] = !self.values[v];
        let made_true = Literal::new(v, !self.values[v]);
        let made_false = made_true.negate();

        for occ in f.occurrences(made_true) {
            let c = occ.clause as usize;
            let before = self.true_count[c];
            self.true_count[c] = before + 1;
            match before {
                0 => {
                    self.unsat.remove(c);
                    self.critical[c] = made_true;
                    self.support[v] += 1;
                    for l in f.clause(c) {
                        let u = l.var();
                        self.unsat_occ[u] -= 1;
                        self.refresh(u);
                    }
                }
                1 => {
                    let w = self.critical[c].var();
                    self.support[w] -= 1;
                    self.refresh(w);
                }
                _ => {}
            }
        }

        for occ in f.occurrences(made_false) {
            let c = occ.clause as usize;
            let before = self.true_count[c];
            self.true_count[c] = before - 1;
            match before {
                1 => {
                    self.support[v] -= 1;
                    self.unsat.insert(c);
                    for l in f.clause(c) {
                        let u = l.var();
                        self.unsat_occ[u] += 1;
                        self.refresh(u);
                    }
                }
                2 => {
                    let l = *f
                        .clause(c)
                        .iter()
                        .find(|l| l.eval(&self.values))
                        .expect("one True literal remains");
                    self.critical[c] = l;
                    self.support[l.var()] += 1;
                    self.refresh(l.var());
                }
                _ => {}
            }
        }
        self.refresh(v);
        Ok(())
    }

    /// Compares every observable quantity, ignoring internal set ordering.
    pub fn same_as(&self, other: &SupportState) -> bool {
        self.values == other.values
            && self.true_count == other.true_count
            && self.support == other.support
            && self.unsat_occ == other.unsat_occ
            && self.unsat.sorted() == other.unsat.sorted()
            && self.support_one.sorted() == other.support_one.sorted()
            && (0..POOL_CLASSES).all(|i| self.pools[i].sorted() == other.pools[i].sorted())
            && (0..self.true_count.len()).all(|c| self.supporter(c) == other.supporter(c))
    }
}

/// Fresh support state for `(f, phi)`.
pub fn support_init(f: &CnfFormula, phi: &Assignment) -> Result<SupportState, CnfError> {
    SupportState::new(f, phi)
}
