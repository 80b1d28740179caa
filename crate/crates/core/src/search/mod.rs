//! Stochastic local search over the incremental support state.
//!
//! Four flip rules share one loop: WalkSAT, WalkSAT++ (support-0 first),
//! SupportSAT-01 and the textbook rendering of NeuroSAT, which samples a support
//! class per iteration from a [`FlipDistribution`].

mod distribution;
mod policy;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng as _;

pub use distribution::FlipDistribution;
pub use policy::{
    pick_flip_support01, pick_flip_walksat, pick_flip_walksatpp, pick_from_class, GreedyRule,
    SupportOneScope,
};

use crate::cnf::{majority_assignment, Assignment, CnfFormula, SupportState};
use crate::error::SearchError;
use crate::gen::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    WalkSat,
    WalkSatPlusPlus,
    Support01,
    Textbook,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::WalkSat,
        Policy::WalkSatPlusPlus,
        Policy::Support01,
        Policy::Textbook,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Policy::WalkSat => "walksat",
            Policy::WalkSatPlusPlus => "walksatpp",
            Policy::Support01 => "support01",
            Policy::Textbook => "textbook",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Policy::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown policy `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitMode {
    Random,
    Majority,
    Given(Assignment),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Probability of a noise move in WalkSAT.
    pub noise: f64,
    pub seed: u64,
    pub init: InitMode,
    pub greedy: GreedyRule,
    pub support_one_scope: SupportOneScope,
    /// Required by the textbook policy.
    pub distribution: Option<FlipDistribution>,
    /// Iterations at the start of a textbook run that only compute support.
    pub warmup: usize,
    /// When set, the trace records the Hamming distance to this assignment.
    pub reference: Option<Assignment>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 1_000_000,
            noise: 0.1,
            seed: 0,
            init: InitMode::Random,
            greedy: GreedyRule::LeastSupport,
            support_one_scope: SupportOneScope::UnsatClauses,
            distribution: None,
            warmup: 30,
            reference: None,
        }
    }
}

impl SolverConfig {
    /// Defaults for the textbook policy: MAJ start, 500 iterations and the
    /// default flip distribution.
    pub fn textbook() -> Self {
        SolverConfig {
            max_iters: 500,
            init: InitMode::Majority,
            distribution: Some(FlipDistribution::default()),
            ..Default::default()
        }
    }

    pub fn validate(&self, policy: Policy) -> Result<(), SearchError> {
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(SearchError::BadNoise(self.noise));
        }
        if self.max_iters == 0 {
            return Err(SearchError::ZeroIterations);
        }
        if policy == Policy::Textbook && self.distribution.is_none() {
            return Err(SearchError::MissingDistribution);
        }
        Ok(())
    }
}

const NO_FLIP: u32 = u32::MAX;

/// One iteration of a run: unsat count before the move and the move itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    unsat: u32,
    flipped: u32,
    class: u8,
    sampled: u8,
}

const NOT_SAMPLED: u8 = u8::MAX;

impl TraceRow {
    pub fn unsat(&self) -> usize {
        self.unsat as usize
    }

    pub fn flipped(&self) -> Option<usize> {
        (self.flipped != NO_FLIP).then_some(self.flipped as usize)
    }

    /// Support of the flipped variable before the flip, 3 meaning ">= 3".
    pub fn support_class(&self) -> Option<u8> {
        self.flipped().map(|_| self.class)
    }

    /// Class drawn from the flip distribution (textbook policy only).
    pub fn sampled_class(&self) -> Option<u8> {
        (self.sampled != NOT_SAMPLED).then_some(self.sampled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalStatus {
    Solved,
    /// The budget ran out. Local search never proves unsatisfiability.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverTrace {
    /// Iteration number of the first row (0 for WalkSAT-style runs, 1 for textbook).
    pub first_iter: usize,
    pub rows: Vec<TraceRow>,
    pub hamming: Option<Vec<u32>>,
    pub status: LocalStatus,
    /// Iteration at which the assignment first satisfied the formula.
    pub solved_at: Option<usize>,
}

impl SolverTrace {
    pub fn iter_of(&self, row: usize) -> usize {
        self.first_iter + row
    }

    pub fn num_flips(&self) -> usize {
        self.rows.iter().filter(|r| r.flipped().is_some()).count()
    }

    /// Writes `iter,unsat,flipped_var,support_class,hamming_ref`. Variables are
    /// 1-based as in DIMACS; absent values are empty fields.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iter,unsat,flipped_var,support_class,hamming_ref")?;
        for (i, row) in self.rows.iter().enumerate() {
            let flipped = row
                .flipped()
                .map(|v| (v + 1).to_string())
                .unwrap_or_default();
            let class = row
                .support_class()
                .map(|c| c.to_string())
                .unwrap_or_default();
            let ham = self
                .hamming
                .as_ref()
                .map(|h| h[i].to_string())
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{}",
                self.iter_of(i),
                row.unsat,
                flipped,
                class,
                ham
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalResult {
    pub status: LocalStatus,
    /// The satisfying assignment when solved, the last assignment otherwise.
    pub assignment: Assignment,
}

impl LocalResult {
    pub fn is_solved(&self) -> bool {
        self.status == LocalStatus::Solved
    }
}

struct Recorder {
    rows: Vec<TraceRow>,
    hamming: Option<(Assignment, u32, Vec<u32>)>,
}

impl Recorder {
    fn new(reference: Option<&Assignment>, start: &Assignment) -> Self {
        Recorder {
            rows: Vec::new(),
            hamming: reference.map(|r| (r.clone(), r.hamming(start) as u32, Vec::new())),
        }
    }

    fn row(&mut self, unsat: usize, flip: Option<(usize, u32)>) {
        self.sampled_row(unsat, flip, None);
    }

    fn sampled_row(&mut self, unsat: usize, flip: Option<(usize, u32)>, sampled: Option<usize>) {
        let (flipped, class) = match flip {
            Some((v, support)) => (v as u32, support.min(3) as u8),
            None => (NO_FLIP, 0),
        };
        self.rows.push(TraceRow {
            unsat: unsat as u32,
            flipped,
            class,
            sampled: sampled.map_or(NOT_SAMPLED, |c| c as u8),
        });
        if let Some((_, dist, column)) = &mut self.hamming {
            column.push(*dist);
        }
    }

    fn flipped(&mut self, v: usize, state: &SupportState) {
        if let Some((reference, dist, _)) = &mut self.hamming {
            if state.values()[v] == reference.get(v) {
                *dist -= 1;
            } else {
                *dist += 1;
            }
        }
    }

    fn finish(self, first_iter: usize, solved_at: Option<usize>) -> SolverTrace {
        SolverTrace {
            first_iter,
            rows: self.rows,
            hamming: self.hamming.map(|h| h.2),
            status: if solved_at.is_some() {
                LocalStatus::Solved
            } else {
                LocalStatus::BudgetExhausted
            },
            solved_at,
        }
    }
}

fn initial_assignment(
    f: &CnfFormula,
    cfg: &SolverConfig,
    rng: &mut crate::gen::Rng,
) -> Result<Assignment, SearchError> {
    Ok(match &cfg.init {
        InitMode::Random => (0..f.num_vars())
            .map(|_| rng.random_bool(0.5))
            .collect::<Vec<_>>()
            .into(),
        InitMode::Majority => majority_assignment(f),
        InitMode::Given(a) => a.clone(),
    })
}

/// Runs `policy` on `f` for at most `cfg.max_iters` flips.
///
/// Row `i` of the trace holds the unsat count of the `i`-th assignment and the
/// flip applied to it; the row at which the count reaches zero ends the trace.
pub fn run_local_search(
    f: &CnfFormula,
    cfg: &SolverConfig,
    policy: Policy,
) -> Result<(LocalResult, SolverTrace), SearchError> {
    cfg.validate(policy)?;
    if policy == Policy::Textbook {
        return textbook_neurosat(f, cfg);
    }
    let mut rng = rng_from_seed(cfg.seed);
    let start = initial_assignment(f, cfg, &mut rng)?;
    let mut state = SupportState::new(f, &start)?;
    let mut rec = Recorder::new(cfg.reference.as_ref(), &start);
    let mut solved_at = None;

    for iter in 0..=cfg.max_iters {
        if state.is_satisfied() {
            rec.row(0, None);
            solved_at = Some(iter);
            break;
        }
        if iter == cfg.max_iters {
            rec.row(state.num_unsat(), None);
            break;
        }
        let v = match policy {
            Policy::WalkSat => pick_flip_walksat(&state, f, &mut rng, cfg.noise, cfg.greedy),
            Policy::WalkSatPlusPlus => {
                pick_flip_walksatpp(&state, f, &mut rng, cfg.noise, cfg.greedy)
            }
            Policy::Support01 => {
                pick_flip_support01(&state, f, &mut rng, cfg.noise, cfg.support_one_scope)
            }
            Policy::Textbook => unreachable!(),
        };
        rec.row(state.num_unsat(), Some((v, state.support(v))));
        state.flip(f, v)?;
        rec.flipped(v, &state);
    }

    let trace = rec.finish(0, solved_at);
    Ok((
        LocalResult {
            status: trace.status,
            assignment: state.assignment(),
        },
        trace,
    ))
}

/// Textbook NeuroSAT: start from MAJ, spend the first `cfg.warmup` iterations
/// computing support only, then at each iteration sample a support class from
/// the flip distribution and flip a uniform unsat-clause variable of that class.
/// Residual mass or an empty class pool leaves the assignment unchanged.
///
/// Iterations are numbered from 1; row `t - 1` describes the assignment at
/// iteration `t`, and the run returns the assignment at iteration `cfg.max_iters`
/// or the first satisfying one.
pub fn textbook_neurosat(
    f: &CnfFormula,
    cfg: &SolverConfig,
) -> Result<(LocalResult, SolverTrace), SearchError> {
    cfg.validate(Policy::Textbook)?;
    let dist = cfg
        .distribution
        .as_ref()
        .ok_or(SearchError::MissingDistribution)?;
    let mut rng = rng_from_seed(cfg.seed);
    let start = majority_assignment(f);
    let mut state = SupportState::new(f, &start)?;
    let mut rec = Recorder::new(cfg.reference.as_ref(), &start);
    let mut solved_at = None;

    for t in 1..=cfg.max_iters {
        if state.is_satisfied() {
            rec.row(0, None);
            solved_at = Some(t);
            break;
        }
        let sampled = if t <= cfg.warmup || t == cfg.max_iters {
            None
        } else {
            dist.sample(t, &mut rng)
        };
        match sampled.and_then(|class| pick_from_class(&state, class, &mut rng)) {
            Some(v) => {
                rec.sampled_row(state.num_unsat(), Some((v, state.support(v))), sampled);
                state.flip(f, v)?;
                rec.flipped(v, &state);
            }
            None => rec.sampled_row(state.num_unsat(), None, sampled),
        }
    }

    let trace = rec.finish(1, solved_at);
    Ok((
        LocalResult {
            status: trace.status,
            assignment: state.assignment(),
        },
        trace,
    ))
}
