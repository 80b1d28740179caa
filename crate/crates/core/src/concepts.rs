//! Concept statistics over embedding trajectories.
//!
//! The covariance of each iteration's literal (or clause) matrix is averaged over
//! all instances and iterations; its top two eigenvectors (PC1, PC2) then serve as
//! probes. Projections onto a PC are always taken after centering each row by the
//! mean row of its own matrix, the same centering used for the covariance.

use std::fmt;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::cnf::{majority_assignment, Assignment, CnfFormula, Literal};
use crate::embed::{literal_row, EmbeddingTrajectory, Matrix};
use crate::error::ConceptError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entity {
    Literal,
    Clause,
}

impl Entity {
    fn matrix(self, traj: &EmbeddingTrajectory, t: usize) -> &Matrix {
        match self {
            Entity::Literal => traj.literals(t),
            Entity::Clause => traj.clauses(t),
        }
    }
}

/// Column means of `x`, accumulated in `f64`.
pub fn row_mean(x: &Matrix) -> Vec<f64> {
    let mut mean = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for (m, &v) in mean.iter_mut().zip(x.row(r)) {
            *m += v as f64;
        }
    }
    let rows = x.rows().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= rows);
    mean
}

/// Population covariance (divide by row count) of the rows of `x`.
pub fn covariance(x: &Matrix) -> DMatrix<f64> {
    let d = x.cols();
    if x.rows() == 0 {
        return DMatrix::zeros(d, d);
    }
    let mean = row_mean(x);
    let centered = DMatrix::from_fn(x.rows(), d, |r, c| x.get(r, c) as f64 - mean[c]);
    let mut s = centered.transpose() * &centered;
    s /= x.rows() as f64;
    s
}

/// Running sum of covariance matrices. Merging is associative and commutative
/// up to floating-point reassociation.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAccumulator {
    sum: DMatrix<f64>,
    count: usize,
}

impl CovarianceAccumulator {
    pub fn new(d: usize) -> Self {
        CovarianceAccumulator {
            sum: DMatrix::zeros(d, d),
            count: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.nrows()
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn add(&mut self, x: &Matrix) -> Result<(), ConceptError> {
        if x.cols() != self.dim() {
            return Err(ConceptError::Dimension {
                expected: self.dim(),
                found: x.cols(),
            });
        }
        self.sum += covariance(x);
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &CovarianceAccumulator) -> Result<(), ConceptError> {
        if other.dim() != self.dim() {
            return Err(ConceptError::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        self.sum += &other.sum;
        self.count += other.count;
        Ok(())
    }

    /// The averaged covariance, or `None` before anything was added.
    pub fn mean(&self) -> Option<DMatrix<f64>> {
        (self.count > 0).then(|| &self.sum / self.count as f64)
    }
}

/// Mean of the per-(instance, iteration) covariance matrices of `entity`.
///
/// Trajectories are processed in parallel and merged in input order, so the
/// result does not depend on the thread count.
pub fn averaged_covariance(
    trajectories: &[EmbeddingTrajectory],
    entity: Entity,
) -> Result<DMatrix<f64>, ConceptError> {
    let first = trajectories.first().ok_or(ConceptError::Empty)?;
    let d = first.d;
    let parts: Vec<CovarianceAccumulator> = trajectories
        .par_iter()
        .map(|traj| {
            let mut acc = CovarianceAccumulator::new(d);
            for t in 0..traj.len() {
                acc.add(entity.matrix(traj, t))?;
            }
            Ok(acc)
        })
        .collect::<Result<_, ConceptError>>()?;
    let mut total = CovarianceAccumulator::new(d);
    for p in &parts {
        total.merge(p)?;
    }
    total.mean().ok_or(ConceptError::Empty)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    pub pc1: Vec<f64>,
    pub pc2: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub trace: f64,
}

impl PcaResult {
    /// `lambda_i / trace` for the two components.
    pub fn explained(&self) -> [f64; 2] {
        [self.lambda1 / self.trace, self.lambda2 / self.trace]
    }
}

/// Flips `v` so its largest-magnitude entry (first one on ties) is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Top two eigenpairs of a symmetric matrix (symmetrized first).
pub fn pca_top2(s: &DMatrix<f64>) -> Result<PcaResult, ConceptError> {
    let d = s.nrows();
    if s.ncols() != d {
        return Err(ConceptError::Shape(format!(
            "{}x{} is not square",
            d,
            s.ncols()
        )));
    }
    if d < 2 {
        return Err(ConceptError::TooSmall);
    }
    if s.iter().any(|x| x.is_nan()) {
        return Err(ConceptError::NaN);
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let column = |i: usize| -> Vec<f64> {
        let mut v: Vec<f64> = eig.eigenvectors.column(order[i]).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        orient(&mut v);
        v
    };
    Ok(PcaResult {
        pc1: column(0),
        pc2: column(1),
        lambda1: eig.eigenvalues[order[0]],
        lambda2: eig.eigenvalues[order[1]],
        trace: sym.trace(),
    })
}

/// Keeps the `k` entries of largest magnitude (lower index wins ties), zeroes the
/// rest and rescales to unit length.
pub fn sparsify_pc(pc: &[f64], k: usize) -> Result<Vec<f64>, ConceptError> {
    let d = pc.len();
    if k == 0 || k > d {
        return Err(ConceptError::KeepCount { k, d });
    }
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| pc[b].abs().total_cmp(&pc[a].abs()).then(a.cmp(&b)));
    let mut out = vec![0.0; d];
    for &i in &idx[..k] {
        out[i] = pc[i];
    }
    let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        out.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(out)
}

/// Centered projection of every row of `x` onto `pc`.
pub fn project(x: &Matrix, pc: &[f64]) -> Result<Vec<f64>, ConceptError> {
    if pc.len() != x.cols() {
        return Err(ConceptError::Dimension {
            expected: x.cols(),
            found: pc.len(),
        });
    }
    let mean = row_mean(x);
    let offset: f64 = mean.iter().zip(pc).map(|(m, p)| m * p).sum();
    Ok((0..x.rows())
        .map(|r| {
            x.row(r)
                .iter()
                .zip(pc)
                .map(|(&v, p)| v as f64 * p)
                .sum::<f64>()
                - offset
        })
        .collect())
}

/// Reads an assignment from literal projections laid out as `n` positive rows
/// followed by `n` negated rows. The literal with the larger projection is True;
/// a pair whose projections are not strictly of opposite sign is a contradiction.
pub fn assignment_from_projections(proj: &[f64]) -> Result<(Assignment, usize), ConceptError> {
    if !proj.len().is_multiple_of(2) {
        return Err(ConceptError::Shape(format!("{} literal rows", proj.len())));
    }
    let n = proj.len() / 2;
    let mut contradictions = 0;
    let values = (0..n)
        .map(|v| {
            let (pos, neg) = (proj[v], proj[v + n]);
            if pos * neg >= 0.0 {
                contradictions += 1;
            }
            pos >= neg
        })
        .collect::<Vec<_>>();
    Ok((values.into(), contradictions))
}

/// Assignment read off a `2n x d` literal matrix by its PC1 projections.
pub fn assignment_from_pc1(l: &Matrix, pc1: &[f64]) -> Result<(Assignment, usize), ConceptError> {
    if !l.rows().is_multiple_of(2) {
        return Err(ConceptError::Shape(format!("{} literal rows", l.rows())));
    }
    assignment_from_projections(&project(l, pc1)?)
}

/// Per-iteration assignments read from the literal side of a trajectory.
pub fn assignments_from_trajectory(
    traj: &EmbeddingTrajectory,
    pc1: &[f64],
) -> Result<Vec<Assignment>, ConceptError> {
    (0..traj.len())
        .map(|t| assignment_from_pc1(traj.literals(t), pc1).map(|r| r.0))
        .collect()
}

/// Mean over iterations of the percentage of contradicting literal pairs.
pub fn contradiction_rate(traj: &EmbeddingTrajectory, pc1: &[f64]) -> Result<f64, ConceptError> {
    let mut total = 0.0;
    for t in 0..traj.len() {
        let (_, k) = assignment_from_pc1(traj.literals(t), pc1)?;
        total += 100.0 * k as f64 / traj.n as f64;
    }
    Ok(total / traj.len() as f64)
}

fn check_assignments(
    traj: &EmbeddingTrajectory,
    f: &CnfFormula,
    phis: &[Assignment],
) -> Result<(), ConceptError> {
    if phis.len() != traj.len() {
        return Err(ConceptError::Shape(format!(
            "{} assignments for {} iterations",
            phis.len(),
            traj.len()
        )));
    }
    if f.num_vars() != traj.n || f.num_clauses() != traj.m {
        return Err(ConceptError::Shape(
            "formula does not match trajectory".into(),
        ));
    }
    if let Some(bad) = phis.iter().find(|p| p.len() != traj.n) {
        return Err(ConceptError::Shape(format!(
            "assignment of length {}",
            bad.len()
        )));
    }
    Ok(())
}

fn true_count(clause: &[Literal], phi: &Assignment) -> usize {
    clause.iter().filter(|l| l.eval(phi.values())).count()
}

/// Percentage of support clauses (exactly one True literal under `phis[t]`)
/// whose clause-embedding projection onto `pc1` is positive, averaged over the
/// iterations that have support clauses. `None` when no iteration has any.
pub fn concept_abiding_rate(
    traj: &EmbeddingTrajectory,
    pc1: &[f64],
    f: &CnfFormula,
    phis: &[Assignment],
) -> Result<Option<f64>, ConceptError> {
    check_assignments(traj, f, phis)?;
    let mut sum = 0.0;
    let mut used = 0;
    for (t, phi) in phis.iter().enumerate() {
        let proj = project(traj.clauses(t), pc1)?;
        let mut support = 0usize;
        let mut abiding = 0usize;
        for (c, clause) in f.clauses().enumerate() {
            if true_count(clause, phi) == 1 {
                support += 1;
                if proj[c] > 0.0 {
                    abiding += 1;
                }
            }
        }
        if support > 0 {
            sum += 100.0 * abiding as f64 / support as f64;
            used += 1;
        }
    }
    Ok((used > 0).then(|| sum / used as f64))
}

/// Symmetric interval `±[a, b]`, i.e. `[-b, -a] ∪ [a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zone {
    pub a: f64,
    pub b: f64,
}

impl Zone {
    pub fn new(a: f64, b: f64) -> Result<Self, ConceptError> {
        if a.is_nan() || b.is_nan() || a > b {
            return Err(ConceptError::BadInterval {
                a: a.to_string(),
                b: b.to_string(),
            });
        }
        Ok(Zone { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        let ax = x.abs();
        self.a <= ax && ax <= self.b
    }
}

/// PC1 zones for literal support classes 0, 1, 2 and 3 (meaning ">= 3").
#[derive(Debug, Clone, PartialEq)]
pub struct SupportZoneConfig {
    pub zones: [Zone; 4],
}

impl Default for SupportZoneConfig {
    /// Zero-support zone `[-2, 2]`, remaining classes as for SPARSE.
    fn default() -> Self {
        Self::sparse()
    }
}

impl SupportZoneConfig {
    pub fn sparse() -> Self {
        SupportZoneConfig {
            zones: [
                Zone { a: 0.0, b: 2.0 },
                Zone { a: 2.1, b: 3.3 },
                Zone { a: 2.7, b: 3.5 },
                Zone { a: 3.0, b: 3.7 },
            ],
        }
    }

    pub fn dense() -> Self {
        SupportZoneConfig {
            zones: [
                Zone { a: 0.0, b: 1.5 },
                Zone { a: 1.6, b: 2.8 },
                Zone { a: 2.4, b: 3.0 },
                Zone { a: 2.6, b: 3.2 },
            ],
        }
    }

    pub fn for_dataset(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "SPARSE" => Some(Self::sparse()),
            "DENSE" => Some(Self::dense()),
            _ => None,
        }
    }

    /// Lines `class a b` for classes 0..=3; missing classes keep the defaults.
    pub fn parse(text: &str) -> Result<Self, ConceptError> {
        let mut cfg = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || ConceptError::Shape(format!("zone line `{line}`"));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let class: usize = parts[0].parse().map_err(|_| bad())?;
            if class > 3 {
                return Err(bad());
            }
            let a: f64 = parts[1].parse().map_err(|_| bad())?;
            let b: f64 = parts[2].parse().map_err(|_| bad())?;
            cfg.zones[class] = Zone::new(a, b)?;
        }
        Ok(cfg)
    }
}

/// Number of clauses for which each literal (by code) is the unique True literal.
pub fn literal_supports(f: &CnfFormula, phi: &Assignment) -> Vec<usize> {
    let mut support = vec![0; 2 * f.num_vars()];
    for clause in f.clauses() {
        let mut sole = None;
        let mut count = 0;
        for &l in clause {
            if l.eval(phi.values()) {
                count += 1;
                sole = Some(l);
            }
        }
        if count == 1 {
            support[sole.unwrap().code()] += 1;
        }
    }
    support
}

/// For each literal support class (3 meaning ">= 3"), the percentage of literals
/// whose PC1 projection lies in that class's zone, averaged over the iterations
/// where the class is non-empty. `None` for a class that is always empty.
pub fn support_zone_stats(
    traj: &EmbeddingTrajectory,
    pc1: &[f64],
    f: &CnfFormula,
    phis: &[Assignment],
    zones: &SupportZoneConfig,
) -> Result<[Option<f64>; 4], ConceptError> {
    check_assignments(traj, f, phis)?;
    let n = traj.n;
    let mut sums = [0.0; 4];
    let mut used = [0usize; 4];
    for (t, phi) in phis.iter().enumerate() {
        let proj = project(traj.literals(t), pc1)?;
        let support = literal_supports(f, phi);
        let mut members = [0usize; 4];
        let mut inside = [0usize; 4];
        for (code, &s) in support.iter().enumerate() {
            let class = s.min(3);
            let row = literal_row(Literal::from_code(code), n);
            members[class] += 1;
            if zones.zones[class].contains(proj[row]) {
                inside[class] += 1;
            }
        }
        for class in 0..4 {
            if members[class] > 0 {
                sums[class] += 100.0 * inside[class] as f64 / members[class] as f64;
                used[class] += 1;
            }
        }
    }
    Ok(std::array::from_fn(|i| {
        (used[i] > 0).then(|| sums[i] / used[i] as f64)
    }))
}

/// Fraction of variables on which `phi` differs from the majority vote.
pub fn maj_distance(phi: &Assignment, f: &CnfFormula) -> Result<f64, ConceptError> {
    if phi.len() != f.num_vars() {
        return Err(ConceptError::Shape(format!(
            "assignment of length {} for {} variables",
            phi.len(),
            f.num_vars()
        )));
    }
    Ok(phi.hamming(&majority_assignment(f)) as f64 / f.num_vars() as f64)
}

// ---------------------------------------------------------------------------
// Appearance-count regression

/// Least-squares polynomial `y = c0 + c1 x + c2 x^2` (lower degree when the
/// points have fewer distinct abscissae).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// Fits a polynomial of degree at most 2. `None` when all x coincide.
    pub fn fit(points: &[(f64, f64)]) -> Option<Polynomial> {
        let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
        let degree = xs.len().saturating_sub(1).min(2);
        if degree == 0 {
            return None;
        }
        let a = DMatrix::from_fn(points.len(), degree + 1, |r, c| points[r].0.powi(c as i32));
        let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
        let svd = a.svd(true, true);
        let sol = svd.solve(&b, 1e-12).ok()?;
        Some(Polynomial {
            coeffs: sol.iter().copied().collect(),
        })
    }
}

/// A group of appearance counts reported together, e.g. `3..=5` or `6..`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    pub lo: usize,
    /// Inclusive upper bound; `None` is unbounded.
    pub hi: Option<usize>,
}

impl Bucket {
    pub fn contains(&self, count: usize) -> bool {
        count >= self.lo && self.hi.is_none_or(|h| count <= h)
    }

    pub fn label(&self) -> String {
        match self.hi {
            Some(h) if h == self.lo => format!("i={h}"),
            Some(h) => format!("i={}..{}", self.lo, h),
            None => format!("i>={}", self.lo),
        }
    }

    /// Columns `i=1`, `i=2`, `i=3..5`, `i>=6`.
    pub fn defaults() -> Vec<Bucket> {
        vec![
            Bucket { lo: 1, hi: Some(1) },
            Bucket { lo: 2, hi: Some(2) },
            Bucket { lo: 3, hi: Some(5) },
            Bucket { lo: 6, hi: None },
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketAccuracy {
    pub bucket: Bucket,
    pub members: usize,
    /// Percentage, `None` when the bucket has no literals.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppearanceReport {
    pub buckets: Vec<BucketAccuracy>,
    /// Cohorts (appearance counts) whose fit was impossible and were skipped.
    pub skipped: Vec<usize>,
    /// Pairs of cohorts whose fitted curves coincide.
    pub coincident: Vec<(usize, usize)>,
}

impl AppearanceReport {
    pub fn is_degenerate(&self) -> bool {
        !self.skipped.is_empty() || !self.coincident.is_empty()
    }
}

/// Fits one quadratic `pc2 = f_i(pc1)` per appearance cohort `i` and assigns
/// every literal to the cohort whose curve is vertically closest.
///
/// `points[r]` is the (PC1, PC2) projection of literal row `r` in the `2n`-row
/// layout, `counts[v]` the appearance count of variable `v`. A literal is
/// correct for its bucket when its nearest curve belongs to any cohort of that
/// bucket. Zero-count variables are ignored.
pub fn appearance_regression(
    points: &[(f64, f64)],
    counts: &[usize],
    buckets: &[Bucket],
) -> Result<AppearanceReport, ConceptError> {
    let n = counts.len();
    if points.len() != 2 * n {
        return Err(ConceptError::Shape(format!(
            "{} points for {} variables",
            points.len(),
            n
        )));
    }
    let count_of = |row: usize| counts[row % n];
    let mut cohorts: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    cohorts.sort_unstable();
    cohorts.dedup();

    let mut curves: Vec<(usize, Polynomial)> = Vec::new();
    let mut skipped = Vec::new();
    for &i in &cohorts {
        let pts: Vec<(f64, f64)> = (0..2 * n)
            .filter(|&r| count_of(r) == i)
            .map(|r| points[r])
            .collect();
        match (pts.len() >= 2).then(|| Polynomial::fit(&pts)).flatten() {
            Some(p) => curves.push((i, p)),
            None => skipped.push(i),
        }
    }

    let mut coincident = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            let (pa, pb) = (&curves[a].1, &curves[b].1);
            let len = pa.coeffs.len().max(pb.coeffs.len());
            let same = (0..len).all(|k| {
                let x = pa.coeffs.get(k).copied().unwrap_or(0.0);
                let y = pb.coeffs.get(k).copied().unwrap_or(0.0);
                (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()))
            });
            if same {
                coincident.push((curves[a].0, curves[b].0));
            }
        }
    }

    let nearest = |(x, y): (f64, f64)| -> Option<usize> {
        curves
            .iter()
            .map(|(i, p)| (*i, (y - p.eval(x)).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    };

    let mut report = Vec::with_capacity(buckets.len());
    for bucket in buckets {
        let mut members = 0usize;
        let mut correct = 0usize;
        for (r, &point) in points.iter().enumerate() {
            let i = count_of(r);
            if i == 0 || !bucket.contains(i) {
                continue;
            }
            members += 1;
            if nearest(point).is_some_and(|j| bucket.contains(j)) {
                correct += 1;
            }
        }
        report.push(BucketAccuracy {
            bucket: bucket.clone(),
            members,
            accuracy: (members > 0).then(|| 100.0 * correct as f64 / members as f64),
        });
    }
    Ok(AppearanceReport {
        buckets: report,
        skipped,
        coincident,
    })
}

/// Appearance regression on iteration `t` of a trajectory, projecting onto `pc1`
/// and `pc2`.
pub fn appearance_regression_accuracy(
    traj: &EmbeddingTrajectory,
    t: usize,
    pc1: &[f64],
    pc2: &[f64],
    counts: &[usize],
    buckets: &[Bucket],
) -> Result<AppearanceReport, ConceptError> {
    if t >= traj.len() {
        return Err(ConceptError::Shape(format!(
            "iteration {t} of {}",
            traj.len()
        )));
    }
    let l = traj.literals(t);
    let x = project(l, pc1)?;
    let y = project(l, pc2)?;
    let points: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
    appearance_regression(&points, counts, buckets)
}

// ---------------------------------------------------------------------------
// Reporting

/// One line of a statistics table: `dataset,statistic,mean,stddev`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatRow {
    pub dataset: String,
    pub statistic: String,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
}

impl StatRow {
    /// Mean and population standard deviation of the defined samples.
    pub fn from_samples(dataset: &str, statistic: &str, samples: &[Option<f64>]) -> Self {
        let xs: Vec<f64> = samples.iter().flatten().copied().collect();
        let (mean, stddev) = if xs.is_empty() {
            (None, None)
        } else {
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
            (Some(mean), Some(var.sqrt()))
        };
        StatRow {
            dataset: dataset.to_string(),
            statistic: statistic.to_string(),
            mean,
            stddev,
        }
    }
}

impl fmt::Display for StatRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: Option<f64>| {
            x.map(|v| format!("{v}"))
                .unwrap_or_else(|| "undefined".into())
        };
        write!(
            f,
            "{},{},{},{}",
            self.dataset,
            self.statistic,
            show(self.mean),
            show(self.stddev)
        )
    }
}

pub fn write_stat_csv<W: Write>(rows: &[StatRow], mut out: W) -> io::Result<()> {
    writeln!(out, "dataset,statistic,mean,stddev")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}
