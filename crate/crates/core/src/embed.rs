//! Literal/clause embedding trajectories, the `EMB1` dump format, the Flip row
//! operator and the forward pass of the detangled message-passing update
//!
//! ```text
//! C' = tanh(FC_c(aggregate literals of each clause))
//! L' = tanh(FC_lc(aggregate clauses of each literal) + FC_ll(L - Flip(L)))
//! ```
//!
//! with supplied weights. Literal rows follow the layout used by the network:
//! row `v` is the positive literal of variable `v` and row `n + v` its negation.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cnf::{Assignment, CnfFormula, Literal};
use crate::error::EmbedError;
use crate::gen::rng_from_seed;

/// Dense row-major `f32` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self, EmbedError> {
        if data.len() != rows * cols {
            return Err(EmbedError::Shape(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// `rows` copies of `v`.
    pub fn tiled(rows: usize, v: &[f32]) -> Self {
        Matrix {
            rows,
            cols: v.len(),
            data: v.repeat(rows),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f32] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f32 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Swaps row `i` with row `n + i` of a `2n x d` literal matrix.
pub fn flip_rows(l: &Matrix) -> Result<Matrix, EmbedError> {
    if !l.rows.is_multiple_of(2) {
        return Err(EmbedError::OddRows(l.rows));
    }
    let n = l.rows / 2;
    let mut out = Matrix::zeros(l.rows, l.cols);
    for i in 0..l.rows {
        out.row_mut(i).copy_from_slice(l.row((i + n) % l.rows));
    }
    Ok(out)
}

/// Row index of `lit` in the `2n`-row literal layout.
#[inline]
pub fn literal_row(lit: Literal, n: usize) -> usize {
    lit.var() + if lit.is_negated() { n } else { 0 }
}

/// Affine map `x -> x W + b` on row vectors, `W` square.
#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub weight: Matrix,
    pub bias: Vec<f32>,
}

impl Affine {
    pub fn zeros(d: usize) -> Self {
        Affine {
            weight: Matrix::zeros(d, d),
            bias: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.bias.len()
    }

    fn check(&self) -> Result<(), EmbedError> {
        let d = self.bias.len();
        if self.weight.shape() != (d, d) {
            return Err(EmbedError::Shape(format!(
                "weight {:?} does not match bias length {d}",
                self.weight.shape()
            )));
        }
        if !self.weight.is_finite() || !self.bias.iter().all(|x| x.is_finite()) {
            return Err(EmbedError::NonFinite);
        }
        Ok(())
    }

    /// `out += x W + b` for one row.
    #[inline]
    fn apply_add(&self, x: &[f32], out: &mut [f32]) {
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o += b;
        }
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (o, w) in out.iter_mut().zip(self.weight.row(i)) {
                *o += xi * w;
            }
        }
    }
}

/// The three fully connected maps of the detangled update.
#[derive(Debug, Clone, PartialEq)]
pub struct DetangledWeights {
    /// Clause update from aggregated literal embeddings.
    pub clause: Affine,
    /// Literal update from aggregated clause embeddings.
    pub literal_msg: Affine,
    /// Literal update from `L - Flip(L)`.
    pub literal_diff: Affine,
}

impl DetangledWeights {
    pub fn zeros(d: usize) -> Self {
        DetangledWeights {
            clause: Affine::zeros(d),
            literal_msg: Affine::zeros(d),
            literal_diff: Affine::zeros(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.clause.dim()
    }

    fn check(&self) -> Result<(), EmbedError> {
        self.clause.check()?;
        self.literal_msg.check()?;
        self.literal_diff.check()?;
        let d = self.dim();
        if self.literal_msg.dim() != d || self.literal_diff.dim() != d {
            return Err(EmbedError::Shape("weights of differing dimension".into()));
        }
        Ok(())
    }
}

fn narrow(wide: &[f64], out: &mut [f32]) {
    for (o, &w) in out.iter_mut().zip(wide) {
        *o = w as f32;
    }
}

/// One detangled update. The incidence structure is read from `f`'s clause lists.
pub fn detangled_step(
    f: &CnfFormula,
    l: &Matrix,
    c: &Matrix,
    w: &DetangledWeights,
) -> Result<(Matrix, Matrix), EmbedError> {
    w.check()?;
    let n = f.num_vars();
    let m = f.num_clauses();
    let d = w.dim();
    if l.shape() != (2 * n, d) {
        return Err(EmbedError::Shape(format!(
            "literal matrix {:?}, expected ({}, {d})",
            l.shape(),
            2 * n
        )));
    }
    if c.shape() != (m, d) {
        return Err(EmbedError::Shape(format!(
            "clause matrix {:?}, expected ({m}, {d})",
            c.shape()
        )));
    }

    // Aggregates are summed in f64 so the result does not depend on the order
    // of clauses or of literals within a clause.
    let mut wide = vec![0.0f64; d];
    let mut agg = vec![0.0f32; d];
    let mut next_c = Matrix::zeros(m, d);
    for ci in 0..m {
        wide.iter_mut().for_each(|x| *x = 0.0);
        for &lit in f.clause(ci) {
            for (a, &x) in wide.iter_mut().zip(l.row(literal_row(lit, n))) {
                *a += x as f64;
            }
        }
        narrow(&wide, &mut agg);
        let out = next_c.row_mut(ci);
        w.clause.apply_add(&agg, out);
        out.iter_mut().for_each(|x| *x = x.tanh());
    }

    let mut next_l = Matrix::zeros(2 * n, d);
    let mut diff = vec![0.0f32; d];
    for code in 0..2 * n {
        let lit = Literal::from_code(code);
        let r = literal_row(lit, n);
        wide.iter_mut().for_each(|x| *x = 0.0);
        for occ in f.occurrences(lit) {
            for (a, &x) in wide.iter_mut().zip(c.row(occ.clause as usize)) {
                *a += x as f64;
            }
        }
        narrow(&wide, &mut agg);
        let partner = (r + n) % (2 * n);
        for ((dv, a), b) in diff.iter_mut().zip(l.row(r)).zip(l.row(partner)) {
            *dv = a - b;
        }
        let out = next_l.row_mut(r);
        w.literal_msg.apply_add(&agg, out);
        w.literal_diff.apply_add(&diff, out);
        out.iter_mut().for_each(|x| *x = x.tanh());
    }
    Ok((next_l, next_c))
}

/// Starting embeddings of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitEmbedding {
    /// One literal vector and one clause vector, tiled over all rows.
    Constant {
        literal: Vec<f32>,
        clause: Vec<f32>,
    },
    Matrices {
        literal: Matrix,
        clause: Matrix,
    },
}

/// Per-iteration literal (`2n x d`) and clause (`m x d`) embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTrajectory {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub steps: Vec<(Matrix, Matrix)>,
}

impl EmbeddingTrajectory {
    pub fn new(
        n: usize,
        m: usize,
        d: usize,
        steps: Vec<(Matrix, Matrix)>,
    ) -> Result<Self, EmbedError> {
        let t = EmbeddingTrajectory { n, m, d, steps };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn literals(&self, t: usize) -> &Matrix {
        &self.steps[t].0
    }

    pub fn clauses(&self, t: usize) -> &Matrix {
        &self.steps[t].1
    }

    fn validate(&self) -> Result<(), EmbedError> {
        if self.steps.is_empty() {
            return Err(EmbedError::BadHeader("trajectory has no iterations".into()));
        }
        if self.n == 0 || self.d == 0 {
            return Err(EmbedError::BadHeader("zero-sized dimension".into()));
        }
        for (t, (l, c)) in self.steps.iter().enumerate() {
            if l.shape() != (2 * self.n, self.d) || c.shape() != (self.m, self.d) {
                return Err(EmbedError::Shape(format!(
                    "iteration {t} has inconsistent shapes"
                )));
            }
        }
        Ok(())
    }

    /// Serializes to `EMB1`: magic, then little-endian `u32` T, 2n, m, d, then
    /// per iteration the literal and clause matrices as row-major `f32`.
    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(b"EMB1")?;
        for x in [self.steps.len(), 2 * self.n, self.m, self.d] {
            out.write_all(&(x as u32).to_le_bytes())?;
        }
        let mut buf = Vec::new();
        for (l, c) in &self.steps {
            buf.clear();
            for x in l.as_slice().iter().chain(c.as_slice()) {
                buf.extend_from_slice(&x.to_le_bytes());
            }
            out.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, EmbedError> {
        if bytes.len() < 20 {
            return Err(if bytes.len() >= 4 && &bytes[..4] != b"EMB1" {
                EmbedError::BadMagic
            } else {
                EmbedError::Truncated {
                    expected: 20,
                    found: bytes.len(),
                }
            });
        }
        if &bytes[..4] != b"EMB1" {
            return Err(EmbedError::BadMagic);
        }
        let word =
            |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize;
        let (t, two_n, m, d) = (word(0), word(1), word(2), word(3));
        if t == 0 {
            return Err(EmbedError::BadHeader("T = 0".into()));
        }
        if two_n == 0 || two_n % 2 != 0 {
            return Err(EmbedError::BadHeader(format!("literal row count {two_n}")));
        }
        if d == 0 {
            return Err(EmbedError::BadHeader("d = 0".into()));
        }
        let per_step = (two_n + m)
            .checked_mul(d)
            .and_then(|x| x.checked_mul(4))
            .ok_or_else(|| EmbedError::BadHeader("size overflow".into()))?;
        let expected = per_step
            .checked_mul(t)
            .and_then(|x| x.checked_add(20))
            .ok_or_else(|| EmbedError::BadHeader("size overflow".into()))?;
        if bytes.len() != expected {
            return Err(EmbedError::Truncated {
                expected,
                found: bytes.len(),
            });
        }
        let floats = |start: usize, count: usize| -> Vec<f32> {
            bytes[start..start + 4 * count]
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect()
        };
        let mut steps = Vec::with_capacity(t);
        let mut at = 20;
        for _ in 0..t {
            let l = Matrix::from_vec(two_n, d, floats(at, two_n * d))?;
            at += 4 * two_n * d;
            let c = Matrix::from_vec(m, d, floats(at, m * d))?;
            at += 4 * m * d;
            steps.push((l, c));
        }
        EmbeddingTrajectory::new(two_n / 2, m, d, steps)
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        let file = fs::File::create(path)?;
        self.write_to(io::BufWriter::new(file))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, EmbedError> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Writes `traj` to `path` and reads it back.
pub fn dump_roundtrip(
    traj: &EmbeddingTrajectory,
    path: &Path,
) -> Result<EmbeddingTrajectory, EmbedError> {
    traj.save(path)?;
    EmbeddingTrajectory::load(path)
}

/// Iterates the detangled update `iterations` times from `init`.
/// The trajectory holds the embeddings after each update.
pub fn run_detangled(
    f: &CnfFormula,
    w: &DetangledWeights,
    iterations: usize,
    init: &InitEmbedding,
) -> Result<EmbeddingTrajectory, EmbedError> {
    if iterations == 0 {
        return Err(EmbedError::BadHeader("need at least one iteration".into()));
    }
    let n = f.num_vars();
    let m = f.num_clauses();
    let (mut l, mut c) = match init {
        InitEmbedding::Constant { literal, clause } => {
            (Matrix::tiled(2 * n, literal), Matrix::tiled(m, clause))
        }
        InitEmbedding::Matrices { literal, clause } => (literal.clone(), clause.clone()),
    };
    if l.cols() != w.dim() || (m > 0 && c.cols() != w.dim()) {
        return Err(EmbedError::Shape(
            "initial embedding dimension differs from weights".into(),
        ));
    }
    if m == 0 {
        c = Matrix::zeros(0, w.dim());
    }
    let mut steps = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (nl, nc) = detangled_step(f, &l, &c, w)?;
        steps.push((nl.clone(), nc.clone()));
        l = nl;
        c = nc;
    }
    EmbeddingTrajectory::new(n, m, w.dim(), steps)
}

/// Gaussian weights with standard deviation `scale / sqrt(d)` and zero bias.
pub fn random_weights(d: usize, scale: f32, seed: u64) -> DetangledWeights {
    let mut rng = rng_from_seed(seed);
    let sd = scale / (d as f32).sqrt();
    let mut affine = || Affine {
        weight: Matrix::from_fn(d, d, |_, _| {
            let z: f32 = rng.sample(StandardNormal);
            sd * z
        }),
        bias: vec![0.0; d],
    };
    DetangledWeights {
        clause: affine(),
        literal_msg: affine(),
        literal_diff: affine(),
    }
}

/// Shape of a synthetic trajectory carrying an assignment along one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSignal {
    pub d: usize,
    pub iterations: usize,
    /// Number of coordinates the signal direction is spread over.
    pub support: usize,
    /// Signal amplitude at the last iteration; it grows linearly from 1/T of that.
    pub amplitude: f32,
    /// Standard deviation of the isotropic Gaussian noise.
    pub noise: f32,
}

impl Default for PlantedSignal {
    fn default() -> Self {
        PlantedSignal {
            d: 128,
            iterations: 20,
            support: 16,
            amplitude: 3.0,
            noise: 0.5,
        }
    }
}

/// Synthetic trajectory whose literal rows are `±a_t u + noise`, the sign being
/// `+` for literals True under `phi`. `u` is a unit vector on `support` random
/// coordinates. Clause rows are pure noise. Returns the trajectory and `u`.
pub fn planted_signal_trajectory(
    phi: &Assignment,
    m: usize,
    cfg: &PlantedSignal,
    seed: u64,
) -> Result<(EmbeddingTrajectory, Vec<f32>), EmbedError> {
    let n = phi.len();
    let d = cfg.d;
    if cfg.support == 0 || cfg.support > d {
        return Err(EmbedError::Shape(format!(
            "signal support {} of {d}",
            cfg.support
        )));
    }
    let mut rng = rng_from_seed(seed);
    let gauss = |rng: &mut crate::gen::Rng| -> f32 { rng.sample(StandardNormal) };
    let mut coords: Vec<usize> = (0..d).collect();
    for i in 0..cfg.support {
        let j = rng.random_range(i..d);
        coords.swap(i, j);
    }
    let mut u = vec![0.0f32; d];
    for &c in &coords[..cfg.support] {
        u[c] = gauss(&mut rng);
    }
    let norm = u.iter().map(|x| x * x).sum::<f32>().sqrt();
    u.iter_mut().for_each(|x| *x /= norm);

    let mut steps = Vec::with_capacity(cfg.iterations);
    for t in 0..cfg.iterations {
        let a = cfg.amplitude * (t + 1) as f32 / cfg.iterations as f32;
        let l = Matrix::from_fn(2 * n, d, |r, c| {
            let truth = phi.values()[r % n] != (r >= n);
            let sign = if truth { 1.0 } else { -1.0 };
            sign * a * u[c] + cfg.noise * gauss(&mut rng)
        });
        let cl = Matrix::from_fn(m, d, |_, _| cfg.noise * gauss(&mut rng));
        steps.push((l, cl));
    }
    Ok((EmbeddingTrajectory::new(n, m, d, steps)?, u))
}
