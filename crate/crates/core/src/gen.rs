//! Random and planted 3-SAT generators, dataset manifests and the backbone
//! clause injection.
//!
//! All randomness comes from [`Rng`], ChaCha with 8 rounds seeded from a `u64`,
//! so a given `(n, m, seed)` produces the same formula on every platform.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng as _, SeedableRng};
use rayon::prelude::*;

use crate::cnf::{self, Assignment, CnfFormula, Literal};
use crate::error::GenError;

/// The generator used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Uniform clause over 3 distinct variables with independent polarities,
/// variables in ascending order.
fn random_clause<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> [Literal; 3] {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut c = rng.random_range(0..n - 2);
    if c >= lo {
        c += 1;
    }
    if c >= hi {
        c += 1;
    }
    let mut vars = [a, b, c];
    vars.sort_unstable();
    vars.map(|v| Literal::new(v, rng.random_bool(0.5)))
}

fn check_params(n: usize, m: usize) -> Result<(), GenError> {
    if n < 3 {
        return Err(GenError::TooFewVariables(n));
    }
    if m == 0 {
        return Err(GenError::NoClauses);
    }
    Ok(())
}

/// A formula from R(m, n): `m` clauses drawn independently with replacement.
pub fn random_3sat(n: usize, m: usize, seed: u64) -> Result<CnfFormula, GenError> {
    check_params(n, m)?;
    let mut rng = rng_from_seed(seed);
    let clauses: Vec<[Literal; 3]> = (0..m).map(|_| random_clause(n, &mut rng)).collect();
    Ok(CnfFormula::new(n, clauses).expect("generated clauses are well formed"))
}

/// A formula from P(m, n) together with its planted assignment.
pub fn planted_3sat(n: usize, m: usize, seed: u64) -> Result<(CnfFormula, Assignment), GenError> {
    check_params(n, m)?;
    let mut rng = rng_from_seed(seed);
    let phi: Assignment = (0..n)
        .map(|_| rng.random_bool(0.5))
        .collect::<Vec<_>>()
        .into();
    let f = planted_clauses(n, m, &phi, &mut rng);
    Ok((f, phi))
}

/// Planted formula for a caller-chosen hidden assignment.
pub fn planted_3sat_with(phi: &Assignment, m: usize, seed: u64) -> Result<CnfFormula, GenError> {
    check_params(phi.len(), m)?;
    let mut rng = rng_from_seed(seed);
    Ok(planted_clauses(phi.len(), m, phi, &mut rng))
}

fn planted_clauses(n: usize, m: usize, phi: &Assignment, rng: &mut Rng) -> CnfFormula {
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let cl = random_clause(n, rng);
        if cl.iter().any(|l| l.eval(phi.values())) {
            clauses.push(cl);
        }
    }
    CnfFormula::new(n, clauses).expect("generated clauses are well formed")
}

/// Appends the clause over `triple` whose literals are all False under `phi`.
///
/// When the three variables belong to the backbone of `f`, the result is UNSAT.
pub fn inject_backbone_clause(
    f: &CnfFormula,
    phi: &Assignment,
    triple: [usize; 3],
) -> Result<CnfFormula, GenError> {
    let [x, y, z] = triple;
    if x == y || y == z || x == z || triple.iter().any(|&v| v >= f.num_vars() || v >= phi.len()) {
        return Err(GenError::BadTriple);
    }
    let clause = triple.map(|v| Literal::new(v, phi.get(v)));
    let mut out = f.clone();
    out.push_clause(&clause).expect("triple validated above");
    Ok(out)
}

// ---------------------------------------------------------------------------
// Manifests

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Random,
    Planted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub n: usize,
    pub c: f64,
    pub count: usize,
    pub seed_base: u64,
}

impl ManifestEntry {
    pub fn num_clauses(&self) -> usize {
        ((self.c * self.n as f64).round() as usize).max(1)
    }

    pub fn seed(&self, idx: usize) -> u64 {
        self.seed_base + idx as u64
    }
}

/// One generated instance of a manifest.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub formula: CnfFormula,
    pub planted: Option<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
}

const GRID_N: [usize; 4] = [500, 1000, 1500, 2000];
const SPARSE_C: [f64; 7] = [0.5, 0.8, 1.0, 1.25, 1.3, 1.5, 1.6];
const DENSE_C: [f64; 5] = [3.75, 4.0, 4.1, 4.2, 4.25];
const INSTANCES_PER_CELL: usize = 100;

/// The SPARSE, DENSE and PLANTED datasets, 100 instances per (n, c) cell.
pub fn build_manifest(name: &str) -> Result<DatasetManifest, GenError> {
    let (id, cs): (u64, Vec<f64>) = match name {
        "SPARSE" => (1, SPARSE_C.to_vec()),
        "DENSE" => (2, DENSE_C.to_vec()),
        "PLANTED" => (3, (0..23).map(|i| 4.5 + 0.5 * i as f64).collect()),
        other => return Err(GenError::UnknownDataset(other.to_string())),
    };
    let mut entries = Vec::new();
    for &n in &GRID_N {
        for &c in &cs {
            let cell = entries.len() as u64;
            entries.push(ManifestEntry {
                n,
                c,
                count: INSTANCES_PER_CELL,
                seed_base: id * 100_000_000 + cell * 100_000,
            });
        }
    }
    Ok(DatasetManifest {
        name: name.to_string(),
        entries,
    })
}

impl DatasetManifest {
    pub fn kind(&self) -> InstanceKind {
        if self.name.to_ascii_uppercase().contains("PLANTED") {
            InstanceKind::Planted
        } else {
            InstanceKind::Random
        }
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Spreads `cap` instances as evenly as possible over the entries, earlier
    /// entries taking the remainder. Instances keep their original seeds.
    pub fn with_total_cap(mut self, cap: usize) -> Self {
        if cap >= self.total() || self.entries.is_empty() {
            return self;
        }
        let k = self.entries.len();
        for (i, e) in self.entries.iter_mut().enumerate() {
            let share = cap / k + usize::from(i < cap % k);
            e.count = e.count.min(share);
        }
        self
    }

    pub fn instance_name(&self, entry: &ManifestEntry, idx: usize) -> String {
        format!("{}_n{}_c{}_i{}", self.name, entry.n, entry.c, idx)
    }

    pub fn generate(&self, entry: &ManifestEntry, idx: usize) -> Result<Instance, GenError> {
        let m = entry.num_clauses();
        let seed = entry.seed(idx);
        let (formula, planted) = match self.kind() {
            InstanceKind::Random => (random_3sat(entry.n, m, seed)?, None),
            InstanceKind::Planted => {
                let (f, phi) = planted_3sat(entry.n, m, seed)?;
                (f, Some(phi))
            }
        };
        Ok(Instance {
            name: self.instance_name(entry, idx),
            formula,
            planted,
        })
    }

    /// Every (entry, index) pair in manifest order.
    pub fn tasks(&self) -> Vec<(&ManifestEntry, usize)> {
        self.entries
            .iter()
            .flat_map(|e| (0..e.count).map(move |i| (e, i)))
            .collect()
    }

    /// Writes every instance as DIMACS (plus `.assign` sidecars for planted
    /// instances) into `dir`. Returns the written `.cnf` paths in manifest order.
    pub fn materialize(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        self.tasks()
            .into_par_iter()
            .map(|(entry, idx)| {
                let inst = self
                    .generate(entry, idx)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
                let path = dir.join(format!("{}.cnf", inst.name));
                let file = io::BufWriter::new(fs::File::create(&path)?);
                cnf::write_dimacs(&inst.formula, file)?;
                if let Some(phi) = &inst.planted {
                    let mut line = phi.to_bitstring();
                    line.push('\n');
                    fs::write(dir.join(format!("{}.assign", inst.name)), line)?;
                }
                Ok(path)
            })
            .collect()
    }

    /// Parses the line format `name n c count seed_base`. Blank lines and lines
    /// starting with `#` are skipped; all lines must share one name.
    pub fn parse(text: &str) -> Result<Self, GenError> {
        let mut name: Option<String> = None;
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: &str| GenError::ManifestParse {
                line: i + 1,
                reason: reason.to_string(),
            };
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(err("expected `name n c count seed_base`"));
            }
            match &name {
                None => name = Some(parts[0].to_string()),
                Some(existing) if existing != parts[0] => return Err(err("mixed dataset names")),
                _ => {}
            }
            let entry = ManifestEntry {
                n: parts[1].parse().map_err(|_| err("n"))?,
                c: parts[2].parse().map_err(|_| err("c"))?,
                count: parts[3].parse().map_err(|_| err("count"))?,
                seed_base: parts[4].parse().map_err(|_| err("seed_base"))?,
            };
            if entry.c.is_nan() || entry.c <= 0.0 || entry.count == 0 || entry.num_clauses() < 1 {
                return Err(err("need c > 0 and count > 0"));
            }
            entries.push(entry);
        }
        Ok(DatasetManifest {
            name: name.ok_or(GenError::ManifestParse {
                line: 0,
                reason: "no entries".into(),
            })?,
            entries,
        })
    }
}

impl fmt::Display for DatasetManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{} {} {} {} {}",
                self.name, e.n, e.c, e.count, e.seed_base
            )?;
        }
        Ok(())
    }
}
