//! Brute-force oracles shared by the integration tests. They recompute
//! everything from the clause lists without touching the incremental code.
#![allow(dead_code)]

use satlab_core::cnf::{CnfFormula, Literal};

pub fn lit_true(l: Literal, values: &[bool]) -> bool {
    values[l.var()] != l.is_negated()
}

pub fn true_counts(f: &CnfFormula, values: &[bool]) -> Vec<u32> {
    f.clauses()
        .map(|c| c.iter().filter(|&&l| lit_true(l, values)).count() as u32)
        .collect()
}

pub fn unsat_clauses(f: &CnfFormula, values: &[bool]) -> Vec<usize> {
    true_counts(f, values)
        .iter()
        .enumerate()
        .filter(|(_, &k)| k == 0)
        .map(|(c, _)| c)
        .collect()
}

/// Number of clauses each variable is the sole True literal of.
pub fn supports(f: &CnfFormula, values: &[bool]) -> Vec<u32> {
    let mut s = vec![0; f.num_vars()];
    for c in f.clauses() {
        let t: Vec<&Literal> = c.iter().filter(|&&l| lit_true(l, values)).collect();
        if t.len() == 1 {
            s[t[0].var()] += 1;
        }
    }
    s
}

pub fn satisfies(f: &CnfFormula, values: &[bool]) -> bool {
    f.clauses().all(|c| c.iter().any(|&l| lit_true(l, values)))
}

/// Every satisfying assignment, by enumerating all `2^n` assignments.
pub fn models(f: &CnfFormula) -> Vec<Vec<bool>> {
    let n = f.num_vars();
    assert!(n <= 22, "enumeration oracle limited to small n");
    (0u64..1 << n)
        .map(|bits| (0..n).map(|v| bits >> v & 1 == 1).collect::<Vec<bool>>())
        .filter(|vals| satisfies(f, vals))
        .collect()
}

pub fn brute_sat(f: &CnfFormula) -> bool {
    let n = f.num_vars();
    (0u64..1 << n).any(|bits| {
        let vals: Vec<bool> = (0..n).map(|v| bits >> v & 1 == 1).collect();
        satisfies(f, &vals)
    })
}

/// Number of unsatisfied clauses when `v` alone is flipped.
pub fn unsat_after_flip(f: &CnfFormula, values: &[bool], v: usize) -> usize {
    let mut w = values.to_vec();
    w[v] = !w[v];
    unsat_clauses(f, &w).len()
}

/// Mean over every (trajectory, iteration) of the population covariance of the
/// literal rows, with plain nested loops.
pub fn covariance_brute(trajs: &[satlab_core::EmbeddingTrajectory]) -> Vec<Vec<f64>> {
    let d = trajs[0].d;
    let mut total = vec![vec![0.0; d]; d];
    let mut count = 0.0;
    for traj in trajs {
        for t in 0..traj.len() {
            let x = traj.literals(t);
            let rows = x.rows() as f64;
            let mean: Vec<f64> = (0..d)
                .map(|j| (0..x.rows()).map(|r| x.get(r, j) as f64).sum::<f64>() / rows)
                .collect();
            for a in 0..d {
                for b in 0..d {
                    let mut s = 0.0;
                    for r in 0..x.rows() {
                        s += (x.get(r, a) as f64 - mean[a]) * (x.get(r, b) as f64 - mean[b]);
                    }
                    total[a][b] += s / rows;
                }
            }
            count += 1.0;
        }
    }
    for row in &mut total {
        row.iter_mut().for_each(|v| *v /= count);
    }
    total
}

/// Number of eigenvalues of the symmetric `s` strictly above `sigma`, read off
/// the pivot signs of an unpivoted LDLᵀ of `s - sigma I` (Sylvester's inertia).
#[allow(clippy::needless_range_loop)]
pub fn eigenvalues_above(s: &[Vec<f64>], sigma: f64) -> usize {
    let d = s.len();
    let mut a: Vec<Vec<f64>> = s.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= sigma;
    }
    let mut positive = 0;
    for k in 0..d {
        let pivot = a[k][k];
        if pivot > 0.0 {
            positive += 1;
        }
        for i in k + 1..d {
            let factor = a[i][k] / pivot;
            for j in k + 1..d {
                a[i][j] -= factor * a[k][j];
            }
        }
    }
    positive
}

/// Standard normal CDF (Abramowitz and Stegun 7.1.26, error below 1e-7).
pub fn normal_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.327_591_1 * z);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = 1.0 - poly * (-z * z).exp();
    if x >= 0.0 {
        0.5 * (1.0 + erf)
    } else {
        0.5 * (1.0 - erf)
    }
}
