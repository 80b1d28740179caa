//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line straight
//! to stdout, so the lines show up even when the harness captures output.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use satlab_core::cnf::{
    evaluate, majority_assignment, parse_dimacs, support_init, to_dimacs_string, Assignment,
    CnfFormula, Literal,
};
use satlab_core::compare::{compare_solvers, CompareSpec, Comparison};
use satlab_core::concepts::{
    assignment_from_pc1, averaged_covariance, pca_top2, sparsify_pc, Entity,
};
use satlab_core::embed::{
    flip_rows, planted_signal_trajectory, random_weights, run_detangled, InitEmbedding,
    PlantedSignal,
};
use satlab_core::exact::{backbone_exact, dpll_solve, Status};
use satlab_core::gen::{build_manifest, inject_backbone_clause, planted_3sat, random_3sat};
use satlab_core::search::{run_local_search, textbook_neurosat, InitMode, Policy, SolverConfig};
use satlab_core::{EmbeddingTrajectory, Matrix};

type Outcome = Result<String, String>;

fn report(id: u32, name: &str, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id:>2} [{tag}] {name}: {detail} ({secs:.1}s)").unwrap();
    out.flush().unwrap();
    result.is_ok()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_assignment(n: usize, rng: &mut ChaCha8Rng) -> Assignment {
    (0..n).map(|_| rng.random_bool(0.5)).collect::<Vec<_>>().into()
}

// 1 ------------------------------------------------------------------------

const CONVERGENCE_BUDGET: Duration = Duration::from_secs(15 * 60);

fn convergence_spec(n: usize) -> CompareSpec {
    let text = format!(
        "name = convergence_n{n}\n\
         instances = random n={n} c=4.1 count=40 seed=1000\n\
         policies = walksat walksatpp support01\n\
         init = maj\nT = 1000000\np = 0.1\nseed = 77\n"
    );
    CompareSpec::parse(&text, Path::new(".")).unwrap()
}

fn describe(cmp: &Comparison) -> String {
    cmp.outcomes
        .iter()
        .map(|o| {
            let median = o
                .median_iters()
                .map_or("unsolved".to_string(), |m| format!("{m:.0}"));
            format!("{} median {median} ({}/{})", o.policy, o.solved(), o.runs())
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn convergence() -> Outcome {
    let start = Instant::now();
    let mut cmp = compare_solvers(&convergence_spec(1500)).map_err(|e| e.to_string())?;
    let mut n = 1500;
    if start.elapsed() > CONVERGENCE_BUDGET {
        n = 500;
        cmp = compare_solvers(&convergence_spec(500)).map_err(|e| e.to_string())?;
    }
    let inf = |p: Policy| {
        cmp.outcome(p)
            .and_then(|o| o.median_iters())
            .unwrap_or(f64::INFINITY)
    };
    let (ws, pp, s01) = (
        inf(Policy::WalkSat),
        inf(Policy::WalkSatPlusPlus),
        inf(Policy::Support01),
    );
    let ordered = s01 < pp && pp < ws;
    let speedup = ws / s01;
    let in_band = (1.2..=2.5).contains(&speedup);
    check(
        ordered && in_band,
        format!(
            "n={n}: {}; speedup walksat/support01 = {speedup:.2}",
            describe(&cmp)
        ),
    )
}

// 2 ------------------------------------------------------------------------

fn support_expectation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut total = 0.0;
    for i in 0..20 {
        let f = random_3sat(1000, 4000, 20_000 + i).unwrap();
        let state = support_init(&f, &random_assignment(1000, &mut rng)).unwrap();
        total += state.supports().iter().map(|&s| s as f64).sum::<f64>() / 1000.0;
    }
    let mean = total / 20.0;
    check((mean - 1.5).abs() <= 0.1, format!("mean support {mean:.4}, target 1.5 ± 0.1"))
}

// 3 ------------------------------------------------------------------------

fn backbone_injection() -> Outcome {
    let mut unsat = 0;
    let mut with_backbone = 0;
    let mut free_trials = 0;
    let mut free_sat = 0;
    for seed in 0..50 {
        let (f, phi) = planted_3sat(30, 450, 3000 + seed).unwrap();
        let bb = backbone_exact(&f).unwrap();
        if bb.len() >= 3 {
            with_backbone += 1;
            let g = inject_backbone_clause(&f, &phi, [bb[0].0, bb[1].0, bb[2].0]).unwrap();
            if dpll_solve(&g).unwrap().status == Status::Unsat {
                unsat += 1;
            }
        }
        let free: Vec<usize> = (0..30).filter(|v| bb.iter().all(|b| b.0 != *v)).collect();
        if free.len() >= 3 {
            free_trials += 1;
            let g = inject_backbone_clause(&f, &phi, [free[0], free[1], free[2]]).unwrap();
            if dpll_solve(&g).unwrap().status == Status::Sat {
                free_sat += 1;
            }
        }
    }
    check(
        with_backbone > 0 && unsat == with_backbone && free_sat == free_trials,
        format!(
            "backbone triples UNSAT {unsat}/{with_backbone}; non-backbone triples SAT {free_sat}/{free_trials}"
        ),
    )
}

// 4 ------------------------------------------------------------------------

fn planted_satisfiability() -> Outcome {
    let manifest = build_manifest("PLANTED").unwrap().with_total_cap(500);
    let tasks = manifest.tasks();
    let mut ok = 0;
    for &(entry, idx) in &tasks {
        let inst = manifest.generate(entry, idx).unwrap();
        let phi = inst.planted.as_ref().unwrap();
        if evaluate(&inst.formula, phi).unwrap().satisfied {
            ok += 1;
        }
    }
    check(
        tasks.len() == 500 && ok == 500,
        format!("{ok}/{} satisfied by their planted assignment", tasks.len()),
    )
}

// 5 ------------------------------------------------------------------------

fn covariance_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (d, t) = (128, 20);
    let mut worst = 0.0f64;
    for k in 0..5 {
        let n = 30 + 10 * k;
        let m = 4 * n;
        let mut gauss = || -> f32 { rng.sample(StandardNormal) };
        let steps = (0..t)
            .map(|_| {
                (
                    Matrix::from_fn(2 * n, d, |_, _| gauss()),
                    Matrix::from_fn(m, d, |_, _| gauss()),
                )
            })
            .collect();
        let traj = EmbeddingTrajectory::new(n, m, d, steps).unwrap();
        let trajs = std::slice::from_ref(&traj);
        let got = averaged_covariance(trajs, Entity::Literal).unwrap();
        let want = common::covariance_brute(trajs);
        let norm = want.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        let diff = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .map(|(a, b)| (got[(a, b)] - want[a][b]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / norm);
    }
    check(worst <= 1e-10, format!("max relative error {worst:.2e} over 5 trajectories"))
}

// 6 ------------------------------------------------------------------------

fn pca_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_residual = 0.0f64;
    let mut worst_ortho = 0.0f64;
    let mut wrong_top = 0;
    for _ in 0..100 {
        let a = DMatrix::<f64>::from_fn(128, 128, |_, _| rng.sample(StandardNormal));
        let s = (&a + a.transpose()) * 0.5;
        let pca = pca_top2(&s).unwrap();
        let norm = s.norm();
        for (v, l) in [(&pca.pc1, pca.lambda1), (&pca.pc2, pca.lambda2)] {
            let v = DVector::from_column_slice(v);
            worst_residual = worst_residual.max((&s * &v - &v * l).norm() / norm);
        }
        let dot: f64 = pca.pc1.iter().zip(&pca.pc2).map(|(x, y)| x * y).sum();
        worst_ortho = worst_ortho.max(dot.abs());
        let rows: Vec<Vec<f64>> = (0..128).map(|i| s.row(i).iter().copied().collect()).collect();
        let delta = 1e-7 * norm;
        if common::eigenvalues_above(&rows, pca.lambda1 + delta) != 0
            || common::eigenvalues_above(&rows, pca.lambda2 - delta) < 2
        {
            wrong_top += 1;
        }
    }
    let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0, 0.0]));
    let p = pca_top2(&diag).unwrap();
    let diag_ok = p.explained() == [0.8, 0.2] && p.pc1 == [1.0, 0.0, 0.0] && p.pc2 == [0.0, 1.0, 0.0];
    check(
        worst_residual <= 1e-8 && worst_ortho <= 1e-8 && wrong_top == 0 && diag_ok,
        format!(
            "residual {worst_residual:.2e}·‖S‖, orthogonality {worst_ortho:.2e}, \
             non-top pairs {wrong_top}, diag(4,1,0) explained {:?}",
            p.explained()
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn sparse_fidelity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = PlantedSignal::default();
    let mut agree = 0usize;
    let mut total = 0usize;
    let mut worst = 1.0f64;
    for seed in 0..5 {
        let phi = random_assignment(400, &mut rng);
        let (traj, _) = planted_signal_trajectory(&phi, 1700, &cfg, 70 + seed).unwrap();
        let s = averaged_covariance(std::slice::from_ref(&traj), Entity::Literal).unwrap();
        let pc1 = pca_top2(&s).unwrap().pc1;
        let sparse = sparsify_pc(&pc1, 16).unwrap();
        for t in 0..traj.len() {
            let (full, _) = assignment_from_pc1(traj.literals(t), &pc1).unwrap();
            let (sp, _) = assignment_from_pc1(traj.literals(t), &sparse).unwrap();
            let same = phi.len() - full.hamming(&sp);
            worst = worst.min(same as f64 / phi.len() as f64);
            agree += same;
            total += phi.len();
        }
    }
    let rate = agree as f64 / total as f64;
    check(
        rate >= 0.95,
        format!(
            "agreement {:.2}% over all iterations (worst iteration {:.2}%)",
            100.0 * rate,
            100.0 * worst
        ),
    )
}

// 8 ------------------------------------------------------------------------

fn exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut disagreements = 0;
    let mut sat = 0;
    for i in 0..500 {
        let n = rng.random_range(3..=10);
        let c = rng.random_range(3.0..=6.0);
        let m = ((c * n as f64).round() as usize).max(1);
        let f = random_3sat(n, m, 80_000 + i).unwrap();
        let r = dpll_solve(&f).unwrap();
        let witness_ok = r.witness.as_ref().is_none_or(|w| common::satisfies(&f, w.values()));
        if r.is_sat() != common::brute_sat(&f) || !witness_ok {
            disagreements += 1;
        }
        sat += r.is_sat() as usize;
    }
    check(
        disagreements == 0,
        format!("{disagreements} disagreements on 500 instances ({sat} satisfiable)"),
    )
}

// 9 ------------------------------------------------------------------------

fn replay_matches_fresh() -> bool {
    let f = random_3sat(100, 420, 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = support_init(&f, &random_assignment(100, &mut rng)).unwrap();
    for _ in 0..10_000 {
        state.flip(&f, rng.random_range(0..100)).unwrap();
    }
    let values = state.values().to_vec();
    let fresh = support_init(&f, &state.assignment()).unwrap();
    state.same_as(&fresh) && state.supports() == common::supports(&f, &values).as_slice()
}

fn majority_optimal() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    let total = |f: &CnfFormula, w: &[bool]| common::true_counts(f, w).iter().sum::<u32>();
    (0..1000).all(|i| {
        let n = rng.random_range(3..60);
        let m = ((rng.random_range(0.5..8.0) * n as f64) as usize).max(1);
        let f = random_3sat(n, m, 90_000 + i).unwrap();
        let maj = majority_assignment(&f).into_inner();
        let base = total(&f, &maj);
        (0..n).all(|v| {
            let mut w = maj.clone();
            w[v] = !w[v];
            total(&f, &w) <= base
        })
    })
}

fn involution() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let l = Matrix::from_fn(40, 9, |_, _| rng.random_range(-1.0..1.0));
    flip_rows(&flip_rows(&l).unwrap()).unwrap() == l
}

fn equivariance_drift() -> f32 {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    let (n, m, d) = (30, 130, 12);
    let f = random_3sat(n, m, 92).unwrap();
    let mut shuffled = |k: usize| {
        let mut p: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            p.swap(i, rng.random_range(0..=i));
        }
        p
    };
    let pi = shuffled(n);
    let sigma = shuffled(m);
    let mut clauses = vec![Vec::new(); m];
    for (c, clause) in f.clauses().enumerate() {
        clauses[sigma[c]] = clause
            .iter()
            .map(|l| Literal::new(pi[l.var()], l.is_negated()))
            .collect::<Vec<_>>();
    }
    let g = CnfFormula::new(n, clauses).unwrap();
    let lit = |r: usize| if r < n { pi[r] } else { n + pi[r - n] };
    let l = Matrix::from_fn(2 * n, d, |_, _| rng.random_range(-1.0..1.0));
    let c = Matrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let permute = |x: &Matrix, map: &dyn Fn(usize) -> usize| {
        let mut y = Matrix::zeros(x.rows(), x.cols());
        for r in 0..x.rows() {
            y.row_mut(map(r)).copy_from_slice(x.row(r));
        }
        y
    };
    let clause_map = |r: usize| sigma[r];
    let w = random_weights(d, 1.0, 92);
    let tf = run_detangled(&f, &w, 5, &InitEmbedding::Matrices { literal: l.clone(), clause: c.clone() })
        .unwrap();
    let tg = run_detangled(
        &g,
        &w,
        5,
        &InitEmbedding::Matrices {
            literal: permute(&l, &lit),
            clause: permute(&c, &clause_map),
        },
    )
    .unwrap();
    let dev = |a: &Matrix, b: &Matrix| {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f32, f32::max)
    };
    (0..5)
        .map(|t| {
            dev(&permute(tf.literals(t), &lit), tg.literals(t))
                .max(dev(&permute(tf.clauses(t), &clause_map), tg.clauses(t)))
        })
        .fold(0.0, f32::max)
}

fn round_trips() -> bool {
    let f = random_3sat(50, 210, 93).unwrap();
    let dimacs = parse_dimacs(to_dimacs_string(&f).as_bytes()).unwrap() == f;
    let mut rng = ChaCha8Rng::seed_from_u64(93);
    let steps = (0..3)
        .map(|_| {
            (
                Matrix::from_fn(100, 6, |_, _| rng.random_range(-1.0..1.0)),
                Matrix::from_fn(210, 6, |_, _| rng.random_range(-1.0..1.0)),
            )
        })
        .collect();
    let traj = EmbeddingTrajectory::new(50, 210, 6, steps).unwrap();
    let bytes = traj.to_bytes();
    let back = EmbeddingTrajectory::from_bytes(&bytes).unwrap();
    dimacs && back == traj && back.to_bytes() == bytes
}

fn deterministic() -> bool {
    let f = random_3sat(80, 330, 94).unwrap();
    Policy::ALL.iter().all(|&policy| {
        let cfg = match policy {
            Policy::Textbook => SolverConfig { seed: 3, ..SolverConfig::textbook() },
            _ => SolverConfig { seed: 3, max_iters: 5000, init: InitMode::Random, ..Default::default() },
        };
        let a = run_local_search(&f, &cfg, policy).unwrap();
        let b = run_local_search(&f, &cfg, policy).unwrap();
        a == b
    })
}

fn property_suites() -> Outcome {
    let replay = replay_matches_fresh();
    let maj = majority_optimal();
    let inv = involution();
    let drift = equivariance_drift();
    let trips = round_trips();
    let det = deterministic();
    check(
        replay && maj && inv && drift <= 1e-6 && trips && det,
        format!(
            "replay {replay}, majority {maj}, involution {inv}, equivariance drift {drift:.1e}, \
             round trips {trips}, determinism {det}"
        ),
    )
}

// 10 -----------------------------------------------------------------------

fn textbook_contract() -> Outcome {
    let mut early_flips = 0;
    let mut mismatched = 0;
    let mut flips = 0usize;
    let mut iterations = 0usize;
    for seed in 0..40u64 {
        let f = random_3sat(400, 1680, 10_000 + seed).unwrap();
        let cfg = SolverConfig { seed, ..SolverConfig::textbook() };
        let (_, trace) = textbook_neurosat(&f, &cfg).unwrap();
        let mut values = majority_assignment(&f).into_inner();
        for (i, row) in trace.rows.iter().enumerate() {
            let t = trace.iter_of(i);
            iterations += 1;
            if let Some(v) = row.flipped() {
                if t <= 30 {
                    early_flips += 1;
                }
                let class = common::supports(&f, &values)[v].min(3) as u8;
                if row.sampled_class() != Some(class) || row.support_class() != Some(class) {
                    mismatched += 1;
                }
                values[v] = !values[v];
                flips += 1;
            }
        }
    }
    let per_iter = flips as f64 / iterations as f64;
    check(
        early_flips == 0 && mismatched == 0 && per_iter <= 1.0,
        format!(
            "{early_flips} flips at t<=30, {mismatched} class mismatches, \
             {per_iter:.3} flips per iteration (one row per iteration)"
        ),
    )
}

#[test]
fn acceptance() {
    let results = [
        report(2, "support expectation", support_expectation),
        report(3, "backbone injection", backbone_injection),
        report(4, "planted satisfiability", planted_satisfiability),
        report(5, "averaged covariance oracle", covariance_oracle),
        report(6, "PCA correctness", pca_correctness),
        report(7, "sparse PC fidelity", sparse_fidelity),
        report(8, "DPLL exactness", exactness),
        report(9, "property suites", property_suites),
        report(10, "textbook trace contract", textbook_contract),
        report(1, "convergence ordering and speedup", convergence),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
