mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use satlab_core::exact::{backbone_exact, dpll_solve, dpll_solve_with, Status};
use satlab_core::gen::{inject_backbone_clause, planted_3sat, random_3sat};

#[test]
fn dpll_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut sat = 0;
    for i in 0..500 {
        let n = rng.random_range(3..=10);
        let c = rng.random_range(3.0..=6.0);
        let m = ((c * n as f64).round() as usize).max(1);
        let f = random_3sat(n, m, 70_000 + i).unwrap();
        let r = dpll_solve(&f).unwrap();
        assert_eq!(r.is_sat(), common::brute_sat(&f), "instance {i}");
        if let Some(w) = &r.witness {
            assert!(common::satisfies(&f, w.values()));
            sat += 1;
        }
    }
    // the mix straddles the threshold, so both answers occur
    assert!(sat > 50 && sat < 450, "{sat} satisfiable");
}

fn backbone_by_enumeration(f: &satlab_core::CnfFormula) -> Vec<(usize, bool)> {
    let models = common::models(f);
    (0..f.num_vars())
        .filter_map(|v| {
            let first = models[0][v];
            models.iter().all(|m| m[v] == first).then_some((v, first))
        })
        .collect()
}

#[test]
fn backbone_agrees_with_enumeration() {
    for seed in 0..20 {
        let (f, phi) = planted_3sat(18, 18 * 6, 300 + seed).unwrap();
        let bb = backbone_exact(&f).unwrap();
        assert_eq!(bb, backbone_by_enumeration(&f), "seed {seed}");
        for &(v, b) in &bb {
            assert_eq!(phi.get(v), b);
        }
    }
}

#[test]
fn planted_dense_backbone_is_large() {
    let (f, phi) = planted_3sat(30, 450, 12).unwrap();
    let bb = backbone_exact(&f).unwrap();
    assert!(bb.len() >= 20, "backbone of {} variables", bb.len());
    assert!(bb.iter().all(|&(v, b)| phi.get(v) == b));
}

#[test]
fn assumptions_are_respected() {
    let f = random_3sat(10, 30, 4).unwrap();
    for v in 0..10 {
        for value in [false, true] {
            let r = dpll_solve_with(&f, &[(v, value)], u64::MAX).unwrap();
            let expect = common::models(&f).iter().any(|m| m[v] == value);
            assert_eq!(r.status == Status::Sat, expect);
            if let Some(w) = r.witness {
                assert_eq!(w.get(v), value);
            }
        }
    }
}

#[test]
fn injection_over_backbone_and_nonbackbone_triples() {
    let mut checked_nonbackbone = 0;
    for seed in 0..10 {
        // c = 5 leaves free variables; c = 15 usually has a full backbone
        let m = if seed % 2 == 0 { 450 } else { 150 };
        let (f, phi) = planted_3sat(30, m, 900 + seed).unwrap();
        let bb = backbone_exact(&f).unwrap();
        if bb.len() >= 3 {
            let t = [bb[0].0, bb[1].0, bb[2].0];
            let g = inject_backbone_clause(&f, &phi, t).unwrap();
            assert_eq!(dpll_solve(&g).unwrap().status, Status::Unsat);
        }
        let free: Vec<usize> = (0..30).filter(|v| !bb.iter().any(|b| b.0 == *v)).collect();
        if free.len() >= 3 {
            let g = inject_backbone_clause(&f, &phi, [free[0], free[1], free[2]]).unwrap();
            // three individually free variables need not be jointly free, so only
            // the witness is checked here
            if let Some(w) = dpll_solve(&g).unwrap().witness {
                assert!(common::satisfies(&g, w.values()));
            }
            checked_nonbackbone += 1;
        }
    }
    assert!(checked_nonbackbone > 0);
}
