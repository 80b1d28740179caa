use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use satlab_core::cnf::{appearance_counts, evaluate, parse_dimacs};
use satlab_core::compare::{compare_solvers, env_thread_pool, report, CompareSpec};
use satlab_core::concepts::{
    self, assignments_from_trajectory, averaged_covariance, pca_top2, sparsify_pc, Bucket, Entity,
    StatRow, SupportZoneConfig,
};
use satlab_core::embed::{random_weights, run_detangled, InitEmbedding};
use satlab_core::exact::{backbone_exact_with_budget, dpll_solve_with, DEFAULT_NODE_BUDGET};
use satlab_core::gen::{build_manifest, DatasetManifest};
use satlab_core::search::{
    run_local_search, FlipDistribution, GreedyRule, InitMode, LocalStatus, SupportOneScope,
};
use satlab_core::{Assignment, CnfFormula, EmbeddingTrajectory, Policy, SolverConfig};

#[derive(Parser)]
#[command(
    name = "satlab",
    version,
    about = "Support-aware local search and embedding analysis for random 3-SAT"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a dataset as DIMACS files (plus `.assign` sidecars when planted).
    Gen {
        /// SPARSE, DENSE, PLANTED or a manifest file.
        #[arg(long)]
        manifest: String,
        #[arg(long)]
        out: PathBuf,
        /// Keep at most this many instances, spread evenly over the cells.
        #[arg(long)]
        total_cap: Option<usize>,
    },
    /// Run one local-search policy on a DIMACS file.
    Solve {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, value_parser = parse_policy)]
        policy: Policy,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
        #[arg(long = "T")]
        t: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Init::Maj)]
        init: Init,
        #[arg(long, value_enum, default_value_t = Greedy::LeastSupport)]
        greedy: Greedy,
        #[arg(long, value_enum, default_value_t = Scope::Unsat)]
        scope: Scope,
        /// Flip distribution table (`iter p0 p1 p2`) for the textbook policy.
        #[arg(long)]
        distribution: Option<PathBuf>,
        /// Assignment file; the trace then records the Hamming distance to it.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Write the per-iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compare policies as described by a spec file.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        /// Results directory; overrides `out` in the spec.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Concept statistics over `EMB1` embedding dumps.
    Analyze {
        /// Embedding dump; repeat for several instances.
        #[arg(long, required = true)]
        emb: Vec<PathBuf>,
        /// DIMACS file per dump, or a single one shared by all.
        #[arg(long, required = true)]
        cnf: Vec<PathBuf>,
        #[arg(long, value_enum)]
        stat: Stat,
        /// Per-iteration assignments (one 0/1 line per iteration, or a single
        /// line for all); defaults to the literal PC1 reading.
        #[arg(long)]
        assign: Vec<PathBuf>,
        /// Dataset label; SPARSE and DENSE also pick the default zones.
        #[arg(long, default_value = "custom")]
        dataset: String,
        /// Zone table (`class a b`).
        #[arg(long)]
        zones: Option<PathBuf>,
        /// Keep only this many PC1 loadings.
        #[arg(long)]
        sparse_k: Option<usize>,
        /// Iteration (0-based) used by the appearance regression; default last.
        #[arg(long)]
        iter: Option<usize>,
        #[arg(long, value_enum, default_value_t = EntityArg::Literal)]
        entity: EntityArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the detangled update with random weights and dump the trajectory.
    Embed {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long, default_value_t = 32)]
        d: usize,
        #[arg(long = "T", default_value_t = 20)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact satisfiability (and optionally backbone) by DPLL.
    Exact {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        backbone: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
    },
    /// Render SVG plots for every curve CSV in a results directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Maj,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Greedy {
    LeastSupport,
    BreakCount,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Unsat,
    Anywhere,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stat {
    Cov,
    Pca,
    Contradictions,
    Abiding,
    Zones,
    Maj,
    Appearance,
}

#[derive(Clone, Copy, ValueEnum)]
enum EntityArg {
    Literal,
    Clause,
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse()
}

fn read_cnf(path: &Path) -> Result<CnfFormula> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dimacs(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn read_assignment(path: &Path, n: usize) -> Result<Assignment> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let phi = Assignment::from_bitstring(text.lines().next().unwrap_or(""))
        .with_context(|| format!("{}: not a 0/1 assignment", path.display()))?;
    if phi.len() != n {
        bail!(
            "{}: {} values for {} variables",
            path.display(),
            phi.len(),
            n
        );
    }
    Ok(phi)
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn value_line(phi: &Assignment) -> String {
    let mut line = String::from("v");
    for (v, &b) in phi.values().iter().enumerate() {
        let lit = (v + 1) as i64;
        line.push_str(&format!(" {}", if b { lit } else { -lit }));
    }
    line.push_str(" 0");
    line
}

fn gen(manifest: &str, out: &Path, cap: Option<usize>) -> Result<()> {
    let mut m: DatasetManifest = match build_manifest(manifest) {
        Ok(m) => m,
        Err(_) if Path::new(manifest).is_file() => {
            DatasetManifest::parse(&fs::read_to_string(manifest)?)?
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(cap) = cap {
        m = m.with_total_cap(cap);
    }
    let pool = env_thread_pool()?;
    let paths = pool.install(|| m.materialize(out))?;
    fs::write(out.join(format!("{}.manifest", m.name)), m.to_string())?;
    println!(
        "wrote {} instances of {} to {}",
        paths.len(),
        m.name,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve(
    cnf: &Path,
    policy: Policy,
    p: f64,
    t: Option<usize>,
    seed: u64,
    init: Init,
    greedy: Greedy,
    scope: Scope,
    distribution: Option<&Path>,
    reference: Option<&Path>,
    trace_path: Option<&Path>,
) -> Result<()> {
    let f = read_cnf(cnf)?;
    let mut cfg = if policy == Policy::Textbook {
        SolverConfig::textbook()
    } else {
        SolverConfig::default()
    };
    cfg.noise = p;
    cfg.seed = seed;
    if let Some(t) = t {
        cfg.max_iters = t;
    }
    cfg.init = match init {
        Init::Maj => InitMode::Majority,
        Init::Random => InitMode::Random,
    };
    cfg.greedy = match greedy {
        Greedy::LeastSupport => GreedyRule::LeastSupport,
        Greedy::BreakCount => GreedyRule::BreakCount,
    };
    cfg.support_one_scope = match scope {
        Scope::Unsat => SupportOneScope::UnsatClauses,
        Scope::Anywhere => SupportOneScope::Anywhere,
    };
    if let Some(path) = distribution {
        cfg.distribution = Some(FlipDistribution::parse(&fs::read_to_string(path)?)?);
    }
    if let Some(path) = reference {
        cfg.reference = Some(read_assignment(path, f.num_vars())?);
    }
    let (result, trace) = run_local_search(&f, &cfg, policy)?;
    if let Some(path) = trace_path {
        let file = BufWriter::new(fs::File::create(path)?);
        trace.write_csv(file)?;
    }
    let unsat = evaluate(&f, &result.assignment)?.unsat.len();
    let mut out = io::stdout().lock();
    match result.status {
        LocalStatus::Solved => writeln!(out, "s SATISFIABLE")?,
        LocalStatus::BudgetExhausted => writeln!(out, "s UNKNOWN")?,
    }
    writeln!(
        out,
        "c policy {} flips {} unsat {} solved_at {}",
        policy,
        trace.num_flips(),
        unsat,
        trace.solved_at.map_or("-".to_string(), |s| s.to_string())
    )?;
    writeln!(out, "{}", value_line(&result.assignment))?;
    Ok(())
}

fn compare(spec_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(spec_path)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let spec = CompareSpec::parse(&text, base)?;
    let dir = out
        .or_else(|| spec.out_dir.clone())
        .unwrap_or_else(|| base.join("results"));
    let pool = env_thread_pool()?;
    let cmp = pool.install(|| compare_solvers(&spec))?;
    cmp.save(&dir)?;
    report(&dir)?;
    let mut summary = Vec::new();
    cmp.write_summary_csv(&mut summary)?;
    io::stdout().write_all(&summary)?;
    Ok(())
}

struct Loaded {
    trajectories: Vec<EmbeddingTrajectory>,
    formulas: Vec<CnfFormula>,
}

fn load_analysis(emb: &[PathBuf], cnf: &[PathBuf]) -> Result<Loaded> {
    if cnf.len() != 1 && cnf.len() != emb.len() {
        bail!("{} dumps but {} DIMACS files", emb.len(), cnf.len());
    }
    let mut trajectories = Vec::new();
    let mut formulas = Vec::new();
    for (i, path) in emb.iter().enumerate() {
        let traj = EmbeddingTrajectory::load(path)
            .with_context(|| format!("loading {}", path.display()))?;
        let f = read_cnf(&cnf[i.min(cnf.len() - 1)])?;
        if f.num_vars() != traj.n || f.num_clauses() != traj.m {
            bail!(
                "{}: dump has n={} m={}, formula has n={} m={}",
                path.display(),
                traj.n,
                traj.m,
                f.num_vars(),
                f.num_clauses()
            );
        }
        trajectories.push(traj);
        formulas.push(f);
    }
    Ok(Loaded {
        trajectories,
        formulas,
    })
}

fn read_assignments(path: &Path, n: usize, iterations: usize) -> Result<Vec<Assignment>> {
    let text = fs::read_to_string(path)?;
    let phis: Vec<Assignment> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Assignment::from_bitstring(l).filter(|a| a.len() == n))
        .collect::<Option<_>>()
        .with_context(|| format!("{}: expected 0/1 lines of length {n}", path.display()))?;
    match phis.len() {
        1 => Ok(vec![phis[0].clone(); iterations]),
        k if k == iterations => Ok(phis),
        k => bail!(
            "{}: {k} assignments for {iterations} iterations",
            path.display()
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn analyze(
    emb: &[PathBuf],
    cnf: &[PathBuf],
    stat: Stat,
    assign: &[PathBuf],
    dataset: &str,
    zones: Option<&Path>,
    sparse_k: Option<usize>,
    iter: Option<usize>,
    entity: EntityArg,
    out: &Option<PathBuf>,
) -> Result<()> {
    let data = load_analysis(emb, cnf)?;
    if !assign.is_empty() && assign.len() != emb.len() {
        bail!("{} assignment files for {} dumps", assign.len(), emb.len());
    }
    let pool = env_thread_pool()?;
    let entity = match entity {
        EntityArg::Literal => Entity::Literal,
        EntityArg::Clause => Entity::Clause,
    };
    let mut w = output(out)?;

    if let Stat::Cov = stat {
        let s = pool.install(|| averaged_covariance(&data.trajectories, entity))?;
        for r in 0..s.nrows() {
            let row: Vec<String> = s.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        return Ok(());
    }
    if let Stat::Pca = stat {
        let s = pool.install(|| averaged_covariance(&data.trajectories, entity))?;
        let p = pca_top2(&s)?;
        let [e1, e2] = p.explained();
        writeln!(w, "component,eigenvalue,explained,loadings")?;
        for (name, lambda, frac, v) in [
            ("pc1", p.lambda1, e1, &p.pc1),
            ("pc2", p.lambda2, e2, &p.pc2),
        ] {
            let v = match sparse_k {
                Some(k) => sparsify_pc(v, k)?,
                None => v.clone(),
            };
            let loadings: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            writeln!(w, "{name},{lambda},{frac},{}", loadings.join(" "))?;
        }
        return Ok(());
    }

    let lit =
        pca_top2(&pool.install(|| averaged_covariance(&data.trajectories, Entity::Literal))?)?;
    let pc1 = match sparse_k {
        Some(k) => sparsify_pc(&lit.pc1, k)?,
        None => lit.pc1.clone(),
    };
    let phis = |i: usize| -> Result<Vec<Assignment>> {
        let traj = &data.trajectories[i];
        match assign.get(i) {
            Some(path) => read_assignments(path, traj.n, traj.len()),
            None => Ok(assignments_from_trajectory(traj, &pc1)?),
        }
    };

    let mut rows = Vec::new();
    match stat {
        Stat::Contradictions => {
            let xs = data
                .trajectories
                .iter()
                .map(|t| concepts::contradiction_rate(t, &pc1).map(Some))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(StatRow::from_samples(dataset, "contradictions", &xs));
        }
        Stat::Abiding => {
            let cl = pca_top2(
                &pool.install(|| averaged_covariance(&data.trajectories, Entity::Clause))?,
            )?;
            let cpc1 = match sparse_k {
                Some(k) => sparsify_pc(&cl.pc1, k)?,
                None => cl.pc1.clone(),
            };
            let mut xs = Vec::new();
            for (i, (t, f)) in data.trajectories.iter().zip(&data.formulas).enumerate() {
                xs.push(concepts::concept_abiding_rate(t, &cpc1, f, &phis(i)?)?);
            }
            rows.push(StatRow::from_samples(dataset, "concept_abiding", &xs));
        }
        Stat::Zones => {
            let cfg = match zones {
                Some(path) => SupportZoneConfig::parse(&fs::read_to_string(path)?)?,
                None => SupportZoneConfig::for_dataset(dataset).unwrap_or_default(),
            };
            let mut per_class: [Vec<Option<f64>>; 4] = Default::default();
            for (i, (t, f)) in data.trajectories.iter().zip(&data.formulas).enumerate() {
                let stats = concepts::support_zone_stats(t, &pc1, f, &phis(i)?, &cfg)?;
                for (class, s) in stats.into_iter().enumerate() {
                    per_class[class].push(s);
                }
            }
            for (class, xs) in per_class.iter().enumerate() {
                rows.push(StatRow::from_samples(
                    dataset,
                    &format!("zone_support{class}"),
                    xs,
                ));
            }
        }
        Stat::Maj => {
            let mut xs = Vec::new();
            for (i, f) in data.formulas.iter().enumerate() {
                let last = phis(i)?.pop().expect("non-empty trajectory");
                xs.push(Some(concepts::maj_distance(&last, f)?));
            }
            rows.push(StatRow::from_samples(dataset, "maj_distance", &xs));
        }
        Stat::Appearance => {
            let buckets = Bucket::defaults();
            let mut per_bucket: Vec<Vec<Option<f64>>> = vec![Vec::new(); buckets.len()];
            for (t, f) in data.trajectories.iter().zip(&data.formulas) {
                let at = iter.unwrap_or(t.len() - 1);
                let rep = concepts::appearance_regression_accuracy(
                    t,
                    at,
                    &pc1,
                    &lit.pc2,
                    &appearance_counts(f),
                    &buckets,
                )?;
                if rep.is_degenerate() {
                    eprintln!(
                        "warning: degenerate fit (skipped cohorts {:?}, coincident {:?})",
                        rep.skipped, rep.coincident
                    );
                }
                for (k, b) in rep.buckets.iter().enumerate() {
                    per_bucket[k].push(b.accuracy);
                }
            }
            for (b, xs) in buckets.iter().zip(&per_bucket) {
                rows.push(StatRow::from_samples(
                    dataset,
                    &format!("appearance_{}", b.label()),
                    xs,
                ));
            }
        }
        Stat::Cov | Stat::Pca => unreachable!(),
    }
    concepts::write_stat_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn embed(cnf: &Path, d: usize, t: usize, seed: u64, scale: f32, out: &Path) -> Result<()> {
    let f = read_cnf(cnf)?;
    let w = random_weights(d, scale, seed);
    let init = InitEmbedding::Constant {
        literal: vec![1.0 / (d as f32).sqrt(); d],
        clause: vec![1.0 / (d as f32).sqrt(); d],
    };
    let traj = run_detangled(&f, &w, t, &init)?;
    traj.save(out)?;
    println!(
        "wrote {} iterations (n={}, m={}, d={}) to {}",
        t,
        traj.n,
        traj.m,
        d,
        out.display()
    );
    Ok(())
}

fn exact(cnf: &Path, backbone: bool, budget: u64) -> Result<()> {
    let f = read_cnf(cnf)?;
    let r = dpll_solve_with(&f, &[], budget)?;
    let mut out = io::stdout().lock();
    match &r.witness {
        Some(w) => {
            writeln!(out, "s SATISFIABLE")?;
            writeln!(out, "{}", value_line(w))?;
        }
        None => writeln!(out, "s UNSATISFIABLE")?,
    }
    if backbone && r.is_sat() {
        let bb = backbone_exact_with_budget(&f, budget)?;
        let mut line = String::from("b");
        for (v, b) in &bb {
            let lit = (v + 1) as i64;
            line.push_str(&format!(" {}", if *b { lit } else { -lit }));
        }
        line.push_str(" 0");
        writeln!(out, "c backbone size {}", bb.len())?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            manifest,
            out,
            total_cap,
        } => gen(&manifest, &out, total_cap),
        Command::Solve {
            cnf,
            policy,
            p,
            t,
            seed,
            init,
            greedy,
            scope,
            distribution,
            reference,
            trace,
        } => solve(
            &cnf,
            policy,
            p,
            t,
            seed,
            init,
            greedy,
            scope,
            distribution.as_deref(),
            reference.as_deref(),
            trace.as_deref(),
        ),
        Command::Compare { spec, out } => compare(&spec, out),
        Command::Analyze {
            emb,
            cnf,
            stat,
            assign,
            dataset,
            zones,
            sparse_k,
            iter,
            entity,
            out,
        } => analyze(
            &emb,
            &cnf,
            stat,
            &assign,
            &dataset,
            zones.as_deref(),
            sparse_k,
            iter,
            entity,
            &out,
        ),
        Command::Embed {
            cnf,
            d,
            t,
            seed,
            scale,
            out,
        } => embed(&cnf, d, t, seed, scale, &out),
        Command::Exact {
            cnf,
            backbone,
            budget,
        } => exact(&cnf, backbone, budget),
        Command::Report { dir } => {
            for path in report(&dir)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
