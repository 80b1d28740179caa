//! Batch comparison of local-search policies: mean unsat curves, medians of
//! iterations-to-solve and their CSV/SVG renderings.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::cnf::{parse_dimacs, CnfFormula};
use crate::error::CompareError;
use crate::gen::{build_manifest, random_3sat, DatasetManifest};
use crate::search::{
    run_local_search, FlipDistribution, GreedyRule, InitMode, Policy, SolverConfig, SupportOneScope,
};

/// Where the instances of a comparison come from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// `count` uniform random 3-SAT formulas, instance `i` seeded `seed + i`.
    Random {
        n: usize,
        c: f64,
        count: usize,
        seed: u64,
    },
    /// A named dataset, optionally capped to `cap` instances.
    Manifest {
        name: String,
        cap: Option<usize>,
    },
    Files(Vec<PathBuf>),
}

/// How runs that already solved enter the mean curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurveMode {
    /// A solved run counts as 0 unsat clauses from its solve iteration on.
    #[default]
    Clamp,
    /// A solved run leaves the average at its solve iteration.
    Drop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareSpec {
    pub name: String,
    pub instances: InstanceSource,
    pub policies: Vec<(Policy, SolverConfig)>,
    pub repetitions: usize,
    pub mode: CurveMode,
    pub out_dir: Option<PathBuf>,
}

fn base_config() -> SolverConfig {
    SolverConfig {
        init: InitMode::Majority,
        ..Default::default()
    }
}

fn apply_key(cfg: &mut SolverConfig, key: &str, value: &str, base: &Path) -> Result<bool, String> {
    let num = |what: &str| format!("bad {what} `{value}`");
    match key {
        "T" => cfg.max_iters = value.parse().map_err(|_| num("T"))?,
        "p" => cfg.noise = value.parse().map_err(|_| num("p"))?,
        "seed" => cfg.seed = value.parse().map_err(|_| num("seed"))?,
        "warmup" => cfg.warmup = value.parse().map_err(|_| num("warmup"))?,
        "init" => {
            cfg.init = match value {
                "maj" => InitMode::Majority,
                "random" => InitMode::Random,
                _ => return Err(num("init")),
            }
        }
        "greedy" => {
            cfg.greedy = match value {
                "least_support" => GreedyRule::LeastSupport,
                "break_count" => GreedyRule::BreakCount,
                _ => return Err(num("greedy")),
            }
        }
        "scope" => {
            cfg.support_one_scope = match value {
                "unsat" => SupportOneScope::UnsatClauses,
                "anywhere" => SupportOneScope::Anywhere,
                _ => return Err(num("scope")),
            }
        }
        "distribution" => {
            let text = fs::read_to_string(base.join(value)).map_err(|e| format!("{value}: {e}"))?;
            cfg.distribution = Some(FlipDistribution::parse(&text).map_err(|e| e.to_string())?);
        }
        _ => return Ok(false),
    }
    Ok(true)
}

fn parse_source(value: &str, base: &Path) -> Result<InstanceSource, String> {
    let mut parts = value.split_whitespace();
    let kind = parts.next().ok_or("empty instance source")?;
    let rest: Vec<&str> = parts.collect();
    let kv = |key: &str| -> Option<&str> {
        rest.iter()
            .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
    };
    let need = |key: &str| kv(key).ok_or_else(|| format!("missing `{key}=`"));
    match kind {
        "random" => Ok(InstanceSource::Random {
            n: need("n")?.parse().map_err(|_| "bad n")?,
            c: need("c")?.parse().map_err(|_| "bad c")?,
            count: need("count")?.parse().map_err(|_| "bad count")?,
            seed: kv("seed").unwrap_or("0").parse().map_err(|_| "bad seed")?,
        }),
        "manifest" => Ok(InstanceSource::Manifest {
            name: rest.first().ok_or("missing dataset name")?.to_string(),
            cap: kv("cap")
                .map(|c| c.parse().map_err(|_| "bad cap"))
                .transpose()?,
        }),
        "files" => Ok(InstanceSource::Files(
            rest.iter().map(|p| base.join(p)).collect(),
        )),
        other => Err(format!("unknown instance source `{other}`")),
    }
}

impl CompareSpec {
    /// Parses `key = value` lines. Relative paths resolve against `base`.
    ///
    /// ```text
    /// name = fig10
    /// instances = random n=1500 c=4.1 count=40 seed=1000
    /// policies = walksat walksatpp support01
    /// T = 1000000
    /// p = 0.1
    /// init = maj
    /// seed = 77
    /// walksatpp.p = 0.5
    /// ```
    ///
    /// Other instance sources are `manifest DENSE cap=40` and `files a.cnf b.cnf`.
    /// Keys prefixed by a policy name override the shared setting for that policy.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CompareError> {
        let mut name = "compare".to_string();
        let mut instances = None;
        let mut policies: Vec<Policy> = Vec::new();
        let mut repetitions = 1;
        let mut mode = CurveMode::Clamp;
        let mut out_dir = None;
        let mut shared = base_config();
        let mut overrides: Vec<(Policy, String, String, usize)> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| CompareError::Spec {
                line: i + 1,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err("expected `key = value`".into()))?;
            match key {
                "name" => name = value.to_string(),
                "instances" => instances = Some(parse_source(value, base).map_err(err)?),
                "policies" => {
                    policies = value
                        .split_whitespace()
                        .map(|p| p.parse())
                        .collect::<Result<_, _>>()
                        .map_err(err)?
                }
                "repetitions" => {
                    repetitions = value.parse().map_err(|_| err("bad repetitions".into()))?
                }
                "mean" => {
                    mode = match value {
                        "clamp" => CurveMode::Clamp,
                        "drop" => CurveMode::Drop,
                        _ => return Err(err(format!("unknown mean mode `{value}`"))),
                    }
                }
                "out" => out_dir = Some(base.join(value)),
                _ => match key.split_once('.') {
                    Some((p, k)) => {
                        let policy: Policy = p.parse().map_err(err)?;
                        overrides.push((policy, k.to_string(), value.to_string(), i + 1));
                    }
                    None => {
                        if !apply_key(&mut shared, key, value, base).map_err(err)? {
                            return Err(err(format!("unknown key `{key}`")));
                        }
                    }
                },
            }
        }

        let instances = instances.ok_or(CompareError::Empty("instance source"))?;
        let mut configured = Vec::new();
        for &policy in &policies {
            let mut cfg = shared.clone();
            if policy == Policy::Textbook && cfg.distribution.is_none() {
                cfg.distribution = Some(FlipDistribution::default());
            }
            for (p, k, v, line) in &overrides {
                if *p == policy
                    && !apply_key(&mut cfg, k, v, base).map_err(|reason| CompareError::Spec {
                        line: *line,
                        reason,
                    })?
                {
                    return Err(CompareError::Spec {
                        line: *line,
                        reason: format!("unknown key `{k}`"),
                    });
                }
            }
            configured.push((policy, cfg));
        }
        let spec = CompareSpec {
            name,
            instances,
            policies: configured,
            repetitions,
            mode,
            out_dir,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CompareError> {
        if self.policies.is_empty() {
            return Err(CompareError::Empty("policy"));
        }
        if self.repetitions == 0 {
            return Err(CompareError::Empty("repetition"));
        }
        let no_instances = match &self.instances {
            InstanceSource::Random { count, .. } => *count == 0,
            InstanceSource::Files(paths) => paths.is_empty(),
            InstanceSource::Manifest { cap, .. } => *cap == Some(0),
        };
        if no_instances {
            return Err(CompareError::Empty("instance"));
        }
        for (policy, cfg) in &self.policies {
            cfg.validate(*policy)?;
        }
        Ok(())
    }

    /// Materializes the instances as (name, formula) pairs.
    pub fn load_instances(&self) -> Result<Vec<(String, CnfFormula)>, CompareError> {
        match &self.instances {
            InstanceSource::Random { n, c, count, seed } => {
                let m = (c * *n as f64).round() as usize;
                (0..*count)
                    .into_par_iter()
                    .map(|i| {
                        let f = random_3sat(*n, m, seed + i as u64)?;
                        Ok((format!("random_n{n}_c{c}_s{}", seed + i as u64), f))
                    })
                    .collect()
            }
            InstanceSource::Manifest { name, cap } => {
                let mut manifest: DatasetManifest = build_manifest(name)?;
                if let Some(cap) = cap {
                    manifest = manifest.with_total_cap(*cap);
                }
                manifest
                    .tasks()
                    .into_par_iter()
                    .map(|(e, i)| {
                        let inst = manifest.generate(e, i)?;
                        Ok((inst.name, inst.formula))
                    })
                    .collect()
            }
            InstanceSource::Files(paths) => paths
                .iter()
                .map(|p| {
                    let bytes = fs::read(p)?;
                    let f = parse_dimacs(&bytes).map_err(|source| CompareError::Instance {
                        path: p.display().to_string(),
                        source,
                    })?;
                    let name = p
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    Ok((name, f))
                })
                .collect(),
        }
    }
}

/// Results of one policy over every (instance, repetition) run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyOutcome {
    pub policy: Policy,
    pub config: SolverConfig,
    /// Iteration number of curve entry 0.
    pub first_iter: usize,
    pub mean_unsat: Vec<f64>,
    /// Per run, in (instance, repetition) order.
    pub solved_at: Vec<Option<usize>>,
    pub seeds: Vec<u64>,
}

impl PolicyOutcome {
    pub fn runs(&self) -> usize {
        self.solved_at.len()
    }

    pub fn solved(&self) -> usize {
        self.solved_at.iter().flatten().count()
    }

    pub fn unsolved_fraction(&self) -> f64 {
        1.0 - self.solved() as f64 / self.runs() as f64
    }

    /// Median iterations-to-solve, unsolved runs counting as infinite.
    /// `None` when the median itself is infinite.
    pub fn median_iters(&self) -> Option<f64> {
        median_with_infinity(&self.solved_at)
    }
}

/// Median of values where `None` stands for +infinity.
pub fn median_with_infinity(xs: &[Option<usize>]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v: Vec<Option<usize>> = xs.to_vec();
    v.sort_by_key(|x| x.unwrap_or(usize::MAX));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2].map(|x| x as f64)
    } else {
        Some((v[k / 2 - 1]? as f64 + v[k / 2]? as f64) / 2.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub instances: Vec<String>,
    pub repetitions: usize,
    pub outcomes: Vec<PolicyOutcome>,
}

struct CurveSums {
    sum: Vec<u64>,
    active: Vec<u32>,
}

/// Runs every policy on every (instance, repetition) pair.
///
/// Run `k = instance * repetitions + rep` of every policy uses solver seed
/// `config.seed + k`. Curves are sums of integers, so parallel and serial
/// executions give identical reports.
pub fn compare_solvers(spec: &CompareSpec) -> Result<Comparison, CompareError> {
    spec.validate()?;
    let instances = spec.load_instances()?;
    if instances.is_empty() {
        return Err(CompareError::Empty("instance"));
    }
    let reps = spec.repetitions;
    let runs = instances.len() * reps;

    let sums: Vec<Mutex<CurveSums>> = spec
        .policies
        .iter()
        .map(|(_, cfg)| {
            Mutex::new(CurveSums {
                sum: vec![0; cfg.max_iters],
                active: vec![0; cfg.max_iters],
            })
        })
        .collect();

    let tasks: Vec<(usize, usize)> = (0..spec.policies.len())
        .flat_map(|p| (0..runs).map(move |k| (p, k)))
        .collect();
    let results: Vec<(usize, Option<usize>, usize)> = tasks
        .into_par_iter()
        .map(|(p, k)| {
            let (policy, base) = &spec.policies[p];
            let cfg = SolverConfig {
                seed: base.seed + k as u64,
                ..base.clone()
            };
            let (_, trace) = run_local_search(&instances[k / reps].1, &cfg, *policy)?;
            let solve_row = trace.solved_at.map(|it| it - trace.first_iter);
            let mut acc = sums[p].lock().unwrap();
            let len = acc.sum.len();
            for (i, row) in trace.rows.iter().take(len).enumerate() {
                acc.sum[i] += row.unsat() as u64;
                if solve_row.is_none_or(|s| i < s) {
                    acc.active[i] += 1;
                }
            }
            Ok((p, trace.solved_at, trace.first_iter))
        })
        .collect::<Result<_, CompareError>>()?;

    let mut outcomes = Vec::new();
    for (p, (policy, cfg)) in spec.policies.iter().enumerate() {
        let acc = sums[p].lock().unwrap();
        let mean_unsat = acc
            .sum
            .iter()
            .zip(&acc.active)
            .map(|(&s, &a)| match spec.mode {
                CurveMode::Clamp => s as f64 / runs as f64,
                CurveMode::Drop if a == 0 => 0.0,
                CurveMode::Drop => s as f64 / a as f64,
            })
            .collect();
        let mine: Vec<&(usize, Option<usize>, usize)> =
            results.iter().filter(|r| r.0 == p).collect();
        outcomes.push(PolicyOutcome {
            policy: *policy,
            config: cfg.clone(),
            first_iter: mine.first().map_or(0, |r| r.2),
            mean_unsat,
            solved_at: mine.iter().map(|r| r.1).collect(),
            seeds: (0..runs).map(|k| cfg.seed + k as u64).collect(),
        });
    }
    Ok(Comparison {
        name: spec.name.clone(),
        instances: instances.into_iter().map(|i| i.0).collect(),
        repetitions: reps,
        outcomes,
    })
}

pub const CURVE_HEADER: &str = "iter,policy,mean_unsat";
pub const RUNS_HEADER: &str = "instance,repetition,policy,seed,solved_at";
pub const SUMMARY_HEADER: &str =
    "policy,runs,solved,unsolved_fraction,median_iters,speedup_vs_baseline";

impl Comparison {
    pub fn outcome(&self, policy: Policy) -> Option<&PolicyOutcome> {
        self.outcomes.iter().find(|o| o.policy == policy)
    }

    /// `median(baseline) / median(other)`. Infinite when only `other` has a
    /// finite median, `None` when neither does or a policy is missing.
    pub fn speedup(&self, baseline: Policy, other: Policy) -> Option<f64> {
        let b = self.outcome(baseline)?.median_iters();
        let o = self.outcome(other)?.median_iters();
        match (b, o) {
            (Some(b), Some(o)) => Some(b / o),
            (None, Some(_)) => Some(f64::INFINITY),
            _ => None,
        }
    }

    pub fn write_curves_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CURVE_HEADER}")?;
        for o in &self.outcomes {
            for (i, v) in o.mean_unsat.iter().enumerate() {
                writeln!(out, "{},{},{}", o.first_iter + i, o.policy, v)?;
            }
        }
        Ok(())
    }

    pub fn write_runs_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{RUNS_HEADER}")?;
        for o in &self.outcomes {
            for (k, (solved, seed)) in o.solved_at.iter().zip(&o.seeds).enumerate() {
                let solved = solved.map(|s| s.to_string()).unwrap_or_default();
                let inst = &self.instances[k / self.repetitions];
                let rep = k % self.repetitions;
                writeln!(out, "{inst},{rep},{},{seed},{solved}", o.policy)?;
            }
        }
        Ok(())
    }

    /// One line per policy; speedups are relative to the first policy.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        let base = self.outcomes[0].policy;
        let show = |x: Option<f64>| {
            x.map(|v| v.to_string())
                .unwrap_or_else(|| "unsolved".into())
        };
        for o in &self.outcomes {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                o.policy,
                o.runs(),
                o.solved(),
                o.unsolved_fraction(),
                show(o.median_iters()),
                show(self.speedup(base, o.policy)),
            )?;
        }
        Ok(())
    }

    /// Writes `<name>.curves.csv`, `<name>.runs.csv` and `<name>.summary.csv`.
    pub fn save(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        type Writer = fn(&Comparison, &mut Vec<u8>) -> io::Result<()>;
        let files: [(&str, Writer); 3] = [
            ("curves", |c, b| c.write_curves_csv(b)),
            ("runs", |c, b| c.write_runs_csv(b)),
            ("summary", |c, b| c.write_summary_csv(b)),
        ];
        for (kind, write) in files {
            let mut buf = Vec::new();
            write(self, &mut buf)?;
            let path = dir.join(format!("{}.{kind}.csv", self.name));
            fs::write(&path, buf)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// A parsed curve CSV: per policy (in file order) its `(iter, mean_unsat)` points.
pub type Curves = Vec<(String, Vec<(usize, f64)>)>;

pub fn parse_curves_csv(text: &str, path: &str) -> Result<Curves, CompareError> {
    let bad = |line: usize| CompareError::BadCsv {
        path: path.to_string(),
        line,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CURVE_HEADER => {}
        _ => return Err(bad(1)),
    }
    let mut curves: Curves = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(iter), Some(policy), Some(value), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(i + 1));
        };
        let iter: usize = iter.parse().map_err(|_| bad(i + 1))?;
        let value: f64 = value.parse().map_err(|_| bad(i + 1))?;
        match curves.last_mut() {
            Some((p, pts)) if p == policy => pts.push((iter, value)),
            _ => curves.push((policy.to_string(), vec![(iter, value)])),
        }
    }
    Ok(curves)
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
const MAX_POINTS: usize = 2000;

/// Line plot of the curves; the x axis is logarithmic when iterations exceed 1000.
pub fn render_svg(curves: &Curves, title: &str) -> String {
    let (w, h, left, right, top, bottom) = (800.0, 500.0, 70.0, 160.0, 40.0, 50.0);
    let max_iter = curves
        .iter()
        .flat_map(|c| c.1.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1);
    let max_y = curves
        .iter()
        .flat_map(|c| c.1.iter().map(|p| p.1))
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let log_x = max_iter > 1000;
    let fx = |it: usize| -> f64 {
        let t = if log_x {
            ((it + 1) as f64).log10() / ((max_iter + 1) as f64).log10()
        } else {
            it as f64 / max_iter as f64
        };
        left + t * (w - left - right)
    };
    let fy = |v: f64| top + (1.0 - v / max_y) * (h - top - bottom);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (left, w - right, top, h - bottom);
    let _ = writeln!(
        s,
        r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" stroke="black" fill="none"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{x0}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">0</text>"#,
        y1 + 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{x1}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{max_iter}</text>"#,
        y1 + 18.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">iteration{}</text>"#,
        (x0 + x1) / 2.0,
        y1 + 38.0,
        if log_x { " (log scale)" } else { "" }
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{max_y:.1}</text>"#,
        x0 - 6.0,
        y0 + 4.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">0</text>"#,
        x0 - 6.0,
        y1
    );

    for (k, (policy, pts)) in curves.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let step = pts.len().div_ceil(MAX_POINTS).max(1);
        let mut d = String::new();
        for (j, &(it, v)) in pts.iter().enumerate() {
            if j % step != 0 && j + 1 != pts.len() {
                continue;
            }
            let _ = write!(
                d,
                "{}{:.2},{:.2} ",
                if d.is_empty() { "M" } else { "L" },
                fx(it),
                fy(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#,
            d.trim_end()
        );
        let ly = top + 20.0 + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            x1 + 10.0,
            x1 + 30.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            x1 + 36.0,
            ly + 4.0,
            escape(policy)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders one SVG next to every `*.curves.csv` in `dir`. Returns the SVG paths.
pub fn report(dir: &Path) -> Result<Vec<PathBuf>, CompareError> {
    let mut inputs: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".curves.csv"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(CompareError::NoResults(dir.display().to_string()));
    }
    let mut out = Vec::new();
    for path in inputs {
        let text = fs::read_to_string(&path)?;
        let curves = parse_curves_csv(&text, &path.display().to_string())?;
        let file = path.file_name().unwrap().to_string_lossy();
        let stem = file.trim_end_matches(".curves.csv");
        let svg = dir.join(format!("{stem}.svg"));
        fs::write(&svg, render_svg(&curves, stem))?;
        out.push(svg);
    }
    Ok(out)
}

/// Thread pool sized by `SATLAB_THREADS` when set, else by rayon's default.
pub fn env_thread_pool() -> Result<rayon::ThreadPool, rayon::ThreadPoolBuildError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("SATLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("one.cnf"), "p cnf 3 1\n1 2 3 0\n").unwrap();
        dir
    }

    #[test]
    fn trivial_instance_reaches_zero_at_iteration_one() {
        let dir = trivial_dir();
        let spec = CompareSpec::parse(
            "instances = files one.cnf\npolicies = walksat walksatpp support01 textbook\n\
             T = 5\ninit = random\nseed = 3\n",
            dir.path(),
        )
        .unwrap();
        let mut spec = spec;
        for (_, cfg) in &mut spec.policies {
            cfg.init = InitMode::Given(vec![false; 3].into());
        }
        let cmp = compare_solvers(&spec).unwrap();
        for o in &cmp.outcomes {
            let at_one = 1 - o.first_iter;
            assert_eq!(o.mean_unsat[at_one], 0.0, "{}", o.policy);
            assert!(o.mean_unsat[at_one..].iter().all(|&v| v == 0.0));
            assert_eq!(o.mean_unsat.len(), 5);
        }
        assert_eq!(cmp.outcome(Policy::WalkSat).unwrap().mean_unsat[0], 1.0);
    }

    #[test]
    fn medians_with_unsolved() {
        assert_eq!(median_with_infinity(&[Some(3), None, Some(1)]), Some(3.0));
        assert_eq!(median_with_infinity(&[Some(3), Some(1)]), Some(2.0));
        assert_eq!(median_with_infinity(&[Some(3), None]), None);
        assert_eq!(median_with_infinity(&[None]), None);
    }

    #[test]
    fn spec_parsing() {
        let base = Path::new("/tmp");
        let spec = CompareSpec::parse(
            "name = x\ninstances = random n=50 c=4.1 count=3 seed=9\n\
             policies = walksat support01\np = 0.2\nsupport01.p = 0.3\nrepetitions = 2\nmean = drop\n",
            base,
        )
        .unwrap();
        assert_eq!(spec.policies[0].1.noise, 0.2);
        assert_eq!(spec.policies[1].1.noise, 0.3);
        assert_eq!(spec.policies[0].1.init, InitMode::Majority);
        assert_eq!(spec.mode, CurveMode::Drop);
        assert_eq!(
            spec.instances,
            InstanceSource::Random {
                n: 50,
                c: 4.1,
                count: 3,
                seed: 9
            }
        );
        assert!(matches!(
            CompareSpec::parse("instances = random n=5 c=4 count=1\n", base),
            Err(CompareError::Empty("policy"))
        ));
        assert!(matches!(
            CompareSpec::parse("policies = walksat\n", base),
            Err(CompareError::Empty(_))
        ));
        assert!(matches!(
            CompareSpec::parse(
                "instances = random n=5 c=4 count=1\npolicies = walksat\nbogus = 1\n",
                base
            ),
            Err(CompareError::Spec { line: 3, .. })
        ));
    }

    #[test]
    fn unsolvable_budget_reports_unsolved() {
        let spec = CompareSpec::parse(
            "instances = random n=200 c=4.2 count=2 seed=1\npolicies = walksat support01\nT = 3\n",
            Path::new("."),
        )
        .unwrap();
        let cmp = compare_solvers(&spec).unwrap();
        for o in &cmp.outcomes {
            assert_eq!(o.unsolved_fraction(), 1.0);
            assert_eq!(o.median_iters(), None);
        }
        assert_eq!(cmp.speedup(Policy::WalkSat, Policy::Support01), None);
        let mut buf = Vec::new();
        cmp.write_summary_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .contains("walksat,2,0,1,unsolved,unsolved"));
    }

    #[test]
    fn curve_csv_round_trip_and_report() {
        let spec = CompareSpec::parse(
            "name = rt\ninstances = random n=40 c=4.0 count=3 seed=5\n\
             policies = walksat walksatpp\nT = 50\nrepetitions = 2\n",
            Path::new("."),
        )
        .unwrap();
        let cmp = compare_solvers(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        cmp.save(dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("rt.curves.csv")).unwrap();
        assert_eq!(text.lines().count(), 1 + 50 * 2);
        let curves = parse_curves_csv(&text, "rt").unwrap();
        for (o, (name, pts)) in cmp.outcomes.iter().zip(&curves) {
            assert_eq!(name, o.policy.name());
            let parsed: Vec<f64> = pts.iter().map(|p| p.1).collect();
            assert_eq!(parsed, o.mean_unsat);
        }
        let svgs = report(dir.path()).unwrap();
        assert_eq!(svgs, vec![dir.path().join("rt.svg")]);
        assert!(fs::read_to_string(&svgs[0]).unwrap().starts_with("<svg"));

        let empty = tempfile::tempdir().unwrap();
        assert!(matches!(
            report(empty.path()),
            Err(CompareError::NoResults(_))
        ));
    }

    #[test]
    fn drop_mode_excludes_solved_runs() {
        let dir = trivial_dir();
        let mut spec = CompareSpec::parse(
            "instances = files one.cnf\npolicies = walksat\nT = 4\nmean = drop\n",
            dir.path(),
        )
        .unwrap();
        spec.policies[0].1.init = InitMode::Given(vec![false; 3].into());
        let cmp = compare_solvers(&spec).unwrap();
        assert_eq!(cmp.outcomes[0].mean_unsat, vec![1.0, 0.0, 0.0, 0.0]);
    }
}
