//! Seeded verification experiments behind `mixsel verify`: each compares a
//! solver against a brute-force oracle or an exact identity and emits one
//! row per instance.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fourier::{check_random_extensions, ExtensionKind};
use crate::hardgen::{
    gen_gnp, gen_is_matrix, gen_lottery_hard, gen_planted, is_matrix_exact, lottery_hard_price,
    lottery_hard_revenue, max_independent_set_bruteforce, UndirectedGraph,
};
use crate::matrix::{BoundedMatrix, Domain};
use crate::mixsel::{estimate_sampled_value, solve_mixture, SolveOptions};
use crate::objectives::{obj_clique, obj_lottery, obj_mid, obj_revenue, Lipschitz, Objective};
use crate::oracles::{grid_optimum, signaling_grid_opt};
use crate::rng::SeededRng;
use crate::signaling::{solve_signaling, validate_scheme};
use crate::simplex::SimplexVector;

pub const CSV_HEADER: &str = "instance,method,value,oracle,gap,guarantee,seed,wall_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub method: String,
    pub value: f64,
    pub oracle: Option<f64>,
    pub gap: Option<f64>,
    pub guarantee: Option<f64>,
    pub seed: u64,
    pub wall_ms: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub passed: bool,
    /// Named aggregate statistics, in a fixed order.
    pub summary: Vec<(String, f64)>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.instance,
                r.method,
                r.value,
                opt(r.oracle),
                opt(r.gap),
                opt(r.guarantee),
                r.seed,
                r.wall_ms
            )?;
        }
        Ok(())
    }

    pub fn stat(&self, name: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| *v)
    }
}

/// Wall-clock stopwatch that reads zero unless enabled, so reports stay
/// byte-identical across runs by default.
#[derive(Clone, Copy, Debug, Default)]
pub struct Timing(pub bool);

impl Timing {
    fn time<T>(self, f: impl FnOnce() -> T) -> (T, u64) {
        let start = Instant::now();
        let v = f();
        let ms = if self.0 {
            start.elapsed().as_millis() as u64
        } else {
            0
        };
        (v, ms)
    }
}

#[allow(clippy::too_many_arguments)]
fn row(
    instance: String,
    method: &str,
    value: f64,
    oracle: Option<f64>,
    guarantee: Option<f64>,
    seed: u64,
    wall_ms: u64,
    pass: bool,
) -> ReportRow {
    ReportRow {
        instance,
        method: method.into(),
        value,
        oracle,
        gap: oracle.map(|o| o - value),
        guarantee,
        seed,
        wall_ms,
        pass,
    }
}

pub fn random_matrix(n: usize, m: usize, domain: Domain, rng: &mut SeededRng) -> BoundedMatrix {
    let lo = domain.lower();
    let data = (0..n * m)
        .map(|_| lo + (1.0 - lo) * rng.uniform())
        .collect();
    BoundedMatrix::new(n, m, domain, data).expect("entries in domain")
}

/// Random point of the simplex with every entry bounded away from zero.
pub fn random_simplex(m: usize, rng: &mut SeededRng) -> SimplexVector {
    let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.uniform()).collect();
    let s: f64 = raw.iter().sum();
    SimplexVector::new(raw.iter().map(|v| v / s).collect()).expect("positive weights")
}

/// Objective families used by the mixture and signaling experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Mid,
    Lottery,
    Revenue,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Mid => "mid",
            Family::Lottery => "lottery",
            Family::Revenue => "revenue",
        }
    }

    /// Matrix with `m` columns and a matching objective.
    pub fn instance(
        self,
        max_rows: usize,
        m: usize,
        rng: &mut SeededRng,
    ) -> (BoundedMatrix, Objective) {
        match self {
            Family::Mid => {
                let n = 1 + rng.below(max_rows);
                (
                    random_matrix(n, m, Domain::Signed, rng),
                    obj_mid(n).expect("n >= 1"),
                )
            }
            Family::Lottery => {
                let n = 1 + rng.below(max_rows);
                let w = random_simplex(n, rng);
                (random_matrix(n, m, Domain::Unsigned, rng), obj_lottery(&w))
            }
            Family::Revenue => {
                let block = 2 + rng.below(2);
                let blocks = 1 + rng.below((max_rows / block).max(1));
                let probs = random_simplex(blocks, rng);
                (
                    random_matrix(block * blocks, m, Domain::Unsigned, rng),
                    obj_revenue(block, &probs).expect("block >= 2"),
                )
            }
        }
    }
}

fn lipschitz(g: &Objective) -> f64 {
    match g.lipschitz() {
        Lipschitz::Finite(c) => c,
        Lipschitz::Unbounded => f64::INFINITY,
    }
}

#[derive(Clone, Debug)]
pub struct Thm21Config {
    pub instances: usize,
    pub trials: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl Default for Thm21Config {
    fn default() -> Self {
        Self {
            instances: 20,
            trials: 10_000,
            alpha: 0.2,
            delta: 0.2,
        }
    }
}

/// Sampling bound: the empirical mixture of `s` draws from `x` keeps
/// `g(Ax)` up to `αβ + cδ`, checked with a 3-standard-error band. Passes when
/// at least 95% of the instances of each objective honor the bound.
pub fn verify_thm21(seed: u64, cfg: &Thm21Config, timing: Timing) -> Result<Report> {
    let root = SeededRng::new(seed);
    let mut rows = Vec::new();
    let mut passed = true;
    let mut summary = Vec::new();
    for (fi, fam) in [Family::Mid, Family::Lottery].into_iter().enumerate() {
        let part: Vec<ReportRow> = (0..cfg.instances)
            .into_par_iter()
            .map(|i| -> Result<ReportRow> {
                let mut rng = root.child((fi * 100_000 + i) as u64);
                let m = 1 + rng.below(6);
                let (a, g) = fam.instance(12, m, &mut rng);
                let x = random_simplex(m, &mut rng);
                let exact = g.evaluate(&a.mat_vec(&x)?);
                let guarantee = cfg.alpha * g.beta() + lipschitz(&g) * cfg.delta;
                let (est, ms) = timing.time(|| {
                    estimate_sampled_value(&a, &g, &x, cfg.alpha, cfg.delta, cfg.trials, &mut rng)
                });
                let (mean, se) = est?;
                let ok = mean + 3.0 * se >= exact - guarantee;
                Ok(row(
                    format!("{}-{i}", fam.name()),
                    "sampled_mean",
                    mean,
                    Some(exact),
                    Some(guarantee),
                    seed,
                    ms,
                    ok,
                ))
            })
            .collect::<Result<_>>()?;
        let honored = part.iter().filter(|r| r.pass).count();
        passed &= honored as f64 >= 0.95 * cfg.instances as f64;
        summary.push((format!("{}_honored", fam.name()), honored as f64));
        rows.extend(part);
    }
    Ok(Report {
        experiment: "thm21".into(),
        seed,
        passed,
        summary,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct PtasConfig {
    pub instances: usize,
    pub grid: usize,
    pub alpha: f64,
    pub delta: f64,
    pub max_rows: usize,
    pub max_cols: usize,
}

impl Default for PtasConfig {
    fn default() -> Self {
        Self {
            instances: 50,
            grid: 60,
            alpha: 0.5,
            delta: 0.5,
            max_rows: 8,
            max_cols: 4,
        }
    }
}

/// `solve_mixture` against the exhaustive grid optimum.
pub fn verify_ptas(
    seed: u64,
    cfg: &PtasConfig,
    opts: &SolveOptions,
    timing: Timing,
) -> Result<Report> {
    let root = SeededRng::new(seed);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut passed = true;
    for (fi, fam) in [Family::Mid, Family::Lottery, Family::Revenue]
        .into_iter()
        .enumerate()
    {
        let mut worst = f64::INFINITY;
        for i in 0..cfg.instances {
            let mut rng = root.child((fi * 100_000 + i) as u64);
            let m = 1 + rng.below(cfg.max_cols);
            let (a, g) = fam.instance(cfg.max_rows, m, &mut rng);
            let (sol, ms) = timing.time(|| solve_mixture(&a, &g, cfg.alpha, cfg.delta, opts));
            let sol = sol?;
            let grid = grid_optimum(&a, &g, cfg.grid, opts)?;
            let margin = sol.value - (grid.value - sol.guarantee - 1e-9);
            worst = worst.min(margin);
            let ok = margin >= 0.0;
            passed &= ok;
            rows.push(row(
                format!("{}-{i}", fam.name()),
                "solve_mixture",
                sol.value,
                Some(grid.value),
                Some(sol.guarantee),
                seed,
                ms,
                ok,
            ));
        }
        summary.push((format!("{}_min_margin", fam.name()), worst));
    }
    Ok(Report {
        experiment: "ptas".into(),
        seed,
        passed,
        summary,
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct SignalConfig {
    pub instances: usize,
    pub grid: usize,
    pub alpha: f64,
    pub delta: f64,
}

impl Default for SignalConfig {
    fn default() -> Self {
        Self {
            instances: 30,
            grid: 200,
            alpha: 0.5,
            delta: 0.5,
        }
    }
}

/// Signaling LP: scheme validity, at most `m + 1` signals, and on two-state
/// instances the guarantee against the two-signal grid optimum.
pub fn verify_signal(
    seed: u64,
    cfg: &SignalConfig,
    opts: &SolveOptions,
    timing: Timing,
) -> Result<Report> {
    let root = SeededRng::new(seed);
    let mut rows = Vec::new();
    let mut passed = true;
    let mut worst_residual: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for (fi, fam) in [Family::Mid, Family::Lottery, Family::Revenue]
        .into_iter()
        .enumerate()
    {
        for i in 0..cfg.instances {
            let mut rng = root.child((fi * 100_000 + i) as u64);
            let m = 2 + (i % 2);
            let (a, g) = fam.instance(6, m, &mut rng);
            let prior = random_simplex(m, &mut rng);
            let (res, ms) =
                timing.time(|| solve_signaling(&a, &g, &prior, cfg.alpha, cfg.delta, opts));
            let res = res?;
            let rep = validate_scheme(&res.scheme, &prior);
            let residual = rep
                .decomposition_residual
                .max(rep.prob_sum_error)
                .max(rep.negative_prob);
            worst_residual = worst_residual.max(residual);
            let mut ok = residual <= 1e-8 && res.scheme.len() <= m + 1;
            let oracle = if m == 2 {
                let grid = signaling_grid_opt(&a, &g, &prior, cfg.grid, 2, opts)?;
                let margin = res.value - (grid.value - res.guarantee - 1e-9);
                worst_margin = worst_margin.min(margin);
                ok &= margin >= 0.0;
                Some(grid.value)
            } else {
                None
            };
            passed &= ok;
            rows.push(row(
                format!("{}-m{m}-{i}", fam.name()),
                "solve_signaling",
                res.value,
                oracle,
                Some(res.guarantee),
                seed,
                ms,
                ok,
            ));
        }
    }
    Ok(Report {
        experiment: "signal".into(),
        seed,
        passed,
        summary: vec![
            ("max_residual".into(), worst_residual),
            ("min_margin".into(), worst_margin),
        ],
        rows,
    })
}

/// Paths, cycles, complete and empty graphs for every `n` up to `max_n`, plus
/// `random_per_n` seeded `G(n, 1/2)` samples.
pub fn graph_corpus(
    max_n: usize,
    random_per_n: usize,
    seed: u64,
) -> Vec<(String, UndirectedGraph)> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        out.push((format!("path{n}"), UndirectedGraph::path(n)));
        if n >= 3 {
            out.push((format!("cycle{n}"), UndirectedGraph::cycle(n)));
        }
        out.push((format!("complete{n}"), UndirectedGraph::complete(n)));
        out.push((format!("empty{n}"), UndirectedGraph::empty(n)));
        for r in 0..random_per_n {
            let mut g = gen_gnp(n, seed.wrapping_add((n * 1000 + r) as u64));
            // Self-loops play no role in the reduction.
            g = UndirectedGraph::from_edges(n, &g.edges().collect::<Vec<_>>())
                .expect("valid edges");
            out.push((format!("gnp{n}-{r}"), g));
        }
    }
    out
}

/// Exact independent-set reduction checks in integer arithmetic: the best
/// vote-sum value over subset indicators is `OPT_IS/n`; indicators of
/// independent sets keep their entries at least `1/(4n)` and push the rest
/// below zero; the nonnegative entries of `A x` form an independent set.
pub fn verify_is_reduction(seed: u64, max_n: usize, random_x: usize) -> Result<Report> {
    let mut rows = Vec::new();
    let mut passed = true;
    for (name, g) in graph_corpus(max_n, 3, seed) {
        let n = g.n();
        let e = is_matrix_exact(&g);
        let (opt, _) = max_independent_set_bruteforce(&g)?;
        let mut best = 0usize;
        let mut obs1 = true;
        for mask in 1u32..1 << n {
            let set: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
            // (A x)_i · 4n·|S| with x the normalized indicator of S.
            let t: Vec<i64> = (0..n)
                .map(|i| set.iter().map(|&j| e.get(i, j)).sum())
                .collect();
            best = best.max(t.iter().filter(|&&v| v >= 0).count());
            if g.is_independent(&set) {
                let k = set.len() as i64;
                for (i, &ti) in t.iter().enumerate() {
                    // t_i ≥ 1/(4n) ⇔ ti ≥ k in these units.
                    let ok = if set.contains(&i) { ti >= k } else { ti < 0 };
                    obs1 &= ok;
                }
            }
        }
        let mut rng = SeededRng::new(seed).child(n as u64 * 7919 + name.len() as u64);
        let mut obs2 = true;
        for _ in 0..random_x {
            let w: Vec<i64> = (0..n).map(|_| rng.below(100) as i64).collect();
            if w.iter().all(|&v| v == 0) {
                continue;
            }
            let nonneg: Vec<usize> = (0..n)
                .filter(|&i| (0..n).map(|j| e.get(i, j) * w[j]).sum::<i64>() >= 0)
                .collect();
            obs2 &= g.is_independent(&nonneg);
        }
        let ok = best == opt && obs1 && obs2;
        passed &= ok;
        rows.push(row(
            name,
            "subset_max",
            best as f64 / n as f64,
            Some(opt as f64 / n as f64),
            Some(0.0),
            seed,
            0,
            ok,
        ));
    }
    Ok(Report {
        experiment: "is-reduction".into(),
        seed,
        passed,
        summary: vec![],
        rows,
    })
}

/// Every labelled graph on `n` nodes.
pub fn all_graphs(n: usize) -> Vec<UndirectedGraph> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let e: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect();
            UndirectedGraph::from_edges(n, &e).expect("valid edges")
        })
        .collect()
}

/// Largest revenue over prices in `prices` outside `[1/2, p*]`, for buyer
/// values `t` with uniform weights.
fn off_window_revenue(t: &[f64], prices: &[f64], p_star: f64) -> f64 {
    let mut v = t.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let n = v.len() as f64;
    prices
        .iter()
        .filter(|&&p| p < 0.5 || p > p_star)
        .map(|&p| p * v.partition_point(|&x| x >= p) as f64 / n)
        .fold(0.0, f64::max)
}

/// Lottery hardness: the brute-force optimum over the 12-grid equals
/// `r* = p*(8n² + OPT_IS)/(8n² + n)` on every graph with at most `max_n`
/// nodes, and prices outside `[1/2, p*]` stay below `r*`.
pub fn verify_lottery_hard(
    seed: u64,
    max_n: usize,
    price_points: usize,
    opts: &SolveOptions,
) -> Result<Report> {
    let mut rows = Vec::new();
    let mut passed = true;
    let mut worst_gap: f64 = 0.0;
    let prices: Vec<f64> = (1..=price_points)
        .map(|k| k as f64 / price_points as f64)
        .collect();
    for n in 1..=max_n {
        for (gi, g) in all_graphs(n).into_iter().enumerate() {
            let (opt, _) = max_independent_set_bruteforce(&g)?;
            let (inst, r) = gen_lottery_hard(&g, Some(opt))?;
            let r = r.expect("opt supplied");
            let obj = obj_lottery(&inst.w);
            let grid = grid_optimum(&inst.a, &obj, 12, opts)?;
            let p_star = lottery_hard_price(n);
            let mut off = 0.0f64;
            for x in crate::simplex::enumerate_s_uniform(n, 12, opts.cap)?.vectors() {
                let t = inst.a.mat_vec(&x.to_simplex())?;
                off = off.max(off_window_revenue(&t, &prices, p_star));
            }
            let gap = (grid.value - r).abs();
            worst_gap = worst_gap.max(gap);
            let ok = gap <= 1e-12 && off < r;
            passed &= ok;
            debug_assert_eq!(lottery_hard_revenue(n, opt), r);
            rows.push(row(
                format!("n{n}-g{gi}"),
                "grid_optimum",
                grid.value,
                Some(r),
                Some(r - off),
                seed,
                0,
                ok,
            ));
        }
    }
    Ok(Report {
        experiment: "lottery-hard".into(),
        seed,
        passed,
        summary: vec![("max_gap".into(), worst_gap)],
        rows,
    })
}

#[derive(Clone, Debug)]
pub struct PlantedConfig {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub candidates: usize,
    pub s: usize,
    pub planted_slack: f64,
    pub random_ceiling: f64,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            n: 200,
            k: 30,
            trials: 20,
            candidates: 100_000,
            s: 17,
            planted_slack: 0.1,
            random_ceiling: 0.85,
        }
    }
}

/// Clique objective at `A x` for `x` uniform on the multiset `picks`,
/// with integer column sums; `buf` is scratch of length `n`.
fn clique_value(
    adj: &[Vec<u8>],
    picks: &[usize],
    g: &Objective,
    acc: &mut [u32],
    t: &mut [f64],
) -> f64 {
    acc.iter_mut().for_each(|v| *v = 0);
    for &c in picks {
        for (a, &e) in acc.iter_mut().zip(&adj[c]) {
            *a += e as u32;
        }
    }
    let s = picks.len() as f64;
    for (ti, &a) in t.iter_mut().zip(acc.iter()) {
        *ti = a as f64 / s;
    }
    g.evaluate(t)
}

/// Planted versus random clique gap: the clique indicator scores at least
/// `1 − 1/k − slack` on planted graphs, while random s-uniform candidates on
/// `G(n, 1/2)` stay at or below the ceiling.
pub fn verify_planted(seed: u64, cfg: &PlantedConfig, timing: Timing) -> Result<Report> {
    let g = obj_clique(cfg.n, cfg.k)?;
    let planted_floor = 1.0 - 1.0 / cfg.k as f64 - cfg.planted_slack;
    let root = SeededRng::new(seed);
    let per_trial: Vec<(ReportRow, ReportRow)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<(ReportRow, ReportRow)> {
            let ps = root.child(2 * i as u64).seed();
            let (pg, clique) = gen_planted(cfg.n, cfg.k, ps)?;
            let adj = columns(&pg);
            let mut acc = vec![0u32; cfg.n];
            let mut t = vec![0.0; cfg.n];
            let pv = clique_value(&adj, &clique, &g, &mut acc, &mut t);
            let prow = row(
                format!("trial{i}"),
                "planted_indicator",
                pv,
                Some(planted_floor),
                None,
                ps,
                0,
                pv >= planted_floor,
            );
            let rs = root.child(2 * i as u64 + 1).seed();
            let rg = gen_gnp(cfg.n, rs);
            let adj = columns(&rg);
            let mut rng = SeededRng::new(rs).child(1);
            let (best, ms) = timing.time(|| {
                let mut picks = vec![0usize; cfg.s];
                let mut best = f64::NEG_INFINITY;
                for _ in 0..cfg.candidates {
                    for p in &mut picks {
                        *p = rng.below(cfg.n);
                    }
                    best = best.max(clique_value(&adj, &picks, &g, &mut acc, &mut t));
                }
                best
            });
            let rrow = row(
                format!("trial{i}"),
                "random_best",
                best,
                Some(cfg.random_ceiling),
                None,
                rs,
                ms,
                best <= cfg.random_ceiling,
            );
            Ok((prow, rrow))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(2 * cfg.trials);
    let (mut pmin, mut rmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ppass, mut rpass) = (true, true);
    for (p, r) in per_trial {
        pmin = pmin.min(p.value);
        rmax = rmax.max(r.value);
        ppass &= p.pass;
        rpass &= r.pass;
        rows.push(p);
        rows.push(r);
    }
    Ok(Report {
        experiment: "planted".into(),
        seed,
        passed: ppass && rpass,
        summary: vec![
            ("planted_min".into(), pmin),
            ("planted_floor".into(), planted_floor),
            ("planted_pass".into(), ppass as u8 as f64),
            ("random_max".into(), rmax),
            ("random_ceiling".into(), cfg.random_ceiling),
            ("random_pass".into(), rpass as u8 as f64),
        ],
        rows,
    })
}

/// Columns of the adjacency matrix (equal to rows, by symmetry) as bytes.
fn columns(g: &UndirectedGraph) -> Vec<Vec<u8>> {
    let a = g.adjacency_matrix();
    (0..g.n())
        .map(|j| a.column(j).iter().map(|&v| v as u8).collect())
        .collect()
}

/// Extension validity, algebraic stability, round-trip and Parseval for the
/// three extensions at `trials` random points per arity.
pub fn verify_fourier(seed: u64, trials: usize, arities: &[usize]) -> Result<Report> {
    let mut rows = Vec::new();
    let mut passed = true;
    for (ki, kind) in [
        ExtensionKind::Lottery,
        ExtensionKind::VoteSum,
        ExtensionKind::Max2,
    ]
    .into_iter()
    .enumerate()
    {
        for &n in arities {
            let s = SeededRng::new(seed).child((ki * 100 + n) as u64).seed();
            let rep = check_random_extensions(kind, n, trials, s)?;
            let ok = rep.passed();
            passed &= ok;
            let err = rep.max_round_trip_error.max(rep.max_parseval_error);
            rows.push(row(
                format!("{}-n{n}", kind.name()),
                "extension_check",
                rep.min_slack.min(rep.min_coefficient),
                Some(0.0),
                Some(err),
                s,
                0,
                ok,
            ));
        }
    }
    Ok(Report {
        experiment: "fourier".into(),
        seed,
        passed,
        summary: vec![],
        rows,
    })
}

/// Planted-clique matrix for `gen planted`: adjacency with self-loops.
pub fn planted_matrix(
    n: usize,
    k: usize,
    seed: u64,
) -> Result<(BoundedMatrix, Vec<usize>, UndirectedGraph)> {
    let (g, c) = gen_planted(n, k, seed)?;
    Ok((g.adjacency_matrix(), c, g))
}

/// Signed independent-set matrix for a random graph, for `gen is-matrix`.
pub fn random_is_matrix(n: usize, seed: u64) -> Result<(BoundedMatrix, UndirectedGraph)> {
    let g = gen_gnp(n, seed);
    Ok((gen_is_matrix(&g)?, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_reports_pass() {
        let opts = SolveOptions::default();
        let t = Timing(false);
        let cfg = Thm21Config {
            instances: 4,
            trials: 500,
            ..Default::default()
        };
        assert!(verify_thm21(1, &cfg, t).unwrap().passed);
        let cfg = PtasConfig {
            instances: 3,
            grid: 12,
            ..Default::default()
        };
        assert!(verify_ptas(1, &cfg, &opts, t).unwrap().passed);
        let cfg = SignalConfig {
            instances: 2,
            grid: 40,
            ..Default::default()
        };
        assert!(verify_signal(1, &cfg, &opts, t).unwrap().passed);
        assert!(verify_is_reduction(1, 5, 50).unwrap().passed);
        assert!(verify_lottery_hard(1, 2, 50, &opts).unwrap().passed);
        assert!(verify_fourier(1, 20, &[3]).unwrap().passed);
    }

    #[test]
    fn all_graph_counts() {
        assert_eq!(all_graphs(3).len(), 8);
        assert_eq!(all_graphs(4).len(), 64);
    }

    #[test]
    fn csv_layout() {
        let r = verify_is_reduction(2, 2, 5).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert!(lines.all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn planted_small_is_deterministic() {
        let cfg = PlantedConfig {
            n: 30,
            k: 8,
            trials: 2,
            candidates: 200,
            s: 5,
            ..Default::default()
        };
        let a = verify_planted(3, &cfg, Timing(false)).unwrap();
        assert_eq!(a, verify_planted(3, &cfg, Timing(false)).unwrap());
    }
}
