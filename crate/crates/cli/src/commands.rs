//! The four subcommands, returning their records instead of printing them.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use expmc::graph::{write_matrix_market_to, DEFAULT_POWER_ITERS};
use expmc::{
    entry_estimate, exact_action, generate, load_matrix_market, loglog_slope, resolve_beta, split, splitting_product,
    stats, tc_estimate, vector_estimate, BetaRule, GenSpec, GraphStats, Norm, PathParams, SplitMatrix, Splitting,
    VectorEstimate,
};

use crate::config::{BenchConfig, ConvergenceConfig, GraphSource, RunConfig, Sweep, Target};
use crate::record::BenchRecord;

/// Relative tolerance for the jump-count check in bench mode.
pub const JUMP_PROXY_TOLERANCE: f64 = 0.05;

pub struct Graph {
    pub label: String,
    pub matrix: SplitMatrix,
    pub stats: GraphStats,
}

pub fn load_graph(source: &GraphSource, beta: BetaRule) -> anyhow::Result<Graph> {
    let a = match source {
        GraphSource::File(path) => load_matrix_market(path)?,
        GraphSource::Generated(spec) => generate(spec)?,
    };
    let matrix = split(&a)?;
    let iters = if beta == BetaRule::InverseLambdaMax { DEFAULT_POWER_ITERS } else { 0 };
    let stats = stats(&matrix, iters);
    Ok(Graph { label: source.to_string(), matrix, stats })
}

/// A fitted log-log curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub splitting: Splitting,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: Option<f64>,
}

#[derive(Debug, Default)]
pub struct Report {
    pub records: Vec<BenchRecord>,
    pub series: Vec<Series>,
    /// Human-readable summary lines.
    pub notes: Vec<String>,
    /// Full estimate for the `vector` target.
    pub vector: Option<VectorEstimate>,
}

/// Writes a Matrix Market file for `spec` to `out`; returns its statistics.
pub fn cmd_generate<W: Write>(spec: &GenSpec, out: &mut W) -> anyhow::Result<GraphStats> {
    let a = generate(spec)?;
    write_matrix_market_to(&a, out)?;
    Ok(stats(&split(&a)?, 0))
}

pub fn cmd_estimate(cfg: &RunConfig) -> anyhow::Result<Report> {
    cfg.validate()?;
    let graph = load_graph(&cfg.graph, cfg.beta)?;
    let p = params(cfg, &graph, cfg.seed)?;
    let run = with_workers(cfg.workers, || run_target(&graph.matrix, cfg.target, &p))??;
    let mut record = make_record(&graph, &p, cfg, &run);
    if cfg.oracle {
        let ones = vec![1.0; graph.matrix.n()];
        let truth = exact_action(&graph.matrix, &ones, p.beta)?;
        let approx = splitting_product(&graph.matrix, &ones, &p)?;
        record.eps_split = Some(target_error(cfg.target, &truth, &approx));
        record.eps_mc = Some(run.error_against(cfg.target, &truth));
    }
    let mut report = Report::default();
    report.notes.push(format!(
        "{} = {} ± {} (M = {}, N = {}, jumps/path = {:.4}, {:.3} s)",
        cfg.target,
        record.value,
        record.std_error,
        record.samples,
        record.steps,
        record.jumps_per_path,
        record.wall_time
    ));
    if let Some(e) = record.eps_split {
        report.notes.push(format!("splitting error {e:.3e}, total error {:.3e}", record.eps_mc.unwrap_or(f64::NAN)));
    }
    report.records.push(record);
    report.vector = run.vector;
    Ok(report)
}

pub fn cmd_convergence(cfg: &ConvergenceConfig) -> anyhow::Result<Report> {
    cfg.validate()?;
    let graph = load_graph(&cfg.run.graph, cfg.run.beta)?;
    let m = &graph.matrix;
    let ones = vec![1.0; m.n()];
    let beta = resolve_beta(cfg.run.beta, &graph.stats)?;
    let truth = exact_action(m, &ones, beta)?;
    let mut report = Report::default();

    for &splitting in &cfg.splittings {
        let run_cfg = RunConfig { splitting, ..cfg.run.clone() };
        let points: Vec<(PathParams, u64)> = match &cfg.sweep {
            Sweep::Dt(dts) => dts
                .iter()
                .map(|&dt| Ok((PathParams::from_dt(beta, dt, cfg.run.samples, splitting, cfg.run.seed)?, 0)))
                .collect::<expmc::Result<_>>()?,
            Sweep::Samples(ms) => ms
                .iter()
                .map(|&m_| {
                    let p = cfg.run.discretization.params(beta, m_, splitting, cfg.run.seed)?;
                    Ok((p, m_))
                })
                .collect::<expmc::Result<_>>()?,
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut cached: Option<(usize, Vec<f64>)> = None;
        for (k, (p, m_)) in points.into_iter().enumerate() {
            // Sample sweeps share one discretization.
            let approx = match cached.take() {
                Some((steps, a)) if steps == p.n_steps => a,
                _ => splitting_product(m, &ones, &p)?,
            };
            cached = Some((p.n_steps, approx.clone()));
            let eps_split = target_error(cfg.run.target, &truth, &approx);
            if cfg.splitting_only {
                let mut r = make_record(&graph, &p, &run_cfg, &Outcome::empty());
                r.value = target_value(cfg.run.target, &approx, m.n());
                r.samples = 0;
                r.eps_split = Some(eps_split);
                report.records.push(r);
                xs.push(p.dt());
                ys.push(eps_split);
                continue;
            }
            let mut sq = 0.0;
            // Sample sweeps get disjoint seeds per point so their errors are
            // independent; step sweeps reuse them across points.
            let offset = match cfg.sweep {
                Sweep::Dt(_) => 0,
                Sweep::Samples(_) => k as u64 * cfg.replicates as u64,
            };
            for rep in 0..cfg.replicates {
                let pr = PathParams { seed: cfg.run.seed.wrapping_add(offset + rep as u64), ..p };
                let run = with_workers(cfg.run.workers, || run_target(m, cfg.run.target, &pr))??;
                let eps_mc = run.error_against(cfg.run.target, &truth);
                sq += eps_mc * eps_mc;
                let mut r = make_record(&graph, &pr, &run_cfg, &run);
                r.eps_split = Some(eps_split);
                r.eps_mc = Some(eps_mc);
                report.records.push(r);
            }
            let rms = (sq / cfg.replicates as f64).sqrt();
            match cfg.sweep {
                Sweep::Dt(_) => {
                    xs.push(p.dt());
                    ys.push(eps_split);
                }
                Sweep::Samples(_) => {
                    xs.push(m_ as f64);
                    ys.push(rms);
                }
            }
        }
        let label = match cfg.sweep {
            Sweep::Dt(_) => format!("{splitting}: splitting error vs dt"),
            Sweep::Samples(_) => format!("{splitting}: rms Monte Carlo error vs M"),
        };
        let slope = loglog_slope(&xs, &ys);
        report.notes.push(match slope {
            Some(s) => format!("{label}: slope {s:.3}"),
            None => format!("{label}: slope undefined (fewer than two positive errors)"),
        });
        report.series.push(Series { label, splitting, x: xs, y: ys, slope });
    }
    Ok(report)
}

pub fn cmd_bench(cfg: &BenchConfig) -> anyhow::Result<Report> {
    cfg.validate()?;
    let GraphSource::Generated(base) = &cfg.run.graph else { unreachable!("validated") };
    let mut report = Report::default();
    let mut times = Vec::new();
    for &n in &cfg.sizes {
        let source = GraphSource::Generated(GenSpec { n, ..*base });
        let graph = load_graph(&source, cfg.run.beta)?;
        let discretizations = if cfg.dts.is_empty() {
            vec![cfg.run.discretization]
        } else {
            cfg.dts.iter().map(|&dt| crate::config::Discretization::Dt(dt)).collect()
        };
        for d in discretizations {
            let run_cfg = RunConfig { graph: source.clone(), discretization: d, ..cfg.run.clone() };
            let p = params(&run_cfg, &graph, cfg.run.seed)?;
            let run = with_workers(cfg.run.workers, || run_target(&graph.matrix, cfg.run.target, &p))??;
            let mut r = make_record(&graph, &p, &run_cfg, &run);
            if cfg.run.oracle {
                let ones = vec![1.0; n];
                let truth = exact_action(&graph.matrix, &ones, p.beta)?;
                let approx = splitting_product(&graph.matrix, &ones, &p)?;
                r.eps_split = Some(target_error(cfg.run.target, &truth, &approx));
                r.eps_mc = Some(run.error_against(cfg.run.target, &truth));
            }
            report.notes.push(jump_note(&r, cfg.run.target));
            times.push(r.wall_time);
            report.records.push(r);
        }
    }
    if cfg.dts.len() <= 1 && times.len() > 1 {
        let (lo, hi) = times.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &t| (lo.min(t), hi.max(t)));
        report.notes.push(format!("wall time max/min over sizes: {:.3}", hi / lo));
    }
    Ok(report)
}

fn jump_note(r: &BenchRecord, target: Target) -> String {
    let expected = r.beta * r.dbar;
    let head = format!(
        "n = {} dt = {} : {:.3} s, jumps/path = {:.4}, beta*dbar = {:.4}",
        r.n, r.dt, r.wall_time, r.jumps_per_path, expected
    );
    if let Target::Entry(_) = target {
        // Paths start at one node, so the stationary jump rate does not apply.
        return head;
    }
    let rel = (r.jumps_per_path - expected).abs() / expected.max(f64::MIN_POSITIVE);
    let verdict = if rel <= JUMP_PROXY_TOLERANCE { "ok" } else { "OFF" };
    format!("{head} ({verdict}, rel. diff {rel:.4})")
}

/// Relative deviation of jumps per path from `beta * dbar`.
pub fn jump_proxy_deviation(r: &BenchRecord) -> f64 {
    let expected = r.beta * r.dbar;
    (r.jumps_per_path - expected).abs() / expected
}

fn params(cfg: &RunConfig, graph: &Graph, seed: u64) -> anyhow::Result<PathParams> {
    let beta = resolve_beta(cfg.beta, &graph.stats)?;
    Ok(cfg.discretization.params(beta, cfg.samples, cfg.splitting, seed)?)
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(f))
}

struct Outcome {
    value: f64,
    std_error: f64,
    samples: u64,
    total_jumps: u64,
    wall_time: f64,
    vector: Option<VectorEstimate>,
}

impl Outcome {
    fn empty() -> Self {
        Outcome { value: 0.0, std_error: 0.0, samples: 0, total_jumps: 0, wall_time: 0.0, vector: None }
    }

    fn error_against(&self, target: Target, truth: &[f64]) -> f64 {
        match &self.vector {
            Some(v) => Norm::LInf.distance(truth, &v.values),
            None => (self.value - target_value(target, truth, truth.len())).abs(),
        }
    }
}

fn run_target(m: &SplitMatrix, target: Target, p: &PathParams) -> expmc::Result<Outcome> {
    let n = m.n();
    let start = Instant::now();
    let mut out = match target {
        Target::Tc | Target::Tcn => {
            let e = tc_estimate(m, p)?;
            let scale = if target == Target::Tcn { 1.0 / n as f64 } else { 1.0 };
            Outcome {
                value: e.value * scale,
                std_error: e.std_error * scale,
                samples: e.samples_used,
                total_jumps: e.total_jumps,
                wall_time: 0.0,
                vector: None,
            }
        }
        Target::Vector => {
            let e = vector_estimate(m, &vec![1.0; n], p)?;
            Outcome {
                value: e.functional_mean,
                std_error: e.std_error_global,
                samples: e.samples_used,
                total_jumps: e.total_jumps,
                wall_time: 0.0,
                vector: Some(e),
            }
        }
        Target::Entry(i) => {
            let e = entry_estimate(m, &vec![1.0; n], i, p)?;
            Outcome {
                value: e.value,
                std_error: e.std_error,
                samples: e.samples_used,
                total_jumps: e.total_jumps,
                wall_time: 0.0,
                vector: None,
            }
        }
    };
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

fn target_value(target: Target, x: &[f64], n: usize) -> f64 {
    match target {
        Target::Tc | Target::Vector => x.iter().sum(),
        Target::Tcn => x.iter().sum::<f64>() / n as f64,
        Target::Entry(i) => x[i],
    }
}

fn target_error(target: Target, truth: &[f64], approx: &[f64]) -> f64 {
    match target {
        Target::Vector => Norm::LInf.distance(truth, approx),
        _ => (target_value(target, truth, truth.len()) - target_value(target, approx, approx.len())).abs(),
    }
}

fn make_record(graph: &Graph, p: &PathParams, cfg: &RunConfig, run: &Outcome) -> BenchRecord {
    let jumps_per_path = if run.samples == 0 { 0.0 } else { run.total_jumps as f64 / run.samples as f64 };
    BenchRecord {
        graph: graph.label.clone(),
        n: graph.stats.n,
        edges: graph.stats.edges,
        dbar: graph.stats.dbar,
        dmax: graph.stats.dmax,
        beta: p.beta,
        dt: p.dt(),
        steps: p.n_steps,
        samples: run.samples,
        splitting: p.splitting.to_string(),
        target: cfg.target.to_string(),
        seed: p.seed,
        workers: cfg.workers,
        value: run.value,
        std_error: run.std_error,
        eps_split: None,
        eps_mc: None,
        wall_time: run.wall_time,
        total_jumps: run.total_jumps,
        jumps_per_path,
    }
}

/// Writes `index,value,std_error` rows for a vector estimate.
pub fn write_vector<W: Write>(v: &VectorEstimate, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "value", "std_error"])?;
    for (i, (x, se)) in v.values.iter().zip(&v.entry_std_errors).enumerate() {
        w.write_record([i.to_string(), x.to_string(), se.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Opens `path` for writing, or stdout when absent.
pub fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", p.display()))?,
        )),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    })
}
