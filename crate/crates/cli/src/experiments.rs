//! Runs each experiment kind and stages its artifacts.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rcdstab_core::bounds::{
    early_stop_t, optimization_bound, stability_bound, BoundCurve, BoundParams, CurveKind,
    OptimizationKind, RecipeParams, RecipeRegime, StabilityRegime, ValidityFlag,
};
use rcdstab_core::data::{load_libsvm, Dataset, Population, Provenance};
use rcdstab_core::exec::{try_map_indexed, ExecMode};
use rcdstab_core::losses::{
    empirical_risk, estimate_constants, ridge_sublevel_radius, LossConstants, LossModel,
};
use rcdstab_core::numeric::{distance_l2, mean_and_se};
use rcdstab_core::optim::{Algorithm, RunConfig};
use rcdstab_core::properties::{run_property_suite, PropertyRow, PropertySuiteConfig};
use rcdstab_core::rng::{derive_seed, Purpose, GENERATOR_VERSION};
use rcdstab_core::stability::{
    argument_stability_curve, generalization_gap, reference_solution, DataSource, ReferenceOptions,
    ReferenceSolution, StabilityExperiment, StabilityReport,
};
use serde::Serialize;

use crate::artifacts::{ArtifactSet, Cell, RunManifest, Table, Timing, MANIFEST, SCHEMA_VERSION};
use crate::config::{
    BoundBlock, DatasetConfig, ExperimentConfig, ExperimentKind, LoadedConfig, SweepBlock,
};

pub const DISTANCE_CURVE: &str = "distance_curve.csv";
pub const STABILITY_REPORT: &str = "stability_report.json";
pub const BOUND_CURVES: &str = "bound_curves.csv";
pub const GAP_REPORT: &str = "gap_report.csv";
pub const PROPERTY_TABLE: &str = "property_table.json";

#[derive(Debug)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub out_dir: PathBuf,
}

struct Timer {
    start: Instant,
    phase: Instant,
    timings: Vec<Timing>,
}

impl Timer {
    fn new() -> Self {
        let now = Instant::now();
        Self {
            start: now,
            phase: now,
            timings: Vec::new(),
        }
    }

    fn mark(&mut self, phase: &str) {
        let now = Instant::now();
        self.timings.push(Timing {
            phase: phase.to_string(),
            seconds: (now - self.phase).as_secs_f64(),
        });
        log::info!("{phase}: {:.3}s", (now - self.phase).as_secs_f64());
        self.phase = now;
    }
}

pub fn run_experiment(loaded: &LoadedConfig) -> Result<Outcome> {
    let cfg = &loaded.config;
    let mut timer = Timer::new();
    let mut set = ArtifactSet::default();
    let passed = match cfg.kind {
        ExperimentKind::PropertySuite => {
            let rows = property_suite(cfg).context("properties")?;
            timer.mark("compute");
            set.add_json(PROPERTY_TABLE, &rows)?;
            rows.iter().all(|r| r.passed)
        }
        kind => {
            let source = prepare_source(loaded).context("data")?;
            timer.mark("prepare");
            match kind {
                ExperimentKind::StabilityCurve => stability_curve(cfg, &source, &mut set)?,
                ExperimentKind::RcdVsSgd => rcd_vs_sgd(cfg, &source, &mut set)?,
                ExperimentKind::BoundCheck => bound_check(cfg, &source, &mut set)?,
                ExperimentKind::GeneralizationSweep => {
                    generalization_sweep(cfg, &source, &mut set)?
                }
                ExperimentKind::PropertySuite => unreachable!(),
            }
            timer.mark("compute");
            true
        }
    };
    let out_dir = cfg.out.clone();
    let artifacts = set.write(&out_dir)?;
    timer.mark("write");
    let manifest = RunManifest {
        tool: "rcdstab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        generator: GENERATOR_VERSION.into(),
        schema_version: SCHEMA_VERSION,
        config: serde_json::to_value(cfg)?,
        artifacts,
        wall_clock_seconds: timer.start.elapsed().as_secs_f64(),
        timings: timer.timings,
        passed,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    if let Err(e) = std::fs::write(out_dir.join(MANIFEST), bytes) {
        for name in set.names() {
            let _ = std::fs::remove_file(out_dir.join(name));
        }
        return Err(e).context("writing manifest");
    }
    Ok(Outcome { manifest, out_dir })
}

fn model(cfg: &ExperimentConfig) -> &LossModel {
    cfg.model.as_ref().expect("validated")
}

pub fn prepare_source(loaded: &LoadedConfig) -> Result<DataSource> {
    let cfg = &loaded.config;
    match cfg.dataset.as_ref().expect("validated") {
        DatasetConfig::Synthetic(spec) => Ok(DataSource::Synthetic {
            population: Population::new(spec.clone(), cfg.seed)?,
            n: spec.n,
        }),
        DatasetConfig::File(f) => {
            let mut s = load_libsvm(loaded.resolve(&f.path), f.dim)?;
            if let Some(pos) = f.positive_label {
                s = s.relabeled(pos);
            }
            if f.normalize {
                s = s.normalized();
            }
            let (train, pool) = match f.test_fraction {
                Some(frac) => {
                    let (train, test) = s.split(frac, derive_seed(cfg.seed, Purpose::Split, 0))?;
                    (train, Some(test))
                }
                None => (s, None),
            };
            Ok(DataSource::Fixed { train, pool })
        }
    }
}

fn run_config(cfg: &ExperimentConfig, d: usize) -> RunConfig {
    let mut rc = RunConfig::new(cfg.run.iterations, cfg.run.schedule, cfg.seed, d);
    rc.record_every = cfg.run.record_every;
    rc.margin_cache = cfg.run.margin_cache;
    if let Some(w1) = &cfg.run.w1 {
        rc.w1 = w1.clone();
    }
    rc
}

fn probe(cfg: &ExperimentConfig, source: &DataSource) -> Result<Option<Dataset>> {
    let Some(k) = cfg.probe_size else {
        return Ok(None);
    };
    match source {
        DataSource::Synthetic { population, .. } => Ok(Some(
            population.sample(k, derive_seed(cfg.seed, Purpose::Probe, 0))?,
        )),
        DataSource::Fixed {
            pool: Some(pool), ..
        } => {
            let idx: Vec<usize> = (0..k.min(pool.len())).collect();
            Ok(Some(pool.select(&idx, "probe")?))
        }
        DataSource::Fixed { pool: None, .. } => {
            bail!("probe_size needs a held-out pool (dataset.file.test_fraction)")
        }
    }
}

fn experiment(
    cfg: &ExperimentConfig,
    source: &DataSource,
    algorithm: Algorithm,
    probe: Option<Dataset>,
) -> StabilityExperiment {
    StabilityExperiment {
        algorithm,
        model: *model(cfg),
        source: source.clone(),
        config: run_config(cfg, source.dim()),
        policy: cfg.policy,
        replicates: cfg.replicates,
        probe,
        exec: ExecMode::Parallel,
    }
}

fn names(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn distance_table(r: &StabilityReport) -> Table {
    let mut cols = names(&["t", "mean", "se", "sq_mean", "sq_se"]);
    if r.uniform.is_some() {
        cols.extend(names(&["uniform_mean", "uniform_se"]));
    }
    if r.train_risk.is_some() {
        cols.push("train_risk".into());
    }
    if r.heldout_risk.is_some() {
        cols.push("heldout_risk".into());
    }
    let mut table = Table::new("distance-curve", cols);
    for (k, &t) in r.times.iter().enumerate() {
        let mut row = vec![
            Cell::Int(t),
            Cell::Num(r.distance.mean[k]),
            Cell::Num(r.distance.se[k]),
            Cell::Num(r.squared_distance.mean[k]),
            Cell::Num(r.squared_distance.se[k]),
        ];
        if let Some(u) = &r.uniform {
            row.extend([Cell::Num(u.mean[k]), Cell::Num(u.se[k])]);
        }
        if let Some(tr) = &r.train_risk {
            row.push(Cell::Num(tr[k]));
        }
        if let Some(h) = &r.heldout_risk {
            row.push(Cell::Num(h[k]));
        }
        table.push(row);
    }
    table
}

fn stability_curve(
    cfg: &ExperimentConfig,
    source: &DataSource,
    set: &mut ArtifactSet,
) -> Result<()> {
    let exp = experiment(cfg, source, cfg.algorithm, probe(cfg, source)?);
    let report = argument_stability_curve(&exp).context("stability")?;
    set.add_table(DISTANCE_CURVE, &distance_table(&report))?;
    set.add_json(STABILITY_REPORT, &report)
}

#[derive(Serialize)]
struct PairReport<'a> {
    rcd: &'a StabilityReport,
    sgd: &'a StabilityReport,
}

fn rcd_vs_sgd(cfg: &ExperimentConfig, source: &DataSource, set: &mut ArtifactSet) -> Result<()> {
    let rcd = argument_stability_curve(&experiment(cfg, source, Algorithm::Rcd, None))
        .context("stability (rcd)")?;
    let sgd = argument_stability_curve(&experiment(cfg, source, Algorithm::Sgd, None))
        .context("stability (sgd)")?;
    let mut table = Table::new(
        "rcd-vs-sgd",
        names(&["t", "rcd_mean", "rcd_se", "sgd_mean", "sgd_se"]),
    );
    for (k, &t) in rcd.times.iter().enumerate() {
        table.push(vec![
            Cell::Int(t),
            Cell::Num(rcd.distance.mean[k]),
            Cell::Num(rcd.distance.se[k]),
            Cell::Num(sgd.distance.mean[k]),
            Cell::Num(sgd.distance.se[k]),
        ]);
    }
    set.add_table(DISTANCE_CURVE, &table)?;
    set.add_json(
        STABILITY_REPORT,
        &PairReport {
            rcd: &rcd,
            sgd: &sgd,
        },
    )
}

/// Which empirical curve a bound is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimate {
    /// `E ||w_t - w_t^(i)||`
    L1,
    /// `E ||w_t - w_t^(i)||^2`
    L2Squared,
    Uniform,
    OptimizationGap,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundSummary {
    pub name: String,
    pub curve: CurveKind,
    pub estimate: Estimate,
    pub iterate_offset: usize,
    pub flags: Vec<ValidityFlag>,
    pub assumptions_hold: bool,
    /// `mean <= bound + 3 se` at every recorded iterate the bound covers.
    pub dominated: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationSummary {
    pub seeds: usize,
    pub reference_risk: f64,
    pub reference_iterations: usize,
    pub reference_grad_norm: f64,
    pub reference_converged: bool,
}

#[derive(Serialize)]
struct BoundCheckReport<'a> {
    stability: &'a StabilityReport,
    constants: LossConstants,
    n: usize,
    d: usize,
    bounds: Vec<BoundSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    optimization: Option<OptimizationSummary>,
    skipped: Vec<String>,
}

fn default_regimes(model: &LossModel) -> Vec<StabilityRegime> {
    use StabilityRegime::*;
    if !model.is_convex() {
        vec![Nonconvex]
    } else if model.lambda() > 0.0 {
        vec![StronglyConvex, ConvexL1, ConvexL2, Uniform, Nonconvex]
    } else {
        vec![ConvexL1, ConvexL2, Uniform, Nonconvex]
    }
}

fn estimate_for(regime: StabilityRegime) -> Estimate {
    match regime {
        StabilityRegime::ConvexL2 => Estimate::L2Squared,
        StabilityRegime::Uniform => Estimate::Uniform,
        _ => Estimate::L1,
    }
}

fn curve_name(kind: CurveKind) -> String {
    match kind {
        CurveKind::Stability(r) => format!("stability:{}", json_name(&r)),
        CurveKind::Optimization(k) => format!("optimization:{}", json_name(&k)),
        CurveKind::Excess(r) => format!("excess:{}", json_name(&r)),
    }
}

fn json_name<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Every training set (and its neighbor) the study touches, stacked into one
/// dataset for the constants, plus the largest ridge sublevel radius among them.
fn pooled_constants(
    exp: &StabilityExperiment,
    block: &BoundBlock,
) -> Result<(LossConstants, Option<f64>)> {
    let d = exp.source.dim();
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut radius: Option<f64> = block.domain_radius;
    let ridge = exp.model.lambda() > 0.0 && block.domain_radius.is_none();
    let mut absorb = |s: &Dataset| {
        features.extend_from_slice(s.features());
        labels.extend_from_slice(s.labels());
    };
    let count = if exp.source.is_fixed() {
        1
    } else {
        exp.replicates
    };
    for r in 0..count {
        let inputs = exp.replicate_inputs(r)?;
        absorb(&inputs.train);
        let neighbor = inputs
            .train
            .make_neighbor(inputs.index, &inputs.replacement)?;
        absorb(&neighbor.select(&[inputs.index], "replacement")?);
        if ridge {
            for s in [&inputs.train, &neighbor] {
                let rr = ridge_sublevel_radius(&exp.model, s, &exp.config.w1)?;
                radius = Some(radius.map_or(rr, |x: f64| x.max(rr)));
            }
        }
    }
    if let DataSource::Fixed {
        pool: Some(pool), ..
    } = &exp.source
    {
        absorb(pool);
    }
    let pooled = Dataset::from_parts(d, features, labels, Provenance::Manual)?;
    Ok((estimate_constants(&exp.model, &pooled, radius)?, radius))
}

fn dominated(curve: &BoundCurve, times: &[usize], mean: &[f64], se: &[f64]) -> Option<bool> {
    let mut any = false;
    let mut ok = true;
    for (k, &t) in times.iter().enumerate() {
        if let Some(b) = curve.at_iterate(t) {
            any = true;
            ok &= mean[k] <= b + 3.0 * se[k];
        }
    }
    any.then_some(ok)
}

fn bound_check(cfg: &ExperimentConfig, source: &DataSource, set: &mut ArtifactSet) -> Result<()> {
    let block = cfg.bounds.clone().unwrap_or(BoundBlock {
        regimes: None,
        p: Default::default(),
        domain_radius: None,
        optimization: None,
    });
    let m = model(cfg);
    let exp = experiment(cfg, source, cfg.algorithm, probe(cfg, source)?);
    let report = argument_stability_curve(&exp).context("stability")?;
    let (constants, _) = pooled_constants(&exp, &block).context("constants")?;
    let (n, d) = (source.n(), source.dim());
    let horizon = cfg.run.iterations;
    let mut params = BoundParams::new(constants, n, d, cfg.run.schedule, horizon);
    params.p = block.p;
    let full_trace = report.times.len() == horizon + 1;
    if let (true, Some(tr), Some(h)) = (full_trace, &report.train_risk, &report.heldout_risk) {
        params.risk_trace = Some((0..horizon).map(|k| tr[k] + h[k]).collect());
    }
    let explicit = block.regimes.is_some();
    let regimes = block.regimes.clone().unwrap_or_else(|| default_regimes(m));
    let mut curves: Vec<(BoundCurve, Estimate)> = Vec::new();
    let mut skipped = Vec::new();
    for regime in regimes {
        match stability_bound(regime, &params) {
            Ok(c) => curves.push((c, estimate_for(regime))),
            Err(e) if !explicit => {
                log::warn!("skipping {} bound: {e}", json_name(&regime));
                skipped.push(format!("{}: {e}", json_name(&regime)));
            }
            Err(e) => return Err(e).context(format!("bounds ({})", json_name(&regime))),
        }
    }

    let mut optimization = None;
    let mut opt_gaps: Option<(Vec<f64>, Vec<f64>)> = None;
    if let Some(ob) = &block.optimization {
        if !m.is_convex() {
            bail!("bounds.optimization: optimization bounds need a convex model");
        }
        let s = exp.replicate_inputs(0)?.train;
        let reference = reference_solution(
            m,
            &s,
            &ReferenceOptions {
                max_iter: ob.reference_iterations,
                grad_tol: ob.reference_tol,
            },
        )
        .context("reference solution")?;
        if !reference.converged {
            log::warn!(
                "reference solution stopped at gradient norm {:.3e} after {} iterations",
                reference.grad_norm,
                reference.iterations
            );
        }
        let (mean, se) =
            optimization_gaps(m, &s, &run_config(cfg, d), &reference, cfg.seed, ob.seeds)
                .context("optimization runs")?;
        let w1 = run_config(cfg, d).w1;
        let f1 = empirical_risk(m, &w1, &s)?;
        let mut op = params.clone();
        op.w1_distance = Some(distance_l2(&w1, &reference.w));
        op.f_w1 = Some(f1);
        op.initial_gap = Some(f1 - reference.risk);
        curves.push((
            optimization_bound(OptimizationKind::ConvexAverage, &op)?,
            Estimate::OptimizationGap,
        ));
        if m.lambda() > 0.0 {
            curves.push((
                optimization_bound(OptimizationKind::ScContraction, &op)?,
                Estimate::OptimizationGap,
            ));
        }
        optimization = Some(OptimizationSummary {
            seeds: ob.seeds,
            reference_risk: reference.risk,
            reference_iterations: reference.iterations,
            reference_grad_norm: reference.grad_norm,
            reference_converged: reference.converged,
        });
        opt_gaps = Some((mean, se));
    }

    let squared_mean = &report.squared_distance;
    let series = |e: Estimate| -> Option<(&[f64], &[f64])> {
        match e {
            Estimate::L1 => Some((&report.distance.mean, &report.distance.se)),
            Estimate::L2Squared => Some((&squared_mean.mean, &squared_mean.se)),
            Estimate::Uniform => report.uniform.as_ref().map(|u| (&u.mean[..], &u.se[..])),
            Estimate::OptimizationGap => opt_gaps.as_ref().map(|(m, s)| (&m[..], &s[..])),
        }
    };
    let summaries: Vec<BoundSummary> = curves
        .iter()
        .map(|(c, e)| BoundSummary {
            name: curve_name(c.kind),
            curve: c.kind,
            estimate: *e,
            iterate_offset: c.iterate_offset,
            flags: c.flags.clone(),
            assumptions_hold: c.is_valid(),
            dominated: series(*e).and_then(|(mean, se)| dominated(c, &report.times, mean, se)),
        })
        .collect();

    let mut cols = names(&["t", "l1_mean", "l1_se", "l2sq_mean", "l2sq_se"]);
    if report.uniform.is_some() {
        cols.extend(names(&["uniform_mean", "uniform_se"]));
    }
    if opt_gaps.is_some() {
        cols.extend(names(&["opt_gap_mean", "opt_gap_se"]));
    }
    cols.extend(curves.iter().map(|(c, _)| curve_name(c.kind)));
    let mut table = Table::new("bound-curves", cols);
    for (k, &t) in report.times.iter().enumerate() {
        let mut row = vec![
            Cell::Int(t),
            Cell::Num(report.distance.mean[k]),
            Cell::Num(report.distance.se[k]),
            Cell::Num(squared_mean.mean[k]),
            Cell::Num(squared_mean.se[k]),
        ];
        if let Some(u) = &report.uniform {
            row.extend([Cell::Num(u.mean[k]), Cell::Num(u.se[k])]);
        }
        if let Some((mean, se)) = &opt_gaps {
            row.extend([Cell::Num(mean[k]), Cell::Num(se[k])]);
        }
        for (c, _) in &curves {
            row.push(Cell::Num(c.at_iterate(t).unwrap_or(f64::NAN)));
        }
        table.push(row);
    }
    set.add_table(DISTANCE_CURVE, &distance_table(&report))?;
    set.add_table(BOUND_CURVES, &table)?;
    set.add_json(
        STABILITY_REPORT,
        &BoundCheckReport {
            stability: &report,
            constants,
            n,
            d,
            bounds: summaries,
            optimization,
            skipped,
        },
    )
}

/// The training sample a bound-check run measures optimization error on.
pub fn optimization_sample(loaded: &LoadedConfig) -> Result<Dataset> {
    let cfg = &loaded.config;
    let source = prepare_source(loaded)?;
    Ok(experiment(cfg, &source, cfg.algorithm, None)
        .replicate_inputs(0)?
        .train)
}

/// Seed of the `k`-th optimization run; disjoint from the stability replicates.
pub fn optimization_seed(base: u64, k: usize) -> u64 {
    derive_seed(
        derive_seed(base, Purpose::Coordinates, 0),
        Purpose::Replicate,
        k as u64,
    )
}

/// Mean and standard error over seeds of `F_S(w_t) - F_S(w_hat)` at the recorded times.
pub fn optimization_gaps(
    model: &LossModel,
    s: &Dataset,
    config: &RunConfig,
    reference: &ReferenceSolution,
    base_seed: u64,
    seeds: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let runs = try_map_indexed(seeds, ExecMode::Parallel, |k| {
        let rc = RunConfig {
            seed: optimization_seed(base_seed, k),
            record_risk: true,
            ..config.clone()
        };
        Algorithm::Rcd.run(model, s, &rc).map(|traj| {
            traj.risks
                .iter()
                .map(|r| r - reference.risk)
                .collect::<Vec<f64>>()
        })
    })?;
    let len = runs[0].len();
    Ok((0..len)
        .map(|k| mean_and_se(runs.iter().map(|g| g[k])))
        .unzip())
}

fn sweep_horizon(sweep: &SweepBlock, m: &LossModel, n: usize, d: usize) -> Result<usize> {
    if let Some(h) = sweep.horizon {
        return Ok(h);
    }
    let regime = sweep.recipe.unwrap_or(RecipeRegime::ConvexLipschitz);
    let params = RecipeParams {
        n,
        d,
        sigma: (m.lambda() > 0.0).then(|| m.lambda()),
        delta: Some(sweep.delta.unwrap_or(0.05)),
        c: sweep.c,
        f_w1: None,
    };
    Ok(early_stop_t(regime, &params)?)
}

fn generalization_sweep(
    cfg: &ExperimentConfig,
    source: &DataSource,
    set: &mut ArtifactSet,
) -> Result<()> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let DataSource::Synthetic { population, .. } = source else {
        bail!("generalization sweeps need a synthetic source");
    };
    let m = model(cfg);
    let d = source.dim();
    let test = population.sample(sweep.test_size, derive_seed(cfg.seed, Purpose::Split, 0))?;
    // Minimizer of the test risk stands in for the population minimizer.
    let reference = reference_solution(
        m,
        &test,
        &ReferenceOptions {
            max_iter: sweep.reference_iterations,
            grad_tol: 1e-10,
        },
    )
    .context("reference solution")?;
    let cols = names(&[
        "n",
        "T",
        "train_risk_mean",
        "train_risk_se",
        "test_risk_mean",
        "test_risk_se",
        "estimation_mean",
        "estimation_se",
        "optimization_mean",
        "optimization_se",
        "excess_mean",
        "excess_se",
    ]);
    let mut table = Table::new("generalization-sweep", cols);
    for (k, &n) in sweep.ns.iter().enumerate() {
        let horizon = sweep_horizon(sweep, m, n, d)?;
        let group_seed = derive_seed(cfg.seed, Purpose::Replicate, k as u64);
        let rows = try_map_indexed(
            cfg.replicates,
            ExecMode::Parallel,
            |r| -> Result<[f64; 5]> {
                let seed = derive_seed(group_seed, Purpose::Replicate, r as u64);
                let s = population.sample(n, derive_seed(seed, Purpose::Features, 0))?;
                let mut rc = RunConfig::new(horizon, cfg.run.schedule, seed, d);
                rc.record_every = Some(horizon);
                rc.margin_cache = cfg.run.margin_cache;
                if let Some(w1) = &cfg.run.w1 {
                    rc.w1 = w1.clone();
                }
                let traj = cfg.algorithm.run(m, &s, &rc)?;
                let gap = generalization_gap(m, &traj, &s, &test, Some(&reference.w))?;
                let last = gap.times.len() - 1;
                Ok([
                    gap.train_risk[last],
                    gap.test_risk[last],
                    gap.estimation_error[last],
                    gap.optimization_error[last],
                    gap.excess_risk_proxy[last],
                ])
            },
        )
        .with_context(|| format!("sweep n = {n}"))?;
        let mut row = vec![Cell::Int(n), Cell::Int(horizon)];
        for j in 0..5 {
            let (mean, se) = mean_and_se(rows.iter().map(|x| x[j]));
            row.extend([Cell::Num(mean), Cell::Num(se)]);
        }
        table.push(row);
    }
    set.add_table(GAP_REPORT, &table)
}

fn property_suite(cfg: &ExperimentConfig) -> Result<Vec<PropertyRow>> {
    let p = cfg.properties.clone().unwrap_or_default();
    Ok(run_property_suite(&PropertySuiteConfig {
        trials: p.trials,
        sample_trials: p.sample_trials,
        seed: cfg.seed,
        max_dim: p.max_dim,
    })?)
}
