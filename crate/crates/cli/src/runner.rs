use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pwtest::instances::{
    gen_alternating_far, gen_random_partition_far, gen_sine_probe, in_class_instance, Instance,
    InstanceKind,
};
use pwtest::seed::substream;
use pwtest::testers::params::{
    plan_active, plan_constant, poly_exact_budget, ActiveParams, ConstantParams,
    LearnValidateParams, Mode, Plan,
};
use pwtest::testers::{active_test_general, constant_test, learn_validate_test, poly_exact_test};
use pwtest::{BaseClass, Class, ClassKind, TargetOracle, TesterReport, Verdict};

use crate::config::{RunConfig, TesterKind};

/// The procedure a configuration resolves to after regime routing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "procedure")]
pub enum Procedure {
    ActiveGeneral(ActiveParams),
    Constant { params: ConstantParams, mode: Mode },
    LearnValidate(LearnValidateParams),
    PolyExact { degree: usize, eps: f64, budget: usize },
}

impl Procedure {
    pub fn resolve(config: &RunConfig) -> anyhow::Result<Self> {
        let class = config.class();
        let (eps, k) = (config.eps, config.k);
        let lv = config.constants.learn_validate();
        let routed = |plan| match plan {
            Plan::NoiseSensitivity(p) => p,
            Plan::LearnValidate(p) => Self::LearnValidate(p),
        };
        Ok(match config.tester {
            TesterKind::ActiveGeneral => routed(
                plan_active(eps, k, class.graph_dimension(), config.constants.active(), lv)?
                    .map(Self::ActiveGeneral),
            ),
            TesterKind::ConstantActive | TesterKind::ConstantPassive => {
                let mode = if config.tester == TesterKind::ConstantActive {
                    Mode::Active
                } else {
                    Mode::Passive
                };
                routed(
                    plan_constant(eps, k, config.constants.c, lv)?
                        .map(|params| Self::Constant { params, mode }),
                )
            }
            TesterKind::LearnValidate => {
                Self::LearnValidate(LearnValidateParams::new(eps, k, class.graph_dimension(), lv)?)
            }
            TesterKind::PolyExact => {
                let ClassKind::Polynomials { degree } = config.class else {
                    bail!("poly-exact needs a polynomial class");
                };
                Self::PolyExact { degree, eps, budget: poly_exact_budget(degree, eps)? }
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ActiveGeneral(_) => "active-general",
            Self::Constant { mode: Mode::Active, .. } => "constant-active",
            Self::Constant { mode: Mode::Passive, .. } => "constant-passive",
            Self::LearnValidate(_) => "learn-validate",
            Self::PolyExact { .. } => "poly-exact",
        }
    }

    /// Declared `(s, q)`.
    pub fn budgets(&self) -> (usize, usize) {
        match self {
            Self::ActiveGeneral(p) => (p.s, p.effective_queries()),
            Self::Constant { params, mode } => (params.s_prime, params.queries(*mode)),
            Self::LearnValidate(p) => (p.budget(), p.budget()),
            Self::PolyExact { budget, .. } => (*budget, *budget),
        }
    }

    pub fn threshold(&self) -> f64 {
        match self {
            Self::ActiveGeneral(p) => p.threshold,
            Self::Constant { params, .. } => params.threshold,
            Self::LearnValidate(p) => p.validate_size as f64 - p.agreement_threshold,
            Self::PolyExact { .. } => 0.0,
        }
    }

    pub fn run(&self, oracle: &mut TargetOracle<'_>, class: &Class) -> pwtest::Result<TesterReport> {
        match self {
            Self::ActiveGeneral(p) => active_test_general(oracle, class, p),
            Self::Constant { params, mode } => constant_test(oracle, params, *mode),
            Self::LearnValidate(p) => learn_validate_test(oracle, class, p),
            Self::PolyExact { degree, eps, .. } => poly_exact_test(oracle, *degree, *eps),
        }
    }
}

trait PlanExt<P> {
    fn map<Q>(self, f: impl FnOnce(P) -> Q) -> Plan<Q>;
}

impl<P> PlanExt<P> for Plan<P> {
    fn map<Q>(self, f: impl FnOnce(P) -> Q) -> Plan<Q> {
        match self {
            Plan::NoiseSensitivity(p) => Plan::NoiseSensitivity(f(p)),
            Plan::LearnValidate(p) => Plan::LearnValidate(p),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub verdict: String,
    pub statistic: f64,
    pub threshold: f64,
    pub samples: usize,
    pub queries: usize,
    pub failure: String,
}

impl TrialRecord {
    fn new(trial: usize, r: &TesterReport) -> Self {
        Self {
            trial,
            verdict: r.verdict.to_string(),
            statistic: r.statistic,
            threshold: r.threshold,
            samples: r.samples_used,
            queries: r.queries_used,
            failure: r.failure_event.map(|e| e.to_string()).unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub procedure: String,
    pub class: ClassKind,
    pub instance: InstanceKind,
    pub k: usize,
    pub eps: f64,
    pub seed: u64,
    pub trials: usize,
    /// Over trials without a failure event.
    pub accept_rate: f64,
    pub reject_rate: f64,
    pub failure_rate: f64,
    pub mean_statistic: f64,
    pub threshold: f64,
    pub samples: usize,
    pub queries: usize,
    pub max_queries_used: usize,
    pub wall_time_secs: f64,
}

pub struct RunOutput {
    pub summary: RunSummary,
    pub records: Vec<TrialRecord>,
}

/// Builds the target of one trial. Sine probes are deterministic and built
/// once by the caller.
fn make_instance(config: &RunConfig, class: &Class, seed: u64) -> anyhow::Result<Instance> {
    let (k, eps) = (config.k, config.eps);
    let inst = match config.instance.kind {
        InstanceKind::InClass => in_class_instance(class, k, eps, seed)?,
        InstanceKind::AlternatingFar => gen_alternating_far(k, eps, seed)?,
        InstanceKind::RandomPartitionFar => {
            gen_random_partition_far(config.class, k, config.instance.cells_per_piece * k, eps, seed)?
        }
        InstanceKind::SineProbe => unreachable!("sine probes are shared"),
    };
    Ok(inst)
}

fn sine_probe(config: &RunConfig, class: &Class) -> anyhow::Result<Instance> {
    let inst = gen_sine_probe(
        class,
        config.k,
        config.instance.frequency,
        config.eps,
        Some(config.instance.grid_size),
    )?;
    Ok(inst)
}

fn ensure_certified(inst: &Instance) -> anyhow::Result<()> {
    if inst.spec.kind != InstanceKind::InClass && !inst.is_certified_far() {
        bail!(
            "instance certificate {:?} is below eps = {}",
            inst.spec.certificate.as_ref().map(|c| c.distance),
            inst.spec.eps
        );
    }
    Ok(())
}

fn run_trial(
    config: &RunConfig,
    class: &Class,
    procedure: &Procedure,
    shared: Option<&Instance>,
    trial: usize,
) -> anyhow::Result<TrialRecord> {
    let stream = substream(config.seed, trial as u64);
    let owned;
    let inst = match shared {
        Some(inst) => inst,
        None => {
            owned = make_instance(config, class, substream(stream, 0))?;
            ensure_certified(&owned)?;
            &owned
        }
    };
    let (s, q) = procedure.budgets();
    let mut oracle =
        TargetOracle::new(&inst.target, s, q, substream(stream, 1)).with_counting(config.counting);
    let report = procedure.run(&mut oracle, class).with_context(|| format!("trial {trial}"))?;
    Ok(TrialRecord::new(trial, &report))
}

/// Executes every trial of `config`. Records come back in trial order
/// whatever the worker count.
pub fn run(config: &RunConfig) -> anyhow::Result<RunOutput> {
    config.validate()?;
    let start = Instant::now();
    let class = config.class();
    let procedure = Procedure::resolve(config)?;
    let shared = match config.instance.kind {
        InstanceKind::SineProbe => {
            let inst = sine_probe(config, &class)?;
            ensure_certified(&inst)?;
            Some(inst)
        }
        _ => None,
    };
    let go = || {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, &class, &procedure, shared.as_ref(), t))
            .collect::<anyhow::Result<Vec<_>>>()
    };
    let records = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(config.workers).build()?.install(go)?
    } else {
        go()?
    };
    let summary = summarize(config, &procedure, &records, start.elapsed().as_secs_f64());
    Ok(RunOutput { summary, records })
}

fn summarize(
    config: &RunConfig,
    procedure: &Procedure,
    records: &[TrialRecord],
    wall_time_secs: f64,
) -> RunSummary {
    let trials = records.len();
    let failures = records.iter().filter(|r| !r.failure.is_empty()).count();
    let decided = trials - failures;
    let accepts = records
        .iter()
        .filter(|r| r.failure.is_empty() && r.verdict == Verdict::Accept.to_string())
        .count();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (samples, queries) = procedure.budgets();
    RunSummary {
        name: config.name.clone(),
        procedure: procedure.name().into(),
        class: config.class,
        instance: config.instance.kind,
        k: config.k,
        eps: config.eps,
        seed: config.seed,
        trials,
        accept_rate: ratio(accepts, decided),
        reject_rate: if decided == 0 { 0.0 } else { 1.0 - ratio(accepts, decided) },
        failure_rate: ratio(failures, trials),
        mean_statistic: records.iter().map(|r| r.statistic).sum::<f64>() / trials.max(1) as f64,
        threshold: procedure.threshold(),
        samples,
        queries,
        max_queries_used: records.iter().map(|r| r.queries).max().unwrap_or(0),
        wall_time_secs,
    }
}

pub fn write_csv<W: std::io::Write>(records: &[TrialRecord], out: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<name>.csv` and `<name>.json` under `dir`; returns both paths.
pub fn write_outputs(dir: &Path, output: &RunOutput) -> anyhow::Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", output.summary.name));
    let json_path = dir.join(format!("{}.json", output.summary.name));
    let file = fs::File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    write_csv(&output.records, file)?;
    let mut json = serde_json::to_string_pretty(&output.summary)?;
    json.push('\n');
    fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    Ok((csv_path, json_path))
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub eps: f64,
    pub procedure: String,
    pub samples: usize,
    pub queries: usize,
    pub threshold: f64,
    /// Empty in plan-only sweeps.
    pub accept_rate: Option<f64>,
    pub failure_rate: Option<f64>,
    pub mean_statistic: Option<f64>,
}

/// Runs (or, with `plan_only`, just resolves) `base` at every `(k, eps)`.
pub fn sweep(base: &RunConfig, ks: &[usize], epss: &[f64], plan_only: bool) -> anyhow::Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &eps in epss {
        for &k in ks {
            let config = RunConfig { k, eps, name: format!("{}-k{k}-eps{eps}", base.name), ..base.clone() };
            config.validate()?;
            let procedure = Procedure::resolve(&config)?;
            let (samples, queries) = procedure.budgets();
            let mut row = SweepRow {
                k,
                eps,
                procedure: procedure.name().into(),
                samples,
                queries,
                threshold: procedure.threshold(),
                accept_rate: None,
                failure_rate: None,
                mean_statistic: None,
            };
            if !plan_only {
                let out = run(&config)?;
                row.accept_rate = Some(out.summary.accept_rate);
                row.failure_rate = Some(out.summary.failure_rate);
                row.mean_statistic = Some(out.summary.mean_statistic);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InstanceConfig;

    fn small(tester: TesterKind) -> RunConfig {
        RunConfig { tester, trials: 4, ..Default::default() }
    }

    #[test]
    fn routing_below_regime() {
        let config = RunConfig { k: 10, eps: 0.2, ..small(TesterKind::ConstantPassive) };
        assert_eq!(Procedure::resolve(&config).unwrap().name(), "learn-validate");
        let config = small(TesterKind::ConstantActive);
        assert_eq!(Procedure::resolve(&config).unwrap().name(), "constant-active");
    }

    #[test]
    fn csv_header_and_order() {
        let out = run(&small(TesterKind::ConstantActive)).unwrap();
        let mut buf = Vec::new();
        write_csv(&out.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("trial,verdict,statistic,threshold,samples,queries,failure"));
        assert_eq!(lines.count(), 4);
        assert!(out.records.iter().enumerate().all(|(i, r)| r.trial == i));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn sine_probe_runs_once_certified() {
        let config = RunConfig {
            tester: TesterKind::PolyExact,
            class: ClassKind::Polynomials { degree: 1 },
            k: 1,
            eps: 0.25,
            trials: 20,
            instance: InstanceConfig { kind: InstanceKind::SineProbe, ..Default::default() },
            ..Default::default()
        };
        let out = run(&config).unwrap();
        assert_eq!(out.summary.samples, 2 + 5);
        assert!(out.summary.reject_rate > 0.5);
    }
}
