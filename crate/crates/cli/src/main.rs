use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pwtest::distance::StepFunction;
use pwtest::instances::{InstanceKind, TargetSpec};
use pwtest::{Class, ClassKind, Member, PiecewiseFunction, Tolerance};
use pwtest_cli::commands;
use pwtest_cli::config::{parse_class, ConfigError, Constants, RunConfig, TesterKind};
use pwtest_cli::runner::{self, write_outputs};

#[derive(Parser)]
#[command(name = "pwtest", version, about = "Property testers for k-piecewise functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured experiment.
    Test(RunArgs),
    /// Run (or plan) one experiment per (k, eps) combination.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        ks: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        epss: Vec<f64>,
        /// Resolve budgets without running trials.
        #[arg(long)]
        plan_only: bool,
    },
    /// Compare ground-truth noise sensitivity with the pair estimator.
    Ns {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_parser = parse_class, default_value = "constants")]
        class: ClassKind,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1_000_000)]
        anchors: usize,
        #[arg(long, default_value_t = pwtest::ns::DEFAULT_INNER_PROBES)]
        inner_probes: usize,
        /// Pair-estimator trials (constants only; 0 skips it).
        #[arg(long, default_value_t = 200)]
        estimator_trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Certify the distance of a target to F_k(H).
    Dist {
        #[command(flatten)]
        target: TargetArgs,
        #[arg(long, value_parser = parse_class, default_value = "constants")]
        class: ClassKind,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = pwtest::distance::DEFAULT_GRID_SIZE)]
        grid: usize,
    },
    /// Print derived budgets and thresholds.
    Params {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        k: usize,
        /// Graph dimension; defaults to the class's.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, value_parser = parse_class, default_value = "constants")]
        class: ClassKind,
        #[arg(long, value_enum, default_value = "active-general")]
        tester: TesterKind,
        #[command(flatten)]
        constants: ConstantArgs,
        /// Also compute the budgets the correctness proof needs.
        #[arg(long)]
        theory: bool,
    },
}

#[derive(Args, Default)]
struct ConstantArgs {
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    c_prime: Option<f64>,
    #[arg(long)]
    c_double_prime: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
}

impl ConstantArgs {
    fn apply(&self, c: &mut Constants) {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut c.c, self.c);
        set(&mut c.c_prime, self.c_prime);
        set(&mut c.c_double_prime, self.c_double_prime);
        set(&mut c.c1, self.c1);
        set(&mut c.c2, self.c2);
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_enum)]
    tester: Option<TesterKind>,
    #[arg(long, value_parser = parse_class)]
    class: Option<ClassKind>,
    #[arg(long, value_parser = parse_instance)]
    instance: Option<InstanceKind>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    constants: ConstantArgs,
    /// Output directory (overrides PWTEST_OUTPUT_DIR and the config file).
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.name {
            config.name = v.clone();
        }
        if let Some(v) = self.tester {
            config.tester = v;
        }
        if let Some(v) = self.class {
            config.class = v;
        }
        if let Some(v) = self.instance {
            config.instance.kind = v;
        }
        if let Some(v) = self.k {
            config.k = v;
        }
        if let Some(v) = self.eps {
            config.eps = v;
        }
        if let Some(v) = self.trials {
            config.trials = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.workers {
            config.workers = v;
        }
        self.constants.apply(&mut config.constants);
        config.validate()?;
        Ok(config)
    }
}

fn parse_instance(text: &str) -> Result<InstanceKind, String> {
    serde_json::from_value(serde_json::Value::String(text.into()))
        .map_err(|_| format!("unknown instance kind {text:?}"))
}

/// A target given as a JSON file, equal-width step values, or a
/// piecewise-constant function.
#[derive(Args)]
struct TargetArgs {
    /// Instance or target JSON file.
    #[arg(long, conflicts_with_all = ["values", "breakpoints"])]
    file: Option<PathBuf>,
    /// Values of equal-width steps, e.g. `0,1,0,1`.
    #[arg(long, value_delimiter = ',', conflicts_with = "breakpoints")]
    values: Vec<f64>,
    /// Breakpoints of a piecewise constant with values 0, 1, 2, ...
    #[arg(long, value_delimiter = ',')]
    breakpoints: Vec<f64>,
}

impl TargetArgs {
    fn load(&self) -> anyhow::Result<(String, TargetSpec)> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)?;
            return Ok((path.display().to_string(), commands::read_target(&text)?));
        }
        if !self.values.is_empty() {
            let f = StepFunction::equal_pieces(self.values.clone())?;
            return Ok(("values".into(), TargetSpec::Step(f)));
        }
        if !self.breakpoints.is_empty() {
            let pieces = (0..=self.breakpoints.len()).map(|i| Member::Constant(i as f64)).collect();
            let f = PiecewiseFunction::new(self.breakpoints.clone(), pieces)?;
            return Ok(("breakpoints".into(), TargetSpec::Piecewise(f)));
        }
        Err(ConfigError::Invalid("give --file, --values or --breakpoints".into()).into())
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Test(args) => {
            let config = args.resolve()?;
            let output = runner::run(&config)?;
            let dir = config.output_dir(args.output.as_deref());
            let (csv, json) = write_outputs(&dir, &output)?;
            print_json(&output.summary)?;
            eprintln!("wrote {} and {}", csv.display(), json.display());
        }
        Command::Sweep { run, ks, epss, plan_only } => {
            let base = run.resolve()?;
            let epss = if epss.is_empty() { vec![base.eps] } else { epss };
            let rows = runner::sweep(&base, &ks, &epss, plan_only)?;
            let dir = base.output_dir(run.output.as_deref());
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(format!("{}-sweep.csv", base.name));
            runner::write_sweep_csv(&rows, std::fs::File::create(&path)?)?;
            runner::write_sweep_csv(&rows, std::io::stdout().lock())?;
            eprintln!("wrote {}", path.display());
        }
        Command::Ns { target, class, delta, anchors, inner_probes, estimator_trials, seed } => {
            let (_, spec) = target.load()?;
            let class = Class { kind: class, tolerance: Tolerance::default() };
            let k = match &spec {
                TargetSpec::Piecewise(f) => f.k(),
                TargetSpec::Step(f) => f.pieces(),
                TargetSpec::Sine { .. } => 1,
            };
            let cmp = commands::ns(&spec, &class, k, delta, anchors, inner_probes, estimator_trials, seed)?;
            print_json(&cmp)?;
        }
        Command::Dist { target, class, k, grid } => {
            let (id, spec) = target.load()?;
            let class = Class { kind: class, tolerance: Tolerance::default() };
            print_json(&commands::dist(&id, &spec, &class, k, grid)?)?;
        }
        Command::Params { eps, k, d, class, tester, constants, theory } => {
            let mut c = Constants::default();
            constants.apply(&mut c);
            let d = d.unwrap_or_else(|| commands::dimension(class));
            print_json(&commands::params(eps, k, d, &c, tester, theory)?)?;
        }
    }
    Ok(())
}

fn is_config_error(err: &anyhow::Error) -> bool {
    err.chain().any(|e| e.is::<ConfigError>() || e.is::<pwtest::Error>())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 1 })
        }
    }
}
