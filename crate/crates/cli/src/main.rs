mod files;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emut_core::equiv::{check_equivalence, EquivalenceProblem};
use emut_core::mutation::{generate_mutants, CioTemplate, GenerationConfig, MutantCatalog, OperatorKind};
use emut_core::pipeline::{self, PipelineConfig, PipelineError};
use emut_core::pta::to_pta;
use emut_core::report::{CatalogFile, MutationReport, ReportFormat};
use emut_core::sim::{simulate, SimulationQuery};
use emut_core::testing::{generate_tests, TestSuite};
use emut_core::Rational;

use files::{load_model, read, write_atomic, Failure, EXIT_INVALID, EXIT_PARSE};

/// Energy-aware mutation testing for component architecture models.
#[derive(Parser)]
#[command(name = "emut", version)]
struct Cli {
    /// Worker threads (default: available hardware parallelism).
    #[arg(long, short, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the whole pipeline and write every artifact.
    Run(RunArgs),
    /// Generate the mutant catalog.
    Mutate {
        model: PathBuf,
        #[command(flatten)]
        ops: OperatorArgs,
        #[arg(long, default_value = "mutants")]
        out: PathBuf,
    },
    /// Decide bounded energy equivalence of a model and one mutant.
    Equiv {
        model: PathBuf,
        mutant: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Generate a test suite from simulations of the original model.
    GenTests {
        model: PathBuf,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, default_value = "tests.json")]
        out: PathBuf,
        /// Also write the raw traces (all energy variables) as JSON lines.
        #[arg(long)]
        traces: Option<PathBuf>,
    },
    /// Score a stored test suite against a stored mutant catalog.
    Score {
        model: PathBuf,
        #[arg(long)]
        mutants: PathBuf,
        #[arg(long)]
        tests: PathBuf,
        #[command(flatten)]
        check: CheckArgs,
        #[arg(long)]
        no_witness_tests: bool,
        #[arg(long, default_value = "emut-out")]
        out: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct RunArgs {
    model: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    sim: SimArgs,
    #[command(flatten)]
    ops: OperatorArgs,
    /// Do not add worst-case-dwell tests for equivalence witnesses.
    #[arg(long)]
    no_witness_tests: bool,
    #[arg(long, default_value = "emut-out")]
    out: PathBuf,
    /// `csv` writes report.csv next to report.json.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
}

#[derive(Args)]
struct CheckArgs {
    /// Smallest energy difference that counts as observable.
    #[arg(long, default_value = "1")]
    threshold: Rational,
    /// Valuations explored by the equivalence search.
    #[arg(long, default_value_t = 10_000)]
    equiv_budget: u64,
}

#[derive(Args)]
struct WindowArgs {
    /// Observation horizon in model time units.
    #[arg(long, default_value_t = 100)]
    bound: i64,
    /// Number of equidistant sample points over the horizon.
    #[arg(long, default_value_t = 20)]
    samples: usize,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, env = "EMUT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OperatorArgs {
    /// Enabled operators, e.g. `ERO,PRO` (default: all).
    #[arg(long, value_delimiter = ',')]
    operators: Option<Vec<OperatorKind>>,
    #[arg(long, value_delimiter = ',')]
    ero_factors: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pro_factors: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    eto_factors: Option<Vec<f64>>,
    #[arg(long)]
    cio_name: Option<String>,
    #[arg(long)]
    cio_period: Option<i64>,
    #[arg(long)]
    cio_exec: Option<i64>,
    #[arg(long)]
    cio_rate: Option<i64>,
}

impl OperatorArgs {
    fn config(&self) -> Result<GenerationConfig, Failure> {
        let mut g = GenerationConfig::default();
        if let Some(f) = &self.ero_factors {
            g.ero_factors = f.clone();
        }
        if let Some(f) = &self.pro_factors {
            g.pro_factors = f.clone();
        }
        if let Some(f) = &self.eto_factors {
            g.eto_factors = f.clone();
        }
        g.cio_template = CioTemplate {
            name: self.cio_name.clone(),
            period: self.cio_period,
            exec: self.cio_exec,
            rate: self.cio_rate,
        };
        if let Some(kinds) = &self.operators {
            g = g.restrict_to(kinds);
        }
        g.check().map_err(Failure::usage)?;
        Ok(g)
    }
}

fn pipeline_error(e: PipelineError) -> Failure {
    match e {
        PipelineError::Config(m) => Failure::usage(m),
        other => Failure { code: EXIT_INVALID, message: other.to_string() },
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn write_catalog(dir: &Path, catalog: &MutantCatalog, file: &CatalogFile) -> Result<(), Failure> {
    write_atomic(&dir.join("catalog.json"), &to_json(file))?;
    for (name, text) in CatalogFile::model_files(catalog) {
        write_atomic(&dir.join(name), &text)?;
    }
    Ok(())
}

fn write_report(out: &Path, report: &MutationReport, format: ReportFormat) -> Result<(), Failure> {
    write_atomic(&out.join("report.json"), &report.to_json())?;
    if format == ReportFormat::Csv {
        write_atomic(&out.join("report.csv"), &report.to_csv())?;
    }
    Ok(())
}

fn summary(report: &MutationReport, out: &Path) {
    println!(
        "{}: {} mutants ({} equivalent), {} tests, score {}/{} = {:.4}, {} tests after minimization; wrote {}",
        report.config.system,
        report.catalog.generated,
        report.equivalence.equivalent.len(),
        report.tests.cases.len(),
        report.score.killed,
        report.score.live,
        report.score.value,
        report.minimized.len(),
        out.display()
    );
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let model = load_model(&args.model)?;
    let config = PipelineConfig {
        threshold: args.check.threshold,
        bound: args.window.bound,
        samples: args.window.samples,
        runs: args.sim.runs,
        seed: args.sim.seed,
        equiv_budget: args.check.equiv_budget,
        witness_tests: !args.no_witness_tests,
        generation: args.ops.config()?,
    };
    config.check().map_err(pipeline_error)?;
    let catalog = pipeline::mutate(&model, &config);
    let suite = pipeline::tests(&model, &config).map_err(pipeline_error)?;
    let report = pipeline::score(&catalog, &suite, &config).map_err(pipeline_error)?;
    write_report(&args.out, &report, args.format)?;
    write_catalog(
        &args.out.join("mutants"),
        &catalog,
        &CatalogFile::new(&catalog, Some(report.equivalence.verdicts.clone())),
    )?;
    write_atomic(&args.out.join("tests.json"), &to_json(&suite))?;
    summary(&report, &args.out);
    Ok(())
}

fn mutate(model: &Path, ops: &OperatorArgs, out: &Path) -> Result<(), Failure> {
    let model = load_model(model)?;
    let catalog = generate_mutants(&model, &ops.config()?);
    write_catalog(out, &catalog, &CatalogFile::new(&catalog, None))?;
    println!(
        "{}: {} candidates, {} mutants, {} discarded; wrote {}",
        model.name,
        catalog.candidates(),
        catalog.mutants.len(),
        catalog.discarded.len(),
        out.display()
    );
    Ok(())
}

fn equiv(model: &Path, mutant: &Path, check: &CheckArgs, window: &WindowArgs) -> Result<(), Failure> {
    let original = to_pta(&load_model(model)?);
    let mutant = to_pta(&load_model(mutant)?);
    let problem = EquivalenceProblem {
        original: &original,
        mutant: &mutant,
        threshold: check.threshold,
        bound: window.bound,
        samples: window.samples,
    };
    let verdict = check_equivalence(&problem, check.equiv_budget).map_err(|e| match e {
        emut_core::equiv::EquivError::InvalidProblem(m) => Failure::usage(m),
        other => Failure { code: EXIT_INVALID, message: other.to_string() },
    })?;
    print!("{}", to_json(&verdict));
    Ok(())
}

fn gen_tests(
    model: &Path,
    window: &WindowArgs,
    sim: &SimArgs,
    out: &Path,
    traces: Option<&Path>,
) -> Result<(), Failure> {
    let model = load_model(model)?;
    let query = SimulationQuery::new(sim.runs, window.bound);
    let suite = generate_tests(&model, &query, window.samples, sim.seed).map_err(Failure::usage)?;
    write_atomic(out, &to_json(&suite))?;
    if let Some(path) = traces {
        let net = to_pta(&model);
        let mut query = query.clone();
        query.monitored = net.energy_vars.iter().map(|v| v.name.clone()).collect();
        let runs = simulate(&net, &query, sim.seed).map_err(Failure::usage)?;
        let lines: String = runs.iter().map(|t| t.to_json_line() + "\n").collect();
        write_atomic(path, &lines)?;
    }
    println!("{}: {} tests; wrote {}", model.name, suite.tests.len(), out.display());
    Ok(())
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure { code: EXIT_PARSE, message: format!("{}: {e}", path.display()) })
}

fn score(
    model: &Path,
    mutants: &Path,
    tests: &Path,
    check: &CheckArgs,
    witness_tests: bool,
    out: &Path,
    format: ReportFormat,
) -> Result<(), Failure> {
    let model = load_model(model)?;
    let file: CatalogFile = parse_json(&mutants.join("catalog.json"))?;
    let suite: TestSuite = parse_json(tests)?;
    let generation = file.generation_config.clone();
    let catalog = file
        .into_catalog(&model, |id| load_model(&mutants.join(format!("{id}.eam"))).map_err(|f| f.message))
        .map_err(|m| Failure { code: EXIT_INVALID, message: format!("{}: {m}", mutants.display()) })?;
    let p = &suite.provenance;
    let config = PipelineConfig {
        threshold: check.threshold,
        bound: p.bound,
        samples: p.samples,
        runs: p.runs,
        seed: p.master_seed,
        equiv_budget: check.equiv_budget,
        witness_tests,
        generation,
    };
    let report = pipeline::score(&catalog, &suite, &config).map_err(pipeline_error)?;
    write_report(out, &report, format)?;
    summary(&report, out);
    Ok(())
}

fn dispatch(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Run(args) => run(args),
        Command::Mutate { model, ops, out } => mutate(model, ops, out),
        Command::Equiv { model, mutant, check, window } => equiv(model, mutant, check, window),
        Command::GenTests { model, window, sim, out, traces } => gen_tests(model, window, sim, out, traces.as_deref()),
        Command::Score { model, mutants, tests, check, no_witness_tests, out, format } => {
            score(model, mutants, tests, check, !no_witness_tests, out, *format)
        }
    }
}

#[cfg(feature = "parallel")]
fn with_jobs(jobs: Option<usize>, f: impl FnOnce() -> Result<(), Failure> + Send) -> Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(Failure::usage)?;
    pool.install(f)
}

#[cfg(not(feature = "parallel"))]
fn with_jobs(_jobs: Option<usize>, f: impl FnOnce() -> Result<(), Failure>) -> Result<(), Failure> {
    f()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { files::EXIT_USAGE } else { 0 });
        }
    };
    if cli.jobs == Some(0) {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(files::EXIT_USAGE);
    }
    match with_jobs(cli.jobs, || dispatch(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
