use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mqmi::verify::alpha::{fit_alpha, AlphaInequality};
use mqmi::verify::search::{search_report, SearchConfig, SearchTarget, DEFAULT_BUDGET};
use mqmi::verify::table::{run_table, TableConfig};
use mqmi::verify::{
    claim, reproduce_counterexample, run_sweep, CaseId, CheckReport, Ensemble, PairScope, Property,
    SweepCheck, SweepConfig,
};
use mqmi::{states, DensityMatrix, Error, MqmiKind, MqmiSpec, Partition, SubsystemLayout};

/// Default master seed for sweeps, searches and the table.
const DEFAULT_SEED: u64 = 7;

#[derive(Parser)]
#[command(
    name = "mqmi",
    version,
    about = "Multipartite mutual information: values, checks and counterexamples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a functional on one partition of a state.
    Check(CheckArgs),
    /// Rebuild a stored fixture and compare with its expected values.
    Repro(ReproArgs),
    /// Run checks over a seeded random ensemble.
    Sweep(SweepArgs),
    /// Search for a state violating a relation.
    Search(SearchArgs),
    /// Regenerate the property table from evidence.
    Table(TableArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct Output {
    /// Write the full report here (JSON, or the chosen format for `table`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct SpecArgs {
    /// I, Iprime, Idprime, Iq, Iqprime or Iqdprime.
    #[arg(long, default_value = "I")]
    kind: String,
    /// Tsallis index for the Tsallis kinds.
    #[arg(long)]
    q: Option<f64>,
}

impl SpecArgs {
    fn spec(&self) -> Result<MqmiSpec, Error> {
        let kind: MqmiKind = self.kind.parse()?;
        let q = if kind.is_tsallis() {
            Some(self.q.unwrap_or(2.0))
        } else {
            self.q
        };
        MqmiSpec::new(kind, q)
    }
}

#[derive(Args)]
struct CheckArgs {
    /// ghz3, ghz-mixture-half, classical-half, additivity-state, markov-demo or bell-pair.
    #[arg(long, conflicts_with = "state", required_unless_present = "state")]
    builtin: Option<String>,
    /// State file in the standard JSON format.
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    partition: String,
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReproArgs {
    #[arg(long = "case")]
    case: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum EnsembleArg {
    HaarPure,
    HsMixed,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "hs-mixed")]
    ensemble: EnsembleArg,
    #[arg(long, default_value_t = 4)]
    rank: usize,
    /// Layout as label:dim pairs.
    #[arg(long, default_value = "A:2,B:2,C:2")]
    parties: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Repeatable. non-negative, symmetric, monotone-{a,b,ab,c,all}, triangle, entropy-bound,
    /// ssa, alpha-monogamy, alpha-complete, alpha-tight.
    #[arg(long = "check", required = true)]
    checks: Vec<String>,
    #[command(flatten)]
    spec: SpecArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Also write the witness state file here.
    #[arg(long)]
    witness: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = TableConfig::default().samples)]
    samples: usize,
    #[arg(long, default_value_t = TableConfig::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 2.0)]
    q: f64,
    #[command(flatten)]
    output: Output,
}

fn builtin(name: &str) -> Result<DensityMatrix, Error> {
    match name {
        "ghz3" => states::ghz(3),
        "ghz-mixture-half" => states::ghz_mixture(0.5, 3),
        "classical-half" => states::classical_two_term(0.5, 3),
        "additivity-state" => states::additivity_state(),
        "markov-demo" => states::markov_demo(),
        "bell-pair" => states::bell_pair(),
        other => Err(Error::UnknownName(format!("builtin state {other:?}"))),
    }
}

enum Outcome {
    Expected,
    Unexpected,
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    Ok(fs::write(path, text)?)
}

fn emit_reports(reports: &[CheckReport], output: &Output) -> Result<Outcome, Error> {
    match output.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(reports)?),
        Format::Csv => {
            println!("check_id,spec,samples,min_margin,verdict,expected");
            for r in reports {
                let spec = r.spec.map(|s| s.to_string()).unwrap_or_default();
                println!(
                    "{},{},{},{:e},{},{}",
                    r.check_id, spec, r.samples, r.min_margin, r.verdict, r.expected
                );
            }
        }
        Format::Table => {
            for r in reports {
                println!("{}", r.summary_line());
            }
        }
    }
    if let Some(p) = &output.out {
        let body = if reports.len() == 1 {
            reports[0].to_json()
        } else {
            serde_json::to_string_pretty(reports)?
        };
        write_out(p, &(body + "\n"))?;
    }
    Ok(if reports.iter().all(|r| r.expected) {
        Outcome::Expected
    } else {
        Outcome::Unexpected
    })
}

fn cmd_check(a: &CheckArgs) -> Result<Outcome, Error> {
    let rho = match (&a.builtin, &a.state) {
        (Some(name), _) => builtin(name)?,
        (None, Some(path)) => DensityMatrix::read_json(path)?,
        (None, None) => return Err(Error::Spec("give --builtin or --state".into())),
    };
    let spec = a.spec.spec()?;
    let partition = Partition::parse_with_labels(&a.partition, &rho.layout().labels())?;
    let v = mqmi::mqmi(&rho, &partition, spec)?;
    let json = serde_json::to_string_pretty(&v)?;
    match a.output.format {
        Format::Json => println!("{json}"),
        Format::Csv => println!(
            "kind,q,partition,value\n{},{},{},{:.9}",
            spec.kind.name(),
            spec.q.map(|q| q.to_string()).unwrap_or_default(),
            partition,
            v.value
        ),
        Format::Table => println!("{:.9}  {} on {}", v.value, spec, partition),
    }
    if let Some(p) = &a.output.out {
        write_out(p, &(json + "\n"))?;
    }
    Ok(Outcome::Expected)
}

fn parse_check(name: &str) -> Result<Result<SweepCheck, AlphaInequality>, Error> {
    Ok(match name {
        "non-negative" => Ok(SweepCheck::NonNegative),
        "symmetric" => Ok(SweepCheck::Symmetric),
        "monotone-a" => Ok(SweepCheck::Monotone(PairScope::A)),
        "monotone-b" => Ok(SweepCheck::Monotone(PairScope::B)),
        "monotone-ab" => Ok(SweepCheck::Monotone(PairScope::AB)),
        "monotone-c" => Ok(SweepCheck::Monotone(PairScope::C)),
        "monotone" | "monotone-all" => Ok(SweepCheck::Monotone(PairScope::All)),
        "triangle" => Ok(SweepCheck::Triangle),
        "entropy-bound" => Ok(SweepCheck::EntropyBound),
        "ssa" => Ok(SweepCheck::Ssa),
        "alpha-monogamy" => Err(AlphaInequality::Monogamy),
        "alpha-complete" => Err(AlphaInequality::Complete),
        "alpha-tight" => Err(AlphaInequality::Tight),
        other => return Err(Error::UnknownName(format!("check {other:?}"))),
    })
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, Error> {
    let spec = a.spec.spec()?;
    let layout = SubsystemLayout::parse(&a.parties)?;
    let ensemble = match a.ensemble {
        EnsembleArg::HaarPure => Ensemble::HaarPure,
        EnsembleArg::HsMixed => Ensemble::HsMixed { rank: a.rank },
    };
    let config = SweepConfig::new(ensemble, layout, a.samples, a.seed)?;
    let mut sweep_checks = Vec::new();
    let mut alphas = Vec::new();
    for name in &a.checks {
        match parse_check(name)? {
            Ok(c) => sweep_checks.push(c),
            Err(i) => alphas.push(i),
        }
    }
    let mut reports = if sweep_checks.is_empty() {
        Vec::new()
    } else {
        run_sweep(&config, spec, &sweep_checks)?
    };
    for i in alphas {
        reports.push(fit_alpha(&config, spec, i)?);
    }
    emit_reports(&reports, &a.output)
}

fn cmd_search(a: &SearchArgs) -> Result<Outcome, Error> {
    let target: SearchTarget = a.target.parse()?;
    let config = SearchConfig::new(target, a.q).budget(a.budget).seed(a.seed);
    let prop = match target.check() {
        SweepCheck::NonNegative => Property::NonNegative,
        SweepCheck::Triangle => Property::Triangle,
        SweepCheck::Monotone(PairScope::A) => Property::CoarseA,
        SweepCheck::Monotone(PairScope::B) => Property::CoarseB,
        SweepCheck::Monotone(_) => Property::CoarseC,
        _ => Property::NonNegative,
    };
    let asserted = if target == SearchTarget::SsaTsallis {
        mqmi::verify::Claim::Fails
    } else {
        claim(target.kind(), prop)
    };
    let report = search_report(&config, asserted)?;
    if let (Some(path), Some(w)) = (&a.witness, &report.witness) {
        let body = serde_json::to_string_pretty(&w.state)?;
        write_out(path, &(body + "\n"))?;
    }
    emit_reports(&[report], &a.output)
}

fn cmd_table(a: &TableArgs) -> Result<Outcome, Error> {
    let cfg = TableConfig {
        samples: a.samples,
        seed: a.seed,
        search_budget: a.budget,
        q: a.q,
        ..TableConfig::default()
    };
    let t = run_table(&cfg)?;
    let body = match a.output.format {
        Format::Json => t.to_json(),
        Format::Csv => t.to_csv(),
        Format::Table => t.to_text(),
    };
    print!("{body}");
    if let Some(p) = &a.output.out {
        write_out(p, &body)?;
    }
    let off = t.disagreements();
    for c in &off {
        eprintln!(
            "differs from published: {} {} (published {}, found {})",
            c.kind.symbol(),
            c.property.header(),
            c.published.mark(),
            c.status.mark()
        );
    }
    Ok(if off.is_empty() {
        Outcome::Expected
    } else {
        Outcome::Unexpected
    })
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Repro(a) => {
            let case: CaseId = a.case.parse()?;
            emit_reports(&[reproduce_counterexample(case)?], &a.output)
        }
        Command::Sweep(a) => cmd_sweep(a),
        Command::Search(a) => cmd_search(a),
        Command::Table(a) => cmd_table(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Expected) => ExitCode::SUCCESS,
        Ok(Outcome::Unexpected) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
