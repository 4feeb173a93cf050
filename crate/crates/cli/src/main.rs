use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qcoinflip::analytics::{fair_alpha2, paper_table, BiasReport};
use qcoinflip::catalog::Alpha2;
use qcoinflip::harness::{
    acceptance_matrix, evaluate, parse_grid, run_experiment, run_trial, sweep, ExperimentConfig, ExperimentReport,
    Player, SweepParam, CSV_HEADER, DEFAULT_MAX_RESTARTS, DEFAULT_TRIALS,
};
use qcoinflip::protocols::{LossPolicy, ProtocolId, VariantFlags};
use qcoinflip::Error;

const EXIT_INVALID: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_RESTART_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qcoinflip",
    version,
    about = "Monte Carlo harness for quantum coin-flipping protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and print its report.
    Run(RunArgs),
    /// Run every acceptance row and compare with the oracle values.
    Table(TableArgs),
    /// Run one experiment per grid point of alpha2 or eta.
    Sweep(SweepArgs),
    /// Print the fair alpha^2 and both biases there.
    Fair,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value = "loss_tolerant_cf", value_parser = parse_protocol)]
    protocol: ProtocolId,
    /// Loss policy, optionally suffixed `+measure` or `+store`.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, default_value = "honest", value_parser = parse_player)]
    alice: Player,
    #[arg(long, default_value = "honest", value_parser = parse_player)]
    bob: Player,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    target: u8,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_RESTARTS)]
    max_restarts: u64,
    #[arg(long)]
    photons: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write every trial's transcript as JSON lines.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Exit with status 2 unless every row is within tolerance.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long, value_parser = parse_sweep_param)]
    param: SweepParam,
    /// `a:b:n`, n evenly spaced points from a to b.
    #[arg(long)]
    grid: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn parse_protocol(s: &str) -> Result<ProtocolId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_player(s: &str) -> Result<Player, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_sweep_param(s: &str) -> Result<SweepParam, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_variant(protocol: ProtocolId, s: &str) -> Result<VariantFlags, Error> {
    let (policy, mode) = match s.split_once('+') {
        Some((p, m)) => (p, Some(m)),
        None => (s, None),
    };
    let policy: LossPolicy = policy.parse()?;
    let flags = VariantFlags::with_policy(protocol, policy);
    match mode {
        None => Ok(flags),
        Some("measure") => Ok(VariantFlags::new(policy, true)),
        Some("store") => Ok(VariantFlags::new(policy, false)),
        Some(other) => Err(Error::InvalidFlags(format!("unknown reception mode `{other}`"))),
    }
}

impl ExperimentArgs {
    fn config(&self) -> Result<ExperimentConfig, Error> {
        let variant = match &self.variant {
            Some(v) => parse_variant(self.protocol, v)?,
            None => VariantFlags::default_for(self.protocol),
        };
        let cfg = ExperimentConfig {
            protocol: self.protocol,
            variant,
            alice: self.alice,
            bob: self.bob,
            target: self.target,
            trials: self.trials,
            seed: self.seed,
            alpha2: Alpha2::new(self.alpha2)?,
            eta: self.eta,
            max_restarts: self.max_restarts,
            photon_count: self.photons,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug)]
enum Failure {
    Lib(Error),
    Io(std::io::Error),
    Mismatch(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn print_reports(reports: &[ExperimentReport], format: Format, single: bool) {
    match format {
        Format::Json if single => println!("{}", reports[0].to_json()),
        Format::Json => println!("{}", serde_json::to_string(reports).expect("reports serialize")),
        Format::Csv => {
            println!("{CSV_HEADER}");
            for r in reports {
                println!("{}", r.to_csv_row());
            }
        }
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = args.experiment.config()?;
    let estimate = run_experiment(&cfg)?;
    if let Some(path) = &args.transcripts {
        let mut out = BufWriter::new(File::create(path)?);
        for i in 0..cfg.trials {
            match run_trial(&cfg, i) {
                Ok(t) => writeln!(out, "{}", t.to_json_line())?,
                Err(Error::RestartLimitExceeded(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        out.flush()?;
    }
    print_reports(&[ExperimentReport::new(&cfg, &estimate)], args.format, true);
    Ok(())
}

fn cmd_table(args: &TableArgs) -> Result<(), Failure> {
    let results = acceptance_matrix(args.trials, args.seed)
        .iter()
        .map(evaluate)
        .collect::<Result<Vec<_>, _>>()?;
    match args.format {
        Format::Json => {
            let doc = serde_json::json!({ "rows": results, "oracles": paper_table() });
            println!("{doc}");
        }
        Format::Csv => {
            println!("label,oracle,metric,expected,measured,tolerance,pass");
            for r in &results {
                let metric = serde_json::to_value(r.metric).expect("metric serializes");
                println!(
                    "{},{},{},{},{},{},{}",
                    r.label,
                    r.oracle.unwrap_or(""),
                    metric.as_str().unwrap_or_default(),
                    r.expected,
                    r.measured,
                    r.tolerance,
                    r.pass
                );
            }
        }
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if args.check && failed > 0 {
        return Err(Failure::Mismatch(failed));
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let base = args.experiment.config()?;
    let grid = parse_grid(&args.grid)?;
    let reports: Vec<_> = sweep(&base, args.param, &grid)?
        .iter()
        .map(|(cfg, est)| ExperimentReport::new(cfg, est))
        .collect();
    print_reports(&reports, args.format, false);
    Ok(())
}

fn cmd_fair() -> Result<(), Failure> {
    let report = BiasReport::new(fair_alpha2())?;
    println!("{}", serde_json::to_string(&report).expect("report serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Table(args) => cmd_table(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Fair => cmd_fair(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(n)) => {
            eprintln!("error: {n} acceptance row(s) out of tolerance");
            ExitCode::from(EXIT_MISMATCH)
        }
        Err(Failure::Lib(e @ Error::RestartBudgetExceeded { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RESTART_BUDGET)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
