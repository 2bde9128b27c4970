use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use surfcalc_core::constitutive::ConstitutiveSet;
use surfcalc_core::fields::{SCALAR_CATALOG, VECTOR_CATALOG};
use surfcalc_core::geometry::SURFACE_CATALOG;
use surfcalc_core::report::{format_summary, rows_from_csv, summarize};
use surfcalc_core::scenario::{run_with_threads, Scenario, Suite};

#[derive(Parser)]
#[command(name = "surfcalc", version, about = "Surface calculus checks and solvers on evolving surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suites of a scenario file over its resolutions.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory; defaults to the scenario's `output`, then `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "SURFCALC_THREADS")]
        threads: Option<usize>,
    },
    /// List surfaces, fields, constitutive sets and suites.
    List,
    /// Print the convergence table of a check CSV.
    Orders {
        #[arg(long)]
        report: PathBuf,
    },
}

fn run(scenario: PathBuf, out: Option<PathBuf>, threads: Option<usize>) -> surfcalc_core::Result<bool> {
    let sc = Scenario::load(&scenario)?;
    let report = run_with_threads(&sc, threads)?;
    if report.outcomes.is_empty() {
        println!("{}: no suites selected", sc.name);
        return Ok(true);
    }
    let dir = out
        .or_else(|| sc.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(&sc.name));
    let written = report.write(&dir)?;
    print!("{}", report.table());
    println!("wrote {} files to {}", written.len(), dir.display());
    Ok(report.passed())
}

fn list() {
    println!("surfaces:");
    for (name, params) in SURFACE_CATALOG {
        println!("  {name:<22} {params}");
    }
    println!("scalar fields:");
    for (name, params) in SCALAR_CATALOG {
        println!("  {name:<22} {params}");
    }
    println!("vector fields:");
    for (name, params) in VECTOR_CATALOG {
        println!("  {name:<22} {params}");
    }
    println!("constitutive sets:");
    for cs in ConstitutiveSet::catalog() {
        let laws = serde_json::to_string(&cs.laws()).unwrap_or_default();
        println!("  {:<22} e1..e4 = {laws}", cs.name);
    }
    println!("suites:");
    for s in Suite::ALL {
        println!("  {}", s.name());
    }
}

fn orders(report: PathBuf) -> surfcalc_core::Result<()> {
    let text = std::fs::read_to_string(&report)
        .map_err(|e| surfcalc_core::Error::Io(format!("{}: {e}", report.display())))?;
    let rows = rows_from_csv(&text)?;
    print!("{}", format_summary(&summarize(&rows)));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, threads } => run(scenario, out, threads),
        Command::List => {
            list();
            Ok(true)
        }
        Command::Orders { report } => orders(report).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
