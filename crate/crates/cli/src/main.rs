//! Command-line front end: one subcommand per pipeline stage, JSON on
//! stdout, diagnostics on stderr. Exit code 0 on success, 1 when a
//! verification finds a nonzero residual, 2 on configuration errors.

use clap::{Args, Parser, Subcommand};
use cli::suite::{run_battery, Profile};
use cli::{CliError, Outcome};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fermat-mirror", version, about = "Exact mirror-symmetry pipeline for Fermat hypersurfaces")]
struct Cli {
    /// Worker threads for parallel sections; defaults to FERMAT_MIRROR_JOBS
    /// or the core count.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Exponents {
    /// Fermat exponents, comma separated, e.g. 3,3,3
    #[arg(long, value_delimiter = ',', required = true)]
    exponents: Vec<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Weight-system combinatorics: Milnor number, ghost box, sectors
    Weights {
        #[command(flatten)]
        exponents: Exponents,
        /// milnor | box | narrow | sectors
        #[arg(long)]
        emit: String,
    },
    /// State-space bases and pairings on either side of the mirror
    State {
        /// gw | lg
        #[arg(long)]
        side: String,
        #[command(flatten)]
        exponents: Exponents,
        /// basis | gram | degrees
        #[arg(long)]
        emit: String,
    },
    /// Jacobi-ring computations for the deformed potential
    Jacobi {
        #[command(flatten)]
        exponents: Exponents,
        /// Deformation parameter as NUM/DEN; omitted means the Fermat point
        #[arg(long)]
        q: Option<String>,
        /// gram | normal-form:<poly>
        #[arg(long)]
        emit: String,
    },
    /// Hypergeometric series on either side of the mirror
    #[command(subcommand)]
    Ifunc(IfuncCommand),
    /// Apply a quantized upper-triangular symplectic series to a potential
    Quantize {
        #[arg(long)]
        rank: usize,
        /// JSON file with {"gram": ..., "mats": ...}
        #[arg(long)]
        r_matrix: PathBuf,
        /// JSON file with the tame potential
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        genus_cap: u32,
    },
    /// Assemble the ancestor potential from semisimple frame data
    Ancestor {
        /// JSON file with {"u", "delta", "psi", "r_mats"}
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        genus_cap: u32,
        #[arg(long)]
        jet_cap: u32,
    },
    /// Weight filtrations and the spectrum of the singularity
    Filtration {
        #[command(flatten)]
        exponents: Exponents,
        /// weights | u-filtration | spectrum
        #[arg(long)]
        emit: String,
    },
    /// Complete a coefficient table from the regularity recursion
    Reconstruct {
        #[command(flatten)]
        exponents: Exponents,
        /// Caps as m=2,n=2,j=3
        #[arg(long)]
        caps: String,
        /// Optional JSON seed file for the negative-power line
        #[arg(long)]
        b_seed: Option<PathBuf>,
        /// table | residual
        #[arg(long)]
        emit: String,
    },
    /// The elliptic curve: series solutions, tau, monodromy
    E6 {
        /// Truncation order in Q
        #[arg(long)]
        order: u32,
        /// series | wronskian | tau-grid | monodromy:<path.json>
        #[arg(long)]
        emit: String,
    },
    /// Run the consolidated identity battery
    CheckSuite {
        /// fast | full
        #[arg(long, default_value = "fast")]
        profile: String,
        /// Mark the named check failed without running it (for exercising
        /// the failure path)
        #[arg(long)]
        inject_failure: Option<String>,
    },
}

#[derive(Subcommand)]
enum IfuncCommand {
    /// The A-side series with its degree shifts
    Gw {
        #[command(flatten)]
        exponents: Exponents,
        #[arg(long)]
        q_order: u32,
        #[arg(long)]
        t_order: u32,
        /// Degree-shift vector, comma separated
        #[arg(long, value_delimiter = ',')]
        beta: Option<Vec<u64>>,
        /// series | mirror-map | pairing-check
        #[arg(long)]
        emit: String,
    },
    /// The Landau-Ginzburg series with its ghost shifts
    Lg {
        #[command(flatten)]
        exponents: Exponents,
        #[arg(long)]
        order: u32,
        /// Ghost-shift vector, comma separated
        #[arg(long)]
        e: Option<String>,
        /// Exponent cap for the weighted variant, as NUM/DEN
        #[arg(long)]
        epsilon: Option<String>,
        /// series | gkz | mirror-map | pairing
        #[arg(long)]
        emit: String,
    },
}

fn parse_shift(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad shift entry \"{part}\"")))
        })
        .collect()
}

fn check_suite(profile: &str, inject: Option<&str>) -> Result<Outcome, CliError> {
    let profile = Profile::parse(profile)
        .ok_or_else(|| CliError::Config(format!("unknown profile \"{profile}\"; use fast or full")))?;
    if let Some(name) = inject {
        if !cli::suite::known_check(name) {
            return Err(CliError::Config(format!("unknown check \"{name}\"")));
        }
    }
    let results = run_battery(profile, inject);
    let passed = results.iter().all(|r| r.passed);
    let checks: Vec<_> = results
        .iter()
        .map(|r| {
            json!({
                "name": r.name,
                "identity": r.identity,
                "passed": r.passed,
                "detail": r.detail,
                "millis": r.millis,
            })
        })
        .collect();
    let document = cli::emit::with_header(
        "check-suite",
        json!({
            "profile": if profile == Profile::Full { "full" } else { "fast" },
            "checks": checks,
            "all_passed": passed,
        }),
    );
    Ok(Outcome::checked(document, passed))
}

fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Weights { exponents, emit } => cli::run::weights(&exponents.exponents, emit),
        Command::State { side, exponents, emit } => {
            cli::run::state(side, &exponents.exponents, emit)
        }
        Command::Jacobi { exponents, q, emit } => {
            cli::run::jacobi(&exponents.exponents, q.as_deref(), emit)
        }
        Command::Ifunc(IfuncCommand::Gw { exponents, q_order, t_order, beta, emit }) => {
            cli::run::ifunc_gw(&exponents.exponents, *q_order, *t_order, beta.clone(), emit)
        }
        Command::Ifunc(IfuncCommand::Lg { exponents, order, e, epsilon, emit }) => {
            let e = e.as_deref().map(parse_shift).transpose()?;
            cli::run::ifunc_lg(&exponents.exponents, *order, e, epsilon.as_deref(), emit)
        }
        Command::Quantize { rank, r_matrix, potential, genus_cap } => {
            cli::run::quantize(*rank, r_matrix, potential, *genus_cap)
        }
        Command::Ancestor { data, genus_cap, jet_cap } => {
            cli::run::ancestor_assembly(data, *genus_cap, *jet_cap)
        }
        Command::Filtration { exponents, emit } => {
            cli::run::filtration(&exponents.exponents, emit)
        }
        Command::Reconstruct { exponents, caps, b_seed, emit } => {
            cli::run::reconstruct(&exponents.exponents, caps, b_seed.as_deref(), emit)
        }
        Command::E6 { order, emit } => cli::run::e6(*order, emit),
        Command::CheckSuite { profile, inject_failure } => {
            check_suite(profile, inject_failure.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs.or_else(|| {
        std::env::var("FERMAT_MIRROR_JOBS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(jobs) = jobs {
        if jobs == 0 {
            eprintln!("--jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("cannot configure the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli.command) {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.document).unwrap());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
