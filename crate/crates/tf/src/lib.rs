//! Command-line front end for `tf-core`.

pub mod commands;
pub mod doc;
pub mod report;
pub mod selftest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tf_core::manifolds::Level;
use tf_core::Bounds;

pub use report::{Report, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "tf", version, about = "Quadratic functions, linking forms and 2-connected manifolds")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest finite group handled by exhaustive enumeration.
    #[arg(long, global = true, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    pub oracle_cap: u64,
    /// Largest lattice rank for isometry search and realization.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank_bound: u64,
    /// Largest absolute entry tried by bounded searches.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(i64).range(1..))]
    pub entry_bound: i64,
    /// Exit with status 1 on negative verdicts.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

impl Cli {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            oracle_cap: self.oracle_cap,
            rank_bound: self.rank_bound as usize,
            entry_bound: self.entry_bound,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integral quadratic functions {"gram", "alpha"}.
    Qform {
        #[command(subcommand)]
        cmd: QformCmd,
    },
    /// Linking forms {"orders", "b"}.
    Lform {
        #[command(subcommand)]
        cmd: LformCmd,
    },
    /// Quadratic linking functions {"orders", "b", "q"}.
    Qlf {
        #[command(subcommand)]
        cmd: QlfCmd,
    },
    /// 2-connected 7- and 15-manifolds {"dim", "presentation", "sigma_p_exotic"}.
    Manifold {
        #[command(subcommand)]
        cmd: ManifoldCmd,
    },
    /// S³-bundles over S⁴ {"m", "n"}.
    Bundle {
        #[command(subcommand)]
        cmd: BundleCmd,
    },
    /// Brute-force isometry searches.
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Seeded randomized self-checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases per check.
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(1..))]
        cases: u64,
    },
    /// Same as `qform glue`.
    #[command(hide = true)]
    Glue(GlueArgs),
}

#[derive(Debug, Args)]
pub struct Pair {
    pub first: PathBuf,
    pub second: PathBuf,
}

#[derive(Debug, Args)]
pub struct GlueArgs {
    pub first: PathBuf,
    pub second: PathBuf,
    /// Boundary isometry {"images"}: images of the generators of ∂κ₀ in ∂κ₁.
    #[arg(long)]
    pub theta: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum QformCmd {
    /// Flavor, signature, boundary group, b, q, β, K and s̄.
    Invariants { input: PathBuf },
    /// Bounded lattice isometry search.
    Isometric {
        #[command(flatten)]
        pair: Pair,
        /// Also require the isometry to be the identity mod N on the linear terms.
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Glue κ₀ and κ₁⁻ along a boundary isometry.
    Glue(GlueArgs),
    /// Split a nonsingular function along a sublattice {"basis"}.
    Split {
        input: PathBuf,
        #[arg(long)]
        h0: PathBuf,
        /// Basis of the orthogonal complement; computed when omitted.
        #[arg(long)]
        h1: Option<PathBuf>,
    },
    /// Stable equivalence of presentations.
    Stable(Pair),
}

#[derive(Debug, Subcommand)]
pub enum LformCmd {
    /// Group, KK invariants and primary parts.
    Invariants { input: PathBuf },
    /// Isometry via KK invariants.
    Isometric {
        #[command(flatten)]
        pair: Pair,
        /// Confirm the verdict by brute force.
        #[arg(long)]
        cross_validate: bool,
    },
    /// KK invariants only.
    Kk { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum QlfCmd {
    /// Gauss sum, K, Wilkens β and ambiguity.
    Invariants { input: PathBuf },
    /// Isometry via (b, β) and K.
    Isometric(Pair),
    /// The translate q_a(x) = q(x) + b(x, a).
    Translate {
        input: PathBuf,
        /// Coordinates of a, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        by: Vec<i64>,
    },
    /// A characteristic presentation with the given boundary.
    Realize { input: PathBuf },
    /// A named generator such as A(2,3,5), E0(2) or E1(3).
    Catalog {
        name: String,
        /// Translation applied to the named refinement, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        refine: Option<Vec<i64>>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ManifoldCmd {
    /// Family, Wilkens triple, s̄ and s₁.
    Invariants { input: PathBuf },
    /// Compare two manifolds at a level.
    Compare {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_parser = parse_level, default_value = "diffeo")]
        level: Level,
    },
    /// The orientation-reversed manifold.
    Reverse { input: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum BundleCmd {
    /// Invariants of P_{m,n}, from `M N` or --input.
    Invariants {
        #[arg(allow_negative_numbers = true)]
        values: Vec<i64>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Compare P_{m0,n0} with P_{m1,n1}, from `M0 N0 M1 N1` or two --input documents.
    Compare {
        #[arg(allow_negative_numbers = true)]
        values: Vec<i64>,
        #[arg(long)]
        input: Vec<PathBuf>,
        #[arg(long, value_parser = parse_level, default_value = "diffeo")]
        level: Level,
    },
    /// Cross-check the congruence classifier against the invariant classifier.
    Sweep {
        #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(i64).range(1..))]
        max_n: i64,
        /// Levels to check (all when omitted).
        #[arg(long, value_parser = parse_level)]
        level: Vec<Level>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Exhaustive isometry of quadratic linking functions.
    Qlf(Pair),
    /// Exhaustive isometry of linking forms.
    Lform(Pair),
    /// Exhaustive isometry of the Wilkens pairs (b, β) of two quadratic linking functions.
    Wilkens(Pair),
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.replace('-', "_").parse().map_err(|_| {
        let names: Vec<_> = Level::ALL.iter().map(|l| l.name()).collect();
        format!("unknown level {s:?}; expected one of {}", names.join(", "))
    })
}

/// Failure before a verdict was reached.
#[derive(Debug)]
pub enum CliError {
    /// Malformed input: exit 2.
    Input(String),
    /// Cap exceeded, unsupported or undecided: exit 3.
    Limit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Limit(m) => write!(f, "limit reached: {m}"),
        }
    }
}

impl From<doc::DocError> for CliError {
    fn from(e: doc::DocError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<tf_core::Error> for CliError {
    fn from(e: tf_core::Error) -> Self {
        use tf_core::Error as E;
        match e {
            E::CapExceeded { .. } | E::RankBound { .. } | E::NotFound | E::Unsupported(_) | E::Snap { .. } => {
                CliError::Limit(e.to_string())
            }
            E::Inconsistent(_) => CliError::Limit(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

/// Parses `args`, runs one subcommand and prints its report. Returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::dispatch(&cli) {
        Ok(report) => {
            // A closed pipe (`tf ... | head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout().lock(), "{}", report.render(cli.format));
            match report.status {
                Status::Positive => 0,
                Status::Negative if cli.strict || matches!(cli.command, Command::Selftest { .. }) => 1,
                Status::Negative => 0,
                Status::Undecided => 3,
            }
        }
        Err(e) => {
            eprintln!("tf: {e}");
            e.exit_code()
        }
    }
}
