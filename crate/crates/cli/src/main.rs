mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "nilkit", version, about = "Finite cubespaces and nilspaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct Global {
    /// Highest cube dimension to build or load.
    #[arg(long, global = true)]
    pub lmax: Option<usize>,
    /// Size guard on enumerations (also NILKIT_GUARD).
    #[arg(long, global = true)]
    pub guard: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML file with lmax, guard and seed.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a cubespace.
    #[command(subcommand)]
    Build(Build),
    /// Run axiom checks on a cubespace and print a certificate.
    Verify(Verify),
    /// Canonical factors and structure groups.
    Factor(Factor),
    /// Check, classify or decompose a map of cubespaces.
    Fibration(Fibration),
    /// Derivatives, cocycle checks and the functional equation.
    #[command(subcommand)]
    Cocycle(Cocycle),
    /// Translation groups and translation checks.
    Translations(Translations),
    /// Regionally proximal relations and quotients of an action.
    Rp(Rp),
    /// Named example instances.
    #[command(subcommand)]
    Corpus(Corpus),
}

#[derive(Subcommand, Debug)]
pub enum Build {
    /// Host–Kra nilspace G/Γ of a filtered group.
    Hk {
        #[arg(long)]
        group: PathBuf,
        /// `lcs` or a filtration file.
        #[arg(long, default_value = "lcs")]
        filtration: String,
        /// `trivial` or a comma-separated list of generators of Γ.
        #[arg(long, default_value = "trivial")]
        gamma: String,
    },
    /// D_s(A) for a finite abelian group A.
    Ds {
        /// Invariant factors, e.g. 2,2.
        #[arg(long, value_delimiter = ',', conflicts_with = "abelian")]
        factors: Option<Vec<usize>>,
        /// Group file of an abelian group.
        #[arg(long)]
        abelian: Option<PathBuf>,
        #[arg(long)]
        degree: usize,
    },
    /// Dynamical cubespace of a group action.
    Dynamical {
        #[arg(long)]
        action: PathBuf,
    },
    /// All configurations on n points.
    Full {
        #[arg(long)]
        points: usize,
    },
}

#[derive(Args, Debug)]
pub struct Verify {
    pub input: PathBuf,
    /// Degree determination with fibrancy and uniqueness scans.
    #[arg(long)]
    pub nilspace: bool,
    /// s-ergodicity.
    #[arg(long)]
    pub ergodic: Option<usize>,
    /// Glueing up to ℓmax.
    #[arg(long)]
    pub glueing: bool,
    /// Weak structure certificate at the nilspace degree.
    #[arg(long)]
    pub weak_structure: bool,
}

#[derive(Args, Debug)]
pub struct Factor {
    pub input: PathBuf,
    /// The tower of canonical factors.
    #[arg(long)]
    pub tower: bool,
    /// The canonical relation ∼_s.
    #[arg(long)]
    pub relation: Option<usize>,
    /// The quotient by ∼_s as a cubespace file.
    #[arg(long)]
    pub quotient: Option<usize>,
    /// The structure group A_s.
    #[arg(long)]
    pub structure_group: Option<usize>,
}

#[derive(Args, Debug)]
pub struct Fibration {
    pub map: PathBuf,
    #[arg(long)]
    pub classify: Option<usize>,
    #[arg(long)]
    pub decompose: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Cocycle {
    /// ∂^ℓ f of a function file.
    Derivative {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// ∂^ℓ g for a seeded random g into the given group.
    Random {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_delimiter = ',')]
        factors: Vec<usize>,
        #[arg(long)]
        level: usize,
    },
    /// Additivity check.
    Check {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
    },
    /// Solve ρ = ∂^ℓ f + ρ̃∘φ.
    Solve {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct Translations {
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Check one bijection, given as comma-separated images.
    #[arg(long, value_delimiter = ',')]
    pub check: Option<Vec<u32>>,
    /// Aut_1 ⊇ Aut_2 ⊇ … with the nesting and commutator checks.
    #[arg(long)]
    pub filtration: bool,
}

#[derive(Args, Debug)]
pub struct Rp {
    pub action: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    /// Build X/RP^s and verify it.
    #[arg(long)]
    pub quotient: bool,
}

#[derive(Subcommand, Debug)]
pub enum Corpus {
    List,
    Get { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(commands::run(cli))
}
