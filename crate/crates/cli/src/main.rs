//! `conlab`: batch verifier for geodesic mappings, concircular fields, cones
//! and the Jordan algebra of Sinyukov solutions.
//!
//! Every invocation prints one JSON document (or a table with `--human`) and
//! exits 0 on pass, 1 on a failed check, 2 on usage or IO errors and 3 on
//! numeric degeneracy.

mod commands;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use conlab_core::geometry::{GridConfig, DEFAULT_SEED};

use output::{exit, Document};

#[derive(Debug, Parser)]
#[command(name = "conlab", version, about = "Residual verifiers for geodesic mappings")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Seed of the random sample points.
    #[arg(long, global = true, env = "CONLAB_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of random sample points.
    #[arg(long, global = true, default_value_t = 200)]
    grid_size: usize,
    /// Lattice points per axis (0 disables the lattice).
    #[arg(long, global = true, default_value_t = 8)]
    lattice: usize,
    /// Fraction of each domain interval trimmed from both ends.
    #[arg(long, global = true, default_value_t = 0.05)]
    inset: f64,
    /// Tolerance for every equation without a specific override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Per-equation tolerance, e.g. `--tol-eq concircular=1e-7`. Repeatable.
    #[arg(long = "tol-eq", global = true, value_name = "EQUATION=TOL", value_parser = parse_override)]
    tol_eq: Vec<(String, f64)>,
    /// Print a table instead of JSON.
    #[arg(long, global = true)]
    human: bool,
}

fn parse_override(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected EQUATION=TOL, got `{s}`"))?;
    let v: f64 = value.trim().parse().map_err(|e| format!("bad tolerance `{value}`: {e}"))?;
    Ok((name.trim().to_string(), v))
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Residual checks of fields and metric pairs.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Cone construction and lifts.
    #[command(subcommand)]
    Cone(ConeCmd),
    /// Products and axioms of the algebra of solutions.
    #[command(subcommand)]
    Jordan(JordanCmd),
    /// Geodesic integration and mapping checks.
    #[command(subcommand)]
    Geodesic(GeodesicCmd),
    /// Transfers and parallel sequences.
    #[command(subcommand)]
    Fields(FieldsCmd),
    /// Built-in analytic examples.
    #[command(subcommand)]
    Catalog(CatalogCmd),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// `∇φ = ρg`, plus classification.
    Concircular {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        field: PathBuf,
        /// K for the special identity when the file declares none.
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// The Sinyukov equation for `a` and `λ`.
    Sinyukov {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        field: PathBuf,
    },
    /// Sinyukov plus the V_n(K) closure equations.
    Vnk {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// The K = 0 system: Sinyukov, `∇λ = μg`, constant μ.
    Vn0 {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        field: PathBuf,
    },
    /// Levi-Civita equation for a pair of metrics.
    Levicivita {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        gbar: PathBuf,
        /// Covector file for ψ; derived from the determinants when omitted.
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Quadratic identities of a solution; selects e when not given.
    Corollary1 {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        e: Option<i32>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ConeCmd {
    /// Writes the cone metric and its JSON sidecar.
    Build {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        k: f64,
        /// Cone metric output; the sidecar goes next to it with a `.json` extension.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        x0_domain: Option<Vec<f64>>,
        /// Build the positive-norm variant.
        #[arg(long)]
        flipped: bool,
    },
    /// Lifts a special concircular field to a parallel covector.
    LiftField {
        /// Cone sidecar JSON written by `cone build`.
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lifts a V_n(K) solution to a parallel symmetric form.
    LiftSolution {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parallelity of a covector or lifted form on the cone.
    CheckParallel {
        #[arg(long)]
        cone: PathBuf,
        #[arg(long)]
        field: PathBuf,
    },
    /// Connection block structure and convergence of `dx⁰`.
    CheckConvergent {
        #[arg(long)]
        cone: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum JordanCmd {
    /// Product of two solutions, re-verified.
    Multiply {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Commutativity, Jordan identity and unit laws.
    CheckAxioms {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long = "element", required = true)]
        elements: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// Lift of every product against the bracket of the lifts.
    CheckIsomorphism {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long = "element", required = true)]
        elements: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// Products with concircular generators stay in their span.
    CheckIdeal {
        #[arg(long)]
        metric: PathBuf,
        /// Concircular field files generating the subspace.
        #[arg(long = "generator", required = true)]
        generators: Vec<PathBuf>,
        #[arg(long = "element", required = true)]
        elements: Vec<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        k: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct Initial {
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    x0: Vec<f64>,
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    v0: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
}

#[derive(Debug, Subcommand)]
pub enum GeodesicCmd {
    /// RK4 trajectory; TSV rows `t x... v...` go to `--out`.
    Integrate {
        #[arg(long)]
        metric: PathBuf,
        #[command(flatten)]
        initial: Initial,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether a geodesic of `g` is a reparametrized geodesic of `gbar`.
    MapCheck {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        gbar: PathBuf,
        #[command(flatten)]
        initial: Initial,
    },
}

#[derive(Debug, Subcommand)]
pub enum FieldsCmd {
    /// Transfers a concircular field of `g` to `gbar` and checks the image.
    TransferRho {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        gbar: PathBuf,
        #[arg(long)]
        field: PathBuf,
        /// Point at which `ρ̄` is reported.
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
    },
    /// Parallel covectors generated by a K = 0 solution.
    BuildSequence {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Covector file with the parallel starting field.
        #[arg(long)]
        phi: PathBuf,
        #[arg(long, num_args = 1.., allow_negative_numbers = true)]
        base_point: Option<Vec<f64>>,
        #[arg(long, default_value_t = 8)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogCmd {
    /// Names and summaries of the built-in entries.
    List,
    /// Writes an entry's files into a directory.
    Emit { name: String, dir: PathBuf },
    /// Runs the checks an entry declares (all entries when no name is given).
    Check { name: Option<String> },
}

/// Grid and tolerance settings shared by all commands.
pub struct RunConfig {
    pub grid: GridConfig,
    tol: Option<f64>,
    overrides: BTreeMap<String, f64>,
}

impl RunConfig {
    fn from_args(a: &RunArgs) -> Result<Self> {
        let grid = GridConfig {
            seed: a.seed,
            random: a.grid_size,
            lattice: a.lattice,
            inset: a.inset,
        };
        grid.validate()?;
        let mut overrides = BTreeMap::new();
        for t in a.tol.iter().chain(a.tol_eq.iter().map(|(_, v)| v)) {
            if !(t.is_finite() && *t > 0.0) {
                bail!("tolerances must be positive, got {t}");
            }
        }
        for (name, v) in &a.tol_eq {
            overrides.insert(name.clone(), *v);
        }
        Ok(RunConfig {
            grid,
            tol: a.tol,
            overrides,
        })
    }

    /// Tolerance for `equation`: a specific override, else `--tol`, else `default`.
    pub fn tol(&self, equation: &str, default: f64) -> f64 {
        self.overrides
            .get(equation)
            .copied()
            .or(self.tol)
            .unwrap_or(default)
    }
}

fn command_name(c: &Command) -> String {
    let (group, sub) = match c {
        Command::Verify(v) => (
            "verify",
            match v {
                VerifyCmd::Concircular { .. } => "concircular",
                VerifyCmd::Sinyukov { .. } => "sinyukov",
                VerifyCmd::Vnk { .. } => "vnk",
                VerifyCmd::Vn0 { .. } => "vn0",
                VerifyCmd::Levicivita { .. } => "levicivita",
                VerifyCmd::Corollary1 { .. } => "corollary1",
            },
        ),
        Command::Cone(v) => (
            "cone",
            match v {
                ConeCmd::Build { .. } => "build",
                ConeCmd::LiftField { .. } => "lift-field",
                ConeCmd::LiftSolution { .. } => "lift-solution",
                ConeCmd::CheckParallel { .. } => "check-parallel",
                ConeCmd::CheckConvergent { .. } => "check-convergent",
            },
        ),
        Command::Jordan(v) => (
            "jordan",
            match v {
                JordanCmd::Multiply { .. } => "multiply",
                JordanCmd::CheckAxioms { .. } => "check-axioms",
                JordanCmd::CheckIsomorphism { .. } => "check-isomorphism",
                JordanCmd::CheckIdeal { .. } => "check-ideal",
            },
        ),
        Command::Geodesic(v) => (
            "geodesic",
            match v {
                GeodesicCmd::Integrate { .. } => "integrate",
                GeodesicCmd::MapCheck { .. } => "map-check",
            },
        ),
        Command::Fields(v) => (
            "fields",
            match v {
                FieldsCmd::TransferRho { .. } => "transfer-rho",
                FieldsCmd::BuildSequence { .. } => "build-sequence",
            },
        ),
        Command::Catalog(v) => (
            "catalog",
            match v {
                CatalogCmd::List => "list",
                CatalogCmd::Emit { .. } => "emit",
                CatalogCmd::Check { .. } => "check",
            },
        ),
    };
    format!("{group} {sub}")
}

/// Maps a failure to its exit code and a short kind label.
fn classify(err: &anyhow::Error) -> (i32, &'static str) {
    use conlab_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::SingularMetric { .. } => (exit::DEGENERATE, "singular-metric"),
                E::Degenerate(_) => (exit::DEGENERATE, "degenerate"),
                E::Eval { .. } => (exit::DEGENERATE, "evaluation"),
                E::Precondition(_) => (exit::CHECK_FAILED, "precondition"),
                E::Io(_) => (exit::USAGE, "io"),
                E::Parse(_) | E::Format { .. } | E::UnknownVariable(_) => (exit::USAGE, "input"),
                E::Invalid(_) => (exit::USAGE, "invalid"),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return (exit::USAGE, "io");
        }
    }
    (exit::USAGE, "invalid")
}

fn run(cli: &Cli) -> (Document, i32) {
    let name = command_name(&cli.command);
    let result = RunConfig::from_args(&cli.run)
        .context("invalid run settings")
        .and_then(|cfg| commands::dispatch(&cli.command, &cfg));
    match result {
        Ok(outcome) => {
            let code = if outcome.pass { exit::PASS } else { exit::CHECK_FAILED };
            (Document::from_outcome(name, outcome), code)
        }
        Err(err) => {
            let (code, kind) = classify(&err);
            eprintln!("conlab: {err:#}");
            (Document::from_error(name, kind, format!("{err:#}")), code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (doc, code) = run(&cli);
    if cli.run.human {
        print!("{}", doc.to_table());
    } else {
        println!("{}", doc.to_json());
    }
    ExitCode::from(code as u8)
}
