//! `beauville` — verifier CLI for Beauville structures and strong
//! reality in finite p-groups.
//!
//! Every run prints one JSON report to stdout and a short human summary
//! to stderr.  Exit codes: 0 all checks verified, 1 a counterexample was
//! found, 2 usage or parameter error, 3 a sampling budget was exceeded
//! before reaching a decision.  With equal parameters and `--seed`, the
//! report is byte-identical across runs except for `elapsed_ms`.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use beauville_core::families::FamilyParams;

use commands::{Body, ClassifyMode, CoverageMode, Failure};
use report::Report;

#[derive(Parser)]
#[command(name = "beauville", version, about = "Beauville structure and strong-reality verifier")]
struct Cli {
    /// Seed for all randomized searches (default: $BEAUVILLE_SEED, else 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite against a group family.
    #[command(subcommand)]
    Verify(VerifySuite),
    /// Search a group for a Beauville structure (and witness, where available).
    FindStructure(FindArgs),
    /// Re-check a witness file produced by find-structure.
    VerifyWitness(WitnessArgs),
}

#[derive(Subcommand)]
enum VerifySuite {
    /// No 2-group of nilpotency class 2 admits a Beauville structure.
    #[command(name = "no-class2-2group")]
    NoClass2TwoGroup {
        /// Largest group order to cover (exhaustive per group).
        #[arg(long)]
        max_order: u64,
    },
    /// The split metacyclic group of order p^2e is Beauville iff p ≥ 5.
    #[command(name = "metacyclic-beauville")]
    MetacyclicBeauville {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        i: u32,
    },
    /// The power-subgroup criterion matches exhaustive search on class-2 groups.
    #[command(name = "class2-criterion")]
    Class2Criterion {
        #[arg(long)]
        p: u64,
        /// Largest group order to cover.
        #[arg(long)]
        max_order: u64,
    },
    /// The parametrized automorphism family is sound and complete.
    #[command(name = "aut-family")]
    AutFamily(FamilyArgs),
    /// Every Beauville structure of the group is non-strongly-real.
    #[command(name = "non-strongly-real")]
    NonStronglyReal(NonStronglyRealArgs),
    /// Every Beauville structure of the triangle-quotient 2-group is strongly real.
    #[command(name = "strongly-real")]
    StronglyReal(StronglyRealArgs),
    /// Structural identities of the triangle-quotient 2-group.
    #[command(name = "identities")]
    Identities {
        /// Exponent parameter (group order 2^(5e−3)); 2 or 3.
        #[arg(long)]
        e: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Metacyclic,
    Class2FiveTuple,
    Class2Beauville,
    SpecialClass2,
    TriangleQuotient,
}

/// A group family plus its numeric parameters.  Which flags are required
/// depends on --family; stray flags are rejected.
#[derive(Args)]
struct FamilyArgs {
    /// Group family to build.
    #[arg(long, value_enum)]
    family: FamilyName,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    i: Option<u32>,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    alpha: Option<u32>,
    #[arg(long)]
    beta: Option<u32>,
    #[arg(long)]
    gamma: Option<u32>,
    #[arg(long)]
    rho: Option<u32>,
    #[arg(long)]
    sigma: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
}

impl FamilyArgs {
    fn to_params(&self) -> Result<FamilyParams, Failure> {
        fn need<T: Copy>(v: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
            v.ok_or_else(|| Failure::Invalid(format!("--family {family} requires --{flag}")))
        }
        fn reject<T>(v: Option<T>, flag: &str, family: &str) -> Result<(), Failure> {
            if v.is_some() {
                return Err(Failure::Invalid(format!(
                    "--{flag} does not apply to --family {family}"
                )));
            }
            Ok(())
        }
        let params = match self.family {
            FamilyName::Metacyclic => {
                let f = "metacyclic";
                for (set, flag) in [
                    (self.j.is_some(), "j"),
                    (self.k.is_some(), "k"),
                    (self.alpha.is_some(), "alpha"),
                    (self.beta.is_some(), "beta"),
                    (self.gamma.is_some(), "gamma"),
                    (self.n.is_some(), "n"),
                    (self.r.is_some(), "r"),
                ] {
                    reject(set.then_some(()), flag, f)?;
                }
                reject(self.rho, "rho", f)?;
                reject(self.sigma, "sigma", f)?;
                FamilyParams::Metacyclic {
                    p: need(self.p, "p", f)?,
                    e: need(self.e, "e", f)?,
                    i: need(self.i, "i", f)?,
                }
            }
            FamilyName::Class2FiveTuple => {
                let f = "class2-five-tuple";
                for (set, flag) in [
                    (self.e.is_some(), "e"),
                    (self.i.is_some(), "i"),
                    (self.j.is_some(), "j"),
                    (self.k.is_some(), "k"),
                    (self.n.is_some(), "n"),
                    (self.r.is_some(), "r"),
                ] {
                    reject(set.then_some(()), flag, f)?;
                }
                FamilyParams::Class2FiveTuple {
                    p: need(self.p, "p", f)?,
                    alpha: need(self.alpha, "alpha", f)?,
                    beta: need(self.beta, "beta", f)?,
                    gamma: need(self.gamma, "gamma", f)?,
                    rho: need(self.rho, "rho", f)?,
                    sigma: need(self.sigma, "sigma", f)?,
                }
            }
            FamilyName::Class2Beauville => {
                let f = "class2-beauville";
                for (set, flag) in [
                    (self.alpha.is_some(), "alpha"),
                    (self.beta.is_some(), "beta"),
                    (self.gamma.is_some(), "gamma"),
                    (self.n.is_some(), "n"),
                    (self.r.is_some(), "r"),
                ] {
                    reject(set.then_some(()), flag, f)?;
                }
                reject(self.rho, "rho", f)?;
                reject(self.sigma, "sigma", f)?;
                FamilyParams::Class2Beauville {
                    p: need(self.p, "p", f)?,
                    e: need(self.e, "e", f)?,
                    i: need(self.i, "i", f)?,
                    j: need(self.j, "j", f)?,
                    k: need(self.k, "k", f)?,
                }
            }
            FamilyName::SpecialClass2 => {
                let f = "special-class2";
                for (set, flag) in [
                    (self.e.is_some(), "e"),
                    (self.i.is_some(), "i"),
                    (self.j.is_some(), "j"),
                    (self.k.is_some(), "k"),
                    (self.alpha.is_some(), "alpha"),
                    (self.beta.is_some(), "beta"),
                    (self.gamma.is_some(), "gamma"),
                ] {
                    reject(set.then_some(()), flag, f)?;
                }
                reject(self.rho, "rho", f)?;
                reject(self.sigma, "sigma", f)?;
                FamilyParams::SpecialClass2 {
                    p: need(self.p, "p", f)?,
                    n: need(self.n, "n", f)?,
                    r: need(self.r, "r", f)?,
                }
            }
            FamilyName::TriangleQuotient => {
                let f = "triangle-quotient";
                for (set, flag) in [
                    (self.p.is_some(), "p"),
                    (self.i.is_some(), "i"),
                    (self.j.is_some(), "j"),
                    (self.k.is_some(), "k"),
                    (self.alpha.is_some(), "alpha"),
                    (self.beta.is_some(), "beta"),
                    (self.gamma.is_some(), "gamma"),
                    (self.n.is_some(), "n"),
                    (self.r.is_some(), "r"),
                ] {
                    reject(set.then_some(()), flag, f)?;
                }
                reject(self.rho, "rho", f)?;
                reject(self.sigma, "sigma", f)?;
                FamilyParams::TriangleQuotient {
                    e: need(self.e, "e", f)?,
                }
            }
        };
        Ok(params)
    }
}

#[derive(Args)]
struct NonStronglyRealArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Classify every structure (the default; spelled out for clarity).
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    /// Sample this many structures instead of classifying all of them.
    #[arg(long)]
    samples: Option<u64>,
}

#[derive(Args)]
struct StronglyRealArgs {
    /// Exponent parameter of the triangle-quotient group (order 2^(5e−3)).
    #[arg(long)]
    e: u32,
    /// Check every structure (e = 2 only).
    #[arg(long, conflicts_with = "samples")]
    all: bool,
    /// Number of structures to sample.
    #[arg(long, default_value_t = 100)]
    samples: u64,
}

#[derive(Args)]
struct FindArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Seeded random search instead of the exhaustive scan.
    #[arg(long)]
    random: bool,
    /// Candidate budget for the random search (default 10000).
    #[arg(long, requires = "random")]
    budget: Option<u64>,
    /// Write the structure (and witness, if built) to this JSON file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Witness file produced by find-structure --out.
    #[arg(long)]
    file: PathBuf,
}

fn run(command: Command, seed: u64) -> Result<Body, Failure> {
    match command {
        Command::Verify(VerifySuite::NoClass2TwoGroup { max_order }) => {
            commands::no_class2_2group(max_order)
        }
        Command::Verify(VerifySuite::MetacyclicBeauville { p, e, i }) => {
            commands::metacyclic_beauville(p, e, i)
        }
        Command::Verify(VerifySuite::Class2Criterion { p, max_order }) => {
            commands::class2_criterion(p, max_order)
        }
        Command::Verify(VerifySuite::AutFamily(args)) => {
            commands::aut_family(args.to_params()?, seed)
        }
        Command::Verify(VerifySuite::NonStronglyReal(args)) => {
            let mode = match args.samples {
                Some(k) => ClassifyMode::Sampled(k),
                None => ClassifyMode::Exhaustive,
            };
            commands::non_strongly_real(args.family.to_params()?, mode, seed)
        }
        Command::Verify(VerifySuite::StronglyReal(args)) => {
            let mode = if args.all {
                CoverageMode::All
            } else {
                CoverageMode::Sampled(args.samples)
            };
            commands::strongly_real(args.e, mode, seed)
        }
        Command::Verify(VerifySuite::Identities { e }) => commands::identities(e, seed),
        Command::FindStructure(args) => commands::find_structure(
            args.family.to_params()?,
            args.random,
            args.budget,
            args.out,
            seed,
        ),
        Command::VerifyWitness(args) => commands::verify_witness_file(&args.file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = match cli.seed {
        Some(s) => s,
        None => match std::env::var("BEAUVILLE_SEED") {
            Ok(raw) => match raw.parse() {
                Ok(s) => s,
                Err(_) => {
                    eprintln!("error: BEAUVILLE_SEED must be an unsigned integer, got {raw:?}");
                    return ExitCode::from(2);
                }
            },
            Err(_) => 0,
        },
    };
    if let Some(w) = cli.workers {
        if w > 0 {
            // Ignore the error: the global pool can only be set once, and a
            // second initialization simply keeps the first configuration.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
        }
    }
    let workers = rayon::current_num_threads();
    let start = Instant::now();
    match run(cli.command, seed) {
        Ok(body) => {
            let report = Report {
                schema: report::SCHEMA_VERSION,
                command: body.command,
                params: body.params,
                group_order: body.group_order,
                checks: body.checks,
                elapsed_ms: start.elapsed().as_millis() as u64,
                seed,
                workers,
            };
            report.emit();
            ExitCode::from(report.exit_code())
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
