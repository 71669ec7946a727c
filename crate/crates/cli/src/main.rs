use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use descent_core::arith::parse_rat;
use descent_core::census::{self, CensusError, FamilySpec, RunOptions};
use descent_core::curve::HyperellipticCurve;
use descent_core::jacobian::{ec_group_structure, jac_group_structure, EllipticCurve};
use descent_core::localsolve::{has_qp_points, has_real_points, is_els};
use descent_core::search::point_search;
use descent_core::sieve::{
    poonen_run, replay_recorded, rerun_matches, sieve_run, Mode, SieveCertificate, SieveProblem,
};
use descent_core::zerodim::{fixed_point_cover_check, quad_etale_hasse_check, PermGroupSpec};

const EXIT_EMPTY: u8 = 10;
const EXIT_ERROR: u8 = 2;
const EXIT_LOG_CORRUPTION: u8 = 3;

#[derive(Parser)]
#[command(name = "descent", version, about = "Local solvability, point search and Mordell-Weil sieving for y^2 = f(x)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print one local solvability verdict per line: place, solvable, witness.
    Local {
        #[command(flatten)]
        curve: CurveArg,
        /// Restrict to one place ("real" or a prime); default is every critical place.
        #[arg(long)]
        place: Option<String>,
    },
    /// Search rational points up to a height bound; prints a JSON list.
    Points {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, default_value_t = 100)]
        height: u64,
    },
    /// Invariant factors of J(F_p) (odd genus 2) or E(F_p).
    Group {
        #[command(flatten)]
        curve: CurveArg,
        /// Elliptic curve a2,a4,a6 instead of a hyperelliptic model.
        #[arg(long, conflicts_with = "f")]
        ec: Option<String>,
        #[arg(long)]
        p: u64,
    },
    /// Run a sieve problem (exit 0 = SURVIVORS, 10 = EMPTY, 2 = error).
    Sieve(SieveArgs),
    /// Family census with an append-only log.
    Census {
        #[command(subcommand)]
        command: CensusCommand,
    },
    /// Zero-dimensional checks.
    Zerodim {
        #[command(subcommand)]
        command: ZerodimCommand,
    },
}

#[derive(Args)]
struct CurveArg {
    /// Coefficients of f, constant term first, comma separated (rationals as a/b).
    #[arg(long, allow_hyphen_values = true)]
    f: Option<String>,
}

impl CurveArg {
    fn curve(&self) -> Result<HyperellipticCurve> {
        let Some(s) = &self.f else { bail!("--f is required") };
        let coeffs = parse_list(s)?;
        Ok(HyperellipticCurve::new(coeffs)?)
    }
}

fn parse_list(s: &str) -> Result<Vec<descent_core::arith::BigRat>> {
    s.split(',')
        .map(|t| parse_rat(t).map_err(anyhow::Error::msg))
        .collect()
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct SieveArgs {
    #[command(subcommand)]
    command: Option<SieveCommand>,
    /// SieveProblem JSON document.
    problem: Option<PathBuf>,
    /// Intersect images in the product of the groups instead of sieving cosets.
    #[arg(long)]
    poonen: bool,
    /// Also write the certificate here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SieveCommand {
    /// Upgrade an ELS_UNRESOLVED census record with an EMPTY certificate.
    Attach {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        id: Option<String>,
    },
    /// Re-run a certificate's problem and check the result is identical.
    Verify { cert: PathBuf },
}

#[derive(Subcommand)]
enum CensusCommand {
    Run {
        #[arg(long, value_delimiter = ',', default_value = "6")]
        degrees: Vec<usize>,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        range: Vec<i64>,
        #[arg(long, default_value_t = 12)]
        height: u64,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        genus: Option<u32>,
        #[arg(long)]
        no_dedupe: bool,
    },
    Summary { log: PathBuf },
}

#[derive(Subcommand)]
enum ZerodimCommand {
    /// Check the fixed-point lemma for the group generated by permutations of 1..n.
    CoverCheck {
        #[arg(long)]
        degree: usize,
        /// A generator as its image list, e.g. 2,3,1. Repeatable.
        #[arg(long = "gen")]
        generators: Vec<String>,
    },
    /// Local-global check for Q(√d1) ⊔ Q(√d2) ⊔ Q(√(d1·d2)).
    QuadHasse {
        #[arg(allow_negative_numbers = true)]
        d1: i64,
        #[arg(allow_negative_numbers = true)]
        d2: i64,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Local { curve, place } => {
            let c = curve.curve()?;
            match place.as_deref() {
                Some("real") => writeln!(io::stdout(), "{}", has_real_points(&c))?,
                Some(p) => {
                    let p: u64 = p.parse().context("place must be \"real\" or a prime")?;
                    writeln!(io::stdout(), "{}", has_qp_points(&c, p)?)?;
                }
                None => {
                    for v in is_els(&c)?.verdicts {
                        writeln!(io::stdout(), "{v}")?;
                    }
                }
            }
            Ok(0)
        }
        Command::Points { curve, height } => {
            print_json(&point_search(&curve.curve()?, height))?;
            Ok(0)
        }
        Command::Group { curve, ec, p } => {
            let (order, invariants) = if let Some(ec) = ec {
                let a = parse_list(&ec)?;
                let [a2, a4, a6] = <[_; 3]>::try_from(a).map_err(|_| anyhow::anyhow!("--ec needs a2,a4,a6"))?;
                let g = ec_group_structure(&EllipticCurve::new(a2, a4, a6), p)?;
                (g.structure.order(), g.structure.invariants().to_vec())
            } else {
                let g = jac_group_structure(&curve.curve()?, p)?;
                (g.structure.order(), g.structure.invariants().to_vec())
            };
            print_json(&serde_json::json!({ "p": p, "order": order, "invariants": invariants }))?;
            Ok(0)
        }
        Command::Sieve(args) => sieve(args),
        Command::Census { command } => match command {
            CensusCommand::Run { degrees, range, height, log, resume, genus, no_dedupe } => {
                let [lo, hi] = <[i64; 2]>::try_from(range).map_err(|_| anyhow::anyhow!("--range LO HI is required"))?;
                let spec = FamilySpec { degrees, lo, hi, genus, dedupe: !no_dedupe };
                let s = census::census_run(&spec, height, &log, &RunOptions { resume, max_new_records: None })?;
                print_json(&s)?;
                Ok(0)
            }
            CensusCommand::Summary { log } => {
                print_json(&census::summary(&log)?)?;
                Ok(0)
            }
        },
        Command::Zerodim { command } => match command {
            ZerodimCommand::CoverCheck { degree, generators } => {
                let generators = generators
                    .iter()
                    .map(|g| g.split(',').map(|t| t.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                print_json(&fixed_point_cover_check(&PermGroupSpec { degree, generators })?)?;
                Ok(0)
            }
            ZerodimCommand::QuadHasse { d1, d2 } => {
                print_json(&quad_etale_hasse_check(d1, d2)?)?;
                Ok(0)
            }
        },
    }
}

fn read_cert(path: &PathBuf) -> Result<SieveCertificate> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn sieve(args: SieveArgs) -> Result<u8> {
    match args.command {
        Some(SieveCommand::Attach { log, cert, id }) => {
            let c = read_cert(&cert)?;
            let rec = census::attach_sieve_result(&log, id.as_deref(), &c, Some(cert.display().to_string()))?;
            print_json(&rec)?;
            Ok(0)
        }
        Some(SieveCommand::Verify { cert }) => {
            let c = read_cert(&cert)?;
            let same = rerun_matches(&c)?;
            let mut report = serde_json::json!({ "rerun_identical": same, "digest": c.digest() });
            if c.parameters.mode == Mode::Sieve {
                let counts: Vec<u64> = c.per_prime.iter().map(|r| r.survivors_after).collect();
                report["replay_consistent"] = (replay_recorded(&c) == counts).into();
            }
            print_json(&report)?;
            Ok(if same { 0 } else { EXIT_ERROR })
        }
        None => {
            let Some(path) = args.problem else { bail!("a problem file is required") };
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let problem: SieveProblem = serde_json::from_str(&text)?;
            let cert = if args.poonen { poonen_run(&problem)? } else { sieve_run(&problem)? };
            let json = serde_json::to_string_pretty(&cert)?;
            if let Some(out) = args.out {
                fs::write(&out, &json)?;
            }
            writeln!(io::stdout().lock(), "{json}")?;
            Ok(if cert.is_empty() { EXIT_EMPTY } else { 0 })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let corrupt = matches!(e.downcast_ref::<CensusError>(), Some(CensusError::LogCorruption { .. }));
            ExitCode::from(if corrupt { EXIT_LOG_CORRUPTION } else { EXIT_ERROR })
        }
    }
}
