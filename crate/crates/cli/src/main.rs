use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reidemeister_core::*;

mod report;

use report::{Format, Report};

#[derive(Parser, Debug)]
#[command(
    name = "reidemeister",
    version,
    about = "Twisted conjugacy classes of Sp(2n, Z_m)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Enumerate Sp(2n, Z_m) and compare its order with the closed form.
    Order,
    /// Ordinary conjugacy classes of Sp(2n, Z_m).
    Classes,
    /// Twisted classes of Sp(2n, Z_m) under --aut.
    Twisted,
    /// Lower bound (p-3)/2 and torus pairing for the sign flip on Sp(2, Z_p).
    #[command(name = "certify-prop32")]
    CertifyProp32,
    /// Reidemeister numbers of the sign flip over a list of primes.
    CertifyGrowth,
    /// Twisted classes against coset classes of the semidirect extension.
    OracleSemidirect,
    /// Right multiplication by theta^-1 as a class bijection.
    OracleShift,
    /// Class map under reduction Z_m -> Z_target.
    OracleQuotient,
    /// Block form of torus solutions over Sp(2n, Z_p), n >= 2.
    #[command(name = "blocks-thm33")]
    BlocksThm33,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Exhaustive,
    Support,
}

#[derive(clap::Args, Debug)]
struct Opts {
    /// Half-dimension n of Sp(2n, Z_m).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Modulus m.
    #[arg(long, global = true)]
    modulus: Option<u32>,
    /// Prime p for certify-prop32 and blocks-thm33.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Comma-separated ascending primes for certify-growth.
    #[arg(long, global = true, value_delimiter = ',')]
    primes: Option<Vec<u32>>,
    /// sign_flip | identity | inner:<comma-separated entries> | twist:<character file>
    #[arg(long, global = true, default_value = "sign_flip")]
    aut: String,
    /// Element cap for enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled validation and random choices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Omit the leading `#` header line.
    #[arg(long, global = true)]
    no_header: bool,
    /// oracle-shift: theta as comma-separated entries (default: seeded random element).
    #[arg(long, global = true, allow_hyphen_values = true)]
    theta: Option<String>,
    /// oracle-quotient: target modulus dividing --modulus (default: smallest prime factor).
    #[arg(long, global = true)]
    target: Option<u32>,
    /// blocks-thm33: how torus solutions are found.
    #[arg(long, global = true, value_enum, default_value_t = Method::Exhaustive)]
    method: Method,
}

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!(
                "error: kind={} reason={}",
                e.kind(),
                e.to_string().replace('\n', " ")
            );
            ExitCode::from(if matches!(e, Error::Capacity { .. }) {
                EXIT_CAPACITY
            } else {
                EXIT_USAGE
            })
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let report = build_report(cli.command, &cli.opts)?;
    let mut body = String::new();
    if !cli.opts.no_header {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        body.push_str(&format!(
            "# reidemeister {} {} generated-at-unix: {now}\n",
            env!("CARGO_PKG_VERSION"),
            command_name(cli.command)
        ));
    }
    body.push_str(&report.render(cli.opts.output));
    match &cli.opts.out {
        Some(path) => fs::write(path, body)
            .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(body.as_bytes());
        }
    }
    Ok(match report.verdict() {
        None | Some(Verdict::Pass) => 0,
        Some(Verdict::Fail) => EXIT_FAIL,
        Some(Verdict::Inconclusive) => EXIT_CAPACITY,
    })
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Order => "order",
        Command::Classes => "classes",
        Command::Twisted => "twisted",
        Command::CertifyProp32 => "certify-prop32",
        Command::CertifyGrowth => "certify-growth",
        Command::OracleSemidirect => "oracle-semidirect",
        Command::OracleShift => "oracle-shift",
        Command::OracleQuotient => "oracle-quotient",
        Command::BlocksThm33 => "blocks-thm33",
    }
}

fn require<T: Copy>(v: Option<T>, flag: &str, command: Command) -> Result<T> {
    v.ok_or_else(|| Error::Precondition(format!("{} needs --{flag}", command_name(command))))
}

fn symplectic_group(n: usize, m: u32, cap: usize) -> Result<FiniteGroup> {
    generate_group(&standard_generators(n, Modulus::new(m)?)?, cap)
}

fn parse_entries(text: &str, g: &FiniteGroup) -> Result<ModMatrix> {
    let entries: Vec<i64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad matrix entry {t:?}")))
        })
        .collect::<Result<_>>()?;
    ModMatrix::from_signed(g.dim(), g.modulus(), &entries)
}

fn parse_automorphism(
    spec: &str,
    g: &FiniteGroup,
    budget: &ValidationBudget,
) -> Result<Automorphism> {
    match spec.split_once(':') {
        None if spec == "sign_flip" => Automorphism::sign_flip(g, budget),
        None if spec == "identity" => Ok(Automorphism::identity(g)),
        Some(("inner", entries)) => Automorphism::inner(g, &parse_entries(entries, g)?, budget),
        Some(("twist", path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Precondition(format!("cannot read character file {path}: {e}")))?;
            let chi = Character::parse_generator_file(g, &text)?;
            Automorphism::character_twist(g, &chi, &Automorphism::identity(g), budget)
        }
        _ => Err(Error::Parse(format!(
            "unknown automorphism {spec:?}; expected sign_flip, identity, inner:<entries> or twist:<file>"
        ))),
    }
}

fn build_report(command: Command, o: &Opts) -> Result<Report> {
    let budget = ValidationBudget::with_seed(o.seed);
    let n = o.n.unwrap_or(1);
    match command {
        Command::Order => {
            let m = Modulus::new(require(o.modulus, "modulus", command)?)?;
            Ok(Report::Certificate(order_certificate(n, m, o.cap)?))
        }
        Command::Classes => {
            let g = symplectic_group(n, require(o.modulus, "modulus", command)?, o.cap)?;
            let part = ordinary_classes(&g)?;
            Ok(Report::classes(&g, &part, None))
        }
        Command::Twisted => {
            let g = symplectic_group(n, require(o.modulus, "modulus", command)?, o.cap)?;
            let phi = parse_automorphism(&o.aut, &g, &budget)?;
            let part = twisted_classes(&g, &phi)?;
            Ok(Report::classes(&g, &part, Some(phi.descriptor())))
        }
        Command::CertifyProp32 => Ok(Report::Certificate(prop32_certificate(
            o.p.unwrap_or(5),
            o.cap,
            &budget,
        )?)),
        Command::CertifyGrowth => {
            let primes = o.primes.clone().unwrap_or_else(|| vec![5, 7, 11, 13]);
            Ok(Report::Certificate(growth_scan(
                &primes, n, o.cap, &budget,
            )?))
        }
        Command::OracleSemidirect => {
            let g = symplectic_group(n, require(o.modulus, "modulus", command)?, o.cap)?;
            let phi = parse_automorphism(&o.aut, &g, &budget)?;
            Ok(Report::Certificate(semidirect_oracle(
                &g, &phi, o.cap, &budget,
            )?))
        }
        Command::OracleShift => {
            let g = symplectic_group(n, require(o.modulus, "modulus", command)?, o.cap)?;
            let phi = parse_automorphism(&o.aut, &g, &budget)?;
            let theta = match &o.theta {
                Some(text) => {
                    let m = parse_entries(text, &g)?;
                    g.index_of(&m)
                        .ok_or_else(|| Error::Precondition("theta is not in the group".into()))?
                }
                None => {
                    ElementId(ChaCha8Rng::seed_from_u64(o.seed).random_range(0..g.order() as u32))
                }
            };
            Ok(Report::Certificate(shift_bijection_check(&g, &phi, theta)?))
        }
        Command::OracleQuotient => {
            let m = Modulus::new(require(o.modulus, "modulus", command)?)?;
            let target = match o.target {
                Some(t) => Modulus::new(t)?,
                None => Modulus::new(
                    (2..=m.value())
                        .find(|d| m.value() % d == 0)
                        .expect("m >= 2"),
                )?,
            };
            let proj = RingReduction::new(m, target)?;
            let g = symplectic_group(n, m.value(), o.cap)?;
            let q = symplectic_group(n, target.value(), o.cap)?;
            let phi = parse_automorphism(&o.aut, &g, &budget)?;
            Ok(Report::Certificate(quotient_epi_check(
                &g, &q, proj, &phi, &budget,
            )?))
        }
        Command::BlocksThm33 => {
            let method = match o.method {
                Method::Exhaustive => BlockMethod::Exhaustive,
                Method::Support => BlockMethod::Support,
            };
            let cert = torus_block_certificate(
                o.n.unwrap_or(2),
                o.p.unwrap_or(3),
                method,
                o.cap,
                &budget,
            )?;
            Ok(Report::Certificate(cert))
        }
    }
}
