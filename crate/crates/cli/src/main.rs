//! The `muweyl` binary: one experiment per invocation, CSV out.
//!
//! Exit codes: 0 pass, 1 usage error, 2 fixture/selftest mismatch,
//! 3 internal error.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use muweyl_cli::config::{
    parse_config, parse_count, BlockStatSpec, Count, ExperimentConfig, ExperimentSpec, KbszSpec,
    NuToken, PhaseSpec, QuasiMode, QuasiSpec, SchemeToken, SeedMode, ShortIntervalSpec, SieveSpec,
    SwitchedMode, SwitchedSpec, Window,
};
use muweyl_cli::{runner, selftest, CliError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "muweyl",
    version,
    about = "Deterministic experiments on multiplicative weights along affine torus orbits"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Worker count; 0 or omitted = all available parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<String>,
    /// Expected CSV to compare against (relative paths resolve under
    /// $MUWEYL_FIXTURES).
    #[arg(long)]
    fixture: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Multiplicative values on a range: `n,value` (mu) or `n,value_re,value_im`.
    Sieve {
        /// moebius | liouville | archimedean:<t> | random-unimodular:<seed>
        #[arg(long)]
        kind: String,
        #[arg(long, default_value = "1")]
        from: String,
        /// Exclusive upper end.
        #[arg(long)]
        to: String,
        #[command(flatten)]
        common: Common,
    },
    /// Orbit phases `e(P(n))`: `n,phase_re,phase_im`.
    Phase {
        /// Comma-separated coefficient tokens, highest degree first
        /// (e.g. "sqrt2,0,0" for sqrt2 n^2).
        #[arg(long)]
        poly: String,
        #[arg(long, default_value = "0")]
        from: String,
        #[arg(long)]
        count: String,
        #[command(flatten)]
        common: Common,
    },
    /// Quasi-eigenfunction checks: verdict rows or a Birkhoff average.
    Quasi {
        /// Identity to verify (only `tr-lemma`).
        #[arg(long, conflicts_with = "birkhoff")]
        check: Option<String>,
        /// Compute a Birkhoff average instead of a check.
        #[arg(long)]
        birkhoff: bool,
        /// tr-lemma: torus dimension.
        #[arg(long)]
        d: Option<String>,
        /// tr-lemma: largest power r to check.
        #[arg(long = "r-max")]
        r_max: Option<String>,
        /// tr-lemma: random characters per power (default 64).
        #[arg(long)]
        chars: Option<String>,
        /// tr-lemma: character RNG seed (default 1).
        #[arg(long)]
        seed: Option<String>,
        /// birkhoff: comma-separated frequency, e.g. "0,1".
        #[arg(long)]
        freq: Option<String>,
        /// Rotation number token (default sqrt2 for tr-lemma).
        #[arg(long)]
        alpha: Option<String>,
        /// birkhoff: number of orbit points.
        #[arg(long = "N")]
        n: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Two-scale correlations over prime pairs: `r,s,re,im,abs`.
    Kbsz {
        #[arg(long)]
        poly: String,
        #[arg(long = "primes-up-to")]
        primes_up_to: String,
        #[arg(long = "N")]
        n: String,
        #[command(flatten)]
        common: Common,
    },
    /// Short-interval decay statistic: `M,H,S`.
    ShortInterval {
        #[arg(long)]
        poly: String,
        /// moebius | liouville | archimedean:<t> | random-unimodular:<seed>
        #[arg(long)]
        nu: String,
        /// One value or a comma-separated list.
        #[arg(long = "M")]
        m: String,
        /// "auto" (= floor(M^(1/3))), one value, or a list matching M.
        #[arg(long = "H", default_value = "auto")]
        h: String,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted block statistic: `K,W`.
    BlockStat {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        nu: String,
        /// sqrt | sqrt-plus-one | log2-plus-one | power:<theta>
        #[arg(long)]
        scheme: String,
        /// Explicit block counts (one value or a comma-separated list).
        #[arg(long = "K", conflicts_with = "limit")]
        k: Option<String>,
        /// Coverage targets instead of explicit K.
        #[arg(long)]
        limit: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Orbit-switching model: per-block sums, or switching defects.
    Switched {
        /// blocks (default) | defect
        #[arg(long, default_value = "blocks")]
        mode: String,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        nu: Option<String>,
        /// equal | aligned
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long = "K", conflicts_with = "limit")]
        k: Option<String>,
        #[arg(long)]
        limit: Option<String>,
        /// defect mode: orbit lengths (one value or a list).
        #[arg(long = "N")]
        n: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Fast self-check battery against independent references.
    Selftest,
    /// Run an experiment described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn count_arg(name: &str, value: &str) -> Result<Count, CliError> {
    parse_count(value)
        .map(Count)
        .map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

fn count_list_arg(name: &str, value: &str) -> Result<Vec<Count>, CliError> {
    value.split(',').map(|v| count_arg(name, v.trim())).collect()
}

fn poly_arg(value: &str) -> Vec<String> {
    value.split(',').map(|t| t.trim().to_string()).collect()
}

fn nu_arg(value: &str) -> Result<NuToken, CliError> {
    value.parse().map_err(CliError::Usage)
}

fn scheme_arg(value: &str) -> Result<SchemeToken, CliError> {
    value.parse().map_err(CliError::Usage)
}

fn build_config(cmd: Cmd) -> Result<Option<ExperimentConfig>, CliError> {
    let (experiment, common) = match cmd {
        Cmd::Sieve { kind, from, to, common } => (
            ExperimentSpec::Sieve(SieveSpec {
                kind: nu_arg(&kind)?,
                from: count_arg("from", &from)?,
                to: count_arg("to", &to)?,
            }),
            common,
        ),
        Cmd::Phase { poly, from, count, common } => (
            ExperimentSpec::Phase(PhaseSpec {
                poly: poly_arg(&poly),
                from: count_arg("from", &from)?,
                count: count_arg("count", &count)?,
            }),
            common,
        ),
        Cmd::Quasi { check, birkhoff, d, r_max, chars, seed, freq, alpha, n, common } => {
            let mode = match (&check, birkhoff) {
                (Some(c), false) if c == "tr-lemma" => QuasiMode::TrLemma,
                (Some(c), false) => {
                    return Err(CliError::Usage(format!(
                        "unknown check `{c}` (expected tr-lemma)"
                    )))
                }
                (None, true) => QuasiMode::Birkhoff,
                (None, false) => {
                    return Err(CliError::Usage(
                        "quasi requires --check tr-lemma or --birkhoff".into(),
                    ))
                }
                (Some(_), true) => unreachable!("clap conflicts_with"),
            };
            let freq = match freq {
                None => None,
                Some(f) => Some(
                    f.split(',')
                        .map(|t| {
                            t.trim().parse::<i64>().map_err(|_| {
                                CliError::Usage(format!("--freq: bad entry `{t}`"))
                            })
                        })
                        .collect::<Result<Vec<i64>, CliError>>()?,
                ),
            };
            (
                ExperimentSpec::Quasi(QuasiSpec {
                    mode,
                    d: d.as_deref().map(|v| count_arg("d", v)).transpose()?,
                    r_max: r_max.as_deref().map(|v| count_arg("r-max", v)).transpose()?,
                    chars: chars.as_deref().map(|v| count_arg("chars", v)).transpose()?,
                    seed: seed.as_deref().map(|v| count_arg("seed", v)).transpose()?,
                    freq,
                    alpha,
                    n: n.as_deref().map(|v| count_arg("N", v)).transpose()?,
                }),
                common,
            )
        }
        Cmd::Kbsz { poly, primes_up_to, n, common } => (
            ExperimentSpec::Kbsz(KbszSpec {
                poly: poly_arg(&poly),
                primes_up_to: count_arg("primes-up-to", &primes_up_to)?,
                n: count_arg("N", &n)?,
            }),
            common,
        ),
        Cmd::ShortInterval { poly, nu, m, h, common } => {
            let h = if h.trim() == "auto" {
                Window::Auto
            } else {
                Window::Fixed(count_list_arg("H", &h)?)
            };
            (
                ExperimentSpec::ShortInterval(ShortIntervalSpec {
                    poly: poly_arg(&poly),
                    nu: nu_arg(&nu)?,
                    m: count_list_arg("M", &m)?,
                    h,
                }),
                common,
            )
        }
        Cmd::BlockStat { poly, nu, scheme, k, limit, common } => (
            ExperimentSpec::BlockStat(BlockStatSpec {
                poly: poly_arg(&poly),
                nu: nu_arg(&nu)?,
                scheme: scheme_arg(&scheme)?,
                k: k.as_deref().map(|v| count_list_arg("K", v)).transpose()?,
                limit: limit.as_deref().map(|v| count_list_arg("limit", v)).transpose()?,
            }),
            common,
        ),
        Cmd::Switched { mode, scheme, poly, nu, seeds, k, limit, n, common } => {
            let mode = match mode.as_str() {
                "blocks" => SwitchedMode::Blocks,
                "defect" => SwitchedMode::Defect,
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown mode `{other}` (expected blocks or defect)"
                    )))
                }
            };
            let seeds = match seeds.as_deref() {
                None => None,
                Some("equal") => Some(SeedMode::Equal),
                Some("aligned") => Some(SeedMode::Aligned),
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "unknown seeds `{other}` (expected equal or aligned)"
                    )))
                }
            };
            (
                ExperimentSpec::Switched(SwitchedSpec {
                    mode,
                    scheme: scheme_arg(&scheme)?,
                    poly: poly.as_deref().map(poly_arg),
                    nu: nu.as_deref().map(nu_arg).transpose()?,
                    seeds,
                    k: k.as_deref().map(|v| count_arg("K", v)).transpose()?,
                    limit: limit.as_deref().map(|v| count_arg("limit", v)).transpose()?,
                    n: n.as_deref().map(|v| count_list_arg("N", v)).transpose()?,
                }),
                common,
            )
        }
        Cmd::Selftest => {
            selftest::run()?;
            return Ok(None);
        }
        Cmd::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                CliError::Usage(format!("reading config {}: {e}", config.display()))
            })?;
            let cfg = parse_config(&text)
                .map_err(|e| CliError::Usage(format!("in {}: {e}", config.display())))?;
            return Ok(Some(cfg));
        }
    };
    Ok(Some(ExperimentConfig {
        experiment,
        workers: common.workers.unwrap_or(0),
        out: common.out,
        fixture: common.fixture,
    }))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(cfg) = build_config(cli.cmd)? {
        runner::execute(&cfg)?;
    }
    Ok(())
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("muweyl: {e}");
        std::process::exit(e.exit_code());
    }
}
