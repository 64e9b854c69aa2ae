//! Command implementations behind the `mrc` binary.
//!
//! Every `cmd_*` function takes document text and returns document text, so the
//! commands can be driven in-process as well as from the shell.

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use mrc_core::io::{coupling_json, lifted_json, parse_coupling, parse_measure};
use mrc_core::itmc::inverse_transform_martingale;
use mrc_core::rearrange::{rearrange, wiesel_switch};
use mrc_core::scalar::set_tolerance;
use mrc_core::stability::{constant_preset, counterexample_run, jump_preset, rows_to_csv, stability_run};
use mrc_core::transport::{adapted_wasserstein, nested_wasserstein_bruteforce, LiftedAwOptions};
use mrc_core::{Approx, DiscreteCoupling, Error, Rational, Result, Rho, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Approx,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Oracle {
    Direct,
    Wiesel,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Jump,
    Counterexample,
    Constant,
}

#[derive(Parser, Debug)]
#[command(name = "mrc", version, about = "Martingale couplings and adapted Wasserstein distances")]
pub struct Cli {
    /// Scalar arithmetic.
    #[arg(long, global = true, value_enum, env = "MRC_MODE", default_value = "exact")]
    pub mode: Mode,
    /// Comparison tolerance in approx mode.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tau: f64,
    /// Write the main document here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hoeffding-Fréchet (comonotone) coupling.
    Hf { mu: PathBuf, nu: PathBuf },
    /// Inverse transform martingale coupling.
    Itmc {
        mu: PathBuf,
        nu: PathBuf,
        /// Emit the lifted coupling.
        #[arg(long)]
        lifted: bool,
    },
    /// Martingale rearrangement of a coupling.
    Rearrange {
        pi: PathBuf,
        #[arg(long, value_enum, default_value = "direct")]
        oracle: Oracle,
    },
    /// Adapted Wasserstein distance between two couplings.
    Aw {
        pi: PathBuf,
        pi2: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Also solve the bicausal transport problem and compare.
        #[arg(long)]
        nested_oracle: bool,
    },
    /// Stability experiment, written as CSV.
    Stability {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        k: usize,
    },
}

/// Main document plus human-readable summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub document: String,
    pub summary: Vec<String>,
}

impl Output {
    fn document(document: String) -> Self {
        Self { document, summary: Vec::new() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Order(_) | Error::Precondition(_) | Error::Degenerate(_) => 2,
        Error::Parse(_) => 3,
        Error::Scale(_) => 4,
        _ => 1,
    }
}

/// Exit status for command-line usage errors.
pub const USAGE_EXIT: i32 = 64;

pub fn cmd_hf<S: Scalar>(mu: &str, nu: &str) -> Result<Output> {
    let (mu, nu) = (parse_measure::<S>(mu)?, parse_measure::<S>(nu)?);
    Ok(Output::document(coupling_json(&DiscreteCoupling::hoeffding_frechet(&mu, &nu))))
}

pub fn cmd_itmc<S: Scalar>(mu: &str, nu: &str, lifted: bool) -> Result<Output> {
    let (mu, nu) = (parse_measure::<S>(mu)?, parse_measure::<S>(nu)?);
    let (m, l) = inverse_transform_martingale(&mu, &nu)?;
    Ok(Output::document(if lifted { lifted_json(&l) } else { coupling_json(&m) }))
}

pub fn cmd_rearrange<S: Scalar>(pi: &str, oracle: Oracle) -> Result<Output> {
    let pi = parse_coupling::<S>(pi)?;
    let m = match oracle {
        Oracle::Direct => rearrange(&pi)?.0,
        Oracle::Wiesel => wiesel_switch(&pi)?,
    };
    let value = adapted_wasserstein(&pi, &m, Rho::ONE)?.value_pow;
    let bound = pi.barycentre_deviation();
    if value != bound {
        return Err(Error::Internal(format!("AW_1 = {value} misses the barycentre bound {bound}")));
    }
    Ok(Output { document: coupling_json(&m), summary: vec![format!("aw1 = {value}"), format!("bound = {bound}")] })
}

pub fn cmd_aw<S: Scalar>(pi: &str, pi2: &str, rho: f64, nested_oracle: bool) -> Result<Output> {
    let (pi, pi2) = (parse_coupling::<S>(pi)?, parse_coupling::<S>(pi2)?);
    let rho = Rho::new(rho)?;
    let res = adapted_wasserstein(&pi, &pi2, rho)?;
    let mut summary = vec![format!("aw_pow = {}", res.value_pow), format!("aw = {}", res.value())];
    if nested_oracle {
        let nested = nested_wasserstein_bruteforce(&pi, &pi2, rho)?;
        if nested != res.value_pow {
            return Err(Error::Internal(format!("nested value {nested} differs from adapted value {}", res.value_pow)));
        }
        summary.push(format!("nested_pow = {nested}"));
    }
    Ok(Output { document: coupling_json(&res.plan_coupling()?), summary })
}

pub fn cmd_stability<S: Scalar>(preset: Preset, n: usize, k: usize) -> Result<Output> {
    let opts = LiftedAwOptions::default();
    match preset {
        Preset::Jump => Ok(Output::document(rows_to_csv(&stability_run(&jump_preset::<S>(n)?, Rho::ONE, &opts)?))),
        Preset::Constant => Ok(Output::document(rows_to_csv(&stability_run(&constant_preset::<S>(n)?, Rho::ONE, &opts)?))),
        Preset::Counterexample => {
            let rep = counterexample_run(k, n)?;
            let min = rep.rows.iter().map(|r| r.aw).fold(f64::INFINITY, f64::min);
            Ok(Output {
                document: rows_to_csv(&rep.rows),
                summary: vec![
                    format!("c = {}", rep.c),
                    format!("floor = {}", rep.floor),
                    format!("min_aw1 = {min}"),
                    format!("two_point_min = {}", rep.two_point_min),
                ],
            })
        }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn dispatch<S: Scalar>(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Hf { mu, nu } => cmd_hf::<S>(&read(mu)?, &read(nu)?),
        Command::Itmc { mu, nu, lifted } => cmd_itmc::<S>(&read(mu)?, &read(nu)?, *lifted),
        Command::Rearrange { pi, oracle } => cmd_rearrange::<S>(&read(pi)?, *oracle),
        Command::Aw { pi, pi2, rho, nested_oracle } => cmd_aw::<S>(&read(pi)?, &read(pi2)?, *rho, *nested_oracle),
        Command::Stability { preset, n, k } => cmd_stability::<S>(*preset, *n, *k),
    }
}

pub fn execute(cli: &Cli) -> Result<Output> {
    set_tolerance(cli.tau)?;
    match cli.mode {
        Mode::Exact => dispatch::<Rational>(&cli.command),
        Mode::Approx => dispatch::<Approx>(&cli.command),
    }
}

/// Parses `args`, runs the command, writes its output and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut impl fmt::Write, stderr: &mut impl fmt::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { USAGE_EXIT } else { 0 };
            let _ = write!(if code == 0 { stdout as &mut dyn fmt::Write } else { stderr }, "{}", e.render());
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &out.document) {
                        let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                        return 1;
                    }
                    for line in &out.summary {
                        let _ = writeln!(stdout, "{line}");
                    }
                }
                None => {
                    let _ = writeln!(stdout, "{}", out.document.trim_end());
                    for line in &out.summary {
                        let _ = writeln!(stderr, "{line}");
                    }
                }
            }
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
