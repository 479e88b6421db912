//! Argument parsing and dispatch for the `entropyflow` binary.
//!
//! Exit codes: 0 on success, 1 on a domain error or a failed check (with a JSON
//! object on standard error), 2 on a usage error.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use entropyflow::algebra::FactorMap;
use entropyflow::calculus::DEFAULT_MAX_ORDER;
use entropyflow::EntropyKind;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Parsed flags for one run.
#[derive(Debug, Parser)]
#[command(name = "entropyflow", version, about = "Entropy derivatives along the heat flow p_t = p_xx / 2")]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write results to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads for scan and certify (default: available parallelism).
    #[arg(long, global = true, env = "ENTROPYFLOW_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// k-th time derivative of an entropy as a moment expression.
    Derive(DeriveArgs),
    /// Rewrite ∫p^(α+c) ∏ p_n^(k_n) into canonical normalized moments.
    Reduce(ReduceArgs),
    /// Solve the Gram matching problem on an α grid, fit curves and certify them exactly.
    Certify(CertifyArgs),
    /// Check the catalogued reduction and time-derivative identities.
    VerifyIdentities,
    /// Scan derivative signs against (-1)^(k-1) on a mixture.
    Scan(ScanArgs),
    /// Lower and upper entropy bounds under the heat flow.
    Bounds(BoundsArgs),
    /// Compare the Tsallis α = 2 derivatives with (-1)^(k-1) ∫ p_k² dx.
    Tsallis2Check(Tsallis2Args),
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[arg(long, default_value = "renyi", value_parser = parse_kind)]
    pub entropy: EntropyKind,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
    pub max_order: u32,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Exponent offset c in p^(α+c).
    #[arg(long, allow_negative_numbers = true)]
    pub offset: i64,
    /// Factors as order:exponent pairs, e.g. `1:2,2:1`.
    #[arg(long, value_parser = parse_factors)]
    pub factors: FactorMap,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, default_value = "renyi", value_parser = parse_kind)]
    pub entropy: EntropyKind,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
    pub order: u32,
    #[arg(long, value_delimiter = ',')]
    pub alpha_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub fit_degree: Option<usize>,
    #[arg(long)]
    pub round_denom: Option<u64>,
    /// Open interval for the exact certificate, as rationals or decimals.
    #[arg(long, num_args = 2, value_names = ["L", "U"], allow_negative_numbers = true)]
    pub interval: Option<Vec<String>>,
    /// Slack products such as `E[p1^4]E[p1^2]; E[p1^2]E[p2^2]`; empty for none.
    #[arg(long)]
    pub slack_spec: Option<String>,
    /// Use a stored curve set (renyi3-hat, renyi3-tilde, renyi4-hat, tsallis4-hat,
    /// tsallis4-tilde) instead of solving.
    #[arg(long)]
    pub printed: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Mixture JSON: {"weights":[..],"centers":[..],"initial_variances":[..]}.
    #[arg(long)]
    pub density: PathBuf,
    #[arg(long, default_value = "renyi", value_parser = parse_kind)]
    pub entropy: EntropyKind,
    /// `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..9", value_parser = parse_orders)]
    pub orders: Orders,
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub t_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 60)]
    pub t_points: usize,
    #[arg(long)]
    pub log_grid: bool,
    /// A sign counts only when |value| exceeds this multiple of the error estimate.
    #[arg(long, default_value_t = 10.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub bracket_width: f64,
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long)]
    pub no_cross_check: bool,
    /// Suppress progress lines on standard error.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub t: f64,
    /// Variance of the initial law; defaults to the variance of `--density`.
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Also evaluate the entropy of this mixture and test the sandwich.
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct Tsallis2Args {
    #[arg(long)]
    pub density: PathBuf,
    #[arg(long, default_value = "1..5", value_parser = parse_orders)]
    pub orders: Orders,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orders(pub Vec<u32>);

fn parse_kind(s: &str) -> Result<EntropyKind, String> {
    s.parse().map_err(|e: entropyflow::Error| e.to_string())
}

fn parse_orders(s: &str) -> Result<Orders, String> {
    let bad = || format!("expected `a..b` or a comma list of positive integers, got {s:?}");
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.trim().parse().map_err(|_| bad())?;
            let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a == 0 || b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            let k: u32 = part.parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            out.push(k);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(Orders(out))
}

fn parse_factors(s: &str) -> Result<FactorMap, String> {
    let mut f = FactorMap::new();
    if s.trim().is_empty() {
        return Ok(f);
    }
    for part in s.split(',') {
        let (n, k) = part.split_once(':').ok_or_else(|| format!("expected order:exponent, got {part:?}"))?;
        let n: u32 = n.trim().parse().map_err(|_| format!("bad order in {part:?}"))?;
        let k: u32 = k.trim().parse().map_err(|_| format!("bad exponent in {part:?}"))?;
        if n == 0 || k == 0 {
            return Err(format!("orders and exponents must be positive in {part:?}"));
        }
        *f.entry(n).or_insert(0) += k;
    }
    Ok(f)
}

/// Result of one subcommand: both renderings, and whether its checks passed.
pub struct Output {
    pub text: String,
    pub json: Value,
    pub ok: bool,
}

fn error_json(e: &entropyflow::Error) -> Value {
    let mut v = serde_json::to_value(e).unwrap_or_else(|_| json!({}));
    v["message"] = Value::String(e.to_string());
    v
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    run(&cfg)
}

/// Executes an already parsed configuration.
pub fn run(cfg: &RunConfig) -> i32 {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j as usize);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", json!({"error": "thread_pool", "message": e.to_string()}));
            return EXIT_DOMAIN;
        }
    };
    let out = match pool.install(|| commands::execute(cfg)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            return EXIT_DOMAIN;
        }
    };
    let body = match cfg.format {
        Format::Json => serde_json::to_string_pretty(&out.json).expect("serializable") + "\n",
        Format::Text => out.text.clone(),
    };
    let written = match &cfg.output {
        Some(path) => std::fs::write(path, body.as_bytes()),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(body.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("{}", json!({"error": "io", "message": e.to_string()}));
        return EXIT_DOMAIN;
    }
    if !out.ok {
        eprintln!("{}", json!({"error": "check_failed", "message": "one or more checks failed"}));
        return EXIT_DOMAIN;
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_lists() {
        assert_eq!(parse_orders("1..4").unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!(parse_orders("5,2,2..3").unwrap().0, vec![2, 3, 5]);
        assert!(parse_orders("0..3").is_err());
        assert!(parse_orders("x").is_err());
    }

    #[test]
    fn factor_maps() {
        let f = parse_factors("1:2,2:1").unwrap();
        assert_eq!(f.get(&1), Some(&2));
        assert_eq!(f.get(&2), Some(&1));
        assert!(parse_factors("1-2").is_err());
        assert!(parse_factors("0:1").is_err());
    }
}
