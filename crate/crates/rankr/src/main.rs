#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rankr::{
    deflation_json, deflation_table, load_system, parse_complex, parse_complex_list, sci,
    trace_csv, trace_json, trace_table, SystemSource,
};
use rankr_core::catalog::NAMES;
use rankr_core::deflation::{deflate_to_semiregular, DeflationOptions};
use rankr_core::linalg::full_svd;
use rankr_core::{newton_rank_r, Error, RankChoice, Termination, Vector};

#[derive(Parser)]
#[command(name = "rankr", version, about = "Rank-r Newton iteration for nonisolated zeros")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the iteration and print its trace.
    Run(RunArgs),
    /// Print the singular values and numerical rank of the Jacobian at a point.
    Rank(RankArgs),
    /// Deflate an ultrasingular zero until it becomes semiregular.
    Deflate(DeflateArgs),
    /// List the catalog systems.
    List,
}

#[derive(Args)]
struct SystemArgs {
    /// Catalog key or path to a JSON polynomial file.
    system: String,
    /// Parameter of cyclic4.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    t: Option<rankr_core::C64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Projection rank, or `auto`.
    #[arg(long)]
    rank: Option<String>,
    /// Comma-separated start point, or `catalog-default`.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    shift_tol: Option<f64>,
    #[arg(long)]
    residual_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    sys: SystemArgs,
    /// Evaluation point; defaults to the catalog start point.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    theta: f64,
    /// Scale theta by the largest singular value.
    #[arg(long)]
    relative: bool,
}

#[derive(Args)]
struct DeflateArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Dimension of the solution component through the zero.
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 3)]
    max_depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jacobian rank at x0; skips the preliminary run on the original system.
    #[arg(long)]
    initial_rank: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    theta: f64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

fn start_point(src: &SystemSource, given: Option<&str>) -> Result<Vector> {
    match given {
        Some(s) if s != "catalog-default" => parse_complex_list(s),
        _ => match src.entry() {
            Some(e) => Ok(e.reference_x0.clone()),
            None => bail!("a start point is required for polynomial files"),
        },
    }
}

fn exit_for(t: Termination) -> u8 {
    match t {
        Termination::ZeroFound | Termination::StationaryPoint => 0,
        Termination::MaxIterations => 2,
        Termination::Diverged => 3,
    }
}

fn cmd_run(a: RunArgs) -> Result<u8> {
    let src = load_system(&a.sys.system, a.sys.t)?;
    let sys = src.system();
    let x0 = start_point(&src, a.x0.as_deref())?;
    let mut opts = src.entry().map(|e| e.options).unwrap_or_default();
    match a.rank.as_deref() {
        None => {}
        Some("auto") => opts.rank = RankChoice::default(),
        Some(r) => {
            let r: usize = r.parse().map_err(|_| anyhow::anyhow!("--rank takes an integer or `auto`"))?;
            opts.rank = RankChoice::Fixed(r);
        }
    }
    if let Some(v) = a.max_iter {
        opts.max_iter = v;
    }
    if let Some(v) = a.shift_tol {
        opts.shift_tol = v;
    }
    if let Some(v) = a.residual_tol {
        opts.residual_tol = v;
    }
    if let Some(v) = a.seed {
        opts.seed = v;
    }
    log::debug!("running {} with {:?}", sys.label(), opts);
    let trace = newton_rank_r(sys.as_ref(), x0.as_slice(), &opts)?;
    match a.format {
        Format::Table => print!("{}", trace_table(&trace)),
        Format::Json => println!("{}", serde_json::to_string_pretty(&trace_json(&trace))?),
        Format::Csv => print!("{}", trace_csv(&trace)),
    }
    Ok(exit_for(trace.termination()))
}

fn cmd_rank(a: RankArgs) -> Result<u8> {
    let src = load_system(&a.sys.system, a.sys.t)?;
    let sys = src.system();
    let x = start_point(&src, a.x.as_deref())?;
    if x.dim() != sys.domain_dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.domain_dim().to_string(),
            found: x.dim().to_string(),
        }
        .into());
    }
    if !(a.theta >= 0.0) {
        bail!("--theta must be nonnegative");
    }
    let svd = full_svd(&sys.jacobian(x.as_slice()))?;
    let tol = if a.relative { a.theta * svd.sigma_max() } else { a.theta };
    for (i, s) in svd.sigma.iter().enumerate() {
        println!("sigma_{} = {}", i + 1, sci(*s));
    }
    let r = svd.sigma.iter().take_while(|&&s| s > tol).count();
    println!("rank = {r}");
    Ok(0)
}

fn cmd_deflate(a: DeflateArgs) -> Result<u8> {
    if a.max_depth == 0 {
        bail!("--max-depth must be at least 1");
    }
    let src = load_system(&a.sys.system, a.sys.t)?;
    let sys = src.system();
    let x0 = start_point(&src, a.x0.as_deref())?;
    let opts = DeflationOptions {
        theta: a.theta,
        initial_rank: a.initial_rank,
        seed: a.seed,
        ..DeflationOptions::default()
    };
    let res = match deflate_to_semiregular(sys, x0.as_slice(), a.dim, a.max_depth, &opts) {
        Err(e @ Error::NothingToDeflate { .. }) => {
            eprintln!("{e}");
            return Ok(1);
        }
        r => r?,
    };
    match a.format {
        Format::Json => println!("{}", serde_json::to_string_pretty(&deflation_json(&res))?),
        Format::Table => print!("{}", deflation_table(&res)),
        Format::Csv => print!("{}", trace_csv(res.final_trace())),
    }
    if !res.semiregular {
        return Ok(2);
    }
    Ok(exit_for(res.final_trace().termination()))
}

fn cmd_list() -> Result<u8> {
    for name in NAMES {
        let e = rankr_core::catalog::lookup(name)?;
        println!(
            "{:<22} m = {:<3} n = {:<3} rank = {}",
            name,
            e.system.domain_dim(),
            e.system.codomain_dim(),
            e.recommended_rank
        );
    }
    Ok(0)
}

/// Input problems exit with 1, numerical failures with 4.
fn error_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>().map(Error::root) {
        None
        | Some(
            Error::InvalidInput(_)
            | Error::InvalidRank { .. }
            | Error::DimensionMismatch { .. }
            | Error::Layout(_)
            | Error::Parse { .. }
            | Error::VariableMismatch
            | Error::UnknownSystem(_)
            | Error::NothingToDeflate { .. },
        ) => 1,
        Some(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Rank(a) => cmd_rank(a),
        Cmd::Deflate(a) => cmd_deflate(a),
        Cmd::List => cmd_list(),
    };
    match out {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
