mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::RunConfig;
use output::{emit, render_csv};
use spinmetro::{figures, run_estimation, run_protocol, validate, EstimationConfig, EstimationSetup, Table};

const SEED_ENV: &str = "SPINMETRO_SEED";

const AFTER_HELP: &str = "\
Config file (--config): one `key = value` per line, `#` starts a comment.
  spin         spin quantum number s (half-integer, default 1)
  theta        axis angle from z in the x-z plane, radians in [0, pi] (default 0.9)
  beta         rotation angle, radians (default 0.4)
  state        maximal | maxprob | diag | chi (default maximal)
  xi           Schmidt weights, comma separated (diag: 2s+1 values, maxprob: 2)
  chi, chi_im  real / imaginary coefficient matrix, rows split by ';'
  target       n- | n+ : optimal probe to postselect on the non-orthogonal route (default n-)
  two_outcome  true | false : also keep the other extreme outcome when possible
  shots        kept shots per estimation trial (default 10000)
  trials       estimation trials (default 200)
  seed         RNG seed
  out          output path
Seed precedence: --seed, then config `seed`, then $SPINMETRO_SEED, then 0.";

#[derive(Parser)]
#[command(name = "spinmetro", version, about = "Axis-agnostic phase estimation with entangled spin-s probes")]
#[command(after_help = AFTER_HELP)]
struct Cli {
    /// RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid resolution per axis for figure datasets.
    #[arg(long, global = true, default_value_t = figures::DEFAULT_GRID)]
    grid: usize,
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success probability 2/m and maximal QFI versus dimension.
    FigDimension {
        #[arg(long, default_value_t = 12)]
        m_max: usize,
    },
    /// Spin-1 success probability over (theta, xi1^2) at fixed xi2^2.
    FigSurface {
        #[arg(long, default_value_t = 0.2)]
        xi2_sq: f64,
    },
    /// Two-outcome total probability over (xi2^2, theta) with xi1 = xi3.
    FigContour,
    /// Degenerate special-case curves over xi3.
    FigAppendix,
    /// Run the postselection protocol once and print a JSON report.
    Protocol,
    /// Monte Carlo maximum-likelihood estimation; per-trial CSV to --out, JSON summary to stdout.
    Estimate,
    /// Run the structural invariant checks; exits non-zero on failure.
    Validate,
}

struct Invocation {
    seed: u64,
    out: Option<PathBuf>,
    config: RunConfig,
}

fn resolve(cli: &Cli) -> Result<Invocation> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default_config(),
    };
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(v.trim().parse::<u64>().with_context(|| format!("${SEED_ENV} = `{v}`"))?),
        Err(_) => None,
    };
    let seed = cli.seed.or(config.seed).or(env_seed).unwrap_or(0);
    let out = cli.out.clone().or_else(|| config.out.clone());
    Ok(Invocation { seed, out, config })
}

fn write_table(ctx: &Invocation, table: &Table, command: &str, params: &[(&str, String)]) -> Result<()> {
    emit(ctx.out.as_deref(), &render_csv(table, command, ctx.seed, params)).context("writing CSV")
}

#[derive(Serialize)]
struct OutcomeJson {
    target: &'static str,
    outcome: usize,
    p_closed: f64,
    p_bruteforce: f64,
    fidelity: f64,
    qfi: f64,
}

#[derive(Serialize)]
struct CombinedJson {
    p_total_closed: f64,
    p_total_bruteforce: f64,
    outcomes: Vec<OutcomeJson>,
}

#[derive(Serialize)]
struct ProtocolJson {
    version: &'static str,
    command: &'static str,
    seed: u64,
    spin: f64,
    theta: f64,
    beta: f64,
    state: &'static str,
    path: &'static str,
    branch: &'static str,
    p_closed: f64,
    p_bruteforce: f64,
    max_qfi: f64,
    cs: Vec<f64>,
    gram_deviation: f64,
    outcomes: Vec<OutcomeJson>,
    combined: Option<CombinedJson>,
}

fn outcome_json(o: &spinmetro::protocol::BranchOutcome) -> OutcomeJson {
    OutcomeJson {
        target: o.target.label(),
        outcome: o.outcome,
        p_closed: o.p_closed,
        p_bruteforce: o.p_bruteforce,
        fidelity: o.fidelity,
        qfi: o.qfi,
    }
}

fn cmd_protocol(ctx: &Invocation) -> Result<()> {
    let c = &ctx.config;
    let r = run_protocol(&c.state, &c.generator, c.beta, c.target)?;
    let json = ProtocolJson {
        version: output::VERSION,
        command: "protocol",
        seed: ctx.seed,
        spin: c.spin,
        theta: c.theta,
        beta: c.beta,
        state: c.kind.name(),
        path: match r.path {
            spinmetro::ProtocolPath::Orthogonal => "orthogonal",
            spinmetro::ProtocolPath::NonOrthogonal => "non-orthogonal",
        },
        branch: r.branch.label(),
        p_closed: r.p_closed,
        p_bruteforce: r.p_bruteforce,
        max_qfi: c.generator.system().max_qfi(),
        cs: r.cs.clone(),
        gram_deviation: r.gram_deviation,
        outcomes: r.outcomes.iter().map(outcome_json).collect(),
        combined: r.combined.as_ref().map(|cr| CombinedJson {
            p_total_closed: cr.p_total_closed,
            p_total_bruteforce: cr.p_total_bruteforce,
            outcomes: cr.outcomes.iter().map(outcome_json).collect(),
        }),
    };
    emit(ctx.out.as_deref(), &(serde_json::to_string_pretty(&json)? + "\n")).context("writing JSON")
}

#[derive(Serialize)]
struct EstimateJson {
    version: &'static str,
    command: &'static str,
    seed: u64,
    spin: f64,
    theta: f64,
    state: &'static str,
    beta_true: f64,
    shots: u64,
    trials: u64,
    mean: f64,
    bias: f64,
    empirical_variance: f64,
    fisher: f64,
    crb: f64,
    normalized_variance: f64,
    kept_fraction: f64,
    keep_probability: f64,
    total_attempts: u64,
}

fn cmd_estimate(ctx: &Invocation) -> Result<()> {
    let c = &ctx.config;
    let cfg = EstimationConfig {
        beta_true: c.beta,
        shots: c.shots,
        trials: c.trials,
        seed: ctx.seed,
    };
    let setup = EstimationSetup {
        state: c.state.clone(),
        generator: c.generator.clone(),
        target: c.target,
        two_outcome: c.two_outcome,
    };
    let r = run_estimation(&cfg, &setup)?;
    if let Some(path) = &ctx.out {
        let table = Table {
            columns: vec!["trial", "kept", "attempts", "beta_hat"],
            rows: r
                .trials
                .iter()
                .enumerate()
                .map(|(k, t)| vec![k as f64, t.kept as f64, t.attempts as f64, t.beta_hat])
                .collect(),
            integer_columns: 3,
        };
        let params = [
            ("spin", c.spin.to_string()),
            ("theta", c.theta.to_string()),
            ("beta", c.beta.to_string()),
            ("state", c.kind.name().to_string()),
            ("shots", c.shots.to_string()),
            ("trials", c.trials.to_string()),
        ];
        emit(Some(path), &render_csv(&table, "estimate", ctx.seed, &params)).context("writing CSV")?;
    }
    let json = EstimateJson {
        version: output::VERSION,
        command: "estimate",
        seed: ctx.seed,
        spin: c.spin,
        theta: c.theta,
        state: c.kind.name(),
        beta_true: r.beta_true,
        shots: r.shots,
        trials: c.trials,
        mean: r.mean,
        bias: r.bias(),
        empirical_variance: r.empirical_variance,
        fisher: r.fisher,
        crb: r.crb,
        normalized_variance: r.normalized_variance(),
        kept_fraction: r.kept_fraction,
        keep_probability: r.keep_probability,
        total_attempts: r.total_attempts(),
    };
    emit(None, &(serde_json::to_string_pretty(&json)? + "\n")).context("writing JSON")
}

fn cmd_validate() -> bool {
    let results = validate::run_all();
    for r in &results {
        println!(
            "[{}] {}: worst {:.3e} (tol {:.0e}) {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.worst,
            r.tolerance,
            r.detail
        );
    }
    validate::all_passed(&results)
}

fn run(cli: Cli) -> Result<bool> {
    let ctx = resolve(&cli)?;
    let grid = cli.grid;
    match cli.command {
        Command::FigDimension { m_max } => {
            write_table(&ctx, &figures::dimension(m_max)?, "fig-dimension", &[("m_max", m_max.to_string())])?
        }
        Command::FigSurface { xi2_sq } => write_table(
            &ctx,
            &figures::surface(xi2_sq, grid)?,
            "fig-surface",
            &[("xi2_sq", xi2_sq.to_string()), ("grid", grid.to_string())],
        )?,
        Command::FigContour => write_table(&ctx, &figures::contour(grid)?, "fig-contour", &[("grid", grid.to_string())])?,
        Command::FigAppendix => {
            write_table(&ctx, &figures::appendix(grid)?, "fig-appendix", &[("grid", grid.to_string())])?
        }
        Command::Protocol => cmd_protocol(&ctx)?,
        Command::Estimate => cmd_estimate(&ctx)?,
        Command::Validate => return Ok(cmd_validate()),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
