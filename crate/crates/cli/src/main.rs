mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::{parse_budget, CliError, RunConfig};
use serde_json::json;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "gjfe", version, about = "Exact Godement-Jacquet gamma factors over finite fields")]
struct Cli {
    /// Field and matrix size, e.g. `p=3,deg=1,n=2`.
    #[arg(long, global = true)]
    field: Option<String>,
    /// `cyclo` or `modf:l=5`.
    #[arg(long, global = true, default_value = "cyclo")]
    ring: String,
    /// Symmetric pair, e.g. `twisted:m=1,q=3`; repeatable.
    #[arg(long, global = true)]
    pair: Vec<String>,
    /// Algebra size cap, or `algebra=N,pairs=M`.
    #[arg(long, global = true)]
    budget: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Inversion, convolution, Parseval and Poisson on random functions.
    VerifyFourier {
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// GL_1 functional equation with its correction term.
    VerifyGl1,
    /// Operator form of the strong equation for cuspidal GL_2.
    VerifyCuspidalGjfe,
    /// Gamma of parabolic inductions against Levi products.
    VerifyMultiplicativity,
    /// CSV of trace and Kondo gammas.
    GammaTable {
        /// One row per ψ-twist t in k^×.
        #[arg(long)]
        twists: bool,
    },
    /// hom_dim, period sign and gamma of each cuspidal for a pair.
    Distinction,
    /// Inversion stability of H\G/H.
    DoubleCosets,
    /// Characteristic-zero gammas reduced mod ℓ against native ones.
    VerifyModular,
    /// Closed-form gamma of a parameter.
    Predict {
        /// e.g. `xi:q=3,n=2,a=2`.
        #[arg(long)]
        param: String,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let budget = match &cli.budget {
        Some(b) => parse_budget(b)?,
        None => gjfe::matspace::Budget::default(),
    };
    let (trials, param) = match &cli.cmd {
        Cmd::VerifyFourier { trials } => (*trials, None),
        Cmd::Predict { param } => (0, Some(param.clone())),
        _ => (0, None),
    };
    let cfg = RunConfig {
        field: cli.field.clone(),
        ring: cli.ring.clone(),
        pairs: cli.pair.clone(),
        param,
        max_algebra: budget.max_algebra,
        max_pairs: budget.max_pairs,
        workers: cli.workers,
        seed: cli.seed,
        trials,
        out: cli.out.clone(),
    };
    cfg.validate()?;
    let exec = gjfe::exec::configure_workers(cfg.workers);
    let (name, rep) = match &cli.cmd {
        Cmd::VerifyFourier { .. } => ("verify-fourier", commands::verify_fourier(&cfg, exec)?),
        Cmd::VerifyGl1 => ("verify-gl1", commands::verify_gl1(&cfg, exec)?),
        Cmd::VerifyCuspidalGjfe => ("verify-cuspidal-gjfe", commands::verify_cuspidal(&cfg, exec)?),
        Cmd::VerifyMultiplicativity => ("verify-multiplicativity", commands::verify_multiplicativity(&cfg, exec)?),
        Cmd::GammaTable { twists } => ("gamma-table", commands::gamma_table(&cfg, exec, *twists)?),
        Cmd::Distinction => ("distinction", commands::distinction(&cfg, exec)?),
        Cmd::DoubleCosets => ("double-cosets", commands::double_cosets(&cfg, exec)?),
        Cmd::VerifyModular => ("verify-modular", commands::verify_modular(&cfg, exec)?),
        Cmd::Predict { .. } => ("predict", commands::predict_cmd(&cfg)?),
    };
    let text = match (&rep.csv, name) {
        (Some(csv), _) => csv.clone(),
        (None, "predict") => serde_json::to_string_pretty(&rep.body).unwrap() + "\n",
        (None, _) => {
            let doc = json!({
                "command": name,
                "config": cfg,
                "seed": cfg.seed,
                "pass": rep.pass,
                "report": rep.body,
            });
            serde_json::to_string_pretty(&doc).unwrap() + "\n"
        }
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Config(format!("{path}: {e}")))?,
        None => print!("{text}"),
    }
    if rep.csv.is_some() {
        eprintln!("{}", rep.body);
    }
    Ok(rep.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("identity check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
