// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ebh::harness::{run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "ebh", version, about = "Extended block Hessenberg runs: f(A)V tables, shifted solves, error curves, operation counts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Approximate f(A)V for a list of functions and write a CSV table.
    Matfun(Flags),
    /// Solve (A + σI)X = C for a range of shifts and write a CSV table.
    Shifted(Flags),
    /// Error against m, one plain-text series per function.
    Curves(Flags),
    /// Operation counts, summed and closed form.
    Flops(Flags),
}

#[derive(Args)]
struct Flags {
    /// key=value file applied before the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// gallery operator (toeplitz, rot2, convdiff_l1, convdiff_l2, ...)
    #[arg(long)]
    gallery: Option<String>,
    /// Matrix Market file used instead of a gallery operator
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// grid points per side for the convection-diffusion operators
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    p: Option<String>,
    /// comma-separated list, e.g. 10,15
    #[arg(long)]
    m: Option<String>,
    /// comma-separated: exp, sqrt, log, expnegsqrt, expinvx, resolvent:<σ>
    #[arg(long)]
    funcs: Option<String>,
    /// comma-separated: EBH, EBA
    #[arg(long)]
    methods: Option<String>,
    /// lo:hi:count
    #[arg(long)]
    shifts: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    max_restarts: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// timing repetitions; median and mean are reported
    #[arg(long)]
    repeat: Option<String>,
    /// number of shifts checked against a direct residual
    #[arg(long)]
    audit: Option<String>,
    /// compute reference errors (true/false)
    #[arg(long)]
    errors: Option<String>,
    #[arg(long)]
    nnz: Option<String>,
    /// output file; stdout when absent
    #[arg(long)]
    out: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, &String)> {
        [
            ("gallery", &self.gallery),
            ("input", &self.input),
            ("n", &self.n),
            ("grid", &self.grid),
            ("p", &self.p),
            ("m", &self.m),
            ("funcs", &self.funcs),
            ("methods", &self.methods),
            ("shifts", &self.shifts),
            ("eps", &self.eps),
            ("max_restarts", &self.max_restarts),
            ("seed", &self.seed),
            ("repeat", &self.repeat),
            ("audit", &self.audit),
            ("errors", &self.errors),
            ("nnz", &self.nnz),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

fn build(command: Command, flags: &Flags) -> ebh::Result<RunConfig> {
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in flags.pairs() {
        cfg.apply(k, v)?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match &cli.command {
        Cmd::Matfun(f) => (Command::Matfun, f),
        Cmd::Shifted(f) => (Command::Shifted, f),
        Cmd::Curves(f) => (Command::Curves, f),
        Cmd::Flops(f) => (Command::Flops, f),
    };
    let result = build(command, flags).and_then(|cfg| {
        let text = run(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
