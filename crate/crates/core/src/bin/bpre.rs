use std::path::PathBuf;
use std::process::ExitCode;

use bpre::harness::config::parse_method;
use bpre::harness::{run, ConfigLayer, Kind};
use bpre::Error;
use clap::Parser;

/// Branching processes in a heavy-tailed random environment.
#[derive(Debug, Parser)]
#[command(name = "bpre", version)]
struct Cli {
    /// law-check | simulate | tail | rwre-verify | disteq | psae | perpetuity
    kind: Option<String>,
    /// Environment law, e.g. `pareto(2,1,3)`.
    #[arg(long)]
    law: Option<String>,
    /// Horizon or walk level; 0 selects the stationary law for tail and perpetuity.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    reps: Option<u64>,
    /// size1 | statedep | noimm
    #[arg(long)]
    mode: Option<String>,
    /// crude | importance | exact
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Master seed; falls back to BPRE_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; a manifest is written to `<out>.manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
    /// Flat key=value file with the same keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn layer(&self) -> Result<ConfigLayer, Error> {
        Ok(ConfigLayer {
            kind: self.kind.as_deref().map(str::parse::<Kind>).transpose()?,
            law: self.law.clone(),
            n: self.n,
            m: self.m,
            reps: self.reps,
            mode: self.mode.as_deref().map(str::parse).transpose()?,
            method: self.method.as_deref().map(parse_method).transpose()?,
            c: self.c,
            eps: self.eps,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            format: self.format.as_deref().map(str::parse).transpose()?,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = (|| {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                ConfigLayer::parse(&text)?
            }
            None => ConfigLayer::default(),
        };
        cli.layer()?.over(file).resolve(std::env::var("BPRE_SEED").ok().as_deref())
    })();
    let cfg = match cfg {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("bpre: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            if cfg.out.is_none() {
                print!("{}", report.primary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("bpre {}: {e}", cfg.kind);
            ExitCode::FAILURE
        }
    }
}
