use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dfindex::cli::{exit_code, run, Command, RunConfig};
use dfindex::DfError;

#[derive(Parser)]
#[command(name = "df", about = "Diederich-Fornaess exponent toolkit for domains in C^2")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certify plurisubharmonicity of -(-rho)^eta on sampled interior points.
    Certify(Common),
    /// Estimate the exponent by bisection and a search over a psi family.
    EstimateIndex(Common),
    /// Evaluate the necessary conditions on the Levi-flat set.
    Conditions(Common),
    /// Run estimate-index and the first condition over a list of worm betas.
    WormSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated beta values, each > pi/2.
        #[arg(long, value_delimiter = ',', required = true)]
        betas: Vec<f64>,
    },
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory of the configuration.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(common: &Common) -> Result<RunConfig, DfError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| DfError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(o) = &common.output {
        cfg.output.path = o.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("DF_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: DF_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let (cmd, common, betas) = match &cli.command {
        Cmd::Certify(c) => (Command::Certify, c, Vec::new()),
        Cmd::EstimateIndex(c) => (Command::EstimateIndex, c, Vec::new()),
        Cmd::Conditions(c) => (Command::Conditions, c, Vec::new()),
        Cmd::WormSweep { common, betas } => (Command::WormSweep, common, betas.clone()),
    };
    let result = load(common).and_then(|cfg| run(cmd, &cfg, &betas));
    match result {
        Ok(out) => {
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if let Some(v) = out.report["result"]["verdict"].as_str() {
                println!("verdict: {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
