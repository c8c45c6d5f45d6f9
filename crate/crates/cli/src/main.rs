mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Universe constructions, realignment and gluing on finite sites.
#[derive(Debug, Parser)]
#[command(name = "toposforge", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the universe axioms U1–U8 for the presheaf universe.
    CheckAxioms,
    /// Classify a family given by --family.
    Classify,
    /// Solve the problem in --problem, or sampled problems.
    Realign,
    /// Sheafify --presheaf, or sampled presheaves, for --site.
    Sheafify,
    /// Run the bounded small object argument for --site.
    Soa,
    /// Search for realignment problems without a strict solution in the
    /// sheafified universe of --site.
    U8Search,
    /// Build the glued universe on the cone of --cat and realign at syntax.
    Glue,
    /// Compare strictified and plain Π-codes along a universe inclusion.
    Strictify,
    /// Solve sampled problems externally and internally and compare.
    Roundtrip,
}

#[derive(Debug, Clone, Args)]
pub struct Opts {
    /// Category file.
    #[arg(long, global = true)]
    pub cat: Option<PathBuf>,
    /// Site file (topology, optionally with an inline category).
    #[arg(long, global = true)]
    pub site: Option<PathBuf>,
    #[arg(long, global = true)]
    pub presheaf: Option<PathBuf>,
    #[arg(long, global = true)]
    pub family: Option<PathBuf>,
    #[arg(long, global = true)]
    pub problem: Option<PathBuf>,
    /// Fiber bound N.
    #[arg(long, global = true)]
    pub bound: Option<usize>,
    /// Two bounds `N,M`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub bounds: Option<Vec<usize>>,
    /// Number of stages of the small object argument.
    #[arg(long, global = true)]
    pub stages: Option<usize>,
    /// Size cap on enumerations; TOPOSFORGE_CAP sets the default.
    #[arg(long, global = true)]
    pub cap: Option<usize>,
    #[arg(long, global = true, default_value_t = 0x5EED)]
    pub seed: u64,
    /// Number of sampled instances.
    #[arg(long, global = true)]
    pub instances: Option<usize>,
    #[arg(long, global = true)]
    pub exhaustive: bool,
    /// Write the JSON report here; `-` for standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (text, json, code) = commands::execute(&cli);
    match &cli.opts.out {
        Some(p) if p.as_os_str() == "-" => print!("{json}"),
        Some(p) => {
            if let Err(e) = std::fs::write(p, &json) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(3);
            }
            print!("{text}");
        }
        None => print!("{text}"),
    }
    ExitCode::from(code)
}
