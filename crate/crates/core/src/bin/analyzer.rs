use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use miniobj_analyzer::driver::{run_all, run_stage1, run_stage2, ExitSummary, Manifest, RunOptions};

#[derive(Parser)]
#[command(name = "analyzer", version, about = "Staged security analyzer for MiniObj projects")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Both stages end to end.
    Run(Opts),
    /// Per-unit analysis producing candidate reports.
    Stage1(Opts),
    /// Whole-program validation of existing candidate reports.
    Stage2(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads (default: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    path_budget: Option<u64>,
    #[arg(long)]
    loop_bound: Option<u32>,
    #[arg(long)]
    chain_cap: Option<usize>,
    #[arg(long)]
    resolve_ref_aliases: bool,
    /// Comma-separated checker ids.
    #[arg(long, value_delimiter = ',')]
    checkers: Option<Vec<String>>,
    /// Output directory, relative to the working directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 0 even when reports are confirmed.
    #[arg(long)]
    exit_zero: bool,
    /// Skip the per-unit cache.
    #[arg(long)]
    no_cache: bool,
}

impl Opts {
    fn manifest(&self) -> anyhow::Result<Manifest> {
        let mut m = Manifest::load(&self.manifest)?;
        if let Some(b) = self.path_budget {
            m.engine.path_budget = b;
        }
        if let Some(b) = self.loop_bound {
            m.engine.loop_bound = b;
        }
        if let Some(c) = self.chain_cap {
            m.wpa.chain_cap = c;
        }
        m.wpa.resolve_ref_aliases |= self.resolve_ref_aliases;
        if let Some(c) = &self.checkers {
            m.checkers = c.clone();
        }
        if let Some(o) = &self.out {
            m.out = std::path::absolute(o)?;
        }
        m.validate()?;
        Ok(m)
    }

    fn run_options(&self) -> RunOptions {
        RunOptions { jobs: self.jobs, exit_zero: self.exit_zero, use_cache: !self.no_cache, cache_dir: None }
    }
}

fn print(s: &ExitSummary) {
    println!(
        "{} candidate(s), {} confirmed, {} false positive(s), {} error(s)",
        s.candidates, s.confirmed, s.false_positives, s.errors
    );
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| -> anyhow::Result<i32> {
        let (opts, summary) = match &cli.cmd {
            Cmd::Run(o) => (o, run_all(&o.manifest()?, &o.run_options())?.summary),
            Cmd::Stage1(o) => {
                let (_, s) = run_stage1(&o.manifest()?, &o.run_options())?;
                // candidates alone do not fail the build
                (o, ExitSummary { confirmed: 0, ..s })
            }
            Cmd::Stage2(o) => (o, run_stage2(&o.manifest()?, &o.run_options())?.1),
        };
        print(&summary);
        Ok(summary.exit_code(opts.exit_zero))
    })();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
