use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use said_sim::acceptance;
use said_sim::analysis::{self, rat, Grid};
use said_sim::metrics;
use said_sim::scenario;
use said_sim::world::run_scenario;

#[derive(Parser)]
#[command(name = "said-sim", version, about = "Any-next-packet dissemination simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write long-format metrics.
    Run {
        /// A TOML file or `builtin:NAME`.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Simulated seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Metrics bin width in seconds.
        #[arg(long)]
        bin: Option<f64>,
        /// Turn on invariant checks; any violation fails the run.
        #[arg(long)]
        checks: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the out-of-sync region and compare the closed form with the oracle.
    Analyze {
        /// `default`, or comma-separated `step=N` (grid step 1/N),
        /// `F=a/b/...`, `k=a/b/...`.
        #[arg(long, default_value = "default")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance suite; one line per criterion.
    Accept {
        /// Only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Print a scenario as TOML.
    Show {
        #[arg(long)]
        scenario: String,
    },
    /// List the built-in scenarios.
    List,
}

fn parse_grid(spec: &str) -> anyhow::Result<Grid> {
    let mut g = Grid::default();
    if spec == "default" {
        return Ok(g);
    }
    for part in spec.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').with_context(|| format!("bad grid item `{part}`"))?;
        match k.trim() {
            "step" => {
                let n: i64 = v.parse().with_context(|| format!("bad step `{v}`"))?;
                if n < 1 {
                    bail!("step must be at least 1");
                }
                let lo = (n + 9) / 10;
                g.ratios = (lo.max(1)..=n).map(|i| rat(i, n)).collect();
                g.c_over_f = (0..=n).map(|i| rat(i, n)).collect();
            }
            "F" => {
                g.flow_sizes = v.split('/').map(str::parse).collect::<Result<_, _>>().context("bad F list")?;
                if g.flow_sizes.contains(&0) {
                    bail!("flow sizes must be positive");
                }
            }
            "k" => {
                g.depths = v.split('/').map(str::parse).collect::<Result<_, _>>().context("bad k list")?;
                if g.depths.contains(&0) {
                    bail!("depths must be at least 1");
                }
            }
            other => bail!("unknown grid key `{other}`"),
        }
    }
    Ok(g)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().cmd {
        Cmd::Run { scenario: spec, seed, duration, bin, checks, out } => {
            let mut sc = scenario::resolve(&spec)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(d) = duration {
                sc.duration_s = d;
            }
            if let Some(b) = bin {
                sc.metrics_bin_s = b;
            }
            sc.checks |= checks;
            sc.validate()?;
            let o = run_scenario(&sc)?;
            let rows = metrics::records(&o);
            std::fs::write(&out, metrics::to_csv(&o, &rows)).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("{}: {} events, {} rows -> {}", sc.name, o.events, rows.len(), out.display());
            for v in o.violations.iter().take(10) {
                eprintln!("violation: {v}");
            }
            Ok(o.violations.is_empty())
        }
        Cmd::Analyze { grid, out } => {
            let g = parse_grid(&grid)?;
            let rows = analysis::sweep(&g);
            std::fs::write(&out, analysis::region_csv(&rows)).with_context(|| format!("writing {}", out.display()))?;
            let bad = rows.iter().filter(|r| !r.agrees()).count();
            eprintln!("{} points, {bad} disagreements -> {}", rows.len(), out.display());
            Ok(bad == 0)
        }
        Cmd::Accept { only } => {
            let results = if only.is_empty() {
                acceptance::run_all()
            } else {
                only.iter().map(|&i| acceptance::run(i)).collect()
            };
            for r in &results {
                println!("{}", r.line());
            }
            let passed = results.iter().filter(|r| r.passed).count();
            println!("{passed}/{} criteria passed", results.len());
            Ok(passed == results.len())
        }
        Cmd::Show { scenario: spec } => {
            print!("{}", scenario::resolve(&spec)?.to_toml());
            Ok(true)
        }
        Cmd::List => {
            for n in scenario::BUILTIN_NAMES {
                println!("builtin:{n}");
            }
            Ok(true)
        }
    }
}
