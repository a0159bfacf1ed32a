use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use captension_harness::experiments;
use captension_harness::output::{emit_csv, emit_plot};
use captension_harness::runner::quantity;
use captension_harness::{run_single, run_sweep, ExperimentConfig, HarnessError, Result};

#[derive(Parser)]
#[command(name = "captension", version, about = "Free-boundary Euler with surface tension on the disk")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    n_theta: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(&self.config)?;
        if let Some(n) = self.n_theta {
            c.n_theta = n;
        }
        if let Some(t) = self.t_final {
            c.t_final = t;
        }
        if let Some(d) = &self.out_dir {
            c.out_dir = d.clone();
        }
        c.validate()?;
        std::fs::create_dir_all(&c.out_dir)?;
        Ok(c)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// One free-boundary run against the reference model.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        k: f64,
    },
    /// Runs every k of the config, writes `sweep.csv` and log-log plots.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Property and oracle checks at the reference resolution.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Split closures against the unsplit Lagrangian law; writes a gap table.
    OracleCompare {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Run { cfg, k } => {
            let c = cfg.load()?;
            if !(k > 0.0) {
                return Err(HarnessError::Config(format!("k must be positive, got {k}")));
            }
            let rec = run_single(&c, k)?;
            let path = c.out_dir.join(format!("run_k{k}.csv"));
            emit_csv(&[rec.row], &path)?;
            println!(
                "k = {k}: sup||grad f||_0 = {:e}, sup||eta-zeta||_1 = {:e}, energy drift = {:e} ({:.2}s)",
                rec.row.sup_nabla_f[0], rec.row.sup_eta_gap[1], rec.row.energy_drift, rec.wall_time
            );
            println!("wrote {}", path.display());
            if let Some((t, msg)) = rec.failure {
                return Err(HarnessError::Aborted { time: t, msg });
            }
            Ok(true)
        }
        Cmd::Sweep { cfg } => {
            let c = cfg.load()?;
            let res = run_sweep(&c)?;
            let path = c.out_dir.join("sweep.csv");
            emit_csv(&res.rows, &path)?;
            for q in ["sup_nabla_f_L2", "sup_eta_gap_H1"] {
                let pts: Vec<(f64, f64)> = res.rows.iter().map(|r| (r.k, quantity(r, q))).collect();
                emit_plot(q, &pts, &c.out_dir.join(format!("{q}.svg")))?;
            }
            for (r, w) in res.rows.iter().zip(&res.wall_times) {
                println!(
                    "k = {}: sup||grad f||_0 = {:e}{} ({w:.2}s)",
                    r.k,
                    r.sup_nabla_f[0],
                    if r.converged { "" } else { " [not converged]" }
                );
            }
            for (q, f) in &res.fits {
                println!("decay exponent {q}: {} (r2 {})", f.slope, f.r2);
            }
            println!("wrote {}", path.display());
            if res.rows.iter().any(|r| !r.converged) {
                return Err(HarnessError::Aborted {
                    time: c.t_final,
                    msg: "some k did not reach t_final".into(),
                });
            }
            Ok(true)
        }
        Cmd::Selftest { seed } => {
            let checks = experiments::all(seed);
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        Cmd::OracleCompare { cfg } => {
            let c = cfg.load()?;
            let rows = experiments::oracle_compare(&c)?;
            let mut table = String::from("model,k,sup_eta_gap_H1,sup_etadot_gap_H1,converged\n");
            for r in &rows {
                let _ = writeln!(
                    table,
                    "{},{},{},{},{}",
                    r.model, r.k, r.sup_eta_gap_h1, r.sup_etadot_gap_h1, r.converged
                );
            }
            print!("{table}");
            let path = c.out_dir.join("oracle_compare.csv");
            std::fs::write(&path, table)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
