use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmwave_relay::experiments::{format_value, load_config, load_spec, run_sweep};
use mmwave_relay::sim::{self, compare, LosMode, SimOptions, SimStats};
use mmwave_relay::{aggregate_throughput, ModelError, ThroughputReport};

const EXIT_USAGE: u8 = 1;
const EXIT_MODEL: u8 = 2;
const EXIT_COMPARISON: u8 = 3;

#[derive(Parser)]
#[command(name = "relaysim", version, about = "Relay-assisted mm-wave random access: analysis, simulation, sweeps")]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SimArgs {
    /// Simulated slots.
    #[arg(long, default_value_t = 1_000_000)]
    slots: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// LOS sampling: `decoupled` or `physical`.
    #[arg(long, default_value = "decoupled")]
    mode: LosMode,
}

#[derive(Subcommand)]
enum Command {
    /// Queue solution and throughput report for one scenario.
    Analyze { config: PathBuf },
    /// Slot-level simulation of one scenario.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Evaluate a sweep file and write CSV.
    Sweep {
        spec: PathBuf,
        /// Output path; stdout when omitted.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// z-scores of simulation against analysis; exits 3 if any |z| > 3.
    Compare {
        config: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        // only fails if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_MODEL)
        }
    }
}

fn run(command: Command) -> Result<u8, ModelError> {
    match command {
        Command::Analyze { config } => {
            let cfg = load_config(&config)?;
            print!("{}", render_report(&aggregate_throughput(&cfg)?));
            Ok(0)
        }
        Command::Simulate { config, sim } => {
            let cfg = load_config(&config)?;
            let stats = sim::run(&cfg, &SimOptions::new(sim.slots, sim.seed, sim.mode))?;
            print!("{}", render_stats(&stats));
            Ok(0)
        }
        Command::Sweep { spec, output } => {
            let spec = load_spec(&spec)?;
            let csv = run_sweep(&spec).to_csv();
            match output {
                Some(path) => std::fs::write(&path, csv)
                    .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?,
                None => print!("{csv}"),
            }
            Ok(0)
        }
        Command::Compare { config, sim } => {
            let cfg = load_config(&config)?;
            let report = aggregate_throughput(&cfg)?;
            let stats = sim::run(&cfg, &SimOptions::new(sim.slots, sim.seed, sim.mode))?;
            let cmp = compare(&report, &stats);
            println!("regime = {}", report.regime);
            println!("{:<8} {:>14} {:>14} {:>12} {:>9}  status", "metric", "analytic", "empirical", "se", "z");
            for r in &cmp.rows {
                println!(
                    "{:<8} {:>14} {:>14} {:>12} {:>9}  {}",
                    r.metric,
                    format_value(r.analytic),
                    format_value(r.empirical),
                    format_value(r.se),
                    format!("{:.3}", r.z),
                    r.status.as_str()
                );
            }
            if cmp.regime_mismatch {
                println!("note: analysis predicts an unstable queue but the simulated queue did not grow");
            }
            Ok(if cmp.all_pass() { 0 } else { EXIT_COMPARISON })
        }
    }
}

fn render_report(r: &ThroughputReport) -> String {
    let q = &r.queue;
    let mut s = String::new();
    let mut line = |k: &str, v: f64| {
        let _ = writeln!(s, "{k} = {}", format_value(v));
    };
    line("n_ues", f64::from(r.n_ues));
    line("lambda0", q.lambda0);
    line("lambda1", q.lambda1);
    line("a_r", q.a_r);
    line("b_r", q.b_r);
    line("mu_r", q.mu_r);
    line("q_r_min", q.q_r_min);
    line("p_empty", q.p_empty);
    line("t_ud0", r.t_ud0);
    line("t_ud1", r.t_ud1);
    line("t_ur_fd", r.t_ur_fd);
    line("t_ur0", r.t_ur0);
    line("t_ur1", r.t_ur1);
    line("t_ud", r.t_ud);
    line("t_ur", r.t_ur);
    line("t_d", r.t_direct);
    line("t_r", r.t_relay);
    line("t", r.t_aggregate);
    let _ = writeln!(s, "regime = {}", r.regime);
    s
}

fn render_stats(st: &SimStats) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "mode = {}", st.mode);
    let _ = writeln!(s, "seed = {}", st.seed);
    for (k, v) in [
        ("slots", st.slots),
        ("warmup", st.warmup),
        ("measured", st.measured),
        ("delivered_direct", st.delivered_direct),
        ("delivered_relay", st.delivered_relay),
        ("enqueued", st.enqueued),
        ("max_queue", st.max_queue),
        ("final_queue", st.final_queue),
    ] {
        let _ = writeln!(s, "{k} = {v}");
    }
    for (k, e) in [
        ("t", st.t_sim),
        ("lambda", st.lambda_sim),
        ("mu_r", st.mu_sim),
        ("p_empty", st.p_empty_sim),
    ] {
        let _ = writeln!(s, "{k} = {} ± {}", format_value(e.mean), format_value(e.se));
    }
    let _ = writeln!(s, "mean_queue = {}", format_value(st.mean_queue));
    let _ = writeln!(s, "drift = {}", format_value(st.drift_sim));
    s
}
