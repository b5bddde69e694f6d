use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ibfd_dcf::aggregation::{expected_gamma, expected_phi, AggregationMode, RhoSpec};
use ibfd_dcf::config::Config;
use ibfd_dcf::experiment::{
    analytical_point, builtin, emit_csv, emit_plot_data, run_experiment, ExperimentSpec, Metric, ResultRow,
    Variant,
};
use ibfd_dcf::hd::{hd_metrics, solve_hd};
use ibfd_dcf::ibfd::{ibfd_metrics, solve_ibfd, stage_heads, stationary_oracle, tau_from_chain, ChainParams};
use ibfd_dcf::params::BackoffParams;
use ibfd_dcf::sim::{run_replications, Duplex, Execution, Horizon};
use ibfd_dcf::{Error, SolverOptions};

const EXIT_VALIDATION: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

/// Full-duplex 802.11 DCF: analytical model, simulator and experiment grids.
#[derive(Parser, Debug)]
#[command(name = "ibfd-dcf", version, about)]
struct Cli {
    /// TOML configuration file
    #[arg(long, global = true, env = "IBFD_DCF_CONFIG")]
    config: Option<PathBuf>,

    /// Master seed (overrides the configuration)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Replications per point (overrides the configuration)
    #[arg(long, global = true)]
    runs: Option<usize>,

    /// Output file or directory, depending on the command
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Fixed-point tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the analytical model
    Solve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Node counts to solve, e.g. 2,4,8 (defaults to the scenario's n)
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<usize>,
    },
    /// Simulate one scenario and compare with the model
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Channel events per replication
        #[arg(long)]
        events: Option<u64>,
    },
    /// Run a built-in experiment (fig5..fig8, table2..table4) or one from a TOML file
    Experiment {
        /// Experiment name or path to a TOML file with an [experiment] section
        name: String,
        /// Channel events per replication
        #[arg(long)]
        events: Option<u64>,
    },
    /// Check the closed-form backoff chain against a dense stationary solve
    Oracle {
        /// Conditional collision probability
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Reply-back probability
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        /// Window ladder, e.g. 4,8,16
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        windows: Vec<u32>,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Node count, AP included
    #[arg(long)]
    n: Option<usize>,
    /// hd or ibfd
    #[arg(long)]
    duplex: Option<Duplex>,
    /// none, dual or multi
    #[arg(long)]
    aggregation: Option<AggregationMode>,
    /// deterministic:<rho> or uniform:<lo>:<hi>:step<step>
    #[arg(long)]
    rho: Option<RhoSpec>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Convergence { trace, .. } = &e {
                eprintln!("residual trace: {trace:?}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Convergence { .. } | Error::ModelInconsistency(_) => EXIT_CONVERGENCE,
        Error::Io { .. } | Error::Csv(_) => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("--tol must be positive, got {}", cli.tol)));
    }
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.scenario.seed = seed;
    }
    if let Some(runs) = cli.runs {
        config.scenario.runs = runs;
    }
    match &cli.command {
        Command::Solve { scenario, sweep } => {
            apply(&mut config, scenario);
            solve(&cli, &config, sweep)
        }
        Command::Simulate { scenario, events } => {
            apply(&mut config, scenario);
            if let Some(events) = events {
                config.scenario.horizon = Horizon::Events(*events);
            }
            simulate(&cli, &config)
        }
        Command::Experiment { name, events } => experiment(&cli, &config, name, *events),
        Command::Oracle { p, beta, windows } => oracle(*p, *beta, windows),
    }
}

fn apply(config: &mut Config, args: &ScenarioArgs) {
    let s = &mut config.scenario;
    if let Some(n) = args.n {
        s.n = n;
    }
    if let Some(d) = args.duplex {
        s.duplex = d;
    }
    if let Some(a) = args.aggregation {
        s.aggregation = a;
    }
    if let Some(r) = &args.rho {
        s.rho = r.clone();
    }
}

fn variant_of(config: &Config) -> Variant {
    let s = &config.scenario;
    let label = match s.duplex {
        Duplex::Hd => "hd".to_string(),
        Duplex::Ibfd if s.aggregation == AggregationMode::None => "ibfd".to_string(),
        Duplex::Ibfd => format!("ibfd-{}", s.aggregation),
    };
    Variant::new(&label, s.duplex, s.aggregation, s.rho.clone())
}

fn solve(cli: &Cli, config: &Config, sweep: &[usize]) -> Result<(), Error> {
    let s = &config.scenario;
    s.rho.validate()?;
    if s.duplex == Duplex::Hd && s.aggregation != AggregationMode::None {
        return Err(Error::InvalidParameter("uplink aggregation needs full duplex".into()));
    }
    let ns = if sweep.is_empty() { vec![s.n] } else { sweep.to_vec() };
    let variant = variant_of(config);
    let mut stdout = io::stdout().lock();
    let mut rows = Vec::new();
    match s.duplex {
        Duplex::Hd => {
            writeln!(stdout, "{:>4} {:>12} {:>12} {:>10} {:>10} {:>14} {:>14}", "n", "tau", "p", "p_s", "p_tr", "S (Mbit/s)", "D (us)").ok();
            for &n in &ns {
                let sol = solve_hd(n, &config.backoff, &SolverOptions::default().with_tol(cli.tol))?;
                let m = hd_metrics(&config.phy, &sol, &s.rho)?;
                writeln!(
                    stdout,
                    "{n:>4} {:>12.8} {:>12.8} {:>10.6} {:>10.6} {:>14.6} {:>14.3}",
                    sol.tau, sol.p, m.p_s, m.p_tr, m.throughput_mbps, m.latency_us
                )
                .ok();
                rows.extend(solve_rows(&variant, n, m.throughput_mbps, m.latency_us));
            }
        }
        Duplex::Ibfd => {
            let dist = s.rho.distribution()?;
            let phi = expected_phi(s.aggregation, &dist)?;
            let gamma = expected_gamma(s.aggregation, &dist)?;
            writeln!(
                stdout,
                "{:>4} {:>12} {:>12} {:>12} {:>12} {:>10} {:>10} {:>14} {:>14}",
                "n", "tau_ap", "tau_sta", "p_ap", "p_sta", "p_s", "p_tr", "S (Mbit/s)", "D (us)"
            )
            .ok();
            for &n in &ns {
                let sol = solve_ibfd(n, &config.backoff, &SolverOptions::ibfd().with_tol(cli.tol))?;
                let m = ibfd_metrics(&config.phy, &sol, phi, gamma)?;
                writeln!(
                    stdout,
                    "{n:>4} {:>12.8} {:>12.8} {:>12.8} {:>12.8} {:>10.6} {:>10.6} {:>14.6} {:>14.3}",
                    sol.tau_ap, sol.tau_sta, sol.p_ap, sol.p_sta, m.p_s, m.p_tr, m.throughput_mbps, m.latency_us
                )
                .ok();
                rows.extend(solve_rows(&variant, n, m.throughput_mbps, m.latency_us));
            }
        }
    }
    if let Some(path) = &cli.out {
        emit_csv(&rows, path)?;
    }
    Ok(())
}

fn solve_rows(variant: &Variant, n: usize, s: f64, d: f64) -> [ResultRow; 2] {
    let row = |metric, analytical| ResultRow {
        experiment: "solve".into(),
        variant: variant.label.clone(),
        n,
        metric,
        analytical,
        sim_mean: None,
        sim_stderr: None,
    };
    [row(Metric::Throughput, s), row(Metric::Latency, d)]
}

fn simulate(cli: &Cli, config: &Config) -> Result<(), Error> {
    let scenario = &config.scenario;
    let reps = run_replications(scenario, Execution::default())?;
    if let Some(path) = &cli.out {
        write_runs(path, &reps.runs)?;
    }
    let (s, d) = analytical_point(&config.phy, &config.backoff, &variant_of(config), scenario.n, cli.tol)?;
    let collisions: u64 = reps.runs.iter().map(|r| r.stats.collisions).sum();
    let events: u64 = reps.runs.iter().map(|r| r.stats.events).sum();
    println!(
        "{} n={} aggregation={} rho={} runs={} seed={}",
        scenario.duplex.as_str(),
        scenario.n,
        scenario.aggregation,
        scenario.rho,
        scenario.runs,
        scenario.seed
    );
    println!("events {events}, collisions {collisions}");
    println!(
        "throughput  sim {:.4} +- {:.4} Mbit/s   model {:.4}",
        reps.throughput.mean, reps.throughput.stderr, s
    );
    println!(
        "latency     sim {:.3} +- {:.3} us       model {:.3}",
        reps.latency.mean, reps.latency.stderr, d
    );
    if scenario.duplex == Duplex::Ibfd {
        println!("uplink frames per downlink frame {:.5}, uplink/downlink bits {:.5}", reps.pooled_gamma(), reps.pooled_phi());
    }
    Ok(())
}

fn write_runs(path: &Path, runs: &[ibfd_dcf::sim::RunSummary]) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "run", "seed", "throughput_mbps", "latency_us", "hol_latency_us", "phi", "exp_gamma",
        "events", "collisions", "drops", "elapsed_ns",
    ])?;
    for r in runs {
        w.write_record([
            r.run.to_string(),
            r.seed.to_string(),
            r.throughput_mbps.to_string(),
            r.latency_us.to_string(),
            r.hol_latency_us.to_string(),
            r.phi.to_string(),
            r.exp_gamma.to_string(),
            r.stats.events.to_string(),
            r.stats.collisions.to_string(),
            r.stats.drops.to_string(),
            r.stats.elapsed.0.to_string(),
        ])?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_experiment(config: &Config, name: &str) -> Result<ExperimentSpec, Error> {
    let path = Path::new(name);
    if name.ends_with(".toml") || path.is_file() {
        let file = Config::load(path)?;
        return file
            .experiment
            .ok_or_else(|| Error::Config(format!("{name} has no [experiment] section")));
    }
    if let Some(spec) = &config.experiment {
        if spec.name == name {
            return Ok(spec.clone());
        }
    }
    let mut spec = builtin(name)?;
    spec.phy = config.phy.clone();
    spec.backoff = config.backoff.clone();
    Ok(spec)
}

fn experiment(cli: &Cli, config: &Config, name: &str, events: Option<u64>) -> Result<(), Error> {
    let mut spec = load_experiment(config, name)?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(runs) = cli.runs {
        spec.runs = runs;
    }
    if let Some(events) = events {
        spec.events = events;
    }
    spec.tol = cli.tol;
    let rows = run_experiment(&spec, Execution::default())?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let csv_path = out.join(format!("{}.csv", spec.name));
    emit_csv(&rows, &csv_path)?;
    let plots: Vec<(String, Metric)> = match spec.plot {
        Some(m) => vec![(spec.name.clone(), m)],
        None => Vec::new(),
    };
    let plot_dir = out.join(format!("{}_plot", spec.name));
    if !plots.is_empty() {
        emit_plot_data(&rows, &plot_dir, &plots)?;
    }
    print_rows(&rows);
    println!("wrote {}", csv_path.display());
    if !plots.is_empty() {
        println!("wrote {}", plot_dir.display());
    }
    Ok(())
}

fn print_rows(rows: &[ResultRow]) {
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{:<14} {:>4} {:<16} {:>14} {:>14} {:>12} {:>9}", "variant", "n", "metric", "analytical", "sim_mean", "sim_stderr", "rel_err").ok();
    let opt = |v: Option<f64>, prec: usize| v.map(|x| format!("{x:.prec$}")).unwrap_or_else(|| "-".into());
    for r in rows {
        writeln!(
            stdout,
            "{:<14} {:>4} {:<16} {:>14.5} {:>14} {:>12} {:>9}",
            r.variant,
            r.n,
            r.metric.as_str(),
            r.analytical,
            opt(r.sim_mean, 5),
            opt(r.sim_stderr, 5),
            opt(r.rel_err(), 4),
        )
        .ok();
    }
}

fn oracle(p: f64, beta: f64, windows: &[u32]) -> Result<(), Error> {
    if windows.is_empty() {
        return Err(Error::InvalidParameter("need at least one window".into()));
    }
    let m = windows.len() as u32 - 1;
    let backoff = BackoffParams {
        w0: windows[0],
        m,
        r: m,
        windows: windows.to_vec(),
    };
    let chain = ChainParams::new(p, beta, backoff)?;
    let pi = stationary_oracle(&chain)?;
    let heads = stage_heads(&chain)?;
    let tau = tau_from_chain(&chain)?;
    println!("states {}, total probability {:.15}", pi.as_slice().len(), pi.total());
    println!("{:>5} {:>20} {:>20} {:>10}", "stage", "oracle b(i,0)", "closed form", "abs diff");
    let mut worst: f64 = 0.0;
    for (i, h) in heads.iter().enumerate() {
        let o = pi.get(i, 0);
        worst = worst.max((o - h).abs());
        println!("{i:>5} {o:>20.15} {h:>20.15} {:>10.2e}", (o - h).abs());
    }
    println!("tau: oracle {:.15}, closed form {:.15}", pi.tau(), tau);
    worst = worst.max((pi.tau() - tau).abs());
    if worst > 1e-10 {
        return Err(Error::ModelInconsistency(format!(
            "closed form differs from the oracle by {worst:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_kind() {
        let convergence = Error::Convergence {
            solver: "test",
            iterations: 1,
            residual: 1.0,
            trace: Vec::new(),
        };
        assert_eq!(exit_code(&convergence), 3);
        assert_eq!(exit_code(&Error::ModelInconsistency("x".into())), 3);
        assert_eq!(exit_code(&Error::InvalidParameter("x".into())), 2);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        let io = io_err(Path::new("x"), io::Error::other("x"));
        assert_eq!(exit_code(&io), 4);
    }
}
