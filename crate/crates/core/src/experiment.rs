//! Experiment grids: analytical model against simulation over a node sweep.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::aggregation::{
    expected_gamma, expected_phi, utilization, AggregationMode, RhoSpec, RHO_MAX, RHO_MIN,
};
use crate::error::{Error, Result};
use crate::hd::{hd_metrics, solve_hd};
use crate::ibfd::{ibfd_metrics, solve_ibfd};
use crate::params::{BackoffParams, PhyMacParams};
use crate::sim::{run_replications, Duplex, Estimate, Execution, Horizon, Replications, Scenario};
use crate::solver::SolverOptions;

pub const CSV_HEADER: [&str; 8] = [
    "experiment",
    "variant",
    "n",
    "metric",
    "analytical",
    "sim_mean",
    "sim_stderr",
    "rel_err",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Throughput,
    Latency,
    /// Mean aggregation factor.
    Gamma,
    /// Mean post-aggregation ratio.
    RhoNew,
    Phi,
    /// Link utilisation in percent.
    Eta,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Throughput => "throughput_mbps",
            Metric::Latency => "latency_us",
            Metric::Gamma => "exp_gamma",
            Metric::RhoNew => "rho_new",
            Metric::Phi => "phi",
            Metric::Eta => "eta_pct",
        }
    }

    fn is_traffic(self) -> bool {
        !matches!(self, Metric::Throughput | Metric::Latency)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "throughput" | "throughput_mbps" => Ok(Metric::Throughput),
            "latency" | "latency_us" => Ok(Metric::Latency),
            "gamma" | "exp_gamma" => Ok(Metric::Gamma),
            "rho_new" => Ok(Metric::RhoNew),
            "phi" => Ok(Metric::Phi),
            "eta" | "eta_pct" => Ok(Metric::Eta),
            other => Err(Error::Config(format!("unknown metric {other:?}"))),
        }
    }
}

/// One curve of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub duplex: Duplex,
    pub aggregation: AggregationMode,
    pub rho: RhoSpec,
}

impl Variant {
    pub fn new(label: &str, duplex: Duplex, aggregation: AggregationMode, rho: RhoSpec) -> Self {
        Variant {
            label: label.to_string(),
            duplex,
            aggregation,
            rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// One row per variant, node count and metric.
    Sweep,
    /// Traffic metrics pooled over the whole sweep, reported with `n = 0`.
    Pooled,
    /// Aggregation rule for every grid ratio; analytical only.
    RuleTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub sweep: Vec<usize>,
    pub variants: Vec<Variant>,
    pub metrics: Vec<Metric>,
    pub runs: usize,
    pub seed: u64,
    pub events: u64,
    /// Metric drawn by [`emit_plot_data`], if any.
    pub plot: Option<Metric>,
    pub phy: PhyMacParams,
    pub backoff: BackoffParams,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub variant: String,
    pub n: usize,
    pub metric: Metric,
    pub analytical: f64,
    pub sim_mean: Option<f64>,
    pub sim_stderr: Option<f64>,
}

impl ResultRow {
    /// `|analytical - simulated| / simulated`.
    pub fn rel_err(&self) -> Option<f64> {
        self.sim_mean
            .filter(|&s| s != 0.0)
            .map(|s| (self.analytical - s).abs() / s.abs())
    }
}

pub const BUILTIN_EXPERIMENTS: [&str; 7] = ["fig5", "fig6", "fig7", "fig8", "table2", "table3", "table4"];

fn even_sweep() -> Vec<usize> {
    (2..=20).step_by(2).collect()
}

fn base(name: &str, kind: ExperimentKind) -> ExperimentSpec {
    ExperimentSpec {
        name: name.to_string(),
        kind,
        sweep: even_sweep(),
        variants: Vec::new(),
        metrics: vec![Metric::Throughput, Metric::Latency],
        runs: 10,
        seed: 2024,
        events: 200_000,
        plot: None,
        phy: PhyMacParams::default(),
        backoff: BackoffParams::default(),
        tol: SolverOptions::default().tol,
    }
}

fn ratio_variants(rho: &RhoSpec) -> Vec<Variant> {
    vec![
        Variant::new("hd", Duplex::Hd, AggregationMode::None, rho.clone()),
        Variant::new("ibfd", Duplex::Ibfd, AggregationMode::None, rho.clone()),
        Variant::new("ibfd-dual", Duplex::Ibfd, AggregationMode::Dual, rho.clone()),
        Variant::new("ibfd-multi", Duplex::Ibfd, AggregationMode::Multi, rho.clone()),
    ]
}

fn mode_variants(rho: &RhoSpec) -> Vec<Variant> {
    AggregationMode::ALL
        .iter()
        .map(|&mode| Variant::new(mode.as_str(), Duplex::Ibfd, mode, rho.clone()))
        .collect()
}

/// Built-in experiment by name.
pub fn builtin(name: &str) -> Result<ExperimentSpec> {
    let fixed = RhoSpec::Deterministic(0.3);
    let uniform = RhoSpec::uniform_default();
    let spec = match name {
        "fig5" | "fig6" => {
            let mut spec = base(name, ExperimentKind::Sweep);
            spec.variants = ratio_variants(&fixed);
            spec.variants.push(Variant::new(
                "ibfd-rho1",
                Duplex::Ibfd,
                AggregationMode::None,
                RhoSpec::Deterministic(1.0),
            ));
            spec.plot = Some(if name == "fig5" { Metric::Throughput } else { Metric::Latency });
            spec
        }
        "fig7" | "fig8" => {
            let mut spec = base(name, ExperimentKind::Sweep);
            spec.variants = ratio_variants(&uniform);
            spec.runs = 200;
            spec.events = 100_000;
            spec.plot = Some(if name == "fig7" { Metric::Throughput } else { Metric::Latency });
            spec
        }
        "table2" => {
            let mut spec = base(name, ExperimentKind::Sweep);
            spec.sweep = vec![10];
            spec.variants = mode_variants(&fixed);
            spec.metrics = vec![Metric::Gamma, Metric::RhoNew, Metric::Phi, Metric::Eta];
            spec.runs = 4;
            spec.events = 100_000;
            spec
        }
        "table3" => {
            let mut spec = base(name, ExperimentKind::RuleTable);
            spec.sweep = vec![0];
            spec.variants = mode_variants(&uniform)[1..].to_vec();
            spec.metrics = vec![Metric::Gamma, Metric::RhoNew];
            spec.runs = 0;
            spec.events = 0;
            spec
        }
        "table4" => {
            let mut spec = base(name, ExperimentKind::Pooled);
            spec.variants = mode_variants(&uniform);
            spec.metrics = vec![Metric::Gamma, Metric::Phi, Metric::Eta];
            spec.runs = 200;
            spec.events = 20_000;
            spec
        }
        other => {
            return Err(Error::Config(format!(
                "unknown experiment {other:?}; built-ins are {}",
                BUILTIN_EXPERIMENTS.join(", ")
            )))
        }
    };
    Ok(spec)
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::invalid("experiment needs a name"));
        }
        if self.sweep.is_empty() {
            return Err(Error::invalid(format!("experiment {} has an empty sweep", self.name)));
        }
        if self.variants.is_empty() {
            return Err(Error::invalid(format!("experiment {} has no variants", self.name)));
        }
        if self.metrics.is_empty() {
            return Err(Error::invalid(format!("experiment {} has no metrics", self.name)));
        }
        let mut labels: Vec<&str> = self.variants.iter().map(|v| v.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("variant labels must be unique"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        self.phy.validate()?;
        for v in &self.variants {
            v.rho.validate()?;
            if v.duplex == Duplex::Hd && v.aggregation != AggregationMode::None {
                return Err(Error::invalid(format!("variant {}: aggregation needs full duplex", v.label)));
            }
            if v.duplex == Duplex::Hd && self.metrics.iter().any(|m| m.is_traffic()) {
                return Err(Error::invalid(format!(
                    "variant {}: traffic metrics are only defined for full duplex",
                    v.label
                )));
            }
        }
        if self.kind != ExperimentKind::RuleTable {
            if self.sweep.iter().any(|&n| n < 2) {
                return Err(Error::invalid("every swept node count must be at least 2"));
            }
            if self.runs == 0 || self.events == 0 {
                return Err(Error::invalid("runs and events must be positive"));
            }
        }
        if self.kind == ExperimentKind::Pooled && self.metrics.iter().any(|m| !m.is_traffic()) {
            return Err(Error::invalid("pooled experiments only report traffic metrics"));
        }
        Ok(())
    }

    fn scenario(&self, variant: &Variant, n: usize) -> Scenario {
        Scenario {
            n,
            duplex: variant.duplex,
            aggregation: variant.aggregation,
            rho: variant.rho.clone(),
            phy: self.phy.clone(),
            backoff: self.backoff.clone(),
            horizon: Horizon::Events(self.events),
            seed: self.seed,
            runs: self.runs,
        }
    }
}

/// Analytical throughput and latency of one variant at `n` nodes.
pub fn analytical_point(
    phy: &PhyMacParams,
    backoff: &BackoffParams,
    variant: &Variant,
    n: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    match variant.duplex {
        Duplex::Hd => {
            let sol = solve_hd(n, backoff, &SolverOptions::default().with_tol(tol))?;
            let m = hd_metrics(phy, &sol, &variant.rho)?;
            Ok((m.throughput_mbps, m.latency_us))
        }
        Duplex::Ibfd => {
            let sol = solve_ibfd(n, backoff, &SolverOptions::ibfd().with_tol(tol))?;
            let dist = variant.rho.distribution()?;
            let phi = expected_phi(variant.aggregation, &dist)?;
            let gamma = expected_gamma(variant.aggregation, &dist)?;
            let m = ibfd_metrics(phy, &sol, phi, gamma)?;
            Ok((m.throughput_mbps, m.latency_us))
        }
    }
}

fn analytical_traffic(variant: &Variant, metric: Metric) -> Result<f64> {
    let dist = variant.rho.distribution()?;
    let phi = expected_phi(variant.aggregation, &dist)?;
    Ok(match metric {
        Metric::Gamma => expected_gamma(variant.aggregation, &dist)?,
        Metric::RhoNew | Metric::Phi => phi,
        Metric::Eta => utilization(phi)?,
        Metric::Throughput | Metric::Latency => unreachable!("not a traffic metric"),
    })
}

/// Pooled traffic ratios of a set of replications, with the spread of the
/// per-run ratios as the error estimate.
fn simulated_traffic(reps: &[&Replications], metric: Metric) -> Estimate {
    let (mut ul_frames, mut dl_frames, mut ul_bits, mut dl_bits) = (0u64, 0u64, 0u64, 0u64);
    let mut per_run = Vec::new();
    for rep in reps {
        for r in &rep.runs {
            ul_frames += r.stats.ul_frames;
            dl_frames += r.stats.dl_frames;
            ul_bits += r.stats.ul_bits;
            dl_bits += r.stats.dl_bits;
            per_run.push(traffic_value(metric, r.stats.measured_gamma(), r.stats.measured_phi()));
        }
    }
    let pooled = traffic_value(
        metric,
        ul_frames as f64 / dl_frames as f64,
        ul_bits as f64 / dl_bits as f64,
    );
    Estimate {
        mean: pooled,
        stderr: Estimate::from_samples(&per_run).stderr,
    }
}

fn traffic_value(metric: Metric, gamma: f64, phi: f64) -> f64 {
    match metric {
        Metric::Gamma => gamma,
        Metric::Eta => (1.0 + phi) / 2.0 * 100.0,
        _ => phi,
    }
}

/// Runs the full grid and returns rows in canonical order.
pub fn run_experiment(spec: &ExperimentSpec, exec: Execution) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut rows = Vec::new();
    let row = |variant: &str, n: usize, metric: Metric, analytical: f64, sim: Option<Estimate>| ResultRow {
        experiment: spec.name.clone(),
        variant: variant.to_string(),
        n,
        metric,
        analytical,
        sim_mean: sim.map(|e| e.mean),
        sim_stderr: sim.map(|e| e.stderr),
    };
    match spec.kind {
        ExperimentKind::RuleTable => {
            let grid = RhoSpec::UniformGrid {
                lo: RHO_MIN,
                hi: RHO_MAX,
                step: 0.1,
            };
            for variant in &spec.variants {
                for rho in grid.values() {
                    let (gamma, rho_new) = variant.aggregation.apply(rho)?;
                    let label = format!("{}/rho={rho}", variant.label);
                    for &metric in &spec.metrics {
                        let value = match metric {
                            Metric::Gamma => f64::from(gamma),
                            Metric::RhoNew | Metric::Phi => rho_new,
                            Metric::Eta => utilization(rho_new)?,
                            _ => return Err(Error::invalid("rule tables only report traffic metrics")),
                        };
                        rows.push(row(&label, 0, metric, value, None));
                    }
                }
            }
        }
        ExperimentKind::Sweep => {
            for variant in &spec.variants {
                for &n in &spec.sweep {
                    let reps = run_replications(&spec.scenario(variant, n), exec)?;
                    let needs_model = spec.metrics.iter().any(|m| !m.is_traffic());
                    let (s, d) = if needs_model {
                        analytical_point(&spec.phy, &spec.backoff, variant, n, spec.tol)?
                    } else {
                        (f64::NAN, f64::NAN)
                    };
                    for &metric in &spec.metrics {
                        let (a, sim) = match metric {
                            Metric::Throughput => (s, reps.throughput),
                            Metric::Latency => (d, reps.latency),
                            m => (analytical_traffic(variant, m)?, simulated_traffic(&[&reps], m)),
                        };
                        rows.push(row(&variant.label, n, metric, a, Some(sim)));
                    }
                }
            }
        }
        ExperimentKind::Pooled => {
            for variant in &spec.variants {
                let reps = spec
                    .sweep
                    .iter()
                    .map(|&n| run_replications(&spec.scenario(variant, n), exec))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&Replications> = reps.iter().collect();
                for &metric in &spec.metrics {
                    let a = analytical_traffic(variant, metric)?;
                    rows.push(row(&variant.label, 0, metric, a, Some(simulated_traffic(&refs, metric))));
                }
            }
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (&a.experiment, &a.variant, a.n, a.metric.as_str()).cmp(&(&b.experiment, &b.variant, b.n, b.metric.as_str()))
    });
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes rows as CSV, sorted, with shortest round-trip float formatting.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut sorted = rows.to_vec();
    sort_rows(&mut sorted);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &sorted {
        w.write_record([
            r.experiment.clone(),
            r.variant.clone(),
            r.n.to_string(),
            r.metric.as_str().to_string(),
            r.analytical.to_string(),
            fmt_opt(r.sim_mean),
            fmt_opt(r.sim_stderr),
            fmt_opt(r.rel_err()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file))
}

/// Reads back a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::Config(format!("bad number {s:?} in {}", path.display())))
        }
    };
    let mut rows = Vec::new();
    for record in reader.records() {
        let rec = record?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!("wrong column count in {}", path.display())));
        }
        rows.push(ResultRow {
            experiment: rec[0].to_string(),
            variant: rec[1].to_string(),
            n: rec[2]
                .parse()
                .map_err(|_| Error::Config(format!("bad node count {:?}", &rec[2])))?,
            metric: rec[3].parse()?,
            analytical: opt(&rec[4])?.unwrap_or(f64::NAN),
            sim_mean: opt(&rec[5])?,
            sim_stderr: opt(&rec[6])?,
        });
    }
    Ok(rows)
}

/// Writes whitespace-separated plot tables and a `manifest.txt` into `dir`.
///
/// For every experiment and plotted metric there are two files:
/// `<experiment>.dat` holds the analytical curves (`n` then one column per
/// variant), `<experiment>_sim.dat` the simulated means each followed by its
/// standard error. Returns the files written, manifest last.
pub fn emit_plot_data(rows: &[ResultRow], dir: &Path, plots: &[(String, Metric)]) -> Result<Vec<std::path::PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let mut manifest = String::from("# file\texperiment\tmetric\tcontent\n");
    for (experiment, metric) in plots {
        // variant -> n -> row, variants kept in first-seen order.
        let mut order: Vec<&str> = Vec::new();
        let mut table: BTreeMap<usize, BTreeMap<&str, &ResultRow>> = BTreeMap::new();
        for r in rows.iter().filter(|r| &r.experiment == experiment && r.metric == *metric && r.n > 0) {
            if !order.contains(&r.variant.as_str()) {
                order.push(&r.variant);
            }
            table.entry(r.n).or_default().insert(&r.variant, r);
        }
        if table.is_empty() {
            continue;
        }
        let mut ana = format!("# {experiment}: analytical {metric}\n# n");
        let mut sim = format!("# {experiment}: simulated {metric}, mean and standard error\n# n");
        for v in &order {
            ana.push_str(&format!(" {v}"));
            sim.push_str(&format!(" {v} {v}_stderr"));
        }
        ana.push('\n');
        sim.push('\n');
        let missing = "nan".to_string();
        for (n, cols) in &table {
            ana.push_str(&n.to_string());
            sim.push_str(&n.to_string());
            for v in &order {
                let r = cols.get(v);
                ana.push(' ');
                ana.push_str(&r.map(|r| r.analytical.to_string()).unwrap_or_else(|| missing.clone()));
                for val in [r.and_then(|r| r.sim_mean), r.and_then(|r| r.sim_stderr)] {
                    sim.push(' ');
                    sim.push_str(&val.map(|x| x.to_string()).unwrap_or_else(|| missing.clone()));
                }
            }
            ana.push('\n');
            sim.push('\n');
        }
        for (suffix, body, content) in [("", &ana, "analytical"), ("_sim", &sim, "simulated")] {
            let name = format!("{experiment}{suffix}.dat");
            let path = dir.join(&name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            manifest.push_str(&format!("{name}\t{experiment}\t{metric}\t{content}\n"));
            written.push(path);
        }
    }
    let path = dir.join("manifest.txt");
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(name: &str) -> ExperimentSpec {
        let mut spec = builtin(name).unwrap();
        spec.sweep = vec![2, 4];
        spec.runs = 2;
        spec.events = 2_000;
        spec
    }

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_EXPERIMENTS {
            builtin(name).unwrap().validate().unwrap();
        }
        assert!(builtin("fig9").is_err());
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let mut spec = tiny("fig5");
        spec.sweep.clear();
        assert!(matches!(run_experiment(&spec, Execution::Sequential), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn fig5_shape() {
        let spec = builtin("fig5").unwrap();
        assert_eq!(spec.variants.len() * spec.sweep.len() * spec.metrics.len(), 100);
        let rows = run_experiment(&tiny("fig5"), Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 5 * 2 * 2);
        for r in &rows {
            let rel = r.rel_err().unwrap();
            assert!(rel < 0.2, "{r:?}");
        }
    }

    #[test]
    fn csv_round_trip_and_order() {
        let rows = run_experiment(&tiny("fig7"), Execution::Sequential).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit_csv(&rows, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, rows);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("experiment,variant,n,metric,analytical,sim_mean,sim_stderr,rel_err\n"));
        let mut reversed = rows.clone();
        reversed.reverse();
        let mut buf = Vec::new();
        write_csv(&reversed, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn rule_table_has_every_cell() {
        let rows = run_experiment(&builtin("table3").unwrap(), Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 2 * 9 * 2);
        let find = |variant: &str, metric: Metric| {
            rows.iter()
                .find(|r| r.variant == variant && r.metric == metric)
                .unwrap()
                .analytical
        };
        assert_eq!(find("multi/rho=0.3", Metric::Gamma), 3.0);
        assert_eq!(find("dual/rho=0.6", Metric::RhoNew), 0.6);
        assert!(rows.iter().all(|r| r.sim_mean.is_none() && r.rel_err().is_none()));
    }

    #[test]
    fn plot_files() {
        let rows = run_experiment(&tiny("fig6"), Execution::Sequential).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plot_data(&rows, dir.path(), &[("fig6".into(), Metric::Latency)]).unwrap();
        assert_eq!(files.len(), 3);
        let ana = fs::read_to_string(dir.path().join("fig6.dat")).unwrap();
        let data: Vec<&str> = ana.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 2);
        assert!(data.iter().all(|l| l.split_whitespace().count() == 6));
        let sim = fs::read_to_string(dir.path().join("fig6_sim.dat")).unwrap();
        assert!(sim
            .lines()
            .filter(|l| !l.starts_with('#'))
            .all(|l| l.split_whitespace().count() == 11));
        let manifest = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(manifest.contains("fig6.dat\tfig6\tlatency_us\tanalytical"));
    }
}
