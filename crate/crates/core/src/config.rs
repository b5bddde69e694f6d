//! TOML configuration.
//!
//! ```toml
//! [phy_mac]          # any PhyMacParams field; defaults are the 802.11ac values
//! data_rate_mbps = 234.0
//!
//! [backoff]
//! retry_limit = 4    # half-duplex retransmissions; m follows from cw_min/cw_max
//!
//! [scenario]
//! n = 10
//! duplex = "ibfd"                 # hd | ibfd
//! aggregation = "none"            # none | dual | multi
//! rho = "deterministic:0.3"       # or "uniform:0.1:0.9:step0.1"
//! events = 200000                 # or duration_ms = 5000
//! seed = 1
//! runs = 1
//!
//! [experiment]
//! name = "my-sweep"
//! sweep = [2, 4, 6]
//! metrics = ["throughput", "latency"]
//! runs = 20
//! events = 100000
//! seed = 7
//! plot = "throughput"
//! variants = [
//!   { label = "hd", duplex = "hd", rho = "deterministic:0.3" },
//!   { label = "multi", duplex = "ibfd", aggregation = "multi", rho = "deterministic:0.3" },
//! ]
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::aggregation::{AggregationMode, RhoSpec};
use crate::error::{Error, Result};
use crate::experiment::{ExperimentKind, ExperimentSpec, Metric, Variant};
use crate::params::{BackoffParams, Nanos, PhyMacParams, DEFAULT_RETRY_LIMIT};
use crate::sim::{Horizon, Scenario};
use crate::solver::SolverOptions;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    phy_mac: PhyMacParams,
    #[serde(default)]
    backoff: RawBackoff,
    #[serde(default)]
    scenario: RawScenario,
    experiment: Option<RawExperiment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackoff {
    retry_limit: Option<u32>,
    max_stage: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    n: Option<usize>,
    duplex: Option<String>,
    aggregation: Option<String>,
    rho: Option<String>,
    events: Option<u64>,
    duration_ms: Option<f64>,
    seed: Option<u64>,
    runs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: String,
    #[serde(default)]
    pooled: bool,
    sweep: Vec<usize>,
    variants: Vec<RawVariant>,
    metrics: Option<Vec<String>>,
    runs: Option<usize>,
    events: Option<u64>,
    seed: Option<u64>,
    plot: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    label: String,
    duplex: String,
    aggregation: Option<String>,
    rho: String,
}

/// Parsed configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub phy: PhyMacParams,
    pub backoff: BackoffParams,
    pub scenario: Scenario,
    pub experiment: Option<ExperimentSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Config::parse("").expect("empty configuration is valid")
    }
}

fn parse_field<T: std::str::FromStr<Err = Error>>(value: Option<&str>, default: T) -> Result<T> {
    value.map_or(Ok(default), str::parse)
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let phy = raw.phy_mac;
        phy.validate().map_err(|e| Error::Config(e.to_string()))?;
        let m = match raw.backoff.max_stage {
            Some(m) => m,
            None => phy.max_backoff_stage()?,
        };
        let backoff = BackoffParams::new(
            phy.cw_min,
            m,
            raw.backoff.retry_limit.unwrap_or(DEFAULT_RETRY_LIMIT),
            phy.cw_max,
        )?;

        let s = raw.scenario;
        let horizon = match (s.events, s.duration_ms) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either events or duration_ms, not both".into()))
            }
            (_, Some(ms)) if !(ms > 0.0 && ms.is_finite()) => {
                return Err(Error::Config(format!("duration_ms must be positive, got {ms}")))
            }
            (_, Some(ms)) => Horizon::Time(Nanos::from_us(ms * 1e3)),
            (events, None) => Horizon::Events(events.unwrap_or(200_000)),
        };
        let defaults = Scenario::default();
        let scenario = Scenario {
            n: s.n.unwrap_or(defaults.n),
            duplex: parse_field(s.duplex.as_deref(), defaults.duplex)?,
            aggregation: parse_field(s.aggregation.as_deref(), defaults.aggregation)?,
            rho: parse_field(s.rho.as_deref(), defaults.rho)?,
            phy: phy.clone(),
            backoff: backoff.clone(),
            horizon,
            seed: s.seed.unwrap_or(defaults.seed),
            runs: s.runs.unwrap_or(defaults.runs),
        };

        let experiment = raw
            .experiment
            .map(|e| experiment_from_raw(e, &phy, &backoff))
            .transpose()?;
        Ok(Config {
            phy,
            backoff,
            scenario,
            experiment,
        })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::parse(&text)
    }
}

fn experiment_from_raw(e: RawExperiment, phy: &PhyMacParams, backoff: &BackoffParams) -> Result<ExperimentSpec> {
    let variants = e
        .variants
        .into_iter()
        .map(|v| {
            Ok(Variant {
                label: v.label,
                duplex: v.duplex.parse()?,
                aggregation: parse_field(v.aggregation.as_deref(), AggregationMode::None)?,
                rho: v.rho.parse::<RhoSpec>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metrics = match e.metrics {
        Some(list) => list.iter().map(|m| m.parse()).collect::<Result<Vec<Metric>>>()?,
        None if e.pooled => vec![Metric::Gamma, Metric::Phi, Metric::Eta],
        None => vec![Metric::Throughput, Metric::Latency],
    };
    let plot = e.plot.as_deref().map(str::parse).transpose()?;
    Ok(ExperimentSpec {
        name: e.name,
        kind: if e.pooled { ExperimentKind::Pooled } else { ExperimentKind::Sweep },
        sweep: e.sweep,
        variants,
        metrics,
        runs: e.runs.unwrap_or(10),
        seed: e.seed.unwrap_or(1),
        events: e.events.unwrap_or(200_000),
        plot,
        phy: phy.clone(),
        backoff: backoff.clone(),
        tol: SolverOptions::default().tol,
    })
}
