//! Independent replications of a scenario.

use rand::seq::SliceRandom;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{assignment_rng, run_seed};
use super::{run_with_traffic, Scenario, SimStats};
use crate::aggregation::{RhoSpec, TrafficProfile};
use crate::error::{Error, Result};

/// How replications are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on, otherwise
    /// runs sequentially.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Estimate {
        let k = samples.len();
        if k == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / k as f64;
        if k == 1 {
            return Estimate { mean, stderr: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
        Estimate {
            mean,
            stderr: (var / k as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub throughput_mbps: f64,
    pub latency_us: f64,
    pub hol_latency_us: f64,
    /// Full-duplex factor and mean aggregation of the run's ratio draw.
    pub phi: f64,
    pub exp_gamma: f64,
    #[serde(skip)]
    pub stats: SimStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replications {
    pub runs: Vec<RunSummary>,
    pub throughput: Estimate,
    pub latency: Estimate,
    pub hol_latency: Estimate,
}

impl Replications {
    /// Uplink frames per downlink frame over all runs.
    pub fn pooled_gamma(&self) -> f64 {
        let (ul, dl) = self.runs.iter().fold((0u64, 0u64), |(u, d), r| {
            (u + r.stats.ul_frames, d + r.stats.dl_frames)
        });
        ul as f64 / dl as f64
    }

    /// Uplink bits per downlink bit over all runs.
    pub fn pooled_phi(&self) -> f64 {
        let (ul, dl) = self
            .runs
            .iter()
            .fold((0u64, 0u64), |(u, d), r| (u + r.stats.ul_bits, d + r.stats.dl_bits));
        ul as f64 / dl as f64
    }
}

/// Ratio of every station in every run, indexed `[run][station]`.
///
/// For a random spec each station slot walks through shuffled copies of the
/// grid, so within any run the slot is still uniform on the grid while
/// across runs every value appears almost equally often. Slot `s` gets the
/// same sequence whatever the node count.
pub fn stratified_rhos(spec: &RhoSpec, master: u64, runs: usize, stations: usize) -> Vec<Vec<f64>> {
    let RhoSpec::UniformGrid { .. } = spec else {
        let RhoSpec::Deterministic(rho) = *spec else { unreachable!() };
        return vec![vec![rho; stations]; runs];
    };
    let values = spec.values();
    let mut table = vec![Vec::with_capacity(stations); runs];
    for slot in 0..stations {
        let mut rng = assignment_rng(master, slot);
        let mut block = values.clone();
        let mut pos = block.len();
        for row in table.iter_mut() {
            if pos == block.len() {
                block.shuffle(&mut rng);
                pos = 0;
            }
            row.push(block[pos]);
            pos += 1;
        }
    }
    table
}

fn one_run(scenario: &Scenario, run: usize, rhos: &[f64]) -> Result<RunSummary> {
    let traffic = TrafficProfile::new(rhos.to_vec(), scenario.aggregation)?;
    let seed = run_seed(scenario.seed, run);
    let stats = run_with_traffic(scenario, &traffic, seed)?;
    Ok(RunSummary {
        run,
        seed,
        throughput_mbps: stats.throughput_mbps()?,
        latency_us: stats.mean_latency_us()?,
        hol_latency_us: stats.mean_hol_latency_us()?,
        phi: traffic.phi,
        exp_gamma: traffic.exp_gamma,
        stats,
    })
}

/// Runs `scenario.runs` replications seeded from `scenario.seed`.
pub fn run_replications(scenario: &Scenario, exec: Execution) -> Result<Replications> {
    scenario.validate()?;
    let table = stratified_rhos(&scenario.rho, scenario.seed, scenario.runs, scenario.n - 1);
    let runs: Vec<RunSummary> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => table
            .par_iter()
            .enumerate()
            .map(|(r, rhos)| one_run(scenario, r, rhos))
            .collect::<Result<_>>()?,
        _ => table
            .iter()
            .enumerate()
            .map(|(r, rhos)| one_run(scenario, r, rhos))
            .collect::<Result<_>>()?,
    };
    if runs.is_empty() {
        return Err(Error::invalid("no replications were run"));
    }
    let pick = |f: fn(&RunSummary) -> f64| Estimate::from_samples(&runs.iter().map(f).collect::<Vec<_>>());
    Ok(Replications {
        throughput: pick(|r| r.throughput_mbps),
        latency: pick(|r| r.latency_us),
        hol_latency: pick(|r| r.hol_latency_us),
        runs,
    })
}
