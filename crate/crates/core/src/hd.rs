//! Half-duplex 802.11 DCF baseline.
//!
//! The per-node transmission probability follows the refined saturation
//! model with a finite retry limit `R`:
//!
//! ```text
//! tau(p) = 1 / (1 + (1-p)/(1-p^(R+1)) * sum_{i=0..R} p^i (W_i - 1)/2 - (1-p)/2)
//! p(tau) = 1 - (1 - tau)^(n-1)
//! ```
//!
//! Throughput uses the `W/(W-1)` corrections for back-to-back successes of
//! the same station and one extra idle slot after every busy period.

use crate::aggregation::RhoSpec;
use crate::error::{Error, Result};
use crate::params::{BackoffParams, PhyMacParams};
use crate::solver::SolverOptions;

/// Empirical constants of the uniform-ratio collision size approximation.
const UNIFORM_COLLISION_AP_WEIGHT: f64 = 0.3519;
const UNIFORM_COLLISION_BASE: f64 = 0.6481;

#[derive(Debug, Clone, PartialEq)]
pub struct HdSolution {
    pub tau: f64,
    pub p: f64,
    pub n: usize,
    pub backoff: BackoffParams,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HdMetrics {
    pub p_s: f64,
    pub p_tr: f64,
    /// Mean size of a successfully delivered frame.
    pub exp_payload_bytes: f64,
    /// Mean size of the longest frame in a collision; `None` for a single node.
    pub exp_collision_bytes: Option<f64>,
    pub throughput_mbps: f64,
    pub latency_us: f64,
}

/// Transmission probability for a given conditional collision probability.
pub fn tau_of_p(p: f64, backoff: &BackoffParams) -> f64 {
    let r = backoff.r;
    // (1-p)/(1-p^(R+1)) == 1 / sum_{i=0..R} p^i, which stays finite at p = 1.
    let mut attempts = 0.0;
    let mut backoff_slots = 0.0;
    let mut pi = 1.0;
    for i in 0..=r {
        attempts += pi;
        backoff_slots += pi * (f64::from(backoff.window_at(i)) - 1.0) / 2.0;
        pi *= p;
    }
    1.0 / (1.0 + backoff_slots / attempts - (1.0 - p) / 2.0)
}

/// Conditional collision probability seen by one of `n` nodes.
pub fn p_of_tau(tau: f64, n: usize) -> f64 {
    1.0 - (1.0 - tau).powi(n as i32 - 1)
}

/// Damped fixed-point iteration on `tau = tau(p(tau))`.
pub fn solve_hd(n: usize, backoff: &BackoffParams, opts: &SolverOptions) -> Result<HdSolution> {
    if n == 0 {
        return Err(Error::invalid("node count must be at least 1"));
    }
    opts.validate()?;
    let lambda = opts.damping;
    let mut tau = opts.initial_tau;
    let mut trace = Vec::new();
    for iter in 0..opts.max_iter {
        let target = tau_of_p(p_of_tau(tau, n), backoff);
        let residual = (target - tau).abs();
        if iter % 64 == 0 {
            trace.push(residual);
        }
        if residual < opts.tol {
            return Ok(HdSolution {
                tau: target,
                p: p_of_tau(target, n),
                n,
                backoff: backoff.clone(),
                iterations: iter + 1,
                residual,
            });
        }
        tau = (1.0 - lambda) * tau + lambda * target;
    }
    let residual = (tau_of_p(p_of_tau(tau, n), backoff) - tau).abs();
    Err(Error::Convergence {
        solver: "half-duplex fixed point",
        iterations: opts.max_iter,
        residual,
        trace,
    })
}

/// Probability that a busy slot carries exactly one transmission.
pub fn hd_success_probability(tau: f64, n: usize) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid(format!(
            "success probability is undefined for tau = {tau}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("node count must be at least 1"));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let idle = 1.0 - tau;
    Ok(n as f64 * tau * idle.powi(n as i32 - 1) / (1.0 - idle.powi(n as i32)))
}

pub fn hd_transmission_probability(tau: f64, n: usize) -> f64 {
    1.0 - (1.0 - tau).powi(n as i32)
}

/// Mean delivered frame size: the AP always sends `MPDU_max`, stations
/// `mean_rho * MPDU_max`, and each of the `n` nodes wins equally often.
pub fn hd_expected_payload_bytes(n: usize, mean_rho: f64, mpdu_max: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("node count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&mean_rho) {
        return Err(Error::invalid(format!("mean symmetry ratio {mean_rho} outside [0, 1]")));
    }
    Ok((1.0 + (n as f64 - 1.0) * mean_rho) / n as f64 * mpdu_max)
}

/// Probability of two or more simultaneous transmissions.
fn multi_transmission_probability(tau: f64, n: usize) -> f64 {
    let idle = 1.0 - tau;
    1.0 - idle.powi(n as i32) - n as f64 * tau * idle.powi(n as i32 - 1)
}

/// Expected size of the longest frame in a collision.
///
/// Uniform ratios use the closed-form approximation with its fitted
/// constants; a deterministic ratio is computed exactly from the
/// distribution of the collider set.
pub fn hd_expected_collision_bytes(tau: f64, n: usize, rho: &RhoSpec, mpdu_max: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("collisions need at least two nodes"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::invalid(format!("tau = {tau} outside (0, 1)")));
    }
    let denom = multi_transmission_probability(tau, n);
    if !(denom > 0.0) {
        return Err(Error::ModelInconsistency(format!(
            "no probability mass on collisions (tau = {tau}, n = {n})"
        )));
    }
    match *rho {
        RhoSpec::UniformGrid { .. } => {
            let ap_share = tau * p_of_tau(tau, n) / denom;
            Ok((UNIFORM_COLLISION_AP_WEIGHT * ap_share + UNIFORM_COLLISION_BASE) * mpdu_max)
        }
        RhoSpec::Deterministic(r) => {
            let mut loads = vec![r * mpdu_max; n];
            loads[0] = mpdu_max;
            expected_max_collision_load(tau, &loads)
        }
    }
}

/// Expected largest load among the transmitters, given at least two of the
/// nodes (each transmitting independently with probability `tau`) transmit.
pub fn expected_max_collision_load(tau: f64, loads: &[f64]) -> Result<f64> {
    let n = loads.len();
    if n < 2 {
        return Err(Error::invalid("collisions need at least two nodes"));
    }
    let denom = multi_transmission_probability(tau, n);
    if !(denom > 0.0) {
        return Err(Error::ModelInconsistency(format!(
            "no probability mass on collisions (tau = {tau}, n = {n})"
        )));
    }
    let mut sorted = loads.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let idle = 1.0 - tau;
    // The k-th largest load is the collision size when it transmits, all
    // larger ones stay silent, and at least one smaller one transmits.
    let mut acc = 0.0;
    for (k, &load) in sorted.iter().enumerate() {
        let larger_silent = idle.powi(k as i32);
        let some_smaller = 1.0 - idle.powi((n - k - 1) as i32);
        acc += load * tau * larger_silent * some_smaller;
    }
    Ok(acc / denom)
}

/// Saturation throughput and latency for the given ratio assignment.
pub fn hd_metrics(params: &PhyMacParams, sol: &HdSolution, rho: &RhoSpec) -> Result<HdMetrics> {
    let n = sol.n;
    let mpdu = params.mpdu_max();
    let exp_payload = hd_expected_payload_bytes(n, rho.mean()?, mpdu)?;
    let exp_collision = if n >= 2 {
        Some(hd_expected_collision_bytes(sol.tau, n, rho, mpdu)?)
    } else {
        None
    };
    hd_metrics_with_sizes(params, sol, exp_payload, exp_collision)
}

/// Same as [`hd_metrics`] with explicit mean success and collision sizes.
pub fn hd_metrics_with_sizes(
    params: &PhyMacParams,
    sol: &HdSolution,
    exp_payload_bytes: f64,
    exp_collision_bytes: Option<f64>,
) -> Result<HdMetrics> {
    let n = sol.n;
    let p_s = hd_success_probability(sol.tau, n)?;
    let p_tr = hd_transmission_probability(sol.tau, n);
    let w = f64::from(sol.backoff.w0);
    let correction = w / (w - 1.0);
    let sigma = params.slot_us;

    let payload_bits = 8.0 * exp_payload_bytes * correction;
    let t_s = params.t_success_us(exp_payload_bytes)? * correction + sigma;
    let t_c = match exp_collision_bytes {
        Some(bytes) => params.t_collision_us(bytes)? + sigma,
        None => 0.0,
    };
    let denom = (1.0 - p_tr) * sigma + p_tr * p_s * t_s + p_tr * (1.0 - p_s) * t_c;
    let throughput_mbps = p_s * p_tr * payload_bits / denom;
    let latency_us = hd_latency_us(n, throughput_mbps, exp_payload_bytes)?;
    Ok(HdMetrics {
        p_s,
        p_tr,
        exp_payload_bytes,
        exp_collision_bytes,
        throughput_mbps,
        latency_us,
    })
}

pub fn hd_throughput_mbps(params: &PhyMacParams, sol: &HdSolution, rho: &RhoSpec) -> Result<f64> {
    hd_metrics(params, sol, rho).map(|m| m.throughput_mbps)
}

/// Little's law with one head-of-line frame per node: `D = n E[P] / S`.
pub fn hd_latency_us(n: usize, throughput_mbps: f64, exp_payload_bytes: f64) -> Result<f64> {
    if !(throughput_mbps > 0.0) {
        return Err(Error::invalid(format!(
            "latency is undefined for throughput {throughput_mbps}"
        )));
    }
    Ok(n as f64 * 8.0 * exp_payload_bytes / throughput_mbps)
}
