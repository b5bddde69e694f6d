//! In-band full-duplex DCF: one AP and `n - 1` stations.
//!
//! Each node runs the backoff chain of [`chain`] with its own reply-back
//! probability. The AP addresses a uniformly random station per frame. A
//! direct transmission by the AP succeeds when no station other than its
//! target transmits; a station's direct transmission succeeds when the AP is
//! silent or is itself sending to that station.

pub mod chain;
pub mod oracle;

use crate::error::{Error, Result};
use crate::params::{BackoffParams, PhyMacParams};
use crate::solver::SolverOptions;

pub use chain::{b00, decrement_factor, stage_heads, tau_from_chain, ChainParams};
pub use oracle::{stationary_oracle, StationaryDistribution};

/// Joint fixed point of the AP and station chains.
#[derive(Debug, Clone, PartialEq)]
pub struct IbfdSolution {
    pub tau_ap: f64,
    pub tau_sta: f64,
    pub p_ap: f64,
    pub p_sta: f64,
    pub beta_ap: f64,
    pub beta_sta: f64,
    pub alpha_ap: f64,
    pub alpha_sta: f64,
    /// Node-average direct transmission probability.
    pub tau_avg: f64,
    pub n: usize,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbfdMetrics {
    pub p_s: f64,
    pub p_tr: f64,
    pub throughput_mbps: f64,
    pub latency_us: f64,
    /// Downlink frame size, always `MPDU_max`.
    pub exp_payload_bytes: f64,
    pub phi: f64,
    pub exp_gamma: f64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "full-duplex model needs an AP and at least one station, got n = {n}"
        )));
    }
    Ok(())
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Probability that exactly one station transmits directly; all of them
/// address the AP, which then replies back.
pub fn beta_ap(tau_sta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_prob("tau_sta", tau_sta)?;
    Ok((n - 1) as f64 * tau_sta * (1.0 - tau_sta).powi(n as i32 - 2))
}

/// Probability that the AP alone transmits and picks this station.
pub fn beta_sta(tau_ap: f64, tau_sta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_prob("tau_ap", tau_ap)?;
    check_prob("tau_sta", tau_sta)?;
    Ok(tau_ap * (1.0 - tau_sta).powi(n as i32 - 2) / (n - 1) as f64)
}

/// AP collision probability: fails unless at most its target station transmits.
pub fn p_ap(tau_sta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_prob("tau_sta", tau_sta)?;
    let idle = 1.0 - tau_sta;
    let ok = idle.powi(n as i32 - 1) + tau_sta * idle.powi(n as i32 - 2);
    Ok((1.0 - ok).max(0.0))
}

/// Station collision probability: fails if another station transmits, or
/// the AP transmits to someone else.
pub fn p_sta(tau_ap: f64, tau_sta: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    check_prob("tau_ap", tau_ap)?;
    check_prob("tau_sta", tau_sta)?;
    let others = (1.0 - tau_sta).powi(n as i32 - 2);
    let ok = (1.0 - tau_ap) * others + tau_ap * others / (n - 1) as f64;
    Ok((1.0 - ok).max(0.0))
}

fn chain_tau(p: f64, beta: f64, backoff: &BackoffParams) -> Result<f64> {
    tau_from_chain(&ChainParams::new(p, beta, backoff.clone())?)
}

/// Damped Gauss-Seidel iteration on the coupled AP/station fixed point.
pub fn solve_ibfd(n: usize, backoff: &BackoffParams, opts: &SolverOptions) -> Result<IbfdSolution> {
    check_n(n)?;
    opts.validate()?;
    let lambda = opts.damping;
    let mut tau_ap = opts.initial_tau;
    let mut tau_sta = opts.initial_tau;
    let mut trace = Vec::new();
    let mut residual = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let target_ap = chain_tau(p_ap(tau_sta, n)?, beta_ap(tau_sta, n)?, backoff)?;
        let next_ap = (1.0 - lambda) * tau_ap + lambda * target_ap;
        let target_sta = chain_tau(
            p_sta(next_ap, tau_sta, n)?,
            beta_sta(next_ap, tau_sta, n)?,
            backoff,
        )?;
        residual = (target_ap - tau_ap).abs().max((target_sta - tau_sta).abs());
        if iter % 64 == 0 {
            trace.push(residual);
        }
        tau_ap = next_ap;
        tau_sta = (1.0 - lambda) * tau_sta + lambda * target_sta;
        if residual < opts.tol {
            return Ok(solution_at(tau_ap, tau_sta, n, iter + 1, residual));
        }
    }
    Err(Error::Convergence {
        solver: "full-duplex fixed point",
        iterations: opts.max_iter,
        residual,
        trace,
    })
}

fn solution_at(tau_ap: f64, tau_sta: f64, n: usize, iterations: usize, residual: f64) -> IbfdSolution {
    // Inputs are already validated probabilities, so the formulas cannot fail.
    let beta_ap = beta_ap(tau_sta, n).unwrap_or(0.0);
    let beta_sta = beta_sta(tau_ap, tau_sta, n).unwrap_or(0.0);
    IbfdSolution {
        tau_ap,
        tau_sta,
        p_ap: p_ap(tau_sta, n).unwrap_or(0.0),
        p_sta: p_sta(tau_ap, tau_sta, n).unwrap_or(0.0),
        beta_ap,
        beta_sta,
        alpha_ap: 1.0 - beta_ap,
        alpha_sta: 1.0 - beta_sta,
        tau_avg: tau_ap / n as f64 + (n - 1) as f64 / n as f64 * tau_sta,
        n,
        iterations,
        residual,
    }
}

/// Probabilities of the three kinds of successful event, unconditioned:
/// AP alone, one station alone, AP and its own target together.
pub fn success_terms(tau_ap: f64, tau_sta: f64, n: usize) -> Result<[f64; 3]> {
    check_n(n)?;
    check_prob("tau_ap", tau_ap)?;
    check_prob("tau_sta", tau_sta)?;
    let idle_ap = 1.0 - tau_ap;
    let idle_sta = 1.0 - tau_sta;
    let others = idle_sta.powi(n as i32 - 2);
    Ok([
        tau_ap * others * idle_sta,
        (n - 1) as f64 * tau_sta * idle_ap * others,
        tau_ap * tau_sta * others,
    ])
}

pub fn p_tr_at(tau_ap: f64, tau_sta: f64, n: usize) -> f64 {
    1.0 - (1.0 - tau_ap) * (1.0 - tau_sta).powi(n as i32 - 1)
}

/// Probability that at least one node transmits directly.
pub fn p_tr_ibfd(sol: &IbfdSolution) -> f64 {
    p_tr_at(sol.tau_ap, sol.tau_sta, sol.n)
}

/// Success probability of a busy event, given explicit transmission probabilities.
pub fn p_success_at(tau_ap: f64, tau_sta: f64, n: usize) -> Result<f64> {
    let terms = success_terms(tau_ap, tau_sta, n)?;
    let p_tr = p_tr_at(tau_ap, tau_sta, n);
    if !(p_tr > 0.0) {
        return Err(Error::invalid("success probability is undefined when nobody transmits"));
    }
    Ok((terms.iter().sum::<f64>() / p_tr).min(1.0))
}

pub fn p_success_ibfd(sol: &IbfdSolution) -> Result<f64> {
    p_success_at(sol.tau_ap, sol.tau_sta, sol.n)
}

/// Saturation throughput; every exchange carries `MPDU_max` downlink and
/// `phi * MPDU_max` uplink on average.
pub fn ibfd_throughput_mbps(params: &PhyMacParams, sol: &IbfdSolution, phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::invalid(format!("full-duplex factor {phi} outside [0, 1]")));
    }
    let p_s = p_success_ibfd(sol)?;
    let p_tr = p_tr_ibfd(sol);
    let mpdu = params.mpdu_max();
    let t = params.t_success_us(mpdu)?;
    let sigma = params.slot_us;
    let denom = (1.0 - p_tr) * sigma + p_tr * p_s * t + p_tr * (1.0 - p_s) * t;
    Ok(p_s * p_tr * 8.0 * mpdu * (1.0 + phi) / denom)
}

/// Little's law over the `n` head-of-line frames, counting the `1 + E[gamma]`
/// frames delivered per exchange.
pub fn ibfd_latency_us(n: usize, s_mbps: f64, phi: f64, exp_gamma: f64, mpdu_max: f64) -> Result<f64> {
    if !(s_mbps > 0.0) {
        return Err(Error::invalid(format!("latency is undefined for throughput {s_mbps}")));
    }
    if !(exp_gamma >= 1.0) {
        return Err(Error::invalid(format!("expected aggregation {exp_gamma} below 1")));
    }
    Ok(n as f64 * 8.0 * mpdu_max * (1.0 + phi) / ((1.0 + exp_gamma) * s_mbps))
}

pub fn ibfd_metrics(params: &PhyMacParams, sol: &IbfdSolution, phi: f64, exp_gamma: f64) -> Result<IbfdMetrics> {
    let throughput_mbps = ibfd_throughput_mbps(params, sol, phi)?;
    let mpdu = params.mpdu_max();
    Ok(IbfdMetrics {
        p_s: p_success_ibfd(sol)?,
        p_tr: p_tr_ibfd(sol),
        throughput_mbps,
        latency_us: ibfd_latency_us(sol.n, throughput_mbps, phi, exp_gamma, mpdu)?,
        exp_payload_bytes: mpdu,
        phi,
        exp_gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn solve(n: usize) -> IbfdSolution {
        solve_ibfd(n, &BackoffParams::default(), &SolverOptions::ibfd()).unwrap()
    }

    #[test]
    fn hand_values_at_three_nodes() {
        assert_relative_eq!(beta_ap(0.1, 3).unwrap(), 0.18, epsilon = 1e-15);
        assert_relative_eq!(beta_sta(0.2, 0.1, 3).unwrap(), 0.09, epsilon = 1e-15);
        assert_relative_eq!(p_ap(0.1, 3).unwrap(), 0.10, epsilon = 1e-15);
        assert_relative_eq!(p_sta(0.2, 0.1, 3).unwrap(), 0.19, epsilon = 1e-15);
        assert_relative_eq!(p_tr_at(0.2, 0.1, 3), 0.352, epsilon = 1e-15);
    }

    #[test]
    fn two_nodes_reduce_to_each_other() {
        for &t in &[0.0, 0.05, 0.3, 1.0] {
            assert_eq!(beta_ap(t, 2).unwrap(), t);
            assert_eq!(beta_sta(t, 0.4, 2).unwrap(), t);
            assert_eq!(p_ap(t, 2).unwrap(), 0.0);
            assert_eq!(p_sta(t, 0.4, 2).unwrap(), 0.0);
        }
        assert_eq!(beta_ap(0.0, 7).unwrap(), 0.0);
        assert_eq!(beta_sta(0.0, 0.2, 7).unwrap(), 0.0);
        assert_eq!(p_ap(0.0, 7).unwrap(), 0.0);
        assert_eq!(p_sta(0.0, 0.0, 7).unwrap(), 0.0);
    }

    #[test]
    fn too_few_nodes() {
        assert!(beta_ap(0.1, 1).is_err());
        assert!(beta_sta(0.1, 0.1, 1).is_err());
        assert!(p_ap(0.1, 0).is_err());
        assert!(solve_ibfd(1, &BackoffParams::default(), &SolverOptions::ibfd()).is_err());
    }

    #[test]
    fn two_node_solution_is_collision_free() {
        let sol = solve(2);
        assert!(sol.p_ap <= 1e-10 && sol.p_sta <= 1e-10);
        assert_relative_eq!(p_success_ibfd(&sol).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(sol.tau_ap, sol.tau_sta, max_relative = 1e-8);
    }

    #[test]
    fn fixed_point_residuals() {
        let backoff = BackoffParams::default();
        for n in [2, 5, 10, 20] {
            let sol = solve(n);
            let ap = chain_tau(sol.p_ap, sol.beta_ap, &backoff).unwrap();
            let sta = chain_tau(sol.p_sta, sol.beta_sta, &backoff).unwrap();
            assert!((ap - sol.tau_ap).abs() < 1e-9, "n={n}");
            assert!((sta - sol.tau_sta).abs() < 1e-9, "n={n}");
            assert_eq!(sol.alpha_ap, 1.0 - sol.beta_ap);
            assert_eq!(sol.alpha_sta, 1.0 - sol.beta_sta);
            let avg = sol.tau_ap / n as f64 + (n - 1) as f64 / n as f64 * sol.tau_sta;
            assert_eq!(sol.tau_avg, avg);
        }
    }

    #[test]
    fn starting_point_does_not_matter() {
        let backoff = BackoffParams::default();
        for n in [3, 12] {
            let sols: Vec<_> = [0.01, 0.1, 0.5]
                .iter()
                .map(|&t| {
                    let opts = SolverOptions {
                        initial_tau: t,
                        ..SolverOptions::ibfd()
                    };
                    solve_ibfd(n, &backoff, &opts).unwrap()
                })
                .collect();
            for s in &sols[1..] {
                assert!((s.tau_ap - sols[0].tau_ap).abs() < 1e-8);
                assert!((s.tau_sta - sols[0].tau_sta).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = SolverOptions {
            max_iter: 2,
            ..SolverOptions::ibfd()
        };
        match solve_ibfd(10, &BackoffParams::default(), &opts) {
            Err(Error::Convergence { iterations, trace, .. }) => {
                assert_eq!(iterations, 2);
                assert!(!trace.is_empty());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn silent_ap_reduces_to_station_contention() {
        // With tau_ap = 0 only the n - 1 stations contend, as in half duplex.
        let (tau, n) = (0.07, 6);
        let p_s = p_success_at(0.0, tau, n).unwrap();
        let stations = n - 1;
        let hd = crate::hd::hd_success_probability(tau, stations).unwrap();
        assert_relative_eq!(p_s, hd, max_relative = 1e-13);
    }

    #[test]
    fn throughput_is_linear_in_one_plus_phi() {
        let params = PhyMacParams::default();
        let sol = solve(8);
        let s0 = ibfd_throughput_mbps(&params, &sol, 0.0).unwrap();
        let s1 = ibfd_throughput_mbps(&params, &sol, 1.0).unwrap();
        assert_relative_eq!(s1, 2.0 * s0, max_relative = 1e-14);
        assert!(ibfd_throughput_mbps(&params, &sol, 1.5).is_err());
    }

    #[test]
    fn latency_scaling() {
        let d1 = ibfd_latency_us(10, 50.0, 0.3, 1.0, 7991.0).unwrap();
        let d3 = ibfd_latency_us(10, 50.0, 0.3, 3.0, 7991.0).unwrap();
        assert_relative_eq!(d3 / d1, 0.5, max_relative = 1e-14);
        let d20 = ibfd_latency_us(20, 50.0, 0.3, 1.0, 7991.0).unwrap();
        assert_relative_eq!(d20 / d1, 2.0, max_relative = 1e-14);
        assert!(ibfd_latency_us(10, 0.0, 0.3, 1.0, 7991.0).is_err());
        assert!(ibfd_latency_us(10, 10.0, 0.3, 0.5, 7991.0).is_err());
    }

    #[test]
    fn latency_ignores_phi_when_throughput_tracks_it() {
        let params = PhyMacParams::default();
        let sol = solve(6);
        let d = |phi: f64| {
            let s = ibfd_throughput_mbps(&params, &sol, phi).unwrap();
            ibfd_latency_us(6, s, phi, 1.0, params.mpdu_max()).unwrap()
        };
        assert_relative_eq!(d(0.3), d(1.0), max_relative = 1e-13);
    }

    #[test]
    fn collision_probabilities_grow_with_n() {
        let mut last = (0.0, 0.0);
        for n in 2..=20 {
            let sol = solve(n);
            assert!(sol.p_ap >= last.0 && sol.p_sta >= last.1, "n={n}");
            last = (sol.p_ap, sol.p_sta);
        }
    }
}
