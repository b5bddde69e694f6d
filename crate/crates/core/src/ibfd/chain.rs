//! Closed-form stationary solution of the per-node backoff chain.
//!
//! State `(i, k)` is backoff stage `i` and counter `k`. From `(i, k)` with
//! `k >= 1` the counter decrements with probability `alpha`; with the
//! complementary probability `beta` another node addresses this one, it
//! replies back, and it restarts at stage 0 with a fresh counter. A node in
//! `(i, 0)` transmits directly; it returns to stage 0 on success and moves
//! to stage `i + 1` on a collision, except at stage `m` where it resets.

use crate::error::{Error, Result};
use crate::params::BackoffParams;

/// Parameters of one node's backoff chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainParams {
    /// Conditional collision probability of a direct transmission.
    pub p: f64,
    /// Per-slot reply-back probability.
    pub beta: f64,
    pub backoff: BackoffParams,
}

impl ChainParams {
    pub fn new(p: f64, beta: f64, backoff: BackoffParams) -> Result<Self> {
        let chain = ChainParams { p, beta, backoff };
        chain.validate()?;
        Ok(chain)
    }

    /// Decrement probability, `1 - beta`.
    pub fn alpha(&self) -> f64 {
        1.0 - self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.p) {
            return Err(Error::invalid(format!("collision probability {} outside [0, 1)", self.p)));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::invalid(format!("reply-back probability {} outside [0, 1]", self.beta)));
        }
        if self.backoff.windows.len() != self.backoff.m as usize + 1 {
            return Err(Error::invalid("backoff ladder does not have m + 1 windows"));
        }
        Ok(())
    }

    /// `(1 - alpha^W) / (W (1 - alpha))` for every window of the ladder.
    fn window_factors(&self) -> Vec<f64> {
        self.backoff
            .windows
            .iter()
            .map(|&w| decrement_factor(self.beta, w))
            .collect()
    }
}

/// `(1 - alpha^W) / (W (1 - alpha))` with `alpha = 1 - beta`, i.e. the mean
/// of `alpha^j` over `j < W`. Evaluated through `expm1`/`ln_1p` so that it
/// stays accurate as `beta -> 0`, where it tends to 1.
pub fn decrement_factor(beta: f64, window: u32) -> f64 {
    let w = f64::from(window);
    if beta == 0.0 {
        return 1.0;
    }
    -(w * (-beta).ln_1p()).exp_m1() / (w * beta)
}

/// Stationary probability of state `(0, 0)` given the chain's own `tau`.
pub fn b00(chain: &ChainParams, tau: f64) -> Result<f64> {
    chain.validate()?;
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::invalid(format!("tau = {tau} outside [0, 1]")));
    }
    let s = chain.window_factors();
    let (p, beta, alpha) = (chain.p, chain.beta, chain.alpha());
    let denom = 1.0 - p.powi(chain.backoff.m as i32 + 1) * s.iter().product::<f64>();
    if !(denom > 0.0) {
        return Err(Error::ModelInconsistency(format!(
            "b00 denominator {denom} is not positive"
        )));
    }
    // (1 - alpha^W0)/W0 * ((alpha - p)/(1 - alpha) tau + 1) == s0 ((alpha - p) tau + beta)
    Ok(s[0] * ((alpha - p) * tau + beta) / denom)
}

/// `b_{i,0} / b_{0,0}` for `i = 0..=m`.
fn head_ratios(chain: &ChainParams, s: &[f64]) -> Vec<f64> {
    let mut ratios = Vec::with_capacity(s.len());
    let mut r = 1.0;
    ratios.push(r);
    for &si in &s[1..] {
        r *= chain.p * si;
        ratios.push(r);
    }
    ratios
}

/// Direct-transmission probability `tau = sum_i b_{i,0}`.
///
/// `b_{0,0}` is affine in `tau`, so substituting it into the sum gives a
/// linear equation that is solved exactly.
pub fn tau_from_chain(chain: &ChainParams) -> Result<f64> {
    chain.validate()?;
    let s = chain.window_factors();
    let g: f64 = head_ratios(chain, &s).iter().sum();
    let (p, beta, alpha) = (chain.p, chain.beta, chain.alpha());
    let tau = if beta == 0.0 {
        // Without reply-back the normalisation drops out of the b00 balance;
        // use the plain chain instead: stage i holds b_{i,0} (W_i + 1) / 2.
        let mut occupancy = 0.0;
        let mut pi = 1.0;
        for &w in &chain.backoff.windows {
            occupancy += pi * (f64::from(w) + 1.0) / 2.0;
            pi *= p;
        }
        g / occupancy
    } else {
        let denom = 1.0 - p.powi(chain.backoff.m as i32 + 1) * s.iter().product::<f64>();
        let lhs = denom - g * s[0] * (alpha - p);
        if !(lhs > 0.0) {
            return Err(Error::ModelInconsistency(format!(
                "transmission probability equation is singular ({lhs})"
            )));
        }
        g * s[0] * beta / lhs
    };
    if !(tau > 0.0 && tau <= 1.0 + 1e-12) {
        return Err(Error::ModelInconsistency(format!("tau = {tau} outside (0, 1]")));
    }
    Ok(tau.min(1.0))
}

/// Closed-form `b_{i,0}` for every stage.
pub fn stage_heads(chain: &ChainParams) -> Result<Vec<f64>> {
    let tau = tau_from_chain(chain)?;
    let s = chain.window_factors();
    let b0 = if chain.beta == 0.0 {
        tau / head_ratios(chain, &s).iter().sum::<f64>()
    } else {
        b00(chain, tau)?
    };
    Ok(head_ratios(chain, &s).into_iter().map(|r| r * b0).collect())
}
