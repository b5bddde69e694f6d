use crate::error::{Error, Result};

/// Settings for the damped fixed-point solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop once successive transmission probabilities differ by less than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight of the new iterate, `tau <- (1 - damping) tau + damping f(tau)`.
    pub damping: f64,
    /// Starting transmission probability for every node class.
    pub initial_tau: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 10_000,
            damping: 0.5,
            initial_tau: 0.1,
        }
    }
}

impl SolverOptions {
    /// Defaults for the coupled AP/station system, which needs more sweeps.
    pub fn ibfd() -> Self {
        SolverOptions {
            max_iter: 20_000,
            ..SolverOptions::default()
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid(format!("damping must be in (0, 1], got {}", self.damping)));
        }
        if !(self.initial_tau > 0.0 && self.initial_tau <= 1.0) {
            return Err(Error::invalid(format!(
                "initial tau must be in (0, 1], got {}",
                self.initial_tau
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }
}
