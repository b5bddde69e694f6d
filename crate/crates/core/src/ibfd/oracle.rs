//! Brute-force stationary distribution of the backoff chain.
//!
//! Builds the full transition matrix over every `(stage, counter)` state and
//! solves `pi P = pi`, `sum(pi) = 1` with a dense LU factorisation. Used to
//! check the closed form; it shares nothing with it beyond the transition
//! rules.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::chain::ChainParams;
use crate::error::{Error, Result};

/// Largest chain the dense solve accepts.
pub const MAX_ORACLE_STATES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    windows: Vec<u32>,
    offsets: Vec<usize>,
    probs: Vec<f64>,
}

impl StationaryDistribution {
    /// Probability of stage `stage`, counter `counter`.
    pub fn get(&self, stage: usize, counter: usize) -> f64 {
        assert!(counter < self.windows[stage] as usize);
        self.probs[self.offsets[stage] + counter]
    }

    pub fn stages(&self) -> usize {
        self.windows.len()
    }

    pub fn window(&self, stage: usize) -> u32 {
        self.windows[stage]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Mass on the transmitting states `(i, 0)`.
    pub fn tau(&self) -> f64 {
        self.offsets.iter().map(|&o| self.probs[o]).sum()
    }

    /// Mass on the counting-down states `(i, k >= 1)`.
    pub fn backlog(&self) -> f64 {
        self.total() - self.tau()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

struct StateSpace {
    windows: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl StateSpace {
    fn new(windows: &[u32]) -> Self {
        let windows: Vec<usize> = windows.iter().map(|&w| w as usize).collect();
        let mut offsets = Vec::with_capacity(windows.len());
        let mut len = 0;
        for &w in &windows {
            offsets.push(len);
            len += w;
        }
        StateSpace { windows, offsets, len }
    }

    fn index(&self, stage: usize, counter: usize) -> usize {
        self.offsets[stage] + counter
    }
}

/// Transition matrix, row = from, column = to.
fn transition_matrix(chain: &ChainParams, space: &StateSpace) -> DMatrix<f64> {
    let (p, beta, alpha) = (chain.p, chain.beta, chain.alpha());
    let m = space.windows.len() - 1;
    let w0 = space.windows[0];
    let mut t = DMatrix::<f64>::zeros(space.len, space.len);
    for stage in 0..=m {
        let from = space.index(stage, 0);
        // Direct transmission.
        let restart = if stage < m { 1.0 - p } else { 1.0 };
        for k in 0..w0 {
            t[(from, space.index(0, k))] += restart / w0 as f64;
        }
        if stage < m {
            let w_next = space.windows[stage + 1];
            for k in 0..w_next {
                t[(from, space.index(stage + 1, k))] += p / w_next as f64;
            }
        }
        // Counting down, or replying back to whoever addressed us.
        for counter in 1..space.windows[stage] {
            let from = space.index(stage, counter);
            t[(from, space.index(stage, counter - 1))] += alpha;
            for k in 0..w0 {
                t[(from, space.index(0, k))] += beta / w0 as f64;
            }
        }
    }
    t
}

fn successors(t: &DMatrix<f64>) -> Vec<Vec<usize>> {
    (0..t.nrows())
        .map(|i| (0..t.ncols()).filter(|&j| t[(i, j)] > 0.0).collect())
        .collect()
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = VecDeque::from([start]);
    level[start] = Some(0);
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Checks that the chain has a single recurrent class and that it is aperiodic.
fn check_ergodic(t: &DMatrix<f64>) -> Result<()> {
    let adj = successors(t);
    let start = 0;
    // Every state must be able to reach (0, 0); then the states reachable
    // from (0, 0) form the unique closed class.
    let mut reverse = vec![Vec::new(); adj.len()];
    for (u, vs) in adj.iter().enumerate() {
        for &v in vs {
            reverse[v].push(u);
        }
    }
    if bfs_levels(&reverse, start).iter().any(Option::is_none) {
        return Err(Error::ModelInconsistency(
            "backoff chain is reducible: some state never returns to (0, 0)".into(),
        ));
    }
    let level = bfs_levels(&adj, start);
    let mut period = 0;
    for (u, vs) in adj.iter().enumerate() {
        let Some(lu) = level[u] else { continue };
        for &v in vs {
            if let Some(lv) = level[v] {
                period = gcd(period, (lu + 1).abs_diff(lv));
            }
        }
    }
    if period != 1 {
        return Err(Error::ModelInconsistency(format!(
            "backoff chain is periodic with period {period}"
        )));
    }
    Ok(())
}

/// Stationary distribution of the chain by direct linear solve.
pub fn stationary_oracle(chain: &ChainParams) -> Result<StationaryDistribution> {
    chain.validate()?;
    let space = StateSpace::new(&chain.backoff.windows);
    if space.len > MAX_ORACLE_STATES {
        return Err(Error::invalid(format!(
            "{} states is too many for the dense oracle (limit {MAX_ORACLE_STATES})",
            space.len
        )));
    }
    let t = transition_matrix(chain, &space);
    check_ergodic(&t)?;

    // pi (T - I) = 0  <=>  (T - I)^T pi^T = 0; swap the last balance equation
    // for the normalisation.
    let n = space.len;
    let mut a = t.transpose();
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::ModelInconsistency("singular balance equations".into()))?;

    let mut probs: Vec<f64> = pi.iter().copied().collect();
    if let Some(&worst) = probs.iter().min_by(|a, b| a.total_cmp(b)) {
        if worst < -1e-12 {
            return Err(Error::ModelInconsistency(format!(
                "negative stationary probability {worst}"
            )));
        }
    }
    for v in &mut probs {
        *v = v.max(0.0);
    }
    Ok(StationaryDistribution {
        windows: chain.backoff.windows.clone(),
        offsets: space.offsets,
        probs,
    })
}
