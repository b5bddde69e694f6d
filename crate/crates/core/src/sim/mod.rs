//! Event-driven Monte-Carlo simulator of a saturated DCF cell.
//!
//! Time advances one channel event at a time: an idle slot, a successful
//! exchange or a collision. Nodes whose counter is zero transmit directly;
//! every other node decrements its counter once per event unless it is
//! pulled into a reply-back. All durations are integer nanoseconds so the
//! channel time always adds up exactly.

mod replicate;
mod rng;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregationMode, RhoSpec, TrafficProfile};
use crate::error::{Error, Result};
use crate::params::{BackoffParams, Nanos, PhyMacParams};

pub use replicate::{
    run_replications, stratified_rhos, Estimate, Execution, Replications, RunSummary,
};
pub use rng::{backoff_rng, run_seed, traffic_rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Hd,
    Ibfd,
}

impl Duplex {
    pub fn as_str(self) -> &'static str {
        match self {
            Duplex::Hd => "hd",
            Duplex::Ibfd => "ibfd",
        }
    }
}

impl std::str::FromStr for Duplex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "hd" => Ok(Duplex::Hd),
            "ibfd" => Ok(Duplex::Ibfd),
            other => Err(Error::Config(format!("unknown duplex mode {other:?} (expected hd or ibfd)"))),
        }
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    /// Number of channel events.
    Events(u64),
    /// Virtual time; the event in progress at the deadline still completes.
    Time(Nanos),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Total node count, AP included.
    pub n: usize,
    pub duplex: Duplex,
    pub aggregation: AggregationMode,
    pub rho: RhoSpec,
    pub phy: PhyMacParams,
    pub backoff: BackoffParams,
    pub horizon: Horizon,
    pub seed: u64,
    pub runs: usize,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            n: 10,
            duplex: Duplex::Ibfd,
            aggregation: AggregationMode::None,
            rho: RhoSpec::Deterministic(0.3),
            phy: PhyMacParams::default(),
            backoff: BackoffParams::default(),
            horizon: Horizon::Events(200_000),
            seed: 1,
            runs: 1,
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid(format!(
                "a cell needs an AP and at least one station, got n = {}",
                self.n
            )));
        }
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        match self.horizon {
            Horizon::Events(0) | Horizon::Time(Nanos(0)) => {
                return Err(Error::invalid("simulation horizon must be positive"))
            }
            _ => {}
        }
        if self.duplex == Duplex::Hd && self.aggregation != AggregationMode::None {
            return Err(Error::invalid("uplink aggregation needs full duplex"));
        }
        self.phy.validate()?;
        self.rho.validate()?;
        let b = &self.backoff;
        if b.windows.len() != b.m as usize + 1 || b.windows.contains(&0) {
            return Err(Error::invalid("backoff ladder must have m + 1 non-empty windows"));
        }
        Ok(())
    }

    /// Stage after which a failed frame is dropped.
    fn last_stage(&self) -> u32 {
        match self.duplex {
            Duplex::Hd => self.backoff.r,
            Duplex::Ibfd => self.backoff.m,
        }
    }
}

/// Per-node counters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeTally {
    /// Events in which the node's own counter expired.
    pub direct_tx: u64,
    /// Direct transmissions that collided.
    pub collisions: u64,
    /// Exchanges the node took part in, directly or by replying back.
    pub successes: u64,
    pub frames_delivered: u64,
    pub drops: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimStats {
    pub events: u64,
    pub idle_events: u64,
    pub success_events: u64,
    pub collisions: u64,
    pub dl_frames: u64,
    pub ul_frames: u64,
    pub dl_bits: u64,
    pub ul_bits: u64,
    pub idle: Nanos,
    pub busy_success: Nanos,
    pub busy_collision: Nanos,
    pub elapsed: Nanos,
    /// Sum of per-frame delays measured from the node's previous delivery,
    /// so time spent on a dropped frame is charged to the next one.
    pub latency_sum_us: f64,
    /// Same, but restarting the clock when a frame is dropped.
    pub hol_latency_sum_us: f64,
    pub latency_count: u64,
    pub drops: u64,
    /// Index 0 is the AP.
    pub nodes: Vec<NodeTally>,
}

impl SimStats {
    /// Delivered payload over elapsed time, in Mbit/s.
    pub fn throughput_mbps(&self) -> Result<f64> {
        if self.elapsed == Nanos::ZERO {
            return Err(Error::invalid("throughput is undefined before any time has elapsed"));
        }
        Ok((self.dl_bits + self.ul_bits) as f64 / self.elapsed.as_us())
    }

    /// Mean delay per delivered frame, in microseconds.
    pub fn mean_latency_us(&self) -> Result<f64> {
        if self.latency_count == 0 {
            return Err(Error::invalid("latency is undefined without deliveries"));
        }
        Ok(self.latency_sum_us / self.latency_count as f64)
    }

    pub fn mean_hol_latency_us(&self) -> Result<f64> {
        if self.latency_count == 0 {
            return Err(Error::invalid("latency is undefined without deliveries"));
        }
        Ok(self.hol_latency_sum_us / self.latency_count as f64)
    }

    /// Fraction of events in which `node` transmitted directly.
    pub fn empirical_tau(&self, node: usize) -> f64 {
        self.nodes[node].direct_tx as f64 / self.events as f64
    }

    /// Fraction of `node`'s direct transmissions that collided.
    pub fn empirical_p(&self, node: usize) -> f64 {
        let t = &self.nodes[node];
        t.collisions as f64 / t.direct_tx as f64
    }

    /// Uplink frames per downlink frame.
    pub fn measured_gamma(&self) -> f64 {
        self.ul_frames as f64 / self.dl_frames as f64
    }

    /// Uplink bits per downlink bit.
    pub fn measured_phi(&self) -> f64 {
        self.ul_bits as f64 / self.dl_bits as f64
    }

    pub fn time_is_conserved(&self) -> bool {
        self.idle + self.busy_success + self.busy_collision == self.elapsed
    }
}

pub fn throughput_mbps(stats: &SimStats) -> Result<f64> {
    stats.throughput_mbps()
}

pub fn mean_latency_us(stats: &SimStats) -> Result<f64> {
    stats.mean_latency_us()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Ap,
    Sta,
}

/// Live state of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub role: Role,
    pub stage: u32,
    pub counter: u32,
    /// Original symmetry ratio; 1 for the AP.
    pub rho: f64,
    pub gamma: u32,
    /// Bytes sent per direct transmission or reply.
    pub payload_bytes: u64,
    /// When the current head-of-line frame became head of line.
    pub hol_timestamp: Nanos,
    /// Time of the last delivery.
    pub last_delivery: Nanos,
    pub tally: NodeTally,
}

struct Engine<'a> {
    scenario: &'a Scenario,
    rng: ChaCha8Rng,
    nodes: Vec<NodeState>,
    stats: SimStats,
    now: Nanos,
    slot: Nanos,
    /// Occupancy of a transmission by each node in half duplex.
    tx_time: Vec<Nanos>,
    /// Occupancy of any full-duplex exchange or collision.
    fd_time: Nanos,
    last_stage: u32,
    // Scratch list of direct transmitters.
    ready: Vec<usize>,
}

/// Runs one replication with station ratios drawn from the scenario's spec.
pub fn run(scenario: &Scenario, seed: u64) -> Result<SimStats> {
    scenario.validate()?;
    let stations = scenario.n - 1;
    let rhos = match scenario.rho {
        RhoSpec::Deterministic(rho) => vec![rho; stations],
        ref grid => {
            let values = grid.values();
            let mut rng = traffic_rng(seed);
            (0..stations)
                .map(|_| values[rng.random_range(0..values.len())])
                .collect()
        }
    };
    let traffic = TrafficProfile::new(rhos, scenario.aggregation)?;
    run_with_traffic(scenario, &traffic, seed)
}

/// Runs one replication with explicit per-station traffic.
pub fn run_with_traffic(scenario: &Scenario, traffic: &TrafficProfile, seed: u64) -> Result<SimStats> {
    scenario.validate()?;
    if traffic.rhos.len() != scenario.n - 1 {
        return Err(Error::invalid(format!(
            "traffic profile has {} stations, scenario has {}",
            traffic.rhos.len(),
            scenario.n - 1
        )));
    }
    if traffic.mode != scenario.aggregation {
        return Err(Error::invalid("traffic profile and scenario disagree on aggregation"));
    }
    let mut engine = Engine::new(scenario, traffic, seed)?;
    engine.run();
    Ok(engine.finish())
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, traffic: &TrafficProfile, seed: u64) -> Result<Self> {
        let phy = &scenario.phy;
        let mpdu = u64::from(phy.mpdu_max_bytes);
        let mut rng = backoff_rng(seed);
        let w0 = scenario.backoff.windows[0];
        let mut nodes = Vec::with_capacity(scenario.n);
        nodes.push(NodeState {
            role: Role::Ap,
            stage: 0,
            counter: rng.random_range(0..w0),
            rho: 1.0,
            gamma: 1,
            payload_bytes: mpdu,
            hol_timestamp: Nanos::ZERO,
            last_delivery: Nanos::ZERO,
            tally: NodeTally::default(),
        });
        for (&rho, &gamma) in traffic.rhos.iter().zip(&traffic.gammas) {
            let payload_bytes = match scenario.duplex {
                Duplex::Hd => (rho * mpdu as f64).round() as u64,
                Duplex::Ibfd => (f64::from(gamma) * rho * mpdu as f64).round() as u64,
            };
            nodes.push(NodeState {
                role: Role::Sta,
                stage: 0,
                counter: rng.random_range(0..w0),
                rho,
                gamma,
                payload_bytes,
                hol_timestamp: Nanos::ZERO,
                last_delivery: Nanos::ZERO,
                tally: NodeTally::default(),
            });
        }
        let tx_time = nodes
            .iter()
            .map(|node| phy.t_success(node.payload_bytes.max(1) as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Engine {
            scenario,
            rng,
            nodes,
            stats: SimStats::default(),
            now: Nanos::ZERO,
            slot: phy.slot(),
            tx_time,
            fd_time: phy.t_success(phy.mpdu_max())?,
            last_stage: scenario.last_stage(),
            ready: Vec::with_capacity(scenario.n),
        })
    }

    fn run(&mut self) {
        match self.scenario.horizon {
            Horizon::Events(count) => {
                for _ in 0..count {
                    self.step();
                }
            }
            Horizon::Time(limit) => {
                while self.now < limit {
                    self.step();
                }
            }
        }
    }

    fn finish(mut self) -> SimStats {
        self.stats.elapsed = self.now;
        self.stats.nodes = self.nodes.into_iter().map(|n| n.tally).collect();
        self.stats
    }

    fn step(&mut self) {
        self.stats.events += 1;
        self.ready.clear();
        self.ready
            .extend(self.nodes.iter().enumerate().filter(|(_, n)| n.counter == 0).map(|(i, _)| i));
        for &i in &self.ready {
            self.nodes[i].tally.direct_tx += 1;
        }
        if self.ready.is_empty() {
            self.now += self.slot;
            self.stats.idle += self.slot;
            self.stats.idle_events += 1;
            for node in &mut self.nodes {
                node.counter -= 1;
            }
            return;
        }
        match self.scenario.duplex {
            Duplex::Hd => self.step_hd(),
            Duplex::Ibfd => self.step_ibfd(),
        }
    }

    fn step_hd(&mut self) {
        if let [i] = self.ready[..] {
            let dt = self.tx_time[i];
            self.now += dt;
            self.stats.busy_success += dt;
            self.stats.success_events += 1;
            let bits = 8 * self.nodes[i].payload_bytes;
            match self.nodes[i].role {
                Role::Ap => {
                    self.stats.dl_frames += 1;
                    self.stats.dl_bits += bits;
                }
                Role::Sta => {
                    self.stats.ul_frames += 1;
                    self.stats.ul_bits += bits;
                }
            }
            self.deliver(i, 1);
            self.decrement_except(&[i]);
            self.restart(i);
        } else {
            let dt = self.ready.iter().map(|&i| self.tx_time[i]).max().unwrap_or(self.slot);
            self.collide(dt);
        }
    }

    fn step_ibfd(&mut self) {
        let n = self.nodes.len();
        let ap_sends = self.ready.first() == Some(&0);
        let target = if ap_sends { self.rng.random_range(1..n) } else { 0 };
        let partner = match self.ready[..] {
            [0] => Some(target),
            [j] => Some(j),
            [0, j] if j == target => Some(j),
            _ => None,
        };
        let Some(j) = partner else {
            self.collide(self.fd_time);
            return;
        };
        let dt = self.fd_time;
        self.now += dt;
        self.stats.busy_success += dt;
        self.stats.success_events += 1;
        let gamma = self.nodes[j].gamma;
        self.stats.dl_frames += 1;
        self.stats.dl_bits += 8 * self.nodes[0].payload_bytes;
        self.stats.ul_frames += u64::from(gamma);
        self.stats.ul_bits += 8 * self.nodes[j].payload_bytes;
        self.deliver(0, 1);
        self.deliver(j, gamma);
        self.decrement_except(&[0, j]);
        self.restart(0);
        self.restart(j);
    }

    /// Credits `frames` delivered by `i` at the current time. Aggregated
    /// frames share the head-of-line wait equally.
    fn deliver(&mut self, i: usize, frames: u32) {
        let now = self.now;
        let node = &mut self.nodes[i];
        self.stats.latency_sum_us += (now.saturating_sub(node.last_delivery)).as_us();
        self.stats.hol_latency_sum_us += (now.saturating_sub(node.hol_timestamp)).as_us();
        self.stats.latency_count += u64::from(frames);
        node.last_delivery = now;
        node.hol_timestamp = now;
        node.tally.successes += 1;
        node.tally.frames_delivered += u64::from(frames);
    }

    fn collide(&mut self, dt: Nanos) {
        self.now += dt;
        self.stats.busy_collision += dt;
        self.stats.collisions += 1;
        for node in &mut self.nodes {
            if node.counter > 0 {
                node.counter -= 1;
            }
        }
        for k in 0..self.ready.len() {
            let i = self.ready[k];
            self.nodes[i].tally.collisions += 1;
            if self.nodes[i].stage >= self.last_stage {
                self.nodes[i].tally.drops += 1;
                self.nodes[i].hol_timestamp = self.now;
                self.stats.drops += 1;
                self.restart(i);
            } else {
                let stage = self.nodes[i].stage + 1;
                let w = self.scenario.backoff.window_at(stage);
                self.nodes[i].stage = stage;
                self.nodes[i].counter = self.rng.random_range(0..w);
            }
        }
    }

    fn decrement_except(&mut self, skip: &[usize]) {
        for (k, node) in self.nodes.iter_mut().enumerate() {
            if !skip.contains(&k) {
                node.counter -= 1;
            }
        }
    }

    fn restart(&mut self, i: usize) {
        let w0 = self.scenario.backoff.windows[0];
        let node = &mut self.nodes[i];
        node.stage = 0;
        node.counter = self.rng.random_range(0..w0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hd::solve_hd;
    use crate::ibfd::solve_ibfd;
    use crate::solver::SolverOptions;

    fn scenario(n: usize, duplex: Duplex, events: u64) -> Scenario {
        Scenario {
            n,
            duplex,
            horizon: Horizon::Events(events),
            ..Scenario::default()
        }
    }

    #[test]
    fn two_node_full_duplex_never_collides() {
        let stats = run(&scenario(2, Duplex::Ibfd, 200_000), 9).unwrap();
        assert_eq!(stats.collisions, 0);
        assert_eq!(stats.drops, 0);
        assert!(stats.success_events > 0);
    }

    #[test]
    fn channel_time_adds_up() {
        for duplex in [Duplex::Hd, Duplex::Ibfd] {
            for n in [2, 7, 20] {
                let stats = run(&scenario(n, duplex, 50_000), n as u64).unwrap();
                assert!(stats.time_is_conserved());
                assert_eq!(stats.events, stats.idle_events + stats.success_events + stats.collisions);
            }
        }
    }

    #[test]
    fn same_seed_same_stats() {
        let mut s = scenario(8, Duplex::Ibfd, 30_000);
        s.rho = RhoSpec::uniform_default();
        s.aggregation = AggregationMode::Multi;
        assert_eq!(run(&s, 42).unwrap(), run(&s, 42).unwrap());
        assert_ne!(run(&s, 42).unwrap(), run(&s, 43).unwrap());
    }

    #[test]
    fn every_exchange_carries_one_downlink_frame() {
        let mut s = scenario(6, Duplex::Ibfd, 100_000);
        s.aggregation = AggregationMode::Multi;
        let stats = run(&s, 3).unwrap();
        assert_eq!(stats.dl_frames, stats.success_events);
        // rho = 0.3 packs three frames of 2397 bytes into each uplink reply.
        assert_eq!(stats.ul_frames, 3 * stats.success_events);
        assert_eq!(stats.ul_bits, 8 * 7192 * stats.success_events);
    }

    #[test]
    fn half_duplex_rejects_aggregation() {
        let mut s = scenario(4, Duplex::Hd, 10);
        s.aggregation = AggregationMode::Dual;
        assert!(run(&s, 1).is_err());
        assert!(run(&scenario(1, Duplex::Hd, 10), 1).is_err());
        assert!(run(&scenario(4, Duplex::Hd, 0), 1).is_err());
    }

    #[test]
    fn time_horizon_stops_after_deadline() {
        let mut s = scenario(5, Duplex::Hd, 1);
        s.horizon = Horizon::Time(Nanos(50_000_000));
        let stats = run(&s, 5).unwrap();
        assert!(stats.elapsed >= Nanos(50_000_000));
        assert!(stats.elapsed.0 < 50_000_000 + 1_000_000);
    }

    #[test]
    fn empirical_tau_matches_model() {
        let events = 1_000_000;
        let backoff = BackoffParams::default();
        let stats = run(&scenario(10, Duplex::Ibfd, events), 11).unwrap();
        let sol = solve_ibfd(10, &backoff, &SolverOptions::ibfd()).unwrap();
        let ap = stats.empirical_tau(0);
        let sta = (1..10).map(|i| stats.empirical_tau(i)).sum::<f64>() / 9.0;
        assert!((ap / sol.tau_ap - 1.0).abs() < 0.02, "{ap} vs {}", sol.tau_ap);
        assert!((sta / sol.tau_sta - 1.0).abs() < 0.02, "{sta} vs {}", sol.tau_sta);

        let stats = run(&scenario(10, Duplex::Hd, events), 12).unwrap();
        let sol = solve_hd(10, &backoff, &SolverOptions::default()).unwrap();
        let p = (0..10).map(|i| stats.empirical_p(i)).sum::<f64>() / 10.0;
        assert!((p / sol.p - 1.0).abs() < 0.02, "{p} vs {}", sol.p);
    }
}
