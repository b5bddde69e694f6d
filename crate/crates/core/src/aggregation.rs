//! Symmetry-ratio bookkeeping and the two uplink aggregation schemes.
//!
//! A station's symmetry ratio `rho` is its uplink load relative to the
//! downlink frame the AP sends it. Dual-frame aggregation doubles the uplink
//! load of every station with `rho <= 0.5`; multi-frame aggregation packs
//! `floor(1/rho)` frames. Either way the uplink still fits inside the
//! downlink transmission.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest and largest symmetry ratio a station may start with.
pub const RHO_MIN: f64 = 0.1;
pub const RHO_MAX: f64 = 0.9;

/// Slack for grid values such as `0.1 + 2.0 * 0.1`.
const RHO_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationMode {
    None,
    Dual,
    Multi,
}

impl AggregationMode {
    pub const ALL: [AggregationMode; 3] = [AggregationMode::None, AggregationMode::Dual, AggregationMode::Multi];

    /// Aggregation factor and post-aggregation ratio for one station.
    pub fn apply(self, rho: f64) -> Result<(u32, f64)> {
        match self {
            AggregationMode::None => check_plain_rho(rho).map(|rho| (1, rho)),
            AggregationMode::Dual => gamma_dual(rho),
            AggregationMode::Multi => gamma_multi(rho),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AggregationMode::None => "none",
            AggregationMode::Dual => "dual",
            AggregationMode::Multi => "multi",
        }
    }
}

impl fmt::Display for AggregationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AggregationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(AggregationMode::None),
            "dual" => Ok(AggregationMode::Dual),
            "multi" => Ok(AggregationMode::Multi),
            other => Err(Error::Config(format!(
                "unknown aggregation mode {other:?} (expected none, dual or multi)"
            ))),
        }
    }
}

fn check_rho(rho: f64) -> Result<f64> {
    if rho.is_finite() && (RHO_MIN - RHO_EPS..=RHO_MAX + RHO_EPS).contains(&rho) {
        Ok(rho)
    } else {
        Err(Error::invalid(format!(
            "symmetry ratio {rho} outside [{RHO_MIN}, {RHO_MAX}]"
        )))
    }
}

/// Without aggregation a station may also be fully symmetric.
fn check_plain_rho(rho: f64) -> Result<f64> {
    if rho.is_finite() && (RHO_MIN - RHO_EPS..=1.0).contains(&rho) {
        Ok(rho)
    } else {
        Err(Error::invalid(format!("symmetry ratio {rho} outside [{RHO_MIN}, 1]")))
    }
}

/// Dual-frame rule: stations with `rho <= 0.5` send two frames.
pub fn gamma_dual(rho: f64) -> Result<(u32, f64)> {
    let rho = check_rho(rho)?;
    if rho <= 0.5 + RHO_EPS {
        Ok((2, (2.0 * rho).min(1.0)))
    } else {
        Ok((1, rho))
    }
}

/// Multi-frame rule: `gamma = floor(1/rho)`, which is 1 above one half.
pub fn gamma_multi(rho: f64) -> Result<(u32, f64)> {
    let rho = check_rho(rho)?;
    let gamma = ((1.0 / rho) + RHO_EPS).floor().max(1.0) as u32;
    Ok((gamma, (f64::from(gamma) * rho).min(1.0)))
}

/// Full-duplex factor: the mean symmetry ratio over the client stations.
pub fn fdf(rhos: &[f64]) -> Result<f64> {
    if rhos.is_empty() {
        return Err(Error::invalid("full-duplex factor of an empty station set"));
    }
    Ok(rhos.iter().sum::<f64>() / rhos.len() as f64)
}

/// IBFD link utilisation in percent, `(1 + phi) / 2 * 100`.
pub fn utilization(phi: f64) -> Result<f64> {
    if !(0.0..=1.0 + RHO_EPS).contains(&phi) {
        return Err(Error::invalid(format!("full-duplex factor {phi} outside [0, 1]")));
    }
    Ok((1.0 + phi) / 2.0 * 100.0)
}

/// Finite distribution of symmetry ratios, as `(rho, probability)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoDistribution {
    points: Vec<(f64, f64)>,
}

impl RhoDistribution {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("empty rho distribution"));
        }
        let mut total = 0.0;
        for &(rho, p) in &points {
            check_plain_rho(rho)?;
            if !(p.is_finite() && p >= 0.0) {
                return Err(Error::invalid(format!("negative probability {p} for rho {rho}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("rho probabilities sum to {total}, not 1")));
        }
        Ok(RhoDistribution { points })
    }

    pub fn point(rho: f64) -> Result<Self> {
        Self::new(vec![(rho, 1.0)])
    }

    pub fn uniform(values: &[f64]) -> Result<Self> {
        let p = 1.0 / values.len().max(1) as f64;
        Self::new(values.iter().map(|&v| (v, p)).collect())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    fn expect(&self, mode: AggregationMode, f: impl Fn(u32, f64) -> f64) -> Result<f64> {
        self.points.iter().try_fold(0.0, |acc, &(rho, p)| {
            let (gamma, rho_new) = mode.apply(rho)?;
            Ok(acc + p * f(gamma, rho_new))
        })
    }
}

/// Expected aggregation factor under `mode`.
pub fn expected_gamma(mode: AggregationMode, dist: &RhoDistribution) -> Result<f64> {
    dist.expect(mode, |gamma, _| f64::from(gamma))
}

/// Expected post-aggregation ratio, i.e. the full-duplex factor of a large network.
pub fn expected_phi(mode: AggregationMode, dist: &RhoDistribution) -> Result<f64> {
    dist.expect(mode, |_, rho_new| rho_new)
}

/// How client stations are assigned symmetry ratios.
#[derive(Debug, Clone, PartialEq)]
pub enum RhoSpec {
    /// Every station has the same ratio.
    Deterministic(f64),
    /// Each station draws uniformly from `lo, lo + step, ..., hi`.
    UniformGrid { lo: f64, hi: f64, step: f64 },
}

impl RhoSpec {
    /// Uniform over `{0.1, 0.2, ..., 0.9}`.
    pub fn uniform_default() -> Self {
        RhoSpec::UniformGrid {
            lo: RHO_MIN,
            hi: RHO_MAX,
            step: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RhoSpec::Deterministic(rho) => check_plain_rho(rho).map(drop),
            RhoSpec::UniformGrid { lo, hi, step } => {
                check_rho(lo)?;
                check_rho(hi)?;
                if !(step > 0.0) || hi < lo {
                    return Err(Error::invalid(format!("bad rho grid {lo}:{hi}:step{step}")));
                }
                Ok(())
            }
        }
    }

    /// Support of the distribution, rounded to kill accumulation noise.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            RhoSpec::Deterministic(rho) => vec![rho],
            RhoSpec::UniformGrid { lo, hi, step } => {
                let count = ((hi - lo) / step + RHO_EPS).floor() as usize + 1;
                (0..count)
                    .map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9)
                    .collect()
            }
        }
    }

    pub fn distribution(&self) -> Result<RhoDistribution> {
        self.validate()?;
        RhoDistribution::uniform(&self.values())
    }

    pub fn is_random(&self) -> bool {
        matches!(self, RhoSpec::UniformGrid { .. })
    }

    /// Expected original ratio.
    pub fn mean(&self) -> Result<f64> {
        expected_phi(AggregationMode::None, &self.distribution()?)
    }
}

impl fmt::Display for RhoSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoSpec::Deterministic(rho) => write!(f, "deterministic:{rho}"),
            RhoSpec::UniformGrid { lo, hi, step } => write!(f, "uniform:{lo}:{hi}:step{step}"),
        }
    }
}

impl FromStr for RhoSpec {
    type Err = Error;

    /// Parses `deterministic:<rho>` or `uniform:<lo>:<hi>:step<step>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse rho spec {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let mut parts = s.trim().split(':');
        let spec = match parts.next() {
            Some("deterministic") => {
                let rho = num(parts.next().ok_or_else(bad)?)?;
                RhoSpec::Deterministic(rho)
            }
            Some("uniform") => {
                let lo = num(parts.next().ok_or_else(bad)?)?;
                let hi = num(parts.next().ok_or_else(bad)?)?;
                let step = parts
                    .next()
                    .and_then(|t| t.trim().strip_prefix("step"))
                    .ok_or_else(bad)?;
                RhoSpec::UniformGrid { lo, hi, step: num(step)? }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// Concrete per-station traffic of one network instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    pub mode: AggregationMode,
    /// Original ratios, one per client station.
    pub rhos: Vec<f64>,
    pub gammas: Vec<u32>,
    /// Ratios after aggregation.
    pub rhos_new: Vec<f64>,
    pub phi: f64,
    pub exp_gamma: f64,
}

impl TrafficProfile {
    pub fn new(rhos: Vec<f64>, mode: AggregationMode) -> Result<Self> {
        let (gammas, rhos_new): (Vec<u32>, Vec<f64>) = rhos
            .iter()
            .map(|&rho| mode.apply(rho))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        let phi = fdf(&rhos_new)?;
        let exp_gamma = gammas.iter().map(|&g| f64::from(g)).sum::<f64>() / gammas.len() as f64;
        Ok(TrafficProfile {
            mode,
            rhos,
            gammas,
            rhos_new,
            phi,
            exp_gamma,
        })
    }

    pub fn uniform(stations: usize, rho: f64, mode: AggregationMode) -> Result<Self> {
        Self::new(vec![rho; stations], mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Vec<f64> {
        RhoSpec::uniform_default().values()
    }

    #[test]
    fn dual_examples() {
        assert_eq!(gamma_dual(0.3).unwrap(), (2, 0.6));
        assert_eq!(gamma_dual(0.5).unwrap(), (2, 1.0));
        assert_eq!(gamma_dual(0.7).unwrap(), (1, 0.7));
    }

    #[test]
    fn multi_examples() {
        assert_eq!(gamma_multi(0.1).unwrap(), (10, 1.0));
        let (g, r) = gamma_multi(0.3).unwrap();
        assert_eq!(g, 3);
        assert_relative_eq!(r, 0.9, max_relative = 1e-15);
        assert_eq!(gamma_multi(0.9).unwrap(), (1, 0.9));
        // floor(1/0.5) = 2 even though 0.5 is the dual-frame boundary.
        assert_eq!(gamma_multi(0.5).unwrap(), (2, 1.0));
    }

    #[test]
    fn out_of_range_ratio_is_rejected() {
        for rho in [0.0, 0.05, 0.95, 1.5, f64::NAN] {
            assert!(gamma_dual(rho).is_err());
            assert!(gamma_multi(rho).is_err());
        }
    }

    #[test]
    fn aggregation_table() {
        // (rho, dual gamma, dual rho_new, multi gamma, multi rho_new)
        let table = [
            (0.1, 2, 0.2, 10, 1.0),
            (0.2, 2, 0.4, 5, 1.0),
            (0.3, 2, 0.6, 3, 0.9),
            (0.4, 2, 0.8, 2, 0.8),
            (0.5, 2, 1.0, 2, 1.0),
            (0.6, 1, 0.6, 1, 0.6),
            (0.7, 1, 0.7, 1, 0.7),
            (0.8, 1, 0.8, 1, 0.8),
            (0.9, 1, 0.9, 1, 0.9),
        ];
        for (rho, dg, dr, mg, mr) in table {
            let (g, r) = gamma_dual(rho).unwrap();
            assert_eq!(g, dg, "dual gamma at {rho}");
            assert_relative_eq!(r, dr, max_relative = 1e-12);
            let (g, r) = gamma_multi(rho).unwrap();
            assert_eq!(g, mg, "multi gamma at {rho}");
            assert_relative_eq!(r, mr, max_relative = 1e-12);
        }
    }

    #[test]
    fn fdf_examples() {
        assert_relative_eq!(fdf(&[0.3; 9]).unwrap(), 0.3, max_relative = 1e-15);
        assert!(fdf(&[]).is_err());
        assert_relative_eq!(RhoSpec::uniform_default().mean().unwrap(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn utilization_examples() {
        assert_eq!(utilization(1.0).unwrap(), 100.0);
        assert_relative_eq!(utilization(0.3).unwrap(), 65.0, max_relative = 1e-14);
        assert_relative_eq!(utilization(0.8556).unwrap(), 92.78, max_relative = 1e-12);
        assert_eq!(utilization(0.0).unwrap(), 50.0);
        assert!(utilization(-0.1).is_err());
    }

    #[test]
    fn expected_gamma_examples() {
        let uniform = RhoDistribution::uniform(&grid()).unwrap();
        assert_relative_eq!(expected_gamma(AggregationMode::Dual, &uniform).unwrap(), 14.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(expected_gamma(AggregationMode::Multi, &uniform).unwrap(), 26.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(expected_gamma(AggregationMode::None, &uniform).unwrap(), 1.0);
        let point = RhoDistribution::point(0.3).unwrap();
        assert_eq!(expected_gamma(AggregationMode::Multi, &point).unwrap(), 3.0);
    }

    #[test]
    fn invalid_distribution() {
        assert!(RhoDistribution::new(vec![(0.3, 0.5)]).is_err());
        assert!(RhoDistribution::new(vec![(0.3, 1.5), (0.4, -0.5)]).is_err());
        assert!(RhoDistribution::new(vec![]).is_err());
    }

    #[test]
    fn rho_spec_parsing() {
        assert_eq!("deterministic:0.3".parse::<RhoSpec>().unwrap(), RhoSpec::Deterministic(0.3));
        assert_eq!("deterministic:1".parse::<RhoSpec>().unwrap(), RhoSpec::Deterministic(1.0));
        assert_eq!(AggregationMode::None.apply(1.0).unwrap(), (1, 1.0));
        assert!(AggregationMode::Dual.apply(1.0).is_err());
        let u: RhoSpec = "uniform:0.1:0.9:step0.1".parse().unwrap();
        assert_eq!(u, RhoSpec::uniform_default());
        assert_eq!(u.values(), vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!(u.to_string().parse::<RhoSpec>().unwrap(), u);
        for bad in ["", "deterministic", "deterministic:x", "uniform:0.1:0.9", "uniform:0.1:0.9:0.1", "gauss:1", "deterministic:2.0"] {
            assert!(bad.parse::<RhoSpec>().is_err(), "{bad:?} parsed");
        }
    }

    #[test]
    fn profile() {
        let t = TrafficProfile::new(vec![0.1, 0.3, 0.7], AggregationMode::Multi).unwrap();
        assert_eq!(t.gammas, vec![10, 3, 1]);
        assert_relative_eq!(t.phi, (1.0 + 0.9 + 0.7) / 3.0, max_relative = 1e-12);
        assert_relative_eq!(t.exp_gamma, 14.0 / 3.0, max_relative = 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn aggregated_ratio_never_exceeds_one(rho in RHO_MIN..=RHO_MAX) {
            for mode in AggregationMode::ALL {
                let (gamma, rho_new) = mode.apply(rho).unwrap();
                proptest::prop_assert!(gamma >= 1);
                proptest::prop_assert!(rho_new <= 1.0);
                if rho > 0.5 + 1e-9 {
                    proptest::prop_assert_eq!(gamma, 1);
                }
            }
        }

        #[test]
        fn multi_dominates_dual(rho in RHO_MIN..=0.5) {
            let (gd, _) = gamma_dual(rho).unwrap();
            let (gm, _) = gamma_multi(rho).unwrap();
            proptest::prop_assert!(gm >= gd);
            if rho > 1.0 / 3.0 + 1e-9 {
                proptest::prop_assert_eq!(gm, gd);
            }
        }
    }
}
