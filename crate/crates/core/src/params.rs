//! PHY/MAC constants and channel-occupancy durations.
//!
//! Defaults are the 802.11ac values used throughout the crate: 80 MHz,
//! 16-QAM rate 1/2, 2x2 MIMO, which fixes the data rate at 234 Mbit/s.
//!
//! A successful exchange occupies the channel for
//!
//! ```text
//! T_s = PHY hdr + (MAC hdr + FCS + payload) @ data rate + SIFS
//!       + PHY hdr + ACK @ basic rate + DIFS
//! ```
//!
//! and a collision has the same structure with the longest colliding frame
//! in place of the payload.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whole nanoseconds of virtual channel time.
///
/// The simulator accumulates millions of events, so it keeps time as an
/// integer and the busy/idle split adds up exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Nanos(pub u64);

impl Nanos {
    pub const ZERO: Nanos = Nanos(0);

    /// Rounds a microsecond duration to the nearest nanosecond.
    pub fn from_us(us: f64) -> Nanos {
        debug_assert!(us >= 0.0 && us.is_finite());
        Nanos((us * 1_000.0).round() as u64)
    }

    pub fn as_us(self) -> f64 {
        self.0 as f64 / 1_000.0
    }

    pub fn saturating_sub(self, rhs: Nanos) -> Nanos {
        Nanos(self.0.saturating_sub(rhs.0))
    }
}

impl Add for Nanos {
    type Output = Nanos;

    fn add(self, rhs: Nanos) -> Nanos {
        Nanos(self.0 + rhs.0)
    }
}

impl AddAssign for Nanos {
    fn add_assign(&mut self, rhs: Nanos) {
        self.0 += rhs.0;
    }
}

impl fmt::Display for Nanos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ns", self.0)
    }
}

/// PHY and MAC constants. Field names double as the `[phy_mac]` config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhyMacParams {
    pub phy_header_us: f64,
    pub mac_header_bytes: u32,
    pub fcs_bytes: u32,
    pub ack_bytes: u32,
    pub mpdu_max_bytes: u32,
    pub data_rate_mbps: f64,
    pub basic_rate_mbps: f64,
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    pub cw_min: u32,
    pub cw_max: u32,
}

impl Default for PhyMacParams {
    fn default() -> Self {
        PhyMacParams {
            phy_header_us: 44.0,
            mac_header_bytes: 36,
            fcs_bytes: 4,
            ack_bytes: 14,
            mpdu_max_bytes: 7991,
            data_rate_mbps: 234.0,
            basic_rate_mbps: 24.0,
            slot_us: 9.0,
            sifs_us: 16.0,
            difs_us: 34.0,
            cw_min: 16,
            cw_max: 1024,
        }
    }
}

impl PhyMacParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("phy_header_us", self.phy_header_us),
            ("data_rate_mbps", self.data_rate_mbps),
            ("basic_rate_mbps", self.basic_rate_mbps),
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.cw_min == 0 {
            return Err(Error::invalid("cw_min must be positive"));
        }
        self.max_backoff_stage()?;
        if self.mpdu_max_bytes <= self.mac_header_bytes + self.fcs_bytes {
            return Err(Error::invalid(format!(
                "mpdu_max_bytes ({}) must exceed MAC header + FCS ({})",
                self.mpdu_max_bytes,
                self.mac_header_bytes + self.fcs_bytes
            )));
        }
        Ok(())
    }

    /// `m` such that `cw_max = cw_min * 2^m`.
    pub fn max_backoff_stage(&self) -> Result<u32> {
        let (lo, hi) = (self.cw_min, self.cw_max);
        if lo == 0 || hi < lo || hi % lo != 0 || !(hi / lo).is_power_of_two() {
            return Err(Error::invalid(format!(
                "cw_max ({hi}) must be cw_min ({lo}) times a power of two"
            )));
        }
        Ok((hi / lo).trailing_zeros())
    }

    pub fn mpdu_max(&self) -> f64 {
        f64::from(self.mpdu_max_bytes)
    }

    /// PHY preamble plus MAC header and FCS at the data rate.
    pub fn header_us(&self) -> f64 {
        self.phy_header_us
            + duration_us_unchecked(f64::from(self.mac_header_bytes + self.fcs_bytes), self.data_rate_mbps)
    }

    pub fn ack_us(&self) -> f64 {
        self.phy_header_us + duration_us_unchecked(f64::from(self.ack_bytes), self.basic_rate_mbps)
    }

    fn occupancy_us(&self, bytes: f64) -> Result<f64> {
        if !(bytes > 0.0) {
            return Err(Error::invalid(format!("frame size must be positive, got {bytes}")));
        }
        // Allow rounding noise from rho * MPDU_max products.
        if bytes > self.mpdu_max() * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "frame size {bytes} exceeds mpdu_max_bytes {}",
                self.mpdu_max_bytes
            )));
        }
        Ok(self.header_us()
            + duration_us(bytes, self.data_rate_mbps)?
            + self.sifs_us
            + self.ack_us()
            + self.difs_us)
    }

    /// Channel time of a successful exchange carrying `payload_bytes`.
    pub fn t_success_us(&self, payload_bytes: f64) -> Result<f64> {
        self.occupancy_us(payload_bytes)
    }

    /// Channel time of a collision whose longest frame carries `collision_bytes`.
    pub fn t_collision_us(&self, collision_bytes: f64) -> Result<f64> {
        self.occupancy_us(collision_bytes)
    }

    pub fn slot(&self) -> Nanos {
        Nanos::from_us(self.slot_us)
    }

    pub fn t_success(&self, payload_bytes: f64) -> Result<Nanos> {
        self.t_success_us(payload_bytes).map(Nanos::from_us)
    }

    pub fn t_collision(&self, collision_bytes: f64) -> Result<Nanos> {
        self.t_collision_us(collision_bytes).map(Nanos::from_us)
    }
}

/// Air time of `bytes` at `rate_mbps`, in microseconds.
pub fn duration_us(bytes: f64, rate_mbps: f64) -> Result<f64> {
    if !(rate_mbps.is_finite() && rate_mbps > 0.0) {
        return Err(Error::invalid(format!("rate must be positive, got {rate_mbps}")));
    }
    if !(bytes >= 0.0) {
        return Err(Error::invalid(format!("byte count must be non-negative, got {bytes}")));
    }
    Ok(duration_us_unchecked(bytes, rate_mbps))
}

fn duration_us_unchecked(bytes: f64, rate_mbps: f64) -> f64 {
    8.0 * bytes / rate_mbps
}

/// Binary exponential backoff ladder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackoffParams {
    /// Initial window, `CW_min`.
    pub w0: u32,
    /// Highest backoff stage.
    pub m: u32,
    /// Retransmission limit used by the half-duplex model and simulator.
    pub r: u32,
    /// `windows[i] = min(2^i * w0, cw_max)` for `i` in `0..=m`.
    pub windows: Vec<u32>,
}

impl BackoffParams {
    pub fn new(w0: u32, m: u32, r: u32, cw_max: u32) -> Result<Self> {
        if w0 == 0 {
            return Err(Error::invalid("initial contention window must be positive"));
        }
        if m > 20 {
            return Err(Error::invalid(format!("backoff stage {m} is unreasonably large")));
        }
        let windows = (0..=m)
            .map(|i| w0.saturating_mul(1 << i).min(cw_max.max(w0)))
            .collect();
        Ok(BackoffParams { w0, m, r, windows })
    }

    /// Ladder implied by `cw_min`/`cw_max`, with retry limit `r`.
    pub fn from_phy(phy: &PhyMacParams, r: u32) -> Result<Self> {
        let m = phy.max_backoff_stage()?;
        Self::new(phy.cw_min, m, r, phy.cw_max)
    }

    /// Window used at half-duplex retransmission stage `i`; stages beyond
    /// `m` keep the largest window.
    pub fn window_at(&self, stage: u32) -> u32 {
        self.windows[(stage.min(self.m)) as usize]
    }
}

impl Default for BackoffParams {
    fn default() -> Self {
        BackoffParams::from_phy(&PhyMacParams::default(), DEFAULT_RETRY_LIMIT)
            .expect("default PHY parameters are valid")
    }
}

/// Default half-duplex retransmission limit.
pub const DEFAULT_RETRY_LIMIT: u32 = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn duration_examples() {
        assert_relative_eq!(duration_us(7991.0, 234.0).unwrap(), 8.0 * 7991.0 / 234.0, max_relative = 1e-15);
        assert_relative_eq!(duration_us(7991.0, 234.0).unwrap(), 273.196_581_196_581_2, max_relative = 1e-12);
        assert_eq!(duration_us(0.0, 234.0).unwrap(), 0.0);
        assert_relative_eq!(duration_us(14.0, 24.0).unwrap(), 4.666_666_666_666_667, max_relative = 1e-12);
    }

    #[test]
    fn duration_rejects_bad_rate() {
        assert!(matches!(duration_us(10.0, 0.0), Err(Error::InvalidParameter(_))));
        assert!(duration_us(10.0, -3.0).is_err());
        assert!(duration_us(-1.0, 3.0).is_err());
    }

    #[test]
    fn success_time_for_full_mpdu() {
        let p = PhyMacParams::default();
        // 44 + 40*8/234 + 7991*8/234 + 16 + 44 + 14*8/24 + 34
        let expected = 44.0 + 320.0 / 234.0 + 63_928.0 / 234.0 + 16.0 + 44.0 + 112.0 / 24.0 + 34.0;
        let ts = p.t_success_us(7991.0).unwrap();
        assert_relative_eq!(ts, expected, max_relative = 1e-14);
        assert!((ts - 417.23).abs() < 0.005);
    }

    #[test]
    fn success_time_for_thirty_percent_frame() {
        let p = PhyMacParams::default();
        let ts = p.t_success_us(0.3 * 7991.0).unwrap();
        assert!((ts - 226.0).abs() < 0.01, "{ts}");
    }

    #[test]
    fn doubling_rate_halves_only_mac_part() {
        let p = PhyMacParams::default();
        let mut fast = p.clone();
        fast.data_rate_mbps *= 2.0;
        let bytes = 3000.0;
        let mac_part = 8.0 * (40.0 + bytes) / p.data_rate_mbps;
        let diff = p.t_success_us(bytes).unwrap() - fast.t_success_us(bytes).unwrap();
        assert_relative_eq!(diff, mac_part / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn collision_time_matches_success_time() {
        let p = PhyMacParams::default();
        for bytes in [1.0, 512.0, 2397.3, 7991.0] {
            assert_eq!(p.t_success_us(bytes).unwrap(), p.t_collision_us(bytes).unwrap());
        }
    }

    #[test]
    fn occupancy_rejects_out_of_range_payloads() {
        let p = PhyMacParams::default();
        assert!(p.t_success_us(0.0).is_err());
        assert!(p.t_collision_us(8000.0).is_err());
    }

    #[test]
    fn default_ladder() {
        let b = BackoffParams::default();
        assert_eq!(b.m, 6);
        assert_eq!(b.windows, vec![16, 32, 64, 128, 256, 512, 1024]);
        assert_eq!(b.window_at(9), 1024);
    }

    #[test]
    fn ladder_caps_at_cw_max() {
        let b = BackoffParams::new(16, 4, 4, 64).unwrap();
        assert_eq!(b.windows, vec![16, 32, 64, 64, 64]);
    }

    #[test]
    fn validation() {
        assert!(PhyMacParams::default().validate().is_ok());
        assert_eq!(PhyMacParams::default().max_backoff_stage().unwrap(), 6);
        for bad in [
            PhyMacParams { cw_max: 1000, ..Default::default() },
            PhyMacParams { mpdu_max_bytes: 40, ..Default::default() },
            PhyMacParams { slot_us: 0.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn nanos_round_trip() {
        let t = PhyMacParams::default().t_success(7991.0).unwrap();
        assert_eq!(t, Nanos(417_231));
        assert_eq!(PhyMacParams::default().slot(), Nanos(9_000));
    }

    proptest::proptest! {
        #[test]
        fn occupancy_strictly_increasing(a in 1.0f64..7990.0, d in 0.001f64..1.0) {
            let p = PhyMacParams::default();
            let lo = p.t_success_us(a).unwrap();
            let hi = p.t_success_us(a + d).unwrap();
            proptest::prop_assert!(lo > 0.0);
            proptest::prop_assert!(hi > lo);
        }
    }
}
