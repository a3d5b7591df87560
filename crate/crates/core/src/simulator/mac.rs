//! Airtime of one DATA/ACK exchange without contention.

use serde::{Deserialize, Serialize};

use crate::channel::{McsEntry, McsIndex};
use crate::{Error, Result};

/// 802.11n (5 GHz OFDM) timing. Durations in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacTimingConfig {
    pub slot_us: f64,
    pub sifs_us: f64,
    pub difs_us: f64,
    /// HT-mixed preamble and PHY headers.
    pub phy_preamble_us: f64,
    /// Legacy ACK at 6 Mb/s: 20 µs preamble + six 4 µs symbols.
    pub ack_duration_us: f64,
    /// Expected backoff, CW_min / 2.
    pub mean_backoff_slots: f64,
    pub payload_bytes: u32,
    pub retry_cap: u32,
}

impl Default for MacTimingConfig {
    fn default() -> Self {
        Self {
            slot_us: 9.0,
            sifs_us: 16.0,
            difs_us: 34.0,
            phy_preamble_us: 40.0,
            ack_duration_us: 44.0,
            mean_backoff_slots: 7.5,
            payload_bytes: 1400,
            retry_cap: crate::rate_control::DEFAULT_RETRY_CAP,
        }
    }
}

impl MacTimingConfig {
    pub fn payload_bits(&self) -> u32 {
        self.payload_bytes * 8
    }

    /// Per-attempt time that does not depend on the MCS, in seconds.
    pub fn fixed_overhead_s(&self) -> f64 {
        (self.difs_us
            + self.mean_backoff_slots * self.slot_us
            + self.phy_preamble_us
            + self.sifs_us
            + self.ack_duration_us)
            * 1e-6
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("slot_us", self.slot_us),
            ("sifs_us", self.sifs_us),
            ("difs_us", self.difs_us),
            ("phy_preamble_us", self.phy_preamble_us),
            ("ack_duration_us", self.ack_duration_us),
            ("mean_backoff_slots", self.mean_backoff_slots),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(field, "must be positive"));
            }
        }
        if self.payload_bytes == 0 {
            return Err(Error::config("payload_bytes", "must be positive"));
        }
        if self.retry_cap == 0 {
            return Err(Error::config("retry_cap", "must be positive"));
        }
        Ok(())
    }

    /// Delivered payload bits per second of airtime at each MCS, assuming
    /// every attempt succeeds.
    pub fn effective_rates(&self) -> [f64; McsIndex::COUNT] {
        let bits = self.payload_bits() as f64;
        let mut out = [0.0; McsIndex::COUNT];
        for m in McsIndex::all() {
            out[m.as_usize()] = bits / frame_airtime(m.entry(), self);
        }
        out
    }
}

/// Channel time of one attempt in seconds: DIFS, mean backoff, preamble,
/// payload at the PHY rate, SIFS and the ACK.
pub fn frame_airtime(mcs: &McsEntry, timing: &MacTimingConfig) -> f64 {
    timing.fixed_overhead_s() + timing.payload_bits() as f64 / mcs.phy_rate_bps
}
