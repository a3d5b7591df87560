//! Link budget and error model.
//!
//! SNR follows the Friis free-space budget. Bit errors follow the NIST
//! OFDM error rate model: closed-form uncoded BER per constellation, then
//! a first-event union bound for the K = 7 convolutional code at the
//! punctured rate of each MCS.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise density at 290 K, dBm/Hz.
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub noise_power_dbm: f64,
    pub carrier_frequency_hz: f64,
    pub bandwidth_hz: f64,
}

impl RadioConfig {
    /// Noise floor of a receiver with the given noise figure.
    pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
        THERMAL_NOISE_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db
    }

    /// Defaults on a given carrier: 20 dBm, 0 dBi antennas, 20 MHz and a
    /// 7 dB noise figure (about -94 dBm of noise).
    pub fn on_carrier(carrier_frequency_hz: f64) -> Self {
        let bandwidth_hz = 20e6;
        Self {
            tx_power_dbm: 20.0,
            tx_gain_dbi: 0.0,
            rx_gain_dbi: 0.0,
            noise_power_dbm: Self::thermal_noise_dbm(bandwidth_hz, 7.0),
            carrier_frequency_hz,
            bandwidth_hz,
        }
    }

    /// Channel 36.
    pub fn access_default() -> Self {
        Self::on_carrier(5180e6)
    }

    /// Channel 48.
    pub fn relay_default() -> Self {
        Self::on_carrier(5240e6)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    pub fn validate(&self) -> Result<()> {
        if self.carrier_frequency_hz.is_nan() || self.carrier_frequency_hz <= 0.0 {
            return Err(Error::config("carrier_frequency_hz", "must be positive"));
        }
        if self.bandwidth_hz.is_nan() || self.bandwidth_hz <= 0.0 {
            return Err(Error::config("bandwidth_hz", "must be positive"));
        }
        if self.noise_power_dbm.is_nan()
            || self.tx_power_dbm.is_nan()
            || self.noise_power_dbm >= self.tx_power_dbm
        {
            return Err(Error::config(
                "noise_power_dbm",
                "must be below tx_power_dbm",
            ));
        }
        Ok(())
    }
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self::access_default()
    }
}

/// Free-space path loss in dB.
pub fn fspl_db(dist: f64, wavelength: f64) -> Result<f64> {
    if dist.is_nan() || dist <= 0.0 {
        return Err(Error::NonPositiveDistance(dist));
    }
    if wavelength.is_nan() || wavelength <= 0.0 {
        return Err(Error::NonPositiveWavelength(wavelength));
    }
    Ok(20.0 * (4.0 * PI * dist / wavelength).log10())
}

pub fn snr_db(radio: &RadioConfig, dist: f64) -> Result<f64> {
    let loss = fspl_db(dist, radio.wavelength())?;
    Ok(radio.tx_power_dbm + radio.tx_gain_dbi + radio.rx_gain_dbi - radio.noise_power_dbm - loss)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Bpsk => 1,
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Bpsk => "BPSK",
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16-QAM",
            Modulation::Qam64 => "64-QAM",
        })
    }
}

/// Punctured convolutional code rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodingRate {
    Half,
    TwoThirds,
    ThreeQuarters,
    FiveSixths,
}

impl CodingRate {
    pub fn ratio(self) -> (u32, u32) {
        match self {
            CodingRate::Half => (1, 2),
            CodingRate::TwoThirds => (2, 3),
            CodingRate::ThreeQuarters => (3, 4),
            CodingRate::FiveSixths => (5, 6),
        }
    }

    pub fn as_f64(self) -> f64 {
        let (n, d) = self.ratio();
        n as f64 / d as f64
    }

    /// Distance spectrum of the punctured K = 7 code: (free distance,
    /// coefficients for d_free, d_free + 1, ...). Rate 1/2 only has
    /// even-weight terms, hence the step of 2.
    fn spectrum(self) -> (i32, i32, &'static [f64]) {
        match self {
            CodingRate::Half => (
                10,
                2,
                &[
                    36.0,
                    211.0,
                    1404.0,
                    11633.0,
                    77433.0,
                    502690.0,
                    3322763.0,
                    21292910.0,
                    134365911.0,
                ],
            ),
            CodingRate::TwoThirds => (
                6,
                1,
                &[
                    3.0, 70.0, 285.0, 1276.0, 6160.0, 27128.0, 117019.0, 498860.0, 2103891.0,
                    8784123.0,
                ],
            ),
            CodingRate::ThreeQuarters => (
                5,
                1,
                &[
                    42.0,
                    201.0,
                    1492.0,
                    10469.0,
                    62935.0,
                    379644.0,
                    2253373.0,
                    13073811.0,
                    75152755.0,
                    428005675.0,
                ],
            ),
            CodingRate::FiveSixths => (
                4,
                1,
                &[
                    92.0,
                    528.0,
                    8694.0,
                    79453.0,
                    792114.0,
                    7375573.0,
                    67884974.0,
                    610875423.0,
                    5427275376.0,
                    47664215639.0,
                ],
            ),
        }
    }
}

impl fmt::Display for CodingRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = self.ratio();
        write!(f, "{n}/{d}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct McsIndex(u8);

impl McsIndex {
    pub const COUNT: usize = 8;
    pub const MIN: McsIndex = McsIndex(0);
    pub const MAX: McsIndex = McsIndex(7);

    pub fn new(index: u8) -> Result<Self> {
        if (index as usize) < Self::COUNT {
            Ok(McsIndex(index))
        } else {
            Err(Error::InvalidMcs(index))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn as_usize(self) -> usize {
        self.0 as usize
    }

    pub fn all() -> impl DoubleEndedIterator<Item = McsIndex> + ExactSizeIterator {
        (0..Self::COUNT as u8).map(McsIndex)
    }

    pub fn entry(self) -> &'static McsEntry {
        &MCS_TABLE[self.as_usize()]
    }
}

impl fmt::Display for McsIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: McsIndex,
    pub modulation: Modulation,
    pub coding_rate: CodingRate,
    pub phy_rate_bps: f64,
}

const DATA_SUBCARRIERS: f64 = 52.0;
/// OFDM symbol with the 800 ns guard interval.
const SYMBOL_DURATION_S: f64 = 4e-6;

const fn mcs(
    index: u8,
    modulation: Modulation,
    coding_rate: CodingRate,
    phy_rate_bps: f64,
) -> McsEntry {
    McsEntry {
        index: McsIndex(index),
        modulation,
        coding_rate,
        phy_rate_bps,
    }
}

/// HT MCS 0-7: one spatial stream, 20 MHz, long guard interval.
pub static MCS_TABLE: [McsEntry; McsIndex::COUNT] = [
    mcs(0, Modulation::Bpsk, CodingRate::Half, 6.5e6),
    mcs(1, Modulation::Qpsk, CodingRate::Half, 13.0e6),
    mcs(2, Modulation::Qpsk, CodingRate::ThreeQuarters, 19.5e6),
    mcs(3, Modulation::Qam16, CodingRate::Half, 26.0e6),
    mcs(4, Modulation::Qam16, CodingRate::ThreeQuarters, 39.0e6),
    mcs(5, Modulation::Qam64, CodingRate::TwoThirds, 52.0e6),
    mcs(6, Modulation::Qam64, CodingRate::ThreeQuarters, 58.5e6),
    mcs(7, Modulation::Qam64, CodingRate::FiveSixths, 65.0e6),
];

impl McsEntry {
    /// PHY rate from the OFDM parameters; equals `phy_rate_bps`.
    pub fn derived_phy_rate(&self) -> f64 {
        DATA_SUBCARRIERS * self.modulation.bits_per_symbol() as f64 * self.coding_rate.as_f64()
            / SYMBOL_DURATION_S
    }
}

/// Uncoded bit error probability at linear SNR `snr`.
pub fn uncoded_ber(modulation: Modulation, snr: f64) -> f64 {
    let snr = snr.max(0.0);
    match modulation {
        Modulation::Bpsk => 0.5 * erfc(snr.sqrt()),
        Modulation::Qpsk => 0.5 * erfc((snr / 2.0).sqrt()),
        Modulation::Qam16 => 0.75 * 0.5 * erfc((snr / 10.0).sqrt()),
        Modulation::Qam64 => 7.0 / 12.0 * 0.5 * erfc((snr / 42.0).sqrt()),
    }
}

/// Union bound on the decoded bit error probability given the raw channel
/// bit error probability `p` (hard-decision Viterbi).
fn union_bound(p: f64, rate: CodingRate) -> f64 {
    let d = (4.0 * p * (1.0 - p)).sqrt();
    let (d_free, step, coefficients) = rate.spectrum();
    let (b, _) = rate.ratio();
    let sum: f64 = coefficients
        .iter()
        .enumerate()
        .map(|(i, a)| a * d.powi(d_free + step * i as i32))
        .sum();
    sum / (2.0 * b as f64)
}

/// Decoded bit error probability for `mcs` at linear SNR `snr`, clamped to
/// `[0, 1]`.
pub fn coded_ber(mcs: &McsEntry, snr: f64) -> f64 {
    let p = uncoded_ber(mcs.modulation, snr);
    if p == 0.0 {
        return 0.0;
    }
    union_bound(p, mcs.coding_rate).clamp(0.0, 1.0)
}

/// Probability that every one of `payload_bits` decodes correctly.
pub fn frame_success_prob(mcs: &McsEntry, snr_db: f64, payload_bits: u32) -> f64 {
    let ber = coded_ber(mcs, db_to_linear(snr_db));
    // powi keeps (1 - 1e-6)^11200 accurate; ln_1p would too but is slower.
    (1.0 - ber).powi(payload_bits as i32).clamp(0.0, 1.0)
}

pub const THRESHOLD_SEARCH_MIN_DB: f64 = -10.0;
pub const THRESHOLD_SEARCH_MAX_DB: f64 = 60.0;
pub const THRESHOLD_RESOLUTION_DB: f64 = 0.01;

/// Minimum SNR per MCS that reaches a target decoded BER.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub target_ber: f64,
    pub thresholds_db: [f64; McsIndex::COUNT],
}

impl ThresholdTable {
    pub fn threshold(&self, mcs: McsIndex) -> f64 {
        self.thresholds_db[mcs.as_usize()]
    }

    /// Highest MCS whose threshold is at or below `snr_db`, MCS 0 when the
    /// SNR is below every threshold.
    pub fn mcs_for_snr(&self, snr_db: f64) -> McsIndex {
        McsIndex::all()
            .rev()
            .find(|m| self.threshold(*m) <= snr_db)
            .unwrap_or(McsIndex::MIN)
    }

    /// CSV with columns mcs, modulation, coding_rate, phy_rate_bps,
    /// snr_threshold_db.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mcs,modulation,coding_rate,phy_rate_bps,snr_threshold_db\n");
        for m in McsIndex::all() {
            let e = m.entry();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                m,
                e.modulation,
                e.coding_rate,
                crate::csvfmt::sig9(e.phy_rate_bps),
                crate::csvfmt::sig9(self.threshold(m)),
            ));
        }
        out
    }
}

pub fn mcs_for_snr(table: &ThresholdTable, snr_db: f64) -> McsIndex {
    table.mcs_for_snr(snr_db)
}

/// Bisection over SNR (dB) for the least value whose coded BER meets
/// `target_ber`. The radio does not enter the error model; it is accepted
/// so callers build tables per link.
/// Least SNR in the search range for which `meets` holds, assuming `meets`
/// is monotone in SNR. `None` when even the top of the range fails.
fn search_threshold(meets: impl Fn(f64) -> bool) -> Option<f64> {
    let (mut lo, mut hi) = (THRESHOLD_SEARCH_MIN_DB, THRESHOLD_SEARCH_MAX_DB);
    if !meets(hi) {
        return None;
    }
    if meets(lo) {
        return Some(lo);
    }
    // Invariant: !meets(lo) && meets(hi).
    while hi - lo > THRESHOLD_RESOLUTION_DB {
        let mid = 0.5 * (lo + hi);
        if meets(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

pub fn build_threshold_table(target_ber: f64, radio: &RadioConfig) -> Result<ThresholdTable> {
    radio.validate()?;
    if !(target_ber > 0.0 && target_ber < 1.0) {
        return Err(Error::config("target_ber", "must lie in (0, 1)"));
    }
    let mut thresholds_db = [0.0; McsIndex::COUNT];
    for m in McsIndex::all() {
        let entry = m.entry();
        thresholds_db[m.as_usize()] =
            search_threshold(|db| coded_ber(entry, db_to_linear(db)) <= target_ber).ok_or(
                Error::ThresholdOutOfRange {
                    mcs: m.get(),
                    target_ber,
                },
            )?;
    }
    Ok(ThresholdTable {
        target_ber,
        thresholds_db,
    })
}
