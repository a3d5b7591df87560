//! Run configuration: a TOML file whose every key is optional.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use flyrate::channel::RadioConfig;
use flyrate::kinematics::ScenarioConfig;
use flyrate::rate_control::{Algorithm, MinstrelParams};
use flyrate::simulator::{MacTimingConfig, SimConfig};

use crate::CliError;

/// Inclusive seed range, written `A..B` (or a single `N`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    pub fn seeds(&self) -> Vec<u64> {
        (self.first..=self.last).collect()
    }

    pub fn len(&self) -> usize {
        (self.last - self.first + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Default for SeedRange {
    fn default() -> Self {
        Self {
            first: 1,
            last: 100,
        }
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.first, self.last)
    }
}

impl FromStr for SeedRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad seed `{t}` in `{s}`"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let n = num(s)?;
                (n, n)
            }
        };
        if first > last {
            return Err(format!("empty seed range `{s}`"));
        }
        Ok(Self { first, last })
    }
}

impl Serialize for SeedRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seeds: SeedRange,
    pub algorithms: Vec<Algorithm>,
    /// Defaults to `$FLYRATE_OUT_DIR`, then `flyrate-out`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Statistics update period, milliseconds.
    pub tau_ms: f64,
    pub target_ber: f64,
    pub queue_capacity: usize,
    pub tara_prediction: bool,
    pub record_trace: bool,
    pub scenario: ScenarioConfig,
    pub mac: MacTimingConfig,
    pub minstrel: MinstrelParams,
    pub access_radio: RadioConfig,
    #[serde(default = "RadioConfig::relay_default")]
    pub relay_radio: RadioConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        Self {
            seeds: SeedRange::default(),
            algorithms: Algorithm::ALL.to_vec(),
            out_dir: None,
            jobs: None,
            tau_ms: sim.tau * 1e3,
            target_ber: sim.target_ber,
            queue_capacity: sim.queue_capacity,
            tara_prediction: sim.tara_prediction,
            record_trace: sim.record_trace,
            scenario: ScenarioConfig::default(),
            mac: sim.timing,
            minstrel: sim.minstrel,
            access_radio: sim.access_radio,
            relay_radio: sim.relay_radio,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            timing: self.mac.clone(),
            access_radio: self.access_radio.clone(),
            relay_radio: self.relay_radio.clone(),
            minstrel: self.minstrel.clone(),
            tau: self.tau_ms / 1e3,
            target_ber: self.target_ber,
            queue_capacity: self.queue_capacity,
            tara_prediction: self.tara_prediction,
            record_trace: self.record_trace,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.algorithms.is_empty() {
            return Err(CliError::Config("algorithms: list is empty".into()));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs: must be at least 1".into()));
        }
        self.scenario.validate()?;
        self.sim_config().validate()?;
        Ok(())
    }
}

/// Parses a comma-separated algorithm list.
pub fn parse_algorithms(list: &str) -> Result<Vec<Algorithm>, CliError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let alg: Algorithm = name.parse()?;
        if !out.contains(&alg) {
            out.push(alg);
        }
    }
    Ok(out)
}
