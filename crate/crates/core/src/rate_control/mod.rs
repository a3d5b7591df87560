//! Per-link rate controllers.
//!
//! Every controller answers two questions: which retry chain to use for
//! the next frame ([`Controller::decide`]) and how to fold the outcome of
//! each transmission attempt back into its state
//! ([`Controller::on_feedback`]). Minstrel-HT and TARA also run a periodic
//! statistics update every τ ([`Controller::update_stats`]).

mod ideal;
mod minstrel;
mod tara;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{McsIndex, ThresholdTable};
use crate::{Error, Result};

pub use ideal::{ideal_decide, IdealState};
pub use minstrel::{
    minstrel_decide, minstrel_update_stats, MinstrelParams, MinstrelState, RateStats,
};
pub use tara::{tara_decide, tara_update_stats, TaraState, TARA_ATTEMPTS, TARA_RETRY_LIMIT};

/// Upper bound on attempts per frame before it is dropped.
pub const DEFAULT_RETRY_CAP: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Minstrel,
    Tara,
    Ideal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Minstrel, Algorithm::Tara, Algorithm::Ideal];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Minstrel => "minstrel",
            Algorithm::Tara => "tara",
            Algorithm::Ideal => "ideal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minstrel" | "minstrel-ht" | "minstrel_ht" => Ok(Algorithm::Minstrel),
            "tara" => Ok(Algorithm::Tara),
            "ideal" => Ok(Algorithm::Ideal),
            _ => Err(Error::UnknownAlgorithm(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub mcs: McsIndex,
    pub max_attempts: u32,
}

/// Retry chain for one frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxDecision {
    stages: Vec<Stage>,
}

impl TxDecision {
    /// Builds a chain from `(mcs, attempts)` stages: zero-attempt stages are
    /// dropped, adjacent stages on the same MCS merge, and the total is cut
    /// at `retry_cap`.
    pub fn new(stages: impl IntoIterator<Item = (McsIndex, u32)>, retry_cap: u32) -> Self {
        let mut out: Vec<Stage> = Vec::new();
        let mut remaining = retry_cap.max(1);
        for (mcs, attempts) in stages {
            let attempts = attempts.min(remaining);
            if attempts == 0 {
                continue;
            }
            remaining -= attempts;
            match out.last_mut() {
                Some(last) if last.mcs == mcs => last.max_attempts += attempts,
                _ => out.push(Stage {
                    mcs,
                    max_attempts: attempts,
                }),
            }
        }
        if out.is_empty() {
            out.push(Stage {
                mcs: McsIndex::MIN,
                max_attempts: 1,
            });
        }
        Self { stages: out }
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn first_mcs(&self) -> McsIndex {
        self.stages[0].mcs
    }

    pub fn total_attempts(&self) -> u32 {
        self.stages.iter().map(|s| s.max_attempts).sum()
    }

    /// MCS of the zero-based attempt `attempt`, `None` once the chain is
    /// exhausted.
    pub fn mcs_for_attempt(&self, attempt: u32) -> Option<McsIndex> {
        let mut left = attempt;
        for s in &self.stages {
            if left < s.max_attempts {
                return Some(s.mcs);
            }
            left -= s.max_attempts;
        }
        None
    }

    /// MCS of every attempt in order.
    pub fn attempts(&self) -> impl Iterator<Item = McsIndex> + '_ {
        self.stages
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.mcs, s.max_attempts as usize))
    }
}

/// Outcome of one transmission attempt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TxFeedback {
    pub mcs_used: McsIndex,
    pub attempt_index: u32,
    pub success: bool,
    /// Receiver-side SNR; meaningful only when `success`.
    pub rx_snr_db: f64,
}

/// Controller state visible in decision traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub max_tp: Option<McsIndex>,
    pub max_tp2: Option<McsIndex>,
    pub max_prob: Option<McsIndex>,
    pub mcs_tara: Option<McsIndex>,
    /// First-stage MCS of the next regular (non-sampling) frame.
    pub first_stage_mcs: McsIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Minstrel(MinstrelState),
    Tara(TaraState),
    Ideal(IdealState),
}

impl Controller {
    /// `effective_rates` are the per-MCS delivered bits per second of
    /// airtime, used for Minstrel's expected-throughput ranking.
    pub fn new(
        algorithm: Algorithm,
        params: &MinstrelParams,
        effective_rates: [f64; McsIndex::COUNT],
    ) -> Self {
        match algorithm {
            Algorithm::Minstrel => {
                Controller::Minstrel(MinstrelState::new(params.clone(), effective_rates))
            }
            Algorithm::Tara => Controller::Tara(TaraState::new(MinstrelState::new(
                params.clone(),
                effective_rates,
            ))),
            Algorithm::Ideal => Controller::Ideal(IdealState::new(params.retry_cap)),
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Controller::Minstrel(_) => Algorithm::Minstrel,
            Controller::Tara(_) => Algorithm::Tara,
            Controller::Ideal(_) => Algorithm::Ideal,
        }
    }

    /// Whether `update_stats` wants a trajectory-based SNR prediction.
    pub fn wants_prediction(&self) -> bool {
        matches!(self, Controller::Tara(t) if t.prediction_enabled)
    }

    /// Runs a TARA controller as plain Minstrel-HT; no effect otherwise.
    pub fn disable_prediction(&mut self) {
        if let Controller::Tara(s) = self {
            s.prediction_enabled = false;
            s.mcs_tara = None;
        }
    }

    /// Whether `update_stats` should be called every τ.
    pub fn is_periodic(&self) -> bool {
        !matches!(self, Controller::Ideal(_))
    }

    pub fn decide<R: Rng + ?Sized>(&mut self, table: &ThresholdTable, rng: &mut R) -> TxDecision {
        match self {
            Controller::Minstrel(s) => minstrel_decide(s, rng),
            Controller::Tara(s) => tara_decide(s, rng),
            Controller::Ideal(s) => ideal_decide(s, table),
        }
    }

    pub fn on_feedback(&mut self, fb: &TxFeedback) {
        match self {
            Controller::Minstrel(s) => s.on_feedback(fb),
            Controller::Tara(s) => s.inner.on_feedback(fb),
            Controller::Ideal(s) => s.on_feedback(fb),
        }
    }

    /// Periodic update at `now`. `predicted_snr_db` is only consumed by
    /// TARA; `None` leaves the prediction untouched.
    pub fn update_stats(
        &mut self,
        now: f64,
        predicted_snr_db: Option<f64>,
        table: &ThresholdTable,
    ) {
        match self {
            Controller::Minstrel(s) => minstrel_update_stats(s, now),
            Controller::Tara(s) => tara_update_stats(s, predicted_snr_db, table, now),
            Controller::Ideal(_) => {}
        }
    }

    /// Installs a prediction without running a statistics update; used to
    /// seed TARA before the first τ tick.
    pub fn prime_prediction(&mut self, predicted_snr_db: f64, table: &ThresholdTable) {
        if let Controller::Tara(s) = self {
            if s.prediction_enabled {
                s.mcs_tara = Some(table.mcs_for_snr(predicted_snr_db));
            }
        }
    }

    pub fn snapshot(&self, table: &ThresholdTable) -> Snapshot {
        match self {
            Controller::Minstrel(s) => Snapshot {
                max_tp: Some(s.max_tp),
                max_tp2: Some(s.max_tp2),
                max_prob: Some(s.max_prob),
                mcs_tara: None,
                first_stage_mcs: s.max_tp,
            },
            Controller::Tara(s) => Snapshot {
                max_tp: Some(s.inner.max_tp),
                max_tp2: Some(s.inner.max_tp2),
                max_prob: Some(s.inner.max_prob),
                mcs_tara: s.mcs_tara,
                first_stage_mcs: s.mcs_tara.unwrap_or(s.inner.max_tp),
            },
            Controller::Ideal(s) => Snapshot {
                max_tp: None,
                max_tp2: None,
                max_prob: None,
                mcs_tara: None,
                first_stage_mcs: s.current_mcs(table),
            },
        }
    }
}
