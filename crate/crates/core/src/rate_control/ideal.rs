//! Ideal: threshold lookup on the receiver SNR of the last delivered frame,
//! reported back out of band.

use serde::{Deserialize, Serialize};

use super::{TxDecision, TxFeedback};
use crate::channel::{McsIndex, ThresholdTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealState {
    pub last_feedback_snr_db: Option<f64>,
    pub retry_cap: u32,
}

impl IdealState {
    pub fn new(retry_cap: u32) -> Self {
        Self {
            last_feedback_snr_db: None,
            retry_cap,
        }
    }

    /// Lost frames produce no report.
    pub fn on_feedback(&mut self, fb: &TxFeedback) {
        if fb.success {
            self.last_feedback_snr_db = Some(fb.rx_snr_db);
        }
    }

    pub fn current_mcs(&self, table: &ThresholdTable) -> McsIndex {
        self.last_feedback_snr_db
            .map(|snr| table.mcs_for_snr(snr))
            .unwrap_or(McsIndex::MIN)
    }
}

pub fn ideal_decide(state: &IdealState, table: &ThresholdTable) -> TxDecision {
    TxDecision::new(
        [(state.current_mcs(table), state.retry_cap)],
        state.retry_cap,
    )
}
