//! TARA: Minstrel-HT steered by an SNR prediction from known trajectories.
//!
//! Two hooks change Minstrel-HT. After each statistics update the
//! predicted MCS is promoted to max_tp when it is faster; and every frame
//! opens with a fixed prefix on the predicted MCS (the first transmission
//! plus two retries) before the regular retry chain takes over.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::minstrel::{minstrel_decide, minstrel_update_stats, MinstrelState};
use super::TxDecision;
use crate::channel::{McsIndex, ThresholdTable};

/// Retries on the predicted MCS before falling back to Minstrel-HT.
pub const TARA_RETRY_LIMIT: u32 = 2;
/// Transmission attempts on the predicted MCS.
pub const TARA_ATTEMPTS: u32 = TARA_RETRY_LIMIT + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaraState {
    pub inner: MinstrelState,
    pub mcs_tara: Option<McsIndex>,
    /// With prediction off TARA is plain Minstrel-HT.
    pub prediction_enabled: bool,
}

impl TaraState {
    pub fn new(inner: MinstrelState) -> Self {
        Self {
            inner,
            mcs_tara: None,
            prediction_enabled: true,
        }
    }

    pub fn without_prediction(inner: MinstrelState) -> Self {
        Self {
            prediction_enabled: false,
            ..Self::new(inner)
        }
    }
}

pub fn tara_update_stats(
    state: &mut TaraState,
    predicted_snr_db: Option<f64>,
    table: &ThresholdTable,
    now: f64,
) {
    minstrel_update_stats(&mut state.inner, now);
    if !state.prediction_enabled {
        return;
    }
    if let Some(snr) = predicted_snr_db {
        state.mcs_tara = Some(table.mcs_for_snr(snr));
    }
    if let Some(tara) = state.mcs_tara {
        let inner = &mut state.inner;
        if tara.entry().phy_rate_bps > inner.max_tp.entry().phy_rate_bps {
            inner.max_tp2 = inner.max_tp;
            inner.max_tp = tara;
        }
    }
}

pub fn tara_decide<R: Rng + ?Sized>(state: &mut TaraState, rng: &mut R) -> TxDecision {
    match state.mcs_tara {
        Some(tara) if state.prediction_enabled => {
            let inner = &state.inner;
            TxDecision::new(
                std::iter::once((tara, TARA_ATTEMPTS)).chain(inner.retry_chain()),
                inner.params.retry_cap,
            )
        }
        _ => minstrel_decide(&mut state.inner, rng),
    }
}
