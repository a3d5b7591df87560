//! Minstrel-HT restricted to a single (NSS, GI, bandwidth) group.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{TxDecision, TxFeedback, DEFAULT_RETRY_CAP};
use crate::channel::McsIndex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinstrelParams {
    /// Weight of the newest window in the success-probability EWMA.
    pub ewma_weight: f64,
    /// Every n-th data frame is a sampling frame.
    pub sampling_interval: u32,
    /// Attempts allotted to the max_tp, max_tp2 and max_prob stages.
    pub retry_budgets: [u32; 3],
    pub retry_cap: u32,
    /// Success probability assumed before any observation.
    pub initial_success_prob: f64,
}

impl Default for MinstrelParams {
    fn default() -> Self {
        Self {
            ewma_weight: 0.25,
            sampling_interval: 16,
            retry_budgets: [3, 3, 4],
            retry_cap: DEFAULT_RETRY_CAP,
            initial_success_prob: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsStats {
    pub attempts_window: u64,
    pub successes_window: u64,
    pub ewma_success_prob: f64,
    /// bits/s
    pub expected_throughput: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateStats {
    pub per_mcs: [McsStats; McsIndex::COUNT],
    /// Payload bits per second of airtime at each MCS, overhead included.
    pub effective_rates: [f64; McsIndex::COUNT],
}

impl RateStats {
    pub fn new(initial_prob: f64, effective_rates: [f64; McsIndex::COUNT]) -> Self {
        let mut per_mcs = [McsStats {
            attempts_window: 0,
            successes_window: 0,
            ewma_success_prob: initial_prob,
            expected_throughput: 0.0,
        }; McsIndex::COUNT];
        for (s, rate) in per_mcs.iter_mut().zip(effective_rates) {
            s.expected_throughput = s.ewma_success_prob * rate;
        }
        Self {
            per_mcs,
            effective_rates,
        }
    }

    pub fn get(&self, mcs: McsIndex) -> &McsStats {
        &self.per_mcs[mcs.as_usize()]
    }

    fn get_mut(&mut self, mcs: McsIndex) -> &mut McsStats {
        &mut self.per_mcs[mcs.as_usize()]
    }

    /// Best MCS by `key`, ties to the higher index, skipping `exclude`.
    fn best_by(&self, key: impl Fn(&McsStats) -> f64, exclude: Option<McsIndex>) -> McsIndex {
        let mut best: Option<(McsIndex, f64)> = None;
        for m in McsIndex::all() {
            if Some(m) == exclude {
                continue;
            }
            let v = key(self.get(m));
            // >= makes the later (higher) index win ties.
            if best.is_none_or(|(_, b)| v >= b) {
                best = Some((m, v));
            }
        }
        best.map(|(m, _)| m).unwrap_or(McsIndex::MIN)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinstrelState {
    pub params: MinstrelParams,
    pub stats: RateStats,
    pub max_tp: McsIndex,
    pub max_tp2: McsIndex,
    pub max_prob: McsIndex,
    pub frames_since_sample: u32,
    pub last_update: f64,
}

impl MinstrelState {
    pub fn new(params: MinstrelParams, effective_rates: [f64; McsIndex::COUNT]) -> Self {
        let stats = RateStats::new(params.initial_success_prob, effective_rates);
        let mut state = Self {
            params,
            stats,
            max_tp: McsIndex::MIN,
            max_tp2: McsIndex::MIN,
            max_prob: McsIndex::MIN,
            frames_since_sample: 0,
            last_update: 0.0,
        };
        state.select_rates();
        state
    }

    fn select_rates(&mut self) {
        self.max_tp = self.stats.best_by(|s| s.expected_throughput, None);
        self.max_tp2 = self
            .stats
            .best_by(|s| s.expected_throughput, Some(self.max_tp));
        self.max_prob = self.stats.best_by(|s| s.ewma_success_prob, None);
    }

    /// Counts one attempt at `fb.mcs_used`, and one success if it got
    /// through.
    pub fn on_feedback(&mut self, fb: &TxFeedback) {
        let s = self.stats.get_mut(fb.mcs_used);
        s.attempts_window += 1;
        if fb.success {
            s.successes_window += 1;
        }
    }

    /// The regular (non-sampling) retry chain.
    pub fn retry_chain(&self) -> [(McsIndex, u32); 3] {
        let [a1, a2, a3] = self.params.retry_budgets;
        [(self.max_tp, a1), (self.max_tp2, a2), (self.max_prob, a3)]
    }
}

/// Folds the window counters into the EWMAs and re-ranks the rates.
pub fn minstrel_update_stats(state: &mut MinstrelState, now: f64) {
    let w = state.params.ewma_weight;
    for (stats, rate) in state
        .stats
        .per_mcs
        .iter_mut()
        .zip(state.stats.effective_rates)
    {
        if stats.attempts_window > 0 {
            let observed = stats.successes_window as f64 / stats.attempts_window as f64;
            stats.ewma_success_prob =
                ((1.0 - w) * stats.ewma_success_prob + w * observed).clamp(0.0, 1.0);
        }
        stats.attempts_window = 0;
        stats.successes_window = 0;
        stats.expected_throughput = stats.ewma_success_prob * rate;
    }
    state.select_rates();
    state.last_update = now;
}

/// Next frame's retry chain. Every `sampling_interval`-th frame first
/// probes a random MCS other than max_tp with a single attempt.
pub fn minstrel_decide<R: Rng + ?Sized>(state: &mut MinstrelState, rng: &mut R) -> TxDecision {
    state.frames_since_sample += 1;
    let chain = state.retry_chain();
    let cap = state.params.retry_cap;
    if state.params.sampling_interval > 0
        && state.frames_since_sample >= state.params.sampling_interval
    {
        state.frames_since_sample = 0;
        let pick = rng.random_range(0..McsIndex::COUNT as u8 - 1);
        let sample = if pick >= state.max_tp.get() {
            pick + 1
        } else {
            pick
        };
        let sample = McsIndex::new(sample).expect("sample index in range");
        TxDecision::new(std::iter::once((sample, 1)).chain(chain), cap)
    } else {
        TxDecision::new(chain, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(i: u8) -> McsIndex {
        McsIndex::new(i).unwrap()
    }

    /// Rates proportional to the PHY rate; enough for ranking tests.
    fn rates() -> [f64; 8] {
        [6.5e6, 13e6, 19.5e6, 26e6, 39e6, 52e6, 58.5e6, 65e6]
    }

    fn state() -> MinstrelState {
        MinstrelState::new(MinstrelParams::default(), rates())
    }

    fn feed(state: &mut MinstrelState, mcs: McsIndex, attempts: u32, successes: u32) {
        for i in 0..attempts {
            state.on_feedback(&TxFeedback {
                mcs_used: mcs,
                attempt_index: 0,
                success: i < successes,
                rx_snr_db: 0.0,
            });
        }
    }

    #[test]
    fn optimistic_start() {
        let s = state();
        assert_eq!(s.max_tp, m(7));
        assert_eq!(s.max_tp2, m(6));
        assert_eq!(s.max_prob, m(7));
    }

    #[test]
    fn ewma_update() {
        let mut s = state();
        feed(&mut s, m(7), 10, 0);
        minstrel_update_stats(&mut s, 0.05);
        // 0.75 * 1.0 + 0.25 * 0.0
        assert_eq!(s.stats.get(m(7)).ewma_success_prob, 0.75);
        assert_eq!(s.stats.get(m(3)).ewma_success_prob, 1.0);
        assert_eq!(s.stats.get(m(7)).attempts_window, 0);
        assert_eq!(s.last_update, 0.05);
    }

    #[test]
    fn ties_go_to_higher_index() {
        let mut r = rates();
        r[5] = r[6];
        let mut s = MinstrelState::new(MinstrelParams::default(), r);
        feed(&mut s, m(7), 10, 0);
        for _ in 0..20 {
            feed(&mut s, m(7), 10, 0);
            minstrel_update_stats(&mut s, 0.0);
        }
        assert_eq!(s.max_tp, m(6));
        assert_eq!(s.max_tp2, m(5));
        assert_eq!(s.max_prob, m(6));
    }

    #[test]
    fn regular_and_sampling_frames() {
        let mut s = state();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..15 {
            let d = minstrel_decide(&mut s, &mut rng);
            assert_eq!(d.first_mcs(), m(7));
        }
        let d = minstrel_decide(&mut s, &mut rng);
        assert_eq!(d.stages()[0].max_attempts, 1);
        assert_ne!(d.first_mcs(), s.max_tp);
        assert!(d.total_attempts() <= 10);
        let d = minstrel_decide(&mut s, &mut rng);
        let order: Vec<_> = d.stages().iter().map(|st| st.mcs).collect();
        assert_eq!(order, vec![m(7), m(6), m(7)]);
    }

    #[test]
    fn samples_cover_every_other_rate() {
        let mut s = state();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = [false; 8];
        for _ in 0..16 * 200 {
            let d = minstrel_decide(&mut s, &mut rng);
            if d.stages()[0].max_attempts == 1 {
                seen[d.first_mcs().as_usize()] = true;
            }
        }
        assert_eq!(seen, [true, true, true, true, true, true, true, false]);
    }
}
