//! Two-link relay simulation: FEN → FGW (access) and FGW → BKH (relay).
//!
//! The links sit on separate channels, so each has its own timeline and
//! they interact only through the gateway's forwarding queue. The edge
//! node always has a frame ready. Each frame walks its controller's retry
//! chain; every attempt occupies the channel for one airtime and succeeds
//! with the frame success probability at the current true SNR.

mod mac;
pub mod output;
mod queue;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_threshold_table, frame_success_prob, snr_db, McsIndex, RadioConfig, ThresholdTable,
};
use crate::kinematics::{distance, Scenario, ScenarioConfig, Trajectory};
use crate::rate_control::{Algorithm, Controller, MinstrelParams, Snapshot, TxFeedback};
use crate::rng::{substream, Stream};
use crate::{Error, Result};

pub use mac::{frame_airtime, MacTimingConfig};
pub use queue::RelayQueue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkId {
    Access,
    Relay,
}

impl LinkId {
    pub const ALL: [LinkId; 2] = [LinkId::Access, LinkId::Relay];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkId::Access => "access",
            LinkId::Relay => "relay",
        }
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "access" => Ok(LinkId::Access),
            "relay" => Ok(LinkId::Relay),
            other => Err(Error::Parse(format!("unknown link `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub timing: MacTimingConfig,
    pub access_radio: RadioConfig,
    pub relay_radio: RadioConfig,
    pub minstrel: MinstrelParams,
    /// Statistics update period, seconds.
    pub tau: f64,
    pub target_ber: f64,
    pub queue_capacity: usize,
    /// Turning this off makes TARA behave exactly like Minstrel-HT.
    pub tara_prediction: bool,
    /// Keep the per-τ decision trace in [`RunMetrics::trace`].
    pub record_trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            timing: MacTimingConfig::default(),
            access_radio: RadioConfig::access_default(),
            relay_radio: RadioConfig::relay_default(),
            minstrel: MinstrelParams::default(),
            tau: 0.05,
            target_ber: 1e-6,
            queue_capacity: 1000,
            tara_prediction: true,
            record_trace: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.timing.validate()?;
        self.access_radio.validate()?;
        self.relay_radio.validate()?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config("tau", "must be positive"));
        }
        if !(self.target_ber > 0.0 && self.target_ber < 1.0) {
            return Err(Error::config("target_ber", "must lie in (0, 1)"));
        }
        if self.queue_capacity == 0 {
            return Err(Error::config("queue_capacity", "must be positive"));
        }
        let w = self.minstrel.ewma_weight;
        if !(w > 0.0 && w <= 1.0) {
            return Err(Error::config("ewma_weight", "must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Validated configuration plus the per-link threshold tables, shared by
/// every run of a batch.
#[derive(Debug, Clone)]
pub struct SimContext {
    pub config: SimConfig,
    pub access_table: ThresholdTable,
    pub relay_table: ThresholdTable,
}

impl SimContext {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let access_table = build_threshold_table(config.target_ber, &config.access_radio)?;
        let relay_table = build_threshold_table(config.target_ber, &config.relay_radio)?;
        Ok(Self {
            config,
            access_table,
            relay_table,
        })
    }

    fn minstrel_params(&self) -> MinstrelParams {
        MinstrelParams {
            retry_cap: self.config.timing.retry_cap,
            ..self.config.minstrel.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub time: f64,
    pub link: LinkId,
    pub snapshot: Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub link: LinkId,
    /// Payload bits delivered to the receiver in each simulated second.
    pub delivered_bits: Vec<u64>,
    /// Link distance at the middle of each second.
    pub distance_m: Vec<f64>,
    /// Controller's first-stage MCS at the last τ tick of each second.
    pub first_stage_mcs: Vec<u8>,
    /// Channel time spent transmitting in each second.
    pub busy_time_s: Vec<f64>,
    pub delivered_packets: u64,
    pub attempts: u64,
    /// Frames abandoned after the retry cap.
    pub retry_drops: u64,
    /// Frames refused by a full forwarding queue (relay link only).
    pub queue_drops: u64,
}

impl LinkMetrics {
    fn new(link: LinkId, seconds: usize) -> Self {
        Self {
            link,
            delivered_bits: vec![0; seconds],
            distance_m: vec![0.0; seconds],
            first_stage_mcs: vec![0; seconds],
            busy_time_s: vec![0.0; seconds],
            delivered_packets: 0,
            attempts: 0,
            retry_drops: 0,
            queue_drops: 0,
        }
    }

    pub fn total_bits(&self) -> u64 {
        self.delivered_bits.iter().sum()
    }

    /// Mean throughput over the run, bits/s.
    pub fn mean_throughput_bps(&self) -> f64 {
        if self.delivered_bits.is_empty() {
            0.0
        } else {
            self.total_bits() as f64 / self.delivered_bits.len() as f64
        }
    }

    pub fn drops(&self) -> u64 {
        self.retry_drops + self.queue_drops
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub access: LinkMetrics,
    pub relay: LinkMetrics,
    pub trace: Vec<TraceRow>,
}

impl RunMetrics {
    pub fn link(&self, link: LinkId) -> &LinkMetrics {
        match link {
            LinkId::Access => &self.access,
            LinkId::Relay => &self.relay,
        }
    }
}

/// One link's transmitter-side state while a run is in progress.
struct LinkSim<'a> {
    id: LinkId,
    tx: &'a Trajectory,
    rx: &'a Trajectory,
    radio: &'a RadioConfig,
    table: &'a ThresholdTable,
    controller: Controller,
    /// Time the channel becomes free for the next frame.
    now: f64,
    next_tick: f64,
    loss_rng: ChaCha8Rng,
    sampling_rng: ChaCha8Rng,
    metrics: LinkMetrics,
}

impl<'a> LinkSim<'a> {
    fn distance_at(&self, t: f64) -> Result<f64> {
        Ok(distance(self.tx.position_at(t)?, self.rx.position_at(t)?))
    }

    fn snr_at(&self, t: f64) -> Result<f64> {
        snr_db(self.radio, self.distance_at(t)?)
    }

    /// Runs every τ tick up to and including `t` (but before `end`).
    fn run_ticks(
        &mut self,
        t: f64,
        end: f64,
        ctx: &SimContext,
        trace: &mut Option<Vec<TraceRow>>,
    ) -> Result<()> {
        let tau = ctx.config.tau;
        while self.next_tick <= t && self.next_tick < end {
            let tick = self.next_tick;
            let prediction = if self.controller.wants_prediction() {
                Some(self.snr_at(tick + tau / 2.0)?)
            } else {
                None
            };
            self.controller.update_stats(tick, prediction, self.table);
            let snapshot = self.controller.snapshot(self.table);
            let second = tick as usize;
            if let Some(slot) = self.metrics.first_stage_mcs.get_mut(second) {
                *slot = snapshot.first_stage_mcs.get();
            }
            if let Some(rows) = trace.as_mut() {
                rows.push(TraceRow {
                    time: tick,
                    link: self.id,
                    snapshot,
                });
            }
            self.next_tick = tick + tau;
        }
        Ok(())
    }

    fn add_busy(&mut self, start: f64, end: f64) {
        let bins = &mut self.metrics.busy_time_s;
        let mut t = start;
        while t < end {
            let second = t.floor();
            let Some(bin) = bins.get_mut(second as usize) else {
                break;
            };
            let upto = end.min(second + 1.0);
            *bin += upto - t;
            t = upto;
        }
    }

    /// Sends one frame starting at `self.now`. Returns the completion time
    /// when the frame got through within the run.
    fn transmit(
        &mut self,
        end: f64,
        ctx: &SimContext,
        trace: &mut Option<Vec<TraceRow>>,
    ) -> Result<Option<f64>> {
        self.run_ticks(self.now, end, ctx, trace)?;
        let decision = self.controller.decide(self.table, &mut self.sampling_rng);
        let payload_bits = ctx.config.timing.payload_bits();
        let mut t = self.now;
        let mut delivered = false;
        for (i, mcs) in decision.attempts().enumerate() {
            if t >= end {
                break;
            }
            let snr = self.snr_at(t)?;
            let success = attempt_frame(mcs, snr, payload_bits, &mut self.loss_rng);
            let airtime = frame_airtime(mcs.entry(), &ctx.config.timing);
            self.add_busy(t, t + airtime);
            t += airtime;
            self.metrics.attempts += 1;
            self.controller.on_feedback(&TxFeedback {
                mcs_used: mcs,
                attempt_index: i as u32,
                success,
                rx_snr_db: snr,
            });
            if success {
                delivered = true;
                break;
            }
        }
        self.now = t;
        if !delivered {
            if t < end {
                self.metrics.retry_drops += 1;
            }
            return Ok(None);
        }
        if t >= end {
            return Ok(None);
        }
        self.metrics.delivered_packets += 1;
        self.metrics.delivered_bits[t as usize] += payload_bits as u64;
        Ok(Some(t))
    }

    fn finish(
        &mut self,
        end: f64,
        ctx: &SimContext,
        trace: &mut Option<Vec<TraceRow>>,
    ) -> Result<()> {
        self.run_ticks(end, end, ctx, trace)?;
        for s in 0..self.metrics.distance_m.len() {
            let mid = (s as f64 + 0.5).min(end);
            self.metrics.distance_m[s] = self.distance_at(mid)?;
        }
        Ok(())
    }
}

/// One Bernoulli draw with the frame success probability of `mcs` at
/// `snr_db`. Consumes exactly one value from `rng`.
pub fn attempt_frame<R: Rng + ?Sized>(
    mcs: McsIndex,
    snr_db: f64,
    payload_bits: u32,
    rng: &mut R,
) -> bool {
    let p = frame_success_prob(mcs.entry(), snr_db, payload_bits);
    rng.random::<f64>() < p
}

/// Simulates `scenario` under `algorithm`. The `seed` keys the loss and
/// sampling streams of both links.
pub fn run_simulation(
    scenario: &Scenario,
    algorithm: Algorithm,
    ctx: &SimContext,
    seed: u64,
) -> Result<RunMetrics> {
    let end = scenario.config.run_duration;
    if !(end >= 0.0 && end.is_finite()) {
        return Err(Error::config("run_duration", "must be non-negative"));
    }
    let seconds = end.ceil() as usize;
    let params = ctx.minstrel_params();
    let rates = ctx.config.timing.effective_rates();

    let new_link = |id: LinkId| -> LinkSim<'_> {
        let (tx, rx, radio, table) = match id {
            LinkId::Access => (
                &scenario.fen,
                &scenario.fgw,
                &ctx.config.access_radio,
                &ctx.access_table,
            ),
            LinkId::Relay => (
                &scenario.fgw,
                &scenario.bkh,
                &ctx.config.relay_radio,
                &ctx.relay_table,
            ),
        };
        let mut controller = Controller::new(algorithm, &params, rates);
        if !ctx.config.tara_prediction {
            controller.disable_prediction();
        }
        LinkSim {
            id,
            tx,
            rx,
            radio,
            table,
            controller,
            now: 0.0,
            next_tick: ctx.config.tau,
            loss_rng: substream(seed, Stream::Loss(id)),
            sampling_rng: substream(seed, Stream::Sampling(id)),
            metrics: LinkMetrics::new(id, seconds),
        }
    };
    let mut access = new_link(LinkId::Access);
    let mut relay = new_link(LinkId::Relay);
    let mut trace = ctx.config.record_trace.then(Vec::new);

    for link in [&mut access, &mut relay] {
        if link.controller.wants_prediction() {
            let snr = link.snr_at(ctx.config.tau / 2.0)?;
            link.controller.prime_prediction(snr, link.table);
        }
    }

    let mut queue = RelayQueue::new(ctx.config.queue_capacity);
    loop {
        let access_next = access.now;
        let relay_next = queue
            .front_arrival()
            .map_or(f64::INFINITY, |arrival| arrival.max(relay.now));
        if relay_next < end && relay_next <= access_next {
            relay.now = relay_next;
            queue.pop();
            relay.transmit(end, ctx, &mut trace)?;
        } else if access_next < end {
            if let Some(arrival) = access.transmit(end, ctx, &mut trace)? {
                if !queue.push(arrival) {
                    relay.metrics.queue_drops += 1;
                }
            }
        } else {
            break;
        }
    }
    access.finish(end, ctx, &mut trace)?;
    relay.finish(end, ctx, &mut trace)?;

    let mut trace = trace.unwrap_or_default();
    // Stable order independent of which link ran ahead.
    trace.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.link.cmp(&b.link)));

    Ok(RunMetrics {
        seed,
        algorithm,
        access: access.metrics,
        relay: relay.metrics,
        trace,
    })
}

/// Results of a batch keyed by (seed, algorithm).
pub type BatchResults = BTreeMap<(u64, Algorithm), RunMetrics>;

/// For every seed, generates one scenario and runs each algorithm on it.
/// Seeds run in parallel on the current rayon pool.
pub fn run_batch(
    config: &ScenarioConfig,
    algorithms: &[Algorithm],
    seeds: &[u64],
    ctx: &SimContext,
) -> Result<BatchResults> {
    if algorithms.is_empty() {
        return Err(Error::EmptyInput("algorithm list"));
    }
    if seeds.is_empty() {
        return Err(Error::EmptyInput("seed list"));
    }
    let per_seed: Vec<Vec<RunMetrics>> = seeds
        .par_iter()
        .map(|&seed| {
            let scenario = Scenario::generate(&config.with_seed(seed))?;
            algorithms
                .iter()
                .map(|&alg| run_simulation(&scenario, alg, ctx, seed))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_seed
        .into_iter()
        .flatten()
        .map(|run| ((run.seed, run.algorithm), run))
        .collect())
}
