//! Slot-by-slot simulation of the relay buffers.
//!
//! Buffers hold whole packets of `R0` bits. A relay-transmit mode either moves
//! a full packet or nothing: if the channel supports the mode but a required
//! buffer is empty, the slot is wasted and flagged as *starved*.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{classify_region, draw_gains, ChannelDraw, SnrRegion, SystemParams, Thresholds};
use crate::mode::TransmissionMode;
use crate::policy::{build_dice, build_dice_max_r12, select_mode, DiceTable};
use crate::regions::analytic_probabilities;
use crate::rng::{stream, SimRng};
use crate::{Error, Result};

/// Packets waiting at the relay: `q1` from user 1, `q2` from user 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayBuffers {
    pub q1: u64,
    pub q2: u64,
}

/// What happened in one slot. Amounts are in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub region: SnrRegion,
    pub mode: TransmissionMode,
    pub delivered_12: f64,
    pub delivered_21: f64,
    pub stored_1: f64,
    pub stored_2: f64,
    pub starved: bool,
}

/// Packet-level outcome of one slot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Moves {
    stored_1: bool,
    stored_2: bool,
    delivered_12: bool,
    delivered_21: bool,
    starved: bool,
}

fn apply(buffers: &mut RelayBuffers, region: SnrRegion, mode: TransmissionMode) -> Moves {
    use TransmissionMode::*;
    let mut m = Moves::default();
    if !region.flags()[mode.index()] {
        return m;
    }
    match mode {
        M1 => m.stored_1 = true,
        M2 => m.stored_2 = true,
        M3 => {
            m.stored_1 = true;
            m.stored_2 = true;
        }
        M4 => {
            m.delivered_21 = buffers.q2 >= 1;
            m.starved = !m.delivered_21;
        }
        M5 => {
            m.delivered_12 = buffers.q1 >= 1;
            m.starved = !m.delivered_12;
        }
        M6 => {
            let ok = buffers.q1 >= 1 && buffers.q2 >= 1;
            m.delivered_12 = ok;
            m.delivered_21 = ok;
            m.starved = !ok;
        }
        M7 => {}
    }
    buffers.q1 = buffers.q1 + m.stored_1 as u64 - m.delivered_12 as u64;
    buffers.q2 = buffers.q2 + m.stored_2 as u64 - m.delivered_21 as u64;
    m
}

/// Applies `mode` to the buffers for the given fading draw.
pub fn step(
    buffers: RelayBuffers,
    draw: ChannelDraw,
    mode: TransmissionMode,
    thr: Thresholds,
    rate0: f64,
) -> (RelayBuffers, SlotRecord) {
    let mut next = buffers;
    let region = classify_region(draw, thr);
    let m = apply(&mut next, region, mode);
    let bits = |b: bool| if b { rate0 } else { 0.0 };
    let record = SlotRecord {
        region,
        mode,
        delivered_12: bits(m.delivered_12),
        delivered_21: bits(m.delivered_21),
        stored_1: bits(m.stored_1),
        stored_2: bits(m.stored_2),
        starved: m.starved,
    };
    (next, record)
}

/// Picks the mode of each slot. Implementations may consume randomness.
pub trait Scheduler {
    fn choose(&mut self, slot: u64, region: SnrRegion, rng: &mut SimRng) -> TransmissionMode;
}

/// The optimal randomized policy driven by a fixed dice table.
#[derive(Debug, Clone)]
pub struct DicePolicy {
    pub dice: DiceTable,
}

impl Scheduler for DicePolicy {
    fn choose(&mut self, _slot: u64, region: SnrRegion, rng: &mut SimRng) -> TransmissionMode {
        select_mode(region, &self.dice, rng)
    }
}

/// Replays a fixed mode sequence; slots past its end are silent.
#[derive(Debug, Clone)]
pub struct FixedSequence(pub Vec<TransmissionMode>);

impl Scheduler for FixedSequence {
    fn choose(&mut self, slot: u64, _region: SnrRegion, _rng: &mut SimRng) -> TransmissionMode {
        self.0.get(slot as usize).copied().unwrap_or(TransmissionMode::M7)
    }
}

/// Packet counters over a window of slots.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketTotals {
    pub slots: u64,
    pub stored_1: u64,
    pub stored_2: u64,
    pub delivered_12: u64,
    pub delivered_21: u64,
    pub starved: u64,
}

impl PacketTotals {
    fn add(&mut self, m: &Moves) {
        self.slots += 1;
        self.stored_1 += m.stored_1 as u64;
        self.stored_2 += m.stored_2 as u64;
        self.delivered_12 += m.delivered_12 as u64;
        self.delivered_21 += m.delivered_21 as u64;
        self.starved += m.starved as u64;
    }
}

/// Average rates and outages over a window of slots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    pub r_1r: f64,
    pub r_2r: f64,
    pub r_r1: f64,
    pub r_r2: f64,
    pub r_12: f64,
    pub r_21: f64,
    pub r_sum: f64,
    /// Standard error of `r_sum`.
    pub r_sum_stderr: f64,
    pub f_12: f64,
    pub f_21: f64,
    pub f_sys: f64,
    pub n_slots: u64,
    pub starvation_rate: f64,
}

impl ThroughputReport {
    pub fn from_totals(t: &PacketTotals, rate0: f64, r_sum_stderr: f64) -> Self {
        let n = t.slots.max(1) as f64;
        let rate = |k: u64| k as f64 * rate0 / n;
        let r_12 = rate(t.delivered_12);
        let r_21 = rate(t.delivered_21);
        let f_12 = 1.0 - r_12 / (rate0 / 2.0);
        let f_21 = 1.0 - r_21 / (rate0 / 2.0);
        ThroughputReport {
            r_1r: rate(t.stored_1),
            r_2r: rate(t.stored_2),
            r_r1: r_21,
            r_r2: r_12,
            r_12,
            r_21,
            r_sum: r_12 + r_21,
            r_sum_stderr,
            f_12,
            f_21,
            f_sys: (f_12 + f_21) / 2.0,
            n_slots: t.slots,
            starvation_rate: t.starved as f64 / n,
        }
    }
}

/// One row of the per-slot trace. Queue levels are after the slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub slot: u64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub region: SnrRegion,
    pub mode: TransmissionMode,
    pub q1: f64,
    pub q2: f64,
    pub delivered12: f64,
    pub delivered21: f64,
    pub starved: bool,
}

/// How the standard error of the sum rate is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorEstimate {
    /// Non-overlapping batch means, robust to queue-induced correlation.
    BatchMeans,
    /// Treats slots as independent.
    Iid,
}

const BATCHES: u64 = 64;
const MIN_BATCH_LEN: u64 = 64;

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    /// Rates over the slots after the warmup.
    pub report: ThroughputReport,
    /// Rates over every slot.
    pub full_report: ThroughputReport,
    pub window: PacketTotals,
    pub totals: PacketTotals,
    pub final_buffers: RelayBuffers,
    pub trace: Option<Vec<TraceRow>>,
}

/// Runs `n_slots` slots from empty buffers.
///
/// `next_draw` supplies the fading of each slot and may draw from `rng`
/// before the scheduler does.
#[allow(clippy::too_many_arguments)]
pub fn simulate<S, F>(
    scheduler: &mut S,
    mut next_draw: F,
    thr: Thresholds,
    rate0: f64,
    n_slots: u64,
    warmup: u64,
    rng: &mut SimRng,
    estimate: ErrorEstimate,
    keep_trace: bool,
) -> Result<SimulationOutput>
where
    S: Scheduler + ?Sized,
    F: FnMut(u64, &mut SimRng) -> ChannelDraw,
{
    if n_slots == 0 {
        return Err(Error::Config("n_slots must be at least 1".into()));
    }
    if warmup >= n_slots {
        return Err(Error::Config(format!(
            "warmup {warmup} must be below n_slots {n_slots}"
        )));
    }
    let window_len = n_slots - warmup;
    let batched = estimate == ErrorEstimate::BatchMeans && window_len >= BATCHES * MIN_BATCH_LEN;
    let mut batch_sums = vec![0u64; if batched { BATCHES as usize } else { 0 }];
    let (mut sum, mut sum_sq) = (0u64, 0u64);

    let mut buffers = RelayBuffers::default();
    let mut totals = PacketTotals::default();
    let mut window = PacketTotals::default();
    let mut trace = keep_trace.then(|| Vec::with_capacity(n_slots as usize));

    for slot in 0..n_slots {
        let draw = next_draw(slot, rng);
        let region = classify_region(draw, thr);
        let mode = scheduler.choose(slot, region, rng);
        let moves = apply(&mut buffers, region, mode);
        totals.add(&moves);
        if slot >= warmup {
            window.add(&moves);
            let delivered = moves.delivered_12 as u64 + moves.delivered_21 as u64;
            sum += delivered;
            sum_sq += delivered * delivered;
            if batched {
                batch_sums[((slot - warmup) * BATCHES / window_len) as usize] += delivered;
            }
        }
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow {
                slot,
                gamma1: draw.snr1,
                gamma2: draw.snr2,
                region,
                mode,
                q1: buffers.q1 as f64 * rate0,
                q2: buffers.q2 as f64 * rate0,
                delivered12: if moves.delivered_12 { rate0 } else { 0.0 },
                delivered21: if moves.delivered_21 { rate0 } else { 0.0 },
                starved: moves.starved,
            });
        }
    }

    let stderr = if batched {
        let means: Vec<f64> = (0..BATCHES)
            .map(|b| {
                let len = (b + 1) * window_len / BATCHES - b * window_len / BATCHES;
                batch_sums[b as usize] as f64 / len as f64
            })
            .collect();
        let mean = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        (var / BATCHES as f64).sqrt() * rate0
    } else {
        let n = window_len as f64;
        let mean = sum as f64 / n;
        let var = (sum_sq as f64 / n - mean * mean).max(0.0);
        (var / n).sqrt() * rate0
    };

    Ok(SimulationOutput {
        report: ThroughputReport::from_totals(&window, rate0, stderr),
        full_report: ThroughputReport::from_totals(&totals, rate0, f64::NAN),
        window,
        totals,
        final_buffers: buffers,
        trace,
    })
}

/// Settings of a single simulation of the optimal policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: SystemParams,
    /// Fairness parameter; `None` maximizes the user 1 to user 2 rate.
    pub fairness: Option<f64>,
    pub n_slots: u64,
    pub warmup: u64,
    pub seed: u64,
    /// Index of the random stream derived from `seed`.
    pub stream: u64,
    pub trace: bool,
}

impl RunConfig {
    /// Defaults: maximal `R_12`, 1% warmup, stream 0, no trace.
    pub fn new(params: SystemParams, n_slots: u64, seed: u64) -> Self {
        RunConfig {
            params,
            fairness: None,
            n_slots,
            warmup: n_slots / 100,
            seed,
            stream: 0,
            trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dice: DiceTable,
    pub sim: SimulationOutput,
}

impl RunOutput {
    pub fn report(&self) -> &ThroughputReport {
        &self.sim.report
    }
}

/// Dice of the optimal policy for `params`.
pub fn policy_dice(params: &SystemParams, fairness: Option<f64>) -> Result<DiceTable> {
    let probs = analytic_probabilities(params)?;
    match fairness {
        Some(lambda) => build_dice(&probs, lambda),
        None => build_dice_max_r12(&probs),
    }
}

/// Simulates the optimal policy with fading drawn from the configured stream.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let params = config.params;
    let dice = policy_dice(&params, config.fairness)?;
    let mut rng = stream(config.seed, config.stream);
    let sim = simulate(
        &mut DicePolicy { dice },
        |_, rng| draw_gains(rng, &params),
        params.thresholds(),
        params.rate0,
        config.n_slots,
        config.warmup,
        &mut rng,
        ErrorEstimate::BatchMeans,
        config.trace,
    )?;
    Ok(RunOutput { dice, sim })
}

/// Draws `n` slots of fading.
pub fn fading_trace<R: Rng + ?Sized>(params: &SystemParams, n: usize, rng: &mut R) -> Vec<ChannelDraw> {
    (0..n).map(|_| draw_gains(rng, params)).collect()
}

/// Runs `scheduler` on a prerecorded fading sequence with no warmup.
pub fn replay<S: Scheduler + ?Sized>(
    scheduler: &mut S,
    fading: &[ChannelDraw],
    thr: Thresholds,
    rate0: f64,
    rng: &mut SimRng,
) -> Result<SimulationOutput> {
    simulate(
        scheduler,
        |slot, _| fading[slot as usize],
        thr,
        rate0,
        fading.len() as u64,
        0,
        rng,
        ErrorEstimate::Iid,
        false,
    )
}

/// Queue levels `(slot, Q1, Q2)` in bits after each slot, if a trace was kept.
pub fn queue_trace(output: &SimulationOutput) -> Option<Vec<(u64, f64, f64)>> {
    output
        .trace
        .as_ref()
        .map(|rows| rows.iter().map(|r| (r.slot, r.q1, r.q2)).collect())
}

/// Writes trace rows as CSV with a header line.
pub fn write_trace_csv<W: Write>(rows: &[TraceRow], writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()
}
