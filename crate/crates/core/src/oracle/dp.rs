//! Exact offline optimum over a fading sequence.
//!
//! The forward recursion tracks, for every reachable buffer state `q = (q1, q2)`,
//! the largest number `D(q)` of packets delivered so far. An extra buffered
//! packet can add at most one future delivery, so a state is useless when
//!
//! ```text
//! D(q) <= D(q') - (q1 - q1')+ - (q2 - q2')+      for some q' != q
//! ```
//!
//! and it is dropped. The right-hand side maximized over `q'` is the envelope
//! `E`, a longest-path value on the lattice where steps `+e1`, `+e2` are free
//! and steps `-e1`, `-e2` cost one.
//!
//! Buffered packets beyond the number of slots that can still drain a
//! buffer are worthless, so states are clamped to that count.
//!
//! Survivors concentrate on a few diagonals `q2 - q1 = c`. The envelope is
//! evaluated on a ragged band in `(s, c) = (q1, q2 - q1)` coordinates: for each
//! diagonal an interval of `s` covering the candidates. Paths leaving the band
//! are ignored, which can only make the envelope smaller, so every dropped
//! state is still dominated and the optimum is unaffected. Values are
//! propagated in decreasing order with a bucket queue.

use serde::{Deserialize, Serialize};

use crate::channel::{classify_region, ChannelDraw, SnrRegion, Thresholds};
use crate::engine::{step, RelayBuffers};
use crate::mode::TransmissionMode;
use crate::{Error, Result};

use TransmissionMode::*;

pub const DEFAULT_HORIZON_CAP: usize = 10_000;

/// Enumeration is limited to this many slots.
pub const EXHAUSTIVE_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpSolution {
    /// Total delivered bits, both directions.
    pub delivered: f64,
    pub delivered_packets: u64,
    /// One optimal mode per slot.
    pub modes: Vec<TransmissionMode>,
    /// Largest number of states kept after any slot.
    pub peak_states: usize,
}

const NONE: i64 = i64::MIN / 4;

/// Buffer change `(dq1, dq2)` and delivered packets of a successful mode.
fn effect(mode: TransmissionMode) -> (i64, i64, i64) {
    match mode {
        M1 => (1, 0, 0),
        M2 => (0, 1, 0),
        M3 => (1, 1, 0),
        M4 => (0, -1, 1),
        M5 => (-1, 0, 1),
        M6 => (-1, -1, 2),
        M7 => (0, 0, 0),
    }
}

#[derive(Debug, Clone, Copy)]
struct State {
    q1: i64,
    q2: i64,
    d: i64,
}

impl State {
    fn key(&self) -> (i64, i64) {
        (self.q2 - self.q1, self.q1)
    }
}

/// Survivors of one slot, stored as runs along diagonals.
#[derive(Debug, Default)]
struct Layer {
    /// `(c, first s, length, index of first state)`, sorted by `(c, s)`.
    runs: Vec<(i32, i32, u32, u32)>,
    /// Mode that led to each state.
    modes: Vec<u8>,
    /// Predecessor of states reached through a clamped transition.
    clamped: Vec<(u32, i64, i64)>,
}

impl Layer {
    fn push(&mut self, s: i64, c: i64, mode: u8, pred: Option<(i64, i64)>) {
        let (c, s) = (c as i32, s as i32);
        let idx = self.modes.len() as u32;
        match self.runs.last_mut() {
            Some(run) if run.0 == c && run.1 + run.2 as i32 == s => run.2 += 1,
            _ => self.runs.push((c, s, 1, idx)),
        }
        self.modes.push(mode);
        if let Some((p1, p2)) = pred {
            self.clamped.push((idx, p1, p2));
        }
    }

    /// Mode into `(q1, q2)` and the state it came from.
    fn back(&self, q1: i64, q2: i64) -> (TransmissionMode, i64, i64) {
        let (c, s) = ((q2 - q1) as i32, q1 as i32);
        let k = self.runs.partition_point(|r| (r.0, r.1) <= (c, s)) - 1;
        let run = self.runs[k];
        debug_assert!(run.0 == c && s < run.1 + run.2 as i32);
        let idx = run.3 + (s - run.1) as u32;
        let mode = TransmissionMode::ALL[self.modes[idx as usize] as usize];
        match self.clamped.binary_search_by_key(&idx, |x| x.0) {
            Ok(j) => (mode, self.clamped[j].1, self.clamped[j].2),
            Err(_) => {
                let (d1, d2, _) = effect(mode);
                (mode, q1 - d1, q2 - d2)
            }
        }
    }
}

/// Flag on a cell's mode byte: reached through a clamped transition.
const CLAMPED: u8 = 0x80;

/// Cells of one diagonal: `s` in `lo..=hi` live at index `off + s`.
#[derive(Debug, Clone, Copy)]
struct Diag {
    lo: i64,
    hi: i64,
    off: i64,
}

const EMPTY: Diag = Diag {
    lo: i64::MAX,
    hi: i64::MIN,
    off: 0,
};

/// Working cells: for every diagonal `c` an interval of `s`, wide enough to
/// hold each candidate and its lattice neighbours. The first and last
/// diagonals are always empty.
#[derive(Default)]
struct Band {
    c0: i64,
    diags: Vec<Diag>,
    value: Vec<i64>,
    mode: Vec<u8>,
    env: Vec<i64>,
    cell_diag: Vec<u32>,
    buckets: Vec<Vec<u32>>,
    /// `(cell, q1, q2)` of the predecessor of clamped candidates.
    preds: Vec<(usize, i64, i64)>,
}

impl Band {
    /// Cells around `groups` (diagonal, smallest s, largest s) and `extra` points.
    fn build(&mut self, groups: &[(i64, i64, i64)], extra: &[(i64, i64)]) {
        let mut cmin = groups[0].0 - 1;
        let mut cmax = groups[groups.len() - 1].0 + 1;
        for &(_, c) in extra {
            cmin = cmin.min(c - 1);
            cmax = cmax.max(c + 1);
        }
        self.c0 = cmin - 1;
        let c0 = self.c0;
        self.diags.clear();
        self.diags.resize((cmax - cmin + 3) as usize, EMPTY);
        let diags = &mut self.diags;
        let mut widen = |c: i64, a: i64, b: i64, r: i64| {
            let k = (c - c0) as usize;
            for d in &mut diags[k - r as usize..=k + r as usize] {
                d.lo = d.lo.min(a - r);
                d.hi = d.hi.max(b + r);
            }
        };
        for &(c, a, b) in groups {
            widen(c, a, b, 1);
        }
        for &(s, c) in extra {
            widen(c, s, s, 1);
        }
        self.cell_diag.clear();
        let mut total = 0i64;
        for (k, d) in self.diags.iter_mut().enumerate() {
            if d.hi >= d.lo {
                let len = d.hi - d.lo + 1;
                d.off = total - d.lo;
                total += len;
                self.cell_diag.extend(std::iter::repeat_n(k as u32, len as usize));
            }
        }
        let total = total as usize;
        self.value.clear();
        self.value.resize(total, NONE);
        self.mode.clear();
        self.mode.resize(total, 0);
        self.preds.clear();
    }

    /// Cell at `s` on diagonal number `k`.
    #[inline]
    fn at(&self, k: usize, s: i64) -> Option<usize> {
        let d = self.diags[k];
        (s >= d.lo && s <= d.hi).then(|| (d.off + s) as usize)
    }

    #[inline]
    fn index(&self, s: i64, c: i64) -> Option<usize> {
        let k = c - self.c0;
        if k < 0 || k as usize >= self.diags.len() {
            return None;
        }
        self.at(k as usize, s)
    }

    #[inline]
    fn env_at(&self, k: usize, s: i64) -> i64 {
        self.at(k, s).map_or(NONE, |i| self.env[i])
    }

    #[inline]
    fn offer(&mut self, i: usize, d: i64, mode: u8) -> bool {
        if d > self.value[i] {
            self.value[i] = d;
            self.mode[i] = mode;
            true
        } else {
            false
        }
    }

    /// Longest-path values from the candidates, propagated in decreasing
    /// order with a bucket queue.
    fn propagate(&mut self) {
        for b in &mut self.buckets {
            b.clear();
        }
        self.env.clone_from(&self.value);
        let top = self.value.iter().copied().max().unwrap_or(0);
        for (i, &v) in self.value.iter().enumerate() {
            if v != NONE {
                let key = (top - v) as usize;
                if key + 1 >= self.buckets.len() {
                    self.buckets.resize_with(key + 2, Vec::new);
                }
                self.buckets[key].push(i as u32);
            }
        }
        // (ds, diagonal step, cost) of -e1, -e2, +e1, +e2
        const STEPS: [(i64, isize, i64); 4] = [(-1, 1, 0), (0, -1, 0), (1, -1, 1), (0, 1, 1)];
        let mut key = 0;
        while key < self.buckets.len() {
            while let Some(node) = self.buckets[key].pop() {
                let node = node as usize;
                let e = self.env[node];
                if (top - e) as usize != key {
                    continue;
                }
                let k = self.cell_diag[node] as usize;
                let s = node as i64 - self.diags[k].off;
                for (ds, dk, cost) in STEPS {
                    if let Some(j) = self.at(k.wrapping_add_signed(dk), s + ds) {
                        let v = e - cost;
                        if v > self.env[j] {
                            self.env[j] = v;
                            let b = key + cost as usize;
                            if b >= self.buckets.len() {
                                self.buckets.push(Vec::new());
                            }
                            self.buckets[b].push(j as u32);
                        }
                    }
                }
            }
            key += 1;
        }
    }

    /// Best value reachable from a state other than `(s, c)` itself, for a
    /// cell on diagonal number `k`.
    #[inline]
    fn rival(&self, k: usize, s: i64) -> i64 {
        self.env_at(k - 1, s + 1)
            .max(self.env_at(k + 1, s))
            .max(self.env_at(k + 1, s - 1) - 1)
            .max(self.env_at(k - 1, s) - 1)
    }
}

/// Offers every successor of `states` (sorted by `(c, s)`) to the band.
fn expand(states: &[State], flags: [bool; 7], cap: (i64, i64), band: &mut Band, groups: &mut Vec<(i64, i64, i64)>) {
    let mut extra = Vec::new();
    groups.clear();
    for x in states {
        let (c, s) = x.key();
        match groups.last_mut() {
            Some(g) if g.0 == c => g.2 = s,
            _ => groups.push((c, s, s)),
        }
        if x.q1 < cap.0 && x.q2 < cap.1 {
            continue;
        }
        for mode in TransmissionMode::ALL {
            let (d1, d2, _) = effect(mode);
            let (q1, q2) = (x.q1 + d1, x.q2 + d2);
            if (q1 > cap.0 || q2 > cap.1) && (mode == M7 || flags[mode.index()]) {
                let (q1, q2) = (q1.min(cap.0), q2.min(cap.1));
                extra.push((q1, q2 - q1));
            }
        }
    }
    band.build(groups, &extra);

    let mut g = 0;
    let mut group_end = 0;
    let mut offs = [0i64; 3];
    for (i, x) in states.iter().enumerate() {
        let (c, s) = x.key();
        if i == group_end {
            while groups[g].0 != c {
                g += 1;
            }
            group_end = i + states[i..].iter().take_while(|y| y.key().0 == c).count();
            for (j, b) in offs.iter_mut().enumerate() {
                *b = band.diags[(c - 1 + j as i64 - band.c0) as usize].off;
            }
        }
        for mode in TransmissionMode::ALL {
            if !(mode == M7 || flags[mode.index()]) {
                continue;
            }
            let (d1, d2, gain) = effect(mode);
            let (q1, q2) = (x.q1 + d1, x.q2 + d2);
            if q1 < 0 || q2 < 0 {
                continue;
            }
            let d = x.d + gain;
            if q1 > cap.0 || q2 > cap.1 {
                let (q1, q2) = (q1.min(cap.0), q2.min(cap.1));
                let i = band.index(q1, q2 - q1).expect("clamped candidate inside the band");
                if band.offer(i, d, mode.index() as u8 | CLAMPED) {
                    band.preds.push((i, x.q1, x.q2));
                }
            } else {
                let i = (offs[(d2 - d1 + 1) as usize] + s + d1) as usize;
                band.offer(i, d, mode.index() as u8);
            }
        }
    }
}

/// Best total delivery over `fading`, starting from empty buffers.
pub fn dp_offline_optimum(
    fading: &[ChannelDraw],
    thr: Thresholds,
    rate0: f64,
    horizon_cap: usize,
) -> Result<DpSolution> {
    let n = fading.len();
    if n > horizon_cap {
        return Err(Error::HorizonTooLarge {
            horizon: n,
            cap: horizon_cap,
        });
    }
    let regions: Vec<SnrRegion> = fading.iter().map(|&d| classify_region(d, thr)).collect();

    // Packets a buffer can still hand over after slot t.
    let mut caps = vec![(0i64, 0i64); n];
    for t in (0..n.saturating_sub(1)).rev() {
        let f = regions[t + 1].flags();
        caps[t] = (
            caps[t + 1].0 + i64::from(f[M5.index()]),
            caps[t + 1].1 + i64::from(f[M4.index()]),
        );
    }

    let mut states = vec![State { q1: 0, q2: 0, d: 0 }];
    let mut layers: Vec<Layer> = Vec::with_capacity(n);
    let mut band = Band::default();
    let mut groups = Vec::new();
    let mut peak = 1;

    for (t, region) in regions.iter().enumerate() {
        expand(&states, region.flags(), caps[t], &mut band, &mut groups);
        band.propagate();

        let mut next = Vec::with_capacity(states.len() + 8);
        let mut layer = Layer::default();
        for k in 0..band.diags.len() {
            let c = band.c0 + k as i64;
            let diag = band.diags[k];
            for s in diag.lo..=diag.hi {
                let i = (diag.off + s) as usize;
                let d = band.value[i];
                if d == NONE || band.rival(k, s) >= d {
                    continue;
                }
                let mode = band.mode[i];
                let pred = (mode & CLAMPED != 0).then(|| {
                    let &(_, p1, p2) = band.preds.iter().rev().find(|p| p.0 == i).expect("clamped predecessor");
                    (p1, p2)
                });
                next.push(State { q1: s, q2: s + c, d });
                layer.push(s, c, mode & !CLAMPED, pred);
            }
        }
        peak = peak.max(next.len());
        states = next;
        layers.push(layer);
    }

    let best = *states
        .iter()
        .max_by_key(|x| (x.d, std::cmp::Reverse(x.key())))
        .expect("at least one state survives");
    let mut modes = vec![M7; n];
    let (mut q1, mut q2) = (best.q1, best.q2);
    for t in (0..n).rev() {
        let (mode, p1, p2) = layers[t].back(q1, q2);
        modes[t] = mode;
        (q1, q2) = (p1, p2);
    }
    debug_assert_eq!((q1, q2), (0, 0));
    let packets = best.d as u64;
    Ok(DpSolution {
        delivered: packets as f64 * rate0,
        delivered_packets: packets,
        modes,
        peak_states: peak,
    })
}

/// Delivered packets of a mode sequence, replayed with the engine's step.
pub fn replay_packets(fading: &[ChannelDraw], modes: &[TransmissionMode], thr: Thresholds) -> u64 {
    let mut buffers = RelayBuffers::default();
    let mut total = 0;
    for (&draw, &mode) in fading.iter().zip(modes) {
        let (next, rec) = step(buffers, draw, mode, thr, 1.0);
        buffers = next;
        total += (rec.delivered_12 + rec.delivered_21) as u64;
    }
    total
}

/// Brute force over all `7^N` mode sequences; `N` at most [`EXHAUSTIVE_MAX`].
pub fn exhaustive_optimum(fading: &[ChannelDraw], thr: Thresholds, rate0: f64) -> Result<f64> {
    if fading.len() > EXHAUSTIVE_MAX {
        return Err(Error::HorizonTooLarge {
            horizon: fading.len(),
            cap: EXHAUSTIVE_MAX,
        });
    }
    fn search(fading: &[ChannelDraw], buffers: RelayBuffers, thr: Thresholds) -> u64 {
        let Some((&draw, rest)) = fading.split_first() else {
            return 0;
        };
        TransmissionMode::ALL
            .iter()
            .map(|&mode| {
                let (next, rec) = step(buffers, draw, mode, thr, 1.0);
                (rec.delivered_12 + rec.delivered_21) as u64 + search(rest, next, thr)
            })
            .max()
            .unwrap_or(0)
    }
    Ok(search(fading, RelayBuffers::default(), thr) as f64 * rate0)
}
