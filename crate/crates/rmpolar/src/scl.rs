//! LLR-based successive-cancellation list decoding.
//!
//! The decoder walks the `N` symbol decisions of the `V = U×T` domain in
//! natural order. Frozen positions are forced to the dynamic value
//! induced by earlier decisions through `T` (plain zero when `T = I`);
//! information positions branch both ways and the list is pruned to the
//! `L` lowest path metrics. The metric charges `|llr|` whenever a
//! decision contradicts the sign of its decision LLR, which telescopes to
//! the exact ML codeword metric at the end of a path.
//!
//! Per-stage LLR and partial-sum arrays are pooled and shared between
//! paths with copy-on-write reference counting, so a clone costs one
//! refcount bump per stage plus the packed `u`/accumulator words. A
//! workspace is single-threaded and reusable across calls; distinct
//! workspaces may decode concurrently against one shared [`Codec`].

use crate::codec::{Codec, DecodeOutcome};
use crate::gf2::BitWord;
use crate::{Error, Result};

/// Input LLRs are clamped to this magnitude before decoding.
pub const LLR_CLIP: f64 = 40.0;

/// One surviving path of a finished decode.
#[derive(Debug, Clone)]
pub struct ScoredPath {
    pub u: BitWord,
    pub metric: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    metric: f64,
    path: u32,
    bit: u8,
}

/// Reusable SCL workspace for one block length and maximum list size.
pub struct SclDecoder {
    n: usize,
    m: usize,
    l_max: usize,
    words_per_path: usize,
    chan: Vec<f32>,
    /// Pools indexed `[layer - 1]`, each `l_max` slots of `n >> layer`.
    llr: Vec<Vec<f32>>,
    c0: Vec<Vec<u8>>,
    c1: Vec<Vec<u8>>,
    refcnt: Vec<Vec<u32>>,
    free_slots: Vec<Vec<u32>>,
    slot_of: Vec<Vec<u32>>,
    active: Vec<bool>,
    metric: Vec<f64>,
    u_bits: Vec<u64>,
    acc_bits: Vec<u64>,
    inactive: Vec<u32>,
    snapshot: Vec<u32>,
    cand: Vec<Candidate>,
    metric0: Vec<f64>,
    metric1: Vec<f64>,
    selected: Vec<u8>,
}

#[inline]
fn f_op(a: f32, b: f32) -> f32 {
    let mag = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

#[inline]
fn g_op(a: f32, b: f32, u: u8) -> f32 {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

impl SclDecoder {
    /// Allocates pools for block length `n` and list sizes up to `l_max`.
    pub fn new(n: usize, l_max: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 2 {
            return Err(Error::InvalidInput(format!(
                "block length {n} is not a power of two >= 2"
            )));
        }
        if l_max == 0 {
            return Err(Error::InvalidInput("list size must be at least 1".into()));
        }
        let m = n.trailing_zeros() as usize;
        let words_per_path = n.div_ceil(64);
        let mut llr = Vec::with_capacity(m);
        let mut c0 = Vec::with_capacity(m);
        let mut c1 = Vec::with_capacity(m);
        let mut refcnt = Vec::with_capacity(m);
        let mut free_slots = Vec::with_capacity(m);
        let mut slot_of = Vec::with_capacity(m);
        for layer in 1..=m {
            let sz = n >> layer;
            llr.push(vec![0.0; l_max * sz]);
            c0.push(vec![0; l_max * sz]);
            c1.push(vec![0; l_max * sz]);
            refcnt.push(vec![0; l_max]);
            free_slots.push(Vec::with_capacity(l_max));
            slot_of.push(vec![u32::MAX; l_max]);
        }
        Ok(Self {
            n,
            m,
            l_max,
            words_per_path,
            chan: vec![0.0; n],
            llr,
            c0,
            c1,
            refcnt,
            free_slots,
            slot_of,
            active: vec![false; l_max],
            metric: vec![0.0; l_max],
            u_bits: vec![0; l_max * words_per_path],
            acc_bits: vec![0; l_max * words_per_path],
            inactive: Vec::with_capacity(l_max),
            snapshot: Vec::with_capacity(l_max),
            cand: Vec::with_capacity(2 * l_max),
            metric0: vec![0.0; l_max],
            metric1: vec![0.0; l_max],
            selected: vec![0; l_max],
        })
    }

    pub fn block_len(&self) -> usize {
        self.n
    }

    pub fn max_list_size(&self) -> usize {
        self.l_max
    }

    /// Decodes and applies CRC-aided selection: the best-metric path that
    /// passes the CRC, else the best-metric path with `crc_pass = false`.
    pub fn decode(&mut self, codec: &Codec, llrs: &[f64], list_size: usize) -> Result<DecodeOutcome> {
        self.run(codec, llrs, list_size)?;
        let mut best_pass: Option<(f64, u32)> = None;
        let mut best_any: Option<(f64, u32)> = None;
        for p in 0..self.l_max as u32 {
            if !self.active[p as usize] {
                continue;
            }
            let pm = self.metric[p as usize];
            if best_any.is_none_or(|(b, _)| pm < b) {
                best_any = Some((pm, p));
            }
            if codec.crc_pass(&self.path_u(p as usize))
                && best_pass.is_none_or(|(b, _)| pm < b)
            {
                best_pass = Some((pm, p));
            }
        }
        let (crc_pass, (metric, path)) = match (best_pass, best_any) {
            (Some(hit), _) => (true, hit),
            (None, Some(any)) => (codec.crc().is_none(), any),
            (None, None) => unreachable!("at least one path survives"),
        };
        let u_hat = self.path_u(path as usize);
        Ok(DecodeOutcome {
            payload: codec.extract_payload(&u_hat),
            u_hat,
            crc_pass,
            selected_metric: metric,
            ml_lb_flag: false,
            list_size_used: list_size,
        })
    }

    /// Best metric over the paths surviving the last decode.
    pub fn best_active_metric(&self) -> f64 {
        (0..self.l_max)
            .filter(|&p| self.active[p])
            .map(|p| self.metric[p])
            .fold(f64::INFINITY, f64::min)
    }

    /// Decodes and returns every surviving path, ascending path index.
    pub fn decode_list(
        &mut self,
        codec: &Codec,
        llrs: &[f64],
        list_size: usize,
    ) -> Result<Vec<ScoredPath>> {
        self.run(codec, llrs, list_size)?;
        let mut out = Vec::with_capacity(list_size);
        for p in 0..self.l_max {
            if self.active[p] {
                out.push(ScoredPath {
                    u: self.path_u(p),
                    metric: self.metric[p],
                });
            }
        }
        Ok(out)
    }

    /// Path metric accumulated when every decision is forced to follow
    /// `transmitted_u`, on the same LLR pipeline as a real decode.
    pub fn forced_metric(
        &mut self,
        codec: &Codec,
        llrs: &[f64],
        transmitted_u: &BitWord,
    ) -> Result<f64> {
        self.check_inputs(codec, llrs, 1)?;
        if transmitted_u.len() != self.n {
            return Err(Error::Shape(format!(
                "transmitted word of {} bits, expected {}",
                transmitted_u.len(),
                self.n
            )));
        }
        let v = codec.pretransform().apply(transmitted_u)?;
        self.reset(llrs);
        for phase in 0..self.n {
            self.snapshot.clear();
            self.snapshot.push(0);
            self.compute_llrs(phase);
            let llr = self.decision_llr(0);
            let forced = v.get(phase) as u8;
            let pm = self.metric[0] + penalty(llr, forced);
            self.decide(codec, 0, phase, forced, pm);
            if phase & 1 == 1 {
                self.update_partial_sums(phase);
            }
        }
        Ok(self.metric[0])
    }

    fn check_inputs(&self, codec: &Codec, llrs: &[f64], list_size: usize) -> Result<()> {
        if codec.block_len() != self.n {
            return Err(Error::Shape(format!(
                "codec block length {} vs workspace {}",
                codec.block_len(),
                self.n
            )));
        }
        if llrs.len() != self.n {
            return Err(Error::Shape(format!(
                "{} LLRs for block length {}",
                llrs.len(),
                self.n
            )));
        }
        if llrs.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidInput("non-finite LLR input".into()));
        }
        if list_size == 0 || list_size > self.l_max {
            return Err(Error::InvalidInput(format!(
                "list size {list_size} outside 1..={}",
                self.l_max
            )));
        }
        Ok(())
    }

    fn run(&mut self, codec: &Codec, llrs: &[f64], list_size: usize) -> Result<()> {
        self.check_inputs(codec, llrs, list_size)?;
        self.reset(llrs);
        for phase in 0..self.n {
            self.refresh_snapshot();
            self.compute_llrs(phase);
            if codec.is_frozen(phase) {
                for i in 0..self.snapshot.len() {
                    let p = self.snapshot[i] as usize;
                    let llr = self.decision_llr(p);
                    let forced = self.acc_bit(p, phase);
                    let pm = self.metric[p] + penalty(llr, forced);
                    self.decide(codec, p, phase, forced, pm);
                }
            } else {
                self.branch_and_prune(codec, phase, list_size);
            }
            if phase & 1 == 1 {
                self.refresh_snapshot();
                self.update_partial_sums(phase);
            }
        }
        Ok(())
    }

    fn refresh_snapshot(&mut self) {
        self.snapshot.clear();
        for p in 0..self.l_max as u32 {
            if self.active[p as usize] {
                self.snapshot.push(p);
            }
        }
    }

    fn reset(&mut self, llrs: &[f64]) {
        for (dst, &src) in self.chan.iter_mut().zip(llrs) {
            *dst = src.clamp(-LLR_CLIP, LLR_CLIP) as f32;
        }
        for layer in 0..self.m {
            self.free_slots[layer].clear();
            for s in (0..self.l_max as u32).rev() {
                self.free_slots[layer].push(s);
            }
            self.refcnt[layer].fill(0);
            self.slot_of[layer].fill(u32::MAX);
        }
        self.inactive.clear();
        for p in (0..self.l_max as u32).rev() {
            self.inactive.push(p);
        }
        self.active.fill(false);
        self.metric.fill(0.0);

        let p0 = self.inactive.pop().expect("fresh path pool") as usize;
        self.active[p0] = true;
        self.metric[p0] = 0.0;
        let base = p0 * self.words_per_path;
        self.u_bits[base..base + self.words_per_path].fill(0);
        self.acc_bits[base..base + self.words_per_path].fill(0);
        for layer in 0..self.m {
            let s = self.free_slots[layer].pop().expect("fresh slot pool");
            self.slot_of[layer][p0] = s;
            self.refcnt[layer][s as usize] = 1;
        }
    }

    /// Copy-on-write claim of path `p`'s slot at `layer` (1-based).
    fn claim_write(&mut self, layer: usize, p: usize) -> usize {
        let idx = layer - 1;
        let s = self.slot_of[idx][p] as usize;
        if self.refcnt[idx][s] == 1 {
            return s;
        }
        self.refcnt[idx][s] -= 1;
        let fresh = self.free_slots[idx].pop().expect("slot pool exhausted") as usize;
        let sz = self.n >> layer;
        self.llr[idx].copy_within(s * sz..(s + 1) * sz, fresh * sz);
        self.c0[idx].copy_within(s * sz..(s + 1) * sz, fresh * sz);
        self.c1[idx].copy_within(s * sz..(s + 1) * sz, fresh * sz);
        self.refcnt[idx][fresh] = 1;
        self.slot_of[idx][p] = fresh as u32;
        fresh
    }

    /// Recomputes the LLR planes phase `phase` needs, channel upward.
    fn compute_llrs(&mut self, phase: usize) {
        let start = if phase == 0 {
            1
        } else {
            (self.m - (phase.trailing_zeros() as usize).min(self.m - 1)).max(1)
        };
        for layer in start..=self.m {
            let odd = (phase >> (self.m - layer)) & 1 == 1;
            let sz = self.n >> layer;
            for i in 0..self.snapshot.len() {
                let p = self.snapshot[i] as usize;
                let dst_slot = self.claim_write(layer, p);
                let dst_range = dst_slot * sz..(dst_slot + 1) * sz;
                if layer == 1 {
                    let dst = &mut self.llr[0][dst_range];
                    if odd {
                        let c = &self.c0[0][dst_slot * sz..(dst_slot + 1) * sz];
                        for (b, d) in dst.iter_mut().enumerate() {
                            *d = g_op(self.chan[b], self.chan[b + sz], c[b]);
                        }
                    } else {
                        for (b, d) in dst.iter_mut().enumerate() {
                            *d = f_op(self.chan[b], self.chan[b + sz]);
                        }
                    }
                } else {
                    let src_slot = self.slot_of[layer - 2][p] as usize;
                    let src_base = src_slot * (sz * 2);
                    let (head, tail) = self.llr.split_at_mut(layer - 1);
                    let src = &head[layer - 2][src_base..src_base + 2 * sz];
                    let dst = &mut tail[0][dst_range];
                    if odd {
                        let c = &self.c0[layer - 1][dst_slot * sz..(dst_slot + 1) * sz];
                        for b in 0..sz {
                            dst[b] = g_op(src[b], src[b + sz], c[b]);
                        }
                    } else {
                        for b in 0..sz {
                            dst[b] = f_op(src[b], src[b + sz]);
                        }
                    }
                }
            }
        }
    }

    #[inline]
    fn decision_llr(&self, p: usize) -> f32 {
        let slot = self.slot_of[self.m - 1][p] as usize;
        self.llr[self.m - 1][slot]
    }

    #[inline]
    fn acc_bit(&self, p: usize, i: usize) -> u8 {
        let w = self.acc_bits[p * self.words_per_path + i / 64];
        ((w >> (i % 64)) & 1) as u8
    }

    /// Commits decision `v` for path `p` at `phase` and folds it into the
    /// path's `u` word and dynamic-frozen accumulator.
    fn decide(&mut self, codec: &Codec, p: usize, phase: usize, v: u8, new_metric: f64) {
        let slot = self.claim_write(self.m, p);
        if phase & 1 == 0 {
            self.c0[self.m - 1][slot] = v;
        } else {
            self.c1[self.m - 1][slot] = v;
        }
        self.metric[p] = new_metric;
        let u_bit = v ^ self.acc_bit(p, phase);
        if u_bit == 1 {
            let base = p * self.words_per_path;
            self.u_bits[base + phase / 64] |= 1u64 << (phase % 64);
            for (k, &w) in codec.pretransform().row_mask(phase).words().iter().enumerate() {
                self.acc_bits[base + k] ^= w;
            }
        }
    }

    fn branch_and_prune(&mut self, codec: &Codec, phase: usize, list_size: usize) {
        self.cand.clear();
        for i in 0..self.snapshot.len() {
            let p = self.snapshot[i];
            let llr = self.decision_llr(p as usize);
            let pm = self.metric[p as usize];
            let (m0, m1) = if llr < 0.0 {
                (pm + f64::from(-llr), pm)
            } else {
                (pm, pm + f64::from(llr))
            };
            self.metric0[p as usize] = m0;
            self.metric1[p as usize] = m1;
            self.cand.push(Candidate { metric: m0, path: p, bit: 0 });
            self.cand.push(Candidate { metric: m1, path: p, bit: 1 });
        }
        // Keep the `list_size` smallest under a total order (metric, then
        // path, then bit) so ties resolve to the lower path index. A
        // selection partition finds exactly that set without sorting.
        let keep = list_size.min(self.cand.len());
        if keep < self.cand.len() {
            self.cand.select_nth_unstable_by(keep - 1, |a, b| {
                a.metric
                    .total_cmp(&b.metric)
                    .then(a.path.cmp(&b.path))
                    .then(a.bit.cmp(&b.bit))
            });
        }

        for i in 0..self.snapshot.len() {
            self.selected[self.snapshot[i] as usize] = 0;
        }
        for c in &self.cand[..keep] {
            self.selected[c.path as usize] |= 1 << c.bit;
        }

        // Kills release path ids and slots before clones claim them.
        for i in 0..self.snapshot.len() {
            let p = self.snapshot[i] as usize;
            if self.selected[p] == 0 {
                self.kill_path(p);
            }
        }
        for i in 0..self.snapshot.len() {
            let p = self.snapshot[i] as usize;
            match self.selected[p] {
                0 => {}
                0b01 => self.decide(codec, p, phase, 0, self.metric0[p]),
                0b10 => self.decide(codec, p, phase, 1, self.metric1[p]),
                0b11 => {
                    let q = self.clone_path(p);
                    self.decide(codec, p, phase, 0, self.metric0[p]);
                    self.decide(codec, q, phase, 1, self.metric1[p]);
                }
                _ => unreachable!(),
            }
        }
    }

    fn kill_path(&mut self, p: usize) {
        self.active[p] = false;
        self.inactive.push(p as u32);
        for layer in 0..self.m {
            let s = self.slot_of[layer][p] as usize;
            self.refcnt[layer][s] -= 1;
            if self.refcnt[layer][s] == 0 {
                self.free_slots[layer].push(s as u32);
            }
        }
    }

    fn clone_path(&mut self, p: usize) -> usize {
        let q = self.inactive.pop().expect("path pool exhausted") as usize;
        self.active[q] = true;
        self.metric[q] = self.metric[p];
        let (pb, qb) = (p * self.words_per_path, q * self.words_per_path);
        self.u_bits.copy_within(pb..pb + self.words_per_path, qb);
        self.acc_bits.copy_within(pb..pb + self.words_per_path, qb);
        for layer in 0..self.m {
            let s = self.slot_of[layer][p];
            self.slot_of[layer][q] = s;
            self.refcnt[layer][s as usize] += 1;
        }
        q
    }

    /// Propagates partial sums after an odd phase.
    fn update_partial_sums(&mut self, phase: usize) {
        let mut layer = self.m;
        let mut ph = phase;
        while ph & 1 == 1 && layer >= 2 {
            let plane = (ph >> 1) & 1;
            let sz = self.n >> layer;
            for i in 0..self.snapshot.len() {
                let p = self.snapshot[i] as usize;
                let parent_slot = self.claim_write(layer - 1, p);
                let child_slot = self.slot_of[layer - 1][p] as usize;
                let cbase = child_slot * sz;
                let pbase = parent_slot * (2 * sz);
                if plane == 0 {
                    let (head, tail) = self.c0.split_at_mut(layer - 1);
                    let parent = &mut head[layer - 2][pbase..pbase + 2 * sz];
                    let child0 = &tail[0][cbase..cbase + sz];
                    let child1 = &self.c1[layer - 1][cbase..cbase + sz];
                    for b in 0..sz {
                        parent[b] = child0[b] ^ child1[b];
                        parent[b + sz] = child1[b];
                    }
                } else {
                    let (head, tail) = self.c1.split_at_mut(layer - 1);
                    let parent = &mut head[layer - 2][pbase..pbase + 2 * sz];
                    let child1 = &tail[0][cbase..cbase + sz];
                    let child0 = &self.c0[layer - 1][cbase..cbase + sz];
                    for b in 0..sz {
                        parent[b] = child0[b] ^ child1[b];
                        parent[b + sz] = child1[b];
                    }
                }
            }
            ph >>= 1;
            layer -= 1;
        }
    }

    fn path_u(&self, p: usize) -> BitWord {
        let base = p * self.words_per_path;
        let mut u = BitWord::zeros(self.n);
        u.words_mut()
            .copy_from_slice(&self.u_bits[base..base + self.words_per_path]);
        u
    }
}

#[inline]
fn penalty(llr: f32, v: u8) -> f64 {
    let hard = (llr < 0.0) as u8;
    if v != hard {
        f64::from(llr.abs())
    } else {
        0.0
    }
}
