//! Hill-climbing generation with weighted point selection and optional
//! switch-augmented ("extended") iterations.
//!
//! One iteration picks a deficient point `x`, a point `y` with `{x, y}`
//! uncovered and a point `z != y` with `{x, z}` uncovered, evicts the block
//! through `{y, z}` if there is one, and adds `{x, y, z}`. The generator keeps
//! the live-point set and every point's uncovered-partner list in swap-remove
//! arrays so each choice is O(1) under uniform weights.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sts::{Order, PartialSts, Point, Triple};
use crate::switching::{apply_switch, component_containing};

/// Weight function applied to deficiencies: `sign j`, `j`, or `C(j, 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weight {
    Sign,
    Linear,
    Binomial,
}

impl Weight {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Weight::Sign),
            1 => Ok(Weight::Linear),
            2 => Ok(Weight::Binomial),
            c => Err(Error::OutOfRange(format!("weight code {c}"))),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Weight::Sign => 0,
            Weight::Linear => 1,
            Weight::Binomial => 2,
        }
    }

    #[inline]
    pub fn apply(self, j: usize) -> u64 {
        let j = j as u64;
        match self {
            Weight::Sign => (j > 0) as u64,
            Weight::Linear => j,
            Weight::Binomial => j * j.saturating_sub(1) / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightScheme {
    pub x: Weight,
    pub y: Weight,
    pub z: Weight,
}

impl WeightScheme {
    pub const ORIGINAL: WeightScheme = WeightScheme { x: Weight::Sign, y: Weight::Sign, z: Weight::Sign };

    pub fn from_codes(wx: u8, wy: u8, wz: u8) -> Result<Self> {
        Ok(WeightScheme { x: Weight::from_code(wx)?, y: Weight::from_code(wy)?, z: Weight::from_code(wz)? })
    }
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::ORIGINAL
    }
}

/// Constraint tying the switch pair to the latest `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    /// `I = 0`
    Free,
    /// `I = 1`: `a = y`
    YIsA,
    /// `I = 2`: `d = y`
    YIsD,
}

/// Extra switch after every iteration, with `(a, b, d)` drawn uniformly
/// subject to `|{x,y,z} ∩ {a,b,d}| >= overlap` and the anchor constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExtensionScheme {
    pub enabled: bool,
    pub overlap: u8,
    pub anchor: Anchor,
}

impl ExtensionScheme {
    pub const DISABLED: ExtensionScheme = ExtensionScheme { enabled: false, overlap: 0, anchor: Anchor::Free };

    pub fn new(overlap: u8, anchor_code: u8) -> Result<Self> {
        if overlap > 2 {
            return Err(Error::OutOfRange(format!("overlap {overlap}")));
        }
        let anchor = match anchor_code {
            0 => Anchor::Free,
            1 => Anchor::YIsA,
            2 => Anchor::YIsD,
            c => return Err(Error::OutOfRange(format!("anchor code {c}"))),
        };
        // with an anchor the overlap is at least 1 already
        let overlap = if anchor != Anchor::Free && overlap == 1 { 0 } else { overlap };
        Ok(ExtensionScheme { enabled: true, overlap, anchor })
    }
}

impl Default for ExtensionScheme {
    fn default() -> Self {
        ExtensionScheme::DISABLED
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SnapshotPolicy {
    /// state at the end of the first iteration reaching the block count
    #[default]
    First,
    /// state at the end of the last iteration with the block count
    Last,
}

#[derive(Debug, Clone, Default)]
pub struct StinsonParams {
    pub scheme: WeightScheme,
    pub ext: ExtensionScheme,
    /// Iteration cap; `None` means `1000 v^2`.
    pub cap: Option<u64>,
    pub snapshot_at: Vec<usize>,
    pub snapshot_policy: SnapshotPolicy,
}

impl StinsonParams {
    pub fn cap_for(&self, order: Order) -> u64 {
        self.cap.unwrap_or(1000 * (order.v() as u64).pow(2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Complete,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct GenerationOutcome {
    pub status: Status,
    /// Final state; complete on success, the stuck partial system on timeout.
    pub system: PartialSts,
    pub iterations: u64,
    pub removals: u64,
    pub switches: u64,
    pub snapshots: BTreeMap<usize, PartialSts>,
}

impl GenerationOutcome {
    pub fn is_complete(&self) -> bool {
        self.status == Status::Complete
    }
}

/// Draws an index with probability `weight(values[i]) / sum`.
pub fn weighted_pick<R: Rng + ?Sized>(values: &[usize], weight: Weight, rng: &mut R) -> Result<usize> {
    pick_by(values.len(), |i| weight.apply(values[i]), rng).ok_or(Error::AllZeroWeights)
}

#[inline]
fn pick_by<R: Rng + ?Sized>(n: usize, w: impl Fn(usize) -> u64, rng: &mut R) -> Option<usize> {
    let total: u64 = (0..n).map(&w).sum();
    if total == 0 {
        return None;
    }
    let mut r = rng.random_range(0..total);
    for i in 0..n {
        let wi = w(i);
        if r < wi {
            return Some(i);
        }
        r -= wi;
    }
    unreachable!("weights sum to total")
}

const NO_POS: u16 = u16::MAX;

/// Live points and uncovered-partner lists kept in sync with a system.
struct Tracker {
    v: usize,
    live: Vec<Point>,
    live_pos: Vec<u16>,
    partners: Vec<Point>,
    partner_len: Vec<u16>,
    partner_pos: Vec<u16>,
}

impl Tracker {
    fn new(s: &PartialSts) -> Self {
        let v = s.v();
        let mut t = Tracker {
            v,
            live: Vec::with_capacity(v),
            live_pos: vec![NO_POS; v],
            partners: vec![0; v * v],
            partner_len: vec![0; v],
            partner_pos: vec![NO_POS; v * v],
        };
        for p in 0..v as Point {
            if s.deficiency(p) > 0 {
                t.live_pos[p as usize] = t.live.len() as u16;
                t.live.push(p);
            }
            for q in 0..v as Point {
                if q != p && !s.is_covered(p, q) {
                    t.push_partner(p, q);
                }
            }
        }
        t
    }

    #[inline]
    fn partners_of(&self, p: Point) -> &[Point] {
        let base = p as usize * self.v;
        &self.partners[base..base + self.partner_len[p as usize] as usize]
    }

    #[inline]
    fn push_partner(&mut self, p: Point, q: Point) {
        let base = p as usize * self.v;
        let len = self.partner_len[p as usize] as usize;
        self.partners[base + len] = q;
        self.partner_pos[base + q as usize] = len as u16;
        self.partner_len[p as usize] += 1;
    }

    #[inline]
    fn drop_partner(&mut self, p: Point, q: Point) {
        let base = p as usize * self.v;
        let pos = self.partner_pos[base + q as usize] as usize;
        let last = self.partner_len[p as usize] as usize - 1;
        let moved = self.partners[base + last];
        self.partners[base + pos] = moved;
        self.partner_pos[base + moved as usize] = pos as u16;
        self.partner_pos[base + q as usize] = NO_POS;
        self.partner_len[p as usize] -= 1;
    }

    fn refresh_live(&mut self, s: &PartialSts, p: Point) {
        let alive = s.deficiency(p) > 0;
        let pos = self.live_pos[p as usize];
        if alive && pos == NO_POS {
            self.live_pos[p as usize] = self.live.len() as u16;
            self.live.push(p);
        } else if !alive && pos != NO_POS {
            let moved = *self.live.last().unwrap();
            self.live.swap_remove(pos as usize);
            if moved != p {
                self.live_pos[moved as usize] = pos;
            }
            self.live_pos[p as usize] = NO_POS;
        }
    }

    fn added(&mut self, s: &PartialSts, t: Triple) {
        for (p, q) in t.pairs() {
            self.drop_partner(p, q);
            self.drop_partner(q, p);
        }
        for p in t.points() {
            self.refresh_live(s, p);
        }
    }

    fn removed(&mut self, s: &PartialSts, t: Triple) {
        for (p, q) in t.pairs() {
            self.push_partner(p, q);
            self.push_partner(q, p);
        }
        for p in t.points() {
            self.refresh_live(s, p);
        }
    }
}

/// Outcome of one loop body, used by tests and by snapshot bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IterationReport {
    pub added: Triple,
    pub removed: Option<Triple>,
    pub switched: bool,
}

/// A running hill-climbing search.
pub struct Climber {
    sts: PartialSts,
    tracker: Tracker,
    scheme: WeightScheme,
    ext: ExtensionScheme,
}

impl Climber {
    pub fn new(sts: PartialSts, scheme: WeightScheme, ext: ExtensionScheme) -> Self {
        let tracker = Tracker::new(&sts);
        Climber { sts, tracker, scheme, ext }
    }

    pub fn system(&self) -> &PartialSts {
        &self.sts
    }

    pub fn into_system(self) -> PartialSts {
        self.sts
    }

    fn pick_uniform<R: Rng + ?Sized>(items: &[Point], rng: &mut R) -> Point {
        items[rng.random_range(0..items.len())]
    }

    /// Executes one iteration of the loop body. The system must be incomplete.
    pub fn iterate<R: Rng + ?Sized>(&mut self, rng: &mut R) -> IterationReport {
        debug_assert!(!self.sts.is_complete());
        let s = &self.sts;
        let tr = &self.tracker;

        let live = &tr.live;
        let x = match self.scheme.x {
            Weight::Sign => Self::pick_uniform(live, rng),
            w => match pick_by(live.len(), |i| w.apply(s.deficiency(live[i])), rng) {
                Some(i) => live[i],
                None => Self::pick_uniform(live, rng),
            },
        };

        let cand = tr.partners_of(x);
        debug_assert!(cand.len() >= 2);
        let yi = match self.scheme.y {
            Weight::Sign => rng.random_range(0..cand.len()),
            w => pick_by(cand.len(), |i| w.apply(s.deficiency(cand[i])), rng)
                .unwrap_or_else(|| rng.random_range(0..cand.len())),
        };
        let y = cand[yi];
        let zi = match self.scheme.z {
            Weight::Sign => {
                let i = rng.random_range(0..cand.len() - 1);
                if i == yi {
                    cand.len() - 1
                } else {
                    i
                }
            }
            w => pick_by(cand.len(), |i| if i == yi { 0 } else { w.apply(s.deficiency(cand[i])) }, rng)
                .unwrap_or_else(|| {
                    let i = rng.random_range(0..cand.len() - 1);
                    if i == yi {
                        cand.len() - 1
                    } else {
                        i
                    }
                }),
        };
        let z = cand[zi];

        let removed = match s.third_point(y, z) {
            Some(w) => {
                let b = Triple::from_distinct(y, z, w);
                self.sts.remove_block(b).expect("block present");
                self.tracker.removed(&self.sts, b);
                Some(b)
            }
            None => None,
        };
        let added = Triple::from_distinct(x, y, z);
        self.sts.add_block(added).expect("pairs uncovered");
        self.tracker.added(&self.sts, added);

        let switched = self.ext.enabled && self.extra_switch(x, y, z, rng);
        IterationReport { added, removed, switched }
    }

    fn extra_switch<R: Rng + ?Sized>(&mut self, x: Point, y: Point, z: Point, rng: &mut R) -> bool {
        let v = self.sts.v() as Point;
        let tries = 100 * v as usize;
        let distinct_from = |rng: &mut R, avoid: &[Point]| loop {
            let p = rng.random_range(0..v);
            if !avoid.contains(&p) {
                break p;
            }
        };
        for _ in 0..tries {
            let (a, b, d) = match self.ext.anchor {
                Anchor::Free => {
                    let a = rng.random_range(0..v);
                    let b = distinct_from(rng, &[a]);
                    let d = distinct_from(rng, &[a, b]);
                    (a, b, d)
                }
                Anchor::YIsA => {
                    let b = distinct_from(rng, &[y]);
                    let d = distinct_from(rng, &[y, b]);
                    (y, b, d)
                }
                Anchor::YIsD => {
                    let a = distinct_from(rng, &[y]);
                    let b = distinct_from(rng, &[y, a]);
                    (a, b, y)
                }
            };
            if self.sts.third_point(a, b) == Some(d) {
                continue;
            }
            let overlap = [a, b, d].iter().filter(|p| [x, y, z].contains(p)).count();
            if overlap < self.ext.overlap as usize {
                continue;
            }
            let comp = match component_containing(&self.sts, a, b, d).expect("d is a vertex") {
                Some(c) => c,
                None => return false,
            };
            let (old, new) = apply_switch(&mut self.sts, &comp).expect("fresh component");
            for t in old {
                self.tracker.removed(&self.sts, t);
            }
            for t in new {
                self.tracker.added(&self.sts, t);
            }
            return true;
        }
        false
    }
}

pub fn stinson_generate<R: Rng + ?Sized>(order: Order, params: &StinsonParams, rng: &mut R) -> GenerationOutcome {
    stinson_resume(PartialSts::new(order), params, rng)
}

/// Continues the hill-climbing loop from an arbitrary valid partial system.
pub fn stinson_resume<R: Rng + ?Sized>(partial: PartialSts, params: &StinsonParams, rng: &mut R) -> GenerationOutcome {
    let cap = params.cap_for(partial.order());
    let mut climber = Climber::new(partial, params.scheme, params.ext);
    let mut snapshots = BTreeMap::new();
    let record = |s: &PartialSts, snaps: &mut BTreeMap<usize, PartialSts>| {
        let k = s.num_blocks();
        if params.snapshot_at.contains(&k) {
            match params.snapshot_policy {
                SnapshotPolicy::First => {
                    snaps.entry(k).or_insert_with(|| s.clone());
                }
                SnapshotPolicy::Last => {
                    snaps.insert(k, s.clone());
                }
            }
        }
    };
    let track = !params.snapshot_at.is_empty();
    if track {
        record(climber.system(), &mut snapshots);
    }
    let (mut iterations, mut removals, mut switches) = (0u64, 0u64, 0u64);
    while !climber.system().is_complete() {
        if iterations >= cap {
            return GenerationOutcome {
                status: Status::Timeout,
                system: climber.into_system(),
                iterations,
                removals,
                switches,
                snapshots,
            };
        }
        let rep = climber.iterate(rng);
        iterations += 1;
        removals += rep.removed.is_some() as u64;
        switches += rep.switched as u64;
        if track {
            record(climber.system(), &mut snapshots);
        }
    }
    GenerationOutcome { status: Status::Complete, system: climber.into_system(), iterations, removals, switches, snapshots }
}

/// The transversal design TD(3, v/3) on groups `[0,m)`, `[m,2m)`, `[2m,3m)`.
pub fn td_partial(order: Order) -> Result<PartialSts> {
    let v = order.v();
    if v % 6 != 3 {
        return Err(Error::WrongOrderClass(v));
    }
    let m = v / 3;
    let mut s = PartialSts::new(order);
    for i in 0..m {
        for j in 0..m {
            let t = Triple::from_distinct(i as Point, (m + j) as Point, (2 * m + (i + j) % m) as Point);
            s.add_block(t)?;
        }
    }
    Ok(s)
}
