//! Order 13: the two isomorphism classes, completability of partial systems,
//! and the two-state chain estimate.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cameron::CameronChain;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stinson::{stinson_generate, StinsonParams};
use crate::sts::{Order, PartialSts, Point, Triple};

const V: usize = 13;
const ALL: u16 = (1 << V) - 1;
const NONE: u8 = u8::MAX;

/// Labelled share of S1 among all STS(13)s.
pub const S1_SHARE: f64 = 13.0 / 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IsoClass13 {
    /// 8 Pasch configurations, `|Aut| = 6`
    S1,
    /// 13 Pasch configurations, `|Aut| = 39`
    S2,
}

impl IsoClass13 {
    pub fn pasch_count(self) -> u64 {
        match self {
            IsoClass13::S1 => 8,
            IsoClass13::S2 => 13,
        }
    }

    pub fn aut_order(self) -> u64 {
        match self {
            IsoClass13::S1 => 6,
            IsoClass13::S2 => 39,
        }
    }
}

impl fmt::Display for IsoClass13 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IsoClass13::S1 => "S1",
            IsoClass13::S2 => "S2",
        })
    }
}

/// Pair table for a (partial) system on 13 points.
#[derive(Clone)]
struct Table13 {
    third: [[u8; V]; V],
    adj: [u16; V],
}

impl Table13 {
    fn empty() -> Self {
        Table13 { third: [[NONE; V]; V], adj: [0; V] }
    }

    fn from_sts(s: &PartialSts) -> Self {
        let mut t = Self::empty();
        for b in s.blocks() {
            let [x, y, z] = b.points();
            t.add(x as usize, y as usize, z as usize);
        }
        t
    }

    fn add(&mut self, a: usize, b: usize, c: usize) {
        for (p, q, r) in [(a, b, c), (a, c, b), (b, c, a)] {
            self.third[p][q] = r as u8;
            self.third[q][p] = r as u8;
        }
        self.adj[a] |= 1 << b | 1 << c;
        self.adj[b] |= 1 << a | 1 << c;
        self.adj[c] |= 1 << a | 1 << b;
    }

    fn remove(&mut self, a: usize, b: usize, c: usize) {
        for (p, q) in [(a, b), (a, c), (b, c)] {
            self.third[p][q] = NONE;
            self.third[q][p] = NONE;
        }
        self.adj[a] &= !(1 << b | 1 << c);
        self.adj[b] &= !(1 << a | 1 << c);
        self.adj[c] &= !(1 << a | 1 << b);
    }

    /// Pasch count of a complete system: every Pasch has six pairs of
    /// intersecting blocks, and a pair `{x,a,b}, {x,c,d}` lies in one Pasch
    /// per cross pairing whose two closing blocks meet.
    fn pasch(&self) -> u64 {
        let mut hits = 0u64;
        for x in 0..V {
            for a in 0..V {
                if a == x {
                    continue;
                }
                let b = self.third[x][a] as usize;
                if b < a {
                    continue;
                }
                for c in a + 1..V {
                    if c == b || c == x {
                        continue;
                    }
                    let d = self.third[x][c] as usize;
                    if d < c {
                        continue;
                    }
                    if self.third[a][c] == self.third[b][d] {
                        hits += 1;
                    }
                    if self.third[a][d] == self.third[b][c] {
                        hits += 1;
                    }
                }
            }
        }
        hits / 6
    }
}

/// Classifies a complete STS(13) by its Pasch count.
pub fn classify13(s: &PartialSts) -> Result<IsoClass13> {
    if s.v() != V {
        return Err(Error::WrongOrder { expected: V, got: s.v() });
    }
    if !s.is_complete() {
        return Err(Error::Incomplete);
    }
    match Table13::from_sts(s).pasch() {
        8 => Ok(IsoClass13::S1),
        13 => Ok(IsoClass13::S2),
        n => Err(Error::NotAnSts13(n)),
    }
}

/// `100 |(n1/(n1+n2) - 13/15) / (13/15)|`
pub fn percent_error(n1: u64, n2: u64) -> Result<f64> {
    if n1 + n2 == 0 {
        return Err(Error::EmptySample);
    }
    let share = n1 as f64 / (n1 + n2) as f64;
    Ok(100.0 * ((share - S1_SHARE) / S1_SHARE).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Completability {
    pub to_s1: bool,
    pub to_s2: bool,
}

impl Completability {
    pub fn is_completable(self) -> bool {
        self.to_s1 || self.to_s2
    }

    /// `1`, `12`, `2`, or `none`.
    pub fn label(self) -> &'static str {
        match (self.to_s1, self.to_s2) {
            (true, false) => "1",
            (true, true) => "12",
            (false, true) => "2",
            (false, false) => "none",
        }
    }
}

struct Completer {
    table: Table13,
    found: Completability,
    first: [Option<[[u8; 3]; 26]>; 2],
    blocks: Vec<[u8; 3]>,
}

impl Completer {
    fn done(&self) -> bool {
        self.found.to_s1 && self.found.to_s2
    }

    fn search(&mut self) {
        let Some(a) = (0..V).find(|&p| self.table.adj[p] | 1 << p != ALL) else {
            let class = match self.table.pasch() {
                8 => 0,
                13 => 1,
                n => unreachable!("STS(13) with {n} Pasch configurations"),
            };
            if class == 0 {
                self.found.to_s1 = true;
            } else {
                self.found.to_s2 = true;
            }
            if self.first[class].is_none() {
                let mut bs = [[0u8; 3]; 26];
                bs.copy_from_slice(&self.blocks);
                self.first[class] = Some(bs);
            }
            return;
        };
        let free_a = ALL & !self.table.adj[a] & !(1 << a);
        let b = free_a.trailing_zeros() as usize;
        let mut cands = free_a & !self.table.adj[b] & !(1 << b);
        while cands != 0 && !self.done() {
            let c = cands.trailing_zeros() as usize;
            cands &= cands - 1;
            self.table.add(a, b, c);
            self.blocks.push([a as u8, b as u8, c as u8]);
            self.search();
            self.blocks.pop();
            self.table.remove(a, b, c);
        }
    }
}

/// Exhaustive completion search: which classes the partial system extends to.
pub fn completability(partial: &PartialSts) -> Result<Completability> {
    if partial.v() != V {
        return Err(Error::WrongOrder { expected: V, got: partial.v() });
    }
    let mut c = Completer {
        table: Table13::from_sts(partial),
        found: Completability::default(),
        first: [None, None],
        blocks: partial.blocks().iter().map(|t| t.points().map(|p| p as u8)).collect(),
    };
    c.search();
    Ok(c.found)
}

fn fixtures() -> &'static [PartialSts; 2] {
    static FIXTURES: OnceLock<[PartialSts; 2]> = OnceLock::new();
    FIXTURES.get_or_init(|| {
        let order = Order::new(V).expect("13 is admissible");
        let mut c = Completer {
            table: Table13::empty(),
            found: Completability::default(),
            first: [None, None],
            blocks: Vec::new(),
        };
        c.search();
        let build = |bs: [[u8; 3]; 26]| {
            let blocks = bs.iter().map(|b| Triple::new(b[0] as Point, b[1] as Point, b[2] as Point).expect("distinct"));
            PartialSts::from_blocks(order, blocks).expect("search produces a valid system").canonical()
        };
        [build(c.first[0].expect("S1 exists")), build(c.first[1].expect("S2 exists"))]
    })
}

/// The first system of the given class met by exhaustive completion of the
/// empty partial STS(13).
pub fn fixture(class: IsoClass13) -> &'static PartialSts {
    &fixtures()[class as usize]
}

/// Number of labelled `k`-block partial STS(13)s, `k <= 3`.
pub fn labeled_partial_count(k: usize) -> Result<u64> {
    if !(1..=3).contains(&k) {
        return Err(Error::OutOfRange(format!("k = {k}, need 1 <= k <= 3")));
    }
    let mut triples: Vec<u16> = Vec::new();
    for a in 0..V {
        for b in a + 1..V {
            for c in b + 1..V {
                triples.push(1 << a | 1 << b | 1 << c);
            }
        }
    }
    // two triples are compatible when they share at most one point
    let ok = |x: u16, y: u16| (x & y).count_ones() <= 1;
    let n = triples.len();
    let mut total = 0u64;
    match k {
        1 => total = n as u64,
        2 => {
            for i in 0..n {
                total += (i + 1..n).filter(|&j| ok(triples[i], triples[j])).count() as u64;
            }
        }
        _ => {
            for i in 0..n {
                for j in i + 1..n {
                    if !ok(triples[i], triples[j]) {
                        continue;
                    }
                    total += (j + 1..n).filter(|&l| ok(triples[i], triples[l]) && ok(triples[j], triples[l])).count() as u64;
                }
            }
        }
    }
    Ok(total)
}

/// Two-state chain fitted to a class sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainEstimate {
    /// S1 -> S2 transition frequency
    pub p_hat: f64,
    /// S2 -> S1 transition frequency
    pub q_hat: f64,
    pub stationary: (f64, f64),
    /// `|1 - p - q|`
    pub bound_rate: f64,
    pub transitions: [[u64; 2]; 2],
}

impl ChainEstimate {
    /// Bound on `|mu_t(i) - pi(i)|` after `t` steps.
    pub fn bound(&self, t: u32) -> f64 {
        self.bound_rate.powi(t as i32)
    }
}

pub fn estimate_transitions(classes: &[IsoClass13]) -> Result<ChainEstimate> {
    let mut n = [[0u64; 2]; 2];
    for w in classes.windows(2) {
        n[w[0] as usize][w[1] as usize] += 1;
    }
    let from1 = n[0][0] + n[0][1];
    let from2 = n[1][0] + n[1][1];
    if from1 == 0 {
        return Err(Error::DegenerateChain("S1"));
    }
    if from2 == 0 {
        return Err(Error::DegenerateChain("S2"));
    }
    let p = n[0][1] as f64 / from1 as f64;
    let q = n[1][0] as f64 / from2 as f64;
    let stationary = if p + q > 0.0 { (q / (p + q), p / (p + q)) } else { (0.5, 0.5) };
    Ok(ChainEstimate { p_hat: p, q_hat: q, stationary, bound_rate: (1.0 - p - q).abs(), transitions: n })
}

/// Classes of `states` consecutive proper states of a Cameron chain started
/// from `start`, after `burn_in` proper states.
pub fn cameron_class_sequence<R: rand::Rng + ?Sized>(
    start: &PartialSts,
    burn_in: u64,
    states: usize,
    rng: &mut R,
) -> Result<Vec<IsoClass13>> {
    let mut chain = CameronChain::new(start)?;
    for _ in 0..burn_in {
        chain.advance(rng);
    }
    let mut out = Vec::with_capacity(states);
    for _ in 0..states {
        chain.advance(rng);
        out.push(classify13(&chain.current())?);
    }
    Ok(out)
}

/// Completability distribution of Stinson snapshots at one block count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SnapshotTally {
    pub k: usize,
    pub only_s1: u64,
    pub both: u64,
    pub only_s2: u64,
    pub not_completable: u64,
    /// runs that never passed through `k` blocks
    pub missing: u64,
}

impl SnapshotTally {
    /// `(q1, q12, q2)` over completable snapshots.
    pub fn shares(&self) -> (f64, f64, f64) {
        let n = (self.only_s1 + self.both + self.only_s2).max(1) as f64;
        (self.only_s1 as f64 / n, self.both as f64 / n, self.only_s2 as f64 / n)
    }
}

/// Result of a snapshot study.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SnapshotStudy {
    pub tallies: Vec<SnapshotTally>,
    /// final classes of the completed runs
    pub finals: [u64; 2],
    /// generations restarted after hitting the iteration cap
    pub restarts: u64,
}

/// Runs `runs` Stinson generations at `v = 13` and tallies completability of
/// the partial systems recorded at each requested block count. Run `i` uses
/// substream `(seed, i)`; a run that hits the cap restarts from scratch on the
/// same stream.
pub fn snapshot_study(params: &StinsonParams, runs: u64, seed: u64) -> Result<SnapshotStudy> {
    let order = Order::new(V)?;
    let ks = params.snapshot_at.clone();
    let per_run: Vec<Result<(Vec<Option<Completability>>, IsoClass13, u64)>> = (0..runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let mut restarts = 0;
            let out = loop {
                let out = stinson_generate(order, params, &mut rng);
                if out.is_complete() {
                    break out;
                }
                restarts += 1;
            };
            let comps = ks
                .iter()
                .map(|k| out.snapshots.get(k).map(completability).transpose())
                .collect::<Result<Vec<_>>>()?;
            Ok((comps, classify13(&out.system)?, restarts))
        })
        .collect();
    let mut study = SnapshotStudy {
        tallies: ks.iter().map(|&k| SnapshotTally { k, ..Default::default() }).collect(),
        ..Default::default()
    };
    for r in per_run {
        let (comps, class, restarts) = r?;
        study.finals[class as usize] += 1;
        study.restarts += restarts;
        for (t, c) in study.tallies.iter_mut().zip(comps) {
            match c.map(|c| (c.to_s1, c.to_s2)) {
                None => t.missing += 1,
                Some((true, false)) => t.only_s1 += 1,
                Some((true, true)) => t.both += 1,
                Some((false, true)) => t.only_s2 += 1,
                Some((false, false)) => t.not_completable += 1,
            }
        }
    }
    Ok(study)
}
