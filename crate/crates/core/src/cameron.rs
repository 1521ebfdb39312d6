//! Markov chain over proper and improper triple systems.
//!
//! A state is a function `f` from 3-subsets to `{-1, 0, 1}` with every pair
//! summing to 1 and at most one triple at `-1`. It is stored as a pair table
//! holding up to two third points of positive triples per pair; only the three
//! pairs of the negative triple ever use the second slot.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sts::{Order, PartialSts, Point, Triple};

const EMPTY: Point = Point::MAX;

#[derive(Debug, Clone)]
pub struct FlexSts {
    order: Order,
    cover: Vec<[Point; 2]>,
    positive: usize,
    negative: Option<Triple>,
}

/// What a single step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInfo {
    /// Rejected candidate draws before acceptance (proper steps only).
    pub rejections: u32,
    pub proper_after: bool,
}

impl FlexSts {
    pub fn from_sts(s: &PartialSts) -> Result<Self> {
        if !s.is_complete() {
            return Err(Error::Incomplete);
        }
        let v = s.v();
        let mut f = FlexSts { order: s.order(), cover: vec![[EMPTY; 2]; v * v], positive: 0, negative: None };
        for &t in s.blocks() {
            f.add_positive(t);
        }
        Ok(f)
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn is_proper(&self) -> bool {
        self.negative.is_none()
    }

    pub fn negative(&self) -> Option<Triple> {
        self.negative
    }

    pub fn num_positive(&self) -> usize {
        self.positive
    }

    #[inline]
    fn slot(&self, p: Point, q: Point) -> usize {
        p as usize * self.order.v() + q as usize
    }

    /// Third points of the positive triples through `{p, q}`.
    pub fn covers(&self, p: Point, q: Point) -> impl Iterator<Item = Point> + '_ {
        self.cover[self.slot(p, q)].into_iter().filter(|&r| r != EMPTY)
    }

    #[inline]
    fn first_third(&self, p: Point, q: Point) -> Point {
        self.cover[self.slot(p, q)][0]
    }

    pub fn value(&self, t: Triple) -> i8 {
        if self.negative == Some(t) {
            return -1;
        }
        let [a, b, c] = t.points();
        self.cover[self.slot(a, b)].contains(&c) as i8
    }

    fn is_positive(&self, a: Point, b: Point, c: Point) -> bool {
        self.cover[self.slot(a, b)].contains(&c)
    }

    fn add_positive(&mut self, t: Triple) {
        for (p, q) in t.pairs() {
            let r = t.third(p, q);
            for i in [self.slot(p, q), self.slot(q, p)] {
                let cell = &mut self.cover[i];
                if cell[0] == EMPTY {
                    cell[0] = r;
                } else {
                    debug_assert_eq!(cell[1], EMPTY, "pair covered three times");
                    cell[1] = r;
                }
            }
        }
        self.positive += 1;
    }

    fn remove_positive(&mut self, t: Triple) {
        for (p, q) in t.pairs() {
            let r = t.third(p, q);
            for i in [self.slot(p, q), self.slot(q, p)] {
                let cell = &mut self.cover[i];
                if cell[0] == r {
                    cell[0] = cell[1];
                    cell[1] = EMPTY;
                } else {
                    debug_assert_eq!(cell[1], r, "removing a non-positive triple");
                    cell[1] = EMPTY;
                }
            }
        }
        self.positive -= 1;
    }

    /// Shared tail of both step kinds: clears the three old blocks, adds the
    /// three crossing triples, and decrements `f({x', y', z'})`.
    fn rotate(&mut self, [x, y, z]: [Point; 3], [xp, yp, zp]: [Point; 3]) -> bool {
        self.remove_positive(Triple::from_distinct(xp, y, z));
        self.remove_positive(Triple::from_distinct(x, yp, z));
        self.remove_positive(Triple::from_distinct(x, y, zp));
        self.add_positive(Triple::from_distinct(x, yp, zp));
        self.add_positive(Triple::from_distinct(xp, y, zp));
        self.add_positive(Triple::from_distinct(xp, yp, z));
        let far = Triple::from_distinct(xp, yp, zp);
        if self.is_positive(xp, yp, zp) {
            self.remove_positive(far);
            self.negative = None;
            true
        } else {
            self.negative = Some(far);
            false
        }
    }

    /// Proper perturbation: a uniform triple with `f = 0` (found by rejection
    /// over uniform 3-subsets) becomes a block.
    pub fn proper_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepInfo {
        debug_assert!(self.is_proper());
        let v = self.order.v() as Point;
        let mut rejections = 0u32;
        let (x, y, z) = loop {
            let x = rng.random_range(0..v);
            let mut y = rng.random_range(0..v - 1);
            if y >= x {
                y += 1;
            }
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            let mut z = rng.random_range(0..v - 2);
            if z >= lo {
                z += 1;
            }
            if z >= hi {
                z += 1;
            }
            if self.first_third(x, y) == z {
                rejections += 1;
                continue;
            }
            break (x, y, z);
        };
        let xp = self.first_third(y, z);
        let yp = self.first_third(x, z);
        let zp = self.first_third(x, y);
        self.add_positive(Triple::from_distinct(x, y, z));
        let proper_after = self.rotate([x, y, z], [xp, yp, zp]);
        self.debug_check([x, y, z], [xp, yp, zp]);
        StepInfo { rejections, proper_after }
    }

    /// Improper perturbation: one of the 8 ways to pick positive triples
    /// through the three pairs of the negative triple.
    pub fn improper_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepInfo {
        let neg = self.negative.expect("improper state");
        let [x, y, z] = neg.points();
        let pick = rng.random_range(0..8u8);
        let xp = self.cover[self.slot(y, z)][(pick & 1) as usize];
        let yp = self.cover[self.slot(x, z)][(pick >> 1 & 1) as usize];
        let zp = self.cover[self.slot(x, y)][(pick >> 2 & 1) as usize];
        debug_assert!(xp != EMPTY && yp != EMPTY && zp != EMPTY);
        self.negative = None;
        let proper_after = self.rotate([x, y, z], [xp, yp, zp]);
        self.debug_check([x, y, z], [xp, yp, zp]);
        StepInfo { rejections: 0, proper_after }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> StepInfo {
        if self.is_proper() {
            self.proper_step(rng)
        } else {
            self.improper_step(rng)
        }
    }

    /// Eight candidate rotations of an improper state, as `(x', y', z')`.
    pub fn improper_candidates(&self) -> Vec<[Point; 3]> {
        let [x, y, z] = self.negative.expect("improper state").points();
        let mut out = Vec::with_capacity(8);
        for pick in 0..8usize {
            out.push([
                self.cover[self.slot(y, z)][pick & 1],
                self.cover[self.slot(x, z)][pick >> 1 & 1],
                self.cover[self.slot(x, y)][pick >> 2 & 1],
            ]);
        }
        out
    }

    /// Every 3-subset with `f = 0`; the candidate pool of a proper step.
    pub fn proper_candidates(&self) -> Vec<Triple> {
        let v = self.order.v() as Point;
        let mut out = Vec::new();
        for a in 0..v {
            for b in a + 1..v {
                for c in b + 1..v {
                    let t = Triple::from_distinct(a, b, c);
                    if self.value(t) == 0 {
                        out.push(t);
                    }
                }
            }
        }
        out
    }

    /// `sum_z f({p, q, z})` for one pair.
    pub fn pair_sum(&self, p: Point, q: Point) -> i32 {
        let pos = self.covers(p, q).count() as i32;
        let neg = self.negative.map_or(false, |n| n.contains(p) && n.contains(q)) as i32;
        pos - neg
    }

    /// Full audit: slot consistency and the pair-sum invariant on every pair.
    pub fn audit(&self) -> std::result::Result<(), String> {
        let v = self.order.v() as Point;
        let mut seen = 0usize;
        for p in 0..v {
            for q in 0..v {
                if p == q {
                    continue;
                }
                if self.pair_sum(p, q) != 1 {
                    return Err(format!("pair {{{p}, {q}}} sums to {}", self.pair_sum(p, q)));
                }
                for r in self.covers(p, q) {
                    if r == p || r == q || !self.covers(p, r).any(|s| s == q) || !self.covers(q, r).any(|s| s == p) {
                        return Err(format!("inconsistent cover {p} {q} {r}"));
                    }
                    if p < q && q < r {
                        seen += 1;
                    }
                }
            }
        }
        if seen != self.positive {
            return Err(format!("{seen} positive triples found, {} recorded", self.positive));
        }
        if let Some(n) = self.negative {
            let [a, b, c] = n.points();
            if self.is_positive(a, b, c) {
                return Err("negative triple is also positive".into());
            }
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self, _xyz: [Point; 3], _primed: [Point; 3]) {
        #[cfg(debug_assertions)]
        {
            let [x, y, z] = _xyz;
            let [xp, yp, zp] = _primed;
            for (p, q) in [(x, y), (x, z), (y, z), (xp, y), (xp, z), (x, yp), (yp, z), (x, zp), (y, zp), (xp, yp), (xp, zp), (yp, zp)] {
                debug_assert_eq!(self.pair_sum(p, q), 1, "pair sum broken at {{{p}, {q}}}");
            }
        }
    }

    /// The positive triples of a proper state as a complete system.
    pub fn to_sts(&self) -> Result<PartialSts> {
        if !self.is_proper() {
            return Err(Error::Incomplete);
        }
        let v = self.order.v() as Point;
        let mut s = PartialSts::new(self.order);
        for p in 0..v {
            for q in p + 1..v {
                let r = self.first_third(p, q);
                if r > q {
                    s.add_block(Triple::from_distinct(p, q, r))?;
                }
            }
        }
        Ok(s)
    }
}

pub fn flex_from_sts(s: &PartialSts) -> Result<FlexSts> {
    FlexSts::from_sts(s)
}

#[derive(Debug, Clone, Copy)]
pub struct WalkParams {
    pub num_outputs: usize,
    /// Emit every `thinning`-th proper state; `None` means `v`.
    pub thinning: Option<usize>,
    /// Proper states skipped before counting starts; `None` means `v^2`.
    pub burn_in: Option<usize>,
}

impl WalkParams {
    pub fn thinning_for(&self, order: Order) -> usize {
        self.thinning.unwrap_or(order.v()).max(1)
    }

    pub fn burn_in_for(&self, order: Order) -> usize {
        self.burn_in.unwrap_or(order.v() * order.v())
    }
}

/// A walk positioned at a proper state.
#[derive(Debug, Clone)]
pub struct CameronChain {
    state: FlexSts,
    pub steps: u64,
    pub proper_states: u64,
    pub proper_steps: u64,
    pub rejections: u64,
}

impl CameronChain {
    pub fn new(start: &PartialSts) -> Result<Self> {
        Ok(CameronChain { state: FlexSts::from_sts(start)?, steps: 0, proper_states: 0, proper_steps: 0, rejections: 0 })
    }

    pub fn state(&self) -> &FlexSts {
        &self.state
    }

    /// Steps until the next proper state; returns the number of steps taken.
    pub fn advance<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let mut taken = 0;
        loop {
            let proper_before = self.state.is_proper();
            let info = self.state.step(rng);
            if proper_before {
                self.proper_steps += 1;
                self.rejections += info.rejections as u64;
            }
            taken += 1;
            if info.proper_after {
                break;
            }
        }
        self.steps += taken;
        self.proper_states += 1;
        taken
    }

    pub fn current(&self) -> PartialSts {
        self.state.to_sts().expect("chain rests on proper states")
    }

    pub fn mean_rejections(&self) -> f64 {
        self.rejections as f64 / self.proper_steps.max(1) as f64
    }
}

/// Runs the chain from `start`, skipping `burn_in` proper states, then
/// emitting every `thinning`-th proper state. Each output is an independent
/// copy.
pub fn cameron_walk<R: Rng + ?Sized>(start: &PartialSts, params: &WalkParams, rng: &mut R) -> Result<Vec<PartialSts>> {
    let mut out = Vec::with_capacity(params.num_outputs);
    cameron_walk_with(start, params, rng, |s, _| out.push(s))?;
    Ok(out)
}

/// Streaming form of [`cameron_walk`]; the callback also receives the number
/// of chain steps since the previous output.
pub fn cameron_walk_with<R, F>(start: &PartialSts, params: &WalkParams, rng: &mut R, mut emit: F) -> Result<CameronChain>
where
    R: Rng + ?Sized,
    F: FnMut(PartialSts, u64),
{
    let order = start.order();
    let thinning = params.thinning_for(order);
    let burn_in = params.burn_in_for(order);
    let mut chain = CameronChain::new(start)?;
    for _ in 0..burn_in {
        chain.advance(rng);
    }
    for _ in 0..params.num_outputs {
        let mut steps = 0;
        for _ in 0..thinning {
            steps += chain.advance(rng);
        }
        emit(chain.current(), steps);
    }
    Ok(chain)
}
