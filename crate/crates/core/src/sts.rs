//! Orders, triples and the incremental partial triple system.
//!
//! [`PartialSts`] keeps a dense `v x v` table from unordered point pairs to
//! block handles so that adding, removing and looking up blocks are all
//! constant-time operations. Handles are indices into the block vector;
//! removal swaps the last block into the hole and patches its three table
//! entries.

use std::fmt;

use crate::error::{Error, Result};

/// Points are dense 0-based indices.
pub type Point = u16;

const NONE: u32 = u32::MAX;

/// An admissible order `v` of a Steiner triple system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order(usize);

impl Order {
    pub fn new(v: usize) -> Result<Self> {
        if v < 3 || !matches!(v % 6, 1 | 3) || v > Point::MAX as usize {
            return Err(Error::InadmissibleOrder(v));
        }
        Ok(Order(v))
    }

    #[inline]
    pub fn v(self) -> usize {
        self.0
    }

    /// Number of blocks of a complete system, `v(v-1)/6`.
    pub fn blocks(self) -> usize {
        self.0 * (self.0 - 1) / 6
    }

    /// Number of blocks through each point, `(v-1)/2`.
    pub fn replication(self) -> usize {
        (self.0 - 1) / 2
    }

    pub fn pairs(self) -> usize {
        self.0 * (self.0 - 1) / 2
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Three distinct points in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple([Point; 3]);

impl Triple {
    pub fn new(a: Point, b: Point, c: Point) -> Result<Self> {
        let mut p = [a, b, c];
        p.sort_unstable();
        if p[0] == p[1] || p[1] == p[2] {
            return Err(Error::RepeatedPoint(p[1] as usize));
        }
        Ok(Triple(p))
    }

    /// Builds a triple from points the caller knows to be distinct.
    #[inline]
    pub(crate) fn from_distinct(a: Point, b: Point, c: Point) -> Self {
        debug_assert!(a != b && b != c && a != c);
        let mut p = [a, b, c];
        if p[0] > p[1] {
            p.swap(0, 1);
        }
        if p[1] > p[2] {
            p.swap(1, 2);
        }
        if p[0] > p[1] {
            p.swap(0, 1);
        }
        Triple(p)
    }

    #[inline]
    pub fn points(&self) -> [Point; 3] {
        self.0
    }

    pub fn contains(&self, p: Point) -> bool {
        self.0.contains(&p)
    }

    #[inline]
    pub fn pairs(&self) -> [(Point, Point); 3] {
        let [a, b, c] = self.0;
        [(a, b), (a, c), (b, c)]
    }

    /// The point of the triple other than `p` and `q`.
    #[inline]
    pub fn third(&self, p: Point, q: Point) -> Point {
        let [a, b, c] = self.0;
        a ^ b ^ c ^ p ^ q
    }

    fn check_range(&self, v: usize) -> Result<()> {
        match self.0[2] as usize {
            hi if hi >= v => Err(Error::PointOutOfRange { point: hi, order: v }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.0[0], self.0[1], self.0[2])
    }
}

/// First invariant violation found by [`PartialSts::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PointOutOfRange(Triple),
    PairCoveredTwice(Point, Point),
    IndexMismatch { p: Point, q: Point },
    DegreeMismatch { point: Point, stored: usize, actual: usize },
    DegreeTooLarge(Point),
    TooManyBlocks(usize),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PointOutOfRange(t) => write!(f, "block {t} has a point out of range"),
            Violation::PairCoveredTwice(p, q) => write!(f, "pair {{{p}, {q}}} covered twice"),
            Violation::IndexMismatch { p, q } => {
                write!(f, "pair index entry for {{{p}, {q}}} disagrees with blocks")
            }
            Violation::DegreeMismatch { point, stored, actual } => {
                write!(f, "degree of {point} stored as {stored}, actually {actual}")
            }
            Violation::DegreeTooLarge(p) => write!(f, "point {p} lies in too many blocks"),
            Violation::TooManyBlocks(n) => write!(f, "{n} blocks exceed v(v-1)/6"),
        }
    }
}

/// A partial Steiner triple system with constant-time block operations.
#[derive(Debug, Clone)]
pub struct PartialSts {
    order: Order,
    blocks: Vec<Triple>,
    pair: Vec<u32>,
    degree: Vec<u16>,
    generation: u64,
}

impl PartialEq for PartialSts {
    // the mutation counter is bookkeeping, not state
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.blocks == other.blocks
            && self.pair == other.pair
            && self.degree == other.degree
    }
}

impl Eq for PartialSts {}

impl PartialSts {
    pub fn new(order: Order) -> Self {
        let v = order.v();
        PartialSts {
            order,
            blocks: Vec::with_capacity(order.blocks()),
            pair: vec![NONE; v * v],
            degree: vec![0; v],
            generation: 0,
        }
    }

    /// Builds a system from a block list, failing on the first conflict.
    pub fn from_blocks<I: IntoIterator<Item = Triple>>(order: Order, blocks: I) -> Result<Self> {
        let mut s = PartialSts::new(order);
        for t in blocks {
            s.add_block(t)?;
        }
        Ok(s)
    }

    #[inline]
    pub fn order(&self) -> Order {
        self.order
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.order.v()
    }

    pub fn blocks(&self) -> &[Triple] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.len() == self.order.blocks()
    }

    /// Number of covered unordered pairs.
    pub fn covered_pairs(&self) -> usize {
        3 * self.blocks.len()
    }

    /// `n_q`, the number of blocks through `q`.
    #[inline]
    pub fn degree(&self, q: Point) -> usize {
        self.degree[q as usize] as usize
    }

    /// `m_q = (v-1)/2 - n_q`.
    #[inline]
    pub fn deficiency(&self, q: Point) -> usize {
        self.order.replication() - self.degree[q as usize] as usize
    }

    /// Mutation counter; bumped by every successful add or remove.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    #[inline]
    fn slot(&self, p: Point, q: Point) -> usize {
        p as usize * self.order.v() + q as usize
    }

    #[inline]
    pub fn is_covered(&self, p: Point, q: Point) -> bool {
        self.pair[self.slot(p, q)] != NONE
    }

    /// Third point of the block through `p` and `q`, if any. `p != q` is
    /// the caller's responsibility.
    #[inline]
    pub fn third_point(&self, p: Point, q: Point) -> Option<Point> {
        match self.pair[self.slot(p, q)] {
            NONE => None,
            h => Some(self.blocks[h as usize].third(p, q)),
        }
    }

    pub fn block_through(&self, p: Point, q: Point) -> Result<Option<Triple>> {
        if p == q {
            return Err(Error::SamePoint(p));
        }
        let v = self.v();
        for x in [p, q] {
            if x as usize >= v {
                return Err(Error::PointOutOfRange { point: x as usize, order: v });
            }
        }
        Ok(match self.pair[self.slot(p, q)] {
            NONE => None,
            h => Some(self.blocks[h as usize]),
        })
    }

    pub fn contains(&self, t: &Triple) -> bool {
        let [a, b, c] = t.points();
        if c as usize >= self.v() {
            return false;
        }
        match self.pair[self.slot(a, b)] {
            NONE => false,
            h => self.blocks[h as usize].third(a, b) == c,
        }
    }

    pub fn add_block(&mut self, t: Triple) -> Result<()> {
        t.check_range(self.v())?;
        for (p, q) in t.pairs() {
            if self.is_covered(p, q) {
                return Err(Error::PairAlreadyCovered(p, q));
            }
        }
        let h = self.blocks.len() as u32;
        self.blocks.push(t);
        self.set_pairs(t, h);
        for p in t.points() {
            self.degree[p as usize] += 1;
        }
        self.generation += 1;
        Ok(())
    }

    pub fn remove_block(&mut self, t: Triple) -> Result<()> {
        if !self.contains(&t) {
            return Err(Error::BlockAbsent(t.to_string()));
        }
        let [a, b, _] = t.points();
        let h = self.pair[self.slot(a, b)];
        self.set_pairs(t, NONE);
        let last = self.blocks.len() as u32 - 1;
        self.blocks.swap_remove(h as usize);
        if h != last {
            let moved = self.blocks[h as usize];
            self.set_pairs(moved, h);
        }
        for p in t.points() {
            self.degree[p as usize] -= 1;
        }
        self.generation += 1;
        Ok(())
    }

    #[inline]
    fn set_pairs(&mut self, t: Triple, h: u32) {
        for (p, q) in t.pairs() {
            let (i, j) = (self.slot(p, q), self.slot(q, p));
            self.pair[i] = h;
            self.pair[j] = h;
        }
    }

    /// Full O(v^2) audit of every structural invariant.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let v = self.v();
        if self.blocks.len() > self.order.blocks() {
            return Err(Violation::TooManyBlocks(self.blocks.len()));
        }
        let mut expect = vec![NONE; v * v];
        let mut degree = vec![0usize; v];
        for (h, t) in self.blocks.iter().enumerate() {
            if t.check_range(v).is_err() {
                return Err(Violation::PointOutOfRange(*t));
            }
            for (p, q) in t.pairs() {
                let i = p as usize * v + q as usize;
                if expect[i] != NONE {
                    return Err(Violation::PairCoveredTwice(p, q));
                }
                expect[i] = h as u32;
                expect[q as usize * v + p as usize] = h as u32;
            }
            for p in t.points() {
                degree[p as usize] += 1;
            }
        }
        for p in 0..v {
            for q in 0..v {
                if expect[p * v + q] != self.pair[p * v + q] {
                    return Err(Violation::IndexMismatch { p: p as Point, q: q as Point });
                }
            }
        }
        for (p, &d) in degree.iter().enumerate() {
            if self.degree[p] as usize != d {
                return Err(Violation::DegreeMismatch {
                    point: p as Point,
                    stored: self.degree[p] as usize,
                    actual: d,
                });
            }
            if d > self.order.replication() {
                return Err(Violation::DegreeTooLarge(p as Point));
            }
        }
        Ok(())
    }

    /// Uncovered pairs `(p, q)` with `p < q`, in lexicographic order.
    pub fn uncovered_pairs(&self) -> Vec<(Point, Point)> {
        let v = self.v() as Point;
        let mut out = Vec::new();
        for p in 0..v {
            for q in p + 1..v {
                if !self.is_covered(p, q) {
                    out.push((p, q));
                }
            }
        }
        out
    }

    /// Copy of the system with blocks stored in ascending order.
    pub fn canonical(&self) -> PartialSts {
        let mut blocks = self.blocks.clone();
        blocks.sort_unstable();
        PartialSts::from_blocks(self.order, blocks).expect("blocks of a valid system")
    }

    /// Text form: `v <order>` then one block per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("v {}\n", self.v());
        for t in &self.blocks {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<PartialSts> {
        let mut sts: Option<PartialSts> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let perr = |msg: &str| Error::Parse { line, msg: msg.to_string() };
            match sts.as_mut() {
                None => {
                    let rest = trimmed
                        .strip_prefix("v ")
                        .ok_or_else(|| perr("expected header `v <order>`"))?;
                    let v: usize = rest.trim().parse().map_err(|_| perr("bad order"))?;
                    sts = Some(PartialSts::new(Order::new(v)?));
                }
                Some(s) => {
                    let nums: Vec<usize> = trimmed
                        .split_whitespace()
                        .map(|w| w.parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| perr("non-integer point"))?;
                    if nums.len() != 3 {
                        return Err(perr("a block needs exactly three points"));
                    }
                    if let Some(&p) = nums.iter().find(|&&p| p >= s.v()) {
                        return Err(perr(&format!("point {p} out of range")));
                    }
                    let t = Triple::new(nums[0] as Point, nums[1] as Point, nums[2] as Point)
                        .map_err(|_| perr("repeated point in block"))?;
                    s.add_block(t)?;
                }
            }
        }
        sts.ok_or(Error::Parse { line: 0, msg: "missing header".into() })
    }
}

/// Blocks of the Fano plane on points 0..7.
pub fn fano_blocks() -> Vec<Triple> {
    [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]]
        .iter()
        .map(|b| Triple::new(b[0], b[1], b[2]).unwrap())
        .collect()
}

/// The affine plane AG(2,3) on points 0..9, the unique STS(9).
pub fn affine_plane_9() -> Vec<Triple> {
    let pt = |x: u16, y: u16| 3 * x + y;
    let mut out = Vec::new();
    // lines y = m x + c and x = c
    for m in 0..3u16 {
        for c in 0..3u16 {
            let ps: Vec<Point> = (0..3u16).map(|x| pt(x, (m * x + c) % 3)).collect();
            out.push(Triple::new(ps[0], ps[1], ps[2]).unwrap());
        }
    }
    for c in 0..3u16 {
        out.push(Triple::new(pt(c, 0), pt(c, 1), pt(c, 2)).unwrap());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: Point, b: Point, c: Point) -> Triple {
        Triple::new(a, b, c).unwrap()
    }

    fn fano() -> PartialSts {
        PartialSts::from_blocks(Order::new(7).unwrap(), fano_blocks()).unwrap()
    }

    #[test]
    fn order_admissibility() {
        assert!(Order::new(7).is_ok());
        assert!(Order::new(3).is_ok());
        assert_eq!(Order::new(8), Err(Error::InadmissibleOrder(8)));
        assert_eq!(Order::new(1), Err(Error::InadmissibleOrder(1)));
        let o = Order::new(13).unwrap();
        assert_eq!(o.blocks(), 26);
        assert_eq!(o.replication(), 6);
    }

    #[test]
    fn empty_system() {
        let s = PartialSts::new(Order::new(7).unwrap());
        assert_eq!(s.num_blocks(), 0);
        assert!((0..7).all(|q| s.deficiency(q) == 3));
        assert_eq!(s.block_through(2, 5).unwrap(), None);
    }

    #[test]
    fn add_and_conflict() {
        let mut s = PartialSts::new(Order::new(7).unwrap());
        s.add_block(t(0, 1, 2)).unwrap();
        assert_eq!(s.num_blocks(), 1);
        assert_eq!(s.degree(0), 1);
        assert_eq!(s.add_block(t(0, 1, 3)), Err(Error::PairAlreadyCovered(0, 1)));
        assert!(s.validate().is_ok());
    }

    #[test]
    fn fano_is_complete() {
        let s = fano();
        assert!(s.is_complete());
        assert!(s.validate().is_ok());
        assert_eq!(s.block_through(1, 2).unwrap(), Some(t(0, 1, 2)));
        assert_eq!(s.block_through(3, 3), Err(Error::SamePoint(3)));
    }

    #[test]
    fn remove_restores_state() {
        let mut s = PartialSts::new(Order::new(7).unwrap());
        s.add_block(t(3, 4, 0)).unwrap();
        let before = s.clone();
        s.add_block(t(0, 1, 2)).unwrap();
        s.remove_block(t(0, 1, 2)).unwrap();
        assert_eq!(s, before);
        assert_eq!(s.to_text(), before.to_text());
    }

    #[test]
    fn remove_errors_and_uncovered() {
        let mut e = PartialSts::new(Order::new(7).unwrap());
        assert!(matches!(e.remove_block(t(0, 1, 2)), Err(Error::BlockAbsent(_))));
        let mut s = fano();
        s.remove_block(t(1, 3, 5)).unwrap();
        assert_eq!(s.num_blocks(), 6);
        assert_eq!(s.uncovered_pairs(), vec![(1, 3), (1, 5), (3, 5)]);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn corrupted_index_is_reported() {
        let mut s = fano();
        let i = s.slot(1, 2);
        s.pair[i] = 3;
        assert!(matches!(s.validate(), Err(Violation::IndexMismatch { .. })));
        let mut s = fano();
        s.degree[4] = 1;
        assert!(matches!(s.validate(), Err(Violation::DegreeMismatch { point: 4, .. })));
    }

    #[test]
    fn affine_plane_is_sts9() {
        let s = PartialSts::from_blocks(Order::new(9).unwrap(), affine_plane_9()).unwrap();
        assert!(s.is_complete());
        assert!(s.validate().is_ok());
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let s = fano();
        let txt = s.to_text();
        assert_eq!(txt.lines().count(), 8);
        let back = PartialSts::parse(&txt).unwrap();
        assert!(back.is_complete());
        assert_eq!(back.to_text(), txt);

        let with_comment = "# fano\nv 7\n0 1 2\n# mid\n0 3 4\n";
        assert_eq!(PartialSts::parse(with_comment).unwrap().num_blocks(), 2);

        let dup = "v 7\n0 1 2\n1 2 3\n";
        assert_eq!(PartialSts::parse(dup), Err(Error::PairAlreadyCovered(1, 2)));
        let bad = "v 7\n0 1 x\n";
        assert!(matches!(PartialSts::parse(bad), Err(Error::Parse { line: 2, .. })));
        let oob = "v 7\n0 1 7\n";
        assert!(matches!(PartialSts::parse(oob), Err(Error::Parse { line: 2, .. })));
        assert_eq!(PartialSts::parse("v 8\n"), Err(Error::InadmissibleOrder(8)));
    }
}
