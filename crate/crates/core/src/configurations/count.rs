//! Occurrence counting by backtracking embedding search.
//!
//! Template blocks are visited in a fixed order chosen to keep the search
//! tree small; each block has 0-3 points already mapped. A block with two
//! mapped points is forced through the pair table, which is where most of the
//! pruning comes from. Every occurrence corresponds to `|Aut|` embeddings;
//! instead of dividing, the search imposes order constraints `phi(u) < phi(w)`
//! derived from a stabilizer chain of the automorphism group, so that exactly
//! one embedding per occurrence survives.

use super::catalog::automorphisms;
use super::ConfigurationTemplate;
use crate::sts::{PartialSts, Point};

const NONE: Point = Point::MAX;

/// Read-only pair table of a triple system, sized for fast lookups.
#[derive(Debug, Clone)]
pub struct CountView {
    v: usize,
    third: Vec<Point>,
    blocks: Vec<[Point; 3]>,
}

impl CountView {
    pub fn new(s: &PartialSts) -> Self {
        let v = s.v();
        let mut third = vec![NONE; v * v];
        for t in s.blocks() {
            for (p, q) in t.pairs() {
                let r = t.third(p, q);
                third[p as usize * v + q as usize] = r;
                third[q as usize * v + p as usize] = r;
            }
        }
        CountView { v, third, blocks: s.blocks().iter().map(|t| t.points()).collect() }
    }

    #[inline(always)]
    fn third(&self, p: Point, q: Point) -> Point {
        self.third[p as usize * self.v + q as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StepKind {
    Fresh,
    OneOld,
    TwoOld,
    ThreeOld,
}

#[derive(Debug, Clone)]
struct Step {
    kind: StepKind,
    /// template points, already-mapped ones first
    pts: [u8; 3],
    /// order constraints `(u, w)`: `phi(u) < phi(w)`, checkable after this step
    checks: Vec<(u8, u8)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strategy {
    Backtrack,
    /// prisms are pairs of vertex-disjoint block triangles with the same
    /// three free points
    TrianglePairs,
}

/// A compiled search plan for one template.
#[derive(Debug, Clone)]
pub struct Counter {
    steps: Vec<Step>,
    points: usize,
    symmetry_breaking: bool,
    strategy: Strategy,
}

fn step_kinds(order: &[[u8; 3]], points: usize) -> Vec<usize> {
    let mut mapped = vec![false; points];
    order
        .iter()
        .map(|b| {
            let old = b.iter().filter(|&&p| mapped[p as usize]).count();
            for &p in b {
                mapped[p as usize] = true;
            }
            old
        })
        .collect()
}

/// Estimated node count at `v = 200`: fresh blocks branch `~v^2` ways, blocks
/// with one mapped point `~v` ways, and the rest are forced.
fn plan_cost(order: &[[u8; 3]], points: usize) -> f64 {
    let v = 200f64;
    let mut nodes = 1f64;
    let mut cost = 0f64;
    for old in step_kinds(order, points) {
        let (branch, survive) = match old {
            0 => (v * v, v * v),
            1 => (v, v),
            2 => (1.0, 1.0),
            _ => (1.0, 1.0 / v),
        };
        cost += nodes * branch;
        nodes *= survive;
    }
    cost
}

fn best_block_order(blocks: &[[u8; 3]], points: usize) -> Vec<[u8; 3]> {
    let n = blocks.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut best = blocks.to_vec();
    let mut best_cost = plan_cost(&best, points);
    // lexicographic permutation walk keeps the choice deterministic
    loop {
        let order: Vec<[u8; 3]> = idx.iter().map(|&i| blocks[i]).collect();
        let c = plan_cost(&order, points);
        if c < best_cost * (1.0 - 1e-12) {
            best_cost = c;
            best = order;
        }
        // next permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| idx[i] < idx[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| idx[j] > idx[i]).unwrap();
        idx.swap(i, j);
        idx[i + 1..].reverse();
    }
    best
}

/// Stabilizer-chain order constraints selecting one embedding per occurrence.
fn symmetry_constraints(auts: &[Vec<u8>], rank: &[usize]) -> Vec<(u8, u8)> {
    let points = rank.len();
    let mut group: Vec<&Vec<u8>> = auts.iter().collect();
    let mut out = Vec::new();
    while group.len() > 1 {
        // earliest-mapped point with a nontrivial orbit
        let mut candidates: Vec<usize> = (0..points).collect();
        candidates.sort_by_key(|&p| rank[p]);
        let (u, orbit) = candidates
            .into_iter()
            .find_map(|u| {
                let mut orbit: Vec<u8> = group.iter().map(|g| g[u]).collect();
                orbit.sort_unstable();
                orbit.dedup();
                (orbit.len() > 1).then_some((u, orbit))
            })
            .expect("nontrivial group moves some point");
        for &w in &orbit {
            if w as usize != u {
                out.push((u as u8, w));
            }
        }
        group.retain(|g| g[u] as usize == u);
    }
    out
}

impl Counter {
    pub fn new(t: &ConfigurationTemplate) -> Self {
        let mut c = Self::build(t, true);
        if is_prism(t) {
            c.strategy = Strategy::TrianglePairs;
        }
        c
    }

    /// Symmetry-broken backtracking plan, never specialised.
    pub fn backtracking(t: &ConfigurationTemplate) -> Self {
        Self::build(t, true)
    }

    /// Plan that counts every embedding (`|Aut|` per occurrence).
    pub fn embeddings(t: &ConfigurationTemplate) -> Self {
        Self::build(t, false)
    }

    fn build(t: &ConfigurationTemplate, symmetry_breaking: bool) -> Self {
        let order = best_block_order(&t.blocks, t.points);
        let mut mapped = vec![false; t.points];
        let mut rank = vec![usize::MAX; t.points];
        let mut next_rank = 0;
        let mut steps = Vec::new();
        for b in &order {
            let mut old: Vec<u8> = b.iter().copied().filter(|&p| mapped[p as usize]).collect();
            let new: Vec<u8> = b.iter().copied().filter(|&p| !mapped[p as usize]).collect();
            let kind = match old.len() {
                0 => StepKind::Fresh,
                1 => StepKind::OneOld,
                2 => StepKind::TwoOld,
                _ => StepKind::ThreeOld,
            };
            for &p in &new {
                mapped[p as usize] = true;
                rank[p as usize] = next_rank;
                next_rank += 1;
            }
            old.extend(new);
            steps.push(Step { kind, pts: [old[0], old[1], old[2]], checks: Vec::new() });
        }
        if symmetry_breaking {
            let auts = automorphisms(t.points, &t.blocks);
            let step_of_rank = |r: usize| {
                // step at which the point of rank r is mapped
                let mut seen = 0;
                for (i, s) in steps.iter().enumerate() {
                    let fresh = match s.kind {
                        StepKind::Fresh => 3,
                        StepKind::OneOld => 2,
                        StepKind::TwoOld => 1,
                        StepKind::ThreeOld => 0,
                    };
                    seen += fresh;
                    if r < seen {
                        return i;
                    }
                }
                unreachable!("every point is mapped")
            };
            let cons = symmetry_constraints(&auts, &rank);
            let placed: Vec<(usize, (u8, u8))> = cons
                .into_iter()
                .map(|(u, w)| (step_of_rank(rank[u as usize].max(rank[w as usize])), (u, w)))
                .collect();
            for (i, c) in placed {
                steps[i].checks.push(c);
            }
        }
        Counter { steps, points: t.points, symmetry_breaking, strategy: Strategy::Backtrack }
    }

    pub fn is_symmetry_breaking(&self) -> bool {
        self.symmetry_breaking
    }

    pub fn count(&self, view: &CountView) -> u64 {
        if self.strategy == Strategy::TrianglePairs {
            return count_triangle_pairs(view);
        }
        let mut map = [NONE; 16];
        let mut used = vec![false; view.v];
        let mut total = 0u64;
        self.descend(0, view, &mut map, &mut used, &mut total);
        total
    }

    #[inline(always)]
    fn checks_pass(&self, k: usize, map: &[Point; 16]) -> bool {
        self.steps[k].checks.iter().all(|&(u, w)| map[u as usize] < map[w as usize])
    }

    fn descend(&self, k: usize, view: &CountView, map: &mut [Point; 16], used: &mut [bool], total: &mut u64) {
        if k == self.steps.len() {
            *total += 1;
            return;
        }
        let step = &self.steps[k];
        let [p0, p1, p2] = step.pts.map(|p| p as usize);
        match step.kind {
            StepKind::Fresh => {
                for &[a, b, c] in &view.blocks {
                    if used[a as usize] || used[b as usize] || used[c as usize] {
                        continue;
                    }
                    for (x, y, z) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                        map[p0] = x;
                        map[p1] = y;
                        map[p2] = z;
                        if self.checks_pass(k, map) {
                            used[x as usize] = true;
                            used[y as usize] = true;
                            used[z as usize] = true;
                            self.descend(k + 1, view, map, used, total);
                            used[x as usize] = false;
                            used[y as usize] = false;
                            used[z as usize] = false;
                        }
                    }
                }
                map[p0] = NONE;
                map[p1] = NONE;
                map[p2] = NONE;
            }
            StepKind::OneOld => {
                let x = map[p0];
                for y in 0..view.v as Point {
                    if y == x || used[y as usize] {
                        continue;
                    }
                    let z = view.third(x, y);
                    if z == NONE || used[z as usize] {
                        continue;
                    }
                    map[p1] = y;
                    map[p2] = z;
                    if self.checks_pass(k, map) {
                        used[y as usize] = true;
                        used[z as usize] = true;
                        self.descend(k + 1, view, map, used, total);
                        used[y as usize] = false;
                        used[z as usize] = false;
                    }
                }
                map[p1] = NONE;
                map[p2] = NONE;
            }
            StepKind::TwoOld => {
                let z = view.third(map[p0], map[p1]);
                if z == NONE || used[z as usize] {
                    return;
                }
                map[p2] = z;
                if self.checks_pass(k, map) {
                    used[z as usize] = true;
                    self.descend(k + 1, view, map, used, total);
                    used[z as usize] = false;
                }
                map[p2] = NONE;
            }
            StepKind::ThreeOld => {
                if view.third(map[p0], map[p1]) == map[p2] && self.checks_pass(k, map) {
                    self.descend(k + 1, view, map, used, total);
                }
            }
        }
    }

    pub fn num_points(&self) -> usize {
        self.points
    }
}

/// Six blocks on nine points, every point on two blocks, `|Aut| = 12`.
fn is_prism(t: &ConfigurationTemplate) -> bool {
    t.points == 9 && t.blocks.len() == 6 && t.aut_order == 12 && t.degrees().iter().all(|&d| d == 2)
}

fn count_triangle_pairs(view: &CountView) -> u64 {
    let v = view.v as Point;
    let mut triangles: Vec<([Point; 3], [Point; 3])> = Vec::new();
    for a in 0..v {
        for b in a + 1..v {
            let x = view.third(a, b);
            if x == NONE {
                continue;
            }
            for c in b + 1..v {
                if c == x {
                    continue;
                }
                let (y, z) = (view.third(b, c), view.third(a, c));
                if y == NONE || z == NONE {
                    continue;
                }
                let mut free = [x, y, z];
                free.sort_unstable();
                triangles.push((free, [a, b, c]));
            }
        }
    }
    triangles.sort_unstable();
    let mut total = 0;
    for group in triangles.chunk_by(|p, q| p.0 == q.0) {
        for (i, (_, s)) in group.iter().enumerate() {
            for (_, t) in &group[i + 1..] {
                if s.iter().all(|p| !t.contains(p)) {
                    total += 1;
                }
            }
        }
    }
    total
}

/// Number of block subsets of `s` isomorphic to `t`.
pub fn count_occurrences(s: &PartialSts, t: &ConfigurationTemplate) -> u64 {
    Counter::new(t).count(&CountView::new(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::catalog;
    use crate::rng::substream;
    use crate::stinson::{stinson_generate, StinsonParams};
    use crate::sts::{affine_plane_9, fano_blocks, Order};

    #[test]
    fn embeddings_are_aut_multiples() {
        let s = stinson_generate(Order::new(15).unwrap(), &StinsonParams::default(), &mut substream(1, 0)).system;
        let view = CountView::new(&s);
        for t in catalog().unwrap() {
            let occ = Counter::new(t).count(&view);
            let emb = Counter::embeddings(t).count(&view);
            assert_eq!(emb, occ * t.aut_order, "{}", t.name);
        }
    }

    #[test]
    fn prism_strategy_matches_backtracking() {
        let t = crate::configurations::template("prism").unwrap();
        assert_eq!(Counter::new(t).strategy, Strategy::TrianglePairs);
        for (v, seed) in [(15, 2), (19, 3), (31, 4)] {
            let s = stinson_generate(Order::new(v).unwrap(), &StinsonParams::default(), &mut substream(seed, 0)).system;
            let view = CountView::new(&s);
            assert_eq!(Counter::new(t).count(&view), Counter::backtracking(t).count(&view), "v={v}");
        }
    }

    #[test]
    fn fano_plane_counts() {
        let s = PartialSts::from_blocks(Order::new(7).unwrap(), fano_blocks()).unwrap();
        let get = |n: &str| count_occurrences(&s, crate::configurations::template(n).unwrap());
        assert_eq!(get("fano"), 1);
        assert_eq!(get("pasch"), 7);
        assert_eq!(get("fano-line"), 7);
    }

    #[test]
    fn affine_plane_counts() {
        let s = PartialSts::from_blocks(Order::new(9).unwrap(), affine_plane_9()).unwrap();
        let get = |n: &str| count_occurrences(&s, crate::configurations::template(n).unwrap());
        assert_eq!(get("pasch"), 0);
        assert_eq!(get("grid"), 6);
    }

    #[test]
    fn plans_start_with_a_fresh_block_and_stay_connected() {
        for t in catalog().unwrap() {
            let c = Counter::new(t);
            assert_eq!(c.steps[0].kind, StepKind::Fresh);
            assert!(c.steps[1..].iter().all(|s| s.kind != StepKind::Fresh), "{}", t.name);
        }
    }
}
