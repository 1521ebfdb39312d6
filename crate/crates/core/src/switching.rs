//! Pair graphs, cycle and path switches, and the cycle-switch chain.
//!
//! For two points `a` and `b`, every other point `x` (except the third point
//! `c` of the block `{a, b, c}` when it exists) has at most one `a`-edge, to
//! the third point of the block through `{a, x}`, and at most one `b`-edge.
//! The resulting graph has maximum degree 2; in a complete system it is a
//! disjoint union of even cycles with alternating labels.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sts::{PartialSts, Point, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentKind {
    Cycle,
    Path,
}

/// One cycle or path of the `{a, b}` pair graph.
///
/// `labels[i]` labels the edge from `vertices[i]` to `vertices[i + 1]`; for a
/// cycle the last label closes the edge back to `vertices[0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchComponent {
    pub kind: ComponentKind,
    pub vertices: Vec<Point>,
    pub labels: Vec<Label>,
    a: Point,
    b: Point,
    generation: u64,
}

impl SwitchComponent {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Blocks of the component, one per edge.
    pub fn blocks(&self) -> Vec<Triple> {
        self.edges()
            .map(|(u, w, l)| Triple::from_distinct(self.point(l), u, w))
            .collect()
    }

    /// Blocks after the switch.
    pub fn switched_blocks(&self) -> Vec<Triple> {
        self.edges()
            .map(|(u, w, l)| Triple::from_distinct(self.point(flip(l)), u, w))
            .collect()
    }

    fn point(&self, l: Label) -> Point {
        match l {
            Label::A => self.a,
            Label::B => self.b,
        }
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point, Label)> + '_ {
        let n = self.vertices.len();
        self.labels
            .iter()
            .enumerate()
            .map(move |(i, &l)| (self.vertices[i], self.vertices[(i + 1) % n], l))
    }
}

fn flip(l: Label) -> Label {
    match l {
        Label::A => Label::B,
        Label::B => Label::A,
    }
}

/// All components of the pair graph of `{a, b}`.
#[derive(Debug, Clone)]
pub struct PairGraph {
    pub a: Point,
    pub b: Point,
    pub third: Option<Point>,
    pub components: Vec<SwitchComponent>,
    generation: u64,
}

impl PairGraph {
    pub fn component_of(&self, x: Point) -> Option<&SwitchComponent> {
        self.components.iter().find(|c| c.vertices.contains(&x))
    }
}

#[inline]
fn neighbour(s: &PartialSts, apex: Point, x: Point) -> Option<Point> {
    s.third_point(apex, x)
}

fn check_pair(s: &PartialSts, a: Point, b: Point) -> Result<()> {
    if a == b {
        return Err(Error::SamePoint(a));
    }
    for p in [a, b] {
        if p as usize >= s.v() {
            return Err(Error::PointOutOfRange { point: p as usize, order: s.v() });
        }
    }
    Ok(())
}

/// Walks away from `start` beginning with an edge labelled `first`; returns
/// visited vertices (excluding `start`), the labels taken, and whether the
/// walk closed back on `start`.
fn walk(s: &PartialSts, a: Point, b: Point, start: Point, first: Label) -> (Vec<Point>, Vec<Label>, bool) {
    let mut verts = Vec::new();
    let mut labels = Vec::new();
    let mut cur = start;
    let mut label = first;
    loop {
        let apex = if label == Label::A { a } else { b };
        match neighbour(s, apex, cur) {
            None => return (verts, labels, false),
            Some(next) => {
                labels.push(label);
                if next == start {
                    return (verts, labels, true);
                }
                verts.push(next);
                cur = next;
                label = flip(label);
            }
        }
    }
}

/// Component of the `{a, b}` pair graph containing `x`, or `None` when `x`
/// has no incident edge. `x` must differ from `a`, `b` and the third point.
pub fn component_containing(s: &PartialSts, a: Point, b: Point, x: Point) -> Result<Option<SwitchComponent>> {
    check_pair(s, a, b)?;
    if x == a || x == b || s.third_point(a, b) == Some(x) {
        return Err(Error::OutOfRange(format!("point {x} is not a pair-graph vertex")));
    }
    let (fwd, fl, closed) = walk(s, a, b, x, Label::A);
    let (kind, vertices, labels) = if closed {
        let mut v = vec![x];
        v.extend(fwd);
        (ComponentKind::Cycle, v, fl)
    } else {
        let (back, bl, _) = walk(s, a, b, x, Label::B);
        if fwd.is_empty() && back.is_empty() {
            return Ok(None);
        }
        // path reads from the far end of the b-walk through x to the far end of the a-walk
        let mut v: Vec<Point> = back.iter().rev().copied().collect();
        v.push(x);
        v.extend(fwd);
        let mut l: Vec<Label> = bl.iter().rev().copied().collect();
        l.extend(fl);
        (ComponentKind::Path, v, l)
    };
    Ok(Some(SwitchComponent { kind, vertices, labels, a, b, generation: s.generation() }))
}

pub fn pair_graph(s: &PartialSts, a: Point, b: Point) -> Result<PairGraph> {
    check_pair(s, a, b)?;
    let third = s.third_point(a, b);
    let v = s.v();
    let mut seen = vec![false; v];
    seen[a as usize] = true;
    seen[b as usize] = true;
    if let Some(c) = third {
        seen[c as usize] = true;
    }
    let mut components = Vec::new();
    for x in 0..v as Point {
        if seen[x as usize] {
            continue;
        }
        if let Some(comp) = component_containing(s, a, b, x)? {
            for &u in &comp.vertices {
                seen[u as usize] = true;
            }
            components.push(comp);
        }
    }
    Ok(PairGraph { a, b, third, components, generation: s.generation() })
}

/// Replaces every block `{a, x_i, x_j}` of the component by `{b, x_i, x_j}`
/// and vice versa. Returns the removed and added blocks.
pub fn switch_component(s: &mut PartialSts, g: &PairGraph, comp: &SwitchComponent) -> Result<(Vec<Triple>, Vec<Triple>)> {
    if g.generation != s.generation() || comp.a != g.a || comp.b != g.b {
        return Err(Error::StaleGraph);
    }
    apply_switch(s, comp)
}

/// Switches a single component obtained from [`component_containing`].
pub fn apply_switch(s: &mut PartialSts, comp: &SwitchComponent) -> Result<(Vec<Triple>, Vec<Triple>)> {
    if comp.generation != s.generation() {
        return Err(Error::StaleGraph);
    }
    let old = comp.blocks();
    let new = comp.switched_blocks();
    for &t in &old {
        s.remove_block(t)?;
    }
    for &t in &new {
        s.add_block(t)?;
    }
    Ok((old, new))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepReport {
    Loop,
    Switched(usize),
}

/// One step of the cycle-switch chain on a complete system: uniform pair
/// `{a, b}` and uniform `x` outside it; nothing happens when `{a, b, x}` is a
/// block, otherwise the cycle through `x` is switched.
pub fn cycle_switch_step<R: Rng + ?Sized>(s: &mut PartialSts, rng: &mut R) -> StepReport {
    debug_assert!(s.is_complete());
    let v = s.v() as Point;
    let a = rng.random_range(0..v);
    let mut b = rng.random_range(0..v - 1);
    if b >= a {
        b += 1;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let mut x = rng.random_range(0..v - 2);
    if x >= lo {
        x += 1;
    }
    if x >= hi {
        x += 1;
    }
    if s.third_point(a, b) == Some(x) {
        return StepReport::Loop;
    }
    let comp = component_containing(s, a, b, x)
        .expect("x is a pair-graph vertex")
        .expect("complete systems have 2-regular pair graphs");
    let n = comp.len();
    apply_switch(s, &comp).expect("fresh component");
    StepReport::Switched(n)
}

/// True iff every pair graph is a single cycle through all `v - 3` points.
pub fn is_perfect(s: &PartialSts) -> bool {
    let v = s.v() as Point;
    for a in 0..v {
        for b in a + 1..v {
            let c = match s.third_point(a, b) {
                Some(c) => c,
                None => return false,
            };
            let x = (0..v).find(|&x| x != a && x != b && x != c).unwrap();
            match component_containing(s, a, b, x) {
                Ok(Some(comp)) if comp.kind == ComponentKind::Cycle && comp.len() == v as usize - 3 => {}
                _ => return false,
            }
        }
    }
    true
}
