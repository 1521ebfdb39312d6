#![allow(dead_code)]

use rand::Rng;
use sts_core::rng::substream;
use sts_core::stinson::{stinson_generate, StinsonParams};
use sts_core::{Order, PartialSts, Point, Triple};

pub fn random_sts(v: usize, seed: u64, stream: u64) -> PartialSts {
    let out = stinson_generate(Order::new(v).unwrap(), &StinsonParams::default(), &mut substream(seed, stream));
    assert!(out.is_complete());
    out.system
}

/// Greedy random partial system: `tries` random triples, each added when
/// none of its pairs is covered.
pub fn random_partial(v: usize, tries: usize, seed: u64) -> PartialSts {
    let mut rng = substream(seed, 99);
    let mut s = PartialSts::new(Order::new(v).unwrap());
    for _ in 0..tries {
        let a = rng.random_range(0..v as Point);
        let b = rng.random_range(0..v as Point);
        let c = rng.random_range(0..v as Point);
        if let Ok(t) = Triple::new(a, b, c) {
            if t.pairs().iter().all(|&(p, q)| !s.is_covered(p, q)) {
                s.add_block(t).unwrap();
            }
        }
    }
    s
}

/// Backtracking search for a point bijection mapping the blocks of `s` onto
/// the blocks of `t`. Independent of the Pasch-based classifier.
pub fn isomorphic(s: &PartialSts, t: &PartialSts) -> bool {
    if s.v() != t.v() || s.num_blocks() != t.num_blocks() {
        return false;
    }
    let v = s.v();
    let mut map = vec![Point::MAX; v];
    let mut used = vec![false; v];
    extend(s, t, 0, &mut map, &mut used)
}

fn extend(s: &PartialSts, t: &PartialSts, p: usize, map: &mut [Point], used: &mut [bool]) -> bool {
    let v = s.v();
    if p == v {
        return s.blocks().iter().all(|b| {
            let [x, y, z] = b.points().map(|q| map[q as usize]);
            t.contains(&Triple::new(x, y, z).unwrap())
        });
    }
    for img in 0..v as Point {
        if used[img as usize] {
            continue;
        }
        map[p] = img;
        // every block through p whose other points are mapped must map to a block
        let consistent = (0..p as Point).all(|q| match (s.third_point(p as Point, q), t.third_point(img, map[q as usize])) {
            (None, None) => true,
            (Some(r), Some(r2)) => {
                if (r as usize) < p {
                    map[r as usize] == r2
                } else {
                    !used[r2 as usize] || r2 == img
                }
            }
            _ => false,
        });
        if consistent {
            used[img as usize] = true;
            if extend(s, t, p + 1, map, used) {
                return true;
            }
            used[img as usize] = false;
        }
    }
    map[p] = Point::MAX;
    false
}
