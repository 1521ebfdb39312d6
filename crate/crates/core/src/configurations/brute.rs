//! Brute-force occurrence counting, used as an oracle for the fast counter.
//!
//! Every `b'`-subset of blocks whose point union has exactly `v'` points is
//! relabelled onto `0..v'` and looked up in the set of all relabellings of the
//! template (one entry per point permutation, up to automorphisms).

use std::collections::HashSet;

use super::ConfigurationTemplate;
use crate::error::{Error, Result};
use crate::sts::PartialSts;

/// Default cap on `C(b, b')`.
pub const DEFAULT_SUBSET_BUDGET: u128 = 1_000_000_000;

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn canonical(mut blocks: Vec<[u8; 3]>) -> Vec<[u8; 3]> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort_unstable();
    blocks
}

fn all_relabellings(t: &ConfigurationTemplate) -> HashSet<Vec<[u8; 3]>> {
    let n = t.points;
    let mut perm: Vec<u8> = (0..n as u8).collect();
    let mut out = HashSet::new();
    let mut c = vec![0usize; n];
    let apply = |perm: &[u8]| canonical(t.blocks.iter().map(|b| b.map(|p| perm[p as usize])).collect());
    out.insert(apply(&perm));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.insert(apply(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Counts block subsets of `s` isomorphic to `t` by exhaustive enumeration.
pub fn count_brute_force(s: &PartialSts, t: &ConfigurationTemplate, budget: u128) -> Result<u64> {
    let blocks: Vec<[u16; 3]> = s.blocks().iter().map(|b| b.points()).collect();
    let k = t.num_blocks();
    let subsets = binomial(blocks.len() as u128, k as u128);
    if subsets > budget {
        return Err(Error::TooLarge { subsets, budget });
    }
    if k == 0 {
        return Ok(1);
    }
    if k > blocks.len() {
        return Ok(0);
    }
    let targets = all_relabellings(t);
    let mut chosen = Vec::with_capacity(k);
    let mut mult = vec![0u8; s.v()];
    let mut union = 0usize;
    let mut total = 0u64;
    walk(&blocks, 0, k, t.points, &targets, &mut chosen, &mut mult, &mut union, &mut total);
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    blocks: &[[u16; 3]],
    start: usize,
    k: usize,
    points: usize,
    targets: &HashSet<Vec<[u8; 3]>>,
    chosen: &mut Vec<usize>,
    mult: &mut [u8],
    union: &mut usize,
    total: &mut u64,
) {
    if chosen.len() == k {
        if *union == points && matches(blocks, chosen, mult, targets) {
            *total += 1;
        }
        return;
    }
    for i in start..=blocks.len() - (k - chosen.len()) {
        let b = blocks[i];
        let added = b.iter().filter(|&&p| mult[p as usize] == 0).count();
        if *union + added > points {
            continue;
        }
        for &p in &b {
            mult[p as usize] += 1;
        }
        *union += added;
        chosen.push(i);
        walk(blocks, i + 1, k, points, targets, chosen, mult, union, total);
        chosen.pop();
        *union -= added;
        for &p in &b {
            mult[p as usize] -= 1;
        }
    }
}

fn matches(blocks: &[[u16; 3]], chosen: &[usize], mult: &[u8], targets: &HashSet<Vec<[u8; 3]>>) -> bool {
    let mut label = vec![u8::MAX; mult.len()];
    let mut next = 0u8;
    for (p, &m) in mult.iter().enumerate() {
        if m > 0 {
            label[p] = next;
            next += 1;
        }
    }
    let relabelled = canonical(chosen.iter().map(|&i| blocks[i].map(|p| label[p as usize])).collect());
    targets.contains(&relabelled)
}
