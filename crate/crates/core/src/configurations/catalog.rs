//! Exhaustive enumeration of the configuration catalog.
//!
//! Connected linear configurations are grown one block at a time, keeping one
//! representative per isomorphism class at every size. Full configurations
//! with at most six blocks are connected (the smallest full configuration has
//! four blocks), as are `w_3` configurations with `w <= 8`, so connected
//! growth reaches all of them.

use std::collections::HashMap;
use std::sync::OnceLock;

use super::{ConfigurationTemplate, Kind};
use crate::error::{Error, Result};

/// `(name, b', v', |Aut|)` of the nine catalog configurations.
pub const CATALOG_TABLE: [(&str, usize, usize, u64); 9] = [
    ("pasch", 4, 6, 24),
    ("mitre", 5, 7, 12),
    ("fano-line", 6, 7, 24),
    ("crown", 6, 8, 2),
    ("hexagon", 6, 8, 12),
    ("prism", 6, 9, 12),
    ("grid", 6, 9, 72),
    ("fano", 7, 7, 168),
    ("mobius-kantor", 8, 8, 48),
];

#[derive(Debug, Clone)]
struct Config {
    n: u8,
    blocks: Vec<[u8; 3]>,
    deg: [u8; 12],
    covered: u128,
}

#[inline]
fn pair_bit(p: u8, q: u8) -> u128 {
    let (hi, lo) = if p > q { (p, q) } else { (q, p) };
    1u128 << (hi as u32 * (hi as u32 - 1) / 2 + lo as u32)
}

impl Config {
    fn single() -> Self {
        let mut c = Config { n: 0, blocks: Vec::new(), deg: [0; 12], covered: 0 };
        c.n = 3;
        c.push([0, 1, 2]);
        c
    }

    fn push(&mut self, b: [u8; 3]) {
        for &p in &b {
            self.deg[p as usize] += 1;
        }
        self.covered |= pair_bit(b[0], b[1]) | pair_bit(b[0], b[2]) | pair_bit(b[1], b[2]);
        self.blocks.push(b);
    }

    fn free(&self, p: u8, q: u8) -> bool {
        self.covered & pair_bit(p, q) == 0
    }

    fn signature(&self) -> Vec<u32> {
        let n = self.n as usize;
        let mut per_point: Vec<u32> = (0..n)
            .map(|p| {
                let mut nbr: Vec<u8> = self
                    .blocks
                    .iter()
                    .filter(|b| b.contains(&(p as u8)))
                    .flat_map(|b| b.iter().copied().filter(|&q| q as usize != p))
                    .map(|q| self.deg[q as usize])
                    .collect();
                nbr.sort_unstable();
                nbr.iter().fold(self.deg[p] as u32, |acc, &d| acc * 7 + d as u32)
            })
            .collect();
        per_point.sort_unstable();
        let mut per_block: Vec<u32> = self
            .blocks
            .iter()
            .map(|b| {
                let mut d = b.map(|p| self.deg[p as usize]);
                d.sort_unstable();
                d[0] as u32 * 100 + d[1] as u32 * 10 + d[2] as u32
            })
            .collect();
        per_block.sort_unstable();
        let mut sig = vec![self.n as u32, self.blocks.len() as u32];
        sig.extend(per_point);
        sig.extend(per_block);
        sig
    }

    fn extensions(&self, max_points: u8, max_degree: u8) -> Vec<Config> {
        let n = self.n;
        let ok = |p: u8| self.deg[p as usize] < max_degree;
        let mut out = Vec::new();
        let mut add = |b: [u8; 3], new_n: u8| {
            let mut c = self.clone();
            c.n = new_n;
            c.push(b);
            out.push(c);
        };
        for p in (0..n).filter(|&p| ok(p)) {
            if n + 2 <= max_points {
                add([p, n, n + 1], n + 2);
            }
            for q in (p + 1..n).filter(|&q| ok(q) && self.free(p, q)) {
                if n < max_points {
                    add([p, q, n], n + 1);
                }
                for r in (q + 1..n).filter(|&r| ok(r) && self.free(p, r) && self.free(q, r)) {
                    add([p, q, r], n);
                }
            }
        }
        out
    }
}

/// Small bitset over sorted triples of points `< 16`.
struct TripleSet([u64; 64]);

impl TripleSet {
    fn new(blocks: &[[u8; 3]]) -> Self {
        let mut s = TripleSet([0; 64]);
        for b in blocks {
            let i = Self::index(b[0], b[1], b[2]);
            s.0[i >> 6] |= 1 << (i & 63);
        }
        s
    }

    #[inline]
    fn index(a: u8, b: u8, c: u8) -> usize {
        let mut t = [a, b, c];
        t.sort_unstable();
        (t[0] as usize) << 8 | (t[1] as usize) << 4 | t[2] as usize
    }

    #[inline]
    fn contains(&self, a: u8, b: u8, c: u8) -> bool {
        let i = Self::index(a, b, c);
        self.0[i >> 6] >> (i & 63) & 1 == 1
    }
}

/// Every point permutation mapping the block set onto itself, found by
/// enumerating all `points!` permutations.
pub(crate) fn automorphisms(points: usize, blocks: &[[u8; 3]]) -> Vec<Vec<u8>> {
    let set = TripleSet::new(blocks);
    let mut perm: Vec<u8> = (0..points as u8).collect();
    let mut out = Vec::new();
    let is_aut = |perm: &[u8]| {
        blocks
            .iter()
            .all(|b| set.contains(perm[b[0] as usize], perm[b[1] as usize], perm[b[2] as usize]))
    };
    // Heap's algorithm
    let mut c = vec![0usize; points];
    if is_aut(&perm) {
        out.push(perm.clone());
    }
    let mut i = 0;
    while i < points {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if is_aut(&perm) {
                out.push(perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out.sort();
    out
}

fn isomorphic(a: &Config, b: &Config) -> bool {
    if a.n != b.n || a.blocks.len() != b.blocks.len() {
        return false;
    }
    let n = a.n as usize;
    let target = TripleSet::new(&b.blocks);
    let mut map = vec![u8::MAX; n];
    let mut used = vec![false; n];
    fn extend(p: usize, a: &Config, b: &Config, target: &TripleSet, map: &mut [u8], used: &mut [bool]) -> bool {
        if p == map.len() {
            return true;
        }
        for q in 0..map.len() {
            if used[q] || a.deg[p] != b.deg[q] {
                continue;
            }
            map[p] = q as u8;
            // every block of `a` whose points are now all mapped must land on a block of `b`
            let consistent = a.blocks.iter().all(|blk| {
                let m = blk.map(|x| map[x as usize]);
                !blk.contains(&(p as u8))
                    || m.contains(&u8::MAX)
                    || target.contains(m[0], m[1], m[2])
            });
            if consistent {
                used[q] = true;
                if extend(p + 1, a, b, target, map, used) {
                    return true;
                }
                used[q] = false;
            }
            map[p] = u8::MAX;
        }
        false
    }
    extend(0, a, b, &target, &mut map, &mut used)
}

/// Connected linear configurations up to isomorphism, for each block count
/// `1..=max_blocks`, on at most `max_points` points with point degrees at most
/// `max_degree`.
fn grow(max_blocks: usize, max_points: u8, max_degree: u8) -> Vec<Config> {
    let mut level = vec![Config::single()];
    let mut all = level.clone();
    for _ in 1..max_blocks {
        let mut classes: HashMap<Vec<u32>, Vec<Config>> = HashMap::new();
        let mut order: Vec<Vec<u32>> = Vec::new();
        for c in &level {
            for e in c.extensions(max_points, max_degree) {
                let sig = e.signature();
                let bucket = classes.entry(sig.clone()).or_insert_with(|| {
                    order.push(sig);
                    Vec::new()
                });
                if !bucket.iter().any(|r| isomorphic(r, &e)) {
                    bucket.push(e);
                }
            }
        }
        level = order.into_iter().flat_map(|s| classes.remove(&s).unwrap()).collect();
        all.extend(level.iter().cloned());
    }
    all
}

/// Enumerates all full configurations with at most six blocks and all `w_3`
/// configurations with `w <= 8`, names them from their `(b', v', |Aut|)`
/// signature, and checks the result against [`CATALOG_TABLE`].
pub fn enumerate_catalog() -> Result<Vec<ConfigurationTemplate>> {
    let mut found = Vec::new();
    for c in grow(6, 9, u8::MAX) {
        if c.deg[..c.n as usize].iter().all(|&d| d >= 2) {
            found.push(c);
        }
    }
    for c in grow(8, 8, 3) {
        if c.blocks.len() == c.n as usize && c.deg[..c.n as usize].iter().all(|&d| d == 3) {
            found.push(c);
        }
    }
    let mut templates = Vec::new();
    for c in found {
        let t = ConfigurationTemplate::new("", c.n as usize, c.blocks)?;
        let name = CATALOG_TABLE
            .iter()
            .find(|&&(_, b, v, g)| b == t.num_blocks() && v == t.points && g == t.aut_order)
            .map(|row| row.0)
            .ok_or_else(|| {
                Error::CatalogMismatch(format!(
                    "unexpected configuration (b'={}, v'={}, |Aut|={})",
                    t.num_blocks(),
                    t.points,
                    t.aut_order
                ))
            })?;
        templates.push(ConfigurationTemplate { name: name.to_string(), ..t });
    }
    let mut out = Vec::new();
    for (name, ..) in CATALOG_TABLE {
        let mut hits = templates.iter().filter(|t| t.name == name);
        match (hits.next(), hits.next()) {
            (Some(t), None) => out.push(t.clone()),
            (None, _) => return Err(Error::CatalogMismatch(format!("no configuration for {name}"))),
            (Some(_), Some(_)) => return Err(Error::CatalogMismatch(format!("several configurations match {name}"))),
        }
    }
    debug_assert!(out.iter().take(7).all(|t| t.kind == Kind::Full));
    Ok(out)
}

/// The catalog, enumerated once per process.
pub fn catalog() -> Result<&'static [ConfigurationTemplate]> {
    static CATALOG: OnceLock<std::result::Result<Vec<ConfigurationTemplate>, Error>> = OnceLock::new();
    match CATALOG.get_or_init(enumerate_catalog) {
        Ok(v) => Ok(v),
        Err(e) => Err(e.clone()),
    }
}

/// Records separated by blank lines: `name`, `v`, then blocks.
pub fn write_catalog(templates: &[ConfigurationTemplate]) -> String {
    templates.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("\n")
}

pub fn parse_catalog(text: &str) -> Result<Vec<ConfigurationTemplate>> {
    let mut out = Vec::new();
    let mut name: Option<String> = None;
    let mut points: Option<usize> = None;
    let mut blocks: Vec<[u8; 3]> = Vec::new();
    let mut flush = |name: &mut Option<String>, points: &mut Option<usize>, blocks: &mut Vec<[u8; 3]>, line: usize| -> Result<()> {
        if let Some(n) = name.take() {
            let p = points.take().ok_or(Error::Parse { line, msg: format!("record {n} lacks `v`") })?;
            out.push(ConfigurationTemplate::new(&n, p, std::mem::take(blocks))?);
        }
        Ok(())
    };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.starts_with('#') {
            continue;
        }
        if l.is_empty() {
            flush(&mut name, &mut points, &mut blocks, line)?;
            continue;
        }
        if let Some(n) = l.strip_prefix("name ") {
            flush(&mut name, &mut points, &mut blocks, line)?;
            name = Some(n.trim().to_string());
        } else if let Some(v) = l.strip_prefix("v ") {
            points = Some(v.trim().parse().map_err(|_| Error::Parse { line, msg: "bad point count".into() })?);
        } else {
            let nums: Vec<u8> = l
                .split_whitespace()
                .map(|w| w.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse { line, msg: "bad block".into() })?;
            if nums.len() != 3 || name.is_none() {
                return Err(Error::Parse { line, msg: "expected three points inside a record".into() });
            }
            blocks.push([nums[0], nums[1], nums[2]]);
        }
    }
    flush(&mut name, &mut points, &mut blocks, text.lines().count())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_matches_table() {
        let cat = enumerate_catalog().unwrap();
        assert_eq!(cat.len(), 9);
        for (t, &(name, b, v, g)) in cat.iter().zip(CATALOG_TABLE.iter()) {
            assert_eq!((t.name.as_str(), t.num_blocks(), t.points, t.aut_order), (name, b, v, g));
        }
        assert_eq!(cat[7].kind, Kind::W3);
        assert_eq!(cat[8].kind, Kind::W3);
    }

    #[test]
    fn enumeration_is_deterministic() {
        assert_eq!(enumerate_catalog().unwrap(), enumerate_catalog().unwrap());
    }

    #[test]
    fn small_levels() {
        // connected 3-block linear configurations: path, star, triangle
        let all = grow(3, 9, u8::MAX);
        let by_blocks = |k: usize| all.iter().filter(|c| c.blocks.len() == k).count();
        assert_eq!(by_blocks(1), 1);
        assert_eq!(by_blocks(2), 1);
        assert_eq!(by_blocks(3), 3);
    }

    #[test]
    fn catalog_text_roundtrip() {
        let cat = enumerate_catalog().unwrap();
        let text = write_catalog(&cat);
        assert!(text.starts_with("name pasch\nv 6\n"));
        assert_eq!(parse_catalog(&text).unwrap(), cat);
    }

    #[test]
    fn fano_automorphisms() {
        let fano = [[0, 1, 2], [0, 3, 4], [0, 5, 6], [1, 3, 5], [1, 4, 6], [2, 3, 6], [2, 4, 5]];
        assert_eq!(automorphisms(7, &fano).len(), 168);
    }
}
