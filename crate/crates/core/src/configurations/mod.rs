//! Small configurations: the catalog, occurrence counting, and the expected
//! counts under the two random-hypergraph models.

mod brute;
mod catalog;
mod count;
mod models;

use std::fmt;

pub use brute::{count_brute_force, DEFAULT_SUBSET_BUDGET};
pub use catalog::{catalog, enumerate_catalog, parse_catalog, write_catalog};
pub use count::{count_occurrences, Counter, CountView};
pub use models::{asymptotic_norm, expected_count_model1, expected_count_model2, specimen_count, ModelParams};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// every point on at least two blocks
    Full,
    /// `w` points, `w` blocks, every point on three blocks
    W3,
    /// anything else (test hooks)
    Other,
}

/// A named configuration on points `0..points`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigurationTemplate {
    pub name: String,
    pub kind: Kind,
    pub points: usize,
    pub blocks: Vec<[u8; 3]>,
    pub aut_order: u64,
}

impl ConfigurationTemplate {
    /// Builds a template, checking linearity and computing `|Aut|` by brute
    /// force over all point permutations.
    pub fn new(name: &str, points: usize, blocks: Vec<[u8; 3]>) -> Result<Self> {
        if points > 12 {
            return Err(Error::OutOfRange(format!("{points} points")));
        }
        let mut blocks: Vec<[u8; 3]> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .collect();
        blocks.sort_unstable();
        let mut covered = std::collections::HashSet::new();
        for b in &blocks {
            if b[0] == b[1] || b[1] == b[2] || b[2] as usize >= points {
                return Err(Error::OutOfRange(format!("bad block {b:?}")));
            }
            for (p, q) in [(b[0], b[1]), (b[0], b[2]), (b[1], b[2])] {
                if !covered.insert((p, q)) {
                    return Err(Error::PairAlreadyCovered(p as u16, q as u16));
                }
            }
        }
        let aut_order = catalog::automorphisms(points, &blocks).len() as u64;
        let degrees = degrees(points, &blocks);
        let kind = if !blocks.is_empty() && degrees.iter().all(|&d| d >= 2) {
            if blocks.len() == points && degrees.iter().all(|&d| d == 3) {
                Kind::W3
            } else {
                Kind::Full
            }
        } else {
            Kind::Other
        };
        Ok(ConfigurationTemplate { name: name.to_string(), kind, points, blocks, aut_order })
    }

    /// `b'`
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `v' - b'`, the degree of the asymptotic count in `v`.
    pub fn exponent(&self) -> i64 {
        self.points as i64 - self.blocks.len() as i64
    }

    pub fn degrees(&self) -> Vec<usize> {
        degrees(self.points, &self.blocks)
    }
}

impl fmt::Display for ConfigurationTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name {}", self.name)?;
        writeln!(f, "v {}", self.points)?;
        for b in &self.blocks {
            writeln!(f, "{} {} {}", b[0], b[1], b[2])?;
        }
        Ok(())
    }
}

fn degrees(points: usize, blocks: &[[u8; 3]]) -> Vec<usize> {
    let mut d = vec![0; points];
    for b in blocks {
        for &p in b {
            d[p as usize] += 1;
        }
    }
    d
}

/// Looks up a catalog template by name (case-insensitive, `_` or `-`).
pub fn template(name: &str) -> Result<&'static ConfigurationTemplate> {
    let want = normalize(name);
    catalog()?
        .iter()
        .find(|t| normalize(&t.name) == want)
        .ok_or_else(|| Error::UnknownTemplate(name.to_string()))
}

fn normalize(name: &str) -> String {
    name.to_ascii_lowercase().replace(['_', ' '], "-").replace('ö', "o")
}
