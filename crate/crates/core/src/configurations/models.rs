//! Expected configuration counts in random 3-uniform hypergraphs with `b`
//! expected (or exact) edges, in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ConfigurationTemplate;

/// Hypergraph model parameters derived from `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelParams {
    pub v: u64,
    /// `v(v-1)/6`
    pub b: u64,
    /// `C(v, 3)`
    pub w: u64,
}

impl ModelParams {
    pub fn new(v: u64) -> Self {
        ModelParams { v, b: v * v.saturating_sub(1) / 6, w: v * v.saturating_sub(1) * v.saturating_sub(2) / 6 }
    }

    /// Edge probability `b / w`.
    pub fn p(&self) -> BigRational {
        ratio(self.b as i64, self.w as i64)
    }
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Number of labelled copies of `t` on `v` points: `v'! C(v, v') / |Aut|`.
pub fn specimen_count(v: u64, t: &ConfigurationTemplate) -> BigRational {
    let falling = (0..t.points as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(v as i64 - i as i64));
    BigRational::new(falling, BigInt::from(t.aut_order))
}

/// Each triple is an edge independently with probability `1/(v-2)`.
pub fn expected_count_model1(mp: &ModelParams, t: &ConfigurationTemplate) -> BigRational {
    let p = ratio(1, mp.v as i64 - 2);
    let mut out = specimen_count(mp.v, t);
    for _ in 0..t.num_blocks() {
        out *= &p;
    }
    out
}

/// The edge set is a uniform `b`-subset of the `w` triples.
pub fn expected_count_model2(mp: &ModelParams, t: &ConfigurationTemplate) -> BigRational {
    let mut out = specimen_count(mp.v, t);
    for i in 0..t.num_blocks() as i64 {
        let num = mp.b as i64 - i;
        if num <= 0 {
            return BigRational::zero();
        }
        out *= ratio(num, mp.w as i64 - i);
    }
    out
}

/// Leading term `v^(v'-b') / |Aut|`.
pub fn asymptotic_norm(v: u64, t: &ConfigurationTemplate) -> BigRational {
    let e = t.exponent();
    let base = BigRational::from_integer(BigInt::from(v));
    let pow = if e >= 0 { num_traits::pow(base, e as usize) } else { num_traits::pow(base.recip(), (-e) as usize) };
    pow / BigRational::from_integer(BigInt::from(t.aut_order))
}
