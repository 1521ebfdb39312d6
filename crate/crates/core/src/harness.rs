//! Declarative experiments: seeded generation, configuration counts, summary
//! statistics and CSV output.
//!
//! Independent runs (Stinson) use rng substream `(seed, run)`. Chains (Cameron,
//! cycle switching) use substream `(seed, chain)` for both the Stinson start
//! and the walk; samples are split over chains as evenly as possible, lower
//! chain indices taking the remainder. Output does not depend on the number
//! of worker threads.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cameron::CameronChain;
use crate::configurations::{asymptotic_norm, template, ConfigurationTemplate, CountView, Counter};
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::stinson::{stinson_generate, ExtensionScheme, SnapshotPolicy, StinsonParams, WeightScheme};
use crate::sts::{Order, PartialSts};
use crate::sts13::{classify13, completability, IsoClass13};
use crate::switching::cycle_switch_step;

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "STS_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Stinson,
    Cameron,
    CycleSwitch,
}

fn default_templates() -> Vec<String> {
    vec!["pasch".into()]
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub v: usize,
    pub samples: u64,
    pub seed: u64,
    #[serde(default = "default_templates")]
    pub templates: Vec<String>,
    /// Stinson weight codes `(W_x, W_y, W_z)`
    #[serde(default)]
    pub weights: Option<[u8; 3]>,
    /// Stinson extension codes `(O, I)`
    #[serde(default)]
    pub extension: Option<[u8; 2]>,
    #[serde(default)]
    pub cap: Option<u64>,
    /// chain steps (cycle switching) or proper states (Cameron) between samples
    #[serde(default)]
    pub thinning: Option<usize>,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default = "one")]
    pub chains: u64,
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default)]
    pub snapshot_at: Vec<usize>,
    #[serde(default)]
    pub snapshot_policy: SnapshotPolicy,
}

impl ExperimentSpec {
    pub fn new(algorithm: Algorithm, v: usize, samples: u64, seed: u64) -> Self {
        ExperimentSpec {
            algorithm,
            v,
            samples,
            seed,
            templates: default_templates(),
            weights: None,
            extension: None,
            cap: None,
            thinning: None,
            burn_in: None,
            chains: 1,
            parallelism: None,
            snapshot_at: Vec::new(),
            snapshot_policy: SnapshotPolicy::First,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| Error::InvalidExperiment(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// SHA-256 of the compact JSON form, ignoring `parallelism`.
    pub fn hash(&self) -> String {
        let spec = ExperimentSpec { parallelism: None, ..self.clone() };
        hex::encode(Sha256::digest(serde_json::to_vec(&spec).expect("spec serializes")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(m));
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.chains == 0 {
            return bad("chains must be at least 1".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        Order::new(self.v)?;
        for t in &self.templates {
            template(t)?;
        }
        self.stinson_params()?;
        let stinson_only = self.weights.is_some() || self.extension.is_some() || !self.snapshot_at.is_empty();
        if stinson_only && self.algorithm != Algorithm::Stinson {
            return bad("weights, extension and snapshot_at apply to stinson only".into());
        }
        if !self.snapshot_at.is_empty() && self.v != 13 {
            return bad("snapshot_at needs v = 13".into());
        }
        Ok(())
    }

    fn stinson_params(&self) -> Result<StinsonParams> {
        let scheme = match self.weights {
            Some([x, y, z]) => WeightScheme::from_codes(x, y, z)?,
            None => WeightScheme::ORIGINAL,
        };
        let ext = match self.extension {
            Some([o, i]) => ExtensionScheme::new(o, i)?,
            None => ExtensionScheme::DISABLED,
        };
        Ok(StinsonParams {
            scheme,
            ext,
            cap: self.cap,
            snapshot_at: self.snapshot_at.clone(),
            snapshot_policy: self.snapshot_policy,
        })
    }

    /// Effective burn-in for chains: proper states (Cameron, default `v^2`) or
    /// steps (cycle switching, default `v^2`).
    pub fn burn_in_for(&self) -> Option<usize> {
        match self.algorithm {
            Algorithm::Stinson => None,
            _ => Some(self.burn_in.unwrap_or(self.v * self.v)),
        }
    }

    /// Effective thinning for chains, default `v`.
    pub fn thinning_for(&self) -> Option<usize> {
        match self.algorithm {
            Algorithm::Stinson => None,
            _ => Some(self.thinning.unwrap_or(self.v).max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub run: u64,
    /// chain index for chain algorithms, run index otherwise
    pub chain: u64,
    pub raw: Vec<u64>,
    pub normalized: Vec<f64>,
    pub class: Option<IsoClass13>,
    /// Stinson iterations, or chain steps since the previous sample
    pub iterations: u64,
    /// Stinson generations abandoned at the iteration cap before this one
    pub restarts: u64,
    /// completability label per requested snapshot (`1`, `12`, `2`, `none`, `-`)
    pub snapshots: Vec<String>,
    pub wall: Duration,
}

/// Boxplot statistics; quartiles use the median-of-halves rule, whiskers the
/// furthest data within `1.5 IQR` of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
}

fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let median = median_sorted(&xs);
    let (q1, q3) = if n == 1 { (median, median) } else { (median_sorted(&xs[..n / 2]), median_sorted(&xs[n - n / 2..])) };
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let whisker_low = *xs.iter().find(|&&x| x >= lo).expect("q1 is within range");
    let whisker_high = *xs.iter().rev().find(|&&x| x <= hi).expect("q3 is within range");
    Ok(SummaryStats {
        count: n,
        min: xs[0],
        q1,
        median,
        q3,
        max: xs[n - 1],
        mean: xs.iter().sum::<f64>() / n as f64,
        whisker_low,
        whisker_high,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    /// normalized-count summary per template, in spec order
    pub summaries: Vec<(String, SummaryStats)>,
    pub restarts: u64,
}

impl ExperimentResult {
    /// Number of S1 and S2 systems among the rows.
    pub fn class_counts(&self) -> [u64; 2] {
        let mut n = [0; 2];
        for r in &self.rows {
            if let Some(c) = r.class {
                n[c as usize] += 1;
            }
        }
        n
    }

    pub fn mean_normalized(&self, name: &str) -> Option<f64> {
        self.summaries.iter().find(|(n, _)| n == name).map(|(_, s)| s.mean)
    }

    /// CSV with a `#` metadata preamble. Wall-clock columns are included
    /// only with `timing`, so the default output is reproducible byte for byte.
    pub fn to_csv(&self, timing: bool) -> Result<String> {
        let spec = &self.spec;
        let mut out = String::new();
        out.push_str(&format!("# sts-core {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!("# spec_sha256 {}\n", spec.hash()));
        out.push_str(&format!("# seed {}\n", spec.seed));
        out.push_str(&format!("# algorithm {}\n", serde_json::to_value(spec.algorithm).expect("serializes").as_str().unwrap_or("")));
        out.push_str(&format!("# v {}\n", spec.v));
        if let (Some(b), Some(t)) = (spec.burn_in_for(), spec.thinning_for()) {
            out.push_str(&format!("# burn_in {b}\n# thinning {t}\n# chains {}\n", spec.chains));
        }
        out.push_str(&format!("# restarts {}\n", self.restarts));
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = vec!["run".into(), "chain".into(), "iterations".into(), "restarts".into(), "class".into()];
        header.extend(spec.templates.iter().map(|t| format!("{t}_raw")));
        header.extend(spec.templates.iter().map(|t| format!("{t}_norm")));
        header.extend(spec.snapshot_at.iter().map(|k| format!("snap_{k}")));
        if timing {
            header.push("wall_ms".into());
        }
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec: Vec<String> = vec![
                r.run.to_string(),
                r.chain.to_string(),
                r.iterations.to_string(),
                r.restarts.to_string(),
                r.class.map(|c| c.to_string()).unwrap_or_default(),
            ];
            rec.extend(r.raw.iter().map(u64::to_string));
            rec.extend(r.normalized.iter().map(f64::to_string));
            rec.extend(r.snapshots.iter().cloned());
            if timing {
                rec.push(format!("{:.3}", r.wall.as_secs_f64() * 1e3));
            }
            w.write_record(&rec).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    /// One line per template: `template,count,min,q1,median,q3,max,mean,whisker_low,whisker_high`.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("template,count,min,q1,median,q3,max,mean,whisker_low,whisker_high\n");
        for (name, s) in &self.summaries {
            out.push_str(&format!(
                "{name},{},{},{},{},{},{},{},{},{}\n",
                s.count, s.min, s.q1, s.median, s.q3, s.max, s.mean, s.whisker_low, s.whisker_high
            ));
        }
        out
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

struct Measure {
    counters: Vec<Counter>,
    norms: Vec<BigRational>,
    v: usize,
}

impl Measure {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        let templates: Vec<&ConfigurationTemplate> = spec.templates.iter().map(|t| template(t)).collect::<Result<_>>()?;
        Ok(Measure {
            counters: templates.iter().map(|t| Counter::new(t)).collect(),
            norms: templates.iter().map(|t| asymptotic_norm(spec.v as u64, t)).collect(),
            v: spec.v,
        })
    }

    fn row(&self, run: u64, chain: u64, s: &PartialSts, iterations: u64, restarts: u64, snapshots: Vec<String>, start: Instant) -> Result<ResultRow> {
        let view = CountView::new(s);
        let raw: Vec<u64> = self.counters.iter().map(|c| c.count(&view)).collect();
        let normalized = raw
            .iter()
            .zip(&self.norms)
            .map(|(&n, norm)| (BigRational::from_integer(BigInt::from(n)) / norm).to_f64().unwrap_or(f64::NAN))
            .collect();
        let class = if self.v == 13 { Some(classify13(s)?) } else { None };
        Ok(ResultRow { run, chain, raw, normalized, class, iterations, restarts, snapshots, wall: start.elapsed() })
    }
}

fn worker_count(spec: &ExperimentSpec) -> usize {
    spec.parallelism
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()).filter(|&n| n > 0))
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs the experiment; rows come back in run order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(spec))
        .build()
        .map_err(|e| Error::InvalidExperiment(e.to_string()))?;
    pool.install(|| run_inner(spec))
}

fn run_inner(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let order = Order::new(spec.v)?;
    let measure = Measure::new(spec)?;
    let params = spec.stinson_params()?;
    let rows: Vec<ResultRow> = match spec.algorithm {
        Algorithm::Stinson => (0..spec.samples)
            .into_par_iter()
            .map(|i| {
                let start = Instant::now();
                let mut rng = substream(spec.seed, i);
                let mut restarts = 0;
                let out = loop {
                    let out = stinson_generate(order, &params, &mut rng);
                    if out.is_complete() {
                        break out;
                    }
                    restarts += 1;
                };
                let snaps = spec
                    .snapshot_at
                    .iter()
                    .map(|k| match out.snapshots.get(k) {
                        Some(p) => completability(p).map(|c| c.label().to_string()),
                        None => Ok("-".to_string()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                measure.row(i, i, &out.system, out.iterations, restarts, snaps, start)
            })
            .collect::<Result<_>>()?,
        Algorithm::Cameron | Algorithm::CycleSwitch => {
            let burn_in = spec.burn_in_for().expect("chain algorithm");
            let thinning = spec.thinning_for().expect("chain algorithm");
            let per_chain = |c: u64| spec.samples / spec.chains + u64::from(c < spec.samples % spec.chains);
            let offsets: Vec<u64> = (0..spec.chains).scan(0, |acc, c| {
                let o = *acc;
                *acc += per_chain(c);
                Some(o)
            }).collect();
            let chains: Vec<Vec<ResultRow>> = (0..spec.chains)
                .into_par_iter()
                .map(|c| {
                    let mut rng = substream(spec.seed, c);
                    let start = stinson_generate(order, &StinsonParams::default(), &mut rng);
                    if !start.is_complete() {
                        return Err(Error::Incomplete);
                    }
                    let samples = chain_samples(spec.algorithm, start.system, burn_in, thinning, per_chain(c), &mut rng)?;
                    samples
                        .into_par_iter()
                        .enumerate()
                        .map(|(j, (s, steps))| measure.row(offsets[c as usize] + j as u64, c, &s, steps, 0, Vec::new(), Instant::now()))
                        .collect()
                })
                .collect::<Result<_>>()?;
            chains.into_iter().flatten().collect()
        }
    };
    let restarts = rows.iter().map(|r| r.restarts).sum();
    let summaries = spec
        .templates
        .iter()
        .enumerate()
        .map(|(k, t)| Ok((t.clone(), summarize(&rows.iter().map(|r| r.normalized[k]).collect::<Vec<_>>())?)))
        .collect::<Result<_>>()?;
    Ok(ExperimentResult { spec: spec.clone(), rows, summaries, restarts })
}

fn chain_samples(
    algorithm: Algorithm,
    start: PartialSts,
    burn_in: usize,
    thinning: usize,
    n: u64,
    rng: &mut crate::rng::StsRng,
) -> Result<Vec<(PartialSts, u64)>> {
    let mut out = Vec::with_capacity(n as usize);
    match algorithm {
        Algorithm::Cameron => {
            let mut chain = CameronChain::new(&start)?;
            for _ in 0..burn_in {
                chain.advance(rng);
            }
            for _ in 0..n {
                let steps = (0..thinning).map(|_| chain.advance(rng)).sum();
                out.push((chain.current(), steps));
            }
        }
        Algorithm::CycleSwitch => {
            let mut s = start;
            for _ in 0..burn_in {
                cycle_switch_step(&mut s, rng);
            }
            for _ in 0..n {
                for _ in 0..thinning {
                    cycle_switch_step(&mut s, rng);
                }
                out.push((s.clone(), thinning as u64));
            }
        }
        Algorithm::Stinson => unreachable!("not a chain"),
    }
    Ok(out)
}
