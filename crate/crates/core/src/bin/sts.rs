use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

use sts_core::cameron::{cameron_walk, WalkParams};
use sts_core::configurations::{
    asymptotic_norm, catalog, count_occurrences, expected_count_model1, expected_count_model2, specimen_count, template,
    write_catalog, ModelParams,
};
use sts_core::harness::{run_experiment, ExperimentSpec};
use sts_core::rng::substream;
use sts_core::stinson::{stinson_generate, ExtensionScheme, SnapshotPolicy, StinsonParams, WeightScheme};
use sts_core::sts13::{classify13, snapshot_study};
use sts_core::switching::cycle_switch_step;
use sts_core::{Order, PartialSts, Result};

#[derive(Parser)]
#[command(name = "sts", version, about = "Random Steiner triple systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Stinson,
    Cameron,
    CycleSwitch,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    First,
    Last,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one STS(v) in text form
    Generate {
        #[arg(long, value_enum, default_value = "stinson")]
        algo: Algo,
        #[arg(short = 'v', long = "order")]
        v: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Stinson weight codes W_x,W_y,W_z (0 sign, 1 linear, 2 binomial)
        #[arg(long, value_delimiter = ',', num_args = 3)]
        weights: Option<Vec<u8>>,
        /// Stinson extension codes O,I
        #[arg(long, value_delimiter = ',', num_args = 2)]
        ext: Option<Vec<u8>>,
        /// chain burn-in (default v^2)
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON experiment spec and write CSV
    Experiment {
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// write per-template summary statistics here
        #[arg(long)]
        summary: Option<PathBuf>,
        /// include a wall-clock column
        #[arg(long)]
        timing: bool,
        /// worker threads (overrides the spec)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Enumerate the configuration catalog
    Catalog {
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Count configurations in an STS file
    Count {
        file: PathBuf,
        /// templates to count (default: all)
        #[arg(short, long)]
        template: Vec<String>,
    },
    /// Classify an STS(13) as S1 or S2
    Classify13 { file: PathBuf },
    /// Completability of Stinson snapshots at v = 13
    Partial13 {
        #[arg(long, default_value_t = 10_000)]
        runs: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// block counts to snapshot
        #[arg(short, long, value_delimiter = ',', default_value = "21")]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "first")]
        policy: Policy,
        #[arg(long, value_delimiter = ',', num_args = 3)]
        weights: Option<Vec<u8>>,
        #[arg(long, value_delimiter = ',', num_args = 2)]
        ext: Option<Vec<u8>>,
    },
    /// Expected configuration counts in the random hypergraph models
    Expect {
        #[arg(short = 'v', long = "order")]
        v: u64,
        /// templates (default: all)
        #[arg(short, long)]
        template: Vec<String>,
    },
}

fn stinson_params(weights: Option<Vec<u8>>, ext: Option<Vec<u8>>) -> Result<StinsonParams> {
    let mut p = StinsonParams::default();
    if let Some(w) = weights {
        p.scheme = WeightScheme::from_codes(w[0], w[1], w[2])?;
    }
    if let Some(e) = ext {
        p.ext = ExtensionScheme::new(e[0], e[1])?;
    }
    Ok(p)
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_sts(path: &PathBuf) -> Result<PartialSts> {
    PartialSts::parse(&fs::read_to_string(path)?)
}

fn generate(algo: Algo, v: usize, seed: u64, params: StinsonParams, burn_in: Option<usize>) -> Result<PartialSts> {
    let order = Order::new(v)?;
    let mut rng = substream(seed, 0);
    let mut out = stinson_generate(order, &params, &mut rng);
    while !out.is_complete() {
        out = stinson_generate(order, &params, &mut rng);
    }
    let start = out.system;
    let burn = burn_in.unwrap_or(v * v);
    Ok(match algo {
        Algo::Stinson => start,
        Algo::Cameron => {
            let walk = WalkParams { num_outputs: 1, thinning: Some(1), burn_in: Some(burn) };
            cameron_walk(&start, &walk, &mut rng)?.pop().expect("one output")
        }
        Algo::CycleSwitch => {
            let mut s = start;
            for _ in 0..burn {
                cycle_switch_step(&mut s, &mut rng);
            }
            s
        }
    })
}

fn templates_or_all(names: &[String]) -> Result<Vec<&'static sts_core::configurations::ConfigurationTemplate>> {
    if names.is_empty() {
        Ok(catalog()?.iter().collect())
    } else {
        names.iter().map(|n| template(n)).collect()
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { algo, v, seed, weights, ext, burn_in, out } => {
            let s = generate(algo, v, seed, stinson_params(weights, ext)?, burn_in)?;
            emit(out, &s.canonical().to_text())
        }
        Command::Experiment { spec, out, summary, timing, threads } => {
            let mut spec = ExperimentSpec::from_json(&fs::read_to_string(spec)?)?;
            if threads.is_some() {
                spec.parallelism = threads;
            }
            let result = run_experiment(&spec)?;
            emit(out, &result.to_csv(timing)?)?;
            match summary {
                Some(path) => fs::write(path, result.summary_csv())?,
                None => eprint!("{}", result.summary_csv()),
            }
            Ok(())
        }
        Command::Catalog { out } => emit(out, &write_catalog(catalog()?)),
        Command::Count { file, template } => {
            let s = read_sts(&file)?;
            if !s.is_complete() {
                return Err(sts_core::Error::Incomplete);
            }
            let mut text = String::from("template,count\n");
            for t in templates_or_all(&template)? {
                text.push_str(&format!("{},{}\n", t.name, count_occurrences(&s, t)));
            }
            emit(None, &text)
        }
        Command::Classify13 { file } => emit(None, &format!("{}\n", classify13(&read_sts(&file)?)?)),
        Command::Partial13 { runs, seed, k, policy, weights, ext } => {
            let mut params = stinson_params(weights, ext)?;
            params.snapshot_at = k;
            params.snapshot_policy = match policy {
                Policy::First => SnapshotPolicy::First,
                Policy::Last => SnapshotPolicy::Last,
            };
            let study = snapshot_study(&params, runs, seed)?;
            let mut text = format!("# runs {runs}\n# seed {seed}\n# restarts {}\n", study.restarts);
            text.push_str("k,q1,q12,q2,only_s1,both,only_s2,not_completable,missing\n");
            for t in &study.tallies {
                let (q1, q12, q2) = t.shares();
                text.push_str(&format!(
                    "{},{q1:.4},{q12:.4},{q2:.4},{},{},{},{},{}\n",
                    t.k, t.only_s1, t.both, t.only_s2, t.not_completable, t.missing
                ));
            }
            emit(None, &text)
        }
        Command::Expect { v, template } => {
            let mp = ModelParams::new(v);
            let mut text = String::new();
            for t in templates_or_all(&template)? {
                let f = |x: &num_rational::BigRational| x.to_f64().unwrap_or(f64::NAN);
                let (spec, m1, m2, asy) = (
                    specimen_count(v, t),
                    expected_count_model1(&mp, t),
                    expected_count_model2(&mp, t),
                    asymptotic_norm(v, t),
                );
                text.push_str(&format!("template {}\n", t.name));
                text.push_str(&format!("specimens {spec}\n"));
                text.push_str(&format!("model1 {} = {m1}\n", f(&m1)));
                text.push_str(&format!("model2 {} = {m2}\n", f(&m2)));
                text.push_str(&format!("asymptotic {} = {asy}\n", f(&asy)));
            }
            emit(None, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
