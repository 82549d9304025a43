//! Mean time per call of the staged pipeline against single-method
//! baselines over one fixed call stream.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::stats::StageStats;
use crate::filters::{DyadicStage, IntervalFilter, Stage};
use crate::predicates::{Builtin, Profile, StagedPredicate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    /// Coordinates uniform in `[0, 1)`.
    Uniform,
    /// Coordinates drawn from the exact lattice `{0, 1/4, ..., 7/4}`, so
    /// degenerate configurations are frequent.
    Grid,
}

impl Distribution {
    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Grid => "grid",
        }
    }
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Distribution, String> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "grid" => Ok(Distribution::Grid),
            _ => Err(format!("unknown distribution `{s}` (expected uniform or grid)")),
        }
    }
}

/// `n` rows of `arity` coordinates, flattened.
pub fn call_stream(arity: usize, n: usize, dist: Distribution, seed: u64) -> Vec<f64> {
    let mut rng = SplitMix64::seed_from_u64(seed);
    (0..n * arity)
        .map(|_| match dist {
            Distribution::Uniform => rng.random::<f64>(),
            Distribution::Grid => rng.random_range(0..8u32) as f64 * 0.25,
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub builtin: Builtin,
    pub profile: Profile,
    pub dist: Distribution,
    pub n: usize,
    pub staged_ns: f64,
    pub naive_ns: f64,
    pub interval_ns: f64,
    pub exact_ns: f64,
    pub stats: StageStats,
}

impl BenchReport {
    /// Share of calls decided by the first stage.
    pub fn stage1_rate(&self) -> f64 {
        let s = &self.stats.stages[0];
        s.certifications as f64 / s.calls as f64
    }

    pub fn staged_over_exact(&self) -> f64 {
        self.staged_ns / self.exact_ns
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} profile={} dist={} n={}",
            self.builtin,
            self.profile.name(),
            self.dist.name(),
            self.n
        )?;
        writeln!(f, "staged    {:10.1} ns/call", self.staged_ns)?;
        writeln!(f, "naive     {:10.1} ns/call", self.naive_ns)?;
        writeln!(f, "interval  {:10.1} ns/call", self.interval_ns)?;
        writeln!(f, "exact     {:10.1} ns/call", self.exact_ns)?;
        writeln!(f, "staged/exact ratio {:.4}", self.staged_over_exact())?;
        writeln!(f, "stage-1 certification rate {:.6}", self.stage1_rate())
    }
}

fn time_per_call(rows: &[f64], arity: usize, mut f: impl FnMut(&[f64]) -> i32) -> f64 {
    let start = Instant::now();
    let mut acc = 0i32;
    for x in rows.chunks_exact(arity) {
        acc = acc.wrapping_add(f(black_box(x)));
    }
    black_box(acc);
    start.elapsed().as_nanos() as f64 / (rows.len() / arity) as f64
}

pub fn run(builtin: Builtin, n: usize, profile: Profile, dist: Distribution, seed: u64) -> BenchReport {
    assert!(n >= 1, "need at least one call");
    let arity = builtin.arity();
    let rows = call_stream(arity, n, dist, seed);
    let e = builtin.expr();
    let staged = StagedPredicate::default_pipeline(builtin, profile);
    let interval = IntervalFilter::new(&e);
    let exact = DyadicStage::new(&e);

    let mut stats = StageStats::new(builtin.name(), &staged.stage_names());
    for x in rows.chunks_exact(arity) {
        stats.record(staged.apply_with_stage(x).expect("finite inputs").1);
    }
    let staged_ns = time_per_call(&rows, arity, |x| staged.apply(x).unwrap().to_i32());
    let naive_ns = time_per_call(&rows, arity, |x| e.eval_naive(x).to_bits() as i32);
    let interval_ns = time_per_call(&rows, arity, |x| interval.apply(x).sign().map_or(2, |s| s.to_i32()));
    let exact_ns = time_per_call(&rows, arity, |x| exact.apply(x).sign().map_or(2, |s| s.to_i32()));
    BenchReport {
        builtin,
        profile,
        dist,
        n,
        staged_ns,
        naive_ns,
        interval_ns,
        exact_ns,
        stats,
    }
}
