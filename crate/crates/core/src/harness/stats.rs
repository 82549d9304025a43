//! Per-stage call, certification and failure counters.

use std::fmt::Write as _;

use crate::fpn::Sign;
use crate::predicates::{PredicateError, StagedPredicate};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageCounter {
    pub name: String,
    pub calls: u64,
    pub certifications: u64,
    pub failures: u64,
}

/// Counters for one staged predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageStats {
    pub predicate: String,
    pub stages: Vec<StageCounter>,
}

impl StageStats {
    pub fn new(predicate: &str, stage_names: &[&str]) -> StageStats {
        StageStats {
            predicate: predicate.to_string(),
            stages: stage_names
                .iter()
                .map(|n| StageCounter {
                    name: n.to_string(),
                    calls: 0,
                    certifications: 0,
                    failures: 0,
                })
                .collect(),
        }
    }

    /// Records one call decided by the 0-based stage `decided`.
    pub fn record(&mut self, decided: usize) {
        for (k, s) in self.stages.iter_mut().enumerate().take(decided + 1) {
            s.calls += 1;
            if k == decided {
                s.certifications += 1;
            } else {
                s.failures += 1;
            }
        }
    }

    pub fn total_calls(&self) -> u64 {
        self.stages.first().map_or(0, |s| s.calls)
    }

    /// Failures of the 0-based stage `k`, 0 if out of range.
    pub fn failures(&self, k: usize) -> u64 {
        self.stages.get(k).map_or(0, |s| s.failures)
    }

    /// `certifications + failures == calls` per stage, and every stage
    /// after the first is called exactly when its predecessor fails.
    pub fn is_conserved(&self) -> bool {
        self.stages
            .iter()
            .all(|s| s.certifications + s.failures == s.calls)
            && self.stages.windows(2).all(|w| w[1].calls == w[0].failures)
    }

    /// Adds another run's counters; stage names must match.
    pub fn merge(&mut self, other: &StageStats) {
        assert_eq!(self.stages.len(), other.stages.len(), "stage lists differ");
        for (a, b) in self.stages.iter_mut().zip(&other.stages) {
            assert_eq!(a.name, b.name, "stage lists differ");
            a.calls += b.calls;
            a.certifications += b.certifications;
            a.failures += b.failures;
        }
    }

    pub const CSV_HEADER: &'static str = "predicate,stage,name,calls,certifications,failures";

    /// Data rows without the header; stages are numbered from 1.
    pub fn write_csv_rows(&self, out: &mut String) {
        for (k, s) in self.stages.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.predicate,
                k + 1,
                s.name,
                s.calls,
                s.certifications,
                s.failures
            );
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", StageStats::CSV_HEADER);
        self.write_csv_rows(&mut out);
        out
    }
}

/// A staged predicate that counts which stage decides each call.
#[derive(Clone, Debug)]
pub struct CountingPredicate {
    pub predicate: StagedPredicate,
    pub stats: StageStats,
}

impl CountingPredicate {
    pub fn new(name: &str, predicate: StagedPredicate) -> CountingPredicate {
        let stats = StageStats::new(name, &predicate.stage_names());
        CountingPredicate { predicate, stats }
    }

    pub fn apply(&mut self, inputs: &[f64]) -> Result<Sign, PredicateError> {
        let (sign, k) = self.predicate.apply_with_stage(inputs)?;
        self.stats.record(k);
        Ok(sign)
    }
}
