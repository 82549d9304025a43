//! Point sets and numeric row files.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::expr::parse_f64_literal;

#[derive(Debug, Error)]
pub enum RowError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected {expected} values, got {got}")]
    Arity {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// A parsed row and the 1-based line it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub line: usize,
    pub values: Vec<f64>,
}

/// Parses whitespace- or comma-separated literals, one row per line.
/// Blank lines and lines starting with `#` are skipped. Decimal literals
/// are rounded once to nearest; hexadecimal ones are taken bit-exact.
pub fn parse_rows(text: &str, arity: Option<usize>) -> Result<Vec<Row>, RowError> {
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let values = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                let v = parse_f64_literal(t).map_err(|e| RowError::Parse {
                    line,
                    message: format!("bad literal `{t}`: {e}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(RowError::Parse {
                        line,
                        message: format!("`{t}` is not finite"),
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(expected) = arity {
            if values.len() != expected {
                return Err(RowError::Arity {
                    line,
                    expected,
                    got: values.len(),
                });
            }
        }
        rows.push(Row { line, values });
    }
    Ok(rows)
}

pub fn read_rows(path: &Path, arity: Option<usize>) -> Result<Vec<Row>, RowError> {
    let text = std::fs::read_to_string(path).map_err(|source| RowError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_rows(&text, arity)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Uniform { seed: u64 },
    Grid { side: usize, spacing: f64 },
    File(PathBuf),
}

/// Finite 2D points and where they came from.
#[derive(Clone, Debug)]
pub struct PointSet2 {
    pub points: Vec<[f64; 2]>,
    pub provenance: Provenance,
}

impl PointSet2 {
    /// `n` points uniform in the unit square.
    pub fn uniform(n: usize, seed: u64) -> PointSet2 {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let points = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        PointSet2 {
            points,
            provenance: Provenance::Uniform { seed },
        }
    }

    /// The lattice `(i·s, j·s)` for `0 ≤ i, j < side`. `spacing` must be a
    /// power of two so every coordinate is exact.
    pub fn grid(side: usize, spacing: f64) -> PointSet2 {
        assert!(
            spacing > 0.0 && spacing.is_finite() && spacing.to_bits() & ((1 << 52) - 1) == 0,
            "grid spacing must be a power of two"
        );
        let mut points = Vec::with_capacity(side * side);
        for i in 0..side {
            for j in 0..side {
                points.push([i as f64 * spacing, j as f64 * spacing]);
            }
        }
        PointSet2 {
            points,
            provenance: Provenance::Grid { side, spacing },
        }
    }

    /// Two values per row.
    pub fn from_file(path: &Path) -> Result<PointSet2, RowError> {
        let points = read_rows(path, Some(2))?
            .into_iter()
            .map(|r| [r.values[0], r.values[1]])
            .collect();
        Ok(PointSet2 {
            points,
            provenance: Provenance::File(path.to_path_buf()),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Shuffles in place with SplitMix64 seeded by `seed` and the
    /// Fisher-Yates pass from `rand`.
    pub fn shuffle(&mut self, seed: u64) {
        let mut rng = SplitMix64::seed_from_u64(seed);
        self.points.shuffle(&mut rng);
    }
}
