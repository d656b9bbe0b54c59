//! Ensemble observable records and the on-disk result format.
//!
//! Entropies are aggregated as exact integer bit sums, so ensemble means are
//! independent of worker count and completion order; nats appear only in the
//! serialized columns. A result file is a `#`-prefixed JSON header followed
//! by a CSV data block, UTF-8 with LF line endings.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::LN2;

pub const RESULT_FORMAT_TAG: &str = "cliffcft-result v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A probe region on the circuit boundary, in chain-position coordinates.
/// Intervals are half-open `[a, b)`; cut index `k` splits the chain after
/// its first `k` sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegmentSpec {
    /// Corner-anchored bipartition of the top edge.
    Cut { k: u32 },
    /// The first `k` qubits ejected onto a side edge, counted from the
    /// bottom corner.
    SideCut { side: Side, k: u32 },
    /// One top-edge interval.
    Interval { a: u32, b: u32 },
    /// Mutual information of the two corner-anchored segments `[0, k5)` and
    /// `[k6, L)`.
    CornerPair { k5: u32, k6: u32 },
    /// Mutual information of side segments (left level k5, right level k6).
    SidePair { k5: u32, k6: u32 },
    /// Mutual information of two top-edge intervals.
    IntervalPair { a1: u32, a2: u32, b1: u32, b2: u32 },
    /// Mutual information of a top-edge interval and an environment
    /// (bottom-edge) interval.
    OppositePair { a1: u32, a2: u32, b1: u32, b2: u32 },
    /// Entropy between the evolving chain and its maximally entangled
    /// partner (the purification observable).
    Bell,
    /// Entropy of the static reference qubits.
    RefSet,
}

impl fmt::Display for SegmentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentSpec::Cut { k } => write!(f, "cut:{k}"),
            SegmentSpec::SideCut { side: Side::Left, k } => write!(f, "side:L:{k}"),
            SegmentSpec::SideCut { side: Side::Right, k } => write!(f, "side:R:{k}"),
            SegmentSpec::Interval { a, b } => write!(f, "iv:{a}:{b}"),
            SegmentSpec::CornerPair { k5, k6 } => write!(f, "cpair:{k5}:{k6}"),
            SegmentSpec::SidePair { k5, k6 } => write!(f, "spair:{k5}:{k6}"),
            SegmentSpec::IntervalPair { a1, a2, b1, b2 } => {
                write!(f, "ipair:{a1}:{a2}:{b1}:{b2}")
            }
            SegmentSpec::OppositePair { a1, a2, b1, b2 } => {
                write!(f, "opair:{a1}:{a2}:{b1}:{b2}")
            }
            SegmentSpec::Bell => write!(f, "bell"),
            SegmentSpec::RefSet => write!(f, "ref"),
        }
    }
}

impl FromStr for SegmentSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |v: &str| -> Result<u32> {
            v.parse().map_err(|_| Error::Parse(format!("bad segment field {v:?} in {s:?}")))
        };
        match parts.as_slice() {
            ["cut", k] => Ok(SegmentSpec::Cut { k: num(k)? }),
            ["side", "L", k] => Ok(SegmentSpec::SideCut { side: Side::Left, k: num(k)? }),
            ["side", "R", k] => Ok(SegmentSpec::SideCut { side: Side::Right, k: num(k)? }),
            ["iv", a, b] => Ok(SegmentSpec::Interval { a: num(a)?, b: num(b)? }),
            ["cpair", k5, k6] => Ok(SegmentSpec::CornerPair { k5: num(k5)?, k6: num(k6)? }),
            ["spair", k5, k6] => Ok(SegmentSpec::SidePair { k5: num(k5)?, k6: num(k6)? }),
            ["ipair", a1, a2, b1, b2] => Ok(SegmentSpec::IntervalPair {
                a1: num(a1)?,
                a2: num(a2)?,
                b1: num(b1)?,
                b2: num(b2)?,
            }),
            ["opair", a1, a2, b1, b2] => Ok(SegmentSpec::OppositePair {
                a1: num(a1)?,
                a2: num(a2)?,
                b1: num(b1)?,
                b2: num(b2)?,
            }),
            ["bell"] => Ok(SegmentSpec::Bell),
            ["ref"] => Ok(SegmentSpec::RefSet),
            _ => Err(Error::Parse(format!("unknown segment descriptor {s:?}"))),
        }
    }
}

/// One ensemble-aggregated record: exact integer sums over realizations of
/// the probe value in bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub t: u32,
    pub segment: SegmentSpec,
    pub sum_bits: u64,
    pub sumsq_bits: u64,
    pub count: u64,
}

impl SeriesRecord {
    pub fn mean_nats(&self) -> f64 {
        self.sum_bits as f64 / self.count as f64 * LN2
    }

    /// Standard error of the mean in nats; 0 by convention for count <= 1.
    pub fn stderr_nats(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let var = (self.sumsq_bits as f64 - (self.sum_bits as f64).powi(2) / n) / (n - 1.0);
        (var.max(0.0) / n).sqrt() * LN2
    }
}

/// Run provenance carried in the result-file header; enough to reproduce
/// the data block bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    /// Layout kind or percolation descriptor.
    pub kind: String,
    pub l: usize,
    pub t: u32,
    pub p: f64,
    pub n_realizations: u64,
    pub master_seed: u64,
    /// Analysis-time rescaling constant; the simulation never depends on it.
    pub y_over_t: f64,
    pub code_version: String,
    /// Wall-clock stamp; excluded from reproducibility comparisons.
    #[serde(default)]
    pub created_unix: u64,
}

/// Ensemble-averaged series plus provenance.
#[derive(Clone, Debug)]
pub struct ObservableSeries {
    pub meta: RunMeta,
    pub records: Vec<SeriesRecord>,
}

/// One serialized CSV row; collapse coordinates are recomputable from
/// (t, segment, L, T, Y/T) alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: u32,
    pub tau: f64,
    pub segment: String,
    /// Minimal lattice separation of the probe (fit-window input).
    pub sep: f64,
    pub xi: Option<f64>,
    pub eta: Option<f64>,
    pub mean_nats: f64,
    pub stderr_nats: f64,
    pub sum_bits: u64,
    pub sumsq_bits: u64,
    pub count: u64,
}

/// Write a result file atomically (temp file + rename): a partial write can
/// never replace a complete previous file.
pub fn write_result_file(path: &Path, meta: &RunMeta, rows: &[CsvRow]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("result"),
        std::process::id()
    ));
    let mut out = Vec::new();
    writeln!(out, "# {RESULT_FORMAT_TAG}")?;
    writeln!(out, "# {}", serde_json::to_string(meta).map_err(|e| Error::Parse(e.to_string()))?)?;
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        for row in rows {
            w.serialize(row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush()?;
    }
    std::fs::write(&tmp, &out)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a result file written by [`write_result_file`].
pub fn read_result_file(path: &Path) -> Result<(RunMeta, Vec<CsvRow>)> {
    let file = std::fs::File::open(path)?;
    let mut reader = std::io::BufReader::new(file);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim_start_matches("# ").trim() != RESULT_FORMAT_TAG {
        return Err(Error::Parse(format!("{}: not a result file", path.display())));
    }
    line.clear();
    reader.read_line(&mut line)?;
    let meta: RunMeta = serde_json::from_str(line.trim_start_matches("# ").trim())
        .map_err(|e| Error::Parse(format!("{}: bad header: {e}", path.display())))?;
    let mut rows = Vec::new();
    let mut csv_reader =
        csv::ReaderBuilder::new().has_headers(true).comment(Some(b'#')).from_reader(reader);
    for row in csv_reader.deserialize() {
        let row: CsvRow = row.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok((meta, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_spec_round_trips() {
        let specs = [
            SegmentSpec::Cut { k: 12 },
            SegmentSpec::SideCut { side: Side::Left, k: 3 },
            SegmentSpec::SideCut { side: Side::Right, k: 9 },
            SegmentSpec::Interval { a: 4, b: 20 },
            SegmentSpec::CornerPair { k5: 8, k6: 56 },
            SegmentSpec::SidePair { k5: 1, k6: 2 },
            SegmentSpec::IntervalPair { a1: 1, a2: 3, b1: 9, b2: 11 },
            SegmentSpec::OppositePair { a1: 1, a2: 3, b1: 9, b2: 11 },
            SegmentSpec::Bell,
            SegmentSpec::RefSet,
        ];
        for s in specs {
            let text = s.to_string();
            assert_eq!(text.parse::<SegmentSpec>().unwrap(), s, "{text}");
        }
        assert!("nope:1".parse::<SegmentSpec>().is_err());
    }

    #[test]
    fn record_statistics() {
        let r = SeriesRecord {
            t: 4,
            segment: SegmentSpec::Bell,
            sum_bits: 10,
            sumsq_bits: 30,
            count: 4,
        };
        assert!((r.mean_nats() - 2.5 * LN2).abs() < 1e-15);
        // var = (30 - 100/4) / 3 = 5/3; stderr = sqrt(5/12) ln2.
        let want = (5.0f64 / 12.0).sqrt() * LN2;
        assert!((r.stderr_nats() - want).abs() < 1e-15);

        let single = SeriesRecord { count: 1, ..r };
        assert_eq!(single.stderr_nats(), 0.0);
    }

    #[test]
    fn result_file_round_trips() {
        let dir = std::env::temp_dir().join(format!("cliffcft-series-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.csv");
        let meta = RunMeta {
            kind: "fffa".into(),
            l: 16,
            t: 8,
            p: 0.16,
            n_realizations: 4,
            master_seed: 7,
            y_over_t: 0.61,
            code_version: "test".into(),
            created_unix: 0,
        };
        let rows = vec![
            CsvRow {
                t: 2,
                tau: 0.07625,
                segment: "cut:8".into(),
                sep: 8.0,
                xi: Some(0.123456789012345),
                eta: None,
                mean_nats: 1.5 * LN2,
                stderr_nats: 0.1,
                sum_bits: 6,
                sumsq_bits: 10,
                count: 4,
            },
            CsvRow {
                t: 4,
                tau: 0.1525,
                segment: "bell".into(),
                sep: 16.0,
                xi: None,
                eta: Some(0.25),
                mean_nats: 0.0,
                stderr_nats: 0.0,
                sum_bits: 0,
                sumsq_bits: 0,
                count: 4,
            },
        ];
        write_result_file(&path, &meta, &rows).unwrap();
        let (meta2, rows2) = read_result_file(&path).unwrap();
        assert_eq!(meta, meta2);
        assert_eq!(rows, rows2);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn write_to_bad_path_errors_without_side_effects() {
        let meta = RunMeta {
            kind: "fffa".into(),
            l: 4,
            t: 2,
            p: 0.1,
            n_realizations: 1,
            master_seed: 0,
            y_over_t: 0.61,
            code_version: "test".into(),
            created_unix: 0,
        };
        let missing = Path::new("/nonexistent-dir-cliffcft/out.csv");
        assert!(write_result_file(missing, &meta, &[]).is_err());
    }
}
