use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::{Algorithm, Config};
use crate::diagnostics::lower_bound_constant;

/// One checkpoint of one run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub run_id: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub t: u64,
    pub cum_regret_zeroed: f64,
    pub cum_regret_literal: f64,
    pub comm_phases: u64,
    pub comm_rounds: u64,
    pub init_rounds: u64,
    pub collisions: u64,
    pub set_changes: u64,
}

pub const TRACE_COLUMNS: [&str; 13] = [
    "run_id",
    "seed",
    "algorithm",
    "K",
    "M",
    "t",
    "cum_regret_zeroed",
    "cum_regret_literal",
    "comm_phases",
    "comm_rounds",
    "init_rounds",
    "collisions",
    "set_changes",
];

/// Cumulative columns summarized across seeds.
pub const CUMULATIVE_COLUMNS: [&str; 7] = [
    "cum_regret_zeroed",
    "cum_regret_literal",
    "comm_phases",
    "comm_rounds",
    "init_rounds",
    "collisions",
    "set_changes",
];

impl TraceRow {
    pub fn cumulative(&self) -> [f64; 7] {
        [
            self.cum_regret_zeroed,
            self.cum_regret_literal,
            self.comm_phases as f64,
            self.comm_rounds as f64,
            self.init_rounds as f64,
            self.collisions as f64,
            self.set_changes as f64,
        ]
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("row {row}: {reason}")]
    Malformed { row: u64, reason: String },
    #[error("trace has no data rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_trace<'a, W, I>(out: W, rows: I) -> Result<(), TraceError>
where
    W: Write,
    I: IntoIterator<Item = &'a TraceRow>,
{
    let mut w = csv::Writer::from_writer(out);
    let mut wrote = false;
    for r in rows {
        w.serialize(r).map_err(|e| TraceError::Malformed { row: 0, reason: e.to_string() })?;
        wrote = true;
    }
    if !wrote {
        w.write_record(TRACE_COLUMNS).map_err(|e| TraceError::Malformed { row: 0, reason: e.to_string() })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace; row numbers in errors count the header as row 1.
pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>, TraceError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(|e| TraceError::Malformed { row: 1, reason: e.to_string() })?;
    if header.is_empty() {
        return Err(TraceError::Empty);
    }
    if header.iter().ne(TRACE_COLUMNS) {
        return Err(TraceError::Malformed {
            row: 1,
            reason: format!("expected header {}", TRACE_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize::<TraceRow>().enumerate() {
        let row = i as u64 + 2;
        rows.push(rec.map_err(|e| TraceError::Malformed { row, reason: e.to_string() })?);
    }
    if rows.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl ColumnStats {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean: mean.clamp(min, max), std: var.sqrt(), min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub t: u64,
    pub runs: usize,
    pub columns: BTreeMap<String, ColumnStats>,
}

impl CheckpointSummary {
    pub fn mean(&self, column: &str) -> Option<f64> {
        self.columns.get(column).map(|c| c.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub means: Vec<f64>,
    pub lower_bound_constant: f64,
    pub checkpoints: Vec<CheckpointSummary>,
}

impl RunSummary {
    /// Seed statistics over the rows that landed on a configured checkpoint.
    pub fn from_rows<'a, I>(config: &Config, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a TraceRow>,
    {
        let mut by_t: BTreeMap<u64, Vec<[f64; 7]>> = BTreeMap::new();
        for r in rows {
            if config.checkpoints.binary_search(&r.t).is_ok() {
                by_t.entry(r.t).or_default().push(r.cumulative());
            }
        }
        let checkpoints = by_t
            .into_iter()
            .map(|(t, vals)| {
                let columns = CUMULATIVE_COLUMNS
                    .iter()
                    .enumerate()
                    .map(|(c, name)| {
                        let column: Vec<f64> = vals.iter().map(|v| v[c]).collect();
                        (name.to_string(), ColumnStats::of(&column))
                    })
                    .collect();
                CheckpointSummary { t, runs: vals.len(), columns }
            })
            .collect();
        Self {
            algorithm: config.algorithm,
            k: config.num_arms,
            m: config.num_players,
            means: config.means.as_slice().to_vec(),
            lower_bound_constant: lower_bound_constant(&config.means, config.num_players),
            checkpoints,
        }
    }

    pub fn at(&self, t: u64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u64, regret: f64) -> TraceRow {
        TraceRow {
            run_id: 0,
            seed: 1,
            algorithm: Algorithm::Dpe,
            k: 6,
            m: 3,
            t,
            cum_regret_zeroed: regret,
            cum_regret_literal: regret + 0.5,
            comm_phases: 1,
            comm_rounds: 20,
            init_rounds: 33,
            collisions: 90,
            set_changes: 1,
        }
    }

    #[test]
    fn csv_round_trip_and_header() {
        let rows = vec![row(100, 1.25), row(1000, 7.0)];
        let mut buf = Vec::new();
        write_trace(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
        assert_eq!(read_trace(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn malformed_rows_report_row_number() {
        let mut buf = Vec::new();
        write_trace(&mut buf, &[row(100, 1.0), row(200, 2.0)]).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("0,1,dpe,6,3,oops,1,1,0,0,0,0,0\n");
        match read_trace(text.as_bytes()) {
            Err(TraceError::Malformed { row, .. }) => assert_eq!(row, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_trace("".as_bytes()), Err(TraceError::Empty)));
        let header_only = format!("{}\n", TRACE_COLUMNS.join(","));
        assert!(matches!(read_trace(header_only.as_bytes()), Err(TraceError::Empty)));
        assert!(matches!(read_trace("a,b\n1,2\n".as_bytes()), Err(TraceError::Malformed { row: 1, .. })));
    }

    #[test]
    fn summary_statistics() {
        let config = Config::new(vec![0.9, 0.8, 0.7, 0.6, 0.5, 0.4], 3, 1000, Algorithm::Dpe).unwrap();
        let rows = [row(100, 1.0), row(100, 3.0), row(1000, 4.0), row(555, 9.0)];
        let s = RunSummary::from_rows(&config, &rows);
        assert_eq!(s.checkpoints.len(), 2);
        let c = &s.at(100).unwrap().columns["cum_regret_zeroed"];
        assert_eq!((c.mean, c.min, c.max), (2.0, 1.0, 3.0));
        assert!((c.std - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.at(1000).unwrap().columns["comm_rounds"].std, 0.0);
        assert!((s.lower_bound_constant - 8.284572653929994).abs() < 1e-12);
    }
}
