//! Offline corpus analysis and unit selection.
//!
//! A [`DescriptorTable`] holds one row per unit (video frame or imported
//! audio grain). Selection is a linear scan for the smallest Euclidean
//! distance over min-max normalized columns; columns with zero range
//! contribute nothing, and ties go to the lowest unit index.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::descriptor::{analyze_frame, AnalysisParams, DESCRIPTOR_NAMES};
use crate::error::{Error, Result};
use crate::imagecore::Frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub unit_index: u64,
    pub time_ms: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTable {
    columns: Vec<String>,
    rows: Vec<Unit>,
    min: Vec<f64>,
    max: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    /// The cursor queries both corpora independently.
    PreSelection,
    /// The cursor selects in A; A's selected unit then queries B.
    PostSelection,
}

/// A target position on a subset of named descriptor dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub dims: Vec<String>,
    pub values: Vec<f64>,
}

impl Query {
    pub fn new<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Self {
        let (dims, values) = pairs.into_iter().map(|(d, v)| (d.into(), v)).unzip();
        Query { dims, values }
    }
}

impl DescriptorTable {
    pub fn new(columns: Vec<String>, rows: Vec<Unit>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| r.values.len() != columns.len()) {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                got: r.values.len(),
            });
        }
        let mut min = vec![f64::INFINITY; columns.len()];
        let mut max = vec![f64::NEG_INFINITY; columns.len()];
        for r in &rows {
            for (c, &v) in r.values.iter().enumerate() {
                min[c] = min[c].min(v);
                max[c] = max[c].max(v);
            }
        }
        if rows.is_empty() {
            min.fill(0.0);
            max.fill(0.0);
        }
        Ok(DescriptorTable {
            columns,
            rows,
            min,
            max,
        })
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Unit] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_range(&self, c: usize) -> (f64, f64) {
        (self.min[c], self.max[c])
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownDescriptor(name.to_string()))
    }

    pub fn unit(&self, unit_index: u64) -> Option<&Unit> {
        // Units are usually stored at their own index.
        match self.rows.get(unit_index as usize) {
            Some(u) if u.unit_index == unit_index => Some(u),
            _ => self.rows.iter().find(|u| u.unit_index == unit_index),
        }
    }

    fn normalize(&self, c: usize, v: f64) -> Option<f64> {
        let span = self.max[c] - self.min[c];
        (span > 0.0).then(|| (v - self.min[c]) / span)
    }

    /// Unit index of the row closest to `query`.
    pub fn nearest(&self, query: &Query) -> Result<u64> {
        if query.dims.len() != query.values.len() {
            return Err(Error::DimensionMismatch {
                expected: query.dims.len(),
                got: query.values.len(),
            });
        }
        let cols = query
            .dims
            .iter()
            .map(|d| self.column_index(d))
            .collect::<Result<Vec<_>>>()?;
        if self.rows.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let target: Vec<Option<f64>> = cols
            .iter()
            .zip(&query.values)
            .map(|(&c, &v)| self.normalize(c, v))
            .collect();
        let mut best: Option<(f64, u64)> = None;
        for row in &self.rows {
            let d2: f64 = cols
                .iter()
                .zip(&target)
                .filter_map(|(&c, t)| Some(self.normalize(c, row.values[c])? - (*t)?))
                .map(|d| d * d)
                .sum();
            let better = match best {
                None => true,
                Some((bd, bi)) => d2 < bd || (d2 == bd && row.unit_index < bi),
            };
            if better {
                best = Some((d2, row.unit_index));
            }
        }
        Ok(best.expect("non-empty table").1)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["unit_index".to_string(), "time_ms".to_string()];
        header.extend(self.columns.iter().cloned());
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(row.values.len() + 2);
            rec.push(row.unit_index.to_string());
            rec.push(row.time_ms.to_string());
            rec.extend(row.values.iter().map(f64::to_string));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 2 || &header[0] != "unit_index" || &header[1] != "time_ms" {
            return Err(Error::Config("CSV header must start with unit_index,time_ms".into()));
        }
        let columns: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let bad = |line: usize, what: &str| Error::Config(format!("CSV record {line}: bad {what}"));
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let unit_index = rec[0].trim().parse().map_err(|_| bad(line + 1, "unit_index"))?;
            let time_ms = rec[1].trim().parse().map_err(|_| bad(line + 1, "time_ms"))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad(line + 1, "value"))?;
            rows.push(Unit {
                unit_index,
                time_ms,
                values,
            });
        }
        Self::new(columns, rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Analyze every frame of a video into a table with columns
/// `warmth, sharpness, detail, luminance, motion_global`.
pub fn analyze_video<I>(frames: I, params: &AnalysisParams) -> Result<DescriptorTable>
where
    I: IntoIterator<Item = Result<Frame>>,
{
    let mut prev: Option<Frame> = None;
    let mut rows = Vec::new();
    for (i, frame) in frames.into_iter().enumerate() {
        let frame = frame?;
        let d = analyze_frame(&frame, prev.as_ref(), params, i as u64)?;
        rows.push(Unit {
            unit_index: i as u64,
            time_ms: frame.timestamp_ms() as f64,
            values: d.scalar_values(),
        });
        prev = Some(frame);
    }
    if rows.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    DescriptorTable::new(DESCRIPTOR_NAMES.iter().map(|s| s.to_string()).collect(), rows)
}

/// Select a unit in each corpus for the cursor position.
pub fn pair(a: &DescriptorTable, b: &DescriptorTable, cursor: &Query, mode: PairingMode) -> Result<(u64, u64)> {
    match mode {
        PairingMode::PreSelection => Ok((a.nearest(cursor)?, b.nearest(cursor)?)),
        PairingMode::PostSelection => {
            let b_cols: HashMap<&str, ()> = b.columns().iter().map(|c| (c.as_str(), ())).collect();
            let shared: Vec<usize> = (0..a.columns().len())
                .filter(|&c| b_cols.contains_key(a.columns()[c].as_str()))
                .collect();
            if shared.is_empty() {
                return Err(Error::NoSharedDescriptors);
            }
            let ua = a.nearest(cursor)?;
            let row = a.unit(ua).expect("selected unit exists");
            let q = Query::new(shared.iter().map(|&c| (a.columns()[c].clone(), row.values[c])));
            Ok((ua, b.nearest(&q)?))
        }
    }
}
