use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Weight kept by the running average per episode.
pub const SMOOTHING_DECAY: f64 = 0.99;

pub const METRICS_HEADER: [&str; 9] = [
    "episode",
    "omega_T",
    "reward",
    "actions_taken",
    "phase_changes",
    "departures",
    "epsilon",
    "beta",
    "wallclock_ms",
];

/// One row of a metrics file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    #[serde(rename = "omega_T")]
    pub omega_t: u64,
    pub reward: f64,
    pub actions_taken: u32,
    pub phase_changes: u32,
    pub departures: u32,
    /// Exploration rate, or the mean noise scale when noisy layers explore.
    pub epsilon: f64,
    pub beta: f64,
    pub wallclock_ms: u64,
}

pub struct MetricsWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl MetricsWriter<File> {
    pub fn create(path: &Path) -> Result<Self, HarnessError> {
        let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(MetricsWriter::new(file))
    }
}

impl<W: Write> MetricsWriter<W> {
    pub fn new(w: W) -> Self {
        MetricsWriter { inner: csv::WriterBuilder::new().has_headers(true).from_writer(w) }
    }

    pub fn write(&mut self, record: &EpisodeRecord) -> Result<(), HarnessError> {
        self.inner.serialize(record)?;
        self.inner.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W, HarnessError> {
        self.inner.into_inner().map_err(|e| HarnessError::Runtime(e.to_string()))
    }
}

/// Parses a metrics file, reporting the line of the first malformed row.
pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    parse_metrics(file).map_err(|e| match e {
        HarnessError::Parse { line, message, .. } => HarnessError::Parse { file: path.display().to_string(), line, message },
        other => other,
    })
}

pub fn parse_metrics<R: std::io::Read>(r: R) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let parse_err = |line: u64, message: String| HarnessError::Parse { file: "<input>".into(), line, message };
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.iter().ne(METRICS_HEADER.iter().copied()) {
        return Err(parse_err(1, format!("unexpected header {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<EpisodeRecord>() {
        match row {
            Ok(r) => out.push(r),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(parse_err(line, e.to_string()));
            }
        }
    }
    Ok(out)
}

/// Bias-corrected exponential average: `m_e = 0.99 m_{e-1} + 0.01 x_e` from
/// `m_{-1} = 0`, reported as `s_e = m_e / (1 - 0.99^(e+1))`. Every `s_e` is a
/// weighted mean of `x_0..=x_e`, so the first episode does not dominate.
pub fn smooth(raw: &[f64]) -> Vec<f64> {
    let mut m = 0.0;
    let mut decay_pow = 1.0;
    raw.iter()
        .map(|&x| {
            m = SMOOTHING_DECAY * m + (1.0 - SMOOTHING_DECAY) * x;
            decay_pow *= SMOOTHING_DECAY;
            m / (1.0 - decay_pow)
        })
        .collect()
}

pub fn write_smoothed(path: &Path, raw: &[f64]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["episode", "omega_T", "smoothed"])?;
    for (i, (x, s)) in raw.iter().zip(smooth(raw)).enumerate() {
        w.write_record([i.to_string(), x.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
