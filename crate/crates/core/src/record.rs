//! Measurement records and their text file format.
//!
//! ```text
//! {"format":"pauli-lre/1","n":2,"shots":100,"seed":7,"state":"maxmixed"}
//! XX 24,26,25,25
//! XY 22,31,21,26
//! ...
//! ZZ 27,23,26,24
//! ```
//!
//! One line per setting in ascending setting order, counts in ascending
//! outcome order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LreError, Result};
use crate::pauli::{QubitCount, SettingIndex};
use crate::reconstruct::SettingFrequencies;

pub const RECORD_FORMAT: &str = "pauli-lre/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    n: QubitCount,
    shots: u64,
    seed: Option<u64>,
    state: Option<String>,
    counts: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    n: u32,
    shots: u64,
    seed: Option<u64>,
    state: Option<String>,
}

impl MeasurementRecord {
    /// `counts` holds `3^n` consecutive rows of `2^n` outcome counts.
    pub fn new(
        n: QubitCount,
        shots: u64,
        seed: Option<u64>,
        state: Option<String>,
        counts: Vec<u64>,
    ) -> Result<Self> {
        if shots == 0 {
            return Err(LreError::InvalidArgument(
                "shots per setting must be >= 1".into(),
            ));
        }
        let d = n.dim();
        let expected = n.num_settings() * d;
        if counts.len() != expected {
            return Err(LreError::DimensionMismatch {
                expected,
                actual: counts.len(),
            });
        }
        for (w, row) in counts.chunks(d).enumerate() {
            let total: u64 = row.iter().sum();
            if total != shots {
                return Err(LreError::InvalidArgument(format!(
                    "setting {} counts sum to {total}, expected {shots}",
                    SettingIndex(w as u64).label(n)
                )));
            }
        }
        Ok(Self {
            n,
            shots,
            seed,
            state,
            counts,
        })
    }

    pub fn qubits(&self) -> QubitCount {
        self.n
    }

    /// Shots per setting.
    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn state(&self) -> Option<&str> {
        self.state.as_deref()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn setting_counts(&self, w: SettingIndex) -> &[u64] {
        let d = self.n.dim();
        &self.counts[w.0 as usize * d..(w.0 as usize + 1) * d]
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            format: RECORD_FORMAT.to_string(),
            n: self.n.get(),
            shots: self.shots,
            seed: self.seed,
            state: self.state.clone(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        let mut line = String::new();
        for (w, row) in self.counts.chunks(self.n.dim()).enumerate() {
            line.clear();
            line.push_str(&SettingIndex(w as u64).label(self.n));
            line.push(' ');
            for (s, c) in row.iter().enumerate() {
                if s > 0 {
                    line.push(',');
                }
                line.push_str(&c.to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let err = |line: usize, message: String| LreError::RecordParse { line, message };

        let first = lines
            .next()
            .ok_or_else(|| err(1, "empty file".into()))?
            .map_err(|e| line_error(1, e))?;
        let (header, n) = parse_header(&first)?;
        let d = n.dim();
        let settings = n.num_settings();
        let mut counts = Vec::with_capacity(settings * d);

        let mut seen = 0usize;
        for (k, line) in lines.enumerate() {
            let lineno = k + 2;
            let line = line.map_err(|e| line_error(lineno, e))?;
            if line.is_empty() && seen == settings {
                continue;
            }
            if seen == settings {
                return Err(err(
                    lineno,
                    format!("extra line; n = {} implies {settings} setting lines", n),
                ));
            }
            let expected = SettingIndex(seen as u64).label(n);
            let (label, body) = line
                .split_once(' ')
                .ok_or_else(|| err(lineno, "expected `<setting> <counts>`".into()))?;
            if label != expected {
                let why = match SettingIndex::parse_label(label) {
                    Some(_) if label.len() == n.get() as usize => "out of order",
                    _ => "invalid setting",
                };
                return Err(err(
                    lineno,
                    format!("setting `{label}` {why}; expected `{expected}`"),
                ));
            }
            let before = counts.len();
            for field in body.split(',') {
                let c: u64 = field
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("setting {label}: bad count `{field}`")))?;
                counts.push(c);
            }
            let got = counts.len() - before;
            if got != d {
                return Err(err(
                    lineno,
                    format!("setting {label}: expected {d} counts, found {got}"),
                ));
            }
            let total: u64 = counts[before..].iter().sum();
            if total != header.shots {
                return Err(err(
                    lineno,
                    format!(
                        "setting {label}: counts sum to {total}, expected {}",
                        header.shots
                    ),
                ));
            }
            seen += 1;
        }
        if seen != settings {
            return Err(err(
                seen + 2,
                format!("found {seen} setting lines, n = {} implies {settings}", n),
            ));
        }
        Self::new(n, header.shots, header.seed, header.state, counts)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// Qubit count and shots per setting from the header line alone.
    pub fn read_header(path: impl AsRef<Path>) -> Result<(QubitCount, u64)> {
        let mut first = String::new();
        BufReader::new(File::open(path)?)
            .read_line(&mut first)
            .map_err(|e| line_error(1, e))?;
        let (header, n) = parse_header(first.trim_end_matches(['\n', '\r']))?;
        Ok((n, header.shots))
    }
}

fn line_error(line: usize, e: std::io::Error) -> LreError {
    if e.kind() == std::io::ErrorKind::InvalidData {
        LreError::RecordParse {
            line,
            message: "not valid UTF-8".into(),
        }
    } else {
        LreError::Io(e)
    }
}

fn parse_header(first: &str) -> Result<(Header, QubitCount)> {
    let err = |message: String| LreError::RecordParse { line: 1, message };
    if first.is_empty() {
        return Err(err("empty file".into()));
    }
    let header: Header =
        serde_json::from_str(first).map_err(|e| err(format!("malformed header: {e}")))?;
    if header.format != RECORD_FORMAT {
        return Err(err(format!("unsupported format `{}`", header.format)));
    }
    let n = QubitCount::new(header.n).map_err(|e| err(e.to_string()))?;
    if header.shots == 0 {
        return Err(err("shots must be >= 1".into()));
    }
    Ok((header, n))
}

impl SettingFrequencies for MeasurementRecord {
    fn qubits(&self) -> QubitCount {
        self.n
    }

    fn frequencies_into(&self, w: SettingIndex, out: &mut [f64]) -> Result<()> {
        let scale = 1.0 / self.shots as f64;
        for (o, &c) in out.iter_mut().zip(self.setting_counts(w)) {
            *o = c as f64 * scale;
        }
        Ok(())
    }
}
