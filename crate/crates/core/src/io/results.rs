//! Experiment result tables and atomic file output.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::analysis::WelfareReport;
use crate::error::{Error, Result};
use crate::rational::Rational;

pub const RESULT_HEADER: [&str; 7] = [
    "instance",
    "mechanism",
    "seed",
    "expected_sw",
    "opt",
    "ratio",
    "wall_ms",
];

/// One line of a result table. Numbers are written as exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultRow {
    pub instance: String,
    pub mechanism: String,
    /// `None` for exact enumeration (written `exact`).
    pub seed: Option<u64>,
    pub expected_sw: Rational,
    pub opt: Rational,
    pub ratio: Option<Rational>,
    pub wall_ms: Option<u128>,
}

impl ResultRow {
    pub fn from_report(instance: &str, report: &WelfareReport, seed: Option<u64>, wall_ms: Option<u128>) -> Self {
        ResultRow {
            instance: instance.to_string(),
            mechanism: report.mechanism.name().to_string(),
            seed,
            expected_sw: report.expected_sw.clone(),
            opt: report.opt.clone(),
            ratio: report.ratio(),
            wall_ms,
        }
    }

    fn record(&self) -> [String; 7] {
        [
            self.instance.clone(),
            self.mechanism.clone(),
            self.seed.map_or("exact".to_string(), |s| s.to_string()),
            self.expected_sw.to_string(),
            self.opt.to_string(),
            self.ratio.as_ref().map_or(String::new(), Rational::to_string),
            self.wall_ms.map_or(String::new(), |t| t.to_string()),
        ]
    }

    fn from_record(line: usize, rec: &csv::StringRecord) -> Result<Self> {
        let bad = |what: &str| Error::Parse {
            line,
            message: format!("bad {what} field"),
        };
        if rec.len() != RESULT_HEADER.len() {
            return Err(Error::Parse {
                line,
                message: format!("{} fields, expected {}", rec.len(), RESULT_HEADER.len()),
            });
        }
        fn optional(s: &str) -> Option<&str> {
            (!s.is_empty()).then_some(s)
        }
        Ok(ResultRow {
            instance: rec[0].to_string(),
            mechanism: rec[1].to_string(),
            seed: match &rec[2] {
                "exact" => None,
                s => Some(s.parse().map_err(|_| bad("seed"))?),
            },
            expected_sw: rec[3].parse().map_err(|_| bad("expected_sw"))?,
            opt: rec[4].parse().map_err(|_| bad("opt"))?,
            ratio: optional(&rec[5])
                .map(|s| s.parse().map_err(|_| bad("ratio")))
                .transpose()?,
            wall_ms: optional(&rec[6])
                .map(|s| s.parse().map_err(|_| bad("wall_ms")))
                .transpose()?,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse {
        line: e.position().map_or(1, |p| p.line() as usize),
        message: e.to_string(),
    }
}

/// Renders rows, with the header line when `header` is set.
pub fn render_rows(rows: &[ResultRow], header: bool) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if header {
        w.write_record(RESULT_HEADER).expect("in-memory write");
    }
    for r in rows {
        w.write_record(r.record()).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// Parses a table written by [`render_rows`] with its header.
pub fn parse_rows(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must be `{}`", RESULT_HEADER.join(",")),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_error)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            ResultRow::from_record(line, &rec)
        })
        .collect()
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Appends rows to the table at `path`, creating it (with header) if it
/// does not exist. The existing table must have the expected header.
pub fn append_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut text = match fs::read_to_string(path) {
        Ok(existing) if !existing.is_empty() => {
            parse_rows(&existing)?;
            existing
        }
        Ok(_) => render_rows(&[], true),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => render_rows(&[], true),
        Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&render_rows(rows, false));
    write_atomic(path, text.as_bytes())
}
