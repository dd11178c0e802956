use std::fmt;
use std::io::{BufRead, Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ActivityClass, PipelineKind, RrEstimate};

pub const CSV_HEADER: [&str; 6] = [
    "window_start_s",
    "window_end_s",
    "pipeline",
    "activity",
    "rr_bpm",
    "valid",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Jsonl => "jsonl",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(Error::Config(format!("unknown format '{other}', expected csv or jsonl"))),
        }
    }
}

/// One output row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Record {
    window_start_s: f64,
    window_end_s: f64,
    pipeline: Option<PipelineKind>,
    activity: ActivityClass,
    rr_bpm: Option<f64>,
    valid: bool,
}

impl From<&RrEstimate> for Record {
    fn from(e: &RrEstimate) -> Self {
        Self {
            window_start_s: e.window_start,
            window_end_s: e.window_end,
            pipeline: e.pipeline,
            activity: e.activity,
            rr_bpm: if e.valid { e.rr } else { None },
            valid: e.valid,
        }
    }
}

impl From<Record> for RrEstimate {
    fn from(r: Record) -> Self {
        RrEstimate {
            window_start: r.window_start_s,
            window_end: r.window_end_s,
            pipeline: r.pipeline,
            activity: r.activity,
            rr: r.rr_bpm,
            valid: r.valid,
            channel_detail: [None, None],
        }
    }
}

fn write_err(e: impl fmt::Display) -> Error {
    Error::input(None, format!("writing results: {e}"))
}

/// Writes estimates in window order. CSV output always carries the header.
pub fn emit_results<W: Write>(estimates: &[RrEstimate], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(CSV_HEADER).map_err(write_err)?;
            for e in estimates {
                w.serialize(Record::from(e)).map_err(write_err)?;
            }
            w.flush().map_err(write_err)
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for e in estimates {
                serde_json::to_writer(&mut out, &Record::from(e)).map_err(write_err)?;
                out.write_all(b"\n").map_err(write_err)?;
            }
            out.flush().map_err(write_err)
        }
    }
}

pub fn parse_csv<R: Read>(input: R) -> Result<Vec<RrEstimate>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::input(None, e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::input(None, format!("unexpected CSV header {header:?}")));
    }
    r.deserialize::<Record>()
        .map(|rec| rec.map(RrEstimate::from).map_err(|e| Error::input(None, e.to_string())))
        .collect()
}

pub fn parse_jsonl<R: BufRead>(input: R) -> Result<Vec<RrEstimate>> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|(n, line)| {
            let line = line.map_err(|e| Error::input(None, e.to_string()))?;
            serde_json::from_str::<Record>(&line)
                .map(RrEstimate::from)
                .map_err(|e| Error::input(None, format!("line {}: {e}", n + 1)))
        })
        .collect()
}
