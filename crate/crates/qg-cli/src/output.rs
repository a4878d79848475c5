//! Output plumbing: line sinks, JSONL/CSV emitters, the integer encoding
//! rule, and the machine-readable error objects with their exit codes.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use num_traits::ToPrimitive;
use qg_core::Int;
use serde_json::{json, Value};

/// Largest integer magnitude emitted as a bare JSON number; anything wider
/// than 53 bits goes out as a decimal string so readers never lose digits.
const JSON_INT_MAX: i64 = (1 << 53) - 1;

/// CLI failure with its exit code: usage errors exit 2, everything else 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Invariant(String),
    Io(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Invariant(_) => "invariant",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Invariant(m) | CliError::Io(m) => m,
        }
    }

    /// One-line JSON error object for stderr.
    pub fn json_line(&self) -> String {
        json!({"error": {"kind": self.kind(), "message": self.message()}}).to_string()
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Validation failures on user-supplied values are usage errors.
pub fn input_err(e: qg_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

/// Failures raised by the core on data it produced itself.
pub fn invariant_err(e: qg_core::Error) -> CliError {
    CliError::Invariant(e.to_string())
}

/// Buffered line writer over stdout or a file.
pub struct Sink {
    inner: BufWriter<Box<dyn Write>>,
}

impl Sink {
    pub fn open(out: Option<&PathBuf>) -> CliResult<Self> {
        let raw: Box<dyn Write> = match out {
            Some(path) => Box::new(File::create(path).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", path.display()))
            })?),
            None => Box::new(io::stdout()),
        };
        Ok(Sink { inner: BufWriter::new(raw) })
    }

    pub fn line(&mut self, s: &str) -> CliResult<()> {
        self.inner.write_all(s.as_bytes())?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.inner.flush()?;
        Ok(())
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.inner.write(buf)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Record writer in the selected format. Every record is built as a JSON
/// object plus a flat CSV projection; JSONL keeps the full object, CSV keeps
/// the projection under a fixed header.
pub enum Emitter {
    Jsonl(Sink),
    Csv(csv::Writer<Sink>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Jsonl,
    Csv,
}

impl Emitter {
    pub fn new(format: Format, sink: Sink, csv_header: &[&str]) -> CliResult<Self> {
        match format {
            Format::Jsonl => Ok(Emitter::Jsonl(sink)),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                w.write_record(csv_header)?;
                Ok(Emitter::Csv(w))
            }
        }
    }

    pub fn emit(&mut self, record: &Value, csv_row: &[String]) -> CliResult<()> {
        match self {
            Emitter::Jsonl(sink) => sink.line(&record.to_string()),
            Emitter::Csv(w) => {
                w.write_record(csv_row)?;
                Ok(())
            }
        }
    }

    pub fn finish(self) -> CliResult<()> {
        match self {
            Emitter::Jsonl(sink) => sink.finish(),
            Emitter::Csv(w) => {
                let sink = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
                sink.finish()
            }
        }
    }
}

/// i64 under the 53-bit rule.
pub fn json_i64(n: i64) -> Value {
    if (-JSON_INT_MAX..=JSON_INT_MAX).contains(&n) {
        Value::from(n)
    } else {
        Value::from(n.to_string())
    }
}

/// Arbitrary-precision integer under the 53-bit rule.
pub fn json_int(n: &Int) -> Value {
    match n.to_i64() {
        Some(v) => json_i64(v),
        None => Value::from(n.to_string()),
    }
}

pub fn json_int_slice(ns: &[Int]) -> Value {
    Value::from(ns.iter().map(json_int).collect::<Vec<_>>())
}

/// Space-joined decimal rendering for CSV cells holding vectors.
pub fn csv_ints(ns: &[Int]) -> String {
    ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" ")
}
