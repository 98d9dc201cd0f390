//! Labeled-sequence CSV.
//!
//! One row per time step, header `x_1,...,x_d,label`, no quoting. Lines
//! starting with `#` carry `key=value` metadata and are skipped on input.
//! Discrete observations use a single integer column `x_1`. Floats are
//! written in shortest round-trip form, so write followed by ingest is
//! bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use hmmem::{ClassLabel, LabeledSequence, Observation, ObservationSpace};

use crate::error::{CliError, CliResult};
use crate::table::format_float;

pub fn header(d: usize) -> String {
    let mut cols: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    cols.push("label".into());
    cols.join(",")
}

pub fn write_labeled_csv<W: Write>(
    mut w: W,
    seq: &LabeledSequence,
    metadata: &BTreeMap<String, String>,
) -> std::io::Result<()> {
    for (k, v) in metadata {
        writeln!(w, "# {k}={v}")?;
    }
    let d = seq.observations().first().map_or(1, |o| match o {
        Observation::Symbol(_) => 1,
        Observation::Vector(v) => v.len(),
    });
    writeln!(w, "{}", header(d))?;
    let mut line = String::new();
    for (x, y) in seq.observations().iter().zip(seq.labels()) {
        line.clear();
        match x {
            Observation::Symbol(s) => line.push_str(&s.to_string()),
            Observation::Vector(v) => {
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push_str(&format_float(*c));
                }
            }
        }
        writeln!(w, "{line},{y}")?;
    }
    Ok(())
}

/// Reads a labeled sequence from `path`; see [`parse_labeled_csv`].
pub fn ingest_labeled_csv(path: &Path, classes: usize, space: ObservationSpace) -> CliResult<LabeledSequence> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_labeled_csv(file, classes, space)
}

/// Parses a labeled sequence, checking the header, every value and every
/// label against `classes` and `space`. Errors carry 1-based line numbers.
pub fn parse_labeled_csv<R: Read>(input: R, classes: usize, space: ObservationSpace) -> CliResult<LabeledSequence> {
    let d = space.coord_len();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .quoting(false)
        .flexible(true)
        .from_reader(input);
    let head = reader.headers().map_err(csv_error)?.clone();
    let want = header(d);
    let got: Vec<&str> = head.iter().map(str::trim).collect();
    if got.join(",") != want {
        let line = head.position().map_or(1, |p| p.line());
        return Err(CliError::Parse { line, message: format!("expected header {want:?}, found {:?}", got.join(",")) });
    }
    let mut observations = Vec::new();
    let mut labels = Vec::new();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record).map_err(csv_error)? {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != d + 1 {
            return Err(CliError::Parse { line, message: format!("expected {} fields, found {}", d + 1, record.len()) });
        }
        let field = |i: usize| record[i].trim();
        let label: usize = field(d)
            .parse()
            .map_err(|_| CliError::Parse { line, message: format!("invalid label {:?}", field(d)) })?;
        if label >= classes {
            return Err(CliError::LabelOutOfRange { line, label, classes });
        }
        let obs = match space {
            ObservationSpace::Discrete { alphabet_size } => {
                let s: usize = field(0)
                    .parse()
                    .map_err(|_| CliError::Parse { line, message: format!("invalid symbol {:?}", field(0)) })?;
                if s >= alphabet_size {
                    return Err(CliError::Parse {
                        line,
                        message: format!("symbol {s} outside alphabet of size {alphabet_size}"),
                    });
                }
                Observation::Symbol(s)
            }
            ObservationSpace::Continuous { .. } => {
                let v = (0..d)
                    .map(|i| match field(i).parse::<f64>() {
                        Ok(x) if x.is_finite() => Ok(x),
                        _ => Err(CliError::Parse { line, message: format!("invalid number {:?}", field(i)) }),
                    })
                    .collect::<CliResult<Vec<f64>>>()?;
                Observation::Vector(v)
            }
        };
        observations.push(obs);
        labels.push(ClassLabel(label));
    }
    if observations.is_empty() {
        return Err(CliError::EmptyData);
    }
    Ok(LabeledSequence::new(observations, labels)?)
}

fn csv_error(e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    CliError::Parse { line, message: e.to_string() }
}
