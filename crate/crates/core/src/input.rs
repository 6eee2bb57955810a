//! Numeric input for the `track` and `drift` commands: either one value per
//! line, or a CSV file with a header row and a named column.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// Open `path`, with `-` meaning standard input.
pub fn open_input(path: &str) -> Result<Box<dyn BufRead>> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(Path::new(path)).map_err(|e| Error::io(path, e))?;
    Ok(Box::new(BufReader::new(file)))
}

/// Read every value up front. Blank lines are skipped in line mode.
pub fn read_values<R: Read>(reader: R, source: &str, column: Option<&str>) -> Result<Vec<f64>> {
    match column {
        None => read_lines(BufReader::new(reader), source),
        Some(name) => read_column(reader, source, name),
    }
}

fn parse_value(text: &str, source: &str, line: usize) -> Result<f64> {
    let text = text.trim();
    text.parse::<f64>().map_err(|_| Error::Parse {
        path: source.to_string(),
        line,
        message: format!("cannot parse {text:?} as a number"),
    })
}

fn read_lines<R: BufRead>(reader: R, source: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_value(&line, source, i + 1)?);
    }
    Ok(out)
}

fn read_column<R: Read>(reader: R, source: &str, name: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let idx = rdr
        .headers()?
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Parse {
            path: source.to_string(),
            line: 1,
            message: format!("no column named {name:?}"),
        })?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = record.get(idx).ok_or_else(|| Error::Parse {
            path: source.to_string(),
            line,
            message: format!("missing column {name:?}"),
        })?;
        out.push(parse_value(field, source, line)?);
    }
    Ok(out)
}
