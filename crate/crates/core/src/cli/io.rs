//! Versioned CSV and JSON files and portable graymap rasters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::CliError;
use crate::lattice::{DyadicTime, Value};

/// Bumped whenever a column or field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub fn schema(kind: &str) -> String {
    format!("msrg.{kind}/{SCHEMA_VERSION}")
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Buffered CSV writer whose first line is `# schema=...`.
pub struct CsvOut {
    path: PathBuf,
    w: BufWriter<File>,
}

impl CsvOut {
    pub fn create(path: &Path, kind: &str, extra: &str, columns: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut out = Self {
            path: path.to_path_buf(),
            w: BufWriter::new(file),
        };
        let meta = if extra.is_empty() {
            format!("# schema={}", schema(kind))
        } else {
            format!("# schema={} {extra}", schema(kind))
        };
        out.line(&meta)?;
        out.line(&columns.join(","))?;
        Ok(out)
    }

    pub fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.w, "{s}").map_err(|e| io_err(&self.path, e))
    }

    pub fn row<I: IntoIterator<Item = S>, S: std::fmt::Display>(&mut self, cells: I) -> Result<(), CliError> {
        let mut first = true;
        for c in cells {
            if !first {
                write!(self.w, ",").map_err(|e| io_err(&self.path, e))?;
            }
            first = false;
            write!(self.w, "{c}").map_err(|e| io_err(&self.path, e))?;
        }
        writeln!(self.w).map_err(|e| io_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| io_err(&self.path, e))
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: String,
    #[serde(rename = "data")]
    body: &'a T,
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<(), CliError> {
    let env = Envelope {
        schema: schema(kind),
        body,
    };
    let text = serde_json::to_string_pretty(&env)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Binary `P5` graymap, one byte per pixel, rows top to bottom.
pub fn write_pgm(path: &Path, width: usize, height: usize, pixels: &[u8]) -> Result<(), CliError> {
    debug_assert_eq!(pixels.len(), width * height);
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write!(w, "P5\n{width} {height}\n255\n").map_err(|e| io_err(path, e))?;
    w.write_all(pixels).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Black for one, white for zero; phases as `255 - u / 2^56`.
pub fn gray(v: Value) -> u8 {
    match v {
        Value::Bit(true) => 0,
        Value::Bit(false) => 255,
        Value::Phase(u) => 255 - (u >> 56) as u8,
    }
}

/// Gray level of a mean in `[0, 1]`, black for one.
pub fn gray_mean(m: f64) -> u8 {
    (255.0 * (1.0 - m.clamp(0.0, 1.0))).round() as u8
}

/// Bits as `0`/`1`, phases as their 64-bit fixed-point integer.
pub fn value_cell(v: Value) -> String {
    match v {
        Value::Bit(b) => u8::from(b).to_string(),
        Value::Phase(u) => u.to_string(),
    }
}

/// `(t_num, t_level)` in normal form.
pub fn time_cells(t: &DyadicTime) -> (String, u32) {
    (t.numerator().to_string(), t.level())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let mut c = CsvOut::create(&p, "lattice", "space=bit", &["n", "value"]).unwrap();
        c.row([1, 0]).unwrap();
        c.finish().unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "# schema=msrg.lattice/1 space=bit\nn,value\n1,0\n");
    }

    #[test]
    fn pgm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.pgm");
        write_pgm(&p, 2, 1, &[0, 255]).unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"P5\n2 1\n255\n\x00\xff");
    }
}
