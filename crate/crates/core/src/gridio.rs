//! `FKG1` section files and CSV reports.
//!
//! `FKG1` layout, all little-endian:
//!
//! | offset | size | field                 |
//! |-------:|-----:|-----------------------|
//! | 0      | 4    | magic `b"FKG1"`       |
//! | 4      | 4    | `n_t` (u32)           |
//! | 8      | 4    | `n_x` (u32)           |
//! | 12     | 8    | `dt` (f64, s)         |
//! | 20     | 8    | `dx` (f64, m)         |
//! | 28     | 8    | `t_start` (f64, s)    |
//! | 36     | 8    | `x_start` (f64, m)    |
//! | 44     | 8    | `h` (f64, m)          |
//!
//! The header occupies 52 bytes as laid out above. The payload follows: `n_x`
//! traces in increasing `x`, each `n_t` f32 samples in increasing `t`.

use std::io::{self, Read, Write};

use crate::error::{DmoError, Result};
use crate::fk::{Geometry, Section};

pub const MAGIC: &[u8; 4] = b"FKG1";
pub const HEADER_LEN: usize = 4 + 4 + 4 + 5 * 8;

/// Write `sec`; returns the number of bytes written.
pub fn write_section<W: Write>(sec: &Section, mut sink: W) -> Result<usize> {
    let g = &sec.geom;
    let dim = |n: usize, name: &'static str| {
        u32::try_from(n).map_err(|_| DmoError::invalid(name, format!("{n} does not fit in 32 bits")))
    };
    let mut header = Vec::with_capacity(HEADER_LEN);
    header.extend_from_slice(MAGIC);
    header.extend_from_slice(&dim(g.n_t, "n_t")?.to_le_bytes());
    header.extend_from_slice(&dim(g.n_x, "n_x")?.to_le_bytes());
    for v in [g.dt, g.dx, g.t_start, g.x_start, g.h] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    sink.write_all(&header)?;

    let mut payload = Vec::with_capacity(4 * sec.data.len());
    for &v in &sec.data {
        payload.extend_from_slice(&(v as f32).to_le_bytes());
    }
    sink.write_all(&payload)?;
    sink.flush()?;
    Ok(header.len() + payload.len())
}

/// Section encoded in memory.
pub fn section_bytes(sec: &Section) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_section(sec, &mut buf)?;
    Ok(buf)
}

fn read_exact_or<R: Read>(source: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    source.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => DmoError::Format(format!("truncated {what}")),
        _ => DmoError::Io(e),
    })
}

pub fn read_section<R: Read>(mut source: R) -> Result<Section> {
    let mut header = [0u8; HEADER_LEN];
    read_exact_or(&mut source, &mut header, "header")?;
    if &header[..4] != MAGIC {
        return Err(DmoError::Format(format!("bad magic {:?}", &header[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
    let (n_t, n_x) = (u32_at(4), u32_at(8));
    if n_t == 0 || n_x == 0 {
        return Err(DmoError::Format(format!("zero dimension {n_t}x{n_x}")));
    }
    let geom =
        Geometry { n_t, n_x, dt: f64_at(12), dx: f64_at(20), t_start: f64_at(28), x_start: f64_at(36), h: f64_at(44) };
    geom.validate().map_err(|e| DmoError::Format(e.to_string()))?;

    let count = n_t
        .checked_mul(n_x)
        .and_then(|c| c.checked_mul(4))
        .ok_or_else(|| DmoError::Format("payload size overflows".into()))?;
    let mut payload = Vec::new();
    source.take(count as u64).read_to_end(&mut payload)?;
    if payload.len() != count {
        return Err(DmoError::Format(format!("truncated payload: {} of {count} bytes", payload.len())));
    }
    let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    Section::new(geom, data)
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(s) => s.parse().ok(),
        }
    }

    fn render(&self) -> String {
        match self {
            // Shortest representation that parses back to the same f64.
            Cell::Num(v) if *v == 0.0 => "0".to_owned(),
            Cell::Num(v) if v.is_finite() && !(1e-5..1e16).contains(&v.abs()) => format!("{v:e}"),
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Named-column table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(DmoError::invalid(
                "table row",
                format!("has {} cells, table has {} columns", row.len(), self.columns.len()),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }
}

/// Write `table` as CSV with a header row; returns the byte count.
pub fn write_csv<W: Write>(table: &Table, sink: W) -> Result<usize> {
    let mut counter = CountingWriter { inner: sink, count: 0 };
    {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut counter);
        w.write_record(&table.columns)?;
        for row in &table.rows {
            if row.len() != table.columns.len() {
                return Err(DmoError::invalid("table", "rows must match the header width"));
            }
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
    }
    Ok(counter.count)
}

/// Parse CSV written by [`write_csv`]; numeric-looking fields become [`Cell::Num`].
pub fn read_csv<R: Read>(source: R) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let columns = r.headers()?.iter().map(str::to_owned).collect();
    let mut table = Table { columns, rows: Vec::new() };
    for rec in r.records() {
        let row = rec?
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(v) => Cell::Num(v),
                Err(_) => Cell::Text(f.to_owned()),
            })
            .collect();
        table.push(row)?;
    }
    Ok(table)
}

struct CountingWriter<W> {
    inner: W,
    count: usize,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.count += n;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}
