//! On-disk formats: flat binary grids, CSV tables, JSON documents.
//!
//! Floats are written in their shortest round-trip form. CSV files are UTF-8
//! with LF line endings; provenance goes in leading `#` comment lines.

use std::io::{self, Read, Write};
use std::path::Path;

use lilfields_core::devcheck::VerifyReport;
use lilfields_core::lattice::{LatticeIndex, Rect, ValueGrid};
use lilfields_core::projections::DependenceProfile;
use serde::Serialize;

use crate::RunError;

pub fn fmt_f64(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

/// Header lines embedded in every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub lilfields_version: String,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(config: serde_json::Value) -> Self {
        Provenance { lilfields_version: crate::VERSION.to_string(), config }
    }
}

/// A CSV table under construction.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(provenance: Option<&Provenance>, header: &[&str]) -> Self {
        let mut head = Vec::new();
        if let Some(p) = provenance {
            writeln!(head, "# lilfields {}", p.lilfields_version).expect("in-memory write");
            let cfg = serde_json::to_string(&p.config).expect("JSON value serializes");
            writeln!(head, "# config {cfg}").expect("in-memory write");
        }
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(head);
        writer.write_record(header).expect("in-memory write");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(cells).expect("in-memory write");
    }

    pub fn finish(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// `{"lilfields_version", "config", "result"}`, pretty-printed, trailing LF.
pub fn json_document<T: Serialize>(provenance: &Provenance, result: &T) -> Vec<u8> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        lilfields_version: &'a str,
        config: &'a serde_json::Value,
        result: &'a T,
    }
    let doc = Doc { lilfields_version: &provenance.lilfields_version, config: &provenance.config, result };
    let mut out = serde_json::to_vec_pretty(&doc).expect("results serialize");
    out.push(b'\n');
    out
}

/// Binary grid: `d`, `origin[d]`, `extents[d]` as little-endian `i64`, then
/// the values as little-endian `f64`, last coordinate fastest.
pub fn write_grid_binary<W: Write>(grid: &ValueGrid, mut w: W) -> io::Result<()> {
    w.write_all(&(grid.dim() as i64).to_le_bytes())?;
    for c in grid.origin().coords() {
        w.write_all(&c.to_le_bytes())?;
    }
    for e in grid.extents() {
        w.write_all(&(*e as i64).to_le_bytes())?;
    }
    for v in grid.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_i64<R: Read>(r: &mut R) -> io::Result<i64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(i64::from_le_bytes(b))
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_grid_binary<R: Read>(mut r: R) -> io::Result<ValueGrid> {
    let d = read_i64(&mut r)?;
    if !(1..=16).contains(&d) {
        return Err(invalid(format!("implausible grid dimension {d}")));
    }
    let d = d as usize;
    let origin = (0..d).map(|_| read_i64(&mut r)).collect::<io::Result<Vec<_>>>()?;
    let extents = (0..d).map(|_| read_i64(&mut r)).collect::<io::Result<Vec<_>>>()?;
    if let Some(e) = extents.iter().find(|e| **e < 1) {
        return Err(invalid(format!("nonpositive extent {e}")));
    }
    let hi: Vec<i64> = origin.iter().zip(&extents).map(|(o, e)| o + e - 1).collect();
    let rect = Rect::new(LatticeIndex::new(origin), LatticeIndex::new(hi)).map_err(|e| invalid(e.to_string()))?;
    let n = rect.cardinality() as usize;
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes)?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(invalid(format!("{} trailing bytes after the payload", rest.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    ValueGrid::from_values(rect, values).map_err(|e| invalid(e.to_string()))
}

fn coord_header(d: usize) -> Vec<String> {
    (1..=d).map(|q| format!("i{q}")).collect()
}

/// Columns `i1..id, value`.
pub fn grid_csv(grid: &ValueGrid, provenance: Option<&Provenance>) -> Vec<u8> {
    let mut header = coord_header(grid.dim());
    header.push("value".into());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(provenance, &refs);
    for (p, v) in grid.rect().points().zip(grid.values()) {
        let mut row: Vec<String> = p.coords().iter().map(|c| c.to_string()).collect();
        row.push(fmt_f64(*v));
        t.row(row);
    }
    t.finish()
}

/// Columns `i1..id, delta, se, reps`.
pub fn dependence_csv(profile: &DependenceProfile, provenance: Option<&Provenance>) -> Vec<u8> {
    let d = profile.entries.keys().next().map_or(0, |k| k.dim());
    let mut header = coord_header(d);
    header.extend(["delta", "se", "reps"].map(String::from));
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::new(provenance, &refs);
    for (i, est) in &profile.entries {
        let mut row: Vec<String> = i.coords().iter().map(|c| c.to_string()).collect();
        row.extend([fmt_f64(est.mean), fmt_f64(est.se), profile.reps.to_string()]);
        t.row(row);
    }
    t.finish()
}

/// One row per test point.
pub fn verify_csv(reports: &[VerifyReport], provenance: Option<&Provenance>) -> Vec<u8> {
    let mut t = Table::new(provenance, &["suite", "threshold", "empirical", "se", "bound", "pass", "reps"]);
    for r in reports {
        for p in &r.points {
            t.row([
                r.suite.clone(),
                fmt_f64(p.threshold),
                fmt_f64(p.empirical),
                fmt_f64(p.se),
                fmt_f64(p.bound),
                p.pass.to_string(),
                r.reps.to_string(),
            ]);
        }
    }
    t.finish()
}

/// Numbers from the first column of a text/CSV file. `#` lines are skipped,
/// as is a non-numeric first row (a header).
pub fn read_samples(path: &Path) -> Result<Vec<f64>, RunError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| RunError::Io(format!("cannot read samples from {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| RunError::Validation(format!("{}: {e}", path.display())))?;
        let Some(cell) = rec.get(0).filter(|c| !c.is_empty()) else { continue };
        match cell.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if k == 0 => continue,
            Err(_) => {
                return Err(RunError::Validation(format!(
                    "{}: record {} is not a number: {cell:?}",
                    path.display(),
                    k + 1
                )))
            }
        }
    }
    Ok(out)
}
