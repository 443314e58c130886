//! Output formats. Every float is written with 17 significant digits so
//! that files re-import to the exact values.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use strip_spectra_core::experiments::Table;
use strip_spectra_core::linalg::CsrMatrix;
use strip_spectra_core::stripgeom::SurfaceSamples;

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn table_to_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
    }
    Ok(w.into_inner()?)
}

pub fn table_from_csv(name: &str, bytes: &[u8]) -> Result<Table> {
    let mut r = csv::Reader::from_reader(bytes);
    let columns: Vec<String> = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>().with_context(|| format!("bad number `{f}`")))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { name: name.into(), columns, rows })
}

/// Whitespace-separated columns under a `#` header line.
pub fn table_to_dat(table: &Table) -> Vec<u8> {
    let mut out = format!("# {}\n", table.columns.join(" "));
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out.into_bytes()
}

/// Wavefront OBJ of the sampled surface, padding 2D points with `z = 0`.
pub fn surface_to_obj(surface: &SurfaceSamples) -> Vec<u8> {
    let mut out = String::from("# ruled strip surface\n");
    for p in &surface.points {
        let c: Vec<String> = (0..3.max(p.len())).map(|k| fmt_f64(p.get(k).copied().unwrap_or(0.0))).collect();
        out.push_str(&format!("v {}\n", c[..3].join(" ")));
    }
    for [a, b, c] in surface.triangles() {
        out.push_str(&format!("f {} {} {}\n", a + 1, b + 1, c + 1));
    }
    out.into_bytes()
}

/// Matrix Market coordinate format, lower triangle of a symmetric matrix.
pub fn csr_to_matrix_market(m: &CsrMatrix) -> Vec<u8> {
    let entries: Vec<(usize, usize, f64)> = m.triplets().filter(|(i, j, _)| j <= i).collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{} {} {}\n", m.dim(), m.dim(), entries.len()));
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {}\n", i + 1, j + 1, fmt_f64(v)));
    }
    out.into_bytes()
}

/// Diagonal matrix in Matrix Market coordinate format.
pub fn diagonal_to_matrix_market(d: &[f64]) -> Vec<u8> {
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{} {} {}\n", d.len(), d.len(), d.len()));
    for (i, v) in d.iter().enumerate() {
        out.push_str(&format!("{} {} {}\n", i + 1, i + 1, fmt_f64(*v)));
    }
    out.into_bytes()
}

/// Collects the files written by one run, relative to the output directory.
#[derive(Debug)]
pub struct OutputDir {
    pub root: PathBuf,
    pub written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(name), bytes)?;
        let digest = sha256_hex(bytes);
        match self.written.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = digest,
            None => self.written.push((name.into(), digest)),
        }
        Ok(())
    }

    pub fn json<T: serde::Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// `<stem>.csv` and, for figure-like tables, `<stem>.dat`.
    pub fn table(&mut self, stem: &str, table: &Table, plot: bool) -> Result<()> {
        self.write(&format!("{stem}.csv"), &table_to_csv(table)?)?;
        if plot {
            self.write(&format!("{stem}.dat"), &table_to_dat(table))?;
        }
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, text.as_bytes())
    }
}
