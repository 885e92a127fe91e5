//! Artifact writers: CSV tables with fixed columns, JSON summaries with a
//! schema-version field, and the flat binary layout for spectral fields.
//! All output is byte-deterministic for a given configuration and seed.

use crate::error::{Error, Result};
use crate::solver::SpaceTimeField;
use crate::spectral::SpectralField;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed-precision float formatting shared by every CSV writer.
pub fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.12e}")
    }
}

pub fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)
        .map_err(|e| Error::InvalidParameter(format!("writing {}: {e}", path.display())))
}

/// Serialises `body` together with the schema version.
pub fn write_summary<T: Serialize>(path: &Path, subcommand: &str, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        schema_version: u32,
        subcommand: &'a str,
        #[serde(flatten)]
        body: &'a T,
    }
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        subcommand,
        body,
    };
    let text = serde_json::to_string_pretty(&env)
        .map_err(|e| Error::InvalidParameter(format!("serialising summary: {e}")))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| Error::InvalidParameter(format!("writing {}: {e}", path.display())))
}

/// Flat binary layout: header u32 d, u32 n, f64 box_half, u32 slice count,
/// then the time stamps and each slice's row-major values, little-endian.
pub fn write_field_binary(path: &Path, field: &SpaceTimeField) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    let d = field.d() as u32;
    let n = field.n() as u32;
    buf.extend_from_slice(&d.to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&field.box_half().to_le_bytes());
    buf.extend_from_slice(&(field.slices.len() as u32).to_le_bytes());
    for &t in &field.times {
        buf.extend_from_slice(&t.to_le_bytes());
    }
    for slice in &field.slices {
        for &v in slice.values() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf)
        .map_err(|e| Error::InvalidParameter(format!("writing {}: {e}", path.display())))
}

pub fn read_field_binary(path: &Path) -> Result<SpaceTimeField> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidParameter(format!("reading {}: {e}", path.display())))?;
    let mut cur = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        if cur + n > bytes.len() {
            return Err(Error::InvalidParameter("truncated field file".into()));
        }
        let s = &bytes[cur..cur + n];
        cur += n;
        Ok(s)
    };
    let d = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let box_half = f64::from_le_bytes(take(8)?.try_into().unwrap());
    let m = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let mut times = Vec::with_capacity(m);
    for _ in 0..m {
        times.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
    }
    let len = n.pow(d as u32);
    let mut slices = Vec::with_capacity(m);
    for _ in 0..m {
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(f64::from_le_bytes(take(8)?.try_into().unwrap()));
        }
        slices.push(SpectralField::from_values(d, n, box_half, values));
    }
    Ok(SpaceTimeField {
        times,
        slices,
        kernel_id: String::new(),
        coefficient_id: String::new(),
    })
}

/// Renders a summary JSON to CSV tables: every array of uniform numeric
/// objects (at any nesting depth) becomes `<stem>_<path>.csv`, and arrays
/// of plain numbers become single-column tables.
pub fn render_summary_to_csv(
    summary_path: &Path,
    out_dir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    let text = std::fs::read_to_string(summary_path)
        .map_err(|e| Error::InvalidParameter(format!("reading {}: {e}", summary_path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("parsing {}: {e}", summary_path.display())))?;
    let stem = summary_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("summary");
    let mut written = Vec::new();
    render_value(&value, stem, out_dir, &mut written)?;
    if written.is_empty() {
        return Err(Error::InvalidParameter(
            "summary contains no renderable tables".into(),
        ));
    }
    Ok(written)
}

fn render_value(
    value: &serde_json::Value,
    path: &str,
    out_dir: &Path,
    written: &mut Vec<std::path::PathBuf>,
) -> Result<()> {
    match value {
        serde_json::Value::Object(obj) => {
            for (key, v) in obj {
                render_value(v, &format!("{path}_{key}"), out_dir, written)?;
            }
        }
        serde_json::Value::Array(arr) if !arr.is_empty() => {
            if arr.iter().all(|v| v.is_number()) {
                let rows: Vec<Vec<f64>> = arr.iter().map(|v| vec![v.as_f64().unwrap()]).collect();
                let file = out_dir.join(format!("{path}.csv"));
                write_csv(&file, &["value"], &rows)?;
                written.push(file);
                return Ok(());
            }
            let first = match arr[0].as_object() {
                Some(o) => o,
                None => return Ok(()),
            };
            let columns: Vec<String> = first
                .iter()
                .filter(|(_, v)| v.is_number())
                .map(|(k, _)| k.clone())
                .collect();
            if columns.is_empty() {
                return Ok(());
            }
            let mut rows = Vec::new();
            for item in arr {
                let o = match item.as_object() {
                    Some(o) => o,
                    None => return Ok(()),
                };
                let mut row = Vec::with_capacity(columns.len());
                for c in &columns {
                    match o.get(c).and_then(|v| v.as_f64()) {
                        Some(x) => row.push(x),
                        None => return Ok(()),
                    }
                }
                rows.push(row);
            }
            let file = out_dir.join(format!("{path}.csv"));
            let cols: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
            write_csv(&file, &cols, &rows)?;
            written.push(file);
        }
        _ => {}
    }
    Ok(())
}

/// Writes only after the whole byte buffer is assembled, so a failing run
/// leaves no partial file behind.
pub fn write_text_atomically(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| Error::InvalidParameter(format!("creating {}: {e}", path.display())))?;
    f.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidParameter(format!("writing {}: {e}", path.display())))
}
