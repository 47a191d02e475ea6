//! Dataset files and result output.
//!
//! CSV: one observation per line, comma separated, optionally followed by an
//! integer label column. Lines starting with `#` are skipped.
//!
//! Binary (`.scrm`), all integers little-endian:
//!
//! | offset | size | field                                  |
//! |--------|------|----------------------------------------|
//! | 0      | 4    | magic `SCRM`                           |
//! | 4      | 4    | version (u32, currently 1)             |
//! | 8      | 4    | flags (u32, bit 0: label block present) |
//! | 12     | 8    | N (u64)                                |
//! | 20     | 8    | p (u64)                                |
//! | 28     | 8Np  | values, f64 row-major                  |
//! | ...    | 4N   | labels, i32 (only if bit 0 is set)     |

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DataMatrix, LabelVector};

pub const MAGIC: &[u8; 4] = b"SCRM";
pub const BINARY_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;
const FLAG_LABELS: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// `.scrm` and `.bin` are binary; anything else is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("scrm" | "bin") => DatasetFormat::Binary,
            _ => DatasetFormat::Csv,
        }
    }
}

impl std::str::FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "binary" | "bin" | "scrm" => Ok(DatasetFormat::Binary),
            other => Err(Error::invalid(format!("unknown dataset format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub data: DataMatrix,
    pub labels: Option<LabelVector>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    /// Treat the last column as integer labels.
    pub labels: bool,
    /// Skip the first record.
    pub header: bool,
}

pub fn load_csv(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.header)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let offset = record.position().map_or(0, |p| p.byte());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let n_values = record.len() - usize::from(opts.labels);
        if n_values == 0 {
            return Err(Error::format(path, offset, "record has no value columns"));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::format(
                    path,
                    offset,
                    format!("expected {w} fields, found {}", record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter().take(n_values) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format(path, offset, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::format(path, offset, format!("non-finite value {field:?}")));
            }
            values.push(v);
        }
        if opts.labels {
            let field = &record[n_values];
            let l: i32 = field
                .parse()
                .map_err(|_| Error::format(path, offset, format!("not an integer label: {field:?}")))?;
            labels.push(l);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::format(path, 0, "no data rows"));
    }
    let cols = values.len() / rows;
    let data = DataMatrix::new(rows, cols, values)?;
    let labels = if opts.labels {
        Some(LabelVector::new(labels).map_err(|e| Error::format(path, 0, e.to_string()))?)
    } else {
        None
    };
    Ok(Dataset { data, labels })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::format(path, offset, format!("{other:?}")),
    }
}

/// Writes shortest round-trip representations, so loading gives back identical values.
pub fn save_csv(path: &Path, data: &DataMatrix, labels: Option<&LabelVector>) -> Result<()> {
    check_labels(data, labels)?;
    let mut w = csv::WriterBuilder::new()
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut fields = Vec::with_capacity(data.n_cols() + 1);
    for (i, row) in data.rows().enumerate() {
        fields.clear();
        fields.extend(row.iter().map(|v| format!("{v:?}")));
        if let Some(l) = labels {
            fields.push(l[i].to_string());
        }
        w.write_record(&fields).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn check_labels(data: &DataMatrix, labels: Option<&LabelVector>) -> Result<()> {
    match labels {
        Some(l) if l.len() != data.n_rows() => Err(Error::DimensionMismatch {
            expected: data.n_rows(),
            found: l.len(),
        }),
        _ => Ok(()),
    }
}

pub fn encode_binary(data: &DataMatrix, labels: Option<&LabelVector>) -> Result<Vec<u8>> {
    check_labels(data, labels)?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * data.as_slice().len() + labels.map_or(0, |l| 4 * l.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    let flags = if labels.is_some() { FLAG_LABELS } else { 0 };
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&(data.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(data.n_cols() as u64).to_le_bytes());
    for v in data.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(l) = labels {
        for v in l.as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<Dataset> {
    let bad = |offset: usize, msg: String| Error::format(path, offset as u64, msg);
    if bytes.len() < HEADER_LEN {
        return Err(bad(
            bytes.len(),
            format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        ));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad(0, format!("bad magic {:?}", &bytes[..4])));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let version = u32_at(4);
    if version != BINARY_VERSION {
        return Err(bad(4, format!("unsupported version {version}")));
    }
    let flags = u32_at(8);
    if flags & !FLAG_LABELS != 0 {
        return Err(bad(8, format!("unknown flag bits {flags:#x}")));
    }
    let (n, p) = (u64_at(12), u64_at(20));
    if n == 0 || p == 0 {
        return Err(bad(12, format!("empty matrix {n}x{p}")));
    }
    let has_labels = flags & FLAG_LABELS != 0;
    let expected = n
        .checked_mul(p)
        .and_then(|np| np.checked_mul(8))
        .and_then(|b| b.checked_add(if has_labels { n * 4 } else { 0 }))
        .and_then(|b| b.checked_add(HEADER_LEN as u64))
        .filter(|&b| b <= usize::MAX as u64)
        .ok_or_else(|| bad(12, format!("matrix {n}x{p} is too large")))?;
    if (bytes.len() as u64) < expected {
        return Err(bad(
            bytes.len(),
            format!("truncated payload: expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    if (bytes.len() as u64) > expected {
        return Err(bad(
            expected as usize,
            format!("trailing data: expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    let (n, p) = (n as usize, p as usize);
    let payload = &bytes[HEADER_LEN..HEADER_LEN + 8 * n * p];
    let mut values = Vec::with_capacity(n * p);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(bad(HEADER_LEN + 8 * i, format!("non-finite value {v}")));
        }
        values.push(v);
    }
    let data = DataMatrix::new(n, p, values)?;
    let labels = if has_labels {
        let start = HEADER_LEN + 8 * n * p;
        let raw: Vec<i32> = bytes[start..]
            .chunks_exact(4)
            .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Some(LabelVector::new(raw).map_err(|e| bad(start, e.to_string()))?)
    } else {
        None
    };
    Ok(Dataset { data, labels })
}

pub fn load_binary(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_binary(path, &bytes)
}

pub fn save_binary(path: &Path, data: &DataMatrix, labels: Option<&LabelVector>) -> Result<()> {
    let bytes = encode_binary(data, labels)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a dataset; `labels` selects the label column (CSV) and is
/// ignored for binary files, which carry their own flag.
pub fn load_dataset(path: &Path, format: DatasetFormat, csv: CsvOptions) -> Result<Dataset> {
    match format {
        DatasetFormat::Csv => load_csv(path, csv),
        DatasetFormat::Binary => load_binary(path),
    }
}

pub fn save_dataset(path: &Path, format: DatasetFormat, data: &DataMatrix, labels: Option<&LabelVector>) -> Result<()> {
    match format {
        DatasetFormat::Csv => save_csv(path, data, labels),
        DatasetFormat::Binary => save_binary(path, data, labels),
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn save_results<T: Serialize>(path: &Path, results: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(results).map_err(|e| Error::invalid(e.to_string()))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
