//! Binary code and readout files.
//!
//! Layout, little-endian: 4-byte magic (`SCLB` for codes, `SCLR` for
//! readouts), `u32 d`, `u32 F`, then `d·F` `f64` entries in column-major
//! order. A code stores its `d×F` matrix; a readout stores its `F×d` matrix,
//! so `d` columns of `F` entries each.

use std::path::Path;

use sclab_core::codes::{Code, CodeKind};
use sclab_core::kernels::DenseMatrix;
use sclab_core::readouts::Readout;

pub const CODE_MAGIC: [u8; 4] = *b"SCLB";
pub const READOUT_MAGIC: [u8; 4] = *b"SCLR";
const HEADER_LEN: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bad magic at byte offset 0: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("truncated file: {needed} bytes needed but data ends at byte offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("{extra} unexpected trailing bytes starting at byte offset {offset}")]
    Trailing { offset: usize, extra: usize },
    #[error("invalid header at byte offset {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("non-finite entry at byte offset {offset}")]
    NonFinite { offset: usize },
    #[error("{0}")]
    Core(#[from] sclab_core::Error),
}

/// Serializes a `rows×cols` matrix given in column-major order.
pub fn encode(magic: [u8; 4], d: u32, f: u32, column_major: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * column_major.len());
    out.extend_from_slice(&magic);
    out.extend_from_slice(&d.to_le_bytes());
    out.extend_from_slice(&f.to_le_bytes());
    for v in column_major {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses a file image; returns `(d, F, entries)` with entries column-major.
pub fn decode(magic: [u8; 4], bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), FormatError> {
    if bytes.len() < 4 {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN,
        });
    }
    if bytes[..4] != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(&magic).into_owned(),
            found: String::from_utf8_lossy(&bytes[..4]).into_owned(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN,
        });
    }
    let d = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let f = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if d == 0 {
        return Err(FormatError::Header {
            offset: 4,
            reason: "d must be >= 1".into(),
        });
    }
    if f == 0 {
        return Err(FormatError::Header {
            offset: 8,
            reason: "F must be >= 1".into(),
        });
    }
    let count = d.checked_mul(f).ok_or_else(|| FormatError::Header {
        offset: 4,
        reason: "d*F overflows".into(),
    })?;
    let needed = count
        .checked_mul(8)
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| FormatError::Header {
            offset: 4,
            reason: "d*F overflows".into(),
        })?;
    if bytes.len() < needed {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            needed,
        });
    }
    if bytes.len() > needed {
        return Err(FormatError::Trailing {
            offset: needed,
            extra: bytes.len() - needed,
        });
    }
    let mut entries = Vec::with_capacity(count);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(FormatError::NonFinite {
                offset: HEADER_LEN + 8 * i,
            });
        }
        entries.push(v);
    }
    Ok((d, f, entries))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, FormatError> {
    std::fs::read(path).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    std::fs::write(path, bytes).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn dim_u32(v: usize, what: &str) -> Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Header {
        offset: 4,
        reason: format!("{what} = {v} does not fit in u32"),
    })
}

pub fn code_bytes(code: &Code) -> Result<Vec<u8>, FormatError> {
    let d = dim_u32(code.dim(), "d")?;
    let f = dim_u32(code.features(), "F")?;
    Ok(encode(CODE_MAGIC, d, f, &code.columns().to_column_major()))
}

/// Loads a code; columns must be unit norm within the crate tolerance.
pub fn code_from_bytes(bytes: &[u8]) -> Result<Code, FormatError> {
    let (d, f, entries) = decode(CODE_MAGIC, bytes)?;
    let m = DenseMatrix::from_column_major(d, f, &entries)?;
    Ok(Code::from_columns(m, CodeKind::External)?)
}

pub fn write_code(path: &Path, code: &Code) -> Result<(), FormatError> {
    write_bytes(path, &code_bytes(code)?)
}

pub fn read_code(path: &Path) -> Result<Code, FormatError> {
    code_from_bytes(&read_bytes(path)?)
}

pub fn readout_bytes(readout: &Readout) -> Result<Vec<u8>, FormatError> {
    let m = readout.matrix();
    let f = dim_u32(m.rows(), "F")?;
    let d = dim_u32(m.cols(), "d")?;
    Ok(encode(READOUT_MAGIC, d, f, &m.to_column_major()))
}

/// Loads a readout for `code`; its shape must be `F×d` of that code.
pub fn readout_from_bytes(bytes: &[u8], code: &Code) -> Result<Readout, FormatError> {
    let (d, f, entries) = decode(READOUT_MAGIC, bytes)?;
    if d != code.dim() || f != code.features() {
        return Err(FormatError::Header {
            offset: 4,
            reason: format!(
                "readout is for d={d}, F={f} but the code has d={}, F={}",
                code.dim(),
                code.features()
            ),
        });
    }
    let m = DenseMatrix::from_column_major(f, d, &entries)?;
    Ok(Readout::external(m, code)?)
}

pub fn write_readout(path: &Path, readout: &Readout) -> Result<(), FormatError> {
    write_bytes(path, &readout_bytes(readout)?)
}

pub fn read_readout(path: &Path, code: &Code) -> Result<Readout, FormatError> {
    readout_from_bytes(&read_bytes(path)?, code)
}
