//! Little-endian binary containers.
//!
//! All three share the same conventions: a 4-byte magic, a `u16` version,
//! a fixed header, the payload, and a trailing CRC-32 over every preceding
//! byte.
//!
//! | file | magic | header after version |
//! |------|-------|----------------------|
//! | matrix | `TSRM` | `u16 rows(=18), u64 columns, u64 nnz, u64 degenerate, [u8;32] config hash, u32 id len, id` |
//! | dictionary | `TSRD` | `u16 reserved(=0), u64 K, [u8;32] config hash` |
//! | key stream | `TSRK` | `u16 reserved(=0), u64 residues, u64 degenerate, u64 entries, [u8;32] config hash, u32 id len, id` |
//!
//! Matrix cells are `(u8 row, u64 column, u32 count)` sorted by (row, column);
//! dictionary entries are ascending `u64` keys; key-stream entries are
//! `(u64 key, u8 category row, u32 count)` sorted by (key, row).

use super::dictionary::KeyDictionary;
use super::matrix::{MatrixCell, SseKeyMatrix};
use crate::config::ConfigHash;
use crate::sse::{SseTripleCategory, CATEGORY_COUNT};
use crate::tsr::{KeyCount, KeyStream, KeyValue};

pub const MATRIX_MAGIC: [u8; 4] = *b"TSRM";
pub const DICTIONARY_MAGIC: [u8; 4] = *b"TSRD";
pub const KEY_STREAM_MAGIC: [u8; 4] = *b"TSRK";
pub const FORMAT_VERSION: u16 = 1;

/// Bytes per serialized matrix cell.
pub const MATRIX_CELL_BYTES: usize = 1 + 8 + 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected {expected:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("format version {0} is not supported")]
    VersionUnsupported(u16),
    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("stream truncated")]
    Truncated,
    #[error("{0} unexpected trailing bytes")]
    TrailingBytes(usize),
    #[error("invalid content: {0}")]
    Invalid(String),
}

struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn new(magic: [u8; 4], capacity: usize) -> Self {
        let mut buf = Vec::with_capacity(capacity);
        buf.extend_from_slice(&magic);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        Self { buf }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn bytes(&mut self, v: &[u8]) {
        self.buf.extend_from_slice(v);
    }

    fn string(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.bytes(s.as_bytes());
    }

    fn finish(mut self) -> Vec<u8> {
        let crc = crc32fast::hash(&self.buf);
        self.u32(crc);
        self.buf
    }
}

struct Decoder<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    /// Checks magic, version and checksum; the returned decoder is positioned
    /// just after the version field and ends before the checksum.
    fn open(bytes: &'a [u8], magic: [u8; 4]) -> Result<Self, FormatError> {
        if bytes.len() < 4 {
            return Err(FormatError::Truncated);
        }
        let found: [u8; 4] = bytes[..4].try_into().unwrap();
        if found != magic {
            return Err(FormatError::BadMagic { expected: magic, found });
        }
        if bytes.len() < 6 + 4 {
            return Err(FormatError::Truncated);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(FormatError::VersionUnsupported(version));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(FormatError::ChecksumMismatch { stored, computed });
        }
        Ok(Self { data: body, pos: 6 })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).ok_or(FormatError::Truncated)?;
        let out = self.data.get(self.pos..end).ok_or(FormatError::Truncated)?;
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn hash(&mut self) -> Result<ConfigHash, FormatError> {
        Ok(ConfigHash(self.take(32)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String, FormatError> {
        let len = self.u32()? as usize;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| FormatError::Invalid("protein id is not UTF-8".into()))
    }

    /// Guards `count * item` allocations against corrupt headers.
    fn expect_items(&self, count: u64, item: usize) -> Result<usize, FormatError> {
        let remaining = (self.data.len() - self.pos) as u64;
        match count.checked_mul(item as u64) {
            Some(need) if need <= remaining => Ok(count as usize),
            _ => Err(FormatError::Truncated),
        }
    }

    fn finish(self) -> Result<(), FormatError> {
        match self.data.len() - self.pos {
            0 => Ok(()),
            n => Err(FormatError::TrailingBytes(n)),
        }
    }
}

/// Serializes a matrix as TSRM v1.
pub fn serialize_matrix(m: &SseKeyMatrix) -> Vec<u8> {
    let mut e = Encoder::new(MATRIX_MAGIC, 72 + m.protein_id().len() + m.nnz() * MATRIX_CELL_BYTES);
    e.u16(CATEGORY_COUNT as u16);
    e.u64(m.columns());
    e.u64(m.nnz() as u64);
    e.u64(m.degenerate_skipped());
    e.bytes(&m.config_hash().0);
    e.string(m.protein_id());
    for c in m.cells() {
        e.u8(c.row);
        e.u64(c.column);
        e.u32(c.count);
    }
    e.finish()
}

pub fn deserialize_matrix(bytes: &[u8]) -> Result<SseKeyMatrix, FormatError> {
    let mut d = Decoder::open(bytes, MATRIX_MAGIC)?;
    let rows = d.u16()?;
    if rows as usize != CATEGORY_COUNT {
        return Err(FormatError::Invalid(format!("row count {rows}, expected {CATEGORY_COUNT}")));
    }
    let columns = d.u64()?;
    let nnz = d.u64()?;
    let degenerate = d.u64()?;
    let hash = d.hash()?;
    let id = d.string()?;
    let n = d.expect_items(nnz, MATRIX_CELL_BYTES)?;
    let mut cells = Vec::with_capacity(n);
    for _ in 0..n {
        cells.push(MatrixCell { row: d.u8()?, column: d.u64()?, count: d.u32()? });
    }
    d.finish()?;
    SseKeyMatrix::new(id, columns, cells, degenerate, hash).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn serialize_dictionary(dict: &KeyDictionary) -> Vec<u8> {
    let mut e = Encoder::new(DICTIONARY_MAGIC, 52 + dict.len() * 8);
    e.u16(0);
    e.u64(dict.len() as u64);
    e.bytes(&dict.config_hash().0);
    for k in dict.keys() {
        e.u64(k.0);
    }
    e.finish()
}

pub fn deserialize_dictionary(bytes: &[u8]) -> Result<KeyDictionary, FormatError> {
    let mut d = Decoder::open(bytes, DICTIONARY_MAGIC)?;
    let _reserved = d.u16()?;
    let len = d.u64()?;
    let hash = d.hash()?;
    let n = d.expect_items(len, 8)?;
    let mut keys = Vec::with_capacity(n);
    for _ in 0..n {
        keys.push(KeyValue(d.u64()?));
    }
    d.finish()?;
    KeyDictionary::from_sorted(keys, hash).map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn serialize_key_stream(s: &KeyStream) -> Vec<u8> {
    let mut e = Encoder::new(KEY_STREAM_MAGIC, 80 + s.protein_id.len() + s.entries.len() * 13);
    e.u16(0);
    e.u64(s.residue_count);
    e.u64(s.degenerate_skipped);
    e.u64(s.entries.len() as u64);
    e.bytes(&s.config_hash.0);
    e.string(&s.protein_id);
    for entry in &s.entries {
        e.u64(entry.key.0);
        e.u8(entry.category.row_index() as u8);
        e.u32(entry.count);
    }
    e.finish()
}

pub fn deserialize_key_stream(bytes: &[u8]) -> Result<KeyStream, FormatError> {
    let mut d = Decoder::open(bytes, KEY_STREAM_MAGIC)?;
    let _reserved = d.u16()?;
    let residue_count = d.u64()?;
    let degenerate_skipped = d.u64()?;
    let len = d.u64()?;
    let config_hash = d.hash()?;
    let protein_id = d.string()?;
    let n = d.expect_items(len, 13)?;
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let key = KeyValue(d.u64()?);
        let row = d.u8()?;
        let category = SseTripleCategory::from_row_index(row as usize)
            .ok_or_else(|| FormatError::Invalid(format!("category row {row}")))?;
        let count = d.u32()?;
        if count == 0 {
            return Err(FormatError::Invalid("zero count".into()));
        }
        entries.push(KeyCount { key, category, count });
    }
    d.finish()?;
    if entries.windows(2).any(|w| (w[0].key, w[0].category) >= (w[1].key, w[1].category)) {
        return Err(FormatError::Invalid("key stream entries not strictly sorted".into()));
    }
    Ok(KeyStream { protein_id, residue_count, degenerate_skipped, config_hash, entries })
}
