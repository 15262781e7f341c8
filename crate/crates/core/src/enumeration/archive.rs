//! Binary archive of complete paths, one byte per node.
//!
//! Layout (little-endian): magic `HPTH`, version `u16`, `Lx Ly Lz` as `u8`,
//! chain length `N` as `u16`, record count `u64`, then `count` records of
//! `N` site bytes each.

use std::io::{self, Read, Seek, SeekFrom, Write};

use thiserror::Error;

use crate::conformation::validate_path;
use crate::lattice::Lattice;

pub const MAGIC: [u8; 4] = *b"HPTH";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 19;
const COUNT_OFFSET: u64 = 11;

#[derive(Debug, Error)]
pub enum ArchiveError {
    #[error("archive I/O: {0}")]
    Io(#[from] io::Error),
    #[error("not a path archive (bad magic)")]
    BadMagic,
    #[error("unsupported archive version {0}")]
    Version(u16),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("record {index} is truncated")]
    Truncated { index: u64 },
    #[error("record {index}: byte {position} holds site {value}, outside the lattice")]
    InvalidSite {
        index: u64,
        position: usize,
        value: u8,
    },
    #[error("record {index} is not a valid path: {reason}")]
    InvalidPath { index: u64, reason: String },
    #[error("record has {got} sites, archive width is {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("{0} trailing bytes after the last record")]
    Trailing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArchiveHeader {
    pub dims: [u8; 3],
    pub chain_length: u16,
    pub count: u64,
}

impl ArchiveHeader {
    pub fn record_width(&self) -> usize {
        self.chain_length as usize
    }

    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(&MAGIC);
        h[4..6].copy_from_slice(&VERSION.to_le_bytes());
        h[6..9].copy_from_slice(&self.dims);
        h[9..11].copy_from_slice(&self.chain_length.to_le_bytes());
        h[11..19].copy_from_slice(&self.count.to_le_bytes());
        h
    }

    fn from_bytes(h: &[u8; HEADER_LEN]) -> Result<Self, ArchiveError> {
        if h[0..4] != MAGIC {
            return Err(ArchiveError::BadMagic);
        }
        let version = u16::from_le_bytes([h[4], h[5]]);
        if version != VERSION {
            return Err(ArchiveError::Version(version));
        }
        Ok(Self {
            dims: [h[6], h[7], h[8]],
            chain_length: u16::from_le_bytes([h[9], h[10]]),
            count: u64::from_le_bytes(h[11..19].try_into().unwrap()),
        })
    }
}

/// Streams records; the count in the header is patched by [`finish`].
///
/// [`finish`]: ArchiveWriter::finish
pub struct ArchiveWriter<W: Write + Seek> {
    inner: W,
    header: ArchiveHeader,
}

impl<W: Write + Seek> ArchiveWriter<W> {
    pub fn new(mut inner: W, lattice: &Lattice, chain_length: usize) -> Result<Self, ArchiveError> {
        let dims = lattice.dims();
        let header = ArchiveHeader {
            dims: dims.map(|d| d as u8),
            chain_length: chain_length as u16,
            count: 0,
        };
        inner.write_all(&header.to_bytes())?;
        Ok(Self { inner, header })
    }

    pub fn header(&self) -> ArchiveHeader {
        self.header
    }

    pub fn write_path(&mut self, path: &[u8]) -> Result<(), ArchiveError> {
        self.write_records(path)
    }

    /// Appends whole records packed back to back.
    pub fn write_records(&mut self, records: &[u8]) -> Result<(), ArchiveError> {
        let w = self.header.record_width();
        if w == 0 || records.len() % w != 0 {
            return Err(ArchiveError::WidthMismatch {
                expected: w,
                got: records.len(),
            });
        }
        self.inner.write_all(records)?;
        self.header.count += (records.len() / w) as u64;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, ArchiveError> {
        let end = self.inner.stream_position()?;
        self.inner.seek(SeekFrom::Start(COUNT_OFFSET))?;
        self.inner.write_all(&self.header.count.to_le_bytes())?;
        self.inner.seek(SeekFrom::Start(end))?;
        self.inner.flush()?;
        Ok(self.inner)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathArchive {
    pub header: ArchiveHeader,
    records: Vec<u8>,
}

impl PathArchive {
    pub fn len(&self) -> usize {
        self.header.count as usize
    }

    pub fn is_empty(&self) -> bool {
        self.header.count == 0
    }

    pub fn paths(&self) -> impl Iterator<Item = &[u8]> {
        self.records.chunks_exact(self.header.record_width().max(1))
    }

    pub fn lattice(&self) -> Result<Lattice, ArchiveError> {
        Lattice::new(self.header.dims.map(|d| d as usize))
            .map_err(|e| ArchiveError::Header(e.to_string()))
    }
}

/// Reads and validates a whole archive: every record must be a valid path
/// of the header's width on the header's lattice.
pub fn read_archive(mut reader: impl Read) -> Result<PathArchive, ArchiveError> {
    let mut h = [0u8; HEADER_LEN];
    reader.read_exact(&mut h).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => ArchiveError::Header("file shorter than header".into()),
        _ => ArchiveError::Io(e),
    })?;
    let header = ArchiveHeader::from_bytes(&h)?;
    let lattice = Lattice::new(header.dims.map(|d| d as usize))
        .map_err(|e| ArchiveError::Header(e.to_string()))?;
    let width = header.record_width();
    if width == 0 || width > lattice.site_count() {
        return Err(ArchiveError::Header(format!(
            "chain length {width} does not fit a lattice of {} sites",
            lattice.site_count()
        )));
    }

    let mut records = Vec::new();
    reader.read_to_end(&mut records)?;
    let full = (records.len() / width) as u64;
    if full < header.count {
        return Err(ArchiveError::Truncated { index: full });
    }
    let expected_len = header.count as usize * width;
    if records.len() > expected_len {
        return Err(ArchiveError::Trailing(records.len() - expected_len));
    }

    for (index, rec) in records.chunks_exact(width).enumerate() {
        let index = index as u64;
        if let Some(position) = rec.iter().position(|&b| b as usize >= lattice.site_count()) {
            return Err(ArchiveError::InvalidSite {
                index,
                position,
                value: rec[position],
            });
        }
        let path: Vec<usize> = rec.iter().map(|&b| b as usize).collect();
        let report = validate_path(&path, &lattice);
        if !report.is_valid() {
            return Err(ArchiveError::InvalidPath {
                index,
                reason: report.to_string(),
            });
        }
    }
    Ok(PathArchive { header, records })
}
