//! Sorted-list index over target factors.
//!
//! One list per dimension, sorted by value descending with ties broken
//! by ascending target id. Sparse indices keep only targets with a
//! strictly positive value in that dimension.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{QueryVector, TargetFactors};

const MAGIC: &[u8; 4] = b"SLRX";
const VERSION: u16 = 1;
const FLAG_SPARSE: u8 = 0b0000_0001;

#[derive(Debug, Clone, PartialEq)]
pub struct SortedIndex {
    num_targets: usize,
    num_dims: usize,
    sparse: bool,
    /// lists[r] sorted by value descending, ties by target id ascending.
    lists: Vec<Vec<(f64, u32)>>,
}

impl SortedIndex {
    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    pub fn num_dims(&self) -> usize {
        self.num_dims
    }

    pub fn is_sparse(&self) -> bool {
        self.sparse
    }

    pub fn list(&self, dim: usize) -> &[(f64, u32)] {
        &self.lists[dim]
    }
}

/// Sort each dimension of `t` into a descending list. Deterministic:
/// equal values are ordered by ascending target id.
pub fn build_index(t: &TargetFactors) -> SortedIndex {
    let m = t.num_targets();
    let r = t.num_dims();
    let mut lists: Vec<Vec<(f64, u32)>> = vec![Vec::new(); r];
    if t.is_sparse() {
        for y in 0..m as u32 {
            for &(dim, v) in t.sparse_row(y).unwrap() {
                lists[dim as usize].push((v, y));
            }
        }
    } else {
        for dim in 0..r {
            let list = &mut lists[dim];
            list.reserve(m);
            for y in 0..m as u32 {
                list.push((t.value(y, dim), y));
            }
        }
    }
    for list in &mut lists {
        list.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    }
    SortedIndex {
        num_targets: m,
        num_dims: r,
        sparse: t.is_sparse(),
        lists,
    }
}

/// Traversal direction of one list for a given query weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// u_r > 0: walk the list top-down.
    Descending,
    /// u_r < 0 on a dense list: walk bottom-up, equivalent to the
    /// reverted list.
    Ascending,
    /// u_r = 0, or u_r < 0 on a sparse list (absent zeros dominate all
    /// negative contributions, so the bound term is pinned to 0).
    Skipped,
}

/// Per-query cursor over the index lists.
#[derive(Debug, Clone)]
pub struct ListCursor {
    dims: Vec<DimCursor>,
}

#[derive(Debug, Clone)]
struct DimCursor {
    direction: Direction,
    /// Number of entries consumed so far.
    depth: usize,
}

impl ListCursor {
    pub fn new(idx: &SortedIndex, u: &QueryVector) -> Result<Self> {
        if u.num_dims() != idx.num_dims() {
            return Err(Error::DimensionMismatch {
                expected: idx.num_dims(),
                got: u.num_dims(),
            });
        }
        let dims = u
            .values()
            .iter()
            .map(|&w| DimCursor {
                direction: if w > 0.0 {
                    Direction::Descending
                } else if w < 0.0 && !idx.is_sparse() {
                    Direction::Ascending
                } else {
                    Direction::Skipped
                },
                depth: 0,
            })
            .collect();
        Ok(ListCursor { dims })
    }

    pub fn direction(&self, dim: usize) -> Direction {
        self.dims[dim].direction
    }

    pub fn depth(&self, dim: usize) -> usize {
        self.dims[dim].depth
    }

    fn peek_at(&self, idx: &SortedIndex, dim: usize) -> Option<(f64, u32)> {
        let cur = &self.dims[dim];
        let list = idx.list(dim);
        if cur.depth >= list.len() {
            return None;
        }
        let entry = match cur.direction {
            Direction::Descending => list[cur.depth],
            Direction::Ascending => list[list.len() - 1 - cur.depth],
            Direction::Skipped => return None,
        };
        Some(entry)
    }
}

/// Contribution of the next unconsumed entry of list `dim` without
/// advancing the cursor: (target, u_r * t_r(target)).
pub fn peek_frontier(
    idx: &SortedIndex,
    cursor: &ListCursor,
    u: &QueryVector,
    dim: usize,
) -> Option<(u32, f64)> {
    cursor
        .peek_at(idx, dim)
        .map(|(v, y)| (y, u.values()[dim] * v))
}

/// Pop the next entry of list `dim` in the direction dictated by
/// sign(u_r), advancing the cursor. `None` if exhausted or skipped.
pub fn frontier(
    idx: &SortedIndex,
    cursor: &mut ListCursor,
    u: &QueryVector,
    dim: usize,
) -> Option<(u32, f64)> {
    let popped = peek_frontier(idx, cursor, u, dim);
    if popped.is_some() {
        cursor.dims[dim].depth += 1;
    }
    popped
}

impl SortedIndex {
    /// Write the index in the little-endian `SLRX` format with a
    /// trailing CRC-64 checksum.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(if self.sparse { FLAG_SPARSE } else { 0 });
        buf.extend_from_slice(&(self.num_dims as u32).to_le_bytes());
        buf.extend_from_slice(&(self.num_targets as u64).to_le_bytes());
        for list in &self.lists {
            buf.extend_from_slice(&(list.len() as u64).to_le_bytes());
            for &(v, y) in list {
                buf.extend_from_slice(&v.to_le_bytes());
                buf.extend_from_slice(&y.to_le_bytes());
            }
        }
        let crc = crc64(&buf);
        buf.extend_from_slice(&crc.to_le_bytes());
        fs::write(path, &buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SortedIndex> {
        let path = path.as_ref();
        let buf = fs::read(path).map_err(|e| Error::io(path, e))?;
        let truncated = || Error::Truncated { path: path.into() };

        if buf.len() < 8 {
            return Err(truncated());
        }
        let (payload, crc_bytes) = buf.split_at(buf.len() - 8);
        let stored = u64::from_le_bytes(crc_bytes.try_into().unwrap());
        let computed = crc64(payload);
        if stored != computed {
            // A bad magic is reported as a format error even though the
            // checksum also fails.
            if payload.len() >= 4 && &payload[..4] != MAGIC {
                return Err(Error::BadMagic { path: path.into() });
            }
            return Err(Error::ChecksumMismatch {
                path: path.into(),
                stored,
                computed,
            });
        }

        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > payload.len() {
                return Err(truncated());
            }
            let s = &payload[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };

        if take(&mut pos, 4)? != MAGIC {
            return Err(Error::BadMagic { path: path.into() });
        }
        let version = u16::from_le_bytes(take(&mut pos, 2)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::BadVersion {
                path: path.into(),
                version,
            });
        }
        let flags = take(&mut pos, 1)?[0];
        let sparse = flags & FLAG_SPARSE != 0;
        let num_dims = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let num_targets = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;

        let mut lists = Vec::with_capacity(num_dims);
        for _ in 0..num_dims {
            let len = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap()) as usize;
            let bytes = take(&mut pos, len.checked_mul(12).ok_or_else(truncated)?)?;
            let mut list = Vec::with_capacity(len);
            for chunk in bytes.chunks_exact(12) {
                let v = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let y = u32::from_le_bytes(chunk[8..].try_into().unwrap());
                list.push((v, y));
            }
            lists.push(list);
        }
        if pos != payload.len() {
            return Err(truncated());
        }
        Ok(SortedIndex {
            num_targets,
            num_dims,
            sparse,
            lists,
        })
    }
}

// CRC-64/ECMA-182, bit-by-bit over a small byte table.
fn crc64(data: &[u8]) -> u64 {
    const POLY: u64 = 0x42F0_E1EB_A9EA_3693;
    static TABLE: std::sync::OnceLock<[u64; 256]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0u64; 256];
        for (i, slot) in t.iter_mut().enumerate() {
            let mut crc = (i as u64) << 56;
            for _ in 0..8 {
                crc = if crc & (1 << 63) != 0 {
                    (crc << 1) ^ POLY
                } else {
                    crc << 1
                };
            }
            *slot = crc;
        }
        t
    });
    let mut crc = 0u64;
    for &b in data {
        crc = table[((crc >> 56) as u8 ^ b) as usize] ^ (crc << 8);
    }
    crc
}
