//! Bit-packed sign codes and their on-disk format.
//!
//! File layout (all integers little-endian):
//!
//! ```text
//! "BNH1" | m: u32 | count: u32 | count × ceil(m/8) bytes
//! ```
//!
//! Bit `i` of a code is bit `i mod 8` of byte `i div 8`; unused high bits of
//! the last byte are zero.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub const MAGIC: &[u8; 4] = b"BNH1";

/// A length-`m` bit vector; bit `i` is 1 when row `i` of `Ax` is `>= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinaryCode {
    words: Vec<u64>,
    m: usize,
}

impl BinaryCode {
    /// Signs of `values`, with `sgn(0) = +1`.
    pub fn from_signs(values: &[f64]) -> Self {
        let m = values.len();
        let mut words = vec![0u64; m.div_ceil(64)];
        for (i, &v) in values.iter().enumerate() {
            if v >= 0.0 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self { words, m }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let m = bits.len();
        let mut words = vec![0u64; m.div_ceil(64)];
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            words[i / 64] |= 1 << (i % 64);
        }
        Self { words, m }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.m, "bit {i} out of range for length {}", self.m);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `±1` form of the code.
    pub fn signs(&self) -> Vec<i8> {
        (0..self.m).map(|i| if self.bit(i) { 1 } else { -1 }).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> Self {
        let mut words: Vec<u64> = self.words.iter().map(|w| !w).collect();
        if let (Some(last), r) = (words.last_mut(), self.m % 64) {
            if r != 0 {
                *last &= (1u64 << r) - 1;
            }
        }
        Self { words, m: self.m }
    }

    /// Packed little-endian bytes, `ceil(m/8)` of them.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out: Vec<u8> = self.words.iter().flat_map(|w| w.to_le_bytes()).collect();
        out.truncate(self.m.div_ceil(8));
        out
    }

    pub fn from_bytes(bytes: &[u8], m: usize) -> Result<Self> {
        check_dim(m.div_ceil(8), bytes.len())?;
        if !m.is_multiple_of(8) && bytes.last().is_some_and(|b| b >> (m % 8) != 0) {
            return Err(Error::Format("padding bits of a code are set".into()));
        }
        let mut words = vec![0u64; m.div_ceil(64)];
        for (k, &b) in bytes.iter().enumerate() {
            words[k / 8] |= u64::from(b) << (8 * (k % 8));
        }
        Ok(Self { words, m })
    }
}

/// Writes codes of a common length in the `BNH1` format.
pub fn write_codes<W: Write>(mut w: W, codes: &[BinaryCode]) -> Result<()> {
    let m = codes.first().map_or(0, BinaryCode::len);
    let m32 = u32::try_from(m).map_err(|_| Error::Format(format!("code length {m} exceeds u32")))?;
    let count = u32::try_from(codes.len()).map_err(|_| Error::Format(format!("{} codes exceed u32", codes.len())))?;
    w.write_all(MAGIC)?;
    w.write_all(&m32.to_le_bytes())?;
    w.write_all(&count.to_le_bytes())?;
    for c in codes {
        check_dim(m, c.len())?;
        w.write_all(&c.to_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_codes<R: Read>(mut r: R) -> Result<Vec<BinaryCode>> {
    let mut header = [0u8; 12];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(Error::Format("missing BNH1 magic".into()));
    }
    let m = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; m.div_ceil(8)];
    let mut codes = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        codes.push(BinaryCode::from_bytes(&buf, m)?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after codes", rest.len())));
    }
    Ok(codes)
}
