//! Bit-granular writer and reader used by every label serializer.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitError {
    #[error("label truncated: wanted {want} bits at offset {at}, only {len} available")]
    Truncated { at: usize, want: usize, len: usize },
    #[error("malformed label: {0}")]
    Malformed(&'static str),
}

/// Number of bits needed to write any value in `0..=max`.
pub fn width_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}

/// ⌈log₂ x⌉ for x ≥ 1, with ceil_log2(1) = 0.
pub fn ceil_log2(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Writes the low `width` bits of `value`, least significant first.
    pub fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value >> width == 0, "{value} does not fit in {width} bits");
        for i in 0..width {
            self.push_bit((value >> i) & 1 == 1);
        }
    }

    pub fn put_u128(&mut self, value: u128, width: u32) {
        let lo = width.min(64);
        self.put(value as u64 & mask(lo), lo);
        if width > 64 {
            self.put((value >> 64) as u64, width - 64);
        }
    }

    pub fn put_bool(&mut self, b: bool) {
        self.push_bit(b);
    }

    pub fn put_bits(&mut self, bits: &[u64], width: usize) {
        for i in 0..width {
            self.push_bit((bits[i / 64] >> (i % 64)) & 1 == 1);
        }
    }

    fn push_bit(&mut self, b: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if b {
            *self.bytes.last_mut().unwrap() |= 1 << (self.len % 8);
        }
        self.len += 1;
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    pub fn into_bytes(self) -> (Vec<u8>, usize) {
        (self.bytes, self.len)
    }
}

fn mask(w: u32) -> u64 {
    if w >= 64 {
        u64::MAX
    } else {
        (1u64 << w) - 1
    }
}

#[derive(Clone, Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    len: usize,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], len: usize) -> Self {
        debug_assert!(len <= bytes.len() * 8);
        BitReader { bytes, len, pos: 0 }
    }

    fn need(&self, w: usize) -> Result<(), BitError> {
        if self.pos + w > self.len {
            Err(BitError::Truncated { at: self.pos, want: w, len: self.len })
        } else {
            Ok(())
        }
    }

    fn bit(&mut self) -> bool {
        let b = (self.bytes[self.pos / 8] >> (self.pos % 8)) & 1 == 1;
        self.pos += 1;
        b
    }

    pub fn get(&mut self, width: u32) -> Result<u64, BitError> {
        self.need(width as usize)?;
        let mut v = 0u64;
        for i in 0..width {
            if self.bit() {
                v |= 1 << i;
            }
        }
        Ok(v)
    }

    pub fn get_u128(&mut self, width: u32) -> Result<u128, BitError> {
        let lo = self.get(width.min(64))? as u128;
        let hi = if width > 64 { self.get(width - 64)? as u128 } else { 0 };
        Ok(lo | (hi << 64))
    }

    pub fn get_usize(&mut self, width: u32) -> Result<usize, BitError> {
        Ok(self.get(width)? as usize)
    }

    pub fn get_bool(&mut self) -> Result<bool, BitError> {
        self.need(1)?;
        Ok(self.bit())
    }

    pub fn get_bits(&mut self, width: usize) -> Result<Vec<u64>, BitError> {
        self.need(width)?;
        let mut out = vec![0u64; width.div_ceil(64)];
        for i in 0..width {
            if self.bit() {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        Ok(out)
    }

    pub fn remaining(&self) -> usize {
        self.len - self.pos
    }

    /// Errors unless every bit has been consumed.
    pub fn finish(&self) -> Result<(), BitError> {
        if self.pos == self.len {
            Ok(())
        } else {
            Err(BitError::Malformed("trailing bits"))
        }
    }
}
