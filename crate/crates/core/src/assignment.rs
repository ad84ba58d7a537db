//! Conversions between 0/1 rows, bitstrings and packed codes.
//!
//! Packed codes put variable 0 in the most significant position, so ascending
//! codes enumerate assignments in lexicographic bitstring order.

use crate::error::{Error, Result};

pub const MAX_PACKED_VARS: usize = 63;

pub fn pack(x: &[u8]) -> u64 {
    debug_assert!(x.len() <= MAX_PACKED_VARS);
    x.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b & 1))
}

pub fn unpack(code: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((code >> (n - 1 - i)) & 1) as u8).collect()
}

/// Bit mask selecting variable `i` in a packed code over `n` variables.
#[inline]
pub fn var_bit(i: usize, n: usize) -> u64 {
    1u64 << (n - 1 - i)
}

pub fn to_bitstring(x: &[u8]) -> String {
    x.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Format(format!("unexpected character {other:?} in bitstring"))),
        })
        .collect()
}

/// Parses one bitstring per non-blank line.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<u8>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(parse_bitstring)
        .collect()
}
