//! Shot encodings: `01` text and `b8` packed bytes.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputEncoding {
    /// One line per shot, one `0`/`1` character per bit.
    Text01,
    /// Bits packed little-endian into bytes, `ceil(width/8)` bytes per shot.
    B8,
}

impl FromStr for OutputEncoding {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "01" => Ok(Self::Text01),
            "b8" => Ok(Self::B8),
            other => Err(EncodingError::UnknownFormat(other.to_owned())),
        }
    }
}

impl fmt::Display for OutputEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Text01 => "01",
            Self::B8 => "b8",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodingError {
    #[error("unknown format `{0}`, expected 01 or b8")]
    UnknownFormat(String),
    #[error("{len} bytes is not a whole number of {per_shot}-byte shots")]
    Truncated { len: usize, per_shot: usize },
    #[error("line {line}: expected {width} characters of 0/1")]
    BadLine { line: usize, width: usize },
}

/// Serializes shot rows.
#[must_use]
pub fn encode_shots(bits: &BitMatrix, encoding: OutputEncoding) -> Vec<u8> {
    let width = bits.cols();
    match encoding {
        OutputEncoding::Text01 => {
            let mut out = Vec::with_capacity(bits.rows() * (width + 1));
            for r in 0..bits.rows() {
                out.extend((0..width).map(|c| if bits.get(r, c) { b'1' } else { b'0' }));
                out.push(b'\n');
            }
            out
        }
        OutputEncoding::B8 => {
            let per_shot = width.div_ceil(8);
            let mut out = Vec::with_capacity(bits.rows() * per_shot);
            for r in 0..bits.rows() {
                let bytes = bits.row(r).iter().flat_map(|w| w.to_le_bytes());
                out.extend(bytes.take(per_shot));
            }
            out
        }
    }
}

/// Parses shots of `width` bits.
///
/// # Errors
/// When the input does not split into whole shots.
pub fn decode_shots(data: &[u8], width: usize, encoding: OutputEncoding) -> Result<BitMatrix, EncodingError> {
    match encoding {
        OutputEncoding::Text01 => {
            let lines: Vec<&[u8]> = data.split(|&b| b == b'\n').filter(|l| !l.is_empty()).collect();
            let mut m = BitMatrix::zeros(lines.len(), width);
            for (r, line) in lines.iter().enumerate() {
                let line = line.strip_suffix(b"\r").unwrap_or(line);
                if line.len() != width || line.iter().any(|&c| c != b'0' && c != b'1') {
                    return Err(EncodingError::BadLine { line: r + 1, width });
                }
                for (c, &ch) in line.iter().enumerate() {
                    if ch == b'1' {
                        m.set(r, c, true);
                    }
                }
            }
            Ok(m)
        }
        OutputEncoding::B8 => {
            let per_shot = width.div_ceil(8);
            if per_shot == 0 {
                return Ok(BitMatrix::zeros(0, width));
            }
            if !data.len().is_multiple_of(per_shot) {
                return Err(EncodingError::Truncated {
                    len: data.len(),
                    per_shot,
                });
            }
            let rows = data.len() / per_shot;
            let mut m = BitMatrix::zeros(rows, width);
            for (r, shot) in data.chunks(per_shot).enumerate() {
                for c in 0..width {
                    if (shot[c / 8] >> (c % 8)) & 1 == 1 {
                        m.set(r, c, true);
                    }
                }
            }
            Ok(m)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn shots(rows: &[&[bool]]) -> BitMatrix {
        let width = rows.first().map_or(0, |r| r.len());
        let mut m = BitMatrix::zeros(rows.len(), width);
        for (r, row) in rows.iter().enumerate() {
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b);
            }
        }
        m
    }

    #[test]
    fn packs_little_endian() {
        let m = shots(&[&[true, false, true]]);
        assert_eq!(encode_shots(&m, OutputEncoding::B8), vec![0b0000_0101]);
        assert_eq!(encode_shots(&m, OutputEncoding::Text01), b"101\n".to_vec());
    }

    #[test]
    fn nine_ones_take_two_bytes() {
        let m = shots(&[&[true; 9]]);
        assert_eq!(encode_shots(&m, OutputEncoding::B8), vec![0xFF, 0x01]);
    }

    #[test]
    fn truncated_input_is_rejected() {
        assert!(decode_shots(&[1, 2, 3], 9, OutputEncoding::B8).is_err());
        assert!(decode_shots(b"10\n1\n", 2, OutputEncoding::Text01).is_err());
        assert!("b9".parse::<OutputEncoding>().is_err());
    }

    proptest! {
        #[test]
        fn round_trip(width in 0usize..80, seed in prop::collection::vec(any::<bool>(), 0..4000)) {
            let rows = seed.len().checked_div(width).unwrap_or(0);
            let mut m = BitMatrix::zeros(rows, width);
            for r in 0..rows {
                for c in 0..width {
                    m.set(r, c, seed[r * width + c]);
                }
            }
            for enc in [OutputEncoding::Text01, OutputEncoding::B8] {
                let bytes = encode_shots(&m, enc);
                if width > 0 {
                    prop_assert_eq!(&decode_shots(&bytes, width, enc).unwrap(), &m);
                }
            }
        }
    }
}
