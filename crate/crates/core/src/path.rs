use std::fmt;

use crate::error::{Error, Result};

/// Longest binary word a [`DyadicPath`] can hold.
pub const MAX_PATH_LEN: u32 = 62;

/// A finite binary word `i_1 i_2 … i_k` addressing the dyadic interval
/// `[Σ i_j 2^-j, Σ i_j 2^-j + 2^-k)`. The empty word addresses `[0, 1]`.
///
/// Bits are packed so that `bits()` is the integer index of the interval
/// among the `2^k` intervals of its level.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DyadicPath {
    bits: u64,
    len: u32,
}

impl DyadicPath {
    pub const ROOT: DyadicPath = DyadicPath { bits: 0, len: 0 };

    /// Builds the path with interval index `index` at level `len`.
    pub fn new(index: u64, len: u32) -> Result<Self> {
        if len > MAX_PATH_LEN {
            return Err(Error::Depth {
                requested: len,
                limit: MAX_PATH_LEN,
            });
        }
        if len < 64 && index >> len != 0 {
            return Err(Error::Domain(format!(
                "index {index} does not fit in {len} bits"
            )));
        }
        Ok(DyadicPath { bits: index, len })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut p = DyadicPath::ROOT;
        for &b in bits {
            if b > 1 {
                return Err(Error::Domain(format!("path digit {b} is not binary")));
            }
            if p.len >= MAX_PATH_LEN {
                return Err(Error::Depth {
                    requested: bits.len() as u32,
                    limit: MAX_PATH_LEN,
                });
            }
            p = p.child(b);
        }
        Ok(p)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(self) -> u32 {
        self.len
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Appends one digit. The caller keeps the length below [`MAX_PATH_LEN`].
    #[inline]
    pub fn child(self, bit: u8) -> Self {
        debug_assert!(self.len < MAX_PATH_LEN);
        DyadicPath {
            bits: (self.bits << 1) | u64::from(bit & 1),
            len: self.len + 1,
        }
    }

    pub fn parent(self) -> Option<Self> {
        (self.len > 0).then(|| DyadicPath {
            bits: self.bits >> 1,
            len: self.len - 1,
        })
    }

    /// The `j`-th digit, 1-based as in `i_j`.
    pub fn digit(self, j: u32) -> u8 {
        assert!(j >= 1 && j <= self.len, "digit index out of range");
        ((self.bits >> (self.len - j)) & 1) as u8
    }

    /// The prefix of length `k`.
    pub fn prefix(self, k: u32) -> Self {
        assert!(k <= self.len);
        DyadicPath {
            bits: if k == 0 {
                0
            } else {
                self.bits >> (self.len - k)
            },
            len: k,
        }
    }

    /// Range of level-`level` cell indices covered by this interval.
    pub fn cell_range(self, level: u32) -> std::ops::Range<u64> {
        assert!(level >= self.len);
        let shift = level - self.len;
        (self.bits << shift)..((self.bits + 1) << shift)
    }

    /// Left endpoint as a float.
    pub fn left(self) -> f64 {
        self.bits as f64 * (-(self.len as f64)).exp2()
    }

    pub fn width(self) -> f64 {
        (-(self.len as f64)).exp2()
    }
}

impl fmt::Debug for DyadicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DyadicPath(")?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for DyadicPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("∅");
        }
        for j in 1..=self.len {
            write!(f, "{}", self.digit(j))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let p = DyadicPath::from_bits(&[1, 0, 1, 1]).unwrap();
        assert_eq!(p.bits(), 0b1011);
        assert_eq!(p.to_string(), "1011");
        assert_eq!(p.prefix(2), DyadicPath::from_bits(&[1, 0]).unwrap());
        assert_eq!(p.parent().unwrap().to_string(), "101");
        assert_eq!(p.left(), 11.0 / 16.0);
        assert_eq!(p.cell_range(6), 44..48);
    }

    #[test]
    fn root_covers_everything() {
        assert!(DyadicPath::ROOT.is_empty());
        assert_eq!(DyadicPath::ROOT.parent(), None);
        assert_eq!(DyadicPath::ROOT.cell_range(3), 0..8);
        assert_eq!(DyadicPath::ROOT.width(), 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DyadicPath::from_bits(&[2]).is_err());
        assert!(DyadicPath::new(4, 2).is_err());
        assert!(DyadicPath::new(0, 63).is_err());
    }
}
