//! Mid-rise uniform scalar quantizer over a symmetric range.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `2^bits` equal cells covering `[-range, range]`; inputs outside the range
/// fall into the outermost cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer<T> {
    bits: u32,
    range: T,
    step: T,
}

impl<T: Real> UniformQuantizer<T> {
    pub const MAX_BITS: u32 = 16;

    pub fn new(bits: u32, range: T) -> Result<Self> {
        if bits == 0 || bits > Self::MAX_BITS {
            return Err(Error::invalid(format!(
                "quantizer rate must be in 1..={} bits, got {bits}",
                Self::MAX_BITS
            )));
        }
        if !(range > T::zero()) || !range.is_finite() {
            return Err(Error::invalid(format!("quantizer range must be positive and finite, got {range}")));
        }
        let cells = T::of_usize(1usize << bits);
        Ok(UniformQuantizer {
            bits,
            range,
            step: (range + range) / cells,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn range(&self) -> T {
        self.range
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }

    /// Cell index in `0..levels()`.
    pub fn index(&self, x: T) -> usize {
        let raw = ((x + self.range) / self.step).floor();
        if raw.is_nan() || raw < T::zero() {
            0
        } else {
            raw.to_usize().unwrap_or(usize::MAX).min(self.levels() - 1)
        }
    }

    /// Midpoint of cell `index`.
    pub fn level(&self, index: usize) -> T {
        -self.range + (T::of_usize(index) + T::of(0.5)) * self.step
    }

    pub fn quantize(&self, x: T) -> T {
        self.level(self.index(x))
    }

    /// Lower and upper edge of cell `index`.
    pub fn cell(&self, index: usize) -> (T, T) {
        let lo = -self.range + T::of_usize(index) * self.step;
        (lo, lo + self.step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cell_midpoint() {
        let q = UniformQuantizer::new(1, 1.0f64).unwrap();
        assert_eq!(q.quantize(0.3), 0.5);
        assert_eq!(q.quantize(-0.3), -0.5);
        assert_eq!(q.quantize(0.0), 0.5);
    }

    #[test]
    fn saturates() {
        let q = UniformQuantizer::new(3, 4.0f64).unwrap();
        assert_eq!(q.quantize(100.0), 3.5);
        assert_eq!(q.quantize(-100.0), -3.5);
        assert_eq!(q.quantize(f64::NEG_INFINITY), -3.5);
        assert_eq!(q.quantize(4.0), 3.5);
    }

    #[test]
    fn midpoints_are_fixed_points() {
        let q = UniformQuantizer::new(5, 2.5f32).unwrap();
        for i in 0..q.levels() {
            assert_eq!(q.index(q.level(i)), i);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(UniformQuantizer::new(0, 1.0f64).is_err());
        assert!(UniformQuantizer::new(17, 1.0f64).is_err());
        assert!(UniformQuantizer::new(3, 0.0f64).is_err());
        assert!(UniformQuantizer::new(3, f64::NAN).is_err());
    }
}
