//! Dyadic flooring `2^-rho * floor(2^rho * x)`.

use crate::scalar::Real;

/// Floors one value to `rho` fractional bits.
#[inline]
pub fn floor_to<T: Real>(x: T, rho: u32) -> T {
    let scale = T::of(2f64.powi(rho as i32));
    (x * scale).floor() / scale
}

/// Componentwise [`floor_to`]. The result is idempotent and satisfies
/// `0 <= x - out < 2^-rho`.
pub fn floor_precision<T: Real>(x: &[T], rho: u32) -> Vec<T> {
    x.iter().map(|&v| floor_to(v, rho)).collect()
}

/// Width of a flooring cell, `2^-rho`.
pub fn cell_width<T: Real>(rho: u32) -> T {
    T::of(2f64.powi(-(rho as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(floor_precision(&[0.7f64], 1), vec![0.5]);
        assert_eq!(floor_precision(&[-0.3f64], 2), vec![-0.5]);
        assert_eq!(floor_precision(&[0.25f64, -1.5, 3.0], 2), vec![0.25, -1.5, 3.0]);
        assert_eq!(floor_precision(&[0.7f32], 1), vec![0.5f32]);
    }

    proptest! {
        #[test]
        fn idempotent_and_bounded(x in -1.0e6f64..1.0e6, rho in 1u32..40) {
            let once = floor_to(x, rho);
            prop_assert_eq!(floor_to(once, rho), once);
            let gap = x - once;
            prop_assert!(gap >= 0.0);
            prop_assert!(gap < cell_width::<f64>(rho));
        }
    }
}
