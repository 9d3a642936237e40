//! Floating-point abstraction shared by the numeric modules.
//!
//! Everything that does arithmetic on real values (statistics, the network,
//! the recognizers) is written against [`Scalar`] so that the same code runs
//! in `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar usable by the network and the statistics code.
///
/// `Display` must print a decimal form that `FromStr` parses back to the
/// identical value; the text persistence formats depend on it. Both `f32`
/// and `f64` satisfy this (Rust prints the shortest round-trip form).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + FromStr + Send + Sync + 'static
{
    /// Short type tag written into persisted model manifests.
    const NAME: &'static str;

    /// Converts an `f64` literal or configuration value.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<T: Scalar + BitsEq>(v: T) -> bool {
        let text = v.to_string();
        match text.parse::<T>() {
            Ok(back) => back.to_bits_eq(v),
            Err(_) => false,
        }
    }

    trait BitsEq {
        fn to_bits_eq(self, other: Self) -> bool;
    }
    impl BitsEq for f32 {
        fn to_bits_eq(self, other: Self) -> bool {
            self.to_bits() == other.to_bits()
        }
    }
    impl BitsEq for f64 {
        fn to_bits_eq(self, other: Self) -> bool {
            self.to_bits() == other.to_bits()
        }
    }

    #[test]
    fn display_round_trips() {
        for v in [0.1f64, -1.0 / 3.0, 1e-300, 123456.789e10, f64::MIN_POSITIVE] {
            assert!(roundtrip(v), "{v}");
        }
        for v in [0.1f32, -1.0 / 3.0, 1e-30, f32::MAX] {
            assert!(roundtrip(v), "{v}");
        }
    }

    #[test]
    fn lit_converts() {
        assert_eq!(f32::lit(0.5), 0.5f32);
        assert_eq!(f64::lit(0.2), 0.2f64);
        assert_eq!(0.25f32.as_f64(), 0.25);
    }
}
