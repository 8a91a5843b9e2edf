//! Scalar abstraction the numeric core is generic over.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable throughout the crate.
///
/// Implemented for `f32` and `f64` via the blanket impl below.
pub trait Real:
    Float + FromPrimitive + Sum<Self> + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a finite `f64` constant, panicking only if the type cannot
    /// represent any `f64` at all (never for `f32`/`f64`).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant must convert to scalar type")
    }

    /// Lossy widening to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar must widen to f64")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Sum<T> + Debug + Display + Default + Send + Sync + 'static
{
}

/// Derives an independent RNG seed from a base seed and a stream index
/// (splitmix64 finalizer), so substreams never depend on iteration order.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut x = seed.wrapping_add(stream.wrapping_mul(0xC2B2_AE3D_27D4_EB4F));
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
