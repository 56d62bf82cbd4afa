//! Scalar abstraction shared by every numeric container in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar type usable for sensorimotor data, datasets and models: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, rounding to the nearest representable value.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("f64 is representable in every Scalar")
    }

    /// Widens to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar always widens to f64")
    }

    /// Formats with 17 significant digits, the text form used by every file writer.
    fn to_text(self) -> String {
        format!("{:.16e}", self)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
