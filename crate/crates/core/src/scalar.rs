//! Scalar types used for densities and deficits.
//!
//! Counting produces exact integers; [`Scalar`] turns integer ratios into
//! whichever number type the caller wants. The exact choice is
//! [`crate::Rational`]; `f32` and `f64` are available for diagnostics.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, Num, Signed, ToPrimitive};

/// A number type densities can be expressed in.
pub trait Scalar: Num + Signed + Clone + Debug + PartialOrd {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    fn from_bigint(v: &BigInt) -> Self {
        Self::from_ratio(v, &BigInt::from(1))
    }

    /// Lossy conversion used for printing and float cross-checks.
    fn to_f64(&self) -> f64;

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }

    /// Whether arithmetic in this type is exact.
    const EXACT: bool;
}

impl Scalar for BigRational {
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_f64(&self) -> f64 {
        let n = self.numer().to_f64().unwrap_or(f64::NAN);
        let d = self.denom().to_f64().unwrap_or(f64::NAN);
        if n.is_finite() && d.is_finite() {
            n / d
        } else {
            // Scale down both sides until they fit.
            let shift = self.numer().bits().max(self.denom().bits()).saturating_sub(1000);
            let n = (self.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (self.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }

    const EXACT: bool = true;
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
                let r = BigRational::new(num.clone(), den.clone());
                <BigRational as Scalar>::to_f64(&r) as $t
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn powi(&self, k: u32) -> Self {
                <$t>::powi(*self, k as i32)
            }

            const EXACT: bool = false;
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

/// Real scalar for Fourier computations.
pub trait Real: Float + FloatConst + Debug + Send + Sync + std::iter::Sum + 'static {}

impl Real for f32 {}
impl Real for f64 {}

/// Renders a rational as `"num/den"` (always with a denominator).
pub fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Serde adapter writing rationals as `"num/den"` strings.
pub mod serde_rational {
    use num_rational::BigRational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::rational_string(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse_rational(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

/// Serde adapter writing big integers as decimal strings.
pub mod serde_biguint {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad integer {s:?}")))
    }
}
