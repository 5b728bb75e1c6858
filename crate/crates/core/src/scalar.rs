//! Scalar abstraction for the numerical kernels.
//!
//! Everything in this crate that does arithmetic is generic over [`Real`],
//! which bundles the `num-traits` float surface with the two operations the
//! float traits do not provide: the complementary error function and seeded
//! sampling. `f32` and `f64` implement it; the experiment drivers run in
//! `f64`.

use std::fmt;
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum<Self>
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Complementary error function `erfc(x) = 1 - erf(x)`.
    fn erfc(self) -> Self;

    /// One draw from the standard normal distribution.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One draw from the uniform distribution on `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Real for f64 {
    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

impl Real for f32 {
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        StandardNormal.sample(rng)
    }

    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random()
    }
}

/// Convert an `f64` literal into the working scalar.
///
/// Panics if the value is not representable, which cannot happen for the
/// finite literals this crate uses.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("literal not representable in scalar type")
}

/// Complex number over the working scalar.
pub type Cplx<T> = Complex<T>;

/// Draw a circularly-symmetric complex Gaussian with total variance
/// `variance` (each real component has variance `variance / 2`).
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Cplx<T> {
    let s = (variance / real::<T>(2.0)).sqrt();
    let re = T::standard_normal(rng) * s;
    let im = T::standard_normal(rng) * s;
    Complex::new(re, im)
}
