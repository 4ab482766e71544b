//! Floating point abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Real scalar type the simulator is generic over: `f32` or `f64`.
///
/// Tolerances quoted throughout the documentation assume `f64`; `f32`
/// works for exploratory runs and kernel evaluation.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    fn of_usize(n: usize) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// One standard Gaussian draw.
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// One uniform draw in `[0, 1)`.
    fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn of_usize(n: usize) -> Self {
                n as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn unit_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random::<$t>()
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Surface area of the unit sphere of `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn unit_sphere_area<T: Scalar>(d: usize) -> T {
    // sigma_1 = 2, sigma_2 = 2 pi, sigma_{d+2} = 2 pi sigma_d / d
    let two_pi = T::PI() + T::PI();
    let (mut area, mut k) = if d % 2 == 1 {
        (T::lit(2.0), 1)
    } else {
        (two_pi, 2)
    };
    while k < d {
        area = area * two_pi / T::of_usize(k);
        k += 2;
    }
    area
}

/// Volume of the unit ball of `R^d`.
pub fn unit_ball_volume<T: Scalar>(d: usize) -> T {
    unit_sphere_area::<T>(d) / T::of_usize(d)
}

/// Gamma function, evaluated in double precision.
pub(crate) fn gamma<T: Scalar>(x: T) -> T {
    T::lit(libm::tgamma(x.to_f64_lossy()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(unit_sphere_area::<f64>(1), 2.0);
        assert_relative_eq!(unit_sphere_area::<f64>(2), 2.0 * PI);
        assert_relative_eq!(unit_sphere_area::<f64>(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area::<f64>(4), 2.0 * PI * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume::<f64>(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        for d in 1..9 {
            let via_gamma = 2.0 * PI.powf(d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0);
            assert_relative_eq!(unit_sphere_area::<f64>(d), via_gamma, max_relative = 1e-13);
        }
    }
}
