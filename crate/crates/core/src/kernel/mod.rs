//! Interaction kernels, external fields and the configuration energy.
//!
//! The energy of `N` particles `x_1, ..., x_N` in `R^d` is
//!
//! ```text
//! H_N(x) = (1/N) sum_i V(x_i) + (beta/N^2) sum_{i<j} k(x_i - x_j)
//! ```
//!
//! with `k` a Riesz kernel `|x|^{-(d-alpha)}` or the Coulomb kernel of
//! dimension `d` and `beta > 0` the pair coupling.

mod energy;
mod field;

pub use energy::{
    energy_and_gradient, energy_delta, energy_gradient, total_energy, Configuration, GasModel,
    Summation,
};
pub(crate) use energy::delta_unchecked;
pub use field::{CustomField, ExternalField, RadialFunction, RadialProfile, RadialTable};

use crate::error::{usage, Error, Result};
use crate::scalar::{gamma, unit_ball_volume, Scalar};

/// Pair interaction kernel `k(x - y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelSpec<T> {
    /// `|x|^{-(d - alpha)}`, `0 < alpha < d`.
    Riesz { d: usize, alpha: T },
    /// `-|x|` for `d = 1`, `log(1/|x|)` for `d = 2`, `|x|^{2-d}` for `d >= 3`.
    Coulomb { d: usize },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn riesz(d: usize, alpha: T) -> Result<Self> {
        if d == 0 {
            return Err(usage!("Riesz kernel needs d >= 1"));
        }
        if !(alpha > T::zero() && alpha < T::of_usize(d)) {
            return Err(usage!("Riesz kernel needs 0 < alpha < d, got alpha = {alpha}, d = {d}"));
        }
        Ok(KernelSpec::Riesz { d, alpha })
    }

    pub fn coulomb(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(usage!("Coulomb kernel needs d >= 1"));
        }
        Ok(KernelSpec::Coulomb { d })
    }

    pub fn dim(&self) -> usize {
        match *self {
            KernelSpec::Riesz { d, .. } | KernelSpec::Coulomb { d } => d,
        }
    }

    /// The Riesz exponent `alpha`, when the kernel is of Riesz type
    /// (Coulomb with `d >= 3` is Riesz with `alpha = 2`).
    pub fn riesz_alpha(&self) -> Option<T> {
        match *self {
            KernelSpec::Riesz { alpha, .. } => Some(alpha),
            KernelSpec::Coulomb { d } if d >= 3 => Some(T::lit(2.0)),
            KernelSpec::Coulomb { .. } => None,
        }
    }

    /// True when the kernel is the Newtonian `|x|^{2-d}`, `d >= 3`.
    pub fn is_newtonian(&self) -> bool {
        self.dim() >= 3 && self.riesz_alpha() == Some(T::lit(2.0))
    }

    /// Constant `c` with `-c Laplacian k = delta_0` (Coulomb) or
    /// `-c_alpha Laplacian_alpha k = delta_0` (Riesz).
    pub fn fundamental_constant(&self) -> T {
        let pi = T::PI();
        match *self {
            KernelSpec::Coulomb { d: 1 } => T::lit(0.5),
            KernelSpec::Coulomb { d: 2 } => T::one() / (pi + pi),
            KernelSpec::Coulomb { d } => {
                let d_t = T::of_usize(d);
                T::one() / (d_t * (d_t - T::lit(2.0)) * unit_ball_volume::<T>(d))
            }
            KernelSpec::Riesz { d, alpha } => {
                let half = T::lit(0.5);
                let d_t = T::of_usize(d);
                pi.powf(alpha - d_t * half) / (T::lit(4.0) * pi * pi)
                    * gamma((d_t - alpha) * half)
                    / gamma(alpha * half)
            }
        }
    }

    pub(crate) fn pair(&self) -> PairKernel<T> {
        PairKernel::new(self)
    }

    fn check_dims(&self, x: &[T], y: &[T]) -> Result<()> {
        let d = self.dim();
        if x.len() != d || y.len() != d {
            return Err(usage!(
                "kernel of dimension {d} evaluated at points of dimension {} and {}",
                x.len(),
                y.len()
            ));
        }
        Ok(())
    }
}

/// `k(x - y)`; `+inf` on the diagonal for the singular kernels.
pub fn eval_kernel<T: Scalar>(spec: &KernelSpec<T>, x: &[T], y: &[T]) -> Result<T> {
    spec.check_dims(x, y)?;
    Ok(spec.pair().value(dist_sq(x, y)))
}

/// `grad_x k(x - y)`.
pub fn eval_kernel_gradient<T: Scalar>(spec: &KernelSpec<T>, x: &[T], y: &[T]) -> Result<Vec<T>> {
    spec.check_dims(x, y)?;
    let r2 = dist_sq(x, y);
    if r2 == T::zero() {
        return Err(Error::Singularity("kernel gradient at x = y".into()));
    }
    let (_, g) = spec.pair().value_and_factor(r2);
    Ok(x.iter().zip(y).map(|(&a, &b)| g * (a - b)).collect())
}

#[inline]
pub(crate) fn dist_sq<T: Scalar>(x: &[T], y: &[T]) -> T {
    let mut s = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        let t = a - b;
        s = s + t * t;
    }
    s
}

#[inline]
pub(crate) fn norm_sq<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &a| s + a * a)
}

/// Kernel specialised on its exponent, evaluated from squared distances.
#[derive(Clone, Copy, Debug)]
pub(crate) enum PairKernel<T> {
    /// `r^{-1}`
    InvR,
    /// `r^{-2}`
    InvR2,
    /// `r^{-s}`, general `s`
    InvPow { s: T },
    /// `log(1/r)`
    Log,
    /// `-r`
    NegAbs,
}

impl<T: Scalar> PairKernel<T> {
    fn new(spec: &KernelSpec<T>) -> Self {
        let s = match *spec {
            KernelSpec::Coulomb { d: 1 } => return PairKernel::NegAbs,
            KernelSpec::Coulomb { d: 2 } => return PairKernel::Log,
            KernelSpec::Coulomb { d } => T::of_usize(d - 2),
            KernelSpec::Riesz { d, alpha } => T::of_usize(d) - alpha,
        };
        if s == T::one() {
            PairKernel::InvR
        } else if s == T::lit(2.0) {
            PairKernel::InvR2
        } else {
            PairKernel::InvPow { s }
        }
    }

    #[inline]
    pub(crate) fn value(&self, r2: T) -> T {
        match *self {
            PairKernel::InvR => T::one() / r2.sqrt(),
            PairKernel::InvR2 => T::one() / r2,
            PairKernel::InvPow { s } => {
                if r2 == T::zero() {
                    T::infinity()
                } else {
                    r2.powf(-s * T::lit(0.5))
                }
            }
            PairKernel::Log => -T::lit(0.5) * r2.ln(),
            PairKernel::NegAbs => -r2.sqrt(),
        }
    }

    /// Returns `(k, g)` with `grad_x k(x - y) = g (x - y)`.
    #[inline]
    pub(crate) fn value_and_factor(&self, r2: T) -> (T, T) {
        match *self {
            PairKernel::InvR => {
                let inv = T::one() / r2.sqrt();
                (inv, -inv * inv * inv)
            }
            PairKernel::InvR2 => {
                let inv = T::one() / r2;
                (inv, -(inv + inv) * inv)
            }
            PairKernel::InvPow { s } => {
                let k = r2.powf(-s * T::lit(0.5));
                (k, -s * k / r2)
            }
            PairKernel::Log => (-T::lit(0.5) * r2.ln(), -T::one() / r2),
            PairKernel::NegAbs => {
                let r = r2.sqrt();
                (-r, -T::one() / r)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn riesz_values() {
        let k = KernelSpec::riesz(3, 2.0).unwrap();
        assert_eq!(eval_kernel(&k, &[1.0, 0.0, 0.0], &[0.0; 3]).unwrap(), 1.0);
        let k = KernelSpec::riesz(3, 1.0).unwrap();
        assert_relative_eq!(eval_kernel(&k, &[2.0, 0.0, 0.0], &[0.0; 3]).unwrap(), 0.25);
        let k = KernelSpec::riesz(3, 0.5).unwrap();
        assert_eq!(eval_kernel(&k, &[0.3, 0.1, 0.2], &[0.3, 0.1, 0.2]).unwrap(), f64::INFINITY);
        let k = KernelSpec::coulomb(3).unwrap();
        assert_eq!(eval_kernel(&k, &[0.0; 3], &[0.0; 3]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn low_dimensional_coulomb() {
        let k1 = KernelSpec::coulomb(1).unwrap();
        assert_eq!(eval_kernel(&k1, &[2.5], &[-0.5]).unwrap(), -3.0);
        let k2 = KernelSpec::coulomb(2).unwrap();
        assert_relative_eq!(eval_kernel(&k2, &[2.0, 0.0], &[0.0, 0.0]).unwrap(), -(2.0f64.ln()));
        assert_eq!(eval_kernel(&k2, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), f64::INFINITY);
        let g = eval_kernel_gradient(&k1, &[2.0], &[0.5]).unwrap();
        assert_eq!(g, vec![-1.0]);
        let g = eval_kernel_gradient(&k2, &[2.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_relative_eq!(g[0], -0.5);
    }

    #[test]
    fn invalid_specs_and_dimensions() {
        assert!(KernelSpec::riesz(3, 3.0).is_err());
        assert!(KernelSpec::riesz(3, 0.0).is_err());
        assert!(KernelSpec::<f64>::coulomb(0).is_err());
        let k = KernelSpec::coulomb(3).unwrap();
        assert!(matches!(eval_kernel(&k, &[1.0, 0.0], &[0.0; 3]), Err(Error::Usage(_))));
        assert!(matches!(
            eval_kernel_gradient(&k, &[1.0; 3], &[1.0; 3]),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn gradient_closed_form() {
        let k = KernelSpec::riesz(3, 2.0).unwrap();
        let g = eval_kernel_gradient(&k, &[1.0, 0.0, 0.0], &[0.0; 3]).unwrap();
        assert_eq!(g, vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let specs = [
            KernelSpec::riesz(3, 2.0).unwrap(),
            KernelSpec::riesz(3, 0.7).unwrap(),
            KernelSpec::riesz(2, 1.3).unwrap(),
            KernelSpec::coulomb(2).unwrap(),
            KernelSpec::coulomb(4).unwrap(),
        ];
        for spec in specs {
            let d = spec.dim();
            let y = vec![0.1f64; d];
            let mut x = y.clone();
            // |x - y| = 0.7
            if d == 1 {
                x[0] += 0.7;
            } else {
                x[0] += 0.7 * 0.6;
                x[d - 1] += 0.7 * 0.8;
            }
            assert_relative_eq!(dist_sq(&x, &y).sqrt(), 0.7, max_relative = 1e-14);
            let g = eval_kernel_gradient(&spec, &x, &y).unwrap();
            let h = 1e-5;
            for a in 0..d {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[a] += h;
                xm[a] -= h;
                let fd = (eval_kernel(&spec, &xp, &y).unwrap() - eval_kernel(&spec, &xm, &y).unwrap())
                    / (2.0 * h);
                if g[a].abs() > 1e-12 {
                    assert!(((fd - g[a]) / g[a]).abs() < 1e-6, "{spec:?} axis {a}: {fd} vs {}", g[a]);
                }
            }
        }
    }

    #[test]
    fn coulomb_matches_riesz_two_in_high_dimension() {
        for d in 3..7 {
            let c = KernelSpec::coulomb(d).unwrap();
            let r = KernelSpec::riesz(d, 2.0).unwrap();
            let x: Vec<f64> = (0..d).map(|i| 0.3 * i as f64 - 0.2).collect();
            let y = vec![0.05; d];
            assert_eq!(eval_kernel(&c, &x, &y).unwrap(), eval_kernel(&r, &x, &y).unwrap());
            assert_relative_eq!(c.fundamental_constant(), r.fundamental_constant(), max_relative = 1e-12);
        }
    }

    #[test]
    fn fundamental_constants() {
        use std::f64::consts::PI;
        assert_eq!(KernelSpec::<f64>::coulomb(1).unwrap().fundamental_constant(), 0.5);
        assert_relative_eq!(KernelSpec::<f64>::coulomb(2).unwrap().fundamental_constant(), 1.0 / (2.0 * PI));
        // d = 3: 1 / (3 * 1 * 4 pi / 3) = 1 / (4 pi)
        assert_relative_eq!(
            KernelSpec::<f64>::coulomb(3).unwrap().fundamental_constant(),
            1.0 / (4.0 * PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn single_precision_kernel() {
        let k = KernelSpec::<f32>::riesz(3, 1.0).unwrap();
        let v = eval_kernel(&k, &[2.0f32, 0.0, 0.0], &[0.0; 3]).unwrap();
        assert!((v - 0.25).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn kernel_is_symmetric(
            x in prop::collection::vec(-3.0f64..3.0, 3),
            y in prop::collection::vec(-3.0f64..3.0, 3),
            alpha in 0.1f64..2.9,
        ) {
            prop_assume!(dist_sq(&x, &y) > 1e-12);
            let k = KernelSpec::riesz(3, alpha).unwrap();
            prop_assert_eq!(eval_kernel(&k, &x, &y).unwrap(), eval_kernel(&k, &y, &x).unwrap());
            let gx = eval_kernel_gradient(&k, &x, &y).unwrap();
            let gy = eval_kernel_gradient(&k, &y, &x).unwrap();
            for a in 0..3 {
                prop_assert_eq!(gx[a], -gy[a]);
            }
        }

        #[test]
        fn riesz_homogeneity(
            x in prop::collection::vec(-3.0f64..3.0, 3),
            lambda in 0.05f64..20.0,
            alpha in 0.1f64..2.9,
        ) {
            prop_assume!(norm_sq(&x) > 1e-6);
            let k = KernelSpec::riesz(3, alpha).unwrap();
            let zero = [0.0; 3];
            let scaled: Vec<f64> = x.iter().map(|v| v * lambda).collect();
            let lhs = eval_kernel(&k, &scaled, &zero).unwrap();
            let rhs = lambda.powf(-(3.0 - alpha)) * eval_kernel(&k, &x, &zero).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }
    }
}
