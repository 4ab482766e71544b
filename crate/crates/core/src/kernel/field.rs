use std::fmt;
use std::sync::Arc;

use crate::equilibrium::PrescribedField;
use crate::error::{usage, Error, Result};
use crate::kernel::norm_sq;
use crate::scalar::Scalar;

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type PointFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

/// Confinement potential `V: R^d -> R` acting on every particle.
#[derive(Clone)]
pub enum ExternalField<T: Scalar> {
    /// `V(x) = v(|x|)`.
    Radial(RadialProfile<T>),
    /// `V(x) = -U(x) + [|x|^2 - R]_+` for a target potential `U`.
    Prescribed(PrescribedField<T>),
    /// Arbitrary field with a user supplied gradient.
    Custom(CustomField<T>),
}

/// Radial profile `v(r)` of a radially symmetric field.
#[derive(Clone)]
pub enum RadialProfile<T: Scalar> {
    /// `v(r) = r^2`
    Quadratic,
    /// `v(r) = r^p`, `p > 0`
    Power(T),
    Table(RadialTable<T>),
    Function(RadialFunction<T>),
}

/// Closure-backed radial profile.
#[derive(Clone)]
pub struct RadialFunction<T> {
    v: ScalarFn<T>,
    dv: ScalarFn<T>,
    d2v: Option<ScalarFn<T>>,
}

/// Field given through a value and gradient evaluator.
#[derive(Clone)]
pub struct CustomField<T> {
    dim: usize,
    value: PointFn<T>,
    gradient: GradFn<T>,
}

/// Tabulated radial profile `r -> (v, v')` on increasing radii.
///
/// Both columns are linearly interpolated. Queries beyond the last node
/// extrapolate with the last slope of each column; queries below the first
/// node extrapolate with the first slope.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialTable<T> {
    radii: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Scalar> RadialTable<T> {
    pub fn new(radii: Vec<T>, values: Vec<T>, slopes: Vec<T>) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() || radii.len() != slopes.len() {
            return Err(usage!("radial table needs >= 2 rows of equal length columns"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] < T::zero() {
            return Err(usage!("radial table radii must be nonnegative and strictly increasing"));
        }
        if values.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(usage!("radial table contains non-finite entries"));
        }
        Ok(RadialTable { radii, values, slopes })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    /// Largest tabulated radius; queries beyond it are extrapolated.
    pub fn max_radius(&self) -> T {
        *self.radii.last().unwrap()
    }

    fn interp(&self, column: &[T], r: T) -> T {
        let n = self.radii.len();
        let k = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (r0, r1) = (self.radii[k], self.radii[k + 1]);
        let t = (r - r0) / (r1 - r0);
        column[k] + t * (column[k + 1] - column[k])
    }

    fn slope_of(&self, column: &[T], r: T) -> T {
        let n = self.radii.len();
        let k = match self.radii.partition_point(|&x| x <= r) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        (column[k + 1] - column[k]) / (self.radii[k + 1] - self.radii[k])
    }
}

impl<T: Scalar> RadialFunction<T> {
    pub fn new(
        v: impl Fn(T) -> T + Send + Sync + 'static,
        dv: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        RadialFunction { v: Arc::new(v), dv: Arc::new(dv), d2v: None }
    }

    /// Supplies `v''`, used for the equilibrium density instead of finite differences.
    pub fn with_second_derivative(mut self, d2v: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.d2v = Some(Arc::new(d2v));
        self
    }
}

impl<T: Scalar> CustomField<T> {
    pub fn new(
        dim: usize,
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        gradient: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        CustomField { dim, value: Arc::new(value), gradient: Arc::new(gradient) }
    }
}

impl<T: Scalar> RadialProfile<T> {
    pub fn power(p: T) -> Result<Self> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(usage!("power field needs p > 0, got {p}"));
        }
        Ok(RadialProfile::Power(p))
    }

    pub fn v(&self, r: T) -> T {
        match self {
            RadialProfile::Quadratic => r * r,
            RadialProfile::Power(p) => r.powf(*p),
            RadialProfile::Table(t) => t.interp(&t.values, r),
            RadialProfile::Function(f) => (f.v)(r),
        }
    }

    pub fn dv(&self, r: T) -> T {
        match self {
            RadialProfile::Quadratic => r + r,
            RadialProfile::Power(p) => {
                if *p == T::one() {
                    T::one()
                } else {
                    *p * r.powf(*p - T::one())
                }
            }
            RadialProfile::Table(t) => t.interp(&t.slopes, r),
            RadialProfile::Function(f) => (f.dv)(r),
        }
    }

    /// `v''(r)` when known analytically.
    pub fn d2v(&self, r: T) -> Option<T> {
        match self {
            RadialProfile::Quadratic => Some(T::lit(2.0)),
            RadialProfile::Power(p) => {
                let p = *p;
                if p == T::one() {
                    Some(T::zero())
                } else if p == T::lit(2.0) {
                    Some(T::lit(2.0))
                } else {
                    Some(p * (p - T::one()) * r.powf(p - T::lit(2.0)))
                }
            }
            RadialProfile::Table(t) => Some(t.slope_of(&t.slopes, r)),
            RadialProfile::Function(f) => f.d2v.as_ref().map(|g| g(r)),
        }
    }

    /// `w(r) = r^{d-1} v'(r)`.
    pub fn w(&self, r: T, d: usize) -> T {
        r.powi(d as i32 - 1) * self.dv(r)
    }
}

impl<T: Scalar> ExternalField<T> {
    pub fn quadratic() -> Self {
        ExternalField::Radial(RadialProfile::Quadratic)
    }

    pub fn power(p: T) -> Result<Self> {
        RadialProfile::power(p).map(ExternalField::Radial)
    }

    /// Fixed dimension of the field, if it has one (radial fields work in any dimension).
    pub fn dim(&self) -> Option<usize> {
        match self {
            ExternalField::Radial(_) => None,
            ExternalField::Prescribed(p) => Some(p.dim()),
            ExternalField::Custom(c) => Some(c.dim),
        }
    }

    pub fn radial_profile(&self) -> Option<&RadialProfile<T>> {
        match self {
            ExternalField::Radial(p) => Some(p),
            _ => None,
        }
    }

    /// True when `V(x)` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match self {
            ExternalField::Radial(_) => true,
            ExternalField::Prescribed(p) => p.is_radial(),
            ExternalField::Custom(_) => false,
        }
    }

    #[inline]
    pub fn value(&self, x: &[T]) -> T {
        match self {
            ExternalField::Radial(p) => match p {
                RadialProfile::Quadratic => norm_sq(x),
                _ => p.v(norm_sq(x).sqrt()),
            },
            ExternalField::Prescribed(p) => p.value(x),
            ExternalField::Custom(c) => (c.value)(x),
        }
    }

    /// Writes `grad V(x)` into `out`.
    ///
    /// For radial profiles `grad V(0)` is `0` when `v'(0) = 0` and a
    /// singularity otherwise.
    pub fn gradient(&self, x: &[T], out: &mut [T]) -> Result<()> {
        match self {
            ExternalField::Radial(RadialProfile::Quadratic) => {
                for (o, &a) in out.iter_mut().zip(x) {
                    *o = a + a;
                }
            }
            ExternalField::Radial(p) => {
                let r = norm_sq(x).sqrt();
                if r == T::zero() {
                    let dv0 = p.dv(T::zero());
                    if dv0 != T::zero() {
                        return Err(Error::Singularity(format!(
                            "radial field gradient at the origin with v'(0) = {dv0}"
                        )));
                    }
                    out.iter_mut().for_each(|o| *o = T::zero());
                } else {
                    let s = p.dv(r) / r;
                    for (o, &a) in out.iter_mut().zip(x) {
                        *o = s * a;
                    }
                }
            }
            ExternalField::Prescribed(p) => p.gradient(x, out)?,
            ExternalField::Custom(c) => (c.gradient)(x, out),
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Debug for RadialProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Quadratic => write!(f, "Quadratic"),
            RadialProfile::Power(p) => write!(f, "Power({p})"),
            RadialProfile::Table(t) => write!(f, "Table({} rows)", t.radii.len()),
            RadialProfile::Function(_) => write!(f, "Function"),
        }
    }
}

impl<T: Scalar> fmt::Debug for ExternalField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExternalField::Radial(p) => write!(f, "Radial({p:?})"),
            ExternalField::Prescribed(p) => write!(f, "Prescribed(hinge = {})", p.hinge()),
            ExternalField::Custom(c) => write!(f, "Custom(d = {})", c.dim),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd_check(profile: &RadialProfile<f64>, d: usize) {
        for &r in &[0.3, 0.8, 1.7] {
            let h = 1e-6;
            let fd_v = (profile.v(r + h) - profile.v(r - h)) / (2.0 * h);
            assert_relative_eq!(fd_v, profile.dv(r), max_relative = 1e-7);
            let fd_w = (profile.w(r + h, d) - profile.w(r - h, d)) / (2.0 * h);
            let w_prime = (d as f64 - 1.0) * r.powi(d as i32 - 2) * profile.dv(r)
                + r.powi(d as i32 - 1) * profile.d2v(r).unwrap();
            assert_relative_eq!(fd_w, w_prime, max_relative = 1e-6);
        }
    }

    #[test]
    fn builtin_profiles_are_consistent() {
        fd_check(&RadialProfile::Quadratic, 3);
        fd_check(&RadialProfile::Power(4.0), 3);
        fd_check(&RadialProfile::Power(1.5), 4);
        let f = RadialFunction::new(|r: f64| (r - 1.0).powi(2), |r| 2.0 * (r - 1.0))
            .with_second_derivative(|_| 2.0);
        fd_check(&RadialProfile::Function(f), 3);
    }

    #[test]
    fn builtin_fields_confine() {
        for field in [ExternalField::quadratic(), ExternalField::power(0.5).unwrap()] {
            let mut last = f64::NEG_INFINITY;
            for k in 1..40 {
                let r = 1.5f64.powi(k);
                let v = field.value(&[r, 0.0, 0.0]);
                assert!(v.is_finite() && v > last);
                last = v;
            }
            assert!(last > 1e3);
        }
    }

    #[test]
    fn gradient_at_origin() {
        let mut g = [1.0; 3];
        ExternalField::quadratic().gradient(&[0.0; 3], &mut g).unwrap();
        assert_eq!(g, [0.0; 3]);
        ExternalField::power(4.0).unwrap().gradient(&[0.0; 3], &mut g).unwrap();
        assert_eq!(g, [0.0; 3]);
        let err = ExternalField::power(1.0).unwrap().gradient(&[0.0; 3], &mut g);
        assert!(matches!(err, Err(Error::Singularity(_))));
        ExternalField::quadratic().gradient(&[1.0, 0.0, 0.0], &mut g).unwrap();
        assert_eq!(g, [2.0, 0.0, 0.0]);
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let t = RadialTable::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 4.0], vec![0.0, 2.0, 4.0]).unwrap();
        let p = RadialProfile::Table(t);
        assert_eq!(p.v(0.5), 0.5);
        assert_eq!(p.v(1.5), 2.5);
        assert_eq!(p.v(3.0), 7.0);
        assert_eq!(p.dv(3.0), 6.0);
        assert_eq!(p.d2v(1.2), Some(2.0));
        assert!(RadialTable::new(vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(RadialTable::<f64>::new(vec![0.0], vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn invalid_power() {
        assert!(ExternalField::<f64>::power(0.0).is_err());
        assert!(ExternalField::<f64>::power(-1.0).is_err());
    }
}
