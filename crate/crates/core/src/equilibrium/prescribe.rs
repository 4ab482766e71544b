use std::sync::Arc;

use super::potential::RieszPotential;
use crate::error::{usage, Result};
use crate::kernel::{norm_sq, ExternalField, RadialTable};
use crate::scalar::Scalar;

/// `V(x) = -U(x) + [|x|^2 - R]_+`, where `U` is the Riesz potential of a
/// target measure supported in `B(0, R)`.
#[derive(Clone)]
pub struct PrescribedField<T: Scalar> {
    source: Arc<dyn RieszPotential<T>>,
    hinge: T,
}

impl<T: Scalar> PrescribedField<T> {
    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn is_radial(&self) -> bool {
        self.source.is_radial()
    }

    pub fn hinge(&self) -> T {
        self.hinge
    }

    pub fn target(&self) -> &dyn RieszPotential<T> {
        self.source.as_ref()
    }

    pub fn value(&self, x: &[T]) -> T {
        let excess = norm_sq(x) - self.hinge;
        -self.source.potential(x) + excess.max(T::zero())
    }

    pub fn gradient(&self, x: &[T], out: &mut [T]) -> Result<()> {
        self.source.potential_gradient(x, out);
        let outside = norm_sq(x) > self.hinge;
        for (o, &a) in out.iter_mut().zip(x) {
            *o = -*o;
            if outside {
                *o = *o + a + a;
            }
        }
        Ok(())
    }

    /// Tabulates `r -> (V, V')` along a ray on `points` equally spaced radii
    /// in `[0, r_max]`. Only meaningful for radial targets.
    pub fn tabulate(&self, r_max: T, points: usize) -> Result<RadialTable<T>> {
        if !self.is_radial() {
            return Err(usage!("only radial prescribed fields can be tabulated"));
        }
        if points < 2 || !(r_max > T::zero()) {
            return Err(usage!("tabulation needs r_max > 0 and at least 2 points"));
        }
        let d = self.dim();
        let mut x = vec![T::zero(); d];
        let mut g = vec![T::zero(); d];
        let step = r_max / T::of_usize(points - 1);
        let (mut radii, mut values, mut slopes) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..points {
            let r = if k + 1 == points { r_max } else { step * T::of_usize(k) };
            x[0] = r;
            self.gradient(&x, &mut g)?;
            radii.push(r);
            values.push(self.value(&x));
            slopes.push(g[0]);
        }
        RadialTable::new(radii, values, slopes)
    }
}

/// Builds the external field whose equilibrium measure is `target`, for the
/// pair interaction `k_alpha` with unit coupling.
///
/// `R` must satisfy `supp(target) ⊂ B(0, R)`.
pub fn prescribed_field<T: Scalar>(
    target: Arc<dyn RieszPotential<T>>,
    alpha: T,
    d: usize,
    r_hinge: T,
) -> Result<ExternalField<T>> {
    if target.dim() != d {
        return Err(usage!("target lives in dimension {}, field requested in {d}", target.dim()));
    }
    if target.alpha() != alpha {
        return Err(usage!("target potential has alpha = {}, field requested with {alpha}", target.alpha()));
    }
    if !(r_hinge > T::zero()) || !(target.support_radius() < r_hinge) {
        return Err(usage!(
            "target support radius {} is not inside B(0, {r_hinge})",
            target.support_radius()
        ));
    }
    Ok(ExternalField::Prescribed(PrescribedField { source: target, hinge: r_hinge }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::RadialDensity;
    use approx::assert_relative_eq;

    fn ball_field() -> ExternalField<f64> {
        let ball = RadialDensity::<f64>::uniform_ball(3, 1.0).unwrap();
        prescribed_field(Arc::new(ball), 2.0, 3, 2.0).unwrap()
    }

    #[test]
    fn uniform_ball_values() {
        let v = ball_field();
        assert_relative_eq!(v.value(&[0.0, 0.0, 0.0]), -1.5, max_relative = 1e-12);
        assert_relative_eq!(v.value(&[0.0, 1.0, 0.0]), -1.0, max_relative = 1e-12);
        assert_relative_eq!(v.value(&[0.0, 0.0, 2.0]), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn potential_plus_field_vanishes_inside_hinge() {
        let ball = RadialDensity::<f64>::uniform_ball(3, 1.0).unwrap();
        let v = ball_field();
        for k in 0..=300 {
            let r = 3.0 * k as f64 / 300.0;
            let x = [r, 0.0, 0.0];
            let total = ball.potential(&x) + v.value(&x);
            if r * r <= 2.0 {
                assert!(total.abs() < 1e-9, "r = {r}: {total}");
            } else {
                assert!(total >= -1e-9);
            }
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let v = ball_field();
        let mut g = [0.0; 3];
        for x in [[0.3, -0.2, 0.5], [0.9, 0.8, 0.1], [1.2, 0.4, -1.0]] {
            v.gradient(&x, &mut g).unwrap();
            for a in 0..3 {
                let h = 1e-6;
                let (mut up, mut down) = (x, x);
                up[a] += h;
                down[a] -= h;
                let fd = (v.value(&up) - v.value(&down)) / (2.0 * h);
                assert!((fd - g[a]).abs() < 1e-6, "{x:?} axis {a}: {fd} vs {}", g[a]);
            }
        }
    }

    #[test]
    fn support_outside_hinge_rejected() {
        let ball = RadialDensity::<f64>::uniform_ball(3, 1.0).unwrap();
        assert!(prescribed_field(Arc::new(ball.clone()), 2.0, 3, 0.9).is_err());
        assert!(prescribed_field(Arc::new(ball.clone()), 1.0, 3, 2.0).is_err());
        assert!(prescribed_field(Arc::new(ball), 2.0, 4, 2.0).is_err());
    }

    #[test]
    fn tabulated_field_tracks_exact_field() {
        let ExternalField::Prescribed(p) = ball_field() else { unreachable!() };
        let table = p.tabulate(3.0, 3001).unwrap();
        assert_relative_eq!(table.values()[0], -1.5, max_relative = 1e-12);
        let tabulated = ExternalField::Radial(crate::kernel::RadialProfile::Table(table));
        for r in [0.05, 0.5, 0.99, 1.3, 2.2] {
            let x = [0.0, r, 0.0];
            assert!((tabulated.value(&x) - p.value(&x)).abs() < 1e-5);
        }
    }
}
