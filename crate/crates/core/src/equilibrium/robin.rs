use super::potential::radial_coulomb_potential;
use crate::equilibrium::RadialDensity;
use crate::error::{usage, Error, Result};
use crate::kernel::GasModel;
use crate::scalar::Scalar;

/// Grid surrogate of the Euler-Lagrange conditions `U + V = C` on the support
/// and `U + V >= C` off it, with `U` the potential of `beta k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElResidual<T> {
    pub on_support_max_dev: T,
    /// `+inf` when the grid has no off-support point.
    pub off_support_min_excess: T,
    pub fitted_c: T,
}

fn check_model<T: Scalar>(density: &RadialDensity<T>, model: &GasModel<T>) -> Result<()> {
    if !model.kernel.is_newtonian() {
        return Err(Error::Unsupported("radial potentials are only available for the Newtonian kernel".into()));
    }
    if model.kernel.dim() != density.dim() {
        return Err(usage!("model dimension {} differs from density dimension {}", model.kernel.dim(), density.dim()));
    }
    if !model.field.is_radial() {
        return Err(Error::Unsupported("radial potential checks need a radial external field".into()));
    }
    Ok(())
}

fn total_potential<T: Scalar>(density: &RadialDensity<T>, model: &GasModel<T>, r: T, x: &mut [T]) -> T {
    x[0] = r;
    model.coupling * radial_coulomb_potential(density, r) + model.field.value(x)
}

/// `C = int (beta U^mu + V) dmu` by radial quadrature.
pub fn robin_constant<T: Scalar>(density: &RadialDensity<T>, model: &GasModel<T>) -> Result<T> {
    check_model(density, model)?;
    let value = density.integrate_shells(density.inner(), density.outer(), |t| {
        let mut x = vec![T::zero(); density.dim()];
        total_potential(density, model, t, &mut x)
    });
    if !value.is_finite() {
        return Err(Error::Numerical("Robin constant quadrature is not finite".into()));
    }
    Ok(value)
}

/// Evaluates `beta U^mu + V` on the radii in `grid` and measures how far the
/// candidate is from satisfying the equilibrium conditions.
pub fn euler_lagrange_residual<T: Scalar>(
    candidate: &RadialDensity<T>,
    model: &GasModel<T>,
    grid: &[T],
) -> Result<ElResidual<T>> {
    if grid.is_empty() {
        return Err(usage!("residual grid is empty"));
    }
    check_model(candidate, model)?;
    let mut x = vec![T::zero(); candidate.dim()];
    let (inner, outer) = (candidate.inner(), candidate.outer());
    let mut on = Vec::new();
    let mut off = Vec::new();
    for &r in grid {
        let value = total_potential(candidate, model, r.abs(), &mut x);
        if r.abs() >= inner && r.abs() <= outer {
            on.push(value);
        } else {
            off.push(value);
        }
    }
    if on.is_empty() {
        return Err(usage!("residual grid has no point on the support [{inner}, {outer}]"));
    }
    let fitted_c = on.iter().fold(T::zero(), |s, &v| s + v) / T::of_usize(on.len());
    let on_support_max_dev = on.iter().fold(T::zero(), |m, &v| m.max((v - fitted_c).abs()));
    let off_support_min_excess = off.iter().fold(T::infinity(), |m, &v| m.min(v - fitted_c));
    Ok(ElResidual { on_support_max_dev, off_support_min_excess, fitted_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{solve_radial_coulomb, uniform_ball_radius};
    use crate::kernel::{ExternalField, KernelSpec, RadialProfile};
    use approx::assert_relative_eq;

    fn model(beta: f64, profile: RadialProfile<f64>) -> GasModel<f64> {
        GasModel::new(KernelSpec::coulomb(3).unwrap(), ExternalField::Radial(profile), beta).unwrap()
    }

    fn grid(r_max: f64) -> Vec<f64> {
        (0..200).map(|k| r_max * k as f64 / 199.0).collect()
    }

    #[test]
    fn quadratic_robin_constant() {
        let eq = solve_radial_coulomb(3, &RadialProfile::Quadratic, 1.0).unwrap();
        let c = robin_constant(&eq.density, &model(1.0, RadialProfile::Quadratic)).unwrap();
        let closed = 2f64.powf(1.0 / 3.0) + 2f64.powf(-2.0 / 3.0);
        assert!((c - closed).abs() < 1e-6);
        assert!((eq.robin_constant - closed).abs() < 1e-12);
    }

    #[test]
    fn residuals_of_solver_output() {
        for profile in [RadialProfile::Quadratic, RadialProfile::Power(4.0)] {
            let eq = solve_radial_coulomb(3, &profile, 1.0).unwrap();
            let m = model(1.0, profile);
            let res = euler_lagrange_residual(&eq.density, &m, &grid(2.0 * eq.outer_radius())).unwrap();
            assert!(res.on_support_max_dev < 1e-6, "{res:?}");
            assert!(res.off_support_min_excess > -1e-6, "{res:?}");
            let c = robin_constant(&eq.density, &m).unwrap();
            assert!((res.fitted_c - c).abs() < 1e-6);
        }
    }

    #[test]
    fn wrong_radius_fails() {
        let r = 1.2 * uniform_ball_radius(3, 1.0).unwrap();
        let ball = RadialDensity::uniform_ball(3, r).unwrap();
        let res = euler_lagrange_residual(&ball, &model(1.0, RadialProfile::Quadratic), &grid(2.0 * r)).unwrap();
        assert!(res.on_support_max_dev > 0.01);
    }

    #[test]
    fn robin_constant_under_doubled_coupling() {
        let eq = solve_radial_coulomb(3, &RadialProfile::Quadratic, 2.0).unwrap();
        let c = robin_constant(&eq.density, &model(2.0, RadialProfile::Quadratic)).unwrap();
        let r0 = eq.outer_radius();
        assert_relative_eq!(r0, 1.0, max_relative = 1e-12);
        assert!((c - (2.0 / r0 + r0 * r0)).abs() < 1e-6);
        assert!((c - eq.robin_constant).abs() < 1e-6);
    }

    #[test]
    fn empty_grid_is_usage_error() {
        let eq = solve_radial_coulomb(3, &RadialProfile::Quadratic, 1.0).unwrap();
        let err = euler_lagrange_residual(&eq.density, &model(1.0, RadialProfile::Quadratic), &[]);
        assert!(matches!(err, Err(Error::Usage(_))));
    }
}
