//! Equilibrium measures of radial Coulomb gases and the potential-theoretic
//! checks that characterise them.
//!
//! For `W = beta k` with `k` Newtonian in `d >= 3` and `V(x) = v(|x|)`, the
//! minimiser of `I(mu) = int V dmu + 1/2 int int W dmu dmu` is radial with
//! density `M(r) = w'(r) / (beta (d-2) sigma_d r^{d-1})` on the shell
//! `r0 <= |x| <= R0`, where `w(r) = r^{d-1} v'(r)`, `w(R0) = beta (d-2)` and
//! `r0 = inf { r > 0 : v'(r) > 0 }`.

mod density;
mod partition;
mod potential;
mod prescribe;
mod robin;
mod solver;

pub use density::{RadialDensity, RadialSampler};
pub use partition::{edge_ratio_constant, nice_partition, AxisBox, BoxMeasure, DensityMeasure, UniformMeasure};
pub use potential::{
    radial_coulomb_potential, radial_coulomb_potential_derivative, riesz_potential_estimate, sphere_potential,
    EstimateOptions, GridDensity, PotentialEstimate, PotentialSource, RieszPotential,
};
pub use prescribe::{prescribed_field, PrescribedField};
pub use robin::{euler_lagrange_residual, robin_constant, ElResidual};
pub use solver::{solve_radial_coulomb, uniform_ball_radius, EquilibriumResult};

use crate::scalar::Scalar;

/// Bisection for an increasing predicate switch: returns the point where
/// `below(x)` turns false, to machine precision.
pub(crate) fn bisect<T: Scalar>(mut lo: T, mut hi: T, below: impl Fn(T) -> bool) -> T {
    for _ in 0..2000 {
        let mid = T::lit(0.5) * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}
