use crate::equilibrium::{bisect, RadialDensity};
use crate::error::{usage, Error, Result};
use crate::kernel::RadialProfile;
use crate::scalar::{unit_sphere_area, Scalar};

/// Output of [`solve_radial_coulomb`].
#[derive(Clone, Debug)]
pub struct EquilibriumResult<T: Scalar> {
    pub density: RadialDensity<T>,
    /// `C* = beta / R0^{d-2} + v(R0)`.
    pub robin_constant: T,
    /// Radius of the support when the equilibrium is a uniform ball.
    pub uniform_radius: Option<T>,
    /// `|1 - total mass|`, total mass re-integrated by quadrature.
    pub normalization_error: T,
}

impl<T: Scalar> EquilibriumResult<T> {
    pub fn inner_radius(&self) -> T {
        self.density.inner()
    }

    pub fn outer_radius(&self) -> T {
        self.density.outer()
    }
}

/// `(beta (d-2) / 2)^{1/d}`: support radius for `v(r) = r^2`.
pub fn uniform_ball_radius<T: Scalar>(d: usize, beta: T) -> Result<T> {
    if d < 3 {
        return Err(Error::Unsupported(format!("uniform ball equilibrium needs d >= 3, got {d}")));
    }
    if !(beta > T::zero()) {
        return Err(usage!("coupling must be positive"));
    }
    Ok((beta * T::of_usize(d - 2) * T::lit(0.5)).powf(T::one() / T::of_usize(d)))
}

const SCAN_POINTS: usize = 4096;
const MAX_DOUBLINGS: usize = 200;

/// Equilibrium measure of `W = beta |x|^{2-d}`, `V(x) = v(|x|)` in `d >= 3`.
///
/// Requires `v` convex or `w(r) = r^{d-1} v'(r)` increasing on `(0, R0]`.
pub fn solve_radial_coulomb<T: Scalar>(d: usize, profile: &RadialProfile<T>, beta: T) -> Result<EquilibriumResult<T>> {
    if d < 3 {
        return Err(Error::Unsupported(format!(
            "radial Coulomb equilibrium is only available for d >= 3, got d = {d}"
        )));
    }
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(usage!("coupling must be positive and finite, got {beta}"));
    }
    let target = beta * T::of_usize(d - 2);
    let w = |r: T| profile.w(r, d);

    // bracket w(R0) = beta (d - 2)
    let mut lo = T::zero();
    let mut hi = T::one();
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        let wh = w(hi);
        if wh.is_nan() {
            return Err(Error::Numerical(format!("w({hi}) is NaN")));
        }
        if wh >= target {
            found = true;
            break;
        }
        lo = hi;
        hi = hi + hi;
    }
    if !found {
        return Err(Error::FieldTooWeak(format!(
            "w(r) = r^{{d-1}} v'(r) stays below beta (d - 2) = {target} for all r up to {hi}"
        )));
    }
    let outer = bisect(lo, hi, |r| w(r) < target);

    check_hypothesis(d, profile, outer)?;
    let inner = find_inner_radius(profile, outer);

    let sigma = unit_sphere_area::<T>(d);
    let denom = beta * T::of_usize(d - 2) * sigma;
    let p = profile.clone();
    let scale = outer;
    let m = move |r: T| density_from_profile(&p, d, r, scale) / denom;
    let density = RadialDensity::new(d, inner, outer, m)?;

    let robin_constant = beta / outer.powi(d as i32 - 2) + profile.v(outer);
    let uniform_radius = match profile {
        RadialProfile::Quadratic => Some(uniform_ball_radius(d, beta)?),
        RadialProfile::Power(p) if *p == T::lit(2.0) => Some(uniform_ball_radius(d, beta)?),
        _ => None,
    };
    let normalization_error = (density.total_mass() - T::one()).abs();
    Ok(EquilibriumResult { density, robin_constant, uniform_radius, normalization_error })
}

/// `w'(r) / r^{d-1}`, analytic when `v''` is known.
fn density_from_profile<T: Scalar>(profile: &RadialProfile<T>, d: usize, r: T, scale: T) -> T {
    let dm1 = T::of_usize(d - 1);
    if let Some(d2v) = profile.d2v(r) {
        if r == T::zero() {
            // v'(r)/r -> v''(0)
            return T::of_usize(d) * d2v;
        }
        return dm1 * profile.dv(r) / r + d2v;
    }
    let r = r.max(T::lit(1e-8) * scale);
    let h = T::lit(1e-6) * r.max(T::one());
    let w_prime = if r > h {
        (profile.w(r + h, d) - profile.w(r - h, d)) / (h + h)
    } else {
        // one-sided second order near the origin
        (-T::lit(3.0) * profile.w(r, d) + T::lit(4.0) * profile.w(r + h, d) - profile.w(r + h + h, d)) / (h + h)
    };
    w_prime / r.powi(d as i32 - 1)
}

fn check_hypothesis<T: Scalar>(d: usize, profile: &RadialProfile<T>, outer: T) -> Result<()> {
    let grid: Vec<T> = (1..=SCAN_POINTS)
        .map(|k| outer * T::of_usize(k) / T::of_usize(SCAN_POINTS))
        .collect();
    let second = |r: T| {
        profile.d2v(r).unwrap_or_else(|| {
            let h = T::lit(1e-5) * r.max(T::one());
            (profile.dv(r + h) - profile.dv((r - h).max(T::zero()))) / (r + h - (r - h).max(T::zero()))
        })
    };
    let curvature_scale = grid.iter().map(|&r| second(r).abs()).fold(T::zero(), T::max).max(T::one());
    let convex = grid.iter().all(|&r| second(r) >= -T::lit(1e-9) * curvature_scale);
    if convex {
        return Ok(());
    }
    let ws: Vec<T> = grid.iter().map(|&r| profile.w(r, d)).collect();
    let w_scale = ws.iter().fold(T::zero(), |m, w| m.max(w.abs())).max(T::lit(1e-300));
    let increasing = ws.windows(2).all(|p| p[1] >= p[0] - T::lit(1e-12) * w_scale);
    if increasing {
        return Ok(());
    }
    Err(Error::Unsupported(format!(
        "v is not convex and w(r) = r^{{d-1}} v'(r) is not increasing on (0, {outer}]"
    )))
}

/// `inf { r > 0 : v'(r) > 0 }`, scanned on `(0, outer]` and refined by bisection.
fn find_inner_radius<T: Scalar>(profile: &RadialProfile<T>, outer: T) -> T {
    let step = outer / T::of_usize(SCAN_POINTS);
    let first = (1..=SCAN_POINTS).find(|&k| profile.dv(step * T::of_usize(k)) > T::zero());
    match first {
        None | Some(1) => T::zero(),
        Some(k) => {
            let lo = step * T::of_usize(k - 1);
            let hi = step * T::of_usize(k);
            bisect(lo, hi, |r| profile.dv(r) <= T::zero())
        }
    }
}
