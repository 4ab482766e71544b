use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{usage, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::{unit_ball_volume, unit_sphere_area, Scalar};

/// Radial measure `dmu = M(r) dsigma_r dr` supported on `r0 <= |x| <= R0`.
///
/// `M` is the Lebesgue density of the measure, so the mass of the shell
/// `[r, r + dr]` is `sigma_d M(r) r^{d-1} dr`.
#[derive(Clone)]
pub struct RadialDensity<T: Scalar> {
    dim: usize,
    inner: T,
    outer: T,
    profile: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Scalar> RadialDensity<T> {
    pub fn new(
        dim: usize,
        inner: T,
        outer: T,
        profile: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim < 3 {
            return Err(usage!("radial densities are supported for d >= 3, got d = {dim}"));
        }
        if !(inner >= T::zero() && outer > inner && outer.is_finite()) {
            return Err(usage!("radial density needs 0 <= r0 < R0 < inf, got [{inner}, {outer}]"));
        }
        Ok(RadialDensity { dim, inner, outer, profile: Arc::new(profile) })
    }

    /// Uniform probability on the centred ball of the given radius.
    pub fn uniform_ball(dim: usize, radius: T) -> Result<Self> {
        if !(radius > T::zero()) {
            return Err(usage!("ball radius must be positive"));
        }
        let height = T::one() / (unit_ball_volume::<T>(dim) * radius.powi(dim as i32));
        Self::new(dim, T::zero(), radius, move |_| height)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `r0`
    pub fn inner(&self) -> T {
        self.inner
    }

    /// `R0`
    pub fn outer(&self) -> T {
        self.outer
    }

    /// `M(r)`, zero off the support.
    pub fn density(&self, r: T) -> T {
        if r < self.inner || r > self.outer {
            T::zero()
        } else {
            (self.profile)(r)
        }
    }

    /// Mass carried by the shell at radius `r` per unit radius.
    pub fn shell_density(&self, r: T) -> T {
        unit_sphere_area::<T>(self.dim) * self.density(r) * r.powi(self.dim as i32 - 1)
    }

    /// `mu(B(0, r))`.
    pub fn mass_within(&self, r: T) -> T {
        let hi = r.min(self.outer);
        if hi <= self.inner {
            return T::zero();
        }
        self.integrate_shells(self.inner, hi, |_| T::one())
    }

    /// Total mass, by quadrature.
    pub fn total_mass(&self) -> T {
        self.mass_within(self.outer)
    }

    /// `sigma_d int_a^b g(t) M(t) t^{d-1} dt` for `[a, b]` inside the support.
    pub(crate) fn integrate_shells(&self, a: T, b: T, g: impl Fn(T) -> T) -> T {
        let sigma = unit_sphere_area::<T>(self.dim);
        let dm1 = self.dim as i32 - 1;
        let q = integrate(|t: T| g(t) * (self.profile)(t) * t.powi(dm1), a, b, &QuadOptions::default());
        sigma * q.value
    }

    /// Tabulated inverse-CDF sampler for this density.
    pub fn sampler(&self, cells: usize) -> RadialSampler<T> {
        RadialSampler::new(self, cells)
    }
}

impl<T: Scalar> fmt::Debug for RadialDensity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialDensity")
            .field("dim", &self.dim)
            .field("inner", &self.inner)
            .field("outer", &self.outer)
            .finish()
    }
}

/// Draws radii from a [`RadialDensity`] by inverting a tabulated CDF.
///
/// Within a cell the density is treated as constant in `x`, i.e. the mass
/// grows like `r^d`, which is exact for piecewise constant `M`.
#[derive(Clone, Debug)]
pub struct RadialSampler<T> {
    dim: usize,
    nodes: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Scalar> RadialSampler<T> {
    fn new(density: &RadialDensity<T>, cells: usize) -> Self {
        let cells = cells.max(1);
        let (a, b) = (density.inner(), density.outer());
        let nodes: Vec<T> = (0..=cells)
            .map(|k| a + (b - a) * T::of_usize(k) / T::of_usize(cells))
            .collect();
        let mut cumulative = vec![T::zero(); cells + 1];
        for k in 0..cells {
            let m = density.integrate_shells(nodes[k], nodes[k + 1], |_| T::one());
            cumulative[k + 1] = cumulative[k] + m.max(T::zero());
        }
        let total = cumulative[cells];
        cumulative.iter_mut().for_each(|c| *c = *c / total);
        RadialSampler { dim: density.dim(), nodes, cumulative }
    }

    /// Radius with CDF value `u` in `[0, 1]`.
    pub fn quantile(&self, u: T) -> T {
        let cells = self.nodes.len() - 1;
        let k = self.cumulative.partition_point(|&c| c <= u).clamp(1, cells) - 1;
        let (f0, f1) = (self.cumulative[k], self.cumulative[k + 1]);
        let t = if f1 > f0 { ((u - f0) / (f1 - f0)).max(T::zero()).min(T::one()) } else { T::zero() };
        let d = self.dim as i32;
        let (r0, r1) = (self.nodes[k].powi(d), self.nodes[k + 1].powi(d));
        (r0 + t * (r1 - r0)).powf(T::one() / T::of_usize(self.dim))
    }

    pub fn sample_radius<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        self.quantile(T::unit_uniform(rng))
    }

    /// A point with radius drawn from the density and uniform direction.
    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        let r = self.sample_radius(rng);
        random_direction(rng, out);
        out.iter_mut().for_each(|x| *x = *x * r);
    }
}

/// Uniform unit vector.
pub(crate) fn random_direction<T: Scalar, R: Rng + ?Sized>(rng: &mut R, out: &mut [T]) {
    loop {
        let mut s = T::zero();
        for x in out.iter_mut() {
            *x = T::standard_normal(rng);
            s = s + *x * *x;
        }
        if s > T::lit(1e-20) {
            let inv = T::one() / s.sqrt();
            out.iter_mut().for_each(|x| *x = *x * inv);
            return;
        }
    }
}
