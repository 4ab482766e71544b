use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::density::random_direction;
use crate::equilibrium::RadialDensity;
use crate::error::{usage, Error, Result};
use crate::kernel::{dist_sq, norm_sq};
use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

/// A probability measure whose Riesz potential `U(x) = int |x - y|^{alpha - d} dmu(y)`
/// can be evaluated pointwise.
pub trait RieszPotential<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;
    fn alpha(&self) -> T;
    /// Radius of a centred ball containing the support.
    fn support_radius(&self) -> T;
    fn potential(&self, x: &[T]) -> T;

    fn is_radial(&self) -> bool {
        false
    }

    /// `grad U(x)`; central differences unless overridden.
    fn potential_gradient(&self, x: &[T], out: &mut [T]) {
        let mut y = x.to_vec();
        for a in 0..x.len() {
            let h = T::lit(1e-6) * x[a].abs().max(T::one());
            y[a] = x[a] + h;
            let up = self.potential(&y);
            y[a] = x[a] - h;
            let down = self.potential(&y);
            y[a] = x[a];
            out[a] = (up - down) / (h + h);
        }
    }
}

impl<T: Scalar> RieszPotential<T> for RadialDensity<T> {
    fn dim(&self) -> usize {
        RadialDensity::dim(self)
    }

    fn alpha(&self) -> T {
        T::lit(2.0)
    }

    fn support_radius(&self) -> T {
        self.outer()
    }

    fn is_radial(&self) -> bool {
        true
    }

    fn potential(&self, x: &[T]) -> T {
        radial_coulomb_potential(self, norm_sq(x).sqrt())
    }

    fn potential_gradient(&self, x: &[T], out: &mut [T]) {
        let r = norm_sq(x).sqrt();
        if r == T::zero() {
            out.iter_mut().for_each(|o| *o = T::zero());
            return;
        }
        let s = radial_coulomb_potential_derivative(self, r) / r;
        for (o, &a) in out.iter_mut().zip(x) {
            *o = s * a;
        }
    }
}

/// Newtonian potential `u(r)` of a radial density, `d >= 3`:
///
/// ```text
/// u(r) = sigma_d / r^{d-2} int_{r0}^{min(r,R0)} M(t) t^{d-1} dt + sigma_d int_{max(r,r0)}^{R0} M(t) t dt
/// ```
pub fn radial_coulomb_potential<T: Scalar>(density: &RadialDensity<T>, r: T) -> T {
    let r = r.abs();
    let (inner, outer) = (density.inner(), density.outer());
    let d = density.dim();
    let enclosed = if r > inner && r > T::zero() {
        density.mass_within(r) / r.powi(d as i32 - 2)
    } else {
        T::zero()
    };
    let lo = r.max(inner);
    let exterior = if lo < outer {
        density.integrate_shells(lo, outer, |t| t.powi(2 - d as i32))
    } else {
        T::zero()
    };
    enclosed + exterior
}

/// `u'(r) = -(d - 2) mu(B(0, r)) / r^{d-1}`.
pub fn radial_coulomb_potential_derivative<T: Scalar>(density: &RadialDensity<T>, r: T) -> T {
    let r = r.abs();
    if r == T::zero() {
        return T::zero();
    }
    let d = density.dim();
    -T::of_usize(d - 2) * density.mass_within(r) / r.powi(d as i32 - 1)
}

/// Potential at radius `x_radius` of the uniform unit-mass measure on the
/// sphere of radius `r_sphere`: `r_sphere^{2-d}` inside, `|x|^{2-d}` outside.
pub fn sphere_potential<T: Scalar>(r_sphere: T, x_radius: T, d: usize) -> Result<T> {
    if d < 3 {
        return Err(Error::Unsupported(format!("sphere potential needs d >= 3, got {d}")));
    }
    if !(r_sphere > T::zero()) || x_radius < T::zero() {
        return Err(usage!("sphere potential needs r_sphere > 0 and x_radius >= 0"));
    }
    Ok(r_sphere.max(x_radius).powi(2 - d as i32))
}

/// Density tabulated on a regular grid of cells; constant within each cell.
#[derive(Clone, Debug)]
pub struct GridDensity<T> {
    lower: Vec<T>,
    cell: Vec<T>,
    shape: Vec<usize>,
    /// cell probabilities, row-major with the last axis fastest
    weights: Vec<T>,
}

impl<T: Scalar> GridDensity<T> {
    /// `values` are nonnegative density values per cell, normalised internally.
    pub fn new(lower: Vec<T>, cell: Vec<T>, shape: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let d = lower.len();
        if d == 0 || cell.len() != d || shape.len() != d {
            return Err(usage!("grid density needs matching lower/cell/shape of length d >= 1"));
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(usage!("grid density has {} values for shape {shape:?}", values.len()));
        }
        if cell.iter().any(|&h| !(h > T::zero())) || values.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return Err(usage!("grid density needs positive cells and finite nonnegative values"));
        }
        let total = values.iter().fold(T::zero(), |s, &v| s + v);
        if !(total > T::zero()) {
            return Err(usage!("grid density has zero mass"));
        }
        let weights = values.into_iter().map(|v| v / total).collect();
        Ok(GridDensity { lower, cell, shape, weights })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    fn cell_corner(&self, mut index: usize, out: &mut [T]) {
        for a in (0..self.dim()).rev() {
            let k = index % self.shape[a];
            index /= self.shape[a];
            out[a] = self.lower[a] + self.cell[a] * T::of_usize(k);
        }
    }
}

/// Measure whose Riesz potential is requested from [`riesz_potential_estimate`].
#[derive(Clone, Copy, Debug)]
pub enum PotentialSource<'a, T: Scalar> {
    Discrete(&'a DiscreteMeasure<T>),
    Radial(&'a RadialDensity<T>),
    /// Uniform probability on the centred sphere of the given radius.
    Sphere { dim: usize, radius: T },
    Grid(&'a GridDensity<T>),
}

impl<T: Scalar> PotentialSource<'_, T> {
    fn dim(&self) -> usize {
        match self {
            PotentialSource::Discrete(m) => m.dim(),
            PotentialSource::Radial(r) => r.dim(),
            PotentialSource::Sphere { dim, .. } => *dim,
            PotentialSource::Grid(g) => g.dim(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions {
    /// Number of Monte Carlo samples.
    pub budget: usize,
    pub seed: u64,
    /// Use Monte Carlo even where an exact route exists.
    pub force_monte_carlo: bool,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { budget: 100_000, seed: 0, force_monte_carlo: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialEstimate<T> {
    pub value: T,
    /// Zero for exact routes.
    pub std_error: T,
}

/// `U_alpha^mu(x) = int |x - y|^{alpha - d} dmu(y)`.
///
/// Exact summation for discrete measures, radial quadrature for `alpha = 2`
/// radial densities, stratified Monte Carlo otherwise.
pub fn riesz_potential_estimate<T: Scalar>(
    source: PotentialSource<'_, T>,
    alpha: T,
    x: &[T],
    opts: &EstimateOptions,
) -> Result<PotentialEstimate<T>> {
    let d = source.dim();
    if x.len() != d {
        return Err(usage!("evaluation point has dimension {}, source has {d}", x.len()));
    }
    if !(alpha > T::zero() && alpha < T::of_usize(d)) {
        return Err(usage!("Riesz potential needs 0 < alpha < d"));
    }
    let s = T::of_usize(d) - alpha;
    let kernel = |y: &[T]| dist_sq(x, y).powf(-s * T::lit(0.5));
    match source {
        PotentialSource::Discrete(m) => {
            let mut value = T::zero();
            for (p, &w) in m.atoms() {
                if w > T::zero() {
                    value = value + w * kernel(p);
                }
            }
            return Ok(PotentialEstimate { value, std_error: T::zero() });
        }
        PotentialSource::Radial(density) if alpha == T::lit(2.0) && !opts.force_monte_carlo => {
            let value = radial_coulomb_potential(density, norm_sq(x).sqrt());
            return Ok(PotentialEstimate { value, std_error: T::zero() });
        }
        _ => {}
    }
    if opts.budget < 4 {
        return Err(usage!("Monte Carlo budget must be at least 4"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let strata = opts.budget / 2;
    let inv = T::one() / T::of_usize(strata);
    let mut y = vec![T::zero(); d];
    let mut dir = vec![T::zero(); d];

    // cumulative tables for the sampled sources
    let radial = match source {
        PotentialSource::Radial(density) => Some(density.sampler(4096)),
        _ => None,
    };
    let grid_cdf: Vec<T> = match source {
        PotentialSource::Grid(g) => g
            .weights
            .iter()
            .scan(T::zero(), |c, &w| {
                *c = *c + w;
                Some(*c)
            })
            .collect(),
        _ => Vec::new(),
    };

    let mut draw = |u: T, rng: &mut ChaCha8Rng, y: &mut [T]| match source {
        PotentialSource::Radial(_) => {
            let r = radial.as_ref().unwrap().quantile(u);
            random_direction(rng, &mut dir);
            for (o, &v) in y.iter_mut().zip(&dir) {
                *o = v * r;
            }
        }
        PotentialSource::Sphere { radius, .. } => {
            random_direction(rng, y);
            y.iter_mut().for_each(|o| *o = *o * radius);
        }
        PotentialSource::Grid(g) => {
            let k = grid_cdf.partition_point(|&c| c <= u).min(grid_cdf.len() - 1);
            g.cell_corner(k, y);
            for (o, &h) in y.iter_mut().zip(&g.cell) {
                *o = *o + h * T::unit_uniform(rng);
            }
        }
        PotentialSource::Discrete(_) => unreachable!(),
    };

    let mut sum = T::zero();
    let mut var = T::zero();
    for h in 0..strata {
        let base = T::of_usize(h);
        let u1 = (base + T::unit_uniform(&mut rng)) * inv;
        draw(u1, &mut rng, &mut y);
        let k1 = kernel(&y);
        let u2 = (base + T::unit_uniform(&mut rng)) * inv;
        draw(u2, &mut rng, &mut y);
        let k2 = kernel(&y);
        sum = sum + (k1 + k2) * T::lit(0.5);
        var = var + (k1 - k2) * (k1 - k2) * T::lit(0.25);
    }
    let value = sum * inv;
    let std_error = var.sqrt() * inv;
    Ok(PotentialEstimate { value, std_error })
}
