use std::fmt;
use std::sync::Arc;

use crate::equilibrium::RadialDensity;
use crate::error::{usage, Result};
use crate::kernel::{norm_sq, Configuration};
use crate::scalar::Scalar;

/// Cumulative distribution of the radius `|x|` under some law.
#[derive(Clone)]
pub struct RadialCdf<T> {
    f: Arc<dyn Fn(T) -> T + Send + Sync>,
}

impl<T: Scalar> RadialCdf<T> {
    /// Wraps a nondecreasing `F` with `F(0-) = 0`, `F(inf) = 1`; values are clamped to `[0, 1]`.
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        RadialCdf { f: Arc::new(f) }
    }

    pub fn eval(&self, r: T) -> T {
        if r < T::zero() {
            return T::zero();
        }
        (self.f)(r).max(T::zero()).min(T::one())
    }
}

impl<T> fmt::Debug for RadialCdf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialCdf")
    }
}

/// `F(r) = mu(B(0, r))` for a radial density, by quadrature.
pub fn radial_cdf_of_density<T: Scalar>(density: &RadialDensity<T>) -> RadialCdf<T> {
    let density = density.clone();
    RadialCdf::new(move |r| density.mass_within(r))
}

/// Kolmogorov-Smirnov distance between the empirical law of the radii and `cdf`.
pub fn radial_ks<T: Scalar>(config: &Configuration<T>, cdf: &RadialCdf<T>) -> T {
    let mut radii = config.radii();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = T::of_usize(radii.len());
    radii.iter().enumerate().fold(T::zero(), |m, (i, &r)| {
        let f = cdf.eval(r);
        m.max(T::of_usize(i + 1) / n - f).max(f - T::of_usize(i) / n)
    })
}

/// `max_i |x_i|`.
pub fn max_radius<T: Scalar>(config: &Configuration<T>) -> T {
    config.points().fold(T::zero(), |m, p| m.max(norm_sq(p).sqrt()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin<T> {
    pub left: T,
    pub right: T,
    pub count: usize,
}

/// Counts of `|x_i|` in `bins` equal bins on `[0, r_max]`; radii beyond
/// `r_max` go to the last bin.
pub fn radius_histogram<T: Scalar>(config: &Configuration<T>, bins: usize, r_max: T) -> Result<Vec<HistogramBin<T>>> {
    if bins == 0 || !(r_max > T::zero()) {
        return Err(usage!("histogram needs at least one bin and r_max > 0"));
    }
    let width = r_max / T::of_usize(bins);
    let mut out: Vec<HistogramBin<T>> = (0..bins)
        .map(|k| HistogramBin { left: width * T::of_usize(k), right: width * T::of_usize(k + 1), count: 0 })
        .collect();
    for p in config.points() {
        let k = (norm_sq(p).sqrt() / width).to_usize().unwrap_or(bins).min(bins - 1);
        out[k].count += 1;
    }
    Ok(out)
}
