use rayon::prelude::*;

use super::{dist_sq, norm_sq, ExternalField, KernelSpec, PairKernel};
use crate::error::{usage, Error, Result};
use crate::scalar::Scalar;

/// Positions of `N >= 1` particles in `R^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> Configuration<T> {
    /// Builds a configuration from flat row-major coordinates.
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(usage!("configuration dimension must be >= 1"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(usage!(
                "{} coordinates do not form a nonempty set of {dim}-dimensional points",
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(usage!("configuration has non-finite coordinates"));
        }
        Ok(Configuration { dim, coords })
    }

    pub fn from_points<P: AsRef<[T]>>(points: &[P]) -> Result<Self> {
        let dim = points.first().map(|p| p.as_ref().len()).unwrap_or(0);
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(usage!("points of unequal dimension"));
        }
        Self::new(dim, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [T] {
        &mut self.coords
    }

    /// `|x_i|` for every particle.
    pub fn radii(&self) -> Vec<T> {
        self.points().map(|p| norm_sq(p).sqrt()).collect()
    }

    /// Smallest pairwise distance (`+inf` for a single particle).
    pub fn min_pair_distance(&self) -> T {
        let mut best = T::infinity();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }
}

/// Kernel, confinement and coupling: everything `H_N` depends on.
#[derive(Clone, Debug)]
pub struct GasModel<T: Scalar> {
    pub kernel: KernelSpec<T>,
    pub field: ExternalField<T>,
    /// `beta` in `W(x, y) = beta k(x - y)`.
    pub coupling: T,
}

impl<T: Scalar> GasModel<T> {
    pub fn new(kernel: KernelSpec<T>, field: ExternalField<T>, coupling: T) -> Result<Self> {
        if !(coupling > T::zero()) || !coupling.is_finite() {
            return Err(usage!("coupling must be positive and finite, got {coupling}"));
        }
        if let Some(fd) = field.dim() {
            if fd != kernel.dim() {
                return Err(usage!("field dimension {fd} differs from kernel dimension {}", kernel.dim()));
            }
        }
        Ok(GasModel { kernel, field, coupling })
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub(crate) fn check(&self, config: &Configuration<T>) -> Result<()> {
        if config.dim() != self.dim() {
            return Err(usage!(
                "configuration dimension {} differs from model dimension {}",
                config.dim(),
                self.dim()
            ));
        }
        Ok(())
    }
}

/// Summation strategy for the `O(N^2)` pair sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Summation {
    /// Terms are sorted before summation: bit-reproducible and invariant
    /// under any relabelling of the particles.
    #[default]
    Deterministic,
    /// Rayon reduction over rows; order depends on scheduling.
    Parallel,
}

/// `H_N(x) = (1/N) sum V(x_i) + (beta/N^2) sum_{i<j} k(x_i - x_j)`.
///
/// Coincident particles give `+inf` for the singular kernels.
pub fn total_energy<T: Scalar>(config: &Configuration<T>, model: &GasModel<T>, mode: Summation) -> Result<T> {
    model.check(config)?;
    let n = config.len();
    let nt = T::of_usize(n);
    let pair = model.kernel.pair();
    let (field_sum, pair_sum) = match mode {
        Summation::Deterministic => {
            let mut field: Vec<T> = config.points().map(|p| model.field.value(p)).collect();
            let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                let xi = config.point(i);
                for j in i + 1..n {
                    pairs.push(pair.value(dist_sq(xi, config.point(j))));
                }
            }
            (sorted_sum(&mut field), sorted_sum(&mut pairs))
        }
        Summation::Parallel => {
            let field = config.coords().par_chunks_exact(config.dim()).map(|p| model.field.value(p)).sum();
            let pairs = (0..n)
                .into_par_iter()
                .map(|i| {
                    let xi = config.point(i);
                    (i + 1..n).fold(T::zero(), |s, j| s + pair.value(dist_sq(xi, config.point(j))))
                })
                .sum();
            (field, pairs)
        }
    };
    Ok(field_sum / nt + model.coupling / (nt * nt) * pair_sum)
}

fn sorted_sum<T: Scalar>(terms: &mut [T]) -> T {
    terms.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    terms.iter().fold(T::zero(), |s, &t| s + t)
}

/// `grad H_N`, row-major `N x d`.
pub fn energy_gradient<T: Scalar>(config: &Configuration<T>, model: &GasModel<T>) -> Result<Vec<T>> {
    energy_and_gradient(config, model).map(|(_, g)| g)
}

/// `H_N` and its gradient in one fixed-order pass over the pairs.
pub fn energy_and_gradient<T: Scalar>(config: &Configuration<T>, model: &GasModel<T>) -> Result<(T, Vec<T>)> {
    model.check(config)?;
    let d = config.dim();
    let n = config.len();
    let nt = T::of_usize(n);
    let pair = model.kernel.pair();
    let mut grad = vec![T::zero(); n * d];
    let mut field_sum = T::zero();
    for (i, p) in config.points().enumerate() {
        field_sum = field_sum + model.field.value(p);
        model.field.gradient(p, &mut grad[i * d..(i + 1) * d])?;
    }
    let inv_n = T::one() / nt;
    grad.iter_mut().for_each(|g| *g = *g * inv_n);

    let scale = model.coupling / (nt * nt);
    let mut pair_grad = vec![T::zero(); n * d];
    let mut pair_sum = T::zero();
    let coords = config.coords();
    let mut diff = vec![T::zero(); d];
    for i in 0..n {
        let xi = &coords[i * d..(i + 1) * d];
        for j in i + 1..n {
            let xj = &coords[j * d..(j + 1) * d];
            let mut r2 = T::zero();
            for a in 0..d {
                let t = xi[a] - xj[a];
                diff[a] = t;
                r2 = r2 + t * t;
            }
            if r2 == T::zero() {
                return Err(Error::Singularity(format!("particles {i} and {j} coincide")));
            }
            let (k, g) = pair.value_and_factor(r2);
            pair_sum = pair_sum + k;
            for a in 0..d {
                let f = g * diff[a];
                pair_grad[i * d + a] = pair_grad[i * d + a] + f;
                pair_grad[j * d + a] = pair_grad[j * d + a] - f;
            }
        }
    }
    for (g, pg) in grad.iter_mut().zip(&pair_grad) {
        *g = *g + scale * *pg;
    }
    Ok((field_sum * inv_n + scale * pair_sum, grad))
}

/// `H_N` after moving particle `i` to `newpos`, minus `H_N` before; `O(N)`.
///
/// Landing on another particle gives `+inf`.
pub fn energy_delta<T: Scalar>(
    config: &Configuration<T>,
    model: &GasModel<T>,
    i: usize,
    newpos: &[T],
) -> Result<T> {
    model.check(config)?;
    if i >= config.len() {
        return Err(usage!("particle index {i} out of range for N = {}", config.len()));
    }
    if newpos.len() != config.dim() {
        return Err(usage!("new position has dimension {}, expected {}", newpos.len(), config.dim()));
    }
    Ok(delta_unchecked(config, model, &model.kernel.pair(), i, newpos))
}

#[inline]
pub(crate) fn delta_unchecked<T: Scalar>(
    config: &Configuration<T>,
    model: &GasModel<T>,
    pair: &PairKernel<T>,
    i: usize,
    newpos: &[T],
) -> T {
    let old = config.point(i);
    if old == newpos {
        return T::zero();
    }
    let nt = T::of_usize(config.len());
    let mut acc = T::zero();
    for (j, xj) in config.points().enumerate() {
        if j == i {
            continue;
        }
        let a = pair.value(dist_sq(newpos, xj));
        if a == T::infinity() {
            return T::infinity();
        }
        acc = acc + (a - pair.value(dist_sq(old, xj)));
    }
    (model.field.value(newpos) - model.field.value(old)) / nt + model.coupling / (nt * nt) * acc
}
