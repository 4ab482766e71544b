//! Empirical measures and the distances used to compare them with an
//! equilibrium measure.

mod fortet;
mod radial;

pub use fortet::{fortet_mourier, hungarian, wasserstein1_assignment, FmMethod, FmOptions, FmResult};
pub use radial::{max_radius, radial_cdf_of_density, radial_ks, radius_histogram, HistogramBin, RadialCdf};

use crate::error::{usage, Result};
use crate::kernel::{dist_sq, Configuration, GasModel};
use crate::scalar::Scalar;

/// Weighted atoms in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T> {
    dim: usize,
    coords: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// `coords` is row-major; weights must be nonnegative and sum to one.
    pub fn new(dim: usize, coords: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * weights.len() || weights.is_empty() {
            return Err(usage!("discrete measure needs {dim} coordinates per weight and at least one atom"));
        }
        if coords.iter().any(|c| !c.is_finite()) || weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(usage!("discrete measure needs finite coordinates and nonnegative weights"));
        }
        let total = weights.iter().fold(T::zero(), |s, &w| s + w);
        let tol = T::lit(1e-12).max(T::epsilon() * T::of_usize(4 * weights.len()));
        if (total - T::one()).abs() > tol {
            return Err(usage!("weights sum to {total}, expected 1"));
        }
        Ok(DiscreteMeasure { dim, coords, weights })
    }

    /// Equal weights on the given row-major points.
    pub fn uniform(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || coords.len() % dim != 0 {
            return Err(usage!("uniform measure needs a nonempty row-major point list"));
        }
        let n = coords.len() / dim;
        DiscreteMeasure::new(dim, coords, vec![T::one() / T::of_usize(n); n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn atoms(&self) -> impl ExactSizeIterator<Item = (&[T], &T)> + '_ {
        self.coords.chunks_exact(self.dim).zip(&self.weights)
    }

    /// True when all weights are equal.
    pub fn is_uniform(&self) -> bool {
        self.weights.iter().all(|&w| w == self.weights[0])
    }
}

/// `mu_N = (1/N) sum delta_{x_i}`.
pub fn empirical_measure<T: Scalar>(config: &Configuration<T>) -> DiscreteMeasure<T> {
    let n = config.len();
    DiscreteMeasure { dim: config.dim(), coords: config.coords().to_vec(), weights: vec![T::one() / T::of_usize(n); n] }
}

/// `I(mu) = sum w_i V(x_i) + (beta/2) sum_{i != j} w_i w_j k(x_i - x_j)`,
/// the double sum being off-diagonal as in `H_N`.
pub fn discrete_rate_functional<T: Scalar>(measure: &DiscreteMeasure<T>, model: &GasModel<T>) -> Result<T> {
    if measure.dim() != model.dim() {
        return Err(usage!("measure dimension {} differs from model dimension {}", measure.dim(), model.dim()));
    }
    let pair = model.kernel.pair();
    let mut field = T::zero();
    let mut pairs = T::zero();
    for i in 0..measure.len() {
        let (xi, wi) = (measure.point(i), measure.weight(i));
        field = field + wi * model.field.value(xi);
        for j in i + 1..measure.len() {
            pairs = pairs + wi * measure.weight(j) * pair.value(dist_sq(xi, measure.point(j)));
        }
    }
    Ok(field + model.coupling * pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{total_energy, ExternalField, KernelSpec, Summation};
    use proptest::prelude::*;

    fn coulomb3(beta: f64) -> GasModel<f64> {
        GasModel::new(KernelSpec::coulomb(3).unwrap(), ExternalField::quadratic(), beta).unwrap()
    }

    #[test]
    fn empirical_weights() {
        let c = Configuration::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        let m = empirical_measure(&c);
        assert_eq!(m.weights(), &[0.5, 0.5]);
        let c7 = Configuration::new(1, (0..7).map(|k| k as f64).collect()).unwrap();
        let total: f64 = empirical_measure(&c7).weights().iter().sum();
        assert!((total - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn rate_functional_two_particles() {
        let c = Configuration::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0]).unwrap();
        let i = discrete_rate_functional(&empirical_measure(&c), &coulomb3(1.0)).unwrap();
        assert!((i - 1.125).abs() < 1e-15);
        let origin = DiscreteMeasure::new(3, vec![0.0; 3], vec![1.0]).unwrap();
        assert_eq!(discrete_rate_functional(&origin, &coulomb3(1.0)).unwrap(), 0.0);
    }

    #[test]
    fn rate_functional_linear_in_beta() {
        let c = Configuration::new(3, vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 2.0, 0.0]).unwrap();
        let m = empirical_measure(&c);
        let field = discrete_rate_functional(&m, &coulomb3(1e-300)).unwrap();
        let one = discrete_rate_functional(&m, &coulomb3(1.0)).unwrap() - field;
        let two = discrete_rate_functional(&m, &coulomb3(2.0)).unwrap() - field;
        assert!((two - 2.0 * one).abs() < 1e-14);
    }

    #[test]
    fn invalid_weights_rejected() {
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![-0.5, 1.5]).is_err());
        assert!(DiscreteMeasure::new(2, vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn rate_functional_matches_energy(coords in prop::collection::vec(-2.0f64..2.0, 3..30)) {
            let n = coords.len() / 3;
            let c = Configuration::new(3, coords[..3 * n].to_vec()).unwrap();
            prop_assume!(c.min_pair_distance() > 1e-6);
            let m = coulomb3(1.7);
            let e = total_energy(&c, &m, Summation::Deterministic).unwrap();
            let i = discrete_rate_functional(&empirical_measure(&c), &m).unwrap();
            prop_assert!((e - i).abs() <= 1e-10 * e.abs().max(1.0));
        }
    }
}
