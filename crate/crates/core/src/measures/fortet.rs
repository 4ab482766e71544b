use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::DiscreteMeasure;
use crate::error::{usage, Error, Result};
use crate::kernel::dist_sq;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmMethod {
    /// Linear program over the values of `f` on the union of the supports.
    ExactLp,
    /// Optimal assignment with ground cost `min(|x - y|, 2)`; equal-size uniform measures only.
    TruncatedTransport,
}

impl FmMethod {
    pub fn name(self) -> &'static str {
        match self {
            FmMethod::ExactLp => "exact-lp",
            FmMethod::TruncatedTransport => "truncated-transport",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FmOptions {
    /// Above this many atoms in total, `ExactLp` works on a seeded subsample.
    pub max_atoms: usize,
    pub seed: u64,
}

impl Default for FmOptions {
    fn default() -> Self {
        FmOptions { max_atoms: 500, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FmResult<T> {
    pub value: T,
    pub method: FmMethod,
    /// The measures were subsampled before solving; the value is then an estimate.
    pub subsampled: bool,
}

/// Fortet-Mourier distance `sup { int f d(mu - nu) : |f|_inf <= 1, Lip(f) <= 1 }`.
pub fn fortet_mourier<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    method: FmMethod,
    opts: &FmOptions,
) -> Result<FmResult<T>> {
    if mu.dim() != nu.dim() {
        return Err(usage!("measures live in dimensions {} and {}", mu.dim(), nu.dim()));
    }
    match method {
        FmMethod::TruncatedTransport => {
            if mu.len() != nu.len() || !mu.is_uniform() || !nu.is_uniform() {
                return Err(Error::MethodUnavailable(
                    "truncated transport needs equal atom counts and uniform weights; use exact-lp".into(),
                ));
            }
            let n = mu.len();
            let cost: Vec<f64> = (0..n * n)
                .map(|k| distance(mu.point(k / n), nu.point(k % n)).min(2.0))
                .collect();
            let (_, total) = hungarian(&cost, n);
            Ok(FmResult { value: T::lit((total / n as f64).clamp(0.0, 2.0)), method, subsampled: false })
        }
        FmMethod::ExactLp => {
            let subsampled = mu.len() + nu.len() > opts.max_atoms;
            let value = if subsampled {
                let half = (opts.max_atoms / 2).max(1);
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let a = subsample(mu, half, &mut rng)?;
                let b = subsample(nu, half, &mut rng)?;
                fm_lp(&a, &b)?
            } else {
                fm_lp(mu, nu)?
            };
            Ok(FmResult { value: T::lit(value), method, subsampled })
        }
    }
}

fn distance<T: Scalar>(x: &[T], y: &[T]) -> f64 {
    dist_sq(x, y).to_f64_lossy().sqrt()
}

fn subsample<T: Scalar>(m: &DiscreteMeasure<T>, k: usize, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure<T>> {
    if m.len() <= k {
        return Ok(m.clone());
    }
    let mut coords = Vec::with_capacity(k * m.dim());
    if m.is_uniform() {
        for i in sample(rng, m.len(), k).into_iter() {
            coords.extend_from_slice(m.point(i));
        }
    } else {
        let cdf: Vec<f64> = m
            .weights()
            .iter()
            .scan(0.0, |c, w| {
                *c += w.to_f64_lossy();
                Some(*c)
            })
            .collect();
        let total = *cdf.last().unwrap();
        for _ in 0..k {
            let u = f64::unit_uniform(rng) * total;
            let i = cdf.partition_point(|&c| c <= u).min(m.len() - 1);
            coords.extend_from_slice(m.point(i));
        }
    }
    DiscreteMeasure::uniform(m.dim(), coords)
}

/// Net weights `mu - nu` on the merged support, dropping atoms that cancel.
fn signed_support<'a, T: Scalar>(mu: &'a DiscreteMeasure<T>, nu: &'a DiscreteMeasure<T>) -> (Vec<&'a [T]>, Vec<f64>) {
    let mut points: Vec<&[T]> = Vec::new();
    let mut net: Vec<f64> = Vec::new();
    for (m, sign) in [(mu, 1.0), (nu, -1.0)] {
        for (p, w) in m.atoms() {
            let w = sign * w.to_f64_lossy();
            match points.iter().position(|q| *q == p) {
                Some(k) => net[k] += w,
                None => {
                    points.push(p);
                    net.push(w);
                }
            }
        }
    }
    let keep: Vec<usize> = (0..points.len()).filter(|&k| net[k] != 0.0).collect();
    (keep.iter().map(|&k| points[k]).collect(), keep.iter().map(|&k| net[k]).collect())
}

// Only the values of f on the support matter: any feasible assignment there
// extends to R^d with the same bounds (McShane extension clipped to [-1, 1]).
fn fm_lp<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<f64> {
    let (points, net) = signed_support(mu, nu);
    if points.is_empty() {
        return Ok(0.0);
    }
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = net.iter().map(|&g| problem.add_var(g, (-1.0, 1.0))).collect();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dist = distance(points[i], points[j]);
            // |f| <= 1 already implies |f_i - f_j| <= 2
            if dist < 2.0 {
                problem.add_constraint(&[(vars[i], 1.0), (vars[j], -1.0)], ComparisonOp::Le, dist);
                problem.add_constraint(&[(vars[j], 1.0), (vars[i], -1.0)], ComparisonOp::Le, dist);
            }
        }
    }
    let solution = problem.solve().map_err(|e| Error::Numerical(format!("Fortet-Mourier LP failed: {e}")))?;
    Ok(solution.objective().clamp(0.0, 2.0))
}

/// Minimum-cost perfect matching on an `n x n` row-major cost matrix.
/// Returns the column assigned to each row and the total cost.
pub fn hungarian(cost: &[f64], n: usize) -> (Vec<usize>, f64) {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    // potentials and matching on 1-based indices, column 0 is a sentinel
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            assignment[row_of[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| cost[i * n + assignment[i]]).sum();
    (assignment, total)
}

/// Exact 1-Wasserstein distance between two uniform measures with the same
/// number of atoms, by optimal assignment.
pub fn wasserstein1_assignment<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<T> {
    if mu.dim() != nu.dim() || mu.len() != nu.len() || !mu.is_uniform() || !nu.is_uniform() {
        return Err(Error::MethodUnavailable("assignment needs equal-size uniform measures".into()));
    }
    let n = mu.len();
    let cost: Vec<f64> = (0..n * n).map(|k| distance(mu.point(k / n), nu.point(k % n))).collect();
    Ok(T::lit(hungarian(&cost, n).1 / n as f64))
}
