use std::sync::Arc;

use num_traits::{FromPrimitive, Num};

use crate::error::{usage, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Scalar;

/// Product of intervals `[lower_k, upper_k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisBox<Q> {
    pub lower: Vec<Q>,
    pub upper: Vec<Q>,
}

impl<Q: Clone + PartialOrd> AxisBox<Q> {
    pub fn new(lower: Vec<Q>, upper: Vec<Q>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(usage!("box bounds must have the same nonzero length"));
        }
        if lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(usage!("box needs lower < upper on every axis"));
        }
        Ok(AxisBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| a <= v && v <= b)
    }
}

impl<T: Scalar> AxisBox<T> {
    /// Shortest edge `l(B)`.
    pub fn min_edge(&self) -> T {
        self.lower.iter().zip(&self.upper).fold(T::infinity(), |m, (&a, &b)| m.min(b - a))
    }

    /// Longest edge `L(B)`.
    pub fn max_edge(&self) -> T {
        self.lower.iter().zip(&self.upper).fold(T::zero(), |m, (&a, &b)| m.max(b - a))
    }
}

/// Measure with a density on boxes, able to locate mass quantiles along an axis.
pub trait BoxMeasure<Q> {
    fn mass(&self, cell: &AxisBox<Q>) -> Result<Q>;

    /// Point `q` on `axis` such that the part of `cell` below `q` carries
    /// the fraction `num / den` of the mass of `cell`.
    fn split_point(&self, cell: &AxisBox<Q>, axis: usize, num: usize, den: usize) -> Result<Q>;
}

/// Lebesgue measure; exact in any field, e.g. rationals.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformMeasure;

impl<Q: Num + Clone + FromPrimitive> BoxMeasure<Q> for UniformMeasure {
    fn mass(&self, cell: &AxisBox<Q>) -> Result<Q> {
        Ok(cell.lower.iter().zip(&cell.upper).fold(Q::one(), |m, (a, b)| m * (b.clone() - a.clone())))
    }

    fn split_point(&self, cell: &AxisBox<Q>, axis: usize, num: usize, den: usize) -> Result<Q> {
        let num = Q::from_usize(num).ok_or_else(|| usage!("fraction numerator not representable"))?;
        let den = Q::from_usize(den).ok_or_else(|| usage!("fraction denominator not representable"))?;
        let (a, b) = (cell.lower[axis].clone(), cell.upper[axis].clone());
        Ok(a.clone() + (b - a) * num / den)
    }
}

type DensityFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Measure with a density `h`, integrated by nested adaptive quadrature.
#[derive(Clone)]
pub struct DensityMeasure<T> {
    density: DensityFn<T>,
    opts: QuadOptions,
}

impl<T: Scalar> DensityMeasure<T> {
    pub fn new(density: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        DensityMeasure {
            density: Arc::new(density),
            opts: QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200 },
        }
    }

    pub fn density(&self, x: &[T]) -> T {
        (self.density)(x)
    }

    fn nested(&self, lower: &[T], upper: &[T], prefix: &[T]) -> T {
        let axis = prefix.len();
        integrate(
            |t| {
                let mut p = Vec::with_capacity(lower.len());
                p.extend_from_slice(prefix);
                p.push(t);
                if axis + 1 == lower.len() {
                    (self.density)(&p)
                } else {
                    self.nested(lower, upper, &p)
                }
            },
            lower[axis],
            upper[axis],
            &self.opts,
        )
        .value
    }
}

impl<T: Scalar> BoxMeasure<T> for DensityMeasure<T> {
    fn mass(&self, cell: &AxisBox<T>) -> Result<T> {
        let m = self.nested(&cell.lower, &cell.upper, &[]);
        if !m.is_finite() {
            return Err(usage!("density is not finite on the box"));
        }
        Ok(m)
    }

    fn split_point(&self, cell: &AxisBox<T>, axis: usize, num: usize, den: usize) -> Result<T> {
        if num == 0 {
            return Ok(cell.lower[axis]);
        }
        if num == den {
            return Ok(cell.upper[axis]);
        }
        let total = self.mass(cell)?;
        let target = total * T::of_usize(num) / T::of_usize(den);
        let mut part = cell.clone();
        let mut excess = |q: T| -> Result<T> {
            part.upper[axis] = q;
            Ok(self.mass(&part)? - target)
        };
        // Illinois variant of regula falsi on the increasing mass profile
        let (mut a, mut b) = (cell.lower[axis], cell.upper[axis]);
        let (mut fa, mut fb) = (-target, total - target);
        let mut side = 0i8;
        let tol = T::lit(1e-14) * total;
        for _ in 0..200 {
            let mut q = (a * fb - b * fa) / (fb - fa);
            if !(q > a && q < b) {
                q = T::lit(0.5) * (a + b);
            }
            let fq = excess(q)?;
            if fq.abs() <= tol || !(b - a > T::epsilon() * (a.abs() + b.abs())) {
                return Ok(q);
            }
            if fq < T::zero() {
                a = q;
                fa = fq;
                if side == -1 {
                    fb = fb * T::lit(0.5);
                }
                side = -1;
            } else {
                b = q;
                fb = fq;
                if side == 1 {
                    fa = fa * T::lit(0.5);
                }
                side = 1;
            }
        }
        Ok(T::lit(0.5) * (a + b))
    }
}

/// Splits `cell` into `n` boxes of equal `measure` mass by recursive
/// quantile cuts.
///
/// With `m` axes left and `b = floor(n^{1/m})`, the box is cut into `n`
/// slices along the current axis when `2 b^m <= (b + 1)^m`. Otherwise `n` is
/// written as `b^m + sum_k alpha_k b^k` in base `b`, the current axis is cut
/// into `b` slabs holding `n_i = b^{m-1} + sum_k 1{i <= alpha_k} b^k` parts
/// each, and every slab is split along the remaining axes.
pub fn nice_partition<Q, M>(cell: &AxisBox<Q>, measure: &M, n: usize) -> Result<Vec<AxisBox<Q>>>
where
    Q: Clone + PartialOrd,
    M: BoxMeasure<Q> + ?Sized,
{
    if n == 0 {
        return Err(usage!("cannot partition into zero boxes"));
    }
    let mut out = Vec::with_capacity(n);
    split(cell, measure, n, 0, &mut out)?;
    Ok(out)
}

fn split<Q, M>(cell: &AxisBox<Q>, measure: &M, n: usize, axis: usize, out: &mut Vec<AxisBox<Q>>) -> Result<()>
where
    Q: Clone + PartialOrd,
    M: BoxMeasure<Q> + ?Sized,
{
    if n == 1 {
        out.push(cell.clone());
        return Ok(());
    }
    let rem = (cell.dim() - axis) as u32;
    let b = integer_root(n, rem);
    let counts: Vec<usize> = if rem == 1 || 2 * b.pow(rem) <= (b + 1).pow(rem) {
        vec![1; n]
    } else {
        let mut digits = Vec::with_capacity(rem as usize);
        let mut r = n - b.pow(rem);
        for _ in 0..rem {
            digits.push(r % b);
            r /= b;
        }
        debug_assert_eq!(r, 0);
        (1..=b)
            .map(|i| {
                digits
                    .iter()
                    .enumerate()
                    .fold(b.pow(rem - 1), |s, (k, &a)| if i <= a { s + b.pow(k as u32) } else { s })
            })
            .collect()
    };
    debug_assert_eq!(counts.iter().sum::<usize>(), n);
    let slab_only = counts.iter().all(|&c| c == 1);

    let mut cum = 0;
    let mut lo = cell.lower[axis].clone();
    for (i, &c) in counts.iter().enumerate() {
        cum += c;
        let hi = if i + 1 == counts.len() {
            cell.upper[axis].clone()
        } else {
            measure.split_point(cell, axis, cum, n)?
        };
        let mut slab = cell.clone();
        slab.lower[axis] = lo;
        slab.upper[axis] = hi.clone();
        if slab_only {
            out.push(slab);
        } else {
            split(&slab, measure, c, axis + 1, out)?;
        }
        lo = hi;
    }
    Ok(())
}

/// `floor(n^{1/m})` in integer arithmetic.
fn integer_root(n: usize, m: u32) -> usize {
    let mut b = (n as f64).powf(1.0 / m as f64).round() as usize;
    while b > 1 && b.checked_pow(m).map_or(true, |p| p > n) {
        b -= 1;
    }
    while (b + 1).checked_pow(m).is_some_and(|p| p <= n) {
        b += 1;
    }
    b.max(1)
}

/// Smallest `C` with `l(B) / (C n^{1/d}) <= l(B_i)` and
/// `L(B_i) <= C n^{-1/d} L(B)` for every part `B_i`.
pub fn edge_ratio_constant<T: Scalar>(cell: &AxisBox<T>, parts: &[AxisBox<T>]) -> T {
    let d = cell.dim();
    let root = T::of_usize(parts.len()).powf(T::one() / T::of_usize(d));
    let (l, big_l) = (cell.min_edge(), cell.max_edge());
    parts.iter().fold(T::zero(), |c, p| c.max(l / (root * p.min_edge())).max(p.max_edge() * root / big_l))
}
