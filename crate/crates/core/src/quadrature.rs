//! Adaptive Gauss–Kronrod (7/15 point) quadrature on finite intervals.

use std::collections::BinaryHeap;

use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 2000 }
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature<T> {
    pub value: T,
    pub error: T,
    pub converged: bool,
}

struct Panel<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

impl<T: Scalar> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T: Scalar> Eq for Panel<T> {}
impl<T: Scalar> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<T: Scalar> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(std::cmp::Ordering::Equal)
    }
}

fn kronrod<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Panel<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut resk = fc * T::lit(WGK[7]);
    let mut resg = fc * T::lit(WG[3]);
    for (k, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half_len * T::lit(x);
        let pair = f(center - dx) + f(center + dx);
        resk = resk + T::lit(w) * pair;
        if k % 2 == 1 {
            resg = resg + T::lit(WG[k / 2]) * pair;
        }
    }
    let value = resk * half_len;
    let error = ((resk - resg) * half_len).abs();
    Panel { a, b, value, error }
}

/// `int_a^b f`, refining the panel with the largest error estimate until
/// the total error is below `max(abs_tol, rel_tol |value|)`.
pub fn integrate<T: Scalar, F: Fn(T) -> T>(f: F, a: T, b: T, opts: &QuadOptions) -> Quadrature<T> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Like [`integrate`] over `[breaks[0], breaks[last]]`, with the given
/// interior points as initial panel boundaries.
pub fn integrate_with_breaks<T: Scalar, F: Fn(T) -> T>(f: F, breaks: &[T], opts: &QuadOptions) -> Quadrature<T> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&f, w[0], w[1]));
        }
    }
    let tol = |v: T| T::lit(opts.abs_tol).max(T::lit(opts.rel_tol) * v.abs());
    let totals = |heap: &BinaryHeap<Panel<T>>| {
        heap.iter().fold((T::zero(), T::zero()), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = totals(&heap);
    while error > tol(value) && heap.len() < opts.max_intervals {
        let worst = heap.pop().unwrap();
        let mid = T::lit(0.5) * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed the drift of the running totals
    let (value, error) = totals(&heap);
    Quadrature { value, error, converged: error <= tol(value) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_and_transcendentals() {
        let opts = QuadOptions::default();
        let q = integrate(|x: f64| x * x, 0.0, 1.0, &opts);
        assert_relative_eq!(q.value, 1.0 / 3.0, max_relative = 1e-15);
        assert!(q.converged);
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, &opts);
        assert_relative_eq!(q.value, 2.0, max_relative = 1e-14);
        let q = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &opts);
        assert_relative_eq!(q.value, 2.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let opts = QuadOptions::default();
        let f = |x: f64| (x - 0.3).abs();
        let q = integrate_with_breaks(f, &[0.0, 0.3, 1.0], &opts);
        assert_relative_eq!(q.value, 0.5 * (0.09 + 0.49), max_relative = 1e-15);
    }

    #[test]
    fn empty_interval() {
        let q = integrate(|x: f64| x, 1.0, 1.0, &QuadOptions::default());
        assert_eq!(q.value, 0.0);
    }
}
