//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use rieszgas::DiscreteMeasure;

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Bounded-Lipschitz LP solved by enumerating its vertices.
///
/// At a vertex every value `f_i` is pinned either by a bound (`f_i = ±1`) or
/// by a tight Lipschitz constraint to a parent (`f_i = f_j ± |x_i - x_j|`),
/// and the pins form a forest rooted at bound-pinned atoms.
pub fn brute_force_fm(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut net: Vec<f64> = Vec::new();
    for (m, s) in [(mu, 1.0), (nu, -1.0)] {
        for (p, w) in m.atoms() {
            match pts.iter().position(|q| q.as_slice() == p) {
                Some(k) => net[k] += s * w,
                None => {
                    pts.push(p.to_vec());
                    net.push(s * w);
                }
            }
        }
    }
    let n = pts.len();
    let choices = 2 * n + 2;
    let mut best = f64::NEG_INFINITY;
    let mut pick = vec![0usize; n];
    'outer: loop {
        if let Some(f) = vertex_values(&pts, &pick) {
            let feasible = (0..n).all(|i| {
                f[i].abs() <= 1.0 + 1e-12 && (0..n).all(|j| (f[i] - f[j]).abs() <= dist(&pts[i], &pts[j]) + 1e-12)
            });
            if feasible {
                best = best.max((0..n).map(|i| net[i] * f[i]).sum());
            }
        }
        for k in 0..n {
            pick[k] += 1;
            if pick[k] < choices {
                continue 'outer;
            }
            pick[k] = 0;
        }
        break;
    }
    best
}

// choice 0 / 1: bound +1 / -1; choice 2 + 2j + s: parent j with sign s
fn vertex_values(pts: &[Vec<f64>], pick: &[usize]) -> Option<Vec<f64>> {
    let n = pts.len();
    let mut f = vec![f64::NAN; n];
    for start in 0..n {
        let mut chain = Vec::new();
        let mut i = start;
        while f[i].is_nan() {
            if chain.contains(&i) {
                return None;
            }
            chain.push(i);
            match pick[i] {
                0 => {
                    f[i] = 1.0;
                    break;
                }
                1 => {
                    f[i] = -1.0;
                    break;
                }
                c => {
                    let j = (c - 2) / 2;
                    if j == i {
                        return None;
                    }
                    i = j;
                }
            }
        }
        while let Some(k) = chain.pop() {
            if f[k].is_nan() {
                let j = (pick[k] - 2) / 2;
                let s = if (pick[k] - 2) % 2 == 0 { 1.0 } else { -1.0 };
                f[k] = f[j] + s * dist(&pts[k], &pts[j]);
            }
        }
    }
    Some(f)
}

/// Exact optimal matching cost by enumerating permutations, averaged.
pub fn brute_force_assignment(a: &[Vec<f64>], b: &[Vec<f64>], cost: impl Fn(f64) -> f64) -> f64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let c: f64 = (0..n).map(|i| cost(dist(&a[i], &b[p[i]]))).sum();
        best = best.min(c);
    });
    best / n as f64
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// CDF of the density proportional to `exp(-v)` on `[-half_width, half_width]`,
/// tabulated by composite Simpson on `cells` panels.
pub struct SimpsonCdf {
    lo: f64,
    h: f64,
    cum: Vec<f64>,
}

impl SimpsonCdf {
    pub fn new(v: impl Fn(f64) -> f64, half_width: f64, cells: usize) -> Self {
        let lo = -half_width;
        let h = 2.0 * half_width / cells as f64;
        let mut cum = vec![0.0; cells + 1];
        for k in 0..cells {
            let a = lo + k as f64 * h;
            let piece = h / 6.0 * ((-v(a)).exp() + 4.0 * (-v(a + 0.5 * h)).exp() + (-v(a + h)).exp());
            cum[k + 1] = cum[k] + piece;
        }
        let z = cum[cells];
        cum.iter_mut().for_each(|c| *c /= z);
        SimpsonCdf { lo, h, cum }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.lo) / self.h;
        if t <= 0.0 {
            return 0.0;
        }
        let k = t.floor() as usize;
        if k + 1 >= self.cum.len() {
            return 1.0;
        }
        let frac = t - k as f64;
        self.cum[k] + frac * (self.cum[k + 1] - self.cum[k])
    }
}

/// Two-sided KS statistic of `samples` against `cdf`.
pub fn ks(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Edge-length constant of the recursive quantile partition in dimension `d`
/// for densities with `delta <= h <= 1/delta`.
pub fn partition_constant(d: usize, delta: f64) -> f64 {
    let c1 = 1.0 / (delta * delta);
    if d == 1 {
        return c1;
    }
    let df = d as f64;
    let b0 = 1.0 / (2f64.powf(1.0 / df) - 1.0);
    let n_max = (b0.floor() + 1.0).powi(d as i32) - 1.0;
    let slice = n_max.powf(1.0 / df).max(n_max.powf(1.0 - 1.0 / df) * c1);
    let prev = partition_constant(d - 1, delta);
    let digit = (2.0 * c1)
        .max(2.0 * prev)
        .max(2f64.powi(d as i32 - 1) * c1)
        .max(2f64.powf(1.0 / (df - 1.0)) * prev);
    slice.max(digit)
}
