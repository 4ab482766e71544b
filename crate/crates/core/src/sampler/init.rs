use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equilibrium::{nice_partition, AxisBox, DensityMeasure, UniformMeasure};
use crate::error::{usage, Error, Result};
use crate::kernel::{Configuration, GasModel};
use crate::scalar::Scalar;

/// How the first configuration of a chain is drawn.
#[derive(Clone)]
pub enum InitStrategy<T: Scalar> {
    /// i.i.d. uniform in the centred ball.
    UniformBall { radius: T },
    /// i.i.d. with density proportional to `exp(-V)` on `[-h, h]^d`, by rejection.
    GibbsField { half_width: T },
    /// One uniform point in each cell of a nice partition of `cell`
    /// (Lebesgue measure when `density` is `None`).
    Stratified { cell: AxisBox<T>, density: Option<DensityMeasure<T>> },
}

impl<T: Scalar> std::fmt::Debug for InitStrategy<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitStrategy::UniformBall { radius } => write!(f, "UniformBall({radius})"),
            InitStrategy::GibbsField { half_width } => write!(f, "GibbsField({half_width})"),
            InitStrategy::Stratified { cell, density } => {
                write!(f, "Stratified({cell:?}, weighted = {})", density.is_some())
            }
        }
    }
}

const REJECTION_CAP: usize = 10_000_000;

/// Draws `n` starting points for a chain.
pub fn init_configuration<T: Scalar>(
    n: usize,
    model: &GasModel<T>,
    strategy: &InitStrategy<T>,
    seed: u64,
) -> Result<Configuration<T>> {
    if n == 0 {
        return Err(usage!("need at least one particle"));
    }
    let d = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = vec![T::zero(); n * d];
    match strategy {
        InitStrategy::UniformBall { radius } => {
            if !(*radius > T::zero()) {
                return Err(usage!("initial ball radius must be positive"));
            }
            for p in coords.chunks_exact_mut(d) {
                // rejection from the enclosing cube
                loop {
                    let mut r2 = T::zero();
                    for c in p.iter_mut() {
                        *c = (T::lit(2.0) * T::unit_uniform(&mut rng) - T::one()) * *radius;
                        r2 = r2 + *c * *c;
                    }
                    if r2 <= *radius * *radius {
                        break;
                    }
                }
            }
        }
        InitStrategy::GibbsField { half_width } => {
            if !(*half_width > T::zero()) {
                return Err(usage!("initial box half width must be positive"));
            }
            let draw = |rng: &mut ChaCha8Rng, p: &mut [T]| {
                for c in p.iter_mut() {
                    *c = (T::lit(2.0) * T::unit_uniform(rng) - T::one()) * *half_width;
                }
            };
            // envelope from the minimum of V over a pilot sample and the origin
            let mut probe = vec![T::zero(); d];
            let mut v_min = model.field.value(&probe);
            for _ in 0..4096 {
                draw(&mut rng, &mut probe);
                v_min = v_min.min(model.field.value(&probe));
            }
            if !v_min.is_finite() {
                return Err(Error::Initialization("external field is not finite on the initial box".into()));
            }
            for p in coords.chunks_exact_mut(d) {
                let mut tries = 0;
                loop {
                    tries += 1;
                    if tries > REJECTION_CAP {
                        return Err(Error::Initialization(format!(
                            "rejection sampling from exp(-V) exceeded {REJECTION_CAP} draws"
                        )));
                    }
                    draw(&mut rng, p);
                    let v = model.field.value(p);
                    v_min = v_min.min(v);
                    if T::unit_uniform(&mut rng) < (v_min - v).exp() {
                        break;
                    }
                }
            }
        }
        InitStrategy::Stratified { cell, density } => {
            if cell.dim() != d {
                return Err(usage!("stratification box has dimension {}, model has {d}", cell.dim()));
            }
            let parts = match density {
                Some(h) => nice_partition(cell, h, n)?,
                None => nice_partition(cell, &UniformMeasure, n)?,
            };
            for (p, part) in coords.chunks_exact_mut(d).zip(&parts) {
                for (a, c) in p.iter_mut().enumerate() {
                    let (lo, hi) = (part.lower[a], part.upper[a]);
                    *c = lo + (hi - lo) * T::unit_uniform(&mut rng);
                }
            }
        }
    }
    Configuration::new(d, coords)
}
