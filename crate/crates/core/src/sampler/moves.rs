use rand_chacha::ChaCha8Rng;

use super::ChainState;
use crate::error::{Error, Result};
use crate::kernel::{delta_unchecked, energy_and_gradient, GasModel};
use crate::scalar::Scalar;

/// Gradients of `beta_N H_N` above this Euclidean norm switch MALA to a
/// random-walk proposal for the step.
const GRADIENT_CAP: f64 = 1e8;

/// Symmetric single-particle proposal: `q(x -> y) = q(y -> x)`.
pub trait Proposal<T: Scalar> {
    fn propose(&mut self, current: &[T], step_size: T, rng: &mut ChaCha8Rng, out: &mut [T]);
}

/// `y = x + sigma xi` with `xi` standard Gaussian.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianProposal;

impl<T: Scalar> Proposal<T> for GaussianProposal {
    fn propose(&mut self, current: &[T], step_size: T, rng: &mut ChaCha8Rng, out: &mut [T]) {
        for (o, &c) in out.iter_mut().zip(current) {
            *o = c + step_size * T::standard_normal(rng);
        }
    }
}

/// Metropolis rule for a move changing `beta_N H_N` by `beta_delta`.
pub fn metropolis_accept<T: Scalar>(beta_delta: T, rng: &mut ChaCha8Rng) -> bool {
    if beta_delta <= T::zero() {
        return true;
    }
    if !beta_delta.is_finite() {
        return false;
    }
    T::unit_uniform(rng) < (-beta_delta).exp()
}

/// One sweep of `N` sequential Gaussian random-walk moves.
/// Returns the fraction of accepted moves.
pub fn metropolis_sweep<T: Scalar>(state: &mut ChainState<T>, model: &GasModel<T>) -> Result<T> {
    metropolis_sweep_with(state, model, &mut GaussianProposal)
}

/// One sweep of `N` sequential single-particle moves drawn from `proposal`.
pub fn metropolis_sweep_with<T: Scalar, P: Proposal<T> + ?Sized>(
    state: &mut ChainState<T>,
    model: &GasModel<T>,
    proposal: &mut P,
) -> Result<T> {
    model.check(&state.config)?;
    let n = state.config.len();
    let d = state.config.dim();
    let pair = model.kernel.pair();
    let mut newpos = vec![T::zero(); d];
    let mut accepted = 0usize;
    for i in 0..n {
        proposal.propose(state.config.point(i), state.step_size, &mut state.rng, &mut newpos);
        let delta = delta_unchecked(&state.config, model, &pair, i, &newpos);
        state.counters.rw_proposed += 1;
        if metropolis_accept(state.beta_n * delta, &mut state.rng) {
            state.config.point_mut(i).copy_from_slice(&newpos);
            state.energy = state.energy + delta;
            state.counters.rw_accepted += 1;
            accepted += 1;
        }
    }
    if accepted > 0 {
        state.grad = None;
    }
    Ok(T::of_usize(accepted) / T::of_usize(n))
}

/// Log Metropolis-Hastings ratio for a move `x -> y` where `u` is the
/// negative log target. `gx`/`gy` are `grad u` when the state proposes with
/// a Langevin drift and `None` when it proposes a plain random walk; both
/// proposals have covariance `2 tau I`.
pub fn mala_log_ratio<T: Scalar>(
    tau: T,
    x: &[T],
    ux: T,
    gx: Option<&[T]>,
    y: &[T],
    uy: T,
    gy: Option<&[T]>,
) -> T {
    let log_q = |from: &[T], g: Option<&[T]>, to: &[T]| {
        let mut s = T::zero();
        for k in 0..from.len() {
            let drift = g.map_or(T::zero(), |g| tau * g[k]);
            let r = to[k] - from[k] + drift;
            s = s + r * r;
        }
        -s / (T::lit(4.0) * tau)
    };
    ux - uy + log_q(y, gy, x) - log_q(x, gx, y)
}

fn scaled_gradient<T: Scalar>(grad: &[T], beta_n: T) -> Option<Vec<T>> {
    let g: Vec<T> = grad.iter().map(|&v| v * beta_n).collect();
    let norm = g.iter().fold(T::zero(), |s, &v| s + v * v).sqrt();
    (norm <= T::lit(GRADIENT_CAP)).then_some(g)
}

/// One joint MALA move targeting `exp(-beta_N H_N)` with `tau = sigma^2 / 2`.
///
/// When `|grad(beta_N H_N)|` exceeds the cap the step proposes a plain random
/// walk instead and is counted as a fallback. Returns whether the move was accepted.
pub fn mala_step<T: Scalar>(state: &mut ChainState<T>, model: &GasModel<T>) -> Result<bool> {
    model.check(&state.config)?;
    if state.grad.is_none() {
        state.resync(model)?;
    }
    let Some(grad) = state.grad.as_ref() else {
        return Err(Error::Singularity("MALA step from a configuration with coincident particles".into()));
    };
    let beta = state.beta_n;
    let sigma = state.step_size;
    let tau = sigma * sigma * T::lit(0.5);
    let gx = scaled_gradient(grad, beta);
    let x = state.config.coords();
    let y: Vec<T> = x
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let drift = gx.as_ref().map_or(T::zero(), |g| tau * g[k]);
            v - drift + sigma * T::standard_normal(&mut state.rng)
        })
        .collect();
    let fallback = gx.is_none();
    if fallback {
        state.counters.fallback_proposed += 1;
    } else {
        state.counters.mala_proposed += 1;
    }
    let proposal = crate::kernel::Configuration::new(state.config.dim(), y)?;
    let (ey, grad_y) = match energy_and_gradient(&proposal, model) {
        Ok(v) => v,
        Err(Error::Singularity(_)) => {
            // coincident particles: infinite energy, rejected; still consume the uniform
            let _ = T::unit_uniform(&mut state.rng);
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    let u = T::unit_uniform(&mut state.rng);
    if !ey.is_finite() {
        return Ok(false);
    }
    let gy = scaled_gradient(&grad_y, beta);
    let log_ratio = mala_log_ratio(
        tau,
        state.config.coords(),
        beta * state.energy,
        gx.as_deref(),
        proposal.coords(),
        beta * ey,
        gy.as_deref(),
    );
    if u.ln() < log_ratio {
        state.config = proposal;
        state.energy = ey;
        state.grad = Some(grad_y);
        if fallback {
            state.counters.fallback_accepted += 1;
        } else {
            state.counters.mala_accepted += 1;
        }
        Ok(true)
    } else {
        Ok(false)
    }
}

/// Unadjusted Euler-Maruyama step of `dX = -alpha grad H_N dt + sqrt(2 alpha / beta) dB`.
/// Biased: there is no Metropolis correction.
pub fn euler_maruyama_step<T: Scalar>(
    state: &mut ChainState<T>,
    model: &GasModel<T>,
    alpha_n: T,
    beta_n: T,
    dt: T,
) -> Result<()> {
    if !(dt > T::zero()) || !(alpha_n > T::zero()) || !(beta_n > T::zero()) {
        return Err(crate::error::usage!("Euler-Maruyama needs dt, alpha_N, beta_N > 0"));
    }
    model.check(&state.config)?;
    if state.grad.is_none() {
        state.resync(model)?;
    }
    let Some(grad) = state.grad.as_ref() else {
        return Err(Error::Singularity("Euler-Maruyama step from coincident particles".into()));
    };
    let noise = (T::lit(2.0) * alpha_n * dt / beta_n).sqrt();
    let next: Vec<T> = state
        .config
        .coords()
        .iter()
        .zip(grad)
        .map(|(&x, &g)| x - alpha_n * g * dt + noise * T::standard_normal(&mut state.rng))
        .collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::StepSize(format!("Euler-Maruyama step with dt = {dt} left the finite range")));
    }
    state.config.coords_mut().copy_from_slice(&next);
    state.resync(model)
}
