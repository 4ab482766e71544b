use super::{
    init_configuration, mala_step, metropolis_sweep, AnnealSchedule, ChainState, Counters, MoveKind, SamplerParams,
};
use crate::error::Result;
use crate::kernel::GasModel;
use crate::measures::max_radius;
use crate::scalar::Scalar;

/// Metropolis chains accumulate energy deltas; this many sweeps between full recomputations.
const RESYNC_EVERY: usize = 1000;

/// One thinned observation after burn-in.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow<T> {
    /// 1-based count of sweeps performed so far, burn-in included.
    pub sweep: usize,
    pub beta_n: T,
    pub energy: T,
    /// Acceptance rate of random-walk moves since the previous row (MALA fallbacks
    /// included); NaN when there were none.
    pub accept_rw: T,
    /// Acceptance rate of Langevin moves since the previous row; NaN when there were none.
    pub accept_mala: T,
    pub max_radius: T,
}

/// Receives every trace row together with the state it describes.
pub trait Observer<T: Scalar> {
    fn observe(&mut self, row: &TraceRow<T>, state: &ChainState<T>);
}

impl<T: Scalar, F: FnMut(&TraceRow<T>, &ChainState<T>)> Observer<T> for F {
    fn observe(&mut self, row: &TraceRow<T>, state: &ChainState<T>) {
        self(row, state)
    }
}

#[derive(Clone, Debug)]
pub struct ChainOutput<T: Scalar> {
    pub trace: Vec<TraceRow<T>>,
    pub state: ChainState<T>,
}

/// Draws the initial configuration from `params.init` and runs the chain.
pub fn run_chain<T: Scalar>(
    model: &GasModel<T>,
    n: usize,
    schedule: &AnnealSchedule<T>,
    params: &SamplerParams<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<ChainOutput<T>> {
    params.validate()?;
    let beta_n = schedule.beta(n)?;
    let config = init_configuration(n, model, &params.init, params.seed)?;
    let state = ChainState::new(config, model, beta_n, params.step_size, params.seed, params.stream + 1)?;
    run_chain_from(state, model, params, observers)
}

/// Runs `params.sweeps` sweeps from an existing state. The step size is tuned
/// during the first `params.burn_in` sweeps when `params.adapt` is set, then frozen.
pub fn run_chain_from<T: Scalar>(
    mut state: ChainState<T>,
    model: &GasModel<T>,
    params: &SamplerParams<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<ChainOutput<T>> {
    params.validate()?;
    let mut trace = Vec::new();
    let mut last = state.counters;
    for s in 0..params.sweeps {
        let acceptance = match params.kind {
            MoveKind::Metropolis => metropolis_sweep(&mut state, model)?,
            MoveKind::Mala => {
                if mala_step(&mut state, model)? {
                    T::one()
                } else {
                    T::zero()
                }
            }
        };
        if params.adapt && s < params.burn_in {
            let gain = T::of_usize(s + 1).powf(T::lit(-0.6));
            let step = (gain * (acceptance - params.target_acceptance)).max(-T::one()).min(T::one());
            state.step_size = state.step_size * step.exp();
        }
        let done = s + 1;
        if params.kind == MoveKind::Metropolis && done % RESYNC_EVERY == 0 {
            state.resync(model)?;
        }
        if done > params.burn_in && (done - params.burn_in) % params.thin == 0 {
            let row = TraceRow {
                sweep: done,
                beta_n: state.beta_n,
                energy: state.energy,
                accept_rw: rate(
                    state.counters.rw_accepted + state.counters.fallback_accepted,
                    last.rw_accepted + last.fallback_accepted,
                    state.counters.rw_proposed + state.counters.fallback_proposed,
                    last.rw_proposed + last.fallback_proposed,
                ),
                accept_mala: rate(
                    state.counters.mala_accepted,
                    last.mala_accepted,
                    state.counters.mala_proposed,
                    last.mala_proposed,
                ),
                max_radius: max_radius(&state.config),
            };
            last = state.counters;
            for o in observers.iter_mut() {
                o.observe(&row, &state);
            }
            trace.push(row);
        }
    }
    Ok(ChainOutput { trace, state })
}

fn rate<T: Scalar>(acc: u64, acc0: u64, prop: u64, prop0: u64) -> T {
    if prop == prop0 {
        T::nan()
    } else {
        T::lit((acc - acc0) as f64 / (prop - prop0) as f64)
    }
}

impl Counters {
    /// Overall acceptance rate of Langevin moves.
    pub fn mala_rate(&self) -> f64 {
        self.mala_accepted as f64 / self.mala_proposed.max(1) as f64
    }

    /// Overall acceptance rate of random-walk moves, fallbacks included.
    pub fn rw_rate(&self) -> f64 {
        (self.rw_accepted + self.fallback_accepted) as f64 / (self.rw_proposed + self.fallback_proposed).max(1) as f64
    }
}
