//! Random telegraph noise: sampling and querying trajectories.
//!
//! The noise switches between `+delta` and `-delta` with exponential sojourn
//! times of mean `tau_c`. A trajectory stores the initial sign and the exact
//! jump instants; it is never discretized onto a control grid, so downstream
//! evolution can partition time at the jumps and stay exact.
//!
//! Batches are reproducible: trajectory `k` always comes from the ChaCha
//! stream `(master_seed, k)`, independent of evaluation order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Noise strength and correlation time, in units of `a_max` and `hbar/a_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtnParams {
    delta: f64,
    tau_c: f64,
}

impl RtnParams {
    pub fn new(delta: f64, tau_c: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        if !tau_c.is_finite() || tau_c <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tau_c",
                value: tau_c,
            });
        }
        Ok(Self { delta, tau_c })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn tau_c(&self) -> f64 {
        self.tau_c
    }
}

/// One realization of the telegraph process on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    initial_sign: i8,
    jump_times: Vec<f64>,
    horizon: f64,
}

impl NoiseTrajectory {
    /// Build a trajectory from explicit jump times.
    ///
    /// Jump times must be strictly increasing and lie in `[0, horizon)`.
    pub fn new(initial_sign: i8, jump_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if initial_sign != 1 && initial_sign != -1 {
            return Err(Error::InvalidParameter {
                name: "initial_sign",
                value: initial_sign as f64,
            });
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "horizon",
                value: horizon,
            });
        }
        let increasing = jump_times.windows(2).all(|w| w[0] < w[1]);
        let in_range = jump_times.iter().all(|&t| t >= 0.0 && t < horizon);
        if !increasing || !in_range {
            return Err(Error::InvalidJumpTimes);
        }
        Ok(Self {
            initial_sign,
            jump_times,
            horizon,
        })
    }

    pub fn initial_sign(&self) -> i8 {
        self.initial_sign
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Noise amplitude at time `t`: `(-1)^(#jumps <= t) * initial_sign * delta`.
    pub fn eta_at(&self, params: &RtnParams, t: f64) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::OutsideHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self.sign_after(t) * params.delta)
    }

    /// Sign of the noise just after `t` (jumps at exactly `t` already counted).
    fn sign_after(&self, t: f64) -> f64 {
        let flips = self.jump_times.partition_point(|&tj| tj <= t);
        let s = if flips % 2 == 0 {
            self.initial_sign
        } else {
            -self.initial_sign
        };
        s as f64
    }

    /// Partition `[from, to]` into sub-intervals of constant noise.
    ///
    /// Returns `(duration, eta)` pairs covering the window in order. The final
    /// duration is chosen so the compensated sum of all durations reproduces
    /// `to - from`.
    pub fn segments(&self, params: &RtnParams, from: f64, to: f64) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        self.for_each_piece(params, from, to, |d, eta| out.push((d, eta)))?;
        Ok(out)
    }

    /// Visit the constant-noise pieces of `[from, to]` in order without
    /// allocating. Same partition as [`Self::segments`].
    pub fn for_each_piece<F: FnMut(f64, f64)>(
        &self,
        params: &RtnParams,
        from: f64,
        to: f64,
        mut visit: F,
    ) -> Result<()> {
        if !(0.0 <= from && from <= to && to <= self.horizon) {
            return Err(Error::OutsideHorizon {
                t: if from < 0.0 { from } else { to },
                horizon: self.horizon,
            });
        }
        if params.delta == 0.0 {
            // Jumps flip a zero amplitude; keep the window in one piece.
            visit(to - from, 0.0);
            return Ok(());
        }
        let lo = self.jump_times.partition_point(|&tj| tj <= from);
        let hi = self.jump_times.partition_point(|&tj| tj < to);
        let interior = &self.jump_times[lo..hi];

        let mut sign = self.sign_after(from);
        let mut cursor = from;
        // Neumaier-compensated running total of emitted durations.
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let add = |sum: &mut f64, comp: &mut f64, x: f64| {
            let t = *sum + x;
            if sum.abs() >= x.abs() {
                *comp += (*sum - t) + x;
            } else {
                *comp += (x - t) + *sum;
            }
            *sum = t;
        };
        for &tj in interior {
            let d = tj - cursor;
            if d > 0.0 {
                visit(d, sign * params.delta);
                add(&mut sum, &mut comp, d);
            }
            cursor = tj;
            sign = -sign;
        }
        let last = ((to - from) - sum - comp).max(0.0);
        visit(last, sign * params.delta);
        Ok(())
    }
}

/// Deterministic per-trajectory random stream for `(master_seed, index)`.
pub fn child_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Jump instants from explicit uniform draws on (0, 1):
/// cumulative sums of `-tau_c ln(p_j)`, truncated at the horizon.
///
/// Stops when the horizon is reached or the draws are exhausted. This is the
/// same construction the samplers use, exposed for direct inspection.
pub fn jump_times_from_uniforms(tau_c: f64, horizon: f64, draws: &[f64]) -> Vec<f64> {
    let mut times = Vec::new();
    let mut t = 0.0;
    for &p in draws {
        t += -tau_c * p.ln();
        if t >= horizon {
            break;
        }
        times.push(t);
    }
    times
}

fn draw_unit_open(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Sample one trajectory on `[0, horizon]`.
///
/// The initial sign is drawn equiprobably (the stationary law of the symmetric
/// process), then sojourn times `-tau_c ln(p)` accumulate until the horizon.
pub fn sample_trajectory(params: &RtnParams, horizon: f64, rng: &mut impl Rng) -> NoiseTrajectory {
    assert!(horizon > 0.0, "horizon must be positive");
    let initial_sign = if rng.random::<bool>() { 1 } else { -1 };
    let mut jump_times = Vec::new();
    let mut t = 0.0;
    loop {
        t += -params.tau_c * draw_unit_open(rng).ln();
        if t >= horizon {
            break;
        }
        jump_times.push(t);
    }
    NoiseTrajectory {
        initial_sign,
        jump_times,
        horizon,
    }
}

/// Sample `n` trajectories, trajectory `k` from the child stream
/// `(master_seed, k)`. The result does not depend on thread count.
pub fn sample_batch(
    params: &RtnParams,
    horizon: f64,
    n: usize,
    master_seed: u64,
) -> Vec<NoiseTrajectory> {
    assert!(n >= 1, "batch must contain at least one trajectory");
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = child_rng(master_seed, k as u64);
            sample_trajectory(params, horizon, &mut rng)
        })
        .collect()
}
