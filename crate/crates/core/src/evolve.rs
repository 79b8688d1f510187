//! Monte Carlo engine: exact per-trajectory evolution and fidelity estimates.
//!
//! Each control interval is partitioned at the trajectory's jump times, so the
//! propagator is a product of closed-form constant-generator steps with no
//! time-step bias. Trajectories come from the deterministic batch contract in
//! [`crate::rtn`], and every mean uses an order-fixed pairwise reduction, so
//! estimates are bit-identical regardless of thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pulse::{ControlPulse, Segment};
use crate::rtn::{child_rng, sample_batch, NoiseTrajectory, RtnParams};
use crate::stats::{mean_and_stderr, pairwise_sum};
use crate::su2::{
    bloch_to_density, conjugate, overlap, pauli, propagator_step, Axis, BlochVector, Operator2,
};

use rand::Rng;

/// Tolerance when checking a trajectory horizon against a pulse duration.
const HORIZON_SLACK: f64 = 1e-9;

/// Stream index reserved for sampling initial states in the Bloch oracle,
/// disjoint from the trajectory streams `0..n`.
const STATE_STREAM_SALT: u64 = 0x5157_4254_u64 << 32;

/// Monte Carlo fidelity: mean, standard error, and the inputs that fix it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_traj: usize,
    pub seed: u64,
}

/// Per-interval propagators of one trajectory and their running products.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    interval_unitaries: Vec<Operator2>,
    cumulative: Vec<Operator2>,
}

impl EvolutionRecord {
    /// Propagator of each control interval, in order.
    pub fn interval_unitaries(&self) -> &[Operator2] {
        &self.interval_unitaries
    }

    /// Running products `U^m ... U^1`.
    pub fn cumulative(&self) -> &[Operator2] {
        &self.cumulative
    }

    /// The full propagator of the trajectory.
    pub fn total(&self) -> Operator2 {
        *self
            .cumulative
            .last()
            .expect("record holds at least one interval")
    }
}

/// The bit-flip endpoints: south pole to north pole of the Bloch sphere.
pub fn bit_flip_endpoints() -> (Operator2, Operator2) {
    let rho0 = Operator2::diag(num_complex::Complex64::ZERO, num_complex::Complex64::ONE);
    let rhof = Operator2::diag(num_complex::Complex64::ONE, num_complex::Complex64::ZERO);
    (rho0, rhof)
}

/// Exact propagator of one control interval `[from, to]` with constant
/// amplitude, partitioned at the trajectory's jump times.
pub fn interval_unitary(
    amplitude: f64,
    traj: &NoiseTrajectory,
    params: &RtnParams,
    from: f64,
    to: f64,
) -> Result<Operator2> {
    let mut u = Operator2::identity();
    traj.for_each_piece(params, from, to, |d, eta| {
        u = propagator_step(amplitude, eta, d) * u;
    })?;
    Ok(u)
}

fn check_horizon(duration: f64, traj: &NoiseTrajectory) -> Result<()> {
    if traj.horizon() + HORIZON_SLACK < duration {
        return Err(Error::HorizonTooShort {
            horizon: traj.horizon(),
            duration,
        });
    }
    Ok(())
}

/// Per-interval unitaries for a segment list (clamping the final boundary onto
/// the horizon, which may differ from the duration by rounding).
fn interval_unitaries(
    segments: &[Segment],
    traj: &NoiseTrajectory,
    params: &RtnParams,
) -> Result<Vec<Operator2>> {
    let mut out = Vec::with_capacity(segments.len());
    let mut t = 0.0f64;
    for s in segments {
        let from = t.min(traj.horizon());
        let to = (t + s.duration).min(traj.horizon());
        out.push(interval_unitary(s.amplitude, traj, params, from, to)?);
        t += s.duration;
    }
    Ok(out)
}

/// Evolve a pulse under one noise trajectory.
pub fn evolve_trajectory(
    pulse: &impl ControlPulse,
    traj: &NoiseTrajectory,
    params: &RtnParams,
) -> Result<EvolutionRecord> {
    check_horizon(pulse.duration(), traj)?;
    let interval_unitaries = interval_unitaries(&pulse.control_segments(), traj, params)?;
    let mut cumulative = Vec::with_capacity(interval_unitaries.len());
    let mut acc = Operator2::identity();
    for u in &interval_unitaries {
        acc = *u * acc;
        cumulative.push(acc);
    }
    Ok(EvolutionRecord {
        interval_unitaries,
        cumulative,
    })
}

/// Total propagator of one trajectory, without keeping the per-interval list.
fn total_unitary(segments: &[Segment], traj: &NoiseTrajectory, params: &RtnParams) -> Operator2 {
    let mut u = Operator2::identity();
    let mut t = 0.0f64;
    for s in segments {
        let from = t.min(traj.horizon());
        let to = (t + s.duration).min(traj.horizon());
        traj.for_each_piece(params, from, to, |d, eta| {
            u = propagator_step(s.amplitude, eta, d) * u;
        })
        .expect("interval bounds are clamped to the horizon");
        t += s.duration;
    }
    u
}

fn state_fidelity_of(u: &Operator2, rho0: &Operator2, rhof: &Operator2) -> f64 {
    overlap(rhof, &conjugate(u, rho0))
}

/// `1/2 + (1/12) sum_j tr(Uf sigma_j Uf^dagger U sigma_j U^dagger)` for one
/// trajectory propagator.
fn gate_fidelity_of(u: &Operator2, targets: &[Operator2; 3]) -> f64 {
    let mut s = 0.0;
    for (j, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
        s += overlap(&targets[j], &conjugate(u, &pauli(axis)));
    }
    0.5 + s / 12.0
}

fn conjugated_paulis(u_target: &Operator2) -> [Operator2; 3] {
    [
        conjugate(u_target, &pauli(Axis::X)),
        conjugate(u_target, &pauli(Axis::Y)),
        conjugate(u_target, &pauli(Axis::Z)),
    ]
}

fn estimate_over_batch<F>(
    pulse: &impl ControlPulse,
    params: &RtnParams,
    n_traj: usize,
    seed: u64,
    per_trajectory: F,
) -> Result<FidelityEstimate>
where
    F: Fn(usize, &NoiseTrajectory) -> f64 + Sync,
{
    if n_traj < 2 {
        return Err(Error::TooFewTrajectories(n_traj));
    }
    let duration = pulse.duration();
    let batch = sample_batch(params, duration, n_traj, seed);
    let values: Vec<f64> = batch
        .par_iter()
        .enumerate()
        .map(|(k, traj)| per_trajectory(k, traj))
        .collect();
    let (mean, stderr) = mean_and_stderr(&values);
    Ok(FidelityEstimate {
        mean,
        stderr,
        n_traj,
        seed,
    })
}

/// Monte Carlo state fidelity `tr(rhof^dagger U_k rho0 U_k^dagger)` averaged
/// over the deterministic batch `(seed, n_traj)`.
pub fn state_fidelity(
    pulse: &impl ControlPulse,
    rho0: &Operator2,
    rhof: &Operator2,
    params: &RtnParams,
    n_traj: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    let segments = pulse.control_segments();
    estimate_over_batch(pulse, params, n_traj, seed, |_, traj| {
        let u = total_unitary(&segments, traj, params);
        state_fidelity_of(&u, rho0, rhof)
    })
}

/// Monte Carlo gate fidelity via the closed-form three-Pauli reduction of the
/// Bloch-sphere average.
pub fn gate_fidelity(
    pulse: &impl ControlPulse,
    u_target: &Operator2,
    params: &RtnParams,
    n_traj: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    let segments = pulse.control_segments();
    let targets = conjugated_paulis(u_target);
    estimate_over_batch(pulse, params, n_traj, seed, |_, traj| {
        let u = total_unitary(&segments, traj, params);
        gate_fidelity_of(&u, &targets)
    })
}

/// Gate fidelity by explicit state averaging over a fixed list of initial
/// states, on the same trajectory batch as [`gate_fidelity`].
///
/// With a single state this reduces to [`state_fidelity`] toward
/// `Uf rho0 Uf^dagger`.
pub fn gate_fidelity_with_states(
    pulse: &impl ControlPulse,
    u_target: &Operator2,
    params: &RtnParams,
    n_traj: usize,
    states: &[Operator2],
    seed: u64,
) -> Result<FidelityEstimate> {
    assert!(!states.is_empty(), "need at least one initial state");
    let segments = pulse.control_segments();
    let targets: Vec<Operator2> = states.iter().map(|s| conjugate(u_target, s)).collect();
    estimate_over_batch(pulse, params, n_traj, seed, |_, traj| {
        let u = total_unitary(&segments, traj, params);
        let sum: f64 = states
            .iter()
            .zip(&targets)
            .map(|(rho0, rhof)| state_fidelity_of(&u, rho0, rhof))
            .sum();
        sum / states.len() as f64
    })
}

/// A uniformly random pure state on the Bloch sphere.
fn random_pure_state(rng: &mut impl Rng) -> Operator2 {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    bloch_to_density(BlochVector::new(r * phi.cos(), r * phi.sin(), z))
        .expect("sampled point lies on the sphere")
}

/// Brute-force gate fidelity: direct Monte Carlo over uniformly random pure
/// initial states, `n_states` fresh draws per trajectory.
///
/// Serves as an independent oracle for [`gate_fidelity`]; the two agree within
/// combined statistical error on a shared trajectory batch.
pub fn gate_fidelity_bloch_oracle(
    pulse: &impl ControlPulse,
    u_target: &Operator2,
    params: &RtnParams,
    n_traj: usize,
    n_states: usize,
    seed: u64,
) -> Result<FidelityEstimate> {
    assert!(n_states >= 1, "need at least one state per trajectory");
    let segments = pulse.control_segments();
    let u_target = *u_target;
    estimate_over_batch(pulse, params, n_traj, seed, move |k, traj| {
        let u = total_unitary(&segments, traj, params);
        let mut rng = child_rng(seed ^ STATE_STREAM_SALT, k as u64);
        let sum: f64 = (0..n_states)
            .map(|_| {
                let rho0 = random_pure_state(&mut rng);
                let rhof = conjugate(&u_target, &rho0);
                state_fidelity_of(&u, &rho0, &rhof)
            })
            .sum();
        sum / n_states as f64
    })
}

/// Which figure of merit a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityKind {
    /// State transfer south pole -> north pole.
    BitFlip,
    /// The sigma_x gate, averaged over initial states.
    NotGate,
}

impl FidelityKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FidelityKind::BitFlip => "state",
            FidelityKind::NotGate => "gate",
        }
    }
}

/// One evaluated cell of a parameter sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub pulse_name: String,
    pub tau_c: f64,
    pub delta: f64,
    pub kind: FidelityKind,
    pub estimate: FidelityEstimate,
}

/// Header of the sweep CSV emitted by the command-line tool.
pub const SWEEP_CSV_HEADER: &str = "pulse_name,tau_c,delta,kind,fidelity,stderr,n_traj,seed";

/// Serialize a float with 17 significant digits, enough to round-trip f64.
pub fn csv_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.pulse_name,
            csv_f64(self.tau_c),
            csv_f64(self.delta),
            self.kind.as_str(),
            csv_f64(self.estimate.mean),
            csv_f64(self.estimate.stderr),
            self.estimate.n_traj,
            self.estimate.seed
        )
    }
}

/// Evaluate a pulse over a grid of noise parameters.
///
/// Every cell uses the same master seed, so pulses evaluated at equal
/// parameters share trajectories (common random numbers).
pub fn fidelity_sweep(
    pulse: &impl ControlPulse,
    pulse_name: &str,
    kind: FidelityKind,
    tau_cs: &[f64],
    deltas: &[f64],
    n_traj: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if tau_cs.is_empty() || deltas.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut rows = Vec::with_capacity(tau_cs.len() * deltas.len());
    for &tau_c in tau_cs {
        for &delta in deltas {
            let params = RtnParams::new(delta, tau_c)?;
            let estimate = match kind {
                FidelityKind::BitFlip => {
                    let (rho0, rhof) = bit_flip_endpoints();
                    state_fidelity(pulse, &rho0, &rhof, &params, n_traj, seed)?
                }
                FidelityKind::NotGate => {
                    gate_fidelity(pulse, &pauli(Axis::X), &params, n_traj, seed)?
                }
            };
            rows.push(SweepRow {
                pulse_name: pulse_name.to_string(),
                tau_c,
                delta,
                kind,
                estimate,
            });
        }
    }
    Ok(rows)
}

/// Objective evaluated on an explicit trajectory batch.
pub(crate) enum BatchObjective {
    State { rho0: Operator2, rhof: Operator2 },
    Gate { targets: [Operator2; 3] },
}

impl BatchObjective {
    pub(crate) fn for_gate(u_target: &Operator2) -> Self {
        BatchObjective::Gate {
            targets: conjugated_paulis(u_target),
        }
    }

    pub(crate) fn sample(&self, u: &Operator2) -> f64 {
        match self {
            BatchObjective::State { rho0, rhof } => state_fidelity_of(u, rho0, rhof),
            BatchObjective::Gate { targets } => gate_fidelity_of(u, targets),
        }
    }
}

pub(crate) fn batch_mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}
