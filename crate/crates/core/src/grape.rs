//! Noise-averaged gradient ascent pulse engineering.
//!
//! The objective is the Monte Carlo fidelity on a fixed trajectory batch
//! (common random numbers), which makes the backtracking line search
//! well-defined and accepted iterates monotone. Gradients are the analytic
//! first-order expressions: per trajectory, exact jump-partitioned interval
//! propagators feed a forward sweep of evolved states and a backward sweep of
//! back-propagated targets, and the gradient component of interval `m` is
//! `dt * Im tr(lambda_m sigma_x rho_m)` under the half-generator convention.
//! The gate objective averages the state gradient over the three Pauli
//! initial operators.
//!
//! Every optimized pulse is re-scored on a fresh, larger batch before it is
//! reported, so the returned fidelity is not an artifact of optimizing a
//! sample-average approximation.

use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolve::{batch_mean, gate_fidelity, state_fidelity, BatchObjective, FidelityEstimate};
use crate::pulse::ControlGrid;
use crate::rtn::{child_rng, sample_batch, NoiseTrajectory, RtnParams};
use crate::stats::{mean_and_stderr, pairwise_sum_by};
use crate::su2::{conjugate, pauli, Axis, Operator2};

/// Seed salt for the fresh evaluation batch used to re-score a finished run.
const RESCORE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
/// Seed salt for drawing multi-start initial fields.
const RESTART_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// What the optimizer maximizes.
#[derive(Debug, Clone, Copy)]
pub enum GrapeTarget {
    /// State transfer `rho0 -> rhof`.
    StateTransfer { rho0: Operator2, rhof: Operator2 },
    /// A target unitary, scored by the initial-state-averaged gate fidelity.
    Gate { unitary: Operator2 },
}

/// Grid resolution: an explicit interval count, or a target step length from
/// which the count is derived per operation time.
#[derive(Debug, Clone, Copy)]
pub enum GridResolution {
    Count(usize),
    Step(f64),
}

/// Optimizer configuration. `new` fills in the defaults; fields are public so
/// callers can override them.
#[derive(Debug, Clone)]
pub struct GrapeConfig {
    pub target: GrapeTarget,
    pub params: RtnParams,
    pub a_max: f64,
    pub grid: GridResolution,
    /// Trajectories in the fixed training batch.
    pub batch: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Line search: first trial step, shrink factor, and give-up threshold.
    pub initial_step: f64,
    pub backtrack: f64,
    pub min_step: f64,
    /// Stop after `tolerance_window` consecutive accepted steps improving the
    /// batch fidelity by less than `tolerance`.
    pub tolerance: f64,
    pub tolerance_window: usize,
    /// Fresh-batch size multiplier for the final re-score.
    pub rescore_factor: usize,
    /// Draw a new trajectory batch every iteration instead of fixing one.
    /// Off by default: a fixed batch keeps accepted steps monotone.
    pub resample_noise: bool,
}

impl GrapeConfig {
    pub fn new(target: GrapeTarget, params: RtnParams) -> Self {
        Self {
            target,
            params,
            a_max: 1.0,
            grid: GridResolution::Step(PI / 30.0),
            batch: 1000,
            seed: 0,
            max_iterations: 2000,
            initial_step: 16.0,
            backtrack: 0.5,
            min_step: 1e-6,
            tolerance: 1e-7,
            tolerance_window: 10,
            rescore_factor: 10,
            resample_noise: false,
        }
    }

    /// Number of grid intervals used for an operation time `t_total`.
    pub fn intervals_for(&self, t_total: f64) -> usize {
        match self.grid {
            GridResolution::Count(n) => n.max(1),
            GridResolution::Step(dt) => ((t_total / dt).round() as usize).max(1),
        }
    }
}

/// Initial control field for one ascent.
#[derive(Debug, Clone)]
pub enum Init {
    /// Constant field at `a_max / 2`.
    DefaultConstant,
    /// Constant field at the given amplitude.
    Constant(f64),
    /// An explicit starting grid (its duration must match the operation time).
    Grid(ControlGrid),
}

/// One accepted ascent step.
#[derive(Debug, Clone)]
pub struct AscentIteration {
    pub iter: usize,
    /// Batch fidelity after the step (mean and spread on the training batch).
    pub fidelity: FidelityEstimate,
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceStatus {
    /// Improvement stayed below tolerance for the configured window, or the
    /// gradient vanished.
    Converged,
    /// Iteration budget exhausted.
    MaxIterations,
    /// Line search could not find an uphill step above the minimum step size.
    Stalled,
}

/// Result of one optimization run.
#[derive(Debug, Clone)]
pub struct GrapeRun {
    pub initial: ControlGrid,
    pub history: Vec<AscentIteration>,
    pub final_grid: ControlGrid,
    /// Fidelity of the final pulse on a fresh batch `rescore_factor` larger
    /// than the training batch.
    pub rescored: FidelityEstimate,
    pub status: ConvergenceStatus,
}

impl GrapeRun {
    /// Batch fidelity of the last accepted iterate.
    pub fn final_batch_fidelity(&self) -> f64 {
        self.history
            .last()
            .map(|h| h.fidelity.mean)
            .unwrap_or(f64::NAN)
    }
}

/// Best run per operation time, plus the overall winner.
#[derive(Debug, Clone)]
pub struct TimeSearch {
    pub times: Vec<f64>,
    pub runs: Vec<GrapeRun>,
    /// Index into `times`/`runs` of the best re-scored fidelity.
    pub best: usize,
}

impl TimeSearch {
    pub fn best_time(&self) -> f64 {
        self.times[self.best]
    }

    pub fn best_run(&self) -> &GrapeRun {
        &self.runs[self.best]
    }
}

/// Forward-evolved states and back-propagated targets of one trajectory.
///
/// Entry `m` (zero-based) holds `rho^(m+1) = U^(m+1) ... U^1 rho0 (...)^dagger`
/// and `lambda^(m+1) = (U^n ... U^(m+2))^dagger rhof (U^n ... U^(m+2))`, so the
/// last lambda is `rhof` itself.
pub fn forward_backward(
    grid: &ControlGrid,
    traj: &NoiseTrajectory,
    params: &RtnParams,
    rho0: &Operator2,
    rhof: &Operator2,
) -> Result<(Vec<Operator2>, Vec<Operator2>)> {
    let record = crate::evolve::evolve_trajectory(grid, traj, params)?;
    let us = record.interval_unitaries();
    Ok(sweeps_from_unitaries(us, rho0, rhof))
}

fn sweeps_from_unitaries(
    us: &[Operator2],
    rho0: &Operator2,
    rhof: &Operator2,
) -> (Vec<Operator2>, Vec<Operator2>) {
    let n = us.len();
    let mut rhos = Vec::with_capacity(n);
    let mut state = *rho0;
    for u in us {
        state = conjugate(u, &state);
        rhos.push(state);
    }
    let mut lambdas = vec![Operator2::zero(); n];
    let mut back = *rhof;
    lambdas[n - 1] = back;
    for m in (0..n - 1).rev() {
        back = conjugate(&us[m + 1].adjoint(), &back);
        lambdas[m] = back;
    }
    (rhos, lambdas)
}

/// `Im tr(lambda sigma_x rho)`.
fn gradient_entry(lambda: &Operator2, rho: &Operator2) -> f64 {
    let t = lambda.entry(0, 0) * rho.entry(1, 0)
        + lambda.entry(0, 1) * rho.entry(0, 0)
        + lambda.entry(1, 0) * rho.entry(1, 1)
        + lambda.entry(1, 1) * rho.entry(0, 1);
    t.im
}

/// Constant-noise pieces of one trajectory, pre-partitioned onto the grid
/// timing. The partition is independent of the amplitudes, so it is computed
/// once per run and reused by every objective and gradient evaluation.
struct TrajPieces {
    /// `(duration, eta)` pieces of all intervals, concatenated.
    pieces: Vec<(f64, f64)>,
    /// End offset into `pieces` for each interval.
    interval_end: Vec<u32>,
}

impl TrajPieces {
    fn interval(&self, m: usize) -> &[(f64, f64)] {
        let lo = if m == 0 {
            0
        } else {
            self.interval_end[m - 1] as usize
        };
        &self.pieces[lo..self.interval_end[m] as usize]
    }

    fn interval_count(&self) -> usize {
        self.interval_end.len()
    }
}

fn build_piece_tables(
    n: usize,
    dt: f64,
    batch: &[NoiseTrajectory],
    params: &RtnParams,
) -> Vec<TrajPieces> {
    batch
        .par_iter()
        .map(|traj| {
            let horizon = traj.horizon();
            let mut pieces = Vec::new();
            let mut interval_end = Vec::with_capacity(n);
            for m in 0..n {
                let from = (m as f64 * dt).min(horizon);
                let to = ((m + 1) as f64 * dt).min(horizon);
                traj.for_each_piece(params, from, to, |d, eta| pieces.push((d, eta)))
                    .expect("interval bounds are clamped to the horizon");
                interval_end.push(pieces.len() as u32);
            }
            TrajPieces {
                pieces,
                interval_end,
            }
        })
        .collect()
}

fn total_from_pieces(amplitudes: &[f64], table: &TrajPieces) -> Operator2 {
    let mut u = Operator2::identity();
    for (m, &a) in amplitudes.iter().enumerate() {
        for &(d, eta) in table.interval(m) {
            u = crate::su2::propagator_step(a, eta, d) * u;
        }
    }
    u
}

fn samples_from_tables(
    amplitudes: &[f64],
    tables: &[TrajPieces],
    objective: &BatchObjective,
) -> Vec<f64> {
    tables
        .par_iter()
        .map(|table| objective.sample(&total_from_pieces(amplitudes, table)))
        .collect()
}

fn unitaries_from_pieces(amplitudes: &[f64], table: &TrajPieces) -> Vec<Operator2> {
    (0..table.interval_count())
        .map(|m| {
            let mut u = Operator2::identity();
            for &(d, eta) in table.interval(m) {
                u = crate::su2::propagator_step(amplitudes[m], eta, d) * u;
            }
            u
        })
        .collect()
}

/// Fused forward/backward sweep: adds `weight * dt * Im tr(lambda_m sx rho_m)`
/// to each gradient component.
fn accumulate_pair_gradient(
    us: &[Operator2],
    dt: f64,
    rho0: &Operator2,
    rhof: &Operator2,
    weight: f64,
    out: &mut [f64],
) {
    let n = us.len();
    let mut rhos = Vec::with_capacity(n);
    let mut state = *rho0;
    for u in us {
        state = conjugate(u, &state);
        rhos.push(state);
    }
    let mut lambda = *rhof;
    for m in (0..n).rev() {
        out[m] += weight * dt * gradient_entry(&lambda, &rhos[m]);
        if m > 0 {
            lambda = conjugate(&us[m].adjoint(), &lambda);
        }
    }
}

fn gradient_from_tables(
    amplitudes: &[f64],
    dt: f64,
    tables: &[TrajPieces],
    pairs: &[(Operator2, Operator2, f64)],
) -> Vec<f64> {
    let n = amplitudes.len();
    let per_traj: Vec<Vec<f64>> = tables
        .par_iter()
        .map(|table| {
            let us = unitaries_from_pieces(amplitudes, table);
            let mut g = vec![0.0; n];
            for (rho0, rhof, weight) in pairs {
                accumulate_pair_gradient(&us, dt, rho0, rhof, *weight, &mut g);
            }
            g
        })
        .collect();
    let count = per_traj.len() as f64;
    (0..n)
        .map(|m| pairwise_sum_by(per_traj.len(), |k| per_traj[k][m]) / count)
        .collect()
}

fn state_pairs(rho0: &Operator2, rhof: &Operator2) -> Vec<(Operator2, Operator2, f64)> {
    vec![(*rho0, *rhof, 1.0)]
}

fn gate_pairs(u_target: &Operator2) -> Vec<(Operator2, Operator2, f64)> {
    [Axis::X, Axis::Y, Axis::Z]
        .into_iter()
        .map(|axis| {
            let s = pauli(axis);
            (s, conjugate(u_target, &s), 1.0 / 12.0)
        })
        .collect()
}

/// Batch-averaged analytic gradient of the state fidelity with respect to the
/// grid amplitudes.
pub fn gradient_state(
    grid: &ControlGrid,
    batch: &[NoiseTrajectory],
    params: &RtnParams,
    rho0: &Operator2,
    rhof: &Operator2,
) -> Vec<f64> {
    assert!(!batch.is_empty(), "gradient needs a nonempty batch");
    let tables = build_piece_tables(grid.len(), grid.dt(), batch, params);
    gradient_from_tables(
        grid.amplitudes(),
        grid.dt(),
        &tables,
        &state_pairs(rho0, rhof),
    )
}

/// Batch-averaged analytic gradient of the gate fidelity: one twelfth of the
/// summed state gradients with the Pauli operators as forward states and their
/// conjugations by the target as backward targets.
pub fn gradient_gate(
    grid: &ControlGrid,
    batch: &[NoiseTrajectory],
    params: &RtnParams,
    u_target: &Operator2,
) -> Vec<f64> {
    assert!(!batch.is_empty(), "gradient needs a nonempty batch");
    let tables = build_piece_tables(grid.len(), grid.dt(), batch, params);
    gradient_from_tables(grid.amplitudes(), grid.dt(), &tables, &gate_pairs(u_target))
}

/// Move along the gradient and clip componentwise to the amplitude bound.
pub fn ascent_step(grid: &ControlGrid, gradient: &[f64], step: f64) -> ControlGrid {
    debug_assert_eq!(gradient.len(), grid.len());
    let a_max = grid.a_max();
    let amplitudes = grid
        .amplitudes()
        .iter()
        .zip(gradient)
        .map(|(&a, &g)| (a + step * g).clamp(-a_max, a_max))
        .collect();
    grid.with_amplitudes(amplitudes)
        .expect("clipped amplitudes respect the bound")
}

fn objective_of(target: &GrapeTarget) -> BatchObjective {
    match target {
        GrapeTarget::StateTransfer { rho0, rhof } => BatchObjective::State {
            rho0: *rho0,
            rhof: *rhof,
        },
        GrapeTarget::Gate { unitary } => BatchObjective::for_gate(unitary),
    }
}

fn build_initial(config: &GrapeConfig, t_total: f64, init: Init) -> Result<ControlGrid> {
    let n = config.intervals_for(t_total);
    match init {
        Init::DefaultConstant => {
            ControlGrid::constant(n, t_total, config.a_max / 2.0, config.a_max)
        }
        Init::Constant(v) => ControlGrid::constant(n, t_total, v, config.a_max),
        Init::Grid(g) => {
            if (g.total_duration() - t_total).abs() > 1e-9 * t_total.max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "init_grid_duration",
                    value: g.total_duration(),
                });
            }
            for &a in g.amplitudes() {
                if a.abs() > config.a_max {
                    return Err(Error::AmplitudeOutOfBounds {
                        amplitude: a,
                        bound: config.a_max,
                    });
                }
            }
            Ok(g)
        }
    }
}

fn estimate_from_samples(samples: &[f64], n_traj: usize, seed: u64) -> FidelityEstimate {
    let (mean, stderr) = mean_and_stderr(samples);
    FidelityEstimate {
        mean,
        stderr,
        n_traj,
        seed,
    }
}

/// Re-score a pulse on a fresh batch derived from the training seed.
fn rescore(config: &GrapeConfig, grid: &ControlGrid) -> Result<FidelityEstimate> {
    let n = (config.batch * config.rescore_factor).max(2);
    let seed = config.seed ^ RESCORE_SALT;
    match &config.target {
        GrapeTarget::StateTransfer { rho0, rhof } => {
            state_fidelity(grid, rho0, rhof, &config.params, n, seed)
        }
        GrapeTarget::Gate { unitary } => gate_fidelity(grid, unitary, &config.params, n, seed),
    }
}

/// Projected gradient ascent on the fixed-batch fidelity.
///
/// Accepted iterates are monotone on the batch objective; the run ends when
/// improvements stay below tolerance, the iteration budget is spent, or no
/// uphill step exists above the minimum step size. Non-convergence is reported
/// in the returned status, never as an error.
pub fn optimize(config: &GrapeConfig, t_total: f64, init: Init) -> Result<GrapeRun> {
    if !t_total.is_finite() || t_total <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_total",
            value: t_total,
        });
    }
    if config.batch < 2 {
        return Err(Error::TooFewTrajectories(config.batch));
    }
    let initial = build_initial(config, t_total, init)?;
    let objective = objective_of(&config.target);
    let pairs = match &config.target {
        GrapeTarget::StateTransfer { rho0, rhof } => state_pairs(rho0, rhof),
        GrapeTarget::Gate { unitary } => gate_pairs(unitary),
    };
    let duration = initial.total_duration();
    let n = initial.len();
    let dt = initial.dt();

    let batch = sample_batch(&config.params, duration, config.batch, config.seed);
    let mut tables = build_piece_tables(n, dt, &batch, &config.params);
    let mut grid = initial.clone();
    let samples = samples_from_tables(grid.amplitudes(), &tables, &objective);
    let mut f_cur = batch_mean(&samples);
    let initial_estimate = estimate_from_samples(&samples, config.batch, config.seed);

    let mut history = Vec::new();
    let mut streak = 0usize;
    let mut status = ConvergenceStatus::MaxIterations;
    // Line-search warm start: grows on acceptance, so step sizes track the
    // local curvature instead of re-halving from scratch every iteration.
    let mut warm_step = config.initial_step;

    for iter in 1..=config.max_iterations {
        if config.resample_noise && iter > 1 {
            let batch = sample_batch(
                &config.params,
                duration,
                config.batch,
                config.seed.wrapping_add(iter as u64),
            );
            tables = build_piece_tables(n, dt, &batch, &config.params);
            let samples = samples_from_tables(grid.amplitudes(), &tables, &objective);
            f_cur = batch_mean(&samples);
        }

        let grad = gradient_from_tables(grid.amplitudes(), dt, &tables, &pairs);
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if history.is_empty() {
            history.push(AscentIteration {
                iter: 0,
                fidelity: initial_estimate,
                step: 0.0,
                grad_norm,
            });
        }
        if grad_norm < 1e-14 {
            status = ConvergenceStatus::Converged;
            break;
        }

        let mut step = warm_step;
        let mut accepted = None;
        loop {
            let candidate = ascent_step(&grid, &grad, step);
            let cand_samples = samples_from_tables(candidate.amplitudes(), &tables, &objective);
            let f_new = batch_mean(&cand_samples);
            if f_new > f_cur {
                accepted = Some((candidate, cand_samples, f_new));
                break;
            }
            step *= config.backtrack;
            if step < config.min_step {
                break;
            }
        }
        let Some((candidate, cand_samples, f_new)) = accepted else {
            // No uphill step: at the boundary with an outward gradient the
            // projection is stationary, which is convergence, not a stall.
            let pinned = ascent_step(&grid, &grad, config.min_step);
            status = if pinned.amplitudes() == grid.amplitudes() {
                ConvergenceStatus::Converged
            } else {
                ConvergenceStatus::Stalled
            };
            break;
        };

        let improvement = f_new - f_cur;
        warm_step = (step * 2.0).max(config.min_step);
        grid = candidate;
        f_cur = f_new;
        history.push(AscentIteration {
            iter,
            fidelity: estimate_from_samples(&cand_samples, config.batch, config.seed),
            step,
            grad_norm,
        });

        if improvement < config.tolerance {
            streak += 1;
            if streak >= config.tolerance_window {
                status = ConvergenceStatus::Converged;
                break;
            }
        } else {
            streak = 0;
        }
    }

    let rescored = rescore(config, &grid)?;
    Ok(GrapeRun {
        initial,
        history,
        final_grid: grid,
        rescored,
        status,
    })
}

/// Draw a multi-start initial field for restart `r` at grid point `ti`.
///
/// Restart 1 is the full-amplitude constant; later restarts alternate between
/// uniform random constants and uniform random grids.
fn restart_init(config: &GrapeConfig, t_total: f64, ti: usize, r: usize) -> Init {
    if r == 1 {
        return Init::Constant(config.a_max);
    }
    let mut rng = child_rng(config.seed ^ RESTART_SALT, ((ti as u64) << 32) | (r as u64));
    if r.is_multiple_of(2) {
        let v = config.a_max * (2.0 * rng.random::<f64>() - 1.0);
        Init::Constant(v)
    } else {
        let n = config.intervals_for(t_total);
        let amplitudes = (0..n)
            .map(|_| config.a_max * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let grid = ControlGrid::new(t_total / n as f64, amplitudes, config.a_max)
            .expect("uniform draws respect the bound");
        Init::Grid(grid)
    }
}

/// Optimize each operation time in `t_grid` with the default start plus
/// `restarts` uncorrelated initial fields, keeping the best re-scored run per
/// time; `best` is the overall argmax.
pub fn optimize_time(config: &GrapeConfig, t_grid: &[f64], restarts: usize) -> Result<TimeSearch> {
    if t_grid.is_empty() {
        return Err(Error::EmptySweep);
    }
    let mut runs = Vec::with_capacity(t_grid.len());
    for (ti, &t_total) in t_grid.iter().enumerate() {
        let mut best: Option<GrapeRun> = None;
        for r in 0..=restarts {
            let init = if r == 0 {
                Init::DefaultConstant
            } else {
                restart_init(config, t_total, ti, r)
            };
            let run = optimize(config, t_total, init)?;
            let better = best
                .as_ref()
                .map(|b| run.rescored.mean > b.rescored.mean)
                .unwrap_or(true);
            if better {
                best = Some(run);
            }
        }
        runs.push(best.expect("at least the default start ran"));
    }
    let best = runs
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            a.rescored
                .mean
                .partial_cmp(&b.rescored.mean)
                .expect("fidelities are finite")
        })
        .map(|(i, _)| i)
        .expect("grid is nonempty");
    Ok(TimeSearch {
        times: t_grid.to_vec(),
        runs,
        best,
    })
}
