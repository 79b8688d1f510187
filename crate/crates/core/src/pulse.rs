//! Bounded piecewise-constant control fields.
//!
//! Two representations: `PulseSequence` (a few segments of arbitrary duration,
//! used for the analytic pi/CORPSE/SCORPSE sequences) and `ControlGrid`
//! (a uniform grid, the object GRAPE optimizes). Both enforce the amplitude
//! bound `|a| <= a_max` at construction and deserialization.
//!
//! Durations are in dimensionless time `t' = a_max t / hbar`; the analytic
//! constructors scale so the enclosed pulse area is independent of `a_max`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::su2::{propagator_step, Operator2};

/// One constant-amplitude piece of a control field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub amplitude: f64,
}

/// Ordered control segments under a common amplitude bound.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    segments: Vec<Segment>,
    a_max: f64,
}

/// Uniform-grid control field: `n` intervals of length `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    dt: f64,
    amplitudes: Vec<f64>,
    a_max: f64,
}

/// Either pulse representation, as stored in pulse files.
#[derive(Debug, Clone, PartialEq)]
pub enum Pulse {
    Sequence(PulseSequence),
    Grid(ControlGrid),
}

/// Anything that can be evolved as a piecewise-constant control field.
pub trait ControlPulse {
    fn control_segments(&self) -> Vec<Segment>;
    fn duration(&self) -> f64;
    fn amplitude_bound(&self) -> f64;
}

fn check_bound(amplitude: f64, a_max: f64) -> Result<()> {
    if !amplitude.is_finite() || amplitude.abs() > a_max {
        return Err(Error::AmplitudeOutOfBounds {
            amplitude,
            bound: a_max,
        });
    }
    Ok(())
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>, a_max: f64) -> Result<Self> {
        if !a_max.is_finite() || a_max <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a_max",
                value: a_max,
            });
        }
        if segments.is_empty() {
            return Err(Error::EmptyPulse);
        }
        for s in &segments {
            if !s.duration.is_finite() || s.duration <= 0.0 {
                return Err(Error::NonPositiveDuration(s.duration));
            }
            check_bound(s.amplitude, a_max)?;
        }
        Ok(Self { segments, a_max })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Prepend an idle segment so the total duration becomes `t_total`.
    ///
    /// Leading idle time leaves the fidelity of a bit flip unchanged: the
    /// noise is stationary and pure dephasing commutes with a diagonal
    /// initial state.
    pub fn pad_with_zero(&self, t_total: f64) -> Result<Self> {
        let duration = self.total_duration();
        if t_total < duration {
            return Err(Error::PaddingTooShort {
                target: t_total,
                duration,
            });
        }
        if t_total == duration {
            return Ok(self.clone());
        }
        let mut segments = Vec::with_capacity(self.segments.len() + 1);
        segments.push(Segment {
            duration: t_total - duration,
            amplitude: 0.0,
        });
        segments.extend_from_slice(&self.segments);
        Ok(Self {
            segments,
            a_max: self.a_max,
        })
    }

    /// Net unitary with the noise switched off.
    pub fn noiseless_unitary(&self) -> Operator2 {
        self.segments.iter().fold(Operator2::identity(), |u, s| {
            propagator_step(s.amplitude, 0.0, s.duration) * u
        })
    }

    /// Resample onto a uniform grid of `n` intervals spanning the same total
    /// duration. Each grid amplitude is the duration-weighted average of the
    /// overlapped segments, so the pulse area is preserved; aligned segment
    /// boundaries reproduce the segment amplitudes exactly.
    pub fn to_grid(&self, n: usize) -> Result<ControlGrid> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        let total = self.total_duration();
        let dt = total / n as f64;
        let snap = 1e-12 * total.max(1.0);

        // Segment boundaries, snapped onto grid boundaries when they all but
        // coincide, so aligned conversions come out exact.
        let mut bounds = Vec::with_capacity(self.segments.len() + 1);
        let mut acc = 0.0;
        bounds.push(0.0);
        for s in &self.segments {
            acc += s.duration;
            bounds.push(acc);
        }
        for b in bounds.iter_mut() {
            let grid_point = (*b / dt).round() * dt;
            if (*b - grid_point).abs() <= snap {
                *b = grid_point;
            }
        }
        // The outer bounds must match the cell edges used below exactly.
        bounds[0] = 0.0;
        *bounds.last_mut().unwrap() = total;

        let mut amplitudes = vec![0.0; n];
        for (m, slot) in amplitudes.iter_mut().enumerate() {
            let g0 = m as f64 * dt;
            let g1 = if m + 1 == n {
                total
            } else {
                (m + 1) as f64 * dt
            };
            let mut area = 0.0;
            for (j, s) in self.segments.iter().enumerate() {
                let overlap = (bounds[j + 1].min(g1) - bounds[j].max(g0)).max(0.0);
                area += overlap * s.amplitude;
            }
            // Rounding dust must not trip the bound check.
            *slot = (area / (g1 - g0)).clamp(-self.a_max, self.a_max);
        }
        ControlGrid::new(dt, amplitudes, self.a_max)
    }
}

impl ControlGrid {
    pub fn new(dt: f64, amplitudes: Vec<f64>, a_max: f64) -> Result<Self> {
        if !a_max.is_finite() || a_max <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "a_max",
                value: a_max,
            });
        }
        if amplitudes.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::NonPositiveDuration(dt));
        }
        for &a in &amplitudes {
            check_bound(a, a_max)?;
        }
        Ok(Self {
            dt,
            amplitudes,
            a_max,
        })
    }

    /// Constant field of `n` intervals spanning `t_total`.
    pub fn constant(n: usize, t_total: f64, amplitude: f64, a_max: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGrid);
        }
        Self::new(t_total / n as f64, vec![amplitude; n], a_max)
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn a_max(&self) -> f64 {
        self.a_max
    }

    pub fn total_duration(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// The same field as an explicit segment list.
    pub fn to_sequence(&self) -> PulseSequence {
        let segments = self
            .amplitudes
            .iter()
            .map(|&amplitude| Segment {
                duration: self.dt,
                amplitude,
            })
            .collect();
        PulseSequence {
            segments,
            a_max: self.a_max,
        }
    }

    /// Copy with new amplitudes, re-checking the bound.
    pub fn with_amplitudes(&self, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != self.len() {
            return Err(Error::InconsistentPulseFile(format!(
                "expected {} amplitudes, got {}",
                self.len(),
                amplitudes.len()
            )));
        }
        Self::new(self.dt, amplitudes, self.a_max)
    }
}

/// Time-optimal bit flip: a single maximal segment of area pi.
pub fn pi_pulse(a_max: f64) -> PulseSequence {
    PulseSequence::new(
        vec![Segment {
            duration: PI / a_max,
            amplitude: a_max,
        }],
        a_max,
    )
    .expect("pi pulse is always valid")
}

/// Compensation-for-off-resonance sequence: areas pi/3, -5pi/3, 7pi/3.
pub fn corpse(a_max: f64) -> PulseSequence {
    PulseSequence::new(
        vec![
            Segment {
                duration: PI / 3.0 / a_max,
                amplitude: a_max,
            },
            Segment {
                duration: 5.0 * PI / 3.0 / a_max,
                amplitude: -a_max,
            },
            Segment {
                duration: 7.0 * PI / 3.0 / a_max,
                amplitude: a_max,
            },
        ],
        a_max,
    )
    .expect("corpse is always valid")
}

/// Short CORPSE: areas -pi/3, 5pi/3, -pi/3; two pi shorter than CORPSE.
pub fn scorpse(a_max: f64) -> PulseSequence {
    PulseSequence::new(
        vec![
            Segment {
                duration: PI / 3.0 / a_max,
                amplitude: -a_max,
            },
            Segment {
                duration: 5.0 * PI / 3.0 / a_max,
                amplitude: a_max,
            },
            Segment {
                duration: PI / 3.0 / a_max,
                amplitude: -a_max,
            },
        ],
        a_max,
    )
    .expect("scorpse is always valid")
}

impl ControlPulse for PulseSequence {
    fn control_segments(&self) -> Vec<Segment> {
        self.segments.clone()
    }
    fn duration(&self) -> f64 {
        self.total_duration()
    }
    fn amplitude_bound(&self) -> f64 {
        self.a_max
    }
}

impl ControlPulse for ControlGrid {
    fn control_segments(&self) -> Vec<Segment> {
        self.to_sequence().segments
    }
    fn duration(&self) -> f64 {
        self.total_duration()
    }
    fn amplitude_bound(&self) -> f64 {
        self.a_max
    }
}

impl ControlPulse for Pulse {
    fn control_segments(&self) -> Vec<Segment> {
        match self {
            Pulse::Sequence(p) => p.control_segments(),
            Pulse::Grid(g) => g.control_segments(),
        }
    }
    fn duration(&self) -> f64 {
        match self {
            Pulse::Sequence(p) => p.duration(),
            Pulse::Grid(g) => g.duration(),
        }
    }
    fn amplitude_bound(&self) -> f64 {
        match self {
            Pulse::Sequence(p) => p.a_max,
            Pulse::Grid(g) => g.a_max,
        }
    }
}

impl From<PulseSequence> for Pulse {
    fn from(p: PulseSequence) -> Self {
        Pulse::Sequence(p)
    }
}

impl From<ControlGrid> for Pulse {
    fn from(g: ControlGrid) -> Self {
        Pulse::Grid(g)
    }
}

impl Pulse {
    /// Net unitary with the noise switched off.
    pub fn noiseless_unitary(&self) -> Operator2 {
        match self {
            Pulse::Sequence(p) => p.noiseless_unitary(),
            Pulse::Grid(g) => g.to_sequence().noiseless_unitary(),
        }
    }
}

const PULSE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PulseFile {
    version: u32,
    a_max: f64,
    #[serde(flatten)]
    body: PulseFileBody,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum PulseFileBody {
    Segments {
        segments: Vec<[f64; 2]>,
    },
    Grid {
        n: usize,
        dt: f64,
        amplitudes: Vec<f64>,
    },
}

/// Serialize a pulse to its JSON file form.
pub fn pulse_to_json(pulse: &Pulse) -> String {
    let body = match pulse {
        Pulse::Sequence(p) => PulseFileBody::Segments {
            segments: p
                .segments
                .iter()
                .map(|s| [s.duration, s.amplitude])
                .collect(),
        },
        Pulse::Grid(g) => PulseFileBody::Grid {
            n: g.len(),
            dt: g.dt,
            amplitudes: g.amplitudes.clone(),
        },
    };
    let file = PulseFile {
        version: PULSE_FILE_VERSION,
        a_max: match pulse {
            Pulse::Sequence(p) => p.a_max,
            Pulse::Grid(g) => g.a_max,
        },
        body,
    };
    serde_json::to_string_pretty(&file).expect("pulse file serialization cannot fail")
}

/// Parse a pulse from its JSON file form, enforcing the amplitude bound.
pub fn pulse_from_json(text: &str) -> Result<Pulse> {
    let file: PulseFile = serde_json::from_str(text)?;
    if file.version != PULSE_FILE_VERSION {
        return Err(Error::UnsupportedVersion(file.version));
    }
    match file.body {
        PulseFileBody::Segments { segments } => {
            let segments = segments
                .into_iter()
                .map(|[duration, amplitude]| Segment {
                    duration,
                    amplitude,
                })
                .collect();
            Ok(Pulse::Sequence(PulseSequence::new(segments, file.a_max)?))
        }
        PulseFileBody::Grid { n, dt, amplitudes } => {
            if n != amplitudes.len() {
                return Err(Error::InconsistentPulseFile(format!(
                    "declared n = {n} but {} amplitudes given",
                    amplitudes.len()
                )));
            }
            Ok(Pulse::Grid(ControlGrid::new(dt, amplitudes, file.a_max)?))
        }
    }
}

pub fn save_pulse(path: impl AsRef<Path>, pulse: &Pulse) -> Result<()> {
    std::fs::write(path, pulse_to_json(pulse) + "\n")?;
    Ok(())
}

pub fn load_pulse(path: impl AsRef<Path>) -> Result<Pulse> {
    pulse_from_json(&std::fs::read_to_string(path)?)
}
