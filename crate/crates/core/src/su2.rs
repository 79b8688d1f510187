//! Exact 2x2 complex linear algebra for a driven qubit.
//!
//! Everything here is closed form: Pauli matrices, the propagator of one
//! constant control/noise segment, conjugation, trace overlaps, and the
//! Bloch-vector parametrization of density matrices.
//!
//! The evolution convention is `U(dt) = exp(-i (a sigma_x + eta sigma_z) dt / 2)`,
//! so a constant drive of amplitude `a` rotates the Bloch vector by the pulse
//! area `a * dt`. A segment of area pi is a bit flip.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Threshold below which the propagator switches to its first-order series.
/// Avoids the 0/0 in sin(theta)/omega for vanishing generators.
const SMALL_ANGLE: f64 = 1e-8;

/// A 2x2 complex matrix stored row-major.
///
/// Used for propagators, Pauli operators, and density matrices alike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator2 {
    e: [Complex64; 4],
}

/// One of the three Pauli axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Operator2 {
    pub fn new(e00: Complex64, e01: Complex64, e10: Complex64, e11: Complex64) -> Self {
        Self {
            e: [e00, e01, e10, e11],
        }
    }

    pub fn zero() -> Self {
        Self {
            e: [Complex64::ZERO; 4],
        }
    }

    pub fn identity() -> Self {
        Self::diag(Complex64::ONE, Complex64::ONE)
    }

    pub fn diag(e00: Complex64, e11: Complex64) -> Self {
        Self::new(e00, Complex64::ZERO, Complex64::ZERO, e11)
    }

    /// Entry at row `r`, column `c` (both in {0, 1}).
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        self.e[2 * r + c]
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> Self {
        Self::new(
            self.e[0].conj(),
            self.e[2].conj(),
            self.e[1].conj(),
            self.e[3].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0] + self.e[3]
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            e: [self.e[0] * s, self.e[1] * s, self.e[2] * s, self.e[3] * s],
        }
    }

    /// Largest entrywise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.e
            .iter()
            .zip(other.e.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise deviation of `U U^dagger` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (*self * self.adjoint()).max_abs_diff(&Self::identity())
    }

    /// Distance to `target` insensitive to a global phase:
    /// `1 - |tr(target^dagger U)| / 2`. Zero iff the two unitaries agree up to phase.
    pub fn phase_invariant_distance(&self, target: &Self) -> f64 {
        1.0 - (target.adjoint() * *self).trace().norm() / 2.0
    }
}

impl Add for Operator2 {
    type Output = Operator2;
    fn add(self, rhs: Operator2) -> Operator2 {
        Operator2 {
            e: [
                self.e[0] + rhs.e[0],
                self.e[1] + rhs.e[1],
                self.e[2] + rhs.e[2],
                self.e[3] + rhs.e[3],
            ],
        }
    }
}

impl Sub for Operator2 {
    type Output = Operator2;
    fn sub(self, rhs: Operator2) -> Operator2 {
        Operator2 {
            e: [
                self.e[0] - rhs.e[0],
                self.e[1] - rhs.e[1],
                self.e[2] - rhs.e[2],
                self.e[3] - rhs.e[3],
            ],
        }
    }
}

impl Mul for Operator2 {
    type Output = Operator2;
    fn mul(self, rhs: Operator2) -> Operator2 {
        let a = &self.e;
        let b = &rhs.e;
        Operator2 {
            e: [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ],
        }
    }
}

/// The standard Pauli matrix for `axis`.
pub fn pauli(axis: Axis) -> Operator2 {
    let one = Complex64::ONE;
    let i = Complex64::I;
    match axis {
        Axis::X => Operator2::new(Complex64::ZERO, one, one, Complex64::ZERO),
        Axis::Y => Operator2::new(Complex64::ZERO, -i, i, Complex64::ZERO),
        Axis::Z => Operator2::diag(one, -one),
    }
}

/// Closed-form propagator of one constant segment,
/// `exp(-i (a sigma_x + eta sigma_z) dt / 2)`.
///
/// With `omega = sqrt(a^2 + eta^2)` and `theta = omega dt / 2` this is
/// `cos(theta) I - i sin(theta) (a sigma_x + eta sigma_z) / omega`; below the
/// small-angle threshold the first-order series is used instead.
pub fn propagator_step(a: f64, eta: f64, dt: f64) -> Operator2 {
    debug_assert!(dt >= 0.0, "segment duration must be non-negative");
    let omega = f64::hypot(a, eta);
    if omega * dt < SMALL_ANGLE {
        // U = I - i dt (a sx + eta sz) / 2
        let half = -0.5 * dt;
        return Operator2::new(
            Complex64::new(1.0, half * eta),
            Complex64::new(0.0, half * a),
            Complex64::new(0.0, half * a),
            Complex64::new(1.0, -half * eta),
        );
    }
    let theta = omega * dt / 2.0;
    let c = theta.cos();
    let s = theta.sin() / omega;
    Operator2::new(
        Complex64::new(c, -s * eta),
        Complex64::new(0.0, -s * a),
        Complex64::new(0.0, -s * a),
        Complex64::new(c, s * eta),
    )
}

/// The map `U rho U^dagger`.
pub fn conjugate(u: &Operator2, rho: &Operator2) -> Operator2 {
    *u * *rho * u.adjoint()
}

/// `Re tr(A^dagger B)`, the Hilbert-Schmidt overlap.
pub fn overlap(a: &Operator2, b: &Operator2) -> f64 {
    (0..4).map(|i| (a.e[i].conj() * b.e[i]).re).sum()
}

/// Real Bloch coordinates of a qubit state, `|c| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Density matrix `(I + c_x sigma_x + c_y sigma_y + c_z sigma_z) / 2`.
///
/// Rejects vectors outside the Bloch ball (norm above `1 + 1e-9`).
pub fn bloch_to_density(v: BlochVector) -> Result<Operator2> {
    let norm = v.norm();
    if norm > 1.0 + 1e-9 {
        return Err(Error::BlochNormExceeded { norm });
    }
    let half = 0.5;
    Ok(Operator2::new(
        Complex64::new(half * (1.0 + v.z), 0.0),
        Complex64::new(half * v.x, -half * v.y),
        Complex64::new(half * v.x, half * v.y),
        Complex64::new(half * (1.0 - v.z), 0.0),
    ))
}

/// Bloch coordinates `c_i = tr(rho sigma_i)` of a density matrix.
pub fn density_to_bloch(rho: &Operator2) -> BlochVector {
    BlochVector {
        x: (rho.entry(0, 1) + rho.entry(1, 0)).re,
        y: ((rho.entry(0, 1) - rho.entry(1, 0)) * Complex64::I).re,
        z: (rho.entry(0, 0) - rho.entry(1, 1)).re,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ket0() -> Operator2 {
        Operator2::diag(Complex64::ONE, Complex64::ZERO)
    }

    fn ket1() -> Operator2 {
        Operator2::diag(Complex64::ZERO, Complex64::ONE)
    }

    #[test]
    fn pauli_matrices_square_to_identity() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let s = pauli(axis);
            assert!((s * s).max_abs_diff(&Operator2::identity()) < 1e-15);
        }
    }

    #[test]
    fn pauli_entries_match_definitions() {
        let sx = pauli(Axis::X);
        assert_eq!(sx.entry(0, 1), Complex64::ONE);
        assert_eq!(sx.entry(1, 0), Complex64::ONE);
        let sz = pauli(Axis::Z);
        assert_eq!(sz.entry(0, 0), Complex64::ONE);
        assert_eq!(sz.entry(1, 1), -Complex64::ONE);
    }

    #[test]
    fn zero_generator_gives_identity() {
        let u = propagator_step(0.0, 0.0, 1.7);
        assert!(u.max_abs_diff(&Operator2::identity()) < 1e-15);
    }

    #[test]
    fn pi_area_drive_is_minus_i_sigma_x() {
        let u = propagator_step(1.0, 0.0, PI);
        let expected = pauli(Axis::X).scale(-Complex64::I);
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pure_dephasing_is_diagonal_phase() {
        let delta = 0.37;
        let dt = 2.1;
        let u = propagator_step(0.0, delta, dt);
        let phase = Complex64::from_polar(1.0, -delta * dt / 2.0);
        let expected = Operator2::diag(phase, phase.conj());
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn tilted_generator_matches_frozen_exponential() {
        // exp(-i (sx + sz) pi / 2), obtained from a scaling-and-squaring
        // matrix exponential evaluated ahead of the implementation.
        let u = propagator_step(1.0, 1.0, PI);
        let d = Complex64::new(-0.605_699_867_078_813_4, -0.562_640_058_572_400_1);
        let o = Complex64::new(0.0, -0.562_640_058_572_400_1);
        let expected = Operator2::new(d, o, o, d.conj());
        assert!(u.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn small_angle_branch_is_continuous() {
        // Straddle the series threshold; both branches must agree.
        let a = 1e-9;
        let below = propagator_step(a, 0.0, 0.5);
        let theta = a * 0.5 / 2.0;
        let exact = Operator2::new(
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(0.0, -theta.sin()),
            Complex64::new(0.0, -theta.sin()),
            Complex64::new(theta.cos(), 0.0),
        );
        assert!(below.max_abs_diff(&exact) < 1e-15);
    }

    #[test]
    fn conjugate_by_identity_is_identity_map() {
        let rho = bloch_to_density(BlochVector::new(0.3, -0.2, 0.4)).unwrap();
        assert!(conjugate(&Operator2::identity(), &rho).max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn bit_flip_maps_excited_to_ground() {
        let u = pauli(Axis::X).scale(-Complex64::I);
        let out = conjugate(&u, &ket1());
        assert!(out.max_abs_diff(&ket0()) < 1e-15);
    }

    #[test]
    fn sigma_z_flips_plus_to_minus() {
        let plus = bloch_to_density(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        let minus = bloch_to_density(BlochVector::new(-1.0, 0.0, 0.0)).unwrap();
        let out = conjugate(&pauli(Axis::Z), &plus);
        assert!(out.max_abs_diff(&minus) < 1e-15);
    }

    #[test]
    fn overlap_of_basis_projectors() {
        assert_abs_diff_eq!(overlap(&ket0(), &ket0()), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(overlap(&ket0(), &ket1()), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            overlap(&pauli(Axis::X), &pauli(Axis::Y)),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn bloch_poles_are_basis_states() {
        let south = bloch_to_density(BlochVector::new(0.0, 0.0, -1.0)).unwrap();
        assert!(south.max_abs_diff(&ket1()) < 1e-15);
        let north = bloch_to_density(BlochVector::new(0.0, 0.0, 1.0)).unwrap();
        assert!(north.max_abs_diff(&ket0()) < 1e-15);
        let plus = bloch_to_density(BlochVector::new(1.0, 0.0, 0.0)).unwrap();
        let half = Complex64::new(0.5, 0.0);
        assert!(plus.max_abs_diff(&Operator2::new(half, half, half, half)) < 1e-15);
    }

    #[test]
    fn bloch_round_trip() {
        let v = BlochVector::new(0.1, -0.7, 0.2);
        let rho = bloch_to_density(v).unwrap();
        let back = density_to_bloch(&rho);
        assert_abs_diff_eq!(back.x, v.x, epsilon = 1e-12);
        assert_abs_diff_eq!(back.y, v.y, epsilon = 1e-12);
        assert_abs_diff_eq!(back.z, v.z, epsilon = 1e-12);
    }

    #[test]
    fn bloch_vector_outside_ball_is_rejected() {
        let err = bloch_to_density(BlochVector::new(1.0, 0.2, 0.0));
        assert!(err.is_err());
        // Right at the boundary is fine.
        assert!(bloch_to_density(BlochVector::new(0.0, 1.0, 0.0)).is_ok());
    }

    #[test]
    fn phase_invariant_distance_ignores_global_phase() {
        let sx = pauli(Axis::X);
        let u = sx.scale(Complex64::from_polar(1.0, 1.234));
        assert!(u.phase_invariant_distance(&sx) < 1e-15);
        assert_abs_diff_eq!(
            Operator2::identity().phase_invariant_distance(&sx),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn propagator_composes_over_constant_generator() {
        let (a, eta) = (0.8, -0.3);
        let u1 = propagator_step(a, eta, 0.7);
        let u2 = propagator_step(a, eta, 1.9);
        let whole = propagator_step(a, eta, 2.6);
        assert!((u2 * u1).max_abs_diff(&whole) < 1e-12);
    }
}
