//! Single-qubit pure states parameterized by Bloch-sphere angles.
//!
//! Conventions used throughout the crate:
//!
//! * basis index 0 is `|1>`, basis index 1 is `|0>`
//! * a state with polar angle `theta` and azimuth `phi` has amplitudes
//!   `(cos(theta/2), sin(theta/2) e^{i phi})` in that basis
//! * the matching Bloch vector is
//!   `(sin(theta) cos(phi), sin(theta) sin(phi), cos(theta))`
//!
//! Measurement directions, true states, and estimates are all values of
//! [`PureQubit`], so the same geometry helpers serve every module.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::{Error, Result};

/// Pure qubit state `cos(theta/2)|1> + sin(theta/2) e^{i phi}|0>`.
///
/// `theta` lies in `[0, pi]` and `phi` is stored canonically in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    theta: f64,
    phi: f64,
}

impl PureQubit {
    /// Builds a state from Bloch angles. `phi` may be any finite value and is
    /// reduced modulo `2 pi`; `theta` outside `[0, pi]` is rejected.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::invalid(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(Error::invalid(format!("azimuth {phi} is not finite")));
        }
        let mut phi = phi.rem_euclid(TAU);
        // rem_euclid can round up to the modulus itself for tiny negatives.
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self { theta, phi })
    }

    /// The north-pole state `|1>` (theta = 0).
    pub fn pole() -> Self {
        Self { theta: 0.0, phi: 0.0 }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Amplitudes `(<1|psi>, <0|psi>) = (cos(theta/2), sin(theta/2) e^{i phi})`.
    pub fn amplitudes(&self) -> [Complex64; 2] {
        let (half_sin, half_cos) = (0.5 * self.theta).sin_cos();
        [
            Complex64::new(half_cos, 0.0),
            Complex64::from_polar(half_sin, self.phi),
        ]
    }

    /// Amplitudes of the orthogonal state
    /// `cos(theta/2)|0> - sin(theta/2) e^{-i phi}|1>`, which points along the
    /// antipodal Bloch direction up to a global phase.
    pub fn orthogonal_amplitudes(&self) -> [Complex64; 2] {
        let (half_sin, half_cos) = (0.5 * self.theta).sin_cos();
        [
            -Complex64::from_polar(half_sin, -self.phi),
            Complex64::new(half_cos, 0.0),
        ]
    }

    /// Unit Bloch vector `(sin t cos p, sin t sin p, cos t)`.
    pub fn bloch_vector(&self) -> [f64; 3] {
        let (sin_t, cos_t) = self.theta.sin_cos();
        let (sin_p, cos_p) = self.phi.sin_cos();
        [sin_t * cos_p, sin_t * sin_p, cos_t]
    }

    /// Builds the state whose Bloch vector is parallel to `v`.
    ///
    /// `v` need not be normalized, but its norm must exceed `1e-12`.
    pub fn from_bloch(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 1e-12) {
            return Err(Error::invalid(format!(
                "Bloch vector norm {norm:.3e} too small to define a direction"
            )));
        }
        let theta = (v[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = v[1].atan2(v[0]).rem_euclid(TAU);
        Self::new(theta, phi)
    }

    /// Squared overlap `|<self|other>|^2 = (1 + a.b)/2` with `a`, `b` the two
    /// Bloch vectors. Always in `[0, 1]`.
    pub fn overlap_fidelity(&self, other: &Self) -> f64 {
        let a = self.bloch_vector();
        let b = other.bloch_vector();
        let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        (0.5 * (1.0 + dot)).clamp(0.0, 1.0)
    }

    /// Draws a direction uniformly on the sphere (`cos theta` and `phi`
    /// uniform).
    pub fn sample_uniform<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let z: f64 = 1.0 - 2.0 * rng.gen::<f64>();
        let phi = TAU * rng.gen::<f64>();
        let theta = z.clamp(-1.0, 1.0).acos();
        Self { theta, phi: if phi >= TAU { 0.0 } else { phi } }
    }
}
