//! Disc automorphisms as pairs (e^{iθ}, a) ∈ T×D.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points this close to the unit circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-14;

/// The automorphism ζ ↦ e^{iθ}(ζ − a)/(1 − āζ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    angle: f64,
    point: Complex64,
}

fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// φ_a(ζ) = (ζ − a)/(1 − āζ).
pub fn mobius_phi(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (1.0 - a.conj() * z)
}

impl GroupElement {
    pub fn new(angle: f64, point: Complex64) -> Result<Self> {
        if !angle.is_finite() || !point.re.is_finite() || !point.im.is_finite() {
            return Err(Error::param("group element", "non-finite angle or point"));
        }
        if point.norm() >= 1.0 - BOUNDARY_MARGIN {
            return Err(Error::param(
                "group element",
                format!("|point| = {} must be < 1 - {BOUNDARY_MARGIN:e}", point.norm()),
            ));
        }
        Ok(Self {
            angle: normalize_angle(angle),
            point,
        })
    }

    pub fn identity() -> Self {
        Self {
            angle: 0.0,
            point: Complex64::new(0.0, 0.0),
        }
    }

    /// Pure translation (0, a).
    pub fn translation(point: Complex64) -> Result<Self> {
        Self::new(0.0, point)
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn point(&self) -> Complex64 {
        self.point
    }

    /// e^{iθ}.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }

    /// Element whose map is φ_self ∘ φ_other.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let a = self.point;
        let b = other.point;
        let e_eta = other.rotation();
        let w = 1.0 + e_eta.conj() * a * b.conj();
        let angle = self.angle + other.angle + 2.0 * w.arg();
        let point = mobius_phi(-b, e_eta.conj() * a);
        debug_assert!(point.norm() < 1.0);
        GroupElement {
            angle: normalize_angle(angle),
            point,
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            angle: normalize_angle(-self.angle),
            point: -self.rotation() * self.point,
        }
    }

    /// e^{iθ}φ_a(ζ) for |ζ| ≤ 1.
    pub fn mobius_eval(&self, z: Complex64) -> Complex64 {
        self.rotation() * mobius_phi(self.point, z)
    }

    /// Draws an element with uniform angle and |point| ≤ max_radius.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, max_radius: f64) -> GroupElement {
        let angle = rng.gen_range(0.0..2.0 * PI);
        let r = max_radius * rng.gen::<f64>().sqrt();
        let arg = rng.gen_range(0.0..2.0 * PI);
        GroupElement {
            angle,
            point: Complex64::from_polar(r, arg),
        }
    }

    /// Largest of the angle distance (on the circle) and point distance.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        let da = (self.rotation() - other.rotation()).norm();
        da.max((self.point - other.point).norm())
    }
}
