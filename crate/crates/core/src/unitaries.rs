//! Matrix elements of the Möbius unitaries on A²_α and the Weyl operators on
//! F²_β in the orthonormal monomial bases.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mobius_phi, GroupElement};
use crate::spaces::{evaluate, CoefficientVector, SpaceKind, SpaceParams};
use crate::special::{ln_binomial, ln_factorial, ln_gamma_ratio, ComplexKahanSum, KahanSum};

/// Mass threshold below which `apply_unitary` flags a warning.
pub const CAPTURED_MASS_WARNING: f64 = 1.0 - 1e-6;

/// A unitary acting on one of the two space families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum UnitaryAction {
    /// U^α_{e^{iθ},a} on A²_α.
    Mobius(GroupElement),
    /// W^β_z on F²_β.
    Weyl { z: Complex64 },
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::param("alpha", format!("{alpha} must be > -1")));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::param("beta", format!("{beta} must be > 0")));
    }
    Ok(())
}

/// ⟨U_{0,w} e_j, e_k⟩ with the factor (1−|w|²)^{1+α/2} replaced by exp(ln_prefactor).
fn u_element_scaled(alpha: f64, w: Complex64, j: usize, k: usize, ln_prefactor: f64) -> Complex64 {
    let r = w.norm();
    if r == 0.0 {
        return if j == k {
            Complex64::new(ln_prefactor.exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let space = SpaceParams::bergman(alpha).expect("alpha validated by caller");
    let ln_r = r.ln();
    let arg_w = w.arg();
    let arg_neg_w = (-w).arg();
    let ln_norm = space.ln_basis_scale(j) - space.ln_basis_scale(k) + ln_prefactor;
    let shift = j as f64 + 2.0 + alpha;
    let mut sum = ComplexKahanSum::new();
    let m_lo = k.saturating_sub(j);
    for m in m_lo..=k {
        let l = k - m;
        let ln_mag = ln_binomial(j, l) + ln_gamma_ratio(shift, m as f64) - ln_factorial(m)
            + (j - l + m) as f64 * ln_r
            + ln_norm;
        let phase = (j - l) as f64 * arg_neg_w - m as f64 * arg_w;
        sum.add(Complex64::from_polar(ln_mag.exp(), phase));
    }
    sum.value()
}

/// ⟨U_{0,w} e_j, e_k⟩ / (1−|w|²)^{1+α/2}; integrating products of these
/// against dA_α gives the dλ-integrals of the full elements.
pub fn u_matrix_element_reduced(alpha: f64, w: Complex64, j: usize, k: usize) -> Complex64 {
    u_element_scaled(alpha, w, j, k, 0.0)
}

/// ⟨U^α_{e^{it},w} e_j, e_k⟩ including the phase e^{i(1+α/2)t}.
pub fn u_matrix_element(alpha: f64, g: &GroupElement, j: usize, k: usize) -> Result<Complex64> {
    check_alpha(alpha)?;
    let w = g.point();
    let ln_pref = (1.0 + alpha / 2.0) * (-w.norm_sqr()).ln_1p();
    let t = g.angle();
    let phase = Complex64::from_polar(1.0, ((1.0 + alpha / 2.0) + j as f64) * t);
    Ok(phase * u_element_scaled(alpha, w, j, k, ln_pref))
}

/// ⟨W_z ω_j, ω_k⟩ with the factor e^{−β|z|²/2} replaced by exp(ln_prefactor).
fn w_element_scaled(beta: f64, z: Complex64, j: usize, k: usize, ln_prefactor: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return if j == k {
            Complex64::new(ln_prefactor.exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let ln_r = r.ln();
    let ln_beta = beta.ln();
    let arg_z = z.arg();
    let arg_neg_z = (-z).arg();
    let ln_norm = 0.5 * ((j as f64 - k as f64) * ln_beta - ln_factorial(j) + ln_factorial(k))
        + ln_prefactor;
    let mut sum = ComplexKahanSum::new();
    for l in 0..=j.min(k) {
        let ln_mag = ln_binomial(j, l) + (j - l) as f64 * ln_r + (k - l) as f64 * (ln_beta + ln_r)
            - ln_factorial(k - l)
            + ln_norm;
        let phase = (j - l) as f64 * arg_neg_z - (k - l) as f64 * arg_z;
        sum.add(Complex64::from_polar(ln_mag.exp(), phase));
    }
    sum.value()
}

/// ⟨W_z ω_j, ω_k⟩ · e^{β|z|²/2}; integrating products against dμ_β gives the
/// (β/π)dA-integrals of the full elements.
pub fn w_matrix_element_reduced(beta: f64, z: Complex64, j: usize, k: usize) -> Complex64 {
    w_element_scaled(beta, z, j, k, 0.0)
}

/// ⟨W^β_z ω_j, ω_k⟩.
pub fn w_matrix_element(beta: f64, z: Complex64, j: usize, k: usize) -> Result<Complex64> {
    check_beta(beta)?;
    Ok(w_element_scaled(beta, z, j, k, -beta * z.norm_sqr() / 2.0))
}

/// Matrix element of an action on a space.
pub fn matrix_element(space: &SpaceParams, action: &UnitaryAction, j: usize, k: usize) -> Result<Complex64> {
    match (space.kind(), action) {
        (SpaceKind::Bergman, UnitaryAction::Mobius(g)) => u_matrix_element(space.weight(), g, j, k),
        (SpaceKind::Fock, UnitaryAction::Weyl { z }) => w_matrix_element(space.weight(), *z, j, k),
        _ => Err(Error::SpaceMismatch(format!(
            "action {action:?} does not act on {}",
            space.label()
        ))),
    }
}

/// The (rows+1)×(cols+1) block M[k][j] = ⟨U e_j, e_k⟩.
pub fn unitary_block(space: &SpaceParams, action: &UnitaryAction, rows: usize, cols: usize) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(rows + 1, cols + 1);
    for k in 0..=rows {
        for j in 0..=cols {
            m[(k, j)] = matrix_element(space, action, j, k)?;
        }
    }
    Ok(m)
}

/// Truncated image of a vector under a unitary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryImage {
    pub vector: CoefficientVector,
    pub captured_mass: f64,
    pub warning: Option<String>,
}

/// Degree-K truncation of the image of `u`, with the captured-mass fraction.
pub fn apply_unitary(u: &CoefficientVector, action: &UnitaryAction, truncation: usize) -> Result<UnitaryImage> {
    if truncation < u.degree() {
        return Err(Error::param(
            "truncation",
            format!("K = {truncation} below window degree {}", u.degree()),
        ));
    }
    let space = *u.space();
    let b = u.orthonormal_coeffs();
    let mut image = Vec::with_capacity(truncation + 1);
    for k in 0..=truncation {
        let mut s = ComplexKahanSum::new();
        for (j, bj) in b.iter().enumerate() {
            if *bj != Complex64::new(0.0, 0.0) {
                s.add(bj * matrix_element(&space, action, j, k)?);
            }
        }
        image.push(s.value());
    }
    let total = u.norm_sq();
    let mut kept = KahanSum::new();
    for c in &image {
        kept.add(c.norm_sqr());
    }
    let captured_mass = if total > 0.0 { kept.value() / total } else { 1.0 };
    let warning = (captured_mass < CAPTURED_MASS_WARNING).then(|| {
        format!("captured mass {captured_mass:.3e} below 1 - 1e-6 at truncation {truncation}")
    });
    Ok(UnitaryImage {
        vector: CoefficientVector::from_orthonormal(space, &image)?,
        captured_mass,
        warning,
    })
}

/// Smallest K for which every basis vector e_j, j ≤ degree, keeps mass ≥ 1 − tail.
pub fn suggest_truncation(space: &SpaceParams, action: &UnitaryAction, degree: usize, tail: f64) -> Result<usize> {
    const LIMIT: usize = 200_000;
    let mut mass = vec![KahanSum::new(); degree + 1];
    for k in 0..LIMIT {
        for (j, m) in mass.iter_mut().enumerate() {
            m.add(matrix_element(space, action, j, k)?.norm_sqr());
        }
        if k >= degree && mass.iter().all(|m| m.value() >= 1.0 - tail) {
            return Ok(k);
        }
    }
    Err(Error::Truncation(format!(
        "no truncation below {LIMIT} captures 1 - {tail:e} of the window mass"
    )))
}

/// U^α_{e^{iθ},a} f(z) from the defining formula e^{i(1+α/2)θ} f(e^{iθ}φ_a(z)) k_a(z).
pub fn mobius_unitary_pointwise(f: &CoefficientVector, g: &GroupElement, z: Complex64) -> Result<Complex64> {
    let space = f.space();
    if !space.is_bergman() {
        return Err(Error::SpaceMismatch("Möbius unitary needs a Bergman vector".into()));
    }
    let s = 1.0 + space.weight() / 2.0;
    let a = g.point();
    let ln_k = s * (-a.norm_sqr()).ln_1p() - 2.0 * s * (1.0 - a.conj() * z).ln();
    let phase = Complex64::from_polar(1.0, s * g.angle());
    Ok(phase * evaluate(f, g.rotation() * mobius_phi(a, z)) * ln_k.exp())
}

/// W^β_z f(ζ) = f(ζ − z) e^{βz̄ζ − β|z|²/2}.
pub fn weyl_pointwise(f: &CoefficientVector, z: Complex64, zeta: Complex64) -> Result<Complex64> {
    let space = f.space();
    if space.is_bergman() {
        return Err(Error::SpaceMismatch("Weyl operator needs a Fock vector".into()));
    }
    let beta = space.weight();
    Ok(evaluate(f, zeta - z) * (beta * z.conj() * zeta - beta * z.norm_sqr() / 2.0).exp())
}
