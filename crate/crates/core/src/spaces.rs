//! Monomial-basis arithmetic for the weighted Bergman spaces A²_α and the
//! Fock spaces F²_β.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, ln_gamma_ratio, ComplexKahanSum, KahanSum, OVERFLOW_LOG};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Bergman,
    Fock,
}

/// A²_α (weight α > −1) or F²_β (weight β > 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct SpaceParams {
    kind: SpaceKind,
    weight: f64,
}

#[derive(Deserialize)]
struct RawSpace {
    kind: SpaceKind,
    weight: f64,
}

impl TryFrom<RawSpace> for SpaceParams {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        SpaceParams::new(raw.kind, raw.weight)
    }
}

impl SpaceParams {
    pub fn new(kind: SpaceKind, weight: f64) -> Result<Self> {
        match kind {
            SpaceKind::Bergman if !(weight > -1.0) || !weight.is_finite() => {
                Err(Error::param("alpha", format!("{weight} must be > -1")))
            }
            SpaceKind::Fock if !(weight > 0.0) || !weight.is_finite() => {
                Err(Error::param("beta", format!("{weight} must be > 0")))
            }
            _ => Ok(Self { kind, weight }),
        }
    }

    pub fn bergman(alpha: f64) -> Result<Self> {
        Self::new(SpaceKind::Bergman, alpha)
    }

    pub fn fock(beta: f64) -> Result<Self> {
        Self::new(SpaceKind::Fock, beta)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_bergman(&self) -> bool {
        self.kind == SpaceKind::Bergman
    }

    /// ln ‖zⁿ‖².
    pub fn ln_monomial_norm_sq(&self, n: usize) -> f64 {
        match self.kind {
            SpaceKind::Bergman => ln_factorial(n) - ln_gamma_ratio(self.weight + 2.0, n as f64),
            SpaceKind::Fock => ln_factorial(n) - n as f64 * self.weight.ln(),
        }
    }

    pub fn monomial_norm_sq(&self, n: usize) -> f64 {
        self.ln_monomial_norm_sq(n).exp()
    }

    /// ln c_n where e_n = c_n zⁿ is the n-th orthonormal basis vector.
    pub fn ln_basis_scale(&self, n: usize) -> f64 {
        -0.5 * self.ln_monomial_norm_sq(n)
    }

    /// Normalizing constant of the localization integral: α + 1 against dλ, or β/π against dA.
    pub fn localization_constant(&self) -> f64 {
        match self.kind {
            SpaceKind::Bergman => self.weight + 1.0,
            SpaceKind::Fock => self.weight / std::f64::consts::PI,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            SpaceKind::Bergman => format!("bergman(alpha={})", self.weight),
            SpaceKind::Fock => format!("fock(beta={})", self.weight),
        }
    }
}

/// ‖zⁿ‖² in the given space.
pub fn monomial_norm_sq(space: &SpaceParams, n: usize) -> f64 {
    space.monomial_norm_sq(n)
}

/// A polynomial Σ a_n zⁿ living in a given space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVector", into = "RawVector")]
pub struct CoefficientVector {
    space: SpaceParams,
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawVector {
    kind: SpaceKind,
    weight: f64,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<RawVector> for CoefficientVector {
    type Error = Error;

    fn try_from(raw: RawVector) -> Result<Self> {
        let space = SpaceParams::new(raw.kind, raw.weight)?;
        let coeffs = raw
            .coeffs
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        CoefficientVector::new(space, coeffs)
    }
}

impl From<CoefficientVector> for RawVector {
    fn from(v: CoefficientVector) -> Self {
        RawVector {
            kind: v.space.kind,
            weight: v.space.weight,
            coeffs: v.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl CoefficientVector {
    pub fn new(space: SpaceParams, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "at least one coefficient required"));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("coefficient vector entry".into()));
        }
        Ok(Self { space, coeffs })
    }

    pub fn from_real(space: SpaceParams, coeffs: &[f64]) -> Result<Self> {
        Self::new(space, coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(space: SpaceParams, c: Complex64) -> Self {
        Self {
            space,
            coeffs: vec![c],
        }
    }

    /// The unit vector e_n = c_n zⁿ.
    pub fn basis(space: SpaceParams, n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(space.ln_basis_scale(n).exp(), 0.0);
        Self { space, coeffs }
    }

    /// Builds Σ b_n e_n from orthonormal-basis coordinates.
    pub fn from_orthonormal(space: SpaceParams, b: &[Complex64]) -> Result<Self> {
        let coeffs = b
            .iter()
            .enumerate()
            .map(|(n, bn)| bn * space.ln_basis_scale(n).exp())
            .collect();
        Self::new(space, coeffs)
    }

    pub fn space(&self) -> &SpaceParams {
        &self.space
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coordinates b_n = a_n ‖zⁿ‖ in the orthonormal basis.
    pub fn orthonormal_coeffs(&self) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(n, a)| a * (-self.space.ln_basis_scale(n)).exp())
            .collect()
    }

    pub fn norm_sq(&self) -> f64 {
        let mut s = KahanSum::new();
        for b in self.orthonormal_coeffs() {
            s.add(b.norm_sqr());
        }
        s.value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::param("window", "zero vector cannot be normalized"));
        }
        Ok(Self {
            space: self.space,
            coeffs: self.coeffs.iter().map(|c| c / n).collect(),
        })
    }

    /// Same coefficients with θ-rotation applied: f(e^{iθ}·).
    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            space: self.space,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, c)| c * Complex64::from_polar(1.0, n as f64 * theta))
                .collect(),
        }
    }

    /// Zero-padded copy with degree at least `degree`.
    pub fn padded(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() < degree + 1 {
            coeffs.resize(degree + 1, Complex64::new(0.0, 0.0));
        }
        Self {
            space: self.space,
            coeffs,
        }
    }
}

fn check_same_space(u: &CoefficientVector, v: &CoefficientVector) -> Result<()> {
    if u.space != v.space {
        return Err(Error::SpaceMismatch(format!(
            "{} vs {}",
            u.space.label(),
            v.space.label()
        )));
    }
    Ok(())
}

/// ⟨u, v⟩ = Σ u_n conj(v_n) ‖zⁿ‖².
pub fn inner_product(u: &CoefficientVector, v: &CoefficientVector) -> Result<Complex64> {
    check_same_space(u, v)?;
    let mut s = ComplexKahanSum::new();
    for (n, (a, b)) in u.coeffs.iter().zip(&v.coeffs).enumerate() {
        s.add(a * b.conj() * u.space.monomial_norm_sq(n));
    }
    Ok(s.value())
}

/// The diagonal unitary A² → A²_α sending e_n^0 to e_n^α.
pub fn v_alpha_transform(u: &CoefficientVector, target_alpha: f64) -> Result<CoefficientVector> {
    if !u.space.is_bergman() || u.space.weight != 0.0 {
        return Err(Error::SpaceMismatch(format!(
            "expected bergman(alpha=0), got {}",
            u.space.label()
        )));
    }
    let target = SpaceParams::bergman(target_alpha)?;
    let coeffs = u
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, a)| a / ((n + 1) as f64).sqrt() * target.ln_basis_scale(n).exp())
        .collect();
    CoefficientVector::new(target, coeffs)
}

/// Σ a_n zⁿ by Horner's rule.
pub fn evaluate(u: &CoefficientVector, z: Complex64) -> Complex64 {
    u.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Closed-form reproducing kernel K(z, w).
pub fn kernel_eval(space: &SpaceParams, z: Complex64, w: Complex64) -> Result<Complex64> {
    let log = match space.kind {
        SpaceKind::Bergman => {
            if z.norm() >= 1.0 || w.norm() >= 1.0 {
                return Err(Error::domain("kernel_eval", "Bergman kernel needs |z|, |w| < 1"));
            }
            -(2.0 + space.weight) * (1.0 - z * w.conj()).ln()
        }
        SpaceKind::Fock => space.weight * z * w.conj(),
    };
    if log.re > OVERFLOW_LOG {
        return Err(Error::Overflow {
            log_magnitude: log.re,
        });
    }
    Ok(log.exp())
}

/// Degree-`degree` truncation of the kernel K_w = Σ conj(w)ⁿ zⁿ / ‖zⁿ‖².
pub fn kernel_vector(space: &SpaceParams, w: Complex64, degree: usize) -> Result<CoefficientVector> {
    if space.is_bergman() && w.norm() >= 1.0 {
        return Err(Error::domain("kernel_vector", "Bergman kernel needs |w| < 1"));
    }
    let coeffs = (0..=degree)
        .map(|n| {
            if n == 0 {
                return Complex64::new(1.0, 0.0);
            }
            if w.norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let ln_mag = n as f64 * w.norm().ln() - space.ln_monomial_norm_sq(n);
            Complex64::from_polar(ln_mag.exp(), -(n as f64) * w.arg())
        })
        .collect();
    CoefficientVector::new(*space, coeffs)
}

/// ‖K_w − truncation‖², the squared norm of the discarded kernel tail.
///
/// Terms are |w|^{2n}/‖zⁿ‖²; for Bergman they decay like n^{α+1}|w|^{2n}.
pub fn kernel_tail_sq(space: &SpaceParams, w: Complex64, degree: usize) -> f64 {
    if w.norm() == 0.0 {
        return 0.0;
    }
    let lw = 2.0 * w.norm().ln();
    let mut s = KahanSum::new();
    let mut n = degree + 1;
    let mut prev = f64::INFINITY;
    loop {
        let t = (n as f64 * lw - space.ln_monomial_norm_sq(n)).exp();
        s.add(t);
        if t < prev && t <= 1e-18 * s.value().max(1e-300) {
            return s.value();
        }
        prev = t;
        n += 1;
        if n > degree + 1_000_000 {
            return f64::INFINITY;
        }
    }
}
