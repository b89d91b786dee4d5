//! Symbols, Toeplitz and localization operator matrices, and spectral summaries.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::{GaussRule, GridMeasure, QuadratureGrid};
use crate::spaces::{CoefficientVector, SpaceKind, SpaceParams};
use crate::special::{gamma_p, inc_beta, lgamma, ln_gamma_ratio, KahanSum};
use crate::unitaries::{u_matrix_element_reduced, w_matrix_element_reduced};

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type GeneralFn = Arc<dyn Fn(f64, Complex64) -> Complex64 + Send + Sync>;

/// Tolerance below which a matrix is declared Hermitian and symmetrized.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolDomain {
    Disc,
    Plane,
}

/// A radial profile F(ρ) with its sup bound and optional compact support radius.
#[derive(Clone)]
pub struct RadialProfile {
    pub label: String,
    pub f: RadialFn,
    pub sup: f64,
    pub support: Option<f64>,
}

impl RadialProfile {
    pub fn new(label: impl Into<String>, sup: f64, support: Option<f64>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            sup,
            support,
        }
    }
}

/// A general symbol f(θ, z).
#[derive(Clone)]
pub struct GeneralSymbol {
    pub label: String,
    pub f: GeneralFn,
    pub sup: f64,
    pub theta_dependent: bool,
    pub real: bool,
    pub support: Option<f64>,
}

impl GeneralSymbol {
    pub fn new(
        label: impl Into<String>,
        sup: f64,
        theta_dependent: bool,
        real: bool,
        support: Option<f64>,
        f: impl Fn(f64, Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
            sup,
            theta_dependent,
            real,
            support,
        }
    }
}

#[derive(Clone)]
pub enum SymbolForm {
    Constant(f64),
    DiscIndicator(f64),
    Radial(RadialProfile),
    General(GeneralSymbol),
}

/// The scaling f ↦ (1−|z|²)^σ f(θ, r z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub r: f64,
    pub sigma: f64,
}

/// A bounded symbol on T×D or T×C.
#[derive(Clone)]
pub struct SymbolSpec {
    pub domain: SymbolDomain,
    pub form: SymbolForm,
    pub scaling: Option<Scaling>,
}

impl fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl SymbolSpec {
    pub fn constant(domain: SymbolDomain, c: f64) -> Self {
        Self {
            domain,
            form: SymbolForm::Constant(c),
            scaling: None,
        }
    }

    pub fn disc_indicator(domain: SymbolDomain, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", format!("{radius} must be positive")));
        }
        Ok(Self {
            domain,
            form: SymbolForm::DiscIndicator(radius),
            scaling: None,
        })
    }

    pub fn radial(domain: SymbolDomain, profile: RadialProfile) -> Result<Self> {
        if !(profile.sup >= 0.0) || !profile.sup.is_finite() {
            return Err(Error::param("sup", "radial profile needs a finite sup bound"));
        }
        Ok(Self {
            domain,
            form: SymbolForm::Radial(profile),
            scaling: None,
        })
    }

    pub fn general(domain: SymbolDomain, symbol: GeneralSymbol) -> Result<Self> {
        if !(symbol.sup >= 0.0) || !symbol.sup.is_finite() {
            return Err(Error::param("sup", "general symbol needs a finite sup bound"));
        }
        Ok(Self {
            domain,
            form: SymbolForm::General(symbol),
            scaling: None,
        })
    }

    /// Wraps a plane symbol as the disc symbol (1−|z|²)^σ f(θ, r z).
    pub fn scaled(self, r: f64, sigma: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::param("r", format!("{r} must be positive")));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::param("sigma", format!("{sigma} must be nonnegative")));
        }
        Ok(Self {
            domain: SymbolDomain::Disc,
            form: self.form,
            scaling: Some(Scaling { r, sigma }),
        })
    }

    pub fn label(&self) -> String {
        let base = match &self.form {
            SymbolForm::Constant(c) => format!("constant({c})"),
            SymbolForm::DiscIndicator(r) => format!("disc_indicator({r})"),
            SymbolForm::Radial(p) => format!("radial({})", p.label),
            SymbolForm::General(g) => format!("general({})", g.label),
        };
        match self.scaling {
            Some(s) => format!("{base} scaled(r={}, sigma={})", s.r, s.sigma),
            None => base,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.form {
            SymbolForm::Constant(c) => c.abs(),
            SymbolForm::DiscIndicator(_) => 1.0,
            SymbolForm::Radial(p) => p.sup,
            SymbolForm::General(g) => g.sup,
        }
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self.form, SymbolForm::General(_))
    }

    pub fn is_theta_dependent(&self) -> bool {
        matches!(&self.form, SymbolForm::General(g) if g.theta_dependent)
    }

    pub fn is_real(&self) -> bool {
        match &self.form {
            SymbolForm::General(g) => g.real,
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.form, SymbolForm::Constant(c) if c == 0.0)
    }

    fn base_support(&self) -> Option<f64> {
        match &self.form {
            SymbolForm::Constant(_) => None,
            SymbolForm::DiscIndicator(r) => Some(*r),
            SymbolForm::Radial(p) => p.support,
            SymbolForm::General(g) => g.support,
        }
    }

    /// Radius outside of which the symbol vanishes, in the symbol's own variable.
    pub fn support_radius(&self) -> Option<f64> {
        let s = self.base_support()?;
        let s = match self.scaling {
            Some(sc) => s / sc.r,
            None => s,
        };
        match self.domain {
            SymbolDomain::Disc if s >= 1.0 => None,
            _ => Some(s),
        }
    }

    fn base_eval(&self, theta: f64, w: Complex64) -> Complex64 {
        match &self.form {
            SymbolForm::Constant(c) => Complex64::new(*c, 0.0),
            SymbolForm::DiscIndicator(r) => {
                Complex64::new(if w.norm() < *r { 1.0 } else { 0.0 }, 0.0)
            }
            SymbolForm::Radial(p) => Complex64::new((p.f)(w.norm()), 0.0),
            SymbolForm::General(g) => (g.f)(theta, w),
        }
    }

    /// f(e^{iθ}, z); zero outside the disc for disc symbols.
    pub fn eval(&self, theta: f64, z: Complex64) -> Complex64 {
        let s = z.norm_sqr();
        if self.domain == SymbolDomain::Disc && s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        match self.scaling {
            Some(sc) => {
                let v = self.base_eval(theta, sc.r * z);
                if sc.sigma == 0.0 {
                    v
                } else {
                    v * (1.0 - s).powf(sc.sigma)
                }
            }
            None => self.base_eval(theta, z),
        }
    }

    /// Value of a radial symbol at radius ρ.
    pub fn radial_value(&self, rho: f64) -> Result<f64> {
        if !self.is_radial() {
            return Err(Error::Unsupported(format!("{} is not radial", self.label())));
        }
        Ok(self.eval(0.0, Complex64::new(rho, 0.0)).re)
    }

    /// ∫ g(F(ρ)) dλ (disc) or ∫ g(F(ρ)) dA (plane) for a radial symbol.
    pub fn radial_integral(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        if !self.is_radial() {
            return Err(Error::Unsupported(format!("{} is not radial", self.label())));
        }
        let value = |s: f64| g(self.eval(0.0, Complex64::new(s.sqrt(), 0.0)).re);
        let support = self.support_radius().map(|r| r * r);
        match self.domain {
            SymbolDomain::Disc => {
                let rule = graded_unit_rule(support)?;
                let mut acc = KahanSum::new();
                for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                    if *s < 1.0 {
                        acc.add(w * value(*s) / (1.0 - s).powi(2));
                    }
                }
                Ok(acc.value())
            }
            SymbolDomain::Plane => {
                let rule = graded_half_line_rule(support)?;
                let mut acc = KahanSum::new();
                for (s, w) in rule.nodes.iter().zip(&rule.weights) {
                    acc.add(w * value(*s));
                }
                Ok(std::f64::consts::PI * acc.value())
            }
        }
    }

    /// ‖f‖₁ against dλ (disc) or dA (plane).
    pub fn l1_norm(&self) -> Result<f64> {
        match (&self.form, self.scaling, self.domain) {
            (SymbolForm::DiscIndicator(r), None, SymbolDomain::Disc) if *r < 1.0 => {
                Ok(r * r / (1.0 - r * r))
            }
            (SymbolForm::DiscIndicator(r), None, SymbolDomain::Plane) => {
                Ok(std::f64::consts::PI * r * r)
            }
            _ => self.radial_integral(|v| v.abs()),
        }
    }

    /// λ({|f| > δ}) on the disc, or the dA-area of that set on the plane.
    pub fn level_set_measure(&self, delta: f64) -> Result<f64> {
        if let (SymbolForm::DiscIndicator(r), None) = (&self.form, self.scaling) {
            if delta >= 1.0 {
                return Ok(0.0);
            }
            return Ok(match self.domain {
                SymbolDomain::Disc if *r < 1.0 => r * r / (1.0 - r * r),
                SymbolDomain::Disc => f64::INFINITY,
                SymbolDomain::Plane => std::f64::consts::PI * r * r,
            });
        }
        if !self.is_radial() {
            return Err(Error::Unsupported(format!("{} is not radial", self.label())));
        }
        let above = |s: f64| self.eval(0.0, Complex64::new(s.sqrt(), 0.0)).norm() > delta;
        // Sample s densely, then refine each crossing by bisection.
        let (samples, measure): (Vec<f64>, Box<dyn Fn(f64, f64) -> f64>) = match self.domain {
            SymbolDomain::Disc => {
                let mut v: Vec<f64> = (0..4000).map(|i| i as f64 / 8000.0).collect();
                for k in 1..48 {
                    let lo = 1.0 - 0.5f64.powi(k);
                    let hi = 1.0 - 0.5f64.powi(k + 1);
                    v.extend((0..200).map(|i| lo + (hi - lo) * i as f64 / 200.0));
                }
                (v, Box::new(|a: f64, b: f64| 1.0 / (1.0 - b) - 1.0 / (1.0 - a)))
            }
            SymbolDomain::Plane => {
                let mut v: Vec<f64> = (0..4000).map(|i| i as f64 / 4000.0).collect();
                for k in 0..40 {
                    let lo = 2f64.powi(k);
                    v.extend((0..200).map(|i| lo + lo * i as f64 / 200.0));
                }
                (v, Box::new(|a: f64, b: f64| std::f64::consts::PI * (b - a)))
            }
        };
        let bisect = |mut a: f64, mut b: f64| {
            let fa = above(a);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if above(m) == fa {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let mut total = 0.0;
        let mut start = if above(samples[0]) { Some(samples[0]) } else { None };
        for w in samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (ia, ib) = (above(a), above(b));
            if ia != ib {
                let x = bisect(a, b);
                if ib {
                    start = Some(x);
                } else if let Some(s0) = start.take() {
                    total += measure(s0, x);
                }
            }
        }
        if let Some(s0) = start {
            let end = *samples.last().unwrap_or(&s0);
            if self.domain == SymbolDomain::Disc {
                return Ok(f64::INFINITY);
            }
            total += measure(s0, end);
        }
        Ok(total)
    }
}

/// Composite Legendre rule on [0, support] or on [0, 1) graded toward 1.
fn graded_unit_rule(support: Option<f64>) -> Result<GaussRule> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push = |lo: f64, hi: f64| -> Result<()> {
        let r = GaussRule::legendre(20, lo, hi)?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
        Ok(())
    };
    match support {
        Some(s) => {
            for i in 0..16 {
                push(s * i as f64 / 16.0, s * (i + 1) as f64 / 16.0)?;
            }
        }
        None => {
            for i in 0..8 {
                push(0.5 * i as f64 / 8.0, 0.5 * (i + 1) as f64 / 8.0)?;
            }
            for k in 1..46 {
                push(1.0 - 0.5f64.powi(k), 1.0 - 0.5f64.powi(k + 1))?;
            }
        }
    }
    Ok(GaussRule { nodes, weights })
}

/// Composite Legendre rule on [0, support] or on [0, ∞) with dyadic panels.
fn graded_half_line_rule(support: Option<f64>) -> Result<GaussRule> {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut push = |lo: f64, hi: f64| -> Result<()> {
        let r = GaussRule::legendre(20, lo, hi)?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
        Ok(())
    };
    match support {
        Some(s) => {
            for i in 0..16 {
                push(s * i as f64 / 16.0, s * (i + 1) as f64 / 16.0)?;
            }
        }
        None => {
            for i in 0..8 {
                push(i as f64 / 8.0, (i + 1) as f64 / 8.0)?;
            }
            for k in 0..12 {
                push(2f64.powi(k), 2f64.powi(k + 1))?;
            }
        }
    }
    Ok(GaussRule { nodes, weights })
}

/// Named radial profiles used by the suites and the command line.
pub fn named_profile(name: &str, domain: SymbolDomain) -> Option<RadialProfile> {
    let p = match (domain, name) {
        (SymbolDomain::Disc, "boundary2") => RadialProfile::new(name, 1.0, None, |r| (1.0 - r * r).max(0.0).powi(2)),
        (SymbolDomain::Disc, "boundary3") => RadialProfile::new(name, 1.0, None, |r| (1.0 - r * r).max(0.0).powi(3)),
        (SymbolDomain::Disc, "bulge") => RadialProfile::new(name, 1.0, None, |r| {
            let s = r * r;
            6.75 * s * (1.0 - s).max(0.0).powi(2)
        }),
        (SymbolDomain::Disc, "bump") => RadialProfile::new(name, 1.0, Some(0.6), |r| (1.0 - r * r / 0.36).max(0.0).powi(3)),
        (SymbolDomain::Disc, "gauss_edge") => RadialProfile::new(name, 1.0, None, |r| {
            let s = r * r;
            (-s / 0.1).exp() * (1.0 - s).max(0.0).powi(2)
        }),
        (SymbolDomain::Disc, "half_step") => RadialProfile::new(name, 0.5, Some(0.4), |r| if r < 0.4 { 0.5 } else { 0.0 }),
        (SymbolDomain::Plane, "gaussian") => RadialProfile::new(name, 1.0, None, |r| (-r * r).exp()),
        (SymbolDomain::Plane, "wide_gaussian") => RadialProfile::new(name, 1.0, None, |r| (-r * r / 4.0).exp()),
        (SymbolDomain::Plane, "shell") => RadialProfile::new(name, 1.0, None, |r| {
            let s = r * r;
            std::f64::consts::E * s * (-s).exp()
        }),
        (SymbolDomain::Plane, "bump") => RadialProfile::new(name, 1.0, Some(2.0), |r| (1.0 - r * r / 4.0).max(0.0).powi(3)),
        (SymbolDomain::Plane, "plateau") => RadialProfile::new(name, 1.0, None, |r| 1.0 / (1.0 + r.powi(4))),
        _ => return None,
    };
    Some(p)
}

/// Names accepted by [`named_profile`] for a domain.
pub fn profile_names(domain: SymbolDomain) -> &'static [&'static str] {
    match domain {
        SymbolDomain::Disc => &["boundary2", "boundary3", "bulge", "bump", "gauss_edge", "half_step"],
        SymbolDomain::Plane => &["gaussian", "wide_gaussian", "shell", "bump", "plateau"],
    }
}

/// Record of how a matrix was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub operator: String,
    pub symbol: String,
    pub windows: Option<(CoefficientVector, CoefficientVector)>,
    pub grid: String,
    pub truncation: usize,
    pub theta_nodes: usize,
    /// Smallest window mass captured by the first N basis vectors over the grid.
    pub captured_mass: Option<f64>,
}

/// Truncated operator matrix with entries[m][n] = ⟨A e_n, e_m⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub space: SpaceParams,
    pub entries: DMatrix<Complex64>,
    pub hermitian: bool,
    pub provenance: Provenance,
}

impl Serialize for OperatorMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            space: &'a SpaceParams,
            size: usize,
            hermitian: bool,
            entries: Vec<Vec<[f64; 2]>>,
            provenance: &'a Provenance,
        }
        let n = self.entries.nrows();
        let entries = (0..n)
            .map(|m| (0..self.entries.ncols()).map(|k| [self.entries[(m, k)].re, self.entries[(m, k)].im]).collect())
            .collect();
        Repr {
            space: &self.space,
            size: n,
            hermitian: self.hermitian,
            entries,
            provenance: &self.provenance,
        }
        .serialize(serializer)
    }
}

impl OperatorMatrix {
    /// Builds the matrix, marking and symmetrizing it when it is Hermitian to tolerance.
    pub fn new(space: SpaceParams, mut entries: DMatrix<Complex64>, provenance: Provenance) -> Self {
        let dev = hermitian_deviation(&entries);
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let hermitian = dev <= HERMITIAN_TOL * scale;
        if hermitian {
            let adj = entries.adjoint();
            entries = (entries + adj).map(|z| z * 0.5);
        }
        Self {
            space,
            entries,
            hermitian,
            provenance,
        }
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.size()).map(|i| self.entries[(i, i)]).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::NonFinite(e.to_string()))
    }
}

/// max |A − A*| over entries.
pub fn hermitian_deviation(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..a.ncols().min(n) {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

fn check_grid(space: &SpaceParams, grid: &QuadratureGrid) -> Result<()> {
    let ok = match (space.kind(), grid.measure) {
        (SpaceKind::Bergman, GridMeasure::BergmanWeighted { alpha }) => alpha == space.weight(),
        (SpaceKind::Fock, GridMeasure::Fock { beta }) => beta == space.weight(),
        _ => false,
    };
    if !ok {
        return Err(Error::SpaceMismatch(format!(
            "grid {} does not discretize the measure of {}",
            grid.describe(),
            space.label()
        )));
    }
    Ok(())
}

fn check_symbol(space: &SpaceParams, symbol: &SymbolSpec, grid: &QuadratureGrid) -> Result<()> {
    let want = if space.is_bergman() { SymbolDomain::Disc } else { SymbolDomain::Plane };
    if symbol.domain != want {
        return Err(Error::SpaceMismatch(format!(
            "symbol {} lives on the wrong domain for {}",
            symbol.label(),
            space.label()
        )));
    }
    if let Some(g) = grid.support_radius {
        match symbol.support_radius() {
            Some(s) if s <= g * (1.0 + 1e-12) => {}
            _ => {
                return Err(Error::param(
                    "grid",
                    format!("grid covers |z| < {g} but symbol {} extends beyond it", symbol.label()),
                ))
            }
        }
    }
    Ok(())
}

/// ln e_n(z) magnitudes: e_n(z) = c_n zⁿ.
fn basis_values(space: &SpaceParams, z: Complex64, n: usize) -> Vec<Complex64> {
    let r = z.norm();
    let t = z.arg();
    (0..n)
        .map(|k| {
            if r == 0.0 {
                return if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            }
            Complex64::from_polar((space.ln_basis_scale(k) + k as f64 * r.ln()).exp(), k as f64 * t)
        })
        .collect()
}

/// Σ_s ω_s a_s[m] conj(b_s[n]) as an N×N matrix.
fn outer_sum(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, omega: &[Complex64]) -> DMatrix<Complex64> {
    let mut aw = a.clone();
    for (s, w) in omega.iter().enumerate() {
        for m in 0..aw.ncols() {
            aw[(s, m)] *= w;
        }
    }
    aw.transpose() * b.map(|z| z.conj())
}

/// entries[m][n] = ∫ f e_n conj(e_m) over the grid's measure.
pub fn toeplitz_matrix(space: &SpaceParams, symbol: &SymbolSpec, n: usize, grid: &QuadratureGrid) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    check_grid(space, grid)?;
    check_symbol(space, symbol, grid)?;
    if symbol.is_theta_dependent() {
        return Err(Error::Unsupported("Toeplitz symbols must not depend on θ".into()));
    }
    let provenance = Provenance {
        operator: "toeplitz".into(),
        symbol: symbol.label(),
        windows: None,
        grid: grid.describe(),
        truncation: n,
        theta_nodes: 1,
        captured_mass: None,
    };
    if symbol.is_zero() {
        return Ok(OperatorMatrix::new(*space, DMatrix::zeros(n, n), provenance));
    }
    let rows: Vec<(Vec<Complex64>, Complex64)> = grid
        .nodes
        .par_iter()
        .zip(&grid.weights)
        .map(|(z, w)| (basis_values(space, *z, n), symbol.eval(0.0, *z) * *w))
        .collect();
    let mut e = DMatrix::zeros(rows.len(), n);
    let mut omega = Vec::with_capacity(rows.len());
    for (i, (vals, w)) in rows.into_iter().enumerate() {
        if !w.re.is_finite() || !w.im.is_finite() {
            return Err(Error::NonFinite(format!("symbol value at node {}", grid.nodes[i])));
        }
        for (k, v) in vals.into_iter().enumerate() {
            e[(i, k)] = v;
        }
        omega.push(w);
    }
    // entries[m][n] = Σ ω conj(e_m) e_n
    let entries = outer_sum(&e.map(|z| z.conj()), &e.map(|z| z.conj()), &omega);
    Ok(OperatorMatrix::new(*space, entries, provenance))
}

fn reduced_element(space: &SpaceParams, z: Complex64, j: usize, k: usize) -> Complex64 {
    match space.kind() {
        SpaceKind::Bergman => u_matrix_element_reduced(space.weight(), z, j, k),
        SpaceKind::Fock => w_matrix_element_reduced(space.weight(), z, j, k),
    }
}

/// ln of the factor turning squared reduced elements into squared full ones.
fn ln_mass_factor(space: &SpaceParams, z: Complex64) -> f64 {
    match space.kind() {
        SpaceKind::Bergman => (2.0 + space.weight()) * (-z.norm_sqr()).ln_1p(),
        SpaceKind::Fock => -space.weight() * z.norm_sqr(),
    }
}

/// Localization operator with symbol f and windows φ, ψ, truncated to N×N.
#[allow(clippy::too_many_arguments)]
pub fn localization_matrix(
    space: &SpaceParams,
    symbol: &SymbolSpec,
    phi: &CoefficientVector,
    psi: &CoefficientVector,
    n: usize,
    theta_nodes: usize,
    grid: &QuadratureGrid,
) -> Result<OperatorMatrix> {
    if n == 0 {
        return Err(Error::param("N", "must be at least 1"));
    }
    if theta_nodes == 0 {
        return Err(Error::param("theta_nodes", "must be at least 1"));
    }
    if phi.space() != space || psi.space() != space {
        return Err(Error::SpaceMismatch(format!("windows must live in {}", space.label())));
    }
    check_grid(space, grid)?;
    check_symbol(space, symbol, grid)?;
    let provenance = |captured| Provenance {
        operator: "localization".into(),
        symbol: symbol.label(),
        windows: Some((phi.clone(), psi.clone())),
        grid: grid.describe(),
        truncation: n,
        theta_nodes,
        captured_mass: captured,
    };
    if symbol.is_zero() {
        return Ok(OperatorMatrix::new(*space, DMatrix::zeros(n, n), provenance(None)));
    }
    let b_phi = phi.orthonormal_coeffs();
    let b_psi = psi.orthonormal_coeffs();
    let d = b_phi.len().max(b_psi.len());
    let coef = |b: &[Complex64], j: usize| b.get(j).copied().unwrap_or(Complex64::new(0.0, 0.0));
    let psi_norm_sq = psi.norm_sq();
    let theta_dep = symbol.is_theta_dependent();
    let thetas: Vec<f64> = (0..theta_nodes)
        .map(|q| 2.0 * std::f64::consts::PI * q as f64 / theta_nodes as f64)
        .collect();

    struct NodeSamples {
        a: Vec<Vec<Complex64>>,
        b: Vec<Vec<Complex64>>,
        omega: Vec<Complex64>,
        mass: f64,
    }

    let per_node: Vec<Result<NodeSamples>> = grid
        .nodes
        .par_iter()
        .zip(&grid.weights)
        .map(|(z, w)| {
            let table: Vec<Vec<Complex64>> = (0..d)
                .map(|j| (0..n).map(|k| reduced_element(space, *z, j, k)).collect())
                .collect();
            let combine = |b: &[Complex64], theta: f64| -> Vec<Complex64> {
                (0..n)
                    .map(|k| {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (j, row) in table.iter().enumerate() {
                            let c = coef(b, j);
                            if c != Complex64::new(0.0, 0.0) {
                                s += c * Complex64::from_polar(1.0, j as f64 * theta) * row[k];
                            }
                        }
                        s
                    })
                    .collect()
            };
            let ln_mass = ln_mass_factor(space, *z);
            let mut out = NodeSamples {
                a: Vec::new(),
                b: Vec::new(),
                omega: Vec::new(),
                mass: f64::INFINITY,
            };
            let mass_of = |v: &[Complex64]| {
                if psi_norm_sq == 0.0 {
                    return 1.0;
                }
                v.iter().map(|c| c.norm_sqr()).sum::<f64>() * ln_mass.exp() / psi_norm_sq
            };
            if theta_dep {
                for &t in &thetas {
                    let fv = symbol.eval(t, *z);
                    let a = combine(&b_psi, t);
                    out.mass = out.mass.min(mass_of(&a));
                    out.a.push(a);
                    out.b.push(combine(&b_phi, t));
                    out.omega.push(fv * (*w / theta_nodes as f64));
                }
            } else {
                let fv = symbol.eval(0.0, *z) * *w;
                out.mass = mass_of(&combine(&b_psi, 0.0));
                for (j, row) in table.iter().enumerate() {
                    let c = coef(&b_psi, j) * coef(&b_phi, j).conj();
                    if c != Complex64::new(0.0, 0.0) {
                        out.a.push(row.clone());
                        out.b.push(row.clone());
                        out.omega.push(fv * c);
                    }
                }
            }
            if out.omega.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite(format!("symbol value at node {z}")));
            }
            Ok(out)
        })
        .collect();
    let mut a_rows = Vec::new();
    let mut b_rows = Vec::new();
    let mut omega = Vec::new();
    let mut captured = f64::INFINITY;
    for node in per_node {
        let node = node?;
        captured = captured.min(node.mass);
        a_rows.extend(node.a);
        b_rows.extend(node.b);
        omega.extend(node.omega);
    }
    let to_matrix = |rows: &[Vec<Complex64>]| DMatrix::from_fn(rows.len(), n, |s, k| rows[s][k]);
    let entries = outer_sum(&to_matrix(&a_rows), &to_matrix(&b_rows), &omega);
    let captured = captured.is_finite().then_some(captured);
    Ok(OperatorMatrix::new(*space, entries, provenance(captured)))
}

/// ln[(α+1)Γ(n+α+2)Γ(α+σ+1)/(Γ(α+2)Γ(n+α+σ+2))], the Bergman diagonal prefactor.
fn ln_bergman_diag_prefactor(alpha: f64, sigma: f64, n: usize) -> f64 {
    (alpha + 1.0).ln() + ln_gamma_ratio(alpha + 2.0, n as f64) - ln_gamma_ratio(alpha + sigma + 1.0, n as f64 + 1.0)
}

/// Diagonal of the Toeplitz operator of a radial symbol, n = 0..N−1.
///
/// The weight exponent σ is read from the symbol's scaling (zero if unscaled).
pub fn radial_toeplitz_diagonal(space: &SpaceParams, symbol: &SymbolSpec, n: usize) -> Result<Vec<f64>> {
    if !symbol.is_radial() {
        return Err(Error::Unsupported(format!(
            "radial fast path needs a radial symbol, got {}",
            symbol.label()
        )));
    }
    let (r, sigma) = symbol.scaling.map(|s| (s.r, s.sigma)).unwrap_or((1.0, 0.0));
    match space.kind() {
        SpaceKind::Bergman => {
            if symbol.domain != SymbolDomain::Disc {
                return Err(Error::SpaceMismatch("Bergman diagonal needs a disc symbol".into()));
            }
            let alpha = space.weight();
            let b = alpha + sigma + 1.0;
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let pref = ln_bergman_diag_prefactor(alpha, sigma, k).exp();
                    let a = k as f64 + 1.0;
                    match &symbol.form {
                        SymbolForm::Constant(c) => Ok(c * pref),
                        SymbolForm::DiscIndicator(rad) => {
                            let x = (rad / r).powi(2);
                            if x >= 1.0 {
                                Ok(pref)
                            } else {
                                Ok(pref * inc_beta(x, a, b)?)
                            }
                        }
                        SymbolForm::Radial(p) => {
                            let f = |x: f64| (p.f)(r * x.sqrt());
                            match symbol.support_radius() {
                                Some(rho) => {
                                    let xmax = rho * rho;
                                    let rule = GaussRule::composite_legendre(200, 16, 0.0, xmax)?;
                                    let ln_beta = lgamma(a) + lgamma(b) - lgamma(a + b);
                                    let mut acc = KahanSum::new();
                                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                                        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta;
                                        acc.add(w * ln_pdf.exp() * f(*x));
                                    }
                                    Ok(pref * acc.value())
                                }
                                None => {
                                    let rule = GaussRule::jacobi01(64, b - 1.0, a - 1.0)?;
                                    let mut acc = KahanSum::new();
                                    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                                        acc.add(w * f(*x));
                                    }
                                    Ok(pref * acc.value())
                                }
                            }
                        }
                        SymbolForm::General(_) => unreachable!(),
                    }
                })
                .collect()
        }
        SpaceKind::Fock => {
            if symbol.domain != SymbolDomain::Plane || symbol.scaling.is_some() {
                return Err(Error::SpaceMismatch("Fock diagonal needs an unscaled plane symbol".into()));
            }
            let beta = space.weight();
            (0..n)
                .into_par_iter()
                .map(|k| {
                    let a = k as f64 + 1.0;
                    match &symbol.form {
                        SymbolForm::Constant(c) => Ok(*c),
                        SymbolForm::DiscIndicator(rad) => gamma_p(a, beta * rad * rad),
                        SymbolForm::Radial(p) => {
                            let f = |t: f64| (p.f)((t / beta).sqrt());
                            match p.support {
                                Some(rho) => {
                                    let tmax = beta * rho * rho;
                                    let rule = GaussRule::composite_legendre(200, 16, 0.0, tmax)?;
                                    let mut acc = KahanSum::new();
                                    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                                        let ln_pdf = (a - 1.0) * t.ln() - t - lgamma(a);
                                        acc.add(w * ln_pdf.exp() * f(*t));
                                    }
                                    Ok(acc.value())
                                }
                                None => {
                                    let rule = GaussRule::laguerre(64, a - 1.0)?;
                                    let mut acc = KahanSum::new();
                                    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                                        acc.add(w * f(*t));
                                    }
                                    Ok(acc.value())
                                }
                            }
                        }
                        SymbolForm::General(_) => unreachable!(),
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Eigenvalues,
    SingularValues,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub delta: f64,
    pub count: usize,
}

/// Spectrum (descending) with norm, trace, threshold counts and tr(A h(A)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    pub kind: SpectrumKind,
    pub eigenvalues: Vec<f64>,
    pub op_norm: f64,
    pub trace: f64,
    pub count_above: Vec<ThresholdCount>,
    pub trace_h: Option<f64>,
}

impl SpectralSummary {
    /// Summary of a diagonal operator given its (real) diagonal.
    pub fn from_diagonal(values: &[f64], h: Option<&dyn Fn(f64) -> f64>, thresholds: &[f64]) -> Self {
        Self::build(SpectrumKind::Eigenvalues, values.to_vec(), None, h, thresholds)
    }

    fn build(kind: SpectrumKind, mut values: Vec<f64>, trace: Option<f64>, h: Option<&dyn Fn(f64) -> f64>, thresholds: &[f64]) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        let op_norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut tr = KahanSum::new();
        for v in &values {
            tr.add(*v);
        }
        let trace = trace.unwrap_or(tr.value());
        let count_above = thresholds
            .iter()
            .map(|&delta| ThresholdCount {
                delta,
                count: values.iter().filter(|v| **v > delta).count(),
            })
            .collect();
        let trace_h = h.map(|h| {
            let mut s = KahanSum::new();
            for v in &values {
                s.add(v * h(*v));
            }
            s.value()
        });
        Self {
            kind,
            eigenvalues: values,
            op_norm,
            trace,
            count_above,
            trace_h,
        }
    }

    pub fn count(&self, delta: f64) -> Option<usize> {
        self.count_above.iter().find(|c| c.delta == delta).map(|c| c.count)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Writes `index,eigenvalue` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Unsupported(format!("csv output failed: {e}"));
        wtr.write_record(["index", "eigenvalue"]).map_err(io)?;
        for (i, v) in self.eigenvalues.iter().enumerate() {
            wtr.write_record([i.to_string(), format!("{v:.16e}")]).map_err(io)?;
        }
        wtr.flush().map_err(|e| Error::Unsupported(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Eigen-decomposition (Hermitian) or singular values, plus threshold counts and tr(A h(A)).
pub fn spectral_summary(a: &OperatorMatrix, h: Option<&dyn Fn(f64) -> f64>, thresholds: &[f64]) -> Result<SpectralSummary> {
    if a.entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(format!("matrix from {}", a.provenance.symbol)));
    }
    let n = a.size();
    let mut tr = KahanSum::new();
    for i in 0..n {
        tr.add(a.entries[(i, i)].re);
    }
    if a.hermitian {
        let eig = SymmetricEigen::try_new(a.entries.clone(), 1e-15, 100_000).ok_or_else(|| Error::Convergence {
            func: "spectral_summary",
            detail: format!("Hermitian eigensolver failed for {:?}", a.provenance),
        })?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        Ok(SpectralSummary::build(SpectrumKind::Eigenvalues, values, Some(tr.value()), h, thresholds))
    } else {
        let svd = a.entries.clone().try_svd(false, false, 1e-15, 100_000).ok_or_else(|| Error::Convergence {
            func: "spectral_summary",
            detail: format!("SVD failed for {:?}", a.provenance),
        })?;
        let values: Vec<f64> = svd.singular_values.iter().copied().collect();
        Ok(SpectralSummary::build(SpectrumKind::SingularValues, values, Some(tr.value()), h, thresholds))
    }
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::quadrature::{disc_grid, disc_grid_restricted, plane_grid, plane_grid_restricted};
    use crate::spaces::inner_product;
    use crate::special::{reg_inc_beta, reg_inc_gamma_p};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_dev(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn toeplitz_of_one_is_identity() {
        let s = SpaceParams::bergman(1.5).unwrap();
        let g = disc_grid(1.5, 20, 40).unwrap();
        let t = toeplitz_matrix(&s, &SymbolSpec::constant(SymbolDomain::Disc, 1.0), 16, &g).unwrap();
        assert!(max_dev(&t.entries, &DMatrix::identity(16, 16)) < 1e-12);
        assert!(t.hermitian);
        let f = SpaceParams::fock(2.0).unwrap();
        let g = plane_grid(2.0, 30, 40).unwrap();
        let t = toeplitz_matrix(&f, &SymbolSpec::constant(SymbolDomain::Plane, 1.0), 16, &g).unwrap();
        assert!(max_dev(&t.entries, &DMatrix::identity(16, 16)) < 1e-12);
    }

    #[test]
    fn fock_indicator_diagonal() {
        let s = SpaceParams::fock(1.0).unwrap();
        let g = plane_grid_restricted(1.0, 1.0, 40, 24, 1).unwrap();
        let sym = SymbolSpec::disc_indicator(SymbolDomain::Plane, 1.0).unwrap();
        let t = toeplitz_matrix(&s, &sym, 8, &g).unwrap();
        for m in 0..8 {
            for n in 0..8 {
                let want = if m == n { reg_inc_gamma_p(n as f64 + 1.0, 1.0).unwrap() } else { 0.0 };
                assert!((t.entries[(m, n)] - want).norm() < 1e-12);
            }
        }
        assert!((t.entries[(0, 0)].re - (1.0 - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn bergman_indicator_diagonal() {
        let s = SpaceParams::bergman(0.0).unwrap();
        let g = disc_grid_restricted(0.0, 0.5, 30, 24, 1).unwrap();
        let sym = SymbolSpec::disc_indicator(SymbolDomain::Disc, 0.5).unwrap();
        let t = toeplitz_matrix(&s, &sym, 10, &g).unwrap();
        let fast = radial_toeplitz_diagonal(&s, &sym, 10).unwrap();
        for n in 0..10 {
            let want = reg_inc_beta(0.25, n as f64 + 1.0, 1.0).unwrap();
            assert!((t.entries[(n, n)].re - want).abs() < 1e-10);
            assert!((fast[n] - want).abs() < 1e-14);
        }
        assert!((fast[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn grid_must_match_space() {
        let s = SpaceParams::bergman(1.0).unwrap();
        let g = disc_grid(2.0, 4, 4).unwrap();
        let sym = SymbolSpec::constant(SymbolDomain::Disc, 1.0);
        assert!(matches!(toeplitz_matrix(&s, &sym, 3, &g), Err(Error::SpaceMismatch(_))));
        let g = disc_grid_restricted(1.0, 0.3, 4, 4, 1).unwrap();
        let wide = SymbolSpec::disc_indicator(SymbolDomain::Disc, 0.5).unwrap();
        assert!(toeplitz_matrix(&s, &wide, 3, &g).is_err());
    }

    #[test]
    fn scaled_indicator_sup_at_zero() {
        for &(alpha, sigma, r) in &[(1.0, 0.0, 2.0), (16.0, 2.0, 4.0), (100.0, 2.0, 10.0)] {
            let s = SpaceParams::bergman(alpha).unwrap();
            let sym = SymbolSpec::disc_indicator(SymbolDomain::Plane, 1.0).unwrap().scaled(r, sigma).unwrap();
            let diag = radial_toeplitz_diagonal(&s, &sym, 200).unwrap();
            let want = (alpha + 1.0) / (alpha + sigma + 1.0) * (1.0 - (1.0 - 1.0 / (r * r)).powf(alpha + sigma + 1.0));
            assert!((diag[0] - want).abs() < 1e-13);
            assert!(diag.iter().all(|d| *d <= diag[0] + 1e-15));
        }
        let s = SpaceParams::bergman(3.0).unwrap();
        let one = radial_toeplitz_diagonal(&s, &SymbolSpec::constant(SymbolDomain::Disc, 1.0), 30).unwrap();
        assert!(one.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn fast_path_matches_dense_path() {
        let alpha = 2.0;
        let s = SpaceParams::bergman(alpha).unwrap();
        let g = disc_grid(alpha, 60, 48).unwrap();
        for name in ["boundary2", "bulge", "gauss_edge"] {
            let sym = SymbolSpec::radial(SymbolDomain::Disc, named_profile(name, SymbolDomain::Disc).unwrap()).unwrap();
            let dense = toeplitz_matrix(&s, &sym, 20, &g).unwrap();
            let fast = radial_toeplitz_diagonal(&s, &sym, 20).unwrap();
            for n in 0..20 {
                assert!((dense.entries[(n, n)].re - fast[n]).abs() < 1e-9, "{name} n={n}");
            }
        }
        let sym = SymbolSpec::radial(SymbolDomain::Disc, named_profile("bump", SymbolDomain::Disc).unwrap()).unwrap();
        let g = disc_grid_restricted(alpha, 0.6, 40, 48, 4).unwrap();
        let dense = toeplitz_matrix(&s, &sym, 20, &g).unwrap();
        let fast = radial_toeplitz_diagonal(&s, &sym, 20).unwrap();
        for n in 0..20 {
            assert!((dense.entries[(n, n)].re - fast[n]).abs() < 1e-9, "bump n={n}");
        }
        let f = SpaceParams::fock(1.5).unwrap();
        let g = plane_grid(1.5, 80, 48).unwrap();
        let sym = SymbolSpec::radial(SymbolDomain::Plane, named_profile("gaussian", SymbolDomain::Plane).unwrap()).unwrap();
        let dense = toeplitz_matrix(&f, &sym, 20, &g).unwrap();
        let fast = radial_toeplitz_diagonal(&f, &sym, 20).unwrap();
        for n in 0..20 {
            // γ_n = (β/(β+1))^{n+1} for e^{−|z|²}
            let want = (1.5f64 / 2.5).powi(n as i32 + 1);
            assert!((fast[n] - want).abs() < 1e-12);
            assert!((dense.entries[(n, n)].re - fast[n]).abs() < 1e-9);
        }
    }

    #[test]
    fn localization_with_unit_windows_is_toeplitz() {
        let alpha = 1.0;
        let s = SpaceParams::bergman(alpha).unwrap();
        let one = CoefficientVector::constant(s, c(1.0, 0.0));
        let sym = SymbolSpec::radial(SymbolDomain::Disc, named_profile("bulge", SymbolDomain::Disc).unwrap()).unwrap();
        let g = disc_grid(alpha, 40, 40).unwrap();
        let loc = localization_matrix(&s, &sym, &one, &one, 12, 1, &g).unwrap();
        let toe = toeplitz_matrix(&s, &sym, 12, &g).unwrap();
        assert!(max_dev(&loc.entries, &toe.entries) < 1e-9);
    }

    #[test]
    fn localization_of_constant_is_scaled_identity() {
        let alpha = 2.0;
        let s = SpaceParams::bergman(alpha).unwrap();
        let phi = CoefficientVector::new(s, vec![c(0.5, 0.1), c(0.2, -0.3)]).unwrap();
        let psi = CoefficientVector::new(s, vec![c(0.1, 0.0), c(0.0, 0.4), c(0.3, 0.3)]).unwrap();
        let g = disc_grid(alpha, 30, 32).unwrap();
        let loc = localization_matrix(&s, &SymbolSpec::constant(SymbolDomain::Disc, 1.0), &phi, &psi, 8, 1, &g).unwrap();
        let ip = inner_product(&psi, &phi).unwrap();
        assert!(max_dev(&loc.entries, &DMatrix::identity(8, 8).map(|z: Complex64| z * ip)) < 1e-8);

        let f = SpaceParams::fock(1.0).unwrap();
        let phi = CoefficientVector::new(f, vec![c(0.5, 0.1), c(0.2, -0.3)]).unwrap();
        let psi = CoefficientVector::new(f, vec![c(0.1, 0.0), c(0.0, 0.4), c(0.3, 0.3)]).unwrap();
        let g = plane_grid(1.0, 60, 32).unwrap();
        let loc = localization_matrix(&f, &SymbolSpec::constant(SymbolDomain::Plane, 1.0), &phi, &psi, 8, 1, &g).unwrap();
        let ip = inner_product(&psi, &phi).unwrap();
        assert!(max_dev(&loc.entries, &DMatrix::identity(8, 8).map(|z: Complex64| z * ip)) < 1e-8);
    }

    #[test]
    fn theta_quadrature_agrees_with_analytic_average() {
        let alpha = 0.5;
        let s = SpaceParams::bergman(alpha).unwrap();
        let psi = CoefficientVector::new(s, vec![c(0.3, 0.0), c(0.0, 0.5), c(0.2, 0.1)]).unwrap().normalized().unwrap();
        let sym = SymbolSpec::radial(SymbolDomain::Disc, named_profile("boundary2", SymbolDomain::Disc).unwrap()).unwrap();
        let g = disc_grid(alpha, 30, 32).unwrap();
        let analytic = localization_matrix(&s, &sym, &psi, &psi, 6, 1, &g).unwrap();
        let fr = named_profile("boundary2", SymbolDomain::Disc).unwrap().f;
        let theta_sym = SymbolSpec::general(
            SymbolDomain::Disc,
            GeneralSymbol::new("boundary2_theta", 1.0, true, true, None, move |_t, z| c(fr(z.norm()), 0.0)),
        )
        .unwrap();
        let quad = localization_matrix(&s, &theta_sym, &psi, &psi, 6, 5, &g).unwrap();
        assert!(max_dev(&analytic.entries, &quad.entries) < 1e-12);
    }

    #[test]
    fn zero_symbol_gives_zero_matrix() {
        let s = SpaceParams::fock(1.0).unwrap();
        let g = plane_grid(1.0, 4, 4).unwrap();
        let one = CoefficientVector::constant(s, c(1.0, 0.0));
        let z = localization_matrix(&s, &SymbolSpec::constant(SymbolDomain::Plane, 0.0), &one, &one, 4, 1, &g).unwrap();
        assert!(z.hermitian);
        assert!(z.entries.iter().all(|v| *v == c(0.0, 0.0)));
    }

    #[test]
    fn spectral_summary_identity() {
        let s = SpaceParams::bergman(0.0).unwrap();
        let prov = Provenance {
            operator: "test".into(),
            symbol: "identity".into(),
            windows: None,
            grid: String::new(),
            truncation: 5,
            theta_nodes: 1,
            captured_mass: None,
        };
        let m = OperatorMatrix::new(s, DMatrix::identity(5, 5), prov);
        let h = |x: f64| x;
        let sum = spectral_summary(&m, Some(&h), &[0.5]).unwrap();
        assert!((sum.trace - 5.0).abs() < 1e-14);
        assert!((sum.op_norm - 1.0).abs() < 1e-14);
        assert_eq!(sum.count(0.5), Some(5));
        assert!((sum.trace_h.unwrap() - 5.0).abs() < 1e-14);
        let mut out = Vec::new();
        sum.write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with("index,eigenvalue\n0,1.0000000000000000e0\n"));
    }

    #[test]
    fn fock_indicator_norm() {
        let s = SpaceParams::fock(1.0).unwrap();
        let sym = SymbolSpec::disc_indicator(SymbolDomain::Plane, 1.0).unwrap();
        let diag = radial_toeplitz_diagonal(&s, &sym, 60).unwrap();
        let sum = SpectralSummary::from_diagonal(&diag, None, &[]);
        assert!((sum.op_norm - (1.0 - (-1f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn symbol_measures() {
        let d = SymbolSpec::disc_indicator(SymbolDomain::Disc, 0.5).unwrap();
        assert!((d.l1_norm().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.level_set_measure(0.3).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let b2 = SymbolSpec::radial(SymbolDomain::Disc, named_profile("boundary2", SymbolDomain::Disc).unwrap()).unwrap();
        // ∫ (1−s)² ds/(1−s)² = 1
        let l1 = b2.l1_norm().unwrap();
        assert!((l1 - 1.0).abs() < 1e-12, "{l1}");
        // (1−s)² > δ ⇔ s < 1 − √δ; λ = 1/√δ − 1
        assert!((b2.level_set_measure(0.25).unwrap() - 1.0).abs() < 1e-10);
        // ∫ f² dλ = ∫ (1−s)² ds = 1/3
        assert!((b2.radial_integral(|v| v * v).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let g = SymbolSpec::radial(SymbolDomain::Plane, named_profile("gaussian", SymbolDomain::Plane).unwrap()).unwrap();
        assert!((g.l1_norm().unwrap() - std::f64::consts::PI).abs() < 1e-10);
        // e^{−s} > 1/2 ⇔ s < ln 2
        assert!((g.level_set_measure(0.5).unwrap() - std::f64::consts::PI * 2f64.ln()).abs() < 1e-10);
        let p = SymbolSpec::disc_indicator(SymbolDomain::Plane, 1.0).unwrap();
        assert!((p.l1_norm().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    }
}
