//! Windowed Berezin transform on T×D and L^p distances to the symbol.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mobius_phi, GroupElement};
use crate::operators::{SymbolDomain, SymbolSpec};
use crate::quadrature::{mobius_grid, GridMeasure, QuadratureGrid};
use crate::spaces::{CoefficientVector, SpaceParams};
use crate::special::KahanSum;
use crate::unitaries::u_matrix_element_reduced;

/// Allowed deviation of the window norm from 1.
pub const WINDOW_NORM_TOL: f64 = 1e-10;

/// Exponent p of an L^p(T×D, dH) distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpExponent {
    One,
    Two,
    Infinity,
}

impl LpExponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Self::One)
        } else if p == 2.0 {
            Ok(Self::Two)
        } else if p == f64::INFINITY {
            Ok(Self::Infinity)
        } else {
            Err(Error::param("p", format!("{p} must be 1, 2 or inf")))
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::One => "1",
            Self::Two => "2",
            Self::Infinity => "inf",
        }
    }
}

/// Symbol, unit window and evaluation points (θ, z) for the transform.
#[derive(Debug, Clone)]
pub struct BerezinRequest {
    pub alpha: f64,
    pub window: CoefficientVector,
    pub symbol: SymbolSpec,
    pub eval_points: Vec<(f64, Complex64)>,
}

impl BerezinRequest {
    pub fn new(alpha: f64, window: CoefficientVector, symbol: SymbolSpec, eval_points: Vec<(f64, Complex64)>) -> Result<Self> {
        let space = SpaceParams::bergman(alpha)?;
        if *window.space() != space {
            return Err(Error::SpaceMismatch(format!("window must live in {}", space.label())));
        }
        if (window.norm() - 1.0).abs() > WINDOW_NORM_TOL {
            return Err(Error::param("window", format!("norm {} is not 1", window.norm())));
        }
        if symbol.domain != SymbolDomain::Disc {
            return Err(Error::SpaceMismatch("Berezin symbols live on the disc".into()));
        }
        if !symbol.is_real() {
            return Err(Error::Unsupported("Berezin transform of a complex symbol".into()));
        }
        if let Some((_, z)) = eval_points.iter().find(|(_, z)| z.norm() >= 1.0) {
            return Err(Error::param("eval_points", format!("{z} lies outside the disc")));
        }
        Ok(Self {
            alpha,
            window,
            symbol,
            eval_points,
        })
    }
}

/// Precomputed overlap weights |⟨U_g ψ, ψ⟩|² on a grid of group elements g.
///
/// B f(θ, z) = ∫ f(g⁻¹·(θ, z)) |⟨U_g ψ, ψ⟩|² (α+1) dH(g). Writing g = (s, v) with
/// v = e^{−is}w turns the point of g⁻¹·(θ, z) into φ_{−z}(−e^{−iθ}w), so symbols
/// without θ dependence only need the s-averaged kernel on the w grid.
#[derive(Debug, Clone)]
pub struct BerezinKernel {
    alpha: f64,
    nodes: Vec<Complex64>,
    /// grid weight × s-average of the squared overlap, per w node.
    averaged: Vec<f64>,
    /// (s, v, weight) triples for θ-dependent symbols.
    samples: Vec<(f64, Complex64, f64)>,
    theta_nodes: usize,
}

fn reduced_overlap(alpha: f64, b: &[Complex64], s: f64, v: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, bj) in b.iter().enumerate() {
        if *bj == Complex64::new(0.0, 0.0) {
            continue;
        }
        let rot = Complex64::from_polar(1.0, j as f64 * s);
        for (k, bk) in b.iter().enumerate() {
            if *bk == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += bj * bk.conj() * rot * u_matrix_element_reduced(alpha, v, j, k);
        }
    }
    acc
}

impl BerezinKernel {
    /// `grid` must discretize dA_α; `theta_nodes` is raised to at least 2d+1.
    pub fn new(alpha: f64, window: &CoefficientVector, grid: &QuadratureGrid, theta_nodes: usize) -> Result<Self> {
        match grid.measure {
            GridMeasure::BergmanWeighted { alpha: a } if a == alpha => {}
            _ => {
                return Err(Error::SpaceMismatch(format!(
                    "Berezin grid {} must discretize dA_{alpha}",
                    grid.describe()
                )))
            }
        }
        let b = window.orthonormal_coeffs();
        let q = theta_nodes.max(2 * window.degree() + 1);
        let ss: Vec<f64> = (0..q).map(|i| 2.0 * PI * i as f64 / q as f64).collect();
        let per_node: Vec<(f64, Vec<(f64, Complex64, f64)>)> = grid
            .nodes
            .par_iter()
            .zip(&grid.weights)
            .map(|(w, wt)| {
                let mut avg = KahanSum::new();
                let mut samples = Vec::with_capacity(q);
                for &s in &ss {
                    let v = Complex64::from_polar(1.0, -s) * w;
                    let o = reduced_overlap(alpha, &b, s, v).norm_sqr();
                    avg.add(o);
                    samples.push((s, v, wt * o / q as f64));
                }
                (wt * avg.value() / q as f64, samples)
            })
            .collect();
        let mut averaged = Vec::with_capacity(per_node.len());
        let mut samples = Vec::with_capacity(per_node.len() * q);
        for (a, s) in per_node {
            averaged.push(a);
            samples.extend(s);
        }
        Ok(Self {
            alpha,
            nodes: grid.nodes.clone(),
            averaged,
            samples,
            theta_nodes: q,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_nodes(&self) -> usize {
        self.theta_nodes
    }

    /// Total kernel mass; equals ‖ψ‖⁴ = 1 up to quadrature error.
    pub fn mass(&self) -> f64 {
        let mut s = KahanSum::new();
        for a in &self.averaged {
            s.add(*a);
        }
        s.value()
    }

    /// B f(θ, z).
    pub fn apply(&self, symbol: &SymbolSpec, theta: f64, z: Complex64) -> f64 {
        let mut acc = KahanSum::new();
        if symbol.is_theta_dependent() {
            let target = GroupElement::new(theta, z).unwrap_or_else(|_| GroupElement::identity());
            for (s, v, wt) in &self.samples {
                let g = match GroupElement::new(*s, *v) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
                let h = g.inverse().compose(&target);
                acc.add(wt * symbol.eval(h.angle(), h.point()).re);
            }
        } else {
            let rot = Complex64::from_polar(1.0, -theta);
            for (w, wt) in self.nodes.iter().zip(&self.averaged) {
                acc.add(wt * symbol.eval(0.0, mobius_phi(-z, -rot * w)).re);
            }
        }
        acc.value()
    }
}

/// B^ψ_α f at each evaluation point of the request.
pub fn windowed_berezin_eval(req: &BerezinRequest, grid: &QuadratureGrid, theta_nodes: usize) -> Result<Vec<f64>> {
    let kernel = BerezinKernel::new(req.alpha, &req.window, grid, theta_nodes)?;
    let out: Vec<f64> = req
        .eval_points
        .par_iter()
        .map(|(t, z)| kernel.apply(&req.symbol, *t, *z))
        .collect();
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("Berezin value {v}")));
    }
    Ok(out)
}

/// Whether B f depends on |z| only: radial θ-free symbol and a monomial window.
fn transform_is_radial(req: &BerezinRequest) -> bool {
    req.symbol.is_radial() && req.window.coeffs().iter().filter(|c| c.norm() > 0.0).count() <= 1
}

/// Values of |B f − f| over an outer dλ grid and angle nodes, with their dH weights.
fn differences(kernel: &BerezinKernel, symbol: &SymbolSpec, outer: &QuadratureGrid, radial: bool) -> Vec<(f64, f64)> {
    let thetas: Vec<f64> = if symbol.is_theta_dependent() {
        (0..kernel.theta_nodes).map(|q| 2.0 * PI * q as f64 / kernel.theta_nodes as f64).collect()
    } else {
        vec![0.0]
    };
    let nt = thetas.len() as f64;
    // Radial transforms are evaluated once per radius and reused across angles.
    let mut cache: Vec<Option<f64>> = vec![None; outer.len()];
    if radial {
        let radii: Vec<usize> = (0..outer.len())
            .filter(|&i| i == 0 || outer.nodes[i].norm() != outer.nodes[i - 1].norm())
            .collect();
        let vals: Vec<f64> = radii
            .par_iter()
            .map(|&i| kernel.apply(symbol, 0.0, Complex64::new(outer.nodes[i].norm(), 0.0)))
            .collect();
        let mut current = 0.0;
        let mut next = radii.iter().zip(vals).peekable();
        for (i, slot) in cache.iter_mut().enumerate() {
            if let Some((&ri, _)) = next.peek() {
                if ri == i {
                    current = next.next().map(|(_, v)| v).unwrap_or(current);
                }
            }
            *slot = Some(current);
        }
    }
    let idx: Vec<(usize, f64)> = (0..outer.len()).flat_map(|i| thetas.iter().map(move |t| (i, *t))).collect();
    idx.par_iter()
        .map(|&(i, t)| {
            let z = outer.nodes[i];
            let b = cache[i].unwrap_or_else(|| kernel.apply(symbol, t, z));
            ((b - symbol.eval(t, z).re).abs(), outer.weights[i] / nt)
        })
        .collect()
}

/// ‖B^ψ_α f − f‖ in L^p(T×D, dH).
///
/// `outer` must discretize dλ. For p = ∞ the value is a grid maximum; the outer
/// orders are doubled (up to three times) until the maximum changes by < 5%.
pub fn berezin_lp_distance(req: &BerezinRequest, p: LpExponent, inner: &QuadratureGrid, outer: &QuadratureGrid, theta_nodes: usize) -> Result<f64> {
    if outer.measure != GridMeasure::MobiusInvariant {
        return Err(Error::param("outer", format!("grid {} must discretize dlambda", outer.describe())));
    }
    let kernel = BerezinKernel::new(req.alpha, &req.window, inner, theta_nodes)?;
    let radial = transform_is_radial(req);
    let norm = |diffs: &[(f64, f64)]| -> Result<f64> {
        if let Some((d, _)) = diffs.iter().find(|(d, _)| !d.is_finite()) {
            return Err(Error::NonFinite(format!("Berezin difference {d}")));
        }
        let mut acc = KahanSum::new();
        Ok(match p {
            LpExponent::One => {
                for (d, w) in diffs {
                    acc.add(d * w);
                }
                acc.value()
            }
            LpExponent::Two => {
                for (d, w) in diffs {
                    acc.add(d * d * w);
                }
                acc.value().sqrt()
            }
            LpExponent::Infinity => diffs.iter().map(|(d, _)| *d).fold(0.0, f64::max),
        })
    };
    let mut value = norm(&differences(&kernel, &req.symbol, outer, radial))?;
    if p != LpExponent::Infinity {
        return Ok(value);
    }
    let (mut nr, mut na) = outer.orders;
    for _ in 0..3 {
        nr *= 2;
        na *= 2;
        let refined = norm(&differences(&kernel, &req.symbol, &mobius_grid(0.0, nr, na)?, radial))?;
        let change = (refined - value).abs() / refined.abs().max(f64::MIN_POSITIVE);
        value = refined;
        if change < 0.05 {
            return Ok(value);
        }
    }
    Err(Error::Convergence {
        func: "berezin_lp_distance",
        detail: format!("sup distance still moving by more than 5% at orders ({nr}, {na})"),
    })
}

/// Writes `alpha,theta,z_re,z_im,berezin,symbol` rows.
pub fn write_berezin_csv<W: Write>(req: &BerezinRequest, values: &[f64], w: W) -> Result<()> {
    let io = |e: csv::Error| Error::Unsupported(format!("csv output failed: {e}"));
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["alpha", "theta", "z_re", "z_im", "berezin", "symbol"]).map_err(io)?;
    for ((t, z), b) in req.eval_points.iter().zip(values) {
        let f = req.symbol.eval(*t, *z).re;
        wtr.write_record([req.alpha, *t, z.re, z.im, *b, f].map(|x| format!("{x:.16e}"))).map_err(io)?;
    }
    wtr.flush().map_err(|e| Error::Unsupported(format!("csv output failed: {e}")))?;
    Ok(())
}
