//! Gaussian product grids for dA_α on the disc, dμ_β on the plane, and the
//! Möbius-invariant measure dλ.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ComplexKahanSum;

/// One-dimensional Gaussian rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Golub–Welsch from monic recurrence coefficients; weights sum to one.
    fn from_recurrence(diag: &[f64], off: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut t = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            t[(i, i)] = diag[i];
            if i + 1 < n {
                t[(i, i + 1)] = off[i];
                t[(i + 1, i)] = off[i];
            }
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::Convergence {
                func: "gauss rule",
                detail: "non-finite recurrence coefficients".into(),
            });
        }
        let eig = SymmetricEigen::try_new(t, f64::EPSILON, 10_000).ok_or(Error::Convergence {
            func: "gauss rule",
            detail: format!("tridiagonal eigenproblem of size {n}"),
        })?;
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Self {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    /// Nodes in [0, 1] for the weight (1−s)^a s^b, normalized to unit mass.
    pub fn jacobi01(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n_rad", "must be at least 1"));
        }
        if !(a > -1.0) || !(b > -1.0) {
            return Err(Error::param("jacobi exponent", format!("({a}, {b}) must exceed -1")));
        }
        // Recurrence on [−1, 1] for (1−x)^a (1+x)^b, then s = (1 + x)/2.
        let ab = a + b;
        let diag: Vec<f64> = (0..n)
            .map(|k| {
                let k = k as f64;
                let d = 2.0 * k + ab;
                if k == 0.0 {
                    (b - a) / (ab + 2.0)
                } else {
                    (b * b - a * a) / (d * (d + 2.0))
                }
            })
            .collect();
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                let d = 2.0 * k + ab;
                (4.0 * k * (k + a) * (k + b) * (k + ab) / (d * d * (d + 1.0) * (d - 1.0))).sqrt()
            })
            .collect();
        let rule = Self::from_recurrence(&diag, &off)?;
        Ok(Self {
            nodes: rule.nodes.iter().map(|x| (1.0 + x) / 2.0).collect(),
            weights: rule.weights,
        })
    }

    /// Nodes in [0, ∞) for the weight t^a e^{−t}, normalized to unit mass.
    pub fn laguerre(n: usize, a: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n_rad", "must be at least 1"));
        }
        if !(a > -1.0) {
            return Err(Error::param("laguerre exponent", format!("{a} must exceed -1")));
        }
        let diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + 1.0 + a).collect();
        let off: Vec<f64> = (1..n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect();
        Self::from_recurrence(&diag, &off)
    }

    /// Gauss–Legendre on [lo, hi]; weights sum to hi − lo.
    pub fn legendre(n: usize, lo: f64, hi: f64) -> Result<Self> {
        let base = Self::jacobi01(n, 0.0, 0.0)?;
        let len = hi - lo;
        Ok(Self {
            nodes: base.nodes.iter().map(|s| lo + len * s).collect(),
            weights: base.weights.iter().map(|w| w * len).collect(),
        })
    }

    /// Composite Gauss–Legendre with `panels` equal panels on [lo, hi].
    pub fn composite_legendre(panels: usize, n: usize, lo: f64, hi: f64) -> Result<Self> {
        let base = Self::jacobi01(n, 0.0, 0.0)?;
        let h = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * n);
        let mut weights = Vec::with_capacity(panels * n);
        for p in 0..panels {
            let a = lo + h * p as f64;
            for (s, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(a + h * s);
                weights.push(w * h);
            }
        }
        Ok(Self { nodes, weights })
    }
}

/// Measure discretized by a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum GridMeasure {
    /// dA_α on the disc.
    BergmanWeighted { alpha: f64 },
    /// dμ_β on the plane.
    Fock { beta: f64 },
    /// dλ on the disc.
    MobiusInvariant,
    /// dA on the plane.
    PlaneLebesgue,
}

/// Product grid (radial × uniform angular).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub measure: GridMeasure,
    pub orders: (usize, usize),
    /// Radius of the region covered when the grid only spans |z| < radius.
    pub support_radius: Option<f64>,
}

fn check_orders(n_rad: usize, n_ang: usize) -> Result<()> {
    if n_rad == 0 {
        return Err(Error::param("n_rad", "must be at least 1"));
    }
    if n_ang == 0 {
        return Err(Error::param("n_ang", "must be at least 1"));
    }
    Ok(())
}

fn product(radii: &[f64], radial_weights: &[f64], n_ang: usize) -> (Vec<Complex64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(radii.len() * n_ang);
    let mut weights = Vec::with_capacity(radii.len() * n_ang);
    for (r, w) in radii.iter().zip(radial_weights) {
        for q in 0..n_ang {
            let t = 2.0 * PI * q as f64 / n_ang as f64;
            nodes.push(Complex64::from_polar(*r, t));
            weights.push(w / n_ang as f64);
        }
    }
    (nodes, weights)
}

/// Grid for dA_α: Gauss–Jacobi in s = |z|² times uniform angles.
pub fn disc_grid(alpha: f64, n_rad: usize, n_ang: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    let rule = GaussRule::jacobi01(n_rad, alpha, 0.0)?;
    let radii: Vec<f64> = rule.nodes.iter().map(|s| s.sqrt()).collect();
    let (nodes, weights) = product(&radii, &rule.weights, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::BergmanWeighted { alpha },
        orders: (n_rad, n_ang),
        support_radius: None,
    })
}

/// Grid for dμ_β: Gauss–Laguerre in t = β|z|² times uniform angles.
pub fn plane_grid(beta: f64, n_rad: usize, n_ang: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    if !(beta > 0.0) {
        return Err(Error::param("beta", format!("{beta} must be > 0")));
    }
    let rule = GaussRule::laguerre(n_rad, 0.0)?;
    let radii: Vec<f64> = rule.nodes.iter().map(|t| (t / beta).sqrt()).collect();
    let (nodes, weights) = product(&radii, &rule.weights, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::Fock { beta },
        orders: (n_rad, n_ang),
        support_radius: None,
    })
}

/// Composite Legendre rule in s on [0, radius²] with `n_rad` nodes per panel.
fn restricted_s_rule(radius: f64, n_rad: usize, panels: usize) -> Result<GaussRule> {
    GaussRule::composite_legendre(panels.max(1), n_rad, 0.0, radius * radius)
}

/// dA_α restricted to |z| < radius (< 1), for symbols supported there.
pub fn disc_grid_restricted(alpha: f64, radius: f64, n_rad: usize, n_ang: usize, panels: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::param("radius", format!("{radius} must lie in (0, 1]")));
    }
    let rule = restricted_s_rule(radius, n_rad, panels)?;
    let w: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| w * (alpha + 1.0) * (alpha * (-s).ln_1p()).exp())
        .collect();
    let radii: Vec<f64> = rule.nodes.iter().map(|s| s.sqrt()).collect();
    let (nodes, weights) = product(&radii, &w, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::BergmanWeighted { alpha },
        orders: (n_rad, n_ang),
        support_radius: Some(radius),
    })
}

/// dμ_β restricted to |z| < radius.
pub fn plane_grid_restricted(beta: f64, radius: f64, n_rad: usize, n_ang: usize, panels: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    if !(beta > 0.0) || !(radius > 0.0) {
        return Err(Error::param("radius", "beta and radius must be positive"));
    }
    let rule = restricted_s_rule(radius, n_rad, panels)?;
    let w: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| w * beta * (-beta * s).exp())
        .collect();
    let radii: Vec<f64> = rule.nodes.iter().map(|s| s.sqrt()).collect();
    let (nodes, weights) = product(&radii, &w, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::Fock { beta },
        orders: (n_rad, n_ang),
        support_radius: Some(radius),
    })
}

/// dλ on the whole disc, realized as dA_{α′} with weights (1−|z|²)^{−2−α′}/(α′+1).
pub fn mobius_grid(alpha_prime: f64, n_rad: usize, n_ang: usize) -> Result<QuadratureGrid> {
    let base = disc_grid(alpha_prime, n_rad, n_ang)?;
    let weights = base
        .nodes
        .iter()
        .zip(&base.weights)
        .map(|(z, w)| w * (1.0 - z.norm_sqr()).powf(-2.0 - alpha_prime) / (alpha_prime + 1.0))
        .collect();
    Ok(QuadratureGrid {
        nodes: base.nodes,
        weights,
        measure: GridMeasure::MobiusInvariant,
        orders: base.orders,
        support_radius: None,
    })
}

/// dλ restricted to |z| < radius (< 1).
pub fn mobius_grid_restricted(radius: f64, n_rad: usize, n_ang: usize, panels: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::param("radius", format!("{radius} must lie in (0, 1)")));
    }
    let rule = restricted_s_rule(radius, n_rad, panels)?;
    let w: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(s, w)| w / (1.0 - s).powi(2))
        .collect();
    let radii: Vec<f64> = rule.nodes.iter().map(|s| s.sqrt()).collect();
    let (nodes, weights) = product(&radii, &w, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::MobiusInvariant,
        orders: (n_rad, n_ang),
        support_radius: Some(radius),
    })
}

/// dA on |z| < radius.
pub fn plane_lebesgue_grid(radius: f64, n_rad: usize, n_ang: usize, panels: usize) -> Result<QuadratureGrid> {
    check_orders(n_rad, n_ang)?;
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be positive"));
    }
    let rule = restricted_s_rule(radius, n_rad, panels)?;
    let w: Vec<f64> = rule.weights.iter().map(|w| w * PI).collect();
    let radii: Vec<f64> = rule.nodes.iter().map(|s| s.sqrt()).collect();
    let (nodes, weights) = product(&radii, &w, n_ang);
    Ok(QuadratureGrid {
        nodes,
        weights,
        measure: GridMeasure::PlaneLebesgue,
        orders: (n_rad, n_ang),
        support_radius: Some(radius),
    })
}

impl QuadratureGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        let mut s = crate::special::KahanSum::new();
        for w in &self.weights {
            s.add(*w);
        }
        s.value()
    }

    pub fn describe(&self) -> String {
        let m = match self.measure {
            GridMeasure::BergmanWeighted { alpha } => format!("dA_{alpha}"),
            GridMeasure::Fock { beta } => format!("dmu_{beta}"),
            GridMeasure::MobiusInvariant => "dlambda".to_string(),
            GridMeasure::PlaneLebesgue => "dA".to_string(),
        };
        match self.support_radius {
            Some(r) => format!("{m} on |z|<{r}, orders {:?}", self.orders),
            None => format!("{m}, orders {:?}", self.orders),
        }
    }
}

/// Σ w_i f(z_i) in node order with compensated accumulation.
pub fn integrate<F>(grid: &QuadratureGrid, mut f: F) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Complex64,
{
    let mut s = ComplexKahanSum::new();
    for (z, w) in grid.nodes.iter().zip(&grid.weights) {
        let v = f(*z);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFinite(format!("integrand at node {z}")));
        }
        s.add(v * *w);
    }
    Ok(s.value())
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(grid: &QuadratureGrid, mut f: F) -> Result<f64>
where
    F: FnMut(Complex64) -> f64,
{
    Ok(integrate(grid, |z| Complex64::new(f(z), 0.0))?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::lgamma;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disc_grid_examples() {
        for &alpha in &[-0.5, 0.0, 2.5, 300.0] {
            let g = disc_grid(alpha, 12, 8).unwrap();
            assert!((g.total_weight() - 1.0).abs() < 1e-13);
            assert!(g.weights.iter().all(|w| *w > 0.0));
            assert!(integrate(&g, |z| z).unwrap().norm() < 1e-15);
        }
        let g = disc_grid(0.0, 4, 4).unwrap();
        assert!((integrate_real(&g, |z| z.norm_sqr()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn plane_grid_examples() {
        let g = plane_grid(2.0, 20, 8).unwrap();
        assert!((g.total_weight() - 1.0).abs() < 1e-13);
        assert!((integrate_real(&g, |z| z.norm_sqr()).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn plane_grid_reproduces_kernel() {
        let beta = 1.5;
        let g = plane_grid(beta, 60, 64).unwrap();
        for (v, w) in [(c(1.0, 0.5), c(-0.5, 1.2)), (c(2.0, 0.0), c(0.0, 2.0)), (c(-1.0, -1.4), c(1.4, -0.3))] {
            let got = integrate(&g, |z| (beta * z * w.conj()).exp() * (beta * z * v.conj()).exp().conj()).unwrap();
            let want = (beta * v * w.conj()).exp();
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn normalized_kernel_has_unit_norm() {
        let alpha = 2.0;
        let g = disc_grid(alpha, 40, 64).unwrap();
        let a = c(0.3, -0.2);
        let s = 1.0 + alpha / 2.0;
        let got = integrate_real(&g, |z| {
            (1.0 - a.norm_sqr()).powf(2.0 * s) / (1.0 - a.conj() * z).norm().powf(4.0 * s)
        })
        .unwrap();
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_constant_and_nonfinite() {
        let g = disc_grid(1.0, 3, 3).unwrap();
        assert!((integrate(&g, |_| c(2.0, -1.0)).unwrap() - c(2.0, -1.0)).norm() < 1e-14);
        assert!(integrate(&g, |_| c(f64::NAN, 0.0)).is_err());
        assert!(disc_grid(0.0, 0, 3).is_err());
    }

    #[test]
    fn restricted_grids_measure_discs() {
        let alpha = 3.0;
        let rho: f64 = 0.6;
        let g = disc_grid_restricted(alpha, rho, 20, 4, 1).unwrap();
        let want = 1.0 - (1.0 - rho * rho).powf(alpha + 1.0);
        assert!((g.total_weight() - want).abs() < 1e-14);
        let m = mobius_grid_restricted(rho, 20, 4, 1).unwrap();
        assert!((m.total_weight() - rho * rho / (1.0 - rho * rho)).abs() < 1e-13);
        let p = plane_grid_restricted(2.0, 1.0, 20, 4, 1).unwrap();
        assert!((p.total_weight() - (1.0 - (-2f64).exp())).abs() < 1e-14);
        let l = plane_lebesgue_grid(2.0, 4, 4, 1).unwrap();
        assert!((l.total_weight() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn mobius_grid_consistent_across_alpha_prime() {
        // smooth, compactly supported bump in the disc
        let f = |z: Complex64| {
            let s = z.norm_sqr();
            if s < 0.64 {
                (1.0 - s / 0.64).powi(6) * (1.0 + 0.3 * z.re)
            } else {
                0.0
            }
        };
        let a = integrate_real(&mobius_grid(0.0, 120, 8).unwrap(), f).unwrap();
        let b = integrate_real(&mobius_grid(2.0, 120, 8).unwrap(), f).unwrap();
        let exact = integrate_real(&mobius_grid_restricted(0.8, 30, 8, 1).unwrap(), f).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        assert!((a - exact).abs() < 1e-9);
    }

    #[test]
    fn generalized_rules_match_moments() {
        // ∫ s^p (1−s)^a s^b ds / B(b+1, a+1) = B(b+p+1, a+1)/B(b+1, a+1)
        let (a, b) = (7.5, 3.0);
        let r = GaussRule::jacobi01(10, a, b).unwrap();
        for p in 0..19 {
            let got: f64 = r.nodes.iter().zip(&r.weights).map(|(s, w)| w * s.powi(p)).sum();
            let ln_want = lgamma(b + p as f64 + 1.0) - lgamma(b + 1.0) + lgamma(a + b + 2.0)
                - lgamma(a + b + p as f64 + 2.0);
            assert!((got / ln_want.exp() - 1.0).abs() < 1e-12, "p = {p}");
        }
        let l = GaussRule::laguerre(12, 4.0).unwrap();
        for p in 0..23 {
            let got: f64 = l.nodes.iter().zip(&l.weights).map(|(t, w)| w * t.powi(p)).sum();
            let want = (lgamma(5.0 + p as f64) - lgamma(5.0)).exp();
            assert!((got / want - 1.0).abs() < 1e-11, "p = {p}");
        }
    }

    proptest! {
        #[test]
        fn disc_polynomial_exactness(alpha in -0.9f64..30.0, n_rad in 1usize..15, n_ang in 1usize..12, pf in 0.0f64..1.0, kf in 0.0f64..1.0) {
            let p = ((2 * n_rad - 1) as f64 * pf).floor() as i32;
            let k = ((n_ang - 1) as f64 * kf).floor() as i32;
            let g = disc_grid(alpha, n_rad, n_ang).unwrap();
            let got = integrate(&g, |z| Complex64::from_polar(z.norm_sqr().powi(p), k as f64 * z.arg())).unwrap();
            // (α+1) B(p+1, α+1) for k = 0
            let want = if k == 0 {
                ((alpha + 1.0).ln() + lgamma(p as f64 + 1.0) + lgamma(alpha + 1.0) - lgamma(p as f64 + alpha + 2.0)).exp()
            } else {
                0.0
            };
            prop_assert!((got - want).norm() < 1e-13);
        }

        #[test]
        fn plane_polynomial_exactness(beta in 0.2f64..5.0, n_rad in 1usize..15, n_ang in 1usize..12, pf in 0.0f64..1.0, kf in 0.0f64..1.0) {
            let p = ((2 * n_rad - 1) as f64 * pf).floor() as i32;
            let k = ((n_ang - 1) as f64 * kf).floor() as i32;
            let g = plane_grid(beta, n_rad, n_ang).unwrap();
            let got = integrate(&g, |z| Complex64::from_polar((beta * z.norm_sqr()).powi(p), k as f64 * z.arg())).unwrap();
            let scale = lgamma(p as f64 + 1.0).exp();
            let want = if k == 0 { scale } else { 0.0 };
            prop_assert!((got - want).norm() < 1e-12 * scale.max(1.0));
        }
    }
}
