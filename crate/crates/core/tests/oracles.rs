//! Closed-form operators against brute-force integrals built only from the defining formulas.

use std::f64::consts::PI;

use locop::geometry::GroupElement;
use locop::operators::{localization_matrix, SymbolDomain, SymbolSpec};
use locop::quadrature::{disc_grid, disc_grid_restricted, plane_grid, GaussRule};
use locop::spaces::{evaluate, monomial_norm_sq, CoefficientVector, SpaceParams};
use locop::unitaries::{mobius_unitary_pointwise, u_matrix_element, w_matrix_element, weyl_pointwise};
use num_complex::Complex64;

/// ⟨F, e_m⟩ for m < count, from Taylor coefficients of F on a circle.
fn coefficients_against_basis(space: &SpaceParams, count: usize, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
    let m_pts = 64;
    let radius = 0.5;
    let samples: Vec<Complex64> = (0..m_pts)
        .map(|k| f(Complex64::from_polar(radius, 2.0 * PI * k as f64 / m_pts as f64)))
        .collect();
    (0..count)
        .map(|m| {
            let a_m: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (k * m) as f64 / m_pts as f64))
                .sum::<Complex64>()
                / (m_pts as f64 * radius.powi(m as i32));
            a_m * monomial_norm_sq(space, m).sqrt()
        })
        .collect()
}

#[test]
fn localization_matrix_matches_triple_integral() {
    let alpha = 0.0;
    let rho = 0.5;
    let n = 3;
    let space = SpaceParams::bergman(alpha).unwrap();
    let psi = CoefficientVector::basis(space, 1);
    let symbol = SymbolSpec::disc_indicator(SymbolDomain::Disc, rho).unwrap();
    let closed = localization_matrix(&space, &symbol, &psi, &psi, n, 1, &disc_grid_restricted(alpha, rho, 24, 32, 4).unwrap()).unwrap();

    // (α+1) ∫_T ∫_{|z|<ρ} ⟨e_n, U ψ⟩⟨U ψ, e_m⟩ dθ/2π dλ(z), with U = U_{e^{iθ}, z}
    let radial = GaussRule::legendre(48, 0.0, rho).unwrap();
    let (n_ang, n_theta) = (48, 6);
    let mut brute = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (r, wr) in radial.nodes.iter().zip(&radial.weights) {
        for a in 0..n_ang {
            let z = Complex64::from_polar(*r, 2.0 * PI * a as f64 / n_ang as f64);
            let dl = wr * r * (2.0 * PI / n_ang as f64) / (PI * (1.0 - r * r).powi(2));
            for t in 0..n_theta {
                let g = GroupElement::new(2.0 * PI * t as f64 / n_theta as f64, z).unwrap();
                let c = coefficients_against_basis(&space, n, |zeta| mobius_unitary_pointwise(&psi, &g, zeta).unwrap());
                for row in 0..n {
                    for col in 0..n {
                        brute[row][col] += (alpha + 1.0) * dl / n_theta as f64 * c[col].conj() * c[row];
                    }
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for (row, brute_row) in brute.iter().enumerate() {
        for (col, b) in brute_row.iter().enumerate() {
            worst = worst.max((closed.entries[(row, col)] - b).norm());
        }
    }
    assert!(worst <= 1e-7, "max entry deviation {worst:e}");
}

#[test]
fn mobius_elements_match_area_integrals() {
    for &alpha in &[0.0, 1.5] {
        let space = SpaceParams::bergman(alpha).unwrap();
        let grid = disc_grid(alpha, 80, 96).unwrap();
        for &(theta, a) in &[(0.3, Complex64::new(0.2, -0.1)), (2.0, Complex64::new(-0.45, 0.3))] {
            let g = GroupElement::new(theta, a).unwrap();
            for j in 0..4 {
                let ej = CoefficientVector::basis(space, j);
                let image: Vec<Complex64> = grid.nodes.iter().map(|z| mobius_unitary_pointwise(&ej, &g, *z).unwrap()).collect();
                for k in 0..4 {
                    let ek = CoefficientVector::basis(space, k);
                    let quad: Complex64 = grid
                        .nodes
                        .iter()
                        .zip(&grid.weights)
                        .zip(&image)
                        .map(|((z, w), u)| u * evaluate(&ek, *z).conj() * *w)
                        .sum();
                    let closed = u_matrix_element(alpha, &g, j, k).unwrap();
                    assert!((quad - closed).norm() < 1e-9, "alpha={alpha} j={j} k={k}: {quad} vs {closed}");
                }
            }
        }
    }
}

#[test]
fn weyl_elements_match_gaussian_integrals() {
    for &beta in &[0.5, 2.0] {
        let space = SpaceParams::fock(beta).unwrap();
        let grid = plane_grid(beta, 80, 96).unwrap();
        for &z in &[Complex64::new(0.4, 0.2), Complex64::new(-0.3, -0.6)] {
            for j in 0..4 {
                let ej = CoefficientVector::basis(space, j);
                for k in 0..4 {
                    let ek = CoefficientVector::basis(space, k);
                    let quad: Complex64 = grid
                        .nodes
                        .iter()
                        .zip(&grid.weights)
                        .map(|(zeta, w)| weyl_pointwise(&ej, z, *zeta).unwrap() * evaluate(&ek, *zeta).conj() * *w)
                        .sum();
                    let closed = w_matrix_element(beta, z, j, k).unwrap();
                    assert!((quad - closed).norm() < 1e-9, "beta={beta} j={j} k={k}: {quad} vs {closed}");
                }
            }
        }
    }
}
