//! Verification suites: each realizes a limit law or inequality as a sweep with a verdict.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::berezin::{berezin_lp_distance, BerezinKernel, BerezinRequest, LpExponent};
use crate::error::{Error, Result};
use crate::operators::{
    localization_matrix, named_profile, radial_toeplitz_diagonal, spectral_summary, GeneralSymbol, SpectralSummary,
    SymbolDomain, SymbolSpec,
};
use crate::quadrature::{disc_grid, disc_grid_restricted, mobius_grid, plane_grid, GaussRule};
use crate::spaces::{inner_product, v_alpha_transform, CoefficientVector, SpaceParams};
use crate::special::{gamma_p, inc_beta, ln_factorial, ln_gamma_ratio, ComplexKahanSum, KahanSum};
use crate::unitaries::{u_matrix_element_reduced, w_matrix_element_reduced};

/// Note attached to every verdict.
pub const TOLERANCE_NOTE: &str =
    "finite-scale tolerances are engineering choices; the underlying statements are limits without rates";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Any,
    Nonincreasing,
    StrictlyDecreasing,
}

/// How a record's errors are judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Rule {
    /// Every error at most `tol`.
    AllWithin { tol: f64 },
    /// Last error at most `tol` and the error sequence follows `trend`.
    FinalWithin { tol: f64, trend: Trend },
    /// computed ≤ target + slack at every step.
    AtMostTarget { slack: f64 },
    /// Only the trend is judged.
    TrendOnly { trend: Trend },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub rule: Rule,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One sweep: computed values against targets over an abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub theorem_tag: String,
    pub parameters: BTreeMap<String, Value>,
    pub abscissa_name: String,
    pub abscissa: Vec<f64>,
    pub computed: Vec<f64>,
    pub target: Vec<f64>,
    pub errors: Vec<f64>,
    pub verdict: Verdict,
}

fn follows(trend: Trend, e: &[f64]) -> bool {
    match trend {
        Trend::Any => true,
        Trend::Nonincreasing => e.windows(2).all(|w| w[1] <= w[0]),
        Trend::StrictlyDecreasing => e.windows(2).all(|w| w[1] < w[0]),
    }
}

impl SweepRecord {
    pub fn new(
        tag: &str,
        parameters: BTreeMap<String, Value>,
        abscissa_name: &str,
        abscissa: Vec<f64>,
        computed: Vec<f64>,
        target: Vec<f64>,
        rule: Rule,
    ) -> Self {
        let errors: Vec<f64> = computed.iter().zip(&target).map(|(c, t)| (c - t).abs()).collect();
        let finite = computed.iter().chain(&target).all(|v| v.is_finite());
        let nonempty = !computed.is_empty();
        let (pass, detail) = match rule {
            Rule::AllWithin { tol } => {
                let worst = errors.iter().copied().fold(0.0, f64::max);
                (worst <= tol, format!("max error {worst:.3e} vs tolerance {tol:.1e}"))
            }
            Rule::FinalWithin { tol, trend } => {
                let last = errors.last().copied().unwrap_or(f64::INFINITY);
                let ok = follows(trend, &errors);
                (
                    last <= tol && ok,
                    format!("final error {last:.3e} vs tolerance {tol:.3e}; trend {trend:?} {}", if ok { "holds" } else { "violated" }),
                )
            }
            Rule::AtMostTarget { slack } => {
                let worst = computed.iter().zip(&target).map(|(c, t)| c - t).fold(f64::NEG_INFINITY, f64::max);
                (worst <= slack, format!("max(computed - bound) {worst:.3e} vs slack {slack:.1e}"))
            }
            Rule::TrendOnly { trend } => {
                let ok = follows(trend, &errors);
                (ok, format!("trend {trend:?} {}", if ok { "holds" } else { "violated" }))
            }
        };
        Self {
            theorem_tag: tag.to_string(),
            parameters,
            abscissa_name: abscissa_name.to_string(),
            abscissa,
            computed,
            target,
            errors,
            verdict: Verdict {
                pass: pass && finite && nonempty,
                rule,
                detail,
                note: None,
            },
        }
    }

    /// Attach an explanation, e.g. why a sweep is not gated on its trend.
    pub fn with_note(mut self, note: &str) -> Self {
        self.verdict.note = Some(note.to_string());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.pass
    }

    /// One-line PASS/FAIL summary.
    pub fn summary_line(&self) -> String {
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{} {} [{}] {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.theorem_tag,
            params.join(" "),
            self.verdict.detail
        )
    }
}

macro_rules! params {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut m = BTreeMap::new();
        $(m.insert($k.to_string(), json!($v));)*
        m
    }};
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long-format CSV: tag, parameters, step, abscissa name and value, computed, target, error.
/// Lines starting with `# ` carry provenance.
pub fn write_records_csv<W: Write>(records: &[SweepRecord], header_comments: &[String], mut w: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Unsupported(format!("output failed: {e}"));
    for c in header_comments {
        for line in c.lines() {
            writeln!(w, "# {line}").map_err(io)?;
        }
    }
    let mut wtr = csv::Writer::from_writer(w);
    let cerr = |e: csv::Error| Error::Unsupported(format!("csv output failed: {e}"));
    wtr.write_record(["theorem_tag", "parameters", "step", "abscissa_name", "abscissa", "computed", "target", "error"])
        .map_err(cerr)?;
    for r in records {
        let params = serde_json::to_string(&r.parameters).map_err(|e| Error::Unsupported(e.to_string()))?;
        for i in 0..r.computed.len() {
            wtr.write_record([
                r.theorem_tag.clone(),
                params.clone(),
                i.to_string(),
                r.abscissa_name.clone(),
                fmt_float(r.abscissa[i]),
                fmt_float(r.computed[i]),
                fmt_float(r.target[i]),
                fmt_float(r.errors[i]),
            ])
            .map_err(cerr)?;
        }
    }
    wtr.flush().map_err(io)?;
    Ok(())
}

/// Records as a JSON array of full sweep records (data arrays and verdicts).
pub fn records_to_json(records: &[SweepRecord]) -> Result<String> {
    serde_json::to_string(records).map_err(|e| Error::Unsupported(format!("json output failed: {e}")))
}

fn check_increasing(field: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() || v.windows(2).any(|w| !(w[1] > w[0])) || v.iter().any(|x| !x.is_finite()) {
        let short = field.rsplit('.').next().unwrap_or(field);
        return Err(Error::param(field, format!("{short} must be nonempty increasing")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::param(field, format!("{v} must be positive")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bergman to Fock limits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitParams {
    pub beta: f64,
    pub sigma: f64,
    pub r_list: Vec<f64>,
    /// Largest basis index n in the diagonal sweep.
    pub n_max: usize,
    /// Radius of the disc indicator in the diagonal and norm sweeps.
    pub radius: f64,
    /// Tolerance on the last error of each sweep.
    pub tolerance: f64,
    /// Run the dense window sweep on the r values with βr² ≤ this cap (0 disables it).
    pub window_cap: f64,
}

impl Default for LimitParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            sigma: 0.0,
            r_list: vec![2.0, 4.0, 8.0, 16.0, 32.0],
            n_max: 8,
            radius: 1.0,
            tolerance: 1e-2,
            window_cap: 200.0,
        }
    }
}

impl LimitParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("limits.beta", self.beta)?;
        if !(self.sigma >= 0.0) {
            return Err(Error::param("limits.sigma", "sigma must be nonnegative"));
        }
        check_increasing("limits.r_list", &self.r_list)?;
        if self.r_list[0] <= 0.0 {
            return Err(Error::param("limits.r_list", "r_list entries must be positive"));
        }
        check_positive("limits.radius", self.radius)?;
        check_positive("limits.tolerance", self.tolerance)?;
        Ok(())
    }
}

/// A radial test function on C with closed-form Fock integral.
struct PlaneTest {
    name: &'static str,
    f: fn(f64) -> f64,
    /// ∫ f dμ_β.
    target: fn(f64) -> f64,
}

fn plane_tests() -> Vec<PlaneTest> {
    vec![
        PlaneTest {
            name: "one",
            f: |_| 1.0,
            target: |_| 1.0,
        },
        PlaneTest {
            name: "gaussian",
            f: |s| (-s).exp(),
            target: |b| b / (b + 1.0),
        },
        PlaneTest {
            name: "abs_sq_gaussian",
            f: |s| s * (-0.5 * s).exp(),
            target: |b| b / (b + 0.5).powi(2),
        },
        PlaneTest {
            name: "abs_fourth_gaussian",
            f: |s| s * s * (-s).exp(),
            target: |b| 2.0 * b / (b + 1.0).powi(3),
        },
    ]
}

/// ∫_D F(r²|z|²) dA_α(z) = E[F(r² s)] under the Beta(1, α+1) law of s.
fn dilated_disc_integral(alpha: f64, r: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let rule = GaussRule::jacobi01(96, alpha, 0.0)?;
    let mut acc = KahanSum::new();
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        acc.add(w * f(r * r * s));
    }
    Ok(acc.value())
}

/// ‖Σ a_n zⁿ (dilated by r)‖² in A²_α.
fn dilated_poly_norm_sq(alpha: f64, r: f64, a: &[f64]) -> f64 {
    a.iter()
        .enumerate()
        .map(|(n, c)| c * c * (2.0 * n as f64 * r.ln() + ln_factorial(n) - ln_gamma_ratio(alpha + 2.0, n as f64)).exp())
        .sum()
}

fn fock_poly_norm_sq(beta: f64, a: &[f64]) -> f64 {
    a.iter()
        .enumerate()
        .map(|(n, c)| c * c * (ln_factorial(n) - n as f64 * beta.ln()).exp())
        .sum()
}

/// Measure, norm, diagonal and norm-formula limits as r → ∞, plus a dense window sweep.
pub fn limit_suite(p: &LimitParams) -> Result<Vec<SweepRecord>> {
    p.validate()?;
    let (beta, sigma) = (p.beta, p.sigma);
    let rs = p.r_list.clone();
    let trend = |name: &str| if name == "one" { Trend::Any } else { Trend::StrictlyDecreasing };
    let mut out = Vec::new();

    for t in plane_tests() {
        let computed = rs
            .iter()
            .map(|&r| dilated_disc_integral(beta * r * r + sigma, r, t.f))
            .collect::<Result<Vec<_>>>()?;
        let target = vec![(t.target)(beta); rs.len()];
        let rec = SweepRecord::new(
            "measure_limit",
            params!("beta" => beta, "sigma" => sigma, "function" => t.name),
            "r",
            rs.clone(),
            computed,
            target,
            Rule::FinalWithin { tol: p.tolerance, trend: trend(t.name) },
        );
        out.push(if t.name == "one" { rec.with_note("exact at every r; errors sit at the floating-point floor") } else { rec });
    }

    let polys: [(&str, Vec<f64>); 3] = [
        ("one_plus_z_plus_z2", vec![1.0, 1.0, 1.0]),
        ("z_cubed", vec![0.0, 0.0, 0.0, 1.0]),
        // e^{z/2} truncated far past double precision
        ("exp_half_z", (0..80).map(|n| (-(n as f64) * 2f64.ln() - ln_factorial(n)).exp()).collect()),
    ];
    for (name, a) in &polys {
        let computed = rs.iter().map(|&r| dilated_poly_norm_sq(beta * r * r + sigma, r, a).sqrt()).collect();
        let norm = fock_poly_norm_sq(beta, a).sqrt();
        out.push(SweepRecord::new(
            "norm_limit",
            params!("beta" => beta, "sigma" => sigma, "function" => name, "relative_tolerance" => p.tolerance),
            "r",
            rs.clone(),
            computed,
            vec![norm; rs.len()],
            Rule::FinalWithin { tol: p.tolerance * norm, trend: Trend::StrictlyDecreasing },
        ));
    }

    let indicator = SymbolSpec::disc_indicator(SymbolDomain::Plane, p.radius)?;
    let diags = rs
        .iter()
        .map(|&r| {
            let space = SpaceParams::bergman(beta * r * r)?;
            radial_toeplitz_diagonal(&space, &indicator.clone().scaled(r, sigma)?, p.n_max + 1)
        })
        .collect::<Result<Vec<_>>>()?;
    for n in 0..=p.n_max {
        let gamma_n = gamma_p(n as f64 + 1.0, beta * p.radius * p.radius)?;
        out.push(SweepRecord::new(
            "diagonal_limit",
            params!("beta" => beta, "sigma" => sigma, "radius" => p.radius, "n" => n),
            "r",
            rs.clone(),
            diags.iter().map(|d| d[n]).collect(),
            vec![gamma_n; rs.len()],
            Rule::FinalWithin { tol: p.tolerance, trend: Trend::StrictlyDecreasing },
        ));
    }

    let big: Vec<f64> = rs.iter().copied().filter(|r| *r > p.radius).collect();
    if !big.is_empty() {
        let x = beta * p.radius * p.radius;
        let computed = big
            .iter()
            .map(|&r| {
                let a = beta * r * r;
                (a + 1.0) / (a + sigma + 1.0) * -((a + sigma + 1.0) * (-(p.radius * p.radius) / (r * r)).ln_1p()).exp_m1()
            })
            .collect();
        out.push(SweepRecord::new(
            "norm_formula_limit",
            params!("beta" => beta, "sigma" => sigma, "radius" => p.radius),
            "r",
            big.clone(),
            computed,
            vec![-(-x).exp_m1(); big.len()],
            Rule::FinalWithin { tol: p.tolerance, trend: Trend::StrictlyDecreasing },
        ));
    }

    let window_rs: Vec<f64> = rs.iter().copied().filter(|r| beta * r * r <= p.window_cap).collect();
    if window_rs.len() >= 2 {
        out.push(window_limit(beta, sigma, &window_rs, p.tolerance.max(0.05))?);
    }
    Ok(out)
}

/// Dense localization matrices with windows φ_r, ψ_r and symbol f_{r,σ} against the Fock matrix.
fn window_limit(beta: f64, sigma: f64, rs: &[f64], tol: f64) -> Result<SweepRecord> {
    let n = 6;
    let phi_c = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
    let psi_c = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.3), Complex64::new(0.2, 0.0)];
    let profile = named_profile("gaussian", SymbolDomain::Plane).ok_or_else(|| Error::Unsupported("gaussian profile".into()))?;
    let plane_symbol = SymbolSpec::radial(SymbolDomain::Plane, profile)?;
    let fock = SpaceParams::fock(beta)?;
    let target = localization_matrix(
        &fock,
        &plane_symbol,
        &CoefficientVector::new(fock, phi_c.to_vec())?,
        &CoefficientVector::new(fock, psi_c.to_vec())?,
        n,
        1,
        &plane_grid(beta, 80, 40)?,
    )?;
    let computed = rs
        .par_iter()
        .map(|&r| {
            let alpha = beta * r * r;
            let space = SpaceParams::bergman(alpha)?;
            let dil = |c: &[Complex64]| c.iter().enumerate().map(|(k, a)| a * r.powi(k as i32)).collect::<Vec<_>>();
            let m = localization_matrix(
                &space,
                &plane_symbol.clone().scaled(r, sigma)?,
                &CoefficientVector::new(space, dil(&phi_c))?,
                &CoefficientVector::new(space, dil(&psi_c))?,
                n,
                1,
                &disc_grid(alpha, 96, 40)?,
            )?;
            Ok((m.entries - &target.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepRecord::new(
        "window_limit",
        params!("beta" => beta, "sigma" => sigma, "N" => n, "symbol" => "gaussian"),
        "r",
        rs.to_vec(),
        computed,
        vec![0.0; rs.len()],
        Rule::FinalWithin { tol, trend: Trend::StrictlyDecreasing },
    ))
}

// ---------------------------------------------------------------------------
// Sharp norm bounds

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SharpBoundParams {
    pub alpha_list: Vec<f64>,
    pub beta: f64,
    /// Radii of centered disc indicators on the disc.
    pub disc_radii: Vec<f64>,
    /// Radii of centered disc indicators on the plane.
    pub plane_radii: Vec<f64>,
    /// Random polynomials per α in the concentration check.
    pub random_polys: usize,
    pub seed: u64,
    pub equality_tol: f64,
}

impl Default for SharpBoundParams {
    fn default() -> Self {
        Self {
            alpha_list: vec![0.0, 2.0, 10.0, 50.0],
            beta: 1.0,
            disc_radii: vec![0.3, 0.5, 0.8],
            plane_radii: vec![0.5, 1.0, 2.0],
            random_polys: 20,
            seed: 7,
            equality_tol: 1e-8,
        }
    }
}

impl SharpBoundParams {
    pub fn validate(&self) -> Result<()> {
        check_increasing("sharp_bounds.alpha_list", &self.alpha_list)?;
        if self.alpha_list[0] <= -1.0 {
            return Err(Error::param("sharp_bounds.alpha_list", "alpha must exceed -1"));
        }
        check_positive("sharp_bounds.beta", self.beta)?;
        if self.disc_radii.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(Error::param("sharp_bounds.disc_radii", "disc radii must lie in (0, 1)"));
        }
        if self.plane_radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::param("sharp_bounds.plane_radii", "plane radii must be positive"));
        }
        check_positive("sharp_bounds.equality_tol", self.equality_tol)?;
        Ok(())
    }
}

/// Operator norm of a radial Toeplitz operator from its diagonal.
fn radial_norm(space: &SpaceParams, symbol: &SymbolSpec, n: usize) -> Result<f64> {
    let diag = radial_toeplitz_diagonal(space, symbol, n)?;
    Ok(SpectralSummary::from_diagonal(&diag, None, &[]).op_norm)
}

/// ‖f‖∞ (1 − (‖f‖∞/(‖f‖∞ + ‖f‖₁))^{α+1}).
pub fn bergman_norm_bound(alpha: f64, sup: f64, l1: f64) -> f64 {
    sup * -((alpha + 1.0) * (-(l1 / (sup + l1))).ln_1p()).exp_m1()
}

/// ‖f‖∞ (1 − exp(−(β/π)‖f‖₁/‖f‖∞)).
pub fn fock_norm_bound(beta: f64, sup: f64, l1: f64) -> f64 {
    sup * -(-(beta / PI) * l1 / sup).exp_m1()
}

/// Sharp Toeplitz norm bounds on A²_α and F²_β and the concentration inequality.
pub fn sharp_bound_suite(p: &SharpBoundParams) -> Result<Vec<SweepRecord>> {
    p.validate()?;
    let mut out = Vec::new();
    let alphas = p.alpha_list.clone();

    let mut disc_symbols: Vec<(SymbolSpec, bool)> = p
        .disc_radii
        .iter()
        .map(|r| Ok((SymbolSpec::disc_indicator(SymbolDomain::Disc, *r)?, true)))
        .collect::<Result<_>>()?;
    for name in ["boundary2", "boundary3", "bulge", "bump", "gauss_edge", "half_step"] {
        let prof = named_profile(name, SymbolDomain::Disc).ok_or_else(|| Error::Unsupported(name.into()))?;
        disc_symbols.push((SymbolSpec::radial(SymbolDomain::Disc, prof)?, false));
    }
    for (sym, extremal) in &disc_symbols {
        let l1 = sym.l1_norm()?;
        let sup = sym.sup_norm();
        let computed = alphas
            .par_iter()
            .map(|&a| radial_norm(&SpaceParams::bergman(a)?, sym, 400 + (20.0 * (a + 1.0)) as usize))
            .collect::<Result<Vec<_>>>()?;
        let target: Vec<f64> = alphas.iter().map(|&a| bergman_norm_bound(a, sup, l1)).collect();
        let rule = if *extremal {
            Rule::AllWithin { tol: p.equality_tol }
        } else {
            Rule::AtMostTarget { slack: 1e-12 }
        };
        out.push(SweepRecord::new(
            "bergman_sharp_bound",
            params!("symbol" => sym.label(), "l1_dlambda" => l1, "sup" => sup),
            "alpha",
            alphas.clone(),
            computed,
            target,
            rule,
        ));
    }

    let mut plane_symbols: Vec<(SymbolSpec, bool)> = p
        .plane_radii
        .iter()
        .map(|r| Ok((SymbolSpec::disc_indicator(SymbolDomain::Plane, *r)?, true)))
        .collect::<Result<_>>()?;
    for name in ["gaussian", "wide_gaussian", "shell", "bump", "plateau"] {
        let prof = named_profile(name, SymbolDomain::Plane).ok_or_else(|| Error::Unsupported(name.into()))?;
        plane_symbols.push((SymbolSpec::radial(SymbolDomain::Plane, prof)?, false));
    }
    let fock = SpaceParams::fock(p.beta)?;
    let mut labels = Vec::new();
    let mut computed = Vec::new();
    let mut target = Vec::new();
    let mut eq_computed = Vec::new();
    let mut eq_target = Vec::new();
    for (sym, extremal) in &plane_symbols {
        let l1 = sym.l1_norm()?;
        let sup = sym.sup_norm();
        let reach = sym.support_radius().unwrap_or(12.0);
        let n = (4.0 * p.beta * reach * reach) as usize + 400;
        let norm = radial_norm(&fock, sym, n)?;
        let bound = fock_norm_bound(p.beta, sup, l1);
        labels.push(sym.label());
        if *extremal {
            eq_computed.push(norm);
            eq_target.push(bound);
        } else {
            computed.push(norm);
            target.push(bound);
        }
    }
    out.push(SweepRecord::new(
        "fock_sharp_bound",
        params!("beta" => p.beta, "symbols" => labels[p.plane_radii.len()..].to_vec()),
        "symbol_index",
        (0..computed.len()).map(|i| i as f64).collect(),
        computed,
        target,
        Rule::AtMostTarget { slack: 1e-12 },
    ));
    out.push(SweepRecord::new(
        "fock_sharp_bound_equality",
        params!("beta" => p.beta, "radii" => p.plane_radii),
        "radius",
        p.plane_radii.clone(),
        eq_computed,
        eq_target,
        Rule::AllWithin { tol: p.equality_tol },
    ));

    out.extend(concentration_records(p)?);
    Ok(out)
}

/// Radial region {r_in ≤ |z| < r_out}.
#[derive(Debug, Clone, Copy)]
struct Annulus {
    r_in: f64,
    r_out: f64,
}

impl Annulus {
    fn lambda(&self) -> f64 {
        1.0 / (1.0 - self.r_out * self.r_out) - 1.0 / (1.0 - self.r_in * self.r_in)
    }

    /// ∫_Ω |e_n|² dA_α.
    fn mass(&self, alpha: f64, n: usize) -> Result<f64> {
        let a = n as f64 + 1.0;
        let b = alpha + 1.0;
        Ok(inc_beta(self.r_out * self.r_out, a, b)? - inc_beta(self.r_in * self.r_in, a, b)?)
    }
}

/// ∫_Ω |g|² dA_α for a radial region, from orthonormal coefficients.
fn region_mass(alpha: f64, omega: Annulus, b: &[Complex64]) -> Result<f64> {
    let mut acc = KahanSum::new();
    for (n, c) in b.iter().enumerate() {
        acc.add(c.norm_sqr() * omega.mass(alpha, n)?);
    }
    Ok(acc.value())
}

/// ∫_Ω |g|² dA_α ≤ [1 − (1+λ(Ω))^{−(α+1)}] ‖g‖², with equality for g = k_0 on discs.
fn concentration_records(p: &SharpBoundParams) -> Result<Vec<SweepRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let regions = [
        Annulus { r_in: 0.0, r_out: 0.3 },
        Annulus { r_in: 0.0, r_out: 0.6 },
        Annulus { r_in: 0.3, r_out: 0.7 },
        Annulus { r_in: 0.5, r_out: 0.9 },
    ];
    let mut out = Vec::new();
    let alphas = p.alpha_list.clone();
    let mut computed = Vec::new();
    let mut target = Vec::new();
    let mut abscissa = Vec::new();
    for &alpha in &alphas {
        for _ in 0..p.random_polys {
            let deg = rng.gen_range(0..7usize);
            let b: Vec<Complex64> = (0..=deg)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let norm_sq: f64 = b.iter().map(|c| c.norm_sqr()).sum();
            for omega in &regions {
                computed.push(region_mass(alpha, *omega, &b)?);
                target.push(-((alpha + 1.0) * -(omega.lambda()).ln_1p()).exp_m1() * norm_sq);
                abscissa.push(alpha);
            }
        }
    }
    out.push(SweepRecord::new(
        "concentration_inequality",
        params!("seed" => p.seed, "polys_per_alpha" => p.random_polys, "regions" => "discs 0.3, 0.6; annuli (0.3,0.7), (0.5,0.9)"),
        "alpha",
        abscissa,
        computed,
        target,
        Rule::AtMostTarget { slack: 1e-12 },
    ));
    let mut computed = Vec::new();
    let mut target = Vec::new();
    let mut abscissa = Vec::new();
    for &alpha in &alphas {
        for omega in regions.iter().filter(|o| o.r_in == 0.0) {
            // k_0 is the constant 1 = e_0
            computed.push(region_mass(alpha, *omega, &[Complex64::new(1.0, 0.0)])?);
            target.push(-((alpha + 1.0) * -(omega.lambda()).ln_1p()).exp_m1());
            abscissa.push(alpha);
        }
    }
    out.push(SweepRecord::new(
        "concentration_equality",
        params!("window" => "k_0", "regions" => "centered discs 0.3, 0.6"),
        "alpha",
        abscissa,
        computed,
        target,
        Rule::AllWithin { tol: p.equality_tol },
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Eigenvalue distribution

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SzegoParams {
    /// Radius of the disc indicator symbol.
    pub rho: f64,
    /// α values for the trace functionals and the defect.
    pub alpha_list: Vec<f64>,
    /// α values for the eigenvalue counts and the norm.
    pub count_alpha_list: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Relative tolerance on the last sweep point.
    pub rel_tol: f64,
    /// Lower bound required of the norm at the last count α.
    pub norm_floor: f64,
    /// Absolute tolerance on the normalized defect at the last α.
    pub defect_tol: f64,
    /// Window of the dense check as α=0 coefficients (index n ↦ e_n), empty to skip.
    pub dense_window: Vec<f64>,
    pub dense_alpha_list: Vec<f64>,
    pub dense_n: usize,
}

impl Default for SzegoParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            alpha_list: vec![50.0, 100.0, 250.0, 500.0, 1000.0],
            count_alpha_list: vec![100.0, 250.0, 500.0, 1000.0, 2000.0],
            deltas: vec![0.3, 0.5, 0.7],
            rel_tol: 0.02,
            norm_floor: 0.99,
            defect_tol: 0.02,
            dense_window: vec![0.0, 1.0],
            dense_alpha_list: vec![10.0, 20.0, 40.0],
            dense_n: 60,
        }
    }
}

impl SzegoParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::param("szego.rho", "rho must lie in (0, 1)"));
        }
        check_increasing("szego.alpha_list", &self.alpha_list)?;
        check_increasing("szego.count_alpha_list", &self.count_alpha_list)?;
        for (field, list) in [("szego.alpha_list", &self.alpha_list), ("szego.count_alpha_list", &self.count_alpha_list)] {
            if list[0] <= -1.0 {
                return Err(Error::param(field, "alpha must exceed -1"));
            }
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
            return Err(Error::param("szego.deltas", "deltas must be nonempty and lie in (0, 1]"));
        }
        check_positive("szego.rel_tol", self.rel_tol)?;
        check_positive("szego.defect_tol", self.defect_tol)?;
        if !self.dense_window.is_empty() {
            if self.dense_window.iter().all(|c| *c == 0.0) {
                return Err(Error::param("szego.dense_window", "window must be nonzero"));
            }
            check_increasing("szego.dense_alpha_list", &self.dense_alpha_list)?;
            if self.dense_alpha_list[0] <= -1.0 {
                return Err(Error::param("szego.dense_alpha_list", "alpha must exceed -1"));
            }
            if self.dense_n == 0 || self.dense_n > 400 {
                return Err(Error::param("szego.dense_n", "dense_n must lie in 1..=400"));
            }
        }
        Ok(())
    }
}

/// Smallest N with I_{ρ²}(N+1, α+1) < 1e−10.
pub fn tail_rule_truncation(alpha: f64, rho: f64) -> Result<usize> {
    let x = rho * rho;
    let mean = (alpha + 1.0) * x / (1.0 - x);
    let mut n = mean.floor() as usize;
    // walk down to the transition first so the first qualifying index is found
    while n > 0 && inc_beta(x, n as f64 + 1.0, alpha + 1.0)? < 1e-10 {
        n /= 2;
    }
    while inc_beta(x, n as f64 + 1.0, alpha + 1.0)? >= 1e-10 {
        n += 1;
    }
    Ok(n)
}

/// Diagonal of the ψ = 1 operator for the disc indicator of radius ρ, with the tail gate.
pub fn indicator_diagonal(alpha: f64, rho: f64) -> Result<Vec<f64>> {
    let n = tail_rule_truncation(alpha, rho)?;
    let space = SpaceParams::bergman(alpha)?;
    let sym = SymbolSpec::disc_indicator(SymbolDomain::Disc, rho)?;
    let diag = radial_toeplitz_diagonal(&space, &sym, n)?;
    let trace: f64 = diag.iter().sum();
    let mut tail = KahanSum::new();
    let mut k = n;
    loop {
        let v = inc_beta(rho * rho, k as f64 + 1.0, alpha + 1.0)?;
        tail.add(v);
        if v < 1e-20 || k > n + 100_000 {
            break;
        }
        k += 1;
    }
    if tail.value() > 1e-6 * trace {
        return Err(Error::Truncation(format!(
            "diagonal tail {:.3e} exceeds 1e-6 of trace {trace:.6} at alpha={alpha}, N={n}",
            tail.value()
        )));
    }
    Ok(diag)
}

fn trace_h(values: &[f64], h: impl Fn(f64) -> f64) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v * h(*v));
    }
    acc.value()
}

/// Trace functionals, eigenvalue counts, norm and defect as α grows, plus a dense window check.
pub fn szego_suite(p: &SzegoParams) -> Result<Vec<SweepRecord>> {
    p.validate()?;
    let x = p.rho * p.rho;
    let mass = x / (1.0 - x);
    let mut out = Vec::new();
    let alphas = p.alpha_list.clone();
    let diags = alphas.par_iter().map(|&a| indicator_diagonal(a, p.rho)).collect::<Result<Vec<_>>>()?;
    let hs: [(&str, fn(f64) -> f64); 4] = [("one", |_| 1.0), ("x", |v| v), ("x2", |v| v * v), ("x3", |v| v * v * v)];
    for (name, h) in hs {
        let computed: Vec<f64> = diags.iter().zip(&alphas).map(|(d, a)| trace_h(d, h) / (a + 1.0)).collect();
        // ∫ f h(f) dλ = h(1) λ(B(0,ρ)) for an indicator
        let target = h(1.0) * mass;
        let rule = if name == "one" {
            Rule::AllWithin { tol: 1e-8 }
        } else {
            Rule::FinalWithin { tol: p.rel_tol * target, trend: Trend::StrictlyDecreasing }
        };
        out.push(SweepRecord::new(
            "szego_trace",
            params!("rho" => p.rho, "h" => name, "window" => "1"),
            "alpha",
            alphas.clone(),
            computed,
            vec![target; alphas.len()],
            rule,
        ));
    }
    let defect: Vec<f64> = diags
        .iter()
        .zip(&alphas)
        .map(|(d, a)| (trace_h(d, |v| v) - trace_h(d, |_| 1.0)) / (a + 1.0))
        .collect();
    out.push(SweepRecord::new(
        "szego_defect",
        params!("rho" => p.rho, "window" => "1"),
        "alpha",
        alphas.clone(),
        defect,
        vec![0.0; alphas.len()],
        Rule::FinalWithin { tol: p.defect_tol, trend: Trend::StrictlyDecreasing },
    ));

    let calphas = p.count_alpha_list.clone();
    let cdiags = calphas.par_iter().map(|&a| indicator_diagonal(a, p.rho)).collect::<Result<Vec<_>>>()?;
    let summaries: Vec<SpectralSummary> = cdiags.iter().map(|d| SpectralSummary::from_diagonal(d, None, &p.deltas)).collect();
    for &delta in &p.deltas {
        let computed: Vec<f64> = summaries
            .iter()
            .zip(&calphas)
            .map(|(s, a)| s.count(delta).unwrap_or(0) as f64 / (a + 1.0))
            .collect();
        let target = if delta < 1.0 { mass } else { 0.0 };
        out.push(SweepRecord::new(
            "szego_count",
            params!("rho" => p.rho, "delta" => delta, "window" => "1"),
            "alpha",
            calphas.clone(),
            computed,
            vec![target; calphas.len()],
            Rule::FinalWithin { tol: p.rel_tol * target.max(1e-300), trend: Trend::Any },
        )
        .with_note("counts move in steps of 1/(alpha+1), so the error sequence is not monotone; gated on the final point"));
    }
    out.push(SweepRecord::new(
        "szego_norm",
        params!("rho" => p.rho, "window" => "1"),
        "alpha",
        calphas.clone(),
        summaries.iter().map(|s| s.op_norm).collect(),
        vec![1.0; calphas.len()],
        Rule::FinalWithin { tol: 1.0 - p.norm_floor, trend: Trend::Any },
    )
    .with_note("the norm equals 1 up to round-off at every alpha, so the error sits at the floating-point floor"));

    if !p.dense_window.is_empty() {
        out.extend(szego_dense(p)?);
    }
    Ok(out)
}

/// Dense localization matrix with a polynomial window at moderate α.
fn szego_dense(p: &SzegoParams) -> Result<Vec<SweepRecord>> {
    let x = p.rho * p.rho;
    let mass = x / (1.0 - x);
    let base = CoefficientVector::from_real(SpaceParams::bergman(0.0)?, &p.dense_window)?.normalized()?;
    let sym = SymbolSpec::disc_indicator(SymbolDomain::Disc, p.rho)?;
    let n = p.dense_n;
    let alphas = p.dense_alpha_list.clone();
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            let psi = v_alpha_transform(&base, alpha)?;
            let space = SpaceParams::bergman(alpha)?;
            let grid = disc_grid_restricted(alpha, p.rho, 48, 2 * n + 2 * psi.degree() + 8, 4)?;
            let m = localization_matrix(&space, &sym, &psi, &psi, n, 1, &grid)?;
            let summary = spectral_summary(&m, None, &[])?;
            let h_x = trace_h(&summary.eigenvalues, |v| v) / (alpha + 1.0);
            Ok((summary.trace / (alpha + 1.0), h_x, m.provenance.captured_mass))
        })
        .collect::<Result<Vec<_>>>()?;
    let captured = rows.iter().filter_map(|r| r.2).fold(f64::INFINITY, f64::min);
    let tags = params!("rho" => p.rho, "N" => n, "window" => p.dense_window, "captured_mass" => captured);
    let mut trend_tags = tags.clone();
    trend_tags.insert("h".into(), json!("x"));
    Ok(vec![
        SweepRecord::new(
            "szego_dense_trace",
            tags,
            "alpha",
            alphas.clone(),
            rows.iter().map(|r| r.0).collect(),
            vec![mass; alphas.len()],
            Rule::AllWithin { tol: 0.01 * mass },
        ),
        SweepRecord::new(
            "szego_dense_trend",
            trend_tags,
            "alpha",
            alphas.clone(),
            rows.iter().map(|r| r.1).collect(),
            vec![mass; alphas.len()],
            Rule::TrendOnly { trend: Trend::StrictlyDecreasing },
        ),
    ])
}

// ---------------------------------------------------------------------------
// Orthogonality relations

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceChoice {
    Bergman,
    Fock,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrthogonalityParams {
    pub space: SpaceChoice,
    pub alpha_list: Vec<f64>,
    pub beta_list: Vec<f64>,
    /// Maximal degree of the random quadruples; 0 gives the constant quadruple.
    pub degree: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for OrthogonalityParams {
    fn default() -> Self {
        Self {
            space: SpaceChoice::Both,
            alpha_list: vec![0.0, 2.5, 10.0],
            beta_list: vec![0.5, 1.0, 3.0],
            degree: 3,
            samples: 5,
            seed: 11,
            tolerance: 1e-7,
        }
    }
}

impl OrthogonalityParams {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.space, SpaceChoice::Bergman | SpaceChoice::Both)
            && (self.alpha_list.is_empty() || self.alpha_list.iter().any(|a| !(*a > -1.0))) {
                return Err(Error::param("orthogonality.alpha_list", "alpha_list must be nonempty with alpha > -1"));
            }
        if matches!(self.space, SpaceChoice::Fock | SpaceChoice::Both)
            && (self.beta_list.is_empty() || self.beta_list.iter().any(|b| !(*b > 0.0))) {
                return Err(Error::param("orthogonality.beta_list", "beta_list must be nonempty with beta > 0"));
            }
        if self.degree > 8 {
            return Err(Error::param("orthogonality.degree", "degree must be at most 8"));
        }
        check_positive("orthogonality.tolerance", self.tolerance)?;
        Ok(())
    }
}

/// Orthonormal coefficients of φ, ψ, g, h.
type Quadruple = [Vec<Complex64>; 4];

/// c ∫∫ ⟨g, U_z φ_θ⟩ ⟨U_z ψ_θ, h⟩ dθ/2π dm(z) from closed-form matrix elements.
pub fn orthogonality_lhs(space: &SpaceParams, q: &Quadruple) -> Result<Complex64> {
    let [phi, psi, g, h] = q;
    let d = q.iter().map(|v| v.len()).max().unwrap_or(1).max(1) - 1;
    let grid = match space.kind() {
        crate::spaces::SpaceKind::Bergman => disc_grid(space.weight(), 4 * d + 4, 8 * d + 8)?,
        crate::spaces::SpaceKind::Fock => plane_grid(space.weight(), 4 * d + 4, 8 * d + 8)?,
    };
    let elem = |z: Complex64, j: usize, k: usize| match space.kind() {
        crate::spaces::SpaceKind::Bergman => u_matrix_element_reduced(space.weight(), z, j, k),
        crate::spaces::SpaceKind::Fock => w_matrix_element_reduced(space.weight(), z, j, k),
    };
    let nq = 2 * d + 1;
    // ⟨U_z w_θ, v⟩ = Σ_{j,k} w_j e^{ijθ} ⟨U_z e_j, e_k⟩ conj(v_k)
    let pairing = |z: Complex64, theta: f64, w: &[Complex64], v: &[Complex64]| {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, wj) in w.iter().enumerate() {
            let rot = Complex64::from_polar(1.0, j as f64 * theta);
            for (k, vk) in v.iter().enumerate() {
                s += wj * rot * elem(z, j, k) * vk.conj();
            }
        }
        s
    };
    let mut acc = ComplexKahanSum::new();
    for (z, w) in grid.nodes.iter().zip(&grid.weights) {
        for i in 0..nq {
            let t = 2.0 * PI * i as f64 / nq as f64;
            let a = pairing(*z, t, phi, g).conj();
            let b = pairing(*z, t, psi, h);
            acc.add(a * b * (*w / nq as f64));
        }
    }
    Ok(acc.value())
}

fn orthogonality_rhs(space: &SpaceParams, q: &Quadruple) -> Result<Complex64> {
    let v = |c: &[Complex64]| CoefficientVector::from_orthonormal(*space, c);
    let [phi, psi, g, h] = q;
    Ok(inner_product(&v(g)?, &v(h)?)? * inner_product(&v(psi)?, &v(phi)?)?)
}

fn random_quadruple(rng: &mut ChaCha8Rng, degree: usize) -> Quadruple {
    let mut draw = || -> Vec<Complex64> {
        (0..=degree)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };
    [draw(), draw(), draw(), draw()]
}

/// Orthogonality relations for both families, on fixed and random quadruples.
pub fn orthogonality_suite(p: &OrthogonalityParams) -> Result<Vec<SweepRecord>> {
    p.validate()?;
    let mut spaces = Vec::new();
    if matches!(p.space, SpaceChoice::Bergman | SpaceChoice::Both) {
        for a in &p.alpha_list {
            spaces.push(SpaceParams::bergman(*a)?);
        }
    }
    if matches!(p.space, SpaceChoice::Fock | SpaceChoice::Both) {
        for b in &p.beta_list {
            spaces.push(SpaceParams::fock(*b)?);
        }
    }
    let one = vec![Complex64::new(1.0, 0.0)];
    let mono = |n: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); n + 1];
        v[n] = Complex64::new(1.0, 0.0);
        v
    };
    let mut out = Vec::new();
    for space in spaces {
        let tag = if space.is_bergman() { "bergman_orthogonality" } else { "fock_orthogonality" };
        let mut fixed: Vec<(&str, Quadruple)> = vec![("all_one", [one.clone(), one.clone(), one.clone(), one.clone()])];
        if p.degree >= 1 {
            fixed.push(("orthogonal_gh", [one.clone(), one.clone(), mono(0), mono(1)]));
            fixed.push(("orthogonal_windows", [mono(1), mono(0), mono(1), mono(1)]));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed ^ space.weight().to_bits());
        let mut quads = fixed;
        if p.degree >= 1 {
            for _ in 0..p.samples {
                quads.push(("random", random_quadruple(&mut rng, p.degree)));
            }
        }
        let results = quads
            .par_iter()
            .map(|(_, q)| Ok((orthogonality_lhs(&space, q)?, orthogonality_rhs(&space, q)?)))
            .collect::<Result<Vec<_>>>()?;
        for (part, pick) in [("re", 0usize), ("im", 1)] {
            let get = |z: &Complex64| if pick == 0 { z.re } else { z.im };
            out.push(SweepRecord::new(
                tag,
                params!(
                    "space" => space.label(),
                    "part" => part,
                    "degree" => p.degree,
                    "seed" => p.seed,
                    "cases" => quads.iter().map(|(n, _)| *n).collect::<Vec<_>>()
                ),
                "case",
                (0..quads.len()).map(|i| i as f64).collect(),
                results.iter().map(|(l, _)| get(l)).collect(),
                results.iter().map(|(_, r)| get(r)).collect(),
                Rule::AllWithin { tol: p.tolerance },
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Berezin transform

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BerezinParams {
    pub alpha_list: Vec<f64>,
    /// Windows as α=0 coefficient lists.
    pub windows: Vec<Vec<f64>>,
    /// Named disc profiles.
    pub symbols: Vec<String>,
    pub p_list: Vec<f64>,
    pub inner_orders: (usize, usize),
    pub outer_orders: (usize, usize),
}

impl Default for BerezinParams {
    fn default() -> Self {
        Self {
            alpha_list: vec![10.0, 40.0, 160.0],
            windows: vec![vec![1.0], vec![0.0, 1.0]],
            symbols: vec!["boundary2".into(), "bump".into()],
            p_list: vec![1.0, 2.0],
            inner_orders: (48, 48),
            outer_orders: (48, 8),
        }
    }
}

impl BerezinParams {
    pub fn validate(&self) -> Result<()> {
        check_increasing("berezin.alpha_list", &self.alpha_list)?;
        if self.alpha_list[0] <= -1.0 {
            return Err(Error::param("berezin.alpha_list", "alpha must exceed -1"));
        }
        if self.windows.is_empty() || self.windows.iter().any(|w| w.is_empty() || w.iter().all(|c| *c == 0.0)) {
            return Err(Error::param("berezin.windows", "windows must be nonempty nonzero coefficient lists"));
        }
        if self.symbols.is_empty() {
            return Err(Error::param("berezin.symbols", "symbols must be nonempty"));
        }
        for s in &self.symbols {
            if named_profile(s, SymbolDomain::Disc).is_none() {
                return Err(Error::param("berezin.symbols", format!("unknown disc profile {s}")));
            }
        }
        for p in &self.p_list {
            LpExponent::from_f64(*p).map_err(|_| Error::param("berezin.p_list", format!("{p} must be 1, 2 or inf")))?;
        }
        let (a, b) = self.inner_orders;
        let (c, d) = self.outer_orders;
        if a == 0 || b == 0 || c == 0 || d == 0 {
            return Err(Error::param("berezin.inner_orders", "grid orders must be positive"));
        }
        Ok(())
    }
}

fn window_label(w: &[f64]) -> String {
    let parts: Vec<String> = w.iter().map(|c| format!("{c}")).collect();
    format!("[{}]", parts.join(","))
}

/// Distance sweeps in α, plus contraction, positivity, mass and the classical value.
pub fn berezin_suite(p: &BerezinParams) -> Result<Vec<SweepRecord>> {
    p.validate()?;
    let mut out = Vec::new();
    let alphas = p.alpha_list.clone();
    for wc in &p.windows {
        let base = CoefficientVector::from_real(SpaceParams::bergman(0.0)?, wc)?.normalized()?;
        for name in &p.symbols {
            let prof = named_profile(name, SymbolDomain::Disc).ok_or_else(|| Error::Unsupported(name.clone()))?;
            let symbol = SymbolSpec::radial(SymbolDomain::Disc, prof)?;
            for &pv in &p.p_list {
                let exp = LpExponent::from_f64(pv)?;
                let computed = alphas
                    .iter()
                    .map(|&a| {
                        let req = BerezinRequest::new(a, v_alpha_transform(&base, a)?, symbol.clone(), vec![])?;
                        berezin_lp_distance(
                            &req,
                            exp,
                            &disc_grid(a, p.inner_orders.0, p.inner_orders.1)?,
                            &mobius_grid(0.0, p.outer_orders.0, p.outer_orders.1)?,
                            1,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                let rule = match exp {
                    LpExponent::Infinity => Rule::TrendOnly { trend: Trend::Any },
                    _ => Rule::TrendOnly { trend: Trend::StrictlyDecreasing },
                };
                let rec = SweepRecord::new(
                    "berezin_distance",
                    params!("window" => window_label(wc), "symbol" => name, "p" => exp.label()),
                    "alpha",
                    alphas.clone(),
                    computed,
                    vec![0.0; alphas.len()],
                    rule,
                );
                out.push(match exp {
                    LpExponent::Infinity => rec.with_note("p = inf is reported but not gated; the convergence statement needs p < inf"),
                    _ => rec,
                });
            }
            out.extend(berezin_invariants(&base, wc, name, &symbol, &alphas, p)?);
        }
    }
    let classical: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            let one = CoefficientVector::constant(SpaceParams::bergman(a)?, Complex64::new(1.0, 0.0));
            let sq = SymbolSpec::general(
                SymbolDomain::Disc,
                GeneralSymbol::new("abs_sq", 1.0, false, true, None, |_, w| Complex64::new(w.norm_sqr(), 0.0)),
            )?;
            let k = BerezinKernel::new(a, &one, &disc_grid(a, 16, 8)?, 1)?;
            Ok(k.apply(&sq, 0.0, Complex64::new(0.0, 0.0)))
        })
        .collect::<Result<_>>()?;
    out.push(SweepRecord::new(
        "berezin_classical_value",
        params!("symbol" => "abs_sq", "window" => "[1]", "z" => 0),
        "alpha",
        alphas.clone(),
        classical,
        alphas.iter().map(|a| 1.0 / (a + 2.0)).collect(),
        Rule::AllWithin { tol: 1e-8 },
    ));
    Ok(out)
}

fn berezin_invariants(
    base: &CoefficientVector,
    wc: &[f64],
    name: &str,
    symbol: &SymbolSpec,
    alphas: &[f64],
    p: &BerezinParams,
) -> Result<Vec<SweepRecord>> {
    let rows = alphas
        .par_iter()
        .map(|&a| {
            let psi = v_alpha_transform(base, a)?;
            let kernel = BerezinKernel::new(a, &psi, &disc_grid(a, p.inner_orders.0, p.inner_orders.1)?, 1)?;
            let outer = mobius_grid(0.0, 2 * p.outer_orders.0, 1)?;
            let mut mass = KahanSum::new();
            let mut sup: f64 = 0.0;
            let mut low: f64 = f64::INFINITY;
            for (z, w) in outer.nodes.iter().zip(&outer.weights) {
                let b = kernel.apply(symbol, 0.0, *z);
                mass.add(w * b);
                sup = sup.max(b.abs());
                low = low.min(b);
            }
            Ok((sup, low, mass.value()))
        })
        .collect::<Result<Vec<_>>>()?;
    let sup_f = symbol.sup_norm();
    let l1 = symbol.l1_norm()?;
    let tags = params!("window" => window_label(wc), "symbol" => name);
    Ok(vec![
        SweepRecord::new(
            "berezin_contraction",
            tags.clone(),
            "alpha",
            alphas.to_vec(),
            rows.iter().map(|r| r.0).collect(),
            vec![sup_f; alphas.len()],
            Rule::AtMostTarget { slack: 1e-8 },
        ),
        SweepRecord::new(
            "berezin_positivity",
            tags.clone(),
            "alpha",
            alphas.to_vec(),
            rows.iter().map(|r| -r.1).collect(),
            vec![0.0; alphas.len()],
            Rule::AtMostTarget { slack: 1e-10 },
        ),
        SweepRecord::new(
            "berezin_mass",
            tags,
            "alpha",
            alphas.to_vec(),
            rows.iter().map(|r| r.2).collect(),
            vec![l1; alphas.len()],
            Rule::AllWithin { tol: 1e-4 * l1.max(1.0) },
        ),
    ])
}
