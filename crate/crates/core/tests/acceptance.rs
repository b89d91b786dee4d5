//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest harness so every
//! line is printed even when an earlier criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use locop::experiments::{
    berezin_suite, limit_suite, orthogonality_suite, sharp_bound_suite, szego_suite, BerezinParams, LimitParams,
    OrthogonalityParams, SharpBoundParams, SweepRecord, SzegoParams,
};
use locop::geometry::GroupElement;
use locop::operators::{
    localization_matrix, spectral_summary, toeplitz_matrix, GeneralSymbol, SymbolDomain, SymbolSpec,
};
use locop::quadrature::{disc_grid_restricted, plane_grid_restricted};
use locop::spaces::{CoefficientVector, SpaceParams};
use locop::special::{reg_inc_beta, reg_inc_gamma_p};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn find<'a>(recs: &'a [SweepRecord], tag: &str, key: &str, value: serde_json::Value) -> &'a SweepRecord {
    recs.iter()
        .find(|r| r.theorem_tag == tag && r.parameters.get(key) == Some(&value))
        .unwrap_or_else(|| panic!("no {tag} record with {key}={value}"))
}

fn last_err(r: &SweepRecord) -> f64 {
    *r.errors.last().unwrap()
}

fn strictly_decreasing(e: &[f64]) -> bool {
    e.windows(2).all(|w| w[1] < w[0])
}

fn c1_group_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut assoc, mut ident, mut inv, mut hom) = (0f64, 0f64, 0f64, 0f64);
    let e = GroupElement::identity();
    for _ in 0..1000 {
        let g = GroupElement::sample(&mut rng, 0.9);
        let h = GroupElement::sample(&mut rng, 0.9);
        let k = GroupElement::sample(&mut rng, 0.9);
        assoc = assoc.max(g.compose(&h).compose(&k).distance(&g.compose(&h.compose(&k))));
        ident = ident.max(g.compose(&e).distance(&g)).max(e.compose(&g).distance(&g));
        inv = inv
            .max(g.compose(&g.inverse()).distance(&e))
            .max(g.inverse().compose(&g).distance(&e));
        let z = Complex64::from_polar(0.9 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI));
        hom = hom.max((g.compose(&h).mobius_eval(z) - g.mobius_eval(h.mobius_eval(z))).norm());
    }
    let worst = assoc.max(ident).max(inv).max(hom);
    check(
        worst <= 1e-12,
        format!("associativity {assoc:.1e}, identity {ident:.1e}, inverse {inv:.1e}, homomorphism {hom:.1e} (limit 1e-12)"),
    )
}

fn all_pass(recs: &[SweepRecord]) -> Outcome {
    let failed: Vec<String> = recs.iter().filter(|r| !r.passed()).map(|r| r.summary_line()).collect();
    check(failed.is_empty(), if failed.is_empty() { format!("{} records pass", recs.len()) } else { failed.join("; ") })
}

fn c2_orthogonality() -> Outcome {
    let recs = orthogonality_suite(&OrthogonalityParams::default()).map_err(|e| e.to_string())?;
    let worst = recs.iter().flat_map(|r| r.errors.iter().copied()).fold(0.0, f64::max);
    all_pass(&recs).map(|s| format!("{s}, worst |lhs - rhs| {worst:.1e} (limit 1e-7)"))
}

fn c3_diagonal_spectra() -> Outcome {
    let fock = SpaceParams::fock(1.0).unwrap();
    let ind = SymbolSpec::disc_indicator(SymbolDomain::Plane, 1.0).unwrap();
    let m = toeplitz_matrix(&fock, &ind, 40, &plane_grid_restricted(1.0, 1.0, 36, 88, 4).unwrap()).unwrap();
    let ev = spectral_summary(&m, None, &[]).unwrap().eigenvalues;
    let fock_err = (0..40)
        .map(|n| (ev[n] - reg_inc_gamma_p(n as f64 + 1.0, 1.0).unwrap()).abs())
        .fold(0.0, f64::max);
    let gamma0 = ev[0];

    let berg = SpaceParams::bergman(2.0).unwrap();
    let ind = SymbolSpec::disc_indicator(SymbolDomain::Disc, 0.5).unwrap();
    let m = toeplitz_matrix(&berg, &ind, 40, &disc_grid_restricted(2.0, 0.5, 36, 88, 4).unwrap()).unwrap();
    let ev = spectral_summary(&m, None, &[]).unwrap().eigenvalues;
    let berg_err = (0..40)
        .map(|n| (ev[n] - reg_inc_beta(0.25, n as f64 + 1.0, 3.0).unwrap()).abs())
        .fold(0.0, f64::max);
    check(
        fock_err <= 1e-10 && berg_err <= 1e-10 && (gamma0 - 0.6321206).abs() < 1e-7,
        format!("Fock vs P(n+1,1) {fock_err:.1e}, gamma_0 = {gamma0:.7}; Bergman vs I_x(n+1,3) {berg_err:.1e} (limit 1e-10)"),
    )
}

fn random_unit_window(rng: &mut ChaCha8Rng, space: SpaceParams) -> CoefficientVector {
    let deg = rng.gen_range(0..3usize);
    let b: Vec<Complex64> = (0..=deg).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    CoefficientVector::from_orthonormal(space, &b).unwrap().normalized().unwrap()
}

fn c4_norm_bound_positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_gap, mut worst_min) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut min_mass, mut max_mass) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..20 {
        let bergman = i % 2 == 0;
        let (space, domain, radius) = if bergman {
            (SpaceParams::bergman(rng.gen_range(0.0..4.0)).unwrap(), SymbolDomain::Disc, rng.gen_range(0.3..0.8))
        } else {
            (SpaceParams::fock(rng.gen_range(0.5..2.0)).unwrap(), SymbolDomain::Plane, rng.gen_range(0.5..2.5))
        };
        let amp = rng.gen_range(0.5..2.0);
        let k = rng.gen_range(1..4) as f64;
        let shift = rng.gen_range(0.0..2.0 * PI);
        let kind = i % 4;
        let symbol = match kind {
            0 => SymbolSpec::disc_indicator(domain, radius).unwrap(),
            1 => SymbolSpec::general(
                domain,
                GeneralSymbol::new("angular", amp, false, true, Some(radius), move |_, z| {
                    let v = if z.norm() < radius { amp * (1.0 + (k * z.arg() + shift).cos()) / 2.0 } else { 0.0 };
                    Complex64::new(v, 0.0)
                }),
            )
            .unwrap(),
            2 => SymbolSpec::general(
                domain,
                GeneralSymbol::new("theta_angular", amp, true, true, Some(radius), move |t, z| {
                    let v = if z.norm() < radius { amp * (1.0 + (t + k * z.arg() + shift).cos()) / 2.0 } else { 0.0 };
                    Complex64::new(v, 0.0)
                }),
            )
            .unwrap(),
            _ => SymbolSpec::general(
                domain,
                GeneralSymbol::new("signed", amp, false, true, Some(radius), move |_, z| {
                    let v = if z.norm() < radius { amp * (k * z.arg() + shift).cos() } else { 0.0 };
                    Complex64::new(v, 0.0)
                }),
            )
            .unwrap(),
        };
        let phi = random_unit_window(&mut rng, space);
        let psi = if kind == 3 { random_unit_window(&mut rng, space) } else { phi.clone() };
        let grid = if bergman {
            disc_grid_restricted(space.weight(), radius, 24, 72, 4).unwrap()
        } else {
            plane_grid_restricted(space.weight(), radius, 24, 72, 4).unwrap()
        };
        let theta_nodes = if kind == 2 { 9 } else { 1 };
        let m = localization_matrix(&space, &symbol, &phi, &psi, 12, theta_nodes, &grid).unwrap();
        let mass = m.provenance.captured_mass.unwrap_or(f64::NAN);
        min_mass = min_mass.min(mass);
        max_mass = max_mass.max(mass);
        let s = spectral_summary(&m, None, &[]).unwrap();
        worst_gap = worst_gap.max(s.op_norm - symbol.sup_norm());
        if kind != 3 {
            worst_min = worst_min.min(s.min_eigenvalue());
        }
    }
    // captured mass is a fraction of ||U psi||^2; above 1 would break Bessel's inequality
    let mass_ok = min_mass > 0.0 && max_mass <= 1.0 + 1e-10;
    check(
        worst_gap <= 1e-6 && worst_min >= -1e-8 && mass_ok,
        format!(
            "max(op_norm - sup|f|) {worst_gap:.2e} (limit 1e-6), min eigenvalue for f >= 0, phi = psi {worst_min:.2e} (limit -1e-8), captured mass in [{min_mass:.4}, {max_mass:.12}]"
        ),
    )
}

fn c5_sharp_bounds() -> Outcome {
    let recs = sharp_bound_suite(&SharpBoundParams::default()).map_err(|e| e.to_string())?;
    let fock = recs.iter().find(|r| r.theorem_tag == "fock_sharp_bound_equality").unwrap();
    let i = fock.abscissa.iter().position(|r| *r == 1.0).unwrap();
    let fock_gap = (fock.computed[i] - (1.0 - (-1f64).exp())).abs();
    let berg = find(&recs, "bergman_sharp_bound", "symbol", "disc_indicator(0.5)".into());
    let j = berg.abscissa.iter().position(|a| *a == 2.0).unwrap();
    let berg_gap = (berg.computed[j] - (1.0 - (4.0f64 / 3.0).powi(-3))).abs();
    all_pass(&recs).and_then(|s| {
        check(
            fock_gap <= 1e-10 && berg_gap <= 1e-8,
            format!("{s}; Fock R=1 norm vs 1-e^-1 {fock_gap:.1e}; Bergman alpha=2 disc of mass 1/3 gap {berg_gap:.1e}"),
        )
    })
}

fn c6_limits() -> Outcome {
    let recs = limit_suite(&LimitParams::default()).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut ok = true;
    for f in ["gaussian", "abs_sq_gaussian", "abs_fourth_gaussian"] {
        let r = find(&recs, "measure_limit", "function", f.into());
        ok &= strictly_decreasing(&r.errors) && last_err(r) <= 1e-2;
        notes.push(format!("{f} {:.1e}", last_err(r)));
    }
    let worst_diag = (0..=8)
        .map(|n| {
            let r = find(&recs, "diagonal_limit", "n", n.into());
            ok &= strictly_decreasing(&r.errors);
            last_err(r)
        })
        .fold(0.0, f64::max);
    ok &= worst_diag <= 1e-2;
    let far = limit_suite(&LimitParams { sigma: 2.0, r_list: vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0], window_cap: 0.0, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let formula = far.iter().find(|r| r.theorem_tag == "norm_formula_limit").unwrap();
    let formula_err = last_err(formula);
    ok &= formula_err <= 2e-3 && *formula.abscissa.last().unwrap() == 100.0;
    check(
        ok,
        format!(
            "measure limits at r=32: {}; diagonal n<=8 at r=32 {worst_diag:.1e}; norm formula r=100 sigma=2 {formula_err:.1e} (limits 1e-2, 1e-2, 2e-3)",
            notes.join(", ")
        ),
    )
}

fn c7_szego() -> Outcome {
    let p = SzegoParams::default();
    let recs = szego_suite(&p).map_err(|e| e.to_string())?;
    let third = 1.0 / 3.0;
    let mut parts = Vec::new();
    let mut ok = true;
    for h in ["x", "x2", "x3"] {
        let r = find(&recs, "szego_trace", "h", h.into());
        let i = r.abscissa.iter().position(|a| *a == 1000.0).unwrap();
        let rel = (r.computed[i] - r.target[i]).abs() / r.target[i];
        ok &= rel <= 0.02;
        parts.push(format!("h={h} {:.2}%", 100.0 * rel));
    }
    for d in [0.3, 0.5, 0.7] {
        let r = find(&recs, "szego_count", "delta", d.into());
        let i = r.abscissa.iter().position(|a| *a == 2000.0).unwrap();
        let rel = (r.computed[i] - third).abs() / third;
        ok &= rel <= 0.02;
        parts.push(format!("count delta={d} {:.2}%", 100.0 * rel));
    }
    let norm = recs.iter().find(|r| r.theorem_tag == "szego_norm").unwrap();
    let i = norm.abscissa.iter().position(|a| *a == 2000.0).unwrap();
    let norm_value = norm.computed[i];
    ok &= norm_value >= 0.99;
    let defect = recs.iter().find(|r| r.theorem_tag == "szego_defect").unwrap();
    let i = defect.abscissa.iter().position(|a| *a == 1000.0).unwrap();
    let defect_ok = strictly_decreasing(&defect.errors[..=i]) && defect.errors[i] <= 0.02;
    ok &= defect_ok;
    let dense = recs.iter().find(|r| r.theorem_tag == "szego_dense_trend").unwrap();
    let dense_trace = recs.iter().find(|r| r.theorem_tag == "szego_dense_trace").unwrap();
    let dense_mass = dense_trace.parameters["captured_mass"].as_f64().unwrap_or(f64::NAN);
    ok &= dense.passed() && dense_trace.passed() && dense.abscissa.contains(&40.0);
    ok &= dense_mass > 0.0 && dense_mass <= 1.0 + 1e-10;
    check(
        ok,
        format!(
            "alpha=1000 traces and alpha=2000 counts: {}; norm {:.6}; defect {:.4}; dense psi=e_1 trend {}, captured mass {:.6} (limits 2%, 0.99, 2%)",
            parts.join(", "),
            norm_value,
            defect.computed[i],
            if dense.passed() { "holds" } else { "broken" },
            dense_mass
        ),
    )
}

fn c8_berezin() -> Outcome {
    let recs = berezin_suite(&BerezinParams::default()).map_err(|e| e.to_string())?;
    let distances = recs.iter().filter(|r| r.theorem_tag == "berezin_distance").count();
    all_pass(&recs).map(|s| format!("{s}; {distances} distance sweeps strictly decreasing over alpha in (10, 40, 160)"))
}

fn run_cli(out: &Path, args: &[&str]) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_locop"))
        .args(["run"])
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn locop");
    assert!(status.status.success(), "locop {args:?} failed: {}", String::from_utf8_lossy(&status.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c9_determinism() -> Outcome {
    let mut compared = 0;
    for args in [
        &["orthogonality", "--space", "bergman", "--alpha", "2.5", "--samples", "4", "--seed", "17"][..],
        &["sharp-bounds", "--alpha", "0,2", "--random-polys", "5", "--seed", "17"][..],
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let fa = run_cli(a.path(), args);
        let fb = run_cli(b.path(), args);
        if fa != fb {
            return Err(format!("outputs differ for {args:?}"));
        }
        compared += fa.iter().filter(|(n, _)| n.ends_with(".csv")).count();
    }
    Ok(format!("{compared} CSV files byte-identical across repeated runs"))
}

/// Name, check and runtime budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 group axioms", c1_group_axioms, Duration::from_secs(1)),
        ("2 orthogonality relations", c2_orthogonality, Duration::from_secs(60)),
        ("3 diagonal spectra", c3_diagonal_spectra, Duration::from_secs(60)),
        ("4 norm bound and positivity", c4_norm_bound_positivity, Duration::from_secs(60)),
        ("5 sharp bounds", c5_sharp_bounds, Duration::from_secs(60)),
        ("6 Bergman to Fock limits", c6_limits, Duration::from_secs(120)),
        ("7 eigenvalue distribution", c7_szego, Duration::from_secs(300)),
        ("8 Berezin transform", c8_berezin, Duration::from_secs(300)),
        ("9 determinism", c9_determinism, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (name, f, budget) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = t.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > budget => Err(format!("{d}; runtime {:.1}s over budget {}s", elapsed.as_secs_f64(), budget.as_secs())),
            o => o,
        };
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d} [{:.1}s]", elapsed.as_secs_f64()),
            Err(d) => {
                failures += 1;
                println!("FAIL criterion {name}: {d} [{:.1}s]", elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {}/9 criteria pass", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
