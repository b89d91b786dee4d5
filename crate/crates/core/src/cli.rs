//! Command-line front end: `locop run <command>`.
//!
//! Parameters resolve in order: built-in defaults, the command's section of the `--config`
//! TOML file, the file's top-level `seed`, then flags.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    berezin_suite, limit_suite, orthogonality_suite, sharp_bound_suite, szego_suite, write_records_csv, BerezinParams,
    LimitParams, OrthogonalityParams, Rule, SharpBoundParams, SpaceChoice, SweepRecord, SzegoParams, TOLERANCE_NOTE,
};
use crate::operators::{
    localization_matrix, named_profile, profile_names, radial_toeplitz_diagonal, spectral_summary, toeplitz_matrix,
    SpectralSummary, SymbolDomain, SymbolSpec,
};
use crate::quadrature::{disc_grid, disc_grid_restricted, plane_grid, plane_grid_restricted, QuadratureGrid};
use crate::spaces::{CoefficientVector, SpaceParams};

/// Worker-count environment variable.
pub const WORKERS_ENV: &str = "LOCOP_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "locop", version, about = "Localization and Toeplitz operators on Bergman and Fock spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub action: Action,
}

#[derive(Debug, Subcommand)]
pub enum Action {
    /// Run a verification suite or an ad-hoc operator computation.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with a section per command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

/// Comma-separated float list; the empty string is the empty list.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

fn parse_float_list(s: &str) -> std::result::Result<FloatList, String> {
    if s.trim().is_empty() {
        return Ok(FloatList(vec![]));
    }
    s.split(',')
        .map(|t| match t.trim() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            t => t.parse::<f64>().map_err(|e| format!("`{t}`: {e}")),
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(FloatList)
}

fn parse_space_choice(s: &str) -> std::result::Result<SpaceChoice, String> {
    match s {
        "bergman" => Ok(SpaceChoice::Bergman),
        "fock" => Ok(SpaceChoice::Fock),
        "both" => Ok(SpaceChoice::Both),
        _ => Err(format!("unknown space `{s}` (bergman, fock, both)")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orthogonality relations on A²_α and F²_β.
    Orthogonality(OrthogonalityFlags),
    /// Bergman to Fock limits as r grows.
    Limits(LimitFlags),
    /// Sharp Toeplitz norm bounds and the concentration inequality.
    SharpBounds(SharpBoundFlags),
    /// Eigenvalue distribution of localization operators as α grows.
    Szego(SzegoFlags),
    /// Windowed Berezin transform convergence and invariants.
    Berezin(BerezinFlags),
    /// Spectrum of a truncated Toeplitz matrix.
    ToeplitzSpectrum(ToeplitzFlags),
    /// Truncated localization matrix and its spectrum.
    LocalizationMatrix(LocalizationFlags),
}

#[derive(Debug, Args)]
pub struct OrthogonalityFlags {
    /// bergman, fock or both
    #[arg(long, value_parser = parse_space_choice)]
    pub space: Option<SpaceChoice>,
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    #[arg(long, value_parser = parse_float_list)]
    pub beta: Option<FloatList>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LimitFlags {
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "r-list", value_parser = parse_float_list)]
    pub r_list: Option<FloatList>,
    #[arg(long)]
    pub n_max: Option<usize>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub window_cap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SharpBoundFlags {
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, value_parser = parse_float_list)]
    pub disc_radii: Option<FloatList>,
    #[arg(long, value_parser = parse_float_list)]
    pub plane_radii: Option<FloatList>,
    #[arg(long)]
    pub random_polys: Option<usize>,
    #[arg(long)]
    pub equality_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SzegoFlags {
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    #[arg(long, value_parser = parse_float_list)]
    pub count_alpha: Option<FloatList>,
    #[arg(long, value_parser = parse_float_list)]
    pub delta: Option<FloatList>,
    /// Window of the dense check: `1` (fast path only), `eK`, or α=0 coefficients `c0,c1,..`.
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long, value_parser = parse_float_list)]
    pub dense_alpha: Option<FloatList>,
    #[arg(long)]
    pub dense_n: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BerezinFlags {
    #[arg(long, value_parser = parse_float_list)]
    pub alpha: Option<FloatList>,
    /// Repeatable: `1`, `eK`, or α=0 coefficients `c0,c1,..`.
    #[arg(long)]
    pub window: Vec<String>,
    /// Comma-separated named disc profiles.
    #[arg(long)]
    pub symbol: Option<String>,
    /// Comma-separated exponents from 1, 2, inf.
    #[arg(long, value_parser = parse_float_list)]
    pub p: Option<FloatList>,
}

/// Space of an ad-hoc operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorSpace {
    Bergman,
    Fock,
}

fn parse_operator_space(s: &str) -> std::result::Result<OperatorSpace, String> {
    match s {
        "bergman" => Ok(OperatorSpace::Bergman),
        "fock" => Ok(OperatorSpace::Fock),
        _ => Err(format!("unknown space `{s}` (bergman, fock)")),
    }
}

#[derive(Debug, Args)]
pub struct ToeplitzFlags {
    #[arg(long, value_parser = parse_operator_space)]
    pub space: Option<OperatorSpace>,
    /// α for Bergman, β for Fock.
    #[arg(long)]
    pub weight: Option<f64>,
    /// `indicator:R`, `constant:c` or a profile name.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_float_list)]
    pub delta: Option<FloatList>,
}

#[derive(Debug, Args)]
pub struct LocalizationFlags {
    #[arg(long, value_parser = parse_operator_space)]
    pub space: Option<OperatorSpace>,
    #[arg(long)]
    pub weight: Option<f64>,
    #[arg(long)]
    pub symbol: Option<String>,
    /// Orthonormal-basis coefficients of φ.
    #[arg(long, value_parser = parse_float_list)]
    pub phi: Option<FloatList>,
    /// Orthonormal-basis coefficients of ψ.
    #[arg(long, value_parser = parse_float_list)]
    pub psi: Option<FloatList>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_float_list)]
    pub delta: Option<FloatList>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToeplitzParams {
    pub space: OperatorSpace,
    pub weight: f64,
    pub symbol: String,
    pub n: usize,
    pub deltas: Vec<f64>,
}

impl Default for ToeplitzParams {
    fn default() -> Self {
        Self {
            space: OperatorSpace::Fock,
            weight: 1.0,
            symbol: "indicator:1".into(),
            n: 40,
            deltas: vec![0.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalizationParams {
    pub space: OperatorSpace,
    pub weight: f64,
    pub symbol: String,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub n: usize,
    pub deltas: Vec<f64>,
}

impl Default for LocalizationParams {
    fn default() -> Self {
        Self {
            space: OperatorSpace::Bergman,
            weight: 0.0,
            symbol: "indicator:0.5".into(),
            phi: vec![0.0, 1.0],
            psi: vec![0.0, 1.0],
            n: 20,
            deltas: vec![0.5],
        }
    }
}

/// Config file layout.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub orthogonality: Option<OrthogonalityParams>,
    pub limits: Option<LimitParams>,
    pub sharp_bounds: Option<SharpBoundParams>,
    pub szego: Option<SzegoParams>,
    pub berezin: Option<BerezinParams>,
    pub toeplitz_spectrum: Option<ToeplitzParams>,
    pub localization_matrix: Option<LocalizationParams>,
}

/// Fully resolved parameters of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolved {
    Orthogonality(OrthogonalityParams),
    Limits(LimitParams),
    SharpBounds(SharpBoundParams),
    Szego(SzegoParams),
    Berezin(BerezinParams),
    ToeplitzSpectrum(ToeplitzParams),
    LocalizationMatrix(LocalizationParams),
}

impl Resolved {
    pub fn command_name(&self) -> &'static str {
        match self {
            Resolved::Orthogonality(_) => "orthogonality",
            Resolved::Limits(_) => "limits",
            Resolved::SharpBounds(_) => "sharp-bounds",
            Resolved::Szego(_) => "szego",
            Resolved::Berezin(_) => "berezin",
            Resolved::ToeplitzSpectrum(_) => "toeplitz-spectrum",
            Resolved::LocalizationMatrix(_) => "localization-matrix",
        }
    }

    /// Check every parameter against the preconditions of the target operation.
    pub fn validate(&self) -> Result<()> {
        match self {
            Resolved::Orthogonality(p) => p.validate(),
            Resolved::Limits(p) => p.validate(),
            Resolved::SharpBounds(p) => p.validate(),
            Resolved::Szego(p) => p.validate(),
            Resolved::Berezin(p) => p.validate(),
            Resolved::ToeplitzSpectrum(p) => validate_adhoc("toeplitz_spectrum", p.space, p.weight, &p.symbol, p.n),
            Resolved::LocalizationMatrix(p) => {
                validate_adhoc("localization_matrix", p.space, p.weight, &p.symbol, p.n)?;
                for (name, w) in [("phi", &p.phi), ("psi", &p.psi)] {
                    if w.is_empty() || w.iter().all(|c| *c == 0.0) || w.iter().any(|c| !c.is_finite()) {
                        return Err(Error::param(
                            format!("localization_matrix.{name}"),
                            format!("{name} must be a nonzero coefficient list"),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// The resolved config as TOML, the same layout `--config` reads.
    pub fn to_toml(&self) -> Result<String> {
        let body = toml::to_string(self).map_err(|e| Error::Unsupported(format!("config serialization: {e}")))?;
        Ok(body)
    }
}

/// Result of a command run.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<SweepRecord>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed())
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_list(slot: &mut Vec<f64>, v: Option<FloatList>) {
    if let Some(FloatList(v)) = v {
        *slot = v;
    }
}

/// Parse a window spec: `1`, `eK`, or coefficients `c0,c1,..`.
pub fn parse_window(field: &str, s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix('e') {
        let k: usize = k.parse().map_err(|_| Error::param(field, format!("bad window `{s}`")))?;
        let mut v = vec![0.0; k + 1];
        v[k] = 1.0;
        return Ok(v);
    }
    let v = parse_float_list(s).map_err(|e| Error::param(field, e))?.0;
    if v.is_empty() || v.iter().all(|c| *c == 0.0) || v.iter().any(|c| !c.is_finite()) {
        return Err(Error::param(field, format!("window `{s}` must have finite, not all zero coefficients")));
    }
    Ok(v)
}

/// Parse a symbol spec: `indicator:R`, `constant:c`, or a named profile.
pub fn parse_symbol(field: &str, s: &str, domain: SymbolDomain) -> Result<SymbolSpec> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::param(field, format!("bad number in `{s}`")));
    let name = s.strip_prefix("profile:").unwrap_or(s);
    if let Some(r) = s.strip_prefix("indicator:") {
        return SymbolSpec::disc_indicator(domain, num(r)?).map_err(|e| Error::param(field, e.to_string()));
    }
    if let Some(c) = s.strip_prefix("constant:") {
        let c = num(c)?;
        if !c.is_finite() {
            return Err(Error::param(field, "constant must be finite"));
        }
        return Ok(SymbolSpec::constant(domain, c));
    }
    match named_profile(name, domain) {
        Some(p) => SymbolSpec::radial(domain, p),
        None => Err(Error::param(
            field,
            format!("unknown symbol `{s}`; use indicator:R, constant:c or one of {}", profile_names(domain).join(", ")),
        )),
    }
}

fn load_file(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::param("config", format!("{}: {e}", path.display())))?;
    let de = toml::Deserializer::parse(&text).map_err(|e| Error::param("config", format!("{}: {}", path.display(), e.message())))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        Error::param(field, format!("{}: {}", path.display(), e.inner().message()))
    })
}

/// Resolve defaults, file and flags into validated parameters.
pub fn resolve(args: &RunArgs) -> Result<(Resolved, PathBuf)> {
    let file = match &args.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let seed = args.seed.or(file.seed);
    let out = args.out.clone().or(file.out.clone()).unwrap_or_else(|| PathBuf::from("locop-out"));
    let resolved = match &args.command {
        Command::Orthogonality(f) => {
            let mut p = file.orthogonality.unwrap_or_default();
            set(&mut p.space, f.space);
            set_list(&mut p.alpha_list, f.alpha.clone());
            set_list(&mut p.beta_list, f.beta.clone());
            set(&mut p.degree, f.degree);
            set(&mut p.samples, f.samples);
            set(&mut p.tolerance, f.tolerance);
            set(&mut p.seed, seed);
            Resolved::Orthogonality(p)
        }
        Command::Limits(f) => {
            let mut p = file.limits.unwrap_or_default();
            set(&mut p.beta, f.beta);
            set(&mut p.sigma, f.sigma);
            set_list(&mut p.r_list, f.r_list.clone());
            set(&mut p.n_max, f.n_max);
            set(&mut p.radius, f.radius);
            set(&mut p.tolerance, f.tolerance);
            set(&mut p.window_cap, f.window_cap);
            Resolved::Limits(p)
        }
        Command::SharpBounds(f) => {
            let mut p = file.sharp_bounds.unwrap_or_default();
            set_list(&mut p.alpha_list, f.alpha.clone());
            set(&mut p.beta, f.beta);
            set_list(&mut p.disc_radii, f.disc_radii.clone());
            set_list(&mut p.plane_radii, f.plane_radii.clone());
            set(&mut p.random_polys, f.random_polys);
            set(&mut p.equality_tol, f.equality_tol);
            set(&mut p.seed, seed);
            Resolved::SharpBounds(p)
        }
        Command::Szego(f) => {
            let mut p = file.szego.unwrap_or_default();
            set(&mut p.rho, f.rho);
            set_list(&mut p.alpha_list, f.alpha.clone());
            set_list(&mut p.count_alpha_list, f.count_alpha.clone());
            set_list(&mut p.deltas, f.delta.clone());
            set_list(&mut p.dense_alpha_list, f.dense_alpha.clone());
            set(&mut p.dense_n, f.dense_n);
            set(&mut p.rel_tol, f.rel_tol);
            if let Some(w) = &f.window {
                let w = parse_window("szego.dense_window", w)?;
                // ψ = 1 is the diagonal fast path, already covered
                p.dense_window = if w.len() == 1 { vec![] } else { w };
            }
            Resolved::Szego(p)
        }
        Command::Berezin(f) => {
            let mut p = file.berezin.unwrap_or_default();
            set_list(&mut p.alpha_list, f.alpha.clone());
            if !f.window.is_empty() {
                p.windows = f.window.iter().map(|w| parse_window("berezin.windows", w)).collect::<Result<_>>()?;
            }
            if let Some(s) = &f.symbol {
                p.symbols = s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
            }
            set_list(&mut p.p_list, f.p.clone());
            Resolved::Berezin(p)
        }
        Command::ToeplitzSpectrum(f) => {
            let mut p = file.toeplitz_spectrum.unwrap_or_default();
            set(&mut p.space, f.space);
            set(&mut p.weight, f.weight);
            set(&mut p.symbol, f.symbol.clone());
            set(&mut p.n, f.n);
            set_list(&mut p.deltas, f.delta.clone());
            Resolved::ToeplitzSpectrum(p)
        }
        Command::LocalizationMatrix(f) => {
            let mut p = file.localization_matrix.unwrap_or_default();
            set(&mut p.space, f.space);
            set(&mut p.weight, f.weight);
            set(&mut p.symbol, f.symbol.clone());
            set_list(&mut p.phi, f.phi.clone());
            set_list(&mut p.psi, f.psi.clone());
            set(&mut p.n, f.n);
            set_list(&mut p.deltas, f.delta.clone());
            Resolved::LocalizationMatrix(p)
        }
    };
    resolved.validate()?;
    Ok((resolved, out))
}

pub fn space_of(space: OperatorSpace, weight: f64) -> Result<(SpaceParams, SymbolDomain)> {
    Ok(match space {
        OperatorSpace::Bergman => (SpaceParams::bergman(weight)?, SymbolDomain::Disc),
        OperatorSpace::Fock => (SpaceParams::fock(weight)?, SymbolDomain::Plane),
    })
}

fn validate_adhoc(section: &str, space: OperatorSpace, weight: f64, symbol: &str, n: usize) -> Result<()> {
    let (_, domain) = space_of(space, weight).map_err(|e| Error::param(format!("{section}.weight"), e.to_string()))?;
    parse_symbol(&format!("{section}.symbol"), symbol, domain)?;
    if n == 0 || n > 400 {
        return Err(Error::param(format!("{section}.n"), "n must lie in 1..=400"));
    }
    Ok(())
}

/// Grid exact for the truncated entries of compactly supported symbols.
pub fn operator_grid(space: &SpaceParams, symbol: &SymbolSpec, degree: usize) -> Result<QuadratureGrid> {
    let n_ang = 2 * degree + 8;
    match (space.is_bergman(), symbol.support_radius()) {
        (true, Some(r)) if r < 1.0 => disc_grid_restricted(space.weight(), r, degree / 2 + 16, n_ang, 4),
        (true, _) => disc_grid(space.weight(), degree + 64, n_ang),
        (false, Some(r)) => plane_grid_restricted(space.weight(), r, degree / 2 + 16, n_ang, 4),
        (false, None) => plane_grid(space.weight(), degree + 96, n_ang),
    }
}

fn nonnegative(symbol: &SymbolSpec) -> bool {
    let reach = symbol.support_radius().unwrap_or(match symbol.domain {
        SymbolDomain::Disc => 1.0,
        SymbolDomain::Plane => 10.0,
    });
    (0..=2000).all(|i| {
        let rho = reach * i as f64 / 2000.0 * 0.999_999;
        symbol.eval(0.0, Complex64::new(rho, 0.0)).re >= 0.0
    })
}

fn spectrum_records(
    tag_prefix: &str,
    summary: &SpectralSummary,
    bound: f64,
    positive: bool,
    label: &str,
) -> Vec<SweepRecord> {
    let params = |extra: &[(&str, serde_json::Value)]| {
        let mut m = std::collections::BTreeMap::new();
        m.insert("symbol".to_string(), json!(label));
        for (k, v) in extra {
            m.insert(k.to_string(), v.clone());
        }
        m
    };
    let mut out = vec![SweepRecord::new(
        &format!("{tag_prefix}_norm_bound"),
        params(&[]),
        "n",
        vec![summary.eigenvalues.len() as f64],
        vec![summary.op_norm],
        vec![bound],
        Rule::AtMostTarget { slack: 1e-6 },
    )];
    if positive {
        out.push(SweepRecord::new(
            &format!("{tag_prefix}_positivity"),
            params(&[]),
            "n",
            vec![summary.eigenvalues.len() as f64],
            vec![-summary.min_eigenvalue()],
            vec![0.0],
            Rule::AtMostTarget { slack: 1e-8 },
        ));
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Unsupported(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// 64-bit FNV-1a, used to name outputs after their configuration.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ *b as u64).wrapping_mul(0x100_0000_01b3))
}

fn comment_block(config: &str) -> String {
    config.lines().map(|l| format!("# {l}\n")).collect()
}

/// Records of a resolved command plus extra artifacts as (suffix, bytes).
fn compute(resolved: &Resolved, config: &str) -> Result<(Vec<SweepRecord>, Vec<(&'static str, Vec<u8>)>)> {
    let mut extra: Vec<(&'static str, Vec<u8>)> = Vec::new();
    let records = match resolved {
        Resolved::Orthogonality(p) => orthogonality_suite(p)?,
        Resolved::Limits(p) => limit_suite(p)?,
        Resolved::SharpBounds(p) => sharp_bound_suite(p)?,
        Resolved::Szego(p) => szego_suite(p)?,
        Resolved::Berezin(p) => berezin_suite(p)?,
        Resolved::ToeplitzSpectrum(p) => {
            let (space, domain) = space_of(p.space, p.weight)?;
            let symbol = parse_symbol("toeplitz_spectrum.symbol", &p.symbol, domain)?;
            let m = toeplitz_matrix(&space, &symbol, p.n, &operator_grid(&space, &symbol, 2 * p.n)?)?;
            let summary = spectral_summary(&m, None, &p.deltas)?;
            let mut recs = spectrum_records("toeplitz", &summary, symbol.sup_norm(), nonnegative(&symbol), &symbol.label());
            if symbol.is_radial() {
                let mut closed = radial_toeplitz_diagonal(&space, &symbol, p.n)?;
                closed.sort_by(|a, b| b.total_cmp(a));
                let mut params = std::collections::BTreeMap::new();
                params.insert("symbol".to_string(), json!(symbol.label()));
                params.insert("space".to_string(), json!(space.label()));
                recs.push(SweepRecord::new(
                    "toeplitz_diagonal_closed_form",
                    params,
                    "rank",
                    (0..closed.len()).map(|i| i as f64).collect(),
                    summary.eigenvalues.clone(),
                    closed,
                    Rule::AllWithin { tol: 1e-10 },
                ));
            }
            let mut buf = comment_block(config).into_bytes();
            summary.write_csv(&mut buf)?;
            extra.push(("spectrum.csv", buf));
            recs
        }
        Resolved::LocalizationMatrix(p) => {
            let (space, domain) = space_of(p.space, p.weight)?;
            let symbol = parse_symbol("localization_matrix.symbol", &p.symbol, domain)?;
            let to_vec = |c: &[f64]| {
                let b: Vec<Complex64> = c.iter().map(|x| Complex64::new(*x, 0.0)).collect();
                CoefficientVector::from_orthonormal(space, &b)
            };
            let (phi, psi) = (to_vec(&p.phi)?, to_vec(&p.psi)?);
            let degree = 2 * p.n + 2 * phi.degree().max(psi.degree());
            let m = localization_matrix(&space, &symbol, &phi, &psi, p.n, 1, &operator_grid(&space, &symbol, degree)?)?;
            let summary = spectral_summary(&m, None, &p.deltas)?;
            let positive = p.phi == p.psi && nonnegative(&symbol);
            let recs = spectrum_records("localization", &summary, symbol.sup_norm() * phi.norm() * psi.norm(), positive, &symbol.label());
            let mut buf = comment_block(config).into_bytes();
            summary.write_csv(&mut buf)?;
            extra.push(("spectrum.csv", buf));
            extra.push(("matrix.json", m.to_json()?.into_bytes()));
            recs
        }
    };

    Ok((records, extra))
}

/// Records of a resolved command, without writing any files.
pub fn run_records(resolved: &Resolved) -> Result<Vec<SweepRecord>> {
    Ok(compute(resolved, &resolved.to_toml()?)?.0)
}

/// Resolve a command from TOML text in the `--config` layout, without flags.
pub fn resolve_toml(command: &str, text: &str) -> Result<Resolved> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::param("config", e.message().to_string()))?;
    let file: FileConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::param(e.path().to_string(), e.inner().message().to_string()))?;
    let resolved = match command {
        "orthogonality" => Resolved::Orthogonality(file.orthogonality.unwrap_or_default()),
        "limits" => Resolved::Limits(file.limits.unwrap_or_default()),
        "sharp-bounds" => Resolved::SharpBounds(file.sharp_bounds.unwrap_or_default()),
        "szego" => Resolved::Szego(file.szego.unwrap_or_default()),
        "berezin" => Resolved::Berezin(file.berezin.unwrap_or_default()),
        "toeplitz-spectrum" => Resolved::ToeplitzSpectrum(file.toeplitz_spectrum.unwrap_or_default()),
        "localization-matrix" => Resolved::LocalizationMatrix(file.localization_matrix.unwrap_or_default()),
        other => return Err(Error::param("command", format!("unknown command `{other}`"))),
    };
    resolved.validate()?;
    Ok(resolved)
}

/// Run a resolved command, writing artifacts under `out`.
pub fn execute(resolved: &Resolved, out: &Path) -> Result<RunOutcome> {
    let toml_text = resolved.to_toml()?;
    let config = format!("locop run {}\n{toml_text}", resolved.command_name());
    let stem = format!("{}-{:016x}", resolved.command_name(), fnv1a(config.as_bytes()));
    fs::create_dir_all(out).map_err(|e| Error::Unsupported(format!("{}: {e}", out.display())))?;
    let mut files = Vec::new();
    let (records, extra) = compute(resolved, &config)?;

    let mut csv_buf = Vec::new();
    write_records_csv(&records, std::slice::from_ref(&config), &mut csv_buf)?;
    let csv_path = out.join(format!("{stem}.csv"));
    write_atomic(&csv_path, &csv_buf)?;
    files.push(csv_path);

    let verdicts: Vec<_> = records
        .iter()
        .map(|r| json!({"theorem_tag": r.theorem_tag, "parameters": r.parameters, "verdict": r.verdict}))
        .collect();
    let doc = json!({
        "command": resolved.command_name(),
        "config": toml_text,
        "tolerance_note": TOLERANCE_NOTE,
        "pass": records.iter().all(|r| r.passed()),
        "records": verdicts,
    });
    let json_path = out.join(format!("{stem}.verdict.json"));
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Unsupported(e.to_string()))?;
    write_atomic(&json_path, text.as_bytes())?;
    files.push(json_path);

    for (suffix, bytes) in extra {
        let path = out.join(format!("{stem}.{suffix}"));
        write_atomic(&path, &bytes)?;
        files.push(path);
    }
    Ok(RunOutcome { records, files })
}

fn configure_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::param(WORKERS_ENV, format!("`{v}` must be a positive integer")))?;
        // a second call fails harmlessly when the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Entry point shared by the binary; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let Action::Run(run) = cli.action;
    let resolved = configure_workers().and_then(|_| resolve(&run));
    let (resolved, out) = match resolved {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match execute(&resolved, &out) {
        Ok(outcome) => {
            let mut text = String::new();
            for r in &outcome.records {
                let _ = writeln!(text, "{}", r.summary_line());
            }
            let passed = outcome.records.iter().filter(|r| r.passed()).count();
            let _ = writeln!(
                text,
                "{} {}: {passed}/{} records pass",
                if outcome.passed() { "PASS" } else { "FAIL" },
                resolved.command_name(),
                outcome.records.len()
            );
            for f in &outcome.files {
                let _ = writeln!(text, "wrote {}", f.display());
            }
            print!("{text}");
            if outcome.passed() {
                0
            } else {
                1
            }
        }
        Err(e @ Error::InvalidParameter { .. }) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
