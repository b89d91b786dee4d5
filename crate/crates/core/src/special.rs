//! Log-gamma, regularized incomplete gamma and beta functions, log-domain
//! magnitudes and compensated summation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `exp` overflows past roughly 709.78; magnitudes are rejected a little earlier.
pub const OVERFLOW_LOG: f64 = 700.0;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 200_000;

/// ζ(2), ζ(3), …, ζ(30).
const ZETA: [f64; 29] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
];

/// A complex number held as `exp(log_magnitude) · e^{i·phase}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableExponent {
    pub log_magnitude: f64,
    pub phase: f64,
}

impl StableExponent {
    pub fn new(log_magnitude: f64, phase: f64) -> Self {
        Self {
            log_magnitude,
            phase: wrap_phase(phase),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.norm().ln(), z.arg())
    }

    pub fn powf(self, p: f64) -> Self {
        Self::new(self.log_magnitude * p, self.phase * p)
    }

    /// Reconstructs the value, failing if it would overflow.
    pub fn to_complex(self) -> Result<Complex64> {
        if self.log_magnitude > OVERFLOW_LOG {
            return Err(Error::Overflow {
                log_magnitude: self.log_magnitude,
            });
        }
        Ok(Complex64::from_polar(self.log_magnitude.exp(), self.phase))
    }
}

impl std::ops::Mul for StableExponent {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        Self::new(self.log_magnitude + other.log_magnitude, self.phase + other.phase)
    }
}

/// Maps an angle into (−π, π].
pub fn wrap_phase(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let w = (phase + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("log_gamma", format!("x = {x} must be positive")));
    }
    Ok(lgamma(x))
}

/// Unchecked ln Γ(x); callers guarantee x > 0.
pub(crate) fn lgamma(x: f64) -> f64 {
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + HALF_LN_2PI + stirling_correction(x);
    }
    if (x - 1.0).abs() <= 0.5 {
        return lgamma_one_plus(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.5 {
        let e = x - 2.0;
        return lgamma_one_plus(e) + e.ln_1p();
    }
    if x < 0.5 {
        return lgamma(x + 1.0) - x.ln();
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < 10.0 {
        prod *= y;
        y += 1.0;
    }
    lgamma(y) - prod.ln()
}

/// ln Γ(1+e) for |e| ≤ 1/2 from the zeta series.
fn lgamma_one_plus(e: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -e;
    for k in 2..=64i32 {
        pow *= -e;
        let z = match ZETA.get(k as usize - 2) {
            Some(z) => *z,
            None => 1.0 + 2f64.powi(-k) + 3f64.powi(-k) + 4f64.powi(-k),
        };
        sum += z * pow / k as f64;
    }
    sum - EULER_GAMMA * e
}

/// ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π] for x ≥ 10.
pub(crate) fn stirling_correction(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r = 1.0 / (x * x);
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * r + c;
    }
    acc / x
}

/// ln(1 + x) − x, accurate for small |x|.
pub(crate) fn log1pmx(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut pow = x * x;
        let mut sum = 0.0;
        let mut k = 2.0;
        loop {
            let term = pow / k;
            if (k as usize).is_multiple_of(2) {
                sum -= term;
            } else {
                sum += term;
            }
            if term.abs() <= 1e-18 * sum.abs() {
                return sum;
            }
            pow *= x;
            k += 1.0;
        }
    }
    x.ln_1p() - x
}

/// ln Γ(x + d) − ln Γ(x) for x > 0, x + d > 0.
pub(crate) fn ln_gamma_ratio(x: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let y = x + d;
    if x >= 10.0 && y >= 10.0 {
        (x - 0.5) * (d / x).ln_1p() + d * y.ln() - d + stirling_correction(y)
            - stirling_correction(x)
    } else {
        lgamma(y) - lgamma(x)
    }
}

/// ln n! for nonnegative integer n.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    lgamma(n as f64 + 1.0)
}

/// ln C(n, k).
pub(crate) fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn reg_inc_gamma_p(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("reg_inc_gamma_p", format!("a = {a} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("reg_inc_gamma_p", format!("x = {x} must be nonnegative")));
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    gamma_p(a, x)
}

fn ln_gamma_prefactor(a: f64, x: f64) -> f64 {
    if a >= 10.0 {
        a * log1pmx((x - a) / a) + 0.5 * (a / (2.0 * PI)).ln() - stirling_correction(a)
    } else {
        a * x.ln() - x - lgamma(a)
    }
}

pub(crate) fn gamma_p(a: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    let ln_pref = ln_gamma_prefactor(a, x);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 1.0;
        for _ in 0..MAX_ITER {
            term *= x / (a + n);
            sum += term;
            if term < sum * EPS {
                return Ok((ln_pref.exp() * sum).min(1.0));
            }
            n += 1.0;
        }
        Err(Error::Convergence {
            func: "reg_inc_gamma_p",
            detail: format!("series at a = {a}, x = {x}"),
        })
    } else {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                return Ok((1.0 - ln_pref.exp() * h).clamp(0.0, 1.0));
            }
        }
        Err(Error::Convergence {
            func: "reg_inc_gamma_p",
            detail: format!("continued fraction at a = {a}, x = {x}"),
        })
    }
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(
            "reg_inc_beta",
            format!("a = {a}, b = {b} must be positive"),
        ));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("reg_inc_beta", format!("x = {x} outside [0, 1]")));
    }
    inc_beta(x, a, b)
}

fn ln_beta_prefactor(x: f64, a: f64, b: f64) -> f64 {
    if a >= 10.0 && b >= 10.0 {
        let x0 = a / (a + b);
        let d1 = (x - x0) / x0;
        let d2 = (x0 - x) / (1.0 - x0);
        a * log1pmx(d1) + b * log1pmx(d2) + 0.5 * (a * b / (a + b)).ln() - HALF_LN_2PI
            + stirling_correction(a + b)
            - stirling_correction(a)
            - stirling_correction(b)
    } else {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let ln_beta = lgamma(lo) - ln_gamma_ratio(hi, lo);
        a * x.ln() + b * (-x).ln_1p() - ln_beta
    }
}

pub(crate) fn inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        return Ok(1.0 - inc_beta_cf(1.0 - x, b, a)?);
    }
    inc_beta_cf(x, a, b)
}

fn inc_beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let ln_pref = ln_beta_prefactor(x, a, b);
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok((ln_pref.exp() * h / a).clamp(0.0, 1.0));
        }
    }
    Err(Error::Convergence {
        func: "reg_inc_beta",
        detail: format!("continued fraction at x = {x}, a = {a}, b = {b}"),
    })
}

/// Neumaier-compensated real sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated complex sum, componentwise.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
