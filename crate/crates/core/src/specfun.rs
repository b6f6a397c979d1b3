//! Log-gamma, Beta, regularized incomplete Beta and the closed-form
//! normalization constants of the revolution-reduced transforms.
//!
//! Every constant is evaluated from Beta functions, never by quadrature;
//! the quadrature engine is tested against these values.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln(2 pi) / 2
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Switch point from the Lanczos sum to the compensated Stirling series.
const STIRLING_FROM: f64 = 15.0;

const BETA_CF_MAX_ITER: usize = 500;

/// Largest multiplier index tabulated by [`ConstantsTable`].
pub const LAMBDA_TABLE_DEGREE: u32 = 8;

/// Ambient dimension `n` and class index `k` with `n >= 4`, `2 <= k <= n - 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDimPair")]
pub struct DimPair {
    n: u32,
    k: u32,
}

#[derive(Deserialize)]
struct RawDimPair {
    n: u32,
    k: u32,
}

impl TryFrom<RawDimPair> for DimPair {
    type Error = Error;

    fn try_from(raw: RawDimPair) -> Result<Self> {
        DimPair::new(raw.n, raw.k)
    }
}

impl DimPair {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n < 4 {
            return Err(Error::Parameter(format!("dimension n = {n} must be at least 4")));
        }
        if k < 2 || k > n - 2 {
            return Err(Error::Parameter(format!(
                "class index k = {k} must satisfy 2 <= k <= n - 2 = {}",
                n - 2
            )));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// The complementary index `n - k`.
    pub fn co_k(&self) -> u32 {
        self.n - self.k
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
///
/// Lanczos approximation (g = 7, nine coefficients) on `[0.5, 15)`, the
/// reflection formula below that, and a Stirling series with a
/// double-double logarithm from 15 on, where the rounding of
/// `(x - 1/2) ln x` would otherwise dominate the absolute error.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires finite x > 0, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.5 {
        // Gamma(x) Gamma(1 - x) = pi / sin(pi x); sin(pi x) > 0 on (0, 1/2).
        return (PI / (PI * x).sin()).ln() - ln_gamma_pos(1.0 - x);
    }
    if x >= STIRLING_FROM {
        return ln_gamma_stirling(x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // (z + 1/2) ln t - t, regrouped to avoid cancelling two large terms.
    HALF_LN_TWO_PI + (z + 0.5) * (t.ln() - 1.0) - LANCZOS_G + series.ln()
}

/// `B_{2j} / (2j (2j - 1))` for `j = 1..=7`.
const STIRLING_COEFFS: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

/// `ln 2` split so that `e * LN2_HI` is exact for any binary exponent `e`
/// (the high part has 21 trailing zero bits).
const LN2_HI: f64 = f64::from_bits(0x3fe6_2e42_fee0_0000);
const LN2_LO: f64 = f64::from_bits(0x3dea_39ef_3579_3c76);

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `ln x` as an unevaluated sum `hi + lo`, for normal `x > 0`.
fn ln_double_double(x: f64) -> (f64, f64) {
    let bits = x.to_bits();
    let mut e = ((bits >> 52) & 0x7ff) as i64 - 1023;
    let mut m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | 0x3ff0_0000_0000_0000);
    if m > std::f64::consts::SQRT_2 {
        m *= 0.5;
        e += 1;
    }
    // ln m = 2 atanh(u), u = (m - 1)/(m + 1), |u| < 0.18.
    let num = m - 1.0;
    let (den, den_lo) = two_sum(m, 1.0);
    let u = num / den;
    let (p, p_lo) = two_prod(u, den);
    let u_lo = ((num - p) - p_lo - u * den_lo) / den;
    let u2 = u * u;
    let mut odd = 0.0;
    for j in (1..=12).rev() {
        odd = odd * u2 + 1.0 / (2 * j + 1) as f64;
    }
    let ef = e as f64;
    let (hi, lo) = two_sum(ef * LN2_HI, 2.0 * u);
    two_sum(hi, lo + ef * LN2_LO + 2.0 * u_lo + 2.0 * u * u2 * odd)
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let (l_hi, l_lo) = ln_double_double(x);
    let a = x - 0.5;
    let (p, p_lo) = two_prod(a, l_hi);
    let (s, s_lo) = two_sum(p, -x);
    let r = x.recip();
    let r2 = r * r;
    let series = STIRLING_COEFFS.iter().rev().fold(0.0, |acc, c| acc * r2 + c) * r;
    s + (s_lo + p_lo + a * l_lo + HALF_LN_TWO_PI + series)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and positive, got {v}")));
    }
    Ok(())
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Ok(ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b))
}

/// The Beta function `B(a, b)`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta(a, b)?.exp())
}

/// `ln C(n, j)` through log-gamma; usable far beyond the range where the
/// binomial coefficient itself fits in an `f64`.
pub fn ln_binomial(n: usize, j: usize) -> f64 {
    debug_assert!(j <= n);
    if j == 0 || j == n {
        return 0.0;
    }
    ln_gamma_pos(n as f64 + 1.0) - ln_gamma_pos(j as f64 + 1.0) - ln_gamma_pos((n - j) as f64 + 1.0)
}

/// The binomial coefficient `C(n, j)` as an `f64`: exact integer arithmetic
/// while it fits in 128 bits, log-gamma beyond that.
pub fn binomial(n: usize, j: usize) -> f64 {
    debug_assert!(j <= n);
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => return ln_binomial(n, j).exp(),
        }
    }
    acc as f64
}

/// Regularized incomplete Beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("reg_inc_beta requires 0 <= x <= 1, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        Ok(1.0 - inc_beta_cf(1.0 - x, b, a)?)
    } else {
        inc_beta_cf(x, a, b)
    }
}

/// Continued fraction for `I_x(a, b)` evaluated with the modified Lentz method.
fn inc_beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let ln_prefix = a * x.ln() + b * (-x).ln_1p() - (ln_gamma_pos(a) + ln_gamma_pos(b) - ln_gamma_pos(a + b));
    let prefix = ln_prefix.exp() / a;

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
    let mut last_delta = f64::NAN;
    for m in 1..=BETA_CF_MAX_ITER {
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
        let delta = d * c;
        h *= delta;
        last_delta = delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok(prefix * h);
        }
    }
    Err(Error::Accuracy {
        what: format!("incomplete Beta continued fraction at x={x}, a={a}, b={b}"),
        estimate: prefix * h,
        change: (last_delta - 1.0).abs(),
    })
}

fn unsupported(what: &str, n: Option<u32>, m: u32) -> Error {
    match n {
        Some(n) => Error::Unsupported(format!("{what}: index pair (n={n}, m={m}) out of range")),
        None => Error::Unsupported(format!("{what}: index m={m} out of range")),
    }
}

/// `c_m = 2 / B(1/2, (m-1)/2)`, the constant making the forward transform of
/// the constant function equal to one.
///
/// `m = 1` corresponds to a point mass and is rejected.
pub fn forward_constant(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(unsupported("forward_constant", None, m));
    }
    Ok(2.0 / beta(0.5, (m as f64 - 1.0) / 2.0)?)
}

/// `e_{n,m} = 2 / B((n-m)/2, (m-1)/2)`, normalizing the dual transform.
pub fn dual_constant(n: u32, m: u32) -> Result<f64> {
    if m < 2 || m + 1 > n {
        return Err(unsupported("dual_constant", Some(n), m));
    }
    Ok(2.0 / beta((n - m) as f64 / 2.0, (m as f64 - 1.0) / 2.0)?)
}

/// `d_{n,m} = B(1/2, (n-1)/2) / B((n-m)/2, m/2)`, the constant of the
/// revolution duality relation.
pub fn duality_constant(n: u32, m: u32) -> Result<f64> {
    if m < 1 || m + 1 > n {
        return Err(unsupported("duality_constant", Some(n), m));
    }
    let num = ln_beta(0.5, (n as f64 - 1.0) / 2.0)?;
    let den = ln_beta((n - m) as f64 / 2.0, m as f64 / 2.0)?;
    Ok((num - den).exp())
}

/// `b_{n,m} = 2 / B((n-m)/2, m/2)`, the density constant of the Haar
/// probability measure on `G(n, m)` in the variable `s = cos angle(xi0, E)`.
pub fn bipolar_constant(n: u32, m: u32) -> Result<f64> {
    if m < 1 || m + 1 > n {
        return Err(unsupported("bipolar_constant", Some(n), m));
    }
    Ok(2.0 / beta((n - m) as f64 / 2.0, m as f64 / 2.0)?)
}

/// `lambda(m, j) = B((j+1)/2, (m-1)/2) / B(1/2, (m-1)/2)`: the forward
/// transform of index `m` maps `t^j` to `lambda(m, j) s^j`.
pub fn monomial_multiplier(m: u32, j: u32) -> Result<f64> {
    if m < 2 {
        return Err(unsupported("monomial_multiplier", None, m));
    }
    if j == 0 {
        return Ok(1.0);
    }
    let b = (m as f64 - 1.0) / 2.0;
    Ok((ln_beta((j as f64 + 1.0) / 2.0, b)? - ln_beta(0.5, b)?).exp())
}

/// All normalization constants relevant to a dimension pair.
///
/// Maps are keyed by the index `m` (the ambient `n` is fixed by the table);
/// `lambda` is keyed by `m` and then by the monomial power `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsTable {
    pub n: u32,
    pub k: u32,
    /// `c_m` for `m` in `2..=n-1`.
    pub c: BTreeMap<u32, f64>,
    /// `d_n`, the polar-integration constant of the sphere itself.
    pub d_polar: f64,
    /// `b_{n,m}` for `m` in `1..=n-1`.
    pub b: BTreeMap<u32, f64>,
    /// `d_{n,m}` for `m` in `1..=n-1`.
    pub d_dual: BTreeMap<u32, f64>,
    /// `e_{n,m}` for `m` in `2..=n-1`.
    pub e: BTreeMap<u32, f64>,
    /// `lambda(m, j)` for `m` in `2..=n-1` and `j` in `0..=LAMBDA_TABLE_DEGREE`.
    pub lambda: BTreeMap<u32, BTreeMap<u32, f64>>,
}

impl ConstantsTable {
    pub fn new(dims: DimPair) -> Result<Self> {
        let n = dims.n();
        let mut c = BTreeMap::new();
        let mut b = BTreeMap::new();
        let mut d_dual = BTreeMap::new();
        let mut e = BTreeMap::new();
        let mut lambda = BTreeMap::new();
        for m in 1..n {
            b.insert(m, bipolar_constant(n, m)?);
            d_dual.insert(m, duality_constant(n, m)?);
            if m >= 2 {
                c.insert(m, forward_constant(m)?);
                e.insert(m, dual_constant(n, m)?);
                let row = (0..=LAMBDA_TABLE_DEGREE)
                    .map(|j| monomial_multiplier(m, j).map(|v| (j, v)))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                lambda.insert(m, row);
            }
        }
        // The sphere's own polar constant has the same closed form as c_n.
        let d_polar = forward_constant(n)?;
        Ok(Self {
            n,
            k: dims.k(),
            c,
            d_polar,
            b,
            d_dual,
            e,
            lambda,
        })
    }
}
