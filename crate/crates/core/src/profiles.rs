//! Continuous profile functions on `[0, 1]`.
//!
//! A function of revolution on the sphere or on the Grassmannian is stored
//! as its profile in the cosine variable. Transforms only ever need to
//! evaluate a profile and to know where it stops being smooth, which is what
//! [`RadialProfile::value`] and [`RadialProfile::breakpoints`] provide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{binomial, ln_binomial};

/// Grid used for derivative bounds of polynomial and glued profiles.
const DERIVATIVE_GRID: usize = 4096;

/// Degrees up to this use de Casteljau; above it the basis is summed in
/// log form, which stays finite for degrees in the thousands.
const DE_CASTELJAU_MAX_DEGREE: usize = 40;

/// The blend used on the two transition bands of a [`RadialProfile::GluedBump`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `exp(-1/x)` partition, infinitely smooth.
    Smooth,
    /// `6x^5 - 15x^4 + 10x^3`, twice continuously differentiable.
    #[default]
    Quintic,
}

impl Transition {
    /// Rises from 0 at `x = 0` to 1 at `x = 1`.
    fn value(self, x: f64) -> f64 {
        match self {
            Transition::Quintic => x * x * x * (10.0 + x * (-15.0 + 6.0 * x)),
            Transition::Smooth => {
                let a = flat(x);
                let b = flat(1.0 - x);
                a / (a + b)
            }
        }
    }

    fn derivative(self, x: f64) -> f64 {
        match self {
            Transition::Quintic => 30.0 * x * x * (1.0 - x) * (1.0 - x),
            Transition::Smooth => {
                if x <= 0.0 || x >= 1.0 {
                    return 0.0;
                }
                let a = flat(x);
                let b = flat(1.0 - x);
                let da = a / (x * x);
                let db = b / ((1.0 - x) * (1.0 - x));
                (da * b + a * db) / ((a + b) * (a + b))
            }
        }
    }

    fn max_derivative(self) -> f64 {
        match self {
            Transition::Quintic => 15.0 / 8.0,
            Transition::Smooth => {
                let peak = (1..DERIVATIVE_GRID)
                    .map(|i| self.derivative(i as f64 / DERIVATIVE_GRID as f64))
                    .fold(0.0, f64::max);
                peak * 1.01
            }
        }
    }
}

fn flat(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// A continuous function on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `sum_j coeffs[j] t^j`.
    Monomial { coeffs: Vec<f64> },
    /// `sum_j coeffs[j] C(N, j) t^j (1-t)^(N-j)` with `N = degree`.
    Bernstein { degree: usize, coeffs: Vec<f64> },
    /// `(gamma_star + 1) ((t - s0) / (2 eps))^2 - 1`.
    ParabolaBump { s0: f64, eps: f64, gamma_star: f64 },
    /// `-1` on `[s0 - eps, s0 + eps]`, `gamma_star` outside
    /// `[s0 - 2 eps, s0 + 2 eps]`, blended monotonically in between.
    GluedBump {
        s0: f64,
        eps: f64,
        gamma_star: f64,
        #[serde(default)]
        transition: Transition,
    },
    /// Natural cubic spline through `(grid[i], values[i])`.
    Sampled(SampledProfile),
}

impl RadialProfile {
    pub fn constant(value: f64) -> Self {
        RadialProfile::Monomial { coeffs: vec![value] }
    }

    pub fn monomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter(
                "monomial coefficients must be non-empty and finite".into(),
            ));
        }
        Ok(RadialProfile::Monomial { coeffs })
    }

    pub fn bernstein(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != degree + 1 {
            return Err(Error::Parameter(format!(
                "Bernstein degree {degree} needs {} coefficients, got {}",
                degree + 1,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("Bernstein coefficients must be finite".into()));
        }
        Ok(RadialProfile::Bernstein { degree, coeffs })
    }

    pub fn parabola_bump(s0: f64, eps: f64, gamma_star: f64) -> Result<Self> {
        check_bump(s0, eps, gamma_star)?;
        Ok(RadialProfile::ParabolaBump { s0, eps, gamma_star })
    }

    pub fn glued_bump(s0: f64, eps: f64, gamma_star: f64, transition: Transition) -> Result<Self> {
        check_bump(s0, eps, gamma_star)?;
        Ok(RadialProfile::GluedBump {
            s0,
            eps,
            gamma_star,
            transition,
        })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(RadialProfile::Sampled(SampledProfile::new(grid, values)?))
    }

    /// Evaluate at `t` in `[0, 1]`.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("profile argument must lie in [0, 1], got {t}")));
        }
        if let RadialProfile::Bernstein { degree, coeffs } = self {
            if coeffs.len() != degree + 1 {
                return Err(Error::Parameter(
                    "Bernstein coefficient count does not match degree".into(),
                ));
            }
        }
        Ok(self.value(t))
    }

    /// Evaluation without the domain check; `t` must already lie in `[0, 1]`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match self {
            RadialProfile::Monomial { coeffs } => horner(coeffs, t),
            RadialProfile::Bernstein { degree, coeffs } => bernstein_sum(*degree, coeffs, t),
            RadialProfile::ParabolaBump { s0, eps, gamma_star } => {
                let u = (t - s0) / (2.0 * eps);
                (gamma_star + 1.0) * u * u - 1.0
            }
            RadialProfile::GluedBump {
                s0,
                eps,
                gamma_star,
                transition,
            } => {
                let d = (t - s0).abs();
                if d <= *eps {
                    -1.0
                } else if d >= 2.0 * eps {
                    *gamma_star
                } else {
                    -1.0 + (gamma_star + 1.0) * transition.value((d - eps) / eps)
                }
            }
            RadialProfile::Sampled(s) => s.value(t),
        }
    }

    /// Interior points of `(0, 1)` where the profile is only finitely smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialProfile::GluedBump { s0, eps, .. } => [s0 - 2.0 * eps, s0 - eps, s0 + eps, s0 + 2.0 * eps]
                .into_iter()
                .filter(|b| *b > 0.0 && *b < 1.0)
                .collect(),
            RadialProfile::Sampled(s) => s.grid[1..s.grid.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    /// An upper bound for `sup |d/dt profile|` on `[0, 1]`.
    pub fn sup_abs_derivative(&self) -> f64 {
        match self {
            RadialProfile::Monomial { coeffs } => {
                let d = PolynomialCoeffs::new(coeffs.clone()).derivative();
                grid_bound(|t| d.evaluate(t), d.degree() >= 1)
            }
            RadialProfile::Bernstein { degree, coeffs } => {
                if *degree == 0 {
                    return 0.0;
                }
                let diffs: Vec<f64> = coeffs.windows(2).map(|w| *degree as f64 * (w[1] - w[0])).collect();
                let varies = diffs.windows(2).any(|w| w[0] != w[1]);
                grid_bound(|t| bernstein_sum(degree - 1, &diffs, t), varies)
            }
            RadialProfile::ParabolaBump { s0, eps, gamma_star } => {
                (gamma_star + 1.0) * s0.max(1.0 - s0) / (2.0 * eps * eps)
            }
            RadialProfile::GluedBump {
                eps,
                gamma_star,
                transition,
                ..
            } => (gamma_star + 1.0) * transition.max_derivative() / eps,
            RadialProfile::Sampled(s) => s.sup_abs_derivative(),
        }
    }

    /// Exact monomial expansion of a polynomial profile.
    ///
    /// The coefficients of a Bernstein profile are accurate to rounding, but
    /// evaluating them is not: the monomial basis loses all accuracy on
    /// `[0, 1]` beyond degree 30 or so. Evaluate high-degree profiles in their
    /// Bernstein form.
    pub fn to_monomial(&self) -> Result<PolynomialCoeffs> {
        match self {
            RadialProfile::Monomial { coeffs } => Ok(PolynomialCoeffs::new(coeffs.clone())),
            RadialProfile::Bernstein { degree, coeffs } => bernstein_to_monomial(*degree, coeffs),
            RadialProfile::ParabolaBump { s0, eps, gamma_star } => {
                let a = (gamma_star + 1.0) / (4.0 * eps * eps);
                Ok(PolynomialCoeffs::new(vec![a * s0 * s0 - 1.0, -2.0 * a * s0, a]))
            }
            RadialProfile::GluedBump { .. } | RadialProfile::Sampled(_) => Err(Error::Unsupported(
                "only monomial, Bernstein and parabola profiles have a monomial expansion".into(),
            )),
        }
    }
}

fn check_bump(s0: f64, eps: f64, gamma_star: f64) -> Result<()> {
    if !(s0.is_finite() && eps.is_finite() && gamma_star.is_finite()) || eps <= 0.0 {
        return Err(Error::Parameter(format!(
            "bump needs finite s0, gamma_star and eps > 0 (s0={s0}, eps={eps}, gamma_star={gamma_star})"
        )));
    }
    Ok(())
}

fn grid_bound(f: impl Fn(f64) -> f64, add_slack: bool) -> f64 {
    let peak = (0..DERIVATIVE_GRID)
        .map(|i| f(i as f64 / (DERIVATIVE_GRID - 1) as f64).abs())
        .fold(0.0, f64::max);
    if add_slack {
        peak * 1.01
    } else {
        peak
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// `C(N, j) t^j (1 - t)^(N - j)`.
pub(crate) fn bernstein_basis_value(degree: usize, j: usize, t: f64) -> f64 {
    let ln_t = if j == 0 { 0.0 } else { j as f64 * t.ln() };
    let ln_u = if j == degree {
        0.0
    } else {
        (degree - j) as f64 * (-t).ln_1p()
    };
    (ln_binomial(degree, j) + ln_t + ln_u).exp()
}

fn bernstein_sum(degree: usize, coeffs: &[f64], t: f64) -> f64 {
    if degree <= DE_CASTELJAU_MAX_DEGREE {
        let mut work = coeffs.to_vec();
        let u = 1.0 - t;
        for level in (1..=degree).rev() {
            for i in 0..level {
                work[i] = u * work[i] + t * work[i + 1];
            }
        }
        return work[0];
    }
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, c)| c * bernstein_basis_value(degree, j, t))
        .sum()
}

fn bernstein_to_monomial(degree: usize, coeffs: &[f64]) -> Result<PolynomialCoeffs> {
    // t^i (1-t)^(N-i) C(N,i) = sum_k C(N,k) C(k,i) (-1)^(k-i) t^k
    let mut out = vec![0.0; degree + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let nk = binomial(degree, k);
        let mut acc = 0.0;
        for (i, c) in coeffs.iter().enumerate().take(k + 1) {
            if *c == 0.0 {
                continue;
            }
            let mag = nk * binomial(k, i);
            let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * mag * c;
        }
        *slot = acc;
    }
    if out.iter().any(|c| !c.is_finite()) {
        return Err(Error::Unsupported(format!(
            "monomial expansion of a degree-{degree} Bernstein polynomial overflows f64"
        )));
    }
    Ok(PolynomialCoeffs::new(out))
}

/// `B_{j,N}(s) = C(N, j) s^j (1 - s)^(N - j)` as a Bernstein profile.
pub fn bernstein_basis(degree: usize, j: usize) -> Result<RadialProfile> {
    if j > degree {
        return Err(Error::Parameter(format!("Bernstein index {j} exceeds degree {degree}")));
    }
    let mut coeffs = vec![0.0; degree + 1];
    coeffs[j] = 1.0;
    Ok(RadialProfile::Bernstein { degree, coeffs })
}

/// A polynomial in the monomial basis; trailing zeros are trimmed so the
/// last coefficient is the leading one (except for the zero polynomial).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoeffs {
    coeffs: Vec<f64>,
}

impl PolynomialCoeffs {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        horner(&self.coeffs, t)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| j as f64 * c)
                .collect(),
        )
    }

    pub fn to_profile(&self) -> RadialProfile {
        RadialProfile::Monomial {
            coeffs: self.coeffs.clone(),
        }
    }
}

/// Natural cubic spline on a grid spanning `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSampled", into = "RawSampled")]
pub struct SampledProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSampled {
    grid: Vec<f64>,
    values: Vec<f64>,
    interpolation: String,
}

impl TryFrom<RawSampled> for SampledProfile {
    type Error = Error;

    fn try_from(raw: RawSampled) -> Result<Self> {
        if raw.interpolation != "cubic" {
            return Err(Error::Unsupported(format!("interpolation '{}'", raw.interpolation)));
        }
        SampledProfile::new(raw.grid, raw.values)
    }
}

impl From<SampledProfile> for RawSampled {
    fn from(s: SampledProfile) -> Self {
        RawSampled {
            grid: s.grid,
            values: s.values,
            interpolation: "cubic".into(),
        }
    }
}

impl SampledProfile {
    /// The grid must be strictly increasing from exactly 0 to exactly 1.
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Parameter(
                "sampled profile needs at least two points and one value per grid point".into(),
            ));
        }
        if grid[0] != 0.0 || grid[grid.len() - 1] != 1.0 {
            return Err(Error::Parameter("sampled grid must start at 0 and end at 1".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("sampled grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("sampled values must be finite".into()));
        }
        let second = natural_spline_second_derivatives(&grid, &values);
        Ok(Self { grid, values, second })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interval(&self, t: f64) -> usize {
        let i = self.grid.partition_point(|x| *x <= t);
        i.clamp(1, self.grid.len() - 1) - 1
    }

    fn value(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.grid[i + 1] - self.grid[i];
        let a = (self.grid[i + 1] - t) / h;
        let b = 1.0 - a;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    fn sup_abs_derivative(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.grid.len() - 1 {
            let h = self.grid[i + 1] - self.grid[i];
            let slope = (self.values[i + 1] - self.values[i]) / h;
            let (mi, mj) = (self.second[i], self.second[i + 1]);
            let deriv = |b: f64| {
                let a = 1.0 - b;
                slope - (3.0 * a * a - 1.0) / 6.0 * h * mi + (3.0 * b * b - 1.0) / 6.0 * h * mj
            };
            best = best.max(deriv(0.0).abs()).max(deriv(1.0).abs());
            // The derivative is quadratic on the interval; its vertex is where
            // the (linear) second derivative vanishes.
            if (mi - mj).abs() > 0.0 {
                let b = mi / (mi - mj);
                if b > 0.0 && b < 1.0 {
                    best = best.max(deriv(b).abs());
                }
            }
        }
        best
    }
}

fn natural_spline_second_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Thomas algorithm on the interior equations.
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let c = h1 / 6.0;
        let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c_prime[i - 1];
        c_prime[i] = c / denom;
        d_prime[i] = (d - a * d_prime[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d_prime[i] - c_prime[i] * m[i + 1];
    }
    m
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn any_profile() -> impl Strategy<Value = RadialProfile> {
        prop_oneof![
            prop::collection::vec(-3.0f64..3.0, 1..8).prop_map(|c| RadialProfile::monomial(c).unwrap()),
            (1usize..30).prop_flat_map(|n| prop::collection::vec(-3.0f64..3.0, n + 1)
                .prop_map(move |c| RadialProfile::bernstein(n, c).unwrap())),
            (0.2f64..0.8, 0.01f64..0.05, 1.0f64..20.0)
                .prop_map(|(s, e, g)| RadialProfile::parabola_bump(s, e, g).unwrap()),
            (0.2f64..0.8, 0.01f64..0.05, 1.0f64..20.0, prop::bool::ANY).prop_map(|(s, e, g, smooth)| {
                let tr = if smooth {
                    Transition::Smooth
                } else {
                    Transition::Quintic
                };
                RadialProfile::glued_bump(s, e, g, tr).unwrap()
            }),
            prop::collection::vec(-3.0f64..3.0, 2..12).prop_map(|v| {
                let n = v.len();
                let grid = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
                RadialProfile::sampled(grid, v).unwrap()
            }),
        ]
    }

    proptest! {
        #[test]
        fn lipschitz_continuity(p in any_profile(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let l = p.sup_abs_derivative();
            let diff = (p.evaluate(t1).unwrap() - p.evaluate(t2).unwrap()).abs();
            prop_assert!(diff <= l * (t1 - t2).abs() + 1e-12, "diff {} bound {}", diff, l * (t1 - t2).abs());
        }

        #[test]
        fn nonnegative_bernstein_stays_nonnegative(n in 0usize..500, seed in any::<u64>(), t in 0.0f64..=1.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let p = RadialProfile::bernstein(n, coeffs).unwrap();
            prop_assert!(p.evaluate(t).unwrap() >= 0.0);
        }
    }
}
