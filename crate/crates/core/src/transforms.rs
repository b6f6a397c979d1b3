//! The revolution-reduced spherical Radon transform, its dual, the dual of
//! its composition with the perp operator, and the Grassmannian pairing.
//!
//! Each integral is taken in an angle variable so that the singular weights
//! `(1 - t^2)^((m-3)/2)` become integer powers of sine and cosine:
//!
//! | transform | substitution | integrand on `[0, pi/2]` |
//! |-----------|--------------|---------------------------|
//! | forward   | `t = cos a`  | `f(s cos a) sin^(m-2) a` |
//! | dual      | `s = sin a`  | `g(sqrt(cos^2 a + t^2 sin^2 a)) cos^(m-2) a sin^(n-m-1) a` |
//! | perp dual | `s = sin a`  | `g(sqrt(1-t^2) sin a) cos^(m-2) a sin^(n-m-1) a` |
//! | pairing   | `s = sin a`  | `g(sin a) p(sin a) cos^(n-k-1) a sin^(k-1) a` |
//!
//! Profile breakpoints are pulled back to the angle variable and used as
//! cut points, so piecewise profiles still converge spectrally.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::RadialProfile;
use crate::quadrature::{cut_points, integrate};
use crate::specfun::{bipolar_constant, dual_constant, duality_constant, forward_constant, DimPair};

/// Below this `t` the dual integrand develops a rounded kink of width `t`
/// at `a = pi/2`; a geometric mesh towards that end resolves it.
const GEOMETRIC_MESH_BELOW: f64 = 0.25;

/// Ambient dimension `n` and transform index `m`, `2 <= m <= n - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformSpec {
    n: u32,
    m: u32,
}

impl TransformSpec {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if m < 2 || m + 1 > n {
            return Err(Error::Unsupported(format!(
                "transform index m = {m} must satisfy 2 <= m <= n - 1 (n = {n})"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

#[inline]
fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

/// The forward transform `R_m(f)(s) = c_m int_0^1 f(st) (1-t^2)^((m-3)/2) dt`.
pub fn forward(spec: TransformSpec, f: &RadialProfile, s: f64) -> Result<f64> {
    check_unit("s", s)?;
    let c = forward_constant(spec.m)?;
    forward_with(spec.m, c, |x| f.value(x), &f.breakpoints(), s)
}

pub(crate) fn forward_with<F>(m: u32, c: f64, f: F, breakpoints: &[f64], s: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if s == 0.0 {
        return Ok(f(0.0));
    }
    let cuts = cut_points(
        0.0,
        FRAC_PI_2,
        breakpoints.iter().filter(|b| **b < s).map(|b| (b / s).acos()),
    );
    let exp = m - 2;
    let v = integrate("forward transform", &cuts, |a| {
        let (sin, cos) = a.sin_cos();
        Ok(f((s * cos).clamp(0.0, 1.0)) * powi(sin, exp))
    })?;
    Ok(c * v)
}

/// The dual transform
/// `R*_m(g)(t) = e_{n,m} int_0^1 g(sqrt(1 - s^2 (1 - t^2))) (1-s^2)^((m-3)/2) s^(n-m-1) ds`.
pub fn dual(spec: TransformSpec, g: &RadialProfile, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    let e = dual_constant(spec.n, spec.m)?;
    dual_with(spec, e, g, t)
}

fn dual_with(spec: TransformSpec, e: f64, g: &RadialProfile, t: f64) -> Result<f64> {
    if t == 1.0 {
        return Ok(g.value(1.0));
    }
    let one_minus = (1.0 - t) * (1.0 + t);
    let mut interior: Vec<f64> = g
        .breakpoints()
        .into_iter()
        .filter(|b| *b > t && *b < 1.0)
        .map(|b| (((1.0 - b) * (1.0 + b)) / one_minus).sqrt().min(1.0).asin())
        .collect();
    if t > 0.0 && t < GEOMETRIC_MESH_BELOW {
        let mut width = t;
        while width < FRAC_PI_2 / 2.0 {
            interior.push(FRAC_PI_2 - width);
            width *= 2.0;
        }
    }
    let cuts = cut_points(0.0, FRAC_PI_2, interior);
    let (ec, es) = (spec.m - 2, spec.n - spec.m - 1);
    let t2 = t * t;
    let v = integrate("dual transform", &cuts, |a| {
        let (sin, cos) = a.sin_cos();
        let arg = (cos * cos + t2 * sin * sin).sqrt().clamp(0.0, 1.0);
        Ok(g.value(arg) * powi(cos, ec) * powi(sin, es))
    })?;
    Ok(e * v)
}

/// The dual of the forward transform composed with the perp operator:
/// `e_{n,m} int_0^1 g(s sqrt(1 - t^2)) (1-s^2)^((m-3)/2) s^(n-m-1) ds`.
pub fn perp_dual(spec: TransformSpec, g: &RadialProfile, t: f64) -> Result<f64> {
    check_unit("t", t)?;
    let e = dual_constant(spec.n, spec.m)?;
    perp_dual_with(spec, e, g, t)
}

fn perp_dual_with(spec: TransformSpec, e: f64, g: &RadialProfile, t: f64) -> Result<f64> {
    let scale = ((1.0 - t) * (1.0 + t)).sqrt();
    if scale == 0.0 {
        return Ok(g.value(0.0));
    }
    let cuts = cut_points(
        0.0,
        FRAC_PI_2,
        g.breakpoints()
            .into_iter()
            .filter(|b| *b < scale)
            .map(|b| (b / scale).asin()),
    );
    let (ec, es) = (spec.m - 2, spec.n - spec.m - 1);
    let v = integrate("perp dual transform", &cuts, |a| {
        let (sin, cos) = a.sin_cos();
        Ok(g.value((scale * sin).clamp(0.0, 1.0)) * powi(cos, ec) * powi(sin, es))
    })?;
    Ok(e * v)
}

/// Pairing of a Grassmannian profile `g` with a function `p` in the range of
/// the forward transform of index `n - k`:
/// `b_{n,n-k} int_0^1 g(s) p(s) (1-s^2)^((n-k-2)/2) s^(k-1) ds`.
///
/// The constant makes `pairing(1, 1) = 1`; it is positive, so the sign of the
/// result is the sign of the corresponding Grassmannian integral.
pub fn pairing(dims: DimPair, g: &RadialProfile, p: &RadialProfile) -> Result<f64> {
    let mut bps = g.breakpoints();
    bps.extend(p.breakpoints());
    pairing_with(dims, |s| g.value(s), |s| p.value(s), &bps)
}

pub(crate) fn pairing_with<G, P>(dims: DimPair, g: G, p: P, breakpoints: &[f64]) -> Result<f64>
where
    G: Fn(f64) -> f64,
    P: Fn(f64) -> f64,
{
    let b = bipolar_constant(dims.n(), dims.co_k())?;
    let cuts = cut_points(0.0, FRAC_PI_2, breakpoints.iter().map(|x| x.asin()));
    let (ec, es) = (dims.n() - dims.k() - 1, dims.k() - 1);
    let v = integrate("pairing", &cuts, |a| {
        let (sin, cos) = a.sin_cos();
        let s = sin.clamp(0.0, 1.0);
        Ok(g(s) * p(s) * powi(cos, ec) * powi(sin, es))
    })?;
    Ok(b * v)
}

/// Both sides of the revolution duality relation and their relative gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityCheck {
    /// `int_0^1 R*_m(g)(t) f(t) (1-t^2)^((n-3)/2) dt`
    pub lhs: f64,
    /// `d_{n,m} int_0^1 g(s) R_m(f)(s) (1-s^2)^((n-m-2)/2) s^(m-1) ds`
    pub rhs: f64,
    /// `|lhs - rhs| / max(1, |lhs|)`
    pub relative_error: f64,
}

/// Evaluate both sides of the duality relation by composing the transforms
/// with an outer quadrature.
pub fn duality_check(n: u32, m: u32, f: &RadialProfile, g: &RadialProfile) -> Result<DualityCheck> {
    let spec = TransformSpec::new(n, m)?;
    let e = dual_constant(n, m)?;
    let c = forward_constant(m)?;
    let d = duality_constant(n, m)?;
    let f_bps = f.breakpoints();
    // Both outer integrands lose smoothness where the variable crosses a
    // breakpoint of either profile.
    let outer_cuts = cut_points(
        0.0,
        FRAC_PI_2,
        f_bps.iter().chain(g.breakpoints().iter()).map(|x| x.asin()),
    );

    let lhs = integrate("duality lhs", &outer_cuts, |a| {
        let (sin, cos) = a.sin_cos();
        let t = sin.clamp(0.0, 1.0);
        Ok(dual_with(spec, e, g, t)? * f.value(t) * powi(cos, n - 2))
    })?;

    let rhs = integrate("duality rhs", &outer_cuts, |a| {
        let (sin, cos) = a.sin_cos();
        let s = sin.clamp(0.0, 1.0);
        let rf = forward_with(m, c, |x| f.value(x), &f_bps, s)?;
        Ok(g.value(s) * rf * powi(cos, n - m - 1) * powi(sin, m - 1))
    })?;
    let rhs = d * rhs;
    Ok(DualityCheck {
        lhs,
        rhs,
        relative_error: (lhs - rhs).abs() / lhs.abs().max(1.0),
    })
}

/// [`forward`] at every point of `points`, evaluated in parallel.
pub fn forward_grid(spec: TransformSpec, f: &RadialProfile, points: &[f64]) -> Result<Vec<f64>> {
    points.par_iter().map(|s| forward(spec, f, *s)).collect()
}

/// [`dual`] at every point of `points`, evaluated in parallel.
pub fn dual_grid(spec: TransformSpec, g: &RadialProfile, points: &[f64]) -> Result<Vec<f64>> {
    points.iter().try_for_each(|t| check_unit("t", *t))?;
    let e = dual_constant(spec.n, spec.m)?;
    points.par_iter().map(|t| dual_with(spec, e, g, *t)).collect()
}

/// [`perp_dual`] at every point of `points`, evaluated in parallel.
pub fn perp_dual_grid(spec: TransformSpec, g: &RadialProfile, points: &[f64]) -> Result<Vec<f64>> {
    points.iter().try_for_each(|t| check_unit("t", *t))?;
    let e = dual_constant(spec.n, spec.m)?;
    points.par_iter().map(|t| perp_dual_with(spec, e, g, *t)).collect()
}

/// `count` equally spaced points from 0 to 1 inclusive.
pub fn uniform_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}
