//! The bump profile `g` with `g(s0) = -1` whose dual transform of index
//! `n - k` and perp-dual transform of index `k` both stay `>= 1`.
//!
//! The recipe: pick a window `[s0 - 2 eps, s0 + 2 eps]`, bound how much
//! Lebesgue length (`delta`) and how much probability mass (`gamma`) any
//! pulled-back window can carry, then set `g >= gamma*` outside the window
//! and `g >= -1` inside with `gamma* = (1 + gamma) / (1 - gamma)`. Averages
//! of `g` are then at least `gamma* (1 - gamma) - gamma = 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{RadialProfile, Transition};
use crate::specfun::{reg_inc_beta, DimPair};
use crate::transforms::{dual_grid, perp_dual_grid, uniform_grid, TransformSpec};

/// Coarse scan size for the window supremum.
const GAMMA_COARSE_GRID: usize = 1024;
/// Golden-section refinement stops at this bracket width.
const GAMMA_REFINE_TOL: f64 = 1e-10;
/// `gamma` must stay this far below one.
const GAMMA_MARGIN: f64 = 1e-9;
/// A claim passes when `margin - slack` is at least `-CLAIM_TOLERANCE`.
pub const CLAIM_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_S0: f64 = 0.5;
pub const DEFAULT_EPS: f64 = 0.0625;
pub const DEFAULT_GRID: usize = 4096;

/// Shape of the constructed profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpVariant {
    /// `(gamma* + 1)((s - s0) / 2 eps)^2 - 1` on all of `[0, 1]`.
    #[default]
    Parabola,
    /// Plateaus `-1` and `gamma*` joined by the given transition.
    Glued(Transition),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub dims: DimPair,
    pub s0: f64,
    pub eps: f64,
    pub variant: BumpVariant,
}

impl ConstructionParams {
    pub fn new(dims: DimPair, s0: f64, eps: f64, variant: BumpVariant) -> Result<Self> {
        check_window(s0, eps)?;
        Ok(Self { dims, s0, eps, variant })
    }

    /// `s0 = 1/2`, `eps = 1/16`, parabola.
    pub fn with_defaults(dims: DimPair) -> Self {
        Self {
            dims,
            s0: DEFAULT_S0,
            eps: DEFAULT_EPS,
            variant: BumpVariant::Parabola,
        }
    }
}

fn check_window(s0: f64, eps: f64) -> Result<()> {
    if !(s0.is_finite() && eps.is_finite()) || eps <= 0.0 {
        return Err(Error::Parameter(format!(
            "need finite s0 and eps > 0 (s0={s0}, eps={eps})"
        )));
    }
    if !(s0 - 2.0 * eps > 0.0 && s0 + 2.0 * eps < 1.0) {
        return Err(Error::Parameter(format!(
            "window [s0 - 2 eps, s0 + 2 eps] = [{}, {}] must lie inside (0, 1)",
            s0 - 2.0 * eps,
            s0 + 2.0 * eps
        )));
    }
    Ok(())
}

/// Largest Lebesgue length of the window pulled back through the two
/// argument maps of the dual transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowDeltas {
    /// Through `s -> sqrt(1 - s^2 (1 - t^2))`, maximal at `t = s0 - 2 eps`.
    pub delta1: f64,
    /// Through `s -> s sqrt(1 - t^2)`, maximal at `t = sqrt(1 - (s0 + 2 eps)^2)`.
    pub delta2: f64,
    pub delta: f64,
}

pub fn window_deltas(s0: f64, eps: f64) -> Result<WindowDeltas> {
    check_window(s0, eps)?;
    let lo = s0 - 2.0 * eps;
    let hi = s0 + 2.0 * eps;
    let delta1 = 1.0 - (((1.0 - hi) * (1.0 + hi)) / ((1.0 - lo) * (1.0 + lo))).sqrt();
    let delta2 = 4.0 * eps / hi;
    Ok(WindowDeltas {
        delta1,
        delta2,
        delta: delta1.max(delta2),
    })
}

/// `mu_{n,m}([v, v + delta])` with `mu_{n,m}([0, x]) = I_{x^2}((n-m)/2, (m-1)/2)`.
fn window_mass(a: f64, b: f64, v: f64, delta: f64) -> Result<f64> {
    let hi = (v + delta).min(1.0);
    Ok(reg_inc_beta(hi * hi, a, b)? - reg_inc_beta(v * v, a, b)?)
}

/// `sup` over `v` in `[0, 1 - delta]` and `m` in `2..=n-2` of
/// `mu_{n,m}([v, v + delta])`.
pub fn gamma_sup(n: u32, delta: f64) -> Result<f64> {
    if n < 4 {
        return Err(Error::Parameter(format!("gamma_sup needs n >= 4, got {n}")));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Parameter(format!("delta must lie in [0, 1), got {delta}")));
    }
    if delta == 0.0 {
        return Ok(0.0);
    }
    let mut best: f64 = 0.0;
    for m in 2..=n - 2 {
        let a = (n - m) as f64 / 2.0;
        let b = (m as f64 - 1.0) / 2.0;
        best = best.max(window_sup(a, b, delta)?);
    }
    if best >= 1.0 - GAMMA_MARGIN {
        return Err(Error::GammaNotBelowOne(best));
    }
    Ok(best)
}

fn window_sup(a: f64, b: f64, delta: f64) -> Result<f64> {
    let span = 1.0 - delta;
    let step = span / (GAMMA_COARSE_GRID - 1) as f64;
    let mut values = Vec::with_capacity(GAMMA_COARSE_GRID);
    for i in 0..GAMMA_COARSE_GRID {
        let v = if i == GAMMA_COARSE_GRID - 1 {
            span
        } else {
            i as f64 * step
        };
        values.push(window_mass(a, b, v, delta)?);
    }
    let (imax, &coarse) = values
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is non-empty");
    // The coarse grid guards against local maxima; refine inside the two
    // neighbouring cells of the best grid point.
    let lo = imax.saturating_sub(1) as f64 * step;
    let hi = ((imax + 1).min(GAMMA_COARSE_GRID - 1) as f64 * step).min(span);
    let refined = golden_max(lo, hi, |v| window_mass(a, b, v, delta))?;
    Ok(coarse.max(refined))
}

fn golden_max<F: Fn(f64) -> Result<f64>>(mut lo: f64, mut hi: f64, f: F) -> Result<f64> {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > GAMMA_REFINE_TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(f1.max(f2).max(f(lo)?).max(f(hi)?))
}

/// Grid check of the two transform inequalities for one class index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub k: u32,
    pub grid_size: usize,
    /// `min_t R*_{n-k}(g)(t) - 1` over the grid.
    pub min_dual_margin: f64,
    pub argmin_dual: f64,
    /// `min_t (I o R_k)*(g)(t) - 1` over the grid.
    pub min_perp_margin: f64,
    pub argmin_perp: f64,
    /// Grid spacing times a local slope estimate at each minimum, doubled.
    pub dual_slack: f64,
    pub perp_slack: f64,
    /// `max(dual_slack, perp_slack)`
    pub lipschitz_slack: f64,
    pub dual_passes: bool,
    pub perp_passes: bool,
}

impl ClaimCheck {
    pub fn passed(&self) -> bool {
        self.dual_passes && self.perp_passes
    }
}

/// The constructed profile together with every quantity used to build it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub params: ConstructionParams,
    pub delta1: f64,
    pub delta2: f64,
    pub delta: f64,
    pub gamma: f64,
    pub gamma_star: f64,
    pub g: RadialProfile,
    pub value_at_s0: f64,
    /// Filled by [`verify_claims`].
    pub verification: Option<ClaimCheck>,
}

impl ConstructionResult {
    /// Verification status; `false` until [`verify_claims`] has run.
    pub fn passed(&self) -> bool {
        self.verification.is_some_and(|v| v.passed())
    }
}

/// Assemble the window lengths, `gamma`, `gamma*` and the profile.
pub fn build_g(params: &ConstructionParams) -> Result<ConstructionResult> {
    let deltas = window_deltas(params.s0, params.eps)?;
    let gamma = gamma_sup(params.dims.n(), deltas.delta)?;
    let gamma_star = (1.0 + gamma) / (1.0 - gamma);
    let g = match params.variant {
        BumpVariant::Parabola => RadialProfile::parabola_bump(params.s0, params.eps, gamma_star)?,
        BumpVariant::Glued(tr) => RadialProfile::glued_bump(params.s0, params.eps, gamma_star, tr)?,
    };
    let value_at_s0 = g.evaluate(params.s0)?;
    Ok(ConstructionResult {
        params: *params,
        delta1: deltas.delta1,
        delta2: deltas.delta2,
        delta: deltas.delta,
        gamma,
        gamma_star,
        g,
        value_at_s0,
        verification: None,
    })
}

/// Evaluate both transforms of `result.g` on a uniform grid for the pair
/// `dims` and record the minimum margins.
///
/// This is numerical evidence, not a proof: the slack is a local slope
/// estimate, not a rigorous Lipschitz enclosure.
pub fn verify_claims(result: &ConstructionResult, dims: DimPair, grid_size: usize) -> Result<ConstructionResult> {
    let check = check_claims(&result.g, dims, grid_size)?;
    let mut out = result.clone();
    out.verification = Some(check);
    Ok(out)
}

pub(crate) fn check_claims(g: &RadialProfile, dims: DimPair, grid_size: usize) -> Result<ClaimCheck> {
    if grid_size < 2 {
        return Err(Error::Parameter(format!(
            "verification grid needs at least 2 points, got {grid_size}"
        )));
    }
    let grid = uniform_grid(grid_size);
    let h = 1.0 / (grid_size - 1) as f64;
    let dual = dual_grid(TransformSpec::new(dims.n(), dims.co_k())?, g, &grid)?;
    let perp = perp_dual_grid(TransformSpec::new(dims.n(), dims.k())?, g, &grid)?;
    let (dual_min, dual_at, dual_slack) = margin_and_slack(&dual, h);
    let (perp_min, perp_at, perp_slack) = margin_and_slack(&perp, h);
    Ok(ClaimCheck {
        k: dims.k(),
        grid_size,
        min_dual_margin: dual_min,
        argmin_dual: grid[dual_at],
        min_perp_margin: perp_min,
        argmin_perp: grid[perp_at],
        dual_slack,
        perp_slack,
        lipschitz_slack: dual_slack.max(perp_slack),
        dual_passes: dual_min - dual_slack >= -CLAIM_TOLERANCE,
        perp_passes: perp_min - perp_slack >= -CLAIM_TOLERANCE,
    })
}

/// `(min - 1, argmin index, slack)` where the slack is twice the largest
/// neighbouring increment at the minimum (grid spacing times a difference
/// quotient).
fn margin_and_slack(values: &[f64], h: f64) -> (f64, usize, f64) {
    let (i, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grid is non-empty");
    let left = if i > 0 {
        (values[i] - values[i - 1]).abs() / h
    } else {
        0.0
    };
    let right = if i + 1 < values.len() {
        (values[i + 1] - values[i]).abs() / h
    } else {
        0.0
    };
    (min - 1.0, i, 2.0 * h * left.max(right))
}

/// Run [`verify_claims`] for every `k` in `2..=n-2` with the same profile.
pub fn verify_all_m(result: &ConstructionResult, n: u32, grid_size: usize) -> Result<BTreeMap<u32, ClaimCheck>> {
    let mut out = BTreeMap::new();
    for k in 2..=n.saturating_sub(2) {
        let dims = DimPair::new(n, k)?;
        out.insert(k, check_claims(&result.g, dims, grid_size)?);
    }
    if out.is_empty() {
        return Err(Error::Parameter(format!("no class index available for n = {n}")));
    }
    Ok(out)
}
