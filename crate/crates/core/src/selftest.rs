//! Seeded invariant suite behind the `selftest` command.
//!
//! Each check draws from its own ChaCha stream derived from the suite seed, so
//! a report is reproducible and independent of the order checks run in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{make_certificate, moment_scan, pairing_tolerance, DEFAULT_DEGREE, ROUNDTRIP_TOL};
use crate::construct::{build_g, gamma_sup, verify_claims, BumpVariant, ConstructionParams};
use crate::error::Result;
use crate::output::to_stable_json;
use crate::profiles::{RadialProfile, Transition};
use crate::specfun::{
    bipolar_constant, dual_constant, duality_constant, forward_constant, monomial_multiplier, reg_inc_beta, DimPair,
};
use crate::transforms::{dual, duality_check, forward, pairing, perp_dual, uniform_grid, TransformSpec};

pub const DEFAULT_SEED: u64 = 0x6b62_7031;

/// Grid used by the construction checks; coarser than the command default to
/// keep the suite quick.
const CLAIM_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("constant_identity", constant_identity),
    ("inc_beta_monotone", inc_beta_monotone),
    ("inc_beta_closed_form", inc_beta_closed_form),
    ("multiplier_decreasing", multiplier_decreasing),
    ("profile_lipschitz", profile_lipschitz),
    ("glued_plateaus", glued_plateaus),
    ("bernstein_monomial_roundtrip", bernstein_monomial_roundtrip),
    ("monomial_law", monomial_law),
    ("duality", duality),
    ("endpoint_identities", endpoint_identities),
    ("transform_positivity", transform_positivity),
    ("normalization", normalization),
    ("gamma_monotone", gamma_monotone),
    ("gamma_star_identity", gamma_star_identity),
    ("claim_bound_chain", claim_bound_chain),
    ("certificate_soundness", certificate_soundness),
    ("pairing_linearity", pairing_linearity),
    ("pairing_riemann_oracle", pairing_riemann_oracle),
    ("monotone_refinement", monotone_refinement),
    ("stable_json", stable_json),
];

/// Run every check with streams derived from `seed`.
pub fn run(seed: u64) -> SelftestReport {
    let checks: Vec<CheckOutcome> = CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let (passed, detail) = match check(&mut rng) {
                Ok(outcome) => outcome,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    SelftestReport {
        seed,
        passed,
        failed: checks.len() - passed,
        checks,
    }
}

fn random_monomial(rng: &mut ChaCha8Rng, max_degree: usize) -> Result<RadialProfile> {
    let degree = rng.gen_range(0..=max_degree);
    RadialProfile::monomial((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_bernstein(rng: &mut ChaCha8Rng, degree: usize, lo: f64) -> Result<RadialProfile> {
    RadialProfile::bernstein(degree, (0..=degree).map(|_| rng.gen_range(lo..1.0)).collect())
}

fn default_params() -> ConstructionParams {
    ConstructionParams::with_defaults(DimPair::new(4, 2).expect("(4, 2) is valid"))
}

fn constant_identity(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 4..=12 {
        for m in 2..n {
            let e = dual_constant(n, m)?;
            let dc = duality_constant(n, m)? * forward_constant(m)?;
            worst = worst.max((e - dc).abs() / e.abs());
        }
    }
    Ok((worst <= 1e-12, format!("max relative gap {worst:.3e}")))
}

fn inc_beta_monotone(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut violations = 0;
    for _ in 0..500 {
        let a = rng.gen_range(0.05..6.0);
        let b = rng.gen_range(0.05..6.0);
        let x1: f64 = rng.gen();
        let x2: f64 = rng.gen();
        let (lo, hi) = (x1.min(x2), x1.max(x2));
        if reg_inc_beta(lo, a, b)? > reg_inc_beta(hi, a, b)? {
            violations += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{violations} ordering violations in 500 pairs"),
    ))
}

fn inc_beta_closed_form(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let b = rng.gen_range(0.1..6.0);
        for x in uniform_grid(1000) {
            let want = 1.0 - (1.0 - x).powf(b);
            worst = worst.max((reg_inc_beta(x, 1.0, b)? - want).abs());
        }
    }
    Ok((worst <= 1e-12, format!("max abs error {worst:.3e}")))
}

fn multiplier_decreasing(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for m in 2..=12 {
        let mut prev = f64::INFINITY;
        for j in 0..=12 {
            let l = monomial_multiplier(m, j)?;
            if !(l > 0.0 && l <= 1.0 && l < prev) {
                return Ok((false, format!("lambda({m}, {j}) = {l} breaks the ordering")));
            }
            prev = l;
        }
    }
    Ok((true, "strictly decreasing in (0, 1] for m <= 12, j <= 12".into()))
}

fn profile_lipschitz(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let grid: Vec<f64> = uniform_grid(9);
    let values: Vec<f64> = grid.iter().map(|_| rng.gen_range(-2.0..2.0)).collect();
    let profiles = [
        random_monomial(rng, 8)?,
        random_bernstein(rng, 15, -1.0)?,
        RadialProfile::parabola_bump(0.5, 0.0625, 9.0)?,
        RadialProfile::glued_bump(0.5, 0.0625, 9.0, Transition::Quintic)?,
        RadialProfile::glued_bump(0.4, 0.05, 5.0, Transition::Smooth)?,
        RadialProfile::sampled(grid, values)?,
    ];
    let mut worst = f64::NEG_INFINITY;
    for p in &profiles {
        let lip = p.sup_abs_derivative();
        for _ in 0..500 {
            let (t1, t2): (f64, f64) = (rng.gen(), rng.gen());
            let excess = (p.evaluate(t1)? - p.evaluate(t2)?).abs() - lip * (t1 - t2).abs();
            worst = worst.max(excess);
        }
    }
    Ok((
        worst <= 1e-12,
        format!("largest excess over the Lipschitz bound {worst:.3e}"),
    ))
}

fn glued_plateaus(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for tr in [Transition::Quintic, Transition::Smooth] {
        let g = RadialProfile::glued_bump(0.5, 0.0625, 9.0, tr)?;
        let got = [g.evaluate(0.5)?, g.evaluate(0.0)?, g.evaluate(1.0)?];
        if got != [-1.0, 9.0, 9.0] {
            return Ok((false, format!("{tr:?}: g(s0), g(0), g(1) = {got:?}")));
        }
    }
    Ok((true, "g(s0) = -1 and g(0) = g(1) = gamma* exactly".into()))
}

fn bernstein_monomial_roundtrip(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let degree = rng.gen_range(1..=12);
        let b = random_bernstein(rng, degree, -1.0)?;
        let mono = b.to_monomial()?;
        for _ in 0..50 {
            let t: f64 = rng.gen();
            let direct = b.evaluate(t)?;
            worst = worst.max((mono.evaluate(t) - direct).abs() / direct.abs().max(1.0));
        }
    }
    Ok((worst <= 1e-9, format!("max relative gap {worst:.3e}")))
}

fn monomial_law(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for m in 2..=10 {
        let spec = TransformSpec::new(m + 1, m)?;
        for j in 0..=12u32 {
            let mut c = vec![0.0; j as usize + 1];
            c[j as usize] = 1.0;
            let f = RadialProfile::monomial(c)?;
            let lambda = monomial_multiplier(m, j)?;
            for s in uniform_grid(11) {
                worst = worst.max((forward(spec, &f, s)? - lambda * s.powi(j as i32)).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max abs error {worst:.3e}")))
}

fn duality(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for n in 4..=10 {
        for m in 2..n {
            for _ in 0..2 {
                let f = random_monomial(rng, 8)?;
                let g = random_monomial(rng, 8)?;
                worst = worst.max(duality_check(n, m, &f, &g)?.relative_error);
            }
        }
    }
    Ok((worst <= 1e-8, format!("max relative gap {worst:.3e}")))
}

fn endpoint_identities(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..25 {
        let n = rng.gen_range(4..=10);
        let m = rng.gen_range(2..n);
        let spec = TransformSpec::new(n, m)?;
        let g = random_monomial(rng, 8)?;
        worst = worst.max((dual(spec, &g, 1.0)? - g.evaluate(1.0)?).abs());
        worst = worst.max((perp_dual(spec, &g, 1.0)? - g.evaluate(0.0)?).abs());
    }
    Ok((worst <= 1e-12, format!("max abs error {worst:.3e}")))
}

fn transform_positivity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut lowest = f64::INFINITY;
    for _ in 0..10 {
        let n = rng.gen_range(4..=8);
        let m = rng.gen_range(2..n);
        let spec = TransformSpec::new(n, m)?;
        let degree = rng.gen_range(1..=10);
        let p = random_bernstein(rng, degree, 0.0)?;
        for t in uniform_grid(21) {
            lowest = lowest
                .min(forward(spec, &p, t)?)
                .min(dual(spec, &p, t)?)
                .min(perp_dual(spec, &p, t)?);
        }
    }
    Ok((lowest >= 0.0, format!("smallest transform value {lowest:.3e}")))
}

fn normalization(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let one = RadialProfile::constant(1.0);
    let mut worst = 0.0f64;
    for n in 4..=10 {
        for m in 2..n {
            let spec = TransformSpec::new(n, m)?;
            for t in uniform_grid(101) {
                for v in [forward(spec, &one, t)?, dual(spec, &one, t)?, perp_dual(spec, &one, t)?] {
                    worst = worst.max((v - 1.0).abs());
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("max abs deviation from 1: {worst:.3e}")))
}

fn gamma_monotone(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for n in 4..=8 {
        let mut prev = 0.0;
        for i in 0..50 {
            let delta = 0.45 * i as f64 / 49.0;
            let g = gamma_sup(n, delta)?;
            if g < prev {
                return Ok((false, format!("n = {n}: gamma({delta}) = {g} < {prev}")));
            }
            prev = g;
        }
    }
    Ok((true, "non-decreasing on 50 deltas in [0, 0.45] for n = 4..8".into()))
}

fn gamma_star_identity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(4..=10);
        let k = rng.gen_range(2..=n - 2);
        let eps = rng.gen_range(0.01..0.08);
        let s0 = rng.gen_range(2.0 * eps + 0.05..1.0 - 2.0 * eps - 0.05);
        let params = ConstructionParams::new(DimPair::new(n, k)?, s0, eps, BumpVariant::Parabola)?;
        let r = build_g(&params)?;
        if !(r.gamma < 1.0 && r.gamma_star > 1.0) {
            return Ok((false, format!("gamma = {}, gamma* = {}", r.gamma, r.gamma_star)));
        }
        worst = worst.max(((1.0 - r.gamma) * r.gamma_star - (1.0 + r.gamma)).abs());
    }
    Ok((
        worst <= 1e-12,
        format!("max |(1 - gamma) gamma* - (1 + gamma)| = {worst:.3e}"),
    ))
}

fn claim_bound_chain(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for (n, k) in [(4, 2), (5, 3), (6, 3)] {
        let dims = DimPair::new(n, k)?;
        for variant in [BumpVariant::Parabola, BumpVariant::Glued(Transition::Quintic)] {
            let params = ConstructionParams::new(dims, 0.5, 0.0625, variant)?;
            let r = build_g(&params)?;
            if r.value_at_s0 != -1.0 {
                return Ok((false, format!("({n}, {k}) {variant:?}: g(s0) = {}", r.value_at_s0)));
            }
            let bound = r.gamma_star * (1.0 - r.gamma) - r.gamma;
            let v = verify_claims(&r, dims, CLAIM_GRID)?
                .verification
                .expect("filled by verify_claims");
            for (margin, slack) in [(v.min_dual_margin, v.dual_slack), (v.min_perp_margin, v.perp_slack)] {
                worst = worst.min(margin + 1.0 + slack - bound);
            }
        }
    }
    Ok((
        worst >= -1e-9,
        format!("min over claims of (margin + 1 + slack) - (gamma*(1 - gamma) - gamma) = {worst:.3e}"),
    ))
}

fn certificate_soundness(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cert = make_certificate(&default_params(), DEFAULT_DEGREE)?;
    let spec = TransformSpec::new(4, 2)?;
    let mut roundtrip = 0.0f64;
    for _ in 0..200 {
        let s: f64 = rng.gen();
        let w = cert.witness.evaluate(s)?;
        roundtrip = roundtrip.max((forward(spec, &cert.preimage_bernstein, s)? - w).abs() / w.abs().max(1.0));
    }
    let ok = cert.nonnegativity_floor >= 0.0
        && roundtrip <= ROUNDTRIP_TOL
        && cert.pairing_value < 0.0
        && cert.pairing_value.abs() > 10.0 * pairing_tolerance();
    Ok((
        ok,
        format!(
            "floor {:.3e}, round trip {roundtrip:.3e}, pairing {:.6e} at j = {}",
            cert.nonnegativity_floor, cert.pairing_value, cert.witness_index
        ),
    ))
}

fn pairing_linearity(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let dims = DimPair::new(4, 2)?;
    let g = build_g(&default_params())?.g;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let degree = rng.gen_range(2..=30);
        let c1: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let mix: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a * x + b * y).collect();
        let lhs = pairing(dims, &g, &RadialProfile::bernstein(degree, mix)?)?;
        let rhs = a * pairing(dims, &g, &RadialProfile::bernstein(degree, c1)?)?
            + b * pairing(dims, &g, &RadialProfile::bernstein(degree, c2)?)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok((worst <= 1e-10, format!("max abs gap {worst:.3e}")))
}

/// Midpoint rule with `points` nodes for
/// `b_{n,n-k} int_0^1 g(s) p(s) (1-s^2)^((n-k-2)/2) s^(k-1) ds`.
pub fn pairing_midpoint(dims: DimPair, g: &RadialProfile, p: &RadialProfile, points: usize) -> Result<f64> {
    let b = bipolar_constant(dims.n(), dims.co_k())?;
    let ea = (dims.co_k() as f64 - 2.0) / 2.0;
    let eb = dims.k() as i32 - 1;
    let h = 1.0 / points as f64;
    let mut sum = 0.0;
    for i in 0..points {
        let s = (i as f64 + 0.5) * h;
        sum += g.evaluate(s)? * p.evaluate(s)? * (1.0 - s * s).powf(ea) * s.powi(eb);
    }
    Ok(b * sum * h)
}

fn pairing_riemann_oracle(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let cert = make_certificate(&default_params(), DEFAULT_DEGREE)?;
    let oracle = pairing_midpoint(cert.dims, &cert.g, &cert.witness, 1_000_000)?;
    let rel = (cert.pairing_value - oracle).abs() / oracle.abs();
    Ok((
        rel <= 1e-8,
        format!(
            "quadrature {:.12e} vs midpoint {oracle:.12e}, relative {rel:.3e}",
            cert.pairing_value
        ),
    ))
}

fn monotone_refinement(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let params = default_params();
    let g = build_g(&params)?.g;
    let at_n = moment_scan(params.dims, &g, DEFAULT_DEGREE)?;
    let at_2n = moment_scan(params.dims, &g, 2 * DEFAULT_DEGREE)?;
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let (a, b) = (min(&at_n), min(&at_2n));
    Ok((a < 0.0 && b < 0.0, format!("min moment {a:.6e} at N, {b:.6e} at 2N")))
}

fn stable_json(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let first = to_stable_json(&build_g(&default_params())?)?;
    let second = to_stable_json(&build_g(&default_params())?)?;
    Ok((
        first == second,
        format!("{} bytes, identical: {}", first.len(), first == second),
    ))
}
