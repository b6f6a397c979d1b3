//! End-to-end acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout; the
//! process exits nonzero when any criterion fails.

use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kbp_cli::{run, Command as Cmd, RunConfig, EXIT_NEGATIVE};
use kbp_core::certify::moment_scan;
use kbp_core::construct::{verify_all_m, CLAIM_TOLERANCE};
use kbp_core::specfun::{dual_constant, duality_constant, forward_constant, monomial_multiplier};
use kbp_core::transforms::uniform_grid;
use kbp_core::{
    body_profile, build_g, dual, duality_check, forward, perp_dual, verify_claims, window_deltas, ConstructionParams,
    DimPair, RadialProfile, TransformSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

/// Name, check and runtime budget.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lib<T>(r: kbp_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("library error: {e}"))
}

fn default_params(n: u32, k: u32) -> ConstructionParams {
    ConstructionParams::with_defaults(DimPair::new(n, k).unwrap())
}

fn constant_identities() -> Outcome {
    let mut worst = 0.0f64;
    for n in 4..=12 {
        for m in 2..n {
            let e = lib(dual_constant(n, m))?;
            let dc = lib(duality_constant(n, m))? * lib(forward_constant(m))?;
            worst = worst.max((e - dc).abs() / e.abs());
        }
    }
    ensure(
        worst <= 1e-12,
        format!("max relative |e - d c| / e = {worst:.3e} (limit 1e-12)"),
    )
}

fn normalization() -> Outcome {
    let one = RadialProfile::constant(1.0);
    let mut worst = 0.0f64;
    for n in 3..=10 {
        for m in 2..n {
            let spec = lib(TransformSpec::new(n, m))?;
            for t in uniform_grid(101) {
                for v in [forward(spec, &one, t), dual(spec, &one, t), perp_dual(spec, &one, t)] {
                    worst = worst.max((lib(v)? - 1.0).abs());
                }
            }
        }
    }
    ensure(
        worst <= 1e-12,
        format!("max |T(1) - 1| = {worst:.3e} over 101 points, n <= 10 (limit 1e-12)"),
    )
}

fn monomial_law() -> Outcome {
    let anchors = [
        (lib(monomial_multiplier(2, 2))?, 0.5),
        (lib(monomial_multiplier(3, 2))?, 1.0 / 3.0),
    ];
    let anchor_gap = anchors
        .iter()
        .fold(0.0f64, |acc, (got, want)| acc.max((got - want).abs()));
    let mut worst = 0.0f64;
    for m in 2..=10u32 {
        let spec = lib(TransformSpec::new(m + 1, m))?;
        for j in 0..=12u32 {
            let mut c = vec![0.0; j as usize + 1];
            c[j as usize] = 1.0;
            let f = lib(RadialProfile::monomial(c))?;
            let lambda = lib(monomial_multiplier(m, j))?;
            for s in uniform_grid(11) {
                worst = worst.max((lib(forward(spec, &f, s))? - lambda * s.powi(j as i32)).abs());
            }
        }
    }
    ensure(
        worst <= 1e-10 && anchor_gap <= 1e-10,
        format!("max |R(t^j) - lambda s^j| = {worst:.3e}, anchors lambda(2,2), lambda(3,2) off by {anchor_gap:.1e} (limit 1e-10)"),
    )
}

fn random_poly(rng: &mut ChaCha8Rng) -> RadialProfile {
    let degree = rng.gen_range(0..=8);
    RadialProfile::monomial((0..=degree).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd0a1);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 3..=10 {
        for m in 2..n {
            for _ in 0..20 {
                let f = random_poly(&mut rng);
                let g = random_poly(&mut rng);
                worst = worst.max(lib(duality_check(n, m, &f, &g))?.relative_error);
                cases += 1;
            }
        }
    }
    ensure(
        worst <= 1e-8,
        format!("{cases} pairs, max relative gap {worst:.3e} (limit 1e-8)"),
    )
}

fn worked_construction() -> Outcome {
    let params = default_params(4, 2);
    let d = lib(window_deltas(params.s0, params.eps))?;
    let r = lib(build_g(&params))?;
    // n = 4 leaves only m = 2, where mu([0, x]) = 1 - sqrt(1 - x^2); the
    // window mass grows with v, so the sup sits at v = 1 - delta.
    let v = 1.0 - d.delta;
    let closed_gamma = (1.0 - v * v).sqrt();
    let ok = d.delta2 == 0.4
        && (d.delta1 - 0.157925).abs() <= 1e-6
        && (r.gamma - 0.8).abs() <= 1e-9
        && (r.gamma - closed_gamma).abs() <= 1e-9
        && (r.gamma_star - 9.0).abs() <= 1e-8;
    ensure(
        ok,
        format!(
            "delta2 = {}, delta1 = {:.7}, gamma = {:.12} (closed form {:.12}), gamma* = {:.10}",
            d.delta2, d.delta1, r.gamma, closed_gamma, r.gamma_star
        ),
    )
}

fn claim_verification() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (n, k) in [(4, 2), (5, 2), (5, 3), (6, 2), (6, 3), (6, 4), (8, 4)] {
        let params = default_params(n, k);
        let built = lib(build_g(&params))?;
        let checked = lib(verify_claims(&built, params.dims, 4096))?;
        let v = checked.verification.unwrap();
        let min = v.min_dual_margin.min(v.min_perp_margin);
        let pass = min >= -CLAIM_TOLERANCE && built.value_at_s0 == -1.0;
        ok &= pass;
        lines.push(format!("({n},{k}) min-1 = {min:.3e}"));
    }
    let built = lib(build_g(&default_params(6, 3)))?;
    let sweep = lib(verify_all_m(&built, 6, 4096))?;
    let sweep_ok = sweep.len() == 3
        && sweep
            .values()
            .all(|c| c.min_dual_margin.min(c.min_perp_margin) >= -CLAIM_TOLERANCE && c.passed());
    ok &= sweep_ok;
    lines.push(format!(
        "n=6 sweep over k=2,3,4 {}",
        if sweep_ok { "ok" } else { "fails" }
    ));
    ensure(ok, lines.join("; "))
}

/// Independent midpoint sum for `n = 4, k = 2`: weight `s`, constant
/// `b = 2 / B(1, 1) = 2`, profile and Bernstein element written out directly.
fn riemann_pairing(gamma_star: f64, s0: f64, eps: f64, degree: usize, j: usize, points: usize) -> f64 {
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=degree).scan(0.0, |acc, i| {
            *acc += (i as f64).ln();
            Some(*acc)
        }))
        .collect();
    let ln_c = ln_fact[degree] - ln_fact[j] - ln_fact[degree - j];
    let h = 1.0 / points as f64;
    let mut sum = 0.0;
    for i in 0..points {
        let s = (i as f64 + 0.5) * h;
        let g = (gamma_star + 1.0) * ((s - s0) / (2.0 * eps)).powi(2) - 1.0;
        let b = (ln_c + j as f64 * s.ln() + (degree - j) as f64 * (1.0 - s).ln()).exp();
        sum += g * b * s;
    }
    2.0 * sum * h
}

fn certificate() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_kbp"))
        .args(["certify", "--n", "4", "--k", "2"])
        .output()
        .map_err(|e| format!("cannot run kbp: {e}"))?;
    if out.status.code() != Some(0) {
        return Err(format!(
            "certify exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let bundle: Value = serde_json::from_slice(&out.stdout).map_err(|e| format!("bad JSON: {e}"))?;
    let pairing = bundle["pairing_value"].as_f64().ok_or("missing pairing_value")?;
    let j = bundle["witness_index"].as_u64().ok_or("missing witness_index")? as usize;
    let degree = bundle["N"].as_u64().ok_or("missing N")? as usize;
    let roundtrip = bundle["diagnostics"]["roundtrip_error"]
        .as_f64()
        .ok_or("missing roundtrip_error")?;
    let witness: RadialProfile =
        serde_json::from_value(bundle["witness"].clone()).map_err(|e| format!("bad witness: {e}"))?;
    let floor = uniform_grid(4096)
        .into_iter()
        .map(|s| witness.evaluate(s).unwrap())
        .fold(f64::INFINITY, f64::min);
    let gamma_star = bundle["g"]["gamma_star"].as_f64().ok_or("missing gamma_star")?;
    let s0 = bundle["params"]["s0"].as_f64().ok_or("missing s0")?;
    let eps = bundle["params"]["eps"].as_f64().ok_or("missing eps")?;
    let oracle = riemann_pairing(gamma_star, s0, eps, degree, j, 1_000_000);
    let rel = (pairing - oracle).abs() / oracle.abs();
    ensure(
        pairing < -1e-6 && floor >= 0.0 && roundtrip <= 1e-8 && rel <= 1e-8,
        format!(
            "exit 0, N = {degree}, j* = {j}, pairing = {pairing:.9e}, witness floor = {floor:.1e}, round trip = {roundtrip:.2e}, oracle {oracle:.9e} (relative {rel:.2e})"
        ),
    )
}

fn body() -> Outcome {
    let params = default_params(4, 2);
    let rows = lib(body_profile(&params, 4096))?;
    let g1 = lib(lib(build_g(&params))?.g.evaluate(1.0))?;
    let min_rho = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let (t_last, rho_last) = *rows.last().unwrap();
    let gap = (rho_last * rho_last - g1).abs();
    ensure(
        min_rho >= 1.0 && t_last == 1.0 && gap <= 1e-9,
        format!(
            "min rho = {min_rho:.6}, rho(1)^2 = {:.12} vs g(1) = {g1} (gap {gap:.1e})",
            rho_last * rho_last
        ),
    )
}

fn negative_control() -> Outcome {
    let dims = DimPair::new(4, 2).unwrap();
    let one = RadialProfile::constant(1.0);
    let moments = lib(moment_scan(dims, &one, 400))?;
    let min_moment = moments.iter().copied().fold(f64::INFINITY, f64::min);
    let mut config = RunConfig::new(Cmd::Certify, 4, 2);
    config.g_override = Some(one);
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let code = run(&config, &mut stdout, &mut stderr);
    let message = String::from_utf8_lossy(&stderr).trim().to_string();
    ensure(
        min_moment > 0.0 && code == EXIT_NEGATIVE && message.contains("certificate not found"),
        format!("min moment at N=400 = {min_moment:.3e}, exit {code}, \"{message}\""),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("constant identities", constant_identities, Duration::from_secs(1)),
        ("normalization", normalization, Duration::from_secs(10)),
        ("monomial law", monomial_law, Duration::from_secs(5)),
        ("duality identity", duality, Duration::from_secs(30)),
        ("worked construction", worked_construction, Duration::from_secs(1)),
        ("transform claims", claim_verification, Duration::from_secs(120)),
        ("certificate", certificate, Duration::from_secs(60)),
        ("body profile", body, Duration::from_secs(5)),
        ("negative control", negative_control, Duration::from_secs(30)),
    ];
    let mut failures = 0;
    let mut out = std::io::stdout().lock();
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget:?} budget")),
            Err(d) => (false, d),
        };
        failures += usize::from(!pass);
        writeln!(
            out,
            "{} {name} [{:.2}s]: {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        )
        .unwrap();
    }
    writeln!(
        out,
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    )
    .unwrap();
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
