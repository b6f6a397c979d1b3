//! Negative-pairing witness for the constructed profile.
//!
//! Minimizing the (linear) pairing with `g` over non-negative combinations of
//! degree-`N` Bernstein polynomials is attained at a single basis element, so
//! a scan over `B_{j,N}` is a complete search of that family. Every
//! polynomial lies in the range of the forward transform, so the winning
//! basis element is a non-negative function in that range; its preimage is
//! reported both in the monomial basis (where the transform is diagonal) and
//! in the Bernstein basis (where it can be evaluated stably).

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::construct::{build_g, ConstructionParams};
use crate::error::{Error, Result};
use crate::profiles::{bernstein_basis, bernstein_basis_value, PolynomialCoeffs, RadialProfile};
use crate::quadrature::{integrate, CONVERGENCE_TOL};
use crate::specfun::{forward_constant, ln_binomial, monomial_multiplier, DimPair};
use crate::transforms::{dual_grid, forward, pairing_with, uniform_grid, TransformSpec};

pub const DEFAULT_DEGREE: usize = 400;
pub const MAX_DEGREE: usize = 1600;
/// The selected moment must be below this to count as a certificate.
pub const NEGATIVITY_THRESHOLD: f64 = -1e-9;
pub const ROUNDTRIP_TOL: f64 = 1e-8;
const ROUNDTRIP_POINTS: usize = 200;
const ROUNDTRIP_SEED: u64 = 0x5eed_0001;
const FLOOR_GRID: usize = 4096;

/// A non-negative element of the range of the forward transform of index
/// `n - k` that pairs negatively with `g`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub dims: DimPair,
    pub params: ConstructionParams,
    pub g: RadialProfile,
    pub bernstein_degree: usize,
    pub witness_index: usize,
    /// `moments[j] = pairing(g, B_{j,N})`
    pub moments: Vec<f64>,
    pub pairing_value: f64,
    /// `B_{j*,N}`
    pub witness: RadialProfile,
    /// Monomial coefficients of the preimage; `None` when the monomial
    /// expansion of the witness overflows `f64`.
    pub preimage: Option<PolynomialCoeffs>,
    /// The same preimage as a degree-`N` Bernstein polynomial.
    pub preimage_bernstein: RadialProfile,
    /// Largest relative gap between `forward(preimage)` and the witness.
    pub roundtrip_error: f64,
    /// Minimum of the witness on a 4096-point grid.
    pub nonnegativity_floor: f64,
    /// Gap between the two preimage representations, relative to the largest
    /// monomial coefficient.
    pub representation_gap: Option<f64>,
}

impl Certificate {
    /// The JSON bundle written by the command-line tool.
    pub fn to_bundle(&self, emit_moments: bool) -> Value {
        let mut bundle = json!({
            "dims": self.dims,
            "params": self.params,
            "g": self.g,
            "N": self.bernstein_degree,
            "witness_index": self.witness_index,
            "pairing_value": self.pairing_value,
            "witness": self.witness,
            "preimage": self.preimage,
            "preimage_bernstein": self.preimage_bernstein,
            "diagnostics": {
                "roundtrip_error": self.roundtrip_error,
                "nonnegativity_floor": self.nonnegativity_floor,
                "representation_gap": self.representation_gap,
                "min_moment": self.pairing_value,
            },
        });
        if emit_moments {
            bundle["moments"] = json!(self.moments);
        }
        bundle
    }
}

/// `pairing(dims, g, B_{j,N})` for `j = 0..=N`, evaluated in parallel.
pub fn moment_scan(dims: DimPair, g: &RadialProfile, degree: usize) -> Result<Vec<f64>> {
    if degree < 1 {
        return Err(Error::Parameter("moment scan needs Bernstein degree >= 1".into()));
    }
    let bps = g.breakpoints();
    (0..=degree)
        .into_par_iter()
        .map(|j| pairing_with(dims, |s| g.value(s), |s| bernstein_basis_value(degree, j, s), &bps))
        .collect()
}

/// The monomial-basis preimage of `p` under the forward transform of index
/// `m`: `q_j = p_j / lambda(m, j)`.
pub fn preimage(p: &PolynomialCoeffs, m: u32) -> Result<PolynomialCoeffs> {
    let coeffs = p
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if *c == 0.0 {
                Ok(0.0)
            } else {
                Ok(c / monomial_multiplier(m, j as u32)?)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PolynomialCoeffs::new(coeffs))
}

/// Bernstein coefficients of the preimage of a degree-`N` Bernstein
/// polynomial under the forward transform of index `m`.
///
/// In the Bernstein basis the transform is lower triangular:
/// `R_m(B_{i,N}) = sum_{r >= i} C(r, i) mu_{i,r-i} B_{r,N}` with
/// `mu_{i,l} = c_m int_0^1 t^i (1-t)^l (1-t^2)^((m-3)/2) dt`, so the preimage
/// follows from forward substitution.
pub fn preimage_bernstein(degree: usize, coeffs: &[f64], m: u32) -> Result<Vec<f64>> {
    if coeffs.len() != degree + 1 {
        return Err(Error::Parameter(
            "Bernstein coefficient count does not match degree".into(),
        ));
    }
    let c = forward_constant(m)?;
    let Some(first) = coeffs.iter().position(|x| *x != 0.0) else {
        return Ok(vec![0.0; degree + 1]);
    };
    // rows[r - first][i - first] = C(r, i) mu_{i, r-i} for first <= i <= r
    let rows: Vec<Vec<f64>> = (first..=degree)
        .into_par_iter()
        .map(|r| (first..=r).map(|i| triangular_entry(m, c, r, i)).collect())
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; degree + 1];
    for r in first..=degree {
        let row = &rows[r - first];
        let mut acc = coeffs[r];
        for i in first..r {
            acc -= row[i - first] * out[i];
        }
        out[r] = acc / row[r - first];
    }
    Ok(out)
}

fn triangular_entry(m: u32, c: f64, r: usize, i: usize) -> Result<f64> {
    let ln_c = ln_binomial(r, i);
    let l = (r - i) as f64;
    let fi = i as f64;
    let exp = (m - 2) as i32;
    let v = integrate("Bernstein transform entry", &[0.0, FRAC_PI_2], |a| {
        let (sin, cos) = a.sin_cos();
        let half = (0.5 * a).sin();
        let mut ln = ln_c;
        if i > 0 {
            ln += fi * cos.ln();
        }
        if r > i {
            ln += l * (2.0 * half * half).ln();
        }
        Ok(ln.exp() * sin.powi(exp))
    })?;
    Ok(c * v)
}

/// Build the profile for `params` and certify it at Bernstein degree `degree`.
pub fn make_certificate(params: &ConstructionParams, degree: usize) -> Result<Certificate> {
    let built = build_g(params)?;
    certificate_for_profile(params, &built.g, degree)
}

/// Certify an arbitrary profile `g` at the given degree.
pub fn certificate_for_profile(params: &ConstructionParams, g: &RadialProfile, degree: usize) -> Result<Certificate> {
    let dims = params.dims;
    let m = dims.co_k();
    let moments = moment_scan(dims, g, degree)?;
    let (witness_index, &pairing_value) = moments
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least two moments");
    if pairing_value >= NEGATIVITY_THRESHOLD {
        return Err(Error::CertificateNotFound {
            degree,
            min_moment: pairing_value,
        });
    }
    let witness = bernstein_basis(degree, witness_index)?;
    let RadialProfile::Bernstein {
        coeffs: witness_coeffs, ..
    } = &witness
    else {
        unreachable!("bernstein_basis returns a Bernstein profile");
    };

    let monomial = witness.to_monomial().ok();
    let preimage_mono = monomial.as_ref().map(|p| preimage(p, m)).transpose()?;

    let beta = preimage_bernstein(degree, witness_coeffs, m)?;
    let preimage_bern = RadialProfile::bernstein(degree, beta.clone())?;

    let spec = TransformSpec::new(dims.n(), m)?;
    let roundtrip_error = roundtrip(spec, &preimage_bern, &witness)?;
    if roundtrip_error > ROUNDTRIP_TOL {
        return Err(Error::Accuracy {
            what: format!("preimage round trip at degree {degree}"),
            estimate: roundtrip_error,
            change: roundtrip_error,
        });
    }

    let nonnegativity_floor = uniform_grid(FLOOR_GRID)
        .into_iter()
        .map(|s| witness.value(s))
        .fold(f64::INFINITY, f64::min);

    let representation_gap = match (&preimage_mono, RadialProfile::bernstein(degree, beta)?.to_monomial()) {
        (Some(q), Ok(from_bern)) => {
            let scale = q.coeffs().iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
            let gap = q
                .coeffs()
                .iter()
                .zip(from_bern.coeffs())
                .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
            Some(gap / scale)
        }
        _ => None,
    };

    Ok(Certificate {
        dims,
        params: *params,
        g: g.clone(),
        bernstein_degree: degree,
        witness_index,
        moments,
        pairing_value,
        witness,
        preimage: preimage_mono,
        preimage_bernstein: preimage_bern,
        roundtrip_error,
        nonnegativity_floor,
        representation_gap,
    })
}

/// Try `degree`, doubling while no negative moment exists, up to `max_degree`.
pub fn certify_with_doubling(
    params: &ConstructionParams,
    g: &RadialProfile,
    degree: usize,
    max_degree: usize,
) -> Result<Certificate> {
    let mut n = degree.max(1);
    loop {
        match certificate_for_profile(params, g, n) {
            Err(Error::CertificateNotFound { .. }) if n * 2 <= max_degree => n *= 2,
            other => return other,
        }
    }
}

fn roundtrip(spec: TransformSpec, preimage: &RadialProfile, witness: &RadialProfile) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(ROUNDTRIP_SEED);
    let points: Vec<f64> = (0..ROUNDTRIP_POINTS).map(|_| rng.gen::<f64>()).collect();
    let errors = points
        .par_iter()
        .map(|s| {
            let w = witness.value(*s);
            Ok((forward(spec, preimage, *s)? - w).abs() / w.abs().max(1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.into_iter().fold(0.0, f64::max))
}

/// Meridian profile `(t, rho_K(t))` of the body with
/// `rho_K^k = R*_{n-k}(g)` for the constructed `g`.
pub fn body_profile(params: &ConstructionParams, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    let built = build_g(params)?;
    body_profile_for(params.dims, &built.g, grid_size)
}

pub fn body_profile_for(dims: DimPair, g: &RadialProfile, grid_size: usize) -> Result<Vec<(f64, f64)>> {
    if grid_size < 2 {
        return Err(Error::Parameter(format!(
            "profile grid needs at least 2 points, got {grid_size}"
        )));
    }
    let grid = uniform_grid(grid_size);
    let values = dual_grid(TransformSpec::new(dims.n(), dims.co_k())?, g, &grid)?;
    let k = dims.k() as f64;
    grid.into_iter()
        .zip(values)
        .map(|(t, v)| {
            if v < 0.0 {
                return Err(Error::Inconsistent(format!(
                    "dual transform is negative ({v:e}) at t = {t}; no radial function exists"
                )));
            }
            Ok((t, v.powf(1.0 / k)))
        })
        .collect()
}

/// Quadrature tolerance the pairing is converged to, for soundness checks.
pub fn pairing_tolerance() -> f64 {
    CONVERGENCE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::BumpVariant;
    use crate::transforms::pairing;

    fn default_params() -> ConstructionParams {
        ConstructionParams::with_defaults(DimPair::new(4, 2).unwrap())
    }

    #[test]
    fn preimage_examples() {
        let one = PolynomialCoeffs::new(vec![1.0]);
        assert_eq!(preimage(&one, 2).unwrap().coeffs(), &[1.0]);
        let s2 = PolynomialCoeffs::new(vec![0.0, 0.0, 1.0]);
        let q2 = preimage(&s2, 2).unwrap();
        assert!((q2.coeffs()[2] - 2.0).abs() < 1e-13);
        let q3 = preimage(&s2, 3).unwrap();
        assert!((q3.coeffs()[2] - 3.0).abs() < 1e-13);
        assert!(preimage(&s2, 1).is_err());
    }

    #[test]
    fn preimage_roundtrip_low_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 2..7u32 {
            let p = PolynomialCoeffs::new((0..=8).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let q = preimage(&p, m).unwrap();
            let spec = TransformSpec::new(8, m).unwrap();
            for _ in 0..50 {
                let s: f64 = rng.gen();
                let got = forward(spec, &q.to_profile(), s).unwrap();
                let want = p.evaluate(s);
                assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn bernstein_preimage_is_exact_for_m3() {
        // For m = 3 the transform is s -> (1/s) int_0^s, whose inverse maps
        // B_{j,N} to (j+1) (B_{j,N} - B_{j+1,N}).
        let degree = 12;
        let mut p = vec![0.0; degree + 1];
        p[5] = 1.0;
        let q = preimage_bernstein(degree, &p, 3).unwrap();
        for (i, v) in q.iter().enumerate() {
            let want = match i {
                5 => 6.0,
                6 => -6.0,
                _ => 0.0,
            };
            assert!((v - want).abs() < 1e-10, "i={i}: {v}");
        }
    }

    #[test]
    fn bernstein_and_monomial_preimages_agree() {
        let degree = 10;
        let coeffs: Vec<f64> = (0..=degree).map(|i| ((i * 7) % 5) as f64 - 1.5).collect();
        let bern = RadialProfile::bernstein(degree, coeffs.clone()).unwrap();
        for m in 2..6 {
            let from_mono = preimage(&bern.to_monomial().unwrap(), m).unwrap();
            let q = RadialProfile::bernstein(degree, preimage_bernstein(degree, &coeffs, m).unwrap()).unwrap();
            for i in 0..=20 {
                let s = i as f64 / 20.0;
                assert!((q.evaluate(s).unwrap() - from_mono.evaluate(s)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn moments_of_constant_are_positive() {
        let dims = DimPair::new(5, 2).unwrap();
        let one = RadialProfile::constant(1.0);
        let moments = moment_scan(dims, &one, 30).unwrap();
        assert!(moments.iter().all(|m| *m > 0.0));
        let total: f64 = moments.iter().sum();
        assert!((total - pairing(dims, &one, &one).unwrap()).abs() < 1e-12);
        assert!(moment_scan(dims, &one, 0).is_err());
    }

    #[test]
    fn moment_sum_matches_pairing_with_one() {
        let dims = DimPair::new(4, 2).unwrap();
        let g = build_g(&default_params()).unwrap().g;
        let moments = moment_scan(dims, &g, 60).unwrap();
        let total: f64 = moments.iter().sum();
        let direct = pairing(dims, &g, &RadialProfile::constant(1.0)).unwrap();
        assert!((total - direct).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn low_degree_has_no_certificate() {
        match make_certificate(&default_params(), 4) {
            Err(Error::CertificateNotFound { degree, min_moment }) => {
                assert_eq!(degree, 4);
                assert!(min_moment > 0.0);
            }
            other => panic!("expected no certificate, got {other:?}"),
        }
    }

    #[test]
    fn default_certificate() {
        let cert = make_certificate(&default_params(), DEFAULT_DEGREE).unwrap();
        assert!(cert.pairing_value < -1e-6);
        assert!((190..=210).contains(&cert.witness_index));
        assert!(cert.nonnegativity_floor >= 0.0);
        assert!(cert.roundtrip_error <= ROUNDTRIP_TOL);
        assert!(cert.preimage.is_some());
        let bundle = cert.to_bundle(false);
        assert!(bundle.get("moments").is_none());
        assert_eq!(
            cert.to_bundle(true)["moments"].as_array().unwrap().len(),
            DEFAULT_DEGREE + 1
        );
    }

    #[test]
    fn body_of_constant_is_ball() {
        let dims = DimPair::new(6, 3).unwrap();
        for (_, rho) in body_profile_for(dims, &RadialProfile::constant(1.0), 33).unwrap() {
            assert!((rho - 1.0).abs() < 1e-12);
        }
        let neg = RadialProfile::constant(-1.0);
        assert!(matches!(body_profile_for(dims, &neg, 8), Err(Error::Inconsistent(_))));
    }

    #[test]
    fn body_endpoint() {
        let rows = body_profile(&default_params(), 65).unwrap();
        let (t, rho) = rows[rows.len() - 1];
        assert_eq!(t, 1.0);
        assert!((rho - 159f64.sqrt()).abs() < 1e-6);
        assert!(rows.iter().all(|(_, r)| *r >= 1.0));
    }

    #[test]
    fn glued_certificate() {
        let p = ConstructionParams::new(
            DimPair::new(5, 3).unwrap(),
            0.5,
            0.0625,
            BumpVariant::Glued(Default::default()),
        )
        .unwrap();
        let g = build_g(&p).unwrap().g;
        let cert = certify_with_doubling(&p, &g, 100, MAX_DEGREE).unwrap();
        assert!(cert.pairing_value < 0.0);
        assert!(cert.roundtrip_error <= ROUNDTRIP_TOL);
    }
}
