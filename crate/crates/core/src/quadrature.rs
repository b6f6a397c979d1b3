//! Gauss-Legendre rules and the adaptive order-doubling integrator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, RwLock};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 1024;

/// Orders tried by [`integrate`], in sequence.
pub const ORDER_SCHEDULE: [usize; 6] = [32, 64, 128, 256, 512, 1024];

/// Successive estimates must agree to this times `max(1, |value|)`.
pub const CONVERGENCE_TOL: f64 = 1e-12;

static RULES: LazyLock<RwLock<HashMap<usize, Arc<QuadratureRule>>>> = LazyLock::new(Default::default);

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights affinely mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// `int_a^b f` with this rule.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    fn compute(order: usize) -> Self {
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..order.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Self { order, nodes, weights }
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The Gauss-Legendre rule of the given order, computed once and cached.
pub fn gauss_legendre(order: usize) -> Result<Arc<QuadratureRule>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Parameter(format!(
            "quadrature order must lie in 1..={MAX_ORDER}, got {order}"
        )));
    }
    if let Some(rule) = RULES.read().expect("quadrature cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(QuadratureRule::compute(order));
    let mut cache = RULES.write().expect("quadrature cache poisoned");
    Ok(Arc::clone(cache.entry(order).or_insert(rule)))
}

/// Integrate `f` over `[cuts[0], cuts[last]]`, applying the same rule on each
/// piece between consecutive cuts and doubling the order until two
/// successive totals agree.
pub fn integrate<F>(what: &str, cuts: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    debug_assert!(cuts.len() >= 2);
    let mut previous: Option<f64> = None;
    let mut change = f64::INFINITY;
    let mut estimate = f64::NAN;
    for order in ORDER_SCHEDULE {
        let rule = gauss_legendre(order)?;
        let mut total = 0.0;
        for piece in cuts.windows(2) {
            if piece[1] <= piece[0] {
                continue;
            }
            for (x, w) in rule.mapped(piece[0], piece[1]) {
                total += w * f(x)?;
            }
        }
        if !total.is_finite() {
            return Err(Error::Accuracy {
                what: format!("{what}: non-finite quadrature value"),
                estimate: total,
                change,
            });
        }
        if let Some(prev) = previous {
            change = (total - prev).abs();
            if change <= CONVERGENCE_TOL * total.abs().max(1.0) {
                return Ok(total);
            }
        }
        previous = Some(total);
        estimate = total;
    }
    Err(Error::Accuracy {
        what: format!("{what}: no convergence at order {MAX_ORDER}"),
        estimate,
        change,
    })
}

/// Sort, clip to `[a, b]` and deduplicate interior cut points, then add the
/// interval ends.
pub(crate) fn cut_points(a: f64, b: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14);
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(a);
    out.extend(pts);
    out.push(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_one() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn order_two_is_exact_for_cubics() {
        let r = gauss_legendre(2).unwrap();
        assert!((r.integrate(0.0, 1.0, |t| t * t) - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.integrate(0.0, 1.0, |t| t * t * t) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_orders() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn weights_positive_and_nodes_symmetric() {
        for order in [3, 7, 32, 101, 512, 1024] {
            let r = gauss_legendre(order).unwrap();
            assert!(r.weights().iter().all(|w| *w > 0.0));
            let sum: f64 = r.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "order {order}: {sum}");
            for i in 0..order {
                assert!((r.nodes()[i] + r.nodes()[order - 1 - i]).abs() < 1e-15);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            let mapped: f64 = r.mapped(0.0, 3.0).map(|(_, w)| w).sum();
            assert!((mapped - 3.0).abs() < 1e-13);
        }
    }

    #[test]
    fn exact_up_to_degree_two_n_minus_one() {
        for order in [1usize, 2, 5, 16, 33, 64] {
            let r = gauss_legendre(order).unwrap();
            for d in 0..2 * order {
                let got = r.integrate(0.0, 1.0, |t| t.powi(d as i32));
                let want = 1.0 / (d as f64 + 1.0);
                assert!(
                    (got - want).abs() <= 1e-13 * want,
                    "order {order} degree {d}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = gauss_legendre(77).unwrap();
        let b = gauss_legendre(77).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn adaptive_integration() {
        let v = integrate("sin", &[0.0, PI], |x| Ok(x.sin())).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
        let pieces = cut_points(0.0, 1.0, [0.5, 0.25, 2.0, 0.25]);
        assert_eq!(pieces, vec![0.0, 0.25, 0.5, 1.0]);
        let kink = integrate("abs", &cut_points(-1.0, 1.0, [0.0]), |x| Ok(x.abs())).unwrap();
        assert!((kink - 1.0).abs() < 1e-14);
        let err = integrate("sqrt-singular", &[0.0, 1.0], |x| Ok(1.0 / x.sqrt()));
        assert!(matches!(err, Err(Error::Accuracy { .. })));
    }
}
