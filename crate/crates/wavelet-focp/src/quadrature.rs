//! Definite integrals over [0,1]: panelized Gauss–Legendre rules for
//! integrands that are smooth on each panel, the closed-form
//! Riemann–Liouville integral of a monomial restricted to a block, and a
//! Gauss–Jacobi oracle that evaluates the same integral by quadrature
//! with the singular kernel absorbed into the weight function.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use thiserror::Error;

use crate::special_functions::{
    gamma_fn, ln_gamma, regularized_incomplete_beta, SpecialFunctionError,
};

/// Errors from quadrature construction and the fractional-integral kernels.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid panel list: {detail}")]
    InvalidPanels { detail: String },

    #[error("fractional integral domain error: {detail}")]
    Domain { detail: String },

    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
}

/// A Gauss–Legendre rule on the reference interval [−1, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    /// Legendre nodes, ascending, all strictly inside (−1, 1).
    pub nodes: Vec<f64>,
    /// Positive weights summing to 2.
    pub weights: Vec<f64>,
    /// Number of nodes; polynomials of degree ≤ 2·order − 1 are integrated exactly.
    pub order: usize,
}

impl QuadratureRule {
    /// ∫_a^b f, mapping this reference rule affinely onto [a, b].
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

/// Legendre polynomial P_q and its derivative at x, by the three-term
/// recurrence.
fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=q {
        let j = j as f64;
        let next = ((2.0 * j - 1.0) * x * p - (j - 1.0) * p_prev) / j;
        p_prev = p;
        p = next;
    }
    let dp = q as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

fn compute_gauss_legendre(order: usize) -> QuadratureRule {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    // Newton iteration from Chebyshev-type initial guesses; only the lower
    // half is computed, the rest follows by symmetry so the rule is exactly
    // symmetric in floating point.
    for i in 0..order.div_ceil(2) {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                x -= p / d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // cos() above starts from the largest root; store ascending.
        nodes[i] = -x.abs();
        nodes[order - 1 - i] = x.abs();
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    QuadratureRule { nodes, weights, order }
}

static RULE_CACHE: OnceLock<RwLock<HashMap<usize, QuadratureRule>>> = OnceLock::new();

/// The Gauss–Legendre rule of the given order, from a process-wide cache
/// (construction happens once per order; later calls only read).
pub fn gauss_legendre(order: usize) -> QuadratureRule {
    assert!(
        (1..=128).contains(&order),
        "Gauss-Legendre order must be in 1..=128, got {order}"
    );
    let cache = RULE_CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(rule) = cache.read().expect("quadrature cache poisoned").get(&order) {
        return rule.clone();
    }
    let rule = compute_gauss_legendre(order);
    cache
        .write()
        .expect("quadrature cache poisoned")
        .entry(order)
        .or_insert_with(|| rule.clone());
    rule
}

/// ∫₀¹ f as a sum of Gauss–Legendre panels. The panel list must start at
/// 0, end at 1, and be strictly increasing; integrands are expected to be
/// smooth on each open panel.
pub fn integrate_piecewise(
    f: &dyn Fn(f64) -> f64,
    panels: &[f64],
    order: usize,
) -> Result<f64, QuadratureError> {
    validate_panels(panels)?;
    let rule = gauss_legendre(order);
    let mut acc = 0.0;
    for pair in panels.windows(2) {
        acc += rule.integrate(f, pair[0], pair[1]);
    }
    Ok(acc)
}

fn validate_panels(panels: &[f64]) -> Result<(), QuadratureError> {
    if panels.len() < 2 {
        return Err(QuadratureError::InvalidPanels {
            detail: format!("need at least two breakpoints, got {}", panels.len()),
        });
    }
    if panels[0].abs() > 1e-12 || (panels[panels.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(QuadratureError::InvalidPanels {
            detail: format!(
                "panels must span [0, 1], got [{}, {}]",
                panels[0],
                panels[panels.len() - 1]
            ),
        });
    }
    for pair in panels.windows(2) {
        if pair[1] <= pair[0] {
            return Err(QuadratureError::InvalidPanels {
                detail: format!("breakpoints not strictly increasing at {} .. {}", pair[0], pair[1]),
            });
        }
    }
    Ok(())
}

fn check_rl_domain(mu: f64, p: f64, a: f64, b: f64, zeta: f64) -> Result<(), QuadratureError> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(QuadratureError::Domain {
            detail: format!("integration order mu must lie in (0, 1], got {mu}"),
        });
    }
    if !(p >= 0.0) {
        return Err(QuadratureError::Domain {
            detail: format!("monomial exponent p must be nonnegative, got {p}"),
        });
    }
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(QuadratureError::Domain {
            detail: format!("block [{a}, {b}) must satisfy 0 <= a < b <= 1"),
        });
    }
    if !(0.0..=1.0).contains(&zeta) {
        return Err(QuadratureError::Domain {
            detail: format!("evaluation point zeta must lie in [0, 1], got {zeta}"),
        });
    }
    Ok(())
}

/// Riemann–Liouville integral of order `mu` of the block-restricted
/// monomial ϖ ↦ ϖ^p·χ_{[a,b)}(ϖ), evaluated at ζ:
///
///   (1/Γ(μ)) ∫_a^{min(ζ,b)} (ζ−ϖ)^{μ−1} ϖ^p dϖ
///     = Γ(p+1)/Γ(p+1+μ) · ζ^{p+μ} · [ I_u(p+1, μ) − I_{a/ζ}(p+1, μ) ],
///
/// with u = min(1, b/ζ) and I the regularized incomplete beta function.
/// Zero for ζ ≤ a. Exact up to the accuracy of the beta evaluation — the
/// singular kernel never meets a quadrature rule here.
pub fn rl_integral_monomial(
    mu: f64,
    p: f64,
    a: f64,
    b: f64,
    zeta: f64,
) -> Result<f64, QuadratureError> {
    check_rl_domain(mu, p, a, b, zeta)?;
    if zeta <= a {
        return Ok(0.0);
    }
    let u = (b / zeta).min(1.0);
    // Ratio of Gamma values in log space: robust for large p.
    let front = (ln_gamma(p + 1.0)? - ln_gamma(p + 1.0 + mu)?).exp();
    let tail = regularized_incomplete_beta(p + 1.0, mu, u)?
        - regularized_incomplete_beta(p + 1.0, mu, a / zeta)?;
    Ok(front * zeta.powf(p + mu) * tail)
}

/// Recurrence coefficients for the Jacobi weight (1−x)^α(1+x)^0 on [−1,1]
/// turned into nodes/weights by the Golub–Welsch eigenvalue method.
fn gauss_jacobi_one_sided(order: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    use nalgebra::DMatrix;

    debug_assert!(alpha > -1.0);
    let n = order;
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let diag = if i == 0 {
            -alpha / (alpha + 2.0)
        } else {
            let two_i = 2.0 * i as f64;
            -(alpha * alpha) / ((two_i + alpha) * (two_i + alpha + 2.0))
        };
        jacobi[(i, i)] = diag;
    }
    for i in 1..n {
        let fi = i as f64;
        let b_sq = if i == 1 {
            4.0 * (1.0 + alpha) / ((2.0 + alpha) * (2.0 + alpha) * (3.0 + alpha))
        } else {
            let t = 2.0 * fi + alpha;
            4.0 * fi * fi * (fi + alpha) * (fi + alpha) / (t * t * (t + 1.0) * (t - 1.0))
        };
        let b = b_sq.sqrt();
        jacobi[(i - 1, i)] = b;
        jacobi[(i, i - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    // Total mass of the weight: ∫(1−x)^α dx = 2^{α+1}/(α+1).
    let mu0 = 2.0f64.powf(alpha + 1.0) / (alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let first = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * first * first)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Quadrature oracle for the same block-restricted Riemann–Liouville
/// integral as [`rl_integral_monomial`], used to cross-validate the closed
/// form in tests. When the singular endpoint ϖ = ζ lies inside the block,
/// the kernel (ζ−ϖ)^{μ−1} is absorbed into a Gauss–Jacobi weight; otherwise
/// the integrand is smooth and plain Gauss–Legendre applies.
pub fn gauss_jacobi_rl_oracle(
    mu: f64,
    p: f64,
    a: f64,
    b: f64,
    zeta: f64,
    order: usize,
) -> Result<f64, QuadratureError> {
    check_rl_domain(mu, p, a, b, zeta)?;
    if zeta <= a {
        return Ok(0.0);
    }
    let upper = zeta.min(b);
    let mid = 0.5 * (a + upper);
    let half = 0.5 * (upper - a);
    let gamma_mu = gamma_fn(mu)?;
    if zeta <= b {
        // Singular endpoint: ζ−ϖ = half·(1−s) exactly, so the kernel
        // becomes the Jacobi weight (1−s)^{μ−1} and a factor half^{μ−1}.
        let (nodes, weights) = gauss_jacobi_one_sided(order, mu - 1.0);
        let mut acc = 0.0;
        for (s, w) in nodes.iter().zip(&weights) {
            acc += w * (mid + half * s).powf(p);
        }
        Ok(half.powf(mu) * acc / gamma_mu)
    } else {
        let rule = gauss_legendre(order.min(128));
        let mut acc = 0.0;
        for (s, w) in rule.nodes.iter().zip(&rule.weights) {
            let point = mid + half * s;
            acc += w * (zeta - point).powf(mu - 1.0) * point.powf(p);
        }
        Ok(half * acc / gamma_mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn one_point_rule_is_midpoint() {
        let rule = gauss_legendre(1);
        assert_eq!(rule.nodes, vec![0.0]);
        assert_abs_diff_eq!(rule.weights[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_rule_has_symmetric_nodes() {
        let rule = gauss_legendre(2);
        let r = 1.0 / 3.0f64.sqrt();
        assert_abs_diff_eq!(rule.nodes[0], -r, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.nodes[1], r, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_two_and_nodes_stay_interior() {
        for order in [1, 2, 3, 5, 8, 13, 21, 40, 64, 128] {
            let rule = gauss_legendre(order);
            let sum: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-13);
            assert!(rule.nodes.iter().all(|x| x.abs() < 1.0));
            assert!(rule.weights.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn polynomial_exactness_at_degree_bound() {
        // Degree 2Q−1 must be exact; x^8 with Q=5 is the classic check.
        let rule = gauss_legendre(5);
        let value = rule.integrate(&|x| x.powi(8), -1.0, 1.0);
        assert_abs_diff_eq!(value, 2.0 / 9.0, epsilon = 1e-14);
        for order in 1..=8usize {
            let rule = gauss_legendre(order);
            let deg = 2 * order - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let got = rule.integrate(&|x| x.powi(deg as i32), -1.0, 1.0);
            assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn piecewise_integration_on_simple_functions() {
        assert_abs_diff_eq!(
            integrate_piecewise(&|_| 1.0, &[0.0, 1.0], 4).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            integrate_piecewise(&|x| x * x, &[0.0, 0.3, 1.0], 4).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn piecewise_integration_rejects_bad_panels() {
        assert!(integrate_piecewise(&|_| 1.0, &[0.0], 4).is_err());
        assert!(integrate_piecewise(&|_| 1.0, &[0.1, 1.0], 4).is_err());
        assert!(integrate_piecewise(&|_| 1.0, &[0.0, 0.9], 4).is_err());
        assert!(integrate_piecewise(&|_| 1.0, &[0.0, 0.5, 0.5, 1.0], 4).is_err());
    }

    #[test]
    fn rl_integral_of_unit_function_is_power_law() {
        // I^μ 1 = ζ^μ/Γ(μ+1).
        for mu in [0.3, 0.5, 0.9, 1.0] {
            for zeta in [0.1, 0.3, 0.7, 1.0] {
                let got = rl_integral_monomial(mu, 0.0, 0.0, 1.0, zeta).unwrap();
                let expect = zeta.powf(mu) / gamma_fn(mu + 1.0).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-12);
            }
        }
        assert_relative_eq!(
            rl_integral_monomial(0.5, 0.0, 0.0, 1.0, 0.3).unwrap(),
            0.618_038_723_237_103_29,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rl_integral_at_order_one_is_ordinary_integration() {
        // I¹(ϖ·χ_{[0,1)})(ζ) = ζ²/2.
        for zeta in [0.2, 0.5, 0.8, 1.0] {
            assert_relative_eq!(
                rl_integral_monomial(1.0, 1.0, 0.0, 1.0, zeta).unwrap(),
                zeta * zeta / 2.0,
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn rl_integral_matches_reference_values() {
        // Cross-checked against an independent implementation.
        assert_relative_eq!(
            rl_integral_monomial(0.9, 0.9, 0.5, 1.0, 0.7).unwrap(),
            0.155_389_896_847_048_71,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            rl_integral_monomial(0.7, 1.4, 0.25, 1.0, 0.9).unwrap(),
            0.440_330_008_425_896_42,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            rl_integral_monomial(0.9, 0.0, 0.462_937_35, 1.0, 1.0).unwrap(),
            0.594_227_999_200_986_57,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            rl_integral_monomial(0.6, 1.2, 0.0, 0.314_98, 0.8).unwrap(),
            0.029_935_381_389_475_813,
            max_relative = 1e-11
        );
    }

    #[test]
    fn rl_integral_vanishes_before_the_block() {
        assert_eq!(rl_integral_monomial(0.7, 2.0, 0.5, 0.75, 0.4).unwrap(), 0.0);
        assert_eq!(gauss_jacobi_rl_oracle(0.7, 2.0, 0.5, 0.75, 0.4, 30).unwrap(), 0.0);
    }

    #[test]
    fn rl_integral_rejects_bad_domains() {
        assert!(rl_integral_monomial(0.0, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(rl_integral_monomial(1.5, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(rl_integral_monomial(0.5, -0.1, 0.0, 1.0, 0.5).is_err());
        assert!(rl_integral_monomial(0.5, 1.0, 0.5, 0.25, 0.5).is_err());
        assert!(rl_integral_monomial(0.5, 1.0, 0.0, 1.0, 1.25).is_err());
    }

    #[test]
    fn jacobi_oracle_agrees_with_closed_form_on_spot_checks() {
        // Singular-endpoint branch (ζ inside the block).
        for (mu, p, a, b, zeta) in [
            (0.9, 0.9, 0.5, 1.0, 0.7),
            (0.5, 1.0, 0.25, 0.75, 0.6),
            (0.3, 2.3, 0.1, 0.9, 0.85),
        ] {
            let exact = rl_integral_monomial(mu, p, a, b, zeta).unwrap();
            let oracle = gauss_jacobi_rl_oracle(mu, p, a, b, zeta, 60).unwrap();
            assert_relative_eq!(oracle, exact, max_relative = 1e-11);
        }
        // Smooth branch (ζ beyond the block).
        for (mu, p, a, b, zeta) in [(0.9, 1.8, 0.1, 0.4, 0.9), (0.6, 0.6, 0.2, 0.5, 1.0)] {
            let exact = rl_integral_monomial(mu, p, a, b, zeta).unwrap();
            let oracle = gauss_jacobi_rl_oracle(mu, p, a, b, zeta, 60).unwrap();
            assert_relative_eq!(oracle, exact, max_relative = 1e-9);
        }
        // Polynomial integrand from the left edge of the domain: exact for
        // the oracle as well.
        let exact = rl_integral_monomial(0.5, 1.0, 0.0, 1.0, 0.6).unwrap();
        let oracle = gauss_jacobi_rl_oracle(0.5, 1.0, 0.0, 1.0, 0.6, 20).unwrap();
        assert_relative_eq!(oracle, exact, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_oracle_with_unit_order_reduces_to_legendre() {
        // μ = 1 removes the kernel: I¹ of ϖ^p over [a, min(ζ,b)].
        let got = gauss_jacobi_rl_oracle(1.0, 2.0, 0.2, 0.8, 0.9, 20).unwrap();
        let exact = (0.8f64.powi(3) - 0.2f64.powi(3)) / 3.0;
        assert_relative_eq!(got, exact, max_relative = 1e-13);
    }
}
