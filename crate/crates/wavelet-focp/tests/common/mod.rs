//! Shared fixtures for the integration suites: published reference
//! values, benchmark problem builders, and small numeric helpers.

// Each integration binary uses its own subset of these helpers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use wavelet_focp::analysis::{benchmark_problem1, benchmark_problem2};
use wavelet_focp::basis::BasisSpec;
use wavelet_focp::focp_solver::FocpProblem;

/// Quadrature order used throughout the suites.
pub const QUAD: usize = 40;

pub fn spec(k: u32, m: usize, mu: f64) -> BasisSpec {
    BasisSpec::new(k, m, mu).expect("valid basis parameters")
}

pub fn problem1(s: BasisSpec, dynamics_order: f64) -> FocpProblem {
    benchmark_problem1(s, dynamics_order).expect("benchmark data is valid")
}

pub fn problem2(s: BasisSpec, dynamics_order: f64) -> FocpProblem {
    benchmark_problem2(s, dynamics_order).expect("benchmark data is valid")
}

/// Published D(0.9) for k=2, M=3, first support block (values quoted to
/// six significant figures).
pub const PRINTED_DUAL_BLOCK1: [[f64; 3]; 3] = [
    [0.925875, 0.0844033, -0.0311326],
    [0.0844033, 0.898029, 0.0903579],
    [-0.0311326, 0.0903579, 0.896687],
];

/// Published D(0.9) for k=2, M=3, second support block.
pub const PRINTED_DUAL_BLOCK2: [[f64; 3]; 3] = [
    [1.07413, 0.0234615, -0.00184153],
    [0.0234615, 1.07248, 0.0211615],
    [-0.00184153, 0.0211615, 1.07293],
];

/// Published order-0.9 integration matrix for k=2, M=2 (the quoted
/// worked example). Computed there with the μ-scaled classical integral
/// convention; see `IntegralRule::ClassicalScaled`.
pub const PRINTED_INTEGRATION: [[f64; 4]; 4] = [
    [0.197148, 0.122578, 0.416644, 6.13304e-12],
    [-0.0998925, 0.0111862, 0.038012, 5.59535e-13],
    [0.0, 0.0, 0.238628, 0.139667],
    [0.0, 0.0, -0.134174, 0.00305066],
];

/// Published cost table for the first benchmark, k=2, M=3:
/// (μ, uniform-basis cost, fractional-basis cost).
pub const TABLE_COSTS_P1: [(f64, f64, f64); 7] = [
    (1.0, 0.431987, 0.431987),
    (0.99, 0.429029, 0.429028),
    (0.9, 0.403542, 0.403422),
    (0.8, 0.377656, 0.377388),
    (0.7, 0.355052, 0.354417),
    (0.6, 0.336731, 0.335404),
    (0.5, 0.324598, 0.322129),
];

/// Published cost table for the second benchmark, k=2, M=4:
/// (μ, uniform-basis cost, fractional-basis cost).
pub const TABLE_COSTS_P2: [(f64, f64, f64); 5] = [
    (1.0, 0.454499, 0.454499),
    (0.99, 0.452568, 0.452568),
    (0.9, 0.434207, 0.434201),
    (0.8, 0.412561, 0.412541),
    (0.7, 0.391139, 0.391116),
];

/// Published pointwise values: (description, printed value).
/// Configurations are hard-wired where they are used.
pub const SPOT_X1_P1_MU099: f64 = 0.705731; // x₁(0.5), fractional basis, μ=0.99
pub const SPOT_X2_P1_MU09: f64 = 0.62253; // x₂(0.2), fractional basis, μ=0.9
pub const SPOT_U_P2_MU09: f64 = 0.0739984; // u(0.5), fractional basis, μ=0.9

/// Orthogonal projection of `z` onto the null space of `a`
/// (z − Aᵀ(AAᵀ)⁻¹Az), assuming `a` has full row rank.
pub fn nullspace_project(a: &DMatrix<f64>, z: &DVector<f64>) -> DVector<f64> {
    let gram = a * a.transpose();
    let lu = gram.lu();
    let az = a * z;
    let w = lu.solve(&az).expect("constraint matrix has full row rank");
    z - a.transpose() * w
}
