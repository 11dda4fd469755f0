//! Orthonormal Bernoulli wavelets (uniform supports, μ = 1) and their
//! fractional generalization (supports under the map ζ ↦ ζ^μ), with the
//! index bookkeeping shared by every matrix assembly in the crate.
//!
//! A basis is determined by a resolution level k, a polynomial count M per
//! block, and a fractional order μ ∈ (0, 1]. Block n ∈ 1..2^{k−1} is
//! supported on [((n−1)/2^{k−1})^{1/μ}, (n/2^{k−1})^{1/μ}); on its block,
//! member (n, m) is the normalized Bernoulli polynomial of degree m in the
//! variable 2^{k−1}ζ^μ − (n−1), scaled by 2^{(k−1)/2}.

use nalgebra::DVector;
use thiserror::Error;

use crate::special_functions::{
    bernoulli_numbers, binomial_f64, upsilon, SpecialFunctionError,
};

/// Errors from basis construction and indexing.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum BasisError {
    #[error("invalid basis spec: {detail}")]
    InvalidSpec { detail: String },

    #[error(
        "basis index out of range: block {n}, degree {m} for k={k}, M={m_per_block}"
    )]
    IndexOutOfRange { n: usize, m: usize, k: u32, m_per_block: usize },

    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
}

/// Shape of a wavelet basis: resolution level, polynomials per block, and
/// fractional order of the support geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    k: u32,
    m_per_block: usize,
    mu: f64,
}

impl BasisSpec {
    /// Validates 1 ≤ k, 1 ≤ M ≤ 64 (the exact-Bernoulli degree range) and
    /// μ ∈ (0, 1].
    pub fn new(k: u32, m_per_block: usize, mu: f64) -> Result<Self, BasisError> {
        if k == 0 || k > 16 {
            return Err(BasisError::InvalidSpec {
                detail: format!("resolution level k must lie in 1..=16, got {k}"),
            });
        }
        if m_per_block == 0 || m_per_block > 64 {
            return Err(BasisError::InvalidSpec {
                detail: format!("polynomial count M must lie in 1..=64, got {m_per_block}"),
            });
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(BasisError::InvalidSpec {
                detail: format!("fractional order mu must lie in (0, 1], got {mu}"),
            });
        }
        Ok(Self { k, m_per_block, mu })
    }

    /// Resolution level k.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Polynomials per block, M.
    pub fn m_per_block(&self) -> usize {
        self.m_per_block
    }

    /// Fractional order μ of the support geometry.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Number of blocks, 2^{k−1}.
    pub fn blocks(&self) -> usize {
        1usize << (self.k - 1)
    }

    /// Dilation factor 2^{k−1} as a float.
    pub fn dilation(&self) -> f64 {
        self.blocks() as f64
    }

    /// Total basis dimension m̂ = 2^{k−1}·M.
    pub fn m_hat(&self) -> usize {
        self.blocks() * self.m_per_block
    }

    /// ζ^μ, with the μ = 1 case kept exact.
    fn warp(&self, zeta: f64) -> f64 {
        if self.mu == 1.0 {
            zeta
        } else {
            zeta.powf(self.mu)
        }
    }

    /// (n/2^{k−1})^{1/μ} for n = 0..=blocks: the support edges.
    fn unwarp_edge(&self, n: usize) -> f64 {
        let ratio = n as f64 / self.dilation();
        if self.mu == 1.0 {
            ratio
        } else {
            ratio.powf(1.0 / self.mu)
        }
    }
}

/// Position of member (n, m) in the flattened basis vector: blocks are
/// contiguous and degree-ordered, so the index is (n−1)·M + m.
pub fn flat_index(n: usize, m: usize, spec: &BasisSpec) -> Result<usize, BasisError> {
    if n == 0 || n > spec.blocks() || m >= spec.m_per_block {
        return Err(BasisError::IndexOutOfRange {
            n,
            m,
            k: spec.k,
            m_per_block: spec.m_per_block,
        });
    }
    Ok((n - 1) * spec.m_per_block + m)
}

/// Support [lo, hi) of block n; the last block closes at ζ = 1 so that the
/// basis is total on [0, 1].
pub fn support(n: usize, spec: &BasisSpec) -> (f64, f64) {
    debug_assert!(n >= 1 && n <= spec.blocks(), "block index out of range");
    (spec.unwarp_edge(n - 1), spec.unwarp_edge(n))
}

/// Sorted block edges {(n/2^{k−1})^{1/μ}}, from 0 to 1: the quadrature
/// panel boundaries induced by the basis.
pub fn breakpoints(spec: &BasisSpec) -> Vec<f64> {
    (0..=spec.blocks()).map(|n| spec.unwarp_edge(n)).collect()
}

/// Precomputed polynomial coefficients for one basis spec.
///
/// Row m holds the coefficients of (ζ^μ − (n−1)/2^{k−1})^j, j = 0..=m,
/// with the normalization ξ_m = 2^{(k−1)/2}/Υ_m and the dilation powers
/// 2^{(k−1)j} already folded in; the coefficients are block-independent.
/// Building the table reads the Bernoulli numbers once, so evaluation
/// inside quadrature loops involves no exact-rational arithmetic.
#[derive(Debug, Clone)]
pub struct WaveletTable {
    spec: BasisSpec,
    breakpoints: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl WaveletTable {
    pub fn new(spec: &BasisSpec) -> Result<Self, BasisError> {
        let m_max = spec.m_per_block - 1;
        let table = bernoulli_numbers(m_max.max(1));
        let scale = spec.dilation().sqrt();
        let mut rows = Vec::with_capacity(spec.m_per_block);
        rows.push(vec![scale]);
        for m in 1..=m_max {
            let xi = scale / upsilon(m)?;
            let mut row = Vec::with_capacity(m + 1);
            let mut dilation_power = 1.0;
            for j in 0..=m {
                row.push(xi * binomial_f64(m, j) * table.value_f64(m - j) * dilation_power);
                dilation_power *= spec.dilation();
            }
            rows.push(row);
        }
        Ok(Self { spec: *spec, breakpoints: breakpoints(spec), rows })
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// Block edges shared with [`breakpoints`].
    pub fn panel_edges(&self) -> &[f64] {
        &self.breakpoints
    }

    /// 1-based block index owning ζ: half-open blocks, with ζ = 1 assigned
    /// to the last block.
    pub fn block_of(&self, zeta: f64) -> usize {
        debug_assert!((0.0..=1.0).contains(&zeta), "zeta outside [0, 1]");
        let past = self.breakpoints.partition_point(|edge| *edge <= zeta);
        past.clamp(1, self.spec.blocks())
    }

    /// ψ_{n,m}(ζ): zero outside block n, otherwise the table polynomial in
    /// (ζ^μ − (n−1)/2^{k−1}). Powers accumulate by repeated multiplication
    /// of the base, which is exact at degree zero and sign-safe at the
    /// block's left edge.
    pub fn eval(&self, n: usize, m: usize, zeta: f64) -> f64 {
        debug_assert!(n >= 1 && n <= self.spec.blocks());
        debug_assert!(m < self.spec.m_per_block);
        if self.block_of(zeta) != n {
            return 0.0;
        }
        let base = self.spec.warp(zeta) - (n - 1) as f64 / self.spec.dilation();
        let mut acc = 0.0;
        let mut power = 1.0;
        for coeff in &self.rows[m] {
            acc += coeff * power;
            power *= base;
        }
        acc
    }

    /// Full basis vector Ψ(ζ): only the active block's M entries are
    /// nonzero.
    pub fn eval_vector(&self, zeta: f64) -> DVector<f64> {
        let mut out = DVector::zeros(self.spec.m_hat());
        self.eval_vector_into(zeta, out.as_mut_slice());
        out
    }

    /// As [`Self::eval_vector`], writing into a caller-provided slice of
    /// length m̂ (zeroed here).
    pub fn eval_vector_into(&self, zeta: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.spec.m_hat());
        out.fill(0.0);
        let n = self.block_of(zeta);
        let base = self.spec.warp(zeta) - (n - 1) as f64 / self.spec.dilation();
        let offset = (n - 1) * self.spec.m_per_block;
        for (m, row) in self.rows.iter().enumerate() {
            let mut acc = 0.0;
            let mut power = 1.0;
            for coeff in row {
                acc += coeff * power;
                power *= base;
            }
            out[offset + m] = acc;
        }
    }

    /// Coefficients of block n's members as polynomials in ζ^μ:
    /// out[m][q] multiplies ζ^{μq}, obtained by expanding
    /// (ζ^μ − off)^j = Σ_q C(j,q)·(−off)^{j−q}·ζ^{μq} with
    /// off = (n−1)/2^{k−1}.
    pub fn block_monomial_coefficients(&self, n: usize) -> Vec<Vec<f64>> {
        debug_assert!(n >= 1 && n <= self.spec.blocks());
        let off = (n - 1) as f64 / self.spec.dilation();
        self.rows
            .iter()
            .map(|row| {
                let m = row.len() - 1;
                let mut coeffs = vec![0.0; m + 1];
                for (j, w) in row.iter().enumerate() {
                    let mut off_power = 1.0;
                    // q runs downward so (−off)^{j−q} builds up by repeated
                    // multiplication.
                    for q in (0..=j).rev() {
                        coeffs[q] += w * binomial_f64(j, q) * off_power;
                        off_power *= -off;
                    }
                }
                coeffs
            })
            .collect()
    }
}

/// ψ_{n,m}(ζ) without a precomputed table; prefer [`WaveletTable`] inside
/// loops. Panics only if the Bernoulli normalization table is corrupted,
/// which cannot happen with the exact recurrence.
pub fn eval_wavelet(n: usize, m: usize, zeta: f64, spec: &BasisSpec) -> f64 {
    WaveletTable::new(spec)
        .expect("Bernoulli normalization constants are well defined")
        .eval(n, m, zeta)
}

/// Ψ(ζ) without a precomputed table; prefer [`WaveletTable`] inside loops.
pub fn eval_vector(zeta: f64, spec: &BasisSpec) -> DVector<f64> {
    WaveletTable::new(spec)
        .expect("Bernoulli normalization constants are well defined")
        .eval_vector(zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::normalized_bernoulli;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(k: u32, m: usize, mu: f64) -> BasisSpec {
        BasisSpec::new(k, m, mu).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(BasisSpec::new(0, 3, 1.0).is_err());
        assert!(BasisSpec::new(2, 0, 1.0).is_err());
        assert!(BasisSpec::new(2, 65, 1.0).is_err());
        assert!(BasisSpec::new(2, 3, 0.0).is_err());
        assert!(BasisSpec::new(2, 3, 1.1).is_err());
        let s = spec(3, 4, 0.9);
        assert_eq!(s.blocks(), 4);
        assert_eq!(s.m_hat(), 16);
    }

    #[test]
    fn flat_index_block_major_degree_minor() {
        let s = spec(2, 3, 1.0);
        assert_eq!(flat_index(1, 0, &s).unwrap(), 0);
        assert_eq!(flat_index(2, 0, &s).unwrap(), 3);
        let s = spec(3, 2, 1.0);
        assert_eq!(flat_index(4, 1, &s).unwrap(), 7);
        assert!(flat_index(5, 0, &s).is_err());
        assert!(flat_index(1, 2, &s).is_err());
        assert!(flat_index(0, 0, &s).is_err());
    }

    #[test]
    fn support_geometry() {
        let (lo, hi) = support(1, &spec(2, 1, 1.0));
        assert_eq!((lo, hi), (0.0, 0.5));
        let (lo, hi) = support(1, &spec(2, 1, 0.5));
        assert_abs_diff_eq!(lo, 0.0);
        assert_abs_diff_eq!(hi, 0.25, epsilon = 1e-15);
        let (lo, hi) = support(2, &spec(2, 1, 0.9));
        assert_relative_eq!(lo, 0.5f64.powf(1.0 / 0.9), max_relative = 1e-15);
        assert_abs_diff_eq!(hi, 1.0);
    }

    #[test]
    fn breakpoints_span_unit_interval() {
        assert_eq!(breakpoints(&spec(1, 2, 0.7)), vec![0.0, 1.0]);
        assert_eq!(breakpoints(&spec(2, 2, 1.0)), vec![0.0, 0.5, 1.0]);
        let pts = breakpoints(&spec(2, 2, 0.5));
        assert_abs_diff_eq!(pts[1], 0.25, epsilon = 1e-15);
        let pts = breakpoints(&spec(3, 2, 0.9));
        assert_eq!(pts.len(), 5);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((pts[0], pts[4]), (0.0, 1.0));
    }

    #[test]
    fn constant_member_is_flat_scale_factor() {
        let s = spec(1, 1, 0.6);
        for zeta in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(eval_wavelet(1, 0, zeta, &s), 1.0);
        }
        let s = spec(2, 1, 1.0);
        assert_abs_diff_eq!(eval_wavelet(1, 0, 0.3, &s), 2.0f64.sqrt(), epsilon = 1e-15);
        assert_eq!(eval_wavelet(2, 0, 0.3, &s), 0.0);
    }

    #[test]
    fn degree_one_member_is_scaled_linear_polynomial() {
        // k=1, m=1: ψ(ζ) = B̃_1(ζ)·1 = √12·(ζ − 1/2) = 2√3·ζ − √3.
        let s = spec(1, 2, 1.0);
        for zeta in [0.0, 0.25, 0.6, 1.0] {
            assert_relative_eq!(
                eval_wavelet(1, 1, zeta, &s),
                2.0 * 3.0f64.sqrt() * zeta - 3.0f64.sqrt(),
                max_relative = 1e-13,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn vector_has_single_active_block() {
        let s = spec(2, 2, 1.0);
        let v = eval_vector(0.75, &s);
        assert_eq!(v.len(), 4);
        assert_eq!((v[0], v[1]), (0.0, 0.0));
        assert_abs_diff_eq!(v[2], 2.0f64.sqrt(), epsilon = 1e-15);
        // Degree-1 member vanishes at its block midpoint.
        assert_abs_diff_eq!(v[3], 0.0, epsilon = 1e-13);

        let s = spec(3, 3, 0.8);
        let table = WaveletTable::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let zeta: f64 = rng.gen();
            let v = table.eval_vector(zeta);
            let active: Vec<usize> = (0..v.len()).filter(|i| v[*i] != 0.0).collect();
            let n = table.block_of(zeta);
            assert!(active.iter().all(|i| i / 3 + 1 == n), "one active block only");
        }
    }

    #[test]
    fn zeta_zero_activates_first_block_and_one_closes_last() {
        let s = spec(2, 2, 0.9);
        let table = WaveletTable::new(&s).unwrap();
        assert_eq!(table.block_of(0.0), 1);
        assert_eq!(table.block_of(1.0), 2);
        let v = table.eval_vector(0.0);
        assert!(v[0] != 0.0 && v[1] != 0.0);
        assert_eq!((v[2], v[3]), (0.0, 0.0));
        assert!(table.eval(2, 0, 1.0) != 0.0);
    }

    #[test]
    fn matches_normalized_bernoulli_composition() {
        // On its block, ψ_{n,m}(ζ) = 2^{(k−1)/2}·B̃_m(2^{k−1}ζ^μ − n + 1).
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for (k, m_per_block, mu) in [(1, 4, 1.0), (2, 3, 0.9), (3, 4, 0.7), (2, 5, 0.5)] {
            let s = spec(k, m_per_block, mu);
            let table = WaveletTable::new(&s).unwrap();
            let scale = s.dilation().sqrt();
            for _ in 0..100 {
                let zeta: f64 = rng.gen_range(1e-6..1.0);
                let n = table.block_of(zeta);
                let y = s.dilation() * zeta.powf(mu) - (n as f64 - 1.0);
                for m in 0..m_per_block {
                    let expect = scale * normalized_bernoulli(m, y).unwrap();
                    assert_abs_diff_eq!(table.eval(n, m, zeta), expect, epsilon = 1e-11);
                }
            }
        }
    }

    #[test]
    fn block_monomial_coefficients_reproduce_pointwise_values() {
        let s = spec(2, 4, 0.9);
        let table = WaveletTable::new(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for n in 1..=2usize {
            let coeffs = table.block_monomial_coefficients(n);
            let (lo, hi) = support(n, &s);
            for _ in 0..50 {
                let zeta = rng.gen_range(lo.max(1e-9)..hi);
                let t = zeta.powf(0.9);
                for m in 0..4 {
                    let mut acc = 0.0;
                    let mut t_power = 1.0;
                    for c in &coeffs[m] {
                        acc += c * t_power;
                        t_power *= t;
                    }
                    assert_abs_diff_eq!(acc, table.eval(n, m, zeta), epsilon = 1e-11);
                }
            }
        }
    }
}
