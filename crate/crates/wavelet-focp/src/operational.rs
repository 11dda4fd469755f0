//! Matrix-level machinery over a wavelet basis: the Gram (dual) matrix
//! D(μ), first moments, the order-3 Gram tensor, L²-projection, the
//! product operational matrix, and the operational matrix of fractional
//! integration P^μ.
//!
//! Every application of D^{−1} goes through one LU factorization per
//! assembled Gram matrix; explicit inverses are never formed.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::basis::{flat_index, support, BasisError, BasisSpec, WaveletTable};
use crate::quadrature::{gauss_legendre, rl_integral_monomial, QuadratureError};

/// Condition-estimate ceiling beyond which Gram solves are refused.
const MAX_GRAM_CONDITION: f64 = 1e12;

/// Errors from matrix assembly and projection.
#[derive(Error, Debug)]
pub enum OperationalError {
    #[error(transparent)]
    Basis(#[from] BasisError),

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error(
        "Gram matrix for k={k}, M={m_per_block}, mu={mu} is ill-conditioned \
         (estimate {condition:.3e} exceeds {MAX_GRAM_CONDITION:.0e})"
    )]
    IllConditioned { k: u32, m_per_block: usize, mu: f64, condition: f64 },

    #[error("Gram matrix for k={k}, M={m_per_block}, mu={mu} is numerically singular")]
    SingularGram { k: u32, m_per_block: usize, mu: f64 },

    #[error("dimension mismatch: {detail}")]
    DimensionMismatch { detail: String },

    #[error("invalid integration order: mu must lie in (0, 1], got {0}")]
    InvalidOrder(f64),
}

/// Formats a matrix as CSV, row-major, 17 significant digits.
fn matrix_csv(entries: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..entries.nrows() {
        let row: Vec<String> =
            (0..entries.ncols()).map(|j| format!("{:.16e}", entries[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// The dual (Gram) matrix D(μ) with its reusable LU factorization and a
/// singular-value condition estimate.
///
/// D is symmetric, block-diagonal with M×M blocks (disjoint supports), and
/// positive definite. At μ = 1 it is the identity whenever every block's
/// polynomial pairs are orthogonal — true up to M = 3; from M = 4 the
/// normalized Bernoulli pairs of equal parity overlap (e.g.
/// ∫B̃₁B̃₃ = −√(7/10)), and all projections account for that through D.
#[derive(Debug)]
pub struct GramMatrix {
    entries: DMatrix<f64>,
    spec: BasisSpec,
    /// Factorization of Dᵀ: projections solve Dᵀ·Ĉ = ⟨f, Ψ⟩.
    lu: LU<f64, Dyn, Dyn>,
    condition: f64,
}

impl GramMatrix {
    fn from_entries(entries: DMatrix<f64>, spec: BasisSpec) -> Self {
        let singular = entries.clone().svd(false, false).singular_values;
        let s_max = singular.max();
        let s_min = singular.min();
        let condition = if s_min > 0.0 { s_max / s_min } else { f64::INFINITY };
        let lu = LU::new(entries.transpose());
        Self { entries, spec, lu, condition }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// σ_max/σ_min estimate from the singular values.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn refuse_if_ill_conditioned(&self) -> Result<(), OperationalError> {
        if self.condition > MAX_GRAM_CONDITION {
            return Err(OperationalError::IllConditioned {
                k: self.spec.k(),
                m_per_block: self.spec.m_per_block(),
                mu: self.spec.mu(),
                condition: self.condition,
            });
        }
        Ok(())
    }

    /// Solves Dᵀ·x = rhs.
    pub fn solve_vector(&self, rhs: &DVector<f64>) -> Result<DVector<f64>, OperationalError> {
        self.refuse_if_ill_conditioned()?;
        self.lu.solve(rhs).ok_or(OperationalError::SingularGram {
            k: self.spec.k(),
            m_per_block: self.spec.m_per_block(),
            mu: self.spec.mu(),
        })
    }

    /// Solves Dᵀ·X = rhs column-wise.
    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>, OperationalError> {
        self.refuse_if_ill_conditioned()?;
        self.lu.solve(rhs).ok_or(OperationalError::SingularGram {
            k: self.spec.k(),
            m_per_block: self.spec.m_per_block(),
            mu: self.spec.mu(),
        })
    }

    /// Row-major CSV dump, 17 significant digits.
    pub fn to_csv(&self) -> String {
        matrix_csv(&self.entries)
    }
}

/// First moments v1[i] = ∫₀¹ ψ_i dζ.
#[derive(Debug, Clone)]
pub struct BasisMoments {
    v1: DVector<f64>,
    spec: BasisSpec,
}

impl BasisMoments {
    pub fn v1(&self) -> &DVector<f64> {
        &self.v1
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn to_csv(&self) -> String {
        let cells: Vec<String> = self.v1.iter().map(|x| format!("{x:.16e}")).collect();
        format!("{}\n", cells.join(","))
    }
}

/// Order-3 Gram tensor E3[i,j,l] = ∫₀¹ ψ_i ψ_j ψ_l dζ, stored as one dense
/// M³ block per support block (entries across blocks vanish).
#[derive(Debug, Clone)]
pub struct GramTensor {
    spec: BasisSpec,
    blocks: Vec<Vec<f64>>,
}

impl GramTensor {
    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// E3[i,j,l] in flat basis indices; zero unless all three share a block.
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        let m = self.spec.m_per_block();
        let (bi, bj, bl) = (i / m, j / m, l / m);
        if bi != bj || bj != bl {
            return 0.0;
        }
        self.blocks[bi][((i % m) * m + (j % m)) * m + (l % m)]
    }

    /// S(c)[i,l] = Σ_j c_j·E3[i,j,l]: the middle contraction, linear in c
    /// and symmetric in (i,l).
    pub fn contract(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let m = self.spec.m_per_block();
        let m_hat = self.spec.m_hat();
        debug_assert_eq!(c.len(), m_hat);
        let mut s = DMatrix::zeros(m_hat, m_hat);
        for (b, block) in self.blocks.iter().enumerate() {
            let base = b * m;
            for mi in 0..m {
                for ml in 0..m {
                    let mut acc = 0.0;
                    for mj in 0..m {
                        acc += c[base + mj] * block[(mi * m + mj) * m + ml];
                    }
                    s[(base + mi, base + ml)] = acc;
                }
            }
        }
        s
    }
}

/// Operational matrix P of fractional integration: I^μ Ψ ≈ P Ψ in the
/// projected sense, rows laid out in flat basis order.
#[derive(Debug, Clone)]
pub struct IntegrationMatrix {
    entries: DMatrix<f64>,
    spec: BasisSpec,
    mu_integration: f64,
    rule: IntegralRule,
}

impl IntegrationMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    /// Order of the integration operator this matrix represents (may
    /// differ from the basis order: a μ = 1 basis paired with a fractional
    /// operator is the uniform-support configuration).
    pub fn mu_integration(&self) -> f64 {
        self.mu_integration
    }

    pub fn rule(&self) -> IntegralRule {
        self.rule
    }

    pub fn to_csv(&self) -> String {
        matrix_csv(&self.entries)
    }
}

/// Which integral operator the operational matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralRule {
    /// The Riemann–Liouville fractional integral
    /// (1/Γ(μ))∫₀^ζ(ζ−ϖ)^{μ−1}·f(ϖ)dϖ. This is the mathematically
    /// correct operator for recovering states from fractional-order
    /// derivatives and is the only rule the solver uses.
    RiemannLiouville,
    /// The classical first-order integral scaled by μ:
    /// μ·∫₀^ζ f(ϖ)dϖ. The two rules coincide at μ = 1. This variant
    /// reproduces the convention behind the embedded reference
    /// integration matrix used by the validation suite; it exists only
    /// for that cross-check and is never used to solve control problems.
    ClassicalScaled,
}

/// Block-restricted integral of ϖ ↦ ϖ^p·χ_{[lo,hi)} at ζ under `rule`.
fn block_integral(
    rule: IntegralRule,
    mu_integration: f64,
    p: f64,
    lo: f64,
    hi: f64,
    zeta: f64,
) -> Result<f64, QuadratureError> {
    match rule {
        IntegralRule::RiemannLiouville => rl_integral_monomial(mu_integration, p, lo, hi, zeta),
        IntegralRule::ClassicalScaled => {
            if zeta <= lo {
                Ok(0.0)
            } else {
                let upper = zeta.min(hi);
                Ok(mu_integration * (upper.powf(p + 1.0) - lo.powf(p + 1.0)) / (p + 1.0))
            }
        }
    }
}

/// Merges extra breakpoints into a panel list, keeping it sorted, deduped,
/// and clamped to [0, 1].
fn merge_panels(base: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = base.to_vec();
    all.extend(extra.iter().map(|x| x.clamp(0.0, 1.0)));
    all.sort_by(|a, b| a.total_cmp(b));
    let mut merged: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        if merged.last().map_or(true, |last| x - last > 1e-13) {
            merged.push(x);
        }
    }
    merged
}

/// Assembles D(μ)[i,j] = ∫₀¹ ψ_i ψ_j dζ by per-block Gauss–Legendre panels
/// of the given order. Cross-block products vanish pointwise, so those
/// entries are exact zeros.
pub fn dual_matrix(spec: &BasisSpec, quad_order: usize) -> Result<GramMatrix, OperationalError> {
    let table = WaveletTable::new(spec)?;
    let rule = gauss_legendre(quad_order);
    let m = spec.m_per_block();
    let mut entries = DMatrix::zeros(spec.m_hat(), spec.m_hat());
    for n in 1..=spec.blocks() {
        let (lo, hi) = support(n, spec);
        let base = (n - 1) * m;
        for mi in 0..m {
            for mj in mi..m {
                let value =
                    rule.integrate(&|z| table.eval(n, mi, z) * table.eval(n, mj, z), lo, hi);
                entries[(base + mi, base + mj)] = value;
                entries[(base + mj, base + mi)] = value;
            }
        }
    }
    Ok(GramMatrix::from_entries(entries, *spec))
}

/// First moments of the basis members.
pub fn basis_moments(spec: &BasisSpec, quad_order: usize) -> Result<BasisMoments, OperationalError> {
    let table = WaveletTable::new(spec)?;
    let rule = gauss_legendre(quad_order);
    let m = spec.m_per_block();
    let mut v1 = DVector::zeros(spec.m_hat());
    for n in 1..=spec.blocks() {
        let (lo, hi) = support(n, spec);
        for mi in 0..m {
            v1[(n - 1) * m + mi] = rule.integrate(&|z| table.eval(n, mi, z), lo, hi);
        }
    }
    Ok(BasisMoments { v1, spec: *spec })
}

/// Moment vector ⟨f, Ψ⟩ over the given panels (block edges plus any extra
/// kink points of f).
fn moment_vector<F: Fn(f64) -> f64>(
    f: &F,
    table: &WaveletTable,
    quad_order: usize,
    extra_panels: &[f64],
) -> DVector<f64> {
    let spec = table.spec();
    let rule = gauss_legendre(quad_order);
    let panels = merge_panels(table.panel_edges(), extra_panels);
    let m = spec.m_per_block();
    let mut moments = DVector::zeros(spec.m_hat());
    for pair in panels.windows(2) {
        let mid = 0.5 * (pair[0] + pair[1]);
        let half = 0.5 * (pair[1] - pair[0]);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let z = mid + half * x;
            let weight = w * half;
            let fz = f(z);
            if fz == 0.0 {
                continue;
            }
            let n = table.block_of(z);
            let base = (n - 1) * m;
            for mi in 0..m {
                moments[base + mi] += weight * fz * table.eval(n, mi, z);
            }
        }
    }
    moments
}

/// L² projection against an already-assembled Gram matrix: solves
/// Dᵀ·Ĉ = ⟨f, Ψ⟩. `extra_panels` splits the quadrature at known kinks
/// of f.
pub fn project_with_gram<F: Fn(f64) -> f64>(
    f: &F,
    gram: &GramMatrix,
    quad_order: usize,
    extra_panels: &[f64],
) -> Result<DVector<f64>, OperationalError> {
    let table = WaveletTable::new(gram.spec())?;
    let moments = moment_vector(f, &table, quad_order, extra_panels);
    gram.solve_vector(&moments)
}

/// L² projection of f onto the basis: coefficient vector Ĉ with
/// reconstruction ĈᵀΨ optimal with respect to the computed Gram matrix.
pub fn project<F: Fn(f64) -> f64>(
    f: &F,
    spec: &BasisSpec,
    quad_order: usize,
) -> Result<DVector<f64>, OperationalError> {
    let gram = dual_matrix(spec, quad_order)?;
    project_with_gram(f, &gram, quad_order, &[])
}

/// Assembles the order-3 Gram tensor, one dense M³ block per support
/// block; entries involving two different blocks vanish pointwise and are
/// never stored.
pub fn gram_tensor(spec: &BasisSpec, quad_order: usize) -> Result<GramTensor, OperationalError> {
    let table = WaveletTable::new(spec)?;
    let rule = gauss_legendre(quad_order);
    let m = spec.m_per_block();
    let mut blocks = Vec::with_capacity(spec.blocks());
    for n in 1..=spec.blocks() {
        let (lo, hi) = support(n, spec);
        let mut block = vec![0.0; m * m * m];
        for m1 in 0..m {
            for m2 in m1..m {
                for m3 in m2..m {
                    let value = rule.integrate(
                        &|z| table.eval(n, m1, z) * table.eval(n, m2, z) * table.eval(n, m3, z),
                        lo,
                        hi,
                    );
                    for (a, b, c) in [
                        (m1, m2, m3),
                        (m1, m3, m2),
                        (m2, m1, m3),
                        (m2, m3, m1),
                        (m3, m1, m2),
                        (m3, m2, m1),
                    ] {
                        block[(a * m + b) * m + c] = value;
                    }
                }
            }
        }
        blocks.push(block);
    }
    Ok(GramTensor { spec: *spec, blocks })
}

/// Product operational matrix C̃ = S(c)·D^{−1}, realizing
/// Ψ(ζ)Ψ(ζ)ᵀc ≈ C̃Ψ(ζ) in the least-squares sense. Linear in c.
pub fn product_matrix(
    c: &DVector<f64>,
    tensor: &GramTensor,
    gram: &GramMatrix,
) -> Result<DMatrix<f64>, OperationalError> {
    let m_hat = tensor.spec().m_hat();
    if c.len() != m_hat || gram.spec().m_hat() != m_hat {
        return Err(OperationalError::DimensionMismatch {
            detail: format!(
                "product_matrix: coefficient length {} against basis dimension {}",
                c.len(),
                m_hat
            ),
        });
    }
    let s = tensor.contract(c);
    // C̃ = S·D^{−1} ⇔ Dᵀ·C̃ᵀ = Sᵀ.
    Ok(gram.solve_matrix(&s.transpose())?.transpose())
}

/// The function ζ ↦ (I^μ ψ_{n,m})(ζ) under `rule`, evaluated directly from
/// the member's monomial expansion and the closed-form block integrals —
/// independent of any operational matrix. Used to measure how faithfully
/// P^μ represents the operator.
pub fn wavelet_fractional_integral(
    spec: &BasisSpec,
    n: usize,
    m: usize,
    mu_integration: f64,
    rule: IntegralRule,
    zeta: f64,
) -> Result<f64, OperationalError> {
    if !(mu_integration > 0.0 && mu_integration <= 1.0) {
        return Err(OperationalError::InvalidOrder(mu_integration));
    }
    flat_index(n, m, spec)?;
    let table = WaveletTable::new(spec)?;
    let (lo, hi) = support(n, spec);
    let coeffs = table.block_monomial_coefficients(n);
    let mut acc = 0.0;
    for (q, c) in coeffs[m].iter().enumerate() {
        if *c != 0.0 {
            acc += c * block_integral(rule, mu_integration, spec.mu() * q as f64, lo, hi, zeta)?;
        }
    }
    Ok(acc)
}

/// Assembles the operational matrix of fractional integration of order
/// `mu_integration` over the given basis.
///
/// For each member (n, m): expand it into monomials ζ^{μq} on its block,
/// push each monomial through the block-restricted integral under `rule`,
/// and project the resulting function back onto the basis; that projection
/// is row (n, m) of P. The projection quadrature splits panels at the
/// member's own support edges, where the integrated function has kinks.
pub fn integration_matrix(
    spec: &BasisSpec,
    mu_integration: f64,
    quad_order: usize,
    rule: IntegralRule,
) -> Result<IntegrationMatrix, OperationalError> {
    if !(mu_integration > 0.0 && mu_integration <= 1.0) {
        return Err(OperationalError::InvalidOrder(mu_integration));
    }
    let table = WaveletTable::new(spec)?;
    let gram = dual_matrix(spec, quad_order)?;
    let m = spec.m_per_block();
    let mut entries = DMatrix::zeros(spec.m_hat(), spec.m_hat());
    for n in 1..=spec.blocks() {
        let (lo, hi) = support(n, spec);
        let mono = table.block_monomial_coefficients(n);
        for mi in 0..m {
            let coeffs = &mono[mi];
            let integrated = |zeta: f64| -> f64 {
                let mut acc = 0.0;
                for (q, c) in coeffs.iter().enumerate() {
                    if *c != 0.0 {
                        acc += c * block_integral(
                            rule,
                            mu_integration,
                            spec.mu() * q as f64,
                            lo,
                            hi,
                            zeta,
                        )
                        .expect("domain validated before assembly");
                    }
                }
                acc
            };
            let row = project_with_gram(&integrated, &gram, quad_order, &[lo, hi])?;
            entries.row_mut((n - 1) * m + mi).tr_copy_from(&row);
        }
    }
    Ok(IntegrationMatrix { entries, spec: *spec, mu_integration, rule })
}
