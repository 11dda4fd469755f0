//! Problem-file schema and loading: a JSON description of the
//! two-state/one-control linear-quadratic problem, with polynomials as
//! coefficient lists (lowest degree first).

use std::path::Path;

use serde::Deserialize;
use wavelet_focp::basis::BasisSpec;
use wavelet_focp::focp_solver::FocpProblem;

use crate::CliError;

/// Cost-weight polynomials: ½∫(a·x₁² + b·x₂² + c·u²) dζ.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// On-disk problem description:
/// Σ_j alpha[i][j]·D^μ x_j = Σ_j beta[i][j]·x_j + gamma[i]·u + forcing_i(ζ),
/// x(0) = x0, with the quadratic cost given by `weights`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub weights: Weights,
    pub alpha: [[f64; 2]; 2],
    pub beta: [[f64; 2]; 2],
    pub gamma: [f64; 2],
    #[serde(default)]
    pub forcing: [Vec<f64>; 2],
    pub x0: [f64; 2],
}

/// Reads and parses a problem file; malformed input reports the file,
/// line, and column.
pub fn load(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::Config(format!("cannot read {}: {err}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|err| CliError::Config(format!("cannot parse {}: {err}", path.display())))
}

impl ProblemFile {
    /// Instantiates the problem over a basis at the given dynamics
    /// order. Data validation (invertible alpha, order range) happens
    /// in the solver's constructor.
    pub fn build(&self, spec: BasisSpec, dynamics_order: f64) -> Result<FocpProblem, CliError> {
        FocpProblem::new(
            self.weights.a.clone(),
            self.weights.b.clone(),
            self.weights.c.clone(),
            self.alpha,
            self.beta,
            self.gamma,
            self.forcing.clone(),
            self.x0,
            spec,
            dynamics_order,
        )
        .map_err(CliError::from)
    }
}
