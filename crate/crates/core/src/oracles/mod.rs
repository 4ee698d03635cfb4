//! Brute-force checks for the closed forms: exact diagonalization, searches
//! over pure-state decompositions, marginal-constrained optimization over
//! separable and general couplings, and explicit many-body states that
//! saturate the two-body bounds.

mod coupling;
mod ensemble;
mod roof;

pub use coupling::{any_state_opt, constrained_block_min, sep_couple_opt, CouplingResult};
pub use ensemble::{saturating_chain_state, symmetric_extension_value, ProductEnsemble};
pub use roof::{roof_max, roof_min, weighted_roof, RoofResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{c64, eigh_unchecked, CMatrix, CVector, Observable, MAX_DENSE_DIM};

/// Whether an oracle maximizes or minimizes its objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Max,
    Min,
}

impl Direction {
    /// Sign that turns the objective into one to be minimized.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Direction::Max => -1.0,
            Direction::Min => 1.0,
        }
    }

    pub(crate) fn better(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Max => a > b,
            Direction::Min => a < b,
        }
    }
}

/// Settings shared by the randomized oracles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Sweep limit for decomposition searches; iteration limit per penalty
    /// round for the coupling optimizers.
    pub max_iters: usize,
    pub seed: u64,
    /// Largest accepted Frobenius norm of the marginal residuals.
    pub feasibility_tol: f64,
    /// Improvement below which a local search is considered converged.
    pub objective_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 16, max_iters: 400, seed: 0, feasibility_tol: 1e-6, objective_tol: 1e-13 }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 || !(self.feasibility_tol > 0.0) || !(self.objective_tol > 0.0) {
            return Err(Error::Validation("optimizer settings must all be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: CVector,
    /// E_1 − E_0 (zero for a one-dimensional space).
    pub gap: f64,
    /// ‖Hv − Ev‖.
    pub residual: f64,
}

// Above this dimension the lowest eigenpair comes from a Krylov search.
const KRYLOV_MIN_DIM: usize = 256;
const KRYLOV_MAX_BASIS: usize = 160;
const KRYLOV_RESTARTS: usize = 6;

/// Lowest eigenpair. Large spaces use Lanczos with full reorthogonalization
/// (falling back to dense diagonalization if the Ritz vector does not reach
/// the residual target); there `gap` is the distance to the second Ritz
/// value, which misses exact degeneracies.
pub fn ground_state(h: &Observable) -> Result<GroundState> {
    if h.dim() > MAX_DENSE_DIM {
        return Err(Error::Dimension(format!("dimension {} exceeds the dense limit {MAX_DENSE_DIM}", h.dim())));
    }
    if h.dim() >= KRYLOV_MIN_DIM {
        if let Some(g) = lanczos_ground_state(h.matrix()) {
            return Ok(g);
        }
    }
    Ok(dense_ground_state(h.matrix()))
}

fn finish(m: &CMatrix, energy: f64, gap: f64, state: CVector) -> GroundState {
    let residual = (m * &state - &state * c64(energy, 0.0)).norm();
    GroundState { energy, state, gap, residual }
}

fn dense_ground_state(m: &CMatrix) -> GroundState {
    let eig = eigh_unchecked(m);
    let energy = eig.eigenvalues[0];
    let gap = eig.eigenvalues.get(1).map_or(0.0, |e1| e1 - energy);
    finish(m, energy, gap, eig.eigenvectors.column(0).into_owned())
}

fn lanczos_ground_state(m: &CMatrix) -> Option<GroundState> {
    let dim = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0) * dim as f64;
    let target = 1e-12 * scale.sqrt();
    // fixed, generic start vector
    let mut rng = crate::sampling::sub_rng(0x5eed, 0);
    let mut start = crate::sampling::random_pure_state(dim, &mut rng);
    for _ in 0..KRYLOV_RESTARTS {
        let (energy, gap, state) = lanczos_pass(m, &start)?;
        let g = finish(m, energy, gap, state);
        if g.residual <= target {
            return Some(g);
        }
        start = g.state;
    }
    None
}

/// One Lanczos run from `start`; returns the lowest Ritz pair and the gap to
/// the second Ritz value.
fn lanczos_pass(m: &CMatrix, start: &CVector) -> Option<(f64, f64, CVector)> {
    let dim = m.nrows();
    let kmax = KRYLOV_MAX_BASIS.min(dim);
    let mut basis: Vec<CVector> = Vec::with_capacity(kmax);
    let (mut alpha, mut beta) = (Vec::with_capacity(kmax), Vec::with_capacity(kmax));
    let mut v = start.unscale(start.norm());
    loop {
        let mut w = m * &v;
        let a = v.dotc(&w).re;
        basis.push(v);
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let b = w.norm();
        let k = basis.len();
        let converged = if k >= 2 && (k.is_multiple_of(10) || k == kmax || b < 1e-14) {
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
            (b * vecs[(k - 1, 0)].abs()) < 1e-14 * vals[0].abs().max(1.0)
        } else {
            false
        };
        if converged || k == kmax || b < 1e-14 {
            let (vals, vecs) = tridiagonal_eigen(&alpha, &beta);
            let mut state = CVector::zeros(dim);
            for (i, q) in basis.iter().enumerate() {
                state += q * c64(vecs[(i, 0)], 0.0);
            }
            let n = state.norm();
            if !(n > 0.0) {
                return None;
            }
            let gap = if vals.len() > 1 { vals[1] - vals[0] } else { 0.0 };
            return Some((vals[0], gap, state.unscale(n)));
        }
        beta.push(b);
        v = w.unscale(b);
    }
}

/// Ascending eigenvalues and eigenvectors of the real symmetric tridiagonal
/// matrix with diagonal `alpha` and off-diagonal `beta`.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, nalgebra::DMatrix<f64>) {
    let k = alpha.len();
    let t = nalgebra::DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = nalgebra::SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = nalgebra::DMatrix::from_fn(k, k, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}
