//! Bounds for chains of k-particle blocks: the block term is minimized
//! numerically over k-party states with fixed single-party marginals, the
//! bond joining neighbouring blocks through the closed forms.

use serde::{Deserialize, Serialize};

use super::{field_dot, require_positive_j};
use crate::error::{dim_err, Error, Result};
use crate::infomeasures::{any_state_corr_max_qubit, mean, qfi, second_moment, sep_corr_max_single};
use crate::models::{chain_edges, ModelSpec};
use crate::oracles::{constrained_block_min, OptimizerConfig};
use crate::qcore::{accumulate_local, c64, partial_trace, CMatrix, DensityMatrix, Observable};

/// Which k-producible bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KprodMode {
    /// Block term minimized over k-party states with marginals ϱ; the bond
    /// between blocks bounded through F_Q[ϱ, h].
    SingleMarginal,
    /// Input is the k-party block state itself; the bond is bounded through
    /// F_Q of the block state with h on its first party.
    BlockState,
    /// Tensor products of identical blocks: the bond contributes ⟨h⟩².
    ProductBlocks,
}

/// All bounds sharing one constrained block minimization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KprodBounds {
    /// min ⟨H_k⟩ over k-party states with every marginal ϱ.
    pub block_min: f64,
    /// Marginal residual of the minimizing block state.
    pub block_residual: f64,
    /// (N/k)·min⟨H_k⟩ − (N/k)J(⟨h²⟩ − F_Q/4) − (N/k)B·⟨g⟩.
    pub qfi: f64,
    /// (N/k)·min⟨H_k⟩ − (N/k)J⟨h⟩² − (N/k)B·⟨g⟩.
    pub product: f64,
    /// (N/k)·min⟨H_k⟩ − (N/k)J(⟨h²⟩ − I_WY) − (N/k)B·⟨g⟩, a lower bound on
    /// the energy of any state; qubits only.
    pub wy: Option<f64>,
}

/// H_k = −J Σ_{n<k} h^{(n)}h^{(n+1)} − B·Σ_n g^{(n)} + ½B·(g^{(1)} + g^{(k)}).
/// Returns the bond part and the field part separately.
fn block_hamiltonian(k: usize, j: f64, field: &[f64], h: &Observable, gens: &[Observable]) -> Result<(Observable, Observable)> {
    let d = h.dim();
    let dim = d.checked_pow(k as u32).filter(|&x| x <= crate::qcore::MAX_DENSE_DIM).ok_or_else(|| Error::Dimension(format!("block of {k} sites is too large")))?;
    let dims = vec![d; k];
    let mut bonds = CMatrix::zeros(dim, dim);
    for n in 0..k.saturating_sub(1) {
        accumulate_local(&mut bonds, c64(-j, 0.0), &[(n, h.matrix()), (n + 1, h.matrix())], &dims)?;
    }
    let mut local = CMatrix::zeros(d, d);
    for (b, g) in field.iter().zip(gens) {
        local += g.matrix() * c64(*b, 0.0);
    }
    let mut fields = CMatrix::zeros(dim, dim);
    for n in 0..k {
        accumulate_local(&mut fields, c64(-1.0, 0.0), &[(n, &local)], &dims)?;
    }
    accumulate_local(&mut fields, c64(0.5, 0.0), &[(0, &local)], &dims)?;
    accumulate_local(&mut fields, c64(0.5, 0.0), &[(k - 1, &local)], &dims)?;
    Ok((Observable::from_hermitian(bonds), Observable::from_hermitian(fields)))
}

fn check_blocks(k: usize, n: usize) -> Result<()> {
    if k == 0 || n == 0 || !n.is_multiple_of(k) {
        return Err(Error::Precondition(format!("block size {k} must divide N = {n}")));
    }
    Ok(())
}

fn check_inputs(rho: &DensityMatrix, h: &Observable, field: &[f64], gens: &[Observable]) -> Result<()> {
    if h.dim() != rho.dim() {
        return dim_err(format!("operator of dim {} for a marginal of dim {}", h.dim(), rho.dim()));
    }
    field_dot(field, gens, rho).map(|_| ())
}

/// Evaluates the single-marginal, product-block and skew-information
/// bounds for blocks of k sites in a ferromagnetic ring of N sites
/// (coupling −J h⊗h, field B·g) with every marginal ϱ.
#[allow(clippy::too_many_arguments)]
pub fn kprod_bounds(
    rho: &DensityMatrix,
    k: usize,
    n: usize,
    j: f64,
    field: &[f64],
    h: &Observable,
    gens: &[Observable],
    cfg: &OptimizerConfig,
) -> Result<KprodBounds> {
    check_blocks(k, n)?;
    require_positive_j(j)?;
    check_inputs(rho, h, field, gens)?;
    let g = field_dot(field, gens, rho)?;
    let (block_min, block_residual) = if k == 1 {
        (0.0, 0.0)
    } else {
        let (bonds, _) = block_hamiltonian(k, j, field, h, gens)?;
        let r = constrained_block_min(&bonds, rho, k, cfg)?;
        if !r.converged {
            return Err(Error::NonConvergence(format!("block minimization for k = {k} ended at residual {:.3e}", r.residual)));
        }
        (r.value - (k as f64 - 1.0) * g, r.residual)
    };
    let scale = n as f64 / k as f64;
    let base = scale * block_min - scale * g;
    let m = mean(rho, h)?;
    let wy = if rho.dim() == 2 { Some(base - scale * j * any_state_corr_max_qubit(rho, h)?) } else { None };
    Ok(KprodBounds {
        block_min,
        block_residual,
        qfi: base - scale * j * sep_corr_max_single(rho, h)?,
        product: base - scale * j * m * m,
        wy,
    })
}

/// One k-producible bound. In [`KprodMode::BlockState`] `state` is the
/// k-party block state; otherwise it is the single-particle marginal.
#[allow(clippy::too_many_arguments)]
pub fn kprod_bound(
    state: &DensityMatrix,
    k: usize,
    n: usize,
    j: f64,
    field: &[f64],
    h: &Observable,
    gens: &[Observable],
    mode: KprodMode,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    match mode {
        KprodMode::SingleMarginal => Ok(kprod_bounds(state, k, n, j, field, h, gens, cfg)?.qfi),
        KprodMode::ProductBlocks => Ok(kprod_bounds(state, k, n, j, field, h, gens, cfg)?.product),
        KprodMode::BlockState => {
            check_blocks(k, n)?;
            require_positive_j(j)?;
            let d = h.dim();
            if d.checked_pow(k as u32) != Some(state.dim()) {
                return dim_err(format!("block state of dim {} is not {k} sites of dim {d}", state.dim()));
            }
            let dims = vec![d; k];
            let first = partial_trace(state, &dims, &[0])?;
            check_inputs(&first, h, field, gens)?;
            let (bonds, fields) = block_hamiltonian(k, j, field, h, gens)?;
            let block = state.expectation(&bonds)? + state.expectation(&fields)?;
            let mut h_first = CMatrix::zeros(state.dim(), state.dim());
            accumulate_local(&mut h_first, c64(1.0, 0.0), &[(0, h.matrix())], &dims)?;
            let fq = qfi(state, &Observable::from_hermitian(h_first))?;
            let scale = n as f64 / k as f64;
            let corr = second_moment(&first, h)? - fq / 4.0;
            Ok(scale * block - scale * j * corr - scale * field_dot(field, gens, &first)?)
        }
    }
}

/// Lower bound on the ground-state energy of a ring from overlapping blocks
/// of k sites: (N/(k−1))·min ⟨H'_k⟩ over k-party states with every marginal
/// ϱ, where H'_k holds the k−1 bonds, the full field on inner sites and half
/// the field on the two end sites. Needs (k−1) | N.
pub fn e_lower_kblock(rho: &DensityMatrix, k: usize, spec: &ModelSpec, cfg: &OptimizerConfig) -> Result<f64> {
    spec.validate()?;
    if k < 2 {
        return Err(Error::Validation(format!("overlapping blocks need k >= 2, got {k}")));
    }
    let n = spec.n;
    if !n.is_multiple_of(k - 1) {
        return Err(Error::Precondition(format!("k − 1 = {} must divide N = {n}", k - 1)));
    }
    let mut ring: Vec<(usize, usize)> = chain_edges(n, true)?.edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    let mut edges: Vec<(usize, usize)> = spec.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    ring.sort_unstable();
    edges.sort_unstable();
    edges.dedup();
    if ring != edges {
        return Err(Error::Precondition("the model is not a periodic chain in site order".into()));
    }
    if rho.dim() != spec.d {
        return dim_err(format!("marginal of dim {} for a model with d = {}", rho.dim(), spec.d));
    }
    let d = spec.d;
    let dim = d.checked_pow(k as u32).filter(|&x| x <= crate::qcore::MAX_DENSE_DIM).ok_or_else(|| Error::Dimension(format!("block of {k} sites is too large")))?;
    let dims = vec![d; k];
    let mut bonds = CMatrix::zeros(dim, dim);
    for site in 0..k - 1 {
        for t in &spec.terms {
            accumulate_local(&mut bonds, c64(t.coupling, 0.0), &[(site, t.op.matrix()), (site + 1, t.op.matrix())], &dims)?;
        }
    }
    let r = constrained_block_min(&Observable::from_hermitian(bonds), rho, k, cfg)?;
    if !r.converged {
        return Err(Error::NonConvergence(format!("block minimization for k = {k} ended at residual {:.3e}", r.residual)));
    }
    let nf = n as f64;
    Ok(nf / (k as f64 - 1.0) * r.value - nf * spec.field_energy(rho)?)
}
