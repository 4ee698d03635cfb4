//! Closed-form energy bounds over separable, symmetric-separable and
//! k-producible states with fixed marginals, the bounds on the quantum Fisher
//! information and fidelity that follow from them, entanglement criteria, and
//! the infinite transverse-field Ising chain reference energy.

mod kprod;
mod pfeuty;
mod witness;

pub use kprod::{e_lower_kblock, kprod_bound, kprod_bounds, KprodBounds, KprodMode};
pub use pfeuty::{pfeuty_constrained_energy, pfeuty_energy};
pub use witness::{witness, Criterion, WitnessInput, WitnessReport};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::infomeasures::{
    any_state_corr_max_qubit, fidelity, qfi, second_moment, sep_corr_max, sep_corr_max_single, sym_sep_corr_min, Exactness,
    RoofValue, TwoPartySet,
};
use crate::models::{bipartite_heisenberg, build_collective, build_hamiltonian, ising_ring, reduced_from_collective, two_coloring, ModelSpec};
use crate::oracles::{any_state_opt, ground_state, sep_couple_opt, weighted_roof, Direction, OptimizerConfig};
use crate::qcore::{c64, spin_half, tensor, CMatrix, CVector, DensityMatrix, Observable};

/// How a bound value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRoute {
    ClosedForm,
    Oracle,
}

/// N_p · min ⟨H_AB⟩ over a two-party set with both marginals ϱ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepLowerBound {
    pub value: f64,
    /// Relation of `value` to the true two-party minimum scaled by N_p.
    pub exactness: Exactness,
    /// The N-party minimum equals `value`: the two-party minimum is exact
    /// and a product-ensemble construction reaches it on this graph.
    pub saturated: bool,
    pub route: BoundRoute,
}

/// Lower bound on ⟨H⟩ over N-party states in `set` whose single-particle
/// marginals all equal ϱ: N_p · min_{ϱ_AB} Σ_l J_l ⟨h_l⊗h_l⟩ − N B·⟨g⟩_ϱ.
///
/// Closed forms cover a single coupling of either sign for the symmetric
/// set, ferromagnetic couplings for the separable set, and antiferromagnetic
/// couplings for the symmetric set. Everything else goes to `oracle` when
/// given. Oracle values are attained by an explicit decomposition and are
/// flagged as upper bounds on the true minimum.
pub fn e_sep_lower(spec: &ModelSpec, rho: &DensityMatrix, set: TwoPartySet, oracle: Option<&OptimizerConfig>) -> Result<SepLowerBound> {
    spec.validate()?;
    if rho.dim() != spec.d {
        return dim_err(format!("marginal of dim {} for a model with d = {}", rho.dim(), spec.d));
    }
    if spec.np() == 0 {
        return Err(Error::Validation("model has no interacting pairs".into()));
    }
    let np = spec.np() as f64;
    let field = spec.n as f64 * spec.field_energy(rho)?;
    let active: Vec<_> = spec.terms.iter().filter(|t| t.coupling != 0.0).collect();

    let closed = if active.is_empty() {
        Some((0.0, Exactness::Exact))
    } else if active.iter().all(|t| t.coupling < 0.0) {
        // −|J_l| h_l⊗h_l: minimum = −max Σ ⟨h̃_l⊗h̃_l⟩ with h̃_l = √|J_l| h_l.
        let scaled: Vec<Observable> = active.iter().map(|t| t.op.scaled(t.coupling.abs().sqrt())).collect();
        let max = sep_corr_max(rho, &scaled)?;
        let exactness = match max.exactness {
            Exactness::Exact => Exactness::Exact,
            _ => Exactness::LowerBound,
        };
        Some((-max.value, exactness))
    } else if set == TwoPartySet::SymSep && active.iter().all(|t| t.coupling > 0.0) {
        let scaled: Vec<Observable> = active.iter().map(|t| t.op.scaled(t.coupling.sqrt())).collect();
        let min = sym_sep_corr_min(rho, &scaled, set)?;
        Some((min.value, min.exactness))
    } else {
        None
    };

    let (pair_min, exactness, route) = match closed {
        Some((v, e)) => (v, e, BoundRoute::ClosedForm),
        None => {
            let cfg = oracle.ok_or_else(|| Error::Unsupported("no closed form for these couplings and the oracle is disabled".into()))?;
            let v = match set {
                TwoPartySet::Sep => {
                    let mut obj = CMatrix::zeros(spec.d * spec.d, spec.d * spec.d);
                    for t in &active {
                        obj += tensor(t.op.matrix(), t.op.matrix()) * c64(t.coupling, 0.0);
                    }
                    let r = sep_couple_opt(rho, rho, &Observable::from_hermitian(obj), Direction::Min, cfg)?;
                    if !r.converged {
                        return Err(Error::NonConvergence(format!("separable coupling search ended at residual {:.3e}", r.residual)));
                    }
                    r.value
                }
                TwoPartySet::SymSep => {
                    let terms: Vec<(f64, Observable)> = active.iter().map(|t| (t.coupling, t.op.clone())).collect();
                    weighted_roof(rho, &terms, Direction::Min, cfg)?.value
                }
            };
            (v, Exactness::UpperBound, BoundRoute::Oracle)
        }
    };

    let constructible = match set {
        TwoPartySet::SymSep => true,
        TwoPartySet::Sep => two_coloring(spec.n, &spec.edges).is_some(),
    };
    let saturated = exactness == Exactness::Exact && constructible;
    Ok(SepLowerBound { value: np * pair_min - field, exactness, saturated, route })
}

fn field_dot(field: &[f64], gens: &[Observable], rho: &DensityMatrix) -> Result<f64> {
    if field.len() != gens.len() {
        return dim_err(format!("field has {} components for {} generators", field.len(), gens.len()));
    }
    let mut acc = 0.0;
    for (b, g) in field.iter().zip(gens) {
        if g.dim() != rho.dim() {
            return dim_err(format!("generator of dim {} for a state of dim {}", g.dim(), rho.dim()));
        }
        acc += b * rho.expectation(g)?;
    }
    Ok(acc)
}

fn require_positive_j(j: f64) -> Result<()> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(Error::Precondition(format!("ferromagnetic coupling needs J > 0, got {j}")));
    }
    Ok(())
}

fn require_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::Precondition(format!("the saturating construction needs an even chain, got N = {n}")));
    }
    Ok(())
}

fn require_qubit(rho: &DensityMatrix, what: &str) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::Unsupported(format!("{what} is only defined for qubits, got dim {}", rho.dim())));
    }
    Ok(())
}

/// Minimal energy over separable states of the ferromagnetic ring
/// −J Σ h⊗h − B·Σ g with every marginal ϱ:
/// −N J (⟨h²⟩ − F_Q[ϱ,h]/4) − N B·⟨g⟩.
pub fn e_sep_chain(rho: &DensityMatrix, j: f64, field: &[f64], n: usize, h: &Observable, gens: &[Observable]) -> Result<f64> {
    require_even(n)?;
    require_positive_j(j)?;
    let nf = n as f64;
    Ok(-nf * j * sep_corr_max_single(rho, h)? - nf * field_dot(field, gens, rho)?)
}

/// Lower bound on the energy of any state (entangled ones included) of the
/// same ring with qubit marginals ϱ: −N J (⟨h²⟩ − I_WY(ϱ,h)) − N B·⟨g⟩.
pub fn e_lower_wy(rho: &DensityMatrix, j: f64, field: &[f64], n: usize, h: &Observable, gens: &[Observable]) -> Result<f64> {
    require_qubit(rho, "the skew-information bound")?;
    require_positive_j(j)?;
    if n < 2 {
        return Err(Error::Validation(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok(-nf * j * any_state_corr_max_qubit(rho, h)? - nf * field_dot(field, gens, rho)?)
}

/// Lower bound on F_Q[ϱ,h] from the ground-state energy of the fully
/// connected ferromagnet −J Σ_{n<n'} h⊗h − B·Σ g and its marginal ϱ, together
/// with the cap (4d/N)·√λ_max[(h⊗I − I⊗h)²] on the gap F_Q − bound.
pub fn qfi_lower_bound(
    e_ground: f64,
    rho: &DensityMatrix,
    n: usize,
    j: f64,
    field: &[f64],
    gens: &[Observable],
    h: &Observable,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::Validation(format!("need n >= 2, got {n}")));
    }
    require_positive_j(j)?;
    let nf = n as f64;
    let pairs = nf * (nf - 1.0) * j;
    let bound = 8.0 * e_ground / pairs + 8.0 * nf * field_dot(field, gens, rho)? / pairs + 4.0 * second_moment(rho, h)?;
    let d = h.dim();
    let id = CMatrix::identity(d, d);
    let diff = Observable::from_hermitian(tensor(h.matrix(), &id) - tensor(&id, h.matrix()));
    let cap = 4.0 * d as f64 / nf * diff.squared().lambda_max().max(0.0).sqrt();
    Ok((bound, cap))
}

fn pauli_means(rho: &DensityMatrix) -> Result<[f64; 3]> {
    rho.bloch_vector()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Minimal energy over separable states of the ferromagnetic Heisenberg ring
/// with marginals alternating between ϱ and σ:
/// −J N (F(ϱ,σ)/2 − 1/4) − N B·(⟨σ⃗⟩_ϱ + ⟨σ⃗⟩_σ)/2.
pub fn heisenberg_sep_min(rho: &DensityMatrix, sigma: &DensityMatrix, j: f64, field: [f64; 3], n: usize) -> Result<f64> {
    require_qubit(rho, "the Heisenberg bound")?;
    require_qubit(sigma, "the Heisenberg bound")?;
    require_even(n)?;
    require_positive_j(j)?;
    let nf = n as f64;
    let (a, b) = (pauli_means(rho)?, pauli_means(sigma)?);
    let f = fidelity(rho, sigma)?;
    Ok(-j * nf * (f / 2.0 - 0.25) - nf * (dot3(field, a) + dot3(field, b)) / 2.0)
}

/// Upper bound on F(ϱ,σ) from the ground state of the complete bipartite
/// Heisenberg ferromagnet between N₁ and N₂ qubits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityBound {
    pub bound: f64,
    /// Cap on bound − F, known for N₂ = 1 only.
    pub err_cap: Option<f64>,
    /// The bound exceeds 1 and therefore says nothing.
    pub vacuous: bool,
}

/// Same as [`fidelity_upper_bound`] with separate fields on the two groups:
/// 1/2 − 2E_g/(N₁N₂J) − 2(N₁ B_A·⟨σ⃗⟩_ϱ + N₂ B_B·⟨σ⃗⟩_σ)/(N₁N₂J).
#[allow(clippy::too_many_arguments)]
pub fn fidelity_upper_bound_split(
    e_ground: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n1: usize,
    n2: usize,
    j: f64,
    field_a: [f64; 3],
    field_b: [f64; 3],
) -> Result<FidelityBound> {
    if n1 < 1 || n2 < 1 {
        return Err(Error::Validation(format!("group sizes must be >= 1, got {n1} and {n2}")));
    }
    require_qubit(rho, "the fidelity bound")?;
    require_qubit(sigma, "the fidelity bound")?;
    require_positive_j(j)?;
    let (a, b) = (n1 as f64, n2 as f64);
    let fields = a * dot3(field_a, pauli_means(rho)?) + b * dot3(field_b, pauli_means(sigma)?);
    let bound = 0.5 - 2.0 * e_ground / (a * b * j) - 2.0 * fields / (a * b * j);
    let err_cap = (n2 == 1).then(|| 2.0 / a);
    Ok(FidelityBound { bound, err_cap, vacuous: bound > 1.0 })
}

/// 1/2 − 2E_g/(N₁N₂J) − 2B·(N₁⟨σ⃗⟩_ϱ + N₂⟨σ⃗⟩_σ)/(N₁N₂J), with ϱ and σ the
/// averaged marginals of the two groups in the ground state. Values above 1
/// are returned as they are and flagged.
pub fn fidelity_upper_bound(
    e_ground: f64,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n1: usize,
    n2: usize,
    j: f64,
    field: [f64; 3],
) -> Result<FidelityBound> {
    fidelity_upper_bound_split(e_ground, rho, sigma, n1, n2, j, field, field)
}

/// N/4 + N(N−1)⟨j_x⟩² − λN⟨j_z⟩: minimum of J_x² − λJ_z over symmetric
/// separable N-qubit states with marginal ϱ.
pub fn antiferro_symsep(rho: &DensityMatrix, lambda: f64, n: usize) -> Result<f64> {
    require_qubit(rho, "the antiferromagnetic bound")?;
    let s = spin_half();
    let v = antiferro_symsep_general(rho, &[s[0].clone()], lambda, &s[2], n)?;
    Ok(v.value)
}

/// Σ_l (Σ_n h_l^{(n)})² − λ Σ_n g^{(n)} over symmetric separable states with
/// marginal ϱ: N Σ⟨h_l²⟩ + N(N−1) Σ⟨h_l⟩² − λN⟨g⟩. Exact for one or two
/// operators, a lower bound for more.
pub fn antiferro_symsep_general(rho: &DensityMatrix, hs: &[Observable], lambda: f64, g: &Observable, n: usize) -> Result<RoofValue> {
    if n < 2 {
        return Err(Error::Validation(format!("need n >= 2, got {n}")));
    }
    let nf = n as f64;
    let min = sym_sep_corr_min(rho, hs, TwoPartySet::SymSep)?;
    let mut squares = 0.0;
    for h in hs {
        squares += second_moment(rho, h)?;
    }
    let value = nf * squares + nf * (nf - 1.0) * min.value - lambda * nf * rho.expectation(g)?;
    Ok(RoofValue { value, exactness: min.exactness })
}

/// Reduced state of each site of an N-party pure state, averaged over the
/// given sites (0-based).
pub fn averaged_marginal(psi: &CVector, n: usize, d: usize, sites: &[usize]) -> Result<DensityMatrix> {
    let dim = d.checked_pow(n as u32).ok_or_else(|| Error::Dimension("state too large".into()))?;
    if psi.len() != dim {
        return dim_err(format!("state of length {} for {n} sites of dim {d}", psi.len()));
    }
    if sites.is_empty() || sites.iter().any(|&s| s >= n) {
        return Err(Error::Validation("site list must be non-empty and within range".into()));
    }
    let mut acc = CMatrix::zeros(d, d);
    for &site in sites {
        let stride = d.pow((n - 1 - site) as u32);
        for idx in 0..dim {
            let a = (idx / stride) % d;
            if a != 0 {
                continue;
            }
            for x in 0..d {
                let ix = idx + x * stride;
                for y in 0..d {
                    let iy = idx + y * stride;
                    acc[(x, y)] += psi[ix] * psi[iy].conj();
                }
            }
        }
    }
    acc *= c64(1.0 / sites.len() as f64, 0.0);
    let herm = (&acc + acc.adjoint()) * c64(0.5, 0.0);
    DensityMatrix::new(herm)
}

/// One point of the ferromagnetic Ising ring sweep: exact ground state and
/// the bounds evaluated at its (site-averaged) marginal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichPoint {
    pub bx: f64,
    /// ⟨J_x⟩ = (N/2)⟨σ_x⟩.
    pub jx_expect: f64,
    pub e_ground: f64,
    pub e_sep_qfi: f64,
    pub e_lower_wy: f64,
    /// Nearest-neighbour ⟨j_z⊗j_z⟩ in the ground state.
    pub corr_ground: f64,
    /// ⟨j_z²⟩ − F_Q/4 at the marginal.
    pub corr_sep: f64,
    /// ⟨j_z²⟩ − I_WY at the marginal.
    pub corr_wy: f64,
    pub marginal: DensityMatrix,
}

/// Ground state of −J Σ j_z j_z − B_x Σ σ_x on an even periodic ring and the
/// bounds at its marginal.
pub fn chain_sandwich_point(n: usize, j: f64, bx: f64) -> Result<SandwichPoint> {
    require_even(n)?;
    require_positive_j(j)?;
    let spec = ising_ring(n, j, [bx, 0.0, 0.0])?;
    let gs = ground_state(&build_hamiltonian(&spec)?)?;
    let sites: Vec<usize> = (0..n).collect();
    let rho = averaged_marginal(&gs.state, n, 2, &sites)?;
    let h = spec.terms[0].op.clone();
    let gens = &spec.generators;
    let e_sep = e_sep_chain(&rho, j, &spec.field, n, &h, gens)?;
    let e_wy = e_lower_wy(&rho, j, &spec.field, n, &h, gens)?;
    let nf = n as f64;
    let field = nf * spec.field_energy(&rho)?;
    let sx = pauli_means(&rho)?[0];
    Ok(SandwichPoint {
        bx,
        jx_expect: nf * sx / 2.0,
        e_ground: gs.energy,
        e_sep_qfi: e_sep,
        e_lower_wy: e_wy,
        corr_ground: -(gs.energy + field) / (nf * j),
        corr_sep: sep_corr_max_single(&rho, &h)?,
        corr_wy: any_state_corr_max_qubit(&rho, &h)?,
        marginal: rho,
    })
}

/// One point of the collective-model QFI estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfiPoint {
    pub n: usize,
    pub bx: f64,
    pub sx_expect: f64,
    pub fq_true: f64,
    pub fq_bound: f64,
    pub delta: f64,
    pub delta_cap: f64,
}

/// Symmetric ground state of −J Σ_{n<n'} j_z j_z − B_x Σ σ_x in the
/// (N+1)-dimensional collective space, F_Q[ϱ, j_z] of its marginal and the
/// lower bound obtained from the energy.
pub fn collective_qfi_point(n: usize, j: f64, bx: f64) -> Result<QfiPoint> {
    let field = [bx, 0.0, 0.0];
    let model = build_collective(n, j, field)?;
    let gs = ground_state(&model.h)?;
    let (rho, _) = reduced_from_collective(&gs.state, n)?;
    let s = spin_half();
    let gens = crate::qcore::pauli();
    let fq = qfi(&rho, &s[2])?;
    let (bound, cap) = qfi_lower_bound(gs.energy, &rho, n, j, &field, &gens, &s[2])?;
    Ok(QfiPoint { n, bx, sx_expect: pauli_means(&rho)?[0], fq_true: fq, fq_bound: bound, delta: fq - bound, delta_cap: cap })
}

/// Ground state of the complete bipartite Heisenberg ferromagnet and the
/// fidelity of its two group-averaged marginals next to the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub e_ground: f64,
    pub fidelity: f64,
    pub bound: FidelityBound,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
}

pub fn fidelity_bound_point(n1: usize, n2: usize, j: f64, field_a: [f64; 3], field_b: [f64; 3]) -> Result<FidelityPoint> {
    let h = bipartite_heisenberg(n1, n2, j, field_a, field_b)?;
    let gs = ground_state(&h)?;
    let n = n1 + n2;
    let a: Vec<usize> = (0..n1).collect();
    let b: Vec<usize> = (n1..n).collect();
    let rho = averaged_marginal(&gs.state, n, 2, &a)?;
    let sigma = averaged_marginal(&gs.state, n, 2, &b)?;
    let bound = fidelity_upper_bound_split(gs.energy, &rho, &sigma, n1, n2, j, field_a, field_b)?;
    Ok(FidelityPoint { e_ground: gs.energy, fidelity: fidelity(&rho, &sigma)?, bound, rho, sigma })
}

/// Bounds collected for one model and marginal. Absent entries are
/// serialized as explicit nulls.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub model: ModelSpec,
    pub E_sep: Option<f64>,
    pub E_symsep: Option<f64>,
    pub E_L: Option<f64>,
    pub E_ground: Option<f64>,
    pub F_Q_bound: Option<f64>,
    pub delta: Option<f64>,
    pub delta_cap: Option<f64>,
    pub fidelity_bound: Option<f64>,
    pub marginals: Vec<DensityMatrix>,
}

impl BoundReport {
    /// E_L ≤ E_ground ≤ E_sep whenever all three are present.
    pub fn sandwich_holds(&self, tol: f64) -> Option<bool> {
        match (self.E_L, self.E_ground, self.E_sep) {
            (Some(l), Some(g), Some(s)) => Some(l <= g + tol && g <= s + tol),
            _ => None,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Evaluates every bound that applies to `spec`.
///
/// Without `rho` the model is diagonalized (it must fit the dense limit) and
/// the site-averaged ground-state marginal is used; E_ground is reported only
/// in that case. E_L is the general-state bound N_p·min over all two-party
/// couplings, closed-form for a single ferromagnetic qubit coupling and from
/// `oracle` otherwise. The QFI entries are filled for fully connected single
/// ferromagnetic coupling qubit models.
pub fn bound_report(spec: &ModelSpec, rho: Option<&DensityMatrix>, oracle: Option<&OptimizerConfig>) -> Result<BoundReport> {
    spec.validate()?;
    let (rho, e_ground) = match rho {
        Some(r) => (r.clone(), None),
        None => {
            let gs = ground_state(&build_hamiltonian(spec)?)?;
            let sites: Vec<usize> = (0..spec.n).collect();
            (averaged_marginal(&gs.state, spec.n, spec.d, &sites)?, Some(gs.energy))
        }
    };
    let lower = |set| match e_sep_lower(spec, &rho, set, oracle) {
        Ok(b) => Ok(Some(b.value)),
        Err(Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    };
    let e_sep = lower(TwoPartySet::Sep)?;
    let e_symsep = lower(TwoPartySet::SymSep)?;

    let single_ferro = spec.terms.len() == 1 && spec.terms[0].coupling < 0.0;
    let np = spec.np() as f64;
    let field = spec.n as f64 * spec.field_energy(&rho)?;
    let e_l = if spec.np() == 0 {
        None
    } else if single_ferro && spec.d == 2 {
        let t = &spec.terms[0];
        Some(np * t.coupling * any_state_corr_max_qubit(&rho, &t.op)? - field)
    } else if let Some(cfg) = oracle {
        let mut obj = CMatrix::zeros(spec.d * spec.d, spec.d * spec.d);
        for t in &spec.terms {
            obj += tensor(t.op.matrix(), t.op.matrix()) * c64(t.coupling, 0.0);
        }
        let r = any_state_opt(&rho, &rho, &Observable::from_hermitian(obj), Direction::Min, cfg)?;
        if !r.converged {
            return Err(Error::NonConvergence(format!("general coupling search ended at residual {:.3e}", r.residual)));
        }
        Some(np * r.value - field)
    } else {
        None
    };

    let complete = spec.n >= 2 && spec.np() == spec.n * (spec.n - 1) / 2 && {
        let mut seen: Vec<(usize, usize)> = spec.edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == spec.np()
    };
    let (fq_bound, delta, delta_cap) = match e_ground {
        Some(eg) if complete && single_ferro && spec.d == 2 => {
            let t = &spec.terms[0];
            let (b, cap) = qfi_lower_bound(eg, &rho, spec.n, -t.coupling, &spec.field, &spec.generators, &t.op)?;
            (Some(b), Some(qfi(&rho, &t.op)? - b), Some(cap))
        }
        _ => (None, None, None),
    };

    Ok(BoundReport {
        model: spec.clone(),
        E_sep: e_sep,
        E_symsep: e_symsep,
        E_L: e_l,
        E_ground: e_ground,
        F_Q_bound: fq_bound,
        delta,
        delta_cap,
        fidelity_bound: None,
        marginals: vec![rho],
    })
}
