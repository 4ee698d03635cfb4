//! Randomized verification suites: oracle searches against the closed forms,
//! exact saturation identities, and witness soundness on separable states.
//! Every trial draws from its own child RNG, so a report depends only on the
//! seed and the trial count.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{witness, Criterion, WitnessInput};
use crate::error::{Error, Result};
use crate::infomeasures::{any_state_corr_max_qubit, fidelity, mean, sep_corr_max_single};
use crate::models::{chain_edges, ferro_qubit_model, lattice_edges, two_body_hamiltonian, Lattice};
use crate::oracles::{
    any_state_opt, roof_max, roof_min, saturating_chain_state, sep_couple_opt, symmetric_extension_value, Direction,
    OptimizerConfig, ProductEnsemble,
};
use crate::qcore::{c64, flip_operator, spin_half, tensor, CMatrix, CVector, DensityMatrix, Observable};
use crate::sampling::{random_density_matrix, random_hermitian, random_pure_state, random_qubit_state, sub_rng};

pub const ROOF_TOL: f64 = 1e-4;
pub const COUPLING_TOL: f64 = 1e-3;
pub const FEASIBILITY_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;
/// Slack allowed above a closed-form maximum (or below a minimum).
pub const ORDER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// roof_max against ⟨h²⟩ − F_Q/4 on random qubit (5 of 6 trials) and
    /// qutrit states.
    Tables,
    /// roof_min against ⟨h⟩² and any_state_opt against ⟨h²⟩ − I_WY,
    /// alternating.
    Roofs,
    /// Separable Heisenberg maximum against F/2 − 1/4.
    Fidelity,
    /// Saturating many-body states against N_p·⟨H_AB⟩ and N(N−1)/2·⟨H_AB⟩.
    Saturation,
    /// Separable two-qubit states never violate the entanglement criteria.
    Witnesses,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Tables, Suite::Roofs, Suite::Fidelity, Suite::Saturation, Suite::Witnesses];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Tables => "tables",
            Suite::Roofs => "roofs",
            Suite::Fidelity => "fidelity",
            Suite::Saturation => "saturation",
            Suite::Witnesses => "witnesses",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Validation(format!("unknown suite {s:?}; expected one of tables, roofs, fidelity, saturation, witnesses")))
    }
}

/// Result of one randomized check. `abs_err` is the deviation from the
/// closed form, or the size of a violation for one-sided checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Trial {
    pub passed: bool,
    pub abs_err: f64,
}

impl Trial {
    fn within(abs_err: f64, tol: f64) -> Self {
        Self { passed: abs_err <= tol, abs_err }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst_abs_err: f64,
    pub seed: u64,
}

impl SuiteReport {
    pub fn from_trials(suite: Suite, seed: u64, trials: &[Trial]) -> Self {
        let passed = trials.iter().filter(|t| t.passed).count();
        let worst_abs_err = trials.iter().map(|t| t.abs_err).fold(0.0, f64::max);
        Self { suite, trials: trials.len(), passed, failed: trials.len() - passed, worst_abs_err, seed }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn oracle_cfg(rng: &mut ChaCha8Rng) -> OptimizerConfig {
    OptimizerConfig::with_seed(rng.random())
}

fn heisenberg_pair() -> Observable {
    let m = spin_half().iter().map(|j| tensor(j.matrix(), j.matrix())).fold(CMatrix::zeros(4, 4), |a, b| a + b);
    Observable::from_hermitian(m)
}

fn product_op(h: &Observable) -> Observable {
    Observable::from_hermitian(tensor(h.matrix(), h.matrix()))
}

/// roof_max over decompositions of a random state of dimension `d`: must
/// reach ⟨h²⟩ − F_Q/4 within [`ROOF_TOL`] and never exceed it.
pub fn roof_max_trial(d: usize, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_density_matrix(d, rng);
    let h = random_hermitian(d, rng);
    let r = roof_max(&rho, std::slice::from_ref(&h), &oracle_cfg(rng))?;
    let closed = sep_corr_max_single(&rho, &h)?;
    let err = (r.value - closed).abs();
    Ok(Trial { passed: err <= ROOF_TOL && r.value <= closed + ORDER_TOL, abs_err: err })
}

/// roof_min of one operator against ⟨h⟩², which every state attains by a
/// decomposition into pure states of equal mean.
pub fn roof_min_trial(d: usize, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_density_matrix(d, rng);
    let h = random_hermitian(d, rng);
    let r = roof_min(&rho, std::slice::from_ref(&h), &oracle_cfg(rng))?;
    let closed = mean(&rho, &h)?.powi(2);
    let err = (r.value - closed).abs();
    Ok(Trial { passed: err <= ROOF_TOL && r.value >= closed - ORDER_TOL, abs_err: err })
}

/// Maximum of ⟨h⊗h⟩ over all two-qubit states with both marginals ϱ
/// against ⟨h²⟩ − I_WY.
pub fn any_state_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_qubit_state(rng);
    let h = random_hermitian(2, rng);
    let r = any_state_opt(&rho, &rho, &product_op(&h), Direction::Max, &oracle_cfg(rng))?;
    let closed = any_state_corr_max_qubit(&rho, &h)?;
    let err = (r.value - closed).abs();
    Ok(Trial { passed: r.converged && r.residual <= FEASIBILITY_TOL && err <= COUPLING_TOL, abs_err: err })
}

/// Separable maximum of Σ_l ⟨j_l⊗j_l⟩ with marginals ϱ, σ against
/// F(ϱ, σ)/2 − 1/4.
pub fn fidelity_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_qubit_state(rng);
    let sigma = random_qubit_state(rng);
    let r = sep_couple_opt(&rho, &sigma, &heisenberg_pair(), Direction::Max, &oracle_cfg(rng))?;
    let closed = fidelity(&rho, &sigma)? / 2.0 - 0.25;
    let err = (r.value - closed).abs();
    Ok(Trial { passed: r.converged && r.residual <= FEASIBILITY_TOL && err <= COUPLING_TOL, abs_err: err })
}

/// The lattices used by the chain saturation check: rings of 4 and 6 sites
/// and the 2×4 torus.
pub fn saturation_lattices() -> Result<Vec<Lattice>> {
    Ok(vec![chain_edges(4, true)?, chain_edges(6, true)?, lattice_edges(&[2, 4], true)?])
}

/// Places the doubled roof_max ensemble of a random qubit state on the two
/// sublattices of `lattice` and compares the N-body energy with N_p·⟨H_AB⟩
/// on the two-party state.
pub fn chain_saturation_trial(lattice: &Lattice, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_qubit_state(rng);
    let h = random_hermitian(2, rng);
    let j = rng.random_range(0.2..2.0);
    let field = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
    let spec = ferro_qubit_model(lattice.n, j, h.clone(), field, lattice.edges.clone())?;
    let ens = roof_max(&rho, std::slice::from_ref(&h), &oracle_cfg(rng))?.ensemble.doubled()?;
    let energy = saturating_chain_state(&ens, &spec, lattice.coloring.as_deref())?;
    let expected = spec.np() as f64 * ens.assemble().expectation(&two_body_hamiltonian(&spec)?)?;
    Ok(Trial::within((energy - expected).abs(), IDENTITY_TOL))
}

/// Energy of Σ_k p_k ψ_k^{⊗N} from a roof_max ensemble under a random
/// two-body operator against N(N−1)/2·⟨H_AB⟩ on Σ_k p_k ψ_k⊗ψ_k.
pub fn extension_saturation_trial(n: usize, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let rho = random_qubit_state(rng);
    let h = random_hermitian(2, rng);
    let hab = random_hermitian(4, rng);
    let ens = roof_max(&rho, std::slice::from_ref(&h), &oracle_cfg(rng))?.ensemble;
    let locals: Vec<(f64, CVector)> = ens.weights().iter().zip(ens.locals()).map(|(w, t)| (*w, t[0].clone())).collect();
    let value = symmetric_extension_value(&locals, n, &hab)?;
    let pairs = (n * (n - 1) / 2) as f64;
    let expected = pairs * ens.doubled()?.assemble().expectation(&hab)?;
    Ok(Trial::within((value - expected).abs(), IDENTITY_TOL))
}

/// How a separable test state for the witness suite is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparableSource {
    /// Σ_k p_k ψ_k⊗ψ_k from a roof_max decomposition.
    RoofMaxDoubled,
    /// Σ_k p_k ψ_k⊗ψ_k from a roof_min decomposition.
    RoofMinDoubled,
    /// Σ_k p_k ψ_k⊗ψ_k with random pure ψ_k and weights.
    RandomBosonic,
    /// Swap-symmetrized mixture of random products a_k⊗b_k.
    SymmetrizedProducts,
    /// Swap-symmetrized state found by sep_couple_opt for a random objective
    /// with both marginals ϱ.
    CouplingOptimum,
}

impl SeparableSource {
    pub const ALL: [SeparableSource; 5] = [
        SeparableSource::RoofMaxDoubled,
        SeparableSource::RoofMinDoubled,
        SeparableSource::RandomBosonic,
        SeparableSource::SymmetrizedProducts,
        SeparableSource::CouplingOptimum,
    ];

    /// Mixtures of ψ⊗ψ, the states the symmetric criteria are stated for.
    pub fn is_bosonic(self) -> bool {
        matches!(self, SeparableSource::RoofMaxDoubled | SeparableSource::RoofMinDoubled | SeparableSource::RandomBosonic)
    }
}

fn symmetrize(m: &CMatrix) -> Result<DensityMatrix> {
    let f = flip_operator(2)?;
    let s = (m + f.matrix() * m * f.matrix()) * c64(0.5, 0.0);
    DensityMatrix::new(s)
}

fn random_weights(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Draws a separable two-qubit state with equal marginals from `source`.
pub fn separable_pair(source: SeparableSource, rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    match source {
        SeparableSource::RoofMaxDoubled | SeparableSource::RoofMinDoubled => {
            let rho = random_qubit_state(rng);
            let h = random_hermitian(2, rng);
            let cfg = oracle_cfg(rng);
            let r = if source == SeparableSource::RoofMaxDoubled {
                roof_max(&rho, std::slice::from_ref(&h), &cfg)?
            } else {
                roof_min(&rho, std::slice::from_ref(&h), &cfg)?
            };
            Ok(r.ensemble.doubled()?.assemble())
        }
        SeparableSource::RandomBosonic => {
            let k = rng.random_range(1..=4);
            let weights = random_weights(k, rng);
            let locals = (0..k)
                .map(|_| {
                    let v = random_pure_state(2, rng);
                    vec![v.clone(), v]
                })
                .collect();
            Ok(ProductEnsemble::new(weights, locals)?.assemble())
        }
        SeparableSource::SymmetrizedProducts => {
            let k = rng.random_range(1..=4);
            let weights = random_weights(k, rng);
            let locals = (0..k).map(|_| vec![random_pure_state(2, rng), random_pure_state(2, rng)]).collect();
            symmetrize(ProductEnsemble::new(weights, locals)?.assemble().matrix())
        }
        SeparableSource::CouplingOptimum => {
            let rho = random_qubit_state(rng);
            let objective = random_hermitian(4, rng);
            let cfg = OptimizerConfig { restarts: 2, ..oracle_cfg(rng) };
            let r = sep_couple_opt(&rho, &rho, &objective, Direction::Max, &cfg)?;
            let ens = r.ensemble.ok_or_else(|| Error::NonConvergence("separable search returned no ensemble".into()))?;
            symmetrize(ens.assemble().matrix())
        }
    }
}

/// Evaluates the criteria that apply to `state` (the symmetric ones only for
/// mixtures of ψ⊗ψ) with random operators. Returns the largest amount by
/// which an applicable inequality is exceeded and whether any report was
/// flagged as violated.
pub fn witness_violation(state: &DensityMatrix, bosonic: bool, rng: &mut ChaCha8Rng) -> Result<(f64, bool)> {
    let h = random_hermitian(2, rng);
    let h2 = random_hermitian(2, rng);
    let mut reports = vec![
        witness(Criterion::CorrQfi, WitnessInput::Pair { state, h: &h })?,
        witness(Criterion::FidelityCorr, WitnessInput::QubitPair { state })?,
    ];
    if bosonic {
        reports.push(witness(Criterion::SymTwoSided, WitnessInput::Pair { state, h: &h })?);
        reports.push(witness(Criterion::SymTwoOps, WitnessInput::PairTwoOps { state, h1: &h, h2: &h2 })?);
    }
    let mut worst: f64 = 0.0;
    for r in reports.iter().filter(|r| r.applicable) {
        worst = worst.max(r.lhs - r.rhs);
        if let Some(lower) = r.secondary {
            worst = worst.max(lower - r.lhs);
        }
    }
    Ok((worst, reports.iter().any(|r| r.violated)))
}

pub fn witness_trial(source: SeparableSource, rng: &mut ChaCha8Rng) -> Result<Trial> {
    let state = separable_pair(source, rng)?;
    let (excess, violated) = witness_violation(&state, source.is_bosonic(), rng)?;
    Ok(Trial { passed: !violated, abs_err: excess.max(0.0) })
}

/// Trial `index` of `suite`, drawn from child RNG `index` of `seed`.
pub fn run_trial(suite: Suite, seed: u64, index: usize) -> Result<Trial> {
    let mut rng = sub_rng(seed, index as u64);
    match suite {
        Suite::Tables => roof_max_trial(if index % 6 == 5 { 3 } else { 2 }, &mut rng),
        Suite::Roofs => {
            if index.is_multiple_of(2) {
                roof_min_trial(2 + (index / 2) % 2, &mut rng)
            } else {
                any_state_trial(&mut rng)
            }
        }
        Suite::Fidelity => fidelity_trial(&mut rng),
        Suite::Saturation => match index % 6 {
            k @ 0..=2 => chain_saturation_trial(&saturation_lattices()?[k], &mut rng),
            3 => extension_saturation_trial(3, &mut rng),
            4 => extension_saturation_trial(4, &mut rng),
            _ => extension_saturation_trial(10, &mut rng),
        },
        Suite::Witnesses => witness_trial(SeparableSource::ALL[index % SeparableSource::ALL.len()], &mut rng),
    }
}

/// Runs `trials` trials in parallel. Oracle errors count as failed trials
/// with infinite error.
pub fn run_suite(suite: Suite, seed: u64, trials: usize) -> SuiteReport {
    let results: Vec<Trial> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(suite, seed, i).unwrap_or(Trial { passed: false, abs_err: f64::INFINITY }))
        .collect();
    SuiteReport::from_trials(suite, seed, &results)
}
