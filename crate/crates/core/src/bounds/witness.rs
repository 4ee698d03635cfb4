//! Entanglement criteria built from the two-body correlation extrema.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::infomeasures::{fidelity, qfi, second_moment, sep_corr_max_single, variance};
use crate::qcore::{flip_operator, partial_trace, spin_half, tensor, DensityMatrix, Observable};

const VIOLATION_TOL: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// ⟨h⊗h⟩ ≤ ⟨h²⟩ − F_Q[ϱ,h]/4 for states with equal marginals and
    /// non-negative correlations.
    CorrQfi,
    /// ⟨h²⟩ − Var(h) ≤ ⟨h⊗h⟩ ≤ ⟨h²⟩ − F_Q/4 for exchange-symmetric states.
    SymTwoSided,
    /// Σ_l ⟨h_l⟩² ≤ Σ_l ⟨h_l⊗h_l⟩ for exchange-symmetric states, two operators.
    SymTwoOps,
    /// Σ_l ⟨j_l⊗j_l⟩ ≤ F(ϱ,σ)/2 − 1/4 for two qubits with
    /// Σ_l ⟨j_l⊗j_l⟩ ≥ Σ_l ⟨j_l⟩_ϱ⟨j_l⟩_σ.
    FidelityCorr,
    /// ⟨J_z²⟩ ≤ N²⟨h²⟩ − N(N−1)/4 · F_Q[ϱ̄, h] for an N-party state with
    /// averaged marginal ϱ̄.
    CollectiveQfi,
}

/// Inputs for [`witness`].
#[derive(Clone, Debug)]
pub enum WitnessInput<'a> {
    Pair { state: &'a DensityMatrix, h: &'a Observable },
    PairTwoOps { state: &'a DensityMatrix, h1: &'a Observable, h2: &'a Observable },
    QubitPair { state: &'a DensityMatrix },
    Collective { second_moment: f64, average_marginal: &'a DensityMatrix, h: &'a Observable, n: usize },
}

/// Outcome of an entanglement criterion. `lhs ≤ rhs` holds for every state
/// of the set the criterion describes; `secondary` is the lower limit of the
/// two-sided criterion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub criterion: Criterion,
    pub lhs: f64,
    pub rhs: f64,
    pub applicable: bool,
    pub violated: bool,
    pub secondary: Option<f64>,
}

fn pair_marginals(state: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix, usize)> {
    let d = (state.dim() as f64).sqrt().round() as usize;
    if d * d != state.dim() || d < 2 {
        return dim_err(format!("state of dim {} is not a pair of equal parties", state.dim()));
    }
    let a = partial_trace(state, &[d, d], &[0])?;
    let b = partial_trace(state, &[d, d], &[1])?;
    Ok((a, b, d))
}

fn max_abs_diff(a: &nalgebra::DMatrix<crate::qcore::C64>, b: &nalgebra::DMatrix<crate::qcore::C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn is_symmetric(state: &DensityMatrix, d: usize) -> Result<bool> {
    let f = flip_operator(d)?;
    let flipped = f.matrix() * state.matrix() * f.matrix();
    Ok(max_abs_diff(&flipped, state.matrix()) <= MARGINAL_TOL)
}

fn check_op(h: &Observable, d: usize) -> Result<()> {
    if h.dim() != d {
        return dim_err(format!("operator of dim {} for parties of dim {d}", h.dim()));
    }
    Ok(())
}

fn corr(state: &DensityMatrix, h1: &Observable, h2: &Observable) -> Result<f64> {
    state.expectation(&Observable::from_hermitian(tensor(h1.matrix(), h2.matrix())))
}

fn report(criterion: Criterion, lhs: f64, rhs: f64, applicable: bool) -> WitnessReport {
    WitnessReport { criterion, lhs, rhs, applicable, violated: applicable && lhs > rhs + VIOLATION_TOL, secondary: None }
}

fn mismatch(criterion: Criterion) -> Error {
    Error::Validation(format!("input kind does not match criterion {criterion:?}"))
}

/// Evaluates one criterion. A violation of an applicable criterion proves
/// the state entangled; non-applicable inputs are reported but never
/// flagged.
pub fn witness(criterion: Criterion, input: WitnessInput<'_>) -> Result<WitnessReport> {
    match (criterion, input) {
        (Criterion::CorrQfi, WitnessInput::Pair { state, h }) => {
            let (a, b, d) = pair_marginals(state)?;
            check_op(h, d)?;
            let lhs = corr(state, h, h)?;
            let same = max_abs_diff(a.matrix(), b.matrix()) <= MARGINAL_TOL;
            let m = a.expectation(h)?;
            let applicable = same && lhs - m * m >= -VIOLATION_TOL;
            Ok(report(criterion, lhs, sep_corr_max_single(&a, h)?, applicable))
        }
        (Criterion::SymTwoSided, WitnessInput::Pair { state, h }) => {
            let (a, _, d) = pair_marginals(state)?;
            check_op(h, d)?;
            let applicable = is_symmetric(state, d)?;
            let lhs = corr(state, h, h)?;
            let upper = sep_corr_max_single(&a, h)?;
            let lower = second_moment(&a, h)? - variance(&a, h)?;
            let violated = applicable && (lhs > upper + VIOLATION_TOL || lhs < lower - VIOLATION_TOL);
            Ok(WitnessReport { criterion, lhs, rhs: upper, applicable, violated, secondary: Some(lower) })
        }
        (Criterion::SymTwoOps, WitnessInput::PairTwoOps { state, h1, h2 }) => {
            let (a, _, d) = pair_marginals(state)?;
            check_op(h1, d)?;
            check_op(h2, d)?;
            let applicable = is_symmetric(state, d)?;
            let (m1, m2) = (a.expectation(h1)?, a.expectation(h2)?);
            let rhs = corr(state, h1, h1)? + corr(state, h2, h2)?;
            Ok(report(criterion, m1 * m1 + m2 * m2, rhs, applicable))
        }
        (Criterion::FidelityCorr, WitnessInput::QubitPair { state }) => {
            let (a, b, d) = pair_marginals(state)?;
            if d != 2 {
                return Err(Error::Unsupported("the fidelity criterion is defined for two qubits".into()));
            }
            let s = spin_half();
            let mut lhs = 0.0;
            let mut product = 0.0;
            for j in &s {
                lhs += corr(state, j, j)?;
                product += a.expectation(j)? * b.expectation(j)?;
            }
            let applicable = lhs - product >= -VIOLATION_TOL;
            Ok(report(criterion, lhs, fidelity(&a, &b)? / 2.0 - 0.25, applicable))
        }
        (Criterion::CollectiveQfi, WitnessInput::Collective { second_moment: jsq, average_marginal, h, n }) => {
            if n < 2 {
                return Err(Error::Validation(format!("need n >= 2, got {n}")));
            }
            check_op(h, average_marginal.dim())?;
            let nf = n as f64;
            let rhs = nf * nf * second_moment(average_marginal, h)? - nf * (nf - 1.0) / 4.0 * qfi(average_marginal, h)?;
            Ok(report(criterion, jsq, rhs, true))
        }
        (c, _) => Err(mismatch(c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c64, CVector};

    fn pure(amps: &[f64]) -> DensityMatrix {
        let v = CVector::from_iterator(amps.len(), amps.iter().map(|&x| c64(x, 0.0)));
        DensityMatrix::from_pure(&v).unwrap()
    }

    #[test]
    fn bell_state_saturates() {
        let s = 0.5f64.sqrt();
        let bell = pure(&[s, 0.0, 0.0, s]);
        let hx = spin_half()[0].clone();
        let r = witness(Criterion::CorrQfi, WitnessInput::Pair { state: &bell, h: &hx }).unwrap();
        assert!((r.lhs - 0.25).abs() < 1e-12 && (r.rhs - 0.25).abs() < 1e-12);
        assert!(r.applicable && !r.violated);
    }

    #[test]
    fn partially_entangled_state_is_detected() {
        let t = std::f64::consts::PI / 8.0;
        let psi = pure(&[t.cos(), 0.0, 0.0, t.sin()]);
        let hx = spin_half()[0].clone();
        let r = witness(Criterion::CorrQfi, WitnessInput::Pair { state: &psi, h: &hx }).unwrap();
        assert!((r.lhs - (2.0 * t).sin() / 4.0).abs() < 1e-12);
        assert!((r.rhs - 0.125).abs() < 1e-12);
        assert!(r.applicable && r.violated && r.lhs - r.rhs >= 0.05);
    }

    #[test]
    fn collective_product_state_saturates() {
        let n = 6;
        let plus = DensityMatrix::from_bloch([1.0, 0.0, 0.0]).unwrap();
        let jz = spin_half()[2].clone();
        let r = witness(
            Criterion::CollectiveQfi,
            WitnessInput::Collective { second_moment: n as f64 / 4.0, average_marginal: &plus, h: &jz, n },
        )
        .unwrap();
        assert!((r.rhs - 1.5).abs() < 1e-12 && !r.violated);
    }

    #[test]
    fn singlet_violates_fidelity_criterion_only_when_gated() {
        let s = 0.5f64.sqrt();
        let triplet = pure(&[0.0, s, s, 0.0]);
        let r = witness(Criterion::FidelityCorr, WitnessInput::QubitPair { state: &triplet }).unwrap();
        // Σ⟨j_l⊗j_l⟩ = 1/4 for the m = 0 triplet; F(I/2, I/2) = 1 gives 1/4.
        assert!((r.lhs - 0.25).abs() < 1e-12 && (r.rhs - 0.25).abs() < 1e-12 && !r.violated);
        let singlet = pure(&[0.0, s, -s, 0.0]);
        let r = witness(Criterion::FidelityCorr, WitnessInput::QubitPair { state: &singlet }).unwrap();
        assert!(!r.applicable && !r.violated);
    }

    #[test]
    fn symmetric_criteria_flag_antisymmetric_correlations() {
        // |Ψ⁺⟩ has ⟨σ_z⊗σ_z⟩ = −1 below the symmetric-separable minimum 0.
        let s = 0.5f64.sqrt();
        let psi = pure(&[0.0, s, s, 0.0]);
        let sp = spin_half();
        let r = witness(Criterion::SymTwoSided, WitnessInput::Pair { state: &psi, h: &sp[2] }).unwrap();
        assert!(r.applicable && r.violated && r.lhs < r.secondary.unwrap());
        let r = witness(Criterion::SymTwoOps, WitnessInput::PairTwoOps { state: &psi, h1: &sp[2], h2: &sp[2] }).unwrap();
        assert!(r.applicable && r.violated);
        assert!(witness(Criterion::SymTwoOps, WitnessInput::QubitPair { state: &psi }).is_err());
    }
}
