//! Variance, quantum Fisher information, Wigner–Yanase skew information,
//! Uhlmann fidelity, and the closed-form extrema of two-body correlations
//! over separable couplings of a fixed marginal.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::qcore::{eigh_unchecked, psd_sqrt, trace_product_re, CMatrix, DensityMatrix, EigenDecomposition, Observable, EIG_CLIP};

/// Whether a [`RoofValue`] is the exact extremum or only a bound on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    UpperBound,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoofValue {
    pub value: f64,
    pub exactness: Exactness,
}

impl RoofValue {
    pub fn exact(value: f64) -> Self {
        Self { value, exactness: Exactness::Exact }
    }
}

/// The two-party state set a correlation extremum is taken over: all
/// separable couplings of ϱ with itself, or only the exchange-symmetric ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPartySet {
    Sep,
    SymSep,
}

fn check_dims(rho: &DensityMatrix, h: &Observable) -> Result<()> {
    if rho.dim() != h.dim() {
        return dim_err(format!("state of dim {} with operator of dim {}", rho.dim(), h.dim()));
    }
    Ok(())
}

fn check_list(rho: &DensityMatrix, hs: &[Observable]) -> Result<()> {
    if hs.is_empty() {
        return Err(Error::Validation("operator list is empty".into()));
    }
    hs.iter().try_for_each(|h| check_dims(rho, h))
}

fn require_qubit(rho: &DensityMatrix, what: &str) -> Result<()> {
    if rho.dim() != 2 {
        return Err(Error::Unsupported(format!("{what} is only available for qubits, got dim {}", rho.dim())));
    }
    Ok(())
}

/// ⟨h⟩ = Tr(ϱh).
pub fn mean(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    rho.expectation(h)
}

/// ⟨h²⟩ = Tr(ϱh²).
pub fn second_moment(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    check_dims(rho, h)?;
    Ok(trace_product_re(rho.matrix(), &(h.matrix() * h.matrix())))
}

/// ⟨h²⟩ − ⟨h⟩², with round-off negatives clipped to zero.
pub fn variance(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    let m = mean(rho, h)?;
    Ok((second_moment(rho, h)? - m * m).max(0.0))
}

/// The matrix V† h V of `h` in the eigenbasis of a state.
fn in_eigenbasis(eig: &EigenDecomposition, h: &CMatrix) -> CMatrix {
    eig.eigenvectors.adjoint() * h * &eig.eigenvectors
}

/// Quantum Fisher information from a precomputed eigendecomposition of ϱ.
pub fn qfi_with_eigen(eig: &EigenDecomposition, h: &Observable) -> Result<f64> {
    if eig.dim() != h.dim() {
        return dim_err("eigendecomposition and operator differ in dimension");
    }
    let hk = in_eigenbasis(eig, h.matrix());
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let n = lam.len();
    let mut acc = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let s = lam[k] + lam[l];
            if s < EIG_CLIP {
                continue;
            }
            let d = lam[k] - lam[l];
            acc += d * d / s * hk[(k, l)].norm_sqr();
        }
    }
    // each unordered pair appears twice in the double sum, times the prefactor 2
    Ok(4.0 * acc)
}

/// F_Q[ϱ, h] = 2 Σ_{k,l} (λ_k − λ_l)² / (λ_k + λ_l) |⟨k|h|l⟩|².
pub fn qfi(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    check_dims(rho, h)?;
    qfi_with_eigen(&rho.eigen(), h)
}

/// Wigner–Yanase skew information from a precomputed eigendecomposition.
pub fn wy_skew_with_eigen(eig: &EigenDecomposition, h: &Observable) -> Result<f64> {
    if eig.dim() != h.dim() {
        return dim_err("eigendecomposition and operator differ in dimension");
    }
    let hk = in_eigenbasis(eig, h.matrix());
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|l| if *l < EIG_CLIP { 0.0 } else { l.sqrt() }).collect();
    let n = roots.len();
    // Tr(h²ϱ) − Tr(h√ϱh√ϱ) = ½ Σ_{k,l} (√λ_k − √λ_l)² |⟨k|h|l⟩|²
    let mut acc = 0.0;
    for k in 0..n {
        for l in (k + 1)..n {
            let d = roots[k] - roots[l];
            acc += d * d * hk[(k, l)].norm_sqr();
        }
    }
    Ok(acc)
}

/// I_WY(ϱ, h) = Tr(h²ϱ) − Tr(h√ϱ h√ϱ).
pub fn wy_skew(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    check_dims(rho, h)?;
    wy_skew_with_eigen(&rho.eigen(), h)
}

/// Uhlmann–Jozsa fidelity (Tr √(√ϱ σ √ϱ))², clamped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return dim_err(format!("states of dims {} and {}", rho.dim(), sigma.dim()));
    }
    let s = psd_sqrt(rho.matrix())?;
    let inner = &s * sigma.matrix() * &s;
    let eig = eigh_unchecked(&inner);
    let root_sum: f64 = eig.eigenvalues.iter().map(|l| if *l < EIG_CLIP { 0.0 } else { l.sqrt() }).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Maximum of Σ_l ⟨h_l ⊗ h_l⟩ over separable two-party states whose
/// marginals both equal ϱ.
///
/// For one operator the maximum is ⟨h²⟩ − F_Q/4 and is also attained by a
/// symmetric separable state. For several operators the same sum is an
/// upper bound.
pub fn sep_corr_max(rho: &DensityMatrix, hs: &[Observable]) -> Result<RoofValue> {
    check_list(rho, hs)?;
    let eig = rho.eigen();
    let mut total = 0.0;
    for h in hs {
        total += second_moment(rho, h)? - qfi_with_eigen(&eig, h)? / 4.0;
    }
    let exactness = if hs.len() == 1 { Exactness::Exact } else { Exactness::UpperBound };
    Ok(RoofValue { value: total, exactness })
}

/// Maximum of ⟨h ⊗ h⟩ over all two-qubit states (entangled ones included)
/// with both marginals equal to ϱ: ⟨h²⟩ − I_WY(ϱ, h).
pub fn any_state_corr_max_qubit(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    require_qubit(rho, "the general-state correlation maximum")?;
    check_dims(rho, h)?;
    Ok(second_moment(rho, h)? - wy_skew(rho, h)?)
}

/// Maximum of Σ_{l=x,y,z} ⟨j_l ⊗ j_l⟩ over separable two-qubit states with
/// marginals ϱ and σ: F(ϱ, σ)/2 − 1/4.
pub fn sep_corr_max_heisenberg(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    require_qubit(rho, "the Heisenberg correlation maximum")?;
    require_qubit(sigma, "the Heisenberg correlation maximum")?;
    Ok(fidelity(rho, sigma)? / 2.0 - 0.25)
}

/// Minimum of Σ_l ⟨h_l ⊗ h_l⟩ over two-party states with both marginals ϱ,
/// taken over `set`. The value is always Σ_l ⟨h_l⟩²; the exactness flag says
/// how it relates to the true minimum.
pub fn sym_sep_corr_min(rho: &DensityMatrix, hs: &[Observable], set: TwoPartySet) -> Result<RoofValue> {
    check_list(rho, hs)?;
    let mut total = 0.0;
    for h in hs {
        let m = mean(rho, h)?;
        total += m * m;
    }
    let exactness = match set {
        TwoPartySet::Sep => Exactness::UpperBound,
        TwoPartySet::SymSep if hs.len() <= 2 => Exactness::Exact,
        TwoPartySet::SymSep => Exactness::LowerBound,
    };
    Ok(RoofValue { value: total, exactness })
}

/// Convenience for single-operator exact values used by the bound formulas.
pub(crate) fn sep_corr_max_single(rho: &DensityMatrix, h: &Observable) -> Result<f64> {
    Ok(sep_corr_max(rho, std::slice::from_ref(h))?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c64, matrix_sqrt_psd, spin_half, CVector};
    use crate::sampling;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        DensityMatrix::pure(&[c64(s, 0.0), c64(s, 0.0)]).unwrap()
    }

    fn mixed_x() -> DensityMatrix {
        DensityMatrix::from_bloch([0.6, 0.0, 0.0]).unwrap()
    }

    fn jz() -> Observable {
        spin_half()[2].clone()
    }

    // Reference implementations evaluated straight from the defining
    // formulas, without the eigenbasis shortcuts.
    fn qfi_double_sum(rho: &DensityMatrix, h: &Observable) -> f64 {
        let eig = rho.eigen();
        let n = eig.dim();
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                let (a, b) = (eig.eigenvalues[k], eig.eigenvalues[l]);
                if a + b < 1e-12 {
                    continue;
                }
                let vk = eig.eigenvectors.column(k);
                let vl = eig.eigenvectors.column(l);
                let elem = vk.dotc(&(h.matrix() * vl));
                acc += 2.0 * (a - b).powi(2) / (a + b) * elem.norm_sqr();
            }
        }
        acc
    }

    fn wy_direct(rho: &DensityMatrix, h: &Observable) -> f64 {
        let s = matrix_sqrt_psd(rho).unwrap();
        let hm = h.matrix();
        (hm * hm * rho.matrix()).trace().re - (hm * &s * hm * &s).trace().re
    }

    fn fidelity_qubit(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        let det = |m: &CMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
        trace_product_re(rho.matrix(), sigma.matrix()) + 2.0 * (det(rho.matrix()) * det(sigma.matrix())).sqrt()
    }

    #[test]
    fn variance_examples() {
        assert!((variance(&plus(), &jz()).unwrap() - 0.25).abs() < 1e-15);
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(variance(&zero, &jz()).unwrap().abs() < 1e-15);
        assert!((variance(&mixed_x(), &jz()).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn qfi_examples() {
        assert!((qfi(&plus(), &jz()).unwrap() - 1.0).abs() < 1e-12);
        assert!(qfi(&DensityMatrix::maximally_mixed(2), &jz()).unwrap().abs() < 1e-15);
        // λ = (0.8, 0.2): 2·2·0.36/1·(1/4) = 0.36
        assert!((qfi(&mixed_x(), &jz()).unwrap() - 0.36).abs() < 1e-12);
    }

    #[test]
    fn wy_examples() {
        assert!((wy_skew(&plus(), &jz()).unwrap() - 0.25).abs() < 1e-12);
        assert!(wy_skew(&DensityMatrix::maximally_mixed(2), &jz()).unwrap().abs() < 1e-15);
        // (√0.8 − √0.2)² / 4 = (1 − 2·0.4)/4 = 0.05
        assert!((wy_skew(&mixed_x(), &jz()).unwrap() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert!((fidelity(&mixed_x(), &mixed_x()).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-12);
        assert!((fidelity(&DensityMatrix::maximally_mixed(2), &zero).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(fidelity(&zero, &DensityMatrix::maximally_mixed(3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn sep_corr_max_examples() {
        let v = sep_corr_max(&plus(), &[jz()]).unwrap();
        assert!(v.value.abs() < 1e-12 && v.exactness == Exactness::Exact);
        let v = sep_corr_max(&DensityMatrix::maximally_mixed(2), &[jz()]).unwrap();
        assert!((v.value - 0.25).abs() < 1e-15);
        let v = sep_corr_max(&mixed_x(), &[jz()]).unwrap();
        assert!((v.value - 0.16).abs() < 1e-12);
        let v = sep_corr_max(&mixed_x(), &spin_half()).unwrap();
        assert_eq!(v.exactness, Exactness::UpperBound);
        assert!(sep_corr_max(&mixed_x(), &[]).is_err());
    }

    #[test]
    fn any_state_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let psi = sampling::random_pure_state(2, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let m = mean(&rho, &jz()).unwrap();
        assert!((any_state_corr_max_qubit(&rho, &jz()).unwrap() - m * m).abs() < 1e-12);
        assert!((any_state_corr_max_qubit(&DensityMatrix::maximally_mixed(2), &jz()).unwrap() - 0.25).abs() < 1e-15);
        assert!((any_state_corr_max_qubit(&mixed_x(), &jz()).unwrap() - 0.20).abs() < 1e-12);
        let q = DensityMatrix::maximally_mixed(3);
        let h3 = Observable::diagonal(&[1.0, 0.0, -1.0]);
        assert!(matches!(any_state_corr_max_qubit(&q, &h3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn heisenberg_examples() {
        let zero = DensityMatrix::basis_state(2, 0).unwrap();
        let one = DensityMatrix::basis_state(2, 1).unwrap();
        assert!((sep_corr_max_heisenberg(&zero, &zero).unwrap() - 0.25).abs() < 1e-12);
        assert!((sep_corr_max_heisenberg(&zero, &one).unwrap() + 0.25).abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(2);
        assert!((sep_corr_max_heisenberg(&mm, &mm).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn sym_sep_min_examples() {
        let v = sym_sep_corr_min(&DensityMatrix::maximally_mixed(2), &[jz()], TwoPartySet::SymSep).unwrap();
        assert_eq!(v, RoofValue::exact(0.0));
        let jx = spin_half()[0].clone();
        let v = sym_sep_corr_min(&mixed_x(), std::slice::from_ref(&jx), TwoPartySet::SymSep).unwrap();
        assert!((v.value - 0.09).abs() < 1e-15 && v.exactness == Exactness::Exact);
        let v = sym_sep_corr_min(&DensityMatrix::maximally_mixed(2), &spin_half(), TwoPartySet::SymSep).unwrap();
        assert!(v.value.abs() < 1e-15 && v.exactness == Exactness::LowerBound);
        let v = sym_sep_corr_min(&mixed_x(), &[jx], TwoPartySet::Sep).unwrap();
        assert_eq!(v.exactness, Exactness::UpperBound);
    }

    fn state_and_op(seed: u64, dim: usize) -> (DensityMatrix, Observable) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (sampling::random_density_matrix(dim, &mut rng), sampling::random_hermitian(dim, &mut rng))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn qfi_between_zero_and_four_variances(seed in any::<u64>(), dim in 2usize..=4) {
            let (rho, h) = state_and_op(seed, dim);
            let f = qfi(&rho, &h).unwrap();
            let v = variance(&rho, &h).unwrap();
            prop_assert!(f >= -1e-12 && f <= 4.0 * v + 1e-9);
            prop_assert!((f - qfi_double_sum(&rho, &h)).abs() <= 1e-9 * (1.0 + f));
        }

        #[test]
        fn qfi_equals_four_variances_on_pure(seed in any::<u64>(), dim in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi: CVector = sampling::random_pure_state(dim, &mut rng);
            let rho = DensityMatrix::from_pure(&psi).unwrap();
            let h = sampling::random_hermitian(dim, &mut rng);
            let f = qfi(&rho, &h).unwrap();
            prop_assert!((f - 4.0 * variance(&rho, &h).unwrap()).abs() <= 1e-9);
        }

        #[test]
        fn skew_fisher_variance_chain(seed in any::<u64>(), dim in 2usize..=4) {
            let (rho, h) = state_and_op(seed, dim);
            let w = wy_skew(&rho, &h).unwrap();
            let f = qfi(&rho, &h).unwrap();
            let v = variance(&rho, &h).unwrap();
            prop_assert!(w >= -1e-12);
            prop_assert!(w <= f / 4.0 + 1e-10 && f / 4.0 <= v + 1e-10);
            prop_assert!((w - wy_direct(&rho, &h)).abs() <= 1e-9);
        }

        #[test]
        fn separable_max_below_general_max(seed in any::<u64>()) {
            let (rho, h) = state_and_op(seed, 2);
            let sep = sep_corr_max(&rho, std::slice::from_ref(&h)).unwrap().value;
            prop_assert!(sep <= any_state_corr_max_qubit(&rho, &h).unwrap() + 1e-12);
        }

        #[test]
        fn qfi_ignores_eigenvector_phases(seed in any::<u64>(), dim in 2usize..=4) {
            let (rho, h) = state_and_op(seed, dim);
            let mut eig = rho.eigen();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
            for k in 0..dim {
                let phi: f64 = rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU);
                let phase = c64(phi.cos(), phi.sin());
                for i in 0..dim {
                    eig.eigenvectors[(i, k)] *= phase;
                }
            }
            let a = qfi(&rho, &h).unwrap();
            let b = qfi_with_eigen(&eig, &h).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
        }

        #[test]
        fn fidelity_symmetric_and_unitarily_invariant(seed in any::<u64>(), dim in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = sampling::random_density_matrix(dim, &mut rng);
            let sigma = sampling::random_density_matrix(dim, &mut rng);
            let u = sampling::random_unitary(dim, &mut rng);
            let f = fidelity(&rho, &sigma).unwrap();
            prop_assert!((f - fidelity(&sigma, &rho).unwrap()).abs() <= 1e-10);
            let rot = |m: &DensityMatrix| DensityMatrix::from_matrix_unchecked(&u * m.matrix() * u.adjoint());
            prop_assert!((f - fidelity(&rot(&rho), &rot(&sigma)).unwrap()).abs() <= 1e-10);
            if dim == 2 {
                prop_assert!((f - fidelity_qubit(&rho, &sigma)).abs() <= 1e-10);
            }
        }

        #[test]
        fn single_operator_identity(seed in any::<u64>(), dim in 2usize..=4) {
            let (rho, h) = state_and_op(seed, dim);
            let c = sep_corr_max(&rho, std::slice::from_ref(&h)).unwrap().value;
            let f = qfi(&rho, &h).unwrap();
            prop_assert!((c + f / 4.0 - second_moment(&rho, &h).unwrap()).abs() <= 1e-12 * (1.0 + f));
        }
    }
}
