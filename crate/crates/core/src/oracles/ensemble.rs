use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::models::{build_hamiltonian, ModelSpec};
use crate::qcore::{accumulate_two_body, c64, tensor_vec, CMatrix, CVector, DensityMatrix, Observable, C64, MAX_DENSE_DIM};

const WEIGHT_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

/// Σ_k p_k ⊗_n |ψ_{k,n}⟩⟨ψ_{k,n}|: a separable state stored as a weighted
/// list of product vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductEnsemble {
    weights: Vec<f64>,
    locals: Vec<Vec<CVector>>,
}

impl ProductEnsemble {
    pub fn new(weights: Vec<f64>, locals: Vec<Vec<CVector>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != locals.len() {
            return Err(Error::Validation("need one tuple of local states per weight".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Validation("weights must be non-negative and sum to 1".into()));
        }
        let parties = locals[0].len();
        if parties == 0 {
            return Err(Error::Validation("ensemble needs at least one party".into()));
        }
        let dims: Vec<usize> = locals[0].iter().map(|v| v.len()).collect();
        for tuple in &locals {
            if tuple.len() != parties || tuple.iter().zip(&dims).any(|(v, d)| v.len() != *d) {
                return dim_err("local state tuples differ in shape");
            }
            if tuple.iter().any(|v| (v.norm() - 1.0).abs() > NORM_TOL) {
                return Err(Error::Validation("local states must be unit vectors".into()));
            }
        }
        Ok(Self { weights, locals })
    }

    /// Builds an ensemble from unnormalized product components
    /// ⊗_n |v_{k,n}⟩, whose weights are the squared norms.
    pub(crate) fn from_unnormalized(components: Vec<Vec<CVector>>) -> Result<Self> {
        let mut weights = Vec::with_capacity(components.len());
        let mut locals = Vec::with_capacity(components.len());
        for tuple in components {
            let w: f64 = tuple.iter().map(|v| v.norm_squared()).product();
            let unit = tuple
                .into_iter()
                .map(|v| {
                    let n = v.norm();
                    if n > 1e-150 {
                        v.unscale(n)
                    } else {
                        let mut e = CVector::zeros(v.len());
                        e[0] = c64(1.0, 0.0);
                        e
                    }
                })
                .collect();
            weights.push(w);
            locals.push(unit);
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Validation("ensemble has zero total weight".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights, locals)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn locals(&self) -> &[Vec<CVector>] {
        &self.locals
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn parties(&self) -> usize {
        self.locals[0].len()
    }

    pub fn local_dims(&self) -> Vec<usize> {
        self.locals[0].iter().map(|v| v.len()).collect()
    }

    fn product_vector(tuple: &[CVector]) -> CVector {
        let mut v = tuple[0].clone();
        for f in &tuple[1..] {
            v = tensor_vec(&v, f);
        }
        v
    }

    /// The full density matrix on all parties.
    pub fn assemble(&self) -> DensityMatrix {
        let dim: usize = self.local_dims().iter().product();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, tuple) in self.weights.iter().zip(&self.locals) {
            let v = Self::product_vector(tuple);
            m += (&v * v.adjoint()) * c64(*w, 0.0);
        }
        DensityMatrix::from_matrix_unchecked(m)
    }

    /// Reduced state of one party.
    pub fn marginal(&self, party: usize) -> Result<DensityMatrix> {
        if party >= self.parties() {
            return dim_err(format!("party {party} out of range"));
        }
        let d = self.locals[0][party].len();
        let mut m = CMatrix::zeros(d, d);
        for (w, tuple) in self.weights.iter().zip(&self.locals) {
            let v = &tuple[party];
            m += (v * v.adjoint()) * c64(*w, 0.0);
        }
        Ok(DensityMatrix::from_matrix_unchecked(m))
    }

    /// Σ_k p_k ψ_k⊗ψ_k from a single-party ensemble: the symmetric two-party
    /// separable state whose marginals both equal Σ_k p_k ψ_kψ_k†.
    pub fn doubled(&self) -> Result<Self> {
        if self.parties() != 1 {
            return Err(Error::Validation("doubling needs a single-party ensemble".into()));
        }
        let locals = self.locals.iter().map(|t| vec![t[0].clone(), t[0].clone()]).collect();
        Self::new(self.weights.clone(), locals)
    }

    /// Σ_k p_k ⟨Ψ_k|op|Ψ_k⟩ for the product vectors Ψ_k.
    pub fn expectation(&self, op: &Observable) -> Result<f64> {
        let dim: usize = self.local_dims().iter().product();
        if op.dim() != dim {
            return dim_err(format!("operator of dim {} on ensemble of dim {dim}", op.dim()));
        }
        let mut acc = 0.0;
        for (w, tuple) in self.weights.iter().zip(&self.locals) {
            let v = Self::product_vector(tuple);
            acc += w * v.dotc(&(op.matrix() * &v)).re;
        }
        Ok(acc)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: EnsembleJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&EnsembleJson::from(self))?)
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleJson {
    weights: Vec<f64>,
    locals: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&ProductEnsemble> for EnsembleJson {
    fn from(e: &ProductEnsemble) -> Self {
        Self {
            weights: e.weights.clone(),
            locals: e.locals.iter().map(|t| t.iter().map(|v| v.iter().map(|z| [z.re, z.im]).collect()).collect()).collect(),
        }
    }
}

impl TryFrom<EnsembleJson> for ProductEnsemble {
    type Error = Error;
    fn try_from(raw: EnsembleJson) -> Result<Self> {
        let locals = raw
            .locals
            .iter()
            .map(|t| t.iter().map(|v| CVector::from_iterator(v.len(), v.iter().map(|p| C64::new(p[0], p[1])))).collect())
            .collect();
        ProductEnsemble::new(raw.weights, locals)
    }
}

impl Serialize for ProductEnsemble {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EnsembleJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductEnsemble {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        EnsembleJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Energy ⟨H⟩ of the N-body separable state that places the first local
/// state of each pair component on colour-0 sites and the second on colour-1
/// sites: Σ_k p_k ⟨⊗_n χ_{k,n}| H |⊗_n χ_{k,n}⟩, evaluated with the full
/// dense Hamiltonian.
pub fn saturating_chain_state(ensemble: &ProductEnsemble, spec: &ModelSpec, coloring: Option<&[u8]>) -> Result<f64> {
    let coloring = coloring.ok_or_else(|| Error::Precondition("the interaction graph has no two-colouring".into()))?;
    if ensemble.parties() != 2 {
        return Err(Error::Validation("need a two-party ensemble".into()));
    }
    if coloring.len() != spec.n {
        return dim_err(format!("colouring covers {} sites, model has {}", coloring.len(), spec.n));
    }
    if ensemble.local_dims() != [spec.d, spec.d] {
        return dim_err("ensemble local dims differ from the model");
    }
    for &(a, b) in &spec.edges {
        if coloring[a - 1] == coloring[b - 1] {
            return Err(Error::Precondition(format!("edge ({a}, {b}) joins sites of the same colour")));
        }
    }
    let h = build_hamiltonian(spec)?;
    let mut acc = 0.0;
    for (w, pair) in ensemble.weights().iter().zip(ensemble.locals()) {
        let sites: Vec<CVector> = coloring.iter().map(|&c| pair[c as usize].clone()).collect();
        let v = ProductEnsemble::product_vector(&sites);
        acc += w * v.dotc(&(h.matrix() * &v)).re;
    }
    Ok(acc)
}

/// Energy of Σ_k p_k |ψ_k⟩⟨ψ_k|^{⊗N} under Σ_{n<n'} H_AB^{(n,n')}. Uses the
/// full N-body operator while d^N fits the dense limit and the pairwise sum
/// N(N−1)/2 Σ_k p_k ⟨ψ_kψ_k|H_AB|ψ_kψ_k⟩ beyond it.
pub fn symmetric_extension_value(pure_locals: &[(f64, CVector)], n: usize, hab: &Observable) -> Result<f64> {
    if n < 2 {
        return Err(Error::Validation(format!("need n >= 2, got {n}")));
    }
    let weights: Vec<f64> = pure_locals.iter().map(|(w, _)| *w).collect();
    let locals: Vec<Vec<CVector>> = pure_locals.iter().map(|(_, v)| vec![v.clone()]).collect();
    let ens = ProductEnsemble::new(weights, locals)?;
    let d = ens.local_dims()[0];
    if hab.dim() != d * d {
        return dim_err(format!("two-body operator of dim {} for local dim {d}", hab.dim()));
    }
    let full_dim = d.checked_pow(n as u32).filter(|&x| x <= MAX_DENSE_DIM);
    match full_dim {
        Some(dim) => {
            let dims = vec![d; n];
            let mut h = CMatrix::zeros(dim, dim);
            for a in 0..n {
                for b in (a + 1)..n {
                    accumulate_two_body(&mut h, c64(1.0, 0.0), hab.matrix(), a, b, &dims)?;
                }
            }
            let h = Observable::from_hermitian(h);
            let mut acc = 0.0;
            for (w, tuple) in ens.weights().iter().zip(ens.locals()) {
                let v = ProductEnsemble::product_vector(&vec![tuple[0].clone(); n]);
                acc += w * v.dotc(&(h.matrix() * &v)).re;
            }
            Ok(acc)
        }
        None => {
            let pairs = (n * (n - 1) / 2) as f64;
            Ok(pairs * ens.doubled()?.expectation(hab)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{chain_edges, ferro_qubit_model, ising_ring, lattice_edges, two_body_hamiltonian};
    use crate::qcore::{spin_half, tensor};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket(a: f64, b: f64) -> CVector {
        CVector::from_vec(vec![c64(a, 0.0), c64(b, 0.0)])
    }

    #[test]
    fn validation() {
        assert!(ProductEnsemble::new(vec![0.5, 0.4], vec![vec![ket(1.0, 0.0)], vec![ket(0.0, 1.0)]]).is_err());
        assert!(ProductEnsemble::new(vec![1.0], vec![vec![ket(1.0, 1.0)]]).is_err());
        assert!(ProductEnsemble::new(vec![0.5, 0.5], vec![vec![ket(1.0, 0.0)], vec![ket(0.0, 1.0), ket(1.0, 0.0)]]).is_err());
        let e = ProductEnsemble::new(vec![0.5, 0.5], vec![vec![ket(1.0, 0.0)], vec![ket(0.0, 1.0)]]).unwrap();
        let rho = e.assemble();
        assert!((rho.matrix() - DensityMatrix::maximally_mixed(2).matrix()).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let comps: Vec<Vec<CVector>> =
            (0..3).map(|_| vec![sampling::random_pure_state(2, &mut rng), sampling::random_pure_state(3, &mut rng)]).collect();
        let e = ProductEnsemble::from_unnormalized(comps).unwrap();
        let back = ProductEnsemble::from_json_str(&e.to_json_string().unwrap()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn chain_state_examples() {
        let ring = ising_ring(4, 1.0, [0.0; 3]).unwrap();
        let col = chain_edges(4, true).unwrap().coloring;
        let up = ket(1.0, 0.0);
        let aligned = ProductEnsemble::new(vec![1.0], vec![vec![up.clone(), up.clone()]]).unwrap();
        let e = saturating_chain_state(&aligned, &ring, col.as_deref()).unwrap();
        assert!((e + 1.0).abs() < 1e-12);

        let odd = ising_ring(5, 1.0, [0.0; 3]).unwrap();
        let col = chain_edges(5, true).unwrap().coloring;
        assert!(matches!(saturating_chain_state(&aligned, &odd, col.as_deref()), Err(Error::Precondition(_))));
    }

    #[test]
    fn chain_state_matches_bond_sum_for_random_ensembles() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let jz = spin_half()[2].clone();
        let lat = lattice_edges(&[2, 4], true).unwrap();
        let spec = ferro_qubit_model(8, 0.8, jz, [0.3, 0.1, -0.2], lat.edges.clone()).unwrap();
        let comps: Vec<Vec<CVector>> = (0..4).map(|_| vec![sampling::random_pure_state(2, &mut rng), sampling::random_pure_state(2, &mut rng)]).collect();
        let ens = ProductEnsemble::from_unnormalized(comps).unwrap();
        // with different marginals on the two sublattices the field term is
        // only reproduced on regular graphs; the 2×4 torus is 3-regular
        let hab = two_body_hamiltonian(&spec).unwrap();
        let pair_state = ens.assemble();
        let expected = spec.np() as f64 * pair_state.expectation(&hab).unwrap();
        let e = saturating_chain_state(&ens, &spec, lat.coloring.as_deref()).unwrap();
        assert!((e - expected).abs() < 1e-12, "{e} vs {expected}");
    }

    #[test]
    fn symmetric_extension_examples() {
        let jz = spin_half()[2].clone();
        let hab = Observable::new(-tensor(jz.matrix(), jz.matrix())).unwrap();
        let up = ket(1.0, 0.0);
        let v = symmetric_extension_value(&[(1.0, up.clone())], 4, &hab).unwrap();
        assert!((v + 1.5).abs() < 1e-12);
        let v = symmetric_extension_value(&[(0.5, up), (0.5, ket(0.0, 1.0))], 4, &hab).unwrap();
        assert!((v + 1.5).abs() < 1e-12);
        // beyond the dense limit the pairwise route is used
        let v = symmetric_extension_value(&[(1.0, ket(1.0, 0.0))], 20, &hab).unwrap();
        assert!((v + 190.0 * 0.25).abs() < 1e-12);
    }
}
