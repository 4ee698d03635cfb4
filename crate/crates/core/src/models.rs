//! Spin Hamiltonians on interaction graphs: the full N-body operator, the
//! two-body piece whose sum over bonds reproduces it, lattices, complete
//! graphs, and the collective (maximal-spin) representation of fully
//! connected qubit models.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::qcore::{
    accumulate_local, c64, operator_library, tensor, CMatrix, CVector, DensityMatrix, MatrixJson, Observable, OperatorKind, MAX_DENSE_DIM,
};

/// One coupling channel J_l h_l ⊗ h_l.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coupling: f64,
    pub op: Observable,
}

/// H = Σ_{edges} Σ_l J_l h_l⊗h_l − Σ_l B_l Σ_n g_l^{(n)} on N particles of
/// local dimension d. Edges are 1-based site pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub n: usize,
    pub d: usize,
    pub terms: Vec<Term>,
    pub field: Vec<f64>,
    pub generators: Vec<Observable>,
    pub edges: Vec<(usize, usize)>,
}

/// Pauli matrices for qubits, Gell-Mann matrices otherwise.
pub fn default_generators(d: usize) -> Result<Vec<Observable>> {
    if d == 2 {
        operator_library(OperatorKind::Pauli)
    } else {
        operator_library(OperatorKind::GellMann { d })
    }
}

impl ModelSpec {
    pub fn new(
        n: usize,
        d: usize,
        terms: Vec<Term>,
        field: Vec<f64>,
        generators: Vec<Observable>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let spec = Self { n, d, terms, field, generators, edges };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d < 2 {
            return Err(Error::Validation(format!("need n >= 1 and d >= 2, got n={} d={}", self.n, self.d)));
        }
        if self.terms.iter().any(|t| t.op.dim() != self.d) || self.generators.iter().any(|g| g.dim() != self.d) {
            return dim_err(format!("all coupling operators and generators must have dim {}", self.d));
        }
        if self.field.len() != self.generators.len() {
            return dim_err(format!("field has {} components for {} generators", self.field.len(), self.generators.len()));
        }
        if !self.field.iter().chain(self.terms.iter().map(|t| &t.coupling)).all(|x| x.is_finite()) {
            return Err(Error::Validation("non-finite coupling or field".into()));
        }
        for &(a, b) in &self.edges {
            if a == 0 || b == 0 || a > self.n || b > self.n {
                return Err(Error::Validation(format!("edge ({a}, {b}) outside 1..={}", self.n)));
            }
            if a == b {
                return Err(Error::Validation(format!("self-loop at site {a}")));
            }
        }
        Ok(())
    }

    /// Number of interacting pairs.
    pub fn np(&self) -> usize {
        self.edges.len()
    }

    pub fn hilbert_dim(&self) -> Option<usize> {
        self.d.checked_pow(self.n as u32)
    }

    /// ⟨g⟩ vector dotted with the field: B·⟨g⟩_ϱ.
    pub fn field_energy(&self, rho: &DensityMatrix) -> Result<f64> {
        let mut acc = 0.0;
        for (b, g) in self.field.iter().zip(&self.generators) {
            acc += b * rho.expectation(g)?;
        }
        Ok(acc)
    }

    /// Σ_l B_l g_l as a single-site operator.
    pub fn local_field_operator(&self) -> Observable {
        let mut m = CMatrix::zeros(self.d, self.d);
        for (b, g) in self.field.iter().zip(&self.generators) {
            m += g.matrix() * c64(*b, 0.0);
        }
        Observable::from_hermitian(m)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ModelSpecJson = serde_json::from_str(s)?;
        raw.try_into()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelSpecJson::from(self))?)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    j: f64,
    h: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct ModelSpecJson {
    n: usize,
    d: usize,
    terms: Vec<TermJson>,
    b: Vec<f64>,
    edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<MatrixJson>>,
}

impl From<&ModelSpec> for ModelSpecJson {
    fn from(s: &ModelSpec) -> Self {
        Self {
            n: s.n,
            d: s.d,
            terms: s.terms.iter().map(|t| TermJson { j: t.coupling, h: MatrixJson::from(t.op.matrix()) }).collect(),
            b: s.field.clone(),
            edges: s.edges.clone(),
            generators: Some(s.generators.iter().map(|g| MatrixJson::from(g.matrix())).collect()),
        }
    }
}

impl TryFrom<ModelSpecJson> for ModelSpec {
    type Error = Error;
    fn try_from(raw: ModelSpecJson) -> Result<Self> {
        let terms = raw
            .terms
            .iter()
            .map(|t| Ok(Term { coupling: t.j, op: Observable::new(t.h.to_matrix()?)? }))
            .collect::<Result<Vec<_>>>()?;
        let generators = match raw.generators {
            Some(gs) => gs.iter().map(|g| Observable::new(g.to_matrix()?)).collect::<Result<Vec<_>>>()?,
            None => default_generators(raw.d)?,
        };
        ModelSpec::new(raw.n, raw.d, terms, raw.b, generators, raw.edges)
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelSpecJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        ModelSpecJson::deserialize(d)?.try_into().map_err(serde::de::Error::custom)
    }
}

/// Full N-body Hamiltonian as a dense matrix.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<Observable> {
    spec.validate()?;
    let dim = spec.hilbert_dim().filter(|&x| x <= MAX_DENSE_DIM).ok_or_else(|| {
        Error::Dimension(format!("d^N = {}^{} exceeds the dense limit {MAX_DENSE_DIM}", spec.d, spec.n))
    })?;
    let dims = vec![spec.d; spec.n];
    let mut h = CMatrix::zeros(dim, dim);
    for &(a, b) in &spec.edges {
        for t in &spec.terms {
            accumulate_local(&mut h, c64(t.coupling, 0.0), &[(a - 1, t.op.matrix()), (b - 1, t.op.matrix())], &dims)?;
        }
    }
    let local = spec.local_field_operator();
    if local.matrix().iter().any(|z| z.norm() > 0.0) {
        for site in 0..spec.n {
            accumulate_local(&mut h, c64(-1.0, 0.0), &[(site, local.matrix())], &dims)?;
        }
    }
    Ok(Observable::from_hermitian(h))
}

/// H_AB = Σ_l J_l h_l⊗h_l − (N / 2N_p) Σ_l B_l (g_l⊗I + I⊗g_l).
pub fn two_body_hamiltonian(spec: &ModelSpec) -> Result<Observable> {
    spec.validate()?;
    if spec.np() == 0 {
        return Err(Error::Validation("model has no interacting pairs".into()));
    }
    let d = spec.d;
    let id = CMatrix::identity(d, d);
    let mut h = CMatrix::zeros(d * d, d * d);
    for t in &spec.terms {
        h += tensor(t.op.matrix(), t.op.matrix()) * c64(t.coupling, 0.0);
    }
    let local = spec.local_field_operator();
    let prefactor = spec.n as f64 / (2.0 * spec.np() as f64);
    h -= (tensor(local.matrix(), &id) + tensor(&id, local.matrix())) * c64(prefactor, 0.0);
    Ok(Observable::from_hermitian(h))
}

/// Nearest-neighbour lattice: edge list and, if the graph is bipartite, a
/// two-colouring (0/1 per site, index 0 is site 1).
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub coloring: Option<Vec<u8>>,
}

/// Hypercubic lattice with the given side lengths. Sites are numbered
/// row-major starting at 1. Periodic wrap-around bonds that coincide with an
/// existing bond (side length 2) are collapsed.
pub fn lattice_edges(sides: &[usize], periodic: bool) -> Result<Lattice> {
    if sides.is_empty() || sides.contains(&0) {
        return Err(Error::Validation(format!("invalid lattice sides {sides:?}")));
    }
    let n: usize = sides.iter().product();
    let mut strides = vec![1usize; sides.len()];
    for k in (0..sides.len() - 1).rev() {
        strides[k] = strides[k + 1] * sides[k + 1];
    }
    let mut set = BTreeSet::new();
    for site in 0..n {
        for (k, &side) in sides.iter().enumerate() {
            let coord = (site / strides[k]) % side;
            let next = if coord + 1 < side {
                coord + 1
            } else if periodic {
                0
            } else {
                continue;
            };
            if next == coord {
                continue;
            }
            let other = site - coord * strides[k] + next * strides[k];
            set.insert((site.min(other) + 1, site.max(other) + 1));
        }
    }
    let edges: Vec<(usize, usize)> = set.into_iter().collect();
    let coloring = two_coloring(n, &edges);
    Ok(Lattice { n, edges, coloring })
}

/// Open or periodic chain of `n` sites.
pub fn chain_edges(n: usize, periodic: bool) -> Result<Lattice> {
    lattice_edges(&[n], periodic)
}

/// BFS two-colouring of a graph with 1-based edges; `None` if not bipartite.
pub fn two_coloring(n: usize, edges: &[(usize, usize)]) -> Option<Vec<u8>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a - 1].push(b - 1);
        adj[b - 1].push(a - 1);
    }
    let mut color: Vec<Option<u8>> = vec![None; n];
    for start in 0..n {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let cv = color[v].unwrap();
            for &w in &adj[v] {
                match color[w] {
                    None => {
                        color[w] = Some(1 - cv);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cv => return None,
                    _ => {}
                }
            }
        }
    }
    Some(color.into_iter().map(|c| c.unwrap()).collect())
}

/// All unordered pairs of `n` sites.
pub fn complete_graph_edges(n: usize) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(Error::Validation(format!("complete graph needs n >= 2, got {n}")));
    }
    Ok((1..=n).flat_map(|a| ((a + 1)..=n).map(move |b| (a, b))).collect())
}

/// Ferromagnetic qubit model with coupling −J h⊗h on the given edges and
/// field B coupled to the Pauli matrices.
pub fn ferro_qubit_model(n: usize, j: f64, h: Observable, field: [f64; 3], edges: Vec<(usize, usize)>) -> Result<ModelSpec> {
    ModelSpec::new(n, 2, vec![Term { coupling: -j, op: h }], field.to_vec(), default_generators(2)?, edges)
}

/// Periodic ferromagnetic Ising ring with h = j_z = σ_z/2.
pub fn ising_ring(n: usize, j: f64, field: [f64; 3]) -> Result<ModelSpec> {
    let jz = crate::qcore::spin_half()[2].clone();
    ferro_qubit_model(n, j, jz, field, chain_edges(n, true)?.edges)
}

/// Ferromagnetic Heisenberg coupling −J Σ_l j_l^{(a)} j_l^{(b)} between every
/// site of group A (sites 1..=n1) and group B (the next n2 sites), with
/// separate fields −B_A·Σ_{a∈A} σ⃗ − B_B·Σ_{b∈B} σ⃗.
pub fn bipartite_heisenberg(n1: usize, n2: usize, j: f64, field_a: [f64; 3], field_b: [f64; 3]) -> Result<Observable> {
    if n1 < 1 || n2 < 1 {
        return Err(Error::Validation(format!("group sizes must be >= 1, got {n1} and {n2}")));
    }
    let n = n1 + n2;
    let dim = 1usize << n;
    if dim > MAX_DENSE_DIM {
        return dim_err(format!("2^{n} exceeds the dense limit"));
    }
    let dims = vec![2; n];
    let spins = crate::qcore::spin_half();
    let paulis = crate::qcore::pauli();
    let mut h = CMatrix::zeros(dim, dim);
    for a in 0..n1 {
        for b in n1..n {
            for s in &spins {
                accumulate_local(&mut h, c64(-j, 0.0), &[(a, s.matrix()), (b, s.matrix())], &dims)?;
            }
        }
    }
    for site in 0..n {
        let f = if site < n1 { field_a } else { field_b };
        for (bl, p) in f.iter().zip(&paulis) {
            if *bl != 0.0 {
                accumulate_local(&mut h, c64(-bl, 0.0), &[(site, p.matrix())], &dims)?;
            }
        }
    }
    Ok(Observable::from_hermitian(h))
}

/// Collective spin operators and Hamiltonian of a fully connected qubit
/// model in the (N+1)-dimensional maximal-spin block, basis m = N/2, …, −N/2.
#[derive(Clone, Debug)]
pub struct CollectiveModel {
    pub n: usize,
    pub jx: Observable,
    pub jy: Observable,
    pub jz: Observable,
    pub h: Observable,
}

/// H = −J Σ_{n<n'} j_z^{(n)} j_z^{(n')} − B·Σ_n σ⃗^{(n)}
///   = −J (J_z² − N/4)/2 − 2 B·J⃗.
pub fn build_collective(n: usize, j: f64, field: [f64; 3]) -> Result<CollectiveModel> {
    if n < 2 {
        return Err(Error::Validation(format!("collective model needs n >= 2, got {n}")));
    }
    let ops = operator_library(OperatorKind::SpinJ { j: n as f64 / 2.0 })?;
    let dim = n + 1;
    let jz2 = ops[2].matrix() * ops[2].matrix();
    let mut h = (jz2 - CMatrix::identity(dim, dim) * c64(n as f64 / 4.0, 0.0)) * c64(-j / 2.0, 0.0);
    for (b, op) in field.iter().zip(&ops) {
        h -= op.matrix() * c64(2.0 * b, 0.0);
    }
    let [jx, jy, jz]: [Observable; 3] = ops.try_into().expect("three components");
    Ok(CollectiveModel { n, jx, jy, jz, h: Observable::from_hermitian(h) })
}

impl CollectiveModel {
    pub fn components(&self) -> [&Observable; 3] {
        [&self.jx, &self.jy, &self.jz]
    }
}

/// Single- and two-particle marginals of a permutation-symmetric N-qubit
/// pure state given in the collective basis.
pub fn reduced_from_collective(state: &CVector, n: usize) -> Result<(DensityMatrix, DensityMatrix)> {
    if n < 2 {
        return Err(Error::Validation(format!("need n >= 2, got {n}")));
    }
    if state.len() != n + 1 {
        return dim_err(format!("collective state has length {} for n = {n}", state.len()));
    }
    if (state.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::NotAState(format!("state norm {} is not 1", state.norm())));
    }
    let ops = operator_library(OperatorKind::SpinJ { j: n as f64 / 2.0 })?;
    let applied: Vec<CVector> = ops.iter().map(|o| o.matrix() * state).collect();
    let nf = n as f64;
    let mut s = [0.0; 3];
    for l in 0..3 {
        s[l] = 2.0 * state.dotc(&applied[l]).re / nf;
    }
    // ⟨σ_l⊗σ_m⟩ = (2⟨{J_l, J_m}⟩ − N δ_lm) / (N(N−1)), using
    // ⟨J_l J_m + J_m J_l⟩ = 2 Re⟨J_l ψ | J_m ψ⟩.
    let mut t = [[0.0; 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            let anti = 2.0 * applied[l].dotc(&applied[m]).re;
            let delta = if l == m { nf } else { 0.0 };
            t[l][m] = (2.0 * anti - delta) / (nf * (nf - 1.0));
        }
    }
    let rho1 = DensityMatrix::from_bloch(clamp_ball(s))?;
    let paulis = crate::qcore::pauli();
    let id = CMatrix::identity(2, 2);
    let mut m = CMatrix::identity(4, 4);
    for l in 0..3 {
        m += (tensor(paulis[l].matrix(), &id) + tensor(&id, paulis[l].matrix())) * c64(s[l], 0.0);
        for k in 0..3 {
            m += tensor(paulis[l].matrix(), paulis[k].matrix()) * c64(t[l][k], 0.0);
        }
    }
    let rho_ab = DensityMatrix::from_matrix_unchecked(m * c64(0.25, 0.0));
    Ok((rho1, rho_ab))
}

fn clamp_ball(r: [f64; 3]) -> [f64; 3] {
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if len > 1.0 {
        [r[0] / len, r[1] / len, r[2] / len]
    } else {
        r
    }
}

/// Isometry from the collective basis into the full 2^N space: column k is
/// the normalized symmetric state with k qubits in |1⟩ (m = N/2 − k).
pub fn dicke_embedding(n: usize) -> Result<CMatrix> {
    let dim = 1usize.checked_shl(n as u32).filter(|&x| x <= MAX_DENSE_DIM).ok_or_else(|| Error::Dimension(format!("2^{n} exceeds the dense limit")))?;
    let mut e = CMatrix::zeros(dim, n + 1);
    let mut counts = vec![0usize; n + 1];
    for idx in 0..dim {
        counts[idx.count_ones() as usize] += 1;
    }
    for idx in 0..dim {
        let k = idx.count_ones() as usize;
        e[(idx, k)] = c64(1.0 / (counts[k] as f64).sqrt(), 0.0);
    }
    Ok(e)
}
