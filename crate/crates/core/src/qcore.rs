//! Dense complex linear algebra and the quantum primitives everything else
//! builds on: states, observables, Hermitian eigendecompositions, partial
//! traces and the standard operator sets.
//!
//! Party ordering convention: party 0 is the slowest-varying index of a
//! tensor product, so `tensor(a, b)` places `a` on the first party.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Maximum entrywise deviation of `M - M†` accepted for Hermitian inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Allowed deviation of a state's trace from one.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros before square roots.
pub const EIG_CLIP: f64 = 1e-12;
/// Eigenvalues below minus this make a matrix square root fail.
pub const SQRT_REJECT: f64 = 1e-8;
/// Largest Hilbert-space dimension handled by the dense routines.
pub const MAX_DENSE_DIM: usize = 4096;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entrywise deviation `max |M_ij - conj(M_ji)|`.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return dim_err(format!("expected a non-empty square matrix, got {}x{}", m.nrows(), m.ncols()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Validation("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// Re Tr(A B) without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// A Hermitian operator on a finite-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    matrix: CMatrix,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square_finite(&matrix)?;
        let err = hermiticity_error(&matrix);
        if err > HERMITIAN_TOL {
            return Err(Error::Validation(format!("operator is not Hermitian (deviation {err:.3e})")));
        }
        Ok(Self { matrix: hermitize(&matrix) })
    }

    /// Wraps a matrix the caller knows to be Hermitian by construction.
    pub(crate) fn from_hermitian(matrix: CMatrix) -> Self {
        debug_assert!(hermiticity_error(&matrix) <= 1e-8);
        Self { matrix }
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return dim_err("rows must form a square matrix");
        }
        Self::new(CMatrix::from_fn(n, n, |i, j| c64(rows[i][j], 0.0)))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self { matrix: CMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { C64::default() }) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { matrix: CMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { matrix: &self.matrix * c64(factor, 0.0) }
    }

    pub fn squared(&self) -> Self {
        Self::from_hermitian(hermitize(&(&self.matrix * &self.matrix)))
    }

    pub fn kron(&self, other: &Observable) -> Observable {
        Self { matrix: tensor(&self.matrix, &other.matrix) }
    }

    /// ⟨h⟩ = Tr(ϱ h).
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        rho.expectation(self)
    }

    pub fn expectation_pure(&self, psi: &CVector) -> Result<f64> {
        if psi.len() != self.dim() {
            return dim_err(format!("vector of length {} for operator of dim {}", psi.len(), self.dim()));
        }
        Ok(psi.dotc(&(&self.matrix * psi)).re)
    }

    pub fn lambda_max(&self) -> f64 {
        *eigh_unchecked(&self.matrix).eigenvalues.last().unwrap()
    }

    pub fn lambda_min(&self) -> f64 {
        eigh_unchecked(&self.matrix).eigenvalues[0]
    }
}

impl Add for &Observable {
    type Output = Observable;
    fn add(self, rhs: &Observable) -> Observable {
        Observable { matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &Observable {
    type Output = Observable;
    fn sub(self, rhs: &Observable) -> Observable {
        Observable { matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul<f64> for &Observable {
    type Output = Observable;
    fn mul(self, rhs: f64) -> Observable {
        self.scaled(rhs)
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        check_square_finite(&matrix)?;
        let herm = hermiticity_error(&matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotAState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::NotAState(format!("trace is {tr}, expected 1")));
        }
        let matrix = hermitize(&matrix);
        let min_eig = eigh_unchecked(&matrix).eigenvalues[0];
        if min_eig < -PSD_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is a state by construction (partial traces,
    /// projectors, convex mixtures of valid states).
    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix: hermitize(&matrix) }
    }

    /// |ψ⟩⟨ψ| for the normalized version of `psi`.
    pub fn from_pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::NotAState("zero or non-finite state vector".into()));
        }
        let v = psi.unscale(norm);
        Ok(Self { matrix: &v * v.adjoint() })
    }

    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        Self::from_pure(&CVector::from_column_slice(amplitudes))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim, dim) * c64(1.0 / dim as f64, 0.0) }
    }

    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return dim_err(format!("basis index {index} out of range for dim {dim}"));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = c64(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    /// Qubit state (I + r·σ)/2.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + 1e-10 {
            return Err(Error::NotAState(format!("Bloch vector length {len} exceeds 1")));
        }
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c64(0.5 * (1.0 + r[2]), 0.0), c64(0.5 * r[0], -0.5 * r[1]), c64(0.5 * r[0], 0.5 * r[1]), c64(0.5 * (1.0 - r[2]), 0.0)],
        );
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn expectation(&self, h: &Observable) -> Result<f64> {
        if h.dim() != self.dim() {
            return dim_err(format!("state of dim {} with operator of dim {}", self.dim(), h.dim()));
        }
        Ok(trace_product_re(&self.matrix, h.matrix()))
    }

    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("Bloch vector requires a qubit state".into()));
        }
        let m = &self.matrix;
        Ok([2.0 * m[(1, 0)].re, 2.0 * m[(1, 0)].im, (m[(0, 0)] - m[(1, 1)]).re])
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self { matrix: tensor(&self.matrix, &other.matrix) }
    }

    pub fn purity(&self) -> f64 {
        trace_product_re(&self.matrix, &self.matrix)
    }

    pub fn eigen(&self) -> EigenDecomposition {
        eigh_unchecked(&self.matrix)
    }

    /// Convex combination Σ w_i ϱ_i; weights are renormalized.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Validation("empty mixture".into()));
        };
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || !(total > 0.0) {
            return Err(Error::Validation("mixture weights must be non-negative with positive sum".into()));
        }
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.dim() != first.dim() {
                return dim_err("mixture components differ in dimension");
            }
            m += rho.matrix() * c64(*w / total, 0.0);
        }
        Ok(Self { matrix: m })
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*lambda);
        }
        scaled * v.adjoint()
    }

    /// Applies `f` to the spectrum: V f(Λ) V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).scale_mut(f(*lambda));
        }
        scaled * v.adjoint()
    }
}

/// Hermitian eigendecomposition of an already-validated matrix. Real
/// symmetric inputs take the (much faster) real path.
pub(crate) fn eigh_unchecked(m: &CMatrix) -> EigenDecomposition {
    let n = m.nrows();
    let h = hermitize(m);
    let (values, vectors): (Vec<f64>, CMatrix) = if h.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::<f64>::from_fn(n, n, |i, j| h[(i, j)].re);
        let eig = SymmetricEigen::new(real);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| c64(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(h);
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// Eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(m: &Observable) -> EigenDecomposition {
    eigh_unchecked(m.matrix())
}

/// Eigendecomposition of a raw matrix, validating Hermiticity first.
pub fn eigh(m: &CMatrix) -> Result<EigenDecomposition> {
    check_square_finite(m)?;
    let err = hermiticity_error(m);
    if err > HERMITIAN_TOL {
        return Err(Error::Validation(format!("matrix is not Hermitian (deviation {err:.3e})")));
    }
    Ok(eigh_unchecked(m))
}

/// Kronecker product; `a` indexes the slower party.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

pub fn tensor_all(factors: &[&CMatrix]) -> CMatrix {
    let mut acc = CMatrix::identity(1, 1);
    for f in factors {
        acc = acc.kronecker(*f);
    }
    acc
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        s[p] = s[p + 1] * dims[p + 1];
    }
    s
}

/// Offsets (in the full index) of every multi-index over `parties`.
fn offsets(dims: &[usize], strides: &[usize], parties: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in parties {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for base in &out {
            for digit in 0..dims[p] {
                next.push(base + digit * strides[p]);
            }
        }
        out = next;
    }
    out
}

/// Partial trace of an arbitrary operator over all parties not in `keep`.
/// Parties are 0-based; kept parties appear in increasing order.
pub fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != m.nrows() || m.nrows() != m.ncols() {
        return dim_err(format!("party dims {dims:?} do not match a {}x{} matrix", m.nrows(), m.ncols()));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&p| p >= dims.len()) {
        return dim_err(format!("kept party out of range in {keep:?}"));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
    let st = strides(dims);
    let keep_off = offsets(dims, &st, &kept);
    let trace_off = offsets(dims, &st, &traced);
    let dk = keep_off.len();
    let mut out = CMatrix::zeros(dk, dk);
    for (r, &kr) in keep_off.iter().enumerate() {
        for (c, &kc) in keep_off.iter().enumerate() {
            let mut acc = C64::default();
            for &t in &trace_off {
                acc += m[(kr + t, kc + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reduced state on the `keep` parties.
pub fn partial_trace(rho: &DensityMatrix, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_matrix_unchecked(partial_trace_matrix(rho.matrix(), dims, keep)?))
}

/// Adds `coeff · (⊗ ops)` to `target`, with identities on parties absent
/// from `ops`. Runs in O(dim · Π local dims) without forming Kronecker
/// products.
pub fn accumulate_local(target: &mut CMatrix, coeff: C64, ops: &[(usize, &CMatrix)], dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if target.nrows() != total || target.ncols() != total {
        return dim_err("target matrix does not match party dims");
    }
    for (i, (p, op)) in ops.iter().enumerate() {
        if *p >= dims.len() || op.nrows() != dims[*p] || op.ncols() != dims[*p] {
            return dim_err(format!("local operator on party {p} has wrong shape"));
        }
        if ops[..i].iter().any(|(q, _)| q == p) {
            return dim_err(format!("party {p} appears twice"));
        }
    }
    let st = strides(dims);
    let combos: usize = ops.iter().map(|(p, _)| dims[*p]).product();
    let mut col_digits = vec![0usize; ops.len()];
    for r in 0..total {
        let row_digits: Vec<usize> = ops.iter().map(|(p, _)| (r / st[*p]) % dims[*p]).collect();
        for combo in 0..combos {
            let mut rem = combo;
            for (i, (p, _)) in ops.iter().enumerate().rev() {
                col_digits[i] = rem % dims[*p];
                rem /= dims[*p];
            }
            let mut amp = coeff;
            for (i, (_, op)) in ops.iter().enumerate() {
                amp *= op[(row_digits[i], col_digits[i])];
                if amp.re == 0.0 && amp.im == 0.0 {
                    break;
                }
            }
            if amp.re == 0.0 && amp.im == 0.0 {
                continue;
            }
            let mut c = r;
            for (i, (p, _)) in ops.iter().enumerate() {
                c = c + col_digits[i] * st[*p] - row_digits[i] * st[*p];
            }
            target[(r, c)] += amp;
        }
    }
    Ok(())
}

/// Adds `coeff · op` to `target`, where `op` acts on the ordered party pair
/// (a, b) (first tensor factor on a) and as identity elsewhere.
pub fn accumulate_two_body(target: &mut CMatrix, coeff: C64, op: &CMatrix, a: usize, b: usize, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if target.nrows() != total || target.ncols() != total {
        return dim_err("target matrix does not match party dims");
    }
    if a >= dims.len() || b >= dims.len() || a == b {
        return dim_err(format!("invalid party pair ({a}, {b})"));
    }
    let (da, db) = (dims[a], dims[b]);
    if op.nrows() != da * db || op.ncols() != da * db {
        return dim_err("two-body operator has wrong shape");
    }
    let st = strides(dims);
    for r in 0..total {
        let ra = (r / st[a]) % da;
        let rb = (r / st[b]) % db;
        let base = r - ra * st[a] - rb * st[b];
        for ca in 0..da {
            for cb in 0..db {
                let v = op[(ra * db + rb, ca * db + cb)];
                if v.re != 0.0 || v.im != 0.0 {
                    target[(r, base + ca * st[a] + cb * st[b])] += coeff * v;
                }
            }
        }
    }
    Ok(())
}

/// The operator ⊗ ops with identities elsewhere.
pub fn embed_local(ops: &[(usize, &CMatrix)], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    let mut m = CMatrix::zeros(total, total);
    accumulate_local(&mut m, c64(1.0, 0.0), ops, dims)?;
    Ok(m)
}

/// Which standard operator set to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    /// σ_x, σ_y, σ_z.
    Pauli,
    /// Angular momentum components j_x, j_y, j_z for spin `j` (basis m = j, j-1, …, -j).
    SpinJ { j: f64 },
    /// The d²-1 generalized Gell-Mann matrices with Tr(g_a g_b) = 2δ_ab.
    GellMann { d: usize },
}

pub fn operator_library(kind: OperatorKind) -> Result<Vec<Observable>> {
    match kind {
        OperatorKind::Pauli => gell_mann(2),
        OperatorKind::SpinJ { j } => spin_matrices(j),
        OperatorKind::GellMann { d } => gell_mann(d),
    }
}

pub fn pauli() -> [Observable; 3] {
    let v = gell_mann(2).expect("d = 2 is valid");
    [v[0].clone(), v[1].clone(), v[2].clone()]
}

/// Spin-1/2 components j_l = σ_l/2.
pub fn spin_half() -> [Observable; 3] {
    let [x, y, z] = pauli();
    [x.scaled(0.5), y.scaled(0.5), z.scaled(0.5)]
}

fn spin_matrices(j: f64) -> Result<Vec<Observable>> {
    let two_j = (2.0 * j).round();
    if !j.is_finite() || j < 0.0 || (2.0 * j - two_j).abs() > 1e-12 {
        return Err(Error::Validation(format!("spin {j} is not a non-negative half-integer")));
    }
    let d = two_j as usize + 1;
    let m = |k: usize| j - k as f64;
    // J+ |m⟩ = sqrt(j(j+1) - m(m+1)) |m+1⟩; basis index k has m = j - k.
    let mut jp = CMatrix::zeros(d, d);
    for k in 1..d {
        let mk = m(k);
        jp[(k - 1, k)] = c64((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c64(0.5, 0.0);
    let jy = (&jp - &jm) * c64(0.0, -0.5);
    let jz = CMatrix::from_fn(d, d, |a, b| if a == b { c64(m(a), 0.0) } else { C64::default() });
    Ok(vec![Observable::from_hermitian(jx), Observable::from_hermitian(jy), Observable::from_hermitian(jz)])
}

fn gell_mann(d: usize) -> Result<Vec<Observable>> {
    if d < 2 {
        return Err(Error::Validation(format!("Gell-Mann matrices need d >= 2, got {d}")));
    }
    let mut out = Vec::with_capacity(d * d - 1);
    for a in 0..d {
        for b in (a + 1)..d {
            let mut s = CMatrix::zeros(d, d);
            s[(a, b)] = c64(1.0, 0.0);
            s[(b, a)] = c64(1.0, 0.0);
            out.push(Observable::from_hermitian(s));
            let mut t = CMatrix::zeros(d, d);
            t[(a, b)] = c64(0.0, -1.0);
            t[(b, a)] = c64(0.0, 1.0);
            out.push(Observable::from_hermitian(t));
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut g = CMatrix::zeros(d, d);
        for k in 0..l {
            g[(k, k)] = c64(norm, 0.0);
        }
        g[(l, l)] = c64(-(l as f64) * norm, 0.0);
        out.push(Observable::from_hermitian(g));
    }
    if d == 2 {
        // order as σ_x, σ_y, σ_z
        debug_assert_eq!(out.len(), 3);
    }
    Ok(out)
}

/// SWAP on two d-dimensional parties: F|a⟩|b⟩ = |b⟩|a⟩.
pub fn flip_operator(d: usize) -> Result<Observable> {
    if d < 2 {
        return Err(Error::Validation(format!("flip operator needs d >= 2, got {d}")));
    }
    let mut f = CMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            f[(b * d + a, a * d + b)] = c64(1.0, 0.0);
        }
    }
    Ok(Observable::from_hermitian(f))
}

/// Square root of a PSD matrix given as raw Hermitian data.
pub(crate) fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = eigh_unchecked(m);
    if eig.eigenvalues[0] < -SQRT_REJECT {
        return Err(Error::NotAState(format!("negative eigenvalue {:.3e}", eig.eigenvalues[0])));
    }
    Ok(eig.map_spectrum(|l| if l < EIG_CLIP { 0.0 } else { l.sqrt() }))
}

/// √ϱ, clipping eigenvalues below 1e-12 to zero.
pub fn matrix_sqrt_psd(rho: &DensityMatrix) -> Result<CMatrix> {
    psd_sqrt(rho.matrix())
}

/// Row-major JSON exchange format `{"dim": n, "re": [[…]], "im": [[…]]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let n = m.nrows();
        Self {
            dim: n,
            re: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
            im: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.dim;
        let rows_ok = |rows: &Vec<Vec<f64>>| rows.len() == n && rows.iter().all(|r| r.len() == n);
        if n == 0 || !rows_ok(&self.re) || !(self.im.is_empty() || rows_ok(&self.im)) {
            return dim_err(format!("matrix JSON rows do not match dim {n}"));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| {
            let im = if self.im.is_empty() { 0.0 } else { self.im[i][j] };
            c64(self.re[i][j], im)
        }))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mj = MatrixJson::deserialize(d)?;
        let m = mj.to_matrix().map_err(serde::de::Error::custom)?;
        Observable::new(m).map_err(serde::de::Error::custom)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mj = MatrixJson::deserialize(d)?;
        let m = mj.to_matrix().map_err(serde::de::Error::custom)?;
        DensityMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn bell_phi_plus() -> DensityMatrix {
        let s = 0.5f64.sqrt();
        DensityMatrix::pure(&[c64(s, 0.0), C64::default(), C64::default(), c64(s, 0.0)]).unwrap()
    }

    #[test]
    fn tensor_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), CMatrix::identity(4, 4));
        let [x, _, z] = pauli();
        let zz = tensor(z.matrix(), z.matrix());
        let expected = Observable::diagonal(&[1.0, -1.0, -1.0, 1.0]);
        assert!(max_abs(&(zz - expected.matrix())) < 1e-15);
        let xx = tensor(x.matrix(), x.matrix());
        assert!(max_abs(&(&xx * &xx - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn tensor_first_argument_is_slow_index() {
        let a = CMatrix::from_fn(2, 2, |i, j| c64((i * 2 + j) as f64, 0.0));
        let b = CMatrix::identity(3, 3);
        let k = tensor(&a, &b);
        assert_eq!(k[(3, 3)], a[(1, 1)]);
        assert_eq!(k[(0, 3)], a[(0, 1)]);
    }

    #[test]
    fn partial_trace_examples() {
        let phi = bell_phi_plus();
        let r = partial_trace(&phi, &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = sampling::random_density_matrix(2, &mut rng);
        let sigma = sampling::random_density_matrix(3, &mut rng);
        let prod = rho.tensor(&sigma);
        let back = partial_trace(&prod, &[2, 3], &[1]).unwrap();
        assert!(max_abs(&(back.matrix() - sigma.matrix())) < 1e-12);

        // symmetric |1,0⟩ = (|01⟩ + |10⟩)/√2
        let s = 0.5f64.sqrt();
        let dicke = DensityMatrix::pure(&[C64::default(), c64(s, 0.0), c64(s, 0.0), C64::default()]).unwrap();
        let r = partial_trace(&dicke, &[2, 2], &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(partial_trace(&rho, &[2, 3], &[0]), Err(Error::Dimension(_))));
        assert!(matches!(partial_trace(&rho, &[2, 2], &[2]), Err(Error::Dimension(_))));
    }

    #[test]
    fn partial_trace_preserves_trace_three_parties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = sampling::random_density_matrix(12, &mut rng);
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let r = partial_trace(&rho, &[2, 3, 2], &keep).unwrap();
            assert!((r.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_examples() {
        let [x, _, z] = pauli();
        let e = eig_hermitian(&z);
        assert_eq!(e.eigenvalues, vec![-1.0, 1.0]);
        let e = eig_hermitian(&x);
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14 && (e.eigenvalues[1] - 1.0).abs() < 1e-14);
        // lowest eigenvector is |−⟩ up to phase
        let v0 = e.eigenvectors.column(0);
        assert!(((v0[0] - v0[1] * c64(-1.0, 0.0)).norm()) < 1e-12);

        // σz⊗σz − 0.5(σx⊗I + I⊗σx) is invariant under global x-flip
        let i2 = CMatrix::identity(2, 2);
        let h = tensor(z.matrix(), z.matrix()) - (tensor(x.matrix(), &i2) + tensor(&i2, x.matrix())) * c64(0.5, 0.0);
        let e = eigh(&h).unwrap();
        let xx = tensor(x.matrix(), x.matrix());
        let flipped = eigh(&(&xx * &h * &xx)).unwrap();
        for (a, b) in e.eigenvalues.iter().zip(&flipped.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
        // the lowest level is −√2 (from the triplet-sector 2x2 block)
        assert!((e.eigenvalues[0] + 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(eigh(&m), Err(Error::Validation(_))));
        assert!(matches!(Observable::new(m), Err(Error::Validation(_))));
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2, 3, 5, 17, 64] {
            let h = sampling::random_hermitian(dim, &mut rng);
            let e = eig_hermitian(&h);
            assert!(max_abs(&(e.reconstruct() - h.matrix())) <= 1e-9);
            let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
            assert!(max_abs(&(gram - CMatrix::identity(dim, dim))) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn operator_library_examples() {
        for p in pauli() {
            assert!(max_abs(&(p.matrix() * p.matrix() - CMatrix::identity(2, 2))) < 1e-15);
        }
        let js = operator_library(OperatorKind::SpinJ { j: 0.5 }).unwrap();
        for (jl, sl) in js.iter().zip(pauli()) {
            assert!(max_abs(&(jl.matrix() - sl.scaled(0.5).matrix())) < 1e-15);
        }
        let g = operator_library(OperatorKind::GellMann { d: 3 }).unwrap();
        assert_eq!(g.len(), 8);
        for a in &g {
            assert!(a.matrix().trace().norm() < 1e-14);
        }
        assert!(operator_library(OperatorKind::GellMann { d: 1 }).is_err());
        assert!(operator_library(OperatorKind::SpinJ { j: 0.3 }).is_err());
    }

    #[test]
    fn spin_commutation_relations() {
        for j in [0.5, 1.0, 1.5, 2.0, 3.5] {
            let s = operator_library(OperatorKind::SpinJ { j }).unwrap();
            let comm = s[0].matrix() * s[1].matrix() - s[1].matrix() * s[0].matrix();
            assert!(max_abs(&(comm - s[2].matrix() * c64(0.0, 1.0))) < 1e-12);
            let casimir = s.iter().map(|x| x.matrix() * x.matrix()).fold(CMatrix::zeros(s[0].dim(), s[0].dim()), |a, b| a + b);
            let d = s[0].dim();
            assert!(max_abs(&(casimir - CMatrix::identity(d, d) * c64(j * (j + 1.0), 0.0))) < 1e-12);
        }
    }

    #[test]
    fn gell_mann_orthogonality() {
        for d in 2..=5 {
            let g = operator_library(OperatorKind::GellMann { d }).unwrap();
            assert_eq!(g.len(), d * d - 1);
            for (a, ga) in g.iter().enumerate() {
                for (b, gb) in g.iter().enumerate() {
                    let t = trace_product_re(ga.matrix(), gb.matrix());
                    let expected = if a == b { 2.0 } else { 0.0 };
                    assert!((t - expected).abs() < 1e-12, "d={d} a={a} b={b} t={t}");
                }
            }
        }
    }

    #[test]
    fn flip_examples() {
        let f = flip_operator(2).unwrap();
        let e = eig_hermitian(&f);
        let expected = [-1.0, 1.0, 1.0, 1.0];
        for (a, b) in e.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(max_abs(&(f.matrix() * f.matrix() - CMatrix::identity(4, 4))) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = sampling::random_complex_matrix(2, &mut rng);
        let b = sampling::random_complex_matrix(2, &mut rng);
        let lhs = (f.matrix() * tensor(&a, &b)).trace();
        let rhs = (&a * &b).trace();
        assert!((lhs - rhs).norm() < 1e-13);

        let rho = sampling::random_density_matrix(2, &mut rng);
        let sigma = sampling::random_density_matrix(2, &mut rng);
        let swapped = DensityMatrix::from_matrix_unchecked(f.matrix() * rho.tensor(&sigma).matrix() * f.matrix());
        let m0 = partial_trace(&swapped, &[2, 2], &[0]).unwrap();
        let m1 = partial_trace(&swapped, &[2, 2], &[1]).unwrap();
        assert!(max_abs(&(m0.matrix() - sigma.matrix())) < 1e-14);
        assert!(max_abs(&(m1.matrix() - rho.matrix())) < 1e-14);
    }

    #[test]
    fn sqrt_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = sampling::random_pure_state(3, &mut rng);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let s = matrix_sqrt_psd(&rho).unwrap();
        assert!(max_abs(&(&s - rho.matrix())) < 1e-9);

        let s = matrix_sqrt_psd(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(max_abs(&(s - CMatrix::identity(2, 2) * c64(0.5f64.sqrt(), 0.0))) < 1e-14);

        let d = DensityMatrix::new(Observable::diagonal(&[0.8, 0.2]).into_matrix()).unwrap();
        let s = matrix_sqrt_psd(&d).unwrap();
        assert!((s[(0, 0)].re - 0.8f64.sqrt()).abs() < 1e-14 && (s[(1, 1)].re - 0.2f64.sqrt()).abs() < 1e-14);

        let bad = Observable::diagonal(&[1.1, -0.1]).into_matrix();
        assert!(matches!(psd_sqrt(&bad), Err(Error::NotAState(_))));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Observable::diagonal(&[0.6, 0.6]).into_matrix()).is_err());
        assert!(DensityMatrix::new(Observable::diagonal(&[1.2, -0.2]).into_matrix()).is_err());
        assert!(DensityMatrix::from_bloch([0.0, 0.0, 1.5]).is_err());
        let rho = DensityMatrix::from_bloch([0.3, -0.2, 0.1]).unwrap();
        let r = rho.bloch_vector().unwrap();
        assert!((r[0] - 0.3).abs() < 1e-15 && (r[1] + 0.2).abs() < 1e-15 && (r[2] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn local_embedding_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = sampling::random_complex_matrix(2, &mut rng);
        let b = sampling::random_complex_matrix(3, &mut rng);
        let i2 = CMatrix::identity(2, 2);
        let direct = tensor_all(&[&a, &i2, &b]);
        let embedded = embed_local(&[(2, &b), (0, &a)], &[2, 2, 3]).unwrap();
        assert!(max_abs(&(direct - embedded)) < 1e-14);
        assert!(embed_local(&[(0, &a), (0, &a)], &[2, 2]).is_err());
    }

    #[test]
    fn two_body_embedding_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = sampling::random_complex_matrix(2, &mut rng);
        let b = sampling::random_complex_matrix(3, &mut rng);
        let c = sampling::random_complex_matrix(2, &mut rng);
        let d = sampling::random_complex_matrix(3, &mut rng);
        let op = tensor(&a, &b) + tensor(&c, &d);
        let dims = [2, 2, 3];
        let mut m = CMatrix::zeros(12, 12);
        accumulate_two_body(&mut m, c64(1.0, 0.0), &op, 0, 2, &dims).unwrap();
        let expected = embed_local(&[(0, &a), (2, &b)], &dims).unwrap() + embed_local(&[(0, &c), (2, &d)], &dims).unwrap();
        assert!(max_abs(&(m - expected)) < 1e-13);
        // reversed party order puts the first factor on the later party
        let op = tensor(&a, &c);
        let mut m = CMatrix::zeros(8, 8);
        accumulate_two_body(&mut m, c64(1.0, 0.0), &op, 2, 0, &[2, 2, 2]).unwrap();
        let expected = embed_local(&[(2, &a), (0, &c)], &[2, 2, 2]).unwrap();
        assert!(max_abs(&(m - expected)) < 1e-13);
    }

    #[test]
    fn matrix_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = sampling::random_density_matrix(3, &mut rng);
        let text = serde_json::to_string(&rho).unwrap();
        let back: DensityMatrix = serde_json::from_str(&text).unwrap();
        assert!(max_abs(&(back.matrix() - rho.matrix())) < 1e-15);
        let real_only = r#"{"dim": 2, "re": [[0.5, 0.0], [0.0, 0.5]]}"#;
        let m = MatrixJson::from_json_str(real_only).unwrap().to_matrix().unwrap();
        assert_eq!(m, DensityMatrix::maximally_mixed(2).into_matrix());
        assert!(MatrixJson::from_json_str(r#"{"dim": 3, "re": [[1.0]]}"#).unwrap().to_matrix().is_err());
    }
}
