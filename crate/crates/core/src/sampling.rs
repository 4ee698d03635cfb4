//! Random states and operators for tests, verification suites and optimizer
//! restarts. Everything is driven by a caller-supplied RNG so runs are
//! reproducible from a seed.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::qcore::{c64, CMatrix, CVector, DensityMatrix, Observable};

/// Deterministic child RNG for task `index` of a run seeded with `seed`.
pub fn sub_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Ginibre matrix with i.i.d. complex Gaussian entries.
pub fn random_complex_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| c64(gaussian(rng), gaussian(rng)))
}

pub fn random_complex_rect<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c64(gaussian(rng), gaussian(rng)))
}

/// Haar-random unit vector.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(dim, |_, _| c64(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v.unscale(n)
}

/// Hilbert–Schmidt random full-rank state G G† / Tr(G G†).
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = random_complex_matrix(dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.unscale(tr))
}

/// Random state of the given rank (1 ≤ rank ≤ dim).
pub fn random_density_matrix_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = random_complex_rect(dim, rank.clamp(1, dim), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix_unchecked(m.unscale(tr))
}

/// Random qubit state with Bloch vector drawn uniformly from the ball.
pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    loop {
        let r = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if r.iter().map(|x: &f64| x * x).sum::<f64>() <= 1.0 {
            return DensityMatrix::from_bloch(r).expect("inside the Bloch ball");
        }
    }
}

/// GUE-like random Hermitian matrix (G + G†)/2.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    let g = random_complex_matrix(dim, rng);
    Observable::from_hermitian((&g + g.adjoint()) * c64(0.5, 0.0))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    random_isometry(dim, dim, rng)
}

/// Random `rows × cols` matrix with orthonormal columns (rows ≥ cols).
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_rect(rows, cols, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let d = r[(k, k)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            q.column_mut(k).scale_mut(1.0);
            for i in 0..rows {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}
