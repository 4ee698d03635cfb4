//! Search over pure-state decompositions of a fixed density matrix.
//!
//! Every decomposition of ϱ = W W† (W = V√Λ on the support) into K
//! unnormalized vectors is |ψ̃_k⟩ = W y_k with y_k the rows of a K×r matrix U
//! with orthonormal columns. The search moves U by 2×2 unitary rotations of
//! row pairs, which keep U†U = I exactly, so every iterate is an exact
//! decomposition of ϱ.

use rayon::prelude::*;

use super::{Direction, OptimizerConfig, ProductEnsemble};
use crate::error::{dim_err, Error, Result};
use crate::optim::nelder_mead;
use crate::qcore::{c64, CMatrix, CVector, DensityMatrix, Observable, C64, EIG_CLIP};
use crate::sampling::{random_isometry, sub_rng};

/// Outcome of a decomposition search.
#[derive(Clone, Debug)]
pub struct RoofResult {
    /// Σ_k p_k Σ_l c_l ⟨h_l⟩²_{ψ_k} evaluated on `ensemble`.
    pub value: f64,
    pub ensemble: ProductEnsemble,
    /// The selected restart reached the sweep-improvement tolerance.
    pub converged: bool,
    pub restarts_converged: usize,
    pub restarts: usize,
}

const GRID: usize = 16;

struct Problem {
    /// Λ and the operators c_l W† h_l W in the support basis.
    lambda: Vec<f64>,
    ops: Vec<CMatrix>,
    coeffs: Vec<f64>,
    w: CMatrix,
    k: usize,
    sign: f64,
}

/// Quadratic forms of all operators on rows a and b.
struct PairForms {
    paa: f64,
    pbb: f64,
    pab: C64,
    qaa: Vec<f64>,
    qbb: Vec<f64>,
    qab: Vec<C64>,
}

fn quad(y1: &[C64], m: &CMatrix, y2: &[C64]) -> C64 {
    let r = y1.len();
    let mut acc = C64::default();
    for i in 0..r {
        let mut row = C64::default();
        for j in 0..r {
            row += m[(i, j)] * y2[j];
        }
        acc += y1[i].conj() * row;
    }
    acc
}

fn quad_diag(y1: &[C64], lambda: &[f64], y2: &[C64]) -> C64 {
    y1.iter().zip(y2).zip(lambda).map(|((a, b), l)| a.conj() * b * *l).sum()
}

impl Problem {
    fn term(&self, p: f64, q: &[f64]) -> f64 {
        if p <= 1e-300 {
            return 0.0;
        }
        q.iter().zip(&self.coeffs).map(|(qi, c)| c * qi * qi).sum::<f64>() / p
    }

    fn row_value(&self, y: &[C64]) -> f64 {
        let p = quad_diag(y, &self.lambda, y).re;
        let q: Vec<f64> = self.ops.iter().map(|m| quad(y, m, y).re).collect();
        self.term(p, &q)
    }

    fn forms(&self, ya: &[C64], yb: &[C64]) -> PairForms {
        PairForms {
            paa: quad_diag(ya, &self.lambda, ya).re,
            pbb: quad_diag(yb, &self.lambda, yb).re,
            pab: quad_diag(ya, &self.lambda, yb),
            qaa: self.ops.iter().map(|m| quad(ya, m, ya).re).collect(),
            qbb: self.ops.iter().map(|m| quad(yb, m, yb).re).collect(),
            qab: self.ops.iter().map(|m| quad(ya, m, yb)).collect(),
        }
    }

    /// Objective (to be minimized) of rows a, b after the rotation
    /// y_a ← c y_a − e^{iφ} s y_b, y_b ← e^{−iφ} s y_a + c y_b.
    fn rotated(&self, f: &PairForms, theta: f64, phi: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        let e = c64(phi.cos(), phi.sin());
        let mix = |aa: f64, bb: f64, ab: C64| -> (f64, f64) {
            let x = 2.0 * c * s * (e * ab).re;
            (c * c * aa + s * s * bb - x, s * s * aa + c * c * bb + x)
        };
        let (pa, pb) = mix(f.paa, f.pbb, f.pab);
        let mut qa = Vec::with_capacity(self.ops.len());
        let mut qb = Vec::with_capacity(self.ops.len());
        for l in 0..self.ops.len() {
            let (x, y) = mix(f.qaa[l], f.qbb[l], f.qab[l]);
            qa.push(x);
            qb.push(y);
        }
        self.sign * (self.term(pa, &qa) + self.term(pb, &qb))
    }

    fn rows(u: &CMatrix, a: usize) -> Vec<C64> {
        u.row(a).iter().copied().collect()
    }

    fn total(&self, u: &CMatrix) -> f64 {
        (0..self.k).map(|a| self.row_value(&Self::rows(u, a))).sum()
    }

    /// One restart of the rotation search; returns (U, converged).
    fn search(&self, mut u: CMatrix, cfg: &OptimizerConfig) -> (CMatrix, bool) {
        let mut current = self.sign * self.total(&u);
        for _ in 0..cfg.max_iters {
            let start = current;
            for a in 0..self.k {
                for b in (a + 1)..self.k {
                    let ya = Self::rows(&u, a);
                    let yb = Self::rows(&u, b);
                    let forms = self.forms(&ya, &yb);
                    let base = self.rotated(&forms, 0.0, 0.0);
                    let mut best = (0.0, 0.0, base);
                    for i in 0..GRID {
                        for j in 0..GRID {
                            let th = std::f64::consts::PI * i as f64 / GRID as f64;
                            let ph = std::f64::consts::TAU * j as f64 / GRID as f64;
                            let v = self.rotated(&forms, th, ph);
                            if v < best.2 {
                                best = (th, ph, v);
                            }
                        }
                    }
                    let (x, v) = nelder_mead(&[best.0, best.1], 0.1, |p| self.rotated(&forms, p[0], p[1]), 400, 1e-17);
                    if v < best.2 {
                        best = (x[0], x[1], v);
                    }
                    if best.2 < base {
                        let (s, c) = best.0.sin_cos();
                        let e = c64(best.1.cos(), best.1.sin());
                        for i in 0..ya.len() {
                            u[(a, i)] = ya[i] * c - e * yb[i] * s;
                            u[(b, i)] = e.conj() * ya[i] * s + yb[i] * c;
                        }
                        current += best.2 - base;
                    }
                }
            }
            if start - current <= cfg.objective_tol {
                return (u, true);
            }
        }
        (u, false)
    }

    fn ensemble(&self, u: &CMatrix) -> Result<ProductEnsemble> {
        let comps = (0..self.k)
            .map(|a| {
                let y = CVector::from_iterator(u.ncols(), u.row(a).iter().copied());
                vec![&self.w * y]
            })
            .collect();
        ProductEnsemble::from_unnormalized(comps)
    }
}

/// Extremizes Σ_k p_k Σ_l c_l ⟨h_l⟩²_{ψ_k} over decompositions
/// ϱ = Σ_k p_k |ψ_k⟩⟨ψ_k| with K = max(d², rank) components.
pub fn weighted_roof(rho: &DensityMatrix, terms: &[(f64, Observable)], direction: Direction, cfg: &OptimizerConfig) -> Result<RoofResult> {
    cfg.validate()?;
    if terms.is_empty() {
        return Err(Error::Validation("operator list is empty".into()));
    }
    let d = rho.dim();
    if terms.iter().any(|(_, h)| h.dim() != d) {
        return dim_err("operators and state differ in dimension");
    }
    let eig = rho.eigen();
    let support: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] > EIG_CLIP).collect();
    let r = support.len();
    let lambda: Vec<f64> = support.iter().map(|&i| eig.eigenvalues[i]).collect();
    let w = CMatrix::from_fn(d, r, |i, j| eig.eigenvectors[(i, support[j])] * lambda[j].sqrt());
    let ops = terms.iter().map(|(_, h)| w.adjoint() * h.matrix() * &w).collect();
    let coeffs = terms.iter().map(|(c, _)| *c).collect();
    let k = (d * d).max(r);
    let problem = Problem { lambda, ops, coeffs, w, k, sign: direction.sign() };

    let runs: Vec<(CMatrix, bool)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = sub_rng(cfg.seed, i as u64);
            let u0 = random_isometry(k, r, &mut rng);
            problem.search(u0, cfg)
        })
        .collect();

    let mut best: Option<(f64, ProductEnsemble, bool)> = None;
    for (u, conv) in &runs {
        let ens = problem.ensemble(u)?;
        let value = ensemble_value(&ens, terms)?;
        if best.as_ref().is_none_or(|(v, _, _)| direction.better(value, *v)) {
            best = Some((value, ens, *conv));
        }
    }
    let (value, ensemble, converged) = best.expect("at least one restart");
    Ok(RoofResult { value, ensemble, converged, restarts_converged: runs.iter().filter(|r| r.1).count(), restarts: cfg.restarts })
}

/// Σ_k p_k Σ_l c_l ⟨h_l⟩²_{ψ_k} for a single-party ensemble.
pub(crate) fn ensemble_value(ens: &ProductEnsemble, terms: &[(f64, Observable)]) -> Result<f64> {
    let mut acc = 0.0;
    for (p, tuple) in ens.weights().iter().zip(ens.locals()) {
        for (c, h) in terms {
            let m = h.expectation_pure(&tuple[0])?;
            acc += p * c * m * m;
        }
    }
    Ok(acc)
}

/// Largest Σ_k p_k Σ_l ⟨h_l⟩²_{ψ_k} found over pure-state decompositions.
pub fn roof_max(rho: &DensityMatrix, hs: &[Observable], cfg: &OptimizerConfig) -> Result<RoofResult> {
    let terms: Vec<(f64, Observable)> = hs.iter().map(|h| (1.0, h.clone())).collect();
    weighted_roof(rho, &terms, Direction::Max, cfg)
}

/// Smallest Σ_k p_k Σ_l ⟨h_l⟩²_{ψ_k} found over pure-state decompositions.
pub fn roof_min(rho: &DensityMatrix, hs: &[Observable], cfg: &OptimizerConfig) -> Result<RoofResult> {
    let terms: Vec<(f64, Observable)> = hs.iter().map(|h| (1.0, h.clone())).collect();
    weighted_roof(rho, &terms, Direction::Min, cfg)
}
