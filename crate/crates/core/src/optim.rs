//! Small unconstrained minimizers used by the oracles: limited-memory BFGS
//! for smooth objectives with analytic gradients, and Nelder–Mead for
//! low-dimensional derivative-free refinement.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug)]
pub struct LbfgsSettings {
    pub max_iters: usize,
    pub memory: usize,
    /// Stop when the largest gradient component falls below this.
    pub grad_tol: f64,
    /// Stop when the relative decrease of f over one iteration falls below this.
    pub f_tol: f64,
}

impl Default for LbfgsSettings {
    fn default() -> Self {
        Self { max_iters: 2000, memory: 12, grad_tol: 1e-10, f_tol: 1e-15 }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LbfgsOutcome {
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f` starting from `x` (updated in place). `f` writes the
/// gradient into its second argument and returns the value.
pub fn lbfgs_minimize<F>(x: &mut [f64], mut f: F, settings: &LbfgsSettings) -> LbfgsOutcome
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut fx = f(x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(settings.memory);
    let mut dir = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut alpha_buf = vec![0.0; settings.memory];

    for iter in 0..settings.max_iters {
        if !fx.is_finite() {
            return LbfgsOutcome { f: fx, iterations: iter, converged: false };
        }
        if max_abs(&g) <= settings.grad_tol {
            return LbfgsOutcome { f: fx, iterations: iter, converged: true };
        }

        // two-loop recursion
        dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
        for (i, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &dir);
            alpha_buf[i] = a;
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
        }
        let gamma = match history.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / max_abs(&g).max(1e-300).max(1.0),
        };
        dir.iter_mut().for_each(|d| *d *= gamma);
        for (i, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alpha_buf[i] - b) * si);
        }
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            history.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = dot(&g, &dir);
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            x_new.iter_mut().zip(x.iter().zip(&dir)).for_each(|(xn, (xi, di))| *xn = xi + step * di);
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            if history.is_empty() {
                return LbfgsOutcome { f: fx, iterations: iter, converged: max_abs(&g) <= settings.grad_tol.sqrt() };
            }
            history.clear();
            continue;
        }

        let s: Vec<f64> = x_new.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;
        if decrease <= settings.f_tol * fx.abs().max(1.0) {
            return LbfgsOutcome { f: fx, iterations: iter + 1, converged: true };
        }
    }
    LbfgsOutcome { f: fx, iterations: settings.max_iters, converged: max_abs(&g) <= settings.grad_tol }
}

/// Nelder–Mead simplex minimization. Returns the best point and its value.
pub fn nelder_mead<F>(x0: &[f64], step: f64, mut f: F, max_evals: usize, tol: f64) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evals = n + 1;
    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (p, _) in &s[..n] {
            c.iter_mut().zip(p).for_each(|(ci, pi)| *ci += pi / n as f64);
        }
        c
    };
    let along = |c: &[f64], p: &[f64], t: f64| -> Vec<f64> { c.iter().zip(p).map(|(ci, pi)| ci + t * (pi - ci)).collect() };

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() <= tol {
            break;
        }
        let c = centroid(&simplex);
        let worst = simplex[n].0.clone();
        let xr = along(&c, &worst, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(&c, &worst, -2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let p = along(&c, &worst, -0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(&c, &worst, 0.5);
                let v = f(&p);
                (p, v)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p = along(&best, &item.0, 0.5);
                    let v = f(&p);
                    *item = (p, v);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64], g: &mut [f64]) -> f64 {
        let (a, b) = (x[0], x[1]);
        g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        g[1] = 200.0 * (b - a * a);
        (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
    }

    #[test]
    fn lbfgs_solves_rosenbrock() {
        let mut x = [-1.2, 1.0];
        let out = lbfgs_minimize(&mut x, rosenbrock, &LbfgsSettings::default());
        assert!(out.converged);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6, "{x:?}");
    }

    #[test]
    fn lbfgs_solves_quadratic_exactly() {
        let diag = [1.0, 10.0, 100.0, 1000.0];
        let mut x = [1.0; 4];
        let out = lbfgs_minimize(
            &mut x,
            |x, g| {
                let mut f = 0.0;
                for i in 0..4 {
                    g[i] = diag[i] * (x[i] - i as f64);
                    f += 0.5 * diag[i] * (x[i] - i as f64).powi(2);
                }
                f
            },
            &LbfgsSettings::default(),
        );
        assert!(out.f < 1e-16);
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - i as f64).abs() < 1e-8);
        }
    }

    #[test]
    fn nelder_mead_finds_minimum() {
        let (x, v) = nelder_mead(&[0.0, 0.0], 0.5, |p| (p[0] - 0.3).powi(2) + 2.0 * (p[1] + 0.7).powi(2), 2000, 1e-16);
        assert!(v < 1e-12);
        assert!((x[0] - 0.3).abs() < 1e-5 && (x[1] + 0.7).abs() < 1e-5);
    }
}
