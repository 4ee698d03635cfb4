//! Ground-state energy per site of the infinite transverse-field Ising chain
//! −(J/4) Σ σ_z σ_z − B_x Σ σ_x, and its Legendre transform giving the
//! minimal energy at fixed ⟨σ_x⟩.

const QUAD_TOL: f64 = 1e-12;
const MAX_DEPTH: u32 = 40;
// Per-interval tolerances are not halved below this; deeper refinement only
// chases rounding noise.
const TOL_FLOOR: f64 = 1e-16;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

#[allow(clippy::too_many_arguments)]
fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    let half = (tol / 2.0).max(TOL_FLOOR);
    adaptive(f, a, fa, m, fm, lm, flm, left, half, depth - 1) + adaptive(f, m, fm, b, fb, rm, frm, right, half, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    adaptive(f, a, fa, b, fb, m, fm, whole, tol, MAX_DEPTH)
}

/// e(J, B_x) = −(1/π) ∫₀^π √((J/4)² + B_x² + 2(J/4)B_x cos k) dk.
pub fn pfeuty_energy(j: f64, bx: f64) -> f64 {
    let a = j / 4.0;
    let f = |k: f64| (a * a + bx * bx + 2.0 * a * bx * k.cos()).max(0.0).sqrt();
    -integrate(&f, 0.0, std::f64::consts::PI, QUAD_TOL) / std::f64::consts::PI
}

/// Minimal energy per site of −(J/4) Σ σ_z σ_z over translation-invariant
/// states with ⟨σ_x⟩ = m: max_{B_x ≥ 0} [e(J, B_x) + B_x m], found by golden
/// section on the concave objective. Requires 0 ≤ m < 1.
pub fn pfeuty_constrained_energy(j: f64, m: f64) -> crate::Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(crate::Error::Validation(format!("⟨σ_x⟩ must lie in [0, 1), got {m}")));
    }
    let objective = |b: f64| pfeuty_energy(j, b) + b * m;
    let mut hi = j.abs().max(1e-3);
    while objective(2.0 * hi) > objective(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(crate::Error::NonConvergence("field bracket did not close".into()));
        }
    }
    let (mut lo, mut hi) = (0.0, 2.0 * hi);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    while hi - lo > 1e-10 * (1.0 + hi) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = objective(x1);
        }
    }
    Ok(objective(0.5 * (lo + hi)).max(objective(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn limits_and_critical_point() {
        assert!((pfeuty_energy(1.0, 0.0) + 0.25).abs() < 1e-12);
        assert!((pfeuty_energy(0.0, 0.7) + 0.7).abs() < 1e-12);
        assert!((pfeuty_energy(1.0, 0.25) + 1.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn dual_matches_duality_of_couplings() {
        // Kramers–Wannier: e(J, B) with J/4 ↔ B is symmetric.
        let e1 = pfeuty_energy(1.0, 0.6);
        let e2 = pfeuty_energy(2.4, 0.25);
        assert!((e1 - e2).abs() < 1e-10);
    }

    #[test]
    fn constrained_energy() {
        // ⟨σ_x⟩ = 0 is reached at zero field.
        assert!((pfeuty_constrained_energy(1.0, 0.0).unwrap() + 0.25).abs() < 1e-12);
        // Product-state value −(1 − m²)/4 is an upper bound.
        for &m in &[0.1, 0.3, 0.6] {
            let e = pfeuty_constrained_energy(1.0, m).unwrap();
            assert!(e <= -(1.0 - m * m) / 4.0 + 1e-12, "{m}: {e}");
            assert!(e >= -0.25 - 1e-12);
        }
        assert!(pfeuty_constrained_energy(1.0, 1.0).is_err());
    }
}
