"""Smoke test for the spinbound Python module.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

import json
import math

import spinbound as sb


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    jx, jy, jz = sb.spin_half()

    rho = sb.DensityMatrix.from_bloch([0.6, 0.0, 0.0])
    close(sb.qfi(rho, jz), 0.36, 1e-12)
    value, exactness = sb.sep_corr_max(rho, [jz])
    close(value, 0.25 - 0.36 / 4, 1e-12)
    assert exactness == "exact"
    close(sb.roof_max(rho, [jz], seed=1), value, 1e-4)
    assert sb.any_state_corr_max(rho, jz) >= value

    sigma = sb.DensityMatrix.from_bloch([0.0, 0.3, 0.5])
    sep_max, residual = sb.sep_heisenberg_max(rho, sigma, seed=2)
    close(sep_max, sb.fidelity(rho, sigma) / 2 - 0.25, 1e-3)
    assert residual <= 1e-6

    p = sb.chain_sandwich(6, 1.0, 0.0)
    close(p["e_ground"], -1.5, 1e-9)
    p = sb.chain_sandwich(6, 1.0, 0.8)
    assert p["e_lower_wy"] <= p["e_ground"] + 1e-9 <= p["e_sep_qfi"] + 2e-9

    q = sb.collective_qfi(10, 1.0, 2.0)
    assert -1e-9 <= q["delta"] <= q["delta_cap"]

    close(sb.pfeuty_energy(1.0, 0.25), -1 / math.pi, 1e-9)
    k = sb.kprod_bounds(sb.DensityMatrix.from_bloch([0.3, 0.0, 0.0]), 2, 10)
    assert k["product"] >= k["qfi"] - 1e-12

    ring = sb.ModelSpec.ising_ring(6, 1.0, [0.4, 0.0, 0.0])
    report = json.loads(sb.bound_report(ring))
    assert report["E_L"] <= report["E_ground"] + 1e-9 <= report["E_sep"] + 2e-9
    assert report["fidelity_bound"] is None
    e, exactness, saturated = sb.e_sep_lower(ring, rho)
    assert exactness == "exact" and saturated
    assert e >= ring.ground_energy() - 1e-9

    t = math.pi / 8
    entangled = sb.DensityMatrix.from_pure([math.cos(t), 0, 0, math.sin(t)])
    lhs, rhs, applicable, violated = sb.witness("corr_qfi", entangled, jx)
    assert applicable and violated and lhs - rhs >= 0.05
    product = rho.tensor(rho)
    assert not sb.witness("corr_qfi", product, jz)[3]

    r = sb.verify("saturation", 6, seed=3)
    assert r["failed"] == 0 and r["trials"] == 6

    try:
        sb.DensityMatrix([[1.0, 0.0], [0.0, 1.0]])
    except ValueError:
        pass
    else:
        raise AssertionError("unnormalized state accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
