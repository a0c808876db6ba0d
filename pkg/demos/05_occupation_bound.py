"""Occupation-time bound: both sides, estimated on simulated paths.

For X = X_0 + int b ds + L the harness estimates E int f(s, X_s) ds for a
panel of space-time bumps and compares against the mixed L^q-L^p norm of f
times (1 + expected drift mass).  Inside the admissible (p, q) region the
ratio stays bounded across the panel; the sweep shows the shrinking-bump
trend flattening in a gate-violating cell.

Run:  python demos/05_occupation_bound.py
"""

import numpy as np

import levysde as lv
from levysde.kernel import GridGeometry
from levysde.krylov import krylov_ratio, krylov_sweep, standard_bump_panel
from levysde.solver import SolverConfig, ou_drift, zero_drift


def main():
    geom = GridGeometry((20.0,), (2048,))
    panel = standard_bump_panel(geom, 1.0, count=20, seed=5)
    cfg = SolverConfig(dt=1.0 / 128, horizon=1.0, particles=10_000, seed=9)

    for name, model, drift in [
        ("brownian, b = 0", lv.brownian(1), zero_drift()),
        ("stable a=1.5, b = -x", lv.isotropic_stable(1.5, 1), ou_drift(1.0)),
    ]:
        rep = krylov_ratio(model, drift, panel, cfg, p=4.0, q=10.0)
        print(f"{name}: gate ok = {rep.gate_ok}, drift mass = {rep.drift_mass:.3f}, "
              f"panel max/median ratio = {rep.panel_max:.3f}/{rep.panel_median:.3f}")

    print("\n(p, q) sweep for stable a=1.5 with shrinking self-similar bumps:")
    cells = krylov_sweep(
        lv.isotropic_stable(1.5, 1), zero_drift(), [(4.0, 10.0), (3.0, 8.0), (1.5, 2.0)],
        SolverConfig(dt=1.0 / 256, horizon=1.0, particles=10_000, seed=10), geom,
        widths=(0.8, 0.4, 0.2),
    )
    print("  p     q     admissible   panel-max   trend slope (log ratio vs log width)")
    for c in cells:
        print(f"  {c.p:<5g} {c.q:<5g} {str(c.admissible):<12s} {c.panel_max:<11.3f} {c.trend_slope:+.3f}")
    print("  (steep positive slope = ratios collapse as bumps shrink; the inadmissible")
    print("   cell stays nearly flat, the degradation the gate predicts)")


if __name__ == "__main__":
    main()
