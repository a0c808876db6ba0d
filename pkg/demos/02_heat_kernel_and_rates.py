"""Transition densities on a grid and the semigroup rate probes.

Recovers p_t by FFT inversion of exp(-t Phi), convolves test functions
spectrally, and fits the log-log rates that the semigroup estimates
predict: the gradient bound ||grad^k P_t f||_p ~ t^(-k/alpha) against a
bump-width panel, the smoothing rate t^(-gamma/alpha) and the strong
continuity rate t^(theta/alpha) against power-spectrum inputs that
saturate the corresponding bounds.

Run:  python demos/02_heat_kernel_and_rates.py
"""

import math

import numpy as np

import levysde as lv
from levysde.kernel import (
    GridGeometry,
    bump_width_panel,
    gradient_bound_probe,
    heat_kernel,
    rough_spectrum_function,
    smoothing_probe,
    strong_continuity_probe,
)


def main():
    # --- densities -----------------------------------------------------
    geom = GridGeometry((20.0,), (4096,))
    pk = heat_kernel(lv.brownian(1), 1.0, geom)
    x = geom.axis(0)
    gauss = np.exp(-x ** 2 / 2) / math.sqrt(2 * math.pi)
    print(f"brownian p_1: sup error vs closed form = {np.abs(pk.values - gauss).max():.2e}, "
          f"integral = {pk.integral():.12f}")

    stable = lv.isotropic_stable(1.5, 1)
    pk2 = heat_kernel(stable, 1.0, GridGeometry((320.0,), (8192,)))
    print(f"stable p_1: value at 0 = {pk2.values[np.argmin(np.abs(pk2.geometry.axis(0)))]:.6f}, "
          f"integral = {pk2.integral():.12f}")

    # --- gradient rates --------------------------------------------------
    ts = np.geomspace(1e-2, 1.0, 9)
    geom13 = GridGeometry((40.0,), (8192,))
    for name, model, alpha in [("brownian", lv.brownian(1), 2.0), ("stable", stable, 1.5)]:
        panel = bump_width_panel(geom13, alpha, ts)
        for k in (1, 2):
            rep = gradient_bound_probe(model, 2.0, ts, panel, order=k)
            print(f"{name}: ||grad^{k} P_t f||_2 rate = {rep.slope:+.3f} (predicted {-k/alpha:+.3f})")

    # --- smoothing / continuity ------------------------------------------
    geom14 = GridGeometry((40.0,), (2 ** 14,))
    ts_small = np.geomspace(1e-4, 1e-2, 9)
    f0 = rough_spectrum_function(geom14, 0.0, (2.5, 400.0), seed=1)
    rep = smoothing_probe(lv.brownian(1), 2.0, 1.0, 0.0, ts_small, f0)
    print(f"brownian smoothing gamma=1: slope {rep.slope:+.3f} (predicted -0.5)")

    f1 = rough_spectrum_function(geom14, 1.0, (2.5, 400.0), seed=2)
    rep = strong_continuity_probe(lv.brownian(1), 2.0, 1.0, ts_small, f1)
    print(f"brownian continuity theta=1: slope {rep.slope:+.3f} (predicted +0.5)")


if __name__ == "__main__":
    main()
