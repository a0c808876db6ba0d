"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Tolerances are pinned here, not tuned at runtime.  Monte Carlo sizes match
the stated budgets; seeds are fixed so reruns are reproducible.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import integrate, special

import levysde as lv
from levysde.kernel import (
    BesselNormSpec,
    GridFunction,
    GridGeometry,
    bump_width_panel,
    gradient_bound_probe,
    heat_kernel,
    rough_spectrum_function,
    smoothing_probe,
    strong_continuity_probe,
)
from levysde.krylov import krylov_ratio, standard_bump_panel
from levysde.measure import EmpiricalMeasure, wasserstein_theta
from levysde.sampler import IncrementStream, moment_scaling_probe, sample_increments, small_jump_cf_bias
from levysde.solver import (
    SolverConfig,
    mollify_drift,
    mollify_drift_pointwise,
    picard_iterate,
    presample_noise,
    sign_drift,
    solve_frozen,
    toward_mean_drift,
    zero_drift,
)


def report(number, name, passed, detail=""):
    tag = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {number:>2} [{tag}] {name} {detail}")
    return passed


# ---------------------------------------------------------------------------
# 1. sampler fidelity
# ---------------------------------------------------------------------------


def fidelity_models():
    return [
        ("brownian", lv.brownian(1), 1e-3),
        ("isotropic_d1", lv.isotropic_stable(1.5, 1), 1e-3),
        ("isotropic_d2", lv.isotropic_stable(1.5, 2), 1e-3),
        ("cylindrical_d2", lv.cylindrical_stable(1.5, 2), 1e-3),
        ("tempered", lv.tempered_stable(1.5, 1.0), 0.05),
        ("truncated", lv.truncated_stable(1.5), 0.05),
        ("brownian_plus_stable", lv.superpose(lv.brownian(1), lv.isotropic_stable(1.5, 1)), 1e-3),
    ]


@pytest.mark.parametrize("name,model,cutoff", fidelity_models())
def test_criterion_1_sampler_fidelity(name, model, cutoff):
    n, t = 1_000_000, 1.0
    direction = np.ones(model.dim) / math.sqrt(model.dim)
    start = time.time()
    draws = sample_increments(IncrementStream(model, seed=101, small_jump_cutoff=cutoff), t, n)
    elapsed = time.time() - start
    worst = 0.0
    for mag in (0.25, 0.5, 1.0, 1.5, 2.0):
        xi = mag * direction
        ecf = np.mean(np.exp(1j * (draws @ xi)))
        target = math.exp(-t * float(lv.symbol_grid(model, xi[None, :])[0]))
        bias = small_jump_cf_bias(model, xi, t, cutoff)
        assert bias < 1e-3  # surrogate bias documented and small
        worst = max(worst, abs(ecf - target))
    ok = worst < 4e-3 and elapsed <= 60.0
    assert report(1, f"sampler fidelity {name}", ok, f"worst |ecf - exp(-Phi)| = {worst:.2e}, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2. moment scaling
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name,model,target",
    [("brownian", lv.brownian(1), 0.5), ("isotropic_stable", lv.isotropic_stable(1.5, 1), 1.0 / 1.5)],
)
def test_criterion_2_moment_scaling(name, model, target):
    rep = moment_scaling_probe(model, np.geomspace(1e-3, 1.0, 7), 100_000, seed=202)
    ok = abs(rep.slope - target) < 0.05
    assert report(2, f"moment scaling {name}", ok, f"slope = {rep.slope:.4f}, target = {target:.4f}")


# ---------------------------------------------------------------------------
# 3. heat kernel
# ---------------------------------------------------------------------------


def test_criterion_3_heat_kernel_brownian_sup():
    geom = GridGeometry((20.0,), (2 ** 12,))
    pk = heat_kernel(lv.brownian(1), 1.0, geom)
    x = geom.axis(0)
    err = float(np.abs(pk.values - np.exp(-x ** 2 / 2) / math.sqrt(2 * math.pi)).max())
    assert report(3, "heat kernel brownian sup-norm", err < 1e-6, f"sup err = {err:.2e}")


def test_criterion_3_heat_kernel_normalisation():
    cases = [
        (lv.brownian(1), GridGeometry((20.0,), (4096,))),
        (lv.isotropic_stable(1.5, 1), GridGeometry((320.0,), (2 ** 13,))),
        (lv.isotropic_stable(1.5, 2), GridGeometry((60.0, 60.0), (512, 512))),
        (lv.cylindrical_stable(1.5, 2), GridGeometry((60.0, 60.0), (512, 512))),
        (lv.tempered_stable(1.5, 1.0), GridGeometry((40.0,), (4096,))),
        (lv.truncated_stable(1.5), GridGeometry((30.0,), (4096,))),
        (lv.superpose(lv.brownian(1), lv.isotropic_stable(1.5, 1)), GridGeometry((60.0,), (4096,))),
    ]
    worst = 0.0
    for model, geom in cases:
        worst = max(worst, abs(heat_kernel(model, 1.0, geom).integral() - 1.0))
    assert report(3, "heat kernel normalisation (all classes)", worst < 1e-6, f"worst |int - 1| = {worst:.2e}")


def test_criterion_3_stable_kernel_at_origin():
    alpha, t = 1.5, 1.0
    model = lv.isotropic_stable(alpha, 1)
    k_iso = lv.symbol(model, [1.0]).real
    oracle, quad_err = integrate.quad(lambda r: math.exp(-t * k_iso * r ** alpha) / math.pi, 0, np.inf)
    assert quad_err < 1e-8  # oracle itself two orders below the comparison tolerance
    geom = GridGeometry((320.0,), (2 ** 13,))
    pk = heat_kernel(model, t, geom)
    at_zero = float(pk.values[np.argmin(np.abs(geom.axis(0)))])
    err = abs(at_zero - oracle)
    assert report(3, "stable kernel value at 0 vs quadrature", err < 1e-6, f"err = {err:.2e}")


# ---------------------------------------------------------------------------
# 4. gradient bound rates
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("model_name,alpha", [("brownian", 2.0), ("stable", 1.5)])
@pytest.mark.parametrize("p", [2.0, 4.0])
@pytest.mark.parametrize("order", [1, 2])
def test_criterion_4_gradient_rates(model_name, alpha, p, order):
    model = lv.brownian(1) if model_name == "brownian" else lv.isotropic_stable(alpha, 1)
    geom = GridGeometry((40.0,), (2 ** 13,))
    ts = np.geomspace(1e-2, 1.0, 9)
    panel = bump_width_panel(geom, alpha, ts)
    rep = gradient_bound_probe(model, p, ts, panel, order=order)
    target = -order / alpha
    ok = abs(rep.slope - target) < 0.1
    assert report(
        4, f"gradient rate {model_name} p={p:g} k={order}", ok, f"slope = {rep.slope:.3f}, target = {target:.3f}"
    )


# ---------------------------------------------------------------------------
# 5. smoothing and strong continuity rates
# ---------------------------------------------------------------------------


def _rate_probe_setup(model, alpha, n_pow):
    geom = GridGeometry((40.0,), (2 ** n_pow,))
    k_eff = lv.symbol(model, [1.0]).real
    if alpha == 2.0:
        ts = np.geomspace(1e-4, 1e-2, 9)
    else:
        ts = np.geomspace(4.7e-5, 4.7e-3, 9)
    xs_min = (2 * ts.max() * k_eff) ** (-1 / alpha)
    xs_max = (2 * ts.min() * k_eff) ** (-1 / alpha)
    band = (xs_min / 4.0, min(4.0 * xs_max, 0.7 * math.pi / geom.dx[0]))
    return geom, ts, band


@pytest.mark.parametrize(
    "model_name,alpha,gamma,n_pow",
    [("brownian", 2.0, 1.0, 14), ("stable", 1.5, 1.2, 15)],
)
def test_criterion_5_smoothing_rates(model_name, alpha, gamma, n_pow):
    model = lv.brownian(1) if model_name == "brownian" else lv.isotropic_stable(alpha, 1)
    geom, ts, band = _rate_probe_setup(model, alpha, n_pow)
    f = rough_spectrum_function(geom, 0.0, band, seed=505)
    rep = smoothing_probe(model, 2.0, gamma, 0.0, ts, f)
    target = -gamma / alpha
    ok = abs(rep.slope - target) < 0.1
    assert report(5, f"smoothing rate {model_name} gamma={gamma:g}", ok, f"slope = {rep.slope:.3f}, target = {target:.3f}")


@pytest.mark.parametrize(
    "model_name,alpha,theta,n_pow",
    [
        ("brownian", 2.0, 0.5, 14),
        ("brownian", 2.0, 1.0, 14),
        ("stable", 1.5, 0.5, 15),
        ("stable", 1.5, 1.0, 15),
    ],
)
def test_criterion_5_continuity_rates(model_name, alpha, theta, n_pow):
    model = lv.brownian(1) if model_name == "brownian" else lv.isotropic_stable(alpha, 1)
    geom, ts, band = _rate_probe_setup(model, alpha, n_pow)
    f = rough_spectrum_function(geom, theta, band, seed=506)
    rep = strong_continuity_probe(model, 2.0, theta, ts, f)
    target = theta / alpha
    ok = abs(rep.slope - target) < 0.1
    assert report(
        5, f"continuity rate {model_name} theta={theta:g}", ok, f"slope = {rep.slope:.3f}, target = {target:.3f}"
    )


# ---------------------------------------------------------------------------
# 6. wasserstein engine
# ---------------------------------------------------------------------------


def test_criterion_6_wasserstein_engine():
    from levysde.measure import _transport_lp_cost

    rng = np.random.default_rng(606)
    worst_1d = 0.0
    for _ in range(100):
        n, m = rng.integers(2, 9), rng.integers(2, 9)
        mu = EmpiricalMeasure(rng.standard_normal((n, 1)))
        nu = EmpiricalMeasure(rng.standard_normal((m, 1)))
        theta = float(rng.uniform(1.0, 3.0))
        q = wasserstein_theta(mu, nu, theta)
        lp = _transport_lp_cost(mu.particles, mu.weight_vector(), nu.particles, nu.weight_vector(), theta) ** (
            1.0 / theta
        )
        worst_1d = max(worst_1d, abs(q - lp))
    ok1 = worst_1d < 1e-10

    worst_2d = 0.0
    for _ in range(30):
        x = rng.standard_normal((6, 2))
        y = rng.standard_normal((6, 2))
        got = wasserstein_theta(EmpiricalMeasure(x), EmpiricalMeasure(y), 2.0)
        best = min(
            np.mean(np.linalg.norm(x - y[list(perm)], axis=1) ** 2.0)
            for perm in itertools.permutations(range(6))
        ) ** 0.5
        worst_2d = max(worst_2d, abs(got - best))
    ok2 = worst_2d < 1e-10

    violations = 0
    for _ in range(100):
        d = int(rng.integers(1, 3))
        mu, nu, la = (EmpiricalMeasure(rng.standard_normal((int(rng.integers(2, 8)), d))) for _ in range(3))
        theta = float(rng.uniform(1.0, 2.5))
        if wasserstein_theta(mu, la, theta) > wasserstein_theta(mu, nu, theta) + wasserstein_theta(nu, la, theta) + 1e-9:
            violations += 1
    ok3 = violations == 0
    assert report(
        6, "wasserstein engine", ok1 and ok2 and ok3,
        f"1d-vs-LP = {worst_1d:.1e}, 2d-vs-bruteforce = {worst_2d:.1e}, triangle violations = {violations}",
    )


# ---------------------------------------------------------------------------
# 7 and 8. picard contraction and fixed-point consistency
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def picard_runs():
    runs = {}
    for name, model in [("brownian", lv.brownian(1)), ("stable", lv.isotropic_stable(1.5, 1))]:
        cfg = SolverConfig(dt=1.0 / 512, horizon=1.0, particles=10_000, theta=1.0, seed=707)
        rng = np.random.default_rng(17)
        init = EmpiricalMeasure(rng.standard_normal((cfg.particles, 1)) + 0.5)
        start = time.time()
        state = picard_iterate(model, toward_mean_drift(1.0), init, cfg, tol=1e-2, max_iter=10)
        elapsed = time.time() - start
        runs[name] = (model, cfg, init, state, elapsed)
    return runs


def test_criterion_7_picard_contraction(picard_runs):
    all_ok = True
    for name, (model, cfg, init, state, elapsed) in picard_runs.items():
        means = np.array([state.path.states[k][:, 0].mean() for k in range(0, len(state.path.times), 32)])
        stds = np.array([state.path.states[k][:, 0].std() for k in range(0, len(state.path.times), 32)])
        mean_ok = bool(np.all(np.abs(means - 0.5) <= 3.0 * np.maximum(stds, 1e-9) / math.sqrt(cfg.particles)))
        ok = (
            state.converged
            and state.iteration <= 10
            and state.gap_history[-1] < 1e-2
            and 0 < state.contraction_estimate < 1
            and mean_ok
            and elapsed <= 300.0
        )
        all_ok &= ok
        report(
            7, f"picard contraction {name}", ok,
            f"iters = {state.iteration}, gap = {state.gap_history[-1]:.2e}, "
            f"eps = {state.contraction_estimate:.3f}, mean-ok = {mean_ok}, {elapsed:.0f}s",
        )
    assert all_ok


def test_criterion_8_fixed_point_consistency(picard_runs):
    all_ok = True
    for name, (model, cfg, init, state, _) in picard_runs.items():
        noise = presample_noise(model, cfg)
        redo = solve_frozen(model, toward_mean_drift(1.0), state.path, init, cfg, noise=noise)
        gap = max(
            wasserstein_theta(EmpiricalMeasure(redo.states[k]), EmpiricalMeasure(state.path.states[k]), 1.0)
            for k in range(len(redo.times))
        )
        ok = gap < 2.0 * 1e-2
        all_ok &= ok
        report(8, f"fixed point consistency {name}", ok, f"sup gap = {gap:.2e} < 2 tol")
    assert all_ok


# ---------------------------------------------------------------------------
# 9. mollification
# ---------------------------------------------------------------------------


def test_criterion_9_mollification():
    n = 8
    pointwise = mollify_drift_pointwise(sign_drift(), n)
    xs = np.linspace(-2.0, 2.0, 101)
    closed_form = special.erf(xs * n / math.sqrt(2.0))
    err = float(np.abs(pointwise(0.0, xs[:, None])[:, 0] - closed_form).max())
    ok_closed = err < 1e-8

    spec = mollify_drift(sign_drift(), n)
    rng = np.random.default_rng(909)
    envelope_ok = True
    for _ in range(10):
        x = rng.uniform(-4, 4, (1000, 1))
        t = float(rng.uniform(0, 1))
        vals = spec.evaluate(t, x, None)
        envelope_ok &= bool(np.abs(vals).max() <= 1.0)

    ks = [mollify_drift(sign_drift(), m).lipschitz_modulus(0.0) for m in (4, 8, 16, 32)]
    ok_lip = all(np.isfinite(ks)) and all(a < b for a, b in zip(ks, ks[1:]))
    ok = ok_closed and envelope_ok and ok_lip
    assert report(
        9, "mollification", ok,
        f"closed-form err = {err:.1e}, envelope = {envelope_ok}, K_n = {[f'{k:.1f}' for k in ks]}",
    )


# ---------------------------------------------------------------------------
# 10. krylov harness
# ---------------------------------------------------------------------------


def test_criterion_10_krylov_bounded_ratio():
    geom = GridGeometry((20.0,), (2048,))
    panel = standard_bump_panel(geom, 1.0, count=20, seed=10)
    all_ok = True
    for name, model in [("brownian", lv.brownian(1)), ("stable", lv.isotropic_stable(1.5, 1))]:
        cfg = SolverConfig(dt=1.0 / 256, horizon=1.0, particles=100_000, seed=1010)
        rep = krylov_ratio(model, zero_drift(), panel, cfg, p=4.0, q=10.0)
        ok = rep.gate_ok and rep.panel_max <= 10.0 * rep.panel_median
        all_ok &= ok
        report(
            10, f"krylov bounded ratio {name}", ok,
            f"max = {rep.panel_max:.3f}, median = {rep.panel_median:.3f}",
        )
    assert all_ok


def test_criterion_10_krylov_scaling_and_gate():
    geom = GridGeometry((20.0,), (2048,))
    panel = standard_bump_panel(geom, 1.0, count=5, seed=11)
    cfg = SolverConfig(dt=1.0 / 128, horizon=1.0, particles=2000, seed=1011)
    base = krylov_ratio(lv.brownian(1), zero_drift(), panel, cfg, p=2.0, q=2.0, enforce_gate=False)
    scaled = krylov_ratio(
        lv.brownian(1), zero_drift(), [f.scaled(8.0) for f in panel], cfg, p=2.0, q=2.0, enforce_gate=False
    )
    ok_scale = all(a.ratio == b.ratio for a, b in zip(base.panel, scaled.panel))

    rng = np.random.default_rng(1012)
    mismatches = 0
    checked = 0
    for _ in range(10_000):
        alpha = float(rng.uniform(1.01, 2.0))
        d = int(rng.integers(1, 6))
        p = float(rng.uniform(1.01, 50.0))
        q = float(rng.uniform(1.01, 50.0))
        margin = d / p + alpha / q - (alpha - 1.0)
        if abs(margin) < 1e-4:
            continue  # undecidable at the scan resolution
        checked += 1
        gammas = np.linspace(1.0, alpha, 2002)[1:-1]
        scan = bool(np.any((p > d / (gammas - 1.0)) & (q > alpha / (alpha - gammas))))
        if scan != lv.admissible_pq(alpha, d, p, q).admissible:
            mismatches += 1
    ok_gate = mismatches == 0
    assert report(
        10, "krylov scaling + gate oracle", ok_scale and ok_gate,
        f"bit-exact scaling = {ok_scale}, gate mismatches = {mismatches}/{checked}",
    )


# ---------------------------------------------------------------------------
# 11. CLI determinism
# ---------------------------------------------------------------------------


def test_criterion_11_cli_determinism(tmp_path):
    from levysde.cli import run

    overrides = ["solver.particles=128", "solver.dt=0.015625", 'model.kind="isotropic_stable"']
    out = tmp_path / "det"
    run("simulate", None, overrides=overrides, seed=4242, out_dir=str(out), workers=1)
    first = {p.name: p.read_bytes() for p in out.iterdir()}
    run("simulate", None, overrides=overrides, seed=4242, out_dir=str(out), workers=1)
    second = {p.name: p.read_bytes() for p in out.iterdir()}
    ok_rerun = first == second

    def strip_header(b):
        return b"".join(l for l in b.splitlines(keepends=True) if not l.startswith(b"#"))

    run("simulate", None, overrides=overrides, seed=4242, out_dir=str(tmp_path / "w8"), workers=8)
    third = {p.name: strip_header(p.read_bytes()) for p in (tmp_path / "w8").iterdir()}
    ok_workers = {k: strip_header(v) for k, v in first.items()} == third
    assert report(11, "cli determinism", ok_rerun and ok_workers, f"rerun = {ok_rerun}, workers = {ok_workers}")
