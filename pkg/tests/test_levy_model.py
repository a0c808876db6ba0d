import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

import levysde as lv
from levysde.errors import GateError, ModelError
from levysde.levy_model import (
    SphericalMeasure,
    stable_radial_constant,
    zonal_alpha_moment,
)


def builtin_models():
    return [
        lv.brownian(1),
        lv.brownian(2),
        lv.isotropic_stable(1.5, 1),
        lv.isotropic_stable(1.5, 2),
        lv.cylindrical_stable(1.5, 2),
        lv.tempered_stable(1.5, 1.0),
        lv.truncated_stable(1.5),
        lv.superpose(lv.brownian(1), lv.isotropic_stable(1.5, 1)),
    ]


def radial_oracle(u, alpha):
    """Independent quadrature of int_0^inf (1 - cos(r u)) r^(-1-alpha) dr."""
    u = abs(u)
    if u == 0.0:
        return 0.0
    # stable form of 1 - cos avoids cancellation against the r^(-1-alpha) blowup
    inner, _ = integrate.quad(lambda r: 2.0 * math.sin(0.5 * r * u) ** 2 * r ** (-1 - alpha), 0, 1, epsabs=1e-13)
    mass, _ = integrate.quad(lambda r: r ** (-1 - alpha), 1, np.inf, epsabs=1e-13)
    osc, _ = integrate.quad(lambda r: r ** (-1 - alpha), 1, np.inf, weight="cos", wvar=u, limit=200, epsabs=1e-12)
    return inner + mass - osc


class TestSymbol:
    def test_brownian_quadratic_form(self):
        val = lv.symbol(lv.brownian(2), [1.0, 0.0])
        assert val == pytest.approx(0.5, abs=1e-14)
        assert val.imag == 0.0

    def test_zero_frequency_vanishes(self):
        for model in builtin_models():
            assert lv.symbol(model, np.zeros(model.dim)) == 0.0

    def test_isotropic_d1_alpha_homogeneity(self):
        # oracle: direct quadrature of the radial integral at both frequencies
        alpha = 1.5
        o1 = 2.0 * radial_oracle(1.0, alpha)
        o2 = 2.0 * radial_oracle(2.0, alpha)
        assert o2 / o1 == pytest.approx(2.0 ** alpha, rel=1e-9)
        model = lv.isotropic_stable(alpha, 1)
        s1 = lv.symbol(model, [1.0]).real
        s2 = lv.symbol(model, [2.0]).real
        assert s1 == pytest.approx(o1, rel=1e-8)
        assert s2 == pytest.approx(o2, rel=1e-8)
        assert s2 / s1 == pytest.approx(2.0 ** alpha, rel=1e-8)

    def test_homogeneity_for_pure_stable_classes(self):
        rng = np.random.default_rng(0)
        for model in [lv.isotropic_stable(1.3, 2), lv.cylindrical_stable(1.7, 2)]:
            xi = rng.standard_normal((50, model.dim))
            v1 = lv.symbol_grid(model, xi)
            v2 = lv.symbol_grid(model, 3.0 * xi)
            assert np.allclose(v2, 3.0 ** model.jump_spec.alpha * v1, rtol=1e-10)

    def test_symmetric_models_have_real_symbol(self):
        rng = np.random.default_rng(1)
        for model in builtin_models():
            for _ in range(5):
                xi = rng.standard_normal(model.dim)
                val = lv.symbol(model, xi)
                assert abs(val.imag) < 1e-8

    def test_real_part_nonnegative_bulk(self):
        rng = np.random.default_rng(2)
        for model in builtin_models():
            xi = rng.standard_normal((1000, model.dim)) * rng.uniform(0.1, 20, (1000, 1))
            vals = lv.symbol_grid(model, xi)
            assert vals.min() >= 0.0

    def test_superposition_additivity(self):
        bm, iso = lv.brownian(1), lv.isotropic_stable(1.5, 1)
        sup = lv.superpose(bm, iso)
        rng = np.random.default_rng(3)
        for _ in range(10):
            xi = rng.standard_normal(1) * 3
            total = lv.symbol(sup, xi)
            parts = lv.symbol(bm, xi) + lv.symbol(iso, xi)
            assert total == pytest.approx(parts, rel=1e-12)
        assert sup.alpha == 2.0

    def test_grid_matches_quadrature_reference(self):
        rng = np.random.default_rng(4)
        for model in builtin_models():
            xi = rng.standard_normal((6, model.dim)) * rng.uniform(0.2, 5.0, (6, 1))
            grid_vals = lv.symbol_grid(model, xi)
            quad_vals = np.array([lv.symbol(model, x).real for x in xi])
            assert np.allclose(grid_vals, quad_vals, rtol=1e-6, atol=1e-9)

    def test_nonsymmetric_atoms_give_complex_symbol(self):
        sph = SphericalMeasure.from_atoms([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        model = lv.general_stable(1.5, sph)
        val = lv.symbol(model, [2.0, 1.0])
        assert abs(val.imag) > 1e-3
        assert val.real > 0
        with pytest.raises(ModelError):
            lv.symbol_grid(model, np.array([[1.0, 0.0]]))

    def test_non_unit_atom_rejected(self):
        with pytest.raises(ModelError):
            SphericalMeasure.from_atoms([[1.0, 1.0]], [1.0])

    def test_non_finite_frequency_rejected(self):
        with pytest.raises(ValueError):
            lv.symbol(lv.brownian(1), [np.inf])

    def test_general_stable_atomic_scale(self):
        # pair of atoms along e1 with weight w: Phi = 2 w c_alpha |xi_1|^alpha
        alpha, w = 1.4, 0.7
        sph = SphericalMeasure.from_atoms(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [w, w, 1.0, 1.0]
        )
        model = lv.general_stable(alpha, sph)
        c = stable_radial_constant(alpha)
        got = lv.symbol(model, [2.0, 0.0]).real
        assert got == pytest.approx(2.0 * w * c * 2.0 ** alpha, rel=1e-8)


class TestModelValidation:
    def test_gaussian_cov_dichotomy(self):
        with pytest.raises(ModelError):
            lv.LevyModel(dim=2, gaussian_cov=np.diag([1.0, 0.0]))
        # exact zero collapses to a pure-jump requirement
        with pytest.raises(ModelError):
            lv.LevyModel(dim=2, gaussian_cov=np.zeros((2, 2)))

    def test_alpha_range_enforced(self):
        with pytest.raises(ModelError):
            lv.isotropic_stable(1.0, 1)
        with pytest.raises(ModelError):
            lv.isotropic_stable(2.0, 1)

    def test_sandwich_constants_positive(self):
        with pytest.raises(ModelError):
            lv.RadialModulator.tempered(-1.0)

    def test_alpha_of_superposition_is_max(self):
        s = lv.superpose(lv.isotropic_stable(1.2, 1), lv.isotropic_stable(1.8, 1))
        assert s.alpha == 1.8


class TestLowerBound:
    def test_isotropic_positive(self):
        rep = lv.symbol_lower_bound_check(lv.isotropic_stable(1.5, 1), samples=100, seed=0)
        assert rep.passed and rep.min_ratio > 0

    def test_cylindrical_positive(self):
        rep = lv.symbol_lower_bound_check(lv.cylindrical_stable(1.5, 2), samples=100, seed=1)
        assert rep.passed and rep.min_ratio > 0

    def test_degenerate_spherical_measure_fails_span_check(self):
        with pytest.raises(ModelError):
            lv.general_stable(1.5, SphericalMeasure.from_atoms([[1.0, 0.0]], [1.0]))


def admissible_oracle(alpha, d, p, q, grid=4000):
    """Dense gamma-grid scan of the two inequalities."""
    gammas = np.linspace(1.0, alpha, grid + 2)[1:-1]
    ok = (p > d / (gammas - 1.0)) & (q > alpha / (alpha - gammas))
    return bool(ok.any())


class TestAdmissiblePQ:
    def test_reference_window(self):
        res = lv.admissible_pq(2.0, 1, 4.0, 4.0)
        assert res.admissible
        assert res.gamma_window == pytest.approx((1.25, 1.5))

    def test_inadmissible_case(self):
        res = lv.admissible_pq(1.2, 3, 3.0, 2.0)
        assert not res.admissible and res.gamma_window is None

    def test_large_pq_limit(self):
        for alpha in (1.1, 1.5, 2.0):
            res = lv.admissible_pq(alpha, 3, 1e9, 1e9)
            assert res.admissible
            lo, hi = res.gamma_window
            assert lo == pytest.approx(1.0, abs=1e-8) and hi == pytest.approx(alpha, abs=1e-7)

    @settings(max_examples=300, derandomize=True, deadline=None)
    @given(
        alpha=st.floats(1.01, 2.0),
        d=st.integers(1, 5),
        p=st.floats(1.01, 50.0),
        q=st.floats(1.01, 50.0),
    )
    def test_matches_gamma_scan(self, alpha, d, p, q):
        res = lv.admissible_pq(alpha, d, p, q)
        # exclude near-boundary cases where the finite scan is undecidable
        margin = d / p + alpha / q - (alpha - 1.0)
        if abs(margin) < 1e-3:
            return
        assert res.admissible == admissible_oracle(alpha, d, p, q)
        if res.admissible:
            lo, hi = res.gamma_window
            mid = 0.5 * (lo + hi)
            assert p > d / (mid - 1.0) and q > alpha / (alpha - mid)


class TestKrylovGate:
    def test_examples(self):
        assert lv.krylov_pq_check(2.0, 1, 2.0, 5.0) is True
        # p = 4 is not strictly above d/(alpha-1) = 4
        assert lv.krylov_pq_check(1.5, 2, 4.0, 10.0) is False

    def test_boundary_excluded(self):
        alpha, d = 1.5, 1
        p_star = d / (alpha - 1.0)
        assert lv.krylov_pq_check(alpha, d, p_star, 100.0) is False
        # above the p boundary the q bound is p*alpha/(p*(alpha-1)-d)
        assert lv.krylov_pq_check(alpha, d, 3.0, 9.0) is False
        assert lv.krylov_pq_check(alpha, d, 3.0, 9.0 + 1e-9) is True

    def test_gate_error_names_inequality(self):
        from levysde.levy_model import krylov_gate_or_raise

        with pytest.raises(GateError, match="p > d/"):
            krylov_gate_or_raise(1.5, 1, 1.5, 100.0)
        with pytest.raises(GateError, match="q >"):
            krylov_gate_or_raise(1.5, 1, 4.0, 2.0)


class TestConstants:
    def test_stable_radial_constant_against_quadrature(self):
        for alpha in (1.2, 1.5, 1.9):
            assert stable_radial_constant(alpha) == pytest.approx(radial_oracle(1.0, alpha), rel=1e-9)

    def test_zonal_moment_against_quadrature(self):
        alpha = 1.5
        val, _ = integrate.quad(lambda th: abs(math.cos(th)) ** alpha, 0, 2 * math.pi)
        assert zonal_alpha_moment(2, alpha) == pytest.approx(val, rel=1e-10)
