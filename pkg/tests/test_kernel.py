import math

import numpy as np
import pytest
from scipy import integrate

import levysde as lv
from levysde.errors import GridResolutionError, UnsupportedNormError
from levysde.kernel import (
    BesselNormSpec,
    GridFunction,
    GridGeometry,
    MixedNormSpec,
    bessel_norm,
    bump_width_panel,
    gaussian_bump,
    gradient_bound_probe,
    heat_kernel,
    lp_norm,
    mixed_norm,
    rough_spectrum_function,
    semigroup_apply,
    smoothing_probe,
    strong_continuity_probe,
)


def geom1(extent=20.0, n=4096):
    return GridGeometry((extent,), (n,))


class TestHeatKernel:
    def test_brownian_matches_gaussian(self):
        geom = geom1()
        pk = heat_kernel(lv.brownian(1), 1.0, geom)
        x = geom.axis(0)
        target = np.exp(-x ** 2 / 2.0) / math.sqrt(2.0 * math.pi)
        assert np.abs(pk.values - target).max() < 1e-6

    def test_normalisation_all_classes(self):
        cases = [
            (lv.brownian(1), geom1()),
            (lv.isotropic_stable(1.5, 1), GridGeometry((60.0,), (4096,))),
            (lv.tempered_stable(1.5, 1.0), GridGeometry((40.0,), (4096,))),
            (lv.truncated_stable(1.5), GridGeometry((30.0,), (4096,))),
            (lv.brownian(2), GridGeometry((15.0, 15.0), (256, 256))),
            (lv.cylindrical_stable(1.5, 2), GridGeometry((60.0, 60.0), (512, 512))),
        ]
        for model, geom in cases:
            pk = heat_kernel(model, 1.0, geom)
            assert pk.integral() == pytest.approx(1.0, abs=1e-6)

    def test_stable_value_at_origin_quadrature_oracle(self):
        # oracle: direct quadrature of the inversion integral at x = 0 with
        # the closed-form exponent K |xi|^alpha
        alpha, t = 1.5, 1.0
        model = lv.isotropic_stable(alpha, 1)
        k_iso = lv.symbol(model, [1.0]).real
        oracle, _ = integrate.quad(lambda r: math.exp(-t * k_iso * r ** alpha) / math.pi, 0, np.inf)
        geom = GridGeometry((320.0,), (2 ** 13,))
        pk = heat_kernel(model, t, geom)
        at_zero = pk.values[np.argmin(np.abs(geom.axis(0)))]
        assert at_zero == pytest.approx(oracle, abs=1e-6)

    def test_nonnegativity_up_to_ringing(self):
        for model in (lv.brownian(1), lv.isotropic_stable(1.5, 1)):
            pk = heat_kernel(model, 0.5, GridGeometry((60.0,), (4096,)))
            assert pk.values.min() >= -1e-8

    def test_nyquist_decay_enforced(self):
        with pytest.raises(GridResolutionError) as err:
            heat_kernel(lv.brownian(1), 1e-6, geom1(20.0, 16))
        assert err.value.residual > 1e-12

    def test_t_positive_required(self):
        with pytest.raises(ValueError):
            heat_kernel(lv.brownian(1), 0.0, geom1())


class TestSemigroup:
    def test_time_zero_identity(self):
        geom = geom1()
        f = gaussian_bump(geom, 0.5)
        out = semigroup_apply(lv.brownian(1), 0.0, f)
        assert np.array_equal(out.values, f.values)

    def test_constant_preserved(self):
        geom = geom1()
        f = GridFunction(geom, np.ones(geom.resolution))
        out = semigroup_apply(lv.isotropic_stable(1.5, 1), 0.7, f)
        assert np.abs(out.values - 1.0).max() < 1e-12

    def test_gaussian_bump_variance_adds(self):
        # closed-form convolution oracle: variance s bump -> variance s + t
        geom = geom1()
        s, t = 0.25, 0.6
        x = geom.axis(0)
        f = GridFunction(geom, np.exp(-x ** 2 / (2 * s)) / math.sqrt(2 * math.pi * s))
        out = semigroup_apply(lv.brownian(1), t, f)
        target = np.exp(-x ** 2 / (2 * (s + t))) / math.sqrt(2 * math.pi * (s + t))
        assert np.abs(out.values - target).max() < 1e-6

    def test_semigroup_property(self):
        geom = geom1(30.0, 2048)
        model = lv.isotropic_stable(1.5, 1)
        rng = np.random.default_rng(0)
        for _ in range(20):
            t, s = rng.uniform(0.05, 0.6, 2)
            f = rough_spectrum_function(geom, 1.0, (0.5, 20.0), seed=rng.integers(1 << 30))
            once = semigroup_apply(model, t + s, f)
            twice = semigroup_apply(model, t, semigroup_apply(model, s, f))
            denom = max(np.abs(once.values).max(), 1e-30)
            assert np.abs(once.values - twice.values).max() / denom < 1e-8

    def test_lp_contraction(self):
        geom = geom1(30.0, 2048)
        model = lv.brownian(1)
        f = rough_spectrum_function(geom, 0.5, (0.5, 30.0), seed=3)
        for p in (2.0, 4.0):
            before = lp_norm(f, p)
            after = lp_norm(semigroup_apply(model, 0.3, f), p)
            assert after <= before * (1.0 + 1e-9)

    def test_grid_mismatch_rejected(self):
        f = gaussian_bump(geom1(10.0, 512), 1.0)
        with pytest.raises(ValueError, match="dimension mismatch"):
            semigroup_apply(lv.brownian(2), 0.5, f)

    def test_plancherel_round_trip(self):
        geom = geom1(20.0, 1024)
        f = rough_spectrum_function(geom, 0.7, (0.5, 40.0), seed=4)
        back = np.fft.ifftn(np.fft.fftn(f.values)).real
        n1 = lp_norm(f, 2.0)
        n2 = lp_norm(GridFunction(geom, back), 2.0)
        assert abs(n1 - n2) / n1 < 1e-10


class TestBesselNorm:
    def test_beta_zero_is_plain_lp(self):
        geom = geom1(10.0, 512)
        f = gaussian_bump(geom, 1.0)
        for p in (1.5, 2.0, 4.0):
            assert bessel_norm(f, BesselNormSpec(0.0, p)) == lp_norm(f, p)

    def test_beta_two_matches_finite_differences(self):
        # oracle: (I - Laplacian) f by second-order central differences
        geom = GridGeometry((10.0,), (1024,))
        f = gaussian_bump(geom, 0.8)
        dx = geom.dx[0]
        lap = (np.roll(f.values, -1) - 2 * f.values + np.roll(f.values, 1)) / dx ** 2
        for p in (2.0, 3.0):
            fd = lp_norm(GridFunction(geom, f.values - lap), p)
            spectral = bessel_norm(f, BesselNormSpec(2.0, p))
            assert spectral == pytest.approx(fd, rel=0.02)

    def test_monotone_in_beta(self):
        geom = geom1(15.0, 1024)
        rng = np.random.default_rng(5)
        for _ in range(20):
            f = rough_spectrum_function(geom, 2.0, (0.3, 20.0), seed=rng.integers(1 << 30))
            betas = np.sort(rng.uniform(0.0, 3.0, 3))
            norms = [bessel_norm(f, BesselNormSpec(b, 2.0)) for b in betas]
            assert norms[0] <= norms[1] * (1 + 1e-12) <= norms[2] * (1 + 2e-12)

    def test_log_convexity_in_beta(self):
        geom = geom1(15.0, 1024)
        rng = np.random.default_rng(6)
        for _ in range(20):
            f = rough_spectrum_function(geom, 1.5, (0.3, 30.0), seed=rng.integers(1 << 30))
            beta2 = rng.uniform(0.5, 3.0)
            theta = rng.uniform(0.1, 0.9)
            mid = bessel_norm(f, BesselNormSpec(theta * beta2, 2.0))
            lo = bessel_norm(f, BesselNormSpec(0.0, 2.0))
            hi = bessel_norm(f, BesselNormSpec(beta2, 2.0))
            assert mid <= lo ** (1 - theta) * hi ** theta * (1 + 1e-6)

    def test_sup_norm_combination_rules(self):
        geom = geom1(10.0, 512)
        f = gaussian_bump(geom, 1.0)
        assert bessel_norm(f, BesselNormSpec(0.0, math.inf)) == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(UnsupportedNormError):
            bessel_norm(f, BesselNormSpec(1.0, math.inf))


class TestMixedNorm:
    def test_unit_box(self):
        geom = geom1(4.0, 256)
        x = geom.axis(0)
        slab = GridFunction(geom, ((x >= 0) & (x < 1)).astype(float))
        slices = [slab] * 64
        val = mixed_norm(slices, MixedNormSpec(2.0, 2.0, (0.0, 1.0)))
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_time_constant_factorisation(self):
        geom = geom1(6.0, 256)
        f = gaussian_bump(geom, 0.7)
        T = 2.5
        slices = [f] * 40
        for p, q in [(2.0, 3.0), (4.0, 1.5)]:
            val = mixed_norm(slices, MixedNormSpec(p, q, (0.0, T)))
            assert val == pytest.approx(T ** (1.0 / q) * lp_norm(f, p), rel=1e-12)

    def test_scalar_homogeneity(self):
        geom = geom1(6.0, 256)
        rng = np.random.default_rng(7)
        slices = [GridFunction(geom, rng.standard_normal(geom.resolution)) for _ in range(8)]
        spec = MixedNormSpec(3.0, 2.0, (0.0, 1.0))
        base = mixed_norm(slices, spec)
        scaled = mixed_norm([GridFunction(geom, -2.5 * s.values) for s in slices], spec)
        assert scaled == pytest.approx(2.5 * base, rel=1e-14)

    def test_sup_in_time(self):
        geom = geom1(6.0, 256)
        f = gaussian_bump(geom, 0.7)
        g = GridFunction(geom, 2.0 * f.values)
        val = mixed_norm([f, g], MixedNormSpec(2.0, math.inf, (0.0, 1.0)))
        assert val == pytest.approx(lp_norm(g, 2.0))

    def test_empty_slices_rejected(self):
        with pytest.raises(ValueError):
            mixed_norm([], MixedNormSpec(2.0, 2.0, (0.0, 1.0)))


class TestGradientProbe:
    def test_brownian_rate(self):
        geom = GridGeometry((40.0,), (2 ** 13,))
        ts = np.geomspace(1e-2, 1.0, 9)
        panel = bump_width_panel(geom, 2.0, ts)
        rep = gradient_bound_probe(lv.brownian(1), 2.0, ts, panel, order=1)
        assert rep.slope == pytest.approx(-0.5, abs=0.05)
        assert rep.passed

    def test_stable_rate_and_second_order(self):
        geom = GridGeometry((40.0,), (2 ** 13,))
        model = lv.isotropic_stable(1.5, 1)
        ts = np.geomspace(1e-2, 1.0, 9)
        panel = bump_width_panel(geom, 1.5, ts)
        rep1 = gradient_bound_probe(model, 4.0, ts, panel, order=1)
        assert rep1.slope >= -1.0 / 1.5 - 0.1
        rep2 = gradient_bound_probe(model, 2.0, ts, panel, order=2)
        assert rep2.slope >= -2.0 / 1.5 - 0.1

    def test_empty_panel_rejected(self):
        with pytest.raises(ValueError):
            gradient_bound_probe(lv.brownian(1), 2.0, np.geomspace(1e-2, 1, 5), [])


def spectral_norm_oracle(smoothness, band, gamma, k_eff, alpha, t, seed, geom):
    """Mode-sum oracle for || P_t f ||_{gamma, 2} of a band spectrum function,
    independent of the FFT route."""
    f = rough_spectrum_function(geom, smoothness, band, seed=seed)
    xi = geom.xi_axis(0)
    fhat = np.fft.fft(f.values)
    weight = (1.0 + xi ** 2) ** gamma * np.exp(-2.0 * t * k_eff * np.abs(xi) ** alpha)
    # discrete Plancherel: sum_j |ifft(H)_j|^2 = (1/n) sum_k |H_k|^2
    return math.sqrt(float(np.sum(weight * np.abs(fhat) ** 2)) * geom.dx[0] / len(xi))


class TestSmoothingProbe:
    def test_brownian_gamma_one(self):
        geom = GridGeometry((40.0,), (2 ** 14,))
        ts = np.geomspace(1e-4, 1e-2, 9)
        band = (2.5, 400.0)
        f = rough_spectrum_function(geom, 0.0, band, seed=7)
        rep = smoothing_probe(lv.brownian(1), 2.0, 1.0, 0.0, ts, f)
        assert rep.slope == pytest.approx(-0.5, abs=0.1)
        assert rep.passed
        # oracle agreement at one time point
        oracle = spectral_norm_oracle(0.0, band, 1.0, 0.5, 2.0, ts[4], 7, geom)
        assert rep.values[4] == pytest.approx(oracle, rel=1e-8)

    def test_gamma_zero_flat(self):
        # contraction only: a band that the window barely touches stays flat
        geom = GridGeometry((40.0,), (2 ** 12,))
        ts = np.geomspace(1e-3, 1e-1, 7)
        f = rough_spectrum_function(geom, 0.0, (0.1, 1.0), seed=8)
        rep = smoothing_probe(lv.brownian(1), 2.0, 0.0, 0.0, ts, f)
        assert rep.slope >= -0.05
        assert rep.passed

    def test_stable_rate(self):
        geom = GridGeometry((40.0,), (2 ** 15,))
        model = lv.isotropic_stable(1.5, 1)
        ts = np.geomspace(4.7e-5, 4.7e-3, 9)
        k_eff = lv.symbol(model, [1.0]).real
        xs_max = (2 * ts.min() * k_eff) ** (-1 / 1.5)
        xs_min = (2 * ts.max() * k_eff) ** (-1 / 1.5)
        band = (xs_min / 4.0, min(4.0 * xs_max, 0.7 * math.pi / geom.dx[0]))
        f = rough_spectrum_function(geom, 0.0, band, seed=9)
        rep = smoothing_probe(model, 2.0, 1.2, 0.0, ts, f)
        assert rep.slope == pytest.approx(-1.2 / 1.5, abs=0.1)


class TestContinuityProbe:
    def test_theta_zero_trivial(self):
        geom = GridGeometry((40.0,), (2 ** 12,))
        f = rough_spectrum_function(geom, 0.0, (1.0, 50.0), seed=10)
        rep = strong_continuity_probe(lv.brownian(1), 2.0, 0.0, np.geomspace(1e-3, 1e-1, 7), f)
        assert rep.passed

    def test_brownian_theta_one(self):
        geom = GridGeometry((40.0,), (2 ** 14,))
        ts = np.geomspace(1e-4, 1e-2, 9)
        f = rough_spectrum_function(geom, 1.0, (2.5, 400.0), seed=11)
        rep = strong_continuity_probe(lv.brownian(1), 2.0, 1.0, ts, f)
        assert rep.slope == pytest.approx(0.5, abs=0.05)

    def test_stable_theta_one(self):
        geom = GridGeometry((40.0,), (2 ** 15,))
        model = lv.isotropic_stable(1.5, 1)
        ts = np.geomspace(4.7e-5, 4.7e-3, 9)
        f = rough_spectrum_function(geom, 1.0, (2.5, 860.0), seed=12)
        rep = strong_continuity_probe(model, 2.0, 1.0, ts, f)
        assert rep.slope >= 1.0 / 1.5 - 0.1


class TestIO:
    def test_binary_round_trip(self, tmp_path):
        geom = GridGeometry((5.0, 7.0), (32, 64))
        rng = np.random.default_rng(13)
        f = GridFunction(geom, rng.standard_normal(geom.resolution))
        path = tmp_path / "grid.bin"
        lv.save_grid_binary(f, str(path))
        g = lv.load_grid_binary(str(path))
        assert g.geometry == geom
        assert np.array_equal(g.values, f.values)

    def test_csv_export_d1(self, tmp_path):
        geom = GridGeometry((5.0,), (32,))
        f = gaussian_bump(geom, 1.0)
        path = tmp_path / "grid.csv"
        lv.save_grid_csv(f, str(path))
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        assert np.allclose(data[:, 0], geom.axis(0))
        assert np.allclose(data[:, 1], f.values)

    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            GridGeometry((5.0,), (48,))  # not a power of two
        with pytest.raises(ValueError):
            GridGeometry((0.0,), (32,))
        with pytest.raises(ValueError):
            GridGeometry((5.0,), (8,))  # below the minimum resolution
