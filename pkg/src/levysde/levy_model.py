"""Levy noise models: generating triplets, jump measures, and symbol evaluation.

A model is described by a Gaussian covariance matrix together with a jump
measure of stable type,

    nu(D) = int_0^inf int_S r^{-1-alpha} rho(r) 1_D(r e) mu(de) dr,

where ``mu`` is a finite measure on the unit sphere (atomic or uniform) and
``rho`` is a bounded radial modulator.  The characteristic exponent is
normalised so that  E exp(i<xi, L_t>) = exp(-t * symbol(model, xi)), hence
``Re symbol >= 0`` and ``symbol(0) = 0``.

Two evaluation routes are provided: :func:`symbol` (adaptive quadrature,
the reference) and :func:`symbol_grid` (vectorised closed / semi-closed
forms used by the FFT and sampling machinery).  They are tested against
each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .errors import GateError, ModelError, NumericalError

__all__ = [
    "SphericalMeasure",
    "RadialModulator",
    "JumpSpec",
    "LevyModel",
    "brownian",
    "isotropic_stable",
    "cylindrical_stable",
    "general_stable",
    "stable_type",
    "tempered_stable",
    "truncated_stable",
    "superpose",
    "symbol",
    "symbol_grid",
    "symbol_lower_bound_check",
    "admissible_pq",
    "krylov_pq_check",
    "stable_radial_constant",
    "sphere_surface_area",
    "zonal_alpha_moment",
]

QUAD_RTOL = 1e-8  # relative tolerance for reference quadrature
UNIT_ATOM_TOL = 1e-12


def stable_radial_constant(alpha: float) -> float:
    """c_alpha = int_0^inf (1 - cos u) u^(-1-alpha) du, for alpha in (0, 2)."""
    return -special.gamma(-alpha) * math.cos(math.pi * alpha / 2.0)


def sphere_surface_area(d: int) -> float:
    """Surface measure of the unit sphere in R^d (2 for d = 1)."""
    if d == 1:
        return 2.0
    return 2.0 * math.pi ** (d / 2.0) / special.gamma(d / 2.0)


def zonal_alpha_moment(d: int, alpha: float) -> float:
    """int_S |<e, s>|^alpha sigma(ds) over the full surface measure sigma."""
    if d == 1:
        return 2.0
    # pushforward of sigma under s -> <e, s> has density |S^{d-2}| (1-t^2)^((d-3)/2)
    return sphere_surface_area(d - 1) * special.beta((alpha + 1) / 2.0, (d - 1) / 2.0)


# ---------------------------------------------------------------------------
# spherical measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphericalMeasure:
    """Finite measure on the unit sphere: weighted atoms, or the uniform
    surface measure (total mass = surface area).

    For the uniform variant ``atoms`` is None and ``dim`` fixes the sphere.
    """

    dim: int
    atoms: np.ndarray | None = None  # (m, d) unit vectors
    weights: np.ndarray | None = None  # (m,) positive

    def __post_init__(self):
        if self.dim < 1:
            raise ModelError("spherical measure needs dim >= 1")
        if self.atoms is not None:
            atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
            weights = np.asarray(self.weights, dtype=float)
            if atoms.shape[1] != self.dim or atoms.shape[0] != weights.shape[0]:
                raise ModelError("atom/weight shapes inconsistent with dim")
            norms = np.linalg.norm(atoms, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_ATOM_TOL):
                worst = float(np.abs(norms - 1.0).max())
                raise ModelError(f"atom vectors must be unit within {UNIT_ATOM_TOL:g} (off by {worst:.3e})")
            if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
                raise ModelError("atom weights must be finite and > 0")
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, dim: int) -> "SphericalMeasure":
        if dim == 1:
            return cls.from_atoms([[1.0], [-1.0]], [1.0, 1.0])
        return cls(dim=dim)

    @classmethod
    def from_atoms(cls, vectors, weights) -> "SphericalMeasure":
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        return cls(dim=vectors.shape[1], atoms=vectors, weights=np.asarray(weights, dtype=float))

    @property
    def is_uniform(self) -> bool:
        return self.atoms is None

    @property
    def total_weight(self) -> float:
        if self.is_uniform:
            return sphere_surface_area(self.dim)
        return float(self.weights.sum())

    def spans_space(self) -> bool:
        """Whether the support spans R^d (the non-degeneracy condition)."""
        if self.is_uniform:
            return True
        return np.linalg.matrix_rank(self.atoms, tol=1e-10) == self.dim

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the measure is invariant under s -> -s."""
        if self.is_uniform:
            return True
        return self._pair_up(tol) is not None

    def symmetric_pairs(self, tol: float = 1e-12):
        """Return [(direction, weight)] with each (e, -e) pair listed once.

        Raises ModelError when the measure is not symmetric.
        """
        pairs = self._pair_up(tol)
        if pairs is None:
            raise ModelError("spherical measure is not symmetric")
        return pairs

    def _pair_up(self, tol):
        atoms, weights = self.atoms, self.weights
        m = atoms.shape[0]
        used = np.zeros(m, dtype=bool)
        pairs = []
        for i in range(m):
            if used[i]:
                continue
            match = -1
            for j in range(m):
                if j == i or used[j]:
                    continue
                if np.linalg.norm(atoms[i] + atoms[j]) <= 1e-9 and abs(weights[i] - weights[j]) <= tol * max(
                    1.0, weights[i]
                ):
                    match = j
                    break
            if match < 0:
                return None
            used[i] = used[match] = True
            pairs.append((atoms[i].copy(), float(weights[i])))
        return pairs


# ---------------------------------------------------------------------------
# radial modulators  rho(r)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialModulator:
    """Radial factor rho with the sandwich 1_[0,C](r) <= C1 rho(r) <= C2.

    ``tag`` selects fast closed-form evaluation paths:
    "one" (rho = 1), "exp" (rho = exp(-c r)), "indicator" (rho = c 1_[0,cut]),
    or "custom" (arbitrary callable, quadrature fallback).
    """

    tag: str
    fn: Callable[[np.ndarray], np.ndarray]
    C: float
    C1: float
    C2: float
    rho_max: float
    param: float = 0.0
    cut: float = math.inf

    def __post_init__(self):
        if min(self.C, self.C1, self.C2) <= 0:
            raise ModelError("sandwich constants C, C1, C2 must be > 0")

    @classmethod
    def unit(cls) -> "RadialModulator":
        return cls(tag="one", fn=lambda r: np.ones_like(np.asarray(r, dtype=float)), C=1.0, C1=1.0, C2=1.0, rho_max=1.0)

    @classmethod
    def tempered(cls, c: float) -> "RadialModulator":
        if c <= 0:
            raise ModelError("tempering rate must be > 0")
        return cls(tag="exp", fn=lambda r: np.exp(-c * np.asarray(r, dtype=float)), C=1.0, C1=math.exp(c), C2=math.exp(c), rho_max=1.0, param=c)

    @classmethod
    def truncated(cls, c: float = 1.0, cut: float = 1.0) -> "RadialModulator":
        if c <= 0 or cut <= 0:
            raise ModelError("truncation constants must be > 0")
        return cls(
            tag="indicator",
            fn=lambda r: c * (np.asarray(r, dtype=float) <= cut),
            C=cut,
            C1=1.0 / c,
            C2=1.0,
            rho_max=c,
            param=c,
            cut=cut,
        )

    @classmethod
    def custom(cls, fn, C: float, C1: float, C2: float, rho_max: float) -> "RadialModulator":
        return cls(tag="custom", fn=fn, C=C, C1=C1, C2=C2, rho_max=rho_max)

    def check_sandwich(self, samples: int = 256) -> None:
        """Spot-check 1_[0,C](r) <= C1 rho(r) <= C2 on a log grid (boundary
        points excluded; indicator modulators are discontinuous there)."""
        r = np.geomspace(1e-6, 10.0 * max(self.C, 1.0), samples)
        r = r[np.abs(r - self.C) > 1e-9]
        if math.isfinite(self.cut):
            r = r[np.abs(r - self.cut) > 1e-9]
        vals = self.C1 * np.asarray(self.fn(r), dtype=float)
        lower = (r <= self.C).astype(float)
        if np.any(vals < lower - 1e-12) or np.any(vals > self.C2 + 1e-12):
            raise ModelError("radial modulator violates its sandwich constants")

    # --- moments of r below a cutoff, int_0^eps r^k r^(-1-alpha) rho(r) dr ---

    def moment_below(self, k: int, eps: float, alpha: float) -> float:
        """int_0^eps r^(k-1-alpha) rho(r) dr for k > alpha."""
        e = k - alpha
        if self.tag == "one":
            return eps ** e / e
        if self.tag == "exp":
            c = self.param
            return special.gammainc(e, c * eps) * special.gamma(e) / c ** e
        if self.tag == "indicator":
            return self.param * min(eps, self.cut) ** e / e
        val, err = integrate.quad(lambda r: r ** (e - 1.0) * float(self.fn(r)), 0.0, eps)
        return val

    def envelope_rate(self, eps: float, alpha: float) -> float:
        """Proposal intensity of the dominating pure-stable tail above eps."""
        return self.rho_max * eps ** (-alpha) / alpha


# ---------------------------------------------------------------------------
# jump spec and model
# ---------------------------------------------------------------------------

_JUMP_KINDS = ("isotropic", "cylindrical", "general", "stable_type", "tempered", "truncated")


@dataclass(frozen=True)
class JumpSpec:
    """Stable-type jump measure: radial exponent, spherical measure, modulator."""

    kind: str
    alpha: float
    spherical: SphericalMeasure
    rho: RadialModulator = field(default_factory=RadialModulator.unit)

    def __post_init__(self):
        if self.kind not in _JUMP_KINDS:
            raise ModelError(f"unknown jump kind {self.kind!r}")
        if not (1.0 < self.alpha < 2.0):
            raise ModelError("jump index alpha must lie in (1, 2)")
        if not self.spherical.spans_space():
            raise ModelError("spherical measure is degenerate: support does not span R^d")
        self.rho.check_sandwich()

    @property
    def dim(self) -> int:
        return self.spherical.dim

    @property
    def exactly_samplable(self) -> bool:
        """Pure stable measures (rho = 1) admit exact increment sampling."""
        return self.rho.tag == "one"


@dataclass(frozen=True)
class LevyModel:
    """Generating triplet (A, nu, 0) plus the index alpha driving all rates.

    Either a Gaussian covariance, a jump spec, or both must be present; a
    superposition stores the independent component models instead.
    """

    dim: int
    gaussian_cov: np.ndarray | None = None
    jump_spec: JumpSpec | None = None
    components: tuple["LevyModel", ...] = ()
    label: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ModelError("dim must be >= 1")
        if self.components:
            if self.gaussian_cov is not None or self.jump_spec is not None:
                raise ModelError("superposition carries no parts of its own")
            for c in self.components:
                if c.dim != self.dim:
                    raise ModelError("all superposed components must share dim")
            return
        cov = self.gaussian_cov
        if cov is not None:
            cov = np.asarray(cov, dtype=float)
            if cov.shape != (self.dim, self.dim):
                raise ModelError("gaussian_cov must be d x d")
            if not np.allclose(cov, cov.T, atol=1e-12):
                raise ModelError("gaussian_cov must be symmetric")
            if np.allclose(cov, 0.0):
                cov = None
            else:
                eig = np.linalg.eigvalsh(cov)
                if eig.min() <= 0:
                    raise ModelError("gaussian_cov must be exactly 0 or positive definite")
            object.__setattr__(self, "gaussian_cov", cov)
        if self.gaussian_cov is None and self.jump_spec is None:
            raise ModelError("model needs a Gaussian part or a jump part")
        if self.jump_spec is not None and self.jump_spec.dim != self.dim:
            raise ModelError("jump spec dimension mismatch")

    @property
    def alpha(self) -> float:
        """Index in (1, 2]: 2 for any model with a Gaussian part, else the
        jump exponent; max over components for a superposition."""
        if self.components:
            return max(c.alpha for c in self.components)
        if self.gaussian_cov is not None:
            return 2.0
        return self.jump_spec.alpha

    @property
    def is_symmetric(self) -> bool:
        if self.components:
            return all(c.is_symmetric for c in self.components)
        if self.jump_spec is not None and not self.jump_spec.spherical.is_symmetric():
            return False
        return True

    def parts(self) -> list["LevyModel"]:
        """Flatten a superposition into primitive models."""
        if not self.components:
            return [self]
        out = []
        for c in self.components:
            out.extend(c.parts())
        return out


# --- factories -------------------------------------------------------------


def brownian(dim: int = 1, cov: np.ndarray | None = None) -> LevyModel:
    cov = np.eye(dim) if cov is None else np.asarray(cov, dtype=float)
    return LevyModel(dim=dim, gaussian_cov=cov, label="brownian")


def isotropic_stable(alpha: float, dim: int = 1) -> LevyModel:
    spec = JumpSpec(kind="isotropic", alpha=alpha, spherical=SphericalMeasure.uniform(dim))
    return LevyModel(dim=dim, jump_spec=spec, label=f"isotropic_stable({alpha})")


def cylindrical_stable(alpha: float, dim: int) -> LevyModel:
    eye = np.eye(dim)
    atoms = np.vstack([eye, -eye])
    sph = SphericalMeasure.from_atoms(atoms, np.ones(2 * dim))
    spec = JumpSpec(kind="cylindrical", alpha=alpha, spherical=sph)
    return LevyModel(dim=dim, jump_spec=spec, label=f"cylindrical_stable({alpha})")


def general_stable(alpha: float, spherical: SphericalMeasure) -> LevyModel:
    spec = JumpSpec(kind="general", alpha=alpha, spherical=spherical)
    return LevyModel(dim=spherical.dim, jump_spec=spec, label=f"general_stable({alpha})")


def stable_type(alpha: float, spherical: SphericalMeasure, rho: RadialModulator) -> LevyModel:
    spec = JumpSpec(kind="stable_type", alpha=alpha, spherical=spherical, rho=rho)
    return LevyModel(dim=spherical.dim, jump_spec=spec, label=f"stable_type({alpha})")


def tempered_stable(alpha: float, c: float, dim: int = 1) -> LevyModel:
    spec = JumpSpec(kind="tempered", alpha=alpha, spherical=SphericalMeasure.uniform(dim), rho=RadialModulator.tempered(c))
    return LevyModel(dim=dim, jump_spec=spec, label=f"tempered_stable({alpha},c={c})")


def truncated_stable(alpha: float, c: float = 1.0, dim: int = 1) -> LevyModel:
    spec = JumpSpec(kind="truncated", alpha=alpha, spherical=SphericalMeasure.uniform(dim), rho=RadialModulator.truncated(c))
    return LevyModel(dim=dim, jump_spec=spec, label=f"truncated_stable({alpha},c={c})")


def superpose(*models: LevyModel, label: str = "") -> LevyModel:
    if len(models) < 2:
        raise ModelError("superposition needs at least two components")
    return LevyModel(dim=models[0].dim, components=tuple(models), label=label or "superposition")


# ---------------------------------------------------------------------------
# symbol evaluation: adaptive-quadrature reference
# ---------------------------------------------------------------------------


def _quad_checked(fn, a, b, what, limit_override: int = 300, **kw) -> float:
    val, err = integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-10, limit=limit_override, **kw)
    if err > max(QUAD_RTOL * abs(val), 1e-9):
        raise NumericalError(f"quadrature for {what} did not converge (residual {err:.2e})", residual=err)
    return val


def _tail_cos_moment(alpha: float) -> float:
    """int_1^inf cos(v) v^(-1-alpha) dv (cached; stable QAWF regime)."""
    key = round(alpha, 12)
    if key not in _TAIL_COS_CACHE:
        val, err = integrate.quad(lambda v: v ** (-1.0 - alpha), 1.0, np.inf, weight="cos", wvar=1.0, epsabs=1e-13, limit=300)
        if err > 1e-10:
            raise NumericalError(f"tail cosine moment did not converge (residual {err:.2e})", residual=err)
        _TAIL_COS_CACHE[key] = val
    return _TAIL_COS_CACHE[key]


_TAIL_COS_CACHE: dict = {}


def _tail_sin_moment(alpha: float) -> float:
    """int_1^inf sin(v) v^(-1-alpha) dv (cached)."""
    key = round(alpha, 12)
    if key not in _TAIL_SIN_CACHE:
        val, err = integrate.quad(lambda v: v ** (-1.0 - alpha), 1.0, np.inf, weight="sin", wvar=1.0, epsabs=1e-13, limit=300)
        if err > 1e-10:
            raise NumericalError(f"tail sine moment did not converge (residual {err:.2e})", residual=err)
        _TAIL_SIN_CACHE[key] = val
    return _TAIL_SIN_CACHE[key]


_TAIL_SIN_CACHE: dict = {}


def _radial_real_quad(u: float, rho: RadialModulator, alpha: float) -> float:
    """int_0^inf (1 - cos(r u)) r^(-1-alpha) rho(r) dr, split at r = 1.

    The oscillatory tail uses QAWF only when the cycles are short (u >= 2);
    at low frequency the tail is evaluated by substitution (pure stable) or
    by plain adaptive quadrature against the decaying modulator.
    """
    u = abs(u)
    if u == 0.0:
        return 0.0
    fn = rho.fn
    # inner piece in stable 2 sin^2 form (avoids cancellation near r = 0)
    inner = _quad_checked(lambda r: 2.0 * math.sin(0.5 * r * u) ** 2 * r ** (-1.0 - alpha) * float(fn(r)), 0.0, 1.0, "inner radial")
    top = rho.cut if math.isfinite(rho.cut) else math.inf
    if top <= 1.0:
        return inner
    if math.isfinite(top):
        outer = _quad_checked(
            lambda r: 2.0 * math.sin(0.5 * r * u) ** 2 * r ** (-1.0 - alpha) * float(fn(r)), 1.0, top,
            "outer radial", limit_override=400)
        return inner + outer
    mass = _quad_checked(lambda r: r ** (-1.0 - alpha) * float(fn(r)), 1.0, np.inf, "outer mass")
    if u >= 2.0:
        osc, err = integrate.quad(lambda r: r ** (-1.0 - alpha) * float(fn(r)), 1.0, np.inf, weight="cos", wvar=u, epsabs=1e-12, limit=300)
        if err > max(QUAD_RTOL * abs(mass), 1e-9):
            raise NumericalError(f"oscillatory tail quadrature did not converge (residual {err:.2e})", residual=err)
        return inner + mass - osc
    if rho.tag == "one":
        # int_1^inf cos(ru) r^(-1-a) dr = u^a int_u^inf cos(v) v^(-1-a) dv
        head = _quad_checked(lambda v: math.cos(v) * v ** (-1.0 - alpha), u, 1.0, "substituted tail head")
        osc = u ** alpha * (head + _tail_cos_moment(alpha))
        return inner + mass - osc
    # decaying modulator, slow oscillation: direct adaptive quadrature
    outer = _quad_checked(
        lambda r: 2.0 * math.sin(0.5 * r * u) ** 2 * r ** (-1.0 - alpha) * float(fn(r)), 1.0, np.inf,
        "outer radial", limit_override=400)
    return inner + outer


def _sin_minus_linear(x: float) -> float:
    if abs(x) < 1e-4:
        return -(x ** 3) / 6.0 * (1.0 - x * x / 20.0)
    return math.sin(x) - x


def _radial_imag_quad(u: float, rho: RadialModulator, alpha: float) -> float:
    """int_0^inf (sin(r u) - r u 1_{r<=1}) r^(-1-alpha) rho(r) dr."""
    if u == 0.0:
        return 0.0
    sgn = 1.0 if u > 0 else -1.0
    u = abs(u)
    fn = rho.fn
    inner = _quad_checked(lambda r: _sin_minus_linear(r * u) * r ** (-1.0 - alpha) * float(fn(r)), 0.0, 1.0, "inner imag radial")
    top = rho.cut if math.isfinite(rho.cut) else math.inf
    if top <= 1.0:
        return sgn * inner
    if math.isfinite(top):
        osc = _quad_checked(
            lambda r: r ** (-1.0 - alpha) * float(fn(r)) * math.sin(r * u), 1.0, top, "outer imag oscillation",
            limit_override=400)
    elif u < 2.0 and rho.tag == "one":
        head = _quad_checked(lambda v: math.sin(v) * v ** (-1.0 - alpha), u, 1.0, "substituted sin head")
        osc = u ** alpha * (head + _tail_sin_moment(alpha))
    elif u < 2.0:
        osc = _quad_checked(
            lambda r: r ** (-1.0 - alpha) * float(fn(r)) * math.sin(r * u), 1.0, np.inf, "outer imag oscillation",
            limit_override=400)
    else:
        osc, err = integrate.quad(lambda r: r ** (-1.0 - alpha) * float(fn(r)), 1.0, np.inf, weight="sin", wvar=u, epsabs=1e-12, limit=300)
        if err > 1e-9:
            raise NumericalError(f"oscillatory sin tail did not converge (residual {err:.2e})", residual=err)
    return sgn * (inner + osc)


def _zonal_nodes(d: int, npts: int = 9):
    """Fixed quadrature (t_j, w_j) for int_S h(<e, s>) sigma(ds) = sum w_j h(t_j).

    Gauss-Jacobi in the zonal variable t = <e, s>; npts = 9 integrates
    spherical harmonics exactly through degree 17.  Appropriate for smooth
    zonal profiles h (the modulated radial closed forms are even and smooth
    at 0); the pure-stable profile |t|^alpha has a kink, so the reference
    quadrature route uses :func:`_zonal_adaptive` instead.
    """
    if d == 1:
        return np.array([-1.0, 1.0]), np.array([1.0, 1.0])
    a = (d - 3) / 2.0
    t, w = special.roots_jacobi(npts, a, a)
    w = w * sphere_surface_area(d - 1)
    return t, w


def _zonal_adaptive(h_even, d: int, what: str) -> float:
    """Adaptive int_S h(<e, s>) sigma(ds) for even h, d >= 2.

    Reduces to 2 |S^(d-2)| int_0^1 h(t) (1 - t^2)^((d-3)/2) dt with the
    algebraic endpoint weight handled by QUADPACK.
    """
    a = (d - 3) / 2.0
    fn = lambda t: h_even(t) * (1.0 + t) ** a
    if abs(a) < 1e-12:
        val, err = integrate.quad(fn, 0.0, 1.0, epsabs=1e-12, epsrel=1e-9, limit=200)
    else:
        val, err = integrate.quad(fn, 0.0, 1.0, weight="alg", wvar=(0.0, a), epsabs=1e-12, epsrel=1e-9, limit=200)
    if err > max(QUAD_RTOL * abs(val), 1e-9):
        raise NumericalError(f"angular quadrature for {what} did not converge (residual {err:.2e})", residual=err)
    return 2.0 * sphere_surface_area(d - 1) * val


def symbol(model: LevyModel, xi, zonal_order: int = 9) -> complex:
    """Characteristic exponent at a single frequency, by adaptive quadrature.

    Returns the complex exponent Phi(xi) with E exp(i<xi, L_t>) = exp(-t Phi).
    Real part is >= 0; the value is real for symmetric jump measures.
    """
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape[0] != model.dim:
        raise ValueError(f"xi must have dim {model.dim}")
    if not np.all(np.isfinite(xi)):
        raise ValueError("xi must be finite")
    total = 0.0 + 0.0j
    for part in model.parts():
        if part.gaussian_cov is not None:
            total += 0.5 * float(xi @ part.gaussian_cov @ xi)
        spec = part.jump_spec
        if spec is None:
            continue
        sph, rho, alpha = spec.spherical, spec.rho, spec.alpha
        if sph.is_uniform:
            r = float(np.linalg.norm(xi))
            if r > 0:
                total += _zonal_adaptive(
                    lambda t: _radial_real_quad(r * t, rho, alpha), part.dim, "uniform jump part"
                )
        elif sph.is_symmetric():
            # paired atoms cancel the odd part exactly; evaluate it as zero
            for e, w in sph.symmetric_pairs():
                u = float(xi @ e)
                total += 2.0 * w * _radial_real_quad(u, rho, alpha)
        else:
            for e, w in zip(sph.atoms, sph.weights):
                u = float(xi @ e)
                total += w * _radial_real_quad(u, rho, alpha)
                total -= 1j * w * _radial_imag_quad(u, rho, alpha)
    return complex(total)


# ---------------------------------------------------------------------------
# symbol evaluation: vectorised closed / semi-closed forms
# ---------------------------------------------------------------------------


def _g_partial_cos_mass(w: np.ndarray, alpha: float) -> np.ndarray:
    """g(w) = int_0^w (1 - cos v) v^(-1-alpha) dv, vectorised.

    Alternating power series for w <= 20, asymptotic tail expansion beyond;
    worst-case absolute error below 1e-8 for alpha in (1, 2).
    """
    w = np.asarray(w, dtype=float)
    out = np.empty_like(w)
    small = w <= 20.0
    ws = w[small]
    if ws.size:
        acc = np.zeros_like(ws)
        sign = 1.0
        logfact = 0.0
        logw = np.log(np.maximum(ws, 1e-300))
        for k in range(1, 61):
            logfact += math.log(2 * k - 1) + math.log(2 * k)
            acc += sign * np.exp((2 * k - alpha) * logw - logfact) / (2 * k - alpha)
            sign = -sign
        acc[ws == 0.0] = 0.0
        out[small] = acc
    wl = w[~small]
    if wl.size:
        s = 1.0 + alpha
        val = np.zeros_like(wl)
        coef = 1.0
        ss = s
        sinw, cosw = np.sin(wl), np.cos(wl)
        cyc = (-sinw, cosw, sinw, -cosw)
        for j in range(10):
            val += coef * cyc[j % 4] * wl ** (-ss)
            coef *= ss
            ss += 1.0
        out[~small] = stable_radial_constant(alpha) - wl ** (-alpha) / alpha + val
    return out


def _radial_real_vec(u: np.ndarray, rho: RadialModulator, alpha: float) -> np.ndarray:
    """Vectorised int_0^inf (1-cos(ru)) r^(-1-alpha) rho(r) dr for built-in rho."""
    u = np.abs(np.asarray(u, dtype=float))
    if rho.tag == "one":
        return stable_radial_constant(alpha) * u ** alpha
    if rho.tag == "exp":
        c = rho.param
        mod = (c * c + u * u) ** (alpha / 2.0)
        ang = np.arctan2(u, c)
        return special.gamma(-alpha) * (c ** alpha - mod * np.cos(alpha * ang))
    if rho.tag == "indicator":
        return rho.param * u ** alpha * _g_partial_cos_mass(rho.cut * u, alpha)
    raise NotImplementedError("custom radial modulators use the quadrature path")


def symbol_grid(model: LevyModel, pts: np.ndarray, zonal_order: int = 9) -> np.ndarray:
    """Characteristic exponent on an array of frequencies, shape (..., d).

    Uses closed forms for the built-in model classes; requires symmetric
    jump measures (the general case goes through :func:`symbol`).  Returns
    a real array.
    """
    pts = np.asarray(pts, dtype=float)
    if pts.shape[-1] != model.dim:
        raise ValueError(f"frequency array must have last axis {model.dim}")
    out = np.zeros(pts.shape[:-1], dtype=float)
    for part in model.parts():
        if part.gaussian_cov is not None:
            out += 0.5 * np.einsum("...i,ij,...j->...", pts, part.gaussian_cov, pts)
        spec = part.jump_spec
        if spec is None:
            continue
        sph, rho, alpha = spec.spherical, spec.rho, spec.alpha
        if not sph.is_symmetric():
            raise ModelError("vectorised symbol evaluation requires a symmetric spherical measure")
        if rho.tag == "custom":
            flat = pts.reshape(-1, model.dim)
            vals = np.array([symbol(part, x).real for x in flat])
            out += vals.reshape(pts.shape[:-1])
            continue
        if sph.is_uniform and rho.tag == "one":
            k_iso = stable_radial_constant(alpha) * zonal_alpha_moment(part.dim, alpha)
            out += k_iso * np.linalg.norm(pts, axis=-1) ** alpha
        elif sph.is_uniform:
            t_nodes, t_weights = _zonal_nodes(part.dim, zonal_order)
            r = np.linalg.norm(pts, axis=-1)
            for t, w in zip(t_nodes, t_weights):
                out += w * _radial_real_vec(r * t, rho, alpha)
        else:
            for e, w in zip(sph.atoms, sph.weights):
                u = pts @ e
                out += w * _radial_real_vec(u, rho, alpha)
    return out


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LowerBoundReport:
    min_ratio: float
    samples: int
    radius: float
    passed: bool


def symbol_lower_bound_check(model: LevyModel, samples: int = 100, seed: int = 0) -> LowerBoundReport:
    """Probe Re Phi(lambda) / |lambda|^alpha over random |lambda| > 1/C.

    Certifies positivity of the stable-type lower bound; the constant itself
    is existential, so only min_ratio > 0 is asserted.
    """
    parts = model.parts()
    jump_parts = [p for p in parts if p.jump_spec is not None]
    if not jump_parts:
        raise ModelError("lower-bound check needs a jump component")
    for p in jump_parts:
        if not p.jump_spec.spherical.spans_space():
            raise ModelError("degenerate spherical measure")
    c_stored = min(p.jump_spec.rho.C for p in jump_parts)
    alpha = model.alpha if model.gaussian_cov is None and not model.components else min(
        p.jump_spec.alpha for p in jump_parts
    )
    rng = np.random.default_rng(seed)
    radius = 1.0 / c_stored
    dirs = rng.standard_normal((samples, model.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    mags = radius * np.exp(rng.uniform(math.log(1.0 + 1e-6), math.log(50.0), samples))
    lam = dirs * mags[:, None]
    vals = symbol_grid(model, lam)
    ratios = vals / mags ** alpha
    mr = float(ratios.min())
    return LowerBoundReport(min_ratio=mr, samples=samples, radius=radius, passed=mr > 0.0)


@dataclass(frozen=True)
class AdmissibleResult:
    admissible: bool
    gamma_window: tuple[float, float] | None


def admissible_pq(alpha: float, d: int, p: float, q: float) -> AdmissibleResult:
    """Whether some gamma in (1, alpha) satisfies p > d/(gamma-1), q > alpha/(alpha-gamma).

    Equivalent to d/p + alpha/q < alpha - 1; the open window is
    (1 + d/p, alpha - alpha/q).
    """
    if not (1.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (1, 2]")
    if d < 1 or p <= 1 or q <= 1:
        raise ValueError("need d >= 1, p > 1, q > 1")
    lo = 1.0 + d / p
    hi = alpha - alpha / q
    if lo < hi:
        return AdmissibleResult(True, (lo, hi))
    return AdmissibleResult(False, None)


def krylov_pq_check(alpha: float, d: int, p: float, q: float) -> bool:
    """Strict inequalities p > d/(alpha-1) and q > p*alpha/(p*(alpha-1) - d)."""
    if not (1.0 < alpha <= 2.0):
        raise ValueError("alpha must lie in (1, 2]")
    if d < 1 or p <= 1 or q <= 1:
        raise ValueError("need d >= 1, p > 1, q > 1")
    if p <= d / (alpha - 1.0):
        return False
    return q > p * alpha / (p * (alpha - 1.0) - d)


def krylov_gate_or_raise(alpha: float, d: int, p: float, q: float) -> None:
    """Raise GateError naming the first failed inequality."""
    if p <= d / (alpha - 1.0):
        raise GateError(f"p = {p} fails p > d/(alpha-1) = {d / (alpha - 1.0):g}")
    bound = p * alpha / (p * (alpha - 1.0) - d)
    if q <= bound:
        raise GateError(f"q = {q} fails q > p*alpha/(p*(alpha-1)-d) = {bound:g}")
