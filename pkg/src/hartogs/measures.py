r"""Density measures on ``H_k`` and their Berezin-type transforms.

A measure is ``rho(z) dV(z)`` with ``rho >= 0``.  Product measures have
``rho(z) = f(z1**k / z2) * g(z2)``; for those the transform built from the
simplified kernel factors into two disc integrals, since with
``xi = z1**k/z2`` and ``eta = w1**k/w2``

.. math::

    |P(z,w)|^2 = \frac{1}{|z_2|^2 |w_2|^2 |1 - z_2\bar w_2|^4 |1 - \xi\bar\eta|^4},
    \qquad dV(z) = \tfrac1k |\xi|^{2/k-2} |z_2|^{2/k}\, dV(\xi)\, dV(z_2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import ConvergenceError, PreconditionError
from .kernels import (
    HartogsPoint,
    _check_interior,
    kernel_diag,
    kernel_st,
    p_kernel_st,
)
from .quadrature import (
    DEFAULT_SPEC,
    Focus,
    QuadratureSpec,
    QuadResult,
    forelli_rudin_series,
    integrate_disc,
    integrate_hartogs,
)

BUILTINS = ("lebesgue", "vanishing_example", "nonvanishing_example", "zero")
MASS_LIMIT = 1e12
MASS_CHECK_SPEC = QuadratureSpec(radial_nodes=6, angular_nodes=8, max_subdivisions=12, rel_tol=1e-2)


def _cubic_defect(w):
    return (1.0 - np.abs(w) ** 2) ** 3


def _builtin_factors(name: str, k: int):
    if name == "lebesgue":
        one = lambda w: np.ones(np.shape(w))
        return one, one
    if name == "zero":
        zero = lambda w: np.zeros(np.shape(w))
        return zero, zero
    e = 2.0 - 2.0 / k
    if name == "vanishing_example":
        fn = lambda w: _cubic_defect(w) * np.abs(w) ** e
        return fn, fn
    if name == "nonvanishing_example":
        fn = lambda w: np.abs(w) ** e
        return fn, fn
    raise ValueError(f"unknown builtin measure {name!r}; choose from {BUILTINS}")


@dataclass(frozen=True, eq=False)
class DensityMeasure:
    """An absolutely continuous measure ``rho dV`` on ``H_k``.

    Build with :meth:`general`, :meth:`product` or :meth:`builtin`; the
    constructors check that the density is non-negative at quadrature nodes
    and that the total mass is finite.
    """

    k: int
    kind: str
    density_fn: Optional[Callable] = None
    f: Optional[Callable] = None
    g: Optional[Callable] = None
    name: Optional[str] = None
    label: str = ""
    mass: float = math.nan

    def __call__(self, z1, z2):
        """Density at ``(z1, z2)``; broadcasts over arrays."""
        if self.density_fn is not None:
            return self.density_fn(z1, z2)
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.asarray(z2, dtype=complex)
        return self.f(z1 ** self.k / z2) * self.g(z2)

    @property
    def is_product(self) -> bool:
        return self.f is not None and self.g is not None

    @classmethod
    def general(cls, k: int, rho: Callable, label: str = "general", check: bool = True):
        return cls._build(k, "general", label, check, density_fn=rho)

    @classmethod
    def product(cls, k: int, f: Callable, g: Callable, label: str = "product", check: bool = True):
        return cls._build(k, "product", label, check, f=f, g=g)

    @classmethod
    def builtin(cls, name: str, k: int):
        f, g = _builtin_factors(name, k)
        return cls._build(k, "builtin", name, True, f=f, g=g, name=name)

    @classmethod
    def _build(cls, k, kind, label, check, **parts):
        if not isinstance(k, (int, np.integer)) or k < 1:
            raise ValueError("k must be a positive integer")
        draft = cls(int(k), kind, label=label, **parts)
        if not check:
            return draft
        mass = _checked_mass(draft)
        return cls(int(k), kind, label=label, mass=mass, **parts)


def _checked_mass(mu: DensityMeasure) -> float:
    lowest = [math.inf]
    tallest = [0.0]

    def rho(z1, z2):
        vals = np.asarray(mu(z1, z2), dtype=float)
        vals = np.broadcast_to(vals, np.broadcast_shapes(np.shape(z1), np.shape(z2)))
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"density {mu.label!r} is not finite at some quadrature node")
        lowest[0] = min(lowest[0], float(vals.min()))
        tallest[0] = max(tallest[0], float(np.abs(vals).max()))
        return vals

    try:
        res = integrate_hartogs(rho, mu.k, MASS_CHECK_SPEC)
    except ConvergenceError as exc:
        raise ValueError(f"total mass of {mu.label!r} could not be certified finite") from exc
    if lowest[0] < -1e-12 * max(tallest[0], 1.0):
        raise ValueError(f"density {mu.label!r} is negative somewhere (min {lowest[0]:.3g})")
    if not math.isfinite(res.value) or res.value > MASS_LIMIT:
        raise ValueError(f"total mass of {mu.label!r} is too large or infinite ({res.value:.3g})")
    return float(res.value)


@dataclass(frozen=True)
class Exhaustion:
    """Nested compact pieces of ``H_k`` with ``delta = 1/(j+2)``.

    ``Omega_j = {delta < |z2| < 1 - delta, |z1|^k < (1 - delta)|z2|}``.
    """

    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("j must be a positive integer")

    @property
    def delta(self) -> float:
        return 1.0 / (self.j + 2)

    def contains(self, k: int, z) -> bool:
        z = HartogsPoint.coerce(z)
        d = self.delta
        r2 = abs(z.z2)
        return d < r2 < 1 - d and abs(z.z1) ** k < (1 - d) * r2

    def complement_boxes(self):
        """``(r2_range, ratio_range)`` pairs covering ``H_k`` minus ``Omega_j``."""
        d = self.delta
        return (
            ((0.0, d), (0.0, 1.0)),
            ((1.0 - d, 1.0), (0.0, 1.0)),
            ((d, 1.0 - d), (1.0 - d, 1.0)),
        )


# Transforms --------------------------------------------------------------


def _berezin_integrand(mu: DensityMeasure, k: int, w: HartogsPoint):
    kww = kernel_diag(k, w)
    cw1, cw2 = np.conj(w.z1), np.conj(w.z2)

    def fn(z1, z2):
        return np.abs(kernel_st(k, z1 * cw1, z2 * cw2)) ** 2 / kww * mu(z1, z2)

    return fn


def _t_integrand(mu: DensityMeasure, k: int, w: HartogsPoint):
    kww = kernel_diag(k, w)
    cw1, cw2 = np.conj(w.z1), np.conj(w.z2)

    def fn(z1, z2):
        return np.abs(p_kernel_st(k, z1 * cw1, z2 * cw2)) ** 2 / kww * mu(z1, z2)

    return fn


def _prepare(mu: DensityMeasure, k: int, w):
    if mu.k != k:
        raise PreconditionError(f"measure was built for k={mu.k}, not k={k}")
    w = HartogsPoint.coerce(w)
    _check_interior(k, w)
    return w


def berezin_transform(
    mu: DensityMeasure, k: int, w, spec: Optional[QuadratureSpec] = None, route: str = "auto"
) -> QuadResult:
    """``B_mu(w) = int |K(z,w)|^2 / K(w,w) dmu(z)`` with an error estimate.

    For ``k = 1`` the kernel is a constant multiple of the simplified kernel,
    so product measures default to the factored disc integrals
    (``route="split"``); ``route="direct"`` always integrates over ``H_k``.
    """
    w = _prepare(mu, k, w)
    spec = spec or DEFAULT_SPEC
    if route == "auto":
        route = "split" if k == 1 and mu.is_product else "direct"
    if route not in ("split", "direct"):
        raise ValueError(f"unknown route {route!r}")
    if route == "split":
        if k != 1 or not mu.is_product:
            raise PreconditionError("the split Berezin route needs k = 1 and a product measure")
        t = t_transform(mu, k, w, spec)
        scale = math.pi ** -4
        return QuadResult(t.value * scale, t.error * scale, t.levels)
    return integrate_hartogs(_berezin_integrand(mu, k, w), k, spec, Focus.from_point(k, w))


def t_transform(
    mu: DensityMeasure, k: int, w, spec: Optional[QuadratureSpec] = None, route: str = "auto"
) -> QuadResult:
    """``T_mu(w) = int |P(z,w)|^2 / K(w,w) dmu(z)`` with an error estimate.

    ``route="split"`` (default for product measures) multiplies two disc
    integrals; ``route="direct"`` integrates over ``H_k``.
    """
    w = _prepare(mu, k, w)
    spec = spec or DEFAULT_SPEC
    if route == "auto":
        route = "split" if mu.is_product else "direct"
    if route == "direct":
        return integrate_hartogs(_t_integrand(mu, k, w), k, spec, Focus.from_point(k, w))
    if route != "split":
        raise ValueError(f"unknown route {route!r}")
    if not mu.is_product:
        raise PreconditionError("the split route needs a product measure")
    w2 = complex(w.z2)
    eta = complex(w.z1) ** k / w2
    gpart = integrate_disc(lambda om: mu.g(om) * np.abs(1.0 - om * w2.conjugate()) ** -4, k, spec, pole=w2)
    fpart = integrate_disc(lambda om: mu.f(om) * np.abs(1.0 - om * eta.conjugate()) ** -4, k, spec, pole=eta)
    pre = 1.0 / (k * abs(w2) ** 2 * kernel_diag(k, w))
    value = pre * gpart.value * fpart.value
    err = pre * (abs(gpart.value) * fpart.error + abs(fpart.value) * gpart.error + gpart.error * fpart.error)
    return QuadResult(float(value), float(err), gpart.levels + fpart.levels)


def truncated_berezin(
    mu: DensityMeasure, k: int, w, exh: Exhaustion, spec: Optional[QuadratureSpec] = None
) -> QuadResult:
    """Berezin integral restricted to ``H_k`` minus ``Omega_j``."""
    w = _prepare(mu, k, w)
    spec = spec or DEFAULT_SPEC
    fn = _berezin_integrand(mu, k, w)
    focus = Focus.from_point(k, w)
    value = err = 0.0
    for r2_range, ratio_range in exh.complement_boxes():
        part = integrate_hartogs(fn, k, spec, focus, r2_range=r2_range, ratio_range=ratio_range)
        value += part.value
        err += part.error
    return QuadResult(float(value), float(err))


# Disc measures -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscMeasure:
    """``h(omega) |omega|^{2/weight_k - 2} dV(omega)`` on the unit disc."""

    h: Callable
    weight_k: int = 1
    label: str = ""

    def density(self, omega):
        omega = np.asarray(omega, dtype=complex)
        out = self.h(omega)
        if self.weight_k != 1:
            out = out * np.abs(omega) ** (2.0 / self.weight_k - 2.0)
        return out

    @classmethod
    def lebesgue(cls):
        return cls(lambda om: np.ones(np.shape(om)), 1, "lebesgue")

    @classmethod
    def cubic_defect(cls):
        return cls(_cubic_defect, 1, "cubic_defect")


def factorize_product_measure(mu: DensityMeasure, k: Optional[int] = None):
    """The two disc measures ``f |w|^{2/k-2} dV`` and ``g |w|^{2/k-2} dV``.

    Builtins come back in simplified form (the powers of ``|w|`` cancel).
    """
    if not isinstance(mu, DensityMeasure) or not mu.is_product:
        raise TypeError("factorization needs a product-form DensityMeasure")
    k = mu.k if k is None else k
    if k != mu.k:
        raise PreconditionError(f"measure was built for k={mu.k}, not k={k}")
    if mu.name == "nonvanishing_example":
        return DiscMeasure.lebesgue(), DiscMeasure.lebesgue()
    if mu.name == "vanishing_example":
        return DiscMeasure.cubic_defect(), DiscMeasure.cubic_defect()
    return DiscMeasure(mu.f, k, f"{mu.label}:f"), DiscMeasure(mu.g, k, f"{mu.label}:g")


def disc_berezin(nu: DiscMeasure, a: complex, spec: Optional[QuadratureSpec] = None) -> QuadResult:
    """``int |K_D(omega,a)|^2 / K_D(a,a) dnu(omega)`` for the disc kernel."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("|a| must be < 1")
    scale = (1.0 - abs(a) ** 2) ** 2 / math.pi
    ca = a.conjugate()
    return integrate_disc(
        lambda om: nu.h(om) * scale * np.abs(1.0 - om * ca) ** -4, nu.weight_k, spec, pole=a
    )


def cubic_defect_kernel_integral(a: complex, rel_tol: float = 1e-15, max_terms: int = 10_000_000) -> float:
    r"""``int_D (1-|xi|^2)^3 / |1 - a xi|^4 dV = 6 pi sum (m+1)|a|^{2m} / ((m+2)(m+3)(m+4))``.

    Consecutive terms shrink by less than ``x = |a|^2``, so the tail after a
    term ``t`` is at most ``t x / (1 - x)``.
    """
    x = abs(complex(a)) ** 2
    if x >= 1:
        raise ValueError("|a| must be < 1")
    total = 0.0
    xm = 1.0
    for m in range(max_terms):
        term = (m + 1) * xm / ((m + 2) * (m + 3) * (m + 4))
        total += term
        if term * x / (1 - x) <= rel_tol * total:
            return 6.0 * math.pi * total
        xm *= x
    raise ConvergenceError(f"series did not converge within {max_terms} terms")


def unit_kernel_integral(a: complex) -> float:
    """``int_D |1 - a xi|^{-4} dV = pi / (1 - |a|^2)^2``."""
    return math.pi / (1.0 - abs(complex(a)) ** 2) ** 2


def builtin_t_closed_form(name: str, k: int, w) -> float:
    """Exact ``T_mu(w)`` for the builtin product measures via the disc factors."""
    w = HartogsPoint.coerce(w)
    _check_interior(k, w)
    w2 = complex(w.z2)
    eta = complex(w.z1) ** k / w2
    if name == "nonvanishing_example":
        gf = unit_kernel_integral(w2) * unit_kernel_integral(eta)
    elif name == "vanishing_example":
        gf = cubic_defect_kernel_integral(w2) * cubic_defect_kernel_integral(eta)
    elif name == "lebesgue":
        gf = forelli_rudin_series(w2.conjugate(), k) * forelli_rudin_series(eta.conjugate(), k)
    elif name == "zero":
        return 0.0
    else:
        raise ValueError(f"unknown builtin measure {name!r}")
    return gf / (k * abs(w2) ** 2 * kernel_diag(k, w))
