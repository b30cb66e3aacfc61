r"""Quadrature and sampling on ``H_k``, on its fibered picture, and on the disc.

Coordinates
-----------
Every route integrates over the unit square of "flattened" radii ``(u, v)``
and two angles.  On ``H_k`` the substitution is

.. math::

    z_2 = v^k e^{i\theta_2}, \qquad z_1 = u v\, e^{i\theta_1},
    \qquad dV = k\, u\, v^{2k+1}\, du\, dv\, d\theta_1\, d\theta_2,

so ``|z1|^k/|z2| = u^k`` and every monomial ``|z1^a z2^b|^2`` becomes a
polynomial in ``(u, v)``.  The fibered route uses ``xi = u^k e^{i phi}``
instead of ``z1`` and carries the same Jacobian, which absorbs the weight
``|xi|^{2/k-2} |z2|^{2/k} / k``.

Radii are integrated with composite Gauss--Legendre on cells refined
dyadically toward both ends of each range.  Angles use the periodic
trapezoid rule, optionally pulled back through a disc automorphism so nodes
cluster where ``|1 - omega conj(b)|`` is small; with that clustering a
kernel factor ``|1 - omega conj(b)|^{-4}`` becomes a trigonometric polynomial
in the new variable.

Error estimates combine the change from one more radial level in each
direction with the difference between the full angular rule and its
even-indexed half.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .exceptions import ConvergenceError
from .kernels import HartogsPoint, domain_volume

TWO_PI = 2.0 * math.pi
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution and tolerance settings shared by every integral.

    ``radial_nodes`` is the Gauss--Legendre order per radial cell,
    ``angular_nodes`` the starting trapezoid count per angle (must be even),
    ``max_subdivisions`` the deepest dyadic level allowed in either radius.
    """

    radial_nodes: int = 8
    angular_nodes: int = 16
    max_subdivisions: int = 24
    rel_tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ("radial_nodes", "angular_nodes", "max_subdivisions"):
            if getattr(self, name) < 4:
                raise ValueError(f"{name} must be >= 4")
        if self.angular_nodes % 2:
            raise ValueError("angular_nodes must be even")
        if not 0 < self.rel_tol <= 0.1:
            raise ValueError("rel_tol must lie in (0, 0.1]")

    def with_(self, **changes) -> "QuadratureSpec":
        return replace(self, **changes)


DEFAULT_SPEC = QuadratureSpec()
COARSE_SPEC = QuadratureSpec(radial_nodes=6, angular_nodes=8, max_subdivisions=6, rel_tol=1e-2)


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    levels: tuple = ()

    def __iter__(self):
        yield self.value
        yield self.error


@dataclass(frozen=True)
class Focus:
    """Where an integrand concentrates: near ``xi ~ a1`` and ``z2 ~ a2``.

    Peaks of the form ``|1 - xi conj(a1)|^{-p} |1 - z2 conj(a2)|^{-q}`` are
    resolved by clustering the angular nodes; ``a1`` or ``a2`` may be 0.
    """

    a1: complex = 0j
    a2: complex = 0j

    @classmethod
    def from_point(cls, k: int, w) -> "Focus":
        w = HartogsPoint.coerce(w)
        return cls(complex(w.z1) ** k / complex(w.z2), complex(w.z2))


NO_FOCUS = Focus()


@lru_cache(maxsize=None)
def _gauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def dyadic_edges(lo: float, hi: float, level: int) -> tuple:
    """Cell edges on ``[lo, hi]``: ``level`` halvings toward ``hi``, ``level - 1`` toward ``lo``.

    Both ends gain a cell at every level, so comparing consecutive levels
    always probes a singularity at either end.
    """
    span = hi - lo
    pts = {lo, hi}
    for i in range(1, level + 1):
        pts.add(hi - span * 2.0 ** -i)
    for i in range(1, max(level - 1, 1) + 1):
        pts.add(lo + span * 2.0 ** -i)
    return tuple(sorted(pts))


def _cell_nodes(a: float, b: float, n: int):
    x, w = _gauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def mobius_angles(n: int, c, alpha: float):
    """Trapezoid nodes on the circle pulled back through a disc automorphism.

    ``c`` (broadcastable array in ``[0, 1)``) is the concentration and
    ``alpha`` the angle nodes cluster around.  Returns ``(theta, weight)``
    with a trailing axis of length ``n``; ``c = 0`` is the plain rule.
    """
    x = TWO_PI * np.arange(n) / n
    e = np.exp(1j * x)
    c = np.asarray(c, dtype=float)[..., None]
    theta = np.angle((e + c) / (1.0 + c * e)) + alpha
    weight = (1.0 - c * c) / np.abs(1.0 + c * e) ** 2 * (TWO_PI / n)
    return theta, weight


def _sum_full_half(vals, weights, angle_axes):
    """Weighted sum, the same sum on even angular nodes only, and the sum of magnitudes."""
    prod = vals * weights
    full = np.sum(prod)
    sl = [slice(None)] * vals.ndim
    for ax in angle_axes:
        sl[ax] = slice(None, None, 2)
    sl = tuple(sl)
    half = np.sum(vals[sl] * weights[sl]) * 2.0 ** len(angle_axes)
    return complex(full), complex(half), float(np.sum(np.abs(prod)))


def _as_output(value: complex, is_complex: bool):
    return complex(value) if is_complex else float(value.real)


class _Adaptive:
    """Dyadic refinement over a product of radial ranges with a cell cache.

    ``cell(bounds, n_ang)`` returns ``(full, half, magnitude, is_complex)``
    for one product cell; ``bounds`` is a tuple of ``(a, b)`` per radial
    dimension.  ``magnitude`` (the integral of ``|f|``) sets an absolute
    tolerance floor so integrands that cancel to zero still terminate.
    """

    def __init__(self, cell, ranges, spec: QuadratureSpec, start: int = 2):
        self.cell = cell
        self.ranges = ranges
        self.spec = spec
        self.start = start
        self.cache = {}
        self.is_complex = False

    def total(self, levels, n_ang):
        grids = [dyadic_edges(lo, hi, lv) for (lo, hi), lv in zip(self.ranges, levels)]
        cells = [list(zip(g[:-1], g[1:])) for g in grids]
        full = half = 0j
        mag = 0.0
        for bounds in _product(cells):
            key = (bounds, n_ang)
            if key not in self.cache:
                f, h, m, cpx = self.cell(bounds, n_ang)
                self.is_complex |= cpx
                self.cache[key] = (f, h, m)
            f, h, m = self.cache[key]
            full += f
            half += h
            mag += m
        return full, half, mag

    def run(self) -> QuadResult:
        spec = self.spec
        dims = len(self.ranges)
        levels = [self.start] * dims
        n_ang = spec.angular_nodes
        n_ang_max = 8 * spec.angular_nodes
        history = []
        while True:
            base, half, mag = self.total(levels, n_ang)
            history.append(base)
            floor = 100 * _EPS * mag
            tol = max(spec.rel_tol * abs(base), floor)
            deltas = []
            for d in range(dims):
                bumped = list(levels)
                bumped[d] += 1
                deltas.append(abs(self.total(bumped, n_ang)[0] - base))
            d_ang = abs(base - half)
            if sum(deltas) <= tol and d_ang <= tol:
                value, vhalf, _ = self.total([lv + 1 for lv in levels], n_ang)
                err = sum(deltas) + abs(value - vhalf)
                err = max(err, 100 * _EPS * abs(value), floor)
                return QuadResult(
                    _as_output(value, self.is_complex), float(err), tuple(levels) + (n_ang,)
                )
            moved = False
            for d in range(dims):
                if deltas[d] > tol / (2 * dims):
                    levels[d] += 1
                    moved = True
            if d_ang > tol and n_ang < n_ang_max:
                n_ang *= 2
                moved = True
            if not moved:
                # remaining budget is split unevenly; refine the worst dimension
                worst = int(np.argmax(deltas)) if deltas else 0
                if d_ang > tol and n_ang >= n_ang_max:
                    raise ConvergenceError(
                        f"angular rule not converged at {n_ang} nodes", history[-2:]
                    )
                levels[worst] += 1
            if max(levels) > spec.max_subdivisions:
                raise ConvergenceError(
                    f"no convergence to rel_tol={spec.rel_tol} within "
                    f"{spec.max_subdivisions} dyadic levels; last estimates {history[-2:]}",
                    history[-2:],
                )


def _product(lists):
    if not lists:
        yield ()
        return
    for head in lists[0]:
        for rest in _product(lists[1:]):
            yield (head,) + rest


def _eval(fn, *args):
    out = np.asarray(fn(*args))
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    return np.broadcast_to(out, shape), np.iscomplexobj(out)


def _root_range(rng, k):
    lo, hi = rng
    if not 0.0 <= lo < hi <= 1.0:
        raise ValueError(f"radial range {rng} must satisfy 0 <= lo < hi <= 1")
    return (lo ** (1.0 / k), hi ** (1.0 / k))


def integrate_hartogs(
    f: Callable,
    k: int,
    spec: Optional[QuadratureSpec] = None,
    focus: Focus = NO_FOCUS,
    r2_range=(0.0, 1.0),
    ratio_range=(0.0, 1.0),
) -> QuadResult:
    """Integrate ``f(z1, z2)`` over ``H_k`` (or a radial box inside it).

    ``f`` must broadcast over numpy arrays.  ``r2_range`` restricts ``|z2|``
    and ``ratio_range`` restricts ``|z1|^k / |z2|``.  Raises
    :class:`ConvergenceError` when ``spec.max_subdivisions`` is exhausted.
    """
    spec = spec or DEFAULT_SPEC
    n = spec.radial_nodes
    a1, a2 = complex(focus.a1), complex(focus.a2)
    al1, al2 = np.angle(a1), np.angle(a2)
    branch = TWO_PI * np.arange(k)

    def cell(bounds, n_ang):
        (va, vb), (ua, ub) = bounds
        v, wv = _cell_nodes(va, vb, n)
        u, wu = _cell_nodes(ua, ub, n)
        th2, wth2 = mobius_angles(n_ang, v ** k * abs(a2), al2)  # (nv, N)
        phi, wphi = mobius_angles(n_ang, u ** k * abs(a1), al1)  # (nu, N)
        # axes: v, theta2, u, phi, branch
        V = v[:, None, None, None, None]
        T2 = th2[:, :, None, None, None]
        U = u[None, None, :, None, None]
        P = phi[None, None, :, :, None]
        B = branch[None, None, None, None, :]
        th1 = (P + T2 + B) / k
        z2 = V ** k * np.exp(1j * T2)
        z1 = U * V * np.exp(1j * th1)
        vals, cpx = _eval(f, z1, z2)
        w = (
            (wv * k * v ** (2 * k + 1))[:, None, None, None, None]
            * wth2[:, :, None, None, None]
            * (wu * u)[None, None, :, None, None]
            * (wphi / k)[None, None, :, :, None]
        )
        return (*_sum_full_half(vals, w, (1, 3)), cpx)

    ranges = [_root_range(r2_range, k), _root_range(ratio_range, k)]
    return _Adaptive(cell, ranges, spec).run()


def integrate_fibered(
    g: Callable,
    k: int,
    spec: Optional[QuadratureSpec] = None,
    focus: Focus = NO_FOCUS,
    r2_range=(0.0, 1.0),
    xi_range=(0.0, 1.0),
) -> QuadResult:
    """``(1/k) int_D int_D g(xi, z2) |xi|^{2/k-2} |z2|^{2/k} dV(xi) dV(z2)``.

    This equals the integral over ``H_k`` of any ``f`` with
    ``f(z1, z2) = g(z1**k / z2, z2)``.
    """
    spec = spec or DEFAULT_SPEC
    n = spec.radial_nodes
    a1, a2 = complex(focus.a1), complex(focus.a2)
    al1, al2 = np.angle(a1), np.angle(a2)

    def cell(bounds, n_ang):
        (va, vb), (ua, ub) = bounds
        v, wv = _cell_nodes(va, vb, n)
        u, wu = _cell_nodes(ua, ub, n)
        th2, wth2 = mobius_angles(n_ang, v ** k * abs(a2), al2)
        phi, wphi = mobius_angles(n_ang, u ** k * abs(a1), al1)
        z2 = (v ** k)[:, None, None, None] * np.exp(1j * th2[:, :, None, None])
        xi = (u ** k)[None, None, :, None] * np.exp(1j * phi[None, None, :, :])
        vals, cpx = _eval(g, xi, z2)
        w = (
            (wv * k * v ** (2 * k + 1))[:, None, None, None]
            * wth2[:, :, None, None]
            * (wu * u)[None, None, :, None]
            * wphi[None, None, :, :]
        )
        return (*_sum_full_half(vals, w, (1, 3)), cpx)

    ranges = [_root_range(r2_range, k), _root_range(xi_range, k)]
    return _Adaptive(cell, ranges, spec).run()


def integrate_disc(
    h: Callable,
    k: int = 1,
    spec: Optional[QuadratureSpec] = None,
    pole: complex = 0j,
    r_range=(0.0, 1.0),
) -> QuadResult:
    """``int_D h(omega) |omega|^{2/k-2} dV(omega)`` using ``|omega| = u^k``.

    ``pole`` is a point ``b`` such that ``h`` peaks where ``|1 - omega conj(b)|``
    is small; ``k = 1`` gives the plain area integral.
    """
    spec = spec or DEFAULT_SPEC
    n = spec.radial_nodes
    b = complex(pole)
    alpha = np.angle(b)

    def cell(bounds, n_ang):
        ((ua, ub),) = bounds
        u, wu = _cell_nodes(ua, ub, n)
        phi, wphi = mobius_angles(n_ang, u ** k * abs(b), alpha)
        omega = (u ** k)[:, None] * np.exp(1j * phi)
        vals, cpx = _eval(h, omega)
        w = (wu * k * u)[:, None] * wphi
        return (*_sum_full_half(vals, w, (1,)), cpx)

    return _Adaptive(cell, [_root_range(r_range, k)], spec).run()


# Forelli--Rudin type integrals -------------------------------------------

SERIES_CAP = 1_000_000


def forelli_rudin_series(a: complex, k: int, rel_tol: float = 1e-14) -> float:
    r"""``J(a) = pi sum_m (m+1)^2 |a|^{2m} / (m + 1/k)``.

    Expanding ``(1 - xi a)^{-2}`` and using orthogonality of ``xi^m`` against
    the radial weight gives the series.  After term ``m`` the ratio of
    consecutive terms stays below ``q = ((m+2)/(m+1))^2 |a|^2``, so the tail
    is at most ``term * q / (1 - q)`` once ``q < 1``.
    """
    x = abs(complex(a)) ** 2
    if abs(complex(a)) >= 1.0 - 1e-6:
        raise ConvergenceError(f"series tail bound degenerates at |a| = {abs(a)}")
    total = 0.0
    term = 1.0 / (1.0 / k)
    m = 0
    while m < SERIES_CAP:
        total += term
        q = ((m + 2) / (m + 1)) ** 2 * x
        if q < 1 and term * q / (1 - q) <= rel_tol * total:
            return math.pi * total
        m += 1
        term = (m + 1) ** 2 * x ** m / (m + 1.0 / k)
    raise ConvergenceError(f"series did not converge within {SERIES_CAP} terms")


def forelli_rudin_J(
    a: complex, k: int, method: str = "series", spec: Optional[QuadratureSpec] = None
) -> float:
    """``int_D |xi|^{2/k-2} / |1 - xi a|^4 dV(xi)`` by series or by quadrature."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("|a| must be < 1")
    if method == "series":
        return forelli_rudin_series(a, k, rel_tol=min((spec or DEFAULT_SPEC).rel_tol, 1e-14))
    if method == "quadrature":
        res = integrate_disc(lambda xi: np.abs(1.0 - xi * a) ** -4, k, spec, pole=a.conjugate())
        return res.value
    raise ValueError(f"unknown method {method!r}")


# Monte Carlo -------------------------------------------------------------


@dataclass(frozen=True)
class HartogsSample:
    z1: np.ndarray
    z2: np.ndarray
    proposals: int
    accepted: int

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals

    def points(self) -> list[HartogsPoint]:
        return [HartogsPoint(complex(a), complex(b)) for a, b in zip(self.z1, self.z2)]


def _uniform_disc(rng, n):
    r = np.sqrt(rng.random(n))
    return r * np.exp(1j * TWO_PI * rng.random(n))


def sample_hartogs(k: int, n: int, seed: int = 0) -> HartogsSample:
    """``n`` volume-uniform points of ``H_k`` by rejection from the bidisc."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    got1, got2 = [], []
    proposals = accepted = 0
    while accepted < n:
        batch = max(1024, 2 * (n - accepted))
        z1 = _uniform_disc(rng, batch)
        z2 = _uniform_disc(rng, batch)
        keep = np.abs(z1) ** k < np.abs(z2)
        proposals += batch
        accepted += int(keep.sum())
        got1.append(z1[keep])
        got2.append(z2[keep])
    z1 = np.concatenate(got1)[:n]
    z2 = np.concatenate(got2)[:n]
    return HartogsSample(z1, z2, proposals, accepted)


def monte_carlo_integrate(f: Callable, k: int, n: int, seed: int = 0) -> QuadResult:
    """Volume times the sample mean of ``f``; ``error`` is one standard error."""
    smp = sample_hartogs(k, n, seed)
    vals = np.broadcast_to(np.asarray(f(smp.z1, smp.z2)), smp.z1.shape)
    vol = domain_volume(k)
    mean = vals.mean()
    se = vol * vals.std(ddof=1) / math.sqrt(n)
    return QuadResult(_as_output(vol * mean, np.iscomplexobj(vals)), float(se))
