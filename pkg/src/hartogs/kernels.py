r"""Bergman kernel of the fat Hartogs triangles and derived quantities.

The domain is

.. math:: \mathbb{H}_k = \{(z_1, z_2) \in \mathbb{C}^2 : |z_1|^k < |z_2| < 1\},

and every kernel below is expressed through the two products
``s = z1 * conj(w1)`` and ``t = z2 * conj(w2)``.  The ``*_st`` helpers take
``s`` and ``t`` directly and broadcast over numpy arrays; quadrature code
calls them on large node grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import ConvergenceError, DomainError

PI2 = math.pi ** 2

#: Caps on the number of terms in each factor series of the monomial expansion.
SERIES_MAX_TERMS = 4096


@dataclass(frozen=True)
class HartogsParams:
    """Shape parameter of the domain, ``|z1|**k < |z2| < 1``."""

    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")


@dataclass(frozen=True)
class HartogsPoint:
    """A point ``(z1, z2)`` of C^2.

    The fields may also be numpy arrays of equal shape, in which case the
    point stands for a batch of points.
    """

    z1: complex
    z2: complex

    @classmethod
    def coerce(cls, p) -> "HartogsPoint":
        if isinstance(p, cls):
            return p
        z1, z2 = p
        return cls(z1, z2)

    def as_tuple(self):
        return (self.z1, self.z2)

    def inner_ratio(self, k: int):
        """``|z1|**k / |z2|``, which is < 1 exactly on the inner side of the domain."""
        return np.abs(self.z1) ** k / np.abs(self.z2)

    def is_interior(self, k: int) -> bool:
        a1 = np.abs(self.z1)
        a2 = np.abs(self.z2)
        return bool(np.all((a1 ** k < a2) & (a2 < 1.0)))


@dataclass(frozen=True)
class Monomial:
    """The monomial ``z1**a * z2**b`` (``b`` may be negative)."""

    a: int
    b: int

    def in_a2(self, k: int) -> bool:
        return self.a >= 0 and k * (self.b + 1) + (self.a + 1) > 0

    def __call__(self, z1, z2):
        return np.asarray(z1, dtype=complex) ** self.a * np.asarray(z2, dtype=complex) ** self.b


def admissible_monomials(k: int, count: int) -> list[Monomial]:
    """The first ``count`` monomials of ``A^2(H_k)``, ordered by ``(a + |b|, a, b)``."""
    # degrees 0..count hold at least count + 1 admissible monomials (b = 0)
    n = count
    cands = [
        Monomial(a, b)
        for a in range(n + 1)
        for b in range(-n - 1, n + 1)
        if a + abs(b) <= n and Monomial(a, b).in_a2(k)
    ]
    cands.sort(key=lambda m: (m.a + abs(m.b), m.a, m.b))
    return cands[:count]


def _check_interior(k: int, *points: HartogsPoint) -> None:
    for p in points:
        if not p.is_interior(k):
            raise DomainError(f"point {p.as_tuple()} is not interior to H_{k}")


def _args(k, z, w):
    z = HartogsPoint.coerce(z)
    w = HartogsPoint.coerce(w)
    _check_interior(k, z, w)
    s = np.asarray(z.z1, dtype=complex) * np.conj(w.z1)
    t = np.asarray(z.z2, dtype=complex) * np.conj(w.z2)
    return s, t


def _scalar(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def poly_pq(k: int, s):
    r"""The polynomials in the numerator of the kernel formula.

    .. math::

        p_k(s) = \sum_{j=1}^{k-1} j(k-j) s^{j-1}, \qquad
        q_k(s) = \sum_{j=1}^{k} \bigl(j^2 + (k-j)^2 s^k\bigr) s^{j-1},

    with ``p_1 = 0``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    s = np.asarray(s, dtype=complex)
    p = np.zeros_like(s)
    q = np.zeros_like(s)
    # Horner, highest power first
    for j in range(k, 0, -1):
        q = q * s + j * j
        if j <= k - 1:
            p = p * s + j * (k - j)
    sk = s ** k
    tail = np.zeros_like(s)
    for j in range(k, 0, -1):
        tail = tail * s + (k - j) ** 2
    q = q + sk * tail
    return _scalar(p), _scalar(q)


def kernel_st(k: int, s, t):
    """Bergman kernel of ``H_k`` as a function of ``s`` and ``t`` (no domain check)."""
    p, q = poly_pq(k, s)
    sk = np.asarray(s, dtype=complex) ** k
    t = np.asarray(t, dtype=complex)
    num = p * t * t + q * t + sk * p
    return num / (k * PI2 * (1.0 - t) ** 2 * (t - sk) ** 2)


def p_kernel_st(k: int, s, t):
    t = np.asarray(t, dtype=complex)
    sk = np.asarray(s, dtype=complex) ** k
    return t / ((1.0 - t) ** 2 * (t - sk) ** 2)


def r_factor_st(k: int, s, t):
    p, q = poly_pq(k, s)
    t = np.asarray(t, dtype=complex)
    return q + p * t + np.asarray(s, dtype=complex) ** k / t * p


def bergman_kernel(k: int, z, w):
    """Evaluate ``K(z, w)`` from the closed form.

    Raises :class:`DomainError` unless both points are interior.
    """
    s, t = _args(k, z, w)
    return _scalar(kernel_st(k, s, t))


def kernel_diag(k: int, w):
    """``K(w, w)``, real and positive on the domain."""
    return np.real(bergman_kernel(k, w, w))


def p_kernel(k: int, z, w):
    """The simplified kernel ``t / ((1 - t)**2 (t - s**k)**2)``."""
    s, t = _args(k, z, w)
    return _scalar(p_kernel_st(k, s, t))


def r_factor(k: int, z, w):
    """``R = q_k(s) + p_k(s) t + (s**k / t) p_k(s)``.

    It satisfies ``K * k pi^2 (1 - t)^2 (t - s^k)^2 = t R``, and ``R(w, w) >= 1``.
    """
    s, t = _args(k, z, w)
    if np.any(t == 0):
        raise DomainError("r_factor is undefined when z2 * conj(w2) = 0")
    return _scalar(r_factor_st(k, s, t))


def skwarczynski_distance(k: int, z, w):
    """``(1 - |K(z,w)| / sqrt(K(z,z) K(w,w)))**0.5``, clipped into [0, 1]."""
    kzw = np.abs(bergman_kernel(k, z, w))
    kzz = kernel_diag(k, z)
    kww = kernel_diag(k, w)
    ratio = kzw / np.sqrt(kzz * kww)
    d = np.sqrt(np.clip(1.0 - ratio, 0.0, 1.0))
    return float(d) if np.ndim(d) == 0 else d


def domination_bound(k: int) -> float:
    """A constant ``C`` with ``|K(z,w)| <= C |P(z,w)|`` on ``H_k x H_k``.

    ``K = P R / (k pi^2)`` and ``|s|, |t|, |s^k/t| < 1`` bound ``|R|`` by
    ``q_k(1) + 2 p_k(1)`` term by term.
    """
    p1, q1 = poly_pq(k, 1.0)
    return float((q1.real + 2.0 * p1.real) / (k * PI2))


def _factor_series(k: int, c: int, x: complex, tol: float) -> complex:
    """Partial sum of ``sum_n (k n + c) x**n`` stopped by an explicit tail bound.

    The tail past index ``N`` is bounded by
    ``|x|^(N+1) [(k(N+1) + c)/(1-|x|) + k|x|/(1-|x|)^2]``.
    """
    ax = abs(x)
    if ax >= 1.0:
        raise ConvergenceError(f"series ratio {ax} is not < 1")
    n = np.arange(SERIES_MAX_TERMS + 1)
    logs = (n + 1) * math.log(ax) if ax > 0 else np.full(n.shape, -np.inf)
    with np.errstate(over="ignore"):
        bound = np.exp(logs) * ((k * (n + 1) + c) / (1 - ax) + k * ax / (1 - ax) ** 2)
    # tolerance is relative to the leading term c
    ok = np.nonzero(bound <= tol * c)[0]
    if ok.size == 0:
        raise ConvergenceError(
            f"factor series with ratio {ax:.17g} needs more than {SERIES_MAX_TERMS} terms"
        )
    N = int(ok[0])
    terms = (k * n[: N + 1] + c) * np.power(complex(x), n[: N + 1])
    return complex(np.sum(terms))


def bergman_kernel_series(k: int, z, w, tol: float = 1e-12) -> complex:
    r"""``K(z, w)`` from the orthonormal-monomial expansion.

    Sums ``s^a t^b / ||z1^a z2^b||^2`` over all monomials of ``A^2(H_k)``.
    Writing ``a = k q + r`` and ``b = m - q - 1`` (the smallest admissible
    ``b`` for a given ``a`` is ``-q - 1``) the squared norm factors, giving

    .. math::

        K = \frac{1}{k\pi^2 t}\sum_{r=0}^{k-1} s^r
            \Bigl(\sum_{q\ge0}(kq+r+1)u^q\Bigr)\Bigl(\sum_{m\ge0}(km+r+1)t^m\Bigr),
        \quad u = s^k/t.

    Each factor is truncated once its tail bound drops below ``tol`` relative
    to the leading term.  Points too close to ``|t| = 1`` or ``|t| = |s|^k``
    exhaust :data:`SERIES_MAX_TERMS` and raise :class:`ConvergenceError`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    s, t = _args(k, z, w)
    s, t = complex(s), complex(t)
    u = s ** k / t
    total = 0j
    for r in range(k):
        a_sum = _factor_series(k, r + 1, u, tol)
        b_sum = _factor_series(k, r + 1, t, tol)
        total += s ** r * a_sum * b_sum
    return total / (k * PI2 * t)


def monomial_norm_sq(k: int, m: Monomial) -> float:
    """``||z1^a z2^b||^2`` on ``H_k``; ``math.inf`` when it is not square integrable."""
    m = m if isinstance(m, Monomial) else Monomial(*m)
    if not m.in_a2(k):
        return math.inf
    return k * PI2 / ((m.a + 1) * (k * (m.b + 1) + m.a + 1))


def domain_volume(k: int) -> float:
    return monomial_norm_sq(k, Monomial(0, 0))


def disc_kernel(a, b):
    """Bergman kernel of the unit disc, ``1 / (pi (1 - a conj(b))**2)``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any(np.abs(a) >= 1) or np.any(np.abs(b) >= 1):
        raise DomainError("disc kernel needs |a| < 1 and |b| < 1")
    return _scalar(1.0 / (math.pi * (1.0 - a * np.conj(b)) ** 2))


def random_interior_points(k: int, n: int, rng: np.random.Generator, margin: float = 0.05):
    """Random points kept ``margin`` away from all three boundary strata.

    Moduli are drawn with ``margin <= |z2| <= 1 - margin`` and
    ``|z1|^k / |z2| <= 1 - margin``; phases are uniform.  Returns arrays
    ``(z1, z2)``.
    """
    r2 = rng.uniform(margin, 1.0 - margin, n)
    ratio = rng.uniform(0.0, 1.0 - margin, n)
    r1 = (ratio * r2) ** (1.0 / k)
    th1 = rng.uniform(0, 2 * math.pi, n)
    th2 = rng.uniform(0, 2 * math.pi, n)
    return r1 * np.exp(1j * th1), r2 * np.exp(1j * th2)


def iter_points(z1, z2) -> Iterator[HartogsPoint]:
    for a, b in zip(np.ravel(z1), np.ravel(z2)):
        yield HartogsPoint(complex(a), complex(b))


def empirical_domination_constant(k: int, n: int = 10_000, seed: int = 0, margin: float = 0.05):
    """Largest ``|K|/|P|`` seen on ``n`` random interior pairs."""
    rng = np.random.default_rng(seed)
    z1, z2 = random_interior_points(k, n, rng, margin)
    w1, w2 = random_interior_points(k, n, rng, margin)
    s = z1 * np.conj(w1)
    t = z2 * np.conj(w2)
    return float(np.max(np.abs(kernel_st(k, s, t)) / np.abs(p_kernel_st(k, s, t))))
