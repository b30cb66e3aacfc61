"""Pseudo-hyperbolic geometry used to control Green-function sublevel sets.

The map ``F(z1, z2) = (z1**k / z2, z2)`` sends ``H_k`` into the bidisc, and
the bidisc Green function pulled back by ``F`` is a lower bound for the
pluricomplex Green function of ``H_k``.  The true sublevel set
``A_{z,M} = {G(., z) < -M}`` has no closed form; this module only ever
describes the computable superset ``{G_bidisc(F(.), F(z)) < -M}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, PreconditionError
from .kernels import HartogsPoint

#: Value of the pulled-back Green function at points with F(z) = F(w).
POLE = -math.inf

INV_E = math.exp(-1.0)

#: Brackets for (|1 - a conj(b)| / (1 - |b|^2), (1 - |a|^2)/(1 - |b|^2))
#: when the pseudo-hyperbolic distance of a and b is below 1/e.
FACT_R1_BOUNDS = (1.0 / (1.0 + INV_E), 1.0 / (1.0 - INV_E))
FACT_R2_BOUNDS = ((1.0 - INV_E ** 2) / (1.0 + INV_E) ** 2, 1.0 / (1.0 - INV_E) ** 2)


@dataclass(frozen=True)
class SublevelQuery:
    pole: HartogsPoint
    M: float
    probe: HartogsPoint

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")


def pseudo_hyperbolic(a, b):
    """``|(a - b) / (1 - a conj(b))|`` for ``a, b`` in the unit disc."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if np.any(np.abs(a) >= 1) or np.any(np.abs(b) >= 1):
        raise DomainError("pseudo-hyperbolic distance needs |a| < 1 and |b| < 1")
    d = np.abs((a - b) / (1.0 - a * np.conj(b)))
    return float(d) if d.ndim == 0 else d


def proper_map(k: int, z) -> tuple[complex, complex]:
    """``F(z) = (z1**k / z2, z2)``."""
    z = HartogsPoint.coerce(z)
    if not z.is_interior(k):
        raise DomainError(f"point {z.as_tuple()} is not interior to H_{k}")
    z1 = np.asarray(z.z1, dtype=complex)
    z2 = np.asarray(z.z2, dtype=complex)
    return z1 ** k / z2, z2


def eq_distances(k: int, z, w) -> tuple[float, float]:
    """The two pseudo-hyperbolic distances between ``F(z)`` and ``F(w)``."""
    fz = proper_map(k, z)
    fw = proper_map(k, w)
    return pseudo_hyperbolic(fz[0], fw[0]), pseudo_hyperbolic(fz[1], fw[1])


def _log(d):
    with np.errstate(divide="ignore"):
        return np.log(d)


def green_bidisc_pullback(k: int, z, w):
    """``G_bidisc(F(z), F(w))``, a lower bound for the Green function of ``H_k``.

    Returns :data:`POLE` (``-inf``) when ``F(z) = F(w)``.
    """
    d1, d2 = eq_distances(k, z, w)
    g = np.maximum(_log(d1), _log(d2))
    return float(g) if np.ndim(g) == 0 else g


def in_superset_A(q: SublevelQuery, k: int) -> bool:
    """Whether ``q.probe`` lies in the computable superset of ``A_{pole, M}``."""
    d1, d2 = eq_distances(k, q.probe, q.pole)
    r = math.exp(-q.M)
    return bool(d1 < r and d2 < r)


def fact_ratios(a, b) -> tuple[float, float]:
    """Comparability ratios for pseudo-hyperbolically close disc points.

    Returns ``(|1 - a conj(b)| / (1 - |b|^2), (1 - |a|^2) / (1 - |b|^2))``;
    both lie in :data:`FACT_R1_BOUNDS` and :data:`FACT_R2_BOUNDS` whenever the
    pseudo-hyperbolic distance is below ``1/e``.
    """
    if pseudo_hyperbolic(a, b) >= INV_E:
        raise PreconditionError("fact_ratios needs pseudo_hyperbolic(a, b) < 1/e")
    a = complex(a)
    b = complex(b)
    denom = 1.0 - abs(b) ** 2
    return abs(1.0 - a * b.conjugate()) / denom, (1.0 - abs(a) ** 2) / denom


def pseudo_hyperbolic_disc(center: complex, radius: float) -> tuple[complex, float]:
    """Euclidean center and radius of ``{w : pseudo_hyperbolic(w, center) < radius}``."""
    c = complex(center)
    r2 = radius * radius
    den = 1.0 - r2 * abs(c) ** 2
    return c * (1.0 - r2) / den, radius * (1.0 - abs(c) ** 2) / den
