"""Desk-scale checks of the Carleson and vanishing-Carleson criteria.

Finite grids cannot certify a supremum or a limit, so every verdict here
is one of ``"yes"``, ``"no"`` or ``"inconclusive"`` and is a pure function
of the numbers recorded next to it (see :func:`carleson_verdict` and
:func:`vanishing_verdict`).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate

from .exceptions import ConvergenceError, PreconditionError
from .geometry import eq_distances, pseudo_hyperbolic_disc
from .kernels import (
    HartogsPoint,
    Monomial,
    _check_interior,
    bergman_kernel,
    kernel_diag,
    monomial_norm_sq,
    skwarczynski_distance,
)
from .measures import DensityMeasure, berezin_transform, t_transform
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_hartogs

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"
STABLE_FACTOR = 1.1
GROWTH_FACTOR = 10.0
VANISH_THRESHOLD = 1e-2
PERSIST_FACTOR = 0.5
DELTA_SWEEP = (0.5, 1.0, 2.0, 4.0)


# Grids and paths ---------------------------------------------------------


def boundary_levels(n: int, lo: float = 0.1, hi: float = 0.95) -> np.ndarray:
    """``n`` values from ``lo`` to ``hi`` with ``1 - x`` in geometric progression."""
    if n == 1:
        return np.array([lo])
    i = np.arange(n)
    return 1.0 - (1.0 - lo) * ((1.0 - hi) / (1.0 - lo)) ** (i / (n - 1))


def canonical_grid(k: int, n_r2: int = 10, n_ratio: int = 5) -> list[HartogsPoint]:
    """Tensor grid of ``|w2|`` and ``|w1|^k/|w2|`` levels in ``[0.1, 0.95]``, phases 0.

    Points are ordered from the deep interior toward the boundary (by
    ``min(1 - |w2|, 1 - ratio)`` descending), which is the order the
    quartile rule in :func:`carleson_verdict` expects.
    """
    pts = []
    for r2 in boundary_levels(n_r2):
        for ratio in boundary_levels(n_ratio):
            pts.append((min(1 - r2, 1 - ratio), -r2, -ratio, HartogsPoint((ratio * r2) ** (1.0 / k), r2)))
    pts.sort(key=lambda p: (-p[0], p[1], p[2]))
    return [p[-1] for p in pts]


PATH_KINDS = ("to_origin", "to_outer", "to_inner", "custom")


@dataclass(frozen=True)
class BoundaryPath:
    """A sequence ``w_j`` tending to one stratum of the boundary.

    ``to_origin``: ``(c / j^2, 1 / j)``; ``to_outer``: ``(c, 1 - 1/j)``;
    ``to_inner``: ``|w1|^k / |w2| = 1 - 1/j`` at ``|w2| = r2``; ``custom``:
    the given ``points``.  ``j`` runs geometrically from ``j_start`` to
    ``j_end`` over ``length`` values; non-interior leading points are
    dropped.
    """

    kind: str
    k: int
    length: int = 12
    c: float = 1.0
    r2: float = 0.5
    j_start: float = 2.0
    j_end: float = 64.0
    points: tuple = ()

    def __post_init__(self):
        if self.kind not in PATH_KINDS:
            raise ValueError(f"unknown path kind {self.kind!r}; choose from {PATH_KINDS}")
        if self.kind == "custom":
            if not self.points:
                raise ValueError("a custom path needs points")
            for p in self.points:
                _check_interior(self.k, HartogsPoint.coerce(p))
        elif self.length < 2 or not 1 < self.j_start < self.j_end:
            raise ValueError("need length >= 2 and 1 < j_start < j_end")

    def _point(self, j: float) -> HartogsPoint:
        if self.kind == "to_origin":
            return HartogsPoint(complex(self.c / j ** 2), complex(1.0 / j))
        if self.kind == "to_outer":
            return HartogsPoint(complex(self.c), complex(1.0 - 1.0 / j))
        ratio = 1.0 - 1.0 / j
        return HartogsPoint(complex((ratio * self.r2) ** (1.0 / self.k)), complex(self.r2))

    def samples(self) -> list[tuple[float, HartogsPoint]]:
        if self.kind == "custom":
            return [(float(i + 1), HartogsPoint.coerce(p)) for i, p in enumerate(self.points)]
        js = np.geomspace(self.j_start, self.j_end, self.length)
        out = [(float(j), self._point(float(j))) for j in js]
        out = [(j, p) for j, p in out if p.is_interior(self.k)]
        if len(out) < 2:
            raise ValueError(f"{self.kind} path has fewer than two interior points")
        return out


def canonical_paths(k: int, length: int = 16, j_end: float = 1000.0) -> list[BoundaryPath]:
    """One path per boundary stratum, reaching within ``1/j_end`` of it."""
    return [
        BoundaryPath("to_origin", k, length, j_end=j_end),
        BoundaryPath("to_outer", k, length, c=0.5, j_end=j_end),
        BoundaryPath("to_inner", k, length, j_end=j_end),
    ]


# Verdicts ----------------------------------------------------------------


def _finite(values) -> np.ndarray:
    v = np.asarray(list(values), dtype=float)
    return v[np.isfinite(v)]


def carleson_verdict(values: Sequence[float]) -> str:
    """Quartile rule on values ordered toward the boundary.

    ``yes`` if the last-quartile max is at most 1.1 times the previous one;
    ``no`` if quartile maxima grow at least tenfold at every step;
    ``inconclusive`` otherwise (including fewer than four finite values).
    """
    v = _finite(values)
    if v.size < 4:
        return INCONCLUSIVE
    qmax = [float(np.max(q)) for q in np.array_split(v, 4)]
    if qmax[3] <= STABLE_FACTOR * qmax[2]:
        return YES
    if all(b >= GROWTH_FACTOR * a and b > 0 for a, b in zip(qmax, qmax[1:])):
        return NO
    return INCONCLUSIVE


def vanishing_verdict(profile: Sequence[float], threshold: float = VANISH_THRESHOLD) -> str:
    """``yes`` if the last value drops below ``threshold`` times the first.

    ``no`` if the whole last quartile stays above half the first value;
    an identically zero profile counts as ``yes``.
    """
    v = _finite(profile)
    if v.size < 2:
        return INCONCLUSIVE
    if np.all(v == 0):
        return YES
    first = v[0]
    if v[-1] < threshold * first:
        return YES
    last_q = np.array_split(v, 4)[-1] if v.size >= 4 else v[-1:]
    if np.min(last_q) >= PERSIST_FACTOR * first:
        return NO
    return INCONCLUSIVE


def combine_verdicts(verdicts: Iterable[str]) -> str:
    """Any ``no`` wins; all ``yes`` gives ``yes``; otherwise inconclusive."""
    vs = list(verdicts)
    if not vs:
        return INCONCLUSIVE
    if NO in vs:
        return NO
    if all(v == YES for v in vs):
        return YES
    return INCONCLUSIVE


# Report ------------------------------------------------------------------


@dataclass
class GridRow:
    w1: complex
    w2: complex
    berezin: float = math.nan
    berezin_err: float = math.nan
    t_value: float = math.nan
    t_err: float = math.nan
    error: str = ""


@dataclass
class CarlesonProfile:
    rows: list
    include_berezin: bool = True

    @property
    def verdict_berezin(self) -> str:
        return carleson_verdict(r.berezin for r in self.rows) if self.include_berezin else INCONCLUSIVE

    @property
    def verdict_t(self) -> str:
        return carleson_verdict(r.t_value for r in self.rows)

    @property
    def verdict(self) -> str:
        if not self.include_berezin:
            return self.verdict_t
        b, t = self.verdict_berezin, self.verdict_t
        return b if b == t else INCONCLUSIVE


@dataclass
class PathRow:
    j: float
    w1: complex
    w2: complex
    t_value: float = math.nan
    t_err: float = math.nan
    weighted_t: float = math.nan
    berezin: float = math.nan
    berezin_err: float = math.nan
    weighted_berezin: float = math.nan
    error: str = ""


@dataclass
class VanishingProfile:
    path: BoundaryPath
    delta: float
    rows: list
    threshold: float = VANISH_THRESHOLD

    @property
    def weighted_t(self) -> list:
        return [r.weighted_t for r in self.rows]

    @property
    def verdict(self) -> str:
        return vanishing_verdict(self.weighted_t, self.threshold)

    @property
    def verdict_berezin(self) -> str:
        return vanishing_verdict([r.weighted_berezin for r in self.rows], self.threshold)


@dataclass
class DiagnosticsReport:
    """Grid and path tables with verdicts recomputed from the stored numbers."""

    k: int
    measure: str
    spec: dict
    grid: Optional[CarlesonProfile] = None
    paths: list = field(default_factory=list)
    tolerances: dict = field(
        default_factory=lambda: {
            "stable_factor": STABLE_FACTOR,
            "growth_factor": GROWTH_FACTOR,
            "vanish_threshold": VANISH_THRESHOLD,
            "persist_factor": PERSIST_FACTOR,
        }
    )

    def verdicts(self) -> dict:
        carleson = self.grid.verdict if self.grid is not None else INCONCLUSIVE
        vanishing = combine_verdicts(p.verdict for p in self.paths) if self.paths else INCONCLUSIVE
        # a non-Carleson measure cannot be vanishing Carleson
        if carleson == NO:
            vanishing = NO
        return {"carleson": carleson, "vanishing": vanishing}


def _spec_dict(spec: QuadratureSpec) -> dict:
    return asdict(spec)


# Transform profiles ------------------------------------------------------


def carleson_sup_profile(
    mu: DensityMeasure,
    k: int,
    grid: Sequence,
    spec: Optional[QuadratureSpec] = None,
    include_berezin: bool = True,
) -> CarlesonProfile:
    """Tabulate ``B_mu`` and ``T_mu`` on ``grid``; failures are recorded per row."""
    if not grid:
        raise ValueError("grid must be non-empty")
    spec = spec or DEFAULT_SPEC
    rows = []
    for p in grid:
        w = HartogsPoint.coerce(p)
        _check_interior(k, w)
        row = GridRow(complex(w.z1), complex(w.z2))
        msgs = []
        try:
            res = t_transform(mu, k, w, spec)
            row.t_value, row.t_err = float(res.value), float(res.error)
        except ConvergenceError as exc:
            msgs.append(f"T: {exc}")
        if include_berezin:
            try:
                res = berezin_transform(mu, k, w, spec)
                row.berezin, row.berezin_err = float(res.value), float(res.error)
            except ConvergenceError as exc:
                msgs.append(f"B: {exc}")
        row.error = "; ".join(msgs)
        rows.append(row)
    return CarlesonProfile(rows, include_berezin)


def vanishing_profile(
    mu: DensityMeasure,
    k: int,
    path: BoundaryPath,
    delta: float = 2.0,
    spec: Optional[QuadratureSpec] = None,
    include_berezin: bool = False,
    threshold: float = VANISH_THRESHOLD,
) -> VanishingProfile:
    """``|w2|^delta T_mu(w_j)`` (and optionally the Berezin column) along ``path``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if path.k != k:
        raise PreconditionError(f"path was built for k={path.k}, not k={k}")
    spec = spec or DEFAULT_SPEC
    rows = []
    for j, w in path.samples():
        row = PathRow(j, complex(w.z1), complex(w.z2))
        weight = abs(complex(w.z2)) ** delta
        msgs = []
        try:
            res = t_transform(mu, k, w, spec)
            row.t_value, row.t_err = float(res.value), float(res.error)
            row.weighted_t = weight * row.t_value
        except ConvergenceError as exc:
            msgs.append(f"T: {exc}")
        if include_berezin:
            try:
                res = berezin_transform(mu, k, w, spec)
                row.berezin, row.berezin_err = float(res.value), float(res.error)
                row.weighted_berezin = weight * row.berezin
            except ConvergenceError as exc:
                msgs.append(f"B: {exc}")
        row.error = "; ".join(msgs)
        rows.append(row)
    return VanishingProfile(path, float(delta), rows, threshold)


def carleson_report(
    mu: DensityMeasure,
    k: int,
    grid: Optional[Sequence] = None,
    paths: Optional[Sequence[BoundaryPath]] = None,
    delta: float = 2.0,
    spec: Optional[QuadratureSpec] = None,
    include_berezin: bool = True,
) -> DiagnosticsReport:
    """Grid profile plus vanishing profiles along ``paths`` in one report."""
    spec = spec or DEFAULT_SPEC
    grid = canonical_grid(k) if grid is None else grid
    paths = canonical_paths(k) if paths is None else paths
    report = DiagnosticsReport(k, mu.label, _spec_dict(spec))
    report.grid = carleson_sup_profile(mu, k, grid, spec, include_berezin)
    report.paths = [vanishing_profile(mu, k, p, delta, spec) for p in paths]
    return report


# Test-function checks ----------------------------------------------------


@dataclass
class MonomialRow:
    monomial: Monomial
    mass: float
    mass_err: float
    norm_sq: float
    ratio: float


@dataclass
class MonomialCheckReport:
    rows: list
    sup_berezin: Optional[float] = None

    @property
    def max_ratio(self) -> float:
        return max(r.ratio for r in self.rows)

    @property
    def consistent(self) -> Optional[bool]:
        """Whether every ratio is within ``sup B`` times the empirical constant."""
        if self.sup_berezin is None:
            return None
        bound = self.max_ratio * max(self.sup_berezin, 1.0)
        return all(r.ratio <= bound * (1 + 1e-9) for r in self.rows)


def _require_a2(k: int, h: Monomial):
    if not h.in_a2(k):
        raise PreconditionError(f"z1^{h.a} z2^{h.b} is not square integrable on H_{k}")


def monomial_carleson_check(
    mu: DensityMeasure,
    k: int,
    monomials: Sequence[Monomial],
    spec: Optional[QuadratureSpec] = None,
    sup_berezin: Optional[float] = None,
) -> MonomialCheckReport:
    """``int |h|^2 dmu / ||h||^2`` for each monomial ``h``."""
    spec = spec or DEFAULT_SPEC
    for h in monomials:
        _require_a2(k, h)
    rows = []
    for h in monomials:

        def fn(z1, z2, h=h):
            return np.abs(h(z1, z2)) ** 2 * mu(z1, z2)

        res = integrate_hartogs(fn, k, spec)
        norm = monomial_norm_sq(k, h)
        rows.append(MonomialRow(h, float(res.value), float(res.error), norm, float(res.value) / norm))
    return MonomialCheckReport(rows, sup_berezin)


# Blocki estimate ---------------------------------------------------------


@dataclass(frozen=True)
class BlockiResult:
    lhs: float
    rhs: float
    ratio: float

    @property
    def passed(self) -> bool:
        return self.ratio >= 1.0


def power_integral_over_disc(center: complex, radius: float, alpha: float) -> float:
    """``int_{|x - center| < radius} |x|^alpha dV(x)`` for ``alpha > -2``.

    Integrates in polar coordinates about the origin: the circle of radius
    ``rho`` meets the disc in an arc of length ``2 rho arccos(...)``.  The
    substitution ``rho = lo + (hi - lo)(1 - cos s)/2`` removes the square-root
    behaviour of the arc length at both ends.
    """
    if alpha <= -2:
        raise ValueError("alpha must exceed -2")
    d = abs(complex(center))
    r = float(radius)
    total = 0.0
    inner = r - d
    if inner > 0:
        total += 2 * math.pi * inner ** (alpha + 2) / (alpha + 2)
    lo, hi = abs(r - d), r + d
    if 0 < d <= 1e-6 * r:
        # thin annulus: arc angle ~ arccos((rho - r)/d); error is O((d/r)^2)
        return total + 2.0 * math.pi * d * r ** (alpha + 1)
    if d > 0 and hi > lo:

        half_span = 0.5 * (hi - lo)

        def arc(s):
            rho = lo + half_span * (1.0 - math.cos(s))
            if rho <= 0.0:
                return 0.0
            c = (rho * rho + d * d - r * r) / (2 * rho * d)
            return 2.0 * math.acos(min(1.0, max(-1.0, c))) * rho ** (alpha + 1) * half_span * math.sin(s)

        val, _ = integrate.quad(arc, 0.0, math.pi, epsabs=0.0, epsrel=1e-12, limit=200)
        total += val
    return total


def blocki_lhs(k: int, z, M: float, h: Monomial) -> float:
    """``int |h|^2 dV`` over ``{z' : G_bidisc(F(z'), F(z)) < -M}``.

    In ``(xi, z2)`` coordinates the set is a product of two
    pseudo-hyperbolic discs and ``|h|^2 dV`` factors into powers of
    ``|xi|`` and ``|z2|``.
    """
    z = HartogsPoint.coerce(z)
    _check_interior(k, z)
    r = math.exp(-M)
    xi = complex(z.z1) ** k / complex(z.z2)
    c1, r1 = pseudo_hyperbolic_disc(xi, r)
    c2, r2 = pseudo_hyperbolic_disc(complex(z.z2), r)
    i1 = power_integral_over_disc(c1, r1, 2.0 * (h.a + 1) / k - 2.0)
    i2 = power_integral_over_disc(c2, r2, 2.0 * (h.a + 1) / k + 2.0 * h.b)
    return i1 * i2 / k


def blocki_check(k: int, z, M: float, h: Monomial, spec: Optional[QuadratureSpec] = None) -> BlockiResult:
    """Compare the superset integral with ``e^{-4M} |h(z)|^2 / K(z,z)``.

    ``spec`` is accepted for interface symmetry; the one-dimensional
    integrals use adaptive scipy quadrature.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    _require_a2(k, h)
    z = HartogsPoint.coerce(z)
    lhs = blocki_lhs(k, z, M, h)
    rhs = math.exp(-4.0 * M) * abs(complex(h(z.z1, z.z2))) ** 2 / kernel_diag(k, z)
    ratio = math.inf if rhs == 0 else lhs / rhs
    return BlockiResult(float(lhs), float(rhs), float(ratio))


# Mass scaling near the origin --------------------------------------------


@dataclass(frozen=True)
class MassRatio:
    closed_form: float
    quadrature: Optional[float] = None
    quadrature_err: Optional[float] = None


def mass_ratio_closed_form(k: int, delta: float, h: Monomial) -> float:
    """``int_{|z2| < delta} |h|^2 / int |h|^2 = delta^{2(k(b+1)+a+1)/k}``."""
    _require_a2(k, h)
    return delta ** (2.0 * (k * (h.b + 1) + h.a + 1) / k)


def lemma1_mass_ratio(
    k: int, delta: float, h: Monomial, spec: Optional[QuadratureSpec] = None, cross_check: bool = True
) -> MassRatio:
    """Fraction of ``||h||^2`` carried by ``{|z2| < delta}``, with a quadrature cross-check."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    closed = mass_ratio_closed_form(k, delta, h)
    if not cross_check:
        return MassRatio(closed)
    res = integrate_hartogs(lambda z1, z2: np.abs(h(z1, z2)) ** 2, k, spec, r2_range=(0.0, delta))
    norm = monomial_norm_sq(k, h)
    return MassRatio(closed, float(res.value) / norm, float(res.error) / norm)


def mass_ratio_envelope(k: int, deltas: Sequence[float], monomials: Sequence[Monomial]) -> float:
    """Smallest ``c`` with ``ratio <= c delta^{2/k}`` over the given sweep."""
    return max(mass_ratio_closed_form(k, d, h) / d ** (2.0 / k) for d in deltas for h in monomials)


# Examples from the kernel formula ----------------------------------------


def weak_failure_profile(j_max: int) -> list[float]:
    """``1 / (|w2| sqrt(K(w,w)))`` at ``w_j = (1/j^2, 1/j)`` on the k = 1 domain, ``j = 2..j_max``."""
    if j_max < 2:
        raise ValueError("j_max must be >= 2")
    out = []
    for j in range(2, j_max + 1):
        w = HartogsPoint(complex(1.0 / j ** 2), complex(1.0 / j))
        out.append(1.0 / (abs(w.z2) * math.sqrt(kernel_diag(1, w))))
    return out


def weak_failure_closed_form(j: int) -> float:
    return math.pi * (1.0 - 1.0 / j ** 2) ** 2


@dataclass(frozen=True)
class SkwarczynskiRow:
    j: int
    first_distance: float
    second_distance: float
    d_s: float
    kernel_ratio: float


def skwarczynski_pair(j: int) -> tuple[HartogsPoint, HartogsPoint]:
    c = 1.0 - 1.0 / j
    return HartogsPoint(complex(-c), complex(c)), HartogsPoint(complex(c), complex(c))


def skwarczynski_counterexample(j_list: Sequence[int]) -> list[SkwarczynskiRow]:
    """Pairs on the k = 2 domain with equal images under ``F`` but ``d_S -> 1``."""
    rows = []
    for j in j_list:
        if j < 2:
            raise ValueError("j must be >= 2")
        z, w = skwarczynski_pair(j)
        d1, d2 = eq_distances(2, z, w)
        ratio = abs(complex(bergman_kernel(2, z, w))) / math.sqrt(kernel_diag(2, z) * kernel_diag(2, w))
        rows.append(SkwarczynskiRow(int(j), float(d1), float(d2), float(skwarczynski_distance(2, z, w)), ratio))
    return rows


def skwarczynski_ratio_closed_form(j: int) -> float:
    """``|K(z_j, w_j)| / K(z_j, z_j) = (1 - c^2)^2 / (1 + 6c^2 + c^4)`` with ``c = 1 - 1/j``."""
    c = 1.0 - 1.0 / j
    return (1 - c * c) ** 2 / (1 + 6 * c * c + c ** 4)
