"""The twelve acceptance criteria, each at its stated tolerance.

Run under pytest (a summary line per criterion is printed at the end) or
directly with ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import record_acceptance
from hartogs import cli
from hartogs.diagnostics import (
    BoundaryPath,
    blocki_check,
    canonical_grid,
    canonical_paths,
    carleson_report,
    lemma1_mass_ratio,
    mass_ratio_envelope,
    skwarczynski_counterexample,
    vanishing_profile,
    weak_failure_closed_form,
    weak_failure_profile,
)
from hartogs.dsl import BinOp, Num, OmSq, Pow, Var, eval_density, parse_density, parse_expr, to_source
from hartogs.geometry import FACT_R1_BOUNDS, FACT_R2_BOUNDS, fact_ratios, pseudo_hyperbolic
from hartogs.kernels import (
    Monomial,
    admissible_monomials,
    bergman_kernel,
    bergman_kernel_series,
    iter_points,
    kernel_st,
    monomial_norm_sq,
    p_kernel_st,
    random_interior_points,
)
from hartogs.measures import DensityMeasure, berezin_transform, t_transform
from hartogs.quadrature import forelli_rudin_J, integrate_hartogs, sample_hartogs

PI = math.pi
#: regression pin for the distance at j = 100 of the k = 2 counterexample
D_S_AT_100 = 0.99997474779360052


def criterion_1():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for k in (1, 2, 3):
        zs = list(iter_points(*random_interior_points(k, 100, rng)))
        ws = list(iter_points(*random_interior_points(k, 100, rng)))
        for z, w in zip(zs, ws):
            closed = complex(bergman_kernel(k, z, w))
            series = complex(bergman_kernel_series(k, z, w))
            worst = max(worst, abs(closed - series) / abs(series))
    elapsed = time.perf_counter() - t0
    return worst < 1e-8 and elapsed < 30, f"max rel err {worst:.2e}, {elapsed:.1f}s"


def criterion_2():
    t0 = time.perf_counter()
    worst_abs = 0.0
    worst_ratio = 0.0
    ok = True
    for k in (1, 2, 3):
        mu = DensityMeasure.builtin("lebesgue", k)
        grid = canonical_grid(k)
        assert len(grid) == 50
        for w in grid:
            res = berezin_transform(mu, k, w, route="direct")
            dev = abs(res.value - 1.0)
            worst_abs = max(worst_abs, dev)
            worst_ratio = max(worst_ratio, dev / res.error)
            ok &= dev <= 10 * res.error and dev <= 1e-3
    elapsed = time.perf_counter() - t0
    detail = f"max |B-1| {worst_abs:.2e}, max |B-1|/err {worst_ratio:.3f}, {elapsed:.0f}s"
    return ok and elapsed < 300, detail


def criterion_3():
    worst = 0.0
    for k in (1, 2, 3):
        for r in (0.0, 0.3, 0.5, 0.9, 0.95):
            a = r * np.exp(0.7j)
            s = forelli_rudin_J(a, k, "series")
            q = forelli_rudin_J(a, k, "quadrature")
            worst = max(worst, abs(s - q) / s)
    j0 = max(abs(forelli_rudin_J(0, k, m) - k * PI) for k in (1, 2, 3) for m in ("series", "quadrature"))
    return worst < 1e-6 and j0 < 1e-12, f"max rel diff {worst:.2e}, |J(0)-k pi| {j0:.1e}"


def criterion_4():
    worst = 0.0
    for k in (1, 2):
        monos = admissible_monomials(k, 20)
        for h in monos:
            res = integrate_hartogs(lambda z1, z2, h=h: np.abs(h(z1, z2)) ** 2, k)
            exact = monomial_norm_sq(k, h)
            worst = max(worst, abs(res.value - exact) / exact)
    inv = integrate_hartogs(lambda z1, z2: np.abs(z2) ** -2.0, 1).value
    has_inv = Monomial(0, -1) in admissible_monomials(1, 20)
    ok = worst < 1e-6 and abs(inv - PI ** 2) / PI ** 2 < 1e-6 and has_inv
    return ok, f"max rel err {worst:.2e}, ||1/z2||^2 = {inv:.12f}"


def criterion_5():
    mu = DensityMeasure.builtin("lebesgue", 1)
    worst_t = 0.0
    for w in canonical_grid(1):
        for route in ("split", "direct"):
            res = t_transform(mu, 1, w, route=route)
            worst_t = max(worst_t, abs(res.value - PI ** 4) / PI ** 4)
    rng = np.random.default_rng(7)
    z1, z2 = random_interior_points(1, 1000, rng)
    w1, w2 = random_interior_points(1, 1000, rng)
    s, t = z1 * np.conj(w1), z2 * np.conj(w2)
    kk = kernel_st(1, s, t)
    pk = p_kernel_st(1, s, t)
    worst_p = float(np.max(np.abs(pk - PI ** 2 * kk) / np.abs(pk)))
    prof = weak_failure_profile(1000)
    worst_w = max(abs(v - weak_failure_closed_form(j)) for j, v in zip(range(2, 1001), prof))
    ok = worst_t < 1e-3 and worst_p < 1e-14 and worst_w < 1e-10 and prof[-1] > 3.11
    detail = f"T rel err {worst_t:.1e}, P vs pi^2 K {worst_p:.1e}, weak profile err {worst_w:.1e}, j=1000 -> {prof[-1]:.6f}"
    return ok, detail


def criterion_6():
    decays = []
    for k in (1, 2):
        mu = DensityMeasure.builtin("vanishing_example", k)
        for path in canonical_paths(k):
            prof = vanishing_profile(mu, k, path, delta=2.0)
            vals = prof.weighted_t
            decays.append(vals[-1] / vals[0])
    mu = DensityMeasure.builtin("nonvanishing_example", 1)
    report = carleson_report(mu, 1, delta=2.0)
    verdicts = report.verdicts()
    t_vals = [r.t_value for r in report.grid.rows] + [r.t_value for p in report.paths for r in p.rows]
    t_dev = max(abs(v - PI ** 4) / PI ** 4 for v in t_vals)
    outer = vanishing_profile(mu, 1, BoundaryPath("to_outer", 1, c=0.5), delta=2.0)
    ok = (
        max(decays) < 1e-2
        and verdicts == {"carleson": "yes", "vanishing": "no"}
        and outer.verdict == "no"
        and t_dev < 1e-3
    )
    detail = f"worst decay ratio {max(decays):.1e}, verdicts {verdicts}, T vs pi^4 {t_dev:.1e}"
    return ok, detail


def criterion_7():
    js = [2, 5, 10, 50, 100]
    rows = skwarczynski_counterexample(js)
    zeros = all(r.first_distance == 0.0 and r.second_distance == 0.0 for r in rows)
    ds = [r.d_s for r in rows]
    increasing = all(b > a for a, b in zip(ds, ds[1:]))
    pinned = abs(ds[-1] - D_S_AT_100) < 1e-12
    ok = zeros and increasing and ds[-1] > 0.9 and pinned
    return ok, f"distances zero {zeros}, d_S {['%.6f' % d for d in ds]}"


def criterion_8():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    worst = math.inf
    count = 0
    for k in (1, 2):
        monos = admissible_monomials(k, 10)
        z1, z2 = random_interior_points(k, 100, rng)
        for z in iter_points(z1, z2):
            M = rng.uniform(0.5, 3.0)
            h = monos[rng.integers(len(monos))]
            worst = min(worst, blocki_check(k, z, M, h).ratio)
            count += 1
    elapsed = time.perf_counter() - t0
    return worst >= 1.0 and elapsed < 300, f"{count} triples, min ratio {worst:.4f}, {elapsed:.1f}s"


def criterion_9():
    a = lemma1_mass_ratio(1, 0.1, Monomial(0, -1))
    b = lemma1_mass_ratio(1, 0.1, Monomial(0, 0))
    exact_ok = all(
        abs(v - target) <= 1e-6 * target
        for v, target in ((a.closed_form, 0.01), (a.quadrature, 0.01), (b.closed_form, 1e-4), (b.quadrature, 1e-4))
    )
    deltas = (0.05, 0.1, 0.2)
    env = {k: mass_ratio_envelope(k, deltas, admissible_monomials(k, 10)) for k in (1, 2)}
    cross = max(
        abs(r.quadrature - r.closed_form) / r.closed_form
        for k in (1, 2)
        for d in deltas
        for r in [lemma1_mass_ratio(k, d, h) for h in admissible_monomials(k, 10)]
    )
    ok = exact_ok and all(c <= 1.0 for c in env.values()) and cross < 1e-6
    return ok, f"ratios {a.quadrature:.10f}, {b.quadrature:.3e}; envelope c {env}; cross-check {cross:.1e}"


def criterion_10():
    rng = np.random.default_rng(10)
    n = 100_000
    ra = np.sqrt(rng.random(n)) * 0.999
    a = ra * np.exp(2j * PI * rng.random(n))
    zeta = (1 / math.e) * np.sqrt(rng.random(n)) * 0.999999 * np.exp(2j * PI * rng.random(n))
    b = (a - zeta) / (1 - np.conj(a) * zeta)
    violations = 0
    tested = 0
    for x, y in zip(a, b):
        if pseudo_hyperbolic(x, y) >= 1 / math.e:
            continue
        tested += 1
        r1, r2 = fact_ratios(x, y)
        if not (FACT_R1_BOUNDS[0] <= r1 <= FACT_R1_BOUNDS[1] and FACT_R2_BOUNDS[0] <= r2 <= FACT_R2_BOUNDS[1]):
            violations += 1
    return violations == 0 and tested >= 99_000, f"{tested} gated pairs, {violations} violations"


def criterion_11(tmp_path):
    parts = []
    ok = True
    for k, p in ((1, 0.5), (2, 2.0 / 3.0)):
        smp = sample_hartogs(k, 100_000, seed=11)
        sigma = math.sqrt(p * (1 - p) / smp.proposals)
        dev = abs(smp.acceptance_rate - p) / sigma
        ok &= dev < 4
        parts.append(f"k={k} rate {smp.acceptance_rate:.5f} ({dev:.2f} sigma)")
    outs = []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        code = cli.main(["run", "--task", "repro:blocki", "--k", "2", "--seed", "5", "--out", str(out)])
        ok &= code == 0
        outs.append(out.read_bytes())
    rerun = tmp_path / "rerun.csv"
    code = cli.main(["run", "--config", str(tmp_path / "run0.csv.json"), "--out", str(rerun)])
    same = outs[0] == outs[1] == rerun.read_bytes()
    ok &= same and code == 0
    parts.append(f"CSV byte-identical {same}")
    return ok, ", ".join(parts)


def random_ast(rng, depth=0):
    """Random density AST (any shape the grammar can print)."""
    choice = int(rng.integers(0, 7)) if depth < 4 else int(rng.integers(0, 2))
    if choice == 0:
        return Num(float(rng.choice([0.0, 1.0, 2.5, 1e-3, rng.random() * 10, 3e10])))
    if choice == 1:
        return Var(str(rng.choice(["r1", "r2", "xi"])))
    if choice == 2:
        return OmSq(random_ast(rng, depth + 1))
    if choice == 3:
        return Pow(random_ast(rng, depth + 1), float(rng.choice([0.0, 1.0, 2.0, 3.0, 0.5, rng.random() * 4])))
    op = {4: "+", 5: "*", 6: "-"}[choice]
    return BinOp(op, random_ast(rng, depth + 1), random_ast(rng, depth + 1))


def criterion_12():
    rng = np.random.default_rng(12)
    trips = 0
    for _ in range(1000):
        e = random_ast(rng)
        trips += parse_expr(to_source(e)) == e
    vanish1 = parse_density("omsq(r2)^3 * omsq(xi)^3 * r1^0")
    vanish2 = parse_density("omsq(r2)^3 * omsq(xi)^3 * r1^2")
    nonvanish2 = parse_density("r1^2")
    v1 = eval_density(vanish1, (0, 0.5), 1)
    # (1 - 0.8^2)^3 (1 - (0.25/0.8)^2)^3 0.5^2 by hand
    v2 = eval_density(vanish2, (0.5, 0.8), 2)
    v2_hand = 0.36 ** 3 * (1 - 0.3125 ** 2) ** 3 * 0.25
    v2_builtin = float(DensityMeasure.builtin("vanishing_example", 2)(0.5, 0.8))
    n2 = eval_density(nonvanish2, (0.5, 0.8), 2)
    ok = (
        trips == 1000
        and v1 == 0.421875
        and abs(v2 - v2_hand) < 1e-15
        and abs(v2 - v2_builtin) < 1e-15
        and n2 == 0.25
    )
    return ok, f"{trips}/1000 round trips, vanishing(k=1) at (0,0.5) = {v1}, vanishing(k=2) = {v2:.12f}"


CRITERIA = {
    1: ("kernel oracle equivalence", criterion_1),
    2: ("Berezin normalization", criterion_2),
    3: ("Forelli-Rudin oracle", criterion_3),
    4: ("monomial norms", criterion_4),
    5: ("k=1 exact identities", criterion_5),
    6: ("product-measure examples", criterion_6),
    7: ("Skwarczynski counterexample", criterion_7),
    8: ("Blocki weaker-consequence sweep", criterion_8),
    9: ("mass ratio scaling", criterion_9),
    10: ("comparability bounds", criterion_10),
    11: ("sampler and CLI determinism", criterion_11),
    12: ("density language", criterion_12),
}


def _run(number, *args):
    title, fn = CRITERIA[number]
    try:
        passed, detail = fn(*args)
    except Exception as exc:  # recorded as a failure, then re-raised by pytest
        record_acceptance(number, title, False, f"{type(exc).__name__}: {exc}")
        raise
    record_acceptance(number, title, passed, detail)
    print(f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}")
    assert passed, detail


@pytest.mark.parametrize("number", [1, 3, 4, 5, 6, 7, 8, 9, 10, 12])
def test_criterion(number):
    _run(number)


@pytest.mark.slow
def test_criterion_2_berezin_normalization():
    _run(2)


def test_criterion_11_sampler_and_determinism(tmp_path):
    _run(11, tmp_path)


if __name__ == "__main__":
    import sys
    import tempfile
    from pathlib import Path

    failures = 0
    for n in sorted(CRITERIA):
        title, fn = CRITERIA[n]
        args = (Path(tempfile.mkdtemp()),) if n == 11 else ()
        try:
            passed, detail = fn(*args)
        except Exception as exc:
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        failures += not passed
        print(f"criterion {n:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}", flush=True)
    sys.exit(1 if failures else 0)
