"""Batch tasks: each turns a :class:`RunConfig` into a fixed-column table.

Column orders are part of the output contract and are listed in
:data:`COLUMNS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as dg
from .config import PathConfig, RunConfig
from .exceptions import ConvergenceError
from .measures import berezin_transform, t_transform
from .kernels import (
    HartogsPoint,
    Monomial,
    admissible_monomials,
    bergman_kernel,
    bergman_kernel_series,
    iter_points,
    p_kernel,
    random_interior_points,
    skwarczynski_distance,
)

OK, INCONCLUSIVE, FAILED = "ok", "inconclusive", "failed"
EXIT_CODES = {OK: 0, INCONCLUSIVE: 2, FAILED: 1}

_W = ["w1_re", "w1_im", "w2_re", "w2_im"]

COLUMNS = {
    "kernel-eval": ["index", "z1_re", "z1_im", "z2_re", "z2_im", *_W, "K_re", "K_im",
                    "K_series_re", "K_series_im", "rel_err", "P_re", "P_im", "d_S", "err"],
    "berezin-grid": ["index", *_W, "berezin", "berezin_err", "t", "t_err", "err"],
    "vanishing-profile": ["path", "delta", "j", *_W, "t", "t_err", "weighted_t",
                          "berezin", "berezin_err", "weighted_berezin", "err"],
    "carleson-check": ["section", "path", "delta", "j", *_W, "berezin", "berezin_err",
                       "t", "t_err", "weighted_t", "err"],
    "repro:weak-limit": ["j", "value", "closed_form", "abs_err"],
    "repro:skwarczynski": ["j", "first_distance", "second_distance", "d_S", "kernel_ratio",
                           "kernel_ratio_closed_form"],
    "repro:lemma1": ["delta", "a", "b", "closed_form", "quadrature", "quadrature_err",
                     "envelope_ratio", "err"],
    "repro:blocki": ["index", "z1_re", "z1_im", "z2_re", "z2_im", "M", "a", "b", "lhs", "rhs",
                     "ratio", "passed"],
}


@dataclass
class TaskOutcome:
    columns: list
    rows: list
    status: str = OK
    summary: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


def _c(z):
    z = complex(z)
    return [z.real, z.imag]


def _pt(pair) -> HartogsPoint:
    (a, b), (c, d) = pair
    return HartogsPoint(complex(a, b), complex(c, d))


def _all_failed(rows, col) -> bool:
    return bool(rows) and all(r[col] for r in rows)


# Tasks -------------------------------------------------------------------


def kernel_eval(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    k = cfg.k
    pairs = [(_pt(q.z), _pt(q.w)) for q in p.pairs]
    if p.n_random:
        rng = np.random.default_rng(cfg.seed)
        zs = list(iter_points(*random_interior_points(k, p.n_random, rng, p.margin)))
        ws = list(iter_points(*random_interior_points(k, p.n_random, rng, p.margin)))
        pairs.extend(zip(zs, ws))
    rows = []
    for i, (z, w) in enumerate(pairs):
        kz = complex(bergman_kernel(k, z, w))
        err = ""
        try:
            ks = complex(bergman_kernel_series(k, z, w, p.series_tol))
            rel = abs(kz - ks) / abs(ks)
        except ConvergenceError as exc:
            ks, rel, err = complex(math.nan, math.nan), math.nan, str(exc)
        pk = complex(p_kernel(k, z, w))
        rows.append([i, *_c(z.z1), *_c(z.z2), *_c(w.z1), *_c(w.z2), *_c(kz), *_c(ks), rel,
                     *_c(pk), float(skwarczynski_distance(k, z, w)), err])
    worst = max((r[14] for r in rows if math.isfinite(r[14])), default=math.nan)
    status = FAILED if _all_failed(rows, -1) else OK
    return TaskOutcome(COLUMNS["kernel-eval"], rows, status, {"max_rel_err": worst})


def berezin_grid(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    mu = cfg.measure.build(cfg.k)
    spec = cfg.spec.build()
    grid = dg.canonical_grid(cfg.k, p.n_r2, p.n_ratio)
    rows = []
    for i, w in enumerate(grid):
        row = [i, *_c(w.z1), *_c(w.z2), math.nan, math.nan, math.nan, math.nan, ""]
        msgs = []
        try:
            res = berezin_transform(mu, cfg.k, w, spec)
            row[5], row[6] = float(res.value), float(res.error)
        except ConvergenceError as exc:
            msgs.append(f"B: {exc}")
        if p.include_t:
            try:
                res = t_transform(mu, cfg.k, w, spec)
                row[7], row[8] = float(res.value), float(res.error)
            except ConvergenceError as exc:
                msgs.append(f"T: {exc}")
        row[9] = "; ".join(msgs)
        rows.append(row)
    summary = {"verdict_berezin": dg.carleson_verdict(r[5] for r in rows)}
    if p.include_t:
        summary["verdict_t"] = dg.carleson_verdict(r[7] for r in rows)
    status = FAILED if _all_failed(rows, -1) else OK
    return TaskOutcome(COLUMNS["berezin-grid"], rows, status, summary)


def build_path(k: int, pc: PathConfig) -> dg.BoundaryPath:
    kw = dict(length=pc.length, r2=pc.r2, j_start=pc.j_start, j_end=pc.j_end)
    if pc.c is not None:
        kw["c"] = pc.c
    if pc.kind == "custom":
        kw["points"] = tuple(_pt(q) for q in pc.points)
    return dg.BoundaryPath(pc.kind, k, **kw)


def _delta_verdict(per_delta: dict) -> str:
    """Some delta works on every path: yes; every delta fails somewhere: no."""
    combined = [dg.combine_verdicts(v) for v in per_delta.values()]
    if dg.YES in combined:
        return dg.YES
    if combined and all(v == dg.NO for v in combined):
        return dg.NO
    return dg.INCONCLUSIVE


def _vanishing_rows(cfg, mu, spec, vp_params, with_section: bool):
    rows = []
    per_delta = {}
    for delta in vp_params.deltas:
        verdicts = []
        for pc in vp_params.paths:
            path = build_path(cfg.k, pc)
            prof = dg.vanishing_profile(mu, cfg.k, path, delta, spec, vp_params.include_berezin,
                                        vp_params.threshold)
            verdicts.append(prof.verdict)
            for r in prof.rows:
                w = [*_c(r.w1), *_c(r.w2)]
                if with_section:
                    rows.append(["path", pc.kind, delta, r.j, *w, r.berezin, r.berezin_err,
                                 r.t_value, r.t_err, r.weighted_t, r.error])
                else:
                    rows.append([pc.kind, delta, r.j, *w, r.t_value, r.t_err, r.weighted_t,
                                 r.berezin, r.berezin_err, r.weighted_berezin, r.error])
        per_delta[repr(float(delta))] = verdicts
    return rows, per_delta


def vanishing_task(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    mu = cfg.measure.build(cfg.k)
    rows, per_delta = _vanishing_rows(cfg, mu, cfg.spec.build(), p, with_section=False)
    verdict = _delta_verdict(per_delta)
    status = FAILED if _all_failed(rows, -1) else (OK if verdict != dg.INCONCLUSIVE else INCONCLUSIVE)
    summary = {"verdicts_by_delta": per_delta, "vanishing": verdict}
    return TaskOutcome(COLUMNS["vanishing-profile"], rows, status, summary)


def carleson_task(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    mu = cfg.measure.build(cfg.k)
    spec = cfg.spec.build()
    grid = dg.canonical_grid(cfg.k, p.n_r2, p.n_ratio)
    prof = dg.carleson_sup_profile(mu, cfg.k, grid, spec, p.include_berezin)
    rows = [["grid", "", math.nan, math.nan, *_c(r.w1), *_c(r.w2), r.berezin, r.berezin_err,
             r.t_value, r.t_err, math.nan, r.error] for r in prof.rows]
    summary = {
        "carleson_berezin": prof.verdict_berezin,
        "carleson_t": prof.verdict_t,
        "carleson": prof.verdict,
    }
    vanishing = dg.INCONCLUSIVE
    if p.vanishing is not None:
        prows, per_delta = _vanishing_rows(cfg, mu, spec, p.vanishing, with_section=True)
        rows.extend(prows)
        vanishing = _delta_verdict(per_delta)
        summary["verdicts_by_delta"] = per_delta
    if summary["carleson"] == dg.NO:
        vanishing = dg.NO
    summary["vanishing"] = vanishing
    conclusive = summary["carleson"] != dg.INCONCLUSIVE and vanishing != dg.INCONCLUSIVE
    status = FAILED if _all_failed(rows, -1) else (OK if conclusive else INCONCLUSIVE)
    return TaskOutcome(COLUMNS["carleson-check"], rows, status, summary)


def weak_limit(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    values = dg.weak_failure_profile(p.j_max)
    rows = []
    for j, v in zip(range(2, p.j_max + 1), values):
        cf = dg.weak_failure_closed_form(j)
        rows.append([j, v, cf, abs(v - cf)])
    worst = max(r[3] for r in rows)
    summary = {"max_abs_err": worst, "last_value": values[-1], "limit": math.pi}
    return TaskOutcome(COLUMNS["repro:weak-limit"], rows, OK if worst <= 1e-10 else FAILED, summary)


def skwarczynski_task(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    table = dg.skwarczynski_counterexample(p.j_list)
    rows = [[r.j, r.first_distance, r.second_distance, r.d_s, r.kernel_ratio,
             dg.skwarczynski_ratio_closed_form(r.j)] for r in table]
    order = sorted(table, key=lambda r: r.j)
    increasing = all(b.d_s > a.d_s for a, b in zip(order, order[1:]))
    zeros = all(r.first_distance == 0 and r.second_distance == 0 for r in table)
    summary = {"distances_zero": zeros, "d_S_increasing": increasing}
    return TaskOutcome(COLUMNS["repro:skwarczynski"], rows, OK if zeros and increasing else FAILED, summary)


def lemma1_task(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    k = cfg.k
    spec = cfg.spec.build()
    monos = [Monomial(a, b) for a, b in p.monomials] or admissible_monomials(k, p.n_monomials)
    rows = []
    failed = False
    for delta in p.deltas:
        for h in monos:
            err = ""
            try:
                mr = dg.lemma1_mass_ratio(k, delta, h, spec)
                q, qe = mr.quadrature, mr.quadrature_err
                if abs(q - mr.closed_form) > max(p.rel_tol * mr.closed_form, 10 * qe):
                    err, failed = "quadrature disagrees with closed form", True
            except ConvergenceError as exc:
                q = qe = math.nan
                err, failed = str(exc), True
            cf = dg.mass_ratio_closed_form(k, delta, h)
            rows.append([delta, h.a, h.b, cf, q, qe, cf / delta ** (2.0 / k), err])
    envelope = max(r[6] for r in rows)
    summary = {"envelope_constant": envelope, "envelope_holds": envelope <= 1.0 + 1e-12}
    status = FAILED if failed or envelope > 1.0 + 1e-12 else OK
    return TaskOutcome(COLUMNS["repro:lemma1"], rows, status, summary)


def blocki_task(cfg: RunConfig) -> TaskOutcome:
    p = cfg.task_params()
    k = cfg.k
    rng = np.random.default_rng(cfg.seed)
    z1, z2 = random_interior_points(k, p.n, rng, p.margin)
    ms = rng.uniform(p.m_range[0], p.m_range[1], p.n)
    monos = admissible_monomials(k, p.n_monomials)
    picks = rng.integers(0, len(monos), p.n)
    rows = []
    for i, (z, M, h_idx) in enumerate(zip(iter_points(z1, z2), ms, picks)):
        h = monos[int(h_idx)]
        res = dg.blocki_check(k, z, float(M), h)
        rows.append([i, *_c(z.z1), *_c(z.z2), float(M), h.a, h.b, res.lhs, res.rhs, res.ratio, res.passed])
    min_ratio = min(r[10] for r in rows)
    summary = {"min_ratio": min_ratio, "all_passed": all(r[11] for r in rows)}
    return TaskOutcome(COLUMNS["repro:blocki"], rows, OK if summary["all_passed"] else FAILED, summary)


RUNNERS = {
    "kernel-eval": kernel_eval,
    "berezin-grid": berezin_grid,
    "vanishing-profile": vanishing_task,
    "carleson-check": carleson_task,
    "repro:weak-limit": weak_limit,
    "repro:skwarczynski": skwarczynski_task,
    "repro:lemma1": lemma1_task,
    "repro:blocki": blocki_task,
}


def run_task(cfg: RunConfig) -> TaskOutcome:
    return RUNNERS[cfg.task](cfg)
