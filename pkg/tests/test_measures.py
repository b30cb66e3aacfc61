import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartogs.exceptions import PreconditionError
from hartogs.kernels import HartogsPoint, domination_bound, kernel_diag
from hartogs.measures import (
    DensityMeasure,
    DiscMeasure,
    Exhaustion,
    berezin_transform,
    builtin_t_closed_form,
    cubic_defect_kernel_integral,
    disc_berezin,
    factorize_product_measure,
    t_transform,
    truncated_berezin,
    unit_kernel_integral,
)
from hartogs.quadrature import QuadratureSpec
from strategies import disc_points

PI4 = math.pi ** 4
FAST = QuadratureSpec(rel_tol=1e-5)
POINTS = [(0.0, 0.5), (0.2 + 0.1j, 0.6j), (0.5, -0.8)]


@pytest.mark.parametrize("w", POINTS)
def test_berezin_of_lebesgue_is_one_k1(w):
    mu = DensityMeasure.builtin("lebesgue", 1)
    res = berezin_transform(mu, 1, w, route="direct")
    assert abs(res.value - 1.0) <= max(3 * res.error, 1e-6)


def test_berezin_of_zero_vanishes():
    mu = DensityMeasure.builtin("zero", 2)
    assert berezin_transform(mu, 2, (0.1, 0.5)).value == 0.0
    assert t_transform(mu, 2, (0.1, 0.5)).value == 0.0


def test_t_transform_of_lebesgue_k1():
    mu = DensityMeasure.builtin("lebesgue", 1)
    for w in POINTS:
        assert t_transform(mu, 1, w).value == pytest.approx(PI4, rel=1e-9)


def test_nonvanishing_example_berezin_is_one_k1():
    mu = DensityMeasure.builtin("nonvanishing_example", 1)
    assert berezin_transform(mu, 1, (0.3, 0.9)).value == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("name", ["lebesgue", "vanishing_example", "nonvanishing_example"])
def test_split_direct_and_closed_form_agree(k, name):
    mu = DensityMeasure.builtin(name, k)
    w = (0.25 + 0.1j, 0.7)
    split = t_transform(mu, k, w, FAST, route="split")
    direct = t_transform(mu, k, w, FAST, route="direct")
    exact = builtin_t_closed_form(name, k, w)
    assert abs(split.value - direct.value) <= 3 * (split.error + direct.error) + 1e-12 * exact
    assert split.value == pytest.approx(exact, rel=1e-8)


def test_split_route_preconditions():
    rho = DensityMeasure.general(2, lambda z1, z2: np.abs(z2) ** 2)
    with pytest.raises(PreconditionError):
        t_transform(rho, 2, (0, 0.5), route="split")
    mu = DensityMeasure.builtin("lebesgue", 2)
    with pytest.raises(PreconditionError):
        berezin_transform(mu, 2, (0, 0.5), route="split")
    with pytest.raises(PreconditionError):
        berezin_transform(mu, 1, (0, 0.5))
    with pytest.raises(ValueError):
        t_transform(mu, 2, (0, 0.5), route="sideways")


def test_berezin_dominated_by_t_transform():
    mu = DensityMeasure.builtin("vanishing_example", 2)
    w = (0.3, 0.6)
    b = berezin_transform(mu, 2, w, FAST).value
    t = t_transform(mu, 2, w, FAST).value
    c = domination_bound(2)
    assert 0 < b <= c ** 2 * t * (1 + 1e-4)


def test_general_density_matches_product_form():
    k = 2
    prod = DensityMeasure.builtin("vanishing_example", k)
    gen = DensityMeasure.general(k, lambda z1, z2: prod(z1, z2))
    w = (0.1j, 0.5)
    a = berezin_transform(prod, k, w, FAST)
    b = berezin_transform(gen, k, w, FAST)
    assert a.value == pytest.approx(b.value, rel=1e-10)


def test_exhaustion():
    e = Exhaustion(1)
    assert e.delta == pytest.approx(1 / 3)
    assert e.contains(1, (0.0, 0.5))
    assert not e.contains(1, (0.0, 0.2))
    with pytest.raises(ValueError):
        Exhaustion(0)


def test_truncated_berezin_decreases():
    mu = DensityMeasure.builtin("lebesgue", 1)
    w = (0.0, 0.5)
    full = berezin_transform(mu, 1, w, FAST).value
    vals = [truncated_berezin(mu, 1, w, Exhaustion(j), FAST).value for j in (1, 2, 4, 8, 16)]
    assert 0 < vals[0] < 1 and vals[0] <= full
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_factorization():
    mu = DensityMeasure.builtin("vanishing_example", 2)
    f, g = factorize_product_measure(mu)
    assert f.label == "cubic_defect" and g.weight_k == 1
    f, g = factorize_product_measure(DensityMeasure.builtin("nonvanishing_example", 3))
    assert f.label == "lebesgue"
    f, g = factorize_product_measure(DensityMeasure.builtin("lebesgue", 2))
    assert f.weight_k == 2
    with pytest.raises(TypeError):
        factorize_product_measure(DensityMeasure.general(1, lambda z1, z2: np.ones(np.shape(z1))))
    with pytest.raises(PreconditionError):
        factorize_product_measure(mu, k=3)


def test_disc_berezin_values():
    assert disc_berezin(DiscMeasure.lebesgue(), 0.7).value == pytest.approx(1.0, rel=1e-10)
    assert disc_berezin(DiscMeasure.cubic_defect(), 0.0).value == pytest.approx(0.25, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(disc_points(0.97))
def test_defect_series_matches_quadrature(a):
    nu = DiscMeasure.cubic_defect()
    q = disc_berezin(nu, a).value * math.pi / (1 - abs(a) ** 2) ** 2
    assert q == pytest.approx(cubic_defect_kernel_integral(a.conjugate()), rel=1e-8)
    assert cubic_defect_kernel_integral(a) <= unit_kernel_integral(a)


def test_invalid_densities_rejected():
    with pytest.raises(ValueError):
        DensityMeasure.general(1, lambda z1, z2: -np.ones(np.shape(z2)))
    with pytest.raises(ValueError):
        DensityMeasure.general(1, lambda z1, z2: np.abs(z2) ** -6.0)
    with pytest.raises(ValueError):
        DensityMeasure.builtin("nope", 1)
    with pytest.raises(ValueError):
        DensityMeasure.builtin("lebesgue", 0)


def test_measure_mass():
    assert DensityMeasure.builtin("lebesgue", 2).mass == pytest.approx(2 * math.pi ** 2 / 3, rel=1e-2)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("name", ["lebesgue", "vanishing_example", "nonvanishing_example"])
@pytest.mark.parametrize("route", ["split", "direct"])
def test_doubling_radial_nodes_stays_within_reported_error(k, name, route):
    mu = DensityMeasure.builtin(name, k)
    w = (0.25 + 0.1j, 0.7)
    base = t_transform(mu, k, w, FAST, route=route)
    fine = t_transform(mu, k, w, FAST.with_(radial_nodes=2 * FAST.radial_nodes), route=route)
    assert abs(fine.value - base.value) <= base.error
