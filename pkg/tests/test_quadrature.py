import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartogs.exceptions import ConvergenceError
from hartogs.kernels import domain_volume
from hartogs.quadrature import (
    DEFAULT_SPEC,
    Focus,
    QuadratureSpec,
    dyadic_edges,
    forelli_rudin_J,
    forelli_rudin_series,
    integrate_disc,
    integrate_fibered,
    integrate_hartogs,
    mobius_angles,
    monte_carlo_integrate,
    sample_hartogs,
)

PI2 = math.pi ** 2


def one(z1, z2):
    return np.ones(np.broadcast_shapes(np.shape(z1), np.shape(z2)))


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(radial_nodes=3)
    with pytest.raises(ValueError):
        QuadratureSpec(angular_nodes=15)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.5)
    assert DEFAULT_SPEC.with_(rel_tol=1e-3).rel_tol == 1e-3


def test_dyadic_edges_cover_interval():
    e = dyadic_edges(0.0, 1.0, 3)
    assert e[0] == 0.0 and e[-1] == 1.0
    assert np.all(np.diff(e) > 0)


@pytest.mark.parametrize("c, n", [(0.0, 8), (0.5, 64), (0.9, 512)])
def test_mobius_weights_sum_to_circumference(c, n):
    # the trapezoid sum of the Jacobian is exact up to O(c^n)
    th, w = mobius_angles(n, np.array([c]), 0.3)
    assert np.sum(w) == pytest.approx(2 * math.pi, rel=1e-12)


def test_mobius_nodes_cluster_at_alpha():
    th, _ = mobius_angles(64, np.array([0.9]), 1.0)
    gaps = np.abs(np.angle(np.exp(1j * (th[0] - 1.0))))
    assert np.mean(gaps < 0.3) > 0.5


@pytest.mark.parametrize("k", [1, 2, 3])
def test_volume(k):
    res = integrate_hartogs(one, k)
    assert res.value == pytest.approx(domain_volume(k), rel=1e-12)
    assert res.error < 1e-6 * res.value


@pytest.mark.parametrize("k", [1, 2, 3])
def test_inverse_square_weight(k):
    # fibre area pi |z2|^{2/k} leaves pi int_D |z2|^{2/k-2} dV = k pi^2
    res = integrate_hartogs(lambda z1, z2: np.abs(z2) ** -2 * one(z1, z2), k)
    assert res.value == pytest.approx(k * PI2, rel=1e-8)


def test_holomorphic_mean_value():
    # integral of z1 z2 vanishes by rotation
    res = integrate_hartogs(lambda z1, z2: z1 * z2, 2)
    assert abs(res.value) < 1e-12


def test_fibered_matches_hartogs():
    g = lambda xi, z2: np.abs(xi) ** 2 * (1 - np.abs(z2) ** 2)
    f = lambda z1, z2: g(z1 ** 2 / z2, z2)
    a = integrate_fibered(g, 2).value
    b = integrate_hartogs(f, 2).value
    assert a == pytest.approx(b, rel=1e-9)


def test_disc_integrals():
    assert integrate_disc(lambda om: np.ones(np.shape(om))).value == pytest.approx(math.pi, rel=1e-13)
    # |omega|^{2/k-2} weight with k=2 gives 2 pi
    assert integrate_disc(lambda om: np.ones(np.shape(om)), k=2).value == pytest.approx(2 * math.pi, rel=1e-10)


def test_sub_box_volumes_add_up():
    parts = [
        integrate_hartogs(one, 1, r2_range=(0, 0.3)).value,
        integrate_hartogs(one, 1, r2_range=(0.3, 1.0)).value,
    ]
    assert sum(parts) == pytest.approx(domain_volume(1), rel=1e-12)
    with pytest.raises(ValueError):
        integrate_hartogs(one, 1, r2_range=(0.5, 0.2))


def test_convergence_error_with_tiny_budget():
    spec = QuadratureSpec(radial_nodes=4, angular_nodes=4, max_subdivisions=4, rel_tol=1e-10)
    with pytest.raises(ConvergenceError):
        integrate_disc(lambda om: np.abs(om - 0.3) ** -1.5, spec=spec)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.95), st.floats(0, 2 * math.pi), st.sampled_from([1, 2, 3]))
def test_forelli_rudin_series_matches_quadrature(r, theta, k):
    a = r * complex(math.cos(theta), math.sin(theta))
    s = forelli_rudin_J(a, k, "series")
    q = forelli_rudin_J(a, k, "quadrature")
    assert q == pytest.approx(s, rel=1e-7)


def test_forelli_rudin_k1_closed_form():
    a = 0.7
    assert forelli_rudin_series(a, 1) == pytest.approx(math.pi / (1 - a * a) ** 2, rel=1e-13)
    with pytest.raises(ValueError):
        forelli_rudin_J(1.0, 1)


def test_focus_clusters_help_near_boundary():
    w2 = 0.995
    focus = Focus(0.0, w2)
    h = lambda z1, z2: np.abs(1 - z2 * w2) ** -4 * one(z1, z2)
    res = integrate_hartogs(h, 1, focus=focus)
    # pi int_D |z|^2 |1 - z w2|^{-4} dV expanded in powers of |z|^2
    m = np.arange(200000)
    exact = PI2 * np.sum((m + 1.0) ** 2 * w2 ** (2 * m) / (m + 2))
    assert res.value == pytest.approx(exact, rel=1e-6)


@pytest.mark.parametrize("k, rate", [(1, 0.5), (2, 2 / 3)])
def test_sampler_acceptance_rate(k, rate):
    smp = sample_hartogs(k, 20000, seed=3)
    assert len(smp.z1) == 20000
    assert np.all(np.abs(smp.z1) ** k < np.abs(smp.z2))
    se = math.sqrt(rate * (1 - rate) / smp.proposals)
    assert abs(smp.acceptance_rate - rate) < 5 * se


def test_sampler_deterministic():
    a = sample_hartogs(2, 100, seed=9)
    b = sample_hartogs(2, 100, seed=9)
    assert np.array_equal(a.z1, b.z1) and np.array_equal(a.z2, b.z2)


def test_monte_carlo_agrees_with_quadrature():
    f = lambda z1, z2: np.abs(z2) ** 2 + np.abs(z1)
    exact = integrate_hartogs(f, 2).value
    mc = monte_carlo_integrate(f, 2, 50000, seed=1)
    assert abs(mc.value - exact) < 5 * mc.error
