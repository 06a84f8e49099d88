import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fharmonic.errors import ConfigurationError, ContractViolation, NumericError
from fharmonic.manifold import (
    Chart, build_sphere_domain, build_torus_domain, integrate, orthonormal_frame,
    sphere_coordinates, sphere_embedding, sphere_embedding_jacobian,
)


def test_volumes(s2, s3, t2):
    assert integrate(s2, np.ones(s2.n_nodes)) == pytest.approx(4 * math.pi, rel=1e-12)
    assert integrate(s3, np.ones(s3.n_nodes)) == pytest.approx(2 * math.pi ** 2, rel=1e-12)
    assert integrate(t2, np.ones(t2.n_nodes)) == pytest.approx(4 * math.pi ** 2, rel=1e-12)


def test_default_node_counts(s2, s3, t2):
    assert s2.quadrature.shape == (64, 128)
    assert s3.quadrature.shape == (48, 48, 96)
    assert t2.quadrature.shape == (64, 64)


@pytest.mark.parametrize("m,res", [(2, 16), (3, 8), (3, 12)])
def test_volume_stable_under_refinement(m, res):
    a = build_sphere_domain(m, res)
    b = a.refined()
    va = integrate(a, np.ones(a.n_nodes))
    vb = integrate(b, np.ones(b.n_nodes))
    assert abs(va - vb) <= 1e-8 * vb


def test_polynomial_moments_on_s2(s2):
    x = s2.charts[0].embedding(s2.points)
    # int z^2 = 4 pi / 3, int x^2 y^2 = 4 pi / 15
    assert integrate(s2, x[:, 2] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert integrate(s2, x[:, 0] ** 2 * x[:, 1] ** 2) == pytest.approx(4 * math.pi / 15, rel=1e-12)


def test_frames_are_orthonormal(s2, s3, t2):
    for dom in (s2, s3, t2):
        g = dom.charts[0].metric(dom.points)
        E = dom.frames
        err = np.abs(np.swapaxes(E, -1, -2) @ g @ E - np.eye(dom.dim)).max()
        assert err < 1e-12


def test_frame_example():
    chart = build_sphere_domain(2, 8).charts[0]
    E = orthonormal_frame(chart, np.array([math.pi / 6, 0.3]))
    assert np.allclose(E, np.diag([1.0, 2.0]), atol=1e-14)


def test_frame_rejects_degenerate_metric():
    chart = Chart(np.zeros(2), np.ones(2), (False, False),
                  lambda u: np.broadcast_to(np.diag([1.0, -1.0]), u.shape[:-1] + (2, 2)))
    with pytest.raises(NumericError, match="not positive definite"):
        orthonormal_frame(chart, np.array([0.5, 0.5]))


def test_integrate_is_deterministic(s3, rng):
    f = rng.standard_normal(s3.n_nodes)
    assert integrate(s3, f) == integrate(s3, f.copy())


def test_integrate_shape_mismatch(s2):
    with pytest.raises(ContractViolation):
        integrate(s2, np.ones(s2.n_nodes + 1))


def test_no_node_on_a_pole(s2, s3):
    for dom in (s2, s3):
        assert np.all(dom.charts[0].contains(dom.points, margin=1e-3))


@pytest.mark.parametrize("kw", [dict(m=4), dict(m=2, resolution=4)])
def test_sphere_builder_errors(kw):
    with pytest.raises(ConfigurationError):
        build_sphere_domain(**kw)


@pytest.mark.parametrize("m,periods", [(1, [1.0]), (2, [1.0]), (2, [1.0, -1.0])])
def test_torus_builder_errors(m, periods):
    with pytest.raises(ConfigurationError):
        build_torus_domain(m, periods)


def test_embedding_jacobian_matches_fd(rng):
    u = np.array([0.7, 1.9, 2.5])
    h = 1e-6
    J = sphere_embedding_jacobian(u)
    for i in range(3):
        du = np.zeros(3)
        du[i] = h
        fd = (sphere_embedding(u + du) - sphere_embedding(u - du)) / (2 * h)
        assert np.allclose(J[:, i], fd, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, math.pi - 0.05), st.floats(0.05, math.pi - 0.05), st.floats(0.0, 6.28))
def test_coordinates_round_trip(a, b, c):
    dom = build_sphere_domain(3, 8)
    u = np.array([a, b, c])
    for chart in dom.charts:
        x = chart.embedding(u)
        assert np.allclose(chart.embedding(chart.coordinates(x)), x, atol=1e-13)
    assert np.allclose(sphere_coordinates(sphere_embedding(u)), u, atol=1e-12)


def test_second_chart_covers_first_charts_singular_set():
    dom = build_sphere_domain(2, 8)
    pole = np.array([0.0, 0.0, 1.0])
    u1 = dom.charts[1].coordinates(pole)
    assert dom.charts[1].regularity(u1) == pytest.approx(1.0)
