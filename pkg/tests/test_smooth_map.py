import math

import numpy as np
import pytest

from fharmonic.errors import ConfigurationError, ContractViolation
from fharmonic.manifold import build_torus_domain
from fharmonic.smooth_map import (
    SmoothMap, clifford_map, compose_with_flow, compute_fields, constant_map, differential,
    equator_map, fd_jacobian, identity_map, latitude_map,
)
from fharmonic.sphere_target import ConformalDiffeo, ConformalFlow, plane_rotation, random_directions


def test_catalog_densities(catalog):
    expected = {"identity-s2": 1.0, "identity-s3": 1.5, "equator-s2-s3": 1.0,
                "equator-s3-s4": 1.5, "latitude-s3-s4": 1.125, "constant-s2-s3": 0.0,
                "clifford-t2-s3": 0.5}
    for name, smap in catalog.items():
        e = compute_fields(smap).density
        assert np.abs(e - expected[name]).max() < 1e-12, name


def test_analytic_jacobian_matches_fd(catalog):
    for name, smap in catalog.items():
        dom = smap.domain
        q = dom.points[:: max(1, dom.n_nodes // 500)]
        for c in range(len(dom.charts)):
            J = smap.chart_jacobian(q, c)
            Jfd = fd_jacobian(smap.evaluator, q, dom.charts[c], c)
            assert np.abs(J - Jfd).max() < 1e-8, (name, c)


def test_charts_describe_the_same_map(s3):
    smap = equator_map(s3, 4)
    x = s3.charts[0].embedding(s3.points[:200])
    u1 = s3.charts[1].coordinates(x)
    assert np.abs(smap.point(u1, 1) - smap.point(s3.points[:200], 0)).max() < 1e-14


def test_pullback_metric_identity(catalog):
    for name, smap in catalog.items():
        v = random_directions(smap.target_dim + 1, 1, 5)[0]
        for t in (0.5, 1.0):
            flow = ConformalFlow(v, t)
            base = compute_fields(smap)
            comp = compute_fields(compose_with_flow(smap, flow))
            a2 = flow.factor(base.points) ** 2
            expect = a2[:, None, None] * base.pullback
            scale = np.abs(expect).max() + 1e-300
            assert np.abs(comp.pullback - expect).max() <= 1e-5 * scale, name


def test_composition_with_rotation(s2):
    smap = identity_map(s2)
    flow = ConformalFlow(np.array([0.0, 0.0, 1.0]), 0.7)
    d = ConformalDiffeo(plane_rotation(3, 0, 2, 0.3), flow)
    a = compute_fields(compose_with_flow(smap, d)).density
    b = compute_fields(compose_with_flow(smap, flow)).density
    assert np.abs(a - b).max() < 1e-8


def test_fields_with_direction(s3):
    smap = equator_map(s3, 4)
    f = compute_fields(smap, np.eye(5)[4])
    assert np.abs(f.phi_v).max() == 0.0
    assert np.abs(f.dphi_v_sq).max() == 0.0
    assert np.allclose(f.vbar_sq, 1.0)
    g = compute_fields(smap, np.eye(5)[0])
    # |d phi_v|^2 + phi_v^2 = |v|^2 for the equator: e_1 restricted to S^3
    assert np.allclose(g.dphi_v_sq + g.phi_v ** 2, 1.0)


def test_differential_node_subset(s2):
    smap = identity_map(s2)
    D = differential(smap, [0, 5])
    assert D.shape == (2, 3, 2)
    with pytest.raises(ContractViolation):
        differential(smap, [s2.n_nodes])


def test_user_map_without_jacobian(s2):
    base = identity_map(s2)
    smap = SmoothMap(s2, 2, base.evaluator, None, "fd identity").validate()
    assert np.abs(compute_fields(smap).density - 1.0).max() < 1e-8


def test_map_validation(s2, t2):
    bad = SmoothMap(s2, 2, lambda u, c=0: 2 * s2.charts[c].embedding(u))
    with pytest.raises(ContractViolation, match="unit sphere"):
        bad.validate()
    with pytest.raises(ConfigurationError):
        equator_map(s2, 2)
    with pytest.raises(ConfigurationError):
        latitude_map(s2, 3, 1.0)
    with pytest.raises(ConfigurationError):
        identity_map(t2)
    with pytest.raises(ConfigurationError):
        clifford_map(build_torus_domain(2, [1.0, 1.0], 8))
    with pytest.raises(ConfigurationError):
        constant_map(s2, 3, np.ones(3))


def test_compose_dimension_mismatch(s2):
    with pytest.raises(ConfigurationError):
        compose_with_flow(identity_map(s2), ConformalFlow(np.ones(4)))


def test_clifford_lands_on_sphere(t2):
    y = clifford_map(t2, 4).node_points
    assert y.shape[-1] == 5
    assert np.abs(np.linalg.norm(y, axis=-1) - 1).max() < 1e-15
