"""Maps from a domain manifold into S^n, their differentials and pointwise fields."""
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .errors import ConfigurationError, ContractViolation
from .sphere_target import ConformalDiffeo, vbar

FD_STEP = 1e-5


@dataclass(frozen=True, eq=False)
class SmoothMap:
    """A map ``phi: M -> S^n`` given in chart coordinates.

    ``evaluator(u, chart)`` maps ``(..., m)`` coordinates to ``(..., n+1)``
    points; the optional ``jacobian(u, chart)`` returns the ``(..., n+1, m)``
    coordinate partials.  Without it, differentials are central differences.
    """
    domain: object
    target_dim: int
    evaluator: object
    jacobian: object = None
    name: str = "custom"

    def point(self, u, chart=0):
        return self.evaluator(np.asarray(u, dtype=float), chart)

    def chart_jacobian(self, u, chart=0):
        u = np.asarray(u, dtype=float)
        if self.jacobian is not None:
            return self.jacobian(u, chart)
        return fd_jacobian(self.evaluator, u, self.domain.charts[chart], chart)

    @cached_property
    def node_points(self):
        q = self.domain.quadrature
        return self.point(q.points, 0)

    @cached_property
    def node_differential(self):
        q = self.domain.quadrature
        J = self.chart_jacobian(q.points, 0)
        return J @ self.domain.frames

    def validate(self, tol_norm=1e-10, tol_tangent=1e-8):
        """Check |phi| = 1 and, for analytic Jacobians, tangency at every node."""
        y = self.node_points
        if y.shape[-1] != self.target_dim + 1:
            raise ConfigurationError(
                f"map {self.name!r} lands in R^{y.shape[-1]}, expected R^{self.target_dim + 1}")
        err = np.max(np.abs(np.linalg.norm(y, axis=-1) - 1.0))
        if err > tol_norm:
            raise ContractViolation(f"map {self.name!r} leaves the unit sphere (|phi|-1 = {err:.3e})")
        if self.jacobian is not None:
            J = self.chart_jacobian(self.domain.quadrature.points)
            tang = np.max(np.abs(np.einsum("...a,...ai->...i", y, J)), initial=0.0)
            if tang > tol_tangent:
                raise ContractViolation(f"map {self.name!r} Jacobian not tangent ({tang:.3e})")
        return self


def fd_jacobian(evaluator, u, chart, chart_id=0, rel_step=FD_STEP):
    """Central-difference coordinate Jacobian, step ``rel_step * chart extent``."""
    steps = rel_step * chart.scale
    if not np.all(chart.contains(u, margin=float(np.max(steps)))):
        raise ContractViolation("finite-difference stencil leaves the chart")
    cols = []
    for i in range(chart.dim):
        du = np.zeros(chart.dim)
        du[i] = steps[i]
        cols.append((evaluator(u + du, chart_id) - evaluator(u - du, chart_id)) / (2 * steps[i]))
    return np.stack(cols, axis=-1)


def differential(smap, nodes=None):
    """``d phi`` in the orthonormal frame at quadrature nodes: ``(N, n+1, m)``."""
    D = smap.node_differential
    if nodes is None:
        return D
    nodes = np.asarray(nodes)
    if np.any(nodes < 0) or np.any(nodes >= smap.domain.n_nodes):
        raise ContractViolation("node index outside the quadrature set")
    return D[nodes]


@dataclass(frozen=True, eq=False)
class MapFields:
    points: np.ndarray
    D: np.ndarray
    density: np.ndarray
    pullback: np.ndarray
    direction: np.ndarray = None
    phi_v: np.ndarray = None
    dphi_v_sq: np.ndarray = None
    vbar_sq: np.ndarray = None

    @property
    def dphi_sq(self):
        return 2.0 * self.density


def compute_fields(smap, v=None):
    """Energy density, pullback metric and (given ``v``) phi_v, |d phi_v|^2, |vbar o phi|^2."""
    y = smap.node_points
    D = smap.node_differential
    P = np.swapaxes(D, -1, -2) @ D
    e = 0.5 * np.trace(P, axis1=-2, axis2=-1)
    if v is None:
        return MapFields(y, D, e, P)
    v = np.asarray(v, dtype=float)
    if v.shape != (y.shape[-1],):
        raise ConfigurationError(f"direction must live in R^{y.shape[-1]}")
    phi_v = y @ v
    dphi_v = np.einsum("nai,a->ni", D, v)
    vb = vbar(v, y)
    return MapFields(y, D, e, P, v, phi_v, np.sum(dphi_v ** 2, axis=-1), np.sum(vb ** 2, axis=-1))


def compose_with_flow(smap, flow):
    """``gamma o phi``; the differential of the result is always finite-differenced."""
    if isinstance(flow, ConformalDiffeo):
        dim = flow.flow.dim
    else:
        dim = flow.dim
    if dim != smap.target_dim + 1:
        raise ConfigurationError(
            f"flow acts on R^{dim} but map {smap.name!r} lands in R^{smap.target_dim + 1}")
    base = smap.evaluator

    def evaluator(u, chart=0):
        return flow.apply(base(u, chart))

    return SmoothMap(smap.domain, smap.target_dim, evaluator, None, f"gamma o {smap.name}")


# -- catalog -----------------------------------------------------------------

def _pad(x, width):
    extra = width - x.shape[-1]
    if extra == 0:
        return x
    return np.concatenate([x, np.zeros(x.shape[:-1] + (extra,))], axis=-1)


def _pad_rows(J, width):
    extra = width - J.shape[-2]
    if extra == 0:
        return J
    return np.concatenate([J, np.zeros(J.shape[:-2] + (extra, J.shape[-1]))], axis=-2)


def _need_sphere(domain, what):
    if domain.kind != "sphere":
        raise ConfigurationError(f"{what} needs a sphere domain, got {domain.kind}")


def ambient_map(domain, n, f, Df, name):
    """Sphere-domain map given as ``f`` on embedded points, ``Df`` its (n+1, m+1) derivative."""
    _need_sphere(domain, name)
    charts = domain.charts

    def ev(u, c=0):
        return f(charts[c].embedding(u))

    def jac(u, c=0):
        return Df(charts[c].embedding(u)) @ charts[c].embedding_jacobian(u)

    return SmoothMap(domain, n, ev, jac, name).validate()


def identity_map(domain):
    _need_sphere(domain, "identity map")
    m = domain.dim
    eye = np.eye(m + 1)
    return ambient_map(domain, m, lambda x: x,
                       lambda x: np.broadcast_to(eye, x.shape[:-1] + eye.shape),
                       f"identity S^{m}")


def equator_map(domain, n):
    """Totally geodesic inclusion S^m -> S^n (m < n) into the first m+1 coordinates."""
    _need_sphere(domain, "equator inclusion")
    m = domain.dim
    if n <= m:
        raise ConfigurationError(f"equator inclusion needs n > m, got m={m}, n={n}")
    inc = np.eye(n + 1, m + 1)
    return ambient_map(domain, n, lambda x: _pad(x, n + 1),
                       lambda x: np.broadcast_to(inc, x.shape[:-1] + inc.shape),
                       f"equator S^{m}->S^{n}")


def latitude_map(domain, n, height):
    """``x -> (r x, 0, ..., 0, height)`` with ``r^2 + height^2 = 1``.

    The image lies in the half-sphere ``{y_{n+1} >= height}``; the map is not
    harmonic unless ``height == 0``.
    """
    _need_sphere(domain, "latitude map")
    m = domain.dim
    if n <= m:
        raise ConfigurationError(f"latitude map needs n > m, got m={m}, n={n}")
    if not -1.0 < height < 1.0:
        raise ConfigurationError(f"latitude height must lie in (-1, 1), got {height}")
    r = math.sqrt(1.0 - height * height)
    lin = r * np.eye(n + 1, m + 1)

    def f(x):
        y = _pad(r * x, n + 1)
        y[..., -1] = height
        return y

    return ambient_map(domain, n, f, lambda x: np.broadcast_to(lin, x.shape[:-1] + lin.shape),
                       f"latitude S^{m}->S^{n} (h={height:g})")


def constant_map(domain, n, point=None):
    if point is None:
        point = np.eye(n + 1)[-1]
    point = np.asarray(point, dtype=float)
    if point.shape != (n + 1,):
        raise ConfigurationError(f"constant value must be a vector in R^{n + 1}")
    point = point / np.linalg.norm(point)
    m = domain.dim
    return SmoothMap(domain, n,
                     lambda u, c=0: np.broadcast_to(point, np.shape(u)[:-1] + (n + 1,)).copy(),
                     lambda u, c=0: np.zeros(np.shape(u)[:-1] + (n + 1, m)),
                     f"constant ->S^{n}").validate()


def clifford_map(domain, n=3):
    """Flat T^2 (periods 2pi) -> S^n: ``(cos u1, sin u1, cos u2, sin u2) / sqrt 2``."""
    if domain.kind != "torus" or domain.dim != 2:
        raise ConfigurationError("Clifford map needs a flat 2-torus domain")
    if not np.allclose(domain.periods, 2 * math.pi, rtol=0, atol=1e-12):
        raise ConfigurationError("Clifford map needs periods (2pi, 2pi)")
    if n < 3:
        raise ConfigurationError("Clifford map needs n >= 3")
    s = 1.0 / math.sqrt(2.0)

    def ev(u, c=0):
        a, b = u[..., 0], u[..., 1]
        return _pad(s * np.stack([np.cos(a), np.sin(a), np.cos(b), np.sin(b)], axis=-1), n + 1)

    def jac(u, c=0):
        a, b = u[..., 0], u[..., 1]
        z = np.zeros_like(a)
        J = s * np.stack([np.stack([-np.sin(a), z], -1), np.stack([np.cos(a), z], -1),
                          np.stack([z, -np.sin(b)], -1), np.stack([z, np.cos(b)], -1)], axis=-2)
        return _pad_rows(J, n + 1)

    return SmoothMap(domain, n, ev, jac, f"clifford T^2->S^{n}").validate()
