"""Compact domain manifolds: charts, metrics, frames and quadrature.

Round spheres use hyperspherical coordinates ``(psi_1, ..., psi_{m-1}, phi)``
with ``psi_k in (0, pi)`` and ``phi`` periodic; the embedding is built
recursively as ``x(psi_1, rest) = (sin psi_1 * x(rest), cos psi_1)`` starting
from the circle ``(cos phi, sin phi)``.  For S^2 this is the familiar
``(sin t cos p, sin t sin p, cos t)``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import _kernels
from .errors import ConfigurationError, ContractViolation, NumericError

DEFAULT_RESOLUTION = {("sphere", 2): 64, ("sphere", 3): 48, ("torus", 2): 64}


@dataclass(frozen=True, eq=False)
class Chart:
    """A coordinate box with a metric evaluator.

    ``metric(u)`` takes ``(..., m)`` coordinates and returns ``(..., m, m)``.
    Sphere charts also carry a ``rotation`` R: the chart's embedding is
    ``R @ sphere_embedding(u)``, so several charts can cover the sphere with
    their coordinate singularities in different places.
    """
    lower: np.ndarray
    upper: np.ndarray
    periodic: tuple
    metric: object
    rotation: np.ndarray = None

    @property
    def dim(self):
        return len(self.lower)

    @property
    def scale(self):
        return self.upper - self.lower

    def volume_density(self, u):
        return np.sqrt(np.linalg.det(self.metric(u)))

    def contains(self, u, margin=0.0):
        """True where ``u`` is inside the box (periodic axes always are)."""
        u = np.asarray(u, dtype=float)
        ok = np.ones(u.shape[:-1], dtype=bool)
        for i in range(self.dim):
            if not self.periodic[i]:
                ok &= (u[..., i] - margin > self.lower[i]) & (u[..., i] + margin < self.upper[i])
        return ok

    def embedding(self, u):
        return sphere_embedding(u) @ self.rotation.T

    def embedding_jacobian(self, u):
        return self.rotation @ sphere_embedding_jacobian(u)

    def coordinates(self, x):
        """Inverse of :meth:`embedding` for points of the sphere."""
        return sphere_coordinates(np.asarray(x, dtype=float) @ self.rotation)

    def regularity(self, u):
        """sqrt(g_phi_phi): distance to the chart's coordinate singularity."""
        u = np.asarray(u, dtype=float)
        return np.prod(np.sin(u[..., :-1]), axis=-1)


@dataclass(frozen=True)
class QuadratureRule:
    chart_ids: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    shape: tuple

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class DomainManifold:
    dim: int
    kind: str
    periods: tuple
    resolution: int
    charts: tuple
    quadrature: QuadratureRule
    # derived, per node
    volume_weights: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)

    @property
    def n_nodes(self):
        return len(self.quadrature)

    @property
    def points(self):
        return self.quadrature.points

    def exact_volume(self):
        if self.kind == "torus":
            return float(np.prod(self.periods))
        m = self.dim
        return 2 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)

    def refined(self, factor=2):
        """The same domain at ``factor`` times the resolution."""
        if self.kind == "sphere":
            return build_sphere_domain(self.dim, self.resolution * factor)
        return build_torus_domain(self.dim, list(self.periods), self.resolution * factor)

    def describe(self):
        if self.kind == "sphere":
            return f"S^{self.dim} (res {self.resolution}, {self.n_nodes} nodes)"
        per = ", ".join(f"{p:g}" for p in self.periods)
        return f"T^{self.dim}[{per}] (res {self.resolution}, {self.n_nodes} nodes)"


# -- round sphere coordinates ------------------------------------------------

def sphere_embedding(u):
    """Point of S^m in R^{m+1} for hyperspherical coordinates ``u``."""
    u = np.asarray(u, dtype=float)
    phi = u[..., -1]
    x = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    for k in range(u.shape[-1] - 2, -1, -1):
        s, c = np.sin(u[..., k]), np.cos(u[..., k])
        x = np.concatenate([s[..., None] * x, c[..., None]], axis=-1)
    return x


def sphere_embedding_jacobian(u):
    """Partials ``d x / d u_i`` as an ``(..., m+1, m)`` array."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    phi = u[..., -1]
    x = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    J = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)[..., None]
    for k in range(m - 2, -1, -1):
        s, c = np.sin(u[..., k]), np.cos(u[..., k])
        lead = np.concatenate([c[..., None] * x, -s[..., None]], axis=-1)
        rest = np.concatenate([s[..., None, None] * J,
                               np.zeros(J.shape[:-2] + (1, J.shape[-1]))], axis=-2)
        J = np.concatenate([lead[..., None], rest], axis=-1)
        x = np.concatenate([s[..., None] * x, c[..., None]], axis=-1)
    return J


def sphere_coordinates(x):
    """Hyperspherical coordinates of points ``x`` of S^m (inverse embedding)."""
    x = np.asarray(x, dtype=float)
    m = x.shape[-1] - 1
    coords = []
    cur = x
    for _ in range(m - 1):
        head = cur[..., :-1]
        rad = np.sqrt(np.sum(head * head, axis=-1))
        coords.append(np.arctan2(rad, cur[..., -1]))
        cur = head / rad[..., None]
    coords.append(np.mod(np.arctan2(cur[..., 1], cur[..., 0]), 2 * math.pi))
    return np.stack(coords, axis=-1)


def sphere_metric(u):
    """Round metric diag(1, s1^2, s1^2 s2^2, ...) in hyperspherical coordinates."""
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    diag = np.ones(u.shape[:-1] + (m,))
    acc = np.ones(u.shape[:-1])
    for k in range(1, m):
        acc = acc * np.sin(u[..., k - 1]) ** 2
        diag[..., k] = acc
    g = np.zeros(u.shape[:-1] + (m, m))
    idx = np.arange(m)
    g[..., idx, idx] = diag
    return g


def flat_metric(u):
    u = np.asarray(u, dtype=float)
    m = u.shape[-1]
    return np.broadcast_to(np.eye(m), u.shape[:-1] + (m, m)).copy()


# -- frames ------------------------------------------------------------------

def orthonormal_frame(chart, u):
    """Frame ``E`` (columns) with ``E^T g E = I``, from the Cholesky factor of g.

    With ``g = L L^T`` the frame is ``E = L^{-T}``.  Works on a single point
    or a batch of points.
    """
    u = np.asarray(u, dtype=float)
    g = chart.metric(u)
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        flat_g = g.reshape(-1, chart.dim, chart.dim)
        bad = np.argmin(np.linalg.eigvalsh(flat_g)[:, 0])
        where = u.reshape(-1, chart.dim)[bad]
        raise NumericError(f"metric is not positive definite at u={where.tolist()}") from None
    return np.swapaxes(np.linalg.inv(L), -1, -2)


# -- builders ----------------------------------------------------------------

def _finish(dim, kind, periods, resolution, charts, axes, axis_weights, shape):
    chart = charts[0]
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([gr.ravel() for gr in grids], axis=-1)
    wgrids = np.meshgrid(*axis_weights, indexing="ij")
    weights = np.ones(points.shape[0])
    for w in wgrids:
        weights = weights * w.ravel()
    rule = QuadratureRule(np.zeros(len(points), dtype=np.int64), points, weights, shape)
    vol_w = weights * chart.volume_density(points)
    frames = orthonormal_frame(chart, points)
    for arr in (points, weights, vol_w, frames):
        arr.setflags(write=False)
    return DomainManifold(dim, kind, periods, resolution, tuple(charts), rule, vol_w, frames)


def build_sphere_domain(m, resolution=None):
    """Round S^m (m in {2, 3}) with Gauss-Legendre x trapezoid quadrature.

    Polar angles get ``resolution`` Gauss-Legendre nodes, the periodic angle
    ``2 * resolution`` uniform nodes, so no node sits on a pole.
    """
    if m not in (2, 3):
        raise ConfigurationError(f"sphere domains support m in {{2, 3}}, got m={m}")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION[("sphere", m)]
    if resolution < 8:
        raise ConfigurationError(f"resolution must be >= 8, got {resolution}")
    x, w = np.polynomial.legendre.leggauss(resolution)
    polar = 0.5 * math.pi * (x + 1.0)
    polar_w = 0.5 * math.pi * w
    n_phi = 2 * resolution
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    phi_w = np.full(n_phi, 2 * math.pi / n_phi)
    axes = [polar] * (m - 1) + [phi]
    axis_w = [polar_w] * (m - 1) + [phi_w]
    lower = np.zeros(m)
    upper = np.array([math.pi] * (m - 1) + [2 * math.pi])
    periodic = (False,) * (m - 1) + (True,)
    # second chart: coordinates cyclically shifted by two, which moves the
    # singular set {x_1 = x_2 = 0} away from the first chart's
    shift = np.roll(np.eye(m + 1), 2, axis=0)
    charts = (Chart(lower, upper, periodic, sphere_metric, np.eye(m + 1)),
              Chart(lower, upper, periodic, sphere_metric, shift))
    shape = (resolution,) * (m - 1) + (n_phi,)
    return _finish(m, "sphere", (), resolution, charts, axes, axis_w, shape)


def build_torus_domain(m, periods, resolution=None):
    """Flat torus R^m / (periods) on a uniform, cell-centred product grid."""
    if m < 2:
        raise ConfigurationError(f"domain dimension must be >= 2, got m={m}")
    periods = tuple(float(p) for p in periods)
    if len(periods) != m:
        raise ConfigurationError(f"expected {m} periods, got {len(periods)}")
    if any(not p > 0 for p in periods):
        raise ConfigurationError(f"torus periods must be positive, got {periods}")
    if resolution is None:
        resolution = DEFAULT_RESOLUTION.get(("torus", m), 32)
    if resolution < 8:
        raise ConfigurationError(f"resolution must be >= 8, got {resolution}")
    axes = [p * (np.arange(resolution) + 0.5) / resolution for p in periods]
    axis_w = [np.full(resolution, p / resolution) for p in periods]
    chart = Chart(lower=np.zeros(m), upper=np.array(periods),
                  periodic=(True,) * m, metric=flat_metric)
    return _finish(m, "torus", periods, resolution, (chart,), axes, axis_w, (resolution,) * m)


def integrate(domain, values):
    """Sum of weight * sqrt(det g) * value over the nodes, fixed pairwise tree."""
    values = np.asarray(values, dtype=float)
    if values.shape != (domain.n_nodes,):
        raise ContractViolation(
            f"field has shape {values.shape}, domain has {domain.n_nodes} nodes")
    return _kernels.pairwise_sum(domain.volume_weights * values)
