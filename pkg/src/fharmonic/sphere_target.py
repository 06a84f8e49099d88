"""The target sphere S^n and its conformal flows.

For a direction ``v`` the field ``vbar(y) = v - <v, y> y`` generates a
one-parameter group of conformal diffeomorphisms.  Writing ``u = v / |v|``
and ``c = <u, y>``, the flow at unit speed is

    gamma_t(y) = [(c cosh t + sinh t) u + (y - c u)] / (cosh t + c sinh t)

with conformal factor ``alpha_t(y) = 1 / (cosh t + c sinh t)``.  A flow with
``|v| != 1`` runs the unit flow for time ``|v| t``.
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError


def vbar(v, y):
    """Tangential projection of the constant vector ``v`` at points ``y``."""
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    return v - (y @ v)[..., None] * y


@dataclass(frozen=True, eq=False)
class ConformalFlow:
    direction: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        v = np.array(self.direction, dtype=float)
        mag = float(np.sqrt(v @ v))
        if not mag > 0 or not np.isfinite(mag):
            raise ConfigurationError("conformal flow needs a nonzero direction")
        object.__setattr__(self, "direction", v)
        object.__setattr__(self, "magnitude", mag)
        object.__setattr__(self, "unit", v / mag)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self):
        return self.unit.size

    @property
    def tau(self):
        """Unit-speed time: the flow of ``v`` at ``t`` is the flow of ``u`` at ``|v| t``."""
        return self.magnitude * self.t

    def at(self, t):
        return ConformalFlow(self.direction, t)

    def apply(self, y):
        return flow_apply(self, y)

    def factor(self, y):
        return conformal_factor(self, y)


def flow_apply(flow, y):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != flow.dim:
        raise ConfigurationError(f"point in R^{y.shape[-1]} but flow acts on R^{flow.dim}")
    return _kernels.flow_points(flow.unit, y, flow.tau)


def conformal_factor(flow, y):
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != flow.dim:
        raise ConfigurationError(f"point in R^{y.shape[-1]} but flow acts on R^{flow.dim}")
    return _kernels.conformal_factors(flow.unit, y, flow.tau)


def flow_ode_oracle(flow, y, steps=1000):
    """Integrate ``y' = vbar_u(y)`` with classical RK4 (renormalising each step)."""
    if steps < 100:
        raise ConfigurationError("flow_ode_oracle needs at least 100 steps")
    return _kernels.rk4_flow(flow.unit, np.asarray(y, dtype=float), flow.tau, steps)


@dataclass(frozen=True, eq=False)
class ConformalDiffeo:
    """``gamma = r o gamma_t^v`` with ``r`` orthogonal."""
    rotation: np.ndarray
    flow: ConformalFlow

    def __post_init__(self):
        r = np.array(self.rotation, dtype=float)
        d = self.flow.dim
        if r.shape != (d, d):
            raise ConfigurationError(f"rotation must be {d}x{d}, got {r.shape}")
        if np.max(np.abs(r.T @ r - np.eye(d))) > 1e-12:
            raise ConfigurationError("rotation matrix is not orthogonal")
        object.__setattr__(self, "rotation", r)

    def apply(self, y):
        return compose_diffeo(self, y)

    def factor(self, y):
        # rotations are isometries
        return conformal_factor(self.flow, y)


def compose_diffeo(d, y):
    return flow_apply(d.flow, y) @ d.rotation.T


def plane_rotation(dim, i, j, angle):
    """Rotation by ``angle`` in the (i, j) coordinate plane (0-based)."""
    r = np.eye(dim)
    c, s = np.cos(angle), np.sin(angle)
    r[i, i] = r[j, j] = c
    r[i, j], r[j, i] = -s, s
    return r


def random_directions(dim, count, seed):
    """``count`` unit vectors in R^dim from a seeded generator."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
