"""F-energy, F-tension, first variation and the F stress-energy tensor."""
from dataclasses import dataclass
import warnings

import numpy as np

from .errors import ContractViolation, NumericConsistencyError
from .manifold import integrate
from .smooth_map import compose_with_flow, compute_fields
from .sphere_target import vbar

TENSION_STEP = 1e-4
COMPOSED_RTOL = 1e-5


def stress_tensor(profile, e, P):
    """``F'(e) e I - [F'(e) + e F''(e)] P`` for stacked densities and pullbacks."""
    e = np.asarray(e, dtype=float)
    P = np.asarray(P, dtype=float)
    d1 = profile.dF(e)
    d2 = profile.d2F(e)
    m = P.shape[-1]
    return (d1 * e)[..., None, None] * np.eye(m) - (d1 + e * d2)[..., None, None] * P


@dataclass(frozen=True, eq=False)
class StressField:
    S: np.ndarray
    min_eig: np.ndarray

    @property
    def minimum(self):
        """S^{o,F}: the smallest unit-vector value of the form over all nodes."""
        return float(self.min_eig.min())

    @property
    def asymmetry(self):
        return float(np.max(np.abs(self.S - np.swapaxes(self.S, -1, -2))))


def stress_field(smap, profile, fields=None):
    fields = fields if fields is not None else compute_fields(smap)
    S = stress_tensor(profile, fields.density, fields.pullback)
    return StressField(S, np.linalg.eigvalsh(S)[:, 0])


def f_energy(smap, profile, fields=None):
    fields = fields if fields is not None else compute_fields(smap)
    return integrate(smap.domain, profile.F(fields.density))


def f_energy_flow(smap, profile, flow, fields=None):
    """Fast path: ``int F(alpha_t^2(phi) e) dv`` from the pullback identity."""
    fields = fields if fields is not None else compute_fields(smap)
    a2 = flow.factor(fields.points) ** 2
    return integrate(smap.domain, profile.F(a2 * fields.density))


def f_energy_composed(smap, profile, flow, rtol=COMPOSED_RTOL, strict=True):
    """Energy of ``gamma o phi`` by differentiating the composed map.

    The fast path is evaluated alongside; a disagreement beyond
    ``rtol * (1 + |fast|)`` raises, or only warns when ``strict`` is False.
    """
    slow = f_energy(compose_with_flow(smap, flow), profile)
    fast = f_energy_flow(smap, profile, flow)
    if abs(slow - fast) > rtol * (1.0 + abs(fast)):
        msg = (f"composed energy {slow!r} disagrees with pullback energy {fast!r} "
               f"for {smap.name} at t={flow.t:g}")
        if strict:
            raise NumericConsistencyError(msg)
        warnings.warn(msg, RuntimeWarning)
    return slow


@dataclass(frozen=True, eq=False)
class TensionField:
    values: np.ndarray
    points: np.ndarray

    @property
    def sup_norm(self):
        return float(np.max(np.linalg.norm(self.values, axis=-1), initial=0.0))

    @property
    def normal_component(self):
        return float(np.max(np.abs(np.sum(self.values * self.points, axis=-1)), initial=0.0))


def _tension_in_chart(smap, profile, chart_id, q, step):
    chart = smap.domain.charts[chart_id]
    if not np.all(chart.contains(q, margin=step)):
        raise ContractViolation("tension stencil leaves the chart at some node")
    m = chart.dim
    acc = 0.0
    for i in range(m):
        du = np.zeros(m)
        du[i] = step
        flux = []
        for u in (q + du, q - du):
            J = smap.chart_jacobian(u, chart_id)
            g = chart.metric(u)
            ginv = np.linalg.inv(g)
            e = 0.5 * np.einsum("nij,naj,nai->n", ginv, J, J)
            # g^{ij} d_j phi for the fixed row i
            grad_i = np.einsum("nj,naj->na", ginv[:, i, :], J)
            flux.append((np.sqrt(np.linalg.det(g)) * profile.dF(e))[:, None] * grad_i)
        acc = acc + (flux[0] - flux[1]) / (2 * step)
    return acc / chart.volume_density(q)[:, None]


def f_tension(smap, profile, step=TENSION_STEP):
    """F-tension of a sphere-valued map in divergence form.

    ``tau = Pi_phi[ g^{-1/2} d_i( g^{1/2} g^{ij} F'(e) d_j phi ) ]`` where
    ``Pi_y = I - y y^T``; the outer derivative is a central difference.  On
    spheres each node is evaluated in whichever chart keeps it farthest from
    a coordinate singularity.
    """
    dom = smap.domain
    q = dom.quadrature.points
    acc = np.zeros((len(q), smap.target_dim + 1))
    if dom.kind == "sphere" and len(dom.charts) > 1:
        x = dom.charts[0].embedding(q)
        coords = [c.coordinates(x) for c in dom.charts]
        best = np.argmax(np.stack([c.regularity(u) for c, u in zip(dom.charts, coords)]), axis=0)
        for k in range(len(dom.charts)):
            sel = best == k
            if np.any(sel):
                acc[sel] = _tension_in_chart(smap, profile, k, coords[k][sel], step)
    else:
        acc[:] = _tension_in_chart(smap, profile, 0, q, step)
    y = smap.node_points
    tau = acc - np.sum(acc * y, axis=-1)[:, None] * y
    return TensionField(tau, y)


def first_variation(smap, profile, v, tension=None):
    """``-int <vbar o phi, tau_F(phi)> dv``."""
    tension = tension if tension is not None else f_tension(smap, profile)
    field = np.sum(vbar(v, smap.node_points) * tension.values, axis=-1)
    return -integrate(smap.domain, field)
