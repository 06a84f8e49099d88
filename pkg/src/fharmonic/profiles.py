"""Profile functions F for the F-energy, and the admissibility checks.

Every profile carries ``F``, ``F'``, ``F''`` (vectorised over numpy arrays)
plus ``theta``, the positive comparison function used in the stress tensor
bound ``S^F(gamma_t o phi) >= theta(alpha_t^2 o phi) S^F(phi)``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ProfileError
from .functionals import stress_tensor
from .smooth_map import compute_fields, compose_with_flow


@dataclass(frozen=True, eq=False)
class FProfile:
    name: str
    params: dict
    F: object
    dF: object
    d2F: object
    theta: object
    theta_label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def label(self):
        if not self.params:
            return self.name
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.name}({inner})"

    def scaled(self, c):
        """The profile ``c * F`` (same theta)."""
        if not c > 0:
            raise ConfigurationError("profile scale must be positive")
        return FProfile("custom", {"scale": c, **self.params},
                        lambda s: c * self.F(s), lambda s: c * self.dF(s),
                        lambda s: c * self.d2F(s), self.theta, self.theta_label)


def make_power(p):
    """``F(t) = (2t)^{p/2} / p`` for p = 2 or p >= 4; theta(u) = u^{p/2}."""
    p = float(p)
    if not (p == 2.0 or p >= 4.0):
        raise ConfigurationError(f"power profile needs p = 2 or p >= 4, got p={p:g}")
    half = p / 2.0

    def F(s):
        return (2.0 * np.asarray(s, dtype=float)) ** half / p

    def dF(s):
        return (2.0 * np.asarray(s, dtype=float)) ** (half - 1.0)

    if p == 2.0:
        def d2F(s):
            return np.zeros_like(np.asarray(s, dtype=float))
    else:
        def d2F(s):
            return (p - 2.0) * (2.0 * np.asarray(s, dtype=float)) ** (half - 2.0)

    def theta(u):
        return np.asarray(u, dtype=float) ** half

    return FProfile("power", {"p": p}, F, dF, d2F, theta, f"u^{half:g}")


def make_exp_type(a):
    """``F(t) = 1 + a t - exp(-t)``; theta(u) = u^2."""
    a = float(a)
    if not a > 0:
        raise ConfigurationError(f"exp-type profile needs a > 0, got a={a:g}")

    def F(s):
        s = np.asarray(s, dtype=float)
        return 1.0 + a * s - np.exp(-s)

    def dF(s):
        return a + np.exp(-np.asarray(s, dtype=float))

    def d2F(s):
        return -np.exp(-np.asarray(s, dtype=float))

    def theta(u):
        return np.asarray(u, dtype=float) ** 2

    return FProfile("exp", {"a": a}, F, dF, d2F, theta, "u^2")


def make_sacks_uhlenbeck(alpha):
    """``F(t) = (1 + 2t)^alpha`` with 0 < alpha < 1; theta(u) = u^2."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"Sacks-Uhlenbeck profile needs 0 < alpha < 1, got {alpha:g}")

    def F(s):
        return (1.0 + 2.0 * np.asarray(s, dtype=float)) ** alpha

    def dF(s):
        return 2.0 * alpha * (1.0 + 2.0 * np.asarray(s, dtype=float)) ** (alpha - 1.0)

    def d2F(s):
        return 4.0 * alpha * (alpha - 1.0) * (1.0 + 2.0 * np.asarray(s, dtype=float)) ** (alpha - 2.0)

    def theta(u):
        return np.asarray(u, dtype=float) ** 2

    return FProfile("sacks-uhlenbeck", {"alpha": alpha}, F, dF, d2F, theta, "u^2")


def make_custom(F, dF, d2F, theta, name="custom"):
    return FProfile(name, {}, F, dF, d2F, theta, "custom")


def exp_type_for_map(smap, a=None):
    """Exp-type profile with ``a`` = max node density of ``smap`` unless given."""
    if a is None:
        a = float(np.max(compute_fields(smap).density))
    return make_exp_type(a)


def check_profile(profile, grid=None, rtol=1e-6):
    """Spot-check F >= 0, F' > 0 and the derivatives against central differences.

    Returns the worst violations as a dict; raises ``ProfileError`` if
    ``F' <= 0`` anywhere on the grid.
    """
    if grid is None:
        grid = np.logspace(-3, 1, 200)
    grid = np.asarray(grid, dtype=float)
    h = 1e-5 * np.maximum(1.0, grid)
    fd1 = (profile.F(grid + h) - profile.F(grid - h)) / (2 * h)
    fd2 = (profile.dF(grid + h) - profile.dF(grid - h)) / (2 * h)
    d1 = profile.dF(grid)
    d2 = profile.d2F(grid)
    if np.any(d1 <= 0):
        raise ProfileError(f"F' <= 0 on the grid for {profile.label}")
    return {
        "min_F": float(np.min(profile.F(grid))),
        "min_dF": float(np.min(d1)),
        "dF_err": float(np.max(np.abs(d1 - fd1) / (1 + np.abs(d1)))),
        "d2F_err": float(np.max(np.abs(d2 - fd2) / (1 + np.abs(d2)))),
        "ok": bool(np.max(np.abs(d1 - fd1) / (1 + np.abs(d1))) <= rtol
                   and np.max(np.abs(d2 - fd2) / (1 + np.abs(d2))) <= rtol),
    }


# -- admissibility -----------------------------------------------------------

def admissibility_B(profile, e, alpha_sq, phi_v, v_mag=1.0):
    """``(F''(a e) a / F'(a e) - F''(e) / F'(e)) * phi_v`` with ``a = alpha_t^2``.

    Nodes with zero density carry no energy and get B = 0.
    """
    e = np.asarray(e, dtype=float)
    alpha_sq = np.broadcast_to(np.asarray(alpha_sq, dtype=float), e.shape)
    phi_v = np.broadcast_to(np.asarray(phi_v, dtype=float), e.shape) / v_mag
    out = np.zeros(e.shape)
    live = e > 0
    if not np.any(live):
        return out
    el, al = e[live], alpha_sq[live]
    s = al * el
    d1s, d1e = profile.dF(s), profile.dF(el)
    if np.any(d1s <= 0) or np.any(d1e <= 0):
        raise ProfileError(f"F' vanishes at a positive argument for {profile.label}")
    out[live] = (profile.d2F(s) / d1s * al - profile.d2F(el) / d1e) * phi_v[live]
    return out


def exp_aux(u, e, a):
    """Auxiliary function of the exp-type example; B = exp_aux(alpha^2) * phi_v."""
    w, w1 = np.exp(-u * e), np.exp(-e)
    return -u * w / (a + w) + w1 / (a + w1)


def exp_aux_derivative(u, e, a):
    """d/du of :func:`exp_aux`, in closed form."""
    w = np.exp(-u * e)
    return -w * (a * (1.0 - u * e) + w) / (a + w) ** 2


@dataclass(frozen=True, eq=False)
class AdmissibilityReport:
    t: np.ndarray
    B: np.ndarray
    comparison_min_eig: np.ndarray
    min_B: float
    max_abs_B: float
    min_comparison: float
    b_ok: bool
    comparison_ok: bool

    @property
    def admissible(self):
        return self.b_ok and self.comparison_ok


B_TOL = 1e-12
COMPARISON_TOL = 1e-10


def check_tensor_comparison(smap, profile, flow, nodes=None, t_grid=None, method="pullback"):
    """Evaluate B and the theta-comparison of stress tensors along a flow.

    ``method="pullback"`` uses ``|d(gamma o phi)|^2 = alpha^2 |d phi|^2`` to
    form the composed stress; ``method="fd"`` differentiates the composed map
    numerically instead.
    """
    if method not in ("pullback", "fd"):
        raise ConfigurationError(f"unknown comparison method {method!r}")
    base = compute_fields(smap, flow.unit)
    sel = slice(None) if nodes is None else np.asarray(nodes)
    e, P = base.density[sel], base.pullback[sel]
    S0 = stress_tensor(profile, e, P)
    ts = np.atleast_1d(np.asarray(flow.t if t_grid is None else t_grid, dtype=float))
    if method == "pullback":
        # S_t - theta S_0 = c0 I + c1 P, so its spectrum is c0 + c1 * eig(P)
        lam = np.linalg.eigvalsh(P)
        lo, hi = lam[:, 0], lam[:, -1]
        d1e, d2e = profile.dF(e), profile.d2F(e)
    Bs, eigs = [], []
    for t in ts:
        fl = flow.at(t)
        a2 = fl.factor(base.points[sel]) ** 2
        theta = profile.theta(a2)
        if method == "fd":
            comp = compute_fields(compose_with_flow(smap, fl))
            St = stress_tensor(profile, comp.density[sel], comp.pullback[sel])
            eigs.append(np.linalg.eigvalsh(St - theta[:, None, None] * S0)[:, 0])
        else:
            s = a2 * e
            d1s = profile.dF(s)
            c0 = d1s * s - theta * d1e * e
            c1 = -(d1s + s * profile.d2F(s)) * a2 + theta * (d1e + e * d2e)
            eigs.append(c0 + np.minimum(c1 * lo, c1 * hi))
        Bs.append(admissibility_B(profile, e, a2, base.phi_v[sel]))
    Bs, eigs = np.array(Bs), np.array(eigs)
    min_B = float(Bs.min())
    min_cmp = float(eigs.min())
    return AdmissibilityReport(ts, Bs, eigs, min_B, float(np.abs(Bs).max()), min_cmp,
                               min_B >= -B_TOL, min_cmp >= -COMPARISON_TOL)
