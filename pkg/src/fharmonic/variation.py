"""Energy along conformal flows: sweeps, derivative formulas and the theorem check.

All lemma formulas use unit directions ``u`` (a direction ``v`` is normalised
first), so ``|v| = 1`` throughout and the flow time equals the hyperbolic
argument.  Along ``gamma_t`` with ``alpha = 1 / (cosh t + phi_u sinh t)`` the
composed density is ``alpha^2 e``, which is what every quantity here is built
on.  Because the stress tensor is a combination of ``I`` and the pullback
``P``, its eigenvalues follow from those of ``P`` without further
diagonalisation.
"""
from collections import OrderedDict
from dataclasses import dataclass, field
import math
import weakref

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .functionals import f_energy, f_tension, stress_field
from .manifold import integrate
from .profiles import admissibility_B, check_tensor_comparison
from .smooth_map import compute_fields
from .sphere_target import ConformalFlow

TENSION_TOL = 1e-4
STRESS_TOL = 1e-10
B_TOL = 1e-12
COMPARISON_TOL = 1e-10
FD_STEP = 1e-4
ADJUDICATION_RTOL = 1e-4
DEFAULT_T_GRID = tuple(round(0.1 * k, 10) for k in range(21))
DEFAULT_SEED = 20240521
DEFAULT_DIRECTIONS = 8

VERIFIED = "THEOREM-VERIFIED"
HYPOTHESES_FAIL = "HYPOTHESES-FAIL"
COUNTEREXAMPLE = "COUNTEREXAMPLE-FLAG"

_tension_cache = weakref.WeakKeyDictionary()


def unit_direction(v, dim):
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise ConfigurationError(f"direction must live in R^{dim}, got shape {v.shape}")
    mag = float(np.linalg.norm(v))
    if not mag > 0 or not math.isfinite(mag):
        raise ConfigurationError("direction must be a nonzero finite vector")
    return v / mag


def tension_sup(smap, profile):
    """sup |tau_F|, cached per (map, profile)."""
    per_map = _tension_cache.setdefault(smap, {})
    if id(profile) not in per_map:
        per_map[id(profile)] = (profile, f_tension(smap, profile).sup_norm)
    return per_map[id(profile)][1]


def require_f_harmonic(smap, profile, tol=TENSION_TOL):
    sup = tension_sup(smap, profile)
    if not sup < tol:
        raise PreconditionError(
            f"{smap.name} is not F-harmonic for {profile.label}: sup|tau_F| = {sup:.3e} >= {tol:g}")
    return sup


class _Flowed:
    """Per-node data of a map, specialised to one unit direction."""

    def __init__(self, smap, u):
        self.smap = smap
        self.domain = smap.domain
        self.u = unit_direction(u, smap.target_dim + 1)
        f = compute_fields(smap, self.u)
        self.e = f.density
        self.phi_v = f.phi_v
        self.dphi_v_sq = f.dphi_v_sq
        self.vbar_sq = f.vbar_sq
        self.pull_eigs = np.linalg.eigvalsh(f.pullback)

    def alpha(self, t):
        return 1.0 / (math.cosh(t) + self.phi_v * math.sinh(t))

    def integral(self, values):
        return integrate(self.domain, values)


_FLOWED_CACHE = weakref.WeakKeyDictionary()
_FLOWED_CACHE_SIZE = 4


def _data(smap, v):
    """``_Flowed`` for ``(smap, v)``, reusing the last few per map."""
    if isinstance(v, _Flowed):
        return v
    key = np.asarray(v, dtype=float).tobytes()
    cache = _FLOWED_CACHE.setdefault(smap, OrderedDict())
    if key in cache:
        cache.move_to_end(key)
        return cache[key]
    d = cache[key] = _Flowed(smap, v)
    if len(cache) > _FLOWED_CACHE_SIZE:
        cache.popitem(last=False)
    return d


# -- energies and derivatives -------------------------------------------------

def energy_at(smap, profile, v, t):
    """``E_F(gamma_t^u o phi)`` for any real ``t``; ``(u, t)`` and ``(-u, -t)`` agree."""
    d = _data(smap, v)
    a = d.alpha(t)
    return d.integral(profile.F(a * a * d.e))


def fd_derivative_oracle(smap, profile, v, t0, step=FD_STEP):
    """Central difference of the energy along the flow."""
    if not step > 0:
        raise ConfigurationError(f"finite-difference step must be positive, got {step}")
    d = _data(smap, v)
    return (energy_at(smap, profile, d, t0 + step) - energy_at(smap, profile, d, t0 - step)) / (2 * step)


def exact_derivative(smap, profile, v, t0):
    """``-2 int F'(alpha^2 e) alpha^3 e (sinh t + phi_u cosh t)`` by the chain rule."""
    d = _data(smap, v)
    a = d.alpha(t0)
    rate = math.sinh(t0) + d.phi_v * math.cosh(t0)
    return -2.0 * d.integral(profile.dF(a * a * d.e) * a ** 3 * d.e * rate)


def _lemma2_term1(d, profile, t0, variant):
    a = d.alpha(t0)
    if variant == "statement":
        k = 2.0 * d.e * d.vbar_sq - d.dphi_v_sq
    elif variant == "proof":
        k = d.e * d.vbar_sq - d.dphi_v_sq
    else:
        raise ConfigurationError(f"unknown variant {variant!r}; use 'statement' or 'proof'")
    return -2.0 * math.sinh(t0) * d.integral(a ** 3 * profile.dF(a * a * d.e) * k)


def _bracket(profile, e, a2):
    """``F''(a2 e) a2 - F'(a2 e) F''(e) / F'(e)``, taken as 0 where ``e = 0``."""
    s = a2 * e
    out = np.zeros_like(e)
    live = e > 0
    d1e = profile.dF(e[live])
    out[live] = (profile.d2F(s[live]) * a2[live]
                 - profile.dF(s[live]) / d1e * profile.d2F(e[live]))
    return out


def _g_parts(d, profile, t0):
    a = d.alpha(t0)
    a2 = a * a
    s = a2 * d.e
    dphi_sq = 2.0 * d.e
    # <d phi(grad(alpha o phi)), vbar o phi> = -sinh t alpha^2 |d phi_u|^2
    first = d.integral(a ** 3 * profile.d2F(s) * dphi_sq * (-math.sinh(t0) * a2 * d.dphi_v_sq))
    second = d.integral(a2 * _bracket(profile, d.e, a2) * d.phi_v * dphi_sq)
    return first, second


def lemma3_g(smap, profile, v, t0, check=True):
    """The two-integral expansion of ``g(t) = int alpha^2 F'(e) <d phi(grad f_t), vbar o phi>``.

    The second integral replaces ``<d phi(grad e), vbar o phi>`` by
    ``phi_u |d phi|^2``; see :func:`lemma3_g_direct` for an independent value.
    """
    if check:
        require_f_harmonic(smap, profile)
    first, second = _g_parts(_data(smap, v), profile, t0)
    return first + second


def lemma3_g_direct(smap, profile, v, t0, rel_step=1e-5):
    """``g(t)`` with ``grad f_t`` by central differences of ``f_t = F'(alpha^2 e) / F'(e)``.

    Uses ``<d phi(grad f), vbar o phi> = <grad f, grad phi_u>``, evaluated in
    chart coordinates with the inverse metric.
    """
    d = _data(smap, v)
    dom = smap.domain
    chart = dom.charts[0]
    q = dom.quadrature.points
    m = dom.dim
    steps = rel_step * chart.scale

    def f_at(x):
        J = smap.chart_jacobian(x, 0)
        ginv = np.linalg.inv(chart.metric(x))
        e = 0.5 * np.einsum("nij,naj,nai->n", ginv, J, J)
        a = 1.0 / (math.cosh(t0) + (smap.point(x, 0) @ d.u) * math.sinh(t0))
        d1e = profile.dF(e)
        return np.divide(profile.dF(a * a * e), d1e, out=np.ones_like(e), where=d1e > 0)

    grad_f = np.empty((len(q), m))
    for i in range(m):
        du = np.zeros(m)
        du[i] = steps[i]
        grad_f[:, i] = (f_at(q + du) - f_at(q - du)) / (2 * steps[i])
    J = smap.chart_jacobian(q, 0)
    grad_phi_v = np.einsum("nai,a->ni", J, d.u)
    ginv = np.linalg.inv(chart.metric(q))
    inner = np.einsum("ni,nij,nj->n", grad_f, ginv, grad_phi_v)
    a = d.alpha(t0)
    return d.integral(a * a * profile.dF(d.e) * inner)


def lemma2_rhs(smap, profile, v, t0, variant="proof", check=True):
    """Right side of the derivative formula: ``term1(variant) - g(t0)``."""
    if check:
        require_f_harmonic(smap, profile)
    d = _data(smap, v)
    first, second = _g_parts(d, profile, t0)
    return _lemma2_term1(d, profile, t0, variant) - (first + second)


def phi_chi_decomposition(smap, profile, v, t0, check=True):
    """``(Phi(t0), chi(t0))`` by quadrature of their integrands."""
    if check:
        require_f_harmonic(smap, profile)
    d = _data(smap, v)
    a = d.alpha(t0)
    a2 = a * a
    s = a2 * d.e
    d1, d2 = profile.dF(s), profile.d2F(s)
    phi = 2.0 * math.sinh(t0) * d.integral(
        a ** 3 * ((d1 + s * d2) * d.dphi_v_sq - d1 * d.e * d.vbar_sq))
    chi = -d.integral(a2 * _bracket(profile, d.e, a2) * d.phi_v * 2.0 * d.e)
    return phi, chi


def composed_stress_min(d, profile, t):
    """Smallest eigenvalue of ``S^F(gamma_t o phi)`` over all nodes."""
    a2 = d.alpha(t) ** 2
    s = a2 * d.e
    d1 = profile.dF(s)
    eig = (d1 * s)[:, None] - ((d1 + s * profile.d2F(s)) * a2)[:, None] * d.pull_eigs
    return float(eig.min())


# -- sweeps --------------------------------------------------------------------

SWEEP_COLUMNS = ("t", "E", "dE_fd", "lemma2_statement", "lemma2_proof",
                 "Phi", "Chi", "minB", "minStressEig", "verdict")


@dataclass(frozen=True, eq=False)
class SweepRow:
    t: float
    E: float
    dE_fd: float
    lemma2_statement: float
    lemma2_proof: float
    Phi: float
    Chi: float
    minB: float
    minStressEig: float
    verdict: str


@dataclass(frozen=True, eq=False)
class SweepResult:
    direction: np.ndarray
    rows: tuple
    E0: float
    tol_E: float
    stress_min: float

    @property
    def t(self):
        return np.array([r.t for r in self.rows])

    @property
    def E(self):
        return np.array([r.E for r in self.rows])

    @property
    def passed(self):
        return all(r.verdict == "PASS" for r in self.rows)

    @property
    def strict(self):
        return self.stress_min > STRESS_TOL

    @property
    def monotone(self):
        E = self.E
        return bool(np.all(np.diff(E) <= self.tol_E))


def sweep_row(smap, profile, v, t, E0=None, tol_E=None, step=FD_STEP):
    """All sweep quantities at one time; valid for negative ``t`` as well."""
    d = _data(smap, v)
    E = energy_at(smap, profile, d, t)
    E0 = energy_at(smap, profile, d, 0.0) if E0 is None else E0
    tol_E = 1e-7 * (1.0 + abs(E0)) if tol_E is None else tol_E
    first, second = _g_parts(d, profile, t)
    g = first + second
    phi, chi = phi_chi_decomposition(smap, profile, d, t, check=False)
    B = admissibility_B(profile, d.e, d.alpha(t) ** 2, d.phi_v)
    return SweepRow(
        t=float(t), E=E, dE_fd=fd_derivative_oracle(smap, profile, d, t, step),
        lemma2_statement=_lemma2_term1(d, profile, t, "statement") - g,
        lemma2_proof=_lemma2_term1(d, profile, t, "proof") - g,
        Phi=phi, Chi=chi, minB=float(B.min()),
        minStressEig=composed_stress_min(d, profile, t),
        verdict="PASS" if E <= E0 + tol_E else "FAIL")


def _check_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ConfigurationError("t grid must be a non-empty list of times")
    if np.any(t < 0):
        raise ConfigurationError("t grid must be >= 0; reverse the direction for negative times")
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("t grid must be strictly increasing")
    return t


def energy_sweep(smap, profile, v, t_grid=DEFAULT_T_GRID, require_harmonic=False):
    """Energy and derivative data along ``gamma_t^u o phi`` for ``t`` on the grid.

    Row verdict is PASS when ``E(t) <= E(0) + 1e-7 (1 + E(0))``.
    """
    t = _check_grid(t_grid)
    if require_harmonic:
        require_f_harmonic(smap, profile)
    d = _data(smap, v)
    E0 = energy_at(smap, profile, d, 0.0)
    tol_E = 1e-7 * (1.0 + abs(E0))
    rows = tuple(sweep_row(smap, profile, d, ti, E0, tol_E) for ti in t)
    s_min = composed_stress_min(d, profile, 0.0)
    return SweepResult(d.u, rows, E0, tol_E, s_min)


def adjudicate_lemma2(smap, profile, v, t0, rtol=ADJUDICATION_RTOL):
    """Compare both derivative-formula variants with the FD oracle.

    A variant matches when ``|value - fd| <= rtol (1 + |fd|)``, which stays
    meaningful when the derivative itself vanishes.  Returns
    ``(matching variants, {variant: value}, fd value)``.
    """
    d = _data(smap, v)
    fd = fd_derivative_oracle(smap, profile, d, t0)
    values = {k: lemma2_rhs(smap, profile, d, t0, k) for k in ("statement", "proof")}
    match = tuple(k for k, val in values.items() if abs(val - fd) <= rtol * (1.0 + abs(fd)))
    return match, values, fd


# -- theorem pipeline ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TheoremReport:
    verdict: str
    strict: bool
    failed: tuple
    tension_sup: float
    stress_min: float
    min_B: float
    min_comparison: float
    inequality_holds: bool
    sweeps: tuple = field(repr=False)

    def summary(self):
        lines = [f"verdict: {self.verdict}" + (" (strict)" if self.strict and self.verdict == VERIFIED else ""),
                 f"sup|tau_F| = {self.tension_sup:.3e}",
                 f"S^o,F = {self.stress_min:.12g}",
                 f"min B = {self.min_B:.3e}",
                 f"min comparison eigenvalue = {self.min_comparison:.3e}",
                 f"E(t) <= E(0) on the grid: {self.inequality_holds}"]
        if self.failed:
            lines.append("failed hypotheses: " + ", ".join(self.failed))
        return "\n".join(lines)


def verify_theorem(smap, profile, directions, t_grid=DEFAULT_T_GRID, cache=None):
    """Check the hypotheses, then sweep every direction and its opposite.

    ``cache`` may map ``tuple(direction)`` to an existing :class:`SweepResult`
    on the same grid; new sweeps are added to it.
    """
    t = _check_grid(t_grid)
    failed = []
    sup = tension_sup(smap, profile)
    if not sup < TENSION_TOL:
        failed.append("F-harmonic")
    s_min = stress_field(smap, profile).minimum
    if s_min < -STRESS_TOL:
        failed.append("stress positive")
    min_B, min_cmp = math.inf, math.inf
    sweeps = []
    for v in directions:
        u = unit_direction(v, smap.target_dim + 1)
        for w in (u, -u):
            rep = check_tensor_comparison(smap, profile, ConformalFlow(w, 0.0), t_grid=t)
            min_B = min(min_B, rep.min_B)
            min_cmp = min(min_cmp, rep.min_comparison)
            key = tuple(w.tolist())
            if cache is not None and key in cache:
                sweeps.append(cache[key])
                continue
            sw = energy_sweep(smap, profile, w, t)
            if cache is not None:
                cache[key] = sw
            sweeps.append(sw)
    if min_B < -B_TOL or min_cmp < -COMPARISON_TOL:
        failed.append("admissible")
    holds = all(s.passed for s in sweeps)
    if failed:
        verdict = HYPOTHESES_FAIL
    elif holds:
        verdict = VERIFIED
    else:
        verdict = COUNTEREXAMPLE
    return TheoremReport(verdict, s_min > STRESS_TOL, tuple(failed), sup, s_min,
                         min_B, min_cmp, holds, tuple(sweeps))


def energy_at_zero_matches(smap, profile, sweep, tol=1e-10):
    """``E(0)`` of a sweep against the plain F-energy."""
    return abs(sweep.E0 - f_energy(smap, profile)) <= tol * (1.0 + abs(sweep.E0))
