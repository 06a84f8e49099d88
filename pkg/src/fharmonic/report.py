"""Run a scenario's checks and write CSV files plus a plain-text summary.

Every CSV is UTF-8, comma separated, ``\\n`` line endings, floats written
with 17 significant digits; nothing time- or host-dependent is written, so a
rerun reproduces the files byte for byte.
"""
import csv
from dataclasses import dataclass
import os

import numpy as np

from .functionals import f_energy, f_energy_composed, f_energy_flow, stress_field
from .profiles import check_tensor_comparison
from .smooth_map import compute_fields
from .sphere_target import ConformalFlow
from .variation import (
    ADJUDICATION_RTOL, SWEEP_COLUMNS, VERIFIED, adjudicate_lemma2, energy_sweep,
    fd_derivative_oracle, phi_chi_decomposition, tension_sup, verify_theorem,
)

ENERGY_RTOL = 1e-5
DECOMPOSITION_RTOL = 1e-4
STRESS_IDENTITY_TOL = 1e-10


def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return "{:.17g}".format(float(x) + 0.0)  # no "-0"
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter=",", lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class Outcome:
    scenario: str
    checks: list
    files: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)


class Runner:
    def __init__(self, built, out_dir):
        self.b = built
        self.sc = built.scenario
        self.out_dir = out_dir
        self.checks = []
        self.files = []
        self.sweeps = {}

    # helpers
    def _path(self, name):
        path = os.path.join(self.out_dir, name)
        self.files.append(path)
        return path

    def _record(self, name, passed, detail):
        self.checks.append(CheckResult(name, bool(passed), detail))

    def _sweep(self, u):
        key = tuple(u.tolist())
        if key not in self.sweeps:
            self.sweeps[key] = energy_sweep(self.b.smap, self.b.profile, u, self.b.t_grid)
        return self.sweeps[key]

    @property
    def expect_verified(self):
        return self.sc.expect == VERIFIED

    # checks
    def energy(self):
        b = self.b
        ts = self.sc.get("energy_t", [0.5, 1.0])
        rows, worst = [], 0.0
        for k, u in enumerate(b.directions[:3]):
            for t in ts:
                flow = ConformalFlow(u, t)
                slow = f_energy_composed(b.smap, b.profile, flow, strict=False)
                fast = f_energy_flow(b.smap, b.profile, flow)
                rel = abs(slow - fast) / (1.0 + abs(fast))
                worst = max(worst, rel)
                rows.append((k, float(t), slow, fast, rel))
        write_csv(self._path("energy.csv"), ("direction", "t", "E_composed", "E_pullback", "rel_diff"), rows)
        E0 = f_energy(b.smap, b.profile)
        self._record("energy", worst <= ENERGY_RTOL,
                     f"E(0) = {E0:.12g}; composed vs pullback energy max rel diff {worst:.2e}")

    def stress(self):
        b = self.b
        fields = compute_fields(b.smap)
        st = stress_field(b.smap, b.profile, fields)
        e = fields.density
        m = b.domain.dim
        d1, d2 = b.profile.dF(e), b.profile.d2F(e)
        trace_err = float(np.max(np.abs(np.trace(st.S, axis1=-2, axis2=-1)
                                        - (m * d1 * e - (d1 + e * d2) * 2 * e))))
        smin = st.minimum
        sign = "strictly positive" if smin > 1e-10 else ("positive" if smin >= -1e-10 else "HYPOTHESES-FAIL")
        write_csv(self._path("stress.csv"), ("quantity", "value"),
                  [("S_o_F", smin), ("asymmetry", st.asymmetry), ("trace_identity_error", trace_err),
                   ("sign", sign)])
        ok = st.asymmetry <= 1e-12 and trace_err <= STRESS_IDENTITY_TOL
        if self.expect_verified:
            ok = ok and smin >= -1e-10
        self._record("stress", ok, f"S^o,F = {smin:.12g} ({sign})")

    def sweep(self):
        b = self.b
        ok, fails = True, 0
        for k, u in enumerate(b.directions):
            sw = self._sweep(u)
            write_csv(self._path(f"sweep_d{k:02d}.csv"), SWEEP_COLUMNS,
                      [[getattr(r, c) for c in SWEEP_COLUMNS] for r in sw.rows])
            if not (sw.passed and sw.monotone):
                fails += 1
        if self.expect_verified:
            ok = fails == 0
        self._record("sweep", ok, f"{len(b.directions)} directions, "
                     f"{fails} with E(t) above E(0) or not monotone"
                     + ("" if self.expect_verified else " (informational)"))

    def admissibility(self):
        b = self.b
        rows, min_B, max_abs_B, min_cmp = [], np.inf, 0.0, np.inf
        for k, u in enumerate(b.directions):
            rep = check_tensor_comparison(b.smap, b.profile, ConformalFlow(u, 0.0), t_grid=b.t_grid)
            min_B = min(min_B, rep.min_B)
            max_abs_B = max(max_abs_B, rep.max_abs_B)
            min_cmp = min(min_cmp, rep.min_comparison)
            rows.append((k, rep.min_B, rep.max_abs_B, rep.min_comparison, rep.admissible))
        write_csv(self._path("admissibility.csv"),
                  ("direction", "minB", "maxAbsB", "minComparisonEig", "admissible"), rows)
        ok = min_B >= -1e-12 and min_cmp >= -1e-10
        checked = self.sc.expect_admissible
        self._record("admissibility", ok or not checked,
                     f"min B = {min_B:.3e}, max|B| = {max_abs_B:.3e}, "
                     f"min comparison eigenvalue = {min_cmp:.3e}"
                     + ("" if checked else " (informational)"))

    def lemma2(self):
        b = self.b
        t0 = float(self.sc.get("lemma2_t0", 0.5))
        u = b.directions[0]
        match, values, fd = adjudicate_lemma2(b.smap, b.profile, u, t0)
        write_csv(self._path("lemma2.csv"), ("t0", "variant", "value", "dE_fd", "rel_diff", "match"),
                  [(t0, k, val, fd, abs(val - fd) / (1.0 + abs(fd)), k in match)
                   for k, val in values.items()])
        named = match[0] if len(match) == 1 else ("none" if not match else "both")
        self._record("lemma2", len(match) == 1,
                     f"matching variant at t0 = {t0:g}: {named} (rtol {ADJUDICATION_RTOL:g})")

    def decomposition(self):
        b = self.b
        t0s = self.sc.get("decomposition_t0", [0.25, 0.5, 1.0, 1.5])
        rows, worst, chi_max, phi_max = [], 0.0, -np.inf, -np.inf
        for k, u in enumerate(b.directions):
            for t0 in t0s:
                phi, chi = phi_chi_decomposition(b.smap, b.profile, u, t0, check=False)
                fd = fd_derivative_oracle(b.smap, b.profile, u, t0)
                res = abs(phi + chi - fd) / (1.0 + abs(fd))
                worst = max(worst, res)
                chi_max, phi_max = max(chi_max, chi), max(phi_max, phi)
                rows.append((k, float(t0), phi, chi, phi + chi, fd, res))
        write_csv(self._path("decomposition.csv"),
                  ("direction", "t0", "Phi", "Chi", "Phi_plus_Chi", "dE_fd", "rel_residual"), rows)
        ok = worst <= DECOMPOSITION_RTOL if self.expect_verified else True
        self._record("decomposition", ok,
                     f"max |Phi+Chi-dE/dt|/(1+|dE/dt|) = {worst:.2e}, max Chi = {chi_max:.3e}, "
                     f"max Phi = {phi_max:.3e}" + ("" if self.expect_verified else " (informational)"))

    def theorem(self):
        b = self.b
        for u in b.directions:
            self._sweep(u)
        rep = verify_theorem(b.smap, b.profile, b.directions, b.t_grid, cache=self.sweeps)
        rows = []
        for k, sw in enumerate(rep.sweeps):
            rows.append((k // 2, "+" if k % 2 == 0 else "-", sw.passed,
                         float(np.max(sw.E - sw.E0)), sw.E0))
        write_csv(self._path("theorem.csv"),
                  ("direction", "sign", "inequality_holds", "max_E_minus_E0", "E0"), rows)
        write_csv(self._path("theorem_summary.csv"), ("quantity", "value"),
                  [("verdict", rep.verdict), ("strict", rep.strict),
                   ("failed", ";".join(rep.failed)), ("tension_sup", rep.tension_sup),
                   ("stress_min", rep.stress_min), ("min_B", rep.min_B),
                   ("min_comparison", rep.min_comparison),
                   ("inequality_holds", rep.inequality_holds)])
        strict = " (strict)" if rep.strict and rep.verdict == VERIFIED else ""
        failed = f"; failed: {', '.join(rep.failed)}" if rep.failed else ""
        self._record("theorem", rep.verdict == self.sc.expect,
                     f"{rep.verdict}{strict} (expected {self.sc.expect}){failed}")

    def run(self):
        os.makedirs(self.out_dir, exist_ok=True)
        for name in self.sc.checks:
            getattr(self, name)()
        self.write_summary()
        return Outcome(self.sc.name, self.checks, self.files)

    def write_summary(self):
        b = self.b
        lines = [f"scenario: {self.sc.name}",
                 f"domain: {b.domain.describe()}",
                 f"map: {b.smap.name}",
                 f"profile: {b.profile.label}",
                 f"directions: {len(b.directions)}",
                 f"t grid: {len(b.t_grid)} points in [{b.t_grid[0]:g}, {b.t_grid[-1]:g}]",
                 f"sup|tau_F|: {tension_sup(b.smap, b.profile):.3e}"]
        for c in self.checks:
            lines.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
        lines.append(f"overall: {'PASS' if all(c.passed for c in self.checks) else 'FAIL'}")
        with open(self._path("summary.txt"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        self.summary_lines = lines


def run_built(built, out_dir):
    runner = Runner(built, out_dir)
    outcome = runner.run()
    outcome.summary_lines = runner.summary_lines
    return outcome
