"""The ten acceptance criteria, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py``; the lines are repeated in the
"acceptance criteria" section at the end of the pytest output.
"""
import csv
import math
import os
import sys
import time

import numpy as np
import pytest

from fharmonic.cli import catalog_names, catalog_text, main
from fharmonic.functionals import f_energy, first_variation
from fharmonic.manifold import build_sphere_domain, build_torus_domain, integrate
from fharmonic.profiles import (
    check_tensor_comparison, make_exp_type, make_power, make_sacks_uhlenbeck,
)
from fharmonic.scenario import build, parse_scenario
from fharmonic.smooth_map import compose_with_flow, compute_fields
from fharmonic.sphere_target import (
    ConformalFlow, conformal_factor, flow_apply, flow_ode_oracle, random_directions,
)
from fharmonic.variation import (
    VERIFIED, _Flowed, adjudicate_lemma2, composed_stress_min, energy_at, energy_sweep,
    fd_derivative_oracle, phi_chi_decomposition,
)

THREE_PI_SQ = 3 * math.pi ** 2


def builtin(name):
    return build(parse_scenario(catalog_text(name), f"{name}.toml"))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def run_builtin(name, out):
    start = time.perf_counter()
    code = main(["catalog", "run", name, "--out", str(out)])
    return code, time.perf_counter() - start


@pytest.fixture(scope="module")
def equator_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("equator-s3-s4-p2")
    code, seconds = run_builtin("equator-s3-s4-p2", out)
    return out, code, seconds


def test_criterion_01_theorem_positive_case(equator_run, criterion):
    out, code, seconds = equator_run
    summary = {r["quantity"]: r["value"] for r in read_csv(out / "theorem_summary.csv")}
    stress = {r["quantity"]: r["value"] for r in read_csv(out / "stress.csv")}
    tension = float(summary["tension_sup"])
    s_min = float(stress["S_o_F"])
    e0_err, margin = 0.0, math.inf
    sweeps = sorted(f for f in os.listdir(out) if f.startswith("sweep_d"))
    for f in sweeps:
        rows = read_csv(out / f)
        E0 = float(rows[0]["E"])
        e0_err = max(e0_err, abs(E0 - THREE_PI_SQ))
        for r in rows[1:]:
            margin = min(margin, E0 - float(r["E"]))
    ok = (code == 0 and len(sweeps) == 8 and tension < 1e-4 and abs(s_min - 0.5) <= 1e-6
          and e0_err <= 1e-7 and margin > 1e-3 and summary["verdict"] == VERIFIED
          and seconds < 60)
    criterion(1, ok, f"exit {code}, sup|tau| {tension:.2e}, S^o {s_min:.9f}, "
                     f"|E(0)-3pi^2| {e0_err:.1e}, min E(0)-E(t) {margin:.4f}, "
                     f"{summary['verdict']}, {seconds:.1f} s")


def test_criterion_02_equality_case(criterion):
    b = builtin("identity-s2-p2")
    worst = 0.0
    for u in b.directions:
        sw = energy_sweep(b.smap, b.profile, u, b.t_grid)
        worst = max(worst, np.abs(sw.E - 4 * math.pi).max() / (4 * math.pi))
    from fharmonic.functionals import stress_field
    s_min = stress_field(b.smap, b.profile).minimum
    ok = worst <= 1e-6 and abs(s_min) <= 1e-8 and b.t_grid.max() >= 2.0
    criterion(2, ok, f"max |E(t)-4pi|/4pi {worst:.1e} over {len(b.directions)} directions, "
                     f"S^o {s_min:.1e}")


def test_criterion_03_negative_control(tmp_path, criterion):
    code, _ = run_builtin("identity-s2-p4-negative-control", tmp_path)
    stress = {r["quantity"]: r["value"] for r in read_csv(tmp_path / "stress.csv")}
    summary = {r["quantity"]: r["value"] for r in read_csv(tmp_path / "theorem_summary.csv")}
    s_min = float(stress["S_o_F"])
    ok = (code == 0 and stress["sign"] == "HYPOTHESES-FAIL" and abs(s_min + 2) <= 1e-6
          and summary["verdict"] == "HYPOTHESES-FAIL" and "stress positive" in summary["failed"])
    criterion(3, ok, f"exit {code}, stress verdict {stress['sign']}, S^o {s_min:.9f}, "
                     f"theorem {summary['verdict']} ({summary['failed']})")


def test_criterion_04_first_variation(harmonic_catalog, criterion):
    worst_tau, worst_fd, count = 0.0, 0.0, 0
    for name, smap in harmonic_catalog.items():
        e_max = float(compute_fields(smap).density.max())
        profiles = [make_power(2), make_power(4), make_sacks_uhlenbeck(0.5),
                    make_exp_type(e_max if e_max > 0 else 1.0)]
        for prof in profiles:
            E = f_energy(smap, prof)
            for u in random_directions(smap.target_dim + 1, 3, 404):
                worst_tau = max(worst_tau, abs(first_variation(smap, prof, u)) / (1 + E))
                worst_fd = max(worst_fd, abs(fd_derivative_oracle(smap, prof, u, 0.0)) / (1 + E))
                count += 1
    ok = worst_tau <= 1e-5 and worst_fd <= 1e-5
    criterion(4, ok, f"{count} cases, max |first variation|/(1+E) {worst_tau:.1e}, "
                     f"max |dE/dt(0)|/(1+E) {worst_fd:.1e}")


def test_criterion_05_derivative_variant(equator_run, criterion):
    out, _, _ = equator_run
    rows = read_csv(out / "lemma2.csv")
    matched = [r["variant"] for r in rows if r["match"] == "true"]
    named = "matching variant at t0 = 0.5: proof" in (out / "summary.txt").read_text()
    b = builtin("equator-s3-s4-p2")
    per_direction = {adjudicate_lemma2(b.smap, b.profile, u, 0.5)[0]
                     for u in list(b.directions) + [np.eye(5)[4]]}
    ok = matched == ["proof"] and named and per_direction == {("proof",)}
    criterion(5, ok, f"report names {matched}; every seeded direction and e5 match "
                     f"{sorted(per_direction)}")


def test_criterion_06_decomposition(criterion):
    t0s = (0.25, 0.5, 1.0, 1.5)
    worst, n_verified = 0.0, 0
    chi_max, phi_max = -math.inf, -math.inf
    for name in catalog_names():
        b = builtin(name)
        sc = b.scenario
        verified = sc.expect == VERIFIED
        n_verified += verified
        for u in b.directions:
            d = _Flowed(b.smap, u)
            half = bool(d.phi_v.min() >= 0)
            for t0 in t0s:
                phi, chi = phi_chi_decomposition(b.smap, b.profile, d, t0, check=False)
                if verified:
                    fd = fd_derivative_oracle(b.smap, b.profile, d, t0)
                    worst = max(worst, abs(phi + chi - fd) / (1 + abs(fd)))
                    if composed_stress_min(d, b.profile, t0) >= -1e-10:
                        phi_max = max(phi_max, phi)
                if sc.expect_admissible and half:
                    chi_max = max(chi_max, chi)
    ok = worst <= 1e-4 and chi_max <= 1e-10 and phi_max <= 1e-10
    criterion(6, ok, f"{n_verified} verified scenarios: max residual {worst:.1e}; "
                     f"max chi (admissible, phi_v >= 0) {chi_max:.1e}; "
                     f"max Phi (PSD composed stress) {phi_max:.1e}")


def test_criterion_07_admissibility(catalog, criterion):
    grid = np.round(np.linspace(0, 2, 21), 12)
    power_B, power_cmp = 0.0, math.inf
    for smap in catalog.values():
        for p in (2, 4):
            for u in random_directions(smap.target_dim + 1, 2, 707):
                rep = check_tensor_comparison(smap, make_power(p), ConformalFlow(u), t_grid=grid)
                power_B = max(power_B, rep.max_abs_B)
                power_cmp = min(power_cmp, rep.min_comparison)
    half_B, half_cmp = math.inf, math.inf
    names = ("latitude-s3-s4-su", "latitude-s3-s4-exp",
             "equator-s3-s4-su-half", "equator-s3-s4-exp-half")
    for name in names:
        b = builtin(name)
        for u in b.directions:
            assert compute_fields(b.smap, u).phi_v.min() >= 0
            rep = check_tensor_comparison(b.smap, b.profile, ConformalFlow(u), t_grid=b.t_grid)
            half_B = min(half_B, rep.min_B)
            half_cmp = min(half_cmp, rep.min_comparison)
    ok = power_B <= 1e-12 and power_cmp >= -1e-10 and half_B >= -1e-12 and half_cmp >= -1e-10
    criterion(7, ok, f"power max|B| {power_B:.1e}, comparison {power_cmp:.1e}; "
                     f"half-sphere exp/SU min B {half_B:.1e}, comparison {half_cmp:.1e}")


def test_criterion_08_flow_oracle(criterion):
    rng = np.random.default_rng(8)
    ode_dev, group_dev, cocycle_dev = 0.0, 0.0, 0.0
    for _ in range(100):
        dim = int(rng.integers(3, 6))
        u = random_directions(dim, 1, int(rng.integers(1 << 31)))[0]
        y = rng.standard_normal(dim)
        y /= np.linalg.norm(y)
        t, s = rng.uniform(-2, 2, 2)
        flow = ConformalFlow(u, t)
        ode_dev = max(ode_dev, np.abs(flow_apply(flow, y) - flow_ode_oracle(flow, y)).max())
        yt = flow_apply(flow, y)
        group_dev = max(group_dev, np.abs(flow_apply(ConformalFlow(u, s), yt)
                                          - flow_apply(ConformalFlow(u, s + t), y)).max())
        cocycle_dev = max(cocycle_dev, abs(
            conformal_factor(ConformalFlow(u, s + t), y)
            - conformal_factor(ConformalFlow(u, s), yt) * conformal_factor(flow, y)))
    ok = ode_dev < 1e-8 and group_dev <= 1e-10 and cocycle_dev <= 1e-10
    criterion(8, ok, f"RK4 deviation {ode_dev:.1e}, group law {group_dev:.1e}, "
                     f"cocycle {cocycle_dev:.1e}")


def test_criterion_09_pullback_identity(catalog, criterion):
    worst = 0.0
    for name, smap in catalog.items():
        base = compute_fields(smap)
        dphi_sq = 2 * base.density
        for u in random_directions(smap.target_dim + 1, 2, 909):
            for t in (0.5, 1.0):
                flow = ConformalFlow(u, t)
                comp = 2 * compute_fields(compose_with_flow(smap, flow)).density
                expect = flow.factor(base.points) ** 2 * dphi_sq
                err = np.abs(comp - expect)
                live = expect > 0
                assert np.all(err[~live] == 0.0), name
                if np.any(live):
                    worst = max(worst, float((err[live] / expect[live]).max()))
    criterion(9, worst <= 1e-5, f"max per-node relative error {worst:.1e} "
                                f"over {len(catalog)} catalog maps")


def test_criterion_10_quadrature(criterion):
    vols = []
    for dom, exact in ((build_sphere_domain(2), 4 * math.pi),
                       (build_sphere_domain(3), 2 * math.pi ** 2),
                       (build_torus_domain(2, [2 * math.pi, 2 * math.pi]), 4 * math.pi ** 2)):
        vols.append(abs(integrate(dom, np.ones(dom.n_nodes)) - exact) / exact)
    b = builtin("equator-s3-s4-p2")
    fine = build_sphere_domain(3, 2 * b.domain.resolution)
    from fharmonic.smooth_map import equator_map
    fine_map = equator_map(fine, 4)
    change = 0.0
    for u in b.directions:
        for t in b.t_grid:
            e1 = energy_at(b.smap, b.profile, u, t)
            e2 = energy_at(fine_map, b.profile, u, t)
            change = max(change, abs(e1 - e2) / abs(e2))
    ok = max(vols) <= 1e-8 and change < 1e-7
    criterion(10, ok, f"volume errors {', '.join(f'{v:.1e}' for v in vols)}; "
                      f"resolution doubling changes E(t) by {change:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
