"""Scenario configuration: a flat TOML file of keys and arrays.

Every error names the file and the line of the offending key, e.g.
``equator.toml:7: power profile needs p = 2 or p >= 4, got p=3``.
"""
from contextlib import contextmanager
from dataclasses import dataclass, field
import math
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from . import profiles as prof
from . import smooth_map as sm
from .errors import ConfigurationError, ContractViolation
from .manifold import build_sphere_domain, build_torus_domain
from .sphere_target import random_directions
from .variation import COUNTEREXAMPLE, DEFAULT_SEED, HYPOTHESES_FAIL, VERIFIED

CHECKS = ("energy", "stress", "sweep", "admissibility", "lemma2", "decomposition", "theorem")
MAPS = ("identity", "equator", "latitude", "constant", "clifford")
PROFILES = ("power", "exp", "sacks-uhlenbeck")
VERDICTS = (VERIFIED, HYPOTHESES_FAIL, COUNTEREXAMPLE)

# key -> accepted python types
SCHEMA = {
    "name": str, "description": str,
    "domain": str, "dim": int, "resolution": int, "periods": list,
    "map": str, "target_dim": int, "map_height": float, "map_point": list,
    "profile": str, "p": float, "a": float, "alpha": float,
    "directions": list, "direction_count": int, "seed": int,
    "t_grid": list, "t_max": float, "t_step": float,
    "checks": list, "expect": str, "expect_admissible": bool,
    "energy_t": list, "lemma2_t0": float, "decomposition_t0": list,
    "output_dir": str,
}
REQUIRED = ("name", "domain", "dim", "map", "profile")


class ConfigError(ConfigurationError):
    def __init__(self, source, line, message):
        self.source, self.line, self.message = source, line, message
        super().__init__(f"{source}:{line}: {message}")


@dataclass(frozen=True, eq=False)
class Scenario:
    source: str
    values: dict
    lines: dict = field(repr=False)

    @property
    def name(self):
        return self.values["name"]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def line_of(self, key):
        return self.lines.get(key, 1)

    @contextmanager
    def at(self, key):
        """Re-raise configuration problems anchored at ``key``'s line."""
        try:
            yield
        except ConfigError:
            raise
        except (ConfigurationError, ContractViolation) as exc:
            raise ConfigError(self.source, self.line_of(key), str(exc)) from None

    def fail(self, key, message):
        raise ConfigError(self.source, self.line_of(key), message)

    @property
    def checks(self):
        return tuple(self.get("checks", CHECKS))

    @property
    def expect(self):
        return self.get("expect", VERIFIED)

    @property
    def expect_admissible(self):
        return self.get("expect_admissible", self.expect == VERIFIED)


def _key_lines(text):
    lines = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*([A-Za-z0-9_\-]+)\s*=", raw)
        if m and m.group(1) not in lines:
            lines[m.group(1)] = i
    return lines


def parse_scenario(text, source="<config>"):
    """Parse and validate a scenario; the heavy objects are built by :func:`build`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(source, int(m.group(1)) if m else 1, f"malformed config: {exc}") from None
    sc = Scenario(source, data, _key_lines(text))
    for key, value in data.items():
        if key not in SCHEMA:
            sc.fail(key, f"unknown key {key!r}")
        want = SCHEMA[key]
        if isinstance(value, dict):
            sc.fail(key, f"{key!r}: nested tables are not supported")
        ok = isinstance(value, want) and not (want is int and isinstance(value, bool))
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            ok = True
        if not ok:
            sc.fail(key, f"{key!r} must be of type {want.__name__}, got {type(value).__name__}")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(source, 1, f"missing required key {key!r}")
    _validate(sc)
    return sc


def load_scenario(path):
    path = str(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(path, 0, f"cannot read config: {exc.strerror}") from None
    return parse_scenario(text, path)


def _numbers(sc, key, nested=False):
    value = sc.get(key)
    items = value if not nested else [x for row in value for x in (row if isinstance(row, list) else [row])]
    if nested and any(not isinstance(row, list) for row in value):
        sc.fail(key, f"{key!r} must be a list of vectors")
    for x in items:
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            sc.fail(key, f"{key!r} must contain finite numbers only")


def _validate(sc):
    v = sc.values
    if v["domain"] not in ("sphere", "torus"):
        sc.fail("domain", f"domain must be 'sphere' or 'torus', got {v['domain']!r}")
    if v["map"] not in MAPS:
        sc.fail("map", f"unknown map {v['map']!r}; choose from {', '.join(MAPS)}")
    if v["profile"] not in PROFILES:
        sc.fail("profile", f"unknown profile {v['profile']!r}; choose from {', '.join(PROFILES)}")
    for key in ("periods", "map_point", "t_grid", "energy_t", "decomposition_t0"):
        if key in v:
            _numbers(sc, key)
    if "directions" in v:
        _numbers(sc, "directions", nested=True)
        if not v["directions"]:
            sc.fail("directions", "'directions' must not be empty")
    if "directions" in v and "direction_count" in v:
        sc.fail("direction_count", "give either 'directions' or 'direction_count', not both")
    if v.get("direction_count", 1) < 1:
        sc.fail("direction_count", "'direction_count' must be >= 1")
    if "t_grid" in v and ("t_max" in v or "t_step" in v):
        sc.fail("t_grid", "give either 't_grid' or 't_max'/'t_step', not both")
    if v.get("t_step", 0.1) <= 0 or v.get("t_max", 2.0) < 0:
        sc.fail("t_step" if "t_step" in v else "t_max", "t_step must be > 0 and t_max >= 0")
    for c in v.get("checks", []):
        if c not in CHECKS:
            sc.fail("checks", f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    if sc.expect not in VERDICTS:
        sc.fail("expect", f"expect must be one of {', '.join(VERDICTS)}")
    with sc.at("t_grid" if "t_grid" in v else "t_max"):
        t = time_grid(sc)
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise ConfigurationError("t grid must be >= 0 and strictly increasing")


def time_grid(sc):
    if "t_grid" in sc.values:
        return np.array(sc.get("t_grid"), dtype=float)
    t_max, step = float(sc.get("t_max", 2.0)), float(sc.get("t_step", 0.1))
    count = int(math.floor(t_max / step + 1e-9)) + 1
    return np.round(step * np.arange(count), 12)


@dataclass(frozen=True, eq=False)
class BuiltScenario:
    scenario: Scenario
    domain: object
    smap: object
    profile: object
    directions: np.ndarray
    t_grid: np.ndarray


def build(sc):
    """Construct domain, map, profile, directions and time grid."""
    v = sc.values
    if v["domain"] == "sphere" and v["dim"] not in (2, 3):
        sc.fail("dim", f"sphere domains support m in {{2, 3}}, got m={v['dim']}")
    if v["domain"] == "torus" and v["dim"] < 2:
        sc.fail("dim", f"domain dimension must be >= 2, got m={v['dim']}")
    with sc.at("dim"):
        if v["domain"] == "sphere":
            with sc.at("resolution"):
                domain = build_sphere_domain(v["dim"], v.get("resolution"))
        else:
            periods = v.get("periods", [2 * math.pi] * v["dim"])
            with sc.at("periods" if "periods" in v else "resolution"):
                domain = build_torus_domain(v["dim"], periods, v.get("resolution"))
    smap = _build_map(sc, domain)
    profile = _build_profile(sc, smap)
    dim = smap.target_dim + 1
    if "directions" in v:
        dirs = np.array(v["directions"], dtype=float) if all(
            len(row) == dim for row in v["directions"]) else None
        if dirs is None:
            sc.fail("directions", f"directions must be vectors in R^{dim} (target S^{dim - 1})")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(norms == 0):
            sc.fail("directions", "directions must be nonzero")
        dirs = dirs / norms[:, None]
    else:
        dirs = random_directions(dim, v.get("direction_count", 8), v.get("seed", DEFAULT_SEED))
    return BuiltScenario(sc, domain, smap, profile, dirs, time_grid(sc))


def _build_map(sc, domain):
    v = sc.values
    kind = v["map"]
    m = domain.dim
    with sc.at("map"):
        if kind == "identity":
            n = v.get("target_dim", m)
            if n != m:
                sc.fail("target_dim", f"identity map needs target_dim = dim = {m}")
            return sm.identity_map(domain)
        if kind == "equator":
            with sc.at("target_dim"):
                return sm.equator_map(domain, v.get("target_dim", m + 1))
        if kind == "latitude":
            with sc.at("map_height"):
                return sm.latitude_map(domain, v.get("target_dim", m + 1), float(v.get("map_height", 0.5)))
        if kind == "constant":
            n = v.get("target_dim", m)
            with sc.at("map_point" if "map_point" in v else "target_dim"):
                point = v.get("map_point")
                return sm.constant_map(domain, n, None if point is None else np.array(point, float))
        with sc.at("target_dim"):
            return sm.clifford_map(domain, v.get("target_dim", 3))


def _build_profile(sc, smap):
    v = sc.values
    kind = v["profile"]
    if kind == "power":
        with sc.at("p"):
            return prof.make_power(v.get("p", 2.0))
    if kind == "sacks-uhlenbeck":
        with sc.at("alpha"):
            return prof.make_sacks_uhlenbeck(v.get("alpha", 0.5))
    with sc.at("a" if "a" in v else "profile"):
        if "a" in v:
            return prof.make_exp_type(v["a"])
        a = float(np.max(sm.compute_fields(smap).density))
        # a map without energy leaves a = max e = 0 undefined; fall back to 1
        return prof.make_exp_type(a if a > 0 else 1.0)
