"""Run configuration: nested YAML sections validated against a fixed schema.

Unknown keys are errors. ``RunConfig.to_yaml`` writes every recognized key,
so load -> dump -> load is the identity.
"""
import copy
import math
import os
from dataclasses import dataclass, replace

import yaml

from .errors import ConfigError, InvalidArgumentError
from .grid import build_grid
from .ladder import HarnessOptions
from .nonlinearity import CONSTRUCTIONS, DIRECTION, NonlinearitySpec, compose_g, default_linear_coefficient
from .solver import SolverOptions

_NONLINEARITY = {"family": "origin", "alpha": 0.5, "beta": 1.0, "a": 0.5, "table": None}

DEFAULTS = {
    "domain": {"L": 1.0, "n_interior": 257},
    "s": 0.4,
    "nonlinearity": dict(_NONLINEARITY),
    "construction": {
        "name": "origin_power",
        "lambda": 0.0,
        "p": 0.5,
        "linear": 0.1,
        "q": 2.0,
        "mu_q": 0.0,
        "eps": 0.0,
        "second": None,
    },
    "ladder": {
        "direction": None,
        "K": 3,
        "search_range": [5e-4, 1.0],
        "samples_per_decade": 20000,
        "min_ratio": 1.5,
        "bump_radius_fraction": 0.25,
    },
    "solver": {
        "tol": 1e-8,
        "max_iter": 50000,
        "random_starts": 2,
        "rng_seed": 0,
        "bump_starts": 3,
        "bump_radii": [0.25, 0.5],
        "sep_factor": 1e-4,
    },
    "window": {"p": None, "certificate": "minimizer", "lambdas": None},
    "verify": {"oracle_refinement": 32, "oracle_tolerance": 0.01, "fd_pairs": 20, "sign_pairs": 10000},
    "output": {"dir": "out", "dump_stiffness": False},
}


def _merge(defaults, user, path=""):
    if not isinstance(user, dict):
        raise ConfigError(f"section {path or '<root>'} must be a mapping")
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in defaults:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], value, where)
        elif key == "second" and value is not None:
            out[key] = _merge(_NONLINEARITY, value, where)
        else:
            out[key] = value
    return out


def _number(data, path, cond=None, message="", integer=False, allow_none=False):
    node = data
    for part in path.split("."):
        node = node[part]
    if node is None and allow_none:
        return
    ok_type = isinstance(node, int) if integer else isinstance(node, (int, float))
    if isinstance(node, bool) or not ok_type or not math.isfinite(node):
        raise ConfigError(f"{path} must be a finite {'integer' if integer else 'number'}, got {node!r}")
    if cond is not None and not cond(node):
        raise ConfigError(f"{path} {message}, got {node!r}")


def validate(data):
    _number(data, "domain.L", lambda v: v > 0, "must be positive")
    _number(data, "domain.n_interior", lambda v: v >= 3, "must be at least 3", integer=True)
    _number(data, "s", lambda v: 0 < v < 1, "must lie in (0, 1)")
    nl = data["nonlinearity"]
    if nl["family"] not in ("origin", "infinity", "custom"):
        raise ConfigError(f"nonlinearity.family must be origin, infinity or custom, got {nl['family']!r}")
    for key in ("alpha", "beta", "a"):
        _number(data, f"nonlinearity.{key}")
    if nl["family"] == "custom" and not nl["table"]:
        raise ConfigError("nonlinearity.table is required for the custom family")
    c = data["construction"]
    if c["name"] not in CONSTRUCTIONS:
        raise ConfigError(f"construction.name must be one of {CONSTRUCTIONS}, got {c['name']!r}")
    _number(data, "construction.lambda")
    _number(data, "construction.p", lambda v: v > 0, "must be positive")
    _number(data, "construction.linear", allow_none=True)
    _number(data, "construction.q", lambda v: v > 0, "must be positive")
    for key in ("mu_q", "eps"):
        _number(data, f"construction.{key}")
    lad = data["ladder"]
    if lad["direction"] not in (None, "origin", "infinity"):
        raise ConfigError(f"ladder.direction must be origin or infinity, got {lad['direction']!r}")
    _number(data, "ladder.K", lambda v: v >= 1, "must be at least 1", integer=True)
    rng = lad["search_range"]
    if (not isinstance(rng, (list, tuple)) or len(rng) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in rng)
            or not 0 < rng[0] < rng[1] or not math.isfinite(rng[1])):
        raise ConfigError(f"ladder.search_range must be [lo, hi] with 0 < lo < hi, got {rng!r}")
    _number(data, "ladder.samples_per_decade", lambda v: v >= 10, "must be at least 10", integer=True)
    _number(data, "ladder.min_ratio", lambda v: v >= 1, "must be >= 1")
    _number(data, "ladder.bump_radius_fraction", lambda v: 0 < v <= 0.5, "must lie in (0, 0.5]")
    _number(data, "solver.tol", lambda v: v > 0, "must be positive")
    _number(data, "solver.max_iter", lambda v: v >= 1, "must be positive", integer=True)
    _number(data, "solver.random_starts", lambda v: v >= 0, "must be nonnegative", integer=True)
    _number(data, "solver.rng_seed", lambda v: v >= 0, "must be nonnegative", integer=True)
    _number(data, "solver.bump_starts", lambda v: v >= 0, "must be nonnegative", integer=True)
    _number(data, "solver.sep_factor", lambda v: v > 0, "must be positive")
    radii = data["solver"]["bump_radii"]
    if not isinstance(radii, list) or not all(
            isinstance(r, (int, float)) and not isinstance(r, bool) and 0 < r <= 0.5 for r in radii):
        raise ConfigError(f"solver.bump_radii must be a list of fractions in (0, 0.5], got {radii!r}")
    _number(data, "window.p", lambda v: v > 0, "must be positive", allow_none=True)
    if data["window"]["certificate"] not in ("minimizer", "bump"):
        raise ConfigError("window.certificate must be 'minimizer' or 'bump'")
    lams = data["window"]["lambdas"]
    if lams is not None and not (isinstance(lams, list) and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in lams)):
        raise ConfigError(f"window.lambdas must be a list of numbers, got {lams!r}")
    _number(data, "verify.oracle_refinement", lambda v: v >= 1, "must be >= 1", integer=True)
    _number(data, "verify.oracle_tolerance", lambda v: v > 0, "must be positive")
    _number(data, "verify.fd_pairs", lambda v: v >= 1, "must be positive", integer=True)
    _number(data, "verify.sign_pairs", lambda v: v >= 1, "must be positive", integer=True)
    if not isinstance(data["output"]["dir"], str):
        raise ConfigError("output.dir must be a string")
    if not isinstance(data["output"]["dump_stiffness"], bool):
        raise ConfigError("output.dump_stiffness must be true or false")
    # module-level preconditions
    try:
        RunConfig(data).composite()
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from exc
    return data


@dataclass
class RunConfig:
    data: dict

    @classmethod
    def from_dict(cls, user):
        return cls(validate(_merge(DEFAULTS, {} if user is None else user)))

    def to_dict(self):
        return copy.deepcopy(self.data)

    def to_yaml(self):
        return yaml.safe_dump(self.data, sort_keys=True, default_flow_style=False)

    def with_seed(self, seed):
        data = self.to_dict()
        data["solver"]["rng_seed"] = int(seed)
        return RunConfig.from_dict(data)

    @property
    def direction(self):
        d = self.data["ladder"]["direction"]
        name = self.data["construction"]["name"]
        return d or DIRECTION.get(name) or (
            "infinity" if self.data["nonlinearity"]["family"] == "infinity" else "origin")

    def grid(self):
        dom = self.data["domain"]
        return build_grid(float(dom["L"]), int(dom["n_interior"]))

    def spec(self):
        nl = self.data["nonlinearity"]
        c = self.data["construction"]
        second = None
        if c["second"] is not None:
            second = NonlinearitySpec(**_spec_fields(c["second"]))
        linear = c["linear"]
        spec = NonlinearitySpec(
            **_spec_fields(nl), lam=float(c["lambda"]), p=float(c["p"]),
            mu_lin=0.0 if linear is None else float(linear),
            q=float(c["q"]), mu_q=float(c["mu_q"]), eps=float(c["eps"]), second=second,
        )
        if linear is None:
            scales = [10.0 ** -j for j in range(1, 7)] if self.direction == "origin" else [
                10.0 ** j for j in range(1, 5)]
            lower = max(float(c["lambda"]), 0.0) if c["name"].endswith("_linear") else 0.0
            spec = replace(spec, mu_lin=default_linear_coefficient(spec, lower, scales))
        return spec

    def composite(self):
        return compose_g(self.spec(), self.data["construction"]["name"], self.direction)

    def solver_options(self):
        s = self.data["solver"]
        return SolverOptions(
            tol=float(s["tol"]), max_iter=int(s["max_iter"]), random_starts=int(s["random_starts"]),
            rng_seed=int(s["rng_seed"]), bump_starts=int(s["bump_starts"]),
            bump_radii=tuple(float(r) for r in s["bump_radii"]), sep_factor=float(s["sep_factor"]),
        )

    def harness_options(self):
        lad = self.data["ladder"]
        return HarnessOptions(
            K=int(lad["K"]), search_range=tuple(float(v) for v in lad["search_range"]),
            samples_per_decade=int(lad["samples_per_decade"]), min_ratio=float(lad["min_ratio"]),
            bump_radius_fraction=float(lad["bump_radius_fraction"]), solver=self.solver_options(),
        )

    @property
    def window_p(self):
        p = self.data["window"]["p"]
        return float(p if p is not None else self.data["construction"]["p"])


def _spec_fields(nl):
    return {
        "family": nl["family"], "alpha": float(nl["alpha"]), "beta": float(nl["beta"]),
        "a": float(nl["a"]), "table": nl["table"],
    }


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            user = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    if isinstance(user, dict):
        _resolve_tables(user, os.path.dirname(os.path.abspath(path)))
    return RunConfig.from_dict(user)


def _resolve_tables(user, base):
    """Make table paths relative to the config file's directory."""
    construction = user.get("construction")
    sections = [user.get("nonlinearity")]
    if isinstance(construction, dict):
        sections.append(construction.get("second"))
    for section in sections:
        if isinstance(section, dict) and isinstance(section.get("table"), str):
            section["table"] = os.path.join(base, section["table"])


def parse_config_text(text):
    try:
        user = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return RunConfig.from_dict(user)
