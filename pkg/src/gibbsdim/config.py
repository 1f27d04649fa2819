"""Experiment configuration: a single YAML file, validated fail-closed.

Key paths:
    map:        family, c, a, b, dd, e, eps, base_degree
    potential:  variant, parameters
    orders:     pressure_n, depth_N, grid_size
    sampling:   eps_ball, samples, seed
    basic_set:  depth, tol
    <command>:  command-specific options (see COMMAND_KEYS)

Unknown keys anywhere are errors.  All numeric fields must be finite.
"""
from __future__ import annotations

import math
import numbers

import yaml

from . import maps, thermo
from .basicset import BasicSetModel
from .errors import ConfigError

MAP_KEYS = {"family", "c", "a", "b", "dd", "e", "eps", "base_degree"}
POTENTIAL_KEYS = {"variant", "parameters"}
ORDERS_KEYS = {"pressure_n", "depth_N", "grid_size"}
SAMPLING_KEYS = {"eps_ball", "samples", "seed"}
BASIC_SET_KEYS = {"depth", "tol"}
COMMAND_KEYS = {
    "pressure": set(),
    "lyapunov": set(),
    "dimension": {"d_prime", "n_min", "n_max"},
    "ball_measure": {"n_max", "k_max", "d_prime"},
    "bowen_root": {"d_prime", "order"},
    "classify": {"survey", "with_empirical"},
    "jacobian": {"m_values", "trials", "d_prime"},
    "verify": set(),
}
TOP_KEYS = ({"map", "potential", "orders", "sampling", "basic_set"}
            | set(COMMAND_KEYS))

FAMILIES = {"product", "perturbed"}
VARIANTS = {"zero", "constant", "stable_log", "unstable_log",
            "angle_harmonic", "sum"}

DEFAULTS = {
    "map": {"family": "product", "c": 0.1, "a": 0.0, "b": 0.0,
            "dd": 0.0, "e": 0.0, "eps": 0.0, "base_degree": 2},
    "potential": {"variant": "zero", "parameters": {}},
    "orders": {"pressure_n": 18, "depth_N": 12, "grid_size": 2048},
    "sampling": {"eps_ball": 0.05, "samples": 2_000_000, "seed": None},
    "basic_set": {"depth": 16, "tol": 1e-6},
    "dimension": {"d_prime": "auto", "n_min": 1, "n_max": None},
    "ball_measure": {"n_max": 8, "k_max": 12, "d_prime": 1},
    "bowen_root": {"d_prime": 1, "order": 18},
    "classify": {"survey": 100, "with_empirical": False},
    "jacobian": {"m_values": [1, 2, 3], "trials": 50, "d_prime": 1},
    "pressure": {},
    "lyapunov": {},
    "verify": {},
}

STOCHASTIC_COMMANDS = {"dimension", "ball-measure", "classify",
                       "jacobian", "verify"}


def _check_mapping(obj, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a mapping, got "
                          f"{type(obj).__name__}")


def _check_keys(section, allowed, path):
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) under {path}: "
                          f"{', '.join(unknown)}")


def _check_finite(section, path):
    for key, val in section.items():
        if isinstance(val, bool):
            continue
        if isinstance(val, numbers.Real) and not math.isfinite(val):
            raise ConfigError(f"{path}.{key} must be finite, got {val}")
        if isinstance(val, dict):
            _check_finite(val, f"{path}.{key}")
        if isinstance(val, (list, tuple)):
            for i, item in enumerate(val):
                if (isinstance(item, numbers.Real)
                        and not isinstance(item, bool)
                        and not math.isfinite(item)):
                    raise ConfigError(
                        f"{path}.{key}[{i}] must be finite, got {item}")


def _merged(defaults, given, path):
    out = dict(defaults)
    for key, val in given.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merged(out[key], val, f"{path}.{key}")
        else:
            out[key] = val
    return out


def validate(raw):
    """Validate a parsed config mapping and merge it over the defaults."""
    _check_mapping(raw, "config")
    _check_keys(raw, TOP_KEYS, "config")
    sections = {"map": MAP_KEYS, "potential": POTENTIAL_KEYS,
                "orders": ORDERS_KEYS, "sampling": SAMPLING_KEYS,
                "basic_set": BASIC_SET_KEYS}
    sections.update({cmd: keys for cmd, keys in COMMAND_KEYS.items()})
    for name, allowed in sections.items():
        if name in raw:
            _check_mapping(raw[name], name)
            _check_keys(raw[name], allowed, name)
    _check_finite(raw, "config")

    cfg = {name: _merged(DEFAULTS.get(name, {}), raw.get(name, {}), name)
           for name in TOP_KEYS}

    fam = cfg["map"]["family"]
    if fam not in FAMILIES:
        raise ConfigError(f"map.family must be one of {sorted(FAMILIES)},"
                          f" got {fam!r}")
    if int(cfg["map"]["base_degree"]) < 2:
        raise ConfigError("map.base_degree must be >= 2")
    variant = cfg["potential"]["variant"]
    if variant not in VARIANTS:
        raise ConfigError(f"potential.variant must be one of "
                          f"{sorted(VARIANTS)}, got {variant!r}")
    if not isinstance(cfg["potential"]["parameters"], dict):
        raise ConfigError("potential.parameters must be a mapping")
    if cfg["orders"]["grid_size"] < 256:
        raise ConfigError("orders.grid_size must be >= 256")
    if cfg["sampling"]["eps_ball"] <= 0:
        raise ConfigError("sampling.eps_ball must be positive")
    seed = cfg["sampling"]["seed"]
    if seed is not None and (not isinstance(seed, numbers.Integral)
                             or isinstance(seed, bool) or seed < 0):
        raise ConfigError("sampling.seed must be a nonnegative integer")
    return cfg


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")
    if raw is None:
        raw = {}
    return validate(raw)


def default_config():
    return validate({})


def make_map(cfg):
    sec = cfg["map"]
    if sec["family"] == "product":
        return maps.MapFamily.product(sec["c"], int(sec["base_degree"]))
    if int(sec["base_degree"]) != 2:
        raise ConfigError("perturbed maps support base_degree 2 only")
    return maps.MapFamily.perturbed(sec["c"], a=sec["a"], b=sec["b"],
                                    d=sec["dd"], e=sec["e"],
                                    eps=sec["eps"])


def _potential_entry(sec, path="potential"):
    variant = sec["variant"]
    params = dict(sec.get("parameters") or {})
    if variant == "sum":
        terms = params.pop("terms", None)
        if params:
            raise ConfigError(f"{path}.parameters for variant 'sum' "
                              f"accepts only 'terms'")
        if not isinstance(terms, (list, tuple)) or not terms:
            raise ConfigError(f"{path}.parameters.terms must be a "
                              f"nonempty list")
        out = []
        for i, term in enumerate(terms):
            _check_mapping(term, f"{path}.terms[{i}]")
            _check_keys(term, POTENTIAL_KEYS, f"{path}.terms[{i}]")
            if term.get("variant") not in VARIANTS - {"sum"}:
                raise ConfigError(f"{path}.terms[{i}].variant invalid")
            out.append(_potential_entry(
                {"variant": term["variant"],
                 "parameters": term.get("parameters", {})},
                f"{path}.terms[{i}]"))
        return out
    allowed = {"zero": set(), "constant": {"kappa"}, "stable_log": {"t"},
               "unstable_log": {"s"}, "angle_harmonic": {"alpha"}}
    _check_keys(params, allowed[variant], f"{path}.parameters")
    return {"type": variant, **params}


def make_potential(cfg):
    try:
        return thermo.potential_from_config(_potential_entry(
            cfg["potential"]))
    except ValueError as exc:
        raise ConfigError(str(exc))


def make_basic_set(cfg, fmap=None):
    fmap = fmap if fmap is not None else make_map(cfg)
    sec = cfg["basic_set"]
    if int(sec["depth"]) < 1:
        raise ConfigError("basic_set.depth must be >= 1")
    if sec["tol"] <= 0:
        raise ConfigError("basic_set.tol must be positive")
    return BasicSetModel(fmap, depth=int(sec["depth"]),
                         tol=float(sec["tol"]))
