"""Scenario configuration files: flat INI sections with normalized units.

Example::

    [scenario]
    case = rect_pulse        ; plane_wave | rect_pulse | antenna | charge | sphere
    solver = beam_et
    n = 100
    cfl = 1.0
    omega = detector         ; a number, or 'detector' where supported

    [output]
    dir = out
    snapshots = true

Every key has the bundled case's default; CLI flags override file values.
"""

from __future__ import annotations

import configparser

from .. import cases
from ..scenario import Scenario, ScenarioError


class ConfigError(ValueError):
    """Unreadable or inconsistent configuration."""


def load_config(path) -> dict:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    out: dict = {}
    for section in cp.sections():
        out[section] = dict(cp.items(section))
    if "scenario" not in out:
        raise ConfigError(f"{path}: missing [scenario] section")
    return out


def _pop_float(d: dict, key: str):
    if key in d:
        try:
            return float(d.pop(key))
        except ValueError as exc:
            raise ConfigError(f"scenario.{key}: {exc}") from exc
    return None


def scenario_from_config(cfg: dict, overrides: dict | None = None) -> Scenario:
    """Build the scenario named by cfg['scenario'], applying overrides."""
    sc = dict(cfg.get("scenario", {}))
    if overrides:
        sc.update({k: v for k, v in overrides.items() if v is not None})
    case = sc.pop("case", None)
    if case not in cases.REGISTRY:
        raise ConfigError(f"scenario.case must be one of "
                          f"{sorted(cases.REGISTRY)}, got {case!r}")

    kwargs: dict = {}
    if "solver" in sc:
        kwargs["solver"] = sc.pop("solver")
    n = sc.pop("n", None)
    lam = _pop_float(sc, "lambda")
    cfl = _pop_float(sc, "cfl")
    t_end = _pop_float(sc, "t_end")
    chi = _pop_float(sc, "chi")
    gamma = _pop_float(sc, "gamma")
    omega = sc.pop("omega", None)

    try:
        if case == "plane_wave":
            kwargs["dim"] = int(sc.pop("dim", 1))
            kwargs["n"] = int(n) if n else 40
            if omega is not None:
                kwargs["omega"] = float(omega)
            if lam is not None:
                kwargs["lam"] = lam
            if cfl is not None:
                kwargs["cfl"] = cfl
        elif case == "rect_pulse":
            kwargs["n"] = int(n) if n else 100
            if cfl is not None:
                kwargs["cfl"] = cfl
            if omega is not None:
                kwargs["omega_mode"] = omega
            smax = _pop_float(sc, "s_max")
            if smax is not None:
                kwargs["s_max"] = smax
            if lam is not None:
                kwargs["lam"] = lam
        elif case == "antenna":
            kwargs["n"] = int(n) if n else 80
            sig = _pop_float(sc, "sigma")
            if sig is not None:
                kwargs["sigma"] = sig
            if t_end is not None:
                kwargs["t_end"] = t_end
                t_end = None
            if lam is not None:
                kwargs["lam"] = lam
            if cfl is not None:
                kwargs["cfl"] = cfl
        elif case == "charge":
            kwargs["n"] = int(n) if n else 200
            if chi is not None:
                kwargs["chi"] = chi
                chi = None
            if gamma is not None:
                kwargs["gamma"] = gamma
                gamma = None
            if omega is not None:
                kwargs["omega"] = float(omega)
            if lam is not None:
                kwargs["lam"] = lam
            if t_end is not None:
                kwargs["t_end"] = t_end
                t_end = None
        elif case == "sphere":
            mesh = sc.pop("mesh", None)
            if not mesh:
                raise ConfigError("sphere case needs scenario.mesh = <path>")
            kwargs["mesh_path"] = mesh
            if cfl is not None:
                kwargs["cfl"] = cfl
            if lam is not None:
                kwargs["lam"] = lam
            if t_end is not None:
                kwargs["t_end"] = t_end
                t_end = None
            if "reconstruction" in sc:
                kwargs["reconstruction"] = sc.pop("reconstruction")
        scn = cases.REGISTRY[case](**kwargs)
    except (TypeError, ValueError, ScenarioError) as exc:
        raise ConfigError(f"invalid scenario configuration: {exc}") from exc

    # global parameter overrides applied after construction
    import dataclasses
    changes: dict = {}
    if t_end is not None:
        changes["t_end"] = t_end
    if chi is not None or gamma is not None:
        p = scn.params
        changes["params"] = dataclasses.replace(
            p, chi=chi if chi is not None else p.chi,
            gamma=gamma if gamma is not None else p.gamma)
    if "strict_cfl" in sc:
        changes["strict_cfl"] = sc.pop("strict_cfl").lower() in ("1", "true", "yes")
    sc.pop("dim", None)
    if sc:
        raise ConfigError(f"unknown scenario keys: {sorted(sc)}")
    if changes:
        try:
            scn = dataclasses.replace(scn, **changes)
        except ScenarioError as exc:
            raise ConfigError(str(exc)) from exc
    return scn
