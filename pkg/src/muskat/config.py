"""Run configuration: a sectioned ``key = value`` file in TOML syntax.

Example::

    [domain]
    d = 1
    nx = 32
    b = 1.0

    [solver]
    gamma = 1.0

    [forcing]
    phi0 = [{mode = [1], amplitude = 0.01}]

Every key has a default except ``solver.gamma``; unknown sections and keys
are rejected by name.  Fourier data (``forcing.phi0``, ``evolution.f0``,
``dn.eta``, ``dn.f``, ``norms.field``) is either a list of cosine modes or a
path to a field JSON file, resolved relative to the config file.
"""

import math
import os
import re
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .io import load_state
from .spectral import DomainSpec, SurfaceField


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message, key=None, line=None, column=None):
        super().__init__(message)
        self.key = key
        self.line = line
        self.column = column


SCHEMA = {
    "domain": {"d": 1, "nx": 32, "nz": 65, "b": 1.0},
    "solver": {
        "gamma": None,
        "s": 2.0,
        "tol": 1e-10,
        "max_iter": 200,
        "dealias": True,
        "dn_tol": 1e-13,
        "dn_max_iter": 100,
        "threads": 0,
        "seed": 0,
    },
    "forcing": {"phi0": []},
    "evolution": {
        "dt": None,
        "t_final": 20.0,
        "integrator": "etdrk2",
        "f0": [],
        "nonlinear": True,
    },
    "output": {"directory": "out", "formats": ["json", "csv"]},
    "dn": {"eta": [], "f": [{"mode": [1], "amplitude": 1.0}], "nz_fd": 129},
    "norms": {"field": [], "s": 0.0, "sharp": False},
    "linear": {"data": None, "compat_tol": 1e-6},
}

REQUIRED = {("solver", "gamma")}


@dataclass(frozen=True, eq=False)
class RunConfig:
    domain: DomainSpec
    solver: dict
    forcing: dict
    evolution: dict
    output: dict
    dn: dict
    norms: dict
    linear: dict
    base_dir: str = "."
    raw: dict = field(default_factory=dict)

    @property
    def phi0(self):
        return self.forcing["phi0"]

    def wave_config(self):
        from .traveling import WaveConfig

        s = self.solver
        return WaveConfig(
            gamma=s["gamma"],
            phi0=self.phi0,
            s=s["s"],
            tol=s["tol"],
            max_iter=s["max_iter"],
            dn_tol=s["dn_tol"],
            dn_max_iter=s["dn_max_iter"],
            dealias=s["dealias"],
        )


_LOC = re.compile(r"line (\d+), column (\d+)")


def _type_ok(value, default):
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    return True


def modes_to_field(spec, entries, key):
    """``[{mode, amplitude}, ...]`` to a real field ``sum a cos(k . x)``."""
    if not isinstance(entries, list):
        raise ConfigError(f"{key}: expected a list of modes or a file path", key)
    modes = {}
    for i, entry in enumerate(entries):
        where = f"{key}[{i}]"
        if not isinstance(entry, dict) or set(entry) != {"mode", "amplitude"}:
            raise ConfigError(f"{where}: expected {{mode, amplitude}}", where)
        mode, amp = entry["mode"], entry["amplitude"]
        if (
            not isinstance(mode, list)
            or len(mode) != spec.d
            or not all(isinstance(k, int) and not isinstance(k, bool) for k in mode)
        ):
            raise ConfigError(f"{where}.mode: expected {spec.d} integers", f"{where}.mode")
        if any(abs(k) >= spec.nx // 2 for k in mode):
            raise ConfigError(f"{where}.mode: {mode} outside the resolved lattice", f"{where}.mode")
        if not isinstance(amp, (int, float)) or isinstance(amp, bool) or not math.isfinite(amp):
            raise ConfigError(f"{where}.amplitude: expected a finite number", f"{where}.amplitude")
        modes[tuple(mode)] = modes.get(tuple(mode), 0.0) + float(amp)
    return SurfaceField.from_modes(spec, modes)


def _field_value(spec, value, key, base_dir):
    if isinstance(value, str):
        path = value if os.path.isabs(value) else os.path.join(base_dir, value)
        if not os.path.exists(path):
            raise ConfigError(f"{key}: file {value!r} does not exist", key)
        try:
            out = load_state(path, spec)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", key) from exc
        if not isinstance(out, SurfaceField):
            raise ConfigError(f"{key}: expected a surface field", key)
        return out
    return modes_to_field(spec, value, key)


def parse_config(text, base_dir="."):
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = _LOC.search(str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ConfigError(f"parse error: {exc}", line=line, column=col) from exc

    sections = {}
    for name, body in raw.items():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]", name)
        if not isinstance(body, dict):
            raise ConfigError(f"{name}: expected a section", name)
    for name, defaults in SCHEMA.items():
        body = raw.get(name, {})
        merged = {}
        for key, value in body.items():
            if key not in defaults:
                raise ConfigError(f"unknown key {name}.{key}", f"{name}.{key}")
            if defaults[key] is not None and not _type_ok(value, defaults[key]):
                raise ConfigError(f"{name}.{key}: wrong type {type(value).__name__}", f"{name}.{key}")
            merged[key] = value
        for key, default in defaults.items():
            if key not in merged:
                if (name, key) in REQUIRED:
                    raise ConfigError(f"missing required key {name}.{key}", f"{name}.{key}")
                merged[key] = default
        sections[name] = merged

    dom = sections["domain"]
    try:
        spec = DomainSpec(d=dom["d"], b=float(dom["b"]), nx=dom["nx"], nz=dom["nz"])
    except ValueError as exc:
        raise ConfigError(f"domain: {exc}", "domain") from exc

    solver = sections["solver"]
    gamma = solver["gamma"]
    if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
        raise ConfigError("solver.gamma: expected a number", "solver.gamma")
    solver["gamma"] = float(gamma)
    for key in ("s", "tol", "dn_tol"):
        solver[key] = float(solver[key])
    for key, positive in (("tol", True), ("dn_tol", True), ("max_iter", True), ("dn_max_iter", True)):
        if positive and not solver[key] > 0:
            raise ConfigError(f"solver.{key}: must be positive", f"solver.{key}")
    if solver["s"] < 0:
        raise ConfigError("solver.s: must be non-negative", "solver.s")
    if solver["threads"] < 0:
        raise ConfigError("solver.threads: must be >= 0 (0 = auto)", "solver.threads")

    forcing = sections["forcing"]
    forcing["phi0"] = _field_value(spec, forcing["phi0"], "forcing.phi0", base_dir)

    evo = sections["evolution"]
    if evo["dt"] is None:
        evo["dt"] = 0.05 / max(1.0, abs(solver["gamma"]))
    elif not isinstance(evo["dt"], (int, float)) or isinstance(evo["dt"], bool) or not evo["dt"] > 0:
        raise ConfigError("evolution.dt: must be a positive number", "evolution.dt")
    evo["dt"] = float(evo["dt"])
    evo["t_final"] = float(evo["t_final"])
    if evo["t_final"] < 0:
        raise ConfigError("evolution.t_final: must be non-negative", "evolution.t_final")
    if evo["integrator"] not in ("etdrk2", "duhamel_picard"):
        raise ConfigError(f"evolution.integrator: unknown value {evo['integrator']!r}", "evolution.integrator")
    evo["f0"] = _field_value(spec, evo["f0"], "evolution.f0", base_dir)

    dn = sections["dn"]
    dn["eta"] = _field_value(spec, dn["eta"], "dn.eta", base_dir)
    dn["f"] = _field_value(spec, dn["f"], "dn.f", base_dir)
    if dn["nz_fd"] < 5 or dn["nz_fd"] % 2 == 0:
        raise ConfigError("dn.nz_fd: must be odd and >= 5", "dn.nz_fd")

    norms = sections["norms"]
    norms["field"] = _field_value(spec, norms["field"], "norms.field", base_dir)
    norms["s"] = float(norms["s"])

    lin = sections["linear"]
    if lin["data"] is not None:
        if not isinstance(lin["data"], str):
            raise ConfigError("linear.data: expected a file path", "linear.data")
        path = lin["data"] if os.path.isabs(lin["data"]) else os.path.join(base_dir, lin["data"])
        if not os.path.exists(path):
            raise ConfigError(f"linear.data: file {lin['data']!r} does not exist", "linear.data")
        lin["data"] = path
    lin["compat_tol"] = float(lin["compat_tol"])

    out = sections["output"]
    if not isinstance(out["formats"], list) or not set(out["formats"]) <= {"json", "csv"}:
        raise ConfigError("output.formats: expected a subset of ['json', 'csv']", "output.formats")

    return RunConfig(
        domain=spec,
        solver=solver,
        forcing=forcing,
        evolution=evo,
        output=out,
        dn=dn,
        norms=norms,
        linear=lin,
        base_dir=base_dir,
        raw=raw,
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
