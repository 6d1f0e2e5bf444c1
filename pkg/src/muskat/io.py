"""JSON persistence for fields and solver results.

Fields are stored as

    {"version": 1, "d": ..., "nx": ..., "nz": ..., "b": ..., "kind": "surface" | "strip",
     "coeffs": [[re, im], ...], "z_nodes": [...]}

with coefficients in row-major order over the full FFT-ordered lattice
(``nz`` and ``z_nodes`` only for strip fields).  Python's float repr is
shortest-round-trip, so loading a saved field reproduces it bit for bit.
"""

import csv
import json

import numpy as np

from .errors import VersionMismatch
from .spectral import DomainSpec, StripField, SurfaceField

FORMAT_VERSION = 1


def field_to_dict(field):
    spec = field.spec
    strip = isinstance(field, StripField)
    out = {"version": FORMAT_VERSION, "d": spec.d, "nx": spec.nx}
    if strip:
        out["nz"] = spec.nz
    out["b"] = float(spec.b)
    out["kind"] = "strip" if strip else "surface"
    flat = np.asarray(field.coeffs, dtype=complex).ravel()
    out["coeffs"] = [[float(c.real), float(c.imag)] for c in flat]
    if strip:
        out["z_nodes"] = [float(z) for z in spec.z_nodes]
    return out


def _require(obj, key, kind=None):
    if key not in obj:
        raise ValueError(f"malformed field: missing key {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ValueError(f"malformed field: key {key!r} has the wrong type")
    return val


def check_version(obj):
    if not isinstance(obj, dict):
        raise ValueError("malformed document: expected a JSON object")
    version = obj.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported format version {version!r} (expected {FORMAT_VERSION})")


def field_from_dict(obj, spec=None):
    """Rebuild a field; ``spec`` (optional) must match the stored domain."""
    check_version(obj)
    kind = _require(obj, "kind", str)
    if kind not in ("surface", "strip"):
        raise ValueError(f"malformed field: unknown kind {kind!r}")
    d = _require(obj, "d", int)
    nx = _require(obj, "nx", int)
    b = float(_require(obj, "b", (int, float)))
    nz = _require(obj, "nz", int) if kind == "strip" else (spec.nz if spec else 65)
    stored = DomainSpec(d=d, b=b, nx=nx, nz=nz)
    if spec is not None:
        if (spec.d, spec.nx, spec.b) != (d, nx, b) or (kind == "strip" and spec.nz != nz):
            raise ValueError(f"stored field domain {stored} does not match {spec}")
        stored = spec
    raw = np.asarray(_require(obj, "coeffs", list), dtype=float)
    shape = stored.strip_shape if kind == "strip" else stored.grid_shape
    if raw.shape != (int(np.prod(shape)), 2):
        raise ValueError(f"malformed field: expected {int(np.prod(shape))} [re, im] pairs")
    coeffs = (raw[:, 0] + 1j * raw[:, 1]).reshape(shape)
    if kind == "surface":
        return SurfaceField(stored, coeffs)
    z = np.asarray(_require(obj, "z_nodes", list), dtype=float)
    if z.shape != (nz,) or not np.array_equal(z, stored.z_nodes):
        raise ValueError("malformed field: z_nodes do not match the domain")
    return StripField(stored, coeffs)


def dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed JSON in {path}: {exc}") from exc


def save_state(path, field):
    dump_json(field_to_dict(field), path)


def load_state(path, spec=None):
    return field_from_dict(load_json(path), spec)


# ------------------------------------------------------------ composite results


def linear_data_to_dict(data, gamma=None):
    out = {
        "version": FORMAT_VERSION,
        "kind": "linear_data",
        "F": [field_to_dict(v) for v in data.F],
        "G": field_to_dict(data.G),
        "H": field_to_dict(data.H),
        "K": field_to_dict(data.K),
    }
    if gamma is not None:
        out["gamma"] = float(gamma)
    return out


def linear_data_from_dict(obj):
    from .linear import LinearData

    check_version(obj)
    if obj.get("kind") != "linear_data":
        raise ValueError("malformed document: expected kind 'linear_data'")
    G = field_from_dict(_require(obj, "G", dict))
    F = tuple(field_from_dict(v, G.spec) for v in _require(obj, "F", list))
    if len(F) != G.spec.d + 1:
        raise ValueError(f"F must have {G.spec.d + 1} components")
    H = field_from_dict(_require(obj, "H", dict), G.spec)
    K = field_from_dict(_require(obj, "K", dict), G.spec)
    if isinstance(H, StripField) or isinstance(K, StripField):
        raise ValueError("H and K must be surface fields")
    return LinearData(F, G, H, K), obj.get("gamma")


def linear_solution_to_dict(sol):
    return {
        "version": FORMAT_VERSION,
        "kind": "linear_solution",
        "u": [field_to_dict(v) for v in sol.u],
        "p": field_to_dict(sol.p),
        "eta": field_to_dict(sol.eta),
        "residuals": {k: float(v) for k, v in sol.residuals.items()},
    }


def wave_solution_to_dict(sol, cfg):
    return {
        "version": FORMAT_VERSION,
        "kind": "traveling_wave",
        "gamma": float(cfg.gamma),
        "s": float(cfg.s),
        "iterations": sol.iterations,
        "contraction_estimate": float(sol.contraction_estimate),
        "steady_residual": float(sol.steady_residual),
        "fixed_point_residual": float(sol.fixed_point_residual),
        "history": [[float(a), float(b)] for a, b in sol.history],
        "eta_star": field_to_dict(sol.eta_star),
    }


def decay_report_to_dict(rep):
    return {
        "version": FORMAT_VERSION,
        "kind": "decay_report",
        "fitted_rate": float(rep.fitted_rate),
        "c0_reference": float(rep.c0_reference),
        "monotone": bool(rep.monotone),
        "n_steps": len(rep.times) - 1,
        "t_final": float(rep.times[-1]),
        "final_hs_norm": float(rep.hs_norms[-1]),
        "hs_half_sq_integral": float(rep.hs_half_l2_accum[-1]),
        "f_final": field_to_dict(rep.f_final),
    }


def fmt(x):
    """17 significant digits, the CSV float convention."""
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
