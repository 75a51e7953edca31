"""Manifest parsing and canonical JSON output."""
from __future__ import annotations

import json

from . import lie_core as lc
from ._sparse import addto, fmt, frac
from .doubles import trace_extension_from_spec
from .errors import FormalCYBEError
from .normalize import CoordTransform, gauge_from_spec
from .series import (
    ScalarSeries,
    Tensor2Series,
    base_rmatrix,
    standard_rmatrix_from_terms,
)


class ManifestError(FormalCYBEError):
    """Malformed manifest: missing keys, bad literals, wrong shapes."""


def load_manifest(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")
    return data


def dumps(obj):
    """Canonical, byte-stable JSON."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _require(m, key):
    if key not in m:
        raise ManifestError(f"manifest needs a {key!r} entry")
    return m[key]


def algebra(m):
    return lc.load_lie_algebra(_require(m, "algebra"))


def window(m, override=None, default=6):
    w = override if override is not None else m.get("window", default)
    if not isinstance(w, int) or isinstance(w, bool) or w <= 0:
        raise ManifestError(f"window must be a positive integer, got {w!r}")
    return w


def _decomposition(L, spec):
    if spec is None:
        return None
    return tuple(tuple(L.index(a) for a in part) for part in spec)


def rmatrix(m, L):
    """{"base": i} or {"s": [...], "g": [...], "windows": {...}, "truncated": bool}."""
    spec = _require(m, "rmatrix")
    if "base" in spec:
        return base_rmatrix(L, int(spec["base"]), _decomposition(L, spec.get("decomposition")))
    wins = spec.get("windows", {})
    for key in ("Nx", "Ny"):
        v = wins.get(key)
        if v is not None and (not isinstance(v, int) or v < 0):
            raise ManifestError(f"windows.{key} must be a nonnegative integer")
    truncated = bool(spec.get("truncated", False))
    r = standard_rmatrix_from_terms(
        L, spec.get("s", []), spec.get("g", []), wins.get("Nx"), wins.get("Ny"), truncated=truncated
    )
    if truncated and wins.get("total") is not None:
        r = r.with_g(r.g.restrict(total=int(wins["total"])))
    return r


def literal_windows(m):
    spec = m.get("rmatrix", {})
    wins = spec.get("windows", {})
    vals = [v for v in (wins.get("Nx"), wins.get("Ny")) if v is not None]
    return min(vals) if vals else None


def tensor_series(L, terms):
    """Exact g⊗g polynomial from [[i, j, a, b, "p/q"], ...]."""
    g = {}
    for term in terms:
        if len(term) != 5:
            raise ManifestError(f"tensor term needs 5 entries, got {term!r}")
        i, j, a, b, v = term
        addto(g.setdefault((int(i), int(j)), {}), (L.index(a), L.index(b)), frac(v))
    return Tensor2Series(g)


def twist(m, L):
    spec = _require(m, "twist")
    base = int(_require(spec, "base"))
    return base, tensor_series(L, spec.get("s", [])), _decomposition(L, spec.get("decomposition"))


def trace_extension(m):
    return trace_extension_from_spec(_require(m, "trace_extension"))


def transform(m):
    spec = m.get("transform")
    if spec is None:
        return None
    psi = ScalarSeries({int(k): frac(v) for k, v in spec["psi"]}, spec.get("cap"))
    return CoordTransform(psi, frac(spec.get("xi", "1/1")))


def gauge(m, L):
    spec = m.get("gauge")
    return None if spec is None else gauge_from_spec(L, spec)


# ---------------------------------------------------------------------------
# serialization


def rmatrix_literal(r):
    """Manifest form of a StandardRMatrix; truncated when any window is finite."""
    labels = r.L.labels
    s = [[k, fmt(v)] for k, v in sorted(r.s.coeffs.items())]
    g = []
    for (i, j), t in sorted(r.g.coeffs.items()):
        for (a, b), v in sorted(t.items()):
            g.append([i, j, labels[a], labels[b], fmt(v)])
    out = {"s": s, "g": g}
    if not r.exact or r.g.total is not None:
        out["truncated"] = True
        out["windows"] = {"Nx": r.Nx, "Ny": r.Ny}
        if r.g.total is not None:
            out["windows"]["total"] = r.g.total
    return out


def vec_json(L, v):
    return [[L.labels[a], fmt(c)] for a, c in sorted(v.items())]

