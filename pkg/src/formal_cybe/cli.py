"""formal-cybe: batch driver over JSON manifests.

Exit codes: 0 verified, 1 residual nonzero, 2 input error,
3 mathematical obstruction or unsupported case.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import cybe, io, lagrangian
from . import normalize as nz
from ._sparse import fmt
from .cybe import GSeries
from .doubles import manin_pair_report, normalize_trace_extension
from .errors import (
    FormalCYBEError,
    MathematicalObstruction,
    NotSkew,
    WrongMultiplicity,
    ZeroSeries,
)
from .series import base_rmatrix, residual_report, skew_residual

log = logging.getLogger("formal_cybe.cli")

VERIFIED, NONZERO, INPUT_ERROR, OBSTRUCTION = 0, 1, 2, 3
STATUS = {0: "verified", 1: "residual_nonzero", 2: "input_error", 3: "obstruction"}


class Outcome(Exception):
    """Carries a report and exit code out of a command early."""

    def __init__(self, code, report):
        super().__init__(report.get("reason", ""))
        self.code = code
        self.report = report


def _check_window(m, override):
    if override is None and "window" not in m:
        lit = io.literal_windows(m)
        if lit is not None:
            return io.window(m, lit)
    return io.window(m, override)


# ---------------------------------------------------------------------------
# commands; each returns (exit code, report)


def cmd_check(m, window=None):
    L = io.algebra(m)
    r = io.rmatrix(m, L)
    W = _check_window(m, window)
    log.info("check: %s, window %d", L.name, W)
    report = {"algebra": L.name, "requested_window": W}
    skew = residual_report(skew_residual(r))
    report["skew"] = skew
    cyb = residual_report(cybe.cyb_residual(r, W))
    report["cyb"] = cyb
    failing = [name for name, rep in (("skew", skew), ("cyb", cyb)) if not rep["zero_on_window"]]
    if skew["zero_on_window"]:
        report["cojacobi"] = _cojacobi_sweep(r, min(W, 2))
        if not report["cojacobi"]["zero_on_window"]:
            failing.append("cojacobi")
    else:
        report["cojacobi"] = {"skipped": "cobracket of a non-skew r is not defined"}
    report["failing_checks"] = failing
    if failing:
        first = report[failing[0]]
        report["first_nonzero_monomial"] = first["first_nonzero_monomial"]
        return NONZERO, report
    report["first_nonzero_monomial"] = None
    return VERIFIED, report


def _cojacobi_sweep(r, degree):
    """Co-Jacobi residual of dr on every basis monomial I_a x^k with k <= degree."""
    L = r.L
    delta = cybe.Cobracket(r)
    first, windows = None, set()
    for k in range(degree + 1):
        for a in range(L.dim):
            rep = residual_report(cybe.cojacobi_residual(delta, GSeries.monomial(L, a, k), window=degree))
            windows.add(tuple(sorted(rep["guaranteed_window"].items())))
            if first is None and not rep["zero_on_window"]:
                first = [L.labels[a], k, rep["first_nonzero_monomial"]]
    return {
        "zero_on_window": first is None,
        "monomials_checked": (degree + 1) * L.dim,
        "max_degree": degree,
        "first_failure": first,
        "guaranteed_windows": [dict(w) for w in sorted(windows)],
    }


def cmd_normalize(m, window=None):
    L = io.algebra(m)
    r = io.rmatrix(m, L)
    W = io.window(m, window, default=8)
    s = r.s
    mult = nz.multiplicity(s)
    report = {"multiplicity": mult, "window": W}
    if mult == 2:
        report["residue"] = fmt(nz.residue_obstruction(s))
    t = nz.solve_psi(s, window=W)
    cert = nz.ode_residual(s, t, mult)
    report["transform"] = t.to_json()
    report["certificate"] = {"zero": not cert.coeffs, "cap": cert.cap}
    rn = nz.substitute_coords(r, t, window=W)
    monomial = all(k == mult and v == 1 for k, v in rn.s.coeffs.items()) and mult in rn.s.coeffs
    report["normalized_s_is_monomial"] = monomial
    report["rmatrix"] = io.rmatrix_literal(rn)
    log.info("normalize: multiplicity %d, certificate zero %s", mult, not cert.coeffs)
    ok = not cert.coeffs and monomial
    return (VERIFIED if ok else NONZERO), report


def cmd_build_w(m, window=None):
    L = io.algebra(m)
    r = io.rmatrix(m, L)
    K = window if window is not None else m.get("K", 5)
    K = io.window({"window": K})
    Wb = lagrangian.build_W(r, K)
    report = {"m": Wb.m, "K": K, "basis": Wb.to_json()}
    report["duality"] = lagrangian.check_duality(Wb)
    report["isotropy"] = lagrangian.check_isotropy(Wb)
    checks = [report["duality"]["passed"], report["isotropy"]["passed"]]
    base = m["rmatrix"].get("base")
    if base is not None:
        dec = io._decomposition(L, m["rmatrix"].get("decomposition"))
        same = lagrangian.span_equal(Wb, lagrangian.standard_W(int(base), L, K, dec))
        report["matches_standard"] = {"index": int(base), "span_equal": same}
        checks.append(same)
    log.info("build-w: m=%s K=%d checks %s", Wb.m, K, checks)
    return (VERIFIED if all(checks) else NONZERO), report


def cmd_twist_check(m, window=None):
    L = io.algebra(m)
    base, s, dec = io.twist(m, L)
    W = io.window(m, window, default=4)
    try:
        cybe.check_skew(s)
    except NotSkew as exc:
        raise Outcome(NONZERO, {"reason": str(exc), "skew": False}) from exc
    tw = residual_report(cybe.twist_residual(base, s, W, dec, L))
    shifted = (-base_rmatrix(L, base, dec)).add_tensor(s)
    cyb = residual_report(cybe.cyb_residual(shifted, W))
    report = {
        "base": base,
        "window": W,
        "skew": True,
        "twist_residual": tw,
        "cyb_of_shifted": cyb,
        "consistent": tw["zero_on_window"] == cyb["zero_on_window"],
    }
    log.info("twist-check: base %d, twist zero %s", base, tw["zero_on_window"])
    return (VERIFIED if tw["zero_on_window"] else NONZERO), report


def cmd_trace_ext(m, window=None):
    A = io.trace_extension(m)
    spec = m["trace_extension"]
    if A.infinite:
        W = io.window(m, window, default=6)
        rep = manin_pair_report(A, W)
        return (VERIFIED if rep["passed"] else NONZERO), {"manin": rep}
    K = window if window is not None else spec.get("K", 6)
    K = io.window({"window": K})
    u, rep = normalize_trace_extension(A.n, A.alpha, K)
    report = {"normalization": rep, "manin": manin_pair_report(A, K)}
    ok = (rep["normalized"] or rep["delegated"]) and report["manin"]["passed"]
    log.info("trace-ext: n=%d K=%d normalized %s", A.n, K, rep["normalized"])
    return (VERIFIED if ok else NONZERO), report


def cmd_gauge(m, window=None):
    """Apply the manifest's transform (psi, xi) and then its gauge phi; emit a new manifest."""
    L = io.algebra(m)
    r = io.rmatrix(m, L)
    t, phi = io.transform(m), io.gauge(m, L)
    if t is None and phi is None:
        raise io.ManifestError("gauge needs a 'transform' or a 'gauge' entry")
    report = {}
    if t is not None:
        r = nz.substitute_coords(r, t, window=io.window(m, window, default=8))
        report["transform"] = t.to_json()
    if phi is not None:
        report["automorphism"] = nz.check_automorphism(phi)
        r = nz.gauge_apply(r, phi)
    out = {"algebra": m["algebra"], "rmatrix": io.rmatrix_literal(r), "report": report}
    return VERIFIED, out


COMMANDS = {
    "check": cmd_check,
    "normalize": cmd_normalize,
    "build-w": cmd_build_w,
    "twist-check": cmd_twist_check,
    "trace-ext": cmd_trace_ext,
    "gauge": cmd_gauge,
}


def run(command, manifest, window=None):
    """Run one command on a manifest dict; returns (exit code, report)."""
    try:
        code, report = COMMANDS[command](manifest, window)
    except Outcome as out:
        code, report = out.code, out.report
    except (MathematicalObstruction, ZeroSeries, WrongMultiplicity) as exc:
        code, report = OBSTRUCTION, {"reason": str(exc), "error": type(exc).__name__}
    except NotSkew as exc:
        code, report = NONZERO, {"reason": str(exc), "error": type(exc).__name__}
    except (FormalCYBEError, KeyError, TypeError, ValueError, ZeroDivisionError, IndexError) as exc:
        code, report = INPUT_ERROR, {"reason": str(exc), "error": type(exc).__name__}
    report = dict(report)
    report["command"] = command
    report["status"] = STATUS[code]
    report["exit_code"] = code
    return code, report


def build_parser():
    p = argparse.ArgumentParser(prog="formal-cybe", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--manifest", required=True, help="path to a JSON manifest")
    p.add_argument("--window", type=int, help="override the manifest window")
    p.add_argument("--json-out", help="also write the report here")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        manifest = io.load_manifest(args.manifest)
    except io.ManifestError as exc:
        code, report = INPUT_ERROR, {"reason": str(exc), "error": "ManifestError"}
        report.update(command=args.command, status=STATUS[code], exit_code=code)
    else:
        code, report = run(args.command, manifest, args.window)
    text = io.dumps(report)
    sys.stdout.write(text)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
