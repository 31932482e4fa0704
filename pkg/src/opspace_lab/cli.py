"""Command-line front end: ``opspace-lab <command> [options]``.

Exit codes: 0 success, 1 property violation, 2 usage or parse error.  Errors
are written to stderr as one JSON object.  Output goes to ``--out``, else to
``$OPSPACE_LAB_OUTDIR/<command>.<format>`` when that variable is set, else to
stdout.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .fermion import ResourceError, car_generators
from .maps import (DEFAULT_T_GRID, compression_ss, identity_map, modulus_ss, polynomial_map,
                   product_map_cc_check)
from .matcore import DomainError, random_unitary
from .rigidity import (collapse_experiment, hadamard, lower_bound_experiment,
                       restricted_invertibility, rows_to_csv, uncollapsed_experiment)
from .spaces import (Kind, MatElem, SpaceSpec, homogeneity_rotate, kappa, mn_norm,
                     pairing_lower_check, parse_kind, random_element)

SCHEMA = "opspace-lab v1"
OUTDIR_ENV = "OPSPACE_LAB_OUTDIR"
DEFAULT_TOLERANCES = {"tol": 1e-9, "property_tol": 1e-6}
FERMI_BAND = (0.4, 1.0)


class UsageError(Exception):
    pass


class PropertyViolation(Exception):
    def __init__(self, message: str, payload):
        super().__init__(message)
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument grammar --------------------------------------------------------

def parse_int_range(text: str) -> list[int]:
    """'1..8', '4', '1,3,5' or mixtures such as '1..3,8'."""
    out: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise UsageError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            elif part:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"cannot parse integer range {text!r}") from None
    if not out:
        raise UsageError("empty integer range")
    return out


def parse_floats(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None
    if not vals:
        raise UsageError("empty number list")
    return vals


def parse_map_coeffs(text: str) -> list[complex]:
    """square | cube | identity | linear:a | poly:c0,c1,... (ascending)."""
    named = {"square": [0, 0, 1], "cube": [0, 0, 0, 1], "identity": [0, 1]}
    if text in named:
        return named[text]
    head, _, rest = text.partition(":")
    try:
        if head == "linear":
            return [0, complex(rest)]
        if head == "poly":
            return [complex(p) for p in rest.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse map coefficients in {text!r}") from None
    raise UsageError(f"unknown map {text!r}; use square, cube, identity, linear:a or poly:c0,c1,...")


def _kinds(text: str) -> list[Kind]:
    try:
        return [parse_kind(p.strip()) for p in text.split(",") if p.strip()]
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _space(kind_text: str, dim: int, theta: float | None) -> SpaceSpec:
    kind = _kinds(kind_text)
    if len(kind) != 1:
        raise UsageError("expected a single space name")
    try:
        return SpaceSpec(kind[0], dim, theta if kind[0] is Kind.RC_INTERP else None)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def load_tolerances(path: str | None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read tolerance config {path}: {exc}") from None
        if not isinstance(data, dict) or any(k not in DEFAULT_TOLERANCES for k in data):
            raise UsageError(f"tolerance config keys must be among {sorted(DEFAULT_TOLERANCES)}")
        tol.update({k: float(v) for k, v in data.items()})
    return tol


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


# -- commands ----------------------------------------------------------------

def _reference(kind: Kind, theta, n: int):
    """Published reference value and, when applicable, discrepancy text."""
    root = math.sqrt(n)
    if kind is Kind.ROW or kind is Kind.MIN_L2:
        return 1.0, ""
    if kind is Kind.COLUMN or kind is Kind.MAX_L2:
        return root, ""
    if kind is Kind.OH:
        return n ** 0.25, ""
    if kind is Kind.RC_INTERP:
        return n ** (theta / 2), ""
    if kind is Kind.R_CAP_C:
        return 1.0, ("discrepancy: published formula n^(theta/2) for the (R cap C, R + C) scale "
                     "gives 1 at theta=0; definitional computation (l_inf embedding, max of row "
                     f"and column norms) gives sqrt(n)={root!r}")
    if kind is Kind.R_PLUS_C:
        return root, ("discrepancy: published formula n^(theta/2) for the (R cap C, R + C) scale "
                      f"gives sqrt(n)={root!r} at theta=1; definitional computation (l_1-sum "
                      "quotient, decomposition into row plus column parts) gives 1")
    return None, ""


def cmd_kappa_table(args, tol, pool):
    kinds = _kinds(args.space)
    thetas = parse_floats(args.theta) if args.theta else [0.5]
    ns = parse_int_range(args.n)
    jobs = []
    for kind in kinds:
        for th in (thetas if kind is Kind.RC_INTERP else [None]):
            for n in ns:
                jobs.append((kind, th, n))
    for kind, th, n in jobs:
        try:
            SpaceSpec(kind, max(n, 1), th)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        if n < 1:
            raise UsageError("n must be >= 1")

    def run(job):
        kind, th, n = job
        cert = kappa(SpaceSpec(kind, n, th), n, seed=args.seed, tol=tol["tol"])
        ref, note = _reference(kind, th, n)
        flag = bool(note)
        if ref is not None and not flag:
            slack = tol["property_tol"]
            flag = not (cert.lower - slack <= ref <= cert.upper + slack)
            if flag:
                note = f"computed interval excludes reference {ref!r}"
        if kind is Kind.FERMIONIC:
            ratio = cert.upper / math.sqrt(n)
            inside = FERMI_BAND[0] <= ratio <= FERMI_BAND[1] + tol["property_tol"]
            note = f"ratio kappa/sqrt(n)={ratio!r}; band [{FERMI_BAND[0]}, {FERMI_BAND[1]}] " \
                   f"{'inside' if inside else 'OUTSIDE'}"
            flag = not inside
        return {"space": kind.value, "theta": "" if th is None else th, "n": n,
                "lower": cert.lower, "upper": cert.upper, "method": "+".join(cert.method),
                "reference": "" if ref is None else ref, "discrepancy_flag": int(flag), "note": note}

    rows = list(pool.map(run, jobs))
    return rows, {}


def cmd_norm(args, tol, pool):
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    try:
        x = MatElem.from_json(text)
    except DomainError as exc:
        raise UsageError(f"malformed element file: {exc}") from None
    cert = mn_norm(x, seed=args.seed, tol=tol["tol"])
    return [{"space": x.space.label, "n": x.n, "lower": cert.lower, "upper": cert.upper,
             "method": "+".join(cert.method)}], {}


def cmd_collapse(args, tol, pool):
    f = polynomial_map(parse_map_coeffs(args.map), args.d)
    rep = collapse_experiment(f, complex(args.x0), complex(args.h), args.kmax, seed=args.seed)
    meta = {"map": rep.map_label, "verdict": rep.verdict, "slope_fit": rep.slope_fit,
            "growth": rep.growth}
    return rep.rows(), meta


def cmd_modulus(args, tol, pool):
    f = polynomial_map(parse_map_coeffs(args.map), args.d)
    grid = parse_floats(args.t) if args.t else list(DEFAULT_T_GRID)
    run = modulus_ss if args.direction == "omega" else compression_ss
    curve = run(f, grid, args.nmax, args.samples, args.seed)
    meta = {"map": f.label, "direction": curve.direction, "n_max": curve.n_max,
            "samples": curve.samples, "certified_slope": curve.certified_slope}
    rows = list(curve.rows())
    if curve.certified_slope is not None:
        bad = [r for r in rows if r["value"] > curve.certified_slope * r["t"] + tol["property_tol"]]
        if bad:
            raise PropertyViolation("sampled modulus exceeds the certified slope bound", (rows, meta))
    return rows, meta


def cmd_restinv(args, tol, pool):
    if args.matrix:
        try:
            raw = json.loads(Path(args.matrix).read_text())
            t = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row]
                          for row in raw], dtype=np.complex128)
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"cannot read matrix file: {exc}") from None
    else:
        if args.n < 1:
            raise UsageError("n must be >= 1")
        rng = np.random.default_rng(args.seed)
        t = rng.standard_normal((args.n, args.n)) + 1j * rng.standard_normal((args.n, args.n))
        t /= np.linalg.norm(t, axis=0)
    sel = restricted_invertibility(t, args.eps)
    row = {"sigma": " ".join(map(str, sel.sigma)), "size": len(sel.sigma),
           "target_size": sel.target_size, "sigma_min_bound": sel.sigma_min_bound,
           "T_norm": sel.T_norm, "barrier": sel.barrier, "tags": ";".join(sel.tags)}
    if not sel.verify(t):
        raise PropertyViolation("selection certificate failed re-verification", ([row], {}))
    return [row], {"eps": args.eps}


def cmd_witness(args, tol, pool):
    ns = parse_int_range(args.n)
    dim = 2 * max(ns)
    X = _space(args.source, dim, args.theta_source)
    Y = _space(args.target, dim, args.theta_target)
    f = identity_map(X, Y)
    if args.experiment == "lower":
        reports = list(pool.map(
            lambda n: lower_bound_experiment(f, [n], M=args.M, L=args.L, alpha=args.alpha,
                                             seed=args.seed, tol=tol["tol"])[0], ns))
        rows = [r.row() for r in reports]
        meta = {"map": f.label, "alpha": args.alpha}
        if any(r.flagged for r in reports):
            meta["flagged"] = True
        return rows, meta
    rows = list(pool.map(lambda n: uncollapsed_experiment(f, args.t, args.eps, [n],
                                                          seed=args.seed)[0].row(), ns))
    return rows, {"map": f.label, "t": args.t, "eps": args.eps}


def _suite(seed: int, quick: bool, ptol: float):
    """(name, passed, detail) triples for the invariant suites."""
    rng = np.random.default_rng(seed)
    nmax = 8 if quick else 16
    out = []
    kinds = [k for k in Kind if k is not Kind.FERMIONIC]
    worst = 0.0
    for kind in kinds:
        for n in range(1, nmax + 1):
            c = kappa(SpaceSpec(kind, n, 0.3 if kind is Kind.RC_INTERP else None), n, seed=seed)
            worst = max(worst, 1 - c.lower, c.upper - math.sqrt(n))
    out.append(("kappa-in-[1,sqrt n]", worst <= ptol, f"worst excess {worst:.3g}"))
    ok = all(pairing_lower_check(SpaceSpec(k, n, 0.3 if k is Kind.RC_INTERP else None), n,
                                 tol=ptol, seed=seed)
             for k in kinds for n in range(1, nmax + 1))
    out.append(("pairing-bound", ok, f"n <= {nmax}"))
    for n in range(1, 8):
        c = kappa(SpaceSpec(Kind.FERMIONIC, n), n)
        r = c.upper / math.sqrt(n)
        out.append((f"fermionic-band-n{n}", FERMI_BAND[0] <= r <= FERMI_BAND[1] + ptol, f"ratio {r:.12g}"))
    viol = car_generators(10 if not quick else 6).check()
    out.append(("car-relations", viol <= 1e-12, f"max violation {viol:.3g}"))
    defect = max(hadamard(k).gram_defect() for k in range(1, 11 if not quick else 8))
    out.append(("hadamard-orthogonality", defect == 0, f"max defect {defect}"))
    for m in (2, 3):
        rep = product_map_cc_check(m, 2, 100 if quick else 250, seed)
        out.append((f"product-map-m{m}", rep["violations"] == 0, f"max ratio {rep['max_ratio']:.12g}"))
    for coeffs in ([0, 0, 1], [0, -1, 1], [0, 0, 0, 1]):
        f = polynomial_map(coeffs, 2)
        curve = modulus_ss(f, (0.1, 0.4, 1.0), 4, 200 if quick else 1000, seed)
        ok = bool(np.all(curve.values <= f.lipschitz_bound * curve.t_grid + ptol))
        out.append((f"poly-modulus-{f.label}", ok, f"max slope {max(curve.slopes()):.6g}"))
    rep = collapse_experiment(polynomial_map([0, 0, 1]), 0, 0.5, 6)
    ok = all(abs(lv.ratio - 0.5 * 2 ** (lv.k / 2)) <= 1e-9 for lv in rep.levels)
    out.append(("collapse-closed-form", ok and rep.verdict == "diverges", rep.verdict))
    ri_ok = True
    for _ in range(20):
        t = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        t /= np.linalg.norm(t, axis=0)
        sel = restricted_invertibility(t, 0.5)
        ri_ok &= sel.verify(t) and len(sel.sigma) >= sel.target_size
    out.append(("restricted-invertibility-certificate", bool(ri_ok), "20 instances n=8"))
    worst = 0.0
    for kind in (Kind.ROW, Kind.COLUMN, Kind.OH, Kind.R_CAP_C):
        sp = SpaceSpec(kind, 3)
        for _ in range(10):
            x = random_element(sp, 3, rng)
            u = random_unitary(3, rng)
            a, b = mn_norm(x), mn_norm(homogeneity_rotate(x, u))
            worst = max(worst, abs(a.upper - b.upper) / a.upper)
    out.append(("homogeneity", worst <= 1e-7, f"worst relative change {worst:.3g}"))
    return out


def cmd_propsuite(args, tol, pool):
    rows = [{"check": name, "passed": int(bool(ok)), "detail": detail}
            for name, ok, detail in _suite(args.seed, args.quick, tol["property_tol"])]
    failed = [r for r in rows if not r["passed"]]
    meta = {"checks": len(rows), "failed": len(failed)}
    if failed:
        raise PropertyViolation(f"{len(failed)} property check(s) failed", (rows, meta))
    return rows, meta


COMMANDS = {
    "kappa-table": cmd_kappa_table,
    "norm": cmd_norm,
    "collapse": cmd_collapse,
    "modulus": cmd_modulus,
    "restinv": cmd_restinv,
    "witness": cmd_witness,
    "propsuite": cmd_propsuite,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output file (default: stdout or $%s)" % OUTDIR_ENV)
    common.add_argument("--config", help="JSON tolerance profile")
    common.add_argument("--tol", type=float, help="certificate tolerance override")
    common.add_argument("--property-tol", type=float, help="property-check tolerance override")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=4)

    p = _Parser(prog="opspace-lab", description="Matrix-level norms and rigidity experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("kappa-table", parents=[common], help="kappa_n sweep with reference values")
    s.add_argument("--space", required=True, help="comma list, e.g. row,column,rc-interp")
    s.add_argument("--theta", help="comma list of theta values for rc-interp")
    s.add_argument("--n", default="1..8")

    s = sub.add_parser("norm", parents=[common], help="certified norm of a MatElem JSON file")
    s.add_argument("--file", required=True)

    s = sub.add_parser("collapse", parents=[common], help="Hadamard collapse experiment")
    s.add_argument("--map", default="square")
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--x0", default="0")
    s.add_argument("--h", default="0.5")
    s.add_argument("--kmax", type=int, default=8)

    s = sub.add_parser("modulus", parents=[common], help="sampled small-scale modulus")
    s.add_argument("--map", default="square")
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--t", help="comma list of distances in (0, 2]")
    s.add_argument("--nmax", type=int, default=8)
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--direction", choices=("omega", "rho"), default="omega")

    s = sub.add_parser("restinv", parents=[common], help="restricted invertibility selection")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--matrix", help="JSON matrix (rows of numbers or [re, im] pairs)")

    s = sub.add_parser("witness", parents=[common], help="witness-pair experiments for identity maps")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--theta-from", dest="theta_source", type=float)
    s.add_argument("--theta-to", dest="theta_target", type=float)
    s.add_argument("--n", default="1..8")
    s.add_argument("--experiment", choices=("lower", "uncollapsed"), default="lower")
    s.add_argument("--M", type=float, default=1.0)
    s.add_argument("--L", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--t", type=float, default=0.5)
    s.add_argument("--eps", type=float, default=0.01)

    s = sub.add_parser("propsuite", parents=[common], help="run the invariant suites")
    s.add_argument("--quick", action="store_true")
    return p


def render(command: str, args, rows: list[dict], meta: dict, tolerances: dict) -> str:
    if args.format == "json":
        doc = {"schema": SCHEMA, "command": command, "seed": args.seed, "tolerances": tolerances,
               "meta": meta, "rows": rows}
        return json.dumps(doc, indent=2) + "\n"
    head = [f"# {SCHEMA}", f"# command: {command}", f"# seed: {args.seed}"]
    head += [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
    return "\n".join(head) + "\n" + rows_to_csv([{k: _fmt(v) for k, v in r.items()} for r in rows])


def _emit(text: str, command: str, args) -> None:
    target = args.out
    if target is None and os.environ.get(OUTDIR_ENV):
        d = Path(os.environ[OUTDIR_ENV])
        d.mkdir(parents=True, exist_ok=True)
        target = str(d / f"{command}.{args.format}")
    if target is None:
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def _error(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        tolerances = load_tolerances(args.config)
        if args.tol is not None:
            tolerances["tol"] = args.tol
        if args.property_tol is not None:
            tolerances["property_tol"] = args.property_tol
        if args.workers < 1:
            raise UsageError("--workers must be >= 1")
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            try:
                rows, meta = COMMANDS[args.command](args, tolerances, pool)
            except PropertyViolation as exc:
                rows, meta = exc.payload
                _emit(render(args.command, args, rows, meta, tolerances), args.command, args)
                return _error("PropertyViolation", str(exc), 1)
        _emit(render(args.command, args, rows, meta, tolerances), args.command, args)
        return 0
    except UsageError as exc:
        return _error("UsageError", str(exc), 2)
    except (DomainError, ResourceError) as exc:
        return _error(type(exc).__name__, str(exc), 2)


if __name__ == "__main__":
    sys.exit(main())
