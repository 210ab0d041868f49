"""Command-line front end.

Subcommands: ``eval`` (exponent values, optionally mapped), ``transform``
(closed-form triplet transform), ``verify`` (identity checks by name),
``simulate`` (exact samplers + CSV dumps), ``area-demo`` (stochastic-area
factorization), ``suite`` (batch of identity checks from a config).

Exit codes: 0 success / all checks pass; 1 a check failed or quadrature
did not converge; 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import factor, maps, report, simulate
from .errors import (
    DimensionMismatchError,
    InvalidMeasureError,
    LawSpecError,
    NotLogIntegrableError,
    QuadratureError,
)
from .lawio import BUILTIN_LAWS, LoadedLaw, builtin_law, law_from_dict, load_law
from .spectral import SpectralMeasure, ray

IDENTITIES = ("eq3", "eq15", "cor1a", "cor5", "prop2", "eq2-timechange", "area")

_USAGE_ERRORS = (
    LawSpecError,
    InvalidMeasureError,
    DimensionMismatchError,
    NotLogIntegrableError,
)


def _parse_points(text: str, dim: int) -> np.ndarray:
    """'1,2,3' lists scalar points; 'a,b;c,d' separates vectors with ';'."""
    text = text.strip()
    if not text:
        raise LawSpecError("empty --y value")
    try:
        if dim == 1 and ";" not in text:
            vals = [float(v) for v in text.split(",")]
            return np.asarray(vals, dtype=float)[:, None]
        pts = [[float(v) for v in chunk.split(",")] for chunk in text.split(";")]
    except ValueError as exc:
        raise LawSpecError(f"cannot parse --y {text!r}: {exc}") from None
    arr = np.asarray(pts, dtype=float)
    if arr.shape[1] != dim:
        raise LawSpecError(f"--y points have {arr.shape[1]} components, law has dim {dim}")
    return arr


def _make_map(kind: str | None, beta: float | None) -> maps.IntegralMap:
    if kind is None:
        raise LawSpecError("this command needs --map")
    if kind == "i":
        return maps.i_map()
    if beta is None:
        raise LawSpecError(f"map {kind!r} needs --beta")
    return maps.IntegralMap(kind, beta)


def _emit(doc: dict, out: str | None, fmt: str) -> None:
    if out:
        report.write_report(doc, out, fmt)


def _fmt_complex(v: complex) -> str:
    return f"{v.real:.16g}{v.imag:+.16g}j"


# -- subcommand handlers ---------------------------------------------------------


def _cmd_eval(args) -> int:
    if not args.law:
        raise LawSpecError("eval needs --law")
    law = load_law(args.law)
    if args.y is not None:
        Y = _parse_points(args.y, law.dim)
    else:
        Y = factor.default_grid(law.dim)
    if args.map is not None:
        m = _make_map(args.map, args.beta)
        vals = maps.map_exponent_grid(m, law.exponent, Y, args.tol)
    else:
        vals = law.exponent.eval_grid(Y, args.tol)
    rows = []
    for k in range(Y.shape[0]):
        inp = float(Y[k, 0]) if law.dim == 1 else [float(v) for v in Y[k]]
        rows.append({"input": inp, "value": [vals[k].real, vals[k].imag]})
        print(_fmt_complex(vals[k]))
    doc = {
        "kind": "eval",
        "law": law.name,
        "map": args.map,
        "beta": args.beta if args.map is not None and args.map != "i" else None,
        "rows": rows,
    }
    _emit(doc, args.out, args.format)
    return 0


def _triplet_doc(trip) -> dict:
    rays = []
    for ray_ in trip.levy.rays:
        rad = ray_.radial
        entry = {
            "dir": [float(v) for v in ray_.direction],
            "atoms": [{"r": a.r, "m": a.m} for a in rad.atoms],
            "segments": [
                {
                    "lo": s.lo,
                    "hi": ("inf" if math.isinf(s.hi) else s.hi),
                    "c": s.c,
                    "p": s.p,
                }
                for s in rad.segments
            ],
        }
        if rad.grid_tail is not None:
            entry["grid_tail"] = {
                "radii": [float(v) for v in rad.grid_tail.radii],
                "tail": [float(v) for v in rad.grid_tail.tail],
            }
        else:
            entry["grid_tail"] = None
        rays.append(entry)
    return {
        "dim": trip.dim,
        "shift": [float(v) for v in trip.shift],
        "cov": [[float(v) for v in row] for row in trip.cov],
        "rays": rays,
    }


def _cmd_transform(args) -> int:
    if not args.law:
        raise LawSpecError("transform needs --law")
    law = load_law(args.law)
    if args.map != "jbeta":
        raise LawSpecError(
            "only the power-kernel map transforms triplets in closed form; "
            "use 'eval' for the other maps"
        )
    if law.triplet is None:
        raise LawSpecError("the law description does not determine a triplet")
    if args.beta is None:
        raise LawSpecError("transform needs --beta")
    out_trip = maps.jbeta_triplet(law.triplet, args.beta, n_grid=args.n_grid)
    doc = {
        "kind": "transform",
        "law": law.name,
        "map": "jbeta",
        "beta": args.beta,
        "triplet": _triplet_doc(out_trip),
    }
    if args.out:
        report.write_report(doc, args.out, "json")
    else:
        sys.stdout.write(report.canonical_json(doc))
    return 0


def _atomic_check_measures() -> list[tuple[str, SpectralMeasure]]:
    one = SpectralMeasure(1, (ray([1.0], atoms=[(1.0, 1.0)]),))
    two = SpectralMeasure(
        1, (ray([1.0], atoms=[(0.5, 0.7)]), ray([-1.0], atoms=[(2.0, 1.1)]))
    )
    return [("one-atom", one), ("two-atom", two)]


def _verify_identity(identity, law: LoadedLaw | None, args):
    """Run one named check; returns an object with .passed/.summary/.to_dict."""
    beta = args.beta if args.beta is not None else 1.0
    grid = None
    if getattr(args, "y", None):
        grid = _parse_points(args.y, law.dim if law else 1)
    if identity == "eq3":
        return factor.verify_factorization(law.exponent, beta, grid=grid, tol=args.tol)
    if identity == "eq15":
        return factor.identity_e_check(law.exponent, beta, grid=grid, tol=args.tol)
    if identity == "cor1a":
        return factor.ubeta_f_membership(law.exponent, beta, grid=grid, tol=args.tol)
    if identity == "prop2":
        return factor.clock_composition_check(law.exponent, beta, grid=grid, tol=args.tol)
    if identity == "cor5":
        if law is None or law.triplet is None or not law.triplet.levy.rays:
            raise LawSpecError(
                "identity cor5 needs a law with a nonempty jump measure "
                "(triplet form or compound Poisson)"
            )
        return factor.spectral_factor_check(law.triplet.levy, beta, tol=args.cor5_tol)
    if identity == "eq2-timechange":
        if law is None or law.sim is None:
            raise LawSpecError(
                "identity eq2-timechange needs a simulable law "
                "(drift + Gaussian + finite jump atoms)"
            )
        return simulate.time_change_equivalence(
            law.sim, beta, args.n, args.seed, z_max=args.z_max, workers=args.workers
        )
    if identity == "area":
        return factor.levy_area_demo(args.u, tol=args.tol)
    raise LawSpecError(f"unknown identity {identity!r}; known: {', '.join(IDENTITIES)}")


def _cmd_verify(args) -> int:
    if args.identity not in IDENTITIES:
        print(
            f"unknown identity {args.identity!r}; known: {', '.join(IDENTITIES)}",
            file=sys.stderr,
        )
        return 2
    law = None
    if args.identity != "area":
        if not args.law:
            raise LawSpecError(f"identity {args.identity!r} needs --law")
        law = load_law(args.law)
    rep = _verify_identity(args.identity, law, args)
    print(rep.summary())
    _emit(rep.to_dict(), args.out, args.format)
    return 0 if rep.passed else 1


def _cmd_simulate(args) -> int:
    law = load_law(args.law)
    if law.sim is None:
        raise LawSpecError(
            "the law is not simulable: need drift + Gaussian + finite jump atoms"
        )
    m = _make_map(args.map, args.beta)
    if m.kind == "jbeta":
        samples = simulate.sample_jbeta_integral(
            law.sim, m.beta, args.n, args.seed, workers=args.workers
        )
    elif m.kind == "ijbeta":
        samples = simulate.sample_time_changed_integral(
            law.sim, m.beta, args.n, args.seed, s_max=args.s_max, workers=args.workers
        )
    else:
        raise LawSpecError(f"no exact sampler for map {m.kind!r}; use jbeta or ijbeta")
    if args.out:
        simulate.samples_to_csv(samples, args.out)
        print(f"wrote {samples.shape[0]} samples to {args.out}")
    code = 0
    if args.y is not None or args.report:
        Y = (
            _parse_points(args.y, law.dim)
            if args.y is not None
            else factor.default_grid(law.dim, n_points=21)
        )
        ecf = simulate.empirical_cf(samples, Y, args.seed)
        target = np.exp(maps.map_exponent_grid(m, law.exponent, Y))
        z_re = simulate._z_scores(ecf.estimate.real - target.real, ecf.se_real)
        z_im = simulate._z_scores(ecf.estimate.imag - target.imag, ecf.se_imag)
        rep = simulate.MCReport(
            f"mc-{m.kind}",
            {"map": m.kind, "beta": m.beta, "n": args.n, "seed": args.seed},
            Y,
            ecf.estimate,
            target,
            z_re,
            z_im,
            args.n,
            args.seed,
            args.z_max,
        )
        print(rep.summary())
        if args.report:
            report.write_report(rep.to_dict(), args.report, "json")
        code = 0 if rep.passed else 1
    return code


def _cmd_area_demo(args) -> int:
    rep = factor.levy_area_demo(args.u, tol=args.tol)
    case = rep.case
    print(rep.summary())
    print(
        "cosh variant: exponent -> 1 at t=0, so its characteristic function "
        f"tends to e = {math.e:.9f} (deviation from 1: {math.e - 1.0:.9f})"
    )
    t0 = float(rep.t_grid[0])
    print(
        f"  at t={t0:g}: coth form {case.bdlp_exponent(t0):+.9f}, "
        f"cosh form {case.cosh_variant_exponent(t0):+.9f}"
    )
    _emit(rep.to_dict(), args.out, args.format)
    return 0 if rep.passed else 1


DEFAULT_SUITE_CONFIG = {
    "identities": list(IDENTITIES),
    "laws": ["gaussian", "drift", "cp", "gauss_cp_mix"],
    "betas": [0.5, 1.0, 2.0, 3.0],
    "tol": 1e-8,
    "cor5_tol": 1e-9,
    "mc": {"n": 20000, "seed": 1729, "z_max": 4.0, "betas": [1.0, 2.0]},
    "area_u": [1.0, 2.0],
}


def _suite_law(entry) -> LoadedLaw:
    if isinstance(entry, dict):
        return law_from_dict(entry)
    if isinstance(entry, str):
        if entry in BUILTIN_LAWS:
            return builtin_law(entry)
        return load_law(entry)
    raise LawSpecError(f"cannot interpret law entry {entry!r}")


def _cmd_suite(args) -> int:
    config = dict(DEFAULT_SUITE_CONFIG)
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                config.update(json.load(fh))
        except OSError as exc:
            raise LawSpecError(f"cannot read config {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise LawSpecError(f"config is not valid JSON: {exc}") from exc
    identities = config.get("identities", [])
    if not identities:
        print("suite config has an empty identity list", file=sys.stderr)
        return 2
    unknown = [i for i in identities if i not in IDENTITIES]
    if unknown:
        print(
            f"unknown identities in config: {unknown}; known: {', '.join(IDENTITIES)}",
            file=sys.stderr,
        )
        return 2
    tol = float(config.get("tol", 1e-8))
    cor5_tol = float(config.get("cor5_tol", 1e-9))
    betas = [float(b) for b in config.get("betas", [1.0])]
    mc = dict(DEFAULT_SUITE_CONFIG["mc"])
    mc.update(config.get("mc", {}))
    laws = [_suite_law(entry) for entry in config.get("laws", [])]

    checks = []

    def record(identity, label, rep):
        entry = {
            "identity": identity,
            "label": label,
            "passed": bool(rep.passed),
            "params": dict(getattr(rep, "params", {}) or {}),
        }
        if hasattr(rep, "max_residual"):
            entry["max_residual"] = float(rep.max_residual)
        if hasattr(rep, "worst_z"):
            entry["worst_z"] = float(rep.worst_z)
        checks.append(entry)
        print(f"[{identity}] {label}: {rep.summary()}")

    per_law = {
        "eq3": factor.verify_factorization,
        "eq15": factor.identity_e_check,
        "cor1a": factor.ubeta_f_membership,
        "prop2": factor.clock_composition_check,
    }
    for identity in identities:
        if identity in per_law:
            for law in laws:
                for beta in betas:
                    rep = per_law[identity](law.exponent, beta, tol=tol)
                    record(identity, f"{law.name} beta={beta:g}", rep)
        elif identity == "cor5":
            for label, G in _atomic_check_measures():
                for beta in betas:
                    rep = factor.spectral_factor_check(G, beta, tol=cor5_tol)
                    record(identity, f"{label} beta={beta:g}", rep)
        elif identity == "eq2-timechange":
            for law in laws:
                if law.sim is None:
                    continue
                for beta in mc["betas"]:
                    rep = simulate.time_change_equivalence(
                        law.sim, float(beta), int(mc["n"]), int(mc["seed"]),
                        z_max=float(mc["z_max"]),
                    )
                    record(identity, f"{law.name} beta={beta:g}", rep)
        elif identity == "area":
            for u in config.get("area_u", [1.0]):
                rep = factor.levy_area_demo(float(u), tol=tol)
                record(identity, f"u={u:g}", rep)

    passed = all(c["passed"] for c in checks)
    n_fail = sum(1 for c in checks if not c["passed"])
    print(f"suite: {len(checks)} checks, {n_fail} failed")
    doc = {"kind": "suite", "passed": passed, "config": config, "checks": checks}
    _emit(doc, args.out, args.format)
    return 0 if passed else 1


# -- argument parsing ------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="idlaw",
        description=(
            "Characteristic exponents of infinitely divisible laws, integral "
            "transforms, factorization checks, and exact Monte Carlo."
        ),
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, with_map=True):
        sp.add_argument("--law", help="path to a law JSON file")
        if with_map:
            sp.add_argument("--map", choices=["jbeta", "i", "ubetaf", "ijbeta"])
            sp.add_argument("--beta", type=float, help="map index (not for 'i')")
        sp.add_argument("--out", help="write a report to this path")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = sub.add_parser("eval", help="evaluate the (optionally mapped) exponent")
    add_common(sp)
    sp.add_argument("--y", help="evaluation points: 'a,b,c' or 'a,b;c,d' for vectors")
    sp.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    sp.set_defaults(fn=_cmd_eval, needs_law=True)

    sp = sub.add_parser("transform", help="closed-form triplet transform")
    sp.add_argument("--law", help="path to a law JSON file")
    sp.add_argument("--map", default="jbeta", choices=["jbeta", "i", "ubetaf", "ijbeta"])
    sp.add_argument("--beta", type=float)
    sp.add_argument("--n-grid", type=int, default=None, help="tail tabulation nodes")
    sp.add_argument("--out")
    sp.set_defaults(fn=_cmd_transform, needs_law=True)

    sp = sub.add_parser("verify", help="run one named identity check")
    sp.add_argument("--identity", required=True)
    add_common(sp, with_map=False)
    sp.add_argument("--beta", type=float, default=None, help="index (default 1)")
    sp.add_argument("--tol", type=float, default=1e-8, help="identity tolerance")
    sp.add_argument("--cor5-tol", type=float, default=1e-9, dest="cor5_tol")
    sp.add_argument("--y", help="override the verification grid")
    sp.add_argument("--u", type=float, default=1.0, help="area-demo parameter")
    sp.add_argument("--n", type=int, default=20000, help="MC sample count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--z-max", type=float, default=4.0, dest="z_max")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(fn=_cmd_verify)

    sp = sub.add_parser("simulate", help="draw exact samples, dump CSV")
    sp.add_argument("--law", required=True)
    sp.add_argument("--map", required=True, choices=["jbeta", "ijbeta"])
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--s-max", type=float, default=30.0, dest="s_max")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", help="samples CSV path")
    sp.add_argument("--y", help="grid for an empirical-CF comparison")
    sp.add_argument("--report", help="write the comparison report JSON here")
    sp.add_argument("--z-max", type=float, default=4.0, dest="z_max")
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("area-demo", help="stochastic-area factorization demo")
    sp.add_argument("--u", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(fn=_cmd_area_demo)

    sp = sub.add_parser("suite", help="batch of identity checks from a config")
    sp.add_argument("--config", help="JSON config; defaults to the builtin suite")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.set_defaults(fn=_cmd_suite)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.fn(args)
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return 1
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
