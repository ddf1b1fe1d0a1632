"""Command-line driver: ``hsharp {constant,verify,weights,sweep}``.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 numerical divergence.  JSON reports carry ``"schema": "hsharp/1"`` and
every float is written with 17 significant digits, so repeated runs with
the same seed produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import importlib
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from .constants import (
    ExponentSystem,
    MorreySystem,
    closed_form_constant,
    extremizer_lower_bound,
    generic_constant,
    morrey_constant,
)
from .errors import DivergenceError, DomainError, HSharpError, InternalConsistencyError
from .heisenberg import HeisenbergContext
from .kernels import (
    IntegrationConfig,
    MultilinearKernel,
    ball_indicator,
    hardy_kernel,
    hilbert_kernel,
    hlp_kernel,
    radial_function,
)
from .measures import power_weight
from .rng import DEFAULT_SEED
from .spaces import dilation_scaling_check

SCHEMA = "hsharp/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DIVERGENCE = 0, 1, 2, 3

KERNELS = {"hardy": hardy_kernel, "hilbert": hilbert_kernel, "hlp": hlp_kernel}
OPERATORS = sorted(KERNELS) + ["custom-spec"]
SWEEP_COLUMNS = ["operator", "n", "p", "epsilon", "R", "ratio", "constant", "gap", "mc_error"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# serialization


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _json(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        # JSON has no infinities; they are written as null
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    return _json({"schema": SCHEMA, **report}) + "\n"


def _csv_text(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for row in rows:
        wr.writerow([fmt_float(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# argument helpers


def _floats(text: str | None, name: str) -> list[float]:
    if text is None:
        raise UsageError(f"--{name} is required")
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name}: expected comma-separated numbers, got {text!r}") from None


def _cfg(args) -> IntegrationConfig:
    cfg = IntegrationConfig(seed=args.seed)
    if args.samples is not None:
        if args.samples <= 0:
            raise UsageError("--samples must be positive")
        cfg = cfg.with_(mc_samples=args.samples)
    return cfg


def _fast(cfg: IntegrationConfig) -> IntegrationConfig:
    # coarser nested rule for the many operator evaluations of a norm ratio
    return cfg.with_(nested_order=10, nested_h0=0.5)


def _system(args) -> ExponentSystem:
    ps = _floats(args.p, "p")
    if not ps:
        raise UsageError("--p needs at least one exponent")
    alphas = _floats(args.alpha, "alpha") if args.alpha else None
    if alphas is not None and len(alphas) != len(ps):
        raise UsageError("--alpha needs one value per exponent")
    if getattr(args, "lam", None):
        lams = _floats(args.lam, "lam")
        gammas = _floats(args.gamma, "gamma") if args.gamma else None
        mo = MorreySystem(ps, lams, gammas, alpha=args.morrey_alpha)
        return ExponentSystem.from_morrey(mo)
    return ExponentSystem(ps, alphas=alphas)


def _ctx(args) -> HeisenbergContext:
    if args.n < 1:
        raise UsageError("--n must be a positive integer")
    return HeisenbergContext(args.n)


def _kernel(args, ctx: HeisenbergContext, m: int) -> MultilinearKernel:
    if args.operator != "custom-spec":
        return KERNELS[args.operator](ctx, m)
    target = getattr(args, "kernel_spec", None)
    if not target or ":" not in target:
        raise UsageError("custom-spec needs --kernel-spec module:factory")
    mod, _, attr = target.partition(":")
    try:
        factory = getattr(importlib.import_module(mod), attr)
    except (ImportError, AttributeError) as exc:
        raise UsageError(f"cannot load {target}: {exc}") from None
    kernel = factory(ctx, m)
    if not isinstance(kernel, MultilinearKernel):
        raise UsageError(f"{target} did not return a MultilinearKernel")
    if kernel.m != m:
        raise UsageError(f"{target} built an m={kernel.m} kernel, expected m={m}")
    return kernel


def _agrees(value, ref, err, tol) -> bool:
    return abs(value - ref) <= tol * abs(ref) + err


# ---------------------------------------------------------------------------
# commands


def cmd_constant(args) -> tuple[dict, int]:
    ctx = _ctx(args)
    system = _system(args)
    kernel = _kernel(args, ctx, system.m)
    cfg = _cfg(args)
    tol = args.tolerance
    morrey = system.morrey is not None
    compute = morrey_constant if morrey else generic_constant

    cf = closed_form_constant(kernel, system)
    quad = None
    if system.m <= cfg.max_quadrature_dim or kernel.factor is not None:
        quad = compute(kernel, system, cfg.with_(method="quadrature"))
    # the Monte Carlo oracle ignores any factorization of the kernel
    mc_kernel = dataclasses.replace(kernel, factor=None)
    mc = compute(mc_kernel, system, cfg.with_(method="monte-carlo"))
    ref = cf.value if cf is not None else (quad.value if quad is not None else mc.value)
    ext = None
    if system.m <= 2:
        ext = extremizer_lower_bound(kernel, system, args.eps, args.R, _fast(cfg), constant=ref, tolerance=tol)

    flags = {}
    if cf is not None and quad is not None:
        flags["quadrature_matches_closed_form"] = _agrees(quad.value, cf.value, quad.error_estimate, tol)
    if cf is not None or quad is not None:
        flags["monte_carlo_matches_reference"] = _agrees(mc.value, ref, mc.error_estimate, tol)
    if ext is not None:
        flags["extremizer_below_constant"] = ext.value <= ref * (1.0 + tol) + ext.error_estimate

    report = {
        "command": "constant",
        "operator": args.operator,
        "n": ctx.n,
        "m": system.m,
        "exponents": system.as_dict(),
        "closed_form": None if cf is None else cf.value,
        "quadrature": None if quad is None else {"value": quad.value, "error": quad.error_estimate},
        "monte_carlo": {"value": mc.value, "error": mc.error_estimate, "samples": cfg.mc_samples, "seed": cfg.seed},
        "extremizer_lower_bound": None
        if ext is None
        else {"epsilon": args.eps, "R": args.R, "ratio": ext.value, "error": ext.error_estimate, "gap": ext.metadata["gap"]},
        "agreement_flags": flags,
    }
    return report, EXIT_OK if all(flags.values()) else EXIT_FAIL


def _scaling_functions():
    return [
        ("ball", ball_indicator(1.0)),
        ("gaussian", radial_function(lambda r: np.exp(-r * r), label="exp(-r^2)")),
        ("shell-power", radial_function(lambda r: r**-1.5, support=(0.5, 3.0), label="r^-1.5 on [0.5,3]")),
    ]


def cmd_verify(args) -> tuple[dict, int]:
    ctx = _ctx(args)
    cfg = _cfg(args)
    checks = []
    if args.suite == "scaling":
        ps = _floats(args.p, "p")
        if len(ps) != 1:
            raise UsageError("verify scaling takes a single --p")
        p = ps[0]
        if not p > 0.0:
            raise DomainError("p must be positive")
        a = _floats(args.alpha, "alpha")[0] if args.alpha else 0.0
        for name, f in _scaling_functions():
            lhs, rhs = dilation_scaling_check(f, ctx, args.t, p, a, cfg=cfg)
            rel = abs(lhs - rhs) / abs(rhs)
            checks.append({"check": name, "lhs": lhs, "rhs": rhs, "rel_error": rel, "pass": rel <= args.tolerance})
        report = {"command": "verify", "suite": "scaling", "n": ctx.n, "p": p, "t": args.t, "alpha": a}
    else:
        if args.operator is None:
            raise UsageError("verify extremizer needs an operator")
        if not (args.eps > 0.0):
            raise DomainError(f"--eps must be positive, got {args.eps!r}")
        if not (args.R > 1.0):
            raise DomainError(f"--R must exceed 1, got {args.R!r}")
        system = _system(args)
        kernel = _kernel(args, ctx, system.m)
        cf = closed_form_constant(kernel, system)
        compute = morrey_constant if system.morrey is not None else generic_constant
        C = cf.value if cf is not None else compute(kernel, system, cfg).value
        try:
            ext = extremizer_lower_bound(kernel, system, args.eps, args.R, _fast(cfg), constant=C, tolerance=args.tolerance)
            ratio, err, ok = ext.value, ext.error_estimate, True
        except InternalConsistencyError as exc:
            ratio, err, ok = math.nan, math.nan, False
            checks.append({"check": "consistency", "message": str(exc), "pass": False})
        checks.append(
            {"check": "ratio_below_constant", "ratio": ratio, "constant": C, "error": err,
             "gap": C - ratio, "pass": ok and 0.0 < ratio <= C * (1.0 + args.tolerance) + err}
        )
        report = {
            "command": "verify",
            "suite": "extremizer",
            "operator": args.operator,
            "n": ctx.n,
            "exponents": system.as_dict(),
            "epsilon": args.eps,
            "R": args.R,
        }
    passed = all(c["pass"] for c in checks)
    report["checks"] = checks
    report["pass"] = passed
    return report, EXIT_OK if passed else EXIT_FAIL


def cmd_weights(args) -> tuple[dict, int]:
    from .spaces import BallSearchConfig
    from .weights import ap_characteristic, doubling_check, reverse_holder_check

    ctx = _ctx(args)
    cfg = _cfg(args)
    ps = _floats(args.p, "p")
    if len(ps) != 1:
        raise UsageError("weights takes a single --p")
    p = ps[0]
    a = _floats(args.alpha, "alpha")[0] if args.alpha else 0.0
    w = power_weight(a)
    search = BallSearchConfig(radius_count=7, center_count=3, centered_only=args.centered)
    balls = search.balls(ctx)
    ap = ap_characteristic(w, p, balls, cfg, on_divergence="flag")
    report = {
        "command": "weights",
        "n": ctx.n,
        "weight": w.label,
        "p": p,
        "balls": len(balls),
        "ap": {
            "value": ap.value,
            "unbounded": ap.unbounded,
            "argmax": ap.argmax.as_dict(),
            "growth": list(ap.growth),
        },
    }
    if ap.unbounded:
        return report, EXIT_DIVERGENCE
    rh = reverse_holder_check(w, args.r, balls, cfg)
    db = doubling_check(w, p, [2.0], balls, cfg)
    report["reverse_holder"] = {"r": args.r, "value": rh.value, "argmax": rh.argmax.as_dict()}
    report["doubling"] = {"lambda": 2.0, "value": db.value, "argmax": db.argmax[0].as_dict()}
    return report, EXIT_OK


def sweep_rows(args) -> list[dict]:
    ctx = _ctx(args)
    cfg = _fast(_cfg(args))
    system = _system(args)
    epss = _floats(args.eps_grid, "eps")
    Rs = _floats(args.R_grid, "R")
    if any(not e > 0.0 for e in epss) or any(not r > 1.0 for r in Rs):
        raise DomainError("sweep needs eps > 0 and R > 1")
    kernel = _kernel(args, ctx, system.m)
    rows = []
    if not epss or not Rs:
        return rows
    cf = closed_form_constant(kernel, system)
    compute = morrey_constant if system.morrey is not None else generic_constant
    C = cf.value if cf is not None else compute(kernel, system, cfg).value
    ptxt = ";".join(fmt_float(v) for v in system.ps)
    for eps in epss:
        for R in Rs:
            ext = extremizer_lower_bound(kernel, system, eps, R, cfg, constant=C, tolerance=args.tolerance)
            rows.append(
                {"operator": args.operator, "n": ctx.n, "p": ptxt, "epsilon": eps, "R": R,
                 "ratio": ext.value, "constant": C, "gap": C - ext.value, "mc_error": ext.error_estimate}
            )
    return rows


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="Heisenberg dimension n (Q = 2n+2)")
    common.add_argument("--p", help="comma-separated exponents p_1,...,p_m")
    common.add_argument("--alpha", help="comma-separated power-weight exponents")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    common.add_argument("--tolerance", type=float, default=1e-6)
    common.add_argument("--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None)

    morrey = _Parser(add_help=False)
    morrey.add_argument("--lam", help="Morrey exponents lam_j (switches to the Morrey constant)")
    morrey.add_argument("--gamma", help="Morrey integrand weights gamma_j")
    morrey.add_argument("--kernel-spec", dest="kernel_spec", help="module:factory for custom-spec; factory(ctx, m) -> kernel")
    morrey.add_argument("--morrey-alpha", type=float, default=0.0, dest="morrey_alpha")

    parser = _Parser(prog="hsharp", description="Sharp constants for multilinear operators on the Heisenberg group.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constant", parents=[common, morrey], help="closed form and numerical oracles")
    c.add_argument("operator", choices=OPERATORS)
    c.add_argument("--eps", type=float, default=1e-2)
    c.add_argument("--R", type=float, default=1e4)

    v = sub.add_parser("verify", parents=[common, morrey], help="run an invariant suite")
    v.add_argument("suite", choices=("scaling", "extremizer"))
    v.add_argument("operator", nargs="?", choices=OPERATORS)
    v.add_argument("--t", type=float, default=2.0)
    v.add_argument("--eps", type=float, default=1e-3)
    v.add_argument("--R", type=float, default=1e6)

    w = sub.add_parser("weights", parents=[common], help="A_p, reverse Holder and doubling of |x|^alpha")
    w.add_argument("--r", type=float, default=2.0, help="reverse Holder exponent")
    w.add_argument("--centered", action="store_true", help="centered balls only")

    s = sub.add_parser("sweep", parents=[common, morrey], help="extremizer ratios over an (eps, R) grid")
    s.add_argument("operator", choices=OPERATORS)
    s.add_argument("--eps", dest="eps_grid", default="1e-1,3e-2,1e-2,3e-3,1e-3")
    s.add_argument("--R", dest="R_grid", default="1e6")
    return parser


def _defaults(args) -> None:
    if args.command == "verify" and args.suite == "extremizer" and args.p is None:
        args.p = "2"
    if args.command == "verify" and args.suite == "scaling" and args.p is None:
        args.p = "2"
    if args.command == "weights" and args.p is None:
        args.p = "2"
    if args.command == "verify" and args.suite == "scaling" and not args.t > 0.0:
        raise DomainError("--t must be positive")
    if args.command == "constant" and args.p is None:
        raise UsageError("constant needs --p")
    if args.command == "sweep" and args.p is None:
        raise UsageError("sweep needs --p")


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _defaults(args)
        fmt = args.format or ("csv" if args.command == "sweep" else "json")
        if args.command == "sweep":
            rows = sweep_rows(args)
            text = _csv_text(rows, SWEEP_COLUMNS) if fmt == "csv" else dumps({"command": "sweep", "rows": rows})
            _emit(text, args.output)
            return EXIT_OK
        handler = {"constant": cmd_constant, "verify": cmd_verify, "weights": cmd_weights}[args.command]
        report, code = handler(args)
        if fmt == "csv":
            raise UsageError(f"{args.command} reports are JSON only")
        _emit(dumps(report), args.output)
        return code
    except UsageError as exc:
        sys.stderr.write(f"hsharp: usage error: {exc}\n")
        return EXIT_USAGE
    except DivergenceError as exc:
        record = {"error": "divergence", "type": type(exc).__name__, "message": str(exc)}
        out = getattr(locals().get("args"), "output", None)
        _emit(dumps(record), out)
        sys.stderr.write(f"hsharp: divergence: {exc}\n")
        return EXIT_DIVERGENCE
    except DomainError as exc:
        sys.stderr.write(f"hsharp: parameter error: {exc}\n")
        return EXIT_USAGE
    except HSharpError as exc:
        sys.stderr.write(f"hsharp: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
