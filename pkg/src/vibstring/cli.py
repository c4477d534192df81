"""Command-line front end.

Every subcommand reads an optional JSON config (``--config``) whose keys are
the long option names with underscores; flags given on the command line win.

Exit codes: 0 ok, 2 domain/parse/precondition error, 3 condition not
satisfied, 4 solver failure, 5 I/O error, 6 boundary pair on the zero curve.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path

from . import ambarzumyan, analysis, liouville
from .eigen import eigenfunction, eigenvalue
from .errors import DomainError, SpectralError
from .problem import SpectralProblem, parse_angle, parse_coefficient

EXIT_OK, EXIT_DOMAIN, EXIT_UNSATISFIED, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4, 5


def _num(v: float) -> str:
    return f"{v:.17g}"


def _angle(value) -> float:
    return parse_angle(value if isinstance(value, str) else repr(float(value)))


def _range(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        lo, hi = str(text).split(",")
    return _angle(lo), _angle(hi)


COMMON = {
    "p": None, "q": None, "pref": None, "qref": None,
    "alpha": "pi", "beta": "0", "gamma": "pi", "delta": "0",
    "length": "pi", "out": None, "format": "csv", "jobs": 1, "tol": None,
}

SPECIFIC = {
    "spectrum": {"count": 1, "eigenfunction": None, "grid_points": 4097},
    "signmap": {"grid": 41, "n_alpha": None, "n_beta": None, "alpha_range": None,
                "beta_range": None, "curve_only": False, "samples": 50},
    "curve": {"samples": 50},
    "bounds": {},
    "check": {"theorem": None, "which": None, "n": 1},
    "liouville": {"grid_points": liouville.GRID_POINTS, "n_max": 5},
    "trace": {"t_nodes": 32},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vibstring", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values")
    for name in ("p", "q", "pref", "qref"):
        common.add_argument(f"--{name}", help="coefficient string")
    for name in ("alpha", "beta", "gamma", "delta"):
        common.add_argument(f"--{name}", help="angle in radians, or a multiple of pi")
    common.add_argument("--length", help="Sturm-Liouville interval length (default pi)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--jobs", type=int)
    common.add_argument("--tol", type=float, help="condition tolerance (check)")

    sp = sub.add_parser("spectrum", parents=[common], help="first eigenvalues")
    sp.add_argument("-N", "--count", type=int, help="number of eigenvalues")
    sp.add_argument("--eigenfunction", type=int, help="export this eigenpair instead")
    sp.add_argument("--grid-points", type=int)

    for name in ("signmap", "curve"):
        sm = sub.add_parser(name, parents=[common],
                            help="sign map of lam0" if name == "signmap" else "zero curve samples")
        sm.add_argument("--samples", type=int)
        if name == "signmap":
            sm.add_argument("--grid", type=int, help="n x n lattice over (0,pi] x [0,pi)")
            sm.add_argument("--n-alpha", type=int)
            sm.add_argument("--n-beta", type=int)
            sm.add_argument("--alpha-range", help="lo,hi (inclusive)")
            sm.add_argument("--beta-range", help="lo,hi (inclusive)")
            sm.add_argument("--curve-only", action="store_true", default=None)

    sub.add_parser("bounds", parents=[common], help="ground-state bounds")

    ck = sub.add_parser("check", parents=[common], help="uniqueness condition check")
    ck.add_argument("--theorem", choices=["2.1", "2.2", "2.3", "1.2", "1.3"])
    ck.add_argument("--which", choices=["max", "min", "inf", "sup"])
    ck.add_argument("--n", type=int)

    lv = sub.add_parser("liouville", parents=[common], help="Liouville transform")
    lv.add_argument("--grid-points", type=int)
    lv.add_argument("--n-max", type=int)

    tr = sub.add_parser("trace", parents=[common], help="ground-state trace formula")
    tr.add_argument("--t-nodes", type=int)
    return parser


def load_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    allowed = {**COMMON, **SPECIFIC[args.command]}
    cfg = dict(allowed)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise DomainError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise DomainError("config must be a JSON object")
        unknown = sorted(set(data) - set(allowed))
        if unknown:
            raise DomainError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        cfg.update(data)
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["format"] not in ("csv", "json"):
        raise DomainError("format must be csv or json")
    return cfg


def _string_problem(cfg, key="p") -> SpectralProblem:
    p = parse_coefficient(cfg[key] or "const:1", (0.0, 1.0), positive=True)
    return SpectralProblem.string(p, _angle(cfg["alpha"]), _angle(cfg["beta"]))


def _sl_interval(cfg):
    return 0.0, _angle(cfg["length"])


def _sl_problem(cfg, key="q") -> SpectralProblem:
    q = parse_coefficient(cfg[key] or "const:0", _sl_interval(cfg))
    return SpectralProblem.sturm_liouville(q, _angle(cfg["gamma"]), _angle(cfg["delta"]))


def _csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for r in rows:
        out.write(",".join(_num(v) if isinstance(v, float) else str(v) for v in r) + "\n")
    return out.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_spectrum(cfg) -> tuple[int, str]:
    prob = _sl_problem(cfg) if cfg["q"] else _string_problem(cfg)
    if cfg["eigenfunction"] is not None:
        pair = eigenfunction(prob, int(cfg["eigenfunction"]), int(cfg["grid_points"]))
        return EXIT_OK, _eigenpair_text(pair)
    values = [eigenvalue(prob, n) for n in range(int(cfg["count"]))]
    if cfg["format"] == "json":
        return EXIT_OK, _json({"eigenvalues": values})
    return EXIT_OK, _csv(["n", "lambda"], [(n, v) for n, v in enumerate(values)])


def _eigenpair_text(pair) -> str:
    header = {"n": pair.n, "lambda": pair.value, "normalization": pair.normalization}
    rows = "".join(",".join(_num(v) for v in r) + "\n" for r in pair.samples)
    return "# " + json.dumps(header) + "\nx,u,du\n" + rows


def cmd_signmap(cfg) -> tuple[int, str]:
    if cfg.get("curve_only"):
        samples = analysis.curve_samples(int(cfg["samples"]))
        if cfg["format"] == "json":
            return EXIT_OK, _json([{"alpha": a, "beta": b} for a, b in samples])
        return EXIT_OK, _csv(["alpha", "beta"], [(float(a), float(b)) for a, b in samples])
    p = parse_coefficient(cfg["p"] or "const:1", (0.0, 1.0), positive=True)
    n_alpha = int(cfg["n_alpha"] or cfg["grid"])
    n_beta = int(cfg["n_beta"] or cfg["grid"])
    if cfg["alpha_range"] is None and cfg["beta_range"] is None:
        nodes = analysis.open_lattice(n_alpha, n_beta)
    else:
        ar = _range(cfg["alpha_range"]) if cfg["alpha_range"] else (math.pi / n_alpha, math.pi)
        br = _range(cfg["beta_range"]) if cfg["beta_range"] else (0.0, math.pi * (n_beta - 1) / n_beta)
        nodes = analysis.lattice(ar, br, n_alpha, n_beta)
    rows = analysis.sign_map(nodes, p, jobs=int(cfg["jobs"]))
    if cfg["format"] == "json":
        return EXIT_OK, _json([{"alpha": r.alpha, "beta": r.beta, "class": r.cls.value,
                                "lambda0": r.lambda0, "error": r.error} for r in rows])
    return EXIT_OK, _csv(["alpha", "beta", "class", "lambda0"],
                         [(r.alpha, r.beta, r.cls.value, r.lambda0) for r in rows])


def cmd_curve(cfg) -> tuple[int, str]:
    return cmd_signmap({**cfg, "curve_only": True})


def cmd_bounds(cfg) -> tuple[int, str]:
    if cfg["q"]:
        prob = _sl_problem(cfg)
        b = analysis.mu0_bounds(prob.potential, prob.angles.left, prob.angles.right)
    else:
        prob = _string_problem(cfg)
        b = analysis.lambda0_bounds(prob.weight, prob.angles.left, prob.angles.right)
    value = eigenvalue(prob, 0)
    contained = b.lower <= value <= b.upper
    if cfg["format"] == "json":
        return EXIT_OK, _json({"lower": b.lower, "upper": b.upper, "reference": b.reference,
                               "value": value, "contained": contained})
    return EXIT_OK, _csv(["lower", "upper", "reference", "value", "contained"],
                         [(b.lower, b.upper, b.reference, value, str(contained).lower())])


def cmd_check(cfg) -> tuple[int, str]:
    theorem = cfg["theorem"]
    if theorem is None:
        raise DomainError("check needs --theorem")
    kw = {} if cfg["tol"] is None else {"tol": float(cfg["tol"])}
    if theorem in ("2.1", "2.2", "2.3"):
        prob = _string_problem(cfg)
        ref = _string_problem(cfg, "pref")
        p, pref = prob.weight, ref.weight
        a, b = prob.angles.left, prob.angles.right
        if theorem == "2.1":
            v = ambarzumyan.check_extremal(p, pref, a, b, cfg["which"] or "max", **kw)
        elif theorem == "2.2":
            v = ambarzumyan.check_weighted_mean(p, pref, a, b, **kw)
        else:
            v = ambarzumyan.check_nth(p, pref, a, b, int(cfg["n"]), cfg["which"] or "max", **kw)
    else:
        prob = _sl_problem(cfg)
        ref = _sl_problem(cfg, "qref")
        q, qref = prob.potential, ref.potential
        g, d = prob.angles.left, prob.angles.right
        if theorem == "1.2":
            v = ambarzumyan.sl_check_yurko(q, qref, g, d, **kw)
        else:
            v = ambarzumyan.sl_check_extremal(q, qref, g, d, cfg["which"] or "inf", **kw)
    return (EXIT_OK if v.satisfied else EXIT_UNSATISFIED), v.to_json() + "\n"


def cmd_liouville(cfg) -> tuple[int, str]:
    prob = _string_problem(cfg)
    a, b = prob.angles.left, prob.angles.right
    img = liouville.transform(prob.weight, a, b, int(cfg["grid_points"]))
    if cfg["format"] == "json":
        rows = liouville.consistency_check(prob.weight, a, b, int(cfg["n_max"]),
                                           int(cfg["grid_points"]))
        return EXIT_OK, _json({"c": img.c, "gamma": img.gamma, "delta": img.delta,
                               "consistency": [r._asdict() for r in rows]})
    header = "# " + json.dumps({"c": img.c, "gamma": img.gamma, "delta": img.delta}) + "\n"
    return EXIT_OK, header + _csv(["x", "s", "q"],
                                  [(float(x), float(s), float(q))
                                   for x, s, q in zip(img.x, img.s, img.q)])


def cmd_trace(cfg) -> tuple[int, str]:
    prob = _sl_problem(cfg)
    t = analysis.trace_formula_check(prob.potential, prob.angles.left, prob.angles.right,
                                     int(cfg["t_nodes"]))
    if cfg["format"] == "json":
        return EXIT_OK, _json(t._asdict())
    return EXIT_OK, _csv(["lhs", "rhs", "gap", "reference", "sup_abs_q"], [tuple(t)])


COMMANDS = {
    "spectrum": cmd_spectrum, "signmap": cmd_signmap, "curve": cmd_curve,
    "bounds": cmd_bounds, "check": cmd_check, "liouville": cmd_liouville, "trace": cmd_trace,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        code, text = COMMANDS[args.command](cfg)
    except OSError as exc:
        print(f"vibstring: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpectralError as exc:
        print(f"vibstring: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    try:
        if cfg["out"]:
            Path(cfg["out"]).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"vibstring: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
