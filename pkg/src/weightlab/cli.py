"""Command-line front end.

Commands: ``generate``, ``constant``, ``norm``, ``operator``, ``commutator``,
``verify`` and ``report``.  Exit codes: 0 ok, 1 exact-check violation,
2 configuration or input error, 3 numerical error.

Grid functions are read from JSON (``{"dim", "n_points", "values"}``) or
one-value-per-line CSV, or generated inline with ``gen:KIND[:key=val,...]``,
e.g. ``gen:two_value:a=4`` or ``gen:dyadic_martingale:seed=3,depth=4``.
Weight kinds: ``ones``, ``two_value`` (1 then ``a``), ``power``,
``exp_martingale``.  Function kinds: ``constant``, ``random``, ``step``
(0 then ``a``), ``log_singularity``, ``dyadic_martingale``.
"""

from __future__ import annotations

import os
import sys

THREADS_ENV = "WEIGHTLAB_THREADS"
_BLAS_ENV = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _prescan_threads(argv) -> str | None:
    for i, arg in enumerate(argv):
        if arg == "--threads" and i + 1 < len(argv):
            return argv[i + 1]
        if arg.startswith("--threads="):
            return arg.split("=", 1)[1]
    return os.environ.get(THREADS_ENV)


def _cap_threads(value: str | None) -> None:
    # BLAS reads these once at load time, so this must run before numpy is imported.
    if value and value.isdigit() and int(value) > 0:
        for key in _BLAS_ENV:
            os.environ[key] = value


if "numpy" not in sys.modules:
    _cap_threads(_prescan_threads(sys.argv[1:]))

import argparse  # noqa: E402
import json  # noqa: E402
import math  # noqa: E402
from pathlib import Path  # noqa: E402

import numpy as np  # noqa: E402

from . import __version__  # noqa: E402
from .commutators import (  # noqa: E402
    ContourSpec,
    commutator_contour,
    commutator_contour_multi,
    commutator_direct,
    commutator_multilinear_direct,
    default_delta,
)
from .grid import CubeFamily, Family, Grid, GridError, GridFn, load_csv, load_json  # noqa: E402
from .operators import (  # noqa: E402
    BILINEAR_OPERATORS,
    LINEAR_OPERATORS,
    OperatorError,
    bilinear_weighted_norm,
    dump_kernel_csv,
    make_operator,
    maximal,
    weighted_norm,
)
from .oscillation import (  # noqa: E402
    BmoFn,
    bmo_norm,
    dyadic_martingale,
    generate_bmo,
    little_bmo_norm,
    script_bmo_norm,
)
from .verify import SIZES, SUITES, ConfigError, SuiteReport, run_suite  # noqa: E402
from .weights import (  # noqa: E402
    ExponentProfile,
    VectorWeight,
    Weight,
    WeightError,
    a_pq_vector_constant,
    a_pr_constant,
    a_vector_constant,
    ap_constant,
    apq_constant,
    exp_of,
    membership_restricted,
    power_weight,
    rh_constant,
    two_value_weight,
)

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

CLASSES = ("a_p", "rh", "a_pq", "a_vector", "a_pq_vector", "a_pr", "restricted")
NORMS = ("bmo", "script_bmo", "little_bmo")


# --- inputs -----------------------------------------------------------------


def _parse_params(text: str) -> dict:
    params = {}
    for item in filter(None, text.split(",")):
        if "=" not in item:
            raise ConfigError(f"generator parameter {item!r} is not key=value")
        key, val = item.split("=", 1)
        try:
            params[key.strip()] = int(val) if val.strip().lstrip("-").isdigit() else float(val)
        except ValueError:
            raise ConfigError(f"generator parameter {key!r} is not numeric: {val!r}") from None
    return params


def _generate(kind: str, params: dict, grid: Grid) -> GridFn:
    try:
        if kind == "ones":
            return Weight.ones(grid)
        if kind == "constant":
            return GridFn(grid, np.full(grid.shape, float(params.get("c", 1.0))))
        if kind == "two_value":
            return two_value_weight(grid, **params)
        if kind == "power":
            return power_weight(grid, **params)
        if kind == "exp_martingale":
            lam = params.pop("lam", 0.5)
            return exp_of(dyadic_martingale(grid, **params), lam)
        if kind == "random":
            rng = np.random.default_rng(int(params.get("seed", 0)))
            return GridFn(grid, rng.standard_normal(grid.shape))
        if kind == "step":
            return generate_bmo("two_value", grid, **params)
        return generate_bmo(kind, grid, **params)
    except TypeError as exc:
        raise ConfigError(f"generator {kind!r}: {exc}") from None


def load_gridfn(source: str, n: int | None = None, dim: int = 1) -> GridFn:
    """Read a grid function from a file or an inline ``gen:`` spec."""
    if source.startswith("gen:"):
        _, kind, *rest = source.split(":", 2)
        if n is None:
            raise ConfigError("inline generators need --n")
        return _generate(kind, _parse_params(rest[0] if rest else ""), Grid(dim, n))
    path = Path(source)
    if not path.exists():
        raise ConfigError(f"{source}: no such file")
    f = load_csv(path) if path.suffix.lower() == ".csv" else load_json(path)
    if n is not None and f.grid.n_points != n:
        raise ConfigError(f"{source}: file has N = {f.grid.n_points} but --n {n} was given")
    return f


def _as_weight(f: GridFn) -> Weight:
    return f if isinstance(f, Weight) else Weight(f.grid, f.values)


def _family(name: str | None, grid: Grid) -> CubeFamily:
    if name is None:
        name = "all_intervals" if grid.dim == 1 else "dyadic_rectangles"
    try:
        return CubeFamily(Family(name), grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _floats(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _envelope(args, result: dict) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    return {"artifact": "weightlab", "version": __version__, "config": config, "result": result}


def _emit(args, payload: dict) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def _write_result(path: str | None, f: GridFn) -> None:
    if path:
        Path(path).write_text(json.dumps(f.to_json_dict()))


# --- commands ---------------------------------------------------------------


def cmd_generate(args) -> int:
    f = load_gridfn("gen:" + args.spec, args.n, args.dim)
    Path(args.output).write_text(json.dumps(f.to_json_dict()))
    return EXIT_OK


def cmd_constant(args) -> int:
    ws = [_as_weight(load_gridfn(src, args.n, args.dim)) for src in args.weight]
    grid = ws[0].grid
    if any(w.grid != grid for w in ws):
        raise ConfigError("all weights must live on the same grid")
    fam = _family(args.family, grid)
    cls = args.cls
    if cls in ("a_p", "rh", "a_pq", "restricted") and len(ws) != 1:
        raise ConfigError(f"class {cls} takes exactly one --weight")
    if cls == "a_p":
        res = ap_constant(ws[0], _need(args.p, "--p"), fam).to_dict()
    elif cls == "rh":
        res = rh_constant(ws[0], _need(args.q, "--q"), fam).to_dict()
    elif cls == "a_pq":
        res = apq_constant(ws[0], _need(args.p, "--p"), _need(args.q, "--q"), fam).to_dict()
    elif cls == "restricted":
        m = membership_restricted(ws[0], _need(args.p, "--p"), args.r_minus, args.r_plus, fam, args.bound)
        res = {
            "class": "restricted",
            "family": fam.name,
            "member": m.member,
            "value": m.constant,
            "ap_part": m.ap_part,
            "rh_part": m.rh_part,
            "exponents": {"p": args.p, "r_minus": args.r_minus, "r_plus": args.r_plus, "q": m.q, "s": m.s},
        }
    else:
        p_list = _floats(args.p_list) or (2.0,) * len(ws)
        prof = ExponentProfile(p_list=p_list, r_list=_floats(args.r_list))
        vw = VectorWeight(tuple(ws), prof)
        if cls == "a_vector":
            res = a_vector_constant(vw, fam).to_dict()
        elif cls == "a_pq_vector":
            res = a_pq_vector_constant(vw, _need(args.q, "--q"), fam).to_dict()
        else:
            res = a_pr_constant(vw, fam).to_dict()
    _emit(args, _envelope(args, res))
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise ConfigError(f"this class needs {flag}")
    return value


def cmd_norm(args) -> int:
    f = load_gridfn(args.symbol, args.n, args.dim)
    b = BmoFn(f.grid, f.values)
    if args.kind == "little_bmo":
        res = little_bmo_norm(b)
    else:
        fam = _family(args.family, b.grid)
        res = (bmo_norm if args.kind == "bmo" else script_bmo_norm)(b, fam)
    _emit(args, _envelope(args, res.to_dict()))
    return EXIT_OK


def cmd_operator(args) -> int:
    f = load_gridfn(args.input, args.n, args.dim) if args.input else None
    grid = f.grid if f is not None else Grid(args.dim, _need(args.n, "--n"))
    if args.op == "maximal":
        if f is None:
            raise ConfigError("maximal needs --input")
        out = maximal(f, _family(args.family, grid))
        _write_result(args.result, out)
        _emit(args, _envelope(args, {"operator": "maximal", "output_max": float(np.max(out.values))}))
        return EXIT_OK
    T = make_operator(args.op, grid, alpha=args.alpha, s=args.s)
    res = {"operator": T.to_dict()}
    if args.dump_kernel:
        if args.op in BILINEAR_OPERATORS:
            raise ConfigError("kernel dumps are available for linear operators")
        dump_kernel_csv(T, args.dump_kernel)
    if args.op in BILINEAR_OPERATORS:
        if f is not None:
            g = load_gridfn(args.input2, grid.n_points, grid.dim) if args.input2 else _need(None, "--input2")
            out = GridFn(grid, T.apply(f.values, g.values))
            _write_result(args.result, out)
        if args.weight:
            w1, w2 = (_as_weight(load_gridfn(s, grid.n_points, grid.dim)) for s in _pair(args.weight))
            p1, p2 = _floats(args.p_list) or (2.0, 2.0)
            res["weighted_norm"] = bilinear_weighted_norm(T, w1, w2, p1, p2, seed=args.seed).to_dict()
    else:
        if f is not None:
            _write_result(args.result, GridFn(grid, T.apply(f.values)))
        if args.weight:
            w = _as_weight(load_gridfn(args.weight[0], grid.n_points, grid.dim))
            res["weighted_norm"] = weighted_norm(T, w, args.p or 2.0, args.q or 2.0, seed=args.seed).to_dict()
    _emit(args, _envelope(args, res))
    return EXIT_OK


def _pair(items):
    if len(items) != 2:
        raise ConfigError("bilinear operators take two --weight values")
    return items


def _rel_err(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    diff = float(np.max(np.abs(a - b)))
    return diff / scale if scale > 0 else diff


def cmd_commutator(args) -> int:
    f = load_gridfn(args.input, args.n, args.dim)
    grid = f.grid
    syms = [load_gridfn(s, grid.n_points, grid.dim) for s in args.symbol]
    if any(s.grid != grid for s in syms):
        raise ConfigError("symbol and input must live on the same grid")
    T = make_operator(args.op, grid, alpha=args.alpha, s=args.s)
    fam = _family(None, grid)
    res: dict = {"operator": T.to_dict(), "method": args.method}
    if args.op in BILINEAR_OPERATORS:
        alpha = tuple(int(v) for v in (args.multi_index or "1,0").split(","))
        if len(syms) != 2:
            raise ConfigError("bilinear commutators take two --symbol values")
        g = load_gridfn(_need(args.input2, "--input2"), grid.n_points, grid.dim)
        direct = contour = None
        if args.method in ("direct", "both"):
            direct = commutator_multilinear_direct(T, syms, alpha, f, g)
        if args.method in ("contour", "both"):
            norms = [script_bmo_norm(b, fam).value for b in syms]
            if args.delta:
                delta = tuple(args.delta / max(nb, 1e-300) if nb > 0 else 1.0 for nb in norms)
            else:
                prof = ExponentProfile(p_list=_floats(args.p_list) or (2.0, 2.0))
                delta = tuple(
                    d if nb > 0 else 1.0
                    for d, nb in zip(default_delta(prof, [nb if nb > 0 else 1.0 for nb in norms], 1.0), norms)
                )
            cres = commutator_contour_multi(T, syms, alpha, f, g, ContourSpec(delta, args.m_nodes))
            contour = cres.value
            res["imag_residue"] = cres.imag_residue
            res["delta"] = list(delta)
        res["multi_index"] = list(alpha)
    else:
        k = args.order
        if k < 0:
            raise ConfigError("--order must be nonnegative")
        b = syms[0]
        direct = contour = None
        if args.method in ("direct", "both"):
            direct = commutator_direct(T, b, k, f)
        if args.method in ("contour", "both"):
            nb = script_bmo_norm(b, _family(None, grid) if grid.dim == 1 else CubeFamily(Family.DYADIC_RECTANGLES, grid)).value
            if nb == 0:
                delta = 1.0
            elif args.delta:
                delta = args.delta / nb
            else:
                delta = default_delta(ExponentProfile(p=2.0, q=2.0, s=2.0), nb)
            cres = commutator_contour(T, b, k, f, ContourSpec(delta, args.m_nodes))
            contour = cres.value
            res["imag_residue"] = cres.imag_residue
            res["delta"] = delta
        res["order"] = k
    if direct is not None and contour is not None:
        res["relative_error"] = _rel_err(contour.values, direct.values)
    out = direct if direct is not None else contour
    res["output_max_abs"] = float(np.max(np.abs(out.values)))
    _write_result(args.result, out)
    _emit(args, _envelope(args, res))
    return EXIT_OK


def _summary_lines(report: dict) -> list[str]:
    lines = []
    for c in report["checks"]:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(
            f"{status} {c['check_id']:<28} {c['classification']:<15} "
            f"instances={c['instances_run']} violations={c['violations']} max_ratio={c['max_ratio']}"
        )
    return lines


def cmd_verify(args) -> int:
    overrides = json.loads(args.overrides) if args.overrides else None
    report: SuiteReport = run_suite(args.suite, args.seed, args.size, overrides)
    data = report.to_dict()
    data["config"]["threads"] = args.threads
    text = json.dumps(data, indent=2, sort_keys=True)
    Path(args.json).write_text(text + "\n")
    Path(args.csv or str(Path(args.json).with_suffix(".csv"))).write_text(report.to_csv())
    if args.instances:
        Path(args.instances).write_text(report.instances_csv())
    for line in _summary_lines(data):
        print(line)
    print(f"exact violations: {report.exact_violations}")
    return EXIT_VIOLATION if report.exact_violations else EXIT_OK


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.report).read_text())
    except FileNotFoundError:
        raise ConfigError(f"{args.report}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.report}: line {exc.lineno}: {exc.msg}") from None
    if "checks" not in data:
        raise ConfigError(f"{args.report}: not a verification report")
    print(f"weightlab {data.get('version')} suite={data['config'].get('suite')} seed={data['config'].get('seed')} size={data['config'].get('size')}")
    for line in _summary_lines(data):
        print(line)
    if args.csv:
        rows = ["check_id,classification,instances_run,violations,max_ratio,passed"]
        rows += [
            f"{c['check_id']},{c['classification']},{c['instances_run']},{c['violations']},{c['max_ratio']},{c['passed']}"
            for c in data["checks"]
        ]
        Path(args.csv).write_text("\n".join(rows) + "\n")
    exact = sum(c["violations"] for c in data["checks"] if c["classification"] == "exact_discrete")
    return EXIT_VIOLATION if exact else EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weightlab", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"weightlab {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get(THREADS_ENV, "0") or 0) or None,
        help=f"cap BLAS threads (default from ${THREADS_ENV})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def grid_args(p):
        p.add_argument("--n", type=int, help="grid points per axis (required for gen: inputs)")
        p.add_argument("--dim", type=int, default=1, choices=(1, 2))
        p.add_argument("--out", help="write the JSON report here instead of stdout")

    p = sub.add_parser("generate", help="write a generated grid function to JSON")
    p.add_argument("spec", help="KIND[:key=val,...], e.g. two_value:a=4")
    p.add_argument("output")
    grid_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("constant", help="weight-class constant over a cube family")
    p.add_argument("--class", dest="cls", required=True, choices=CLASSES)
    p.add_argument("--weight", action="append", required=True, help="file or gen: spec (repeat for vector weights)")
    p.add_argument("--family")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--p-list")
    p.add_argument("--r-list")
    p.add_argument("--r-minus", type=float, default=1.0)
    p.add_argument("--r-plus", type=float, default=math.inf)
    p.add_argument("--bound", type=float)
    grid_args(p)
    p.set_defaults(func=cmd_constant)

    p = sub.add_parser("norm", help="BMO-type norms of a symbol")
    p.add_argument("--kind", required=True, choices=NORMS)
    p.add_argument("--symbol", required=True)
    p.add_argument("--family")
    grid_args(p)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("operator", help="apply an operator, dump its kernel, or estimate a weighted norm")
    p.add_argument("--op", required=True, choices=LINEAR_OPERATORS + BILINEAR_OPERATORS + ("maximal",))
    p.add_argument("--input")
    p.add_argument("--input2")
    p.add_argument("--result", help="write the output grid function (JSON)")
    p.add_argument("--dump-kernel", help="write the kernel matrix as CSV")
    p.add_argument("--weight", action="append", help="estimate the weighted norm for this weight")
    p.add_argument("--family")
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--p-list")
    p.add_argument("--alpha", type=float, default=0.5, help="Riesz order")
    p.add_argument("--s", type=float, default=1.0, help="BI_s homogeneity")
    p.add_argument("--seed", type=int, default=0)
    grid_args(p)
    p.set_defaults(func=cmd_operator)

    p = sub.add_parser("commutator", help="iterated or multilinear commutators")
    p.add_argument("--op", required=True, choices=LINEAR_OPERATORS + BILINEAR_OPERATORS)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--multi-index", help="a1,a2 for bilinear operators")
    p.add_argument("--symbol", action="append", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--input2")
    p.add_argument("--method", choices=("direct", "contour", "both"), default="direct")
    p.add_argument("--m-nodes", type=int, default=64)
    p.add_argument("--delta", type=float, help="contour radius times ||b|| (default from the exponents)")
    p.add_argument("--p-list")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--result")
    grid_args(p)
    p.set_defaults(func=cmd_commutator)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=SUITES, default="exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", choices=tuple(SIZES), default="smoke")
    p.add_argument("--json", default="weightlab_report.json")
    p.add_argument("--csv")
    p.add_argument("--instances", help="per-instance CSV")
    p.add_argument("--overrides", help="JSON object overriding size settings")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="summarize a verification report")
    p.add_argument("report")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, WeightError, GridError, OperatorError, ValueError, json.JSONDecodeError) as exc:
        print(f"weightlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"weightlab: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
