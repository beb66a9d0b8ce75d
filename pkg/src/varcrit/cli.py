"""Command-line driver.

Commands: ``constants``, ``moments``, ``expansion {lq,grad,lp}``,
``mountainpass`` and ``propcheck {holder,normmodular}``.

Options can also come from a ``key=value`` file given by ``--config``
(keys as the long flag names, with ``-`` or ``_``); flags on the command
line take precedence. A human-readable summary goes to stdout; with
``--out`` the machine report (``--format json|csv``) is written there,
otherwise an explicit ``--format`` prints it to stdout instead.

Exit codes: 0 success, 2 usage or validation error, 3 guard violation,
4 fit tolerance or verdict failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DivergentIntegralError, DomainError, GuardViolation
from .energy import (
    EnergyProblem,
    ExponentModel,
    dumps_csv,
    dumps_json,
    expansion_report,
    guard_flags,
    mountain_pass_report,
)
from .energy.reports import fmt
from .instanton import (
    c_p_threshold,
    d_np,
    d_np_oracle,
    k_np,
    moments_closed_form,
    moments_quadrature,
    normalization_constant,
    sobolev_threshold,
)
from .modular import (
    ExponentField,
    RadialGrid,
    holder_check,
    norm_modular_properties,
    random_exponent,
    random_functions,
)
from .special_fn import DimParams

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_GUARD = 3
EXIT_FAIL = 4

_DEFAULTS = {
    "n": None,
    "p": None,
    "dq_hessian_trace": 0.0,
    "dp_hessian_trace": 0.0,
    "dq_hessian": None,
    "dp_hessian": None,
    "h0": 0.0,
    "delta": "1",
    "eps_max": 2.0**-4,
    "eps_min": 2.0**-9,
    "tol": 0.10,
    "zero_band": 1e-6,
    "out": None,
    "format": None,
    "override_guards": False,
    "cases": 500,
    "seed": 0,
}

_FLOAT_KEYS = {"dq_hessian_trace", "dp_hessian_trace", "h0", "eps_max", "eps_min", "tol", "zero_band", "p"}
_INT_KEYS = {"n", "cases", "seed"}


class UsageError(Exception):
    pass


def _add_common(sp: argparse.ArgumentParser, problem: bool = False, sweep: bool = False) -> None:
    sp.add_argument("--config", help="key=value file; command-line flags override it")
    sp.add_argument("--n", help="dimension (integer >= 2)")
    sp.add_argument("--p", help="exponent p(0), 1 < p < n")
    sp.add_argument("--out", help="write the machine-readable report to this path")
    sp.add_argument("--format", choices=("json", "csv"))
    if problem:
        sp.add_argument("--dq-hessian-trace", help="Laplacian of q at the concentration point")
        sp.add_argument("--dp-hessian-trace", help="Laplacian of p at the concentration point")
        sp.add_argument("--dq-hessian", help="full Hessian of q, rows separated by ';', e.g. '-2,0;0,-2'")
        sp.add_argument("--dp-hessian", help="full Hessian of p, same syntax")
        sp.add_argument("--h0", help="value h(0) of the zero-order coefficient")
        sp.add_argument("--delta", help="cutoff radius of the test functions, or 'none'")
        sp.add_argument("--override-guards", action="store_true", default=None,
                        help="run outside the validity range of the expansions")
    if sweep:
        sp.add_argument("--eps-max", help="largest scale (default 2^-4)")
        sp.add_argument("--eps-min", help="smallest scale (default 2^-9)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varcrit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("constants", help="moments, Sobolev constant, thresholds and D(n,p)")
    _add_common(sp)
    sp = sub.add_parser("moments", help="closed-form moments against direct quadrature")
    _add_common(sp)

    sp = sub.add_parser("expansion", help="small-scale expansion of a bubble integral")
    sp.add_argument("kind", choices=("lq", "grad", "lp"))
    _add_common(sp, problem=True, sweep=True)
    sp.add_argument("--tol", help="relative tolerance for the fitted coefficient (default 0.10)")

    sp = sub.add_parser("mountainpass", help="sup of the energy along the bubble ray vs the threshold")
    _add_common(sp, problem=True, sweep=True)
    sp.add_argument("--zero-band", help="relative band counted as zero margin (default 1e-6)")

    sp = sub.add_parser("propcheck", help="randomized norm/modular and Hölder checks")
    sp.add_argument("check", choices=("holder", "normmodular"))
    sp.add_argument("--config")
    sp.add_argument("--cases", help="number of random cases (default 500)")
    sp.add_argument("--seed", help="RNG seed (default 0)")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"))
    return parser


def read_config(path: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags, and convert types."""
    cfg = dict(_DEFAULTS)
    if getattr(args, "config", None):
        file_cfg = read_config(args.config)
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg.update(file_cfg)
    for key in _DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    try:
        for key in _FLOAT_KEYS:
            if cfg[key] is not None:
                cfg[key] = float(cfg[key])
        for key in _INT_KEYS:
            if cfg[key] is not None:
                v = float(cfg[key])
                if v != int(v):
                    raise UsageError(f"--{key.replace('_', '-')} must be an integer")
                cfg[key] = int(v)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(cfg["override_guards"], str):
        cfg["override_guards"] = cfg["override_guards"].lower() in ("1", "true", "yes", "on")
    delta = str(cfg["delta"]).lower()
    cfg["delta"] = None if delta in ("none", "inf", "full") else float(delta)
    return cfg


def _dims(cfg: dict) -> DimParams:
    if cfg["n"] is None or cfg["p"] is None:
        raise UsageError("--n and --p are required")
    return DimParams(cfg["n"], cfg["p"])


def _matrix(text: str) -> np.ndarray:
    try:
        return np.array([[float(x) for x in row.split(",")] for row in text.split(";")])
    except ValueError as exc:
        raise UsageError(f"bad matrix {text!r}: {exc}") from None


def _problem(cfg: dict) -> EnergyProblem:
    dims = _dims(cfg)
    n = dims.n
    if cfg["dp_hessian"] is not None:
        pm = ExponentModel(dims.p, _matrix(cfg["dp_hessian"]))
    else:
        pm = ExponentModel.isotropic(n, dims.p, cfg["dp_hessian_trace"])
    if cfg["dq_hessian"] is not None:
        qm = ExponentModel(dims.p_star, _matrix(cfg["dq_hessian"]))
    else:
        qm = ExponentModel.isotropic(n, dims.p_star, cfg["dq_hessian_trace"])
    return EnergyProblem(dims, pm, qm, h0=cfg["h0"], delta=cfg["delta"])


def _eps_sequence(cfg: dict) -> list[float]:
    hi, lo = cfg["eps_max"], cfg["eps_min"]
    if not (0 < lo < hi < 1):
        raise UsageError("need 0 < eps-min < eps-max < 1")
    out, e = [], hi
    while e >= lo * (1 - 1e-12):
        out.append(e)
        e *= 0.5
    if len(out) < 2:
        raise UsageError("the scale range must hold at least two powers of 1/2")
    return out


def _emit(cfg: dict, report_type: str, payload, rows, summary: str) -> None:
    out = sys.stdout
    fmt_choice = cfg["format"]
    if cfg["out"]:
        text = dumps_csv(rows) if fmt_choice == "csv" else dumps_json(report_type, payload)
        Path(cfg["out"]).write_text(text)
        out.write(summary)
    elif fmt_choice:
        out.write(dumps_csv(rows) if fmt_choice == "csv" else dumps_json(report_type, payload))
    else:
        out.write(summary)


def _table(rows: Sequence[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    lines = []
    for key, value in rows:
        text = fmt(value) if isinstance(value, float) else str(value)
        lines.append(f"{key:<{width}}  {text}")
    return "\n".join(lines) + "\n"


def cmd_constants(cfg: dict) -> int:
    dims = _dims(cfg)
    m = moments_closed_form(dims)
    flags = guard_flags(dims)
    try:
        d_closed = d_np(dims)
        d_oracle = d_np_oracle(dims)
    except DivergentIntegralError:
        d_closed = d_oracle = None
    data = {
        "n": dims.n,
        "p": dims.p,
        "p_star": dims.p_star,
        "moments": m.as_dict(),
        "K": k_np(dims),
        "threshold": sobolev_threshold(dims),
        "normalization_C": normalization_constant(dims),
        "C_p": c_p_threshold(dims),
        "D_closed": d_closed,
        "D_oracle": d_oracle,
        "guards": flags,
    }
    rows = [("n", dims.n), ("p", dims.p), ("p*", dims.p_star)]
    for name, value in m.as_dict().items():
        rows.append((name, value if value is not None else "divergent"))
    rows += [
        ("K(n,p)", data["K"]),
        ("K^-n/n", data["threshold"]),
        ("normalization C", data["normalization_C"]),
        ("C_p", data["C_p"]),
        ("D closed", d_closed if d_closed is not None else "undefined (m_g2 divergent)"),
        ("D oracle", d_oracle if d_oracle is not None else "undefined (m_g2 divergent)"),
    ]
    rows += [(f"guard {k}", "ok" if v else "violated") for k, v in flags.items()]
    csv_rows = [{"quantity": k, "value": v if isinstance(v, (int, float)) else str(v)} for k, v in rows]
    _emit(cfg, "constants", data, csv_rows, _table(rows))
    return EXIT_OK


def cmd_moments(cfg: dict) -> int:
    dims = _dims(cfg)
    closed = moments_closed_form(dims).as_dict()
    quad = moments_quadrature(dims).as_dict()
    rows, data = [], {}
    for name in closed:
        c, q = closed[name], quad[name]
        rel = None if c is None else abs(q - c) / abs(c)
        data[name] = {"closed": c, "quadrature": q, "rel_diff": rel}
        rows.append({"moment": name, "closed": c if c is not None else "divergent",
                     "quadrature": q if q is not None else "divergent",
                     "rel_diff": rel if rel is not None else ""})
    summary = "\n".join(
        f"{r['moment']:<5}  closed={fmt(r['closed']) if isinstance(r['closed'], float) else r['closed']}"
        f"  quadrature={fmt(r['quadrature']) if isinstance(r['quadrature'], float) else r['quadrature']}"
        f"  rel_diff={fmt(r['rel_diff']) if isinstance(r['rel_diff'], float) else '-'}"
        for r in rows
    ) + "\n"
    _emit(cfg, "moments", {"n": dims.n, "p": dims.p, "moments": data}, rows, summary)
    return EXIT_OK


def cmd_expansion(cfg: dict, kind: str) -> int:
    prob = _problem(cfg)
    eps = _eps_sequence(cfg)
    rep = expansion_report(prob, kind, eps, override_guards=cfg["override_guards"])
    if rep.guard_overridden:
        print(f"warning: guard {rep.guard_bound} violated; running anyway", file=sys.stderr)
    ok = rep.within_tolerance(cfg["tol"])
    rel = "n/a (closed coefficient is 0)" if rep.rel_error is None else fmt(rep.rel_error)
    summary = _table([
        ("expansion", kind),
        ("regressor", rep.regressor),
        ("leading constant", rep.leading),
        ("closed coefficient", rep.coefficient),
        ("fitted coefficient", rep.fitted),
        ("one-term least squares", rep.least_squares),
        ("relative error", rel),
        ("reference scale", rep.reference_scale),
        ("tolerance", cfg["tol"]),
        ("verdict", "pass" if ok else "FAIL"),
    ])
    payload = {"report": rep, "tolerance": cfg["tol"], "within_tolerance": ok}
    _emit(cfg, f"expansion_{kind}", payload, rep.rows(), summary)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_mountainpass(cfg: dict) -> int:
    prob = _problem(cfg)
    eps = _eps_sequence(cfg)
    rep = mountain_pass_report(prob, eps, zero_band=cfg["zero_band"], override_guards=cfg["override_guards"])
    if rep.guards_overridden:
        print("warning: expansion guard violated; running anyway", file=sys.stderr)
    last = rep.entries[-1]
    verdict = rep.cond_verdict
    summary = _table([
        ("threshold K^-n/n", rep.threshold),
        ("branch", rep.branch),
        ("smallest eps", last.eps),
        ("sup J(t v_eps)", last.sup),
        ("t_eps", last.t_eps),
        ("margin", last.margin),
        (f"margin / {rep.regressor}", rep.ratios[-1]),
        ("predicted coefficient", rep.predicted),
        ("cond verdict", "n/a" if verdict is None else str(verdict).lower()),
        ("predicted sign", rep.predicted_sign),
        ("observed sign", rep.observed_sign),
        ("verdict", "as predicted" if rep.sign_matches else "MISMATCH"),
    ])
    _emit(cfg, "mountainpass", rep, rep.rows(), summary)
    return EXIT_OK if rep.sign_matches else EXIT_FAIL


def cmd_propcheck(cfg: dict, check: str) -> int:
    rng = np.random.default_rng(cfg["seed"])
    grid = RadialGrid.ball(3, 2.0, panels=4, order=8)
    cases = cfg["cases"]
    if check == "normmodular":
        rows = []
        violations = 0
        per_exponent = 10
        totals = {f"item{i}": {"cases": 0, "violations": 0, "worst": -math.inf} for i in range(1, 7)}
        for _ in range(math.ceil(cases / per_exponent)):
            p = random_exponent(grid, rng)
            res = norm_modular_properties(random_functions(grid, rng, per_exponent), p)
            for item, r in res.items():
                t = totals[item]
                t["cases"] += r["cases"]
                t["violations"] += r["violations"]
                t["worst"] = max(t["worst"], r["worst"])
        for item, t in totals.items():
            violations += t["violations"]
            rows.append({"item": item, **t})
        data = {"cases": cases, "seed": cfg["seed"], "items": totals}
    else:
        rows = []
        worst = math.inf
        violations = 0
        for i in range(cases):
            p = random_exponent(grid, rng, 1.2, 6.0)
            # q above the conjugate of p keeps 1/s = 1/p + 1/q below 1
            stretch = random_exponent(grid, rng, 1.05, 2.0).values
            q = ExponentField(grid, p.values / (p.values - 1.0) * stretch)
            f, g = random_functions(grid, rng, 2)
            res = holder_check(f, g, p, q)
            worst = min(worst, res.slack)
            violations += res.slack < -1e-12 * max(res.bound, 1.0)
            rows.append({"case": i, "value": res.value, "bound": res.bound, "slack": res.slack})
        data = {"cases": cases, "seed": cfg["seed"], "violations": violations, "min_slack": worst}
    summary = f"{check}: {cases} cases, {violations} violations\n"
    _emit(cfg, f"propcheck_{check}", data, rows, summary)
    return EXIT_OK if violations == 0 else EXIT_FAIL


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "constants":
            return cmd_constants(cfg)
        if args.command == "moments":
            return cmd_moments(cfg)
        if args.command == "expansion":
            return cmd_expansion(cfg, args.kind)
        if args.command == "mountainpass":
            return cmd_mountainpass(cfg)
        return cmd_propcheck(cfg, args.check)
    except GuardViolation as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
