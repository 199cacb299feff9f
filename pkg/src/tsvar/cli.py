"""Command-line front end: solve / verify / sweep / integrate / info.

Problem files are UTF-8 text with ``[section]`` headers and ``key = value``
lines.  Exactly one ``[timescale]`` and one ``[problem]`` section are
required; ``[solver]`` is optional.  Parameters named in ``params`` are
substituted textually into the expressions before parsing, so their names
must not collide with the reserved variables or function names.

Exit codes: 0 success, 1 usage or file errors, 2 solver non-convergence,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import expr as ex
from .conditions import hamiltonian_residuals, variational_residuals
from .errors import AdmissibilityError, ProblemFileError, TsvarError
from .problem import ControlProblem, VariationalProblem
from .solver import SolveOptions, Solution, solve_control, solve_variational, sweep
from .timescale import GridFunction, TimeScale

__all__ = ["ProblemFile", "load_problem_file", "main", "console_main"]

_SECTIONS = ("timescale", "problem", "solver")
_RESERVED = set(ex.VARIABLES) | set(ex.FUNCTIONS)
_FMT = "%.17g"


def _fmt(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return _FMT % v


# -- problem files ---------------------------------------------------------


@dataclass
class ProblemFile:
    """Parsed problem file; expressions are kept as templates so sweeps can
    re-substitute a parameter."""

    path: str
    scale: TimeScale
    problem_type: str  # "variational" | "control"
    f_template: str
    g_template: str | None
    alpha: float
    params: dict[str, float]
    options: SolveOptions

    def substituted(self, name: str, overrides: dict[str, float] | None = None) -> str:
        params = dict(self.params)
        if overrides:
            params.update(overrides)
        template = self.f_template if name == "f" else self.g_template
        return _substitute_params(template, params)

    def build_problem(self, overrides: dict[str, float] | None = None):
        f = ex.parse(self.substituted("f", overrides))
        if self.problem_type == "control":
            g = ex.parse(self.substituted("g", overrides))
            return ControlProblem(self.scale, f, g, self.alpha)
        return VariationalProblem(self.scale, f, self.alpha)


_NUMBER_RE = re.compile(r"\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")


def _substitute_params(text: str, params: dict[str, float]) -> str:
    for name in sorted(params, key=len, reverse=True):
        if name in _RESERVED:
            raise ProblemFileError(
                f"parameter name {name!r} collides with a reserved variable or function"
            )
        text = re.sub(rf"\b{re.escape(name)}\b", f"({params[name]:.17g})", text)
    # strip numeric literals first: their exponent marker is not an identifier
    for m in re.finditer(r"[A-Za-z_][A-Za-z0-9_]*", _NUMBER_RE.sub(" ", text)):
        if m.group(0) not in _RESERVED:
            raise ProblemFileError(
                f"unknown identifier {m.group(0)!r} in expression "
                "(missing parameter substitution?)"
            )
    return text


def _parse_sections(path: Path) -> dict[str, dict[str, tuple[str, int]]]:
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ProblemFileError(f"line {lineno}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ProblemFileError(f"line {lineno}: unknown section [{name}]")
            if name in sections:
                raise ProblemFileError(f"line {lineno}: duplicate section [{name}]")
            sections[name] = {}
            current = name
            continue
        if current is None:
            raise ProblemFileError(f"line {lineno}: key outside any section")
        if "=" not in line:
            raise ProblemFileError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in sections[current]:
            raise ProblemFileError(f"line {lineno}: duplicate key {key!r}")
        sections[current][key] = (value.strip(), lineno)
    return sections


def _take(section: dict, key: str, where: str, required: bool = True):
    if key not in section:
        if required:
            raise ProblemFileError(f"section [{where}] is missing key {key!r}")
        return None, -1
    return section.pop(key)


def _to_float(text: str, key: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ProblemFileError(f"line {lineno}: {key} is not a number: {text!r}") from None


def _to_int(text: str, key: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ProblemFileError(f"line {lineno}: {key} is not an integer: {text!r}") from None


def _to_bool(text: str, key: str, lineno: int) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ProblemFileError(f"line {lineno}: {key} is not a boolean: {text!r}")


def _build_scale(section: dict[str, tuple[str, int]]) -> TimeScale:
    kind, kind_line = _take(section, "kind", "timescale")
    if kind == "explicit":
        text, lineno = _take(section, "points", "timescale")
        try:
            pts = [float(p) for p in text.split(",")]
        except ValueError:
            raise ProblemFileError(f"line {lineno}: bad point list") from None
        scale = TimeScale.from_points(pts)
    elif kind == "integers":
        text_a, la = _take(section, "a", "timescale")
        text_b, lb = _take(section, "b", "timescale")
        scale = TimeScale.integer_range(_to_int(text_a, "a", la), _to_int(text_b, "b", lb))
    elif kind == "uniform":
        text_a, la = _take(section, "a", "timescale")
        text_b, lb = _take(section, "b", "timescale")
        text_n, ln = _take(section, "n", "timescale")
        scale = TimeScale.uniform(
            _to_float(text_a, "a", la), _to_float(text_b, "b", lb), _to_int(text_n, "n", ln)
        )
    elif kind == "qgrid":
        text_q, lq = _take(section, "q", "timescale")
        text_kmin, lkm = _take(section, "k_min", "timescale")
        text_kmax, lkx = _take(section, "k_max", "timescale")
        zero_entry = section.pop("include_zero", ("false", -1))
        scale = TimeScale.q_grid(
            _to_float(text_q, "q", lq),
            _to_int(text_kmin, "k_min", lkm),
            _to_int(text_kmax, "k_max", lkx),
            _to_bool(zero_entry[0], "include_zero", zero_entry[1]),
        )
    else:
        raise ProblemFileError(
            f"line {kind_line}: unknown timescale kind {kind!r} "
            "(expected explicit|integers|uniform|qgrid)"
        )
    if section:
        key = next(iter(section))
        raise ProblemFileError(
            f"line {section[key][1]}: unexpected key {key!r} in [timescale]"
        )
    return scale


def _parse_params(text: str, lineno: int) -> dict[str, float]:
    params: dict[str, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ProblemFileError(f"line {lineno}: params entries look like name=value")
        name, value = item.split("=", 1)
        params[name.strip()] = _to_float(value.strip(), name.strip(), lineno)
    return params


def load_problem_file(path: str | Path) -> ProblemFile:
    path = Path(path)
    try:
        sections = _parse_sections(path)
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc}") from exc
    for required in ("timescale", "problem"):
        if required not in sections:
            raise ProblemFileError(f"missing required section [{required}]")

    scale = _build_scale(sections["timescale"])

    prob = sections["problem"]
    ptype, ptype_line = _take(prob, "type", "problem")
    if ptype not in ("variational", "control"):
        raise ProblemFileError(
            f"line {ptype_line}: problem type must be variational or control"
        )
    f_text, _ = _take(prob, "f", "problem")
    g_text = None
    if ptype == "control":
        g_text, _ = _take(prob, "g", "problem")
    alpha_text, alpha_line = _take(prob, "alpha", "problem")
    alpha = _to_float(alpha_text, "alpha", alpha_line)
    params_entry = prob.pop("params", None)
    params = _parse_params(*params_entry) if params_entry else {}
    if prob:
        key = next(iter(prob))
        raise ProblemFileError(f"line {prob[key][1]}: unexpected key {key!r} in [problem]")

    opt_kwargs = {}
    solver = sections.get("solver", {})
    for key, conv in (
        ("max_iterations", _to_int),
        ("gradient_tolerance", _to_float),
        ("step_tolerance", _to_float),
        ("finite_difference_step", _to_float),
        ("seed", _to_int),
    ):
        if key in solver:
            text, lineno = solver.pop(key)
            opt_kwargs[key] = conv(text, key, lineno)
    if solver:
        key = next(iter(solver))
        raise ProblemFileError(f"line {solver[key][1]}: unexpected key {key!r} in [solver]")

    pf = ProblemFile(
        path=str(path),
        scale=scale,
        problem_type=ptype,
        f_template=f_text,
        g_template=g_text,
        alpha=alpha,
        params=params,
        options=SolveOptions(**opt_kwargs),
    )
    try:
        pf.build_problem()  # validate expressions, substitutions, problem shape
    except ProblemFileError:
        raise
    except (TsvarError, ValueError) as exc:
        raise ProblemFileError(str(exc)) from exc
    return pf


# -- output writers -----------------------------------------------------------


def _solution_rows(sol: Solution) -> list[list[str]]:
    ts = sol.x.scale
    n = ts.n
    el = sol.report.el_residuals
    rows = []
    for i in range(n):
        rows.append([
            _fmt(float(ts.points[i])),
            _fmt(float(sol.x.values[i])),
            _fmt(float(sol.u.values[i])) if sol.u is not None else "",
            _fmt(float(sol.lam.values[i])) if sol.lam is not None else "",
            _fmt(float(el[i])) if el is not None and i < len(el) else "",
        ])
    return rows


def write_solution_csv(path: Path, sol: Solution) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(["t", "x", "u", "lambda_sigma", "el_residual"])
        writer.writerows(_solution_rows(sol))


def _grid_list(g: GridFunction | None):
    if g is None:
        return None
    return [None if math.isnan(v) else float(v) for v in g.values]


def solution_to_dict(sol: Solution, problem_type: str) -> dict:
    return {
        "problem_type": problem_type,
        "converged": sol.converged,
        "iterations": sol.iterations,
        "objective": sol.objective_value,
        "sufficiency": {
            "status": sol.verdict.status,
            "reason": sol.verdict.reason,
        },
        "grids": {
            "t": [float(t) for t in sol.x.scale.points],
            "x": [float(v) for v in sol.x.values],
            "u": _grid_list(sol.u),
            "lambda_sigma": _grid_list(sol.lam),
        },
        "residuals": sol.report.to_dict(),
        "message": sol.message,
    }


def write_solution_json(path: Path, sol: Solution, problem_type: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(solution_to_dict(sol, problem_type), fh, indent=2)
        fh.write("\n")


# -- commands ------------------------------------------------------------------


def cmd_solve(args) -> int:
    pf = load_problem_file(args.file)
    problem = pf.build_problem()
    if pf.problem_type == "control":
        sol = solve_control(problem, pf.options)
    else:
        sol = solve_variational(problem, pf.options)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_solution_csv(out_dir / "solution.csv", sol)
    write_solution_json(out_dir / "solution.json", sol, pf.problem_type)
    print(f"objective      {sol.objective_value:.12g}")
    print(f"residual sup   {sol.report.sup_norm:.6e}")
    if sol.verdict.sufficient:
        print("sufficiency    sufficient (extremal is a global minimizer)")
    else:
        print(f"sufficiency    inconclusive ({sol.verdict.reason})")
    print(f"converged      {sol.converged} after {sol.iterations} iterations")
    return 0 if sol.converged else 2


def _read_candidate(path: Path, scale: TimeScale):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "t" not in reader.fieldnames or "x" not in reader.fieldnames:
            raise ProblemFileError(f"candidate {path} needs at least columns t and x")
        rows = list(reader)
    if len(rows) != scale.n:
        raise ProblemFileError(
            f"candidate has {len(rows)} rows but the scale has {scale.n} points"
        )

    def column(name):
        if name not in rows[0]:
            return None
        vals = [row[name].strip() for row in rows]
        if all(v == "" for v in vals):
            return None
        return np.asarray([float(v) if v else math.nan for v in vals])

    t = column("t")
    if t is None or column("x") is None:
        raise ProblemFileError(f"candidate {path} has empty t or x columns")
    for i, tv in enumerate(t):
        if abs(tv - scale.points[i]) > 1e-9 * max(1.0, abs(scale.points[i])):
            raise ProblemFileError(
                f"candidate time column mismatches the scale at row {i}: "
                f"{tv!r} vs {scale.points[i]!r}"
            )
    return column("x"), column("u"), column("lambda_sigma")


def cmd_verify(args) -> int:
    pf = load_problem_file(args.file)
    problem = pf.build_problem()
    xv, uv, lv = _read_candidate(Path(args.candidate), pf.scale)
    x = GridFunction(pf.scale, xv)
    try:
        if pf.problem_type == "control":
            if uv is None:
                raise ProblemFileError("control problems need a u column in the candidate")
            u = GridFunction(pf.scale, uv)
            if lv is None:
                # canonical multipliers for the candidate: backward costate solve
                from .solver import _recover_costate

                lam_arr = _recover_costate(problem, xv, uv, float(xv[-1]))
                lv = np.append(lam_arr, math.nan)
            lam = GridFunction(pf.scale, lv)
            report = hamiltonian_residuals(problem, x, u, lam)
        else:
            report = variational_residuals(problem, x)
    except AdmissibilityError as exc:
        print(f"verdict: FAIL ({exc})")
        return 3
    print(report.to_table())
    ok = report.sup_norm < args.tolerance
    print(f"verdict: {'PASS' if ok else 'FAIL'} "
          f"(sup {report.sup_norm:.6e} vs tolerance {args.tolerance:g})")
    return 0 if ok else 3


def cmd_sweep(args) -> int:
    pf = load_problem_file(args.file)
    if args.param not in pf.params:
        raise ProblemFileError(
            f"unknown parameter {args.param!r}; file declares {sorted(pf.params)}"
        )
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ProblemFileError(f"bad values list {args.values!r}") from None
    rows = sweep(
        lambda v: pf.build_problem({args.param: v}), values, pf.options
    )
    lines = ["value,slope,endpoint,objective,converged"]
    for row in rows:
        lines.append(
            f"{_fmt(row.value)},{_fmt(row.slope)},{_fmt(row.endpoint)},"
            f"{_fmt(row.objective)},{str(row.converged).lower()}"
        )
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0 if all(r.converged for r in rows) else 2


def cmd_integrate(args) -> int:
    pf = load_problem_file(args.file)
    e = ex.parse(args.expr)
    extra = ex.variables(e) - {"t"}
    if extra:
        raise ProblemFileError(
            f"integrand may only use the variable t; found {sorted(extra)}"
        )
    fn = ex.compile_fn(e)
    g = GridFunction(pf.scale, [fn(float(t)) for t in pf.scale.points])
    value = g.delta_integral(0, pf.scale.n - 1)
    print(_FMT % value)
    return 0


def cmd_info(args) -> int:
    pf = load_problem_file(args.file)
    ts = pf.scale
    print(f"{'t':>16s} {'sigma':>16s} {'rho':>16s} {'mu':>16s}  class")
    for i in range(ts.n):
        if i == ts.n - 1:
            kind = "maximum"
        elif ts.dense_mask[i]:
            kind = "right-dense sample"
        else:
            kind = "right-scattered"
        print(
            f"{ts.points[i]:16.8g} {ts.points[ts.sigma(i)]:16.8g} "
            f"{ts.points[ts.rho(i)]:16.8g} {ts.mu(i):16.8g}  {kind}"
        )
    print(f"points: {ts.n}   regular: {ts.is_regular()}")
    return 0


# -- entry point ----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to exit code 1, not argparse's 2
        raise ProblemFileError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tsvar", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve the problem in FILE")
    p_solve.add_argument("file")
    p_solve.add_argument("--out-dir", default=".", help="directory for solution.csv/json")
    p_solve.set_defaults(fn=cmd_solve)

    p_verify = sub.add_parser("verify", help="evaluate residuals of a candidate CSV")
    p_verify.add_argument("file")
    p_verify.add_argument("candidate")
    p_verify.add_argument("--tolerance", type=float, default=1e-6)
    p_verify.set_defaults(fn=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="re-solve for each parameter value")
    p_sweep.add_argument("file")
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated list")
    p_sweep.add_argument("--out", default=None, help="also write the CSV table here")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_int = sub.add_parser("integrate", help="delta integral of an expression in t")
    p_int.add_argument("file")
    p_int.add_argument("--expr", required=True)
    p_int.set_defaults(fn=cmd_integrate)

    p_info = sub.add_parser("info", help="print the scale's operator table")
    p_info.add_argument("file")
    p_info.set_defaults(fn=cmd_info)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except TsvarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())
