"""Direct solvers for the free end-point problems, plus the exact oracle.

``solve_variational`` minimizes over the grid values with an analytic
gradient whose interior coordinates are scaled Euler-Lagrange residuals and
whose end coordinate is exactly the transversality expression: the first
variation couples every point into the free end value through the
``z``-partial, and the boundary condition emerges as a first-order condition
rather than being imposed.

``solve_control`` reduces to the control samples: the state grid is rebuilt
by forward propagation (implicit in the sigma-shifted state), the end value
is closed by a scalar consistency solve, and the gradient comes from the
discrete adjoint, whose multipliers are precisely the sigma-shifted costate
samples of the Hamiltonian system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from .conditions import (
    ResidualReport,
    SufficiencyVerdict,
    hamiltonian_residuals,
    sufficiency_check,
    sufficiency_check_variational,
    variational_residuals,
)
from .errors import OracleError, SingularJacobianError, SolveError
from .problem import ControlProblem, VariationalProblem, objective, objective_control
from .timescale import GridFunction

__all__ = [
    "SolveOptions", "Solution", "SweepRow",
    "solve_variational", "solve_control", "solve_stationarity",
    "brute_force_oracle", "sweep",
]

_DOMAIN_ERRORS = (ValueError, ZeroDivisionError, OverflowError)
_ARMIJO = 1e-4


@dataclass(frozen=True)
class SolveOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-9
    step_tolerance: float = 1e-12
    finite_difference_step: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        for name in ("gradient_tolerance", "step_tolerance", "finite_difference_step"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True, eq=False)
class Solution:
    """Solver output; the report is recomputed from the returned grids."""

    x: GridFunction
    u: GridFunction | None
    lam: GridFunction | None
    objective_value: float
    report: ResidualReport
    verdict: SufficiencyVerdict
    converged: bool
    iterations: int
    message: str = ""

    @property
    def slope(self) -> float:
        """Mean slope ``(x(T) - x(a)) / (T - a)``."""
        ts = self.x.scale
        return float((self.x.values[-1] - self.x.values[0]) / (ts.b - ts.a))


# -- quasi-Newton core -------------------------------------------------------


def _bfgs(
    value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    y0: np.ndarray,
    opts: SolveOptions,
    on_accept: Callable[[np.ndarray, float], None] | None = None,
) -> tuple[np.ndarray, float, np.ndarray, bool, int]:
    """BFGS with Armijo backtracking (halving steps).

    Domain errors during the line search shrink the step instead of failing;
    a domain error at the starting point is a hard error.
    """
    y = np.asarray(y0, dtype=float).copy()
    try:
        J, g = value_and_grad(y)
    except _DOMAIN_ERRORS as exc:
        raise SolveError(f"objective undefined at the starting point: {exc}") from exc
    m = y.size
    H = np.eye(m)
    scaled = False
    iters = 0
    for iters in range(1, opts.max_iterations + 1):
        if np.max(np.abs(g)) < opts.gradient_tolerance:
            return y, J, g, True, iters - 1
        d = -H @ g
        gd = float(g @ d)
        if gd >= 0.0:  # H lost positive definiteness; restart from steepest descent
            H = np.eye(m)
            d = -g
            gd = float(g @ d)
        step = 1.0
        accepted = False
        # the epsilon term keeps the test meaningful once the predicted
        # decrease drops below the rounding of J itself
        slack = 4.0 * np.finfo(float).eps * (1.0 + abs(J))
        while step * np.max(np.abs(d)) >= opts.step_tolerance:
            try:
                Jn, gn = value_and_grad(y + step * d)
            except _DOMAIN_ERRORS:
                step *= 0.5
                continue
            if Jn <= J + _ARMIJO * step * gd + slack:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        s = step * d
        yk = gn - g
        y = y + s
        if on_accept is not None:
            on_accept(y.copy(), Jn)
        J, g = Jn, gn
        sy = float(s @ yk)
        if sy > 1e-12 * (np.linalg.norm(s) * np.linalg.norm(yk) + 1e-300):
            if not scaled:
                H *= sy / float(yk @ yk)
                scaled = True
            Hy = H @ yk
            H += (
                np.outer(s, s) * ((sy + float(yk @ Hy)) / sy**2)
                - (np.outer(Hy, s) + np.outer(s, Hy)) / sy
            )
    return y, J, g, bool(np.max(np.abs(g)) < opts.gradient_tolerance), iters


def _minimize_with_restarts(
    value_and_grad, y0, opts, on_accept=None, restarts: int = 2
):
    y, J, g, ok, iters = _bfgs(value_and_grad, y0, opts, on_accept)
    best = (y, J, g, ok, iters)
    rng = np.random.default_rng(opts.seed)
    attempt = 0
    while not best[3] and attempt < restarts:
        attempt += 1
        y1 = best[0] + 0.1 * (1.0 + np.abs(best[0])) * rng.standard_normal(best[0].size)
        try:
            y, J, g, ok, iters = _bfgs(value_and_grad, y1, opts, on_accept)
        except SolveError:
            continue
        if ok or J < best[1]:
            best = (y, J, g, ok, iters)
    return best


# -- variational solve --------------------------------------------------------


def _variational_value_and_grad(p: VariationalProblem):
    """Objective and analytic gradient over the free values ``x[1:]``.

    The gradient's end coordinate accumulates the ``z``-partial of every
    integrand term, so it equals the transversality expression; interior
    coordinates are graininess-scaled Euler-Lagrange residuals.
    """
    f = ex.compile_fn(p.f)
    fx = ex.compile_fn(ex.diff(p.f, "x"))
    fv = ex.compile_fn(ex.diff(p.f, "v"))
    fz = ex.compile_fn(ex.diff(p.f, "z"))
    ts = p.scale
    pts, mu = ts.points, ts.mu_values
    n = ts.n
    alpha = p.alpha

    def value_and_grad(y: np.ndarray) -> tuple[float, np.ndarray]:
        xv = np.empty(n)
        xv[0] = alpha
        xv[1:] = y
        z = xv[-1]
        terms = np.empty(n - 1)
        grad = np.zeros(n - 1)
        fz_sum = 0.0
        for i in range(n - 1):
            vi = (xv[i + 1] - xv[i]) / mu[i]
            args = (pts[i], xv[i + 1], vi, z)
            terms[i] = mu[i] * f(*args)
            fvi = fv(*args)
            # term i touches x_{i+1} (slot and slope), x_i (slope only), and z
            grad[i] += mu[i] * fx(*args) + fvi
            if i >= 1:
                grad[i - 1] -= fvi
            fz_sum += mu[i] * fz(*args)
        grad[n - 2] += fz_sum
        return math.fsum(terms), grad

    return value_and_grad


def solve_variational(
    p: VariationalProblem,
    opts: SolveOptions | None = None,
    x0: GridFunction | None = None,
    on_accept: Callable[[np.ndarray, float], None] | None = None,
) -> Solution:
    """Direct minimization over all grid values except the fixed initial one."""
    opts = opts or SolveOptions()
    if x0 is None:
        y0 = np.full(p.scale.n - 1, p.alpha)
    else:
        y0 = np.asarray(x0.values[1:], dtype=float)
    fun = _variational_value_and_grad(p)
    y, J, g, ok, iters = _minimize_with_restarts(fun, y0, opts, on_accept)
    xv = np.concatenate(([p.alpha], y))
    x = GridFunction(p.scale, xv)
    report = variational_residuals(p, x)
    verdict = sufficiency_check_variational(p, seed=opts.seed)
    return Solution(
        x=x, u=None, lam=None,
        objective_value=objective(p, x),
        report=report, verdict=verdict,
        converged=ok, iterations=iters,
        message="" if ok else "gradient tolerance not reached",
    )


def _variational_residual_system(p: VariationalProblem):
    """Square nonlinear system: interior Euler-Lagrange rows + transversality."""
    fx = ex.compile_fn(ex.diff(p.f, "x"))
    fv = ex.compile_fn(ex.diff(p.f, "v"))
    fz = ex.compile_fn(ex.diff(p.f, "z"))
    ts = p.scale
    pts, mu = ts.points, ts.mu_values
    n = ts.n
    alpha = p.alpha

    def residuals(y: np.ndarray) -> np.ndarray:
        xv = np.empty(n)
        xv[0] = alpha
        xv[1:] = y
        z = xv[-1]
        phi = np.empty(n - 1)
        fxv = np.empty(n - 1)
        fz_sum = 0.0
        for i in range(n - 1):
            vi = (xv[i + 1] - xv[i]) / mu[i]
            args = (pts[i], xv[i + 1], vi, z)
            phi[i] = fv(*args)
            fxv[i] = fx(*args)
            fz_sum += mu[i] * fz(*args)
        out = np.empty(n - 1)
        for i in range(n - 2):
            out[i] = (phi[i + 1] - phi[i]) / mu[i] - fxv[i]
        out[n - 2] = phi[n - 2] + mu[n - 2] * fxv[n - 2] + fz_sum
        return out

    return residuals


def solve_stationarity(
    p: VariationalProblem,
    opts: SolveOptions | None = None,
    x0: GridFunction | None = None,
) -> Solution:
    """Damped Newton iteration on the joint stationarity system."""
    opts = opts or SolveOptions()
    if x0 is None:
        y = np.full(p.scale.n - 1, p.alpha)
    else:
        y = np.asarray(x0.values[1:], dtype=float)
    F = _variational_residual_system(p)
    n_eq = y.size
    iters = 0
    Fy = F(y)
    while iters < opts.max_iterations and np.max(np.abs(Fy)) >= opts.gradient_tolerance:
        iters += 1
        jac = np.empty((n_eq, n_eq))
        for j in range(n_eq):
            h = opts.finite_difference_step * max(1.0, abs(y[j]))
            yp = y.copy()
            yp[j] += h
            jac[:, j] = (F(yp) - Fy) / h
        cond = float(np.linalg.cond(jac))
        try:
            d = np.linalg.solve(jac, -Fy)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(
                f"singular Jacobian in Newton iteration (cond ~ {cond:.2e})"
            ) from exc
        if not np.all(np.isfinite(d)) or cond > 1e15:
            raise SingularJacobianError(
                f"singular Jacobian in Newton iteration (cond ~ {cond:.2e})"
            )
        step = 1.0
        accepted = False
        base = np.max(np.abs(Fy))
        while step * np.max(np.abs(d)) >= opts.step_tolerance:
            try:
                Fn = F(y + step * d)
            except _DOMAIN_ERRORS:
                step *= 0.5
                continue
            sup_n = np.max(np.abs(Fn))
            if sup_n < (1.0 - _ARMIJO * step) * base or sup_n < opts.gradient_tolerance:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        y = y + step * d
        Fy = Fn
    ok = bool(np.max(np.abs(Fy)) < opts.gradient_tolerance)
    xv = np.concatenate(([p.alpha], y))
    x = GridFunction(p.scale, xv)
    return Solution(
        x=x, u=None, lam=None,
        objective_value=objective(p, x),
        report=variational_residuals(p, x),
        verdict=sufficiency_check_variational(p, seed=opts.seed),
        converged=ok, iterations=iters,
        message="" if ok else "stationarity residual tolerance not reached",
    )


# -- control solve -------------------------------------------------------------


def _propagate_state(
    p: ControlProblem, u: np.ndarray, zeta: float, *, max_iter: int = 50, tol: float = 1e-12
) -> np.ndarray:
    """Forward state propagation; each step is implicit in the shifted state."""
    g = ex.compile_fn(p.g)
    gx = ex.diff(p.g, "x")
    explicit = isinstance(gx, ex.Const) and gx.value == 0.0
    ts = p.scale
    pts, mu = ts.points, ts.mu_values
    n = ts.n
    x = np.empty(n)
    x[0] = p.alpha
    for i in range(n - 1):
        if explicit:
            x[i + 1] = x[i] + mu[i] * g(pts[i], 0.0, 0.0, zeta, u[i])
            continue
        xi1 = x[i]
        for _ in range(max_iter):
            new = x[i] + mu[i] * g(pts[i], xi1, 0.0, zeta, u[i])
            if abs(new - xi1) <= tol * max(1.0, abs(new)):
                xi1 = new
                break
            xi1 = new
        else:
            raise SolveError(
                f"implicit state step did not converge at t = {pts[i]!r}"
            )
        x[i + 1] = xi1
    return x


def _consistent_state(
    p: ControlProblem, u: np.ndarray, *, max_outer: int = 50, tol: float = 1e-12
) -> tuple[np.ndarray, float]:
    """Close the end value: find ``zeta`` with ``x(T; u, zeta) = zeta``.

    An affine probe solves linear couplings in one shot; otherwise secant
    iteration on the scalar mismatch.
    """
    x0 = _propagate_state(p, u, 0.0)
    x1 = _propagate_state(p, u, 1.0)
    q = x1[-1] - x0[-1]
    if abs(1.0 - q) > 1e-13:
        zeta = x0[-1] / (1.0 - q)
        x = _propagate_state(p, u, zeta)
        if abs(x[-1] - zeta) <= tol * max(1.0, abs(zeta)):
            return x, float(zeta)
        za, fa = 1.0, float(x1[-1] - 1.0)
        zb, fb = float(zeta), float(x[-1] - zeta)
    else:
        za, fa = 0.0, float(x0[-1])
        zb, fb = 1.0, float(x1[-1] - 1.0)
        x = x1
    # secant iteration for end-value couplings that are not affine
    for _ in range(max_outer):
        if abs(fb) <= tol * max(1.0, abs(zb)):
            return x, zb
        if fb == fa:
            raise SolveError("end-value consistency iteration stalled")
        zn = zb - fb * (zb - za) / (fb - fa)
        za, fa = zb, fb
        zb = zn
        x = _propagate_state(p, u, zb)
        fb = x[-1] - zb
    raise SolveError("end-value consistency did not converge")


def _recover_costate(
    p: ControlProblem, x: np.ndarray, u: np.ndarray, zeta: float
) -> np.ndarray:
    """Sigma-shifted multiplier samples solving the costate recurrence plus
    the transversality equation.

    Both are affine in the multiplier, so two backward sweeps (end sample 0
    and 1) determine the exact solution.
    """
    fx = ex.compile_fn(ex.diff(p.f, "x"))
    fz = ex.compile_fn(ex.diff(p.f, "z"))
    gx = ex.compile_fn(ex.diff(p.g, "x"))
    gz = ex.compile_fn(ex.diff(p.g, "z"))
    ts = p.scale
    pts, mu = ts.points, ts.mu_values
    n = ts.n
    k = n - 2

    def sweep(lam_end: float) -> tuple[np.ndarray, float]:
        lam = np.empty(n - 1)
        lam[k] = lam_end
        for i in range(k - 1, -1, -1):
            args = (pts[i], x[i + 1], 0.0, zeta, u[i])
            denom = 1.0 - mu[i] * gx(*args)
            if abs(denom) < 1e-13:
                raise SolveError(
                    f"costate recurrence singular at t = {pts[i]!r}"
                )
            lam[i] = (lam[i + 1] + mu[i] * fx(*args)) / denom
        args_k = (pts[k], x[k + 1], 0.0, zeta, u[k])
        rhs = mu[k] * (fx(*args_k) + lam[k] * gx(*args_k)) + math.fsum(
            mu[i] * (fz(pts[i], x[i + 1], 0.0, zeta, u[i])
                     + lam[i] * gz(pts[i], x[i + 1], 0.0, zeta, u[i]))
            for i in range(n - 1)
        )
        return lam, rhs

    lam0, r0 = sweep(0.0)
    lam1, r1 = sweep(1.0)
    slope = r1 - r0
    if abs(1.0 - slope) < 1e-12:
        raise SolveError("multiplier transversality equation is degenerate")
    lam_end = r0 / (1.0 - slope)
    return lam0 + lam_end * (lam1 - lam0)


def _control_value_and_grad(p: ControlProblem):
    f = ex.compile_fn(p.f)
    fu = ex.compile_fn(ex.diff(p.f, "u"))
    gu = ex.compile_fn(ex.diff(p.g, "u"))
    ts = p.scale
    pts, mu = ts.points, ts.mu_values
    n = ts.n

    def value_and_grad(u: np.ndarray) -> tuple[float, np.ndarray]:
        x, zeta = _consistent_state(p, u)
        J = math.fsum(
            mu[i] * f(pts[i], x[i + 1], 0.0, zeta, u[i]) for i in range(n - 1)
        )
        lam = _recover_costate(p, x, u, zeta)
        grad = np.empty(n - 1)
        for i in range(n - 1):
            args = (pts[i], x[i + 1], 0.0, zeta, u[i])
            grad[i] = mu[i] * (fu(*args) + lam[i] * gu(*args))
        return J, grad

    return value_and_grad


def solve_control(
    p: ControlProblem,
    opts: SolveOptions | None = None,
    u0: GridFunction | None = None,
    on_accept: Callable[[np.ndarray, float], None] | None = None,
) -> Solution:
    """Reduced-space minimization over the shifted control samples.

    The multiplier recursion used for the gradient is the discrete adjoint of
    the propagated state including its end-value coupling, so the vanishing
    gradient is exactly the Hamiltonian stationarity condition.
    """
    opts = opts or SolveOptions()
    n = p.scale.n
    if u0 is None:
        w0 = np.zeros(n - 1)
    else:
        w0 = np.asarray(u0.values[: n - 1], dtype=float)
    fun = _control_value_and_grad(p)
    w, J, g, ok, iters = _minimize_with_restarts(fun, w0, opts, on_accept)
    x_arr, zeta = _consistent_state(p, w)
    lam_arr = _recover_costate(p, x_arr, w, zeta)
    x = GridFunction(p.scale, x_arr)
    u = GridFunction(p.scale, np.append(w, np.nan))
    lam = GridFunction(p.scale, np.append(lam_arr, np.nan))
    return Solution(
        x=x, u=u, lam=lam,
        objective_value=objective_control(p, x, u),
        report=hamiltonian_residuals(p, x, u, lam),
        verdict=sufficiency_check(p, seed=opts.seed),
        converged=ok, iterations=iters,
        message="" if ok else "gradient tolerance not reached",
    )


# -- brute-force oracle ---------------------------------------------------------


def _is_quadratic(e: ex.Expr, names: tuple[str, ...]) -> bool:
    """All second partials over ``names`` are functions of ``t`` alone."""
    for a in names:
        for b in names:
            dd = ex.diff(ex.diff(e, a), b)
            if ex.variables(dd) - {"t"}:
                return False
    return True


def _polarize_quadratic(fun, m: int):
    """Exact quadratic model ``1/2 w'Aw + b'w + c`` from function values."""
    c = fun(np.zeros(m))
    A = np.empty((m, m))
    b = np.empty(m)
    plus = np.empty(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        plus[i] = fun(e)
        minus = fun(-e)
        b[i] = 0.5 * (plus[i] - minus)
        A[i, i] = plus[i] + minus - 2.0 * c
    for i in range(m):
        for j in range(i + 1, m):
            e = np.zeros(m)
            e[i] = 1.0
            e[j] = 1.0
            A[i, j] = A[j, i] = fun(e) - plus[i] - plus[j] + c
    return A, b, c


def _oracle_variational(p: VariationalProblem) -> np.ndarray:
    fun = _variational_value_and_grad(p)
    m = p.scale.n - 1

    def value(y):
        return fun(y)[0]

    A, b, _ = _polarize_quadratic(value, m)
    eig = np.linalg.eigvalsh(0.5 * (A + A.T))
    if eig[0] <= 1e-10 * max(1.0, abs(eig[-1])):
        raise OracleError("stationary system is not positive definite; no unique minimizer")
    return np.linalg.solve(A, -b)


def _oracle_control(p: ControlProblem) -> tuple[np.ndarray, float]:
    m = p.scale.n  # controls plus the end value
    f = ex.compile_fn(p.f)
    pts, mu = p.scale.points, p.scale.mu_values

    def value(w):
        u, zeta = w[:-1], float(w[-1])
        x = _propagate_state(p, u, zeta)
        return math.fsum(
            mu[i] * f(pts[i], x[i + 1], 0.0, zeta, u[i]) for i in range(p.scale.n - 1)
        )

    def constraint(w):
        u, zeta = w[:-1], float(w[-1])
        x = _propagate_state(p, u, zeta)
        return x[-1] - zeta

    A, b, _ = _polarize_quadratic(value, m)
    c0 = constraint(np.zeros(m))
    a = np.empty(m)
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        a[i] = constraint(e) - c0
    kkt = np.zeros((m + 1, m + 1))
    kkt[:m, :m] = A
    kkt[:m, m] = a
    kkt[m, :m] = a
    rhs = np.concatenate((-b, [-c0]))
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError as exc:
        raise OracleError("degenerate stationarity system") from exc
    return sol[: m - 1], float(sol[m - 1])


def _grid_search(value, m: int, box: tuple[float, float]) -> np.ndarray:
    """Nested refinement search; slow, for small non-quadratic problems."""
    lo = np.full(m, box[0])
    hi = np.full(m, box[1])
    pts_per_dim = 5
    best = None
    while np.max(hi - lo) > 1e-6:
        axes = [np.linspace(lo[d], hi[d], pts_per_dim) for d in range(m)]
        grids = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        vals = np.array([value(w) for w in coords])
        best = coords[int(np.argmin(vals))]
        width = (hi - lo) * 0.25
        lo = best - width
        hi = best + width
    return best


def brute_force_oracle(
    p: VariationalProblem | ControlProblem,
    *,
    allow_grid_search: bool = False,
    box: tuple[float, float] = (-4.0, 4.0),
) -> Solution:
    """Independent reference solve for small problems.

    Quadratic problems (total degree at most two in the state/control/end
    variables) are solved exactly: the objective is recovered by polarization
    from function values alone and the linear stationarity (or KKT) system is
    eliminated directly.  Anything else needs ``allow_grid_search``.
    """
    if p.scale.n > 8:
        raise OracleError("oracle supports at most 8 scale points")
    if isinstance(p, VariationalProblem):
        quad = _is_quadratic(p.f, ("x", "v", "z"))
        if quad:
            y = _oracle_variational(p)
        elif allow_grid_search:
            fun = _variational_value_and_grad(p)
            y = _grid_search(lambda w: fun(w)[0], p.scale.n - 1, box)
        else:
            raise OracleError("non-quadratic problem; pass allow_grid_search=True")
        x = GridFunction(p.scale, np.concatenate(([p.alpha], y)))
        return Solution(
            x=x, u=None, lam=None,
            objective_value=objective(p, x),
            report=variational_residuals(p, x),
            verdict=sufficiency_check_variational(p),
            converged=True, iterations=0, message="oracle",
        )
    if not isinstance(p, ControlProblem):
        raise OracleError(f"unsupported problem type {type(p).__name__}")
    quad = _is_quadratic(p.f, ("x", "u", "z")) and _is_affine_dynamics(p)
    if quad:
        w, zeta = _oracle_control(p)
    elif allow_grid_search:
        fun = _control_value_and_grad(p)
        w = _grid_search(lambda v: fun(v)[0], p.scale.n - 1, box)
        _, zeta = _consistent_state(p, w)
    else:
        raise OracleError(
            "oracle needs a quadratic cost and affine dynamics; "
            "pass allow_grid_search=True otherwise"
        )
    x_arr = _propagate_state(p, w, zeta)
    lam_arr = _recover_costate(p, x_arr, w, zeta)
    x = GridFunction(p.scale, x_arr)
    u = GridFunction(p.scale, np.append(w, np.nan))
    lam = GridFunction(p.scale, np.append(lam_arr, np.nan))
    return Solution(
        x=x, u=u, lam=lam,
        objective_value=objective_control(p, x, u),
        report=hamiltonian_residuals(p, x, u, lam),
        verdict=sufficiency_check(p),
        converged=True, iterations=0, message="oracle",
    )


def _is_affine_dynamics(p: ControlProblem) -> bool:
    for a in ("x", "u", "z"):
        for b in ("x", "u", "z"):
            dd = ex.diff(ex.diff(p.g, a), b)
            if not (isinstance(dd, ex.Const) and dd.value == 0.0):
                return False
    return True


# -- parameter sweep -------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    value: float
    slope: float
    endpoint: float
    objective: float
    converged: bool


def sweep(
    problem_factory: Callable[[float], VariationalProblem | ControlProblem],
    values: Sequence[float],
    opts: SolveOptions | None = None,
    warm_start: bool = True,
) -> list[SweepRow]:
    """One solve per parameter value, in input order, warm-starting each solve
    from the previous solution when the scales match."""
    opts = opts or SolveOptions()
    rows: list[SweepRow] = []
    prev: Solution | None = None
    for val in values:
        try:
            prob = problem_factory(float(val))
            if isinstance(prob, ControlProblem):
                u0 = prev.u if (warm_start and prev is not None and prev.u is not None
                                and prev.u.scale.matches(prob.scale)) else None
                sol = solve_control(prob, opts, u0=u0)
            else:
                x0 = prev.x if (warm_start and prev is not None
                                and prev.x.scale.matches(prob.scale)) else None
                sol = solve_variational(prob, opts, x0=x0)
        except Exception:
            rows.append(SweepRow(float(val), math.nan, math.nan, math.nan, False))
            prev = None
            continue
        rows.append(
            SweepRow(float(val), sol.slope, float(sol.x.values[-1]),
                     sol.objective_value, sol.converged)
        )
        prev = sol
    return rows
