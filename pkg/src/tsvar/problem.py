"""Free end-point variational and optimal-control problems on a time scale.

Both problem classes fix the initial value ``x(a) = alpha`` and leave the end
value ``x(T)`` free; the integrand may depend on that free end value through
the ``z`` variable.  The integrand is always evaluated at the sigma-shifted
state, ``f(t, x(sigma(t)), x_delta(t), x(T))``, exactly as the delta-integral
objective dictates; modelling against the left state value is an off-by-one
error on discrete scales.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import AdmissibilityError, DynamicsViolationError
from .timescale import GridFunction, TimeScale, require_same_scale

__all__ = ["VariationalProblem", "ControlProblem", "objective", "objective_control", "norm1"]

_INIT_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class VariationalProblem:
    """Minimize the delta integral of ``f(t, x, v, z)`` over ``[a, T)``.

    ``x`` is the sigma-shifted state, ``v`` its delta derivative and ``z``
    the free end value ``x(T)``.
    """

    scale: TimeScale
    f: ex.Expr
    alpha: float

    def __post_init__(self):
        if self.scale.n < 3:
            raise ValueError("variational problems need at least three scale points")
        bad = ex.variables(self.f) - {"t", "x", "v", "z"}
        if bad:
            raise ValueError(f"integrand may only use t, x, v, z; found {sorted(bad)}")


@dataclass(frozen=True, eq=False)
class ControlProblem:
    """Minimize the delta integral of ``f(t, x, u, z)`` subject to dynamics ``g``.

    The state satisfies ``x_delta(t) = g(t, x(sigma(t)), u(sigma(t)), x(T))``;
    choosing ``g = u`` recovers the variational problem.  Control grids store
    sigma-shifted samples: ``u.values[i]`` is ``u(sigma(t_i))``.
    """

    scale: TimeScale
    f: ex.Expr
    g: ex.Expr
    alpha: float

    def __post_init__(self):
        if self.scale.n < 3:
            raise ValueError("control problems need at least three scale points")
        for name, e in (("running cost", self.f), ("dynamics", self.g)):
            bad = ex.variables(e) - {"t", "x", "u", "z"}
            if bad:
                raise ValueError(f"{name} may only use t, x, u, z; found {sorted(bad)}")

    @classmethod
    def from_variational(cls, p: VariationalProblem) -> "ControlProblem":
        """Equivalent control form: rename ``v`` to ``u`` and set ``g = u``."""
        return cls(p.scale, ex.substitute(p.f, "v", ex.Var("u")), ex.Var("u"), p.alpha)


def _check_admissible(p, x: GridFunction) -> None:
    if not x.scale.matches(p.scale):
        raise AdmissibilityError("candidate lives on a different time scale")
    if abs(x.values[0] - p.alpha) > _INIT_RTOL * max(1.0, abs(p.alpha)):
        raise AdmissibilityError(
            f"candidate violates the initial condition: x(a) = {x.values[0]!r}, "
            f"expected {p.alpha!r}"
        )


def objective(p: VariationalProblem, x: GridFunction) -> float:
    """Delta-integral value of the Lagrangian along an admissible candidate."""
    _check_admissible(p, x)
    f = ex.compile_fn(p.f)
    ts = p.scale
    pts, mu, xv = ts.points, ts.mu_values, x.values
    z = float(xv[-1])
    return math.fsum(
        mu[i] * f(pts[i], xv[i + 1], (xv[i + 1] - xv[i]) / mu[i], z)
        for i in range(ts.n - 1)
    )


def objective_control(
    p: ControlProblem,
    x: GridFunction,
    u: GridFunction,
    *,
    dynamics_atol: float = 1e-9,
    dynamics_htol: float = 1.0,
) -> float:
    """Delta-integral running cost of a state/control pair.

    The pair must satisfy the discrete dynamics at every differentiation
    point.  Points sampling a dense interval get extra slack
    ``dynamics_htol * mu(t)``, since a trajectory transcribed from a
    continuum solution carries an O(mu) residual there; on genuinely
    discrete points only ``dynamics_atol`` applies.
    """
    _check_admissible(p, x)
    require_same_scale(x, u, "state and control")
    g = ex.compile_fn(p.g)
    f = ex.compile_fn(p.f)
    ts = p.scale
    pts, mu, xv, uv = ts.points, ts.mu_values, x.values, u.values
    dense = ts.dense_mask
    z = float(xv[-1])
    worst_i, worst = 0, 0.0
    for i in range(ts.n - 1):
        res = (xv[i + 1] - xv[i]) / mu[i] - g(pts[i], xv[i + 1], 0.0, z, uv[i])
        slack = dynamics_atol + (dynamics_htol * mu[i] if dense[i] else 0.0)
        if abs(res) > slack and abs(res) > worst:
            worst_i, worst = i, abs(res)
    if worst > 0.0:
        raise DynamicsViolationError(
            f"dynamics violated: worst residual {worst:.3e} at t = {pts[worst_i]!r}"
        )
    return math.fsum(
        mu[i] * f(pts[i], xv[i + 1], 0.0, z, uv[i]) for i in range(ts.n - 1)
    )


def norm1(x: GridFunction, ref: GridFunction) -> float:
    """C1-style distance: sup of sigma-shifted values plus sup of delta derivatives.

    Both sups are taken of the difference ``x - ref``; the first ranges over
    the sigma image of the scale, the second over the differentiation domain.
    """
    require_same_scale(x, ref)
    d = x.values - ref.values
    sup_sigma = float(np.max(np.abs(d[1:])))
    sup_delta = float(np.max(np.abs(np.diff(d) / np.diff(x.scale.points))))
    return sup_sigma + sup_delta
