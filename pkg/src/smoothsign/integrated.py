"""SSA for integrated input (I(1) and I(2)).

The predictor ``b_x`` tracks an MSE benchmark ``gamma_mse`` for a level series
whose ``d``-th differences follow an ARMA model.  The filter error is kept
stationary by linear restrictions on ``b_x`` (equal coefficient sum, and for
``d = 2`` also equal first moment), which are built into the parametrization

    b_x = b_0 + B @ b_tilde.

Among such filters we minimize the error variance subject to a prescribed
lag-one autocorrelation of the ``d``-th differences of the output.  For fixed
multiplier ``lt`` the stationarity conditions are linear in ``b_tilde``; the
multiplier is located by a scan and Brent refinement.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import brentq

from .errors import DomainError, InfeasibleConstraintError, InvalidDimensionError
from .spectral import acf1, build_m
from .ssa_core import ht_from_rho
from .stationary_ext import ProcessModel, mse_predictor_dependent, wold_matrix, wold_weights
from .targets import TargetSpec

__all__ = [
    "IntegratedConfig",
    "IntegratedSolution",
    "sigma_delta_matrices",
    "b_matrix",
    "offset_vector",
    "integrate_coefficients",
    "mse_vs_benchmark",
    "IntegratedProblem",
    "solve_i1_ssa",
    "solve_i2_ssa",
]

COND_WARN = 1e12
ACF_TOL = 1e-10


def sigma_delta_matrices(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Summation matrix (lower-triangular ones) and its inverse, the differencing matrix."""
    if L < 1:
        raise InvalidDimensionError("L must be positive")
    sigma = np.tril(np.ones((L, L)))
    delta = np.eye(L) - np.eye(L, k=-1)
    return sigma, delta


def b_matrix(L: int, d: int) -> np.ndarray:
    """Null-space parametrization of the cointegration restrictions.

    ``d = 1``: a row of ``-1`` on top of the identity, so each column sums to
    zero.  ``d = 2``: rows ``(1, 2, ..., L-2)`` and ``(-2, ..., -(L-1))`` on top
    of the identity, so each column has zero sum and zero first moment
    ``sum_k k * b_k``.
    """
    if d not in (1, 2):
        raise DomainError("d must be 1 or 2")
    if L <= d:
        raise InvalidDimensionError(f"need L > d, got L={L}, d={d}")
    n = L - d
    top = -np.ones((1, n)) if d == 1 else np.vstack([np.arange(1, n + 1), -np.arange(2, n + 2)])
    return np.vstack([top, np.eye(n)])


def offset_vector(L: int, d: int, gamma0: float, gamma0_dot: float = 0.0) -> np.ndarray:
    """Particular filter with sum ``gamma0`` (and first moment ``gamma0_dot`` if d=2)."""
    b0 = np.zeros(L)
    if d == 1:
        b0[0] = gamma0
    else:
        b0[0] = gamma0 - gamma0_dot
        b0[1] = gamma0_dot
    return b0


def integrate_coefficients(c, d: int) -> np.ndarray:
    """Coefficients of ``c(B) / (1-B)^d`` truncated to ``len(c)`` (i.e. ``Sigma^d c``)."""
    out = np.asarray(c, dtype=float)
    for _ in range(d):
        out = np.cumsum(out)
    return out


def mse_vs_benchmark(b_x, gamma_mse, xi_ext, d: int) -> float:
    """Variance of ``(gamma_mse - b_x)(B) x_t`` for an I(d) input.

    ``xi_ext`` is the ``L_tilde x L`` Wold matrix of the differenced series;
    the error filter is first divided by ``(1-B)^d``, which is exact because
    the cointegration restrictions make the division terminate.
    """
    err = integrate_coefficients(np.asarray(gamma_mse) - np.asarray(b_x), d)
    e = np.asarray(xi_ext) @ err
    return float(e @ e)


@dataclass(frozen=True)
class IntegratedConfig:
    """Constraint on the ``d``-th differences of the output.

    ``L_tilde`` defaults to ``2 * L``.
    """

    d: int
    rho1: float
    L: int
    L_tilde: int | None = None
    delta: int = 0

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DomainError("d must be 1 or 2")
        if self.L < 3 or self.L <= self.d + 1:
            raise InvalidDimensionError("L too small for the integration order")
        lt = 2 * self.L if self.L_tilde is None else int(self.L_tilde)
        if lt < self.L:
            raise InvalidDimensionError("L_tilde must be at least L")
        if not -1 < self.rho1 < 1:
            raise DomainError("rho1 must lie in (-1, 1)")
        object.__setattr__(self, "L_tilde", lt)


@dataclass
class IntegratedSolution:
    """I(d)-SSA filter with multiplier and diagnostics on differences."""

    b_x: np.ndarray
    lambda_tilde: float
    gamma0: float
    gamma0_dot: float | None
    d: int
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return float(v) if math.isfinite(v) else None
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple, np.ndarray)):
                return [clean(x) for x in v]
            if isinstance(v, np.integer):
                return int(v)
            return v

        return clean({
            "b": list(self.b_x),
            "lambda_tilde": self.lambda_tilde,
            "gamma0": self.gamma0,
            "gamma0_dot": self.gamma0_dot,
            "d": self.d,
            "diagnostics": self.diagnostics,
        })

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self) -> str:
        lines = ["lag,weight"] + ["%d,%.17g" % (k, x) for k, x in enumerate(self.b_x)]
        return "\n".join(lines) + "\n"


class IntegratedProblem:
    """Precomputed matrices for the I(d) stationarity system.

    Parameters
    ----------
    gamma_mse : array_like
        Benchmark weights on the level series (length ``L``).
    xi : array_like
        Wold weights of the differenced series, at least ``L_tilde`` of them.
    d : {1, 2}
    rho1 : float
        Target lag-one autocorrelation of the ``d``-th differences of the output.
    L_tilde : int
        Row count of the rectangular Wold matrix.
    """

    def __init__(self, gamma_mse, xi, d: int, rho1: float, L_tilde: int):
        g = np.asarray(gamma_mse, dtype=float)
        L = len(g)
        self.L, self.d, self.rho1, self.L_tilde = L, d, rho1, L_tilde
        self.gamma_mse = g
        self.gamma0 = float(g.sum())
        self.gamma0_dot = float(np.arange(L) @ g) if d == 2 else None
        self.B = b_matrix(L, d)
        self.b0 = offset_vector(L, d, self.gamma0, self.gamma0_dot or 0.0)
        self.xi_ext = wold_matrix(xi, L, L_tilde)
        # Sigma^d B has exact integer entries; build it column-wise by cumsum
        sb = self.B.copy()
        for _ in range(d):
            sb = np.cumsum(sb, axis=0)
        xs = self.xi_ext @ sb
        xb = self.xi_ext @ self.B
        v = build_m(L_tilde) - rho1 * np.eye(L_tilde)
        self.A0 = xs.T @ xs
        self.A1 = xb.T @ v @ xb
        # with b = gamma_mse + B u the system reads (A0 + lt A1) u = -lt B'Xi'V Xi gamma
        self.q = xb.T @ (v @ (self.xi_ext @ g))
        self.b_tilde_mse = (g - self.b0)[d:]
        self.cond_A0 = float(np.linalg.cond(self.A0))
        if self.cond_A0 > COND_WARN:
            warnings.warn(f"ill-conditioned system (cond={self.cond_A0:.3g})", RuntimeWarning)

    def b_x(self, lt: float) -> np.ndarray:
        if lt == 0.0:
            return self.gamma_mse.copy()
        a = self.A0 + lt * self.A1
        rhs = -lt * self.q
        lu = sla.lu_factor(a, check_finite=True)
        u = sla.lu_solve(lu, rhs)
        # one step of iterative refinement
        u += sla.lu_solve(lu, rhs - a @ u)
        return self.gamma_mse + self.B @ u

    def b_eps(self, lt: float) -> np.ndarray:
        return self.xi_ext @ self.b_x(lt)

    def residual(self, lt: float) -> float:
        return acf1(self.b_eps(lt)) - self.rho1

    def mse(self, b_x) -> float:
        return mse_vs_benchmark(b_x, self.gamma_mse, self.xi_ext, self.d)


def _safe(f, x):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            y = f(x)
        return y if math.isfinite(y) else None
    except (np.linalg.LinAlgError, ValueError, ZeroDivisionError):
        return None


def _solve(problem: IntegratedProblem, grid=None) -> IntegratedSolution:
    if grid is None:
        mags = np.logspace(-4, 8, 241)
        grid = np.concatenate([-mags[::-1], [0.0], mags])
    f = problem.residual
    vals = [_safe(f, x) for x in grid]
    roots = []
    for x0, x1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if f0 is None or f1 is None:
            continue
        if f0 == 0.0:
            roots.append(float(x0))
            continue
        if f0 * f1 > 0:
            continue
        try:
            r = brentq(f, x0, x1, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
        except (ValueError, RuntimeError):
            continue
        res = _safe(f, r)
        # sign changes across a pole of the system leave a large residual
        if res is not None and abs(res) <= ACF_TOL:
            roots.append(float(r))
    if not roots:
        raise InfeasibleConstraintError(
            f"no multiplier attains rho1={problem.rho1:.6g} on the scanned range"
        )
    scored = []
    for r in roots:
        b = problem.b_x(r)
        scored.append((problem.mse(b), r, b))
    scored.sort(key=lambda t: t[0])
    mse, lt, b = scored[0]
    b_eps = problem.xi_ext @ b
    r_diff = acf1(b_eps)
    mse_eps = problem.xi_ext @ problem.gamma_mse
    diag = {
        "acf1_of_diff": r_diff,
        "ht_of_diff": ht_from_rho(r_diff),
        "mse_vs_benchmark": mse,
        "benchmark_acf1_of_diff": acf1(mse_eps),
        "benchmark_ht_of_diff": ht_from_rho(acf1(mse_eps)),
        "coefficient_sum": float(b.sum()),
        "residual": abs(r_diff - problem.rho1),
        "roots": [t[1] for t in scored],
        "cond_A0": problem.cond_A0,
        "L_tilde": problem.L_tilde,
    }
    if problem.d == 2:
        diag["first_moment"] = float(np.arange(problem.L) @ b)
    return IntegratedSolution(b_x=b, lambda_tilde=lt, gamma0=problem.gamma0,
                              gamma0_dot=problem.gamma0_dot, d=problem.d, diagnostics=diag)


def _prepare(target, model, config, gamma_mse):
    if gamma_mse is None:
        if not isinstance(target, TargetSpec):
            raise DomainError("target must be a TargetSpec when gamma_mse is not supplied")
        gamma_mse = mse_predictor_dependent(target, model, config.L, config.delta, d=config.d)
    gamma_mse = np.asarray(gamma_mse, dtype=float)
    if len(gamma_mse) != config.L:
        raise InvalidDimensionError("benchmark length differs from L")
    xi = wold_weights(model, config.L_tilde)
    return IntegratedProblem(gamma_mse, xi, config.d, config.rho1, config.L_tilde)


def solve_i1_ssa(target: TargetSpec | None, model: ProcessModel, config: IntegratedConfig,
                 gamma_mse=None) -> IntegratedSolution:
    """I(1)-SSA: constrain the lag-one autocorrelation of first differences.

    ``gamma_mse`` overrides the benchmark; by default it is the MSE predictor
    for an I(1) series with ARMA differences given by ``model``.
    """
    if config.d != 1:
        raise DomainError("solve_i1_ssa needs d=1")
    return _solve(_prepare(target, model, config, gamma_mse))


def solve_i2_ssa(target: TargetSpec | None, model: ProcessModel, config: IntegratedConfig,
                 gamma_mse=None) -> IntegratedSolution:
    """I(2)-SSA: constrain the lag-one autocorrelation of second differences."""
    if config.d != 2:
        raise DomainError("solve_i2_ssa needs d=2")
    if config.L < 4:
        raise InvalidDimensionError("I(2)-SSA needs L >= 4")
    return _solve(_prepare(target, model, config, gamma_mse))
