"""SSA for autocorrelated input.

For ``x_t = xi(B) eps_t`` with invertible Wold weights ``xi`` the predictor
``y_t = sum_k b_xk x_{t-k}`` has the epsilon-space representation
``b_eps = Xi b_x``, where ``Xi`` is the lower-triangular Toeplitz matrix built
from ``xi``.  The holding-time constraint applies to ``b_eps``, so the
white-noise solver is reused on the transformed target and the result is
mapped back by forward substitution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, InvalidDimensionError, ModelError
from .spectral import acf1
from .ssa_core import SsaConfig, SsaSolution, ht_from_rho, sign_accuracy, solve_completed, solve_ssa
from .targets import TargetSpec

__all__ = [
    "ProcessModel",
    "DependentSolution",
    "wold_weights",
    "psi_weights",
    "pi_weights",
    "wold_matrix",
    "deconvolve",
    "mse_predictor_dependent",
    "eps_target",
    "solve_ssa_dependent",
    "solve_ssa_extended",
    "acf1_under_model",
]


def _roots_outside(coefs, what: str):
    # polynomial 1 + c_1 z + ... ; numpy wants the highest power first
    coefs = np.asarray(coefs, dtype=float)
    if len(coefs) == 0 or not np.any(coefs):
        return
    poly = np.concatenate([[1.0], coefs])[::-1]
    poly = np.trim_zeros(poly, "f")
    roots = np.roots(poly)
    if len(roots) and np.min(np.abs(roots)) <= 1.0 + 1e-10:
        raise ModelError(f"{what} polynomial has a root on or inside the unit circle")


@dataclass(frozen=True)
class ProcessModel:
    """ARMA description ``x_t = sum a_i x_{t-i} + eps_t + sum m_j eps_{t-j}``.

    Stationarity and invertibility are checked on construction.
    """

    ar: tuple = ()
    ma: tuple = ()
    sigma: float = 1.0

    def __post_init__(self):
        ar = tuple(float(a) for a in np.atleast_1d(np.asarray(self.ar, dtype=float)))
        ma = tuple(float(m) for m in np.atleast_1d(np.asarray(self.ma, dtype=float)))
        if not self.sigma > 0:
            raise ModelError("innovation standard deviation must be positive")
        _roots_outside([-a for a in ar], "AR")
        _roots_outside(ma, "MA")
        object.__setattr__(self, "ar", ar)
        object.__setattr__(self, "ma", ma)

    @property
    def kind(self) -> str:
        return "white_noise" if not any(self.ar) and not any(self.ma) else "arma"

    @property
    def ar_poly(self) -> np.ndarray:
        """Coefficients of ``1 - a_1 B - ... - a_p B^p``."""
        return np.concatenate([[1.0], -np.asarray(self.ar)])

    @property
    def ma_poly(self) -> np.ndarray:
        return np.concatenate([[1.0], np.asarray(self.ma)])

    @classmethod
    def white_noise(cls, sigma: float = 1.0) -> "ProcessModel":
        return cls((), (), sigma)

    @classmethod
    def from_dict(cls, d: dict) -> "ProcessModel":
        unknown = set(d) - {"ar", "ma", "sigma", "kind"}
        if unknown:
            raise ModelError(f"unknown model keys {sorted(unknown)}")
        return cls(tuple(d.get("ar", ())), tuple(d.get("ma", ())), float(d.get("sigma", 1.0)))

    @classmethod
    def from_json(cls, text: str) -> "ProcessModel":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ModelError(f"invalid model JSON: {exc}") from exc

    @classmethod
    def parse(cls, text: str) -> "ProcessModel":
        """Parse ``wn``, ``ar:0.3``, ``ma:0.4`` or ``ar:0.5,0.1;ma:0.3``; JSON is accepted too."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_json(text)
        if text in ("", "wn", "white_noise"):
            return cls.white_noise()
        parts = {}
        for chunk in text.split(";"):
            key, _, vals = chunk.partition(":")
            key = key.strip().lower()
            if key not in ("ar", "ma") or not vals.strip():
                raise ModelError(f"cannot parse model specification {text!r}")
            try:
                parts[key] = tuple(float(v) for v in vals.split(","))
            except ValueError as exc:
                raise ModelError(f"cannot parse model specification {text!r}") from exc
        return cls(parts.get("ar", ()), parts.get("ma", ()))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ar": list(self.ar), "ma": list(self.ma), "sigma": self.sigma}


def _diff_poly(d: int) -> np.ndarray:
    poly = np.array([1.0])
    for _ in range(d):
        poly = np.convolve(poly, [1.0, -1.0])
    return poly


def psi_weights(model: ProcessModel, n: int, d: int = 0) -> np.ndarray:
    """MA(infinity) weights of ``MA(B) / (AR(B) (1-B)^d)``.

    For ``d = 0`` these are the Wold weights; for ``d > 0`` they do not decay.
    """
    if n < 1:
        raise InvalidDimensionError("need n >= 1")
    ar = np.convolve(model.ar_poly, _diff_poly(d))
    ma = model.ma_poly
    out = np.zeros(n)
    for k in range(n):
        acc = ma[k] if k < len(ma) else 0.0
        for i in range(1, min(k, len(ar) - 1) + 1):
            acc -= ar[i] * out[k - i]
        out[k] = acc
    return out


def wold_weights(model: ProcessModel, n: int) -> np.ndarray:
    """Wold weights ``xi_0 = 1, xi_1, ..., xi_{n-1}`` of a stationary ARMA model."""
    return psi_weights(model, n, 0)


def pi_weights(model: ProcessModel, n: int, d: int = 0) -> np.ndarray:
    """Power-series coefficients of the inverse ``AR(B) (1-B)^d / MA(B)``."""
    ar = np.convolve(model.ar_poly, _diff_poly(d))
    impulse = np.zeros(n)
    impulse[0] = 1.0
    return lfilter(ar, model.ma_poly, impulse)


def wold_matrix(xi, L: int, L_tilde: int | None = None) -> np.ndarray:
    """Convolution matrix with ``L_tilde`` rows and ``L`` columns.

    Row ``i`` holds ``xi_i, ..., xi_0`` in its leading columns so that
    ``Xi @ b`` is the first ``L_tilde`` coefficients of ``xi * b``.
    """
    L_tilde = L if L_tilde is None else L_tilde
    xi = np.asarray(xi, dtype=float)
    if L_tilde < L:
        raise InvalidDimensionError("L_tilde must be at least L")
    if len(xi) < L_tilde:
        raise InvalidDimensionError(f"need {L_tilde} Wold weights, got {len(xi)}")
    i = np.arange(L_tilde)[:, None]
    j = np.arange(L)[None, :]
    lag = i - j
    return np.where(lag >= 0, xi[np.clip(lag, 0, None)], 0.0)


def deconvolve(conv, xi, L: int) -> np.ndarray:
    """Invert ``conv = xi * b_x`` for the first ``L`` coefficients of ``b_x``.

    Forward substitution ``b_k = conv_k - sum_{j<k} xi_{k-j} b_j``; needs
    ``xi_0 = 1``.
    """
    conv = np.asarray(conv, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if len(conv) < L:
        raise InvalidDimensionError(f"need {L} convolution coefficients, got {len(conv)}")
    if xi[0] != 1.0:
        raise ModelError("deconvolution requires xi_0 = 1")
    xi = np.concatenate([xi[:L], np.zeros(max(0, L - len(xi)))])
    b = np.zeros(L)
    for k in range(L):
        b[k] = conv[k] - xi[k:0:-1] @ b[:k]
    return b


def _decaying_length(model: ProcessModel, tol: float = 1e-15, cap: int = 1 << 20) -> int:
    """Number of Wold weights after which the remainder is negligible."""
    if model.kind == "white_noise":
        return 1
    n = 64
    while n < cap:
        xi = wold_weights(model, 2 * n)
        if np.max(np.abs(xi[n:])) < tol * np.max(np.abs(xi)):
            return n
        n *= 2
    return cap


def mse_predictor_dependent(target: TargetSpec, model: ProcessModel, L: int | None = None,
                            delta: int | None = None, d: int = 0) -> np.ndarray:
    """MSE-optimal causal weights applied to ``x_t``.

    Each acausal target weight ``gamma_{delta-m}`` (``m >= 1``) is replaced by
    the optimal forecast of ``x_{t+m}`` from the past, i.e. the series
    ``sum_j xi_{j+m} B^j`` multiplied by the inverse ``xi(B)^{-1}``.  The
    series arithmetic is carried out exactly to order ``L``, which is all that
    enters the result.  ``d > 0`` treats ``x_t`` as integrated of order ``d``
    with ARMA differences described by ``model``.
    """
    L = target.L if L is None else int(L)
    delta = target.delta if delta is None else int(delta)
    if L is None or L < 1:
        raise InvalidDimensionError("causal length L must be set and positive")
    if d not in (0, 1, 2):
        raise DomainError("integration order must be 0, 1 or 2")
    causal = target.window(delta, L)
    n_future = delta - target.min_lag  # acausal lags m = 1..n_future
    if n_future <= 0 or (model.kind == "white_noise" and d == 0):
        return causal
    psi = psi_weights(model, L + n_future, d)
    fut = np.array([target.gamma(delta - m) for m in range(1, n_future + 1)])
    # S_j = sum_m gamma_{delta-m} psi_{j+m}
    idx = np.arange(L)[:, None] + np.arange(1, n_future + 1)[None, :]
    s = psi[idx] @ fut
    inv = pi_weights(model, L, d)
    return causal + np.convolve(s, inv)[:L]


def eps_target(target: TargetSpec, model: ProcessModel, delta: int, n: int) -> np.ndarray:
    """Coefficients ``(gamma * xi)_{delta}, ..., (gamma * xi)_{delta+n-1}``.

    This is the epsilon-space MSE predictor of length ``n``.
    """
    xi = wold_weights(model, n + target.max_lag - target.min_lag + max(0, delta - target.min_lag) + 1)
    full = np.convolve(target.weights, xi)  # index 0 is lag min_lag
    out = np.zeros(n)
    start = delta - target.min_lag
    for k in range(n):
        pos = start + k
        if 0 <= pos < len(full):
            out[k] = full[pos]
    return out


def _eps_target_norm2(target: TargetSpec, model: ProcessModel) -> float:
    n = _decaying_length(model)
    full = np.convolve(target.weights, wold_weights(model, n))
    return float(full @ full)


def acf1_under_model(b_x, model: ProcessModel, L_tilde: int | None = None) -> float:
    """Lag-one autocorrelation of ``y_t = sum b_xk x_{t-k}`` under ``model``.

    ``L_tilde`` truncates the epsilon-space representation; by default it is
    long enough for the Wold weights to have decayed.
    """
    b_x = np.asarray(b_x, dtype=float)
    n = len(b_x) + _decaying_length(model) if L_tilde is None else int(L_tilde)
    xi = wold_weights(model, n)
    return acf1(np.convolve(b_x, xi)[:n])


@dataclass
class DependentSolution:
    """SSA predictor for dependent data.

    ``b_x`` acts on ``x_t``; ``b_eps`` is its epsilon-space representation
    on which the holding-time constraint and diagnostics are defined.
    """

    b_x: np.ndarray
    b_eps: np.ndarray
    gamma_x: np.ndarray
    gamma_eps: np.ndarray
    ssa: SsaSolution
    diagnostics: dict = field(default_factory=dict)


def _eps_diagnostics(b_eps, gamma_eps, target_var) -> dict:
    bb = float(b_eps @ b_eps)
    r = acf1(b_eps)
    tc = float(b_eps @ gamma_eps) / math.sqrt(bb * target_var)
    tc = max(-1.0, min(1.0, tc))
    mse_acf = acf1(gamma_eps)
    return {
        "acf1": r,
        "holding_time": ht_from_rho(r),
        "target_correlation": tc,
        "sign_accuracy": sign_accuracy(tc),
        "mse_acf1": mse_acf,
        "mse_holding_time": ht_from_rho(mse_acf),
        "mse_target_correlation": math.sqrt(float(gamma_eps @ gamma_eps) / target_var),
    }


def _solve(gamma_eps, config, target_var, completed):
    solver = solve_completed if completed else solve_ssa
    return solver(gamma_eps, config, target_var)


def solve_ssa_dependent(target: TargetSpec, model: ProcessModel, config: SsaConfig,
                        completed: bool = False) -> DependentSolution:
    """Solve SSA for ARMA input with an ``L x L`` Wold matrix.

    The epsilon-space target is ``Xi @ gamma_x`` where ``gamma_x`` is the
    dependent-data MSE predictor.
    """
    L = config.L
    gamma_x = mse_predictor_dependent(target, model, L, config.delta)
    xi = wold_weights(model, L)
    gamma_eps = wold_matrix(xi, L) @ gamma_x
    target_var = _eps_target_norm2(target, model)
    sol = _solve(gamma_eps, config, target_var, completed)
    b_x = deconvolve(sol.b, xi, L)
    diag = _eps_diagnostics(sol.b, gamma_eps, target_var)
    diag.update(nu=sol.nu, status=sol.status, branch=sol.branch,
                iterations=sol.iterations, residual=sol.residual)
    return DependentSolution(b_x=b_x, b_eps=sol.b, gamma_x=gamma_x, gamma_eps=gamma_eps,
                             ssa=sol, diagnostics=diag)


def solve_ssa_extended(target: TargetSpec, model: ProcessModel, config: SsaConfig,
                       L_tilde: int, completed: bool = False) -> DependentSolution:
    """Extended criterion with an epsilon-space filter of length ``L_tilde``.

    The white-noise problem is solved at length ``L_tilde`` against
    ``(gamma * xi)_{delta+k}``; the first ``L`` coefficients are deconvolved
    to give ``b_x``.
    """
    L = config.L
    if L_tilde < L:
        raise InvalidDimensionError("L_tilde must be at least L")
    gamma_eps = eps_target(target, model, config.delta, L_tilde)
    target_var = _eps_target_norm2(target, model)
    ext_config = SsaConfig(L=L_tilde, rho1=config.rho1, delta=config.delta,
                           scale=config.scale, branch=config.branch)
    sol = _solve(gamma_eps, ext_config, target_var, completed)
    xi = wold_weights(model, L_tilde)
    b_x = deconvolve(sol.b[:L], xi, L)
    diag = _eps_diagnostics(sol.b, gamma_eps, target_var)
    diag.update(nu=sol.nu, status=sol.status, branch=sol.branch,
                iterations=sol.iterations, residual=sol.residual,
                realized_acf1=acf1_under_model(b_x, model, L_tilde))
    return DependentSolution(b_x=b_x, b_eps=sol.b, gamma_x=gamma_eps, gamma_eps=gamma_eps,
                             ssa=sol, diagnostics=diag)
