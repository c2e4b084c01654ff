"""Benchmark target filters.

The two-sided Hodrick-Prescott and Baxter-King filters act on ``x_t`` through
``z_t = sum_k gamma_k x_{t-k}`` with ``k`` running over a finite symmetric
span.  The causal nowcast/forecast weights that white-noise MSE theory
assigns to such a target are simply the right tail ``gamma_delta, ...,
gamma_{delta+L-1}``.

HP weights are obtained from the penalized least-squares smoother
``(I + lam * D2'D2)^{-1}`` on a finite window, so one code path yields both the
symmetric (centre row) and the concurrent (last row) variants.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, InvalidDimensionError, SpanError
from .spectral import acf1

__all__ = [
    "TargetSpec",
    "hp_smoother_matrix",
    "hp_two_sided",
    "hp_concurrent",
    "bk_two_sided",
    "wn_mse_nowcast",
    "DEFAULT_HP_SPANS",
]

DEFAULT_HP_SPANS = {1600.0: 500, 14400.0: 1500}


@dataclass(frozen=True)
class TargetSpec:
    """A two-sided target filter together with the forecast set-up.

    Parameters
    ----------
    lags : ndarray of int
        Consecutive lags ``-h, ..., h`` (or any contiguous range).
    weights : ndarray
        ``weights[i]`` multiplies ``x_{t - lags[i]}``.
    delta : int
        Forecast horizon (``delta > 0``), nowcast (``0``) or backcast (``< 0``).
    L : int or None
        Length of the causal approximation.
    label : str
        Free-form description used in reports.
    finite : bool
        If True the filter is exactly zero outside ``lags``; otherwise the
        weights are a truncation and reading beyond the span is an error.
    """

    lags: np.ndarray
    weights: np.ndarray
    delta: int = 0
    L: int | None = None
    label: str = ""
    finite: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=int)
        weights = np.asarray(self.weights, dtype=float)
        if lags.shape != weights.shape or lags.ndim != 1 or len(lags) == 0:
            raise InvalidDimensionError("lags and weights must be equal-length vectors")
        if np.any(np.diff(lags) != 1):
            raise InvalidDimensionError("lags must be consecutive and increasing")
        lags.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_coefficients(cls, coefs: dict, **kwargs) -> "TargetSpec":
        """Build from a ``{lag: weight}`` mapping; gaps are filled with zeros."""
        lo, hi = min(coefs), max(coefs)
        lags = np.arange(lo, hi + 1)
        weights = np.array([float(coefs.get(int(k), 0.0)) for k in lags])
        return cls(lags=lags, weights=weights, **kwargs)

    @property
    def min_lag(self) -> int:
        return int(self.lags[0])

    @property
    def max_lag(self) -> int:
        return int(self.lags[-1])

    def gamma(self, k: int) -> float:
        """Weight at lag ``k``; zero outside the span for finite targets."""
        if self.min_lag <= k <= self.max_lag:
            return float(self.weights[k - self.min_lag])
        if self.finite:
            return 0.0
        raise SpanError(f"lag {k} outside truncated span [{self.min_lag}, {self.max_lag}]")

    def window(self, start: int, length: int) -> np.ndarray:
        """Weights for lags ``start, ..., start+length-1``."""
        end = start + length - 1
        if not self.finite and (start < self.min_lag or end > self.max_lag):
            raise SpanError(
                f"lags {start}..{end} not covered by span [{self.min_lag}, {self.max_lag}]"
            )
        out = np.zeros(length)
        lo = max(start, self.min_lag)
        hi = min(end, self.max_lag)
        if lo <= hi:
            out[lo - start:hi - start + 1] = self.weights[lo - self.min_lag:hi - self.min_lag + 1]
        return out

    def norm2(self) -> float:
        """Squared norm, i.e. the variance of ``z_t`` under unit white noise."""
        return float(self.weights @ self.weights)

    def acf1(self) -> float:
        return acf1(self.weights)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        if self.min_lag != -self.max_lag:
            return False
        return bool(np.all(np.abs(self.weights - self.weights[::-1]) <= tol))

    def with_horizon(self, delta: int | None = None, L: int | None = None) -> "TargetSpec":
        return replace(
            self,
            delta=self.delta if delta is None else int(delta),
            L=self.L if L is None else int(L),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lag", "weight"])
        for k, g in zip(self.lags, self.weights):
            writer.writerow([int(k), "%.17g" % g])
        return buf.getvalue()


def hp_smoother_matrix(lam: float, n: int):
    """Sparse ``I + lam * D2'D2`` of size ``n`` in CSC format."""
    if n < 3:
        raise InvalidDimensionError("HP window needs at least 3 points")
    ones = np.ones(n - 2)
    d2 = sp.diags([ones, -2 * ones, ones], [0, 1, 2], shape=(n - 2, n))
    return (sp.identity(n) + lam * (d2.T @ d2)).tocsc()


def _hp_row(lam: float, n: int, row: int) -> np.ndarray:
    # the smoother is symmetric, so a row equals the matching column
    e = np.zeros(n)
    e[row] = 1.0
    return spla.spsolve(hp_smoother_matrix(lam, n), e)


def hp_two_sided(lam: float, half_span: int | None = None,
                 tail_tol: float | None = 1e-12, *, delta: int = 0,
                 L: int | None = None) -> TargetSpec:
    """Symmetric HP trend filter.

    Parameters
    ----------
    lam : float
        HP smoothing parameter (1600 quarterly, 14400 monthly).
    half_span : int, optional
        Window of width ``2*half_span + 1``.  Defaults to 500 for 1600 and 1500
        for 14400; other values double from 100 until the tail check passes.
    tail_tol : float or None
        Largest admissible ``|gamma_{half_span}|``.  ``None`` disables the
        check and marks the result as an exact finite filter (the weights are
        those of the finite-sample smoother and are zero beyond the window).

    Raises
    ------
    SpanError
        If the edge weight exceeds ``tail_tol``.
    """
    if not lam > 0:
        raise DomainError("HP lambda must be positive")
    auto = half_span is None
    if auto:
        half_span = DEFAULT_HP_SPANS.get(float(lam), 100)
    if half_span < 1:
        raise InvalidDimensionError("half_span must be positive")
    while True:
        n = 2 * half_span + 1
        row = _hp_row(lam, n, half_span)
        row = row / row.sum()
        tail = max(abs(row[0]), abs(row[-1]))
        if tail_tol is None or tail < tail_tol:
            break
        if not auto or half_span >= 20000:
            raise SpanError(
                f"HP({lam:g}) edge weight {tail:.3g} at half_span={half_span} exceeds {tail_tol:g}"
            )
        half_span *= 2
    # enforce exact symmetry against round-off in the sparse solve
    row = 0.5 * (row + row[::-1])
    return TargetSpec(
        lags=np.arange(-half_span, half_span + 1),
        weights=row,
        delta=delta,
        L=L,
        label=f"HP({lam:g})",
        finite=tail_tol is None,
        meta={"lambda": float(lam), "half_span": int(half_span)},
    )


def hp_concurrent(lam: float, L: int) -> np.ndarray:
    """One-sided endpoint HP filter (HP-C) of length ``L``.

    ``out[k]`` multiplies ``x_{t-k}``.
    """
    if L < 3:
        raise InvalidDimensionError("HP-C needs L >= 3")
    if not lam > 0:
        raise DomainError("HP lambda must be positive")
    row = _hp_row(lam, L, L - 1)
    return row[::-1].copy()


def bk_two_sided(period_low: float, period_high: float, half_span: int, *,
                 delta: int = 0, L: int | None = None) -> TargetSpec:
    """Baxter-King band-pass filter for periods in ``[period_low, period_high]``.

    Truncated ideal band-pass weights plus a constant shift so that the
    weights sum to zero.
    """
    if not 2 <= period_low < period_high:
        raise DomainError("need 2 <= period_low < period_high")
    if half_span < 1:
        raise InvalidDimensionError("half_span must be positive")
    w_lo = 2 * np.pi / period_high
    w_hi = 2 * np.pi / period_low
    k = np.arange(1, half_span + 1)
    side = (np.sin(w_hi * k) - np.sin(w_lo * k)) / (np.pi * k)
    ideal = np.concatenate([side[::-1], [(w_hi - w_lo) / np.pi], side])
    weights = ideal - ideal.sum() / len(ideal)
    return TargetSpec(
        lags=np.arange(-half_span, half_span + 1),
        weights=weights,
        delta=delta,
        L=L,
        label=f"BK({period_low:g},{period_high:g})",
        finite=True,
        meta={"period_low": period_low, "period_high": period_high, "half_span": half_span},
    )


def wn_mse_nowcast(target: TargetSpec, L: int | None = None,
                   delta: int | None = None) -> np.ndarray:
    """Causal MSE weights ``(gamma_delta, ..., gamma_{delta+L-1})`` under white noise.

    ``L`` and ``delta`` default to the values stored on ``target``.
    """
    L = target.L if L is None else L
    delta = target.delta if delta is None else delta
    if L is None or L < 1:
        raise InvalidDimensionError("causal length L must be set and positive")
    return target.window(int(delta), int(L))
