"""Simulation and sample diagnostics.

Random numbers come from numpy's ``PCG64`` bit generator seeded with a user
integer, so every experiment is reproducible bit for bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from .errors import DataError, DomainError, InvalidDimensionError
from .ssa_core import ht_from_rho
from .spectral import acf1
from .stationary_ext import ProcessModel, psi_weights

__all__ = [
    "RNG_ALGORITHM",
    "SeriesDiagnostics",
    "make_rng",
    "generate",
    "apply_filter",
    "crossings",
    "empirical_holding_time",
    "sample_acf1",
    "sample_sign_accuracy",
    "diagnose",
    "heavy_tail_experiment",
]

RNG_ALGORITHM = "numpy.PCG64"
BURN_IN = 2000


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _innovations(rng, n, df=None):
    if df is None:
        return rng.standard_normal(n)
    if not df > 2:
        raise DomainError(f"t innovations need df > 2 for finite variance, got {df}")
    return rng.standard_t(df, n) * math.sqrt((df - 2.0) / df)


def generate(kind: str, n: int, seed, *, df: float | None = None, a: float | None = None,
             model: ProcessModel | None = None, d: int = 0) -> np.ndarray:
    """Simulate a series of length ``n``.

    Parameters
    ----------
    kind : {'gaussian_wn', 't_wn', 'ar1', 'arma', 'arima'}
    n : int
    seed : int or numpy SeedSequence
    df : float
        Degrees of freedom for ``t_wn``; the draws are scaled to unit variance.
    a : float
        AR(1) coefficient for ``ar1``.
    model : ProcessModel
        ARMA model for ``arma`` and ``arima`` (for ``arima`` it describes the
        ``d``-th differences).
    d : int
        Integration order for ``arima``.
    """
    if n < 1:
        raise InvalidDimensionError("n must be positive")
    rng = make_rng(seed)
    if kind == "gaussian_wn":
        return _innovations(rng, n)
    if kind == "t_wn":
        if df is None:
            raise DomainError("t_wn needs df")
        return _innovations(rng, n, df)
    if kind == "ar1":
        if a is None or not abs(a) < 1:
            raise DomainError("ar1 needs |a| < 1")
        model = ProcessModel(ar=(a,))
        kind = "arma"
    if kind in ("arma", "arima"):
        if model is None:
            raise DomainError(f"{kind} needs a model")
        eps = _innovations(rng, n + BURN_IN, df) * model.sigma
        x = lfilter(model.ma_poly, model.ar_poly, eps)[BURN_IN:]
        if kind == "arima":
            if d not in (1, 2):
                raise DomainError("arima needs d in {1, 2}")
            for _ in range(d):
                x = np.cumsum(x)
        return x
    raise DomainError(f"unknown series kind {kind!r}")


def apply_filter(b, series) -> np.ndarray:
    """Causal filtering ``y_t = sum_k b_k x_{t-k}`` for ``t = L-1, ..., n-1``.

    Output index ``i`` corresponds to input index ``i + L - 1``.
    """
    b = np.asarray(b, dtype=float)
    x = np.asarray(series, dtype=float)
    if len(x) < len(b):
        raise DataError(f"series of length {len(x)} is shorter than the filter ({len(b)})")
    return np.convolve(x, b, mode="valid")


def _signs(series) -> np.ndarray:
    s = np.sign(np.asarray(series, dtype=float))
    nz = np.flatnonzero(s)
    if len(nz) == 0:
        return s
    # zeros inherit the previous sign; leading zeros take the first sign
    idx = np.maximum.accumulate(np.where(s != 0, np.arange(len(s)), 0))
    out = s[idx]
    out[: nz[0]] = s[nz[0]]
    return out


def crossings(series) -> np.ndarray:
    """Indices ``t`` at which the sign differs from that at ``t-1``."""
    s = _signs(series)
    return np.flatnonzero(s[1:] != s[:-1]) + 1


def empirical_holding_time(series) -> float:
    """Mean distance between consecutive sign changes; ``nan`` with fewer than two."""
    if len(series) < 2:
        raise DataError("need at least two observations")
    c = crossings(series)
    if len(c) < 2:
        return math.nan
    return float(c[-1] - c[0]) / (len(c) - 1)


def sample_acf1(series) -> float:
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    den = float(x @ x)
    if den == 0:
        raise DataError("constant series has no autocorrelation")
    return float(x[:-1] @ x[1:]) / den


def sample_sign_accuracy(y, z, return_ties: bool = False):
    """Share of dates with ``y_t * z_t > 0``.

    Dates where either series is exactly zero are left out of both numerator
    and denominator; their count is returned as well if ``return_ties``.
    """
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    if y.shape != z.shape:
        raise DataError(f"length mismatch: {len(y)} vs {len(z)}")
    prod = y * z
    ties = int(np.count_nonzero(prod == 0))
    valid = len(prod) - ties
    acc = float(np.count_nonzero(prod > 0)) / valid if valid else math.nan
    return (acc, ties) if return_ties else acc


@dataclass
class SeriesDiagnostics:
    sample_acf1: float
    sample_ht: float
    crossings: np.ndarray = field(repr=False)
    sample_mse: float | None = None
    sample_sign_accuracy: float | None = None

    @property
    def ht_defined(self) -> bool:
        return not math.isnan(self.sample_ht)


def diagnose(y, reference=None) -> SeriesDiagnostics:
    """Sample diagnostics of ``y``, optionally against an aligned reference."""
    y = np.asarray(y, dtype=float)
    mse = sa = None
    if reference is not None:
        r = np.asarray(reference, dtype=float)
        if r.shape != y.shape:
            raise DataError("reference must be aligned with y")
        mse = float(np.mean((r - y) ** 2))
        sa = sample_sign_accuracy(y, r)
    return SeriesDiagnostics(sample_acf1(y), empirical_holding_time(y), crossings(y), mse, sa)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SSA_THREADS", "1")))
    except ValueError:
        return 1


def heavy_tail_experiment(filters, dfs=(2.1, 4, 6, 8, 10, 100), n: int = 1_000_000,
                          seed: int = 1, gaussian: bool = True, theory: bool = True) -> pd.DataFrame:
    """Empirical holding times of fixed filters under t-distributed white noise.

    Parameters
    ----------
    filters : dict or list of (name, weights)
    dfs : sequence of float
        Degrees of freedom, one row each.
    n : int
        Sample length per distribution.
    seed : int
        Root seed; each distribution draws from its own spawned stream and
        all filters see the same noise.

    Returns
    -------
    DataFrame
        One row per distribution (``t(df)``, then ``gaussian`` and
        ``theory``) and one column per filter.
    """
    items = list(filters.items()) if isinstance(filters, dict) else list(filters)
    names = [name for name, _ in items]
    rows = [f"t({df:g})" for df in dfs] + (["gaussian"] if gaussian else [])
    if not items:
        return pd.DataFrame(index=pd.Index([], name="distribution"), columns=[])
    children = np.random.SeedSequence(seed).spawn(len(rows))
    specs = [(row, child, df) for row, child, df in
             zip(rows, children, list(dfs) + ([None] if gaussian else []))]

    def run(spec):
        row, child, df = spec
        eps = generate("gaussian_wn", n, child) if df is None else generate("t_wn", n, child, df=df)
        return [empirical_holding_time(apply_filter(b, eps)) for _, b in items]

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(run, specs))
    table = pd.DataFrame(results, index=pd.Index(rows, name="distribution"), columns=names)
    if theory:
        table.loc["theory"] = [ht_from_rho(acf1(np.asarray(b, dtype=float))) for _, b in items]
    table.attrs["rng"] = RNG_ALGORITHM
    table.attrs["seed"] = seed
    table.attrs["n"] = n
    return table
