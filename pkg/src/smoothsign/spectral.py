"""Eigenstructure of the first-lag autocovariance matrix.

For a causal filter ``b`` of length ``L`` driven by standardized white noise,
the lag-one autocovariance of the output is the quadratic form ``b'Mb`` with
``M`` the symmetric tridiagonal matrix carrying 0.5 on both first
off-diagonals.  Its eigenpairs are known in closed form:

    lambda_j = cos(j*pi/(L+1)),   v_j[k] ~ sin(k*j*pi/(L+1)),  j, k = 1..L

so no iterative eigensolver is needed anywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import IdentifiabilityError, InvalidDimensionError

__all__ = [
    "SpectralBasis",
    "SpectralWeights",
    "build_m",
    "eigenpairs",
    "rho_max",
    "spectral_weights",
    "acf1",
]

MAX_DENSE_L = 2048
DEFAULT_TOL_NZ = 1e-10


def _check_length(L) -> int:
    if isinstance(L, bool) or int(L) != L or L < 1:
        raise InvalidDimensionError(f"filter length must be a positive integer, got {L!r}")
    if L > MAX_DENSE_L:
        raise InvalidDimensionError(f"filter length {L} exceeds the dense limit {MAX_DENSE_L}")
    return int(L)


def build_m(L: int) -> np.ndarray:
    """Return the ``L x L`` first-lag autocovariance matrix ``M``.

    ``b @ M @ b`` equals ``sum(b[k-1] * b[k] for k in 1..L-1)``.
    """
    L = _check_length(L)
    M = np.zeros((L, L))
    idx = np.arange(L - 1)
    M[idx, idx + 1] = 0.5
    M[idx + 1, idx] = 0.5
    return M


def rho_max(L: int) -> float:
    """Largest attainable lag-one autocorrelation of a length-``L`` MA filter."""
    L = _check_length(L)
    return float(np.cos(np.pi / (L + 1)))


def acf1(b) -> float:
    """Lag-one autocorrelation ``b'Mb / b'b`` of a filter fed with white noise.

    Computed with the explicit O(L) sum rather than a dense product.
    """
    b = np.asarray(b, dtype=float)
    bb = float(b @ b)
    if bb == 0.0:
        raise IdentifiabilityError("zero filter has no autocorrelation")
    return float(b[:-1] @ b[1:]) / bb


@dataclass(frozen=True)
class SpectralBasis:
    """Analytic eigenpairs of ``M``.

    Attributes
    ----------
    L : int
        Filter length.
    eigenvalues : ndarray, shape (L,)
        ``cos(j*pi/(L+1))`` for ``j = 1..L``, strictly decreasing.
    eigenvectors : ndarray, shape (L, L)
        Orthonormal; column ``j-1`` is the normalized sine vector of order
        ``j``.  The first entry of every column is positive.
    """

    L: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def rho_max(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def omegas(self) -> np.ndarray:
        """Fourier frequencies ``j*pi/(L+1)`` attached to the basis."""
        return np.arange(1, self.L + 1) * np.pi / (self.L + 1)


@lru_cache(maxsize=64)
def eigenpairs(L: int) -> SpectralBasis:
    """Closed-form eigendecomposition of :func:`build_m`."""
    L = _check_length(L)
    j = np.arange(1, L + 1)
    omegas = j * np.pi / (L + 1)
    lam = np.cos(omegas)
    V = np.sin(np.outer(j, omegas))
    # every column has squared norm (L+1)/2
    V *= np.sqrt(2.0 / (L + 1))
    lam.setflags(write=False)
    V.setflags(write=False)
    return SpectralBasis(L=L, eigenvalues=lam, eigenvectors=V)


@dataclass(frozen=True)
class SpectralWeights:
    """Coordinates ``w = V'gamma`` of a filter in the SSA basis.

    ``nz_set`` holds zero-based indices ``i`` with ``|w_i| > tol * max|w|``.
    """

    w: np.ndarray
    nz_set: tuple[int, ...]
    tol_nz: float = DEFAULT_TOL_NZ

    @property
    def nz_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.w), dtype=bool)
        mask[list(self.nz_set)] = True
        return mask

    @property
    def complete(self) -> bool:
        return len(self.nz_set) == len(self.w)

    def effective(self) -> np.ndarray:
        """Weights with the vanishing entries set exactly to zero."""
        out = np.where(self.nz_mask, self.w, 0.0)
        return out


def spectral_weights(gamma_delta, basis: SpectralBasis | None = None,
                     tol_nz: float = DEFAULT_TOL_NZ) -> SpectralWeights:
    """Decompose ``gamma_delta`` in the eigenbasis of ``M``.

    Raises
    ------
    IdentifiabilityError
        If ``gamma_delta`` is identically zero.
    """
    g = np.asarray(gamma_delta, dtype=float)
    if g.ndim != 1:
        raise InvalidDimensionError("gamma_delta must be one-dimensional")
    if basis is None:
        basis = eigenpairs(len(g))
    if basis.L != len(g):
        raise InvalidDimensionError(f"basis has L={basis.L} but target has length {len(g)}")
    w = basis.eigenvectors.T @ g
    scale = float(np.max(np.abs(w))) if len(w) else 0.0
    if scale == 0.0 or not np.any(g):
        raise IdentifiabilityError("target filter is identically zero")
    nz = tuple(int(i) for i in np.flatnonzero(np.abs(w) > tol_nz * scale))
    w.setflags(write=False)
    return SpectralWeights(w=w, nz_set=nz, tol_nz=tol_nz)
