"""White-noise SSA solver.

Maximizes ``b'gamma_delta`` over causal filters of length ``L`` subject to
``b'b = l`` and ``b'Mb = l*rho1``.  Away from degenerate cases the optimum is
a member of the one-parameter family

    b(nu) = D * (2M - nu*I)^{-1} gamma_delta = D * sum_i w_i / (2*lambda_i - nu) * v_i

and ``nu`` is fixed by the lag-one autocorrelation constraint.  All
evaluations run in the spectral domain of :mod:`smoothsign.spectral`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DomainError,
    IdentifiabilityError,
    InfeasibleConstraintError,
    InvalidDimensionError,
    NumericalError,
    SingularityError,
)
from .spectral import SpectralBasis, SpectralWeights, acf1, eigenpairs, spectral_weights

__all__ = [
    "SsaConfig",
    "SsaSolution",
    "DualReport",
    "b_of_nu",
    "rho_of_nu",
    "rho_mse",
    "solve_ssa",
    "boundary_solution",
    "solve_completed",
    "solve_ssa_mse",
    "ht_from_rho",
    "rho_from_ht",
    "sign_accuracy",
    "ssa_ar2_transfer",
    "ssa_amplitude",
    "verify_dual",
]

POLE_TOL = 1e-9
DEGENERATE_TOL = 1e-9
BRACKET_EPS = 1e-6
ROOT_TOL = 1e-12
MAX_BISECTIONS = 400


# ---------------------------------------------------------------------------
# conversions

def ht_from_rho(rho: float) -> float:
    """Expected holding time ``pi / arccos(rho)`` of a Gaussian process."""
    if not -1.0 < rho < 1.0:
        raise DomainError(f"lag-one autocorrelation must lie in (-1, 1), got {rho}")
    return math.pi / math.acos(rho)


def rho_from_ht(ht: float) -> float:
    """Inverse of :func:`ht_from_rho`."""
    if not ht > 1.0:
        raise DomainError(f"holding time must exceed 1, got {ht}")
    return math.cos(math.pi / ht)


def sign_accuracy(target_correlation: float) -> float:
    """Probability of matching signs for jointly Gaussian predictor and target."""
    if not -1.0 <= target_correlation <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {target_correlation}")
    return 0.5 + math.asin(target_correlation) / math.pi


def ssa_ar2_transfer(nu: float, omegas) -> np.ndarray:
    """Transfer function ``1/(2cos(omega) - nu)`` of the SSA-AR(2) operator.

    Singular ordinates are returned as ``inf``.
    """
    omegas = np.asarray(omegas, dtype=float)
    den = 2.0 * np.cos(omegas) - nu
    out = np.full(den.shape, np.inf)
    ok = np.abs(den) > 1e-12
    out[ok] = 1.0 / den[ok]
    return out


def ssa_amplitude(b, basis: SpectralBasis | None = None) -> np.ndarray:
    """Absolute spectral coordinates ``|V'b|`` of a filter."""
    b = np.asarray(b, dtype=float)
    basis = basis or eigenpairs(len(b))
    return np.abs(basis.eigenvectors.T @ b)


# ---------------------------------------------------------------------------
# configuration and results

@dataclass(frozen=True)
class SsaConfig:
    """Holding-time constraint and problem dimensions.

    Exactly one of ``rho1`` and ``ht1`` must be given; ``ht1`` is converted
    with :func:`rho_from_ht`.
    """

    L: int
    rho1: float | None = None
    ht1: float | None = None
    delta: int = 0
    scale: float = 1.0
    branch: str = "auto"

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 3:
            raise InvalidDimensionError(f"L must be an integer >= 3, got {self.L!r}")
        if (self.rho1 is None) == (self.ht1 is None):
            raise DomainError("give exactly one of rho1 and ht1")
        rho = rho_from_ht(self.ht1) if self.rho1 is None else float(self.rho1)
        rmax = math.cos(math.pi / (self.L + 1))
        if abs(rho) > rmax + 1e-15:
            raise InfeasibleConstraintError(
                f"|rho1|={abs(rho):.6g} exceeds rho_max(L={self.L})={rmax:.6g}"
            )
        if not self.scale > 0:
            raise DomainError("scale l must be positive")
        if self.branch not in ("auto", "smooth", "unsmooth"):
            raise DomainError(f"unknown branch {self.branch!r}")
        object.__setattr__(self, "rho1", rho)
        object.__setattr__(self, "ht1", ht_from_rho(rho) if abs(rho) < 1 else math.inf)


@dataclass
class SsaSolution:
    """Optimal causal filter and its diagnostics.

    ``nu`` is None for boundary solutions and for the degenerate case, and
    equals the pole ``2*lambda_{i0}`` for spectrally completed solutions.
    ``scale_d`` is the full multiplier ``D`` with ``b = D * (2M - nu I)^{-1} gamma``.
    """

    b: np.ndarray
    nu: float | None
    d_sign: int
    scale_d: float
    status: str
    branch: str
    iterations: int = 0
    residual: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def rho1(self) -> float:
        return self.diagnostics["acf1"]

    def lagrange_multipliers(self) -> tuple[float, float]:
        """Multipliers ``(lt1, lt2)`` with ``gamma = 2*lt1*b + 2*lt2*M*b``."""
        if self.nu is None or self.status == "completed":
            raise DomainError("multipliers are defined for interior solutions only")
        return -self.nu / (2.0 * self.scale_d), 1.0 / self.scale_d

    def to_dict(self) -> dict:
        def clean(v):
            if isinstance(v, (float, np.floating)):
                return float(v) if math.isfinite(v) else None
            if isinstance(v, (np.integer,)):
                return int(v)
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple, np.ndarray)):
                return [clean(x) for x in v]
            return v

        return clean({
            "b": list(self.b),
            "nu": self.nu,
            "d_sign": self.d_sign,
            "scale_d": self.scale_d,
            "status": self.status,
            "branch": self.branch,
            "iterations": self.iterations,
            "residual": self.residual,
            "diagnostics": self.diagnostics,
        })

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def to_csv(self) -> str:
        lines = ["lag,weight"]
        lines += ["%d,%.17g" % (k, x) for k, x in enumerate(self.b)]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the nu family

def _weights(gamma_delta, basis=None) -> tuple[np.ndarray, SpectralBasis, SpectralWeights]:
    g = np.asarray(gamma_delta, dtype=float)
    basis = basis or eigenpairs(len(g))
    return g, basis, spectral_weights(g, basis)


def _check_pole(sw: SpectralWeights, basis: SpectralBasis, nu: float):
    lam = basis.eigenvalues[list(sw.nz_set)]
    gap = np.min(np.abs(2.0 * lam - nu))
    if gap < POLE_TOL:
        raise SingularityError(f"nu={nu!r} lies within {gap:.2g} of a pole 2*lambda_i")


def b_of_nu(gamma_delta, nu: float, basis: SpectralBasis | None = None) -> np.ndarray:
    """``(2M - nu I)^{-1} gamma_delta`` (the solution family with ``|D| = 1``).

    Components with vanishing spectral weight are dropped exactly.
    """
    g, basis, sw = _weights(gamma_delta, basis)
    _check_pole(sw, basis, nu)
    w = sw.effective()
    den = 2.0 * basis.eigenvalues - nu
    coef = np.zeros_like(w)
    nz = sw.nz_mask
    coef[nz] = w[nz] / den[nz]
    return basis.eigenvectors @ coef


def rho_of_nu(sw: SpectralWeights, basis: SpectralBasis, nu: float) -> float:
    """Lag-one autocorrelation of ``b(nu)`` fed with white noise."""
    if not sw.nz_set:
        raise IdentifiabilityError("empty spectral support")
    idx = list(sw.nz_set)
    lam = basis.eigenvalues[idx]
    w = sw.w[idx]
    if not math.isfinite(nu):
        q = w * w
    else:
        den = 2.0 * lam - nu
        if np.min(np.abs(den)) < POLE_TOL:
            raise SingularityError(f"nu={nu!r} is a pole")
        # rescale to avoid overflow of 1/den**2 near poles
        c = w / den
        c = c / np.max(np.abs(c))
        q = c * c
    return float((lam * q).sum() / q.sum())


def rho_mse(gamma_delta) -> float:
    """Lag-one autocorrelation of the MSE filter ``gamma_delta`` itself."""
    return acf1(gamma_delta)


def _bisect_decreasing(f, lo: float, hi: float, target: float):
    """Root of a strictly decreasing ``f`` on ``[lo, hi]``.

    Returns ``(x, iterations, |f(x) - target|)``.
    """
    it = 0
    x = 0.5 * (lo + hi)
    fx = f(x) - target
    while it < MAX_BISECTIONS:
        it += 1
        x = 0.5 * (lo + hi)
        fx = f(x) - target
        if abs(fx) <= ROOT_TOL:
            break
        if fx > 0:
            lo = x
        else:
            hi = x
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            break
    return x, it, abs(fx)


def _finish(g, basis, b_unit, nu, status, branch, l, iterations, residual,
            target_norm2, extra=None) -> SsaSolution:
    nb = math.sqrt(float(b_unit @ b_unit))
    crit_unit = float(b_unit @ g)
    sign = 1 if crit_unit >= 0 else -1
    s = math.sqrt(l) / nb
    b = sign * s * b_unit
    diagnostics = _diagnostics(b, g, l, target_norm2)
    if extra:
        diagnostics.update(extra)
    return SsaSolution(
        b=b, nu=nu, d_sign=sign, scale_d=sign * s, status=status, branch=branch,
        iterations=iterations, residual=residual, diagnostics=diagnostics,
    )


def _diagnostics(b, g, l, target_norm2) -> dict:
    bb = float(b @ b)
    crit = float(b @ g)
    tn2 = float(g @ g) if target_norm2 is None else float(target_norm2)
    r = acf1(b)
    tc = crit / math.sqrt(bb * tn2)
    tc = min(1.0, max(-1.0, tc))
    return {
        "criterion_value": crit,
        "target_correlation": tc,
        "acf1": r,
        "holding_time": ht_from_rho(r) if abs(r) < 1 else math.inf,
        "sign_accuracy": sign_accuracy(tc),
        "mse_vs_target": tn2 - 2.0 * crit + bb,
        "rho_mse": acf1(g),
        "ht_mse": ht_from_rho(acf1(g)),
        "scale_l": l,
    }


def boundary_solution(gamma_delta, sign: int, l: float = 1.0,
                      target_norm2: float | None = None) -> SsaSolution:
    """Solution at ``rho1 = +rho_max`` (``sign=+1``) or ``-rho_max`` (``sign=-1``).

    The filter is the extreme eigenvector scaled to ``sqrt(l)`` with its sign
    chosen so that the criterion is positive.
    """
    g, basis, sw = _weights(gamma_delta)
    idx = 0 if sign > 0 else basis.L - 1
    if idx not in sw.nz_set:
        raise InfeasibleConstraintError(
            f"boundary solution needs a non-vanishing weight w_{idx + 1}"
        )
    v = basis.eigenvectors[:, idx]
    return _finish(g, basis, v.copy(), None, "boundary",
                   "smooth" if sign > 0 else "unsmooth", l, 0, 0.0, target_norm2)


def _degenerate(g, l, target_norm2) -> SsaSolution:
    basis = eigenpairs(len(g))
    sol = _finish(g, basis, g.copy(), math.inf, "degenerate", "none", l, 0, 0.0, target_norm2)
    return sol


def solve_ssa(gamma_delta, config: SsaConfig, target_norm2: float | None = None) -> SsaSolution:
    """Solve the SSA criterion for white-noise input.

    The constraint selects the branch: ``nu > 2`` if ``rho1`` exceeds the MSE
    filter's autocorrelation and ``nu < -2`` otherwise.  If the ``|nu| >= 2``
    region cannot reach ``rho1`` the search continues between ``+-2`` and the
    outermost pole of the spectral support, where ``rho(nu)`` is still
    monotone; such solutions carry ``status='extended'``.

    Parameters
    ----------
    gamma_delta : array_like
        MSE weights ``(gamma_delta, ..., gamma_{delta+L-1})``.
    config : SsaConfig
    target_norm2 : float, optional
        ``sum_k gamma_k**2`` of the full two-sided target; needed to report
        the correlation with the target instead of with its MSE predictor.

    Raises
    ------
    InfeasibleConstraintError
        If no ``nu`` attains ``rho1`` (band-limited targets).
    NumericalError
        If bracketing fails unexpectedly.
    """
    g = np.asarray(gamma_delta, dtype=float)
    if len(g) != config.L:
        raise InvalidDimensionError(f"gamma_delta has length {len(g)}, config.L = {config.L}")
    basis = eigenpairs(config.L)
    sw = spectral_weights(g, basis)
    rho1 = config.rho1
    l = config.scale
    r_mse = rho_of_nu(sw, basis, math.inf)

    if abs(rho1 - r_mse) <= DEGENERATE_TOL:
        return _degenerate(g, l, target_norm2)
    if rho1 >= basis.rho_max - 1e-15:
        return boundary_solution(g, +1, l, target_norm2)
    if rho1 <= -basis.rho_max + 1e-15:
        return boundary_solution(g, -1, l, target_norm2)

    branch = config.branch
    if branch == "auto":
        branch = "smooth" if rho1 > r_mse else "unsmooth"
    s = 1.0 if branch == "smooth" else -1.0

    def f(nu):
        return rho_of_nu(sw, basis, nu)

    # main branch |nu| >= 2: rho decreases from rho(+-2) towards rho_mse
    edge = s * (2.0 + BRACKET_EPS)
    f_edge = f(edge)
    status = "ok"
    if (branch == "smooth" and rho1 < f_edge) or (branch == "unsmooth" and rho1 > f_edge):
        if (branch == "smooth") != (rho1 > r_mse):
            raise InfeasibleConstraintError(
                f"rho1={rho1:.6g} is on the wrong side of rho_mse={r_mse:.6g} for branch {branch}"
            )
        k = 0
        far = s * (2.0 + BRACKET_EPS * 2.0)
        while (f(far) - rho1) * s > 0:
            k += 1
            if k > 200:
                raise NumericalError("bracket expansion failed")
            far = s * (2.0 + BRACKET_EPS * 2.0 ** (k + 1))
        lo, hi = (edge, far) if s > 0 else (far, edge)
        nu, it, res = _bisect_decreasing(f, lo, hi, rho1)
        it += k
    else:
        # continuation into (2*lambda_outer, 2) or (-2, 2*lambda_outer)
        outer = sw.nz_set[0] if s > 0 else sw.nz_set[-1]
        lam_outer = basis.eigenvalues[outer]
        if (s > 0 and rho1 >= lam_outer) or (s < 0 and rho1 <= lam_outer):
            raise InfeasibleConstraintError(
                f"rho1={rho1:.6g} is not attainable from the spectral support "
                f"(limit lambda_{outer + 1}={lam_outer:.6g}); try solve_completed"
            )
        pole = 2.0 * lam_outer
        lo, hi = (pole + 1e-12 * (1 + abs(pole)), 2.0 + BRACKET_EPS) if s > 0 else \
                 (-2.0 - BRACKET_EPS, pole - 1e-12 * (1 + abs(pole)))
        nu, it, res = _bisect_decreasing(f, lo, hi, rho1)
        status = "extended"

    nu = float(nu)
    b_unit = b_of_nu(g, nu, basis)
    sol = _finish(g, basis, b_unit, nu, status, branch, l, it, res, target_norm2)
    sol.residual = abs(sol.diagnostics["acf1"] - rho1)
    return sol


def _completion_candidates(g, basis, sw, rho1):
    nz = sw.nz_mask
    lam = basis.eigenvalues
    w = sw.effective()
    for i0 in range(basis.L):
        if nz[i0]:
            continue
        nu = float(2.0 * lam[i0])
        den = 2.0 * lam - nu
        c = np.zeros(basis.L)
        c[nz] = w[nz] / den[nz]
        m1 = float((lam * c * c).sum())
        m2 = float((c * c).sum())
        if lam[i0] == rho1:
            continue
        n2 = (rho1 * m2 - m1) / (lam[i0] - rho1)
        if not n2 > 0:
            continue
        yield i0, nu, c, math.sqrt(n2), m1, m2


def solve_completed(gamma_delta, config: SsaConfig,
                    target_norm2: float | None = None) -> SsaSolution:
    """SSA solution allowing spectral completion for incomplete support.

    Candidates are the ordinary solution from :func:`solve_ssa` (if it exists)
    and, for every eigenvector ``v_i0`` absent from the target, the filter
    ``sum_{i in NZ} w_i/(2lambda_i - 2lambda_i0) v_i + N v_i0`` whose weight ``N``
    is fixed by the autocorrelation constraint.  The candidate with the
    largest criterion value wins.
    """
    g = np.asarray(gamma_delta, dtype=float)
    if len(g) != config.L:
        raise InvalidDimensionError(f"gamma_delta has length {len(g)}, config.L = {config.L}")
    basis = eigenpairs(config.L)
    sw = spectral_weights(g, basis)
    l = config.scale
    candidates = []
    try:
        candidates.append(solve_ssa(g, config, target_norm2))
    except InfeasibleConstraintError:
        pass
    for i0, nu, c, n_tilde, m1, m2 in _completion_candidates(g, basis, sw, config.rho1):
        b_unit = basis.eigenvectors @ c + n_tilde * basis.eigenvectors[:, i0]
        sol = _finish(g, basis, b_unit, nu, "completed", "completed", l, 0, 0.0, target_norm2,
                      extra={"i0": i0 + 1, "n_tilde": n_tilde, "m1": m1, "m2": m2})
        sol.residual = abs(sol.diagnostics["acf1"] - config.rho1)
        candidates.append(sol)
    if not candidates:
        raise InfeasibleConstraintError(
            f"no ordinary or completed solution reaches rho1={config.rho1:.6g}"
        )
    best = candidates[0]
    for cand in candidates[1:]:
        if cand.diagnostics["criterion_value"] > best.diagnostics["criterion_value"] + 1e-12:
            best = cand
    return best


def solve_ssa_mse(gamma_delta, rho1: float, delta: int = 0,
                  target_norm2: float | None = None) -> SsaSolution:
    """SSA direction with the MSE-optimal length instead of a fixed ``b'b``.

    The returned filter is the :func:`solve_ssa` solution rescaled by
    ``b'gamma / b'b``.
    """
    g = np.asarray(gamma_delta, dtype=float)
    config = SsaConfig(L=len(g), rho1=rho1, delta=delta)
    sol = solve_ssa(g, config, target_norm2)
    if sol.status == "degenerate":
        b = g.copy()
    else:
        b = sol.b * float(sol.b @ g) / float(sol.b @ sol.b)
    factor = math.sqrt(float(b @ b))
    diag = _diagnostics(b, g, float(b @ b), target_norm2)
    return SsaSolution(
        b=b, nu=sol.nu, d_sign=sol.d_sign, scale_d=sol.scale_d * factor,
        status=sol.status, branch=sol.branch, iterations=sol.iterations,
        residual=sol.residual, diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# dual verification

@dataclass
class DualReport:
    """Outcome of :func:`verify_dual`.

    ``direction`` is ``'max'`` when no feasible competitor may exceed the
    solution's autocorrelation and ``'min'`` when none may fall below it.
    """

    trials: int
    violations: int
    direction: str
    rho1: float
    extreme_acf1: float | None
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return self.violations == 0


def verify_dual(solution: SsaSolution, gamma_delta, trials: int = 10_000,
                seed: int | None = 0, tol: float = 1e-8) -> DualReport:
    """Check that the solution is extremal in autocorrelation at fixed accuracy.

    Random perturbations of ``b`` are projected back onto the set of filters
    with the same length ``b'b`` and the same criterion value ``b'gamma``
    (a sphere intersected with a hyperplane); their autocorrelation is
    compared with the solution's.
    """
    g = np.asarray(gamma_delta, dtype=float)
    b = np.asarray(solution.b, dtype=float)
    rho = acf1(b)
    direction = "max" if (solution.nu is None or solution.nu > 0) else "min"
    if trials <= 0:
        return DualReport(0, 0, direction, rho, None)
    rng = np.random.default_rng(seed)
    l = float(b @ b)
    gg = float(g @ g)
    c = float(b @ g)
    centre = (c / gg) * g
    radius = math.sqrt(max(l - c * c / gg, 0.0))
    ghat = g / math.sqrt(gg)
    violations = 0
    skipped = 0
    extreme = -math.inf if direction == "max" else math.inf
    done = 0
    while done < trials:
        step = 10.0 ** rng.uniform(-6, 0) * math.sqrt(l)
        cand = b + step * rng.standard_normal(len(b))
        u = cand - centre
        u -= (u @ ghat) * ghat
        nu_ = math.sqrt(float(u @ u))
        if nu_ < 1e-14:
            skipped += 1
            continue
        cand = centre + radius * u / nu_
        r = acf1(cand)
        if direction == "max":
            extreme = max(extreme, r)
            violations += r > rho + tol
        else:
            extreme = min(extreme, r)
            violations += r < rho - tol
        done += 1
    return DualReport(trials, int(violations), direction, rho, extreme, skipped)
