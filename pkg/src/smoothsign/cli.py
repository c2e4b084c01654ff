"""Command line front end.

Subcommands
-----------
solve      compute an SSA filter and write coefficients and diagnostics
filter     apply a coefficient file to a series
simulate   write a simulated series
validate   run a built-in reproduction experiment
nowcast    ingest a series, transform it, solve, and write aligned output

Errors are reported on stderr as one JSON object ``{"error": code, "message": ...}``
and the process exits with status 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .empirics import (
    RNG_ALGORITHM,
    apply_filter,
    crossings,
    empirical_holding_time,
    generate,
    heavy_tail_experiment,
    make_rng,
    sample_acf1,
)
from .errors import DataError, DomainError, SsaError
from .integrated import IntegratedConfig, solve_i1_ssa, solve_i2_ssa
from .spectral import acf1
from .ssa_core import SsaConfig, ht_from_rho, sign_accuracy, solve_completed, solve_ssa
from .stationary_ext import ProcessModel, mse_predictor_dependent, solve_ssa_dependent
from .targets import TargetSpec, bk_two_sided, hp_two_sided, wn_mse_nowcast

__all__ = ["DatedSeries", "RunConfig", "ingest_csv", "transform", "run", "main"]


# ---------------------------------------------------------------------------
# data ingestion

@dataclass
class DatedSeries:
    dates: list
    values: np.ndarray

    def __len__(self):
        return len(self.values)


_MISSING = {"", ".", "na", "nan", "NA", "NaN"}


def _parse_date(text: str) -> date:
    text = text.strip()
    if re.fullmatch(r"\d{4}-\d{2}", text):
        return date(int(text[:4]), int(text[5:7]), 1)
    return date.fromisoformat(text)


def ingest_csv(path) -> DatedSeries:
    """Read a two-column ``date,value`` CSV with a header row.

    Missing values (empty or ``.``) and unparseable rows raise
    :class:`DataError` naming the line; dates must increase strictly.
    """
    dates, values = [], []
    last = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise DataError(f"line {line}: expected 'date,value', got {row!r}")
            raw_date, raw_val = row[0].strip(), row[1].strip()
            try:
                stamp = _parse_date(raw_date)
            except ValueError:
                raise DataError(f"line {line}: cannot parse date {raw_date!r}") from None
            if raw_val in _MISSING:
                raise DataError(f"line {line}: missing value for {raw_date}")
            try:
                val = float(raw_val)
            except ValueError:
                raise DataError(f"line {line}: cannot parse value {raw_val!r}") from None
            if not math.isfinite(val):
                raise DataError(f"line {line}: non-finite value")
            if last is not None and stamp <= last:
                raise DataError(f"line {line}: dates not strictly increasing ({raw_date})")
            last = stamp
            dates.append(raw_date)
            values.append(val)
    if not values:
        raise DataError(f"{path}: no observations")
    return DatedSeries(dates, np.array(values))


def transform(series, ops) -> DatedSeries | np.ndarray:
    """Apply ``log`` and ``diff`` in order.  ``diff`` drops the first observation."""
    dated = isinstance(series, DatedSeries)
    values = np.asarray(series.values if dated else series, dtype=float)
    dates = list(series.dates) if dated else None
    for op in ops:
        if op == "log":
            bad = np.flatnonzero(values <= 0)
            if len(bad):
                raise DataError(f"log of non-positive value at index {int(bad[0])}")
            values = np.log(values)
        elif op == "diff":
            if len(values) < 2:
                raise DataError("diff needs at least two observations")
            values = np.diff(values)
            if dates is not None:
                dates = dates[1:]
        else:
            raise DomainError(f"unknown transform {op!r}")
    return DatedSeries(dates, values) if dated else values


def _write_series(path, dates, values, header=("date", "value")):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d, v in zip(dates, values):
            w.writerow([d, "%.17g" % v])


def read_coefficients(path) -> np.ndarray:
    """Read a ``lag,weight`` CSV as written by ``solve``."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        for row in reader:
            if not row:
                continue
            try:
                out[int(row[0])] = float(row[1])
            except (ValueError, IndexError):
                raise DataError(f"line {reader.line_num}: bad coefficient row {row!r}") from None
    if not out or sorted(out) != list(range(len(out))):
        raise DataError(f"{path}: lags must be 0..L-1")
    return np.array([out[k] for k in range(len(out))])


def _write_coefficients(path, b):
    with open(path, "w") as fh:
        fh.write("lag,weight\n")
        for k, x in enumerate(b):
            fh.write("%d,%.17g\n" % (k, x))


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    subcommand: str
    target: str = "hp:1600"
    half_span: str = "window"
    rho1: float | None = None
    ht1: float | None = None
    model: ProcessModel = field(default_factory=ProcessModel.white_noise)
    d: int = 0
    L: int = 101
    L_tilde: int | None = None
    delta: int = 0
    completed: bool = False
    input: str | None = None
    coefs: str | None = None
    out: str | None = None
    transforms: tuple = ()
    seed: int = 1
    n: int = 1_000_000
    kind: str = "gaussian_wn"
    df: float | None = None
    a: float | None = None
    experiment: str = "heavy-tails"
    format: str = "json"

    def __post_init__(self):
        if self.d not in (0, 1, 2):
            raise DomainError("d must be 0, 1 or 2")
        if self.d > 0 and self.subcommand not in ("solve", "nowcast", "simulate"):
            raise DomainError("integration order applies to solve, nowcast and simulate only")


def build_target(spec: str, L: int, delta: int, half_span: str) -> TargetSpec:
    """Parse ``hp:<lambda>`` or ``bk:<period_low>,<period_high>``."""
    kind, _, params = spec.partition(":")
    try:
        nums = [float(p) for p in params.split(",")] if params else []
    except ValueError:
        raise DomainError(f"cannot parse target {spec!r}") from None
    if half_span == "window":
        span = max(1, (L - 1) // 2)
    elif half_span == "auto":
        span = None
    else:
        try:
            span = int(half_span)
        except ValueError:
            raise DomainError(f"half span must be 'window', 'auto' or an integer, got {half_span!r}") from None
    if kind == "hp" and len(nums) == 1:
        if span is None:
            return hp_two_sided(nums[0], delta=delta, L=L)
        return hp_two_sided(nums[0], span, tail_tol=None, delta=delta, L=L)
    if kind == "bk" and len(nums) == 2:
        return bk_two_sided(nums[0], nums[1], 12 if span is None else span, delta=delta, L=L)
    raise DomainError(f"unknown target {spec!r}; use hp:<lambda> or bk:<low>,<high>")


# ---------------------------------------------------------------------------
# commands

def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _solve(cfg: RunConfig):
    """Return ``(b, diagnostics)`` for the configured problem."""
    target = build_target(cfg.target, cfg.L, cfg.delta, cfg.half_span)
    if cfg.d > 0:
        if cfg.rho1 is None and cfg.ht1 is None:
            raise DomainError("need --rho1 or --ht1")
        rho1 = cfg.rho1 if cfg.rho1 is not None else math.cos(math.pi / cfg.ht1)
        icfg = IntegratedConfig(d=cfg.d, rho1=rho1, L=cfg.L, L_tilde=cfg.L_tilde, delta=cfg.delta)
        solver = solve_i1_ssa if cfg.d == 1 else solve_i2_ssa
        sol = solver(target, cfg.model, icfg)
        diag = dict(sol.diagnostics)
        diag.update(lambda_tilde=sol.lambda_tilde, gamma0=sol.gamma0, gamma0_dot=sol.gamma0_dot,
                    acf1=diag["acf1_of_diff"], holding_time=diag["ht_of_diff"],
                    mse=diag["mse_vs_benchmark"], branch="integrated",
                    iterations=len(diag["roots"]), d=cfg.d)
        benchmark = mse_predictor_dependent(target, cfg.model, cfg.L, cfg.delta, d=cfg.d)
        return sol.b_x, diag, benchmark
    config = SsaConfig(L=cfg.L, rho1=cfg.rho1, ht1=cfg.ht1, delta=cfg.delta)
    if cfg.model.kind == "white_noise":
        gamma = wn_mse_nowcast(target)
        solver = solve_completed if cfg.completed else solve_ssa
        sol = solver(gamma, config, target.norm2())
        diag = dict(sol.diagnostics)
        diag.update(nu=sol.nu, status=sol.status, branch=sol.branch,
                    iterations=sol.iterations, residual=sol.residual,
                    mse=diag["mse_vs_target"], target_holding_time=ht_from_rho(target.acf1()))
        return sol.b, diag, gamma
    dep = solve_ssa_dependent(target, cfg.model, config, completed=cfg.completed)
    diag = dict(dep.diagnostics)
    diag["mse"] = dep.ssa.diagnostics["mse_vs_target"]
    return dep.b_x, diag, dep.gamma_x


def _out_dir(cfg: RunConfig) -> str:
    path = cfg.out or "."
    os.makedirs(path, exist_ok=True)
    return path


def cmd_solve(cfg: RunConfig) -> dict:
    b, diag, _ = _solve(cfg)
    diag = _clean(diag)
    diag["target"] = cfg.target
    diag["L"] = cfg.L
    diag["delta"] = cfg.delta
    if cfg.out is None:
        if cfg.format == "csv":
            sys.stdout.write("lag,weight\n" + "".join("%d,%.17g\n" % (k, x) for k, x in enumerate(b)))
        else:
            sys.stdout.write(json.dumps({"b": [float(x) for x in b], "diagnostics": diag}) + "\n")
        return diag
    out = _out_dir(cfg)
    _write_coefficients(os.path.join(out, "coefficients.csv"), b)
    with open(os.path.join(out, "diagnostics.json"), "w") as fh:
        json.dump(diag, fh, indent=2)
    return diag


def cmd_filter(cfg: RunConfig) -> dict:
    if not cfg.coefs or not cfg.input:
        raise DomainError("filter needs --coefs and --input")
    b = read_coefficients(cfg.coefs)
    series = transform(ingest_csv(cfg.input), cfg.transforms)
    y = apply_filter(b, series.values)
    dates = series.dates[len(b) - 1:]
    path = cfg.out or "nowcast.csv"
    _write_series(path, dates, y)
    return {"written": path, "n": len(y)}


def cmd_simulate(cfg: RunConfig) -> dict:
    kind = cfg.kind
    kwargs = {}
    if kind == "t_wn":
        kwargs["df"] = cfg.df
    elif kind == "ar1":
        kwargs["a"] = cfg.a
    elif kind in ("arma", "arima"):
        kwargs["model"] = cfg.model
        if kind == "arima":
            kwargs["d"] = max(cfg.d, 1)
    x = generate(kind, cfg.n, cfg.seed, **kwargs)
    path = cfg.out or "simulated.csv"
    _write_series(path, range(len(x)), x, header=("t", "value"))
    return {"written": path, "n": len(x), "rng": RNG_ALGORITHM, "seed": cfg.seed}


def _hp_example_filters(L=101):
    target = hp_two_sided(1600, (L - 1) // 2, tail_tol=None, delta=0, L=L)
    g = wn_mse_nowcast(target)
    out = {"MSE": g / np.linalg.norm(g)}
    for r in (0.97, 0.8):
        out[f"SSA({r:g},0)"] = solve_ssa(g, SsaConfig(L=L, rho1=r), target.norm2()).b
    return target, g, out


def cmd_validate(cfg: RunConfig) -> dict:
    if cfg.experiment == "heavy-tails":
        _, _, filters = _hp_example_filters()
        table = heavy_tail_experiment(filters, n=cfg.n, seed=cfg.seed)
        path = cfg.out or "heavy_tails.csv"
        table.to_csv(path, float_format="%.6g")
        return {"written": path, "rng": RNG_ALGORITHM, "seed": cfg.seed, "n": cfg.n}
    if cfg.experiment == "hp-example":
        target, g, filters = _hp_example_filters()
        rows = {}
        for name, b in filters.items():
            tc = float(b @ g) / math.sqrt(target.norm2())
            r = acf1(b)
            rows[name] = {"target_correlation": tc, "sign_accuracy": sign_accuracy(tc),
                          "acf1": r, "holding_time": ht_from_rho(r)}
        rows["target_holding_time"] = ht_from_rho(target.acf1())
        path = cfg.out or "hp_example.json"
        with open(path, "w") as fh:
            json.dump(rows, fh, indent=2)
        return {"written": path}
    if cfg.experiment == "rice":
        rng = make_rng(cfg.seed)
        eps = generate("gaussian_wn", cfg.n, cfg.seed + 1)
        rows = []
        for rho in np.linspace(-0.85, 0.85, 10):
            b = _filter_with_acf1(rho, 12, rng)
            emp = empirical_holding_time(apply_filter(b, eps))
            rows.append((rho, ht_from_rho(rho), emp))
        path = cfg.out or "rice.csv"
        with open(path, "w") as fh:
            fh.write("acf1,theoretical_ht,empirical_ht\n")
            for r in rows:
                fh.write("%.10g,%.10g,%.10g\n" % r)
        return {"written": path}
    raise DomainError(f"unknown experiment {cfg.experiment!r}")


def _filter_with_acf1(rho, L, rng) -> np.ndarray:
    """Random unit filter of length ``L`` with lag-one autocorrelation ``rho``."""
    gamma = rng.standard_normal(L)
    return solve_ssa(gamma, SsaConfig(L=L, rho1=float(rho))).b


def cmd_nowcast(cfg: RunConfig) -> dict:
    if not cfg.input:
        raise DomainError("nowcast needs --input")
    series = transform(ingest_csv(cfg.input), cfg.transforms)
    if len(series) < cfg.L:
        raise DataError(f"series has {len(series)} observations, filter needs {cfg.L}")
    b, diag, benchmark = _solve(cfg)
    out = _out_dir(cfg)
    _write_coefficients(os.path.join(out, "coefficients.csv"), b)
    y = apply_filter(b, series.values)
    y_mse = apply_filter(benchmark, series.values)
    dates = series.dates[cfg.L - 1:]
    _write_series(os.path.join(out, "nowcast.csv"), dates, y)
    _write_series(os.path.join(out, "benchmark.csv"), dates, y_mse)
    diag = _clean(diag)
    diag["coefficient_sum"] = float(np.sum(b))
    if cfg.d >= 1:
        dy = np.diff(y, n=cfg.d)
        ddates = dates[cfg.d:]
        cross = set(crossings(dy).tolist())
        with open(os.path.join(out, "differences.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["date", "value", "crossing"])
            for i, (dt, v) in enumerate(zip(ddates, dy)):
                w.writerow([dt, "%.17g" % v, int(i in cross)])
        diag["sample_ht_of_diff"] = _clean(empirical_holding_time(dy)) if len(dy) > 1 else None
        diag["sample_acf1_of_diff"] = sample_acf1(dy) if len(dy) > 2 else None
    with open(os.path.join(out, "diagnostics.json"), "w") as fh:
        json.dump(diag, fh, indent=2)
    return diag


COMMANDS = {
    "solve": cmd_solve,
    "filter": cmd_filter,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "nowcast": cmd_nowcast,
}


def run(config: RunConfig) -> dict:
    """Execute one subcommand and return its summary."""
    return COMMANDS[config.subcommand](config)


# ---------------------------------------------------------------------------
# argument parsing

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothsign", description="Smooth sign accuracy filters")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def problem(sp):
        sp.add_argument("--target", default="hp:1600", help="hp:<lambda> or bk:<low>,<high>")
        sp.add_argument("--half-span", default="window",
                        help="'window' ((L-1)//2), 'auto' (tail-checked), or an integer")
        sp.add_argument("--L", type=int, default=101)
        sp.add_argument("--L-tilde", type=int, default=None)
        sp.add_argument("--delta", type=int, default=0)
        c = sp.add_mutually_exclusive_group()
        c.add_argument("--rho1", type=float)
        c.add_argument("--ht1", type=float)
        sp.add_argument("--model", default="wn", help="wn, ar:0.3, ar:0.5;ma:0.3 or JSON")
        sp.add_argument("--d", type=int, default=0, choices=(0, 1, 2))
        sp.add_argument("--completed", action="store_true",
                        help="allow spectral completion for band-limited targets")

    s = sub.add_parser("solve")
    problem(s)
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    f = sub.add_parser("filter")
    f.add_argument("--coefs", required=True)
    f.add_argument("--input", required=True)
    f.add_argument("--transform", default="")
    f.add_argument("--out")

    m = sub.add_parser("simulate")
    m.add_argument("--kind", default="gaussian_wn",
                   choices=("gaussian_wn", "t_wn", "ar1", "arma", "arima"))
    m.add_argument("--n", type=int, default=1000)
    m.add_argument("--seed", type=int, default=1)
    m.add_argument("--df", type=float)
    m.add_argument("--a", type=float)
    m.add_argument("--model", default="wn")
    m.add_argument("--d", type=int, default=0, choices=(0, 1, 2))
    m.add_argument("--out")

    v = sub.add_parser("validate")
    v.add_argument("--experiment", default="heavy-tails", choices=("heavy-tails", "hp-example", "rice"))
    v.add_argument("--n", type=int, default=1_000_000)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--out")

    n = sub.add_parser("nowcast")
    problem(n)
    n.add_argument("--input", required=True)
    n.add_argument("--transform", default="", help="comma-separated list of log, diff")
    n.add_argument("--out")
    return p


def _config_from_args(args) -> RunConfig:
    kw = {"subcommand": args.subcommand}
    for name in ("target", "half_span", "rho1", "ht1", "d", "L", "L_tilde", "delta", "completed",
                 "input", "coefs", "out", "seed", "n", "kind", "df", "a", "experiment", "format"):
        if hasattr(args, name) and getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    if getattr(args, "model", None):
        kw["model"] = ProcessModel.parse(args.model)
    if getattr(args, "transform", ""):
        kw["transforms"] = tuple(t.strip() for t in args.transform.split(",") if t.strip())
    return RunConfig(**kw)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        run(_config_from_args(args))
    except SsaError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 2
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
