"""Least-squares calibration of (beta, delta, K) to monthly count series.

The fit forward-simulates the basic two-sex model (no supermales, s = 0)
from the first observation and minimizes the sum of squared residuals of
the total population with a bounded Nelder-Mead simplex search. Equal-sex
initial conditions are assumed when only totals are given (the dynamics
preserve f = m in that case).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import FitDivergedError, ParameterError
from .integrate import TimeGrid, integrate_forward
from .params import LifeParams, ModelId, ModelSpec, State

#: Default box constraints for the simplex search.
DEFAULT_BOUNDS = ((1e-5, 1.0), (1e-4, 0.999), (1.0, 1e5))

#: Sub-sampling step (months) used when simulating between observations.
FIT_DT = 0.05


@dataclass
class ObservationSeries:
    """Monthly population counts.

    times must be strictly increasing; counts are totals. When sex-split
    data is available f_counts/m_counts carry it and counts holds the sum.
    init is the model state at times[0].
    """

    times: np.ndarray
    counts: np.ndarray
    init: State
    f_counts: np.ndarray | None = None
    m_counts: np.ndarray | None = None
    source: str = "totals"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.counts.shape:
            raise ParameterError("times and counts must be 1-D arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("observation times must be strictly increasing")
        if np.any(self.counts < 0):
            raise ParameterError("counts must be nonnegative")

    def __len__(self) -> int:
        return len(self.times)

    @classmethod
    def from_arrays(cls, times, counts) -> "ObservationSeries":
        times = np.asarray(times, dtype=float)
        counts = np.asarray(counts, dtype=float)
        init = State(counts[0] / 2.0, counts[0] / 2.0, 0.0)
        return cls(times=times, counts=counts, init=init, source="totals")

    @classmethod
    def from_split_arrays(cls, times, f_counts, m_counts) -> "ObservationSeries":
        times = np.asarray(times, dtype=float)
        f_counts = np.asarray(f_counts, dtype=float)
        m_counts = np.asarray(m_counts, dtype=float)
        init = State(f_counts[0], m_counts[0], 0.0)
        return cls(
            times=times,
            counts=f_counts + m_counts,
            init=init,
            f_counts=f_counts,
            m_counts=m_counts,
            source="sex-split",
        )

    @classmethod
    def from_csv(cls, path) -> "ObservationSeries":
        """Read `t,count` or `t,f,m` rows (header required)."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip().lower() for h in next(reader)]
            except StopIteration:
                raise ParameterError(f"{path}: empty file") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    rows.append([float(c) for c in row])
                except ValueError as exc:
                    raise ParameterError(f"{path}:{lineno}: {exc}") from None
        if header[:2] == ["t", "count"] and len(header) == 2:
            data = np.asarray(rows, dtype=float)
            if data.ndim != 2 or data.shape[1] != 2:
                raise ParameterError(f"{path}: expected 2 columns (t,count)")
            return cls.from_arrays(data[:, 0], data[:, 1])
        if header[:3] == ["t", "f", "m"] and len(header) == 3:
            data = np.asarray(rows, dtype=float)
            if data.ndim != 2 or data.shape[1] != 3:
                raise ParameterError(f"{path}: expected 3 columns (t,f,m)")
            return cls.from_split_arrays(data[:, 0], data[:, 1], data[:, 2])
        raise ParameterError(
            f"{path}: header must be 't,count' or 't,f,m', got {','.join(header)!r}"
        )


@dataclass
class FitResult:
    params: LifeParams
    sse: float
    n_evals: int
    converged: bool
    source: str = "totals"
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "sse": self.sse,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "source": self.source,
            "warnings": list(self.warnings),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _predict_trajectory(params: LifeParams, data: ObservationSeries, dt: float):
    spec = ModelSpec(ModelId.TYC0, mu=0.0)
    t0, t_end = float(data.times[0]), float(data.times[-1])
    n = max(1, int(round((t_end - t0) / dt)))
    grid = TimeGrid(t0=t0, t_end=t_end, n_steps=n)
    traj = integrate_forward(spec, params, data.init, grid)
    return grid.times(), traj


def predict_totals(params: LifeParams, data: ObservationSeries, dt: float = FIT_DT) -> np.ndarray:
    """Model total population at the observation times, simulated from
    data.init with the supermale-free model."""
    times, traj = _predict_trajectory(params, data, dt)
    return np.interp(data.times, times, traj.f + traj.m + traj.s)


def predict_components(
    params: LifeParams, data: ObservationSeries, dt: float = FIT_DT
) -> tuple[np.ndarray, np.ndarray]:
    """Model (f, m) at the observation times; used for sex-split fits."""
    times, traj = _predict_trajectory(params, data, dt)
    return np.interp(data.times, times, traj.f), np.interp(data.times, times, traj.m)


def fit_life_params(
    data: ObservationSeries,
    initial_guess: LifeParams,
    bounds: tuple = DEFAULT_BOUNDS,
    max_evals: int = 20000,
    restarts: int = 2,
    dt: float = FIT_DT,
) -> FitResult:
    """Fit (beta, delta, K) by bounded Nelder-Mead on the SSE of totals.

    The search restarts from its own optimum a couple of times to crawl
    down the (beta, K) trade-off valley. Observations at equilibrium carry
    no transient information, which is flagged as a warning on the result.
    """
    if len(data) < 4:
        raise ParameterError(f"need >= 4 observations to fit 3 parameters, got {len(data)}")
    lo = np.array([b[0] for b in bounds], dtype=float)
    hi = np.array([b[1] for b in bounds], dtype=float)
    guess = np.array([initial_guess.beta, initial_guess.delta, initial_guess.cap_k])
    if np.any(guess < lo) or np.any(guess > hi):
        raise ParameterError("initial guess must lie inside the bounds")

    evals = 0
    split = data.source == "sex-split"

    def sse_of(vec: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        vec = np.clip(vec, lo, hi)
        try:
            p = LifeParams(beta=float(vec[0]), delta=float(vec[1]), cap_k=float(vec[2]))
            if split:
                pf, pm = predict_components(p, data, dt=dt)
                rf = pf - data.f_counts
                rm = pm - data.m_counts
                return float(rf @ rf + rm @ rm)
            pred = predict_totals(p, data, dt=dt)
        except Exception:
            return 1e30
        resid = pred - data.counts
        return float(resid @ resid)

    sse_guess = sse_of(guess)
    x = guess.copy()
    best = sse_guess
    converged = False
    for _ in range(max(1, restarts + 1)):
        res = optimize.minimize(
            sse_of,
            x,
            method="Nelder-Mead",
            bounds=optimize.Bounds(lo, hi),
            options={
                "maxfev": max_evals,
                "xatol": 1e-10,
                "fatol": 1e-14 * max(1.0, best),
                "adaptive": True,
            },
        )
        if res.fun <= best:
            x = np.clip(res.x, lo, hi)
            best = float(res.fun)
        converged = bool(res.success) or converged
        if best <= 1e-18 * max(1.0, float(data.counts @ data.counts)):
            break
    if not math.isfinite(best) or best >= 1e30:
        raise FitDivergedError("simplex search never produced a finite objective")
    if best > sse_guess:
        # never worse than the starting point (projection keeps it feasible)
        x, best = guess, sse_guess

    warnings = []
    spread = float(np.max(data.counts) - np.min(data.counts))
    if spread <= 1e-6 * max(1.0, float(np.max(data.counts))):
        warnings.append(
            "observations are constant (population at equilibrium): the fit carries no "
            "transient information and beta/delta are only weakly identified"
        )
    fitted = LifeParams(beta=float(x[0]), delta=float(x[1]), cap_k=float(x[2]))
    return FitResult(
        params=fitted,
        sse=best,
        n_evals=evals,
        converged=converged,
        source=data.source,
        warnings=warnings,
    )


def synthesize_observations(
    params: LifeParams,
    init: State,
    times,
    noise: float = 0.0,
    seed: int | None = None,
    split: bool = False,
) -> ObservationSeries:
    """Generate a synthetic monthly series from the supermale-free model,
    optionally with multiplicative (1 + noise*z) error, z ~ N(0,1) with a
    fixed seed (applied per sex for split series). Used to build the
    bundled sample data."""
    times = np.asarray(times, dtype=float)
    probe = ObservationSeries(times=times, counts=np.zeros_like(times), init=init)
    if split:
        f, m = predict_components(params, probe, dt=FIT_DT)
        if noise > 0.0:
            rng = np.random.default_rng(seed)
            f = np.maximum(f * (1.0 + noise * rng.standard_normal(f.shape)), 0.0)
            m = np.maximum(m * (1.0 + noise * rng.standard_normal(m.shape)), 0.0)
        return ObservationSeries.from_split_arrays(times, f, m)
    totals = predict_totals(params, probe, dt=FIT_DT)
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        totals = np.maximum(totals * (1.0 + noise * rng.standard_normal(totals.shape)), 0.0)
    return ObservationSeries.from_arrays(times, totals)


def observations_to_csv(data: ObservationSeries, path) -> None:
    with open(path, "w", newline="") as fh:
        if data.source == "sex-split":
            fh.write("t,f,m\n")
            for t, f, m in zip(data.times, data.f_counts, data.m_counts):
                fh.write(f"{t:g},{format(float(f), '.17g')},{format(float(m), '.17g')}\n")
        else:
            fh.write("t,count\n")
            for t, c in zip(data.times, data.counts):
                fh.write(f"{t:g},{format(float(c), '.17g')}\n")
