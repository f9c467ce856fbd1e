"""Fixed-step RK4 integration of the model ODEs (forward) and their
costate systems (backward) on a shared time grid.

Controls are piecewise-linear between grid nodes; the classical RK4
half-step therefore sees the node average. States are clipped to zero when
roundoff drives them within -1e-9, and a divergence guard aborts once any
component exceeds 10*K (these systems are known to blow up in finite time
for aggressive supermale introduction, so the guard is a hard error rather
than a warning).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, GridMismatchError, NegativeStateError, ParameterError
from .models import make_adjoint_rhs, make_rhs, make_rhs_batch
from .params import LifeParams, ModelId, ModelSpec, State, check_compatible

#: Negative undershoot from roundoff clipped to zero below this magnitude.
NEGATIVE_TOL = 1e-9

#: Multiple of the carrying capacity treated as divergence.
BLOWUP_FACTOR = 10.0

#: Default step (months); converged to plotting accuracy for these systems.
DEFAULT_DT = 0.05


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid with n_steps intervals on [t0, t_end]."""

    t0: float
    t_end: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ParameterError(f"n_steps must be >= 1, got {self.n_steps}")
        if not (math.isfinite(self.t0) and math.isfinite(self.t_end)) or self.t_end <= self.t0:
            raise ParameterError(f"need finite t_end > t0, got [{self.t0}, {self.t_end}]")

    @property
    def dt(self) -> float:
        return (self.t_end - self.t0) / self.n_steps

    @property
    def n_nodes(self) -> int:
        return self.n_steps + 1

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_nodes)

    @classmethod
    def from_horizon(cls, t_end: float, dt: float = DEFAULT_DT, t0: float = 0.0) -> "TimeGrid":
        n = int(round((t_end - t0) / dt))
        return cls(t0=t0, t_end=t0 + n * dt, n_steps=max(n, 1))


def _require_same_grid(a: TimeGrid, b: TimeGrid, what: str) -> None:
    if a != b:
        raise GridMismatchError(f"{what} must share the integration grid ({a} vs {b})")


@dataclass
class ControlSchedule:
    """Node-indexed control values on a grid.

    One channel ("mu") for the TYC model, two ("eta1", "eta2") otherwise.
    Values are stored as a (n_channels, n_nodes) array.
    """

    grid: TimeGrid
    names: tuple
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim == 1:
            self.values = self.values[None, :]
        if self.values.shape != (len(self.names), self.grid.n_nodes):
            raise ParameterError(
                f"control array shape {self.values.shape} does not match "
                f"{len(self.names)} channel(s) on {self.grid.n_nodes} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("control values must be finite")
        if np.any(self.values < 0.0):
            raise ParameterError("control values must be nonnegative")

    @staticmethod
    def channel_names(model_id: ModelId) -> tuple:
        return ("mu",) if model_id.is_tyc else ("eta1", "eta2")

    @classmethod
    def constant(cls, grid: TimeGrid, spec: ModelSpec) -> "ControlSchedule":
        names = cls.channel_names(spec.model_id)
        if spec.model_id.is_tyc:
            consts = [spec.mu]
        else:
            consts = [spec.eta1, spec.eta2]
        values = np.tile(np.asarray(consts, dtype=float)[:, None], (1, grid.n_nodes))
        return cls(grid=grid, names=names, values=values)

    @classmethod
    def zeros(cls, grid: TimeGrid, model_id: ModelId) -> "ControlSchedule":
        names = cls.channel_names(model_id)
        return cls(grid=grid, names=names, values=np.zeros((len(names), grid.n_nodes)))

    def channel(self, name: str) -> np.ndarray:
        return self.values[self.names.index(name)]

    def copy_with(self, values: np.ndarray) -> "ControlSchedule":
        return ControlSchedule(grid=self.grid, names=self.names, values=np.array(values))


@dataclass
class Trajectory:
    """State samples on a grid; states[0] is the initial condition exactly."""

    grid: TimeGrid
    states: np.ndarray  # (n_nodes, 3)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.shape != (self.grid.n_nodes, 3):
            raise ParameterError(
                f"trajectory shape {self.states.shape} does not match grid "
                f"({self.grid.n_nodes} nodes)"
            )

    @property
    def f(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def m(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 2]

    def state_at(self, i: int) -> State:
        return State(*self.states[i])

    def final_state(self) -> State:
        return self.state_at(-1)


@dataclass
class AdjointTrajectory:
    """Costate samples on a grid; the terminal node is exactly zero."""

    grid: TimeGrid
    values: np.ndarray  # (n_nodes, 3); third column 0 for the 2-D models

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes, 3):
            raise ParameterError("adjoint array shape does not match grid")


def _control_nodes(
    spec: ModelSpec, grid: TimeGrid, schedule: ControlSchedule | None
) -> tuple[list, list]:
    """Per-node (u1, u2) lists, u2 zeros for the TYC model."""
    n_nodes = grid.n_nodes
    if schedule is None:
        schedule = ControlSchedule.constant(grid, spec)
    else:
        _require_same_grid(schedule.grid, grid, "control schedule")
        if schedule.names != ControlSchedule.channel_names(spec.model_id):
            raise ParameterError(
                f"schedule channels {schedule.names} do not match model {spec.model_id}"
            )
    if spec.model_id.is_tyc:
        u1 = schedule.values[0].tolist()
        u2 = [0.0] * n_nodes
    else:
        u1 = schedule.values[0].tolist()
        u2 = schedule.values[1].tolist()
    return u1, u2


def integrate_forward(
    spec: ModelSpec,
    params: LifeParams,
    init: State,
    grid: TimeGrid,
    schedule: ControlSchedule | None = None,
) -> Trajectory:
    """Classical RK4 forward integration under constant or scheduled
    controls.

    Raises BlowUpError when any component exceeds 10*K and
    NegativeStateError when a component undershoots below -1e-9 (smaller
    undershoots are clipped to 0). Stage evaluations clamp states at 0 so
    the power-harvest terms stay real.
    """
    if not init.is_nonnegative():
        raise NegativeStateError(f"initial state must be nonnegative, got {init.as_tuple()}")
    if spec.model_id.is_two_dim and init.s != 0.0:
        raise ParameterError("harvesting models carry s identically 0")
    check_compatible(spec, params)

    rhs = make_rhs(spec, params)
    u1n, u2n = _control_nodes(spec, grid, schedule)
    n = grid.n_steps
    dt = grid.dt
    half = 0.5 * dt
    sixth = dt / 6.0
    guard = BLOWUP_FACTOR * params.cap_k

    out = np.empty((n + 1, 3), dtype=float)
    f, m, s = init.f, init.m, init.s
    out[0] = (f, m, s)
    for i in range(n):
        a1, b1 = u1n[i], u2n[i]
        a4, b4 = u1n[i + 1], u2n[i + 1]
        a2, b2 = 0.5 * (a1 + a4), 0.5 * (b1 + b4)

        k1f, k1m, k1s = rhs(f, m, s, a1, b1)
        f2 = f + half * k1f
        m2 = m + half * k1m
        s2 = s + half * k1s
        k2f, k2m, k2s = rhs(
            f2 if f2 > 0.0 else 0.0, m2 if m2 > 0.0 else 0.0, s2 if s2 > 0.0 else 0.0, a2, b2
        )
        f3 = f + half * k2f
        m3 = m + half * k2m
        s3 = s + half * k2s
        k3f, k3m, k3s = rhs(
            f3 if f3 > 0.0 else 0.0, m3 if m3 > 0.0 else 0.0, s3 if s3 > 0.0 else 0.0, a2, b2
        )
        f4 = f + dt * k3f
        m4 = m + dt * k3m
        s4 = s + dt * k3s
        k4f, k4m, k4s = rhs(
            f4 if f4 > 0.0 else 0.0, m4 if m4 > 0.0 else 0.0, s4 if s4 > 0.0 else 0.0, a4, b4
        )
        f = f + sixth * (k1f + 2.0 * (k2f + k3f) + k4f)
        m = m + sixth * (k1m + 2.0 * (k2m + k3m) + k4m)
        s = s + sixth * (k1s + 2.0 * (k2s + k3s) + k4s)

        if not (f < guard and m < guard and s < guard):
            raise BlowUpError(grid.t0 + i * dt, (f, m, s), guard)
        if f < 0.0:
            if f < -NEGATIVE_TOL:
                raise NegativeStateError(f"f = {f} at t={grid.t0 + (i + 1) * dt:g}")
            f = 0.0
        if m < 0.0:
            if m < -NEGATIVE_TOL:
                raise NegativeStateError(f"m = {m} at t={grid.t0 + (i + 1) * dt:g}")
            m = 0.0
        if s < 0.0:
            if s < -NEGATIVE_TOL:
                raise NegativeStateError(f"s = {s} at t={grid.t0 + (i + 1) * dt:g}")
            s = 0.0
        out[i + 1] = (f, m, s)
    return Trajectory(grid=grid, states=out)


def integrate_adjoint_backward(
    spec: ModelSpec,
    params: LifeParams,
    state_traj: Trajectory,
    schedule: ControlSchedule | None,
    grid: TimeGrid,
) -> AdjointTrajectory:
    """RK4 integration of the costate system from t=T down to t=0 with the
    zero terminal (transversality) condition, states and controls linearly
    interpolated from their node values."""
    _require_same_grid(state_traj.grid, grid, "state trajectory")
    adj = make_adjoint_rhs(spec, params)
    u1n, u2n = _control_nodes(spec, grid, schedule)
    fs = state_traj.states[:, 0].tolist()
    ms = state_traj.states[:, 1].tolist()
    ss = state_traj.states[:, 2].tolist()

    n = grid.n_steps
    h = -grid.dt
    half = 0.5 * h
    sixth = h / 6.0
    out = np.empty((n + 1, 3), dtype=float)
    l1 = l2 = l3 = 0.0
    out[n] = (0.0, 0.0, 0.0)
    for i in range(n - 1, -1, -1):
        fr, mr, sr = fs[i + 1], ms[i + 1], ss[i + 1]
        fl, ml, sl = fs[i], ms[i], ss[i]
        fc, mc, sc = 0.5 * (fl + fr), 0.5 * (ml + mr), 0.5 * (sl + sr)
        a_r, b_r = u1n[i + 1], u2n[i + 1]
        a_l, b_l = u1n[i], u2n[i]
        a_c, b_c = 0.5 * (a_l + a_r), 0.5 * (b_l + b_r)

        k11, k12, k13 = adj(fr, mr, sr, a_r, b_r, l1, l2, l3)
        k21, k22, k23 = adj(fc, mc, sc, a_c, b_c, l1 + half * k11, l2 + half * k12, l3 + half * k13)
        k31, k32, k33 = adj(fc, mc, sc, a_c, b_c, l1 + half * k21, l2 + half * k22, l3 + half * k23)
        k41, k42, k43 = adj(fl, ml, sl, a_l, b_l, l1 + h * k31, l2 + h * k32, l3 + h * k33)
        l1 = l1 + sixth * (k11 + 2.0 * (k21 + k31) + k41)
        l2 = l2 + sixth * (k12 + 2.0 * (k22 + k32) + k42)
        l3 = l3 + sixth * (k13 + 2.0 * (k23 + k33) + k43)
        out[i] = (l1, l2, l3)
    return AdjointTrajectory(grid=grid, values=out)


def integrate_ensemble_to_threshold(
    spec: ModelSpec,
    params: LifeParams,
    inits: np.ndarray,
    t_max: float,
    dt: float,
    threshold: float,
) -> np.ndarray:
    """Integrate a batch of initial states under the spec's constant
    controls until f+m drops below threshold for every member (or t_max).

    Returns the per-member first crossing time, NaN where the threshold was
    never reached. Under the global-extinction conditions V = f+m decreases
    monotonically, so the first crossing is definitive.
    """
    check_compatible(spec, params)
    rhs = make_rhs_batch(spec, params)
    inits = np.asarray(inits, dtype=float)
    if inits.ndim != 2 or inits.shape[1] not in (2, 3):
        raise ParameterError("inits must be (batch, 2) or (batch, 3)")
    if np.any(inits < 0):
        raise NegativeStateError("ensemble initial states must be nonnegative")
    f = inits[:, 0].copy()
    m = inits[:, 1].copy()
    s = inits[:, 2].copy() if inits.shape[1] == 3 else np.zeros_like(f)
    u1 = spec.mu if spec.model_id.is_tyc else spec.eta1
    u2 = 0.0 if spec.model_id.is_tyc else spec.eta2
    guard = BLOWUP_FACTOR * params.cap_k

    n = int(math.ceil(t_max / dt))
    crossing = np.full(f.shape, np.nan)
    done = (f + m) < threshold
    crossing[done] = 0.0
    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n):
        k1 = rhs(f, m, s, u1, u2)
        k2 = rhs(
            np.maximum(f + half * k1[0], 0.0),
            np.maximum(m + half * k1[1], 0.0),
            np.maximum(s + half * k1[2], 0.0),
            u1,
            u2,
        )
        k3 = rhs(
            np.maximum(f + half * k2[0], 0.0),
            np.maximum(m + half * k2[1], 0.0),
            np.maximum(s + half * k2[2], 0.0),
            u1,
            u2,
        )
        k4 = rhs(
            np.maximum(f + dt * k3[0], 0.0),
            np.maximum(m + dt * k3[1], 0.0),
            np.maximum(s + dt * k3[2], 0.0),
            u1,
            u2,
        )
        f = np.maximum(f + sixth * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]), 0.0)
        m = np.maximum(m + sixth * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]), 0.0)
        s = np.maximum(s + sixth * (k1[2] + 2.0 * (k2[2] + k3[2]) + k4[2]), 0.0)
        if np.any(f > guard) or np.any(m > guard) or np.any(s > guard):
            raise BlowUpError((i + 1) * dt, (float(np.max(f)), float(np.max(m)), float(np.max(s))), guard)
        newly = ((f + m) < threshold) & ~done
        if np.any(newly):
            crossing[newly] = (i + 1) * dt
            done |= newly
            if bool(np.all(done)):
                break
    return crossing


# ---------------------------------------------------------------------------
# CSV export


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_to_csv(traj: Trajectory, path, schedule: ControlSchedule | None = None) -> None:
    """Write `t,f,m,s[,mu|eta1,eta2]` rows at full double precision."""
    header = ["t", "f", "m", "s"]
    cols = [traj.grid.times(), traj.f, traj.m, traj.s]
    if schedule is not None:
        _require_same_grid(schedule.grid, traj.grid, "control schedule")
        header.extend(schedule.names)
        cols.extend(schedule.values)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(x) for x in row) + "\n")
