"""Optimal control of the seven models by forward-backward sweeps.

The running cost is f + m + 0.5*||u||^2 (minimization form; the equivalent
maximization of the negated integrand yields the same necessary
conditions). Each sweep iterates forward state integration, backward
costate integration and a relaxed projected control update

    u <- (1 - omega) u + omega * clamp(raw(x, lambda))

until the sup-norm control change stalls below tolerance. The projection
kernels per model (raw values before clamping):

    TYC0:   mu   = lambda3                      clamp to [0, mu_max]
    FHMS1:  eta1 = -f*lambda1,      eta2 = m*lambda2            to [0, 1]
    FHMS2:  eta1 = -f*lambda1/(f+d1), eta2 = m*lambda2/(m+d2)   to [0, 1]
    FHMS3:  eta1 = -lambda1*f^(3/2), eta2 = lambda2*m^(3/2)     to [0, 1]
    FHMH4/5/6: as FHMS1/2/3 with the eta2 kernel negated.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, NegativeStateError, ParameterError
from .integrate import (
    AdjointTrajectory,
    ControlSchedule,
    TimeGrid,
    Trajectory,
    integrate_adjoint_backward,
    integrate_forward,
    trajectory_to_csv,
)
from .models import make_rhs
from .params import LifeParams, ModelId, ModelSpec, State

#: Slack added to the objective when deciding whether a trial step
#: "increased" it; prevents roundoff-driven backtracking near the optimum.
_ACCEPT_RTOL = 1e-10


@dataclass(frozen=True)
class SweepConfig:
    """Forward-backward sweep knobs.

    mu_max of None resolves to the carrying capacity at run time (a finite
    cap keeps the supermale injection away from the blow-up regime);
    math.inf disables the cap.
    """

    omega: float = 0.5
    tol: float = 1e-4
    max_iters: int = 2000
    mu_max: float | None = None
    backtrack_max: int = 30

    def __post_init__(self):
        if not 0.0 < self.omega <= 1.0:
            raise ParameterError(f"omega must lie in (0, 1], got {self.omega}")
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.max_iters < 1:
            raise ParameterError("max_iters must be >= 1")
        if self.mu_max is not None and not self.mu_max > 0:
            raise ParameterError("mu_max must be positive (or None for the default cap)")

    def resolve_mu_max(self, params: LifeParams) -> float:
        return params.cap_k if self.mu_max is None else self.mu_max

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "tol": self.tol,
            "max_iters": self.max_iters,
            "mu_max": self.mu_max,
            "backtrack_max": self.backtrack_max,
        }


def control_bounds(spec: ModelSpec, config: SweepConfig, params: LifeParams) -> tuple:
    """(lo, hi) per channel; harvesting/stocking rates live in [0, 1]."""
    if spec.model_id.is_tyc:
        return ((0.0, config.resolve_mu_max(params)),)
    return ((0.0, 1.0), (0.0, 1.0))


def _raw_projection(
    model_id: ModelId, f: np.ndarray, m: np.ndarray, lam: np.ndarray, d1: float, d2: float
) -> np.ndarray:
    """Unclamped stationary control values along a trajectory (channels
    stacked on the first axis)."""
    l1, l2, l3 = lam[:, 0], lam[:, 1], lam[:, 2]
    if model_id.is_tyc:
        return l3[None, :].copy()
    if model_id.is_linear_harvest:
        raw1, raw2 = -f * l1, m * l2
    elif model_id.is_saturating:
        raw1, raw2 = -f * l1 / (f + d1), m * l2 / (m + d2)
    else:
        raw1 = -l1 * f * np.sqrt(f)
        raw2 = l2 * m * np.sqrt(m)
    if model_id.harvests_males:
        raw2 = -raw2
    return np.stack([raw1, raw2])


def project_control(
    spec: ModelSpec,
    state: State,
    adjoint: tuple,
    mu_max: float = math.inf,
) -> tuple:
    """Pointwise optimal control from the stationarity conditions, clamped
    to its admissible set. adjoint is (lambda1, lambda2[, lambda3])."""
    if not state.is_nonnegative():
        raise NegativeStateError(f"projection needs a nonnegative state, got {state.as_tuple()}")
    lam = np.zeros((1, 3))
    lam[0, : len(adjoint)] = adjoint
    raw = _raw_projection(
        spec.model_id,
        np.array([state.f]),
        np.array([state.m]),
        lam,
        spec.d1,
        spec.d2,
    )
    if spec.model_id.is_tyc:
        return (float(min(mu_max, max(0.0, raw[0, 0]))),)
    return (
        float(min(1.0, max(0.0, raw[0, 0]))),
        float(min(1.0, max(0.0, raw[1, 0]))),
    )


def objective_value(traj: Trajectory, schedule: ControlSchedule) -> tuple[float, float]:
    """(J, state-only cost): trapezoidal quadrature of f+m+0.5*||u||^2 and
    of f+m on the shared grid."""
    if traj.grid != schedule.grid:
        raise ParameterError("trajectory and schedule grids differ")
    dt = traj.grid.dt
    w = np.full(traj.grid.n_nodes, dt)
    w[0] = w[-1] = 0.5 * dt
    state_cost = float(np.sum(w * (traj.f + traj.m)))
    control_cost = 0.5 * float(np.sum(w * np.sum(schedule.values**2, axis=0)))
    return state_cost + control_cost, state_cost


@dataclass
class SweepResult:
    """Converged (or best-effort) solution of one optimal-control problem."""

    spec: ModelSpec
    params: LifeParams
    config: SweepConfig
    schedule: ControlSchedule
    states: Trajectory
    adjoints: AdjointTrajectory
    objective: float
    cost_excluding_controls: float
    iterations: int
    converged: bool
    residual: float
    objective_history: list = field(default_factory=list, repr=False)

    def summary_dict(self) -> dict:
        return {
            "model": self.spec.as_dict(),
            "params": self.params.as_dict(),
            "config": self.config.as_dict(),
            "grid": {
                "t0": self.states.grid.t0,
                "t_end": self.states.grid.t_end,
                "n_steps": self.states.grid.n_steps,
            },
            "objective": self.objective,
            "cost_excluding_controls": self.cost_excluding_controls,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual": self.residual,
            "final_state": list(self.states.final_state().as_tuple()),
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path) -> None:
        """t, states, controls and adjoints, one row per grid node."""
        header = ["t", "f", "m", "s", *self.schedule.names, "lambda1", "lambda2", "lambda3"]
        cols = [
            self.states.grid.times(),
            self.states.f,
            self.states.m,
            self.states.s,
            *self.schedule.values,
            self.adjoints.values[:, 0],
            self.adjoints.values[:, 1],
            self.adjoints.values[:, 2],
        ]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in zip(*cols):
                fh.write(",".join(format(float(x), ".17g") for x in row) + "\n")


def forward_backward_sweep(
    spec: ModelSpec,
    params: LifeParams,
    init: State,
    grid: TimeGrid,
    config: SweepConfig | None = None,
) -> SweepResult:
    """Solve the model's optimal-control problem by relaxed forward-backward
    sweeps from the all-zero control guess.

    If a trial step raises the objective (or blows up), its relaxation
    factor is halved for that step. Non-convergence is reported in the
    result (converged=False), never raised.
    """
    config = config or SweepConfig()
    if not init.is_nonnegative():
        raise NegativeStateError(f"initial state must be nonnegative, got {init.as_tuple()}")
    bounds = control_bounds(spec, config, params)
    lo = np.array([b[0] for b in bounds])[:, None]
    hi = np.array([b[1] for b in bounds])[:, None]

    u = ControlSchedule.zeros(grid, spec.model_id)
    x = integrate_forward(spec, params, init, grid, u)
    J, _ = objective_value(x, u)
    lam = integrate_adjoint_backward(spec, params, x, u, grid)
    history = [J]

    converged = False
    residual = math.inf
    iterations = 0
    for iterations in range(1, config.max_iters + 1):
        raw = _raw_projection(spec.model_id, x.f, x.m, lam.values, spec.d1, spec.d2)
        target = np.clip(raw, lo, hi)

        # stationarity of the current iterate: the unrelaxed update gap
        scale = max(1.0, float(np.max(np.abs(u.values))))
        gap = float(np.max(np.abs(target - u.values))) / scale
        if gap < config.tol:
            converged = True
            residual = min(residual, gap)
            break

        # an infeasible trial (blow-up / negative state) always backtracks;
        # an objective increase backtracks only while the monotone guard
        # has budget (backtrack_max=0 gives the plain relaxed sweep)
        omega = config.omega
        accepted = None
        guard_left = config.backtrack_max
        for _ in range(60):
            trial_values = (1.0 - omega) * u.values + omega * target
            trial = u.copy_with(trial_values)
            try:
                x_trial = integrate_forward(spec, params, init, grid, trial)
            except (BlowUpError, NegativeStateError):
                omega *= 0.5
                continue
            J_trial, _ = objective_value(x_trial, trial)
            if guard_left <= 0 or J_trial <= J + _ACCEPT_RTOL * (1.0 + abs(J)):
                accepted = (trial, x_trial, J_trial)
                break
            guard_left -= 1
            omega *= 0.5
        if accepted is None:
            # even vanishing steps stay infeasible: report the last iterate
            break
        trial, x_trial, J_trial = accepted

        scale = max(1.0, float(np.max(np.abs(trial.values))))
        residual = float(np.max(np.abs(trial.values - u.values))) / scale
        u, x, J = trial, x_trial, J_trial
        history.append(J)
        lam = integrate_adjoint_backward(spec, params, x, u, grid)

    J_final, state_cost = objective_value(x, u)
    return SweepResult(
        spec=spec,
        params=params,
        config=config,
        schedule=u,
        states=x,
        adjoints=lam,
        objective=J_final,
        cost_excluding_controls=state_cost,
        iterations=iterations,
        converged=converged,
        residual=residual,
        objective_history=history,
    )


def optimality_residual(result: SweepResult) -> float:
    """Max |dH/du| over grid nodes where the control bounds are inactive.

    A node counts as interior when the unclamped stationary value lies
    strictly inside the bounds (at active nodes the sign condition, not
    stationarity, is what optimality requires). At the Pontryagin fixed
    point the stationary value equals the stored control on interior
    nodes, so this is the gap between them. Returns 0.0 when no node is
    interior.
    """
    raw = _raw_projection(
        result.spec.model_id,
        result.states.f,
        result.states.m,
        result.adjoints.values,
        result.spec.d1,
        result.spec.d2,
    )
    bounds = control_bounds(result.spec, result.config, result.params)
    worst = 0.0
    for ch, (lo, hi) in enumerate(bounds):
        interior = (raw[ch] > lo) & (raw[ch] < hi)
        if np.any(interior):
            u = result.schedule.values[ch]
            worst = max(worst, float(np.max(np.abs(raw[ch, interior] - u[interior]))))
    return worst


def perturbation_check(
    result: SweepResult, n_directions: int = 20, eps: float = 1e-3, seed: int = 0
) -> float:
    """Smallest objective change J(clamp(u* + eps*v)) - J(u*) over random
    admissible perturbation directions v ~ U[-1, 1]^n.

    Nonnegative (up to quadrature/roundoff noise) when u* is a minimizer.
    """
    rng = np.random.default_rng(seed)
    bounds = control_bounds(result.spec, result.config, result.params)
    lo = np.array([b[0] for b in bounds])[:, None]
    hi = np.array([min(b[1], 1e300) for b in bounds])[:, None]
    init = result.states.state_at(0)
    worst = math.inf
    for _ in range(n_directions):
        v = rng.uniform(-1.0, 1.0, size=result.schedule.values.shape)
        pert = np.clip(result.schedule.values + eps * v, lo, hi)
        sched = result.schedule.copy_with(pert)
        traj = integrate_forward(result.spec, result.params, init, result.states.grid, sched)
        J_pert, _ = objective_value(traj, sched)
        worst = min(worst, J_pert - result.objective)
    return worst


def hamiltonian(
    spec: ModelSpec,
    params: LifeParams,
    state: State,
    controls: tuple,
    adjoint: tuple,
) -> float:
    """Pontryagin Hamiltonian in the maximization convention:
    -(f+m) - 0.5*||u||^2 + lambda . rhs."""
    if spec.model_id.is_tyc:
        u1, u2 = controls[0], 0.0
        usq = u1 * u1
    else:
        u1, u2 = controls
        usq = u1 * u1 + u2 * u2
    d = make_rhs(spec, params)(state.f, state.m, state.s, u1, u2)
    lam = tuple(adjoint) + (0.0,) * (3 - len(adjoint))
    return (
        -(state.f + state.m)
        - 0.5 * usq
        + lam[0] * d[0]
        + lam[1] * d[1]
        + lam[2] * d[2]
    )
