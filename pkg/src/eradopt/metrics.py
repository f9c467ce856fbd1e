"""Strategy comparison quantities: eradication times and cost tables."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, ParameterError
from .control import SweepResult
from .integrate import Trajectory

#: Density below which a population counts as eradicated.
DEFAULT_EPSILON = 0.5


def eradication_time(
    traj: Trajectory, component: str, epsilon: float = DEFAULT_EPSILON, permanent: bool = False
) -> float | None:
    """Earliest grid time at which the component density is below epsilon.

    With permanent=True the density must stay below epsilon through the end
    of the horizon (first-crossing is the reported definition; permanence
    is a stricter optional variant). Returns None if never reached.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    if component == "female":
        values = traj.f
    elif component == "male":
        values = traj.m
    else:
        raise ParameterError(f"component must be 'female' or 'male', got {component!r}")
    below = values < epsilon
    if permanent:
        # last index where it is NOT below, +1
        above = np.nonzero(~below)[0]
        idx = (above[-1] + 1) if above.size else 0
        if idx >= below.size:
            return None
        return float(traj.grid.times()[idx])
    hits = np.nonzero(below)[0]
    if hits.size == 0:
        return None
    return float(traj.grid.times()[hits[0]])


@dataclass
class StrategyReport:
    """One comparison-table row for a converged control strategy."""

    model_id: str
    objective: float
    cost_excluding_controls: float
    f_final: float
    m_final: float
    t_erad_f: float | None
    t_erad_m: float | None
    epsilon: float
    converged: bool

    def as_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "objective": self.objective,
            "cost_excluding_controls": self.cost_excluding_controls,
            "f_final": self.f_final,
            "m_final": self.m_final,
            "t_erad_f": self.t_erad_f,
            "t_erad_m": self.t_erad_m,
            "epsilon": self.epsilon,
            "converged": self.converged,
        }


def strategy_report(result: SweepResult, epsilon: float = DEFAULT_EPSILON) -> StrategyReport:
    final = result.states.final_state()
    return StrategyReport(
        model_id=result.spec.model_id.value,
        objective=result.objective,
        cost_excluding_controls=result.cost_excluding_controls,
        f_final=final.f,
        m_final=final.m,
        t_erad_f=eradication_time(result.states, "female", epsilon),
        t_erad_m=eradication_time(result.states, "male", epsilon),
        epsilon=epsilon,
        converged=result.converged,
    )


@dataclass
class Comparison:
    reports: list
    cheapest_model: str
    fastest_female_eradication: str | None

    def as_dict(self) -> dict:
        return {
            "reports": [r.as_dict() for r in self.reports],
            "cheapest_model": self.cheapest_model,
            "fastest_female_eradication": self.fastest_female_eradication,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path) -> None:
        cols = [
            "model_id", "objective", "cost_excluding_controls", "f_final",
            "m_final", "t_erad_f", "t_erad_m", "epsilon", "converged",
        ]
        with open(path, "w", newline="") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.reports:
                d = r.as_dict()
                fh.write(",".join("" if d[c] is None else str(d[c]) for c in cols) + "\n")


def compare_strategies(results: list, epsilon: float = DEFAULT_EPSILON) -> Comparison:
    """Assemble one StrategyReport per result plus derived orderings.

    All results must share the grid and life parameters.
    """
    if not results:
        raise ParameterError("nothing to compare")
    grid0 = results[0].states.grid
    params0 = results[0].params
    for r in results[1:]:
        if r.states.grid != grid0:
            raise GridMismatchError("scenario grids differ")
        if r.params != params0:
            raise GridMismatchError("scenario life parameters differ")
    reports = [strategy_report(r, epsilon) for r in results]
    cheapest = min(reports, key=lambda r: r.objective).model_id
    with_erad = [r for r in reports if r.t_erad_f is not None]
    fastest = min(with_erad, key=lambda r: r.t_erad_f).model_id if with_erad else None
    return Comparison(reports=reports, cheapest_model=cheapest, fastest_female_eradication=fastest)


def render_table(comparison: Comparison) -> str:
    """Aligned plain-text comparison table."""
    headers = ["result", *[r.model_id for r in comparison.reports]]
    rows = [
        ("objective J", [f"{r.objective:.1f}" for r in comparison.reports]),
        ("cost excl. controls", [f"{r.cost_excluding_controls:.1f}" for r in comparison.reports]),
        ("female final", [f"{r.f_final:.4g}" for r in comparison.reports]),
        ("male final", [f"{r.m_final:.4g}" for r in comparison.reports]),
        ("female erad. time", ["/" if r.t_erad_f is None else f"{r.t_erad_f:.4g}" for r in comparison.reports]),
        ("male erad. time", ["/" if r.t_erad_m is None else f"{r.t_erad_m:.4g}" for r in comparison.reports]),
        ("converged", [str(r.converged).lower() for r in comparison.reports]),
    ]
    table = [headers] + [[label, *vals] for label, vals in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    lines.append("")
    lines.append(f"cheapest model: {comparison.cheapest_model}")
    lines.append(f"fastest female eradication: {comparison.fastest_female_eradication or '/'}")
    return "\n".join(lines)
