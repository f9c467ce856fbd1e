"""Scenario configuration: flat INI-style sections or the equivalent JSON.

Sections and keys (all optional; defaults below):

    [params]  beta=0.0057  delta=0.0648  cap_k=405
    [model]   id=tyc0  mu=0  eta1=0  eta2=0  d1=1  d2=1
    [grid]    t0=0  t_end=200  dt=0.05   (or n_steps=N instead of dt)
    [init]    mode=interior-equilibrium  (or mode=explicit with f= m= s=)
    [sweep]   omega=0.5  tol=1e-4  max_iters=2000  mu_max=default  backtrack_max=30
    [report]  epsilon=0.5

Unknown sections or keys are rejected. mu_max accepts a number, "default"
(carrying capacity) or "none"/"inf" (uncapped).
"""

from __future__ import annotations

import configparser
import json
import math
from dataclasses import dataclass

from .control import SweepConfig
from .errors import ParameterError
from .integrate import DEFAULT_DT, TimeGrid
from .metrics import DEFAULT_EPSILON
from .params import LifeParams, ModelId, ModelSpec, State

_SCHEMA = {
    "params": {"beta", "delta", "cap_k"},
    "model": {"id", "mu", "eta1", "eta2", "d1", "d2"},
    "grid": {"t0", "t_end", "dt", "n_steps"},
    "init": {"mode", "f", "m", "s"},
    "sweep": {"omega", "tol", "max_iters", "mu_max", "backtrack_max"},
    "report": {"epsilon"},
}


def uncontrolled_interior_equilibrium(params: LifeParams) -> State:
    """Stable interior equilibrium of the uncontrolled two-sex system,
    (f+, m+, 0) with f+ = m+ = K/4 (1 + sqrt(1 - 16 delta/(beta K)))."""
    ratio = 16.0 * params.delta / (params.beta * params.cap_k)
    if ratio >= 1.0:
        raise ParameterError(
            "no interior equilibrium exists (16*delta >= beta*K); "
            "set an explicit initial state"
        )
    f = params.cap_k / 4.0 * (1.0 + math.sqrt(1.0 - ratio))
    return State(f, f, 0.0)


@dataclass
class ScenarioConfig:
    params: LifeParams
    spec: ModelSpec
    grid: TimeGrid
    init: State
    sweep: SweepConfig
    epsilon: float
    init_mode: str = "interior-equilibrium"

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "model": self.spec.as_dict(),
            "grid": {"t0": self.grid.t0, "t_end": self.grid.t_end, "n_steps": self.grid.n_steps},
            "init": {"mode": self.init_mode, "state": list(self.init.as_tuple())},
            "sweep": self.sweep.as_dict(),
            "report": {"epsilon": self.epsilon},
        }


def _to_float(section: str, key: str, value) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"[{section}] {key}: expected a number, got {value!r}") from None


def _to_int(section: str, key: str, value) -> int:
    f = _to_float(section, key, value)
    if f != int(f):
        raise ParameterError(f"[{section}] {key}: expected an integer, got {value!r}")
    return int(f)


def _load_sections(path) -> dict:
    """Read the file as JSON when it parses, INI otherwise; normalize to
    {section: {key: value}} with string keys."""
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(doc, dict) or not all(isinstance(v, dict) for v in doc.values()):
            raise ParameterError(f"{path}: JSON config must be an object of section objects")
        return {str(k).lower(): {str(kk).lower(): vv for kk, vv in v.items()} for k, v in doc.items()}
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ParameterError(f"{path}: invalid config ({exc})") from None
    return {
        section.lower(): {k.lower(): v for k, v in parser.items(section)}
        for section in parser.sections()
    }


def load_scenario(
    path=None,
    overrides: dict | None = None,
    dt_override: float | None = None,
    epsilon_override: float | None = None,
    model_override: str | None = None,
) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a file (INI or JSON), with
    optional command-line overrides applied after parsing."""
    sections = _load_sections(path) if path is not None else {}
    for section, keys in sections.items():
        if section not in _SCHEMA:
            raise ParameterError(f"unknown config section [{section}]")
        unknown = set(keys) - _SCHEMA[section]
        if unknown:
            raise ParameterError(
                f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )
    if overrides:
        for section, kv in overrides.items():
            sections.setdefault(section, {}).update(kv)

    p = sections.get("params", {})
    params = LifeParams(
        beta=_to_float("params", "beta", p.get("beta", 0.0057)),
        delta=_to_float("params", "delta", p.get("delta", 0.0648)),
        cap_k=_to_float("params", "cap_k", p.get("cap_k", 405.0)),
    )

    m = dict(sections.get("model", {}))
    if model_override is not None:
        m["id"] = model_override
    model_id = ModelId.parse(m.get("id", "tyc0"))
    spec = ModelSpec(
        model_id=model_id,
        mu=_to_float("model", "mu", m.get("mu", 0.0)),
        eta1=_to_float("model", "eta1", m.get("eta1", 0.0)),
        eta2=_to_float("model", "eta2", m.get("eta2", 0.0)),
        d1=_to_float("model", "d1", m.get("d1", 1.0)),
        d2=_to_float("model", "d2", m.get("d2", 1.0)),
    )

    g = sections.get("grid", {})
    t0 = _to_float("grid", "t0", g.get("t0", 0.0))
    t_end = _to_float("grid", "t_end", g.get("t_end", 200.0))
    if "dt" in g and "n_steps" in g:
        raise ParameterError("[grid] give dt or n_steps, not both")
    if dt_override is not None:
        dt = dt_override
        n_steps = max(1, int(round((t_end - t0) / dt)))
    elif "n_steps" in g:
        n_steps = _to_int("grid", "n_steps", g["n_steps"])
    else:
        dt = _to_float("grid", "dt", g.get("dt", DEFAULT_DT))
        if dt <= 0:
            raise ParameterError("[grid] dt must be positive")
        n_steps = max(1, int(round((t_end - t0) / dt)))
    grid = TimeGrid(t0=t0, t_end=t_end, n_steps=n_steps)

    i = sections.get("init", {})
    mode = str(i.get("mode", "interior-equilibrium")).strip().lower()
    if mode in ("interior-equilibrium", "interior"):
        if any(k in i for k in ("f", "m", "s")):
            raise ParameterError("[init] explicit f/m/s require mode=explicit")
        init = uncontrolled_interior_equilibrium(params)
        mode = "interior-equilibrium"
    elif mode == "explicit":
        init = State(
            f=_to_float("init", "f", i.get("f", 0.0)),
            m=_to_float("init", "m", i.get("m", 0.0)),
            s=_to_float("init", "s", i.get("s", 0.0)),
        )
        if not init.is_nonnegative():
            raise ParameterError("[init] state components must be nonnegative")
    else:
        raise ParameterError(f"[init] mode must be interior-equilibrium or explicit, got {mode!r}")
    if spec.model_id.is_two_dim and init.s != 0.0:
        raise ParameterError("[init] harvesting models need s = 0")

    sw = sections.get("sweep", {})
    mu_max_raw = str(sw.get("mu_max", "default")).strip().lower()
    if mu_max_raw in ("default", ""):
        mu_max = None
    elif mu_max_raw in ("none", "inf", "infinity", "uncapped"):
        mu_max = math.inf
    else:
        mu_max = _to_float("sweep", "mu_max", mu_max_raw)
    sweep = SweepConfig(
        omega=_to_float("sweep", "omega", sw.get("omega", 0.5)),
        tol=_to_float("sweep", "tol", sw.get("tol", 1e-4)),
        max_iters=_to_int("sweep", "max_iters", sw.get("max_iters", 2000)),
        mu_max=mu_max,
        backtrack_max=_to_int("sweep", "backtrack_max", sw.get("backtrack_max", 30)),
    )

    r = sections.get("report", {})
    epsilon = (
        epsilon_override
        if epsilon_override is not None
        else _to_float("report", "epsilon", r.get("epsilon", DEFAULT_EPSILON))
    )
    if not epsilon > 0:
        raise ParameterError("[report] epsilon must be positive")

    from .params import check_compatible

    check_compatible(spec, params)
    return ScenarioConfig(
        params=params,
        spec=spec,
        grid=grid,
        init=init,
        sweep=sweep,
        epsilon=epsilon,
        init_mode=mode,
    )
