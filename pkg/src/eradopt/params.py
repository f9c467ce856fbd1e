"""Domain types shared by every model: life-history parameters, model
specifications and population states.

Units follow the mesocosm calibration: densities in individuals, time in
months. The birth coefficient beta is per (individual * month), the death
rate delta per month, and the carrying capacity cap_k in individuals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ParameterError


class ModelId(enum.Enum):
    """The seven strategy models.

    TYC0   classical Trojan-Y supermale introduction (3 state variables)
    FHMS1  female harvesting / male stocking, linear rates
    FHMS2  female harvesting / male stocking, saturating rates
    FHMS3  female harvesting / male stocking, power (f^(3/2)) rates
    FHMH4  female + male harvesting, linear rates
    FHMH5  female + male harvesting, saturating rates
    FHMH6  female + male harvesting, power rates
    """

    TYC0 = "tyc0"
    FHMS1 = "fhms1"
    FHMS2 = "fhms2"
    FHMS3 = "fhms3"
    FHMH4 = "fhmh4"
    FHMH5 = "fhmh5"
    FHMH6 = "fhmh6"

    @property
    def is_tyc(self) -> bool:
        return self is ModelId.TYC0

    @property
    def is_two_dim(self) -> bool:
        return self is not ModelId.TYC0

    @property
    def stocks_males(self) -> bool:
        """True for FHMS models (the male term enters with a + sign)."""
        return self in (ModelId.FHMS1, ModelId.FHMS2, ModelId.FHMS3)

    @property
    def harvests_males(self) -> bool:
        return self in (ModelId.FHMH4, ModelId.FHMH5, ModelId.FHMH6)

    @property
    def is_saturating(self) -> bool:
        return self in (ModelId.FHMS2, ModelId.FHMH5)

    @property
    def is_power(self) -> bool:
        return self in (ModelId.FHMS3, ModelId.FHMH6)

    @property
    def is_linear_harvest(self) -> bool:
        return self in (ModelId.FHMS1, ModelId.FHMH4)

    @classmethod
    def parse(cls, text: str) -> "ModelId":
        key = str(text).strip().lower()
        aliases = {
            "0": "tyc0", "tyc": "tyc0", "model0": "tyc0",
            "1": "fhms1", "model1": "fhms1",
            "2": "fhms2", "model2": "fhms2",
            "3": "fhms3", "model3": "fhms3",
            "4": "fhmh4", "model4": "fhmh4",
            "5": "fhmh5", "model5": "fhmh5",
            "6": "fhmh6", "model6": "fhmh6",
        }
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown model id: {text!r}") from None


ALL_MODELS = tuple(ModelId)
HARVEST_MODELS = tuple(m for m in ModelId if m.is_two_dim)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


@dataclass(frozen=True)
class LifeParams:
    """Life-history parameters shared by every model.

    beta:  per-capita birth coefficient, 1/(individual*month); beta > 0.
    delta: per-capita death rate, 1/month; 0 < delta < 1.
    cap_k: carrying capacity, individuals; cap_k > 0.
    """

    beta: float
    delta: float
    cap_k: float

    def __post_init__(self):
        if not _finite(self.beta) or self.beta <= 0:
            raise ParameterError(f"beta must be positive and finite, got {self.beta!r}")
        if not _finite(self.delta) or not 0 < self.delta < 1:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not _finite(self.cap_k) or self.cap_k <= 0:
            raise ParameterError(f"cap_k must be positive and finite, got {self.cap_k!r}")

    def as_dict(self) -> dict:
        return {"beta": self.beta, "delta": self.delta, "cap_k": self.cap_k}


#: Best-fit mesocosm parameters used throughout the comparison runs.
FITTED_PARAMS = LifeParams(beta=0.0057, delta=0.0648, cap_k=405.0)


@dataclass(frozen=True)
class ModelSpec:
    """Which model to run plus its harvesting/stocking constants.

    mu applies to TYC0 only; eta1/eta2 to the harvesting models; d1/d2 are
    the saturation constants of the rational harvest terms (models 2 and 5).
    """

    model_id: ModelId
    mu: float = 0.0
    eta1: float = 0.0
    eta2: float = 0.0
    d1: float = 1.0
    d2: float = 1.0

    def __post_init__(self):
        mid = self.model_id
        if not isinstance(mid, ModelId):
            object.__setattr__(self, "model_id", ModelId.parse(mid))
            mid = self.model_id
        for name in ("mu", "eta1", "eta2"):
            v = getattr(self, name)
            if not _finite(v) or v < 0:
                raise ParameterError(f"{name} must be nonnegative and finite, got {v!r}")
        if mid.is_tyc:
            if self.eta1 != 0.0 or self.eta2 != 0.0:
                raise ParameterError("eta1/eta2 are not parameters of the TYC model")
        else:
            if self.mu != 0.0:
                raise ParameterError("mu is a parameter of the TYC model only")
        if mid.is_saturating:
            if not _finite(self.d1) or self.d1 <= 0 or not _finite(self.d2) or self.d2 <= 0:
                raise ParameterError("d1 and d2 must be positive for saturating harvest models")

    def as_dict(self) -> dict:
        out = {"model_id": self.model_id.value}
        if self.model_id.is_tyc:
            out["mu"] = self.mu
        else:
            out.update({"eta1": self.eta1, "eta2": self.eta2})
            if self.model_id.is_saturating:
                out.update({"d1": self.d1, "d2": self.d2})
        return out


def check_compatible(spec: ModelSpec, params: LifeParams) -> None:
    """Cross-field invariant: FHMS stocking must stay below the death rate.

    The male equation of the stocking models carries -(delta - eta2) m; a
    constant eta2 >= delta would make the trivial dynamics non-dissipative,
    so constant-parameter specs require delta > eta2 whenever eta2 > 0.
    """
    if spec.model_id.stocks_males and spec.eta2 > 0 and params.delta <= spec.eta2:
        raise ParameterError(
            f"stocking models require delta > eta2 (delta={params.delta}, eta2={spec.eta2})"
        )


@dataclass(frozen=True)
class State:
    """Population state (f, m, s).

    s is carried for every model and held at 0 for the 2-D harvesting
    models so one integrator serves all seven systems.
    """

    f: float
    m: float
    s: float = 0.0

    def __post_init__(self):
        for name in ("f", "m", "s"):
            v = getattr(self, name)
            if not _finite(v):
                raise ParameterError(f"state component {name} must be finite, got {v!r}")

    @property
    def total(self) -> float:
        return self.f + self.m + self.s

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.f, self.m, self.s)

    def is_nonnegative(self, tol: float = 0.0) -> bool:
        return self.f >= -tol and self.m >= -tol and self.s >= -tol
