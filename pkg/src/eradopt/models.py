"""Right-hand sides of the seven population models.

All models share the reproduction flux 0.5*beta*f*m*L with the logistic
factor L; they differ in the removal/stocking terms:

    TYC0:   df = 0.5 b f m L - delta f
            dm = (0.5 f m + f s) b L - delta m
            ds = mu - delta s                      (L uses f+m+s)
    FHMS1:  df = P - delta f - eta1 f,    dm = P - delta m + eta2 m
    FHMS2:  df = P - delta f - eta1 f/(f+d1),  dm = P - delta m + eta2 m/(m+d2)
    FHMS3:  df = P - delta f - eta1 f^(3/2),   dm = P - delta m + eta2 m^(3/2)
    FHMH4/5/6: as FHMS1/2/3 with the male term sign flipped to harvesting,

with P = 0.5*beta*f*m*L and L = 1 - (f+m)/K for the 2-D models.

The logistic factor is evaluated as written, with no clamping: population
positivity is the integrator's job, not the RHS's. The power harvest
f^(3/2) is computed as f*sqrt(f) so values at f=0 are exact.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import NegativeStateError, ParameterError
from .params import LifeParams, ModelId, ModelSpec, State, check_compatible

# Scalar RHS signature: (f, m, s, u1, u2) -> (df, dm, ds).
# For TYC0, u1 is mu and u2 is ignored; otherwise u1=eta1, u2=eta2.
ScalarRhs = Callable[[float, float, float, float, float], tuple]


def logistic_factor(state: State, params: LifeParams) -> float:
    """Density-dependent reproduction multiplier 1 - (f+m+s)/K.

    May be negative when the total exceeds K; the equations use the raw
    value.
    """
    return 1.0 - state.total / params.cap_k


def harvest_g1(model_id: ModelId, f, d1: float = 1.0):
    """Female removal shape G1 for the harvesting models (unit eta1)."""
    if model_id.is_linear_harvest:
        return f
    if model_id.is_saturating:
        return f / (f + d1)
    if model_id.is_power:
        return f * np.sqrt(f)
    raise ParameterError(f"G1 is not defined for {model_id}")


def harvest_g2(model_id: ModelId, m, d2: float = 1.0):
    """Male stocking/removal shape G2 (unit eta2); same form as G1."""
    if model_id.is_linear_harvest:
        return m
    if model_id.is_saturating:
        return m / (m + d2)
    if model_id.is_power:
        return m * np.sqrt(m)
    raise ParameterError(f"G2 is not defined for {model_id}")


def make_rhs(spec: ModelSpec, params: LifeParams) -> ScalarRhs:
    """Build a fast scalar-valued RHS closure for one (model, params) pair.

    The returned callable does no validation; it is the integrator's inner
    kernel. Control arguments override the spec's constant mu/eta values.
    """
    beta = params.beta
    delta = params.delta
    inv_k = 1.0 / params.cap_k
    hb = 0.5 * beta
    mid = spec.model_id
    d1 = spec.d1
    d2 = spec.d2

    if mid is ModelId.TYC0:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m + s) * inv_k
            return (
                hb * f * m * L - delta * f,
                (hb * m + beta * s) * f * L - delta * m,
                u1 - delta * s,
            )

        return rhs

    # 2-D harvesting models: the male term enters + for stocking, - for
    # harvesting.
    sign = 1.0 if mid.stocks_males else -1.0

    if mid.is_linear_harvest:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (P - (delta + u1) * f, P - delta * m + sign * u2 * m, 0.0)

    elif mid.is_saturating:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (
                P - delta * f - u1 * f / (f + d1),
                P - delta * m + sign * u2 * m / (m + d2),
                0.0,
            )

    else:  # power harvest

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (
                P - delta * f - u1 * f * math.sqrt(f),
                P - delta * m + sign * u2 * m * math.sqrt(m),
                0.0,
            )

    return rhs


def make_rhs_batch(spec: ModelSpec, params: LifeParams):
    """Vectorized twin of make_rhs operating on numpy arrays of states.

    Used for ensemble simulations; agrees with the scalar closure to
    machine precision (asserted in the test suite).
    """
    beta = params.beta
    delta = params.delta
    inv_k = 1.0 / params.cap_k
    hb = 0.5 * beta
    mid = spec.model_id
    d1 = spec.d1
    d2 = spec.d2

    if mid is ModelId.TYC0:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m + s) * inv_k
            return (
                hb * f * m * L - delta * f,
                (hb * m + beta * s) * f * L - delta * m,
                u1 - delta * s,
            )

        return rhs

    sign = 1.0 if mid.stocks_males else -1.0

    if mid.is_linear_harvest:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (P - (delta + u1) * f, P - delta * m + sign * u2 * m, 0.0 * m)

    elif mid.is_saturating:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (
                P - delta * f - u1 * f / (f + d1),
                P - delta * m + sign * u2 * m / (m + d2),
                0.0 * m,
            )

    else:

        def rhs(f, m, s, u1, u2):
            L = 1.0 - (f + m) * inv_k
            P = hb * f * m * L
            return (
                P - delta * f - u1 * f * np.sqrt(f),
                P - delta * m + sign * u2 * m * np.sqrt(m),
                0.0 * m,
            )

    return rhs


def make_adjoint_rhs(spec: ModelSpec, params: LifeParams) -> Callable:
    """Costate RHS closure: lambda' = (1, 1, 0) - J^T lambda.

    The running cost density is f + m, so the state-gradient source is 1
    for the female and male costates. J is the analytic Jacobian of the
    model RHS evaluated at the supplied state/controls; for the power
    models the harvest derivative 1.5*u*sqrt(x) is evaluated with x
    clamped at 0 so trajectories that touch the axes stay integrable.

    Signature: (f, m, s, u1, u2, l1, l2, l3) -> (dl1, dl2, dl3).
    """
    beta = params.beta
    delta = params.delta
    inv_k = 1.0 / params.cap_k
    hb = 0.5 * beta
    mid = spec.model_id
    d1 = spec.d1
    d2 = spec.d2

    if mid is ModelId.TYC0:

        def adj(f, m, s, u1, u2, l1, l2, l3):
            L = 1.0 - (f + m + s) * inv_k
            fm_k = f * m * inv_k
            mix = (0.5 * f * m + f * s) * beta * inv_k
            j11 = hb * m * L - hb * fm_k - delta
            j12 = hb * f * L - hb * fm_k
            j13 = -hb * fm_k
            j21 = (0.5 * m + s) * beta * L - mix
            j22 = hb * f * L - mix - delta
            j23 = beta * f * L - mix
            return (
                1.0 - j11 * l1 - j21 * l2,
                1.0 - j12 * l1 - j22 * l2,
                -j13 * l1 - j23 * l2 + delta * l3,
            )

        return adj

    sign = 1.0 if mid.stocks_males else -1.0
    if mid.is_linear_harvest:

        def gprimes(f, m, u1, u2):
            return u1, u2

    elif mid.is_saturating:

        def gprimes(f, m, u1, u2):
            return u1 * d1 / (f + d1) ** 2, u2 * d2 / (m + d2) ** 2

    else:

        def gprimes(f, m, u1, u2):
            return (
                1.5 * u1 * math.sqrt(f if f > 0.0 else 0.0),
                1.5 * u2 * math.sqrt(m if m > 0.0 else 0.0),
            )

    def adj(f, m, s, u1, u2, l1, l2, l3):
        L = 1.0 - (f + m) * inv_k
        fm_k = hb * f * m * inv_k
        pf = hb * m * L - fm_k
        pm = hb * f * L - fm_k
        g1p, g2p = gprimes(f, m, u1, u2)
        j11 = pf - delta - g1p
        j22 = pm - delta + sign * g2p
        return (1.0 - j11 * l1 - pf * l2, 1.0 - pm * l1 - j22 * l2, 0.0)

    return adj


def rhs(
    spec: ModelSpec,
    params: LifeParams,
    state: State,
    mu: float | None = None,
    eta1: float | None = None,
    eta2: float | None = None,
) -> tuple[float, float, float]:
    """Evaluate (df/dt, dm/dt, ds/dt) for one model at one state.

    Optional keyword values override the spec's constant controls (used by
    the time-varying control machinery). Raises NegativeStateError for any
    negative component: the power models' f^(3/2) is undefined there, and
    the analysis region is the nonnegative orthant.
    """
    if not state.is_nonnegative():
        raise NegativeStateError(f"state has a negative component: {state.as_tuple()}")
    if spec.model_id.is_two_dim and state.s != 0.0:
        raise ParameterError("harvesting models carry s identically 0")
    for name, v in (("mu", mu), ("eta1", eta1), ("eta2", eta2)):
        if v is not None and (not math.isfinite(v) or v < 0):
            raise ParameterError(f"control override {name} must be nonnegative, got {v!r}")
    check_compatible(spec, params)

    if spec.model_id.is_tyc:
        u1 = spec.mu if mu is None else mu
        u2 = 0.0
    else:
        u1 = spec.eta1 if eta1 is None else eta1
        u2 = spec.eta2 if eta2 is None else eta2
    return make_rhs(spec, params)(state.f, state.m, state.s, u1, u2)
