"""Local and global stability analysis.

Local: analytic Jacobians, characteristic polynomials and the
Routh-Hurwitz criterion (degree 2 and 3), with eigenvalues computed from
the characteristic polynomial (quadratic formula / Cardano with a Newton
polish) rather than a general eigensolver.

Global: the Lyapunov-function extinction thresholds of the six harvesting
models, evaluated as exact inequalities on (beta, delta, K, eta1, eta2,
d1, d2).
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SingularDerivativeError, UnsupportedModelError
from .params import LifeParams, ModelId, ModelSpec, State, check_compatible

#: Half-width of the band around 0 inside which a tested quantity is
#: treated as exactly zero (knife-edge cases must be detected, not
#: misclassified).
MARGINAL_TOL = 1e-9


class Verdict(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial lam^n + k_{n-1} lam^{n-1} + ... + k0.

    coeffs are stored ascending: (k0, k1) for n=2, (k0, k1, k2) for n=3.
    """

    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) not in (2, 3):
            raise ParameterError("only degree-2 and degree-3 polynomials are supported")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def __call__(self, lam):
        acc = 1.0
        for c in reversed(self.coeffs):
            acc = acc * lam + c
        return acc

    def derivative(self, lam):
        n = self.degree
        acc = n + 0.0
        for i, c in enumerate(reversed(self.coeffs[1:])):
            acc = acc * lam + (n - 1 - i) * c
        return acc

    def roots(self) -> tuple[complex, ...]:
        if self.degree == 2:
            return solve_quadratic(*self.coeffs)
        return solve_cubic(*self.coeffs)


def solve_quadratic(k0: float, k1: float) -> tuple[complex, complex]:
    """Roots of lam^2 + k1 lam + k0, numerically stable form."""
    disc = k1 * k1 - 4.0 * k0
    if disc >= 0.0:
        r = math.sqrt(disc)
        # avoid cancellation: compute the large-magnitude root first
        if k1 >= 0.0:
            q = -0.5 * (k1 + r)
        else:
            q = -0.5 * (k1 - r)
        if q != 0.0:
            return (complex(q), complex(k0 / q)) if abs(q) >= abs(k0 / q) else (complex(k0 / q), complex(q))
        return (complex(0.0), complex(-k1))
    r = math.sqrt(-disc)
    return (complex(-0.5 * k1, 0.5 * r), complex(-0.5 * k1, -0.5 * r))


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def solve_cubic(k0: float, k1: float, k2: float) -> tuple[complex, complex, complex]:
    """Roots of lam^3 + k2 lam^2 + k1 lam + k0 by Cardano/trigonometric
    formulas, each refined by a couple of complex Newton steps."""
    a, b, c = k2, k1, k0
    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3

    scale = max(abs(p), abs(q), 1e-300)
    if abs(p) < 1e-14 * max(1.0, a * a) and abs(q) < 1e-14 * max(1.0, abs(a) ** 3, 1.0):
        roots = [complex(-shift)] * 3
    elif disc > 0.0:
        sq = math.sqrt(disc)
        u = _cbrt(-q / 2.0 + sq)
        v = _cbrt(-q / 2.0 - sq)
        real = u + v
        re = -0.5 * real
        im = 0.5 * math.sqrt(3.0) * (u - v)
        roots = [complex(real - shift), complex(re - shift, im), complex(re - shift, -im)]
    else:
        # three real roots (disc <= 0 requires p < 0)
        mp = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * mp)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = [
            complex(mp * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift)
            for k in range(3)
        ]

    poly = CharPoly((k0, k1, k2))
    polished = []
    for r in roots:
        z = r
        for _ in range(3):
            d = poly.derivative(z)
            if abs(d) < 1e-30:
                break
            step = poly(z) / d
            if not (abs(step) < 1e12):
                break
            z = z - step
        # keep genuinely-real roots real
        if abs(z.imag) <= 1e-12 * max(1.0, abs(z.real)):
            z = complex(z.real)
        polished.append(z)
    return tuple(polished)


@dataclass
class StabilityVerdict:
    """Outcome of a Routh-Hurwitz test.

    criterion_trace lists each tested quantity as (name, value, passed);
    eigen_summary holds the characteristic roots for reporting.
    """

    verdict: Verdict
    eigen_summary: tuple
    criterion_trace: list = field(default_factory=list)

    @property
    def max_real_part(self) -> float:
        return max(z.real for z in self.eigen_summary)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "eigenvalues": [[z.real, z.imag] for z in self.eigen_summary],
            "criteria": [
                {"name": n, "value": v, "passed": bool(p)} for n, v, p in self.criterion_trace
            ],
        }


def routh_hurwitz(poly: CharPoly, tol: float = MARGINAL_TOL) -> StabilityVerdict:
    """Routh-Hurwitz verdict for a degree-2 or degree-3 monic polynomial.

    Degree 3: stable iff k0, k1, k2 and k1*k2 - k0 are all positive.
    Degree 2: stable iff k0 and k1 are both positive. A quantity within
    tol of zero makes the verdict Marginal unless another quantity already
    fails strictly.
    """
    if poly.degree == 3:
        k0, k1, k2 = poly.coeffs
        quantities = [("k0", k0), ("k1", k1), ("k2", k2), ("k1*k2-k0", k1 * k2 - k0)]
    else:
        k0, k1 = poly.coeffs
        quantities = [("k0", k0), ("k1", k1)]

    trace = [(name, value, value > tol) for name, value in quantities]
    if any(value < -tol for _, value in quantities):
        verdict = Verdict.UNSTABLE
    elif any(abs(value) <= tol for _, value in quantities):
        verdict = Verdict.MARGINAL
    else:
        verdict = Verdict.STABLE
    return StabilityVerdict(verdict=verdict, eigen_summary=poly.roots(), criterion_trace=trace)


# ---------------------------------------------------------------------------
# Jacobians


def _jacobian_entries(
    model_id: ModelId,
    params: LifeParams,
    f: float,
    m: float,
    s: float,
    u1: float,
    u2: float,
    d1: float,
    d2: float,
):
    """Raw analytic partial derivatives; no singularity guard.

    Returns a 3x3 row-major tuple for TYC0, a 2x2 tuple otherwise.
    """
    beta = params.beta
    delta = params.delta
    K = params.cap_k

    if model_id is ModelId.TYC0:
        L = 1.0 - (f + m + s) / K
        fm = f * m
        fs_half = 0.5 * fm + f * s
        j11 = 0.5 * beta * m * L - 0.5 * beta * fm / K - delta
        j12 = 0.5 * beta * f * L - 0.5 * beta * fm / K
        j13 = -0.5 * beta * fm / K
        j21 = (0.5 * m + s) * beta * L - fs_half * beta / K
        j22 = 0.5 * beta * f * L - fs_half * beta / K - delta
        j23 = beta * f * L - fs_half * beta / K
        return ((j11, j12, j13), (j21, j22, j23), (0.0, 0.0, -delta))

    L = 1.0 - (f + m) / K
    pf = 0.5 * beta * m * L - 0.5 * beta * f * m / K
    pm = 0.5 * beta * f * L - 0.5 * beta * f * m / K
    sign = 1.0 if model_id.stocks_males else -1.0
    if model_id.is_linear_harvest:
        g1p = u1
        g2p = u2
    elif model_id.is_saturating:
        g1p = u1 * d1 / (f + d1) ** 2
        g2p = u2 * d2 / (m + d2) ** 2
    else:
        g1p = 1.5 * u1 * math.sqrt(max(f, 0.0))
        g2p = 1.5 * u2 * math.sqrt(max(m, 0.0))
    j11 = pf - delta - g1p
    j22 = pm - delta + sign * g2p
    return ((j11, pm), (pf, j22))


def jacobian(spec: ModelSpec, params: LifeParams, point: State) -> np.ndarray:
    """Analytic Jacobian of the model RHS at a point.

    3x3 for the TYC model, 2x2 for the harvesting models. For the power
    models the harvest derivative d(x^{3/2})/dx = 1.5*sqrt(x) degenerates
    at the axes, so f=0 or m=0 raises SingularDerivativeError there.
    """
    check_compatible(spec, params)
    if spec.model_id.is_power and (point.f == 0.0 or point.m == 0.0):
        raise SingularDerivativeError(
            "power-harvest Jacobian is singular on the axes (f=0 or m=0)"
        )
    if spec.model_id.is_tyc:
        u1, u2 = spec.mu, 0.0
    else:
        u1, u2 = spec.eta1, spec.eta2
    entries = _jacobian_entries(
        spec.model_id, params, point.f, point.m, point.s, u1, u2, spec.d1, spec.d2
    )
    return np.array(entries, dtype=float)


def char_poly(jac: np.ndarray) -> CharPoly:
    """Characteristic polynomial det(lam I - J), coefficients ascending."""
    jac = np.asarray(jac, dtype=float)
    if jac.shape == (2, 2):
        (a, b), (c, d) = jac
        return CharPoly((a * d - b * c, -(a + d)))
    if jac.shape == (3, 3):
        tr = jac[0, 0] + jac[1, 1] + jac[2, 2]
        m11 = jac[1, 1] * jac[2, 2] - jac[1, 2] * jac[2, 1]
        m22 = jac[0, 0] * jac[2, 2] - jac[0, 2] * jac[2, 0]
        m33 = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        det = (
            jac[0, 0] * (jac[1, 1] * jac[2, 2] - jac[1, 2] * jac[2, 1])
            - jac[0, 1] * (jac[1, 0] * jac[2, 2] - jac[1, 2] * jac[2, 0])
            + jac[0, 2] * (jac[1, 0] * jac[2, 1] - jac[1, 1] * jac[2, 0])
        )
        return CharPoly((-det, m11 + m22 + m33, -tr))
    raise ParameterError(f"expected a 2x2 or 3x3 matrix, got shape {jac.shape}")


def classify_point(spec: ModelSpec, params: LifeParams, point: State) -> StabilityVerdict:
    """Routh-Hurwitz verdict at a point, from the analytic Jacobian."""
    return routh_hurwitz(char_poly(jacobian(spec, params, point)))


# ---------------------------------------------------------------------------
# Boundary equilibrium of the TYC model (mu > 0)


def boundary_char_poly(params: LifeParams) -> CharPoly:
    """Characteristic polynomial attached to the supermale-only equilibrium
    (0, 0, mu/delta): lam^3 + 3*delta*lam^2 + 3*delta^2*lam + delta^2.

    This is the published closed form behind the delta = 1/9 stability
    switch; its Routh-Hurwitz combination k1*k2 - k0 = delta^2*(9*delta - 1)
    changes sign exactly there.
    """
    d = params.delta
    return CharPoly((d * d, 3.0 * d * d, 3.0 * d))


def boundary_eigenvalues(params: LifeParams) -> tuple[complex, complex, complex]:
    """Closed-form eigenvalue triple of boundary_char_poly.

    The radicand delta^3 - delta^2 is negative for delta < 1; its real
    cube root is used.
    """
    d = params.delta
    w = _cbrt(d ** 3 - d ** 2)
    lam1 = complex(w - d)
    re = -0.5 * w - d
    im = 0.5 * math.sqrt(3.0) * w
    return (lam1, complex(re, im), complex(re, -im))


def boundary_verdict(params: LifeParams, tol: float = MARGINAL_TOL) -> StabilityVerdict:
    """Stability of (0, 0, mu/delta): stable for 1/9 < delta < 1."""
    return routh_hurwitz(boundary_char_poly(params), tol=tol)


# ---------------------------------------------------------------------------
# Global extinction (Lyapunov) thresholds


@dataclass(frozen=True)
class ExtinctionCondition:
    """One model's global-extinction inequality, with both sides kept for
    reporting. satisfied requires the main inequality and every side
    condition to hold strictly."""

    model_id: ModelId
    lhs: float
    threshold: float
    side_conditions: tuple = ()

    @property
    def satisfied(self) -> bool:
        if not self.lhs < self.threshold:
            return False
        return all(ok for _, _, _, ok in self.side_conditions)

    def as_dict(self) -> dict:
        return {
            "model_id": self.model_id.value,
            "satisfied": self.satisfied,
            "beta_k": self.lhs,
            "threshold": self.threshold,
            "side_conditions": [
                {"name": n, "value": v, "bound": b, "ok": bool(ok)}
                for n, v, b, ok in self.side_conditions
            ],
        }


def global_extinction_condition(spec: ModelSpec, params: LifeParams) -> ExtinctionCondition:
    """Evaluate the model's sufficient condition for global convergence of
    (f, m) to the origin (V = f + m is a strict Lyapunov function when the
    inequality holds).

    Thresholds on beta*K by model:
        FHMS1:  2*delta + eta1 - eta2
        FHMS2:  2*delta + eta1/(K+d1) - eta2/d2   and  delta > eta2/d2
        FHMS3:  2*delta - eta2*sqrt(K)            and  delta > eta2*sqrt(K)
        FHMH4:  2*delta + eta1 + eta2
        FHMH5:  2*delta + eta1/(K+d1) + eta2/(K+d2)
        FHMH6:  2*delta

    No such theorem exists for the TYC model (supermales are injected, so
    f+m is not monotone); TYC0 raises UnsupportedModelError.
    """
    mid = spec.model_id
    if mid.is_tyc:
        raise UnsupportedModelError("no global extinction threshold for the TYC model")
    check_compatible(spec, params)
    beta, delta, K = params.beta, params.delta, params.cap_k
    e1, e2, d1, d2 = spec.eta1, spec.eta2, spec.d1, spec.d2
    lhs = beta * K
    side: tuple = ()
    if mid is ModelId.FHMS1:
        thr = 2.0 * delta + e1 - e2
    elif mid is ModelId.FHMS2:
        thr = 2.0 * delta + e1 / (K + d1) - e2 / d2
        side = (("delta > eta2/d2", delta, e2 / d2, delta > e2 / d2),)
    elif mid is ModelId.FHMS3:
        root_k = math.sqrt(K)
        thr = 2.0 * delta - e2 * root_k
        side = (("delta > eta2*sqrt(K)", delta, e2 * root_k, delta > e2 * root_k),)
    elif mid is ModelId.FHMH4:
        thr = 2.0 * delta + e1 + e2
    elif mid is ModelId.FHMH5:
        thr = 2.0 * delta + e1 / (K + d1) + e2 / (K + d2)
    else:  # FHMH6
        thr = 2.0 * delta
    return ExtinctionCondition(model_id=mid, lhs=lhs, threshold=thr, side_conditions=side)
