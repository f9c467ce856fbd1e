"""Equilibrium enumeration and classification.

Closed forms exist for the TYC model (a cubic in the male density once
s* = mu/delta is fixed, or a square root when mu = 0) and for the linear
harvesting models; the saturating and power models get a guarded 2-D
Newton search. Every reported point is verified by substituting it back
into the model RHS.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError, EradoptError, ParameterError
from .models import make_rhs
from .params import LifeParams, ModelId, ModelSpec, State, check_compatible
from . import stability
from .stability import Verdict

#: Relative band separating knife-edge (tangent / zero-discriminant) cases
#: from the generic branches.
KNIFE_EDGE_RTOL = 1e-10


def residual_norm(spec: ModelSpec, params: LifeParams, point: State) -> float:
    """max |rhs| at a point under the spec's constant controls."""
    if spec.model_id.is_tyc:
        u1, u2 = spec.mu, 0.0
    else:
        u1, u2 = spec.eta1, spec.eta2
    d = make_rhs(spec, params)(point.f, point.m, point.s, u1, u2)
    return max(abs(d[0]), abs(d[1]), abs(d[2]))


def verification_tol(params: LifeParams) -> float:
    return 1e-8 * max(1.0, params.cap_k)


class Classification(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    NON_HYPERBOLIC = "non-hyperbolic"


_VERDICT_TO_CLASS = {
    Verdict.STABLE: Classification.STABLE,
    Verdict.UNSTABLE: Classification.UNSTABLE,
    Verdict.MARGINAL: Classification.NON_HYPERBOLIC,
}


@dataclass(frozen=True)
class Equilibrium:
    state: State
    classification: Classification
    provenance: str

    def as_dict(self) -> dict:
        return {
            "state": list(self.state.as_tuple()),
            "classification": self.classification.value,
            "provenance": self.provenance,
        }


@dataclass
class EquilibriumReport:
    spec: ModelSpec
    params: LifeParams
    equilibria: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add(self, state: State, classification: Classification, provenance: str) -> None:
        res = residual_norm(self.spec, self.params, state)
        tol = verification_tol(self.params)
        if res >= tol:
            raise EradoptError(
                f"candidate equilibrium {state.as_tuple()} fails substitution: "
                f"|rhs|={res:.3e} >= {tol:.3e} ({provenance})"
            )
        self.equilibria.append(Equilibrium(state, classification, provenance))

    def states(self) -> list[State]:
        return [e.state for e in self.equilibria]

    def as_dict(self) -> dict:
        return {
            "model": self.spec.as_dict(),
            "params": self.params.as_dict(),
            "equilibria": [e.as_dict() for e in self.equilibria],
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# TYC model, mu > 0: cubic analysis


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of a*m^3 + b*m^2 + c*m + d = 0 for the interior male
    density; a = 2*beta and d = 4*K*delta*s* are positive when mu > 0."""

    a: float
    b: float
    c: float
    d: float

    def discriminant(self) -> float:
        a, b, c, d = self.a, self.b, self.c, self.d
        return (
            b * b * c * c
            - 4.0 * a * c ** 3
            - 4.0 * b ** 3 * d
            - 27.0 * a * a * d * d
            + 18.0 * a * b * c * d
        )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class ThresholdSet:
    """Roots of the coefficient functions c(s*) and b(s*), plus
    alpha = K*beta/delta.

    Ordering: alpha > 9/2 puts s_c_minus < s_b < s_c_plus, while
    4 < alpha < 9/2 puts s_b < s_c_minus < s_c_plus. For alpha < 4 the
    c-roots are complex and both are reported as NaN.
    """

    s_c_plus: float
    s_c_minus: float
    s_b: float
    alpha: float

    @classmethod
    def from_params(cls, params: LifeParams) -> "ThresholdSet":
        K, beta, delta = params.cap_k, params.beta, params.delta
        disc = K * K / 4.0 - K * delta / beta
        if disc >= 0.0:
            r = math.sqrt(disc)
            sc_p, sc_m = K / 2.0 + r, K / 2.0 - r
        else:
            sc_p = sc_m = math.nan
        return cls(s_c_plus=sc_p, s_c_minus=sc_m, s_b=K / 3.0, alpha=K * beta / delta)


def tyc_cubic(params: LifeParams, mu: float) -> CubicCoefficients:
    """Interior-equilibrium cubic for the TYC model with s* = mu/delta."""
    if not mu > 0:
        raise ParameterError(f"the cubic analysis requires mu > 0, got {mu!r}")
    beta, delta, K = params.beta, params.delta, params.cap_k
    s = mu / delta
    return CubicCoefficients(
        a=2.0 * beta,
        b=3.0 * beta * s - K * beta,
        c=2.0 * beta * s * s + 2.0 * K * delta - 2.0 * K * beta * s,
        d=4.0 * K * delta * s,
    )


class RootCount(enum.Enum):
    TWO_POSITIVE = "two-positive"
    NO_POSITIVE = "no-positive"


def _positive_root_count_numeric(coeffs: CubicCoefficients) -> int:
    """Companion-matrix root count (with multiplicity) of positive real roots."""
    roots = np.roots(coeffs.as_tuple())
    scale = max(1.0, float(np.max(np.abs(roots))))
    count = 0
    for z in roots:
        if abs(z.imag) <= 1e-7 * scale and z.real > 1e-9 * scale:
            count += 1
    return count


def classify_positive_roots(
    coeffs: CubicCoefficients,
    thresholds: ThresholdSet,
    s_star: float,
    cross_check: bool = True,
) -> RootCount:
    """Number of positive interior male-density roots: two or none.

    Logic: a negative discriminant leaves one real (necessarily negative)
    root; otherwise the Descartes sign pattern of (a, b, c, d) with a, d > 0
    carries either two sign changes (two positive roots, counted with
    multiplicity) or none. The sign-change rule is the one used in the
    case-by-case proofs; the statement headers duplicate their own
    conclusions and are not used.
    """
    a, b, c, d = coeffs.as_tuple()
    if a <= 0 or d < 0:
        raise ParameterError("classification expects a > 0 and d >= 0 from the TYC cubic")
    disc = coeffs.discriminant()
    disc_scale = max(
        abs(b * b * c * c),
        abs(4.0 * a * c ** 3),
        abs(4.0 * b ** 3 * d),
        abs(27.0 * a * a * d * d),
        abs(18.0 * a * b * c * d),
        1e-300,
    )
    coeff_scale = max(abs(a), abs(b), abs(c), abs(d))
    degenerate_disc = abs(disc) <= KNIFE_EDGE_RTOL * disc_scale
    if degenerate_disc and abs(d) <= KNIFE_EDGE_RTOL * coeff_scale and abs(c) <= KNIFE_EDGE_RTOL * coeff_scale:
        raise DegenerateError("repeated root coincides with zero (d ~ c ~ 0)")

    if disc < 0.0 and not degenerate_disc:
        result = RootCount.NO_POSITIVE
    else:
        signs = []
        for value in (a, b, c, d):
            if abs(value) <= KNIFE_EDGE_RTOL * coeff_scale:
                continue
            signs.append(1 if value > 0 else -1)
        changes = sum(1 for x, y in zip(signs, signs[1:]) if x != y)
        result = RootCount.TWO_POSITIVE if changes == 2 else RootCount.NO_POSITIVE

    if cross_check and not degenerate_disc:
        expected = 2 if result is RootCount.TWO_POSITIVE else 0
        numeric = _positive_root_count_numeric(coeffs)
        if numeric != expected:
            raise EradoptError(
                f"sign-pattern classification ({expected} positive roots) disagrees "
                f"with numeric root finding ({numeric}) for coefficients {coeffs.as_tuple()}"
            )
    return result


def tyc_equilibria(params: LifeParams, mu: float) -> EquilibriumReport:
    """All equilibria of the TYC model with mu > 0.

    The supermale-only boundary point (0, 0, mu/delta) is classified by the
    published closed form (stable iff 1/9 < delta < 1); interior points come
    from the cubic with f* = m*^2/(m* + 2 s*), classified by Routh-Hurwitz
    on the Jacobian.
    """
    spec = ModelSpec(ModelId.TYC0, mu=mu)
    report = EquilibriumReport(spec=spec, params=params)
    delta = params.delta
    s_star = mu / delta

    report.add(
        State(0.0, 0.0, s_star),
        _VERDICT_TO_CLASS[stability.boundary_verdict(params).verdict],
        "boundary female-extinct point (0, 0, mu/delta); closed-form eigenvalues",
    )

    coeffs = tyc_cubic(params, mu)
    monic = stability.CharPoly(
        (coeffs.d / coeffs.a, coeffs.c / coeffs.a, coeffs.b / coeffs.a)
    )
    roots = [z.real for z in monic.roots() if abs(z.imag) <= 1e-9 * max(1.0, abs(z))]
    roots = sorted(r for r in roots if r > 0.0)
    # collapse a near-double root into one non-hyperbolic entry
    merged: list[tuple[float, bool]] = []
    for r in roots:
        if merged and abs(r - merged[-1][0]) <= 1e-7 * max(1.0, abs(r)):
            merged[-1] = ((merged[-1][0] + r) / 2.0, True)
        else:
            merged.append((r, False))
    for m_star, is_double in merged:
        f_star = m_star * m_star / (m_star + 2.0 * s_star)
        point = State(f_star, m_star, s_star)
        if is_double:
            cls = Classification.NON_HYPERBOLIC
            why = "interior cubic double root (degenerate)"
        else:
            cls = _VERDICT_TO_CLASS[stability.classify_point(spec, params, point).verdict]
            why = "interior cubic root"
        report.add(point, cls, why)
    return report


# ---------------------------------------------------------------------------
# TYC model, mu = 0


def tyc_mu0_equilibria(params: LifeParams) -> EquilibriumReport:
    """Equilibria of the TYC model without supermale introduction.

    All equilibria sit on the diagonal f* = m* with s* = 0:
    f*(+/-) = K/4 * (1 +/- sqrt(1 - 16*delta/(beta*K))). The count follows
    the 16*delta vs beta*K trichotomy; the tangent point (K/4, K/4, 0) at
    equality is unstable (zero eigenvalue, repelling side).
    """
    spec = ModelSpec(ModelId.TYC0, mu=0.0)
    report = EquilibriumReport(spec=spec, params=params)
    beta, delta, K = params.beta, params.delta, params.cap_k

    origin = State(0.0, 0.0, 0.0)
    report.add(
        origin,
        _VERDICT_TO_CLASS[stability.classify_point(spec, params, origin).verdict],
        "origin",
    )

    lhs, rhs_ = 16.0 * delta, beta * K
    scale = max(lhs, rhs_)
    if abs(lhs - rhs_) <= KNIFE_EDGE_RTOL * scale:
        report.add(
            State(K / 4.0, K / 4.0, 0.0),
            Classification.UNSTABLE,
            "tangent interior point (16*delta = beta*K); zero eigenvalue, unstable",
        )
    elif lhs < rhs_:
        root = math.sqrt(1.0 - lhs / rhs_)
        for sign, branch in ((1.0, "plus"), (-1.0, "minus")):
            fstar = K / 4.0 * (1.0 + sign * root)
            point = State(fstar, fstar, 0.0)
            cls = _VERDICT_TO_CLASS[stability.classify_point(spec, params, point).verdict]
            report.add(point, cls, f"interior {branch}-branch (mu=0 closed form)")
    return report


# ---------------------------------------------------------------------------
# Linear harvesting models (closed forms)


def _linear_interior(
    params: LifeParams, eta1: float, eta2_signed: float
) -> tuple[float, list[tuple[float, float]]]:
    """Interior equilibria of the linear 2-D model written with a signed
    male coefficient (+eta2 stocking, -eta2 harvesting).

    Returns (gap, points) where gap = beta*K - 8*(2*delta + eta1 - eta2s)
    decides the branch structure and points holds 0, 1 (tangent) or 2
    (f*, m*) pairs, plus branch first.
    """
    beta, delta, K = params.beta, params.delta, params.cap_k
    denom = 2.0 * delta + eta1 - eta2_signed
    if denom <= 0:
        raise ParameterError("interior analysis needs 2*delta + eta1 - eta2 > 0")
    gap = beta * K - 8.0 * denom
    scale = max(beta * K, 8.0 * denom)
    f_coef = delta - eta2_signed
    m_coef = delta + eta1
    if abs(gap) <= KNIFE_EDGE_RTOL * scale:
        f_star = K * f_coef / (2.0 * denom)
        m_star = K * m_coef / (2.0 * denom)
        return 0.0, [(f_star, m_star)]
    if gap < 0.0:
        return gap, []
    root = math.sqrt(beta * K * gap)
    pts = []
    for sign in (1.0, -1.0):
        base = beta * K + sign * root
        pts.append((f_coef * base / (2.0 * beta * denom), m_coef * base / (2.0 * beta * denom)))
    return gap, pts


def fhms_equilibria(params: LifeParams, spec: ModelSpec) -> EquilibriumReport:
    """Equilibria of the linear female-harvest/male-stock model.

    Origin plus up to two interior points under the discriminant threshold
    beta*K vs 8*(2*delta + eta1 - eta2). The tangent (equality) point is
    unstable when eta1 > 0 and stable in the pure-stocking case eta1 = 0,
    eta2 > 0. In the pure-stocking case the published f-coordinate carries
    a denominator inconsistent with the stationarity equations; both forms
    are evaluated and the one passing back-substitution is reported, with a
    warning recording the discrepancy.
    """
    if spec.model_id is not ModelId.FHMS1:
        raise ParameterError(f"closed forms apply to the linear FHMS model, got {spec.model_id}")
    check_compatible(spec, params)
    report = EquilibriumReport(spec=spec, params=params)
    beta, delta, K = params.beta, params.delta, params.cap_k
    eta1, eta2 = spec.eta1, spec.eta2

    origin = State(0.0, 0.0, 0.0)
    report.add(
        origin,
        _VERDICT_TO_CLASS[stability.classify_point(spec, params, origin).verdict],
        "origin",
    )

    gap, pts = _linear_interior(params, eta1, eta2)
    pure_stocking = eta1 == 0.0 and eta2 > 0.0

    if pts and gap == 0.0:
        f_star, m_star = pts[0]
        cls = Classification.STABLE if pure_stocking else Classification.UNSTABLE
        note = "stable (pure-stocking tangent case)" if pure_stocking else "unstable (zero eigenvalue)"
        report.add(State(f_star, m_star, 0.0), cls, f"tangent interior point; {note}")
        return report

    for (f_star, m_star), branch in zip(pts, ("plus", "minus")):
        provenance = f"interior {branch}-branch (linear closed form)"
        if pure_stocking:
            # published f-coordinate for this case divides by 2*(2*delta+eta1)*beta
            f_printed = (delta - eta2) * (beta * K + (1.0 if branch == "plus" else -1.0)
                                          * math.sqrt(beta * K * gap)) / (2.0 * (2.0 * delta + eta1) * beta)
            tol = verification_tol(params)
            res_corrected = residual_norm(spec, params, State(f_star, m_star, 0.0))
            try:
                res_printed = residual_norm(spec, params, State(f_printed, m_star, 0.0))
            except Exception:
                res_printed = math.inf
            if abs(f_printed - f_star) > 1e-9 * max(1.0, abs(f_star)):
                report.warnings.append(
                    f"pure-stocking {branch}-branch: published f-coordinate {f_printed:.6g} "
                    f"(|rhs|={res_printed:.3g}) disagrees with the stationarity solution "
                    f"{f_star:.6g} (|rhs|={res_corrected:.3g}); reporting the one passing "
                    "back-substitution"
                )
                if res_printed < res_corrected:
                    f_star = f_printed  # pragma: no cover - corrected form always wins
        point = State(f_star, m_star, 0.0)
        cls = _VERDICT_TO_CLASS[stability.classify_point(spec, params, point).verdict]
        report.add(point, cls, provenance)
    return report


def fhmh_linear_equilibria(params: LifeParams, spec: ModelSpec) -> EquilibriumReport:
    """Equilibria of the linear both-sex harvesting model (eta2 sign
    flipped relative to the stocking model)."""
    if spec.model_id is not ModelId.FHMH4:
        raise ParameterError(f"closed forms apply to the linear FHMH model, got {spec.model_id}")
    report = EquilibriumReport(spec=spec, params=params)
    origin = State(0.0, 0.0, 0.0)
    report.add(
        origin,
        _VERDICT_TO_CLASS[stability.classify_point(spec, params, origin).verdict],
        "origin",
    )
    gap, pts = _linear_interior(params, spec.eta1, -spec.eta2)
    if pts and gap == 0.0:
        f_star, m_star = pts[0]
        report.add(
            State(f_star, m_star, 0.0),
            Classification.NON_HYPERBOLIC,
            "tangent interior point (zero eigenvalue)",
        )
        return report
    for (f_star, m_star), branch in zip(pts, ("plus", "minus")):
        point = State(f_star, m_star, 0.0)
        cls = _VERDICT_TO_CLASS[stability.classify_point(spec, params, point).verdict]
        report.add(point, cls, f"interior {branch}-branch (linear closed form)")
    return report


# ---------------------------------------------------------------------------
# Nonlinear harvesting models: guarded Newton search


def numeric_interior_equilibria(
    spec: ModelSpec,
    params: LifeParams,
    n_starts: int = 24,
    seed: int = 0,
) -> list[State]:
    """Interior (f, m > 0) equilibria of a 2-D model by damped Newton from
    a spread of starting points. Points are deduplicated and verified by
    substitution before being returned."""
    if spec.model_id.is_tyc:
        raise ParameterError("numeric interior search applies to the 2-D models")
    check_compatible(spec, params)
    rhs = make_rhs(spec, params)
    K = params.cap_k
    rng = np.random.default_rng(seed)
    tol = 1e-12 * max(1.0, K)

    starts = []
    for frac_f in (0.05, 0.2, 0.45, 0.8):
        for frac_m in (0.05, 0.2, 0.45, 0.8):
            starts.append((frac_f * K, frac_m * K))
    while len(starts) < 16 + n_starts:
        starts.append(tuple(rng.uniform(1e-3, 1.0, size=2) * K))

    found: list[tuple[float, float]] = []
    for f0, m0 in starts:
        f, m = f0, m0
        ok = False
        for _ in range(80):
            df, dm, _ = rhs(f, m, 0.0, spec.eta1, spec.eta2)
            if abs(df) <= tol and abs(dm) <= tol:
                ok = True
                break
            (j11, j12), (j21, j22) = stability._jacobian_entries(
                spec.model_id, params, f, m, 0.0, spec.eta1, spec.eta2, spec.d1, spec.d2
            )
            det = j11 * j22 - j12 * j21
            if abs(det) < 1e-300:
                break
            step_f = (j22 * df - j12 * dm) / det
            step_m = (j11 * dm - j21 * df) / det
            # damp steps that would leave the positive quadrant
            lam = 1.0
            while lam > 1e-6 and (f - lam * step_f <= 0.0 or m - lam * step_m <= 0.0):
                lam *= 0.5
            f -= lam * step_f
            m -= lam * step_m
            if not (math.isfinite(f) and math.isfinite(m)) or max(f, m) > 1e6 * K:
                break
        if not ok or f <= 1e-9 or m <= 1e-9:
            continue
        if any(
            abs(f - pf) <= 1e-6 * max(1.0, pf) and abs(m - pm) <= 1e-6 * max(1.0, pm)
            for pf, pm in found
        ):
            continue
        if residual_norm(spec, params, State(f, m, 0.0)) < verification_tol(params):
            found.append((f, m))
    found.sort()
    return [State(f, m, 0.0) for f, m in found]


def equilibria_report(spec: ModelSpec, params: LifeParams) -> EquilibriumReport:
    """Full equilibrium report for any of the seven models."""
    mid = spec.model_id
    if mid is ModelId.TYC0:
        return tyc_equilibria(params, spec.mu) if spec.mu > 0 else tyc_mu0_equilibria(params)
    if mid is ModelId.FHMS1:
        return fhms_equilibria(params, spec)
    if mid is ModelId.FHMH4:
        return fhmh_linear_equilibria(params, spec)

    check_compatible(spec, params)
    report = EquilibriumReport(spec=spec, params=params)
    origin = State(0.0, 0.0, 0.0)
    if mid.is_power:
        # harvest derivative vanishes at the origin; the linear part is the
        # pure death terms, so the origin verdict is read off analytically
        report.add(origin, Classification.STABLE, "origin; linear death terms dominate")
    else:
        report.add(
            origin,
            _VERDICT_TO_CLASS[stability.classify_point(spec, params, origin).verdict],
            "origin",
        )
    for point in numeric_interior_equilibria(spec, params):
        cls = _VERDICT_TO_CLASS[stability.classify_point(spec, params, point).verdict]
        report.add(point, cls, "interior point (Newton search)")
    return report
