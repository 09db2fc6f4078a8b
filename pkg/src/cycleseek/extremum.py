"""Scalar extremum-seeking loops driven by a sinusoidal dither.

The closed loop x' = -epsilon sin(t) h(x + amp sin t) seeks the minimum of
a static map h whose derivative vanishes only at the origin (h'(x) x > 0
for x != 0, h''(0) > 0).  The module quantifies when the loop admits a
unique attracting 2 pi-periodic solution near the optimum:

* small-gain style feasibility conditions with explicit margins,
* a periodic contraction rate bound on a box round the origin, feeding the
  generic certificate machinery,
* an averaging probe (averaged map, ripple primitive, near-identity
  transform) for diagnostics,
* a direct fixed-point solve for the periodic solution of even maps via a
  contraction on half a period, extended antisymmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.integrate

from .errors import (AssumptionViolation, ConfigError, InternalInconsistency,
                     PreconditionError)
from .flow import IntegratorConfig, TimePeriodicSystem, flow_endpoint
from .lognorm import GridSpec, ViolationReport

Array = np.ndarray

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# static maps


@dataclass(frozen=True)
class StaticMap:
    """A map h with derivative handles up to third order.

    ``kind`` is "polynomial" (coefficients retained, interval extrema
    computed exactly from derivative roots) or "generic" (extrema by dense
    scan with local refinement).
    """

    h: Callable[[float], float]
    h1: Callable[[float], float]
    h2: Callable[[float], float]
    h3: Callable[[float], float]
    kind: str = "generic"
    coeffs: Optional[tuple] = None

    @classmethod
    def from_coefficients(cls, coeffs) -> "StaticMap":
        c = [float(v) for v in coeffs]
        if not c:
            raise ValueError("need at least one coefficient")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        c = tuple(c)
        polys = [np.polynomial.Polynomial(c)]
        for _ in range(3):
            polys.append(polys[-1].deriv())
        p0, p1, p2, p3 = polys
        return cls(h=lambda x: float(p0(x)), h1=lambda x: float(p1(x)),
                   h2=lambda x: float(p2(x)), h3=lambda x: float(p3(x)),
                   kind="polynomial", coeffs=c)

    @classmethod
    def from_callables(cls, h, h1, h2, h3) -> "StaticMap":
        return cls(h=h, h1=h1, h2=h2, h3=h3, kind="generic")

    def derivative(self, order: int) -> Callable[[float], float]:
        return (self.h, self.h1, self.h2, self.h3)[order]

    def check_derivative_consistency(self, radius: float = 2.0,
                                     n_samples: int = 33,
                                     rel_tol: float = 1e-5) -> None:
        """Central-difference cross-check of h1..h3 against h."""
        xs = np.linspace(-radius, radius, n_samples)
        d = 1e-5 * max(1.0, radius)
        pairs = [(self.h, self.h1), (self.h1, self.h2), (self.h2, self.h3)]
        for low, high in pairs:
            for x in xs:
                fd = (low(float(x + d)) - low(float(x - d))) / (2 * d)
                val = high(float(x))
                scale = max(1.0, abs(val), abs(fd))
                if abs(fd - val) > rel_tol * scale:
                    raise AssumptionViolation(
                        f"derivative handles inconsistent at x={x!r}: "
                        f"fd={fd!r} vs handle={val!r}")

    def check_wellshaped(self, radius: float, n_samples: int = 65) -> None:
        """h'(x) x > 0 away from 0, h'(0) = 0, h''(0) > 0."""
        if abs(self.h1(0.0)) > 1e-12:
            raise AssumptionViolation(f"h'(0) = {self.h1(0.0)!r} != 0")
        if not self.h2(0.0) > 0.0:
            raise AssumptionViolation(f"h''(0) = {self.h2(0.0)!r} <= 0")
        for x in np.linspace(-radius, radius, n_samples):
            if x == 0.0:
                continue
            if not self.h1(float(x)) * x > 0.0:
                raise AssumptionViolation(
                    f"h'(x) x = {self.h1(float(x)) * x!r} <= 0 at x={x!r}")

    def check_even(self, radius: float, n_samples: int = 128) -> None:
        for x in np.linspace(0.0, radius, n_samples):
            a, b = self.h(float(x)), self.h(float(-x))
            if abs(a - b) > 1e-12 * (1.0 + abs(a)):
                raise AssumptionViolation(f"map not even at x={x!r}")


def interval_abs_max(m: StaticMap, order: int, radius_or_interval) -> float:
    """max |h^(order)| over [-r, r] or an explicit interval.

    Exact via derivative root isolation for polynomial maps; dense scan
    with local refinement otherwise.  This value is what the feasibility
    inequalities consume.
    """
    if np.isscalar(radius_or_interval):
        lo, hi = -float(radius_or_interval), float(radius_or_interval)
    else:
        lo, hi = (float(v) for v in radius_or_interval)
    if hi < lo:
        raise ValueError("empty interval")
    fn = m.derivative(order)
    if m.kind == "polynomial":
        p = np.polynomial.Polynomial(m.coeffs)
        for _ in range(order):
            p = p.deriv()
        cands = [lo, hi]
        dp = p.deriv()
        if len(dp.coef) > 1 or dp.coef[0] != 0.0:
            for r in np.atleast_1d(dp.roots()):
                if abs(r.imag) < 1e-10 and lo - 1e-12 <= r.real <= hi + 1e-12:
                    cands.append(min(max(float(r.real), lo), hi))
        return max(abs(float(p(x))) for x in cands)
    xs = np.linspace(lo, hi, 4096)
    vals = np.abs([fn(float(x)) for x in xs])
    i = int(np.argmax(vals))
    best = float(vals[i])
    # three parabolic refinement passes round the best sample
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
    for _ in range(3):
        grid = np.linspace(a, b, 9)
        gv = np.abs([fn(float(x)) for x in grid])
        j = int(np.argmax(gv))
        best = max(best, float(gv[j]))
        a, b = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
    return best


QUADRATIC = StaticMap.from_coefficients([1.0, 0.0, 1.0])
QUARTIC = StaticMap.from_coefficients([0.0, 0.0, 1.0, 0.0, 1.0])

NAMED_MAPS = {"quadratic": QUADRATIC, "quartic": QUARTIC}


def named_map(name: str) -> StaticMap:
    try:
        return NAMED_MAPS[name]
    except KeyError:
        raise ConfigError(f"unknown map {name!r}; expected one of "
                          f"{sorted(NAMED_MAPS)}") from None


# ---------------------------------------------------------------------------
# parameters and the closed loop


@dataclass(frozen=True)
class EsParams:
    """Loop parameters: adaptation gain, dither amplitude, initial-condition
    radius, and (optional) certificate box half-width."""

    epsilon: float
    amp: float
    radius: float
    box: Optional[float] = None

    def __post_init__(self):
        if self.epsilon <= 0 or self.amp <= 0 or self.radius <= 0:
            raise ValueError("epsilon, amp, radius must be positive")
        if self.box is not None and self.box <= 0:
            raise ValueError("box must be positive when given")


def build_es_system(m: StaticMap, params: EsParams) -> TimePeriodicSystem:
    """Closed loop x' = -epsilon sin(t) h(x + amp sin t), period 2 pi."""
    m.check_derivative_consistency()
    eps, amp = params.epsilon, params.amp
    h, h1 = m.h, m.h1
    sin = math.sin

    def rhs_scalar(t: float, x: float) -> float:
        s = sin(t)
        return -eps * s * h(x + amp * s)

    def jac_scalar(t: float, x: float) -> float:
        s = sin(t)
        return -eps * s * h1(x + amp * s)

    return TimePeriodicSystem(
        dim=1, period=TWO_PI,
        rhs=lambda t, x: np.array([rhs_scalar(t, float(x[0]))]),
        jacobian=lambda t, x: np.array([[jac_scalar(t, float(x[0]))]]),
        rhs_scalar=rhs_scalar, jacobian_scalar=jac_scalar,
        name="extremum_seeking")


# ---------------------------------------------------------------------------
# feasibility analysis


def curvature_floor(m: StaticMap, radius: float, n_grid: int = 4097,
                    n_quad: int = 65) -> float:
    """min over |w| <= 2 radius + 1 of the line-averaged second derivative.

    The average integral of h'' along the segment [0, w] extends h'(w)/w
    continuously through w = 0; positivity is what bends trajectories back
    toward the origin.  Computed by Gauss-Legendre quadrature on a dense
    w grid; raises AssumptionViolation when the floor is not positive.
    """
    m.check_wellshaped(2.0 * radius + 1.0)
    nodes, weights = np.polynomial.legendre.leggauss(n_quad)
    lam = 0.5 * (nodes + 1.0)  # map to [0, 1]
    wts = 0.5 * weights
    half = 2.0 * radius + 1.0
    ws = np.linspace(-half, half, n_grid)
    worst_w, worst_v = None, math.inf
    for w in ws:
        v = float(sum(wt * m.h2(float(l * w)) for l, wt in zip(lam, wts)))
        if v < worst_v:
            worst_v, worst_w = v, float(w)
    if not worst_v > 0.0:
        raise AssumptionViolation(
            f"curvature floor {worst_v!r} <= 0 at w={worst_w!r}")
    return worst_v


@dataclass(frozen=True)
class ConditionCheck:
    """One feasibility inequality with its margin (rhs - lhs)."""

    holds: bool
    lhs: float
    rhs: float
    strict: bool = True

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {"holds": self.holds, "lhs": self.lhs, "rhs": self.rhs,
                "margin": self.margin}


def _cond(lhs: float, rhs: float, strict: bool = True) -> ConditionCheck:
    holds = lhs < rhs if strict else lhs <= rhs
    return ConditionCheck(holds, float(lhs), float(rhs), strict)


@dataclass(frozen=True)
class EsAnalysis:
    """Feasibility report for one loop instance.

    All interval maxima are taken over the windows the respective
    inequality prescribes (multiples of radius plus dither margins).
    ``asymptotic_radius`` bounds limsup |x(t)| for trajectories started in
    the radius ball whenever the three gain conditions hold;
    ``quadratic_sup_bound`` is the sharper sup bound available for
    quadratic maps; ``eps_star`` is the empirically largest gain keeping
    the gain conditions plus the box margin satisfied (None when no box is
    given or the box condition is infeasible).
    """

    params: EsParams
    curvature_floor: float
    third_deriv_max: float
    residual_gain: float
    asymptotic_radius: float
    quadratic_sup_bound: Optional[float]
    box_feasible: Optional[ConditionCheck]
    slope_gain_ok: ConditionCheck
    value_gain_ok: ConditionCheck
    residual_within_radius: ConditionCheck
    amplitude_budget_ok: ConditionCheck
    amplitude_radius_ok: ConditionCheck
    invariance_ok: ConditionCheck
    picard_contraction_ok: ConditionCheck
    amp_within_unit: ConditionCheck
    eps_star: Optional[float]

    def to_dict(self) -> dict:
        d = {
            "params": {
                "epsilon": self.params.epsilon,
                "amp": self.params.amp,
                "radius": self.params.radius,
                "box": self.params.box,
            },
            "curvature_floor": self.curvature_floor,
            "third_deriv_max": self.third_deriv_max,
            "residual_gain": self.residual_gain,
            "asymptotic_radius": self.asymptotic_radius,
            "quadratic_sup_bound": self.quadratic_sup_bound,
            "eps_star": self.eps_star,
        }
        conds = {
            "box_feasible": self.box_feasible,
            "slope_gain_ok": self.slope_gain_ok,
            "value_gain_ok": self.value_gain_ok,
            "residual_within_radius": self.residual_within_radius,
            "amplitude_budget_ok": self.amplitude_budget_ok,
            "amplitude_radius_ok": self.amplitude_radius_ok,
            "invariance_ok": self.invariance_ok,
            "picard_contraction_ok": self.picard_contraction_ok,
            "amp_within_unit": self.amp_within_unit,
        }
        d["conditions"] = {k: (v.to_dict() if v is not None else None)
                           for k, v in conds.items()}
        return d


def analyze(m: StaticMap, params: EsParams) -> EsAnalysis:
    """Evaluate every feasibility inequality with explicit margins."""
    eps, amp, R, b = params.epsilon, params.amp, params.radius, params.box
    sig = curvature_floor(m, R)
    gam = interval_abs_max(m, 3, 2.0 * R + 2.0)
    h_2r2 = interval_abs_max(m, 0, 2.0 * R + 2.0)
    h_2r1 = interval_abs_max(m, 0, 2.0 * R + 1.0)
    h1_3r2 = interval_abs_max(m, 1, 3.0 * R + 2.0)
    h1_2r2 = interval_abs_max(m, 1, 2.0 * R + 2.0)
    h_ra = interval_abs_max(m, 0, R + amp)
    h1_ra = interval_abs_max(m, 1, R + amp)
    h20 = m.h2(0.0)
    residual_gain = 8.0 * h_2r2 * ((2.0 / (amp * sig)) * h1_3r2 + 1.0)
    asymptotic_radius = amp * amp * gam / (6.0 * sig) + eps * residual_gain

    box_feasible = None
    if b is not None:
        m3 = interval_abs_max(m, 3, b + amp)
        box_feasible = _cond(4.0 * b + 2.0 * (b + amp) ** 2 * m3 / h20,
                             amp * math.pi)
    slope_gain_ok = _cond(8.0 * eps * h1_2r2, 1.0)
    value_gain_ok = _cond(8.0 * eps * h_2r1, R, strict=False)
    residual_within_radius = _cond(
        amp * amp * gam / (6.0 * sig)
        + (16.0 * eps / (amp * sig)) * h_2r2 * h1_3r2, R, strict=False)
    amplitude_budget_ok = _cond(
        amp * gam * (12.0 * sig * h20 + (gam + 6.0 * sig) ** 2),
        18.0 * sig * sig * h20 * math.pi)
    amplitude_radius_ok = _cond(amp * amp * gam, 6.0 * sig * R)
    invariance_ok = _cond(0.5 * eps * math.pi * h_ra, R, strict=False)
    picard_contraction_ok = _cond(0.5 * eps * math.pi * h1_ra, 1.0)
    amp_within_unit = _cond(amp, 1.0, strict=False)

    quad_bound = None
    if m.kind == "polynomial" and len(m.coeffs) <= 3:
        c0 = m.coeffs[0]
        c2 = m.coeffs[2] if len(m.coeffs) == 3 else 0.0
        quad_bound = (8.0 * eps * (6.0 * R + 4.0 + amp) / amp
                      * (abs(c0) + 4.0 * c2 * (R + 1.0) ** 2))

    eps_star = None
    if b is not None and box_feasible.holds:
        amp_term = amp * amp * gam / (6.0 * sig)

        def feasible(e: float) -> bool:
            return (8.0 * e * h1_2r2 < 1.0
                    and 8.0 * e * h_2r1 <= R
                    and amp_term + (16.0 * e / (amp * sig)) * h_2r2 * h1_3r2 <= R
                    and amp_term + e * residual_gain < b)

        if feasible(1e-300):
            lo_e, hi_e = 1e-300, 1.0
            while feasible(hi_e):
                lo_e, hi_e = hi_e, 2.0 * hi_e
                if hi_e > 1e12:
                    break
            for _ in range(200):
                mid = 0.5 * (lo_e + hi_e)
                if feasible(mid):
                    lo_e = mid
                else:
                    hi_e = mid
            eps_star = lo_e

    return EsAnalysis(
        params=params, curvature_floor=sig, third_deriv_max=gam,
        residual_gain=residual_gain, asymptotic_radius=asymptotic_radius,
        quadratic_sup_bound=quad_bound, box_feasible=box_feasible,
        slope_gain_ok=slope_gain_ok, value_gain_ok=value_gain_ok,
        residual_within_radius=residual_within_radius,
        amplitude_budget_ok=amplitude_budget_ok,
        amplitude_radius_ok=amplitude_radius_ok,
        invariance_ok=invariance_ok,
        picard_contraction_ok=picard_contraction_ok,
        amp_within_unit=amp_within_unit, eps_star=eps_star)


# ---------------------------------------------------------------------------
# contraction rate bound


@dataclass(frozen=True)
class CertificateRate:
    """Periodic bound on the loop jacobian over the box |z| <= box.

    rate_integral is the closed-form period integral of rate_fn; it is
    negative exactly when the box feasibility condition holds.
    """

    rate_fn: Callable[[float], float]
    rate_integral: float
    box: float


def certificate_rate_bound(m: StaticMap, params: EsParams) -> CertificateRate:
    """Rate bound: split the jacobian at the origin and bound each term.

    -eps sin(t) h'(z + amp sin t) <= -eps amp h''(0) sin^2 t
                                     + eps box h''(0) |sin t|
                                     + eps/2 |sin t| (box + amp)^2 M3
    for |z| <= box, with M3 = max |h'''| over |s| <= box + amp.
    """
    if params.box is None:
        raise PreconditionError("rate bound requires the box half-width")
    eps, amp, b = params.epsilon, params.amp, params.box
    h20 = m.h2(0.0)
    if not h20 > 0.0:
        raise AssumptionViolation(f"h''(0) = {h20!r} <= 0")
    m3 = interval_abs_max(m, 3, b + amp)
    sin = math.sin

    def rate_fn(t: float) -> float:
        s = sin(t)
        a = abs(s)
        return (-eps * amp * h20 * s * s + eps * b * h20 * a
                + 0.5 * eps * a * (b + amp) ** 2 * m3)

    integral = (-eps * amp * math.pi * h20 + 4.0 * eps * b * h20
                + 2.0 * eps * (b + amp) ** 2 * m3)
    return CertificateRate(rate_fn=rate_fn, rate_integral=integral, box=b)


def verify_jacobian_bound(m: StaticMap, params: EsParams,
                          grid: GridSpec = GridSpec(t_samples=256, z_samples=64)):
    """Grid check of the rate bound over [0, 2 pi) x [-box, box].

    Returns (ok, ViolationReport).  Equality is attained on the box faces,
    so the comparison carries a machine-epsilon guard.
    """
    rate = certificate_rate_bound(m, params)
    eps, amp, b = params.epsilon, params.amp, params.box
    h1 = m.h1
    worst = None
    for t in np.linspace(0.0, TWO_PI, grid.t_samples, endpoint=False):
        s = math.sin(t)
        bound = rate.rate_fn(float(t))
        for z in np.linspace(-b, b, grid.z_samples):
            val = -eps * s * h1(float(z) + amp * s)
            margin = val - bound
            if worst is None or margin > worst[0]:
                worst = (margin, float(t), float(z), val, bound)
    margin, wt, wz, val, bound = worst
    guard = 64.0 * np.finfo(float).eps * max(1.0, abs(val), abs(bound))
    ok = margin <= grid.slack + guard
    return ok, ViolationReport(ok, wt, np.array([wz]), val, bound, margin)


# ---------------------------------------------------------------------------
# averaging probe


@dataclass(frozen=True)
class AveragingProbe:
    """Averaged map, ripple primitive, and near-identity transform.

    averaged_fn(w) is the dither-weighted period average of the map;
    ripple_fn(t, w) subtracts the running average from the running
    integral; transform_fn(t, w) = w + epsilon * ripple_fn(t, w) is
    strictly increasing in w whenever the slope gain condition holds.
    ``window`` is the w-interval half-width the probe is valid on.
    """

    averaged_fn: Callable[[float], float]
    ripple_fn: Callable[[float, float], float]
    transform_fn: Callable[[float, float], float]
    window: float
    ripple_sup_bound: float


def averaging_probe(m: StaticMap, params: EsParams) -> AveragingProbe:
    if params.amp > 1.0:
        raise PreconditionError(f"probe requires amp <= 1, got {params.amp!r}")
    eps, amp, R = params.epsilon, params.amp, params.radius
    window = 2.0 * R + 1.0
    h = m.h

    def averaged_fn(w: float) -> float:
        val, _ = scipy.integrate.quad(
            lambda t: math.sin(t) * h(w + amp * math.sin(t)),
            0.0, TWO_PI, limit=200, epsabs=1e-12, epsrel=1e-12)
        return val / TWO_PI

    def ripple_fn(t: float, w: float) -> float:
        run, _ = scipy.integrate.quad(
            lambda s: math.sin(s) * h(w + amp * math.sin(s)),
            0.0, t, limit=200, epsabs=1e-12, epsrel=1e-12)
        return t * averaged_fn(w) - run

    def transform_fn(t: float, w: float) -> float:
        return w + eps * ripple_fn(t, w)

    sup_bound = 8.0 * interval_abs_max(m, 0, window + 1.0)
    probe = AveragingProbe(averaged_fn, ripple_fn, transform_fn,
                           window, sup_bound)
    # monotonicity spot-check: failure under a valid slope gain condition
    # marks an internal inconsistency, not a user error
    slope_ok = 8.0 * eps * interval_abs_max(m, 1, 2.0 * R + 2.0) < 1.0
    if slope_ok:
        for t in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi, TWO_PI):
            ws = np.linspace(-window, window, 17)
            vals = [transform_fn(t, float(w)) for w in ws]
            if np.any(np.diff(vals) <= 0):
                raise InternalInconsistency(
                    f"transform not increasing at t={t!r} despite valid "
                    "slope gain condition")
    return probe


# ---------------------------------------------------------------------------
# direct fixed point for even maps


@dataclass
class EvenMapSolution:
    """Periodic solution from the half-period contraction for even maps.

    ``times``/``values`` sample [0, 2 pi]; the second half is the
    antisymmetric extension x(t + pi) = -x(t).  ``sup_bound`` is the proved
    amplitude bound; ``discretization_error`` is a doubling-grid Richardson
    estimate; ``flow_residual`` is the periodicity defect of the anchor
    under the closed-loop flow.
    """

    times: Array
    values: Array
    sup_bound: float
    contraction_factor: float
    n_iters: int
    discretization_error: float
    flow_residual: float

    def value_at(self, t):
        tq = np.mod(np.asarray(t, dtype=float), TWO_PI)
        out = np.interp(tq, self.times, self.values)
        return float(out) if np.ndim(out) == 0 else out


def _even_picard(m: StaticMap, params: EsParams, grid_n: int, tol: float):
    eps, amp = params.epsilon, params.amp
    q = 0.5 * eps * math.pi * interval_abs_max(m, 1, params.radius + amp)
    ts = np.linspace(0.0, math.pi, grid_n + 1)
    sins = np.sin(ts)
    h = np.vectorize(m.h, otypes=[float])
    x = np.zeros(grid_n + 1)
    stop = tol * (1.0 - q)
    for k in range(100000):
        integrand = sins * h(x + amp * sins)
        run = scipy.integrate.cumulative_trapezoid(integrand, ts, initial=0.0)
        x_new = 0.5 * eps * (run[-1] - 2.0 * run)
        gap = float(np.max(np.abs(x_new - x)))
        x = x_new
        if gap <= stop:
            return ts, x, k + 1, q
    raise InternalInconsistency("half-period contraction failed to converge")


def solve_even_map_fixed_point(m: StaticMap, params: EsParams,
                               grid_n: int = 1024, tol: float = 1e-10,
                               cfg: IntegratorConfig | None = None) -> EvenMapSolution:
    """Solve for the periodic solution of an even map by Picard iteration.

    Preconditions: the map is even and both halves of the invariance /
    contraction condition pair hold (message carries margins).  The
    contraction acts on continuous functions over half a period; the
    solution extends to [0, 2 pi] antisymmetrically and changes sign every
    period (no bias).
    """
    m.check_even(params.radius + params.amp)
    eps, amp, R = params.epsilon, params.amp, params.radius
    inv_lhs = 0.5 * eps * math.pi * interval_abs_max(m, 0, R + amp)
    con_lhs = 0.5 * eps * math.pi * interval_abs_max(m, 1, R + amp)
    if not (inv_lhs <= R and con_lhs < 1.0):
        raise PreconditionError(
            "fixed-point conditions fail: "
            f"invariance lhs={inv_lhs!r} (needs <= {R!r}, margin {R - inv_lhs!r}), "
            f"contraction lhs={con_lhs!r} (needs < 1, margin {1.0 - con_lhs!r})")
    ts, x, n_iters, q = _even_picard(m, params, grid_n, tol)
    ts_c, x_c, _, _ = _even_picard(m, params, max(grid_n // 2, 8), tol)
    disc = float(np.max(np.abs(np.interp(ts_c, ts, x) - x_c))) / 3.0
    # antisymmetric extension to the full period
    full_t = np.concatenate([ts, ts[1:] + math.pi])
    full_x = np.concatenate([x, -x[1:]])
    sys = build_es_system(m, params)
    cfg = cfg or IntegratorConfig(abs_tol=1e-12, rel_tol=1e-12)
    end, escaped, _ = flow_endpoint(sys, 0.0, np.array([full_x[0]]), TWO_PI, cfg)
    resid = math.inf if escaped else abs(float(end[0]) - full_x[0])
    return EvenMapSolution(times=full_t, values=full_x, sup_bound=inv_lhs,
                           contraction_factor=q, n_iters=n_iters,
                           discretization_error=disc, flow_residual=resid)
