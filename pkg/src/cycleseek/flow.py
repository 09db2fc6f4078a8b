"""Flow maps of time-periodic ODEs.

Integrates x' = f(t, x) with f(t + T, x) = f(t, x), exposing the flow
phi(t1, t0, x0) as a dense trajectory.  Two integrators are provided: an
embedded Dormand-Prince 5(4) pair with step-size control (the default) and
a fixed-step classical RK4 kept for deterministic step-count work.  Dense
output is cubic Hermite interpolation between stored accepted nodes, using
the derivative values the integrator already computed.

Blow-up is a reportable outcome, not an exception: once the max-norm of the
state crosses ``blowup_threshold`` the trajectory is truncated at the last
state below the threshold and flagged ``escaped``.  Non-finite right-hand
sides and step underflow raise :class:`FlowIntegrationError` instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionError, FlowIntegrationError, PreconditionError

Array = np.ndarray

# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = (19372.0 / 6561.0, -25360.0 / 2187.0,
                          64448.0 / 6561.0, -212.0 / 729.0)
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0,
                                46732.0 / 5247.0, 49.0 / 176.0,
                                -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = (35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0,
                           -2187.0 / 6784.0, 11.0 / 84.0)
# 5th-order minus embedded 4th-order weights (error estimator).
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0,
                                71.0 / 1920.0, -17253.0 / 339200.0,
                                22.0 / 525.0, -1.0 / 40.0)

_MAX_STEPS = 20_000_000
_MIN_FACTOR, _MAX_FACTOR, _SAFETY = 0.2, 5.0, 0.9


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator selection and tolerances.

    ``step`` is the step size for ``fixed_rk4`` and the initial trial step
    for ``adaptive_rk45``.  ``max_step`` caps adaptive steps; tighten it
    when the stored nodes feed dense-output interpolation, since smooth
    slow systems otherwise take steps too long for accurate Hermite
    reconstruction between nodes.
    """

    method: str = "adaptive_rk45"
    step: float = 1e-2
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    blowup_threshold: float = 1e8
    max_step: float = math.inf

    def __post_init__(self):
        if self.method not in ("adaptive_rk45", "fixed_rk4"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError("step must be positive and finite")
        if self.abs_tol <= 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be positive")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")

    def with_max_step(self, cap: float) -> "IntegratorConfig":
        from dataclasses import replace
        return replace(self, max_step=min(self.max_step, cap))


@dataclass(frozen=True)
class TimePeriodicSystem:
    """Right-hand side f(t, x) with period T in t.

    ``rhs`` and ``jacobian`` take ``(t, x)`` with ``x`` an ndarray of shape
    (dim,) and return an ndarray (shape (dim,) resp. (dim, dim)).  Scalar
    systems may additionally carry plain-float handles ``rhs_scalar`` /
    ``jacobian_scalar``; the integrator uses them as a fast path with
    identical semantics.
    """

    dim: int
    period: float
    rhs: Callable[[float, Array], Array]
    jacobian: Optional[Callable[[float, Array], Array]] = None
    rhs_scalar: Optional[Callable[[float, float], float]] = None
    jacobian_scalar: Optional[Callable[[float, float], float]] = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not (self.period > 0 and math.isfinite(self.period)):
            raise ValueError("period must be positive and finite")

    def periodicity_defect(self, t_samples: int = 64, x_samples: int = 8,
                           radius: float = 2.0, rng=None) -> float:
        """Max |f(t + T, x) - f(t, x)| over a sample grid (diagnostic)."""
        rng = np.random.default_rng(0) if rng is None else rng
        worst = 0.0
        for t in np.linspace(0.0, self.period, t_samples, endpoint=False):
            for _ in range(x_samples):
                x = rng.uniform(-radius, radius, self.dim)
                d = np.max(np.abs(self.rhs(t + self.period, x) - self.rhs(t, x)))
                worst = max(worst, float(d))
        return worst


@dataclass
class Trajectory:
    """Stored integrator nodes with cubic Hermite dense output.

    ``states`` has one row per node; ``derivs`` holds f(t, x) at the nodes.
    ``escaped`` marks truncation at the blow-up threshold.
    """

    t0: float
    times: Array
    states: Array
    derivs: Array
    escaped: bool = False

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        self.derivs = np.atleast_2d(np.asarray(self.derivs, dtype=float))
        if self.times.ndim != 1 or len(self.times) != self.states.shape[0]:
            raise DimensionError("times and states must align")
        if np.any(np.diff(self.times) <= 0):
            raise FlowIntegrationError("times not strictly increasing",
                                       float(self.times[0]))

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def endpoint(self) -> Array:
        return self.states[-1].copy()

    def interpolate(self, t) -> Array:
        """Evaluate the dense output at time(s) t within the covered span."""
        tq = np.atleast_1d(np.asarray(t, dtype=float))
        ts = self.times
        if np.any(tq < ts[0] - 1e-12) or np.any(tq > ts[-1] + 1e-12):
            raise ValueError("interpolation time outside stored span")
        tq = np.clip(tq, ts[0], ts[-1])
        idx = np.clip(np.searchsorted(ts, tq, side="right") - 1, 0, len(ts) - 2)
        if len(ts) == 1:
            out = np.repeat(self.states, len(tq), axis=0)
            return out[0] if np.isscalar(t) else out
        ta, tb = ts[idx], ts[idx + 1]
        h = tb - ta
        s = (tq - ta) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        ya, yb = self.states[idx], self.states[idx + 1]
        fa, fb = self.derivs[idx], self.derivs[idx + 1]
        out = (h00[:, None] * ya + (h * h10)[:, None] * fa
               + h01[:, None] * yb + (h * h11)[:, None] * fb)
        return out[0] if np.isscalar(t) else out

    def to_csv(self, path) -> None:
        from .reporting import write_trajectory_csv
        write_trajectory_csv(path, self.times, self.states)


def _check_x0(sys: TimePeriodicSystem, x0) -> Array:
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape != (sys.dim,):
        raise DimensionError(f"x0 has shape {np.shape(x0)}, system dim is {sys.dim}")
    return x


def _rhs_array(sys: TimePeriodicSystem):
    f = sys.rhs

    def call(t: float, x: Array) -> Array:
        out = np.asarray(f(t, x), dtype=float).reshape(-1)
        if out.shape != x.shape:
            raise DimensionError("rhs output shape mismatch")
        return out

    return call


def _integrate_adaptive_array(f, t0: float, x0: Array, t1: float,
                              cfg: IntegratorConfig, store: bool):
    atol, rtol, cap = cfg.abs_tol, cfg.rel_tol, cfg.blowup_threshold
    hmax = cfg.max_step
    t, y = t0, x0.copy()
    k1 = f(t, y)
    if not np.all(np.isfinite(k1)):
        raise FlowIntegrationError("non-finite rhs", t, y)
    ts, ys, fs = [t], [y.copy()], [k1.copy()]
    escaped = False
    h = min(cfg.step, hmax, t1 - t0)
    nsteps = 0
    while t < t1:
        if nsteps > _MAX_STEPS:
            raise FlowIntegrationError("step budget exhausted", t, y)
        h = min(h, t1 - t)
        if t + h == t:
            raise FlowIntegrationError("step size underflow", t, y)
        k2 = f(t + _C2 * h, y + h * (_A21 * k1))
        k3 = f(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2))
        k4 = f(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = f(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = f(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        ynew = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = f(t + h, ynew)
        err_vec = h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5 + _E6 * k6 + _E7 * k7)
        if not (np.all(np.isfinite(ynew)) and np.all(np.isfinite(err_vec))):
            # shrink and retry; persistent non-finite values raise below
            h *= 0.25
            nsteps += 1
            if h < 1e-14 * max(1.0, abs(t)):
                raise FlowIntegrationError("non-finite step", t, y)
            continue
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(ynew))
        err = float(np.max(np.abs(err_vec) / scale))
        nsteps += 1
        if err <= 1.0:
            t += h
            y = ynew
            k1 = k7
            if store:
                ts.append(t)
                ys.append(y.copy())
                fs.append(k1.copy())
            if float(np.max(np.abs(y))) > cap:
                escaped = True
                if store:  # drop the node past the threshold
                    ts.pop(), ys.pop(), fs.pop()
                break
            factor = _MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))
            h = min(h * factor, hmax)
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
    if store:
        return ts, ys, fs, escaped
    return t, y, k1, escaped


def _integrate_adaptive_scalar(f, t0: float, x0: float, t1: float,
                               cfg: IntegratorConfig, store: bool):
    # Same scheme as the array path, unrolled on plain floats.  This path
    # carries the return-map iteration loops, where per-step numpy overhead
    # dominates the run time.
    atol, rtol, cap = cfg.abs_tol, cfg.rel_tol, cfg.blowup_threshold
    hmax = cfg.max_step
    t, y = t0, float(x0)
    k1 = f(t, y)
    if not math.isfinite(k1):
        raise FlowIntegrationError("non-finite rhs", t, y)
    ts, ys, fs = [t], [y], [k1]
    escaped = False
    h = min(cfg.step, hmax, t1 - t0)
    nsteps = 0
    while t < t1:
        if nsteps > _MAX_STEPS:
            raise FlowIntegrationError("step budget exhausted", t, y)
        if t + h > t1:
            h = t1 - t
        if t + h == t:
            raise FlowIntegrationError("step size underflow", t, y)
        k2 = f(t + _C2 * h, y + h * (_A21 * k1))
        k3 = f(t + _C3 * h, y + h * (_A31 * k1 + _A32 * k2))
        k4 = f(t + _C4 * h, y + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = f(t + _C5 * h, y + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = f(t + h, y + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        ynew = y + h * (_B1 * k1 + _B3 * k3 + _B4 * k4 + _B5 * k5 + _B6 * k6)
        k7 = f(t + h, ynew)
        err_abs = abs(h * (_E1 * k1 + _E3 * k3 + _E4 * k4 + _E5 * k5
                           + _E6 * k6 + _E7 * k7))
        nsteps += 1
        if not (math.isfinite(ynew) and math.isfinite(err_abs)):
            h *= 0.25
            if h < 1e-14 * max(1.0, abs(t)):
                raise FlowIntegrationError("non-finite step", t, y)
            continue
        ay, aynew = abs(y), abs(ynew)
        err = err_abs / (atol + rtol * (ay if ay > aynew else aynew))
        if err <= 1.0:
            t += h
            y = ynew
            k1 = k7
            if store:
                ts.append(t)
                ys.append(y)
                fs.append(k1)
            if abs(y) > cap:
                escaped = True
                if store:
                    ts.pop(), ys.pop(), fs.pop()
                break
            h = min(hmax, h * (_MAX_FACTOR if err == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err ** -0.2))))
        else:
            h *= max(_MIN_FACTOR, _SAFETY * err ** -0.2)
    if store:
        return ts, ys, fs, escaped
    return t, y, k1, escaped


def _rk4_step_array(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(t + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_fixed_array(f, t0, x0, t1, cfg: IntegratorConfig, store: bool):
    cap = cfg.blowup_threshold
    n = max(1, int(math.ceil((t1 - t0) / cfg.step - 1e-12)))
    h = (t1 - t0) / n
    t, y = t0, x0.copy()
    k = f(t, y)
    if not np.all(np.isfinite(k)):
        raise FlowIntegrationError("non-finite rhs", t, y)
    ts, ys, fs = [t], [y.copy()], [k.copy()]
    escaped = False
    for i in range(n):
        y = _rk4_step_array(f, t, y, h)
        t = t0 + (i + 1) * h
        if not np.all(np.isfinite(y)):
            raise FlowIntegrationError("non-finite state", t, y)
        if float(np.max(np.abs(y))) > cap:
            escaped = True
            break
        k = f(t, y)
        if store:
            ts.append(t)
            ys.append(y.copy())
            fs.append(k.copy())
    if store:
        return ts, ys, fs, escaped
    return t, y, k, escaped


def flow(sys: TimePeriodicSystem, t0: float, x0, t1: float,
         cfg: IntegratorConfig | None = None) -> Trajectory:
    """Flow map phi(t1, t0, x0) as a dense trajectory.

    Requires t1 >= t0.  With t1 == t0 the identity property gives a single
    stored node.  A blow-up threshold crossing truncates the trajectory and
    sets ``escaped`` instead of raising.
    """
    cfg = cfg or IntegratorConfig()
    x = _check_x0(sys, x0)
    if not math.isfinite(t0) or not math.isfinite(t1):
        raise ValueError("times must be finite")
    if t1 < t0:
        raise ValueError("flow requires t1 >= t0")
    f = _rhs_array(sys)
    if t1 == t0:
        d = f(t0, x)
        if not np.all(np.isfinite(d)):
            raise FlowIntegrationError("non-finite rhs", t0, x)
        return Trajectory(t0, np.array([t0]), x[None, :].copy(), d[None, :])
    use_scalar = sys.dim == 1 and sys.rhs_scalar is not None
    if use_scalar:
        fsc = sys.rhs_scalar
        if cfg.method == "adaptive_rk45":
            ts, ys, fs, escaped = _integrate_adaptive_scalar(
                fsc, t0, float(x[0]), t1, cfg, store=True)
        else:
            fa = lambda t, v: np.array([fsc(t, float(v[0]))])
            ts, ys, fs, escaped = _integrate_fixed_array(fa, t0, x, t1, cfg, store=True)
            ys = [float(v[0]) for v in ys]
            fs = [float(v[0]) for v in fs]
        states = np.asarray(ys, dtype=float)[:, None]
        derivs = np.asarray(fs, dtype=float)[:, None]
        return Trajectory(t0, np.asarray(ts), states, derivs, escaped)
    if cfg.method == "adaptive_rk45":
        ts, ys, fs, escaped = _integrate_adaptive_array(f, t0, x, t1, cfg, store=True)
    else:
        ts, ys, fs, escaped = _integrate_fixed_array(f, t0, x, t1, cfg, store=True)
    return Trajectory(t0, np.asarray(ts), np.asarray(ys), np.asarray(fs), escaped)


def flow_endpoint(sys: TimePeriodicSystem, t0: float, x0, t1: float,
                  cfg: IntegratorConfig | None = None):
    """Endpoint-only flow evaluation: returns (state, escaped, t_reached).

    Skips node storage; used by return-map iteration loops.  t_reached is
    t1 unless the trajectory escaped, in which case it is the time of the
    threshold-crossing state.
    """
    cfg = cfg or IntegratorConfig()
    x = _check_x0(sys, x0)
    if t1 < t0:
        raise ValueError("flow requires t1 >= t0")
    if t1 == t0:
        return x.copy(), False, float(t0)
    if sys.dim == 1 and sys.rhs_scalar is not None and cfg.method == "adaptive_rk45":
        t, y, _, escaped = _integrate_adaptive_scalar(
            sys.rhs_scalar, t0, float(x[0]), t1, cfg, store=False)
        return np.array([y]), escaped, float(t)
    f = _rhs_array(sys)
    if cfg.method == "adaptive_rk45":
        t, y, _, escaped = _integrate_adaptive_array(f, t0, x, t1, cfg, store=False)
    else:
        t, y, _, escaped = _integrate_fixed_array(f, t0, x, t1, cfg, store=False)
    return np.asarray(y, dtype=float), escaped, float(t)


def flow_with_sensitivity(sys: TimePeriodicSystem, t0: float, x0, t1: float,
                          cfg: IntegratorConfig | None = None):
    """Scalar flow plus d phi / d x0, for systems with dim == 1.

    Co-integrates the log-sensitivity integral of the scalar variational
    equation, so the returned derivative exp(integral of df/dx along the
    trajectory) is positive by construction.
    Returns (trajectory, dphi_dx0).
    """
    if sys.dim != 1:
        raise DimensionError("sensitivity route requires a scalar system")
    if sys.jacobian is None and sys.jacobian_scalar is None:
        raise PreconditionError("sensitivity requires a jacobian handle")
    cfg = cfg or IntegratorConfig()
    x = _check_x0(sys, x0)
    if sys.jacobian_scalar is not None:
        jac = sys.jacobian_scalar
    else:
        jmat = sys.jacobian
        jac = lambda t, v: float(np.asarray(jmat(t, np.array([v]))).reshape(()))
    if sys.rhs_scalar is not None:
        fsc = sys.rhs_scalar
    else:
        farr = _rhs_array(sys)
        fsc = lambda t, v: float(farr(t, np.array([v]))[0])

    def rhs_aug(t: float, z: Array) -> Array:
        return np.array([fsc(t, z[0]), jac(t, z[0])])

    aug = TimePeriodicSystem(dim=2, period=sys.period, rhs=rhs_aug)
    tr = flow(aug, t0, np.array([x[0], 0.0]), t1, cfg)
    dphi = float(np.exp(tr.states[-1, 1]))
    traj = Trajectory(tr.t0, tr.times, tr.states[:, :1], tr.derivs[:, :1], tr.escaped)
    return traj, dphi


def check_periodicity_residual(sys: TimePeriodicSystem, t0: float, x,
                               cfg: IntegratorConfig | None = None) -> float:
    """Max-norm periodicity defect |phi(t0 + T, t0, x) - x|.

    Escaped flows report an infinite residual.
    """
    y, escaped, _ = flow_endpoint(sys, t0, x, t0 + sys.period, cfg)
    if escaped:
        return math.inf
    return float(np.max(np.abs(y - _check_x0(sys, x))))
