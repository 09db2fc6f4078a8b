"""Ready-made systems used by the CLI, the test suite and the scripts."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .errors import ConfigError
from .extremum import EsParams, StaticMap, build_es_system, named_map
from .flow import TimePeriodicSystem
from .planar import PlanarSystem

TWO_PI = 2.0 * math.pi


def linear_test() -> TimePeriodicSystem:
    """x' = -x + sin(t): closed-form return map for validating the solvers.

    The periodic solution is x*(t) = (sin t - cos t)/2 and the time-2pi
    return map from t0 = 0 contracts by exactly exp(-2 pi).
    """
    return TimePeriodicSystem(
        dim=1, period=TWO_PI,
        rhs=lambda t, x: np.array([-x[0] + math.sin(t)]),
        jacobian=lambda t, x: np.array([[-1.0]]),
        rhs_scalar=lambda t, x: -x + math.sin(t),
        jacobian_scalar=lambda t, x: -1.0,
        name="linear_test")


def es_quadratic(epsilon: float = 0.01, amp: float = 0.1,
                 radius: float = 1.0, box: Optional[float] = 0.05):
    """Seeking the minimum of 1 + y^2. Returns (system, map, params)."""
    m = named_map("quadratic")
    params = EsParams(epsilon=epsilon, amp=amp, radius=radius, box=box)
    return build_es_system(m, params), m, params


def es_quartic(epsilon: float = 0.001, amp: float = 0.1,
               radius: float = 0.5, box: Optional[float] = 0.05):
    """Seeking the minimum of y^2 + y^4. Returns (system, map, params)."""
    m = named_map("quartic")
    params = EsParams(epsilon=epsilon, amp=amp, radius=radius, box=box)
    return build_es_system(m, params), m, params


def vdp_cascade(mu: float = 1.0) -> TimePeriodicSystem:
    """Van der Pol oscillator driving a scalar stage with cubic forcing.

    x1' = x2, x2' = mu (1 - x1^2) x2 - x1, y' = -x2^2 y + x2^3.  The
    driver is autonomous; its limit cycle makes the y stage a
    periodically forced contraction whenever x2 is not identically zero.
    The declared period is a placeholder: the actual cycle period must
    be detected from the driver (see the demo-cascade command).
    """
    if mu <= 0:
        raise ConfigError("mu must be positive")

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        x1, x2, y = x
        return np.array([x2,
                         mu * (1.0 - x1 * x1) * x2 - x1,
                         -x2 * x2 * y + x2 ** 3])

    def jac(t: float, x: np.ndarray) -> np.ndarray:
        x1, x2, y = x
        return np.array([
            [0.0, 1.0, 0.0],
            [-2.0 * mu * x1 * x2 - 1.0, mu * (1.0 - x1 * x1), 0.0],
            [0.0, -2.0 * x2 * y + 3.0 * x2 * x2, -x2 * x2],
        ])

    return TimePeriodicSystem(dim=3, period=1.0, rhs=rhs, jacobian=jac,
                              name=f"vdp_cascade(mu={mu:g})")


def hopf_circle(aspect: float = 1.0) -> PlanarSystem:
    """Planar field with growth 1 - x1^2 - (x2/aspect)^2 and unit rotation.

    In the reduced variable the equation is dz/dtheta = (1 - e^{2z}) /
    aspect with the attracting cycle at z = 0: the ellipse of semi-axes
    (1, aspect).
    """

    def growth(x: np.ndarray) -> float:
        return 1.0 - x[0] * x[0] - (x[1] / aspect) ** 2

    def growth_grad(x: np.ndarray):
        return (-2.0 * x[0], -2.0 * x[1] / aspect ** 2)

    return PlanarSystem(
        growth_fn=growth,
        omega_fn=lambda x: 1.0,
        aspect=aspect, omega_sign=1,
        growth_grad=growth_grad,
        omega_grad=lambda x: (0.0, 0.0),
        name=f"hopf_circle(aspect={aspect:g})")


_BUILDERS = {
    "linear_test": lambda **kw: linear_test(),
    "vdp_cascade": lambda **kw: vdp_cascade(float(kw.pop("mu", 1.0))),
}


def named_system(name: str, **kwargs) -> TimePeriodicSystem:
    """Look up a built-in time-periodic system by name."""
    if name in _BUILDERS:
        return _BUILDERS[name](**kwargs)
    if name in ("es_quadratic", "es_quartic"):
        builder = es_quadratic if name == "es_quadratic" else es_quartic
        sys, _, _ = builder(**{k: float(v) if v is not None else None
                               for k, v in kwargs.items()})
        return sys
    raise ConfigError(f"unknown system {name!r}; expected one of "
                      "linear_test, es_quadratic, es_quartic, vdp_cascade")
