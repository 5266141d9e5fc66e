"""Composite Gauss-Legendre quadrature for the gap-equation integrals.

Every integral in this package has the form

    int_eps^debye  w(xi) * tanh(sqrt(xi^2 + Y)/(2T)) / sqrt(xi^2 + Y)  dxi

with Y >= 0 and T >= 0 (T == 0 takes the limit tanh -> 1).  The integrand
is smooth on [eps, debye] because eps > 0, but it varies on the scale of
xi itself near the lower cutoff, so panels are laid out log-uniformly.
Convergence is judged by panel doubling; at zero temperature a closed form
exists and serves as the exact oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _core
from .errors import DomainError, QuadratureError
from .params import SolverConfig

#: Gauss-Legendre points per panel.
DEFAULT_NODES_PER_PANEL = 16
#: Panels the doubling loop starts from.
DEFAULT_START_PANELS = 4
#: Doubling budget before integrate gives up.
MAX_DOUBLINGS = 12
#: tanh(z) is 1 to double precision beyond this argument.
TANH_CLAMP = 20.0


@lru_cache(maxsize=32)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Composite Gauss-Legendre rule on [lower, upper] with log-spaced panels."""

    lower: float
    upper: float
    panel_count: int
    nodes_per_panel: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.nodes.shape[0]

    def refined(self, factor: int = 2) -> "QuadratureRule":
        return composite_rule(self.lower, self.upper, self.panel_count * factor,
                              self.nodes_per_panel)


@lru_cache(maxsize=256)
def _cached_rule(lower: float, upper: float, panels: int, nodes_per_panel: int):
    edges = np.exp(np.linspace(math.log(lower), math.log(upper), panels + 1))
    edges[0] = lower
    edges[-1] = upper
    x, w = _leggauss(nodes_per_panel)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_rule(lower: float, upper: float,
                   panels: int = DEFAULT_START_PANELS,
                   nodes_per_panel: int = DEFAULT_NODES_PER_PANEL) -> QuadratureRule:
    if not 0 < lower < upper:
        raise DomainError(f"need 0 < lower < upper, got [{lower!r}, {upper!r}]")
    if panels < 1 or nodes_per_panel < 2:
        raise DomainError("need panels >= 1 and nodes_per_panel >= 2")
    nodes, weights = _cached_rule(float(lower), float(upper), panels, nodes_per_panel)
    return QuadratureRule(lower, upper, panels, nodes_per_panel, nodes, weights)


def gap_integrand(xi: float, y: float, t: float) -> float:
    """tanh(sqrt(xi^2+y)/(2t)) / sqrt(xi^2+y), with the t == 0 limit built in."""
    if xi < 0:
        raise DomainError(f"xi must be >= 0, got {xi!r}")
    if y < 0:
        raise DomainError(f"Y must be >= 0, got {y!r}")
    if t < 0:
        raise DomainError(f"T must be >= 0, got {t!r}")
    if xi == 0.0 and y == 0.0:
        raise DomainError("integrand singular at xi = 0, Y = 0")
    s = math.sqrt(xi * xi + y)
    if t == 0.0:
        return 1.0 / s
    z = s / (2.0 * t)
    if z > TANH_CLAMP:
        return 1.0 / s
    return math.tanh(z) / s


def _eval_sum(rule: QuadratureRule, weight, y: float, t: float) -> float:
    wvals = None
    if weight is not None:
        wvals = np.asarray(weight(rule.nodes), dtype=np.float64)
        if wvals.shape != rule.nodes.shape:
            raise DomainError("weight(nodes) must return one value per node")
    return _core.weighted_sum(rule.nodes, rule.weights, wvals, y, t)


def integrate(y: float, t: float, rule: QuadratureRule, cfg: SolverConfig,
              weight=None) -> tuple[float, float]:
    """Adaptively evaluate the gap integral, doubling panels until two
    successive composite values agree to cfg.quad_rel_tol relatively.

    Returns (value, error_estimate) where the estimate is the last observed
    inter-level difference.  The weight callable receives the node array and
    must return per-node factors; None means weight == 1.
    """
    if y < 0:
        raise DomainError(f"Y must be >= 0, got {y!r}")
    if t < 0:
        raise DomainError(f"T must be >= 0, got {t!r}")
    prev = _eval_sum(rule, weight, y, t)
    current = rule
    err = math.inf
    for _ in range(MAX_DOUBLINGS):
        current = current.refined(2)
        value = _eval_sum(current, weight, y, t)
        err = abs(value - prev)
        if err <= cfg.quad_rel_tol * max(abs(value), 1e-300):
            return value, err
        prev = value
    raise QuadratureError(
        f"quadrature did not converge after {MAX_DOUBLINGS} doublings "
        f"(Y={y!r}, T={t!r}, last panels={current.panel_count})",
        last_value=prev, last_error=err,
    )


def t0_integral_closed_form(y: float, eps: float, debye: float) -> float:
    """Exact zero-temperature integral with unit weight:
    asinh(debye/sqrt(Y)) - asinh(eps/sqrt(Y)).  Requires Y > 0; the Y == 0
    value is log(debye/eps) and has its own branch at call sites."""
    if y <= 0:
        raise DomainError(f"closed form needs Y > 0, got {y!r} (use log(debye/eps) at Y = 0)")
    if not 0 < eps < debye:
        raise DomainError(f"need 0 < eps < debye, got {eps!r}, {debye!r}")
    root = math.sqrt(y)
    return math.asinh(debye / root) - math.asinh(eps / root)
