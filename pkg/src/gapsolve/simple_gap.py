"""The constant-potential gap equation.

For a constant coupling U the gap depends on temperature alone and solves

    1 = U * int_eps^debye  tanh(sqrt(xi^2 + D(T)^2)/(2T)) / sqrt(xi^2 + D(T)^2) dxi.

The right side is strictly decreasing in both D and T, which makes every
root here a bisection: D(T) in the squared-gap variable Y = D^2, the
critical temperature tau where the Y = 0 equation balances, and the inverse
map D^-1.  The zero-temperature gap has a closed form, used both as the
bracket scale and as an oracle in the tests.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketError, DomainError
from .params import PhysicalParams, SolverConfig, admissible_coupling
from .quadrature import QuadratureRule, composite_rule, integrate

#: Treat T >= tau*(1 - TAU_SNAP*root_tol) as the normal state; the true gap
#: there is below solver resolution and the extension by zero applies.
TAU_SNAP = 10.0
#: Bracket growth safety margin above the zero-temperature gap.
BRACKET_MARGIN = 1.1


@lru_cache(maxsize=128)
def _base_rule(eps: float, debye: float) -> QuadratureRule:
    return composite_rule(eps, debye)


def _unit_integral(y: float, t: float, p: PhysicalParams, cfg: SolverConfig) -> float:
    value, _ = integrate(y, t, _base_rule(p.epsilon, p.debye), cfg)
    return value


def delta_zero(u: float, p: PhysicalParams) -> float:
    """Closed-form zero-temperature gap,

        sqrt((debye - eps*e^(1/u)) * (debye - eps*e^(-1/u))) / sinh(1/u).

    Raises when debye <= eps*e^(1/u): the coupling cannot open a gap and the
    material is normal at every temperature."""
    if u <= 0:
        raise DomainError(f"coupling must be > 0, got {u!r}")
    if not 0 < p.epsilon < p.debye:
        raise DomainError(f"need 0 < epsilon < debye, got {p.epsilon!r}, {p.debye!r}")
    if not admissible_coupling(u, p.epsilon, p.debye):
        raise DomainError(
            f"debye <= epsilon*e^(1/u) for u={u!r}: normal state at all T"
        )
    inv = 1.0 / u
    grow = p.debye - p.epsilon * math.exp(inv)
    shrink = p.debye - p.epsilon * math.exp(-inv)
    return math.sqrt(grow * shrink) / math.sinh(inv)


@lru_cache(maxsize=4096)
def tau(u: float, p: PhysicalParams, cfg: SolverConfig = SolverConfig()) -> float:
    """Critical temperature of the constant-coupling equation: the unique
    root of  1 = u * int tanh(xi/(2 tau))/xi dxi,  by bisection.

    The integrand at Y = 0 is tanh(xi/(2T))/xi, so the integral is the unit
    weight one evaluated at Y = 0."""
    delta_zero(u, p)  # admissibility gate, raises with the precise reason
    lo = 1e-9 * p.debye
    if u * _unit_integral(0.0, lo, p, cfg) <= 1.0:
        raise DomainError(
            f"coupling u={u!r} too weak for this cutoff: no critical temperature "
            f"above {lo!r}"
        )
    hi = p.debye
    for _ in range(60):
        if u * _unit_integral(0.0, hi, p, cfg) < 1.0:
            break
        hi *= 2.0
    else:
        raise BracketError("upper bracket for tau did not close")
    while hi - lo > cfg.root_tol * hi:
        mid = 0.5 * (lo + hi)
        if u * _unit_integral(0.0, mid, p, cfg) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_gap_at(u: float, t: float, p: PhysicalParams,
                 cfg: SolverConfig = SolverConfig()) -> float:
    """Gap value D(T) for constant coupling u.

    T at or above the critical temperature returns exactly 0 (extension by
    zero); below it the squared gap is bisected on [0, (1.1 D(0))^2], valid
    because the integral is strictly decreasing in Y."""
    if t < 0:
        raise DomainError(f"temperature must be >= 0, got {t!r}")
    d0 = delta_zero(u, p)
    tc = tau(u, p, cfg)
    if t >= tc * (1.0 - TAU_SNAP * cfg.root_tol):
        return 0.0
    if u * _unit_integral(0.0, t, p, cfg) <= 1.0:
        # Within quadrature noise of tau; the zero extension applies.
        return 0.0
    y_lo, y_hi = 0.0, (BRACKET_MARGIN * d0) ** 2
    if u * _unit_integral(y_hi, t, p, cfg) >= 1.0:
        raise BracketError(
            f"gap bracket failed at u={u!r}, T={t!r}: value at Y={y_hi!r} not below 1"
        )
    width_goal = cfg.root_tol * d0
    for _ in range(200):
        if math.sqrt(y_hi) - math.sqrt(y_lo) <= width_goal:
            break
        y_mid = 0.5 * (y_lo + y_hi)
        if u * _unit_integral(y_mid, t, p, cfg) > 1.0:
            y_lo = y_mid
        else:
            y_hi = y_mid
    return math.sqrt(0.5 * (y_lo + y_hi))


@dataclass(frozen=True)
class GapCurve:
    """Sampled map T -> D(T) for one coupling, with its closing temperature
    and zero-temperature gap."""

    coupling: float
    tau: float
    delta_zero: float
    samples: tuple[tuple[float, float], ...]

    def temperatures(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def gaps(self) -> np.ndarray:
        return np.array([d for _, d in self.samples])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T", "delta"])
        for t, d in self.samples:
            writer.writerow([repr(t), repr(d)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "coupling": self.coupling,
                "tau": self.tau,
                "delta_zero": self.delta_zero,
                "samples": [[t, d] for t, d in self.samples],
            },
            sort_keys=True,
        )


def gap_curve(u: float, t_grid, p: PhysicalParams,
              cfg: SolverConfig = SolverConfig()) -> GapCurve:
    """Solve the simple equation over a sorted temperature grid."""
    grid = [float(t) for t in t_grid]
    if any(t < 0 for t in grid):
        raise DomainError("temperature grid must be nonnegative")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("temperature grid must be sorted ascending")
    samples = tuple((t, solve_gap_at(u, t, p, cfg)) for t in grid)
    return GapCurve(u, tau(u, p, cfg), delta_zero(u, p), samples)


def inverse_gap(u: float, delta: float, p: PhysicalParams,
                cfg: SolverConfig = SolverConfig()) -> float:
    """The temperature where D(T) == delta; the inverse exists on
    [0, D(0)] because D is continuous and strictly decreasing."""
    d0 = delta_zero(u, p)
    if not 0.0 <= delta <= d0 * (1.0 + 10 * cfg.root_tol):
        raise DomainError(f"delta={delta!r} outside [0, {d0!r}]")
    tc = tau(u, p, cfg)
    if delta <= 0.0:
        return tc
    if delta >= d0:
        return 0.0
    lo, hi = 0.0, tc  # D(lo) >= delta >= D(hi)
    while hi - lo > cfg.root_tol * tc:
        mid = 0.5 * (lo + hi)
        if solve_gap_at(u, mid, p, cfg) > delta:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gap_derivatives(u: float, t: float, h: float, p: PhysicalParams,
                    cfg: SolverConfig = SolverConfig()) -> tuple[float, float]:
    """Finite-difference (D', D'') at temperature t with step h.

    Interior points use central stencils, the second derivative refined by
    one Richardson halving.  t == 0 uses first-order one-sided stencils,
    which need t + 2h inside [0, tau)."""
    if h <= 0:
        raise DomainError(f"step must be > 0, got {h!r}")
    tc = tau(u, p, cfg)
    if not 0 <= t < tc:
        raise DomainError(f"temperature {t!r} outside [0, tau={tc!r})")
    d = lambda x: solve_gap_at(u, x, p, cfg)
    if t == 0.0:
        if 2 * h >= tc:
            raise DomainError(f"one-sided stencil leaves [0, tau): 2h={2 * h!r} >= tau")
        f0, f1, f2 = d(0.0), d(h), d(2 * h)
        first = (f1 - f0) / h
        second = (f2 - 2 * f1 + f0) / (h * h)
        return first, second
    if t - h < 0 or t + h >= tc:
        raise DomainError(f"central stencil at t={t!r} with h={h!r} leaves [0, tau)")
    fm, f0, fp_ = d(t - h), d(t), d(t + h)
    first = (fp_ - fm) / (2 * h)
    coarse = (fp_ - 2 * f0 + fm) / (h * h)
    if t - h / 2 >= 0 and t + h / 2 < tc:
        fmh, fph = d(t - h / 2), d(t + h / 2)
        fine = (fph - 2 * f0 + fmh) / (h * h / 4)
        second = (4 * fine - coarse) / 3
    else:
        second = coarse
    return first, second
