"""Nystrom solver for the full gap equation with a variable kernel.

The unknown lives on the quadrature nodes, so one application of the
integral operator is a dense matrix-vector product with the kernel matrix
and needs no interpolation.  Picard iteration from the upper envelope
converges monotonically to the maximal nonnegative fixed point -- the
physically selected branch -- because the operator is order preserving and
maps the band between the envelope gap curves into itself.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _core
from .errors import BracketError, ConvergenceError, DomainError, EnvelopeError
from .kernel import Kernel
from .params import PhysicalParams, SolverConfig
from .quadrature import QuadratureRule, composite_rule
from .simple_gap import solve_gap_at, tau

#: Default Nystrom discretization: 16 log panels x 16 Gauss points.
DEFAULT_PANELS = 16
#: Consecutive non-improving iterations before the damping fallback engages.
STALL_LIMIT = 10
#: Fallback damping factor once a stall is detected.
FALLBACK_DAMPING = 0.5
#: Iteration cap for transition-temperature probes; the bisection predicate
#: only needs threshold-level resolution, not full convergence.
TC_PROBE_ITER = 1500


def default_rule(p: PhysicalParams, panels: int = DEFAULT_PANELS) -> QuadratureRule:
    return composite_rule(p.epsilon, p.debye, panels)


def envelope_margin(d2: float, cfg: SolverConfig) -> float:
    """Numerical slack around the sandwich band."""
    return 10.0 * cfg.fp_tol * (1.0 + d2)


@dataclass(frozen=True, eq=False)
class GapSlice:
    """Solution of the full equation at one temperature, on the rule nodes."""

    temperature: float
    nodes: np.ndarray
    values: np.ndarray
    residual: float
    iterations: int
    envelope: tuple[float, float]
    converged: bool = True
    damping_used: float = 1.0

    def interpolator(self) -> PchipInterpolator:
        """Monotone piecewise-cubic view of the slice for off-node x;
        post-processing only, the solve itself never interpolates."""
        return PchipInterpolator(self.nodes, self.values, extrapolate=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "u"])
        for x, u in zip(self.nodes, self.values):
            writer.writerow([repr(float(x)), repr(float(u))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "temperature": self.temperature,
                "residual": self.residual,
                "iterations": self.iterations,
                "envelope": {"delta1": self.envelope[0], "delta2": self.envelope[1]},
                "converged": self.converged,
                "damping_used": self.damping_used,
                "nodes": [float(x) for x in self.nodes],
                "values": [float(v) for v in self.values],
            },
            sort_keys=True,
        )


@dataclass(frozen=True, eq=False)
class GapSurface:
    """Slices over a temperature grid plus node-refinement stability data."""

    t_grid: tuple[float, ...]
    slices: tuple[GapSlice, ...]
    refinement_delta: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["T", "x", "u"])
        for sl in self.slices:
            for x, u in zip(sl.nodes, sl.values):
                writer.writerow([repr(sl.temperature), repr(float(x)), repr(float(u))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "t_grid": list(self.t_grid),
                "refinement_delta": self.refinement_delta,
                "slices": [json.loads(sl.to_json()) for sl in self.slices],
            },
            sort_keys=True,
        )


def apply_operator(u: np.ndarray, t: float, kernel: Kernel, rule: QuadratureRule,
                   kmat: Optional[np.ndarray] = None) -> np.ndarray:
    """One application of the discrete gap operator at temperature t.

    u holds nonnegative values at the rule's nodes; the result is
    (A u)(x_i) = sum_j w_j K(x_i, xi_j) u_j tanh(s_j/(2t))/s_j with
    s_j = sqrt(xi_j^2 + u_j^2)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != rule.nodes.shape:
        raise DomainError(
            f"value vector has shape {u.shape}, rule has {rule.nodes.shape}"
        )
    if np.any(u < 0):
        raise DomainError("operator input must be nonnegative")
    if t < 0:
        raise DomainError(f"temperature must be >= 0, got {t!r}")
    if kmat is None:
        kmat = kernel.eval_matrix(rule.nodes, rule.nodes)
    return _core.nystrom_apply(kmat, rule.nodes, rule.weights, u, t)


def _envelopes(kernel: Kernel, t: float, p: PhysicalParams,
               cfg: SolverConfig) -> tuple[float, float]:
    d1 = solve_gap_at(kernel.u_lo, t, p, cfg)
    d2 = solve_gap_at(kernel.u_hi, t, p, cfg)
    return d1, d2


def solve_fixed_point(t: float, kernel: Kernel, p: PhysicalParams,
                      cfg: SolverConfig = SolverConfig(),
                      init: str | Sequence[float] = "upper",
                      rule: Optional[QuadratureRule] = None,
                      max_iter: Optional[int] = None) -> GapSlice:
    """Damped Picard iteration for the gap slice at temperature t.

    init is "upper" (the default, u == Delta_2(T), always inside the band),
    "lower" (u == Delta_1(T)) or an explicit value vector.  Iteration stops
    when the undamped update moves by less than cfg.fp_tol in sup norm; a
    residual that refuses to decrease for STALL_LIMIT iterations drops the
    damping to FALLBACK_DAMPING once."""
    if rule is None:
        rule = default_rule(p)
    t2 = tau(kernel.u_hi, p, cfg)
    if not 0 <= t <= t2 * (1 + 1e-9):
        raise DomainError(f"temperature {t!r} outside [0, tau2={t2!r}]")
    d1, d2 = _envelopes(kernel, t, p, cfg)
    n = len(rule)
    if isinstance(init, str):
        if init == "upper":
            u = np.full(n, d2)
        elif init == "lower":
            u = np.full(n, d1)
        else:
            raise DomainError(f"init must be 'upper', 'lower' or a vector, got {init!r}")
    else:
        u = np.asarray(init, dtype=np.float64).copy()
        if u.shape != rule.nodes.shape:
            raise DomainError("custom init has wrong length for the rule")
        if np.any(u < 0):
            raise DomainError("custom init must be nonnegative")
    kmat = kernel.eval_matrix(rule.nodes, rule.nodes)
    damping = cfg.damping
    budget = cfg.fp_max_iter if max_iter is None else max_iter
    history: list[float] = []
    best = np.inf
    stall = 0
    residual = np.inf
    iterations = 0
    for iterations in range(1, budget + 1):
        au = _core.nystrom_apply(kmat, rule.nodes, rule.weights, u, t)
        residual = float(np.max(np.abs(au - u)))
        history.append(residual)
        if residual < cfg.fp_tol:
            u = au
            break
        if residual < best * (1 - 1e-12):
            best = residual
            stall = 0
        else:
            stall += 1
            if stall >= STALL_LIMIT and damping > FALLBACK_DAMPING:
                damping = FALLBACK_DAMPING
                stall = 0
        u = u + damping * (au - u)
    else:
        raise ConvergenceError(
            f"fixed point not converged at T={t!r} after {budget} iterations "
            f"(residual {residual!r})",
            residual_history=history, last_values=u,
        )
    margin = envelope_margin(d2, cfg)
    if np.any(u < d1 - margin) or np.any(u > d2 + margin):
        worst_lo = float(np.min(u - d1))
        worst_hi = float(np.max(u - d2))
        raise EnvelopeError(
            f"slice at T={t!r} left the envelope band [{d1!r}, {d2!r}] "
            f"(low excess {worst_lo!r}, high excess {worst_hi!r}); "
            "kernel bounds or quadrature are inconsistent"
        )
    return GapSlice(float(t), rule.nodes, u, residual, iterations, (d1, d2),
                    converged=True, damping_used=damping)


def _probe_max_gap(t: float, kernel: Kernel, p: PhysicalParams, cfg: SolverConfig,
                   rule: QuadratureRule) -> float:
    """Largest node value of the slice at t, tolerant of slow convergence.

    Iterates from the upper envelope stay above the maximal fixed point, so
    an unconverged probe still bounds it from above; near the transition the
    predicate resolves long before full convergence does."""
    try:
        sl = solve_fixed_point(t, kernel, p, cfg, rule=rule,
                               max_iter=min(cfg.fp_max_iter, TC_PROBE_ITER))
        return float(np.max(sl.values))
    except ConvergenceError as exc:
        return float(np.max(exc.last_values))


def transition_temperature(kernel: Kernel, p: PhysicalParams,
                           cfg: SolverConfig = SolverConfig(),
                           rule: Optional[QuadratureRule] = None) -> float:
    """Transition temperature of the full equation.

    The envelope curves confine it to [tau(u_lo), tau(u_hi)]; inside that
    bracket the boundary between gapped and normal is located by bisection
    on the predicate max_i u(T, x_i) > gap_zero_threshold * debye.  The
    infimum over exact zeros is not numerically decidable, so the declared
    threshold stands in for it."""
    if rule is None:
        rule = default_rule(p)
    t1 = tau(kernel.u_lo, p, cfg)
    t2 = tau(kernel.u_hi, p, cfg)
    if t2 < t1:
        raise BracketError(f"envelope bracket inverted: {t1!r} > {t2!r}")
    if (t2 - t1) <= cfg.root_tol * t2:
        return 0.5 * (t1 + t2)
    threshold = cfg.gap_zero_threshold * p.debye
    if _probe_max_gap(t2, kernel, p, cfg, rule) > threshold:
        raise BracketError(
            f"gap still open at tau2={t2!r}; kernel bounds inconsistent"
        )
    if _probe_max_gap(t1, kernel, p, cfg, rule) <= threshold:
        # The lower envelope vanishes exactly at tau1, so a closed gap there
        # pins the transition to the bracket's left endpoint.
        return t1
    lo, hi = t1, t2
    while hi - lo > cfg.root_tol * t2:
        mid = 0.5 * (lo + hi)
        if _probe_max_gap(mid, kernel, p, cfg, rule) > threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _clamp_into(u: np.ndarray, d1: float, d2: float) -> np.ndarray:
    return np.clip(u, d1, d2)


def gap_surface(kernel: Kernel, t_grid, p: PhysicalParams,
                cfg: SolverConfig = SolverConfig(),
                rule: Optional[QuadratureRule] = None,
                refine_probes: int = 3) -> GapSurface:
    """Solve slice by slice over a sorted temperature grid.

    Each slice warm-starts from the previous one clamped into its own
    envelope band, which keeps every iterate inside the band and cuts the
    iteration count.  refinement_delta re-solves a few probe temperatures
    with doubled nodes and reports the sup difference at the coarse nodes
    (monotone cubic interpolation bridges the two node sets)."""
    if rule is None:
        rule = default_rule(p)
    grid = [float(t) for t in t_grid]
    if not grid:
        raise DomainError("temperature grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise DomainError("temperature grid must be sorted ascending")
    slices: list[GapSlice] = []
    prev: Optional[np.ndarray] = None
    for t in grid:
        if prev is None:
            sl = solve_fixed_point(t, kernel, p, cfg, rule=rule)
        else:
            d1, d2 = _envelopes(kernel, t, p, cfg)
            sl = solve_fixed_point(t, kernel, p, cfg,
                                   init=_clamp_into(prev, d1, d2), rule=rule)
        slices.append(sl)
        prev = sl.values
    probes = sorted({grid[0], grid[len(grid) // 2], grid[-1]})[:max(0, refine_probes)]
    fine_rule = rule.refined(2)
    delta = 0.0
    for t in probes:
        coarse = slices[grid.index(t)]
        fine = solve_fixed_point(t, kernel, p, cfg, rule=fine_rule)
        if np.max(fine.values) == 0.0 and np.max(coarse.values) == 0.0:
            continue
        bridged = fine.interpolator()(coarse.nodes)
        delta = max(delta, float(np.max(np.abs(bridged - coarse.values))))
    return GapSurface(tuple(grid), tuple(slices), delta)
