"""Continuity machinery: the small-temperature contraction window.

The gap operator acting on temperature-and-energy functions is contractive
whenever the inequality

    z * tanh(z) > (1 + 4*debye^2/D0(0)^2) / 2,
    z = D0(0) / (4 * D2^{-1}(D0(T1)))

holds together with the constraint T1 < D0^{-1}(D0(0)/2), where D0 and D2
are the gap curves of the lowest and highest couplings.  The left side is
non-increasing in T1 (D0 falls, so the inverse grows, so z falls, and
z*tanh(z) is increasing), which makes the largest admissible T1 a
bisection.  Since the paper-side argument yields no explicit Lipschitz
constant, the contraction factor itself is estimated empirically from
seeded random pairs inside the envelope band.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _core
from .errors import ContractionWindowError, DomainError
from .kernel import Kernel
from .params import PhysicalParams, SolverConfig
from .quadrature import QuadratureRule
from .bcs_solver import default_rule
from .simple_gap import delta_zero, inverse_gap, solve_gap_at, tau

#: Fraction of tau0 bounding the T1 search from above, keeps D0(T1) > 0.
T1_CAP = 1.0 - 1e-6
#: Relative offset used for the T1 -> 0 limit evaluation.
T1_FLOOR = 1e-6


@dataclass(frozen=True)
class Condition20Report:
    """One evaluation of the contraction inequality at a candidate T1."""

    t1: float
    lhs: float
    rhs: float
    constraint_ok: bool
    satisfied: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "t1": self.t1,
                "lhs": self.lhs,
                "rhs": self.rhs,
                "constraint_ok": self.constraint_ok,
                "satisfied": self.satisfied,
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class ContractionEstimate:
    """Empirical sup-norm contraction factor over seeded random pairs."""

    temperature: float
    trials: int
    max_ratio: float
    seed: int
    degenerate_band: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "temperature": self.temperature,
                "trials": self.trials,
                "max_ratio": self.max_ratio,
                "seed": self.seed,
                "degenerate_band": self.degenerate_band,
            },
            sort_keys=True,
        )


def condition20_margin(t1: float, p: PhysicalParams,
                       cfg: SolverConfig = SolverConfig()) -> Condition20Report:
    """Evaluate the contraction inequality and its constraint at t1.

    Needs 0 < t1 < tau(u0) so that D0(t1) > 0 and the u2-curve inverse of it
    is defined and positive."""
    tau0 = tau(p.u0, p, cfg)
    if not 0 < t1 < tau0:
        raise DomainError(
            f"t1={t1!r} outside (0, tau0={tau0!r}); D0(t1) would vanish"
        )
    d00 = delta_zero(p.u0, p)
    d0t = solve_gap_at(p.u0, t1, p, cfg)
    if d0t <= 0:
        raise DomainError(f"D0({t1!r}) = 0 at this resolution; t1 too close to tau0")
    x = inverse_gap(p.u2, d0t, p, cfg)
    if x <= 0:
        # D0(t1) reached the top of the u2 curve; cannot happen for u0 < u2.
        raise DomainError("inverse of the upper curve degenerated to zero")
    z = d00 / (4.0 * x)
    lhs = z * math.tanh(z)
    rhs = 0.5 * (1.0 + 4.0 * p.debye * p.debye / (d00 * d00))
    half_life = inverse_gap(p.u0, 0.5 * d00, p, cfg)
    constraint_ok = t1 < half_life
    return Condition20Report(t1, lhs, rhs, constraint_ok, lhs > rhs and constraint_ok)


def max_admissible_t1(p: PhysicalParams,
                      cfg: SolverConfig = SolverConfig()) -> float:
    """Largest t1 satisfying both the inequality and its constraint.

    Bisection is valid because the left side is non-increasing in t1 while
    the right side is constant.  Raises ContractionWindowError carrying the
    zero-limit margin when no temperature qualifies."""
    tau0 = tau(p.u0, p, cfg)
    lo = T1_FLOOR * tau0
    hi = T1_CAP * tau0
    low_report = condition20_margin(lo, p, cfg)
    if not low_report.satisfied:
        raise ContractionWindowError(
            f"contraction inequality fails even as t1 -> 0 "
            f"(lhs={low_report.lhs!r} vs rhs={low_report.rhs!r}); "
            "the right side is too large for these parameters",
            report=low_report,
        )
    if condition20_margin(hi, p, cfg).satisfied:
        return hi
    while hi - lo > cfg.root_tol * tau0:
        mid = 0.5 * (lo + hi)
        if condition20_margin(mid, p, cfg).satisfied:
            lo = mid
        else:
            hi = mid
    return lo


def empirical_contraction_factor(kernel: Kernel, t: float, trials: int, seed: int,
                                 p: PhysicalParams,
                                 cfg: SolverConfig = SolverConfig(),
                                 rule: Optional[QuadratureRule] = None) -> ContractionEstimate:
    """Max over seeded random pairs (u, v) in the envelope band of
    sup|Bu - Bv| / sup|u - v|, where B is the discrete gap operator at
    fixed t.  A degenerate band (constant kernel) falls back to
    perturbations of size fp_tol around the band value, flagged in the
    result."""
    if trials < 1:
        raise DomainError(f"need trials >= 1, got {trials!r}")
    if rule is None:
        rule = default_rule(p)
    d1 = solve_gap_at(kernel.u_lo, t, p, cfg)
    d2 = solve_gap_at(kernel.u_hi, t, p, cfg)
    kmat = kernel.eval_matrix(rule.nodes, rule.nodes)
    n = len(rule)
    rng = np.random.default_rng(seed)
    degenerate = not d2 - d1 > 0
    if degenerate:
        center = np.full(n, d2)
        spread = cfg.fp_tol
        draws = center + rng.uniform(-spread, spread, size=(trials, 2, n))
        draws = np.maximum(draws, 0.0)
    else:
        draws = rng.uniform(d1, d2, size=(trials, 2, n))
    max_ratio = 0.0
    for k in range(trials):
        u, v = draws[k, 0], draws[k, 1]
        denom = float(np.max(np.abs(u - v)))
        if denom == 0.0:
            continue
        bu = _core.nystrom_apply(kmat, rule.nodes, rule.weights, u, t)
        bv = _core.nystrom_apply(kmat, rule.nodes, rule.weights, v, t)
        ratio = float(np.max(np.abs(bu - bv))) / denom
        max_ratio = max(max_ratio, ratio)
    return ContractionEstimate(float(t), trials, max_ratio, seed, degenerate)
