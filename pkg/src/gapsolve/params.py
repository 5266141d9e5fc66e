"""Physical parameters, solver configuration, and unit normalization.

All solver modules work in normalized units (debye energy = 1); the CLI
converts on the way in and out.  Exactly two unit states exist: physical
and normalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace, fields

from .errors import DomainError

#: Relative cutoff-to-debye ratio above which validation warns.
EPSILON_WARN_FRACTION = 0.1


@dataclass(frozen=True)
class PhysicalParams:
    """Problem box: cutoff, Debye energy, and the three coupling constants.

    The defaults are a close strong-coupling triple; that choice keeps the
    contraction inequality satisfiable (see contraction module), which a
    widely separated weak-coupling triple never achieves.
    """

    epsilon: float = 1e-3
    debye: float = 1.0
    u0: float = 2.0
    u1: float = 2.004
    u2: float = 2.008

    def coupling(self, name: str) -> float:
        if name not in ("u0", "u1", "u2"):
            raise DomainError(f"unknown coupling name {name!r}; expected u0, u1 or u2")
        return getattr(self, name)

    @property
    def normalized(self) -> bool:
        return self.debye == 1.0


@dataclass(frozen=True)
class SolverConfig:
    quad_rel_tol: float = 1e-12
    root_tol: float = 1e-12
    fp_tol: float = 1e-10
    fp_max_iter: int = 10000
    gap_zero_threshold: float = 1e-8
    damping: float = 1.0

    def __post_init__(self):
        for name in ("quad_rel_tol", "root_tol", "fp_tol", "gap_zero_threshold"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.fp_max_iter < 1:
            raise DomainError(f"fp_max_iter must be >= 1, got {self.fp_max_iter}")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError(f"damping must be in (0, 1], got {self.damping}")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    warnings: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def default_u0(u1: float) -> float:
    """Fallback lowest coupling when the caller supplies only u1, u2."""
    return 0.5 * u1


def admissible_coupling(u: float, epsilon: float, debye: float) -> bool:
    """True when the zero-temperature gap for coupling u is real and positive,
    i.e. debye > epsilon * e^(1/u).  Evaluated in log form to dodge overflow."""
    if u <= 0 or epsilon <= 0 or debye <= 0:
        return False
    return math.log(debye / epsilon) > 1.0 / u


def validate(p: PhysicalParams) -> ValidationReport:
    """Check every invariant; the report is the result, nothing raises."""
    violations = []
    warnings = []
    if not p.epsilon > 0:
        violations.append(f"epsilon must be > 0 (epsilon={p.epsilon!r})")
    if not p.debye > 0:
        violations.append(f"debye must be > 0 (debye={p.debye!r})")
    if p.epsilon > 0 and p.debye > 0 and not p.epsilon < p.debye:
        violations.append(f"epsilon < debye violated (epsilon={p.epsilon!r}, debye={p.debye!r})")
    if not 0 < p.u0:
        violations.append(f"u0 must be > 0 (u0={p.u0!r})")
    if not p.u0 < p.u1:
        violations.append(f"u0 < u1 violated (u0={p.u0!r}, u1={p.u1!r})")
    if not p.u1 < p.u2:
        violations.append(f"u1 < u2 violated (u1={p.u1!r}, u2={p.u2!r})")
    if 0 < p.epsilon < p.debye:
        for name in ("u0", "u1", "u2"):
            u = getattr(p, name)
            if u > 0 and not admissible_coupling(u, p.epsilon, p.debye):
                violations.append(
                    f"debye > epsilon*e^(1/{name}) violated "
                    f"({name}={u!r}: gap closes, normal state at all T)"
                )
        if p.epsilon > EPSILON_WARN_FRACTION * p.debye:
            warnings.append(
                f"epsilon={p.epsilon!r} exceeds {EPSILON_WARN_FRACTION}*debye; "
                "the cutoff is meant to be small"
            )
    return ValidationReport(tuple(violations), tuple(warnings))


def require_admissible(p: PhysicalParams) -> None:
    report = validate(p)
    if not report.ok:
        raise DomainError("; ".join(report.violations))


def normalize(p: PhysicalParams) -> PhysicalParams:
    """Rescale so debye == 1; couplings are dimensionless and unchanged.

    Idempotent: normalizing twice is exact (division by 1.0)."""
    require_admissible(p)
    if p.debye == 1.0:
        return p
    return replace(p, epsilon=p.epsilon / p.debye, debye=1.0)


def denormalize(p: PhysicalParams, debye: float) -> PhysicalParams:
    """Inverse of normalize for an original Debye energy."""
    if debye <= 0:
        raise DomainError(f"debye must be > 0, got {debye!r}")
    return replace(p, epsilon=p.epsilon * debye, debye=p.debye * debye)


# --- flat key = value configuration files ----------------------------------

_PARAM_KEYS = {f.name for f in fields(PhysicalParams)}
_SOLVER_KEYS = {f.name for f in fields(SolverConfig)}


def parse_config_text(text: str) -> dict[str, float]:
    """Parse `key = value` lines; '#' starts a comment.  Unknown keys error."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _PARAM_KEYS | _SOLVER_KEYS:
            raise DomainError(f"config line {lineno}: unknown key {key!r}")
        try:
            out[key] = int(value) if key == "fp_max_iter" else float(value)
        except ValueError:
            raise DomainError(f"config line {lineno}: cannot parse value {value!r}") from None
    return out


def load_config(path) -> tuple[dict[str, float], dict[str, float]]:
    """Read a config file and split the keys into (params, solver) dicts."""
    with open(path, "r", encoding="utf-8") as fh:
        entries = parse_config_text(fh.read())
    pvals = {k: v for k, v in entries.items() if k in _PARAM_KEYS}
    svals = {k: v for k, v in entries.items() if k in _SOLVER_KEYS}
    return pvals, svals
