"""Interaction kernels U(x, xi) on the square [eps, debye]^2.

Three variants: a constant, a separable family level + amplitude*s(x)*s(xi)
with a named shape profile s mapping the square's edge onto [0, 1], and a
tabulated grid with bilinear interpolation.  Bilinear interpolation is
deliberate: it is continuous and bounded by the node values, so a table
whose entries respect the coupling band keeps the whole kernel inside it.
Higher-order schemes can overshoot and are not offered.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, KernelFileError
from .params import PhysicalParams


def _ramp(s: np.ndarray) -> np.ndarray:
    return s


def _raised_cosine(s: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(np.pi * s))


#: Named edge profiles, each mapping [0, 1] onto [0, 1] monotonically.
SHAPES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "ramp": _ramp,
    "cosine": _raised_cosine,
}


@dataclass(frozen=True, eq=False)
class Kernel:
    """One interaction kernel plus its declared coupling bounds.

    declared_bounds (u_lo, u_hi) are what the solver trusts when it builds
    the envelope gap curves; for built-in variants they are exact, for
    tabulated data they come from the node extrema."""

    kind: str
    eps: float
    debye: float
    u_lo: float
    u_hi: float
    constant: Optional[float] = None
    level: Optional[float] = None
    amplitude: Optional[float] = None
    shape: str = "ramp"
    x_grid: Optional[np.ndarray] = None
    xi_grid: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None

    @property
    def declared_bounds(self) -> tuple[float, float]:
        return self.u_lo, self.u_hi

    def _edge(self, x: np.ndarray) -> np.ndarray:
        frac = (x - self.eps) / (self.debye - self.eps)
        return SHAPES[self.shape](frac)

    def _check_inside(self, x: np.ndarray, xi: np.ndarray) -> None:
        slack = 1e-12 * self.debye
        for name, v in (("x", x), ("xi", xi)):
            if np.any(v < self.eps - slack) or np.any(v > self.debye + slack):
                raise DomainError(
                    f"{name} outside [{self.eps!r}, {self.debye!r}]"
                )

    def eval_matrix(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """K(x_i, xi_j) for all pairs; shape (len(x), len(xi))."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        self._check_inside(x, xi)
        if self.kind == "constant":
            return np.full((x.size, xi.size), self.constant)
        if self.kind == "separable":
            return self.level + self.amplitude * np.outer(self._edge(x), self._edge(xi))
        return _bilinear(self.x_grid, self.xi_grid, self.values, x, xi)


def eval_kernel(kernel: Kernel, x: float, xi: float) -> float:
    """Point evaluation of the kernel; (x, xi) must lie in the square."""
    return float(kernel.eval_matrix(np.array([x]), np.array([xi]))[0, 0])


def _bilinear(xg: np.ndarray, yg: np.ndarray, table: np.ndarray,
              x: np.ndarray, y: np.ndarray) -> np.ndarray:
    ix = np.clip(np.searchsorted(xg, x, side="right") - 1, 0, xg.size - 2)
    iy = np.clip(np.searchsorted(yg, y, side="right") - 1, 0, yg.size - 2)
    tx = np.clip((x - xg[ix]) / (xg[ix + 1] - xg[ix]), 0.0, 1.0)
    ty = np.clip((y - yg[iy]) / (yg[iy + 1] - yg[iy]), 0.0, 1.0)
    v00 = table[np.ix_(ix, iy)]
    v10 = table[np.ix_(ix + 1, iy)]
    v01 = table[np.ix_(ix, iy + 1)]
    v11 = table[np.ix_(ix + 1, iy + 1)]
    tx_col = tx[:, None]
    ty_row = ty[None, :]
    return ((1 - tx_col) * (1 - ty_row) * v00 + tx_col * (1 - ty_row) * v10
            + (1 - tx_col) * ty_row * v01 + tx_col * ty_row * v11)


def constant_kernel(c: float, p: PhysicalParams) -> Kernel:
    if c <= 0:
        raise DomainError(f"constant coupling must be > 0, got {c!r}")
    return Kernel("constant", p.epsilon, p.debye, c, c, constant=c)


def separable_kernel(level: float, amplitude: float, p: PhysicalParams,
                     shape: str = "ramp") -> Kernel:
    if level <= 0:
        raise DomainError(f"level must be > 0, got {level!r}")
    if amplitude < 0:
        raise DomainError(f"amplitude must be >= 0, got {amplitude!r}")
    if shape not in SHAPES:
        raise DomainError(f"unknown shape {shape!r}; have {sorted(SHAPES)}")
    return Kernel("separable", p.epsilon, p.debye, level, level + amplitude,
                  level=level, amplitude=amplitude, shape=shape)


def tabulated_kernel(x_grid, xi_grid, values, p: PhysicalParams) -> Kernel:
    xg = np.asarray(x_grid, dtype=np.float64)
    yg = np.asarray(xi_grid, dtype=np.float64)
    table = np.asarray(values, dtype=np.float64)
    _validate_table(xg, yg, table, p)
    xg.setflags(write=False)
    yg.setflags(write=False)
    table.setflags(write=False)
    return Kernel("tabulated", p.epsilon, p.debye,
                  float(table.min()), float(table.max()),
                  x_grid=xg, xi_grid=yg, values=table)


def _validate_table(xg, yg, table, p: PhysicalParams) -> None:
    if xg.ndim != 1 or yg.ndim != 1 or xg.size < 2 or yg.size < 2:
        raise KernelFileError("grids must be 1-D with at least two points each")
    if table.shape != (xg.size, yg.size):
        raise KernelFileError(
            f"value table shape {table.shape} does not match grids "
            f"({xg.size} x {yg.size})"
        )
    for name, g in (("x", xg), ("xi", yg)):
        if np.any(np.diff(g) <= 0):
            bad = int(np.argmax(np.diff(g) <= 0))
            raise KernelFileError(
                f"{name} grid not strictly increasing at index {bad + 1}"
            )
    slack = 1e-12 * p.debye
    if xg[0] > p.epsilon + slack or xg[-1] < p.debye - slack \
            or yg[0] > p.epsilon + slack or yg[-1] < p.debye - slack:
        raise KernelFileError(
            f"grid does not cover [{p.epsilon!r}, {p.debye!r}]: "
            f"x spans [{xg[0]!r}, {xg[-1]!r}], xi spans [{yg[0]!r}, {yg[-1]!r}]"
        )
    nonpos = np.argwhere(~(table > 0))
    if nonpos.size:
        i, j = nonpos[0]
        raise KernelFileError(
            f"kernel value must be > 0; found {table[i, j]!r} at row {i + 1}, "
            f"column {j + 1}"
        )
    if not np.all(np.isfinite(table)):
        i, j = np.argwhere(~np.isfinite(table))[0]
        raise KernelFileError(f"non-finite kernel value at row {i + 1}, column {j + 1}")


def kernel_bounds(kernel: Kernel, n: int = 101) -> tuple[float, float]:
    """Extrema of the kernel over an n x n uniform sample of the square,
    tightened by the table nodes when the kernel is tabulated."""
    if n < 2:
        raise DomainError(f"need n >= 2 sample points per axis, got {n!r}")
    xs = np.linspace(kernel.eps, kernel.debye, n)
    mat = kernel.eval_matrix(xs, xs)
    lo, hi = float(mat.min()), float(mat.max())
    if kernel.kind == "tabulated":
        lo = min(lo, float(kernel.values.min()))
        hi = max(hi, float(kernel.values.max()))
    return lo, hi


def load_tabulated(path, p: PhysicalParams) -> Kernel:
    """Read a tabulated kernel from CSV: first row is the xi grid, first
    column the x grid, body the coupling values.  Grids are in the same
    units as p and are normalized by p.debye on load."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            rows = [row for row in csv.reader(fh) if any(c.strip() for c in row)]
    except OSError as exc:
        raise KernelFileError(f"cannot read kernel file {path!r}: {exc}") from exc
    if len(rows) < 3 or len(rows[0]) < 3:
        raise KernelFileError("kernel file needs at least a 2x2 value grid")
    def number(token: str, where: str) -> float:
        try:
            return float(token)
        except ValueError:
            raise KernelFileError(f"cannot parse number {token!r} at {where}") from None
    xi_grid = [number(tok, f"row 1, column {j + 2}") for j, tok in enumerate(rows[0][1:])]
    x_grid = []
    values = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(xi_grid) + 1:
            raise KernelFileError(
                f"row {i} has {len(row)} cells, expected {len(xi_grid) + 1}"
            )
        x_grid.append(number(row[0], f"row {i}, column 1"))
        values.append([number(tok, f"row {i}, column {j + 2}")
                       for j, tok in enumerate(row[1:])])
    scale = p.debye
    pn = PhysicalParams(epsilon=p.epsilon / scale, debye=1.0,
                        u0=p.u0, u1=p.u1, u2=p.u2)
    return tabulated_kernel(np.asarray(x_grid) / scale, np.asarray(xi_grid) / scale,
                            values, pn)
