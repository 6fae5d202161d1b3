"""Truncated positive q-lattice and weighted Jackson quadrature.

Grid points are x_n = q^n for n_lo <= n <= n_hi, stored by exponent so no
floating drift can creep into the lattice itself.  All functions are even;
only the positive half-lattice is stored.  The weighted Jackson integral

    int f(x) x^{2v+1} d_q x  =  (1-q) sum_n q^{n(2v+2)} f(q^n)

is the measure underneath every norm and inner product in the package.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, OffGrid, ParseError
from .qseries import QParams

__all__ = [
    "LatticeGrid",
    "GridFn",
    "jackson_integral",
    "inner",
    "norm_p",
    "sup_norm",
    "delta_fn",
    "save_csv",
    "load_csv",
]


@dataclass(frozen=True)
class LatticeGrid:
    """Exponent range [n_lo, n_hi] of the truncated lattice {q^n}."""

    params: QParams
    n_lo: int
    n_hi: int

    def __post_init__(self) -> None:
        if not (self.n_lo < 0 < self.n_hi):
            raise ValueError(
                f"grid must straddle x = 1: need n_lo < 0 < n_hi, got "
                f"[{self.n_lo}, {self.n_hi}]"
            )
        if self.size < 8:
            raise ValueError(f"grid needs at least 8 points, got {self.size}")

    @property
    def size(self) -> int:
        return self.n_hi - self.n_lo + 1

    @property
    def exponents(self) -> np.ndarray:
        return np.arange(self.n_lo, self.n_hi + 1)

    def x(self, n: int) -> float:
        """Lattice point q^n (recomputed, never stored)."""
        return self.params.q ** n

    def points(self) -> np.ndarray:
        return np.asarray([self.x(int(n)) for n in self.exponents])

    def index(self, n: int) -> int:
        """Vector index of exponent n."""
        if not (self.n_lo <= n <= self.n_hi):
            raise OffGrid(f"exponent {n} outside grid [{self.n_lo}, {self.n_hi}]")
        return n - self.n_lo

    def weights(self) -> np.ndarray:
        """Jackson weights (1-q) q^{n(2v+2)} for the x^{2v+1} d_q x measure."""
        q, v = self.params.q, self.params.v
        n = self.exponents.astype(float)
        return (1.0 - q) * np.power(q, n * (2.0 * v + 2.0))


@dataclass
class GridFn:
    """An even real function sampled on a LatticeGrid (positive half only)."""

    grid: LatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.size,):
            raise GridMismatch(
                f"value vector of length {self.values.shape} does not match "
                f"grid of size {self.grid.size}"
            )

    def __getitem__(self, n: int) -> float:
        """Value at the lattice point q^n."""
        return float(self.values[self.grid.index(n)])

    def copy(self) -> "GridFn":
        return GridFn(self.grid, self.values.copy())

    def support_exponents(self) -> np.ndarray:
        """Exponents where the function is nonzero."""
        return self.grid.exponents[self.values != 0.0]


def _same_grid(f: GridFn, g: GridFn) -> None:
    if f.grid != g.grid:
        raise GridMismatch("grid functions live on different lattices")


def jackson_integral(f: GridFn) -> float:
    """Weighted Jackson integral of f against x^{2v+1} d_q x."""
    return float(f.grid.weights() @ f.values)


def inner(f: GridFn, g: GridFn) -> float:
    """L^2 inner product <f, g> = int f g x^{2v+1} d_q x."""
    _same_grid(f, g)
    return float(f.grid.weights() @ (f.values * g.values))


def norm_p(f: GridFn, p: float) -> float:
    """L^p norm with the x^{2v+1} d_q x weight, p >= 1."""
    if p < 1.0:
        raise ValueError(f"p must be >= 1, got {p}")
    return float(f.grid.weights() @ np.abs(f.values) ** p) ** (1.0 / p)


def norm2(f: GridFn) -> float:
    return norm_p(f, 2.0)


def sup_norm(f: GridFn) -> float:
    """Uniform norm over the stored lattice points."""
    return float(np.max(np.abs(f.values))) if f.grid.size else 0.0


def delta_fn(grid: LatticeGrid, x_exp: int) -> GridFn:
    """Reproducing delta at x = q^{x_exp}: value 1/((1-q) x^{2(v+1)}) at x.

    Integrating delta against any even f reproduces f(x) exactly (the single
    surviving term of the Jackson sum).
    """
    idx = grid.index(x_exp)  # raises OffGrid outside the grid
    q, v = grid.params.q, grid.params.v
    vals = np.zeros(grid.size)
    vals[idx] = 1.0 / ((1.0 - q) * q ** (x_exp * 2.0 * (v + 1.0)))
    return GridFn(grid, vals)


def save_csv(f: GridFn, path) -> None:
    """Write a grid function as CSV rows ``n, x, value`` (17 significant digits)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "x", "value"])
        for n, val in zip(f.grid.exponents, f.values):
            writer.writerow([int(n), f"{f.grid.x(int(n)):.17g}", f"{val:.17g}"])


def load_csv(path, grid: LatticeGrid) -> GridFn:
    """Read a grid function written by :func:`save_csv` onto ``grid``.

    The x column must match q^n to 1e-12 relative; exponents must cover the
    grid exactly.
    """
    rows: list[tuple[int, float, float]] = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ParseError(f"{path}: empty file")
            if [h.strip().lower() for h in header[:3]] != ["n", "x", "value"]:
                raise ParseError(f"{path}: expected header 'n, x, value', got {header}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append((int(row[0]), float(row[1]), float(row[2])))
                except (ValueError, IndexError) as exc:
                    raise ParseError(f"{path}:{lineno}: malformed row {row}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")

    by_exp = {n: (x, val) for n, x, val in rows}
    if sorted(by_exp) != list(range(grid.n_lo, grid.n_hi + 1)):
        raise GridMismatch(
            f"{path}: exponents {sorted(by_exp)[:3]}..{sorted(by_exp)[-3:]} do not "
            f"cover grid [{grid.n_lo}, {grid.n_hi}]"
        )
    vals = np.empty(grid.size)
    for n, (x, val) in by_exp.items():
        x_ref = grid.x(n)
        if not math.isclose(x, x_ref, rel_tol=1e-12, abs_tol=0.0):
            raise GridMismatch(
                f"{path}: x column at n={n} is {x!r}, expected q^n = {x_ref!r}"
            )
        vals[grid.index(n)] = val
    return GridFn(grid, vals)
