"""Uniform torus grids, cube families and exact averaging.

A grid samples the torus ``[0, 1)^n`` (``n`` in ``{1, 2}``) at ``x_i = i/N``
with half-open cells of side ``1/N``.  Cubes are index boxes that never wrap
around the period.  A :class:`CubeFamily` plays the role of the basis over
which every supremum in this package is taken, so every constant reported
downstream is *family-relative*: exact as a discrete statement, and only a
lower bound for the corresponding continuum constant.

Averages are read off compensated (double-double) prefix tables, which keeps
``O(1)`` queries accurate even when a cube's sum is tiny compared to the
running prefix sum.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

MAX_2D_POINTS = 256
MAX_ALL_RECTANGLES_POINTS = 64


class GridError(ValueError):
    """Invalid grid, cube or grid-function input."""


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform grid with ``n_points`` cells per axis on the unit torus."""

    dim: int
    n_points: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if not _is_power_of_two(int(self.n_points)):
            raise GridError(f"n_points must be a power of two >= 2, got {self.n_points}")
        if self.dim == 2 and self.n_points > MAX_2D_POINTS:
            raise GridError(f"2D grids are capped at {MAX_2D_POINTS} points per axis")

    @property
    def spacing(self) -> float:
        return 1.0 / self.n_points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def size(self) -> int:
        return self.n_points**self.dim

    @property
    def levels(self) -> int:
        """Number of dyadic refinements, ``log2(n_points)``."""
        return int(self.n_points).bit_length() - 1

    def coordinates(self) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n_points) / self.n_points
        if self.dim == 1:
            return x
        return np.meshgrid(x, x, indexing="ij")


@dataclass(frozen=True)
class Cube:
    """Index box: ``start[a] <= i_a < start[a] + length[a]`` on each axis."""

    start: tuple[int, ...]
    length: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.start)

    @property
    def cells(self) -> int:
        return int(np.prod(self.length))

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(s, s + n) for s, n in zip(self.start, self.length))

    def validate(self, grid: Grid) -> None:
        if self.dim != grid.dim or len(self.length) != grid.dim:
            raise GridError(f"cube {self} does not match a {grid.dim}D grid")
        for s, n in zip(self.start, self.length):
            if not (1 <= n <= grid.n_points and 0 <= s and s + n <= grid.n_points):
                raise GridError(f"cube {self} lies outside the grid of size {grid.n_points}")

    def to_dict(self) -> dict:
        return {"start": list(self.start), "length": list(self.length)}

    @classmethod
    def interval(cls, start: int, length: int) -> "Cube":
        return cls((int(start),), (int(length),))


class Family(str, enum.Enum):
    ALL_INTERVALS = "all_intervals"
    DYADIC_INTERVALS = "dyadic_intervals"
    DYADIC_SQUARES = "dyadic_squares"
    DYADIC_RECTANGLES = "dyadic_rectangles"
    ALL_RECTANGLES = "all_rectangles"


_FAMILY_DIMS = {
    Family.ALL_INTERVALS: 1,
    Family.DYADIC_INTERVALS: 1,
    Family.DYADIC_SQUARES: 2,
    Family.DYADIC_RECTANGLES: 2,
    Family.ALL_RECTANGLES: 2,
}


def _dyadic_lengths(n: int) -> list[int]:
    # coarse to fine
    out, length = [], n
    while length >= 1:
        out.append(length)
        length //= 2
    return out


@dataclass(frozen=True)
class CubeFamily:
    """A finite, deterministically ordered basis of cubes on a grid.

    Enumeration order: all-interval families go by length then start; dyadic
    families go coarse to fine, then by start (row-major for 2D).
    """

    variant: Family
    grid: Grid

    def __post_init__(self):
        object.__setattr__(self, "variant", Family(self.variant))
        if _FAMILY_DIMS[self.variant] != self.grid.dim:
            raise GridError(f"family {self.variant.value} needs a {_FAMILY_DIMS[self.variant]}D grid")
        if self.variant is Family.ALL_RECTANGLES and self.grid.n_points > MAX_ALL_RECTANGLES_POINTS:
            raise GridError(f"all_rectangles is limited to N <= {MAX_ALL_RECTANGLES_POINTS}")

    @property
    def name(self) -> str:
        return self.variant.value

    def blocks(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        """Groups of equally-shaped cubes as ``(length, starts)`` pairs.

        ``starts`` has shape ``(count, dim)``.  Concatenating the groups in
        order gives the enumeration order of the family.
        """
        return _family_blocks(self.variant, self.grid.n_points)

    @functools.cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(starts, lengths)`` integer arrays of shape ``(len(family), dim)``."""
        starts, lengths = [], []
        for length, st in self.blocks():
            starts.append(st)
            lengths.append(np.broadcast_to(np.asarray(length), st.shape))
        return np.concatenate(starts), np.concatenate(lengths)

    def __len__(self) -> int:
        return sum(len(st) for _, st in self.blocks())

    def __iter__(self) -> Iterator[Cube]:
        for length, st in self.blocks():
            for row in st:
                yield Cube(tuple(int(v) for v in row), tuple(length))

    def cube(self, index: int) -> Cube:
        starts, lengths = self.arrays
        return Cube(tuple(int(v) for v in starts[index]), tuple(int(v) for v in lengths[index]))

    def to_dict(self) -> dict:
        return {"variant": self.name, "dim": self.grid.dim, "n_points": self.grid.n_points}


@functools.lru_cache(maxsize=64)
def _family_blocks(variant: Family, n: int) -> list[tuple[tuple[int, ...], np.ndarray]]:
    out = []
    if variant is Family.ALL_INTERVALS:
        for length in range(1, n + 1):
            out.append(((length,), np.arange(n - length + 1)[:, None]))
    elif variant is Family.DYADIC_INTERVALS:
        for length in _dyadic_lengths(n):
            out.append(((length,), np.arange(0, n, length)[:, None]))
    elif variant is Family.DYADIC_SQUARES:
        for length in _dyadic_lengths(n):
            s = np.arange(0, n, length)
            sx, sy = np.meshgrid(s, s, indexing="ij")
            out.append(((length, length), np.stack([sx.ravel(), sy.ravel()], axis=1)))
    elif variant is Family.DYADIC_RECTANGLES:
        for lx in _dyadic_lengths(n):
            for ly in _dyadic_lengths(n):
                sx, sy = np.meshgrid(np.arange(0, n, lx), np.arange(0, n, ly), indexing="ij")
                out.append(((lx, ly), np.stack([sx.ravel(), sy.ravel()], axis=1)))
    elif variant is Family.ALL_RECTANGLES:
        for lx in range(1, n + 1):
            for ly in range(1, n + 1):
                sx, sy = np.meshgrid(np.arange(n - lx + 1), np.arange(n - ly + 1), indexing="ij")
                out.append(((lx, ly), np.stack([sx.ravel(), sy.ravel()], axis=1)))
    for _, st in out:
        st.setflags(write=False)
    return out


def family(name: str | Family, grid: Grid) -> CubeFamily:
    return CubeFamily(Family(name), grid)


def enumerate_family(fam: CubeFamily) -> list[Cube]:
    """All cubes of ``fam`` in its deterministic order."""
    return list(fam)


# --- compensated prefix tables --------------------------------------------


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _compensated_cumsum(x: np.ndarray, axis: int, lo: np.ndarray | None = None):
    """Double-double running sum along ``axis`` with a leading zero slot.

    ``lo`` optionally carries low-order parts of ``x`` itself.
    """
    x = np.moveaxis(np.asarray(x, dtype=float), axis, 0)
    lo_in = None if lo is None else np.moveaxis(lo, axis, 0)
    hi_out = np.zeros((x.shape[0] + 1,) + x.shape[1:])
    lo_out = np.zeros_like(hi_out)
    hi = np.zeros(x.shape[1:])
    err = np.zeros(x.shape[1:])
    for i in range(x.shape[0]):
        hi, e = _two_sum(hi, x[i])
        err = err + e
        if lo_in is not None:
            err = err + lo_in[i]
        hi_out[i + 1] = hi
        lo_out[i + 1] = err
    return np.moveaxis(hi_out, 0, axis), np.moveaxis(lo_out, 0, axis)


_REPAIR_RTOL = 1e-16


class PrefixTable:
    """Compensated prefix sums (1D) or summed-area table (2D) of an array."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise GridError("prefix tables are built from real arrays")
        self.dim = values.ndim
        hi, lo = _compensated_cumsum(values, 0)
        if self.dim == 2:
            hi2, lo2 = _compensated_cumsum(hi, 1, lo=lo)
            hi, lo = hi2, lo2
        self.hi, self.lo = hi, lo
        self.values = values
        self.nonnegative = bool(values.size) and float(values.min()) >= 0.0

    def box_sums(self, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        """Sums over boxes; ``starts``/``lengths`` have shape ``(K, dim)``."""
        starts = np.asarray(starts)
        ends = starts + np.asarray(lengths)
        if self.dim == 1:
            a, b = starts[:, 0], ends[:, 0]
            s, e = _two_sum(self.hi[b], -self.hi[a])
            out = s + (e + (self.lo[b] - self.lo[a]))
            return self._repair(out, self.hi[b], starts, ends)
        x0, y0, x1, y1 = starts[:, 0], starts[:, 1], ends[:, 0], ends[:, 1]
        terms = [
            (self.hi[x1, y1], self.lo[x1, y1]),
            (-self.hi[x0, y1], -self.lo[x0, y1]),
            (-self.hi[x1, y0], -self.lo[x1, y0]),
            (self.hi[x0, y0], self.lo[x0, y0]),
        ]
        s = np.zeros(len(starts))
        err = np.zeros(len(starts))
        for h, l in terms:
            s, e = _two_sum(s, h)
            err = err + e + l
        return self._repair(s + err, self.hi[x1, y1], starts, ends)

    def _repair(self, out: np.ndarray, scale: np.ndarray, starts: np.ndarray, ends: np.ndarray) -> np.ndarray:
        # Prefix differences lose relative accuracy when a box holds far less
        # mass than the prefix before it.  For nonnegative data, redo those
        # boxes with fresh cumulative sums from their start corner.
        if not self.nonnegative:
            return out
        bad = np.flatnonzero(out <= _REPAIR_RTOL * np.abs(scale))
        if bad.size == 0:
            return out
        out = out.copy()
        corners = starts[bad]
        for corner in np.unique(corners, axis=0):
            rows = bad[np.all(corners == corner, axis=1)]
            local = self.values[tuple(slice(c, None) for c in corner)]
            for ax in range(self.dim):
                local = np.cumsum(local, axis=ax)
            idx = tuple((ends[rows, ax] - corner[ax] - 1) for ax in range(self.dim))
            out[rows] = local[idx]
        return out


# --- grid functions ---------------------------------------------------------


class GridFn:
    """Real or complex values on the cells of a grid (immutable)."""

    def __init__(self, grid: Grid, values):
        values = np.array(values, dtype=complex if np.iscomplexobj(values) else float)
        if values.size != grid.size:
            raise GridError(f"expected {grid.size} values, got {values.size}")
        values = values.reshape(grid.shape)
        if not np.all(np.isfinite(values)):
            raise GridError("grid function values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def from_array(cls, values) -> "GridFn":
        values = np.asarray(values)
        if values.ndim == 2 and values.shape[0] != values.shape[1]:
            raise GridError("2D grid functions must be square")
        return cls(Grid(values.ndim, values.shape[0]), values)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.grid.dim}, n_points={self.grid.n_points})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GridFn)
            and self.grid == other.grid
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    @functools.cached_property
    def prefix(self) -> PrefixTable:
        if self.is_complex:
            raise GridError("averages of complex functions: average real and imaginary parts")
        return PrefixTable(self.values)

    def averages(self, fam: CubeFamily) -> np.ndarray:
        """Average over every cube of ``fam``, in enumeration order."""
        if fam.grid != self.grid:
            raise GridError("family and function live on different grids")
        starts, lengths = fam.arrays
        return self.prefix.box_sums(starts, lengths) / np.prod(lengths, axis=1)

    # serialization ----------------------------------------------------------

    def to_json_dict(self) -> dict:
        flat = self.values.ravel()
        out = {"dim": self.grid.dim, "n_points": self.grid.n_points}
        if self.is_complex:
            out["values"] = [float(v) for v in flat.real]
            out["values_imag"] = [float(v) for v in flat.imag]
        else:
            out["values"] = [float(v) for v in flat]
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "GridFn":
        try:
            grid = Grid(int(data["dim"]), int(data["n_points"]))
            values = np.asarray(data["values"], dtype=float)
        except KeyError as exc:
            raise GridError(f"grid function JSON is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise GridError(f"malformed grid function JSON: {exc}") from None
        if "values_imag" in data:
            values = values + 1j * np.asarray(data["values_imag"], dtype=float)
        return cls(grid, values)


def save_json(f: GridFn, path: str | Path) -> None:
    Path(path).write_text(json.dumps(f.to_json_dict()))


def load_json(path: str | Path) -> GridFn:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise GridError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return GridFn.from_json_dict(data)


def save_csv(f: GridFn, path: str | Path) -> None:
    """One value per line; 1D real functions only."""
    if f.grid.dim != 1 or f.is_complex:
        raise GridError("CSV serialization is defined for real 1D functions")
    buf = io.StringIO()
    for v in f.values:
        buf.write(repr(float(v)) + "\n")
    Path(path).write_text(buf.getvalue())


def load_csv(path: str | Path) -> GridFn:
    values = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise GridError(f"{path}: line {lineno}: not a number: {row[0]!r}") from None
    return GridFn(Grid(1, len(values)), values)


def average(f: GridFn, cube: Cube) -> float:
    """Average of ``f`` over ``cube`` from the compensated prefix table."""
    cube.validate(f.grid)
    sums = f.prefix.box_sums(np.array([cube.start]), np.array([cube.length]))
    return float(sums[0] / cube.cells)


def cube_windows(values: np.ndarray, length: Sequence[int], starts: np.ndarray) -> np.ndarray:
    """Cell values of equally-shaped cubes as a ``(count, cells)`` matrix."""
    values = np.asarray(values)
    if values.ndim == 1:
        (lx,) = length
        win = np.lib.stride_tricks.sliding_window_view(values, lx)
        return win[starts[:, 0]]
    lx, ly = length
    win = np.lib.stride_tricks.sliding_window_view(values, (lx, ly))
    return win[starts[:, 0], starts[:, 1]].reshape(len(starts), lx * ly)
