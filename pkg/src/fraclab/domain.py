"""Grid and domain model.

A :class:`BoxGrid` is a uniform tensor grid of interior nodes on the open
box (-L, L)^dim with step h = 2L/(N+1); it stands in for the whole space
once L is large.  A :class:`SubDomain` marks the nodes lying strictly
inside a shape (interval, square, L-shape, disk, or a custom mask), and a
:class:`GridFunction` carries nodal values on the full grid.  Functions
"supported in Omega" vanish on every node outside the mask; zero-extension
and restriction convert between the two representations.

Dilation alpha*Omega keeps the step h fixed and enlarges the shape (and,
when needed, the surrounding box), so discrete operators on Omega and on
alpha*Omega act on the same lattice and can be compared node by node.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoxGrid",
    "SubDomain",
    "GridFunction",
    "make_box",
    "make_shape",
    "parse_shape_spec",
    "extend_by_zero",
    "restrict",
    "dilate",
    "random_connected_mask",
    "random_nested_masks",
]

_ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class BoxGrid:
    """Uniform grid of N^dim interior nodes on the box (-L, L)^dim."""

    dim: int
    halfwidth: float
    nodes_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.halfwidth > 0 and np.isfinite(self.halfwidth)):
            raise ValueError(f"halfwidth must be positive, got {self.halfwidth}")
        if self.nodes_per_axis < 1:
            raise ValueError(f"nodes_per_axis must be >= 1, got {self.nodes_per_axis}")

    @property
    def h(self) -> float:
        return 2.0 * self.halfwidth / (self.nodes_per_axis + 1)

    @property
    def size(self) -> int:
        return self.nodes_per_axis**self.dim

    def axis_nodes(self) -> np.ndarray:
        """Interior node coordinates along one axis, strictly inside (-L, L)."""
        n = self.nodes_per_axis
        return -self.halfwidth + np.arange(1, n + 1) * self.h

    def node_coords(self) -> np.ndarray:
        """Coordinates of all nodes, shape (size, dim), row-major in 2D."""
        x = self.axis_nodes()
        if self.dim == 1:
            return x[:, None]
        xx, yy = np.meshgrid(x, x, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def embed_offset(self, other: "BoxGrid") -> int:
        """Per-axis index offset of this grid's nodes inside ``other``.

        Requires equal dim and step and that ``other`` covers this box with
        lattice-aligned nodes; raises ValueError otherwise.
        """
        if other.dim != self.dim:
            raise ValueError("grids have different dimensions")
        if abs(other.h - self.h) > _ALIGN_TOL * self.h:
            raise ValueError(f"grid steps differ: {self.h} vs {other.h}")
        shift = (other.halfwidth - self.halfwidth) / self.h
        if shift < -_ALIGN_TOL:
            raise ValueError("target grid does not cover this grid")
        k = int(round(shift))
        if abs(shift - k) > _ALIGN_TOL:
            raise ValueError("grid lattices are not aligned (halfwidth gap is not a multiple of h)")
        return k

    def embed_indices(self, other: "BoxGrid") -> np.ndarray:
        """Flat indices of this grid's nodes within ``other``'s node array."""
        k = self.embed_offset(other)
        n = self.nodes_per_axis
        axis = np.arange(n) + k
        if self.dim == 1:
            return axis
        return (axis[:, None] * other.nodes_per_axis + axis[None, :]).ravel()


@dataclass(frozen=True)
class SubDomain:
    """Node mask identifying a domain Omega inside a box grid."""

    grid: BoxGrid
    mask: np.ndarray
    shape: str = "custom"
    params: tuple = ()

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.grid.size,):
            raise ValueError(f"mask has shape {mask.shape}, expected ({self.grid.size},)")
        if not mask.any():
            raise ValueError("empty mask: no grid node falls inside the shape")
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    @property
    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def node_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def coords(self) -> np.ndarray:
        return self.grid.node_coords()[self.mask]

    def is_full_box(self) -> bool:
        return bool(self.mask.all())

    def on_grid(self, other: BoxGrid) -> "SubDomain":
        """Transplant the mask onto an aligned covering grid."""
        idx = self.grid.embed_indices(other)
        mask = np.zeros(other.size, dtype=bool)
        mask[idx[self.mask]] = True
        return SubDomain(grid=other, mask=mask, shape=self.shape, params=self.params)


@dataclass(frozen=True)
class GridFunction:
    """Real nodal values on the full grid."""

    grid: BoxGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"values have shape {v.shape}, expected ({self.grid.size},)")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def supported_in(self, domain: SubDomain) -> bool:
        """True if the function vanishes on every node outside the mask."""
        if domain.grid != self.grid:
            raise ValueError("grid mismatch between function and domain")
        return not np.any(self.values[~domain.mask])


def make_box(dim: int, halfwidth: float, nodes_per_axis: int) -> BoxGrid:
    """Uniform box grid with step h = 2*halfwidth/(nodes_per_axis + 1)."""
    return BoxGrid(dim=dim, halfwidth=float(halfwidth), nodes_per_axis=int(nodes_per_axis))


# Shape registry: membership tests use strict interior (open shapes), matching
# homogeneous Dirichlet exterior values; each entry also knows its extent
# (max |coordinate|) and how its parameters scale under dilation.

def _interval_inside(coords, a, b):
    x = coords[:, 0]
    return (x > a) & (x < b)


def _square_inside(coords, side):
    return np.max(np.abs(coords), axis=1) < side / 2.0


def _lshape_inside(coords, side):
    inside = np.max(np.abs(coords), axis=1) < side / 2.0
    notch = (coords[:, 0] >= 0.0) & (coords[:, 1] <= 0.0)
    return inside & ~notch


def _disk_inside(coords, r):
    return np.hypot(coords[:, 0], coords[:, 1]) < r


_SHAPES = {
    "interval": dict(dim=1, nparams=2, inside=_interval_inside,
                     extent=lambda a, b: max(abs(a), abs(b)),
                     scale=lambda alpha, a, b: (alpha * a, alpha * b)),
    "square": dict(dim=2, nparams=1, inside=_square_inside,
                   extent=lambda side: side / 2.0,
                   scale=lambda alpha, side: (alpha * side,)),
    "lshape": dict(dim=2, nparams=1, inside=_lshape_inside,
                   extent=lambda side: side / 2.0,
                   scale=lambda alpha, side: (alpha * side,)),
    "disk": dict(dim=2, nparams=1, inside=_disk_inside,
                 extent=lambda r: r,
                 scale=lambda alpha, r: (alpha * r,)),
}


def parse_shape_spec(spec: str) -> tuple[str, tuple[float, ...]]:
    """Parse a CLI shape string like ``interval:-0.5,0.5`` or ``disk:0.3``."""
    name, sep, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in _SHAPES:
        raise ValueError(f"unknown shape {name!r}; expected one of {sorted(_SHAPES)}")
    if not sep or not rest.strip():
        raise ValueError(f"shape {name!r} needs {_SHAPES[name]['nparams']} parameter(s)")
    try:
        params = tuple(float(tok) for tok in rest.split(","))
    except ValueError as exc:
        raise ValueError(f"bad shape parameters in {spec!r}: {exc}") from exc
    if len(params) != _SHAPES[name]["nparams"]:
        raise ValueError(f"shape {name!r} needs {_SHAPES[name]['nparams']} parameter(s), got {len(params)}")
    return name, params


def _check_connected(grid: BoxGrid, mask: np.ndarray) -> None:
    """Warn (not raise) if the mask is disconnected as a grid graph."""
    idx = np.flatnonzero(mask)
    n = grid.nodes_per_axis
    members = set(int(i) for i in idx)
    seen = {int(idx[0])}
    queue = deque([int(idx[0])])
    while queue:
        f = queue.popleft()
        if grid.dim == 1:
            neighbors = (f - 1, f + 1)
        else:
            i, j = divmod(f, n)
            neighbors = []
            if i > 0:
                neighbors.append(f - n)
            if i < n - 1:
                neighbors.append(f + n)
            if j > 0:
                neighbors.append(f - 1)
            if j < n - 1:
                neighbors.append(f + 1)
        for g in neighbors:
            if g in members and g not in seen:
                seen.add(g)
                queue.append(g)
    if len(seen) != len(members):
        warnings.warn("subdomain mask is not connected as a grid graph", stacklevel=3)


def make_shape(grid: BoxGrid, shape: str, params: tuple[float, ...]) -> SubDomain:
    """Mask of the grid nodes lying strictly inside the given open shape.

    The shape must not exceed the box; callers should keep a margin of at
    least h for the ambient-box comparisons to make sense.  ``shape='custom'``
    takes a boolean mask of length grid.size as its single parameter.
    """
    if shape == "custom":
        (mask,) = params if isinstance(params, tuple) and len(params) == 1 else (params,)
        sd = SubDomain(grid=grid, mask=np.asarray(mask, dtype=bool), shape="custom", params=())
        _check_connected(grid, sd.mask)
        return sd
    if shape not in _SHAPES:
        raise ValueError(f"unknown shape {shape!r}; expected one of {sorted(_SHAPES)} or 'custom'")
    info = _SHAPES[shape]
    if info["dim"] != grid.dim:
        raise ValueError(f"shape {shape!r} is {info['dim']}-dimensional, grid is {grid.dim}-dimensional")
    if len(params) != info["nparams"]:
        raise ValueError(f"shape {shape!r} needs {info['nparams']} parameter(s), got {len(params)}")
    extent = info["extent"](*params)
    if extent <= 0:
        raise ValueError(f"degenerate shape {shape!r} with parameters {params}")
    # hard limit: the shape may not leak out of the box; staying a full step h
    # away from the boundary is the caller's (soft) obligation
    if extent > grid.halfwidth * (1.0 + _ALIGN_TOL):
        raise ValueError(f"shape extent {extent:g} exceeds the box halfwidth {grid.halfwidth:g}")
    inside = info["inside"](grid.node_coords(), *params)
    sd = SubDomain(grid=grid, mask=inside, shape=shape, params=tuple(float(p) for p in params))
    _check_connected(grid, sd.mask)
    return sd


def extend_by_zero(u: np.ndarray, domain: SubDomain) -> GridFunction:
    """Zero-extension of values on Omega's nodes to the full grid."""
    vals = np.asarray(u, dtype=float)
    if vals.shape != (domain.node_count,):
        raise ValueError(f"expected {domain.node_count} values on the mask, got shape {vals.shape}")
    full = np.zeros(domain.grid.size)
    full[domain.mask] = vals
    return GridFunction(grid=domain.grid, values=full)


def restrict(v: GridFunction, domain: SubDomain) -> np.ndarray:
    """Values of a grid function on Omega's nodes (inverse of extend_by_zero)."""
    if v.grid != domain.grid:
        raise ValueError("grid mismatch between function and domain")
    return v.values[domain.mask].copy()


def dilate(domain: SubDomain, alpha: float, max_halfwidth: float | None = None) -> SubDomain:
    """The dilated domain alpha*Omega = {alpha x : x in Omega} on the same lattice.

    The grid step h is kept fixed; if the dilated shape no longer fits in the
    current box, the box is enlarged by whole multiples of h (so node
    coordinates of the old grid persist).  ``max_halfwidth`` caps the
    enlargement; exceeding it raises.
    """
    if alpha < 1.0:
        raise ValueError(f"dilation factor must be >= 1, got {alpha}")
    grid = domain.grid
    h = grid.h
    if domain.shape in _SHAPES:
        info = _SHAPES[domain.shape]
        new_params = info["scale"](alpha, *domain.params)
        extent = info["extent"](*new_params)
    else:
        # Custom masks: a point belongs to alpha*Omega when x/alpha falls in
        # the open h-cell of a masked node.
        new_params = None
        extent = float(np.max(np.abs(domain.coords()))) * alpha + h / 2.0
    target = grid
    if extent > grid.halfwidth - h:
        needed = extent + 2.0 * h
        steps = int(np.ceil((needed - grid.halfwidth) / h))
        new_halfwidth = grid.halfwidth + steps * h
        if max_halfwidth is not None and new_halfwidth > max_halfwidth + _ALIGN_TOL:
            raise ValueError(
                f"dilated shape needs box halfwidth {new_halfwidth:g}, "
                f"exceeding the configured maximum {max_halfwidth:g}"
            )
        target = BoxGrid(dim=grid.dim, halfwidth=new_halfwidth,
                         nodes_per_axis=grid.nodes_per_axis + 2 * steps)
    if domain.shape in _SHAPES:
        return make_shape(target, domain.shape, new_params)
    coords = target.node_coords() / alpha
    src = domain.coords()
    mask = np.zeros(target.size, dtype=bool)
    # nearest-node lookup per scaled coordinate
    axis = grid.axis_nodes()
    near = np.round((coords + grid.halfwidth) / h).astype(int) - 1
    ok = np.all((near >= 0) & (near < grid.nodes_per_axis), axis=1)
    cheb = np.full(coords.shape[0], np.inf)
    cheb[ok] = np.max(np.abs(coords[ok] - axis[near[ok]]), axis=1)
    if grid.dim == 1:
        flat = near[:, 0]
    else:
        flat = near[:, 0] * grid.nodes_per_axis + near[:, 1]
    inside = ok & (cheb < h / 2.0)
    inside[inside] &= domain.mask[flat[inside]]
    mask[inside] = True
    return SubDomain(grid=target, mask=mask, shape="custom", params=())


def random_connected_mask(grid: BoxGrid, size: int, rng: np.random.Generator) -> SubDomain:
    """Random connected mask of the requested node count, grown by BFS."""
    if not 1 <= size <= grid.size:
        raise ValueError(f"mask size {size} out of range [1, {grid.size}]")
    n = grid.nodes_per_axis
    mask = np.zeros(grid.size, dtype=bool)
    start = int(rng.integers(grid.size))
    mask[start] = True
    cells = [start]
    attempts = 0
    while np.count_nonzero(mask) < size and attempts < 100 * size:
        attempts += 1
        f = cells[int(rng.integers(len(cells)))]
        if grid.dim == 1:
            options = [f - 1, f + 1]
            valid = [g for g in options if 0 <= g < n]
        else:
            i, j = divmod(f, n)
            valid = []
            if i > 0:
                valid.append(f - n)
            if i < n - 1:
                valid.append(f + n)
            if j > 0:
                valid.append(f - 1)
            if j < n - 1:
                valid.append(f + 1)
        g = valid[int(rng.integers(len(valid)))]
        if not mask[g]:
            mask[g] = True
            cells.append(g)
    return SubDomain(grid=grid, mask=mask, shape="custom", params=())


def random_nested_masks(
    grid: BoxGrid, inner_size: int, outer_size: int, rng: np.random.Generator
) -> tuple[SubDomain, SubDomain]:
    """A random connected pair Omega inside Omega' with the given node counts."""
    if inner_size > outer_size:
        raise ValueError("inner mask cannot be larger than the outer mask")
    inner = random_connected_mask(grid, inner_size, rng)
    mask = inner.mask.copy()
    n = grid.nodes_per_axis
    cells = list(np.flatnonzero(mask))
    attempts = 0
    while np.count_nonzero(mask) < outer_size and attempts < 100 * outer_size:
        attempts += 1
        f = cells[int(rng.integers(len(cells)))]
        if grid.dim == 1:
            valid = [g for g in (f - 1, f + 1) if 0 <= g < n]
        else:
            i, j = divmod(f, n)
            valid = []
            if i > 0:
                valid.append(f - n)
            if i < n - 1:
                valid.append(f + n)
            if j > 0:
                valid.append(f - 1)
            if j < n - 1:
                valid.append(f + 1)
        g = valid[int(rng.integers(len(valid)))]
        if not mask[g]:
            mask[g] = True
            cells.append(g)
    outer = SubDomain(grid=grid, mask=mask, shape="custom", params=())
    return inner, outer
