"""Cell-list spatial search over a hypercube domain.

The domain is split into ``cells_per_dim[k] = max(1, floor(L[k] / w))`` cells
per dimension, so the actual cell width is never smaller than the requested
width ``w``.  A search of radius ``<= w`` therefore only needs a cell and its
``3**D - 1`` neighbours.

Two index variants are available:

``SERIAL_BUCKETS``
    Particles are bucketed in index order; the particle set is untouched and
    each cell stores the indices of its particles.
``BULK_REORDERED``
    The particle set itself is permuted into cell order (a counting sort), so
    every cell is a contiguous index range.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigurationError, DomainViolationError, StaleIndexError
from .particle_set import ParticleSet

__all__ = [
    "Variant",
    "Domain",
    "CellListIndex",
    "init_neighbour_search",
    "wrap_position",
    "cell_of",
]


class Variant(enum.Enum):
    SERIAL_BUCKETS = "serial_buckets"
    BULK_REORDERED = "bulk_reordered"


@dataclass(frozen=True, eq=False)
class Domain:
    """Axis-aligned box with per-dimension periodicity and cell geometry.

    Build instances with :meth:`Domain.build`, which validates the bounds and
    derives the cell lattice.
    """

    lower: np.ndarray
    upper: np.ndarray
    periodic: np.ndarray
    requested_cell_width: float
    cells_per_dim: np.ndarray
    actual_cell_width: np.ndarray

    @classmethod
    def build(cls, lower, upper, cell_width, periodic) -> Domain:
        lower = np.atleast_1d(np.asarray(lower, dtype=np.float64))
        upper = np.atleast_1d(np.asarray(upper, dtype=np.float64))
        dim = len(lower)
        if upper.shape != (dim,):
            raise ConfigurationError("lower and upper bounds differ in dimension")
        if np.ndim(periodic) == 0:
            periodic = [periodic] * dim
        periodic = np.asarray(periodic, dtype=bool)
        if periodic.shape != (dim,):
            raise ConfigurationError("periodic flags differ in dimension from bounds")
        cell_width = float(cell_width)
        if not cell_width > 0 or not np.isfinite(cell_width):
            raise ConfigurationError(f"cell width must be positive, got {cell_width}")
        for k in range(dim):
            if not lower[k] < upper[k]:
                raise ConfigurationError(
                    f"dimension {k}: lower bound {lower[k]} is not below upper bound {upper[k]}"
                )
        lengths = upper - lower
        cells = np.maximum(1, np.floor(lengths / cell_width)).astype(np.int64)
        actual = lengths / cells
        # the floor rule can leave a width one ulp short of the request
        # (e.g. 0.3 / floor(1 / 0.1)); drop a cell in that case
        short = (actual < cell_width) & (cells > 1)
        while short.any():
            cells[short] -= 1
            actual = lengths / cells
            short = (actual < cell_width) & (cells > 1)
        assert np.all((actual >= cell_width) | (cells == 1))
        for arr in (lower, upper, periodic, cells, actual):
            arr.setflags(write=False)
        return cls(lower, upper, periodic, cell_width, cells, actual)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def ncells(self) -> int:
        return int(np.prod(self.cells_per_dim))

    def wrap(self, p) -> np.ndarray:
        """Map periodic components into ``[lower, upper)``.

        Works on a single point or an ``(N, D)`` array.  Non-periodic
        components must already lie in ``[lower, upper]``.
        """
        p = np.array(p, dtype=np.float64)
        single = p.ndim == 1
        pts = p.reshape(-1, self.dim)
        for k in range(self.dim):
            col = pts[:, k]
            if self.periodic[k]:
                length = self.upper[k] - self.lower[k]
                col[:] = self.lower[k] + np.mod(col - self.lower[k], length)
                # mod of a tiny negative offset rounds up to the full length
                col[col >= self.upper[k]] = self.lower[k]
            else:
                bad = (col < self.lower[k]) | (col > self.upper[k]) | ~np.isfinite(col)
                if bad.any():
                    value = col[bad][0]
                    raise DomainViolationError(
                        f"dimension {k}: position {value} outside non-periodic bounds "
                        f"[{self.lower[k]}, {self.upper[k]}]"
                    )
        return pts[0] if single else pts

    def cell_of(self, p) -> np.ndarray:
        """Integer cell coordinates of an already wrapped point."""
        p = np.asarray(p, dtype=np.float64)
        c = np.floor((p - self.lower) / self.actual_cell_width).astype(np.int64)
        return np.clip(c, 0, self.cells_per_dim - 1)

    def linear_cell(self, coords) -> int:
        linear = 0
        for k in range(self.dim):
            linear = linear * int(self.cells_per_dim[k]) + int(coords[k])
        return linear

    def adjacent_cells(self, coords) -> list[int]:
        """Sorted unique linear ids of a cell and its neighbours.

        Periodic dimensions wrap; non-periodic ones stop at the walls.  With
        fewer than three cells along a periodic axis the wrapped neighbours
        coincide and are listed once.
        """
        return kernels._pycore.adjacent_cells(coords, self.cells_per_dim, self.periodic)


def wrap_position(domain: Domain, p) -> np.ndarray:
    return domain.wrap(p)


def cell_of(domain: Domain, p) -> np.ndarray:
    return domain.cell_of(p)


class CellListIndex:
    """Cell list kept in step with a :class:`ParticleSet`.

    After :meth:`sync`, the particles of linear cell ``c`` are
    ``members[cell_start[c]:cell_start[c + 1]]``.  For the bulk-reordered
    variant ``members`` is simply ``arange`` over the alive particles.
    """

    def __init__(self, pset: ParticleSet, domain: Domain,
                 variant: Variant = Variant.BULK_REORDERED, backend=None):
        if pset.dim != domain.dim:
            raise ConfigurationError(
                f"particle set has dimension {pset.dim}, domain has {domain.dim}"
            )
        self.pset = pset
        self.domain = domain
        self.variant = Variant(variant)
        self.backend = backend
        self.generation = -1
        self.cell_start = np.zeros(domain.ncells + 1, dtype=np.int64)
        self.members = np.zeros(0, dtype=np.int64)
        self._synced_at = None

    def sync(self) -> None:
        """Rebuild the cell assignment from current positions and alive flags.

        Periodic coordinates are wrapped in place.  The bulk variant also
        permutes the particle set into cell order, which invalidates
        outstanding ParticleRefs.
        """
        pset, dom = self.pset, self.domain
        impl = kernels.get_backend(self.backend)
        if len(pset):
            pset.positions[:] = dom.wrap(pset.positions)
        alive = np.ascontiguousarray(pset.alive)
        cells = impl.assign_cells(
            np.ascontiguousarray(pset.positions), alive.view(np.uint8),
            dom.lower, dom.actual_cell_width, dom.cells_per_dim,
        )
        cell_start, members = impl.bucket_fill(cells, dom.ncells)
        if self.variant is Variant.BULK_REORDERED:
            dead = np.flatnonzero(cells < 0)
            order = np.concatenate([members, dead])
            if not np.array_equal(order, np.arange(len(order))):
                pset.permute(order)
            members = np.arange(len(members), dtype=np.int64)
        self.cell_start = cell_start
        self.members = members
        self.generation += 1
        self._synced_at = (pset.structure_version, pset.position_version)

    @property
    def is_synced(self) -> bool:
        return self._synced_at == (self.pset.structure_version, self.pset.position_version)

    def check_synced(self) -> None:
        if not self.is_synced:
            raise StaleIndexError("particle set changed since the last sync")

    def cell_members(self, linear: int) -> np.ndarray:
        return self.members[self.cell_start[linear]:self.cell_start[linear + 1]]

    def cell_mapping(self) -> dict[int, list[int]]:
        """Map of linear cell id to the ids (not indices) of its particles."""
        ids = self.pset.ids
        out = {}
        for c in range(self.domain.ncells):
            m = self.cell_members(c)
            if len(m):
                out[c] = sorted(ids[m].tolist())
        return out

    def __repr__(self):
        cells = "x".join(str(c) for c in self.domain.cells_per_dim)
        return f"CellListIndex({self.variant.value}, cells={cells}, generation={self.generation})"


def init_neighbour_search(pset: ParticleSet, lower, upper, cell_width, periodic,
                          variant: Variant = Variant.BULK_REORDERED,
                          backend=None) -> CellListIndex:
    """Embed ``pset`` in a domain and build its cell list.

    The index is attached to the set as ``pset.search_index`` so that
    position-writing updates can re-sync it.

    Raises
    ------
    ConfigurationError
        Non-positive cell width or inverted bounds.
    DomainViolationError
        A position lies outside a non-periodic dimension.
    """
    domain = Domain.build(lower, upper, cell_width, periodic)
    index = CellListIndex(pset, domain, variant, backend=backend)
    index.sync()
    pset.search_index = index
    return index
