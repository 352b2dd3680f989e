"""Box and radius searches on a synced :class:`CellListIndex`.

Queries visit the query point's cell and its adjacent cells in ascending
linear cell order, and within each cell in storage order.  Hits are
streamed as :class:`NeighborHit` tuples carrying the minimum-image
displacement from the query point to the neighbour.
"""
from __future__ import annotations

from typing import Iterator, NamedTuple

import numpy as np

from ._pycore import min_image
from .errors import SearchRadiusError
from .particle_set import ParticleSet
from .spatial_index import CellListIndex, Domain

__all__ = ["NeighborHit", "min_image_dx", "box_search", "radius_search"]


class NeighborHit(NamedTuple):
    index: int
    dx: np.ndarray


def min_image_dx(domain: Domain, r_from, r_to) -> np.ndarray:
    """Shortest displacement ``r_to - r_from`` under the domain's periodicity.

    For periodic dimensions the result lies in ``(-L/2, L/2]``; an exact
    tie at half the box length resolves to ``+L/2``.  Broadcasts over
    leading axes.
    """
    dx = np.asarray(r_to, dtype=np.float64) - np.asarray(r_from, dtype=np.float64)
    return min_image(dx, domain.lengths, domain.periodic)


def _check_radius(index: CellListIndex, radius: float, what: str):
    w = index.domain.requested_cell_width
    if not radius <= w:
        raise SearchRadiusError(
            f"{what} {radius} exceeds the cell width {w}; adjacent-cell search would miss neighbours"
        )


def _candidate_blocks(index: CellListIndex, pset: ParticleSet, q):
    """Yield (indices, displacements) per adjacent cell of the query point."""
    index.check_synced()
    dom = index.domain
    q = dom.wrap(q)
    pos = pset.positions
    alive = pset.alive
    for c in dom.adjacent_cells(dom.cell_of(q)):
        m = index.cell_members(c)
        if len(m) == 0:
            continue
        m = m[alive[m]]
        yield m, min_image(pos[m] - q, dom.lengths, dom.periodic)


def box_search(index: CellListIndex, pset: ParticleSet, q, half_width: float) -> Iterator[NeighborHit]:
    """All alive particles with ``|dx[k]| <= half_width`` in every dimension.

    Raises
    ------
    SearchRadiusError
        ``half_width`` larger than the requested cell width.
    """
    _check_radius(index, half_width, "half width")
    for m, dx in _candidate_blocks(index, pset, q):
        inside = np.all(np.abs(dx) <= half_width, axis=1)
        for k in np.flatnonzero(inside):
            yield NeighborHit(int(m[k]), dx[k])


def radius_search(index: CellListIndex, pset: ParticleSet, q, r: float) -> Iterator[NeighborHit]:
    """All alive particles with ``|dx| < r``, including one sitting at ``q``."""
    _check_radius(index, r, "radius")
    for m, dx in _candidate_blocks(index, pset, q):
        inside = np.sqrt(np.einsum("ij,ij->i", dx, dx)) < r
        for k in np.flatnonzero(inside):
            yield NeighborHit(int(m[k]), dx[k])
