"""Per-particle updates and neighbour accumulations.

Two update forms are provided:

* :func:`for_each_update` sets ``target[i] = expr(i)`` for every alive
  particle.
* :func:`neighbor_accumulate_update` sets
  ``target[i] = post_combine(target[i], sum_j kernel(i, j, dx_ij))`` over the
  neighbours ``j`` of ``i`` accepted by a predicate on ``dx_ij``.

Every right-hand side sees the state from before the update.  When the
target is also read by the expression (aliasing) or the update uses
neighbours, results go to a temporary buffer that is committed after all
particles are evaluated.  Updates that write positions wrap them and re-sync
the attached spatial index.
"""
from __future__ import annotations

import operator
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import kernels
from .neighbor_query import _check_radius, radius_search
from .particle_set import ParticleSet
from .spatial_index import CellListIndex

__all__ = [
    "NeighborAccumulation",
    "UpdatePlan",
    "plan",
    "for_each_update",
    "neighbor_accumulate_update",
]


@dataclass(frozen=True)
class NeighborAccumulation:
    """A reduction over the neighbours of each particle.

    Parameters
    ----------
    radius : float
        Search radius; must not exceed the index's cell width.
    predicate : callable
        ``predicate(dx) -> bool``; neighbours failing it are skipped.
    kernel : callable
        ``kernel(i, j, dx) -> value`` contributed by neighbour ``j``.
    combiner : callable
        Associative binary operation, ``operator.add`` by default.
    init : Any
        Identity element of ``combiner``.
    reads : frozenset of str
        Variables read by ``kernel`` and ``predicate`` besides ``dx``.
    native : str, optional
        Name of a backend kernel computing the same reduction, used instead
        of calling ``kernel`` per pair.
    """

    radius: float
    predicate: Callable[[np.ndarray], bool]
    kernel: Callable[[int, int, np.ndarray], Any]
    combiner: Callable[[Any, Any], Any] = operator.add
    init: Any = 0.0
    reads: frozenset = field(default_factory=frozenset)
    native: Optional[str] = None


@dataclass(frozen=True)
class UpdatePlan:
    target: str
    reads: frozenset
    writes: frozenset
    uses_neighbors: bool
    search_radius: Optional[float]

    @property
    def aliased(self) -> bool:
        if self.writes & self.reads:
            return True
        # neighbour kernels always read positions through dx
        return self.uses_neighbors and "position" in self.writes

    @property
    def buffered(self) -> bool:
        return self.aliased or self.uses_neighbors

    @property
    def requires_reindex(self) -> bool:
        return "position" in self.writes


def plan(reads, writes, uses_neighbors=False, radius=None, target=None) -> UpdatePlan:
    """Describe an update: which variables it reads and writes.

    >>> plan({"velocity"}, {"position"}).requires_reindex
    True
    """
    reads = frozenset(reads)
    writes = frozenset(writes)
    if target is None:
        if len(writes) != 1:
            raise ValueError("target must be given when writes is not a single variable")
        (target,) = writes
    return UpdatePlan(target, reads, writes, bool(uses_neighbors),
                      None if radius is None else float(radius))


def _alive_order(pset: ParticleSet, order) -> np.ndarray:
    alive = pset.alive
    if order is None:
        return np.flatnonzero(alive).astype(np.int64)
    order = np.asarray(order, dtype=np.int64)
    return order[alive[order]]


def _commit(pset: ParticleSet, target: str, idx: np.ndarray, values) -> None:
    pset.array(target)[idx] = values
    if target == "position":
        pset.position_version += 1
        index = pset.search_index
        if index is not None:
            index.sync()


def for_each_update(pset: ParticleSet, target: str, expr, reads=None,
                    vectorized: bool = False) -> UpdatePlan:
    """Set ``target[i] = expr(i)`` for every alive particle.

    Parameters
    ----------
    expr : callable
        Called with a particle index, or once with the array of all alive
        indices when ``vectorized`` is true.
    reads : iterable of str, optional
        Variables ``expr`` reads.  Unknown reads are treated as aliased.

    Returns the plan that was executed.
    """
    p = plan(pset.variable_names if reads is None else reads, {target})
    idx = np.flatnonzero(pset.alive)
    arr = pset.array(target)
    if vectorized:
        values = np.array(expr(idx), dtype=arr.dtype)
        _commit(pset, target, idx, values)
    elif p.aliased:
        buffer = np.empty((len(idx),) + arr.shape[1:], dtype=arr.dtype)
        for k, i in enumerate(idx):
            buffer[k] = expr(int(i))
        _commit(pset, target, idx, buffer)
    else:
        for i in idx:
            arr[i] = expr(int(i))
        if target == "position":
            _commit(pset, target, idx, arr[idx])
    return p


def _generic_accumulate(pset, index, acc, order, buffer):
    pos = pset.positions
    for i in order:
        total = acc.init
        for j, dx in radius_search(index, pset, pos[i], acc.radius):
            if acc.predicate(dx):
                total = acc.combiner(total, acc.kernel(int(i), j, dx))
        buffer[i] = total


def _native_accumulate(impl, pset, index, acc, order, buffer, workers):
    dom = index.domain
    kernel = getattr(impl, acc.native)
    args = (
        np.ascontiguousarray(pset.positions),
        pset.alive.view(np.uint8),
        index.cell_start, index.members,
        dom.lower, dom.lengths, dom.actual_cell_width,
        dom.cells_per_dim, dom.periodic.view(np.uint8),
        float(acc.radius),
    )
    if workers <= 1 or len(order) < 2 * workers:
        kernel(*args, order, buffer)
        return
    chunks = np.array_split(order, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for f in [pool.submit(kernel, *args, chunk, buffer) for chunk in chunks]:
            f.result()


def neighbor_accumulate_update(pset: ParticleSet, index: CellListIndex, target: str,
                               acc: NeighborAccumulation, post_combine,
                               order=None, workers: int = 1, backend=None,
                               use_native: bool = True) -> UpdatePlan:
    """Buffered neighbour reduction committed into ``target``.

    Every particle's reduction is evaluated against the pre-update state
    into a buffer; ``post_combine(old, reduced)`` is then applied once to
    the stacked arrays of all alive particles and written back.

    Parameters
    ----------
    order : sequence of int, optional
        Processing order of particles; defaults to ascending index.  The
        committed result does not depend on it.
    workers : int
        Threads used by the native kernel's evaluation phase.
    use_native : bool
        Allow dispatch to ``acc.native`` on the selected backend.
    """
    index.check_synced()
    if index.pset is not pset:
        raise ValueError("index belongs to a different particle set")
    p = plan(set(acc.reads) | {"position"}, {target}, uses_neighbors=True, radius=acc.radius)
    _check_radius(index, acc.radius, "accumulation radius")
    idx = _alive_order(pset, order)
    old = pset.array(target)
    buffer = np.zeros_like(old, dtype=np.result_type(old.dtype, np.asarray(acc.init).dtype))
    impl = kernels.get_backend(backend)
    if use_native and acc.native is not None and hasattr(impl, acc.native):
        buffer = np.ascontiguousarray(buffer, dtype=np.float64)
        _native_accumulate(impl, pset, index, acc, idx, buffer, workers)
    else:
        _generic_accumulate(pset, index, acc, idx, buffer)
    alive_idx = np.flatnonzero(pset.alive)
    _commit(pset, target, alive_idx, post_combine(old[alive_idx], buffer[alive_idx]))
    return p
