"""Molecular dynamics with a cut-off exponential pair force.

``N`` particles in the periodic unit square repel each other with

    f_ij = -c * exp(-|dx_ij|) * dx_ij / |dx_ij|   for |dx_ij| < r_cut

where ``dx_ij`` is the minimum-image vector from particle ``i`` to ``j``.
Each step is semi-implicit Euler with unit timestep: velocities are updated
from the forces first, then positions move by the new velocities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .operators import NeighborAccumulation, for_each_update, neighbor_accumulate_update
from .particle_set import ParticleSet, Variable
from .spatial_index import CellListIndex, Variant, init_neighbour_search

__all__ = [
    "SimParams",
    "force",
    "exp_force_accumulation",
    "init_random",
    "velocity_update",
    "position_update",
    "step",
    "run",
    "brute_force_reference",
]

LOWER = (0.0, 0.0)
UPPER = (1.0, 1.0)


def default_r_cut(n: int) -> float:
    """Cut-off giving roughly three neighbours per particle in 2D.

    Capped at the unit box side, which only matters for ``n < 3``.
    """
    return min(math.sqrt(3.0 / n), 1.0)


@dataclass
class SimParams:
    n: int
    seed: int = 0
    timesteps: int = 1000
    r_cut: Optional[float] = None
    c: float = 1e-3
    dt: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one particle, got n={self.n}")
        if self.timesteps < 0:
            raise ValueError("timesteps must be non-negative")
        if self.r_cut is None:
            self.r_cut = default_r_cut(self.n)
        if not 0 < self.r_cut <= 1.0:
            raise ValueError(f"r_cut must lie in (0, 1], got {self.r_cut}")
        if self.dt != 1.0:
            raise ValueError("the integrator uses a fixed unit timestep")


def force(dx, c: float, r_cut: float) -> np.ndarray:
    """Pair force on a particle from a neighbour at displacement ``dx``.

    Zero outside the cut-off, and also for ``|dx| == 0`` so that a
    self-pair never produces NaN.
    """
    dx = np.asarray(dx, dtype=np.float64)
    r = math.sqrt(float(np.dot(dx, dx)))
    if r == 0.0 or r >= r_cut:
        return np.zeros_like(dx)
    return -c * math.exp(-r) * dx / r


def _unit_force(i, j, dx):
    r = math.sqrt(float(np.dot(dx, dx)))
    return (-math.exp(-r) * dx) / r


def exp_force_accumulation(r_cut: float) -> NeighborAccumulation:
    """Sum of ``-exp(-|dx|) dx/|dx|`` over neighbours with 0 < |dx| < r_cut.

    The force constant is applied by the caller.  Backends provide the
    same reduction natively as ``exp_force_sum``.
    """

    def inside(dx):
        r = math.sqrt(float(np.dot(dx, dx)))
        return 0.0 < r < r_cut

    return NeighborAccumulation(
        radius=r_cut,
        predicate=inside,
        kernel=_unit_force,
        combiner=np.add,
        init=0.0,
        native="exp_force_sum",
    )


def init_random(params: SimParams, variant: Variant = Variant.BULK_REORDERED,
                backend=None) -> tuple[ParticleSet, CellListIndex]:
    """Uniform random positions in the unit square, zero velocities.

    Positions come from numpy's PCG64 generator seeded with
    ``params.seed``, drawn as ``(x, y)`` pairs particle by particle.
    """
    rng = np.random.default_rng(params.seed)
    pset = ParticleSet(params.n, dim=2, variables=[Variable("velocity")])
    pset.positions[:] = rng.random((params.n, 2))
    pset.array("velocity")[:] = 0.0
    index = init_neighbour_search(pset, LOWER, UPPER, params.r_cut, (True, True),
                                  variant=variant, backend=backend)
    return pset, index


def velocity_update(pset, index, params: SimParams, order=None, workers=1,
                    backend=None, use_native=True):
    c = params.c
    return neighbor_accumulate_update(
        pset, index, "velocity", exp_force_accumulation(params.r_cut),
        lambda v, s: v + c * s,
        order=order, workers=workers, backend=backend, use_native=use_native,
    )


def position_update(pset):
    vel = pset.array("velocity")
    pos = pset.positions
    return for_each_update(pset, "position", lambda idx: pos[idx] + vel[idx],
                           reads={"position", "velocity"}, vectorized=True)


def step(pset, index, params: SimParams, workers=1, backend=None):
    """Advance one timestep: velocities from forces, then positions."""
    velocity_update(pset, index, params, workers=workers, backend=backend)
    position_update(pset)


def run(params: SimParams, writer: Optional[Callable[[int, ParticleSet], None]] = None,
        variant: Variant = Variant.BULK_REORDERED, workers=1, backend=None) -> ParticleSet:
    """Run ``params.timesteps`` steps and return the final particle set.

    ``writer(step, pset)`` is called with the state before every step, as
    the snapshot for that step.
    """
    pset, index = init_random(params, variant=variant, backend=backend)
    for n in range(params.timesteps):
        if writer is not None:
            writer(n, pset)
        step(pset, index, params, workers=workers, backend=backend)
    return pset


def _periodic_images(d, length=1.0):
    """Pick, per component, the image of ``d`` with the smallest magnitude."""
    cands = np.stack([d - length, d, d + length])
    pick = np.argmin(np.abs(cands), axis=0)
    return np.take_along_axis(cands, pick[None], axis=0)[0]


def brute_force_reference(pset: ParticleSet, params: SimParams, block: int = 512) -> np.ndarray:
    """Velocities after one force update, by direct all-pairs summation.

    Uses no spatial index: every pair is tested, with the minimum image
    chosen explicitly among the three periodic images per dimension.
    Returns an array aligned with the set's current indices.
    """
    pos = pset.positions
    vel = pset.array("velocity")
    alive = pset.alive
    src = pos[alive]
    out = vel.copy()
    targets = np.flatnonzero(alive)
    for start in range(0, len(targets), block):
        t = targets[start:start + block]
        dx = _periodic_images(src[None, :, :] - pos[t][:, None, :])
        r = np.sqrt((dx ** 2).sum(axis=-1))
        inside = (r > 0) & (r < params.r_cut)
        safe = np.where(inside, r, 1.0)
        f = np.where(inside[..., None], -np.exp(-safe)[..., None] * dx / safe[..., None], 0.0)
        out[t] = vel[t] + params.c * f.sum(axis=1)
    return out
