"""Particle containers, cell-list neighbour search and a small MD engine."""
from . import kernels
from .errors import (
    ConfigurationError,
    DomainViolationError,
    SearchRadiusError,
    StaleIndexError,
    StaleReferenceError,
)
from .neighbor_query import NeighborHit, box_search, min_image_dx, radius_search
from .operators import (
    NeighborAccumulation,
    UpdatePlan,
    for_each_update,
    neighbor_accumulate_update,
    plan,
)
from .particle_set import ParticleRef, ParticleSet, Variable, create, write_snapshot
from .spatial_index import (
    CellListIndex,
    Domain,
    Variant,
    cell_of,
    init_neighbour_search,
    wrap_position,
)

__version__ = "0.1.0"
