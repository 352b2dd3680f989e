"""Structure-of-arrays particle container.

A :class:`ParticleSet` keeps one contiguous numpy array per variable.
Three variables always exist: ``position`` (``(N, D)`` floats), ``id``
(unique, never reused) and ``alive``.  Extra variables are declared with
:class:`Variable` when the set is created.

Examples
--------
>>> ps = ParticleSet(3, dim=2, variables=[Variable("velocity")])
>>> ps.get("id", 2)
2
>>> ref = ps.push(position=[0.5, 0.5])
>>> ref.id, len(ps)
(3, 4)
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, TextIO

import numpy as np

from .errors import StaleReferenceError

__all__ = [
    "Variable",
    "ParticleSet",
    "ParticleRef",
    "create",
    "write_snapshot",
    "snapshot_header",
]

DEFAULT_VARIABLES = ("position", "id", "alive")


@dataclass(frozen=True)
class Variable:
    """Declaration of a user variable.

    Parameters
    ----------
    name : str
        Variable name, must not clash with the default variables.
    dtype : numpy dtype, optional
        Element type, float64 by default.
    vector : bool, optional
        If True (default) each particle holds a ``D``-vector, otherwise a
        scalar.
    """

    name: str
    dtype: Any = np.float64
    vector: bool = True


class ParticleRef:
    """Handle to the particle at ``index``.

    Reads and writes go straight to the owning set's arrays.  A ref is
    invalidated by any structural change of the set (push, erase, reorder);
    using it afterwards raises :class:`StaleReferenceError`.
    """

    __slots__ = ("_set", "_index", "_version")

    def __init__(self, pset: ParticleSet, index: int):
        self._set = pset
        self._index = index
        self._version = pset.structure_version

    def _check(self):
        if self._version != self._set.structure_version:
            raise StaleReferenceError(
                f"reference to index {self._index} outlived a structural change"
            )

    @property
    def index(self) -> int:
        self._check()
        return self._index

    def __getitem__(self, name: str):
        self._check()
        return self._set.get(name, self._index)

    def __setitem__(self, name: str, value):
        self._check()
        self._set.set(name, self._index, value)

    def get(self, name: str):
        return self[name]

    @property
    def id(self) -> int:
        return self["id"]

    @property
    def position(self) -> np.ndarray:
        return self["position"]

    @property
    def alive(self) -> bool:
        return self["alive"]

    def __repr__(self):
        return f"ParticleRef(index={self._index})"


class ParticleSet:
    """Particles stored as parallel per-variable arrays.

    Parameters
    ----------
    n : int
        Initial particle count.  Ids are ``0..n-1``, every particle is
        alive, positions and user variables are zero.
    dim : int
        Spatial dimension, fixed for the lifetime of the set.
    variables : iterable of Variable, optional
        User variables in addition to position, id and alive.
    """

    def __init__(self, n: int = 0, dim: int = 2, variables: Iterable[Variable] = ()):
        if n < 0:
            raise ValueError(f"particle count must be non-negative, got {n}")
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        self.dim = int(dim)
        self._user = {}
        for var in variables:
            if var.name in DEFAULT_VARIABLES or var.name in self._user:
                raise ValueError(f"duplicate variable name {var.name!r}")
            self._user[var.name] = var

        capacity = max(int(n), 8)
        self._arrays = {
            "position": np.zeros((capacity, self.dim), dtype=np.float64),
            "id": np.zeros(capacity, dtype=np.int64),
            "alive": np.zeros(capacity, dtype=bool),
        }
        for name, var in self._user.items():
            shape = (capacity, self.dim) if var.vector else (capacity,)
            self._arrays[name] = np.zeros(shape, dtype=var.dtype)

        self._count = int(n)
        self._arrays["id"][:n] = np.arange(n)
        self._arrays["alive"][:n] = True
        self._next_id = int(n)
        # bumped on push/erase/permute (invalidates refs and indexes)
        self.structure_version = 0
        # bumped on tracked position writes
        self.position_version = 0
        self.search_index = None

    # -- introspection -----------------------------------------------------

    def __len__(self) -> int:
        return self._count

    @property
    def count(self) -> int:
        return self._count

    @property
    def variable_names(self) -> tuple[str, ...]:
        return DEFAULT_VARIABLES + tuple(self._user)

    @property
    def user_variables(self) -> dict[str, Variable]:
        return dict(self._user)

    def array(self, name: str) -> np.ndarray:
        """Live view of one variable over all ``count`` particles.

        Writing to the view writes the set.  Position writes made this way
        are not tracked; call ``sync`` on the spatial index afterwards.
        """
        try:
            return self._arrays[name][: self._count]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    @property
    def positions(self) -> np.ndarray:
        return self.array("position")

    @property
    def ids(self) -> np.ndarray:
        return self.array("id")

    @property
    def alive(self) -> np.ndarray:
        return self.array("alive")

    # -- element access ----------------------------------------------------

    def _check_index(self, index: int) -> int:
        index = int(index)
        if not 0 <= index < self._count:
            raise IndexError(f"particle index {index} out of range for count {self._count}")
        return index

    def get(self, name: str, index: int):
        """Value of variable ``name`` for particle ``index``.

        Vector values are returned as copies; scalar values as Python
        scalars.
        """
        index = self._check_index(index)
        value = self.array(name)[index]
        if isinstance(value, np.ndarray):
            return value.copy()
        return value.item()

    def set(self, name: str, index: int, value) -> None:
        index = self._check_index(index)
        if name == "id":
            raise ValueError("ids are assigned by the set and cannot be written")
        self.array(name)[index] = value
        if name == "position":
            self.position_version += 1

    def __getitem__(self, index: int) -> ParticleRef:
        return ParticleRef(self, self._check_index(index))

    def __iter__(self):
        for i in range(self._count):
            yield ParticleRef(self, i)

    # -- structural mutation -------------------------------------------------

    def _grow(self, needed: int):
        capacity = len(self._arrays["id"])
        if needed <= capacity:
            return
        while capacity < needed:
            capacity *= 2
        for name, arr in self._arrays.items():
            grown = np.zeros((capacity,) + arr.shape[1:], dtype=arr.dtype)
            grown[: self._count] = arr[: self._count]
            self._arrays[name] = grown

    def push(self, position=None, **values) -> ParticleRef:
        """Append one particle and return a ref to it.

        Unspecified variables are zero.  The new particle receives the next
        id from the set's counter and is alive.
        """
        unknown = set(values) - set(self._user)
        if unknown:
            raise KeyError(f"unknown variables {sorted(unknown)}")
        self._grow(self._count + 1)
        i = self._count
        for name, arr in self._arrays.items():
            arr[i] = 0
        if position is not None:
            self._arrays["position"][i] = position
        for name, value in values.items():
            self._arrays[name][i] = value
        self._arrays["id"][i] = self._next_id
        self._arrays["alive"][i] = True
        self._next_id += 1
        self._count += 1
        self.structure_version += 1
        return ParticleRef(self, i)

    def erase(self, index: int) -> None:
        """Remove particle ``index`` immediately.

        The last particle is moved into the freed slot, so the order of the
        survivors changes but their (id -> values) mapping does not.
        """
        index = self._check_index(index)
        last = self._count - 1
        if index != last:
            for arr in self._arrays.values():
                arr[index] = arr[last]
        self._count -= 1
        self.structure_version += 1

    def permute(self, order: np.ndarray) -> None:
        """Reorder all variables together so that new[k] = old[order[k]].

        ``order`` must be a permutation of ``range(count)``.
        """
        order = np.asarray(order, dtype=np.intp)
        if order.shape != (self._count,):
            raise ValueError("order must have one entry per particle")
        for name, arr in self._arrays.items():
            arr[: self._count] = arr[: self._count][order]
        self.structure_version += 1

    def find(self, particle_id: int) -> int:
        """Index of the particle with the given id, or -1."""
        hits = np.flatnonzero(self.ids == particle_id)
        return int(hits[0]) if len(hits) else -1

    def __repr__(self):
        names = ", ".join(self._user)
        return f"ParticleSet(count={self._count}, dim={self.dim}, variables=[{names}])"


def create(n: int, dim: int = 2, variables: Iterable[Variable] = ()) -> ParticleSet:
    """Create a set of ``n`` zero-initialized particles."""
    return ParticleSet(n, dim=dim, variables=variables)


_AXES = ("x", "y", "z")


def snapshot_header(dim: int, velocity: str = "velocity") -> list[str]:
    if not 1 <= dim <= 3:
        raise ValueError("snapshots support 1 to 3 dimensions")
    prefix = velocity[0] if velocity else "v"
    return ["step", "id", *_AXES[:dim], *(prefix + a for a in _AXES[:dim])]


def write_snapshot(
    fh: TextIO,
    pset: ParticleSet,
    step: int,
    velocity: str = "velocity",
    header: bool = True,
) -> int:
    """Write one CSV snapshot of all alive particles, ordered by id.

    Columns are ``step,id,x[,y[,z]],vx[,vy[,vz]]``; reals are printed with
    17 significant digits so they round-trip exactly.  Returns the number of
    rows written.
    """
    dim = pset.dim
    lines = []
    if header:
        lines.append(",".join(snapshot_header(dim, velocity)))
    alive = pset.alive
    ids = pset.ids[alive]
    order = np.argsort(ids, kind="stable")
    pos = pset.positions[alive][order]
    vel = pset.array(velocity)[alive][order]
    for pid, p, v in zip(ids[order], pos, vel):
        reals = ",".join(f"{x:.17g}" for x in (*p, *v))
        lines.append(f"{step},{pid},{reals}")
    if lines:
        fh.write("\n".join(lines) + "\n")
    return len(ids)
