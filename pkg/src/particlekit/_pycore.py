"""Pure-Python (numpy) kernels.

Same signatures and results as the compiled ``_core`` module; used when the
extension is not built.  The force kernel is vectorized per cell block.
"""
import numpy as np

NAME = "python"


def assign_cells(positions, alive, lower, width, cells_per_dim):
    """Linear cell id of every particle, -1 for dead particles."""
    alive = np.asarray(alive, dtype=bool)
    n = positions.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return out
    coords = np.floor((positions - lower) / width).astype(np.int64)
    np.clip(coords, 0, cells_per_dim - 1, out=coords)
    linear = np.zeros(n, dtype=np.int64)
    for k in range(len(cells_per_dim)):
        linear = linear * cells_per_dim[k] + coords[:, k]
    out[alive] = linear[alive]
    return out


def bucket_fill(cells, ncells):
    """Stable bucket sort of particle indices by cell.

    Returns ``(cell_start, members)``: particles of cell ``c`` are
    ``members[cell_start[c]:cell_start[c + 1]]`` in ascending index order.
    Entries with cell -1 are left out.
    """
    valid = cells >= 0
    counts = np.bincount(cells[valid], minlength=ncells)
    cell_start = np.zeros(ncells + 1, dtype=np.int64)
    np.cumsum(counts, out=cell_start[1:])
    members = np.flatnonzero(valid)
    members = members[np.argsort(cells[members], kind="stable")].astype(np.int64)
    return cell_start, members


def cell_coords(p, lower, width, cells_per_dim):
    c = np.floor((p - lower) / width).astype(np.int64)
    return np.clip(c, 0, cells_per_dim - 1)


def adjacent_cells(coords, cells_per_dim, periodic):
    """Sorted, de-duplicated linear ids of a cell and its neighbours."""
    linear = [0]
    for k in range(len(cells_per_dim)):
        n = int(cells_per_dim[k])
        options = []
        for off in (-1, 0, 1):
            c = int(coords[k]) + off
            if periodic[k]:
                c %= n
            elif not 0 <= c < n:
                continue
            options.append(c)
        linear = [base * n + c for base in linear for c in options]
    return sorted(set(linear))


def min_image(dx, lengths, periodic):
    """Minimum-image displacement; ties at L/2 resolve to +L/2."""
    dx = np.array(dx, dtype=np.float64, copy=True)
    for k in range(dx.shape[-1]):
        if periodic[k]:
            half = 0.5 * lengths[k]
            col = dx[..., k]
            col[col > half] -= lengths[k]
            col[col <= -half] += lengths[k]
    return dx


def exp_force_sum(positions, alive, cell_start, members, lower, lengths, width,
                  cells_per_dim, periodic, r_cut, order, out):
    """out[i] = sum_j -exp(-|dx|) dx/|dx| over 0 < |dx| < r_cut, i in order."""
    if len(order) == 0:
        return
    alive = np.asarray(alive, dtype=bool)
    targets = np.zeros(positions.shape[0], dtype=bool)
    targets[order] = True
    ncells = len(cell_start) - 1
    dim = len(cells_per_dim)
    strides = np.ones(dim, dtype=np.int64)
    for k in range(dim - 2, -1, -1):
        strides[k] = strides[k + 1] * cells_per_dim[k + 1]
    for c in range(ncells):
        lo, hi = cell_start[c], cell_start[c + 1]
        if lo == hi:
            continue
        a = members[lo:hi]
        a = a[targets[a]]
        if len(a) == 0:
            continue
        coords = (c // strides) % cells_per_dim
        nbr = adjacent_cells(coords, cells_per_dim, periodic)
        b = np.concatenate([members[cell_start[m]:cell_start[m + 1]] for m in nbr])
        b = b[alive[b]]
        dx = min_image(positions[b][None, :, :] - positions[a][:, None, :], lengths, periodic)
        r = np.sqrt(np.einsum("ijk,ijk->ij", dx, dx))
        inside = (r > 0) & (r < r_cut)
        safe = np.where(inside, r, 1.0)
        scale = np.where(inside, -np.exp(-safe), 0.0)
        out[a] = ((scale[:, :, None] * dx) / safe[:, :, None]).sum(axis=1)
