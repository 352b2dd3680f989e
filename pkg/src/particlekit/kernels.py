"""Backend selection for the hot kernels.

The compiled extension ``particlekit._core`` is used when it imports;
otherwise the numpy implementation in ``particlekit._pycore`` is.  Both
expose ``assign_cells``, ``bucket_fill`` and ``exp_force_sum``.
"""
import logging

from . import _pycore

log = logging.getLogger(__name__)

try:
    from . import _core
except ImportError:  # extension not built
    _core = None
    log.debug("compiled core unavailable, using numpy kernels")

_BACKENDS = {"python": _pycore}
if _core is not None:
    _BACKENDS["compiled"] = _core

_preferred = _core if _core is not None else _pycore
_active = _preferred


def available_backends():
    return tuple(_BACKENDS)


def get_backend(name=None):
    """Return a backend module by name.

    ``None`` gives the currently selected backend, ``"auto"`` the compiled
    one when it is built.
    """
    if name is None:
        return _active
    if name == "auto":
        return _preferred
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} not available (have {', '.join(_BACKENDS)})"
        ) from None


def set_backend(name):
    """Select the process-wide default backend."""
    global _active
    _active = get_backend(name)
    return _active


def active_backend_name():
    return _active.NAME


def has_compiled():
    return _core is not None

