"""Backend selection for the hot kernels.

Kernels come in two flavours: a numba ``@njit`` loop version and a
vectorised numpy version.  The numba path is used unless the environment
variable ``INDUCED_PRESSURE_PURE_NUMPY`` is set to a truthy value or numba
cannot be imported.  The flag is read on every dispatch, so it can be
flipped at runtime (tests do this with ``monkeypatch``).
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

ENV_FLAG = "INDUCED_PRESSURE_PURE_NUMPY"
HAVE_NUMBA = numba is not None


def use_numba():
    flag = os.environ.get(ENV_FLAG, "").strip().lower()
    if flag in ("1", "true", "yes", "on"):
        return False
    return HAVE_NUMBA


def backend_name():
    return "numba" if use_numba() else "numpy"


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise."""
    kwargs.setdefault("cache", True)
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)
