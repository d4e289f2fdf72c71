"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled extension (``_ckernels``) is used when it was built; otherwise the
pure numpy versions in ``_pykernels`` are used. The choice is made once, at
import. Both backends remain reachable through :func:`get_backend` so tests
and benchmarks can compare them.

The dispatch functions here normalise array arguments and optionally split
the work into contiguous chunks evaluated on a thread pool (the compiled
kernels release the GIL). Chunking never changes results: every output
element depends only on its own inputs.
"""
from concurrent.futures import ThreadPoolExecutor
import itertools
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

BACKEND = "compiled" if _ckernels is not None else "python"


def available_backends():
    return tuple(_BACKENDS)


def get_backend(name=None):
    """Kernel module for ``name`` (default: the backend selected at import)."""
    name = BACKEND if name is None else name
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"kernel backend {name!r} unavailable; have {available_backends()}"
        ) from None


def resolve_threads(threads):
    """Number of worker threads; 0 or None means one per CPU."""
    if not threads:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return int(threads)


def _chunked(fn, n, threads, *arrays):
    """Apply ``fn(*chunk_arrays)`` over row chunks and concatenate."""
    if threads <= 1 or n < 2 * threads:
        return fn(*arrays)
    bounds = np.linspace(0, n, threads + 1).astype(int)
    pieces = [tuple(a[lo:hi] for a in arrays) for lo, hi in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda args: fn(*args), pieces))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate(p) for p in zip(*parts))
    return np.concatenate(parts)


def polarization_grid(eps_l, eps_r, t_l, t_r, g, kt, *, backend=None, threads=1):
    """Boltzmann-averaged polarizations of the coupled charge-qubit pair.

    Args:
        eps_l, eps_r: detunings (ueV), broadcast against each other.
        t_l, t_r, g: tunnel couplings and capacitive coupling (ueV).
        kt: thermal energy k_B*T_e (ueV), must be > 0.

    Returns:
        (P_L, P_R) arrays with the broadcast shape of the detunings.
    """
    if not kt > 0:
        raise ValueError("thermal energy must be positive")
    el, er = np.broadcast_arrays(np.asarray(eps_l, float), np.asarray(eps_r, float))
    shape = el.shape
    el = np.ascontiguousarray(el.ravel())
    er = np.ascontiguousarray(er.ravel())
    mod = get_backend(backend)

    def run(a, b):
        return mod.polarization_grid(
            np.ascontiguousarray(a), np.ascontiguousarray(b),
            float(t_l), float(t_r), float(g), float(kt),
        )

    p_l, p_r = _chunked(run, el.shape[0], resolve_threads(threads), el, er)
    # rounding can leave |P| a few ulp above 1
    return np.clip(p_l, -1.0, 1.0).reshape(shape), np.clip(p_r, -1.0, 1.0).reshape(shape)


def charge_configurations(n_max):
    """All 4-dot occupations in [0, n_max]^4, lexicographic (last dot fastest)."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    return np.array(list(itertools.product(range(n_max + 1), repeat=4)), dtype=float)


def occupation_grid(inverse_matrix, e0, lin, n_max, kt=0.0, *, backend=None, threads=1):
    """Ground-state and thermal occupations of the four-dot network.

    The configuration energy is ``0.5*e0*N.K.N - N.lin``; ``lin`` holds one
    linear (gate-induced) term per pixel, shape (npix, 4), in ueV.

    Returns:
        (ground, mean): ground-state occupations (npix, 4) as ints, and the
        Boltzmann-mean occupations at ``kt`` (equal to ``ground`` for kt = 0).
    """
    configs = charge_configurations(n_max)
    k = np.asarray(inverse_matrix, float)
    quad = 0.5 * e0 * np.einsum("mi,ij,mj->m", configs, k, configs)
    lin = np.ascontiguousarray(np.atleast_2d(np.asarray(lin, float)))
    mod = get_backend(backend)

    def run(chunk):
        return mod.occupation_grid(configs, quad, np.ascontiguousarray(chunk), float(kt))

    idx, mean = _chunked(run, lin.shape[0], resolve_threads(threads), lin)
    return configs[idx].astype(np.int64), mean


def bem_potential(x, y, radius_eq, depth, screened, *, backend=None):
    """Panel potential-coefficient matrix; see ``_pykernels.bem_potential``."""
    mod = get_backend(backend)
    return mod.bem_potential(
        np.ascontiguousarray(x, dtype=float),
        np.ascontiguousarray(y, dtype=float),
        np.ascontiguousarray(radius_eq, dtype=float),
        float(depth),
        bool(screened),
    )
