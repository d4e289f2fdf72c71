"""Pure numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels.pyx`` must agree with them to
round-off. Array arguments are assumed to be contiguous float64 already (the
dispatcher in :mod:`qdcoupling.kernels` takes care of that).
"""
import numpy as np

_SZ = np.diag([1.0, -1.0])
_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_I2 = np.eye(2)

# Basis |LL>, |LR>, |RL>, |RR>; sigma_z = +1 for the outer dot.
SZ_LEFT = np.kron(_SZ, _I2)
SZ_RIGHT = np.kron(_I2, _SZ)
SX_LEFT = np.kron(_SX, _I2)
SX_RIGHT = np.kron(_I2, _SX)
COUPLING = np.kron(_I2 - _SZ, _I2 - _SZ) / 4.0

_ZL = np.diag(SZ_LEFT).copy()
_ZR = np.diag(SZ_RIGHT).copy()

_CHUNK = 4096


def polarization_grid(eps_l, eps_r, t_l, t_r, g, kt):
    """Thermal polarizations (P_L, P_R) at each (eps_l[k], eps_r[k])."""
    n = eps_l.shape[0]
    p_l = np.empty(n)
    p_r = np.empty(n)
    fixed = t_l * SX_LEFT + t_r * SX_RIGHT + g * COUPLING
    for start in range(0, n, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n))
        h = (
            fixed
            + 0.5 * eps_l[sl, None, None] * SZ_LEFT
            + 0.5 * eps_r[sl, None, None] * SZ_RIGHT
        )
        energies, states = np.linalg.eigh(h)
        weights = np.exp(-(energies - energies[:, :1]) / kt)
        weights /= weights.sum(axis=1, keepdims=True)
        prob = states**2  # [point, basis, eigenstate]
        p_l[sl] = np.einsum("ni,nki,k->n", weights, prob, _ZL)
        p_r[sl] = np.einsum("ni,nki,k->n", weights, prob, _ZR)
    return p_l, p_r


# configurations more than this many kT above the ground state are dropped
BOLTZMANN_CUTOFF = 50.0


def occupation_grid(configs, quad, lin, kt):
    """Ground-state index and thermal mean occupation per pixel.

    Energy of configuration m at pixel p is
    ``quad[m] - (c0*l0 + c1*l1 + c2*l2 + c3*l3)`` evaluated left to right so
    that ties resolve identically in both backends; the first (lexicographic)
    minimum wins.
    """
    n = lin.shape[0]
    ground = np.empty(n, dtype=np.int64)
    mean = np.empty((n, 4))
    step = max(1, _CHUNK * 16 // max(1, configs.shape[0]))
    for start in range(0, n, step):
        sl = slice(start, min(start + step, n))
        lc = lin[sl]
        acc = configs[None, :, 0] * lc[:, 0:1]
        acc = acc + configs[None, :, 1] * lc[:, 1:2]
        acc = acc + configs[None, :, 2] * lc[:, 2:3]
        acc = acc + configs[None, :, 3] * lc[:, 3:4]
        energy = quad[None, :] - acc
        idx = np.argmin(energy, axis=1)
        ground[sl] = idx
        if kt > 0:
            emin = energy[np.arange(idx.shape[0]), idx]
            x = (energy - emin[:, None]) / kt
            w = np.where(x < BOLTZMANN_CUTOFF, np.exp(-np.minimum(x, BOLTZMANN_CUTOFF)), 0.0)
            mean[sl] = (w @ configs) / w.sum(axis=1)[:, None]
        else:
            mean[sl] = configs[idx]
    return ground, mean


def bem_potential(x, y, radius_eq, depth, screened):
    """Panel potential-coefficient matrix (units of 1/(4 pi eps) per nm).

    Self terms use the centre potential of a uniformly charged disc of equal
    area, 2/r_eq. With ``screened`` each panel's image charge mirrored across
    the grounded plane at ``depth`` contributes -1/r_image.
    """
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    r2 = dx * dx + dy * dy
    n = x.shape[0]
    with np.errstate(divide="ignore"):
        p = 1.0 / np.sqrt(r2)
    p[np.diag_indices(n)] = 2.0 / radius_eq
    if screened:
        p -= 1.0 / np.sqrt(r2 + 4.0 * depth * depth)
    return p
