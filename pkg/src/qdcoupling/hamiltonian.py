"""Two capacitively coupled charge qubits: Hamiltonian, spectrum, polarization.

Basis ordering is |LL>, |LR>, |RL>, |RR>, the first label for the left double
dot (dots 1-2) and the second for the right one (dots 4-3). sigma_z = +1 means
the electron sits in the outer dot, so the coupling term
(g/4)(I - sigma_z)(x)(I - sigma_z) costs g only when both electrons occupy the
inner dots 2 and 3. Detuning eps = mu_outer - mu_inner; raising it pushes the
electron inward and lowers the polarization.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from ._pykernels import COUPLING, SX_LEFT, SX_RIGHT, SZ_LEFT, SZ_RIGHT
from .units import ghz_to_uev, thermal_energy

IDENTITY = np.eye(4)


@dataclass(frozen=True)
class TwoQubitParams:
    """Detunings, tunnel couplings and capacitive coupling (ueV); T_e in K."""

    eps_l: float
    eps_r: float
    t_l: float
    t_r: float
    g: float
    t_e: float

    def __post_init__(self):
        for name in ("eps_l", "eps_r", "t_l", "t_r", "g", "t_e"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.t_l < 0 or self.t_r < 0:
            raise ValueError("tunnel couplings must be >= 0")
        if self.g < 0:
            raise ValueError("capacitive coupling must be >= 0")
        if not self.t_e > 0:
            raise ValueError("electron temperature must be > 0")

    @classmethod
    def from_ghz(cls, eps_l, eps_r, t_l, t_r, g, t_e):
        """Build from energies in GHz (temperature still in K)."""
        return cls(*(ghz_to_uev(x) for x in (eps_l, eps_r, t_l, t_r, g)), t_e)

    @property
    def kt(self):
        return thermal_energy(self.t_e)

    def mirrored(self):
        return TwoQubitParams(self.eps_r, self.eps_l, self.t_r, self.t_l, self.g, self.t_e)


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # ascending
    states: np.ndarray  # columns are eigenvectors


def build_hamiltonian(p):
    """4x4 Hamiltonian matrix (ueV) for parameters ``p``."""
    return (
        0.5 * p.eps_l * SZ_LEFT
        + p.t_l * SX_LEFT
        + 0.5 * p.eps_r * SZ_RIGHT
        + p.t_r * SX_RIGHT
        + p.g * COUPLING
    )


def eigensystem(h, atol=1e-12):
    """Spectral decomposition with ascending energies.

    Each eigenvector is signed so that its largest-magnitude component is
    positive (the first such component when several tie).

    Raises:
        ValueError: if ``h`` is not a symmetric 4x4 matrix.
    """
    h = np.asarray(h, float)
    if h.shape != (4, 4):
        raise ValueError("expected a 4x4 matrix")
    scale = max(1.0, float(np.abs(h).max()))
    if not np.allclose(h, h.T, rtol=0.0, atol=atol * scale):
        raise ValueError("Hamiltonian must be symmetric")
    energies, states = np.linalg.eigh(0.5 * (h + h.T))
    for k in range(4):
        col = states[:, k]
        mag = np.abs(col)
        lead = int(np.flatnonzero(mag >= mag.max() * (1 - 1e-12))[0])
        if col[lead] < 0:
            states[:, k] = -col
    return EigenSystem(energies, states)


def thermal_polarization(p):
    """(P_L, P_R): polarizations averaged over a Boltzmann distribution."""
    es = eigensystem(build_hamiltonian(p))
    weights = np.exp(-(es.energies - es.energies[0]) / p.kt)
    weights /= weights.sum()
    p_l = sum(w * es.states[:, i] @ SZ_LEFT @ es.states[:, i] for i, w in enumerate(weights))
    p_r = sum(w * es.states[:, i] @ SZ_RIGHT @ es.states[:, i] for i, w in enumerate(weights))
    return _bounded(p_l), _bounded(p_r)


def _bounded(p):
    # rounding can leave |P| a few ulp above 1
    return float(min(1.0, max(-1.0, p)))


def ground_state_polarization(p):
    """(P_L, P_R) of the ground state alone (the T_e -> 0 limit)."""
    psi = eigensystem(build_hamiltonian(p)).states[:, 0]
    return _bounded(psi @ SZ_LEFT @ psi), _bounded(psi @ SZ_RIGHT @ psi)


def polarization_map(eps_l, eps_r, t_l, t_r, g, t_e, threads=1):
    """Vectorized (P_L, P_R) over arrays of detunings (ueV)."""
    return kernels.polarization_grid(eps_l, eps_r, t_l, t_r, g, thermal_energy(t_e), threads=threads)


def polarization_line_location(eps_other, t_l, t_r, g, t_e, side="left", tol=1e-6):
    """Detuning where one double dot's polarization vanishes.

    For ``side="left"`` returns eps_L with P_L(eps_L, eps_R) = 0 for each
    eps_R in ``eps_other``; ``side="right"`` returns eps_R with P_R = 0 at
    each eps_L. The polarization is strictly decreasing in its own detuning,
    so the root is bracketed and bisected to ``tol`` (ueV).

    Raises:
        RuntimeError: if a sign change cannot be bracketed.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    other = np.atleast_1d(np.asarray(eps_other, float))
    kt = thermal_energy(t_e)

    def pol(x):
        if side == "left":
            return kernels.polarization_grid(x, other, t_l, t_r, g, kt)[0]
        return kernels.polarization_grid(other, x, t_l, t_r, g, kt)[1]

    span = g + 10.0 * (t_l + t_r + kt) + 1.0
    lo = np.full(other.shape, -span)
    hi = np.full(other.shape, span)
    for _ in range(60):
        bad_lo = pol(lo) <= 0
        bad_hi = pol(hi) >= 0
        if not (bad_lo.any() or bad_hi.any()):
            break
        lo = np.where(bad_lo, 2 * lo, lo)
        hi = np.where(bad_hi, 2 * hi, hi)
    else:
        raise RuntimeError("could not bracket the polarization line")
    n_iter = int(np.ceil(np.log2(np.max(hi - lo) / tol))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        positive = pol(mid) > 0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    root = 0.5 * (lo + hi)
    return root if np.ndim(eps_other) else float(root[0])
